"""Wire-schema conformance, including against the orchestrator's own client."""

import pytest
from fastapi.testclient import TestClient

from attribution_service.service import create_app


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


class TestWireSchema:
    def test_attribute_request_response_shape(self, client):
        response = client.post(
            "/v1/attribute",
            json={"input": "the covid vaccine works", "target": "SUPPORT", "method": "attention"},
        )
        assert response.status_code == 200
        body = response.json()
        assert set(body) == {"tokens", "scores", "method"}
        assert body["tokens"] == ["the", "covid", "vaccine", "works"]
        assert len(body["scores"]) == 4
        assert body["method"] == "attention"

    def test_steps_parameter_accepted(self, client):
        response = client.post(
            "/v1/attribute",
            json={"input": "a b c", "target": "d", "method": "integrated_gradient", "steps": 8},
        )
        assert response.status_code == 200

    def test_unknown_method_is_400(self, client):
        response = client.post(
            "/v1/attribute", json={"input": "a", "target": "b", "method": "occlusion"}
        )
        assert response.status_code == 400
        assert response.json()["error"]["code"] == "unknown_method"

    def test_missing_field_is_422_style_validation(self, client):
        response = client.post("/v1/attribute", json={"input": "a", "method": "lime"})
        assert response.status_code in (400, 422)

    def test_health_reports_model_pin(self, client):
        body = client.get("/health").json()
        assert body["status"] == "ok"
        assert body["pin_matches"] is True
        assert len(body["model_hash"]) == 64


class TestAgainstOrchestratorClient:
    """The primary package's HTTP attribution client drives this service."""

    def test_client_round_trip(self, client):
        from chatprobe.backends import BackendConfig, HttpAttributionBackend

        backend = HttpAttributionBackend("http://testserver", BackendConfig(), client)
        for method in ("input_x_gradient", "attention", "lime", "integrated_gradient"):
            result = backend.attribute("masks lower the spread of covid", "SUPPORT", method)
            assert len(result.tokens) == len(result.scores) == 6
            assert result.method == method

    def test_client_sees_unknown_method_as_degradation(self, client):
        from chatprobe.backends import BackendConfig, HttpAttributionBackend
        from chatprobe.backends.protocol import AttributionUnavailable

        backend = HttpAttributionBackend("http://testserver", BackendConfig(), client)
        with pytest.raises(AttributionUnavailable):
            backend.attribute("a b", "c", "occlusion")

    def test_executor_consumes_service_end_to_end(self, client):
        """Full loop: the executor's attribution op rendered from this service."""
        import random
        from pathlib import Path

        import chatprobe
        from chatprobe.backends import (
            BackendConfig,
            BackendSuite,
            HttpAttributionBackend,
            MockEmbeddingBackend,
            MockGenerationBackend,
        )
        from chatprobe.catalog import catalog_default, parse_query
        from chatprobe.data import PredictionCache, load_dataset
        from chatprobe.executor import Executor, RunContext, TemplateLibrary, load_task_prompts

        resources = Path(chatprobe.__file__).parent / "resources"
        ds = load_dataset(resources / "datasets" / "covid_fact_mini.jsonl")
        suite = BackendSuite(
            generation=MockGenerationBackend([("Claim:", "SUPPORT")]),
            embedding=MockEmbeddingBackend(),
            attribution=HttpAttributionBackend("http://testserver", BackendConfig(), client),
        )
        executor = Executor(
            catalog_default(), suite, TemplateLibrary(resources / "templates"),
            load_task_prompts(resources / "prompts" / "tasks"),
        )
        rc = RunContext(dataset=ds, cache=PredictionCache(), rng=random.Random(0))
        result = executor.exec_query(parse_query("filter id 0 and nlpattribute 3 lime"), rc)
        attribution = [p for p in result.payloads if p["kind"] == "attribution"][0]
        assert attribution["topk"] == 3
        assert len(attribution["tokens"]) == len(attribution["scores"])

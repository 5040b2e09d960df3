"""HTTP surface: POST /v1/attribute plus a health endpoint.

Request:  {"input": "...", "target": "...", "method": "...", "steps": 32}
Response: {"tokens": [...], "scores": [...], "method": "..."}

Unknown methods return 400; an out-of-memory condition returns 503 with an
advice payload. Jobs are processed one at a time (single worker, the model
lock serializes requests).
"""

from __future__ import annotations

import math
import threading

from fastapi import FastAPI
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import config
from .methods import DEFAULT_IG_STEPS, METHODS, UnknownMethod, attribute_text
from .model import TinyCausalLM


class AttributionJob(BaseModel):
    input: str
    target: str
    method: str
    steps: int = Field(default=DEFAULT_IG_STEPS, ge=1)


def create_app(model: TinyCausalLM | None = None) -> FastAPI:
    app = FastAPI(title="attribution-service", docs_url=None, redoc_url=None)
    app.state.model = model or TinyCausalLM()
    app.state.lock = threading.Lock()
    model_hash = app.state.model.parameter_hash()

    @app.post("/v1/attribute")
    def attribute(job: AttributionJob):
        try:
            with app.state.lock:
                result = attribute_text(
                    app.state.model, job.input, job.target, job.method, job.steps
                )
        except UnknownMethod as exc:
            return JSONResponse(
                status_code=400,
                content={"error": {"code": "unknown_method", "message": str(exc),
                                   "methods": list(METHODS)}},
            )
        except MemoryError:
            return JSONResponse(
                status_code=503,
                content={"error": {"code": "out_of_memory",
                                   "message": "attribution ran out of memory",
                                   "advice": "shorten the input or lower steps"}},
            )
        except ValueError as exc:
            return JSONResponse(
                status_code=400,
                content={"error": {"code": "bad_request", "message": str(exc)}},
            )
        if any(not math.isfinite(s) for s in result["scores"]):
            return JSONResponse(
                status_code=500,
                content={"error": {"code": "non_finite_scores",
                                   "message": "attribution produced non-finite scores"}},
            )
        return result

    @app.get("/health")
    def health():
        return {
            "status": "ok",
            "model_hash": model_hash,
            "pinned_model_hash": config.PINNED_MODEL_HASH,
            "pin_matches": model_hash == config.PINNED_MODEL_HASH,
            "parameters": app.state.model.parameter_count(),
            "methods": list(METHODS),
        }

    return app


def main() -> int:
    import uvicorn

    uvicorn.run(create_app(), host=config.HOST, port=config.PORT)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

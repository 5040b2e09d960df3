// Thin typed client over the documented HTTP API. The fetch function is
// injectable so contract tests can point it anywhere.

import type {
  CreateSessionResponse,
  CustomInputResponse,
  DatasetPage,
  ExportDocument,
  HealthResponse,
  OperationsResponse,
  SessionSettings,
  SuggestionPayload,
  TurnResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: { "content-type": "application/json" } };
    if (body !== undefined) {
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchFn(`${this.baseUrl}${path}`, init);
    const payload = await response.json();
    if (!response.ok) {
      const error = (payload as { error?: { code?: string; message?: string } }).error ?? {};
      throw new ApiError(response.status, error.code ?? "unknown", error.message ?? "request failed");
    }
    return payload as T;
  }

  createSession(seed?: number, settings?: Partial<SessionSettings>): Promise<CreateSessionResponse> {
    return this.request("POST", "/api/sessions", { seed, settings });
  }

  sendTurn(sessionId: string, text: string): Promise<TurnResponse> {
    return this.request("POST", `/api/sessions/${sessionId}/turns`, { text });
  }

  /** Accepting a suggestion chip sends the suggested question verbatim. */
  acceptSuggestion(sessionId: string, suggestion: SuggestionPayload): Promise<TurnResponse> {
    return this.sendTurn(sessionId, suggestion.question);
  }

  putSettings(sessionId: string, settings: Partial<SessionSettings>): Promise<{ settings: SessionSettings }> {
    return this.request("PUT", `/api/sessions/${sessionId}/settings`, settings);
  }

  exportSession(sessionId: string): Promise<ExportDocument> {
    return this.request("GET", `/api/sessions/${sessionId}/export`);
  }

  listInstances(dataset: string, offset = 0, limit = 50): Promise<DatasetPage> {
    return this.request("GET", `/api/datasets/${dataset}/instances?offset=${offset}&limit=${limit}`);
  }

  addCustomInput(fields: Record<string, unknown>): Promise<CustomInputResponse> {
    return this.request("POST", "/api/custom-inputs", { fields });
  }

  listCustomInputs(): Promise<{ history: { id: number; fields: Record<string, string> }[] }> {
    return this.request("GET", "/api/custom-inputs");
  }

  operations(): Promise<OperationsResponse> {
    return this.request("GET", "/api/operations");
  }

  health(): Promise<HealthResponse> {
    return this.request("GET", "/api/health");
  }
}

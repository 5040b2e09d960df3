// Typed mirrors of the documented /api/* payloads (docs/api.md).

export interface SessionSettings {
  expertise: string;
  cot_strategy: string;
  parsing_strategy: string;
  prompt_overrides: Record<string, string>;
  rng_seed?: number;
}

export interface CreateSessionResponse {
  session_id: string;
  settings: SessionSettings;
}

export interface SuggestionPayload {
  op: string;
  question: string;
}

export interface AttributionPayload {
  kind: "attribution";
  id: number;
  method: string;
  tokens: string[];
  scores: number[];
  topk: number;
  top_indices: number[];
}

export interface InstanceRow {
  id: number;
  fields: Record<string, string>;
  label: string | null;
  source?: string;
}

export interface InstancesPayload {
  kind: "instances";
  count: number;
  items: InstanceRow[];
}

export type TurnPayload =
  | AttributionPayload
  | InstancesPayload
  | ({ kind: string } & Record<string, unknown>);

export interface ProvenanceCall {
  kind: string;
  prompt: string;
  response: string;
}

export interface TurnResponse {
  turn_index: number;
  response_text: string;
  parse: string | null;
  clarification: boolean;
  suggestion: SuggestionPayload | null;
  payloads: TurnPayload[];
  repairs: string[];
  strategy: string | null;
  provenance: ProvenanceCall[];
}

export interface DatasetPage {
  name: string;
  task: string;
  total: number;
  label_names: string[];
  offset: number;
  instances: InstanceRow[];
}

export interface OperationEntry {
  name: string;
  category: string;
  accepts_custom_input: boolean;
  description: string;
  attributes: {
    name: string;
    kind: string;
    required: boolean;
    default: unknown;
    values: string[];
  }[];
}

export interface OperationsResponse {
  operations: OperationEntry[];
  connectives: string[];
}

export interface HealthResponse {
  status: string;
  backends: Record<string, Record<string, unknown>>;
}

export interface CustomInputResponse {
  instance: InstanceRow;
  history_length: number;
}

export interface ExportTurn {
  user_text: string;
  parse: string | null;
  response_text: string;
  suggestion: SuggestionPayload | null;
}

export interface ExportDocument {
  schema_version: number;
  session_id: string;
  settings: SessionSettings;
  turns: ExportTurn[];
}

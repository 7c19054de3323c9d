// Typed client for the macro-router HTTP API. The console does no scoring of
// its own: every number rendered anywhere comes out of these payloads.

export interface RankedMacro {
  id: number;
  macro_name: string;
  cosine: number;
  blended: number;
}

export interface RouteDecision {
  kind: "matched" | "no_match" | "needs_training";
  macro_id: number | null;
  macro_name: string | null;
  score: number;
  bindings: Record<string, unknown>;
  missing_params: string[];
  best_id: number | null;
  best_score: number;
  ranked: RankedMacro[];
}

export interface ParamSpec {
  name: string;
  kind: "text" | "number";
  description: string;
}

export interface OutputBinding {
  bind_name: string;
  path: string;
}

export interface CallTemplate {
  method: "GET" | "POST" | "PUT" | "DELETE";
  url_template: string;
  header_templates: Record<string, string>;
  body_template: unknown;
  output_bindings: OutputBinding[];
}

export interface SlotSpec {
  param: string;
  template: string;
  fallback: "remainder" | null;
}

export interface MacroDraft {
  use_case: string;
  scenario_description: string;
  macro_name: string;
  params: ParamSpec[];
  call_templates: CallTemplate[];
  slot_specs: SlotSpec[];
}

export interface MacroRecord extends MacroDraft {
  id: number;
  stats: { successes: number; attempts: number };
  created_at: string;
}

export interface Proposal {
  id: number;
  macro_name: string;
  score: number;
  rank: number;
}

export interface ProposeResponse {
  session_id: number;
  state: string;
  proposals: Proposal[];
}

export interface StatsRow {
  id: number;
  macro_name: string;
  successes: number;
  attempts: number;
  smoothed_rate: number;
}

export interface StatsResponse {
  macros: StatsRow[];
  config: { theta: number; alpha: number } & Record<string, unknown>;
}

export interface ExecuteResponse {
  decision: RouteDecision;
  plan: unknown[] | null;
  result: { succeeded: boolean; halted_at: number | null } | null;
}

export class ApiRequestError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
    public detail: string = "",
  ) {
    super(message);
  }
}

async function parseError(response: Response): Promise<never> {
  let code = "internal";
  let message = `HTTP ${response.status}`;
  let detail = "";
  try {
    const body = await response.json();
    code = body?.error?.code ?? code;
    message = body?.error?.message ?? message;
    detail = body?.error?.detail ?? "";
  } catch {
    // non-JSON error body: keep the status text
  }
  throw new ApiRequestError(response.status, code, message, detail);
}

export class ApiClient {
  constructor(private baseUrl: string = "") {}

  private async request<T>(method: string, path: string, payload?: unknown): Promise<T> {
    const response = await fetch(this.baseUrl + path, {
      method,
      headers: payload === undefined ? {} : { "Content-Type": "application/json" },
      body: payload === undefined ? undefined : JSON.stringify(payload),
    });
    if (!response.ok) {
      await parseError(response);
    }
    return (await response.json()) as T;
  }

  listMacros(): Promise<{ macros: MacroRecord[] }> {
    return this.request("GET", "/macros");
  }

  addMacro(draft: MacroDraft): Promise<{ id: number }> {
    return this.request("POST", "/macros", draft);
  }

  deleteMacro(id: number): Promise<{ removed: number }> {
    return this.request("DELETE", `/macros/${id}`);
  }

  route(utterance: string): Promise<RouteDecision> {
    return this.request("POST", "/route", { utterance });
  }

  execute(utterance: string, dryRun: boolean): Promise<ExecuteResponse> {
    return this.request("POST", "/execute", { utterance, dry_run: dryRun });
  }

  feedback(macroId: number, outcome: "success" | "failure"): Promise<unknown> {
    return this.request("POST", "/feedback", { macro_id: macroId, outcome });
  }

  trainPropose(description: string, k: number): Promise<ProposeResponse> {
    return this.request("POST", "/train/propose", { description, k });
  }

  trainCommit(draft: MacroDraft, sessionId: number | null): Promise<{ id: number }> {
    const payload = sessionId === null ? { ...draft } : { ...draft, session_id: sessionId };
    return this.request("POST", "/train/commit", payload);
  }

  stats(): Promise<StatsResponse> {
    return this.request("GET", "/stats");
  }
}

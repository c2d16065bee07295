// Typed client for the stml session service.  Every shape below mirrors
// a JSON schema shipped with the Python package; nothing here transforms
// code, it only moves the server's bytes around.

export type Warning = Record<string, unknown>;

export interface Pragma {
  node: number;
  text: string;
}

export interface SessionState {
  session_id: string;
  code: string;
  pragmas: Pragma[];
  status: "active" | "final" | "error";
  hash: string;
  warnings?: Warning[];
}

export type Certainty = "Proven" | "Unknown-conditions";

export interface Match {
  match_id: string;
  rule: string;
  pos: number;
  certainty: Certainty;
  unknown: string[];
  alt: number;
  binding?: Record<string, string | string[]>;
  diff?: string;
}

export interface MatchList {
  hash: string;
  matches: Match[];
}

export interface StepRecord {
  index: number;
  rule: string;
  match_id: string;
  pos: number;
  before_hash: string;
  after_hash: string;
  old_code: string;
  new_code: string;
  diff: string;
  next_rule?: string | null;
  warnings?: Warning[];
}

export interface ApplyResult {
  state: SessionState;
  record: StepRecord;
}

export interface SessionCreated {
  session_id: string;
  warnings?: Warning[];
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly kind: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

/** 409 means the match was computed against a tree the session has
    since left behind; the UI treats it as "refresh, don't destroy". */
export function isStaleConflict(err: unknown): err is ApiError {
  return err instanceof ApiError && err.status === 409;
}

export function isRefusedApplication(err: unknown): err is ApiError {
  return err instanceof ApiError && err.kind === "UnsafeApplication";
}

export class Client {
  constructor(
    private readonly base: string,
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  createSession(code: string, properties?: string): Promise<SessionCreated> {
    const body: Record<string, string> = { code };
    if (properties !== undefined) {
      body.properties = properties;
    }
    return this.request("POST", "/session", body);
  }

  state(sessionId: string): Promise<SessionState> {
    return this.request("GET", `/session/${sessionId}/state`);
  }

  matches(sessionId: string): Promise<MatchList> {
    return this.request("GET", `/session/${sessionId}/matches`);
  }

  apply(
    sessionId: string,
    matchId: string,
    override = false,
  ): Promise<ApplyResult> {
    return this.request("POST", `/session/${sessionId}/apply`, {
      match_id: matchId,
      override,
    });
  }

  async undo(sessionId: string): Promise<SessionState> {
    const out = await this.request<{ state: SessionState }>(
      "POST",
      `/session/${sessionId}/undo`,
    );
    return out.state;
  }

  exportCode(sessionId: string): Promise<{ code: string }> {
    return this.request("POST", `/session/${sessionId}/export`);
  }

  history(sessionId: string): Promise<{ records: StepRecord[] }> {
    return this.request("GET", `/session/${sessionId}/history`);
  }

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<T> {
    const resp = await this.fetchFn(this.base + path, {
      method,
      headers:
        body === undefined
          ? undefined
          : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload: unknown = await resp.json();
    if (!resp.ok) {
      const err = payload as { error?: string; message?: string };
      throw new ApiError(
        resp.status,
        err.error ?? "UnknownError",
        err.message ?? `HTTP ${resp.status}`,
      );
    }
    return payload as T;
  }
}

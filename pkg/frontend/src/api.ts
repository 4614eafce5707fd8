/**
 * Typed client for the session service's /v1 HTTP API.
 *
 * The UI computes no statistics of its own: every number rendered comes from
 * one of these responses.
 */

export interface PolicyConfig {
  kind: "fixed" | "grid";
  c?: number;
  lo?: number;
  hi?: number;
  n?: number;
}

export interface SessionConfig {
  direction: "upper" | "lower" | "point";
  mu: number;
  alpha: number;
  tau?: number | null;
  policy: PolicyConfig;
  track_bounds?: boolean;
  population_csv?: string | null;
  with_replacement?: boolean;
  seed?: number;
  idempotency_key?: string | null;
}

export interface Summary {
  id: string;
  n: number;
  wealth: number;
  e_value: number;
  log_wealth: number | null;
  log_running_max: number;
  running_max: number;
  decision: "continue" | "reject";
  rejected_at: number | null;
  absorbed: boolean;
  next_c: number;
  pending_item: string | null;
  B_l?: number | null;
  B_u?: number | null;
  residual_mean?: number;
  null_satisfied?: boolean;
  preview?: boolean;
}

export interface TrajectoryPoint {
  k: number;
  wealth: number;
  log_wealth: number | null;
  B_l: number | null;
  B_u: number | null;
}

export interface SessionView extends Summary {
  trajectory: TrajectoryPoint[];
  hypothesis: { direction: string; mu: number; alpha: number; tau: number | null };
  policy: PolicyConfig;
}

export interface DrawResult {
  item_id: string;
  book_value: number;
  u: number;
  residual_mean?: number;
  null_satisfied?: boolean;
}

export interface EventRecord {
  seq: number;
  ts: string;
  kind: string;
  payload: Record<string, unknown>;
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

async function expectJson<T>(res: Response): Promise<T> {
  if (!res.ok) {
    let detail = res.statusText;
    try {
      const body = (await res.json()) as { detail?: unknown };
      if (body.detail !== undefined) detail = JSON.stringify(body.detail);
    } catch {
      /* non-JSON error body: keep statusText */
    }
    throw new ApiError(res.status, detail);
  }
  return (await res.json()) as T;
}

export class SessionApi {
  constructor(private readonly baseUrl: string) {}

  private url(path: string): string {
    return `${this.baseUrl.replace(/\/$/, "")}${path}`;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return fetch(this.url(path), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    }).then((r) => expectJson<T>(r));
  }

  createSession(config: SessionConfig): Promise<Summary> {
    return this.post("/v1/sessions", config);
  }

  postObservation(id: string, x: number): Promise<Summary> {
    return this.post(`/v1/sessions/${id}/observations`, { x });
  }

  preview(id: string, x: number): Promise<Summary> {
    return this.post(`/v1/sessions/${id}/preview`, { x });
  }

  draw(id: string): Promise<DrawResult> {
    return fetch(this.url(`/v1/sessions/${id}/draw`), { method: "POST" }).then(
      (r) => expectJson<DrawResult>(r),
    );
  }

  getSession(id: string): Promise<SessionView> {
    return fetch(this.url(`/v1/sessions/${id}`)).then((r) => expectJson<SessionView>(r));
  }

  getEvents(id: string): Promise<EventRecord[]> {
    return fetch(this.url(`/v1/sessions/${id}/events`)).then((r) =>
      expectJson<EventRecord[]>(r),
    );
  }
}

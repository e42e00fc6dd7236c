// Typed client over the budgeting service HTTP contract. All traffic goes
// through a Transport so tests can record and assert on the network log.

export type Stage =
  | "Overview"
  | "Sort"
  | "AllocateBlind"
  | "CheckWithCosts"
  | "Demographics"
  | "Done";

export interface PublicProject {
  id: string;
  name: string;
  description: string;
  category: string;
  image_ref: string | null;
  divisible: boolean;
}

export interface PublicBallot {
  id: string;
  ward_id: number;
  budget_total: number;
  granularity: number;
  projects: PublicProject[];
}

export interface CostMark {
  cost_estimate: number;
  rounded_cost: number;
  met: boolean;
}

export interface SessionView {
  session_id: string;
  ballot_ref: string;
  stage: Stage;
  sorted: string[];
  unsorted: string[];
  amounts: Record<string, number>;
  remaining: number;
  budget_total: number;
  granularity: number;
  profile_recorded: boolean;
  costs?: Record<string, CostMark>;
}

export interface RevealResponse {
  costs: Record<string, CostMark>;
  session: SessionView;
}

export interface SetToCostResponse {
  result: { project_id: string; amount: number; clamped: boolean };
  session: SessionView;
}

export interface MatrixColumn {
  ward: number;
  source: "census" | "voters";
}

export interface MatrixPayload {
  axis: string;
  mode: "counts" | "percent";
  rows: string[];
  columns: MatrixColumn[];
  cells: (number | null)[][];
  bins: number[];
}

export interface StripPoint {
  category: string;
  voter: number;
  dollars: number;
}

export interface StripsPayload {
  ward: number;
  voters: number;
  budget_total: number;
  points: StripPoint[];
}

export interface DemographicsForm {
  race: string;
  age_band: string;
  income_band: string;
  education_band: string;
}

export interface NetworkEntry {
  method: string;
  path: string;
  body: unknown;
  status: number;
  response: unknown;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

export interface Transport {
  request(method: string, path: string, body?: unknown): Promise<{ status: number; json: unknown }>;
}

export class FetchTransport implements Transport {
  constructor(private baseUrl: string = "") {}

  async request(method: string, path: string, body?: unknown) {
    const init: RequestInit = { method, headers: {} };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const res = await fetch(this.baseUrl + path, init);
    return { status: res.status, json: await res.json() };
  }
}

// Wraps any transport and appends every exchange to a shared log; the
// contract tests assert cost fields never appear before the reveal call.
export class RecordingTransport implements Transport {
  readonly log: NetworkEntry[] = [];

  constructor(private inner: Transport) {}

  async request(method: string, path: string, body?: unknown) {
    const out = await this.inner.request(method, path, body);
    this.log.push({ method, path, body: body ?? null, status: out.status, response: out.json });
    return out;
  }
}

function errorFrom(status: number, payload: unknown): ApiError {
  const body = payload as { code?: string; message?: string };
  return new ApiError(status, body.code ?? "unknown", body.message ?? `HTTP ${status}`);
}

export class ApiClient {
  constructor(private transport: Transport) {}

  private async call<T>(method: string, path: string, body?: unknown): Promise<T> {
    const { status, json } = await this.transport.request(method, path, body);
    if (status >= 400) throw errorFrom(status, json);
    return json as T;
  }

  getBallot(ref: string): Promise<PublicBallot> {
    return this.call("GET", `/ballots/${ref}`);
  }

  createSession(ballotRef: string): Promise<SessionView> {
    return this.call("POST", "/sessions", { ballot_ref: ballotRef });
  }

  getSession(id: string): Promise<SessionView> {
    return this.call("GET", `/sessions/${id}`);
  }

  submitSort(id: string, order: string[]): Promise<SessionView> {
    return this.call("POST", `/sessions/${id}/sort`, { order });
  }

  setAllocation(id: string, projectId: string, amount: number): Promise<SessionView> {
    return this.call("POST", `/sessions/${id}/allocation`, { project_id: projectId, amount });
  }

  fillUp(id: string, projectId: string): Promise<SessionView> {
    return this.call("POST", `/sessions/${id}/fill-up`, { project_id: projectId });
  }

  clear(id: string, projectId: string): Promise<SessionView> {
    return this.call("POST", `/sessions/${id}/clear`, { project_id: projectId });
  }

  advance(id: string): Promise<SessionView> {
    return this.call("POST", `/sessions/${id}/advance`);
  }

  reveal(id: string): Promise<RevealResponse> {
    return this.call("POST", `/sessions/${id}/reveal`);
  }

  setToCost(id: string, projectId: string): Promise<SetToCostResponse> {
    return this.call("POST", `/sessions/${id}/set-to-cost`, { project_id: projectId });
  }

  recordDemographics(id: string, form: DemographicsForm): Promise<SessionView> {
    return this.call("POST", `/sessions/${id}/demographics`, form);
  }

  finalize(id: string, token: string): Promise<{ status: string; session: SessionView }> {
    return this.call("POST", `/sessions/${id}/finalize`, { idempotency_token: token });
  }

  demographicsMatrix(wards: number[], axis: string, mode: string): Promise<MatrixPayload> {
    const q = `wards=${wards.join(",")}&axis=${axis}&mode=${mode}`;
    return this.call("GET", `/results/demographics?${q}`);
  }

  strips(ward: number): Promise<StripsPayload> {
    return this.call("GET", `/results/${ward}/strips`);
  }
}

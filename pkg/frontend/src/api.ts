/**
 * Typed client for the session HTTP API.
 *
 * The client consumes only the public session views: bin and cell estimates
 * with their errors, never raw data. The fetch implementation is injectable
 * so tests can run against an in-memory stub server.
 */

export interface BudgetSnapshot {
  used: number;
  total: number;
  perQuery: Record<string, number>;
  totalEpsilonSpent: number;
  epsilonPerRemeasure: number;
  initialEpsilonPerQuery: number;
}

export interface QueryView {
  queryId: string;
  attributes: string[];
  filter: Record<string, string[]> | null;
  remeasuresUsed: number;
  bins: Record<string, string[]>;
  binEstimates: Record<string, number[]>;
  binRmse: Record<string, number[]>;
  previousBinEstimates: Record<string, number[]> | null;
  previousBinRmse: Record<string, number[]> | null;
  cellEstimates: number[];
  cellCovariance: number[][];
}

export interface SessionView {
  sessionId?: string;
  budget: BudgetSnapshot;
  queries: QueryView[];
}

export interface QueryResponse {
  sessionId: string;
  query: QueryView;
  budget: BudgetSnapshot;
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

async function parseOrThrow<T>(response: Response): Promise<T> {
  if (response.ok) {
    return (await response.json()) as T;
  }
  let code = 'http-error';
  let message = `HTTP ${response.status}`;
  try {
    const body = await response.json();
    code = body.code ?? code;
    message = body.message ?? message;
  } catch {
    // non-JSON error body; keep defaults
  }
  throw new ApiError(response.status, code, message);
}

export class SessionApi {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private post<T>(path: string, body?: unknown): Promise<T> {
    return this.fetchImpl(`${this.baseUrl}${path}`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: body === undefined ? undefined : JSON.stringify(body),
    }).then((r) => parseOrThrow<T>(r));
  }

  private get<T>(path: string): Promise<T> {
    return this.fetchImpl(`${this.baseUrl}${path}`).then((r) => parseOrThrow<T>(r));
  }

  createSession(datasetId: string, config: Record<string, unknown> = {}) {
    return this.post<{ sessionId: string; budget: BudgetSnapshot }>('/sessions', {
      datasetId,
      config,
    });
  }

  addQuery(sessionId: string, attributes: string[], filter?: Record<string, string[]>) {
    return this.post<QueryResponse>(`/sessions/${sessionId}/queries`, {
      attributes,
      filter: filter ?? null,
    });
  }

  remeasure(sessionId: string, queryId: string) {
    return this.post<QueryResponse>(`/sessions/${sessionId}/queries/${queryId}/remeasure`);
  }

  getSession(sessionId: string) {
    return this.get<SessionView>(`/sessions/${sessionId}`);
  }

  getBudget(sessionId: string) {
    return this.get<BudgetSnapshot>(`/sessions/${sessionId}/budget`);
  }
}

/** REST client for the workbench service.
 *
 * Every mutation carries a generated request id, and network-level failures
 * are retried with the *same* id, so a retry after a dropped response never
 * double-applies (the server treats a journaled request id as already done).
 * HTTP-level errors surface as ApiError with the server's structured detail.
 */

export interface ErrorDetail {
  error?: string;
  message?: string;
  missing_step?: string;
}

export class ApiError extends Error {
  readonly status: number;
  readonly detail: ErrorDetail;

  constructor(status: number, detail: ErrorDetail) {
    super(detail.message ?? `request failed with status ${status}`);
    this.name = "ApiError";
    this.status = status;
    this.detail = detail;
  }
}

export interface ApiCounters {
  gets: number;
  posts: number;
}

function makeRequestId(): string {
  if (typeof crypto !== "undefined" && "randomUUID" in crypto) {
    return crypto.randomUUID();
  }
  return `req-${Date.now()}-${Math.floor(Math.random() * 1e9)}`;
}

export class ApiClient {
  readonly baseUrl: string;
  readonly counters: ApiCounters = { gets: 0, posts: 0 };
  private readonly fetchImpl: typeof fetch;
  private readonly retries: number;

  constructor(baseUrl: string, fetchImpl: typeof fetch = fetch, retries = 2) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
    this.fetchImpl = fetchImpl;
    this.retries = retries;
  }

  private async parseError(response: Response): Promise<never> {
    let detail: ErrorDetail = {};
    try {
      detail = (await response.json()) as ErrorDetail;
    } catch {
      detail = { message: await response.text().catch(() => response.statusText) };
    }
    throw new ApiError(response.status, detail);
  }

  async get<T>(path: string, params?: Record<string, string>): Promise<T> {
    this.counters.gets += 1;
    const query = params ? `?${new URLSearchParams(params)}` : "";
    const response = await this.fetchImpl(`${this.baseUrl}${path}${query}`);
    if (!response.ok) {
      await this.parseError(response);
    }
    return (await response.json()) as T;
  }

  async getText(path: string, params?: Record<string, string>): Promise<string> {
    this.counters.gets += 1;
    const query = params ? `?${new URLSearchParams(params)}` : "";
    const response = await this.fetchImpl(`${this.baseUrl}${path}${query}`);
    if (!response.ok) {
      await this.parseError(response);
    }
    return await response.text();
  }

  async post<T>(path: string, body: Record<string, unknown>): Promise<T> {
    this.counters.posts += 1;
    const requestId = makeRequestId();
    const payload = JSON.stringify({ ...body, request_id: requestId });
    let lastFailure: unknown;
    for (let attempt = 0; attempt <= this.retries; attempt += 1) {
      try {
        const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
          method: "POST",
          headers: { "Content-Type": "application/json", "X-Request-Id": requestId },
          body: payload,
        });
        if (!response.ok) {
          await this.parseError(response);
        }
        return (await response.json()) as T;
      } catch (failure) {
        if (failure instanceof ApiError) {
          throw failure; // HTTP-level: the server answered, do not retry
        }
        lastFailure = failure; // network-level: retry with the same request id
      }
    }
    throw lastFailure instanceof Error
      ? lastFailure
      : new Error("request failed after retries");
  }
}

import type {
  DistributionResponse,
  ProjectionRequest,
  ProjectionResponse,
  QueryRequest,
  QueryResponse,
  Selector,
  SessionAction,
  SessionResponse,
  WorkspaceInfo,
} from "./types";

/** A non-2xx response, with the server's `detail` payload attached. */
export class ApiError extends Error {
  readonly status: number;
  readonly detail: unknown;

  constructor(status: number, detail: unknown) {
    super(typeof detail === "string" ? detail : `HTTP ${status}`);
    this.name = "ApiError";
    this.status = status;
    this.detail = detail;
  }

  get stale(): boolean {
    return this.status === 409;
  }
}

async function unwrap<T>(response: Response): Promise<T> {
  if (response.ok) {
    return (await response.json()) as T;
  }
  let detail: unknown = null;
  try {
    detail = ((await response.json()) as { detail?: unknown }).detail ?? null;
  } catch {
    // non-JSON error body; status alone is enough
  }
  throw new ApiError(response.status, detail);
}

/** Thin typed client over the workbench HTTP/JSON API. */
export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  private get(path: string): Promise<Response> {
    return this.fetchFn(this.baseUrl + path);
  }

  private post(path: string, body: unknown): Promise<Response> {
    return this.fetchFn(this.baseUrl + path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  async workspace(): Promise<WorkspaceInfo> {
    return unwrap(await this.get("/api/workspace"));
  }

  async query(request: QueryRequest): Promise<QueryResponse> {
    return unwrap(await this.post("/api/annotations/query", request));
  }

  async distribution(
    selector: Selector,
    runs: string[] = [],
  ): Promise<DistributionResponse> {
    const params = new URLSearchParams({ selector: JSON.stringify(selector) });
    if (runs.length) {
      params.set("runs", runs.join(","));
    }
    return unwrap(await this.get(`/api/distribution?${params}`));
  }

  async projection(request: ProjectionRequest): Promise<ProjectionResponse> {
    return unwrap(await this.post("/api/projection", request));
  }

  /** Poll the projection job until it is ready. */
  async projectionReady(
    request: ProjectionRequest,
    intervalMs = 250,
    maxPolls = 240,
  ): Promise<ProjectionResponse & { status: "ready" }> {
    for (let i = 0; i < maxPolls; i++) {
      const response = await this.projection(request);
      if (response.status === "ready") {
        return response;
      }
      await new Promise((resolve) => setTimeout(resolve, intervalMs));
    }
    throw new ApiError(504, "projection job never became ready");
  }

  async mutateSession(
    action: SessionAction,
    labels: string[],
    expectedRevision: number,
  ): Promise<SessionResponse> {
    return unwrap(
      await this.post("/api/session", {
        action,
        labels,
        expected_revision: expectedRevision,
      }),
    );
  }

  /** URL for the report download; used directly as an anchor href. */
  exportUrl(format: "tsv" | "lines" = "tsv"): string {
    return `${this.baseUrl}/api/export?format=${format}`;
  }

  async exportReport(format: "tsv" | "lines" = "tsv"): Promise<string> {
    const response = await this.get(`/api/export?format=${format}`);
    if (!response.ok) {
      throw new ApiError(response.status, await response.text());
    }
    return response.text();
  }
}

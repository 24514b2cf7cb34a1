/** Typed client for the review API. Every mutation is exactly one POST. */

import type {
  ApiErrorPayload,
  BitextPayload,
  EditOp,
  PairsPayload,
  ProcedureLabel,
  ProjectSummary,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public payload: ApiErrorPayload,
  ) {
    super(`${payload.error}: ${payload.message}`);
  }

  get isConflict(): boolean {
    return this.status === 409;
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ReviewApi {
  constructor(
    private baseUrl: string = "",
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: { "Content-Type": "application/json" } };
    if (body !== undefined) {
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchFn(this.baseUrl + path, init);
    const payload = await response.json();
    if (!response.ok) {
      throw new ApiError(response.status, payload as ApiErrorPayload);
    }
    return payload as T;
  }

  getProject(): Promise<ProjectSummary> {
    return this.request("GET", "/api/project");
  }

  getBitext(label: string): Promise<BitextPayload> {
    return this.request("GET", `/api/bitext/${encodeURIComponent(label)}`);
  }

  postEdits(label: string, revision: number, edits: EditOp[]): Promise<BitextPayload> {
    return this.request("POST", `/api/bitext/${encodeURIComponent(label)}/edits`, {
      revision,
      edits,
    });
  }

  approve(label: string, revision: number): Promise<BitextPayload> {
    return this.request("POST", `/api/bitext/${encodeURIComponent(label)}/approve`, {
      revision,
    });
  }

  getPairs(label: string): Promise<PairsPayload> {
    return this.request("GET", `/api/pairs/${encodeURIComponent(label)}`);
  }

  postOverride(
    label: string,
    revision: number,
    index: number,
    newLabel: ProcedureLabel,
    note: string,
  ): Promise<PairsPayload> {
    return this.request("POST", `/api/pairs/${encodeURIComponent(label)}/overrides`, {
      revision,
      index,
      label: newLabel,
      note,
    });
  }
}

// Thin typed client for the /v1 API. No metric ever gets computed here:
// every number the console displays comes straight out of these payloads.

import type {
  ErrorsDashboard,
  QualityDashboard,
  QueuePage,
  ReviewRequest,
  ReviewResponse,
  TaskDetail,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

async function parseError(response: Response): Promise<ApiError> {
  let code = "error";
  let message = response.statusText;
  try {
    const body = await response.json();
    if (body?.error) {
      code = body.error.code ?? code;
      message = body.error.message ?? message;
    } else if (body?.detail) {
      // FastAPI request-validation errors
      code = "validation";
      message = JSON.stringify(body.detail);
    }
  } catch {
    /* non-JSON body: keep the status text */
  }
  return new ApiError(response.status, code, message);
}

export class ApiClient {
  constructor(readonly baseUrl: string) {}

  private async get<T>(path: string): Promise<T> {
    const response = await fetch(this.baseUrl + path);
    if (!response.ok) throw await parseError(response);
    return (await response.json()) as T;
  }

  queue(params: { locale?: string; phase?: string; page?: number; pageSize?: number } = {}): Promise<QueuePage> {
    const query = new URLSearchParams();
    if (params.locale) query.set("locale", params.locale);
    if (params.phase) query.set("phase", params.phase);
    if (params.page) query.set("page", String(params.page));
    if (params.pageSize) query.set("page_size", String(params.pageSize));
    const suffix = query.toString() ? `?${query}` : "";
    return this.get<QueuePage>(`/v1/queue${suffix}`);
  }

  task(taskId: string): Promise<TaskDetail> {
    return this.get<TaskDetail>(`/v1/tasks/${encodeURIComponent(taskId)}`);
  }

  async submitReview(taskId: string, body: ReviewRequest): Promise<ReviewResponse> {
    const response = await fetch(
      `${this.baseUrl}/v1/tasks/${encodeURIComponent(taskId)}/review`,
      {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(body),
      },
    );
    if (!response.ok) throw await parseError(response);
    return (await response.json()) as ReviewResponse;
  }

  qualityDashboard(): Promise<QualityDashboard> {
    return this.get<QualityDashboard>("/v1/dashboards/quality");
  }

  errorsDashboard(): Promise<ErrorsDashboard> {
    return this.get<ErrorsDashboard>("/v1/dashboards/errors");
  }

  health(): Promise<{ status: string; tasks: number }> {
    return this.get("/v1/health");
  }
}

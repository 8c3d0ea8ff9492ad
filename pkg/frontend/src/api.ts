/** Typed client for the feedback service HTTP API. */

export interface TaskSummary {
  id: string;
  title: string;
  description: string;
  difficulty: string;
}

export interface TaskDetail extends TaskSummary {
  entry_function: string;
  prelude: string | null;
  test_count: number;
}

export interface CaseResult {
  case_id: string;
  status: "pass" | "fail" | "error" | "timeout";
  actual: unknown;
  stderr_excerpt: string;
  duration_ms: number;
  expected: unknown;
}

export interface ExecuteResponse {
  all_passed: boolean;
  failing_ids: string[];
  results: CaseResult[];
}

export interface HintTelemetry {
  latency_ms: number;
  usd_cost: number;
  backend_class: "local" | "external";
}

export interface HintResponse {
  hint: string;
  repair_found: boolean;
  telemetry: HintTelemetry;
}

/** Service answered with an error status. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
    readonly retriable: boolean = false,
  ) {
    super(detail);
  }
}

/** Could not reach the service at all (network-level failure). */
export class ServiceUnreachableError extends Error {
  constructor() {
    super("service unreachable");
  }
}

type FetchLike = typeof fetch;

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = fetch,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    } catch {
      throw new ServiceUnreachableError();
    }
    if (!response.ok) {
      let detail = `${response.status}`;
      let retriable = false;
      try {
        const body = (await response.json()) as { detail?: string; retriable?: boolean };
        detail = body.detail ?? detail;
        retriable = body.retriable ?? false;
      } catch {
        // non-JSON error body: keep the status text
      }
      throw new ApiError(response.status, detail, retriable);
    }
    return (await response.json()) as T;
  }

  listTasks(): Promise<TaskSummary[]> {
    return this.request<TaskSummary[]>("/tasks");
  }

  getTask(taskId: string): Promise<TaskDetail> {
    return this.request<TaskDetail>(`/tasks/${encodeURIComponent(taskId)}`);
  }

  execute(taskId: string, program: string): Promise<ExecuteResponse> {
    return this.request<ExecuteResponse>("/execute", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ task_id: taskId, program }),
    });
  }

  hint(taskId: string, program: string): Promise<HintResponse> {
    return this.request<HintResponse>("/hint", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ task_id: taskId, program }),
    });
  }
}

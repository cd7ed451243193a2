/** Typed client for the backend routing endpoints.
 *
 * The portal owns zero business logic: every method maps 1:1 onto a
 * routing (or debug) endpoint and returns the server's JSON untouched.
 */

export type Role = "health-center" | "advisory-board" | "ops";

export type TraceState =
  | "submitted"
  | "consent-pending"
  | "consented"
  | "approved"
  | "rejected"
  | "completed";

export interface TraceSummary {
  request_id: string;
  window: [number, number];
  clinical: Record<string, unknown>;
  state: TraceState;
  submitted_at: number;
  consented_at: number | null;
  decided_at: number | null;
  decided_by: string | null;
  completed_at: number | null;
  has_result: boolean;
}

export interface TraceResultEntry {
  invite_code: string;
  contact_minutes: number;
}

export interface TraceResult {
  request_id: string;
  window: [number, number];
  executed_at: number;
  hop1: TraceResultEntry[];
  hop2: TraceResultEntry[];
}

export interface HourBucket {
  hour_start: number;
  devices_reporting: number;
  scans_performed: number;
  scans_failed: number;
  gps_scans: number;
}

export interface RegistrationSeries {
  days: { day_start: number; installs: number }[];
  make_models: Record<string, number>;
  total_identities: number;
}

export interface SubmitTraceInput {
  unique_id: string;
  device_suffix: string;
  phone: string;
  window: [number, number];
  clinical?: Record<string, unknown>;
}

interface ErrorBody {
  error?: string;
  detail?: string;
  reason?: string;
}

/** Structured backend error; `reason` is set for auth and OTP rejections. */
export class ApiError extends Error {
  readonly status: number;
  readonly code: string;
  readonly detail: string;
  readonly reason?: string;

  constructor(status: number, body: ErrorBody) {
    super(body.detail ?? body.error ?? `http ${status}`);
    this.name = "ApiError";
    this.status = status;
    this.code = body.error ?? "unknown";
    this.detail = body.detail ?? "";
    this.reason = body.reason;
  }
}

export class PortalClient {
  constructor(
    private readonly baseUrl: string,
    private readonly token?: string,
  ) {}

  private async request<T>(
    method: "GET" | "POST",
    path: string,
    body?: unknown,
  ): Promise<T> {
    const headers: Record<string, string> = {};
    if (this.token) headers["authorization"] = `Bearer ${this.token}`;
    if (body !== undefined) headers["content-type"] = "application/json";
    const response = await fetch(this.baseUrl + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = await response.json().catch(() => ({}));
    if (!response.ok) {
      throw new ApiError(response.status, payload as ErrorBody);
    }
    return payload as T;
  }

  health(): Promise<{ status: string; now: number }> {
    return this.request("GET", "/health");
  }

  // -- tracing workflow --------------------------------------------------

  submitTrace(input: SubmitTraceInput): Promise<TraceSummary> {
    return this.request("POST", "/routing/trace/submit", input);
  }

  recordConsent(requestId: string, otp: string): Promise<TraceSummary> {
    return this.request("POST", `/routing/trace/${requestId}/consent`, { otp });
  }

  reissueOtp(requestId: string): Promise<TraceSummary> {
    return this.request("POST", `/routing/trace/${requestId}/reissue-otp`, {});
  }

  queue(): Promise<{ requests: TraceSummary[] }> {
    return this.request("GET", "/routing/trace/queue");
  }

  decide(
    requestId: string,
    approve: boolean,
    decidedBy: string,
  ): Promise<TraceSummary> {
    return this.request("POST", `/routing/trace/${requestId}/decide`, {
      approve,
      decided_by: decidedBy,
    });
  }

  result(requestId: string): Promise<TraceResult> {
    return this.request("GET", `/routing/trace/${requestId}/result`);
  }

  // -- operations --------------------------------------------------------

  livelinessSummary(hours: number): Promise<{ hours: HourBucket[] }> {
    return this.request("GET", `/routing/ops/liveliness-summary?hours=${hours}`);
  }

  registrations(days: number): Promise<RegistrationSeries> {
    return this.request("GET", `/routing/ops/registrations?days=${days}`);
  }

  issueCodes(count: number): Promise<{ codes: string[] }> {
    return this.request("POST", "/routing/admin/issue-codes", { count });
  }

  runJobs(): Promise<Record<string, unknown>> {
    return this.request("POST", "/routing/admin/run-jobs", {});
  }

  // -- test hooks (exist only when the backend exposes them) --------------

  debugOtpOutbox(): Promise<{
    messages: { unique_id: string; otp: string; issued_at: number }[];
  }> {
    return this.request("GET", "/debug/otp-outbox");
  }

  debugExpireOtp(uniqueId: string): Promise<{ expired: boolean }> {
    return this.request("POST", "/debug/expire-otp", { unique_id: uniqueId });
  }

  debugDemoSummary(): Promise<DemoSummary> {
    return this.request("GET", "/debug/demo-summary");
  }
}

export interface DemoSubject {
  unique_id: string;
  device_suffix: string;
  phone: string;
  invite_code: string;
}

export interface DemoSummary {
  seeded_at: number;
  scenario_start: number;
  suggested_window: [number, number];
  subjects: Record<string, DemoSubject>;
  expected_hop1: {
    subject: string;
    invite_code: string;
    contact_minutes: number;
  };
}

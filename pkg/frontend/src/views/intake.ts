/** Health-center intake flow: subject details, then OTP consent.
 *
 * The flow object holds the little state there is (which step we are
 * on, the last server error); rendering is a pure function of that
 * state so tests can assert on the exact markup operators see.
 */

import { ApiError, PortalClient, SubmitTraceInput, TraceSummary } from "../api.js";
import { esc, formatEpoch } from "./html.js";

export type IntakeStep = "details" | "otp" | "consented";

export interface IntakeState {
  step: IntakeStep;
  request: TraceSummary | null;
  error: { code: string; detail: string; reason?: string } | null;
  offerReissue: boolean;
}

export function initialIntakeState(): IntakeState {
  return { step: "details", request: null, error: null, offerReissue: false };
}

export class IntakeFlow {
  state: IntakeState = initialIntakeState();

  constructor(private readonly client: PortalClient) {}

  /** Submit subject details. On success the OTP step opens. */
  async submit(input: SubmitTraceInput): Promise<IntakeState> {
    try {
      const request = await this.client.submitTrace(input);
      this.state = {
        step: "otp",
        request,
        error: null,
        offerReissue: false,
      };
    } catch (err) {
      this.state = {
        step: "details",
        request: null,
        error: toErrorState(err),
        offerReissue: false,
      };
    }
    return this.state;
  }

  /** Confirm the OTP the subject read back over the phone. */
  async consent(otp: string): Promise<IntakeState> {
    const request = this.requireRequest();
    try {
      const updated = await this.client.recordConsent(request.request_id, otp);
      this.state = {
        step: "consented",
        request: updated,
        error: null,
        offerReissue: false,
      };
    } catch (err) {
      const error = toErrorState(err);
      this.state = {
        step: "otp",
        request,
        error,
        // an expired challenge is recoverable; a mismatch is retyped
        offerReissue: error.reason === "expired",
      };
    }
    return this.state;
  }

  /** Send a fresh OTP after the previous one expired. */
  async reissue(): Promise<IntakeState> {
    const request = this.requireRequest();
    try {
      const updated = await this.client.reissueOtp(request.request_id);
      this.state = {
        step: "otp",
        request: updated,
        error: null,
        offerReissue: false,
      };
    } catch (err) {
      this.state = { ...this.state, error: toErrorState(err) };
    }
    return this.state;
  }

  private requireRequest(): TraceSummary {
    if (!this.state.request) {
      throw new Error("no submitted trace request in this intake session");
    }
    return this.state.request;
  }
}

function toErrorState(err: unknown): NonNullable<IntakeState["error"]> {
  if (err instanceof ApiError) {
    return { code: err.code, detail: err.detail, reason: err.reason };
  }
  return { code: "network", detail: String(err) };
}

export function renderIntake(state: IntakeState): string {
  switch (state.step) {
    case "details":
      return renderDetailsForm(state);
    case "otp":
      return renderOtpStep(state);
    case "consented":
      return renderConsented(state);
  }
}

function renderError(error: IntakeState["error"]): string {
  if (!error) return "";
  const reason = error.reason ? ` data-reason="${esc(error.reason)}"` : "";
  return `<p class="inline-error" data-error="${esc(error.code)}"${reason}>${esc(
    error.detail,
  )}</p>`;
}

function renderDetailsForm(state: IntakeState): string {
  return `
<section class="intake" data-step="details">
  <h2>New trace request</h2>
  ${renderError(state.error)}
  <form data-form="trace-details">
    <label>Subject id
      <input name="unique_id" required autocomplete="off">
    </label>
    <label>Device id suffix (last 4)
      <input name="device_suffix" required maxlength="4" pattern="[0-9a-fA-F]{4}">
    </label>
    <label>Phone on record
      <input name="phone" required type="tel">
    </label>
    <label>Window start
      <input name="window_start" required type="datetime-local">
    </label>
    <label>Window end
      <input name="window_end" required type="datetime-local">
    </label>
    <label>Clinical notes
      <input name="clinical_notes">
    </label>
    <button type="submit">Submit for consent</button>
  </form>
</section>`;
}

function renderOtpStep(state: IntakeState): string {
  const request = state.request!;
  const reissue = state.offerReissue
    ? `<button type="button" data-action="reissue">Send a new code</button>`
    : "";
  return `
<section class="intake" data-step="otp" data-request="${esc(request.request_id)}">
  <h2>Consent code</h2>
  <p>Request <code>${esc(request.request_id.slice(0, 8))}</code>
     submitted ${esc(formatEpoch(request.submitted_at))},
     state <span class="badge state-${esc(request.state)}">${esc(request.state)}</span>.</p>
  <p>An SMS code was sent to the subject. Enter the code they read back.</p>
  ${renderError(state.error)}
  <form data-form="trace-otp">
    <label>One-time code
      <input name="otp" required inputmode="numeric" autocomplete="one-time-code">
    </label>
    <button type="submit">Confirm consent</button>
  </form>
  ${reissue}
</section>`;
}

function renderConsented(state: IntakeState): string {
  const request = state.request!;
  return `
<section class="intake" data-step="consented" data-request="${esc(request.request_id)}">
  <h2>Consent recorded</h2>
  <p>Request <code>${esc(request.request_id.slice(0, 8))}</code> is now
     <span class="badge state-${esc(request.state)}">${esc(request.state)}</span>
     and waits for the review board.</p>
</section>`;
}

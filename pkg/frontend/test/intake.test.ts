import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { DemoSummary, PortalClient } from "../src/api.js";
import { DEMO_TOKENS } from "../src/session.js";
import { IntakeFlow, renderIntake } from "../src/views/intake.js";
import { Backend, startDemoBackend } from "./backend.js";

let backend: Backend;
let health: PortalClient;
let hooks: PortalClient;
let demo: DemoSummary;

beforeAll(async () => {
  backend = await startDemoBackend();
  health = new PortalClient(backend.baseUrl, DEMO_TOKENS["health-center"]);
  hooks = new PortalClient(backend.baseUrl); // debug endpoints take no token
  demo = await hooks.debugDemoSummary();
});

afterAll(async () => {
  await backend.stop();
});

async function lastOtpFor(uniqueId: string): Promise<string> {
  const { messages } = await hooks.debugOtpOutbox();
  const mine = messages.filter((m) => m.unique_id === uniqueId);
  expect(mine.length).toBeGreaterThan(0);
  return mine[mine.length - 1].otp;
}

describe("trace intake flow", () => {
  it("renders an inline error and no OTP field on an identity mismatch", async () => {
    const ada = demo.subjects["ada"];
    const flow = new IntakeFlow(health);
    const wrongSuffix = ada.device_suffix === "0000" ? "1111" : "0000";
    const state = await flow.submit({
      unique_id: ada.unique_id,
      device_suffix: wrongSuffix,
      phone: ada.phone,
      window: demo.suggested_window,
    });

    expect(state.step).toBe("details");
    expect(state.error?.code).toBe("invalid-request");

    const html = renderIntake(state);
    expect(html).toContain('data-step="details"');
    expect(html).toContain('data-error="invalid-request"');
    expect(html).not.toContain('name="otp"');
  });

  it("walks details, OTP, and confirmation against the live backend", async () => {
    const ada = demo.subjects["ada"];
    const flow = new IntakeFlow(health);
    let state = await flow.submit({
      unique_id: ada.unique_id,
      device_suffix: ada.device_suffix,
      phone: ada.phone,
      window: demo.suggested_window,
      clinical: { notes: "routine follow-up" },
    });

    expect(state.step).toBe("otp");
    expect(state.request?.state).toBe("consent-pending");
    let html = renderIntake(state);
    expect(html).toContain('name="otp"');
    expect(html).toContain("consent-pending");

    // a mistyped code stays on the OTP step with the error inline
    const otp = await lastOtpFor(ada.unique_id);
    const wrongOtp = otp === "000000" ? "111111" : "000000";
    state = await flow.consent(wrongOtp);
    expect(state.step).toBe("otp");
    expect(state.error?.reason).toBe("mismatch");
    expect(state.offerReissue).toBe(false);
    html = renderIntake(state);
    expect(html).toContain('data-error="otp-rejected"');
    expect(html).toContain('data-reason="mismatch"');
    expect(html).not.toContain('data-action="reissue"');

    state = await flow.consent(otp);
    expect(state.step).toBe("consented");
    expect(state.request?.state).toBe("consented");
    html = renderIntake(state);
    expect(html).toContain("Consent recorded");
    expect(html).toContain("consented");
  });

  it("offers a reissue control after expiry and recovers with a fresh code", async () => {
    const bea = demo.subjects["bea"];
    const flow = new IntakeFlow(health);
    let state = await flow.submit({
      unique_id: bea.unique_id,
      device_suffix: bea.device_suffix,
      phone: bea.phone,
      window: demo.suggested_window,
    });
    expect(state.step).toBe("otp");

    const staleOtp = await lastOtpFor(bea.unique_id);
    await hooks.debugExpireOtp(bea.unique_id);
    state = await flow.consent(staleOtp);
    expect(state.step).toBe("otp");
    expect(state.error?.reason).toBe("expired");
    expect(state.offerReissue).toBe(true);
    let html = renderIntake(state);
    expect(html).toContain('data-reason="expired"');
    expect(html).toContain('data-action="reissue"');

    state = await flow.reissue();
    expect(state.error).toBeNull();
    const freshOtp = await lastOtpFor(bea.unique_id);
    expect(freshOtp).not.toBe(staleOtp);

    state = await flow.consent(freshOtp);
    expect(state.step).toBe("consented");
    html = renderIntake(state);
    expect(html).toContain("consented");
  });

  it("never renders subject identifiers in any step", async () => {
    const ada = demo.subjects["ada"];
    const flow = new IntakeFlow(health);
    let state = await flow.submit({
      unique_id: ada.unique_id,
      device_suffix: ada.device_suffix,
      phone: ada.phone,
      window: demo.suggested_window,
    });
    const otp = await lastOtpFor(ada.unique_id);
    state = await flow.consent(otp);

    const html = renderIntake(state);
    expect(html).not.toContain(ada.unique_id);
    expect(html).not.toContain(ada.phone);
  });
});

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiError, DemoSummary, PortalClient, TraceSummary } from "../src/api.js";
import { DEMO_TOKENS } from "../src/session.js";
import {
  renderDecisionConflict,
  renderQueue,
  renderResult,
} from "../src/views/review.js";
import { Backend, startDemoBackend } from "./backend.js";

let backend: Backend;
let health: PortalClient;
let board: PortalClient;
let hooks: PortalClient;
let demo: DemoSummary;
let approvable: TraceSummary;

beforeAll(async () => {
  backend = await startDemoBackend();
  health = new PortalClient(backend.baseUrl, DEMO_TOKENS["health-center"]);
  board = new PortalClient(backend.baseUrl, DEMO_TOKENS["advisory-board"]);
  hooks = new PortalClient(backend.baseUrl);
  demo = await hooks.debugDemoSummary();
});

afterAll(async () => {
  await backend.stop();
});

async function submitConsented(subject: string): Promise<TraceSummary> {
  const details = demo.subjects[subject];
  const submitted = await health.submitTrace({
    unique_id: details.unique_id,
    device_suffix: details.device_suffix,
    phone: details.phone,
    window: demo.suggested_window,
  });
  const { messages } = await hooks.debugOtpOutbox();
  const otp = messages.filter((m) => m.unique_id === details.unique_id).pop()!.otp;
  return health.recordConsent(submitted.request_id, otp);
}

describe("board review flow", () => {
  it("shows decision controls to the board only", async () => {
    const consented = await submitConsented("ada");
    expect(consented.state).toBe("consented");

    const { requests } = await board.queue();
    const boardHtml = renderQueue(requests, "advisory-board");
    expect(boardHtml).toContain(`data-request="${consented.request_id}"`);
    expect(boardHtml).toContain('data-action="approve"');
    expect(boardHtml).toContain('data-action="reject"');

    const healthHtml = renderQueue(requests, "health-center");
    expect(healthHtml).not.toContain('data-action="approve"');
    expect(healthHtml).not.toContain('data-action="reject"');

    // the server enforces the same rule regardless of what we render
    await expect(
      health.decide(consented.request_id, true, "health-desk"),
    ).rejects.toMatchObject({ status: 403, code: "forbidden" });

    // park this request for the approval test below
    approvable = consented;
  });

  it("approval completes the trace and renders the result table", async () => {
    const decided = await board.decide(
      approvable.request_id,
      true,
      "board-demo",
    );
    expect(decided.state).toBe("completed");
    expect(decided.has_result).toBe(true);

    const result = await board.result(approvable.request_id);
    expect(result.hop1).toEqual([
      {
        invite_code: demo.expected_hop1.invite_code,
        contact_minutes: demo.expected_hop1.contact_minutes,
      },
    ]);
    expect(result.hop2).toEqual([]);

    const html = renderResult(result);
    expect(html).toContain(`>${demo.expected_hop1.invite_code}<`);
    expect(html).toContain(`>${demo.expected_hop1.contact_minutes} min<`);
    expect(html).toContain("No qualifying contacts"); // empty hop2

    const { requests } = await board.queue();
    const queueHtml = renderQueue(requests, "advisory-board");
    expect(queueHtml).toContain('data-action="view-result"');

    // nothing identifying leaves the backend or reaches the markup
    for (const name of Object.keys(demo.subjects)) {
      const subject = demo.subjects[name];
      for (const text of [html, queueHtml, JSON.stringify(result)]) {
        expect(text).not.toContain(subject.unique_id);
        expect(text).not.toContain(subject.phone);
      }
    }
  });

  it("rejection is terminal and never yields a result", async () => {
    const consented = await submitConsented("bea");
    const rejected = await board.decide(
      consented.request_id,
      false,
      "board-demo",
    );
    expect(rejected.state).toBe("rejected");
    expect(rejected.has_result).toBe(false);

    await expect(board.result(consented.request_id)).rejects.toMatchObject({
      status: 409,
      code: "invalid-state",
    });

    const { requests } = await board.queue();
    const row = requests.find((r) => r.request_id === consented.request_id)!;
    expect(row.state).toBe("rejected");
    const html = renderQueue(requests, "advisory-board");
    expect(html).toContain("state-rejected");
    expect(html).not.toContain(
      `data-action="view-result" data-request="${consented.request_id}"`,
    );

    // a late second decision surfaces the refreshed state, not a new one
    let conflict: ApiError | null = null;
    try {
      await board.decide(consented.request_id, true, "board-demo");
    } catch (err) {
      conflict = err as ApiError;
    }
    expect(conflict?.code).toBe("invalid-state");
    const refreshed = renderDecisionConflict(row);
    expect(refreshed).toContain("already decided");
    expect(refreshed).toContain("state-rejected");
  });
});

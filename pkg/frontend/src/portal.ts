/** Browser entry point. Everything interesting lives in the views and
 * the client; this file only moves strings between them and the DOM.
 */

import { ApiError, PortalClient, SubmitTraceInput } from "./api.js";
import { demoSession, parseRole, PortalSession } from "./session.js";
import { renderOpsDashboard } from "./views/dashboard.js";
import { IntakeFlow, renderIntake } from "./views/intake.js";
import { renderDecisionConflict, renderQueue, renderResult } from "./views/review.js";

function sessionFromLocation(): PortalSession {
  const params = new URLSearchParams(window.location.search);
  const baseUrl = params.get("backend") ?? "http://127.0.0.1:8000";
  const role = parseRole(params.get("role") ?? "health-center");
  const token = params.get("token") ?? demoSession(baseUrl, role).token;
  return { baseUrl, token, role };
}

function epochFromInput(value: string): number {
  return Math.floor(new Date(value).getTime() / 1000);
}

function main(): void {
  const session = sessionFromLocation();
  const client = new PortalClient(session.baseUrl, session.token);
  const intake = new IntakeFlow(client);

  const intakeRoot = document.getElementById("intake");
  const queueRoot = document.getElementById("queue");
  const resultRoot = document.getElementById("result");
  const opsRoot = document.getElementById("ops");

  const drawIntake = () => {
    if (intakeRoot) intakeRoot.innerHTML = renderIntake(intake.state);
  };

  const refreshQueue = async () => {
    if (!queueRoot) return;
    try {
      const { requests } = await client.queue();
      queueRoot.innerHTML = renderQueue(requests, session.role);
    } catch (err) {
      queueRoot.innerHTML = `<p class="empty">Queue unavailable: ${
        err instanceof ApiError ? err.detail : String(err)
      }</p>`;
    }
  };

  const refreshOps = async () => {
    if (!opsRoot) return;
    try {
      const [{ hours }, registrations] = await Promise.all([
        client.livelinessSummary(72),
        client.registrations(14),
      ]);
      opsRoot.innerHTML = renderOpsDashboard(hours, registrations);
    } catch {
      opsRoot.innerHTML = renderOpsDashboard([], null);
    }
  };

  document.addEventListener("submit", async (event) => {
    const form = event.target as HTMLFormElement;
    if (form.dataset.form === "trace-details") {
      event.preventDefault();
      const data = new FormData(form);
      const input: SubmitTraceInput = {
        unique_id: String(data.get("unique_id") ?? ""),
        device_suffix: String(data.get("device_suffix") ?? ""),
        phone: String(data.get("phone") ?? ""),
        window: [
          epochFromInput(String(data.get("window_start") ?? "")),
          epochFromInput(String(data.get("window_end") ?? "")),
        ],
        clinical: { notes: String(data.get("clinical_notes") ?? "") },
      };
      await intake.submit(input);
      drawIntake();
    } else if (form.dataset.form === "trace-otp") {
      event.preventDefault();
      const data = new FormData(form);
      await intake.consent(String(data.get("otp") ?? ""));
      drawIntake();
      void refreshQueue();
    }
  });

  document.addEventListener("click", async (event) => {
    const target = event.target as HTMLElement;
    const action = target.dataset.action;
    if (!action) return;
    if (action === "reissue") {
      await intake.reissue();
      drawIntake();
      return;
    }
    const requestId = target.dataset.request;
    if (!requestId) return;
    if (action === "approve" || action === "reject") {
      try {
        await client.decide(requestId, action === "approve", session.role);
      } catch (err) {
        if (err instanceof ApiError && err.code === "invalid-state" && queueRoot) {
          const { requests } = await client.queue();
          const current = requests.find((r) => r.request_id === requestId);
          queueRoot.innerHTML =
            (current ? renderDecisionConflict(current) : "") +
            renderQueue(requests, session.role);
          return;
        }
        throw err;
      }
      await refreshQueue();
    } else if (action === "view-result" && resultRoot) {
      const result = await client.result(requestId);
      resultRoot.innerHTML = renderResult(result);
    }
  });

  drawIntake();
  void refreshQueue();
  void refreshOps();
}

document.addEventListener("DOMContentLoaded", main);

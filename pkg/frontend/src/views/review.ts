/** Queue and decision views for the review board and health center. */

import { Role, TraceResult, TraceSummary } from "../api.js";
import { esc, formatEpoch, formatMinutes } from "./html.js";

const DECIDABLE = "consented";

export function renderQueue(requests: TraceSummary[], role: Role): string {
  if (requests.length === 0) {
    return `<section class="queue"><p class="empty">No trace requests yet.</p></section>`;
  }
  const rows = requests.map((request) => renderQueueRow(request, role));
  return `
<section class="queue">
  <table>
    <thead>
      <tr><th>Request</th><th>Window</th><th>State</th><th>Submitted</th>
          <th>Decided by</th><th></th></tr>
    </thead>
    <tbody>
      ${rows.join("\n      ")}
    </tbody>
  </table>
</section>`;
}

function renderQueueRow(request: TraceSummary, role: Role): string {
  const window = `${formatEpoch(request.window[0])} to ${formatEpoch(request.window[1])}`;
  const actions: string[] = [];
  // decision controls are a board-only affordance; the server enforces
  // the same rule, this just keeps the health-center view honest
  if (role === "advisory-board" && request.state === DECIDABLE) {
    actions.push(
      `<button data-action="approve" data-request="${esc(request.request_id)}">Approve</button>`,
      `<button data-action="reject" data-request="${esc(request.request_id)}">Reject</button>`,
    );
  }
  if (request.has_result) {
    actions.push(
      `<a data-action="view-result" data-request="${esc(request.request_id)}" href="#result">View result</a>`,
    );
  }
  return `<tr data-request="${esc(request.request_id)}">
  <td><code>${esc(request.request_id.slice(0, 8))}</code></td>
  <td>${esc(window)}</td>
  <td><span class="badge state-${esc(request.state)}">${esc(request.state)}</span></td>
  <td>${esc(formatEpoch(request.submitted_at))}</td>
  <td>${esc(request.decided_by ?? "")}</td>
  <td>${actions.join(" ")}</td>
</tr>`;
}

/** Result table: invite codes and contact durations, nothing else. */
export function renderResult(result: TraceResult): string {
  return `
<section class="trace-result" data-request="${esc(result.request_id)}">
  <h2>Trace result</h2>
  <p>Window ${esc(formatEpoch(result.window[0]))} to ${esc(
    formatEpoch(result.window[1]),
  )}, executed ${esc(formatEpoch(result.executed_at))}.</p>
  ${renderHop("Direct contacts", result.hop1)}
  ${renderHop("Second-degree contacts", result.hop2)}
</section>`;
}

function renderHop(
  title: string,
  entries: { invite_code: string; contact_minutes: number }[],
): string {
  if (entries.length === 0) {
    return `<h3>${esc(title)}</h3><p class="empty">No qualifying contacts.</p>`;
  }
  const rows = entries
    .map(
      (entry) =>
        `<tr><td class="code">${esc(entry.invite_code)}</td>` +
        `<td>${esc(formatMinutes(entry.contact_minutes))}</td></tr>`,
    )
    .join("\n");
  return `<h3>${esc(title)}</h3>
<table class="hop">
  <thead><tr><th>Invite code</th><th>Contact time</th></tr></thead>
  <tbody>
${rows}
  </tbody>
</table>`;
}

/** Shown when a decision hits a request someone else already decided. */
export function renderDecisionConflict(current: TraceSummary): string {
  return `<p class="inline-error" data-error="invalid-state">
  This request was already decided (now
  <span class="badge state-${esc(current.state)}">${esc(current.state)}</span>,
  by ${esc(current.decided_by ?? "unknown")}). The queue was refreshed.
</p>`;
}

/** Operations dashboard: fleet liveliness and registration charts. */

import { HourBucket, RegistrationSeries } from "../api.js";
import { barChart, lineChart } from "./charts.js";
import { esc } from "./html.js";

export function renderOpsDashboard(
  hours: HourBucket[],
  registrations: RegistrationSeries | null,
): string {
  return `
<section class="ops-dashboard">
  <h2>Operations</h2>
  ${renderScanCharts(hours)}
  ${renderRegistrationCharts(registrations)}
</section>`;
}

function renderScanCharts(hours: HourBucket[]): string {
  if (hours.length === 0) {
    return `<p class="empty" data-empty="liveliness">No liveliness data yet.</p>`;
  }
  const scans = lineChart(
    [
      {
        name: "scans-received",
        points: hours.map((h) => h.scans_performed),
        color: "#2563eb",
      },
      {
        name: "scans-failed",
        points: hours.map((h) => h.scans_failed),
        color: "#dc2626",
      },
    ],
    "Scan records per hour",
  );
  const reporting = lineChart(
    [
      {
        name: "devices-reporting",
        points: hours.map((h) => h.devices_reporting),
        color: "#059669",
      },
    ],
    "Devices reporting per hour",
  );
  return scans + "\n" + reporting;
}

function renderRegistrationCharts(
  registrations: RegistrationSeries | null,
): string {
  if (!registrations || registrations.total_identities === 0) {
    return `<p class="empty" data-empty="registrations">No registrations yet.</p>`;
  }
  const installs = barChart(
    registrations.days.map((d) => ({
      label: new Date(d.day_start * 1000).toISOString().slice(0, 10),
      value: d.installs,
    })),
    "Installations per day",
  );
  const models = Object.entries(registrations.make_models)
    .map(
      ([model, count]) =>
        `<tr data-model="${esc(model)}"><td>${esc(model)}</td><td>${count}</td></tr>`,
    )
    .join("\n");
  return `${installs}
<h3>Device models (${registrations.total_identities} identities)</h3>
<table class="models">
  <thead><tr><th>Model</th><th>Count</th></tr></thead>
  <tbody>
${models}
  </tbody>
</table>`;
}

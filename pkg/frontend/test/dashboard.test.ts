import { readFile } from "node:fs/promises";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { HourBucket, PortalClient, RegistrationSeries } from "../src/api.js";
import { DEMO_TOKENS } from "../src/session.js";
import { renderOpsDashboard } from "../src/views/dashboard.js";
import { Backend, startDemoBackend } from "./backend.js";

function countMatches(html: string, needle: string): number {
  return html.split(needle).length - 1;
}

async function loadFixture<T>(name: string): Promise<T> {
  const raw = await readFile(new URL(`./fixtures/${name}`, import.meta.url), "utf8");
  return JSON.parse(raw) as T;
}

describe("ops dashboard rendering (fixtures)", () => {
  it("draws one marker per hour for three days of liveliness", async () => {
    const { hours } = await loadFixture<{ hours: HourBucket[] }>(
      "liveliness-3days.json",
    );
    expect(hours).toHaveLength(72);
    const registrations = await loadFixture<RegistrationSeries>(
      "registrations-3days.json",
    );

    const html = renderOpsDashboard(hours, registrations);
    expect(countMatches(html, '<circle data-series="scans-received"')).toBe(72);
    expect(countMatches(html, '<circle data-series="scans-failed"')).toBe(72);
    expect(countMatches(html, '<circle data-series="devices-reporting"')).toBe(72);
    expect(html).toContain('data-chart="Scan records per hour"');
  });

  it("draws one bar per day and one row per device model", async () => {
    const { hours } = await loadFixture<{ hours: HourBucket[] }>(
      "liveliness-3days.json",
    );
    const registrations = await loadFixture<RegistrationSeries>(
      "registrations-3days.json",
    );

    const html = renderOpsDashboard(hours, registrations);
    expect(countMatches(html, "<rect data-bar=")).toBe(3);
    expect(html).toContain('data-bar="2026-08-13" data-value="3"');
    expect(countMatches(html, "<tr data-model=")).toBe(3);
    expect(html).toContain("6 identities");
  });

  it("falls back to empty-state placeholders", async () => {
    const empty = renderOpsDashboard([], null);
    expect(empty).toContain('data-empty="liveliness"');
    expect(empty).toContain('data-empty="registrations"');

    const { hours } = await loadFixture<{ hours: HourBucket[] }>(
      "liveliness-3days.json",
    );
    const noInstalls = renderOpsDashboard(hours, {
      days: [],
      make_models: {},
      total_identities: 0,
    });
    expect(noInstalls).toContain('data-empty="registrations"');
    expect(noInstalls).toContain('<circle data-series="scans-received"');
  });
});

describe("ops dashboard against the live backend", () => {
  let backend: Backend;
  let ops: PortalClient;
  let health: PortalClient;

  beforeAll(async () => {
    backend = await startDemoBackend();
    ops = new PortalClient(backend.baseUrl, DEMO_TOKENS["ops"]);
    health = new PortalClient(backend.baseUrl, DEMO_TOKENS["health-center"]);
  });

  afterAll(async () => {
    await backend.stop();
  });

  it("serves 72 hourly buckets with real fleet activity", async () => {
    const { hours } = await ops.livelinessSummary(72);
    expect(hours).toHaveLength(72);
    const active = hours.filter((h) => h.devices_reporting > 0);
    expect(active.length).toBeGreaterThanOrEqual(70);
    const scanned = hours.reduce((sum, h) => sum + h.scans_performed, 0);
    expect(scanned).toBeGreaterThan(0);

    const registrations = await ops.registrations(3);
    expect(registrations.days).toHaveLength(3);
    const installs = registrations.days.reduce((sum, d) => sum + d.installs, 0);
    expect(installs).toBe(6);
    expect(registrations.total_identities).toBe(6);

    const html = renderOpsDashboard(hours, registrations);
    expect(countMatches(html, '<circle data-series="scans-received"')).toBe(72);
    expect(countMatches(html, '<circle data-series="scans-failed"')).toBe(72);
    expect(countMatches(html, "<rect data-bar=")).toBe(3);
  });

  it("is refused for non-ops tokens", async () => {
    await expect(health.livelinessSummary(24)).rejects.toMatchObject({
      status: 403,
      code: "forbidden",
    });
    await expect(ops.queue()).rejects.toMatchObject({
      status: 403,
      code: "forbidden",
    });
  });
});

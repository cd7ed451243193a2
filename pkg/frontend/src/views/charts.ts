/** Inline SVG charts. No chart library: the few hundred bytes of SVG
 * we need are easier to test (one marker element per data point) than
 * a canvas renderer would be.
 */

import { esc } from "./html.js";

const WIDTH = 640;
const HEIGHT = 160;
const PAD = 8;

export interface Series {
  name: string;
  points: number[];
  color: string;
}

function scaleX(index: number, count: number): number {
  if (count <= 1) return WIDTH / 2;
  return PAD + (index * (WIDTH - 2 * PAD)) / (count - 1);
}

function scaleY(value: number, max: number): number {
  const span = max > 0 ? max : 1;
  return HEIGHT - PAD - (value / span) * (HEIGHT - 2 * PAD);
}

/** Multi-series line chart; every point is its own <circle> marker. */
export function lineChart(series: Series[], title: string): string {
  const max = Math.max(1, ...series.flatMap((s) => s.points));
  const body = series
    .map((s) => {
      const coords = s.points.map(
        (v, i) => [scaleX(i, s.points.length), scaleY(v, max)] as const,
      );
      const polyline = coords.map(([x, y]) => `${x.toFixed(1)},${y.toFixed(1)}`).join(" ");
      const markers = coords
        .map(
          ([x, y]) =>
            `<circle data-series="${esc(s.name)}" cx="${x.toFixed(1)}" cy="${y.toFixed(1)}" r="2" fill="${esc(s.color)}"/>`,
        )
        .join("");
      return `<polyline data-series="${esc(s.name)}" fill="none" stroke="${esc(s.color)}" points="${polyline}"/>${markers}`;
    })
    .join("\n");
  const legend = series
    .map(
      (s) =>
        `<span class="legend-item" style="color:${esc(s.color)}">${esc(s.name)}</span>`,
    )
    .join(" ");
  return `<figure class="chart" data-chart="${esc(title)}">
  <figcaption>${esc(title)} ${legend}</figcaption>
  <svg viewBox="0 0 ${WIDTH} ${HEIGHT}" role="img" aria-label="${esc(title)}">
${body}
  </svg>
</figure>`;
}

/** Bar chart with one <rect> per value. */
export function barChart(
  values: { label: string; value: number }[],
  title: string,
): string {
  const max = Math.max(1, ...values.map((v) => v.value));
  const slot = (WIDTH - 2 * PAD) / Math.max(1, values.length);
  const bars = values
    .map((v, i) => {
      const height = ((HEIGHT - 2 * PAD) * v.value) / max;
      const x = PAD + i * slot + slot * 0.15;
      const y = HEIGHT - PAD - height;
      return `<rect data-bar="${esc(v.label)}" data-value="${v.value}" x="${x.toFixed(1)}" y="${y.toFixed(1)}" width="${(slot * 0.7).toFixed(1)}" height="${height.toFixed(1)}"/>`;
    })
    .join("\n");
  return `<figure class="chart" data-chart="${esc(title)}">
  <figcaption>${esc(title)}</figcaption>
  <svg viewBox="0 0 ${WIDTH} ${HEIGHT}" role="img" aria-label="${esc(title)}">
${bars}
  </svg>
</figure>`;
}

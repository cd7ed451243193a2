/** Tiny escaping helper shared by the string-template views. */

const REPLACEMENTS: Record<string, string> = {
  "&": "&amp;",
  "<": "&lt;",
  ">": "&gt;",
  '"': "&quot;",
  "'": "&#39;",
};

export function esc(value: unknown): string {
  return String(value).replace(/[&<>"']/g, (ch) => REPLACEMENTS[ch]);
}

export function formatEpoch(epoch: number): string {
  return new Date(epoch * 1000).toISOString().replace("T", " ").slice(0, 16);
}

export function formatMinutes(minutes: number): string {
  return `${minutes} min`;
}

/** Small shared rendering helpers. Views are pure: payload in, SVG/HTML out.
 * Every displayed metric carries the raw payload number in data-value so
 * tests (and humans) can trace each pixel back to an API field. */

export function esc(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Raw payload value for data-value attributes: exact JSON number text. */
export function raw(n: number): string {
  return String(n);
}

export function linearScale(
  domainMin: number,
  domainMax: number,
  rangeMin: number,
  rangeMax: number,
): (v: number) => number {
  const d = domainMax - domainMin;
  if (d === 0) return () => (rangeMin + rangeMax) / 2;
  return (v: number) => rangeMin + ((v - domainMin) / d) * (rangeMax - rangeMin);
}

export const DIRECTION_COLORS = [
  "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
  "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac",
];

export function directionColor(d: number): string {
  return DIRECTION_COLORS[((d % DIRECTION_COLORS.length) + DIRECTION_COLORS.length) % DIRECTION_COLORS.length];
}

export const CANDIDATE_COLORS = ["#1f77b4", "#ff7f0e", "#2ca02c"];

export const REACH_BAND_COLORS: Record<string, string> = {
  "<=200": "#1a9641",
  "<=400": "#a6d96a",
  "<=600": "#ffffbf",
  "<=800": "#fdae61",
  ">800": "#d7191c",
};

export function svgOpen(width: number, height: number, cls: string): string {
  return `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${width} ${height}" class="${cls}" width="${width}" height="${height}">`;
}

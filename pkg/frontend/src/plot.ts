// SVG rendering of RD reports: theoretical bound curves, empirical
// scheme points, and the amortized label-overhead vertical line.

import { asFinite, Curve, parseReport, RdReport } from './report';

export interface PlotStyle {
  width?: number;
  height?: number;
  title?: string;
}

export interface RenderResult {
  svg: string;
  warnings: string[];
  seriesCount: number;
}

const COLORS = ['#1f77b4', '#d62728', '#2ca02c', '#9467bd', '#ff7f0e',
                '#8c564b'];

interface XY {
  x: number;
  y: number;
}

function fmt(v: number): string {
  return Number.isInteger(v) ? v.toString() : v.toPrecision(4);
}

function ticks(lo: number, hi: number, n: number): number[] {
  if (!(hi > lo)) return [lo];
  const span = hi - lo;
  const step = Math.pow(10, Math.floor(Math.log10(span / n)));
  const mult = [1, 2, 5, 10].find((m) => span / (step * m) <= n) ?? 10;
  const s = step * mult;
  const first = Math.ceil(lo / s) * s;
  const out: number[] = [];
  for (let t = first; t <= hi + 1e-12; t += s) out.push(t);
  return out;
}

export function renderRdPlot(doc: unknown, style: PlotStyle = {}): RenderResult {
  const rep: RdReport = parseReport(doc);
  const warnings: string[] = [];
  const width = style.width ?? 760;
  const height = style.height ?? 520;
  const ml = 64, mr = 18, mt = 40, mb = 52;
  const pw = width - ml - mr;
  const ph = height - mt - mb;

  // collect series
  const theoCond: XY[] = [];
  const theoUpper: XY[] = [];
  let labelOverhead: number | null = null;
  for (const c of rep.curves) {
    for (const p of c.points) {
      const th = p.theoretical;
      if (!th) continue;
      const y = asFinite(th.nmse_db);
      if (y === null) continue;
      theoCond.push({ x: th.r_cond, y });
      theoUpper.push({ x: th.r_gmtc_upper, y });
      if (labelOverhead === null && typeof th.label_overhead === 'number') {
        labelOverhead = th.label_overhead;
      }
    }
    if (theoCond.length) break; // theoretical blocks repeat across schemes
  }
  if (!theoCond.length) {
    warnings.push('report has no theoretical blocks; rendering empirical-only');
  }
  const empirical: { scheme: string; pts: XY[] }[] = [];
  for (const c of rep.curves) {
    const pts: XY[] = [];
    for (const p of c.points) {
      const em = p.empirical;
      if (!em) continue;
      const y = asFinite(em.nmse_db);
      if (y === null) continue;
      pts.push({ x: em.rate_bits_per_dim, y });
    }
    if (pts.length) empirical.push({ scheme: c.scheme, pts });
  }
  if (!empirical.length && !theoCond.length) {
    warnings.push('report holds no plottable points');
  }

  const all = [...theoCond, ...theoUpper, ...empirical.flatMap((e) => e.pts)];
  if (labelOverhead !== null && labelOverhead > 0) {
    all.push({ x: labelOverhead, y: all.length ? all[0].y : 0 });
  }
  const xs = all.map((p) => p.x);
  const ys = all.map((p) => p.y);
  const xlo = all.length ? Math.min(...xs, 0) : 0;
  const xhi = all.length ? Math.max(...xs) * 1.05 : 1;
  const ylo = all.length ? Math.min(...ys) - 1 : -1;
  const yhi = all.length ? Math.max(...ys) + 1 : 1;
  const sx = (x: number) => ml + ((x - xlo) / (xhi - xlo || 1)) * pw;
  const sy = (y: number) => mt + ((yhi - y) / (yhi - ylo || 1)) * ph;
  const poly = (pts: XY[]) =>
    pts.slice().sort((a, b) => a.x - b.x)
      .map((p) => `${sx(p.x).toFixed(2)},${sy(p.y).toFixed(2)}`).join(' ');

  const parts: string[] = [];
  parts.push(`<svg xmlns="http://www.w3.org/2000/svg" width="${width}" ` +
    `height="${height}" viewBox="0 0 ${width} ${height}" ` +
    `font-family="sans-serif" font-size="12">`);
  parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);
  if (style.title) {
    parts.push(`<text x="${width / 2}" y="20" text-anchor="middle" ` +
      `font-size="15">${style.title}</text>`);
  }
  // axes + ticks
  parts.push(`<g class="axes" stroke="#333" fill="none">` +
    `<line x1="${ml}" y1="${mt + ph}" x2="${ml + pw}" y2="${mt + ph}"/>` +
    `<line x1="${ml}" y1="${mt}" x2="${ml}" y2="${mt + ph}"/></g>`);
  for (const t of ticks(xlo, xhi, 8)) {
    const x = sx(t);
    parts.push(`<line x1="${x}" y1="${mt + ph}" x2="${x}" y2="${mt + ph + 4}" ` +
      `stroke="#333"/>` +
      `<text x="${x}" y="${mt + ph + 17}" text-anchor="middle">${fmt(t)}</text>`);
  }
  for (const t of ticks(ylo, yhi, 8)) {
    const y = sy(t);
    parts.push(`<line x1="${ml - 4}" y1="${y}" x2="${ml}" y2="${y}" ` +
      `stroke="#333"/>` +
      `<text x="${ml - 7}" y="${y + 4}" text-anchor="end">${fmt(t)}</text>`);
  }
  parts.push(`<text x="${ml + pw / 2}" y="${height - 12}" ` +
    `text-anchor="middle">rate (bits per dimension)</text>`);
  parts.push(`<text x="16" y="${mt + ph / 2}" text-anchor="middle" ` +
    `transform="rotate(-90 16 ${mt + ph / 2})">NMSE (dB)</text>`);

  const legend: { label: string; color: string; dash?: string }[] = [];
  if (labelOverhead !== null && labelOverhead > 0) {
    const x = sx(labelOverhead);
    parts.push(`<line class="label-overhead" x1="${x.toFixed(2)}" ` +
      `y1="${mt}" x2="${x.toFixed(2)}" y2="${mt + ph}" stroke="#888" ` +
      `stroke-dasharray="6 4"/>`);
    legend.push({ label: 'label overhead H(C)/(tau N)', color: '#888',
                  dash: '6 4' });
  }
  if (theoCond.length) {
    parts.push(`<polyline class="theory-cond" points="${poly(theoCond)}" ` +
      `fill="none" stroke="#000" stroke-width="1.6"/>`);
    parts.push(`<polyline class="theory-upper" points="${poly(theoUpper)}" ` +
      `fill="none" stroke="#000" stroke-width="1.6" stroke-dasharray="3 3"/>`);
    legend.push({ label: 'conditional bound', color: '#000' });
    legend.push({ label: 'label-aware upper bound', color: '#000', dash: '3 3' });
  }
  empirical.forEach((series, i) => {
    const color = COLORS[i % COLORS.length];
    parts.push(`<polyline class="empirical-${series.scheme}" ` +
      `points="${poly(series.pts)}" fill="none" stroke="${color}" ` +
      `stroke-width="1.2" opacity="0.7"/>`);
    for (const p of series.pts) {
      parts.push(`<circle class="pt-${series.scheme}" cx="${sx(p.x).toFixed(2)}" ` +
        `cy="${sy(p.y).toFixed(2)}" r="3.4" fill="${color}"/>`);
    }
    legend.push({ label: series.scheme, color });
  });
  legend.forEach((e, i) => {
    const y = mt + 10 + 16 * i;
    const x = ml + pw - 190;
    parts.push(`<line x1="${x}" y1="${y}" x2="${x + 24}" y2="${y}" ` +
      `stroke="${e.color}" stroke-width="2"` +
      (e.dash ? ` stroke-dasharray="${e.dash}"` : '') + `/>`);
    parts.push(`<text x="${x + 30}" y="${y + 4}">${e.label}</text>`);
  });
  parts.push('</svg>');
  return {
    svg: parts.join('\n'),
    warnings,
    seriesCount: empirical.length + (theoCond.length ? 2 : 0),
  };
}

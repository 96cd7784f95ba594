import { describe, expect, it } from 'vitest';

import { renderRdPlot } from '../src/plot';
import { SchemaMismatch } from '../src/report';

function goldenReport() {
  const mk = (rate: number, nmse: number) => ({
    target: rate,
    water_level: 0.5 / rate,
    theoretical: {
      r_cond: rate,
      r_gmtc_upper: rate + 0.046875,
      distortion: Math.pow(10, nmse / 10),
      nmse_db: nmse,
      label_overhead: 0.046875,
    },
    empirical: {
      rate_bits_per_dim: rate * 1.2,
      mse: Math.pow(10, (nmse + 2) / 10),
      nmse_db: nmse + 2,
      label_bits_per_dim: 0.047,
      map_accuracy: 1.0,
    },
  });
  return {
    config: { k: 8, dim: 64 },
    seed: 0,
    tau: 1,
    dim: 64,
    k: 8,
    curves: [
      { scheme: 'oracle-label', points: [mk(0.5, -8), mk(1.0, -12), mk(2.0, -17)] },
      { scheme: 'map', points: [mk(0.5, -7), mk(1.0, -11), mk(2.0, -16)] },
    ],
    runtime_sec: 1.0,
  };
}

describe('RD plot rendering (B2)', () => {
  it('renders theory curves, empirical points and the overhead line', () => {
    const { svg, warnings, seriesCount } = renderRdPlot(goldenReport(), {
      title: 'golden fixture',
    });
    expect(warnings).toEqual([]);
    expect(svg).toContain('<svg');
    expect(svg).toContain('class="theory-cond"');
    expect(svg).toContain('class="theory-upper"');
    expect(svg).toContain('class="label-overhead"');
    expect(svg).toContain('stroke-dasharray="6 4"');
    // one circle per empirical point
    const circles = svg.match(/<circle /g) ?? [];
    expect(circles.length).toBe(6);
    expect(svg).toContain('pt-oracle-label');
    expect(svg).toContain('pt-map');
    // 2 empirical series + 2 theoretical curves
    expect(seriesCount).toBe(4);
    expect(svg).toContain('rate (bits per dimension)');
    expect(svg).toContain('NMSE (dB)');
    expect(svg).toContain('golden fixture');
  });

  it('renders empirical-only with a warning when theory is missing', () => {
    const rep = goldenReport();
    for (const c of rep.curves) {
      for (const p of c.points) {
        (p as Record<string, unknown>).theoretical = null;
      }
    }
    const { svg, warnings, seriesCount } = renderRdPlot(rep);
    expect(warnings.some((w) => w.includes('no theoretical blocks'))).toBe(true);
    expect(svg).not.toContain('class="theory-cond"');
    expect((svg.match(/<circle /g) ?? []).length).toBe(6);
    expect(seriesCount).toBe(2);
  });

  it('renders a single-curve report', () => {
    const rep = goldenReport();
    rep.curves = [rep.curves[0]];
    const { svg, seriesCount } = renderRdPlot(rep);
    expect(seriesCount).toBe(3);
    expect((svg.match(/<circle /g) ?? []).length).toBe(3);
  });

  it('rejects malformed documents', () => {
    expect(() => renderRdPlot({})).toThrow(SchemaMismatch);
    expect(() => renderRdPlot({ curves: [] })).toThrow(SchemaMismatch);
    expect(() => renderRdPlot({ curves: [{ scheme: 'x' }] }))
      .toThrow(SchemaMismatch);
    expect(() => renderRdPlot({
      curves: [{ scheme: 'x', points: [{ target: 'not-a-number' }] }],
    })).toThrow(SchemaMismatch);
  });
});

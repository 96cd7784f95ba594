// RD-report document schema (as emitted by the primary toolkit) and its
// validation.

export class SchemaMismatch extends Error {}

export interface TheoreticalBlock {
  r_cond: number;
  r_gmtc_upper: number;
  nmse_db: number | string;
  label_overhead: number;
}

export interface EmpiricalBlock {
  rate_bits_per_dim: number;
  nmse_db: number | string;
  mse?: number;
  label_bits_per_dim?: number;
  map_accuracy?: number;
}

export interface CurvePoint {
  target: number;
  water_level?: number;
  theoretical?: TheoreticalBlock | null;
  empirical?: EmpiricalBlock | null;
}

export interface Curve {
  scheme: string;
  points: CurvePoint[];
}

export interface RdReport {
  curves: Curve[];
  tau?: number;
  dim?: number;
  k?: number;
  seed?: number;
}

export function asFinite(x: number | string | undefined | null): number | null {
  if (typeof x === 'number' && Number.isFinite(x)) return x;
  return null;
}

export function parseReport(doc: unknown): RdReport {
  if (typeof doc !== 'object' || doc === null) {
    throw new SchemaMismatch('report is not a JSON object');
  }
  const rep = doc as Record<string, unknown>;
  if (!Array.isArray(rep.curves) || rep.curves.length === 0) {
    throw new SchemaMismatch('report has no curves array');
  }
  for (const c of rep.curves) {
    if (typeof c !== 'object' || c === null ||
        typeof (c as Curve).scheme !== 'string' ||
        !Array.isArray((c as Curve).points)) {
      throw new SchemaMismatch('curve entries need a scheme and a points array');
    }
    for (const p of (c as Curve).points) {
      if (typeof p !== 'object' || p === null ||
          typeof (p as CurvePoint).target !== 'number') {
        throw new SchemaMismatch('curve points need a numeric target');
      }
      const emp = (p as CurvePoint).empirical;
      if (emp && typeof emp.rate_bits_per_dim !== 'number') {
        throw new SchemaMismatch('empirical blocks need rate_bits_per_dim');
      }
    }
  }
  return rep as unknown as RdReport;
}

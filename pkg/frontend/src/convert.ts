// One-shot conversion of externally obtained channel dumps into CSIBIN.
//
// Recognized containers:
//   .npy  C-order, samples first: (n, N) complex vectors, or (n, Nc, Nt)
//         channel matrices with rows = subcarriers, columns = antennas
//   .mat  Level-5 uncompressed, column-major, samples last: (Nc, Nt, n)
//         or (N, n) complex arrays
//
// Each matrix is vectorized column-major (antenna-major element order,
// h[m*Nc + n] = H[n, m]) and real-stacked as [Re(h); Im(h)], producing a
// real-mode CSIBIN of dimension 2N that the primary toolkit reads
// directly.  Anything else fails loudly with a dimension report.

import * as fs from 'fs';
import * as path from 'path';

import { FIELD_REAL, STACK_REAL_SPLIT, writeCsibin } from './csibin';
import { MatArray, parseMat5 } from './matv5';
import { parseNpy, UnknownLayout } from './npy';

export { UnknownLayout } from './npy';

export interface ConversionOptions {
  nTrain: number;
  normalize?: boolean;
  /** mat inputs: which dimension indexes samples (default 'last') */
  matSamples?: 'first' | 'last';
}

export interface ConversionManifest {
  input: string;
  format: 'npy' | 'mat';
  detected: {
    count: number;
    complexDim: number;
    nSubcarriers: number | null;
    nAntennas: number | null;
  };
  stacking: string;
  normalization: {
    applied: boolean;
    powerScale: number;
    meanPowerPerDim: number;
  };
  outputs: { train: string; test: string };
  counts: { train: number; test: number };
}

interface ComplexSamples {
  /** per sample, interleaved (re, im) of the vectorized channel */
  rows: Float64Array[];
  nSubcarriers: number | null;
  nAntennas: number | null;
}

function vectorizeNpy(buf: Buffer): ComplexSamples {
  const arr = parseNpy(buf);
  if (!arr.complex) {
    throw new UnknownLayout(
      `expected a complex array, got ${arr.descr} of shape ` +
      `(${arr.shape.join(', ')})`);
  }
  if (arr.shape.length === 2) {
    const [n, dim] = arr.shape;
    const rows: Float64Array[] = [];
    for (let i = 0; i < n; i++) {
      rows.push(arr.data.subarray(2 * i * dim, 2 * (i + 1) * dim).slice());
    }
    return { rows, nSubcarriers: null, nAntennas: null };
  }
  if (arr.shape.length === 3) {
    const [n, nc, nt] = arr.shape;
    const rows: Float64Array[] = [];
    for (let i = 0; i < n; i++) {
      const row = new Float64Array(2 * nc * nt);
      for (let m = 0; m < nt; m++) {
        for (let s = 0; s < nc; s++) {
          // C-order source index (i, s, m); target element m*Nc + s
          const src = 2 * ((i * nc + s) * nt + m);
          const dst = 2 * (m * nc + s);
          row[dst] = arr.data[src];
          row[dst + 1] = arr.data[src + 1];
        }
      }
      rows.push(row);
    }
    return { rows, nSubcarriers: nc, nAntennas: nt };
  }
  throw new UnknownLayout(
    `.npy arrays must be 2-D (samples, dim) or 3-D (samples, subcarriers, ` +
    `antennas); got shape (${arr.shape.join(', ')})`);
}

function vectorizeMat(arr: MatArray, samples: 'first' | 'last'): ComplexSamples {
  if (!arr.complex) {
    throw new UnknownLayout(
      `MAT variable '${arr.name}' is real; expected a complex channel array ` +
      `of dims (${arr.dims.join(' x ')})`);
  }
  const dims = arr.dims;
  // column-major strides
  const strides = [1];
  for (let i = 1; i < dims.length; i++) {
    strides.push(strides[i - 1] * dims[i - 1]);
  }
  const at = (idx: number[]) =>
    idx.reduce((acc, v, i) => acc + v * strides[i], 0);
  if (dims.length === 2) {
    const [d0, d1] = samples === 'last' ? [dims[0], dims[1]] : [dims[1], dims[0]];
    // d0 = vector dim, d1 = sample count
    const rows: Float64Array[] = [];
    for (let i = 0; i < d1; i++) {
      const row = new Float64Array(2 * d0);
      for (let j = 0; j < d0; j++) {
        const flat = samples === 'last' ? at([j, i]) : at([i, j]);
        row[2 * j] = arr.re[flat];
        row[2 * j + 1] = arr.im[flat];
      }
      rows.push(row);
    }
    return { rows, nSubcarriers: null, nAntennas: null };
  }
  if (dims.length === 3) {
    const [nc, nt, n] = samples === 'last'
      ? [dims[0], dims[1], dims[2]]
      : [dims[1], dims[2], dims[0]];
    const rows: Float64Array[] = [];
    for (let i = 0; i < n; i++) {
      const row = new Float64Array(2 * nc * nt);
      for (let m = 0; m < nt; m++) {
        for (let s = 0; s < nc; s++) {
          const flat = samples === 'last' ? at([s, m, i]) : at([i, s, m]);
          const dst = 2 * (m * nc + s);
          row[dst] = arr.re[flat];
          row[dst + 1] = arr.im[flat];
        }
      }
      rows.push(row);
    }
    return { rows, nSubcarriers: nc, nAntennas: nt };
  }
  throw new UnknownLayout(
    `MAT channel arrays must be 2-D or 3-D; '${arr.name}' has dims ` +
    `(${dims.join(' x ')})`);
}

/** interleaved complex row -> [Re(h); Im(h)] real stacking */
export function realStack(row: Float64Array): Float32Array {
  const n = row.length / 2;
  const out = new Float32Array(2 * n);
  for (let j = 0; j < n; j++) {
    out[j] = row[2 * j];
    out[n + j] = row[2 * j + 1];
  }
  return out;
}

export function convertDump(
  input: Buffer,
  inputName: string,
  opts: ConversionOptions,
): { manifest: Omit<ConversionManifest, 'outputs' | 'counts'>;
     train: Float32Array[]; test: Float32Array[] } {
  const ext = path.extname(inputName).toLowerCase();
  let parsed: ComplexSamples;
  let format: 'npy' | 'mat';
  if (ext === '.npy') {
    parsed = vectorizeNpy(input);
    format = 'npy';
  } else if (ext === '.mat') {
    parsed = vectorizeMat(parseMat5(input), opts.matSamples ?? 'last');
    format = 'mat';
  } else {
    throw new UnknownLayout(
      `unrecognized container ${ext || '(no extension)'}; expected .npy or .mat`);
  }
  const count = parsed.rows.length;
  if (count === 0) {
    throw new UnknownLayout('input holds zero samples; nothing to convert');
  }
  const complexDim = parsed.rows[0].length / 2;
  if (opts.nTrain < 0 || opts.nTrain > count) {
    throw new UnknownLayout(
      `train split ${opts.nTrain} outside [0, ${count}]`);
  }
  let power = 0;
  for (const row of parsed.rows) {
    for (let j = 0; j < row.length; j++) power += row[j] * row[j];
  }
  // average power per real dimension of the stacked vector
  const meanPower = power / (count * 2 * complexDim);
  let scale = 1.0;
  if (opts.normalize && meanPower > 0) {
    scale = Math.sqrt(meanPower);
  }
  const stacked = parsed.rows.map((r) => {
    const s = realStack(r);
    if (scale !== 1.0) {
      for (let j = 0; j < s.length; j++) s[j] = s[j] / scale;
    }
    return s;
  });
  return {
    manifest: {
      input: inputName,
      format,
      detected: {
        count,
        complexDim,
        nSubcarriers: parsed.nSubcarriers,
        nAntennas: parsed.nAntennas,
      },
      stacking: 'real-split [Re(vec H); Im(vec H)], antenna-major vec',
      normalization: {
        applied: scale !== 1.0,
        powerScale: scale,
        meanPowerPerDim: meanPower,
      },
    },
    train: stacked.slice(0, opts.nTrain),
    test: stacked.slice(opts.nTrain),
  };
}

export function convertFile(
  inputPath: string,
  outPrefix: string,
  opts: ConversionOptions,
): ConversionManifest {
  const blob = fs.readFileSync(inputPath);
  const { manifest, train, test } = convertDump(blob, inputPath, opts);
  const trainPath = `${outPrefix}-train.csibin`;
  const testPath = `${outPrefix}-test.csibin`;
  fs.writeFileSync(trainPath, writeCsibin(train, FIELD_REAL, STACK_REAL_SPLIT));
  fs.writeFileSync(testPath, writeCsibin(test, FIELD_REAL, STACK_REAL_SPLIT));
  const full: ConversionManifest = {
    ...manifest,
    outputs: { train: trainPath, test: testPath },
    counts: { train: train.length, test: test.length },
  };
  fs.writeFileSync(`${outPrefix}-manifest.json`,
                   JSON.stringify(full, null, 2) + '\n');
  return full;
}

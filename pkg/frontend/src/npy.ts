// Minimal NumPy .npy reader for complex channel dumps.
// Recognized: version 1.x/2.x headers, C-order arrays, dtypes <c8/<c16
// (complex64/complex128) and <f4/<f8 (treated as already real-stacked).

export interface NpyArray {
  descr: string;
  shape: number[];
  /** flat values; complex dtypes interleave re/im */
  data: Float64Array;
  complex: boolean;
}

export class UnknownLayout extends Error {}

export function parseNpy(buf: Buffer): NpyArray {
  if (buf.length < 10 || buf[0] !== 0x93 ||
      buf.toString('ascii', 1, 6) !== 'NUMPY') {
    throw new UnknownLayout('not an .npy file (bad magic)');
  }
  const major = buf[6];
  let headerLen: number;
  let offset: number;
  if (major === 1) {
    headerLen = buf.readUInt16LE(8);
    offset = 10;
  } else if (major === 2 || major === 3) {
    headerLen = buf.readUInt32LE(8);
    offset = 12;
  } else {
    throw new UnknownLayout(`unsupported .npy version ${major}`);
  }
  const header = buf.toString('latin1', offset, offset + headerLen);
  const descrM = header.match(/'descr'\s*:\s*'([^']+)'/);
  const fortranM = header.match(/'fortran_order'\s*:\s*(True|False)/);
  const shapeM = header.match(/'shape'\s*:\s*\(([^)]*)\)/);
  if (!descrM || !fortranM || !shapeM) {
    throw new UnknownLayout(`unparseable .npy header: ${header.trim()}`);
  }
  if (fortranM[1] === 'True') {
    throw new UnknownLayout('fortran-ordered .npy arrays are not supported');
  }
  const descr = descrM[1];
  const shape = shapeM[1].split(',').map((s) => s.trim()).filter((s) => s)
    .map((s) => parseInt(s, 10));
  const n = shape.reduce((a, b) => a * b, 1);
  const start = offset + headerLen;
  let data: Float64Array;
  let complex = false;
  const readN = (count: number, word: number,
                 rd: (o: number) => number): Float64Array => {
    const need = start + count * word;
    if (buf.length < need) {
      throw new UnknownLayout(
        `.npy payload truncated: have ${buf.length - start} bytes, ` +
        `need ${count * word}`);
    }
    const out = new Float64Array(count);
    for (let i = 0; i < count; i++) out[i] = rd(start + i * word);
    return out;
  };
  switch (descr) {
    case '<c8':
      complex = true;
      data = readN(2 * n, 4, (o) => buf.readFloatLE(o));
      break;
    case '<c16':
      complex = true;
      data = readN(2 * n, 8, (o) => buf.readDoubleLE(o));
      break;
    case '<f4':
      data = readN(n, 4, (o) => buf.readFloatLE(o));
      break;
    case '<f8':
      data = readN(n, 8, (o) => buf.readDoubleLE(o));
      break;
    default:
      throw new UnknownLayout(
        `unsupported .npy dtype ${descr} (expected <c8, <c16, <f4 or <f8); ` +
        `shape (${shape.join(', ')})`);
  }
  return { descr, shape, data, complex };
}

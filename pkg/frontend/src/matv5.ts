// Minimal MATLAB Level-5 MAT reader: a single uncompressed numeric matrix
// (double or single class, optionally complex).  MATLAB stores arrays
// column-major; dimension handling happens in the converter.

import { UnknownLayout } from './npy';

const MI_INT8 = 1;
const MI_UINT8 = 2;
const MI_INT32 = 5;
const MI_UINT32 = 6;
const MI_SINGLE = 7;
const MI_DOUBLE = 9;
const MI_MATRIX = 14;
const MX_DOUBLE = 6;
const MX_SINGLE = 7;

export interface MatArray {
  name: string;
  dims: number[];
  /** column-major real part */
  re: Float64Array;
  /** column-major imaginary part (zeros when the array is real) */
  im: Float64Array;
  complex: boolean;
}

interface Element {
  type: number;
  data: Buffer;
  next: number;
}

function readElement(buf: Buffer, off: number): Element {
  if (off + 8 > buf.length) {
    throw new UnknownLayout('MAT element header truncated');
  }
  const rawType = buf.readUInt32LE(off);
  // small data element format: length in the upper 16 bits
  if (rawType >> 16 !== 0) {
    const type = rawType & 0xffff;
    const nbytes = rawType >> 16;
    return { type, data: buf.subarray(off + 4, off + 4 + nbytes), next: off + 8 };
  }
  const nbytes = buf.readUInt32LE(off + 4);
  const data = buf.subarray(off + 8, off + 8 + nbytes);
  let next = off + 8 + nbytes;
  next += (8 - (next % 8)) % 8; // elements are 8-byte aligned
  return { type: rawType, data, next };
}

function numericData(el: Element): Float64Array {
  const b = el.data;
  switch (el.type) {
    case MI_DOUBLE: {
      const out = new Float64Array(b.length / 8);
      for (let i = 0; i < out.length; i++) out[i] = b.readDoubleLE(8 * i);
      return out;
    }
    case MI_SINGLE: {
      const out = new Float64Array(b.length / 4);
      for (let i = 0; i < out.length; i++) out[i] = b.readFloatLE(4 * i);
      return out;
    }
    default:
      throw new UnknownLayout(
        `unsupported MAT numeric element type ${el.type} ` +
        '(only miDOUBLE/miSINGLE payloads are recognized)');
  }
}

export function parseMat5(buf: Buffer): MatArray {
  if (buf.length < 128) {
    throw new UnknownLayout('file too short for a MAT 5 header');
  }
  const version = buf.readUInt16LE(124);
  const endian = buf.toString('ascii', 126, 128);
  if (version !== 0x0100 || endian !== 'IM') {
    throw new UnknownLayout(
      'not a little-endian MAT 5 file (v7 compressed and v7.3/HDF5 ' +
      'containers are not supported)');
  }
  const top = readElement(buf, 128);
  if (top.type !== MI_MATRIX) {
    throw new UnknownLayout(
      `first MAT element has type ${top.type}, expected miMATRIX ` +
      '(compressed elements are not supported)');
  }
  const body = top.data;
  let off = 0;
  const flagsEl = readElement(body, off);
  if (flagsEl.type !== MI_UINT32 || flagsEl.data.length < 8) {
    throw new UnknownLayout('malformed MAT array flags');
  }
  const flags = flagsEl.data.readUInt32LE(0);
  const klass = flags & 0xff;
  const isComplex = (flags & 0x0800) !== 0;
  if (klass !== MX_DOUBLE && klass !== MX_SINGLE) {
    throw new UnknownLayout(
      `MAT array class ${klass} is not numeric double/single`);
  }
  off = flagsEl.next;
  const dimsEl = readElement(body, off);
  if (dimsEl.type !== MI_INT32) {
    throw new UnknownLayout('malformed MAT dimensions element');
  }
  const dims: number[] = [];
  for (let i = 0; i < dimsEl.data.length / 4; i++) {
    dims.push(dimsEl.data.readInt32LE(4 * i));
  }
  off = dimsEl.next;
  const nameEl = readElement(body, off);
  if (nameEl.type !== MI_INT8 && nameEl.type !== MI_UINT8) {
    throw new UnknownLayout('malformed MAT name element');
  }
  const name = nameEl.data.toString('ascii');
  off = nameEl.next;
  const prEl = readElement(body, off);
  const re = numericData(prEl);
  let im: Float64Array = new Float64Array(re.length);
  if (isComplex) {
    const piEl = readElement(body, prEl.next);
    im = numericData(piEl);
  }
  const n = dims.reduce((a, b) => a * b, 1);
  if (re.length !== n || im.length !== n) {
    throw new UnknownLayout(
      `MAT payload length ${re.length} inconsistent with dims ` +
      `(${dims.join(' x ')})`);
  }
  return { name, dims, re, im, complex: isComplex };
}

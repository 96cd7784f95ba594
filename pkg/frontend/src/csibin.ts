// CSIBIN container (little-endian), mirroring the primary toolkit:
// magic "CSI1", version u16, field_mode u8 (0 complex, 1 real), dim u32,
// count u64, stacking u8, then float32 payload (sample-major; complex
// interleaves re/im per element).

export const CSIBIN_MAGIC = 'CSI1';
export const CSIBIN_VERSION = 1;
export const FIELD_COMPLEX = 0;
export const FIELD_REAL = 1;
export const STACK_COMPLEX_KRON = 0;
export const STACK_REAL_SPLIT = 1;
export const STACK_REAL_SEGMENT = 2;

const HEADER_BYTES = 20;

export interface CsibinData {
  fieldMode: number;
  dim: number;
  count: number;
  stacking: number;
  /** row-major payload, one row per sample (complex rows interleave re/im) */
  values: Float32Array;
}

export function writeCsibin(
  rows: Float32Array[],
  fieldMode: number,
  stacking: number,
): Buffer {
  const count = rows.length;
  const dim = count > 0 ? rows[0].length : 0;
  const per = fieldMode === FIELD_COMPLEX ? 2 : 1;
  if (fieldMode === FIELD_COMPLEX && dim % 2 !== 0) {
    throw new Error('complex rows must interleave re/im (even length)');
  }
  const logicalDim = fieldMode === FIELD_COMPLEX ? dim / 2 : dim;
  const head = Buffer.alloc(HEADER_BYTES);
  head.write(CSIBIN_MAGIC, 0, 'ascii');
  head.writeUInt16LE(CSIBIN_VERSION, 4);
  head.writeUInt8(fieldMode, 6);
  head.writeUInt32LE(logicalDim, 7);
  head.writeBigUInt64LE(BigInt(count), 11);
  head.writeUInt8(stacking, 19);
  const payload = Buffer.alloc(count * logicalDim * per * 4);
  for (let i = 0; i < count; i++) {
    const row = rows[i];
    if (row.length !== dim) {
      throw new Error(`row ${i} has length ${row.length}, expected ${dim}`);
    }
    for (let j = 0; j < dim; j++) {
      payload.writeFloatLE(row[j], (i * dim + j) * 4);
    }
  }
  return Buffer.concat([head, payload]);
}

export function readCsibin(buf: Buffer): CsibinData {
  if (buf.length < HEADER_BYTES || buf.toString('ascii', 0, 4) !== CSIBIN_MAGIC) {
    throw new Error('not a CSIBIN file');
  }
  const version = buf.readUInt16LE(4);
  if (version !== CSIBIN_VERSION) {
    throw new Error(`unsupported CSIBIN version ${version}`);
  }
  const fieldMode = buf.readUInt8(6);
  const dim = buf.readUInt32LE(7);
  const count = Number(buf.readBigUInt64LE(11));
  const stacking = buf.readUInt8(19);
  const per = fieldMode === FIELD_COMPLEX ? 2 : 1;
  const expect = HEADER_BYTES + count * dim * per * 4;
  if (buf.length !== expect) {
    throw new Error(`CSIBIN payload length ${buf.length - HEADER_BYTES} != ` +
      `expected ${expect - HEADER_BYTES}`);
  }
  const values = new Float32Array(count * dim * per);
  for (let i = 0; i < values.length; i++) {
    values[i] = buf.readFloatLE(HEADER_BYTES + 4 * i);
  }
  return { fieldMode, dim, count, stacking, values };
}

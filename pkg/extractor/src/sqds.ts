/**
 * Binary descriptor file writer/reader ("SQDS").
 *
 * Layout (little-endian): magic "SQDS", version u32 (=1), count u32,
 * dim u32, length-prefixed UTF-8 source tag, count*dim float32 row-major,
 * then an optional name table (u32 count + length-prefixed UTF-8 names).
 * Must stay byte-compatible with the matcher package's loader.
 */

const MAGIC = Buffer.from('SQDS', 'ascii');
const VERSION = 1;

export interface DescriptorFile {
  sourceTag: string;
  rows: Float32Array[];
  frameNames?: string[];
}

function lengthPrefixed(text: string): Buffer {
  const raw = Buffer.from(text, 'utf-8');
  const out = Buffer.alloc(4 + raw.length);
  out.writeUInt32LE(raw.length, 0);
  raw.copy(out, 4);
  return out;
}

export function encodeSqds(file: DescriptorFile): Buffer {
  const count = file.rows.length;
  if (count < 1) {
    throw new Error('descriptor file needs at least one row');
  }
  const dim = file.rows[0].length;
  for (const row of file.rows) {
    if (row.length !== dim) {
      throw new Error(`row dimension ${row.length} != ${dim}`);
    }
  }
  const header = Buffer.alloc(16);
  MAGIC.copy(header, 0);
  header.writeUInt32LE(VERSION, 4);
  header.writeUInt32LE(count, 8);
  header.writeUInt32LE(dim, 12);

  const data = Buffer.alloc(4 * count * dim);
  for (let i = 0; i < count; i++) {
    for (let k = 0; k < dim; k++) {
      data.writeFloatLE(file.rows[i][k], 4 * (i * dim + k));
    }
  }

  const parts = [header, lengthPrefixed(file.sourceTag), data];
  if (file.frameNames) {
    if (file.frameNames.length !== count) {
      throw new Error('frame name count != row count');
    }
    const nameCount = Buffer.alloc(4);
    nameCount.writeUInt32LE(count, 0);
    parts.push(nameCount);
    for (const name of file.frameNames) {
      parts.push(lengthPrefixed(name));
    }
  }
  return Buffer.concat(parts);
}

export function decodeSqds(buf: Buffer): DescriptorFile {
  if (buf.length < 16 || !buf.subarray(0, 4).equals(MAGIC)) {
    throw new Error('not a descriptor file');
  }
  const version = buf.readUInt32LE(4);
  if (version !== VERSION) {
    throw new Error(`unsupported version ${version}`);
  }
  const count = buf.readUInt32LE(8);
  const dim = buf.readUInt32LE(12);
  let off = 16;
  const tagLen = buf.readUInt32LE(off);
  off += 4;
  const sourceTag = buf.subarray(off, off + tagLen).toString('utf-8');
  off += tagLen;
  const rows: Float32Array[] = [];
  for (let i = 0; i < count; i++) {
    const row = new Float32Array(dim);
    for (let k = 0; k < dim; k++) {
      row[k] = buf.readFloatLE(off);
      off += 4;
    }
    rows.push(row);
  }
  let frameNames: string[] | undefined;
  if (off < buf.length) {
    const n = buf.readUInt32LE(off);
    off += 4;
    frameNames = [];
    for (let i = 0; i < n; i++) {
      const len = buf.readUInt32LE(off);
      off += 4;
      frameNames.push(buf.subarray(off, off + len).toString('utf-8'));
      off += len;
    }
  }
  return { sourceTag, rows, frameNames };
}

import { DecodeFailure } from './errors.js';

export interface GrayImage {
  width: number;
  height: number;
  pixels: Uint8Array; // row-major
}

/** Parse a binary 8-bit grayscale PGM (P5). */
export function decodePgm(buf: Buffer, file: string): GrayImage {
  if (buf.length < 2 || buf.toString('ascii', 0, 2) !== 'P5') {
    throw new DecodeFailure(file, 'not a P5 PGM');
  }
  const fields: number[] = [];
  let off = 2;
  while (fields.length < 3) {
    if (off >= buf.length) {
      throw new DecodeFailure(file, 'header ends early');
    }
    const ch = buf[off];
    if (ch === 0x23 /* # */) {
      while (off < buf.length && buf[off] !== 0x0a) off++;
    } else if (ch === 0x20 || ch === 0x09 || ch === 0x0a || ch === 0x0d) {
      off++;
    } else if (ch >= 0x30 && ch <= 0x39) {
      let value = 0;
      while (off < buf.length && buf[off] >= 0x30 && buf[off] <= 0x39) {
        value = value * 10 + (buf[off] - 0x30);
        off++;
      }
      fields.push(value);
    } else {
      throw new DecodeFailure(file, 'malformed header');
    }
  }
  off++; // single whitespace after maxval
  const [width, height, maxval] = fields;
  if (width === 0 || height === 0) {
    throw new DecodeFailure(file, 'zero-sized image');
  }
  if (maxval > 255) {
    throw new DecodeFailure(file, `only 8-bit supported (maxval ${maxval})`);
  }
  const need = width * height;
  if (buf.length < off + need) {
    throw new DecodeFailure(file, `raster has ${buf.length - off} of ${need} bytes`);
  }
  return { width, height, pixels: new Uint8Array(buf.subarray(off, off + need)) };
}

export function encodePgm(img: GrayImage): Buffer {
  const header = Buffer.from(`P5\n${img.width} ${img.height}\n255\n`, 'ascii');
  return Buffer.concat([header, Buffer.from(img.pixels)]);
}

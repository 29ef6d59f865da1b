import type { GrayImage } from './pgm.js';

export const INPUT_SIZE = 227;

/** Area-overlap weights mapping src samples onto dst samples (dst x src). */
function areaWeights(src: number, dst: number): Float64Array[] {
  const scale = src / dst;
  const rows: Float64Array[] = [];
  for (let o = 0; o < dst; o++) {
    const w = new Float64Array(src);
    const lo = o * scale;
    const hi = (o + 1) * scale;
    const k0 = Math.floor(lo);
    const k1 = Math.min(Math.ceil(hi), src);
    for (let k = k0; k < k1; k++) {
      const overlap = Math.min(hi, k + 1) - Math.max(lo, k);
      if (overlap > 0) w[k] = overlap / scale;
    }
    rows.push(w);
  }
  return rows;
}

/** Area-average resize to size x size, output in [0, 1]. */
export function resizeToInput(img: GrayImage, size = INPUT_SIZE): Float64Array {
  const wr = areaWeights(img.height, size);
  const wc = areaWeights(img.width, size);
  // rows first
  const tmp = new Float64Array(size * img.width);
  for (let o = 0; o < size; o++) {
    const w = wr[o];
    for (let x = 0; x < img.width; x++) {
      let acc = 0;
      for (let k = 0; k < img.height; k++) {
        if (w[k] !== 0) acc += w[k] * img.pixels[k * img.width + x];
      }
      tmp[o * img.width + x] = acc;
    }
  }
  const out = new Float64Array(size * size);
  for (let o = 0; o < size; o++) {
    const w = wc[o];
    for (let y = 0; y < size; y++) {
      let acc = 0;
      for (let k = 0; k < img.width; k++) {
        if (w[k] !== 0) acc += w[k] * tmp[y * img.width + k];
      }
      out[y * size + o] = acc / 255;
    }
  }
  return out;
}

/** Gray [0,1] plane replicated into an NHWC float32 RGB slab. */
export function toRgbInput(gray: Float64Array, size = INPUT_SIZE): Float32Array {
  const out = new Float32Array(size * size * 3);
  for (let p = 0; p < size * size; p++) {
    const v = gray[p];
    out[3 * p] = v;
    out[3 * p + 1] = v;
    out[3 * p + 2] = v;
  }
  return out;
}

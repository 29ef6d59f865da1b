import * as tf from '@tensorflow/tfjs';
import * as fs from 'node:fs';
import * as path from 'node:path';

import { DecodeFailure } from './errors.js';
import { INPUT_SIZE, resizeToInput, toRgbInput } from './image.js';
import { buildSeededModel, LAYER_DIMS, loadModelFromDisk, TapModel } from './model.js';
import { decodePgm } from './pgm.js';
import { encodeSqds } from './sqds.js';

export interface ExtractJob {
  imagesDir: string;
  /** Tap points to export; each gets its own descriptor file. */
  layers: string[];
  /** Output path; must contain "{layer}" when exporting several taps. */
  outFile: string;
  batchSize?: number;
  /** Directory holding a tfjs Layers model.json; seeded weights otherwise. */
  modelDir?: string;
  seed?: number;
}

export interface ExtractResult {
  files: Map<string, string>;
  frameNames: string[];
}

function outPath(job: ExtractJob, layer: string): string {
  if (job.layers.length === 1 && !job.outFile.includes('{layer}')) {
    return job.outFile;
  }
  if (!job.outFile.includes('{layer}')) {
    throw new Error("out file needs a {layer} placeholder when exporting several layers");
  }
  return job.outFile.replaceAll('{layer}', layer);
}

/** Unit-normalize in float64; float32 storage keeps the norm within ~1e-7. */
function normalizeRow(row: Float32Array): Float32Array {
  let peak = 0;
  for (let i = 0; i < row.length; i++) {
    const a = Math.abs(row[i]);
    if (a > peak) peak = a;
  }
  if (peak === 0) {
    throw new Error('activation vector is all zero; cannot normalize');
  }
  let acc = 0;
  for (let i = 0; i < row.length; i++) {
    const v = row[i] / peak;
    acc += v * v;
  }
  const norm = Math.sqrt(acc);
  const out = new Float32Array(row.length);
  for (let i = 0; i < row.length; i++) {
    out[i] = Math.fround(row[i] / peak / norm);
  }
  return out;
}

export async function extract(job: ExtractJob): Promise<ExtractResult> {
  const names = fs
    .readdirSync(job.imagesDir)
    .filter((f) => f.toLowerCase().endsWith('.pgm'))
    .sort();
  if (names.length === 0) {
    throw new DecodeFailure(job.imagesDir, 'no .pgm images found');
  }

  const seed = job.seed ?? 1;
  const model: TapModel = job.modelDir
    ? await loadModelFromDisk(job.modelDir, job.layers)
    : buildSeededModel(job.layers, seed);

  const rowsPerLayer = new Map<string, Float32Array[]>(job.layers.map((l) => [l, []]));
  const batchSize = Math.max(1, job.batchSize ?? 4);
  try {
    for (let start = 0; start < names.length; start += batchSize) {
      const chunk = names.slice(start, start + batchSize);
      const slab = new Float32Array(chunk.length * INPUT_SIZE * INPUT_SIZE * 3);
      chunk.forEach((name, i) => {
        const img = decodePgm(fs.readFileSync(path.join(job.imagesDir, name)), name);
        slab.set(toRgbInput(resizeToInput(img)), i * INPUT_SIZE * INPUT_SIZE * 3);
      });
      const batch = tf.tensor4d(slab, [chunk.length, INPUT_SIZE, INPUT_SIZE, 3]);
      const taps = await model.run(batch);
      batch.dispose();
      for (const [layer, rows] of taps) {
        for (const row of rows) {
          rowsPerLayer.get(layer)!.push(normalizeRow(row));
        }
      }
    }
  } finally {
    model.dispose();
  }

  const files = new Map<string, string>();
  for (const layer of job.layers) {
    const rows = rowsPerLayer.get(layer)!;
    const expected = LAYER_DIMS[layer];
    if (expected !== undefined && rows[0].length !== expected) {
      throw new Error(`layer ${layer} produced dim ${rows[0].length}, expected ${expected}`);
    }
    const target = outPath(job, layer);
    fs.mkdirSync(path.dirname(path.resolve(target)), { recursive: true });
    fs.writeFileSync(target, encodeSqds({ sourceTag: layer, rows, frameNames: names }));
    const meta = {
      layer,
      dim: rows[0].length,
      count: rows.length,
      model: model.describe,
      preprocessing: `pgm -> area-average ${INPUT_SIZE}x${INPUT_SIZE} -> scale 1/255 -> replicate 3 channels`,
      normalization: 'unit L2, float64 accumulation, float32 storage',
    };
    fs.writeFileSync(`${target}.meta.json`, JSON.stringify(meta, null, 2) + '\n');
    files.set(layer, target);
  }
  return { files, frameNames: names };
}

import * as tf from '@tensorflow/tfjs';
import * as fs from 'node:fs';
import * as path from 'node:path';

import { LayerUnknown, ModelUnavailable } from './errors.js';
import { INPUT_SIZE } from './image.js';

/** Flattened output size of each tap point of the reference architecture. */
export const LAYER_DIMS: Record<string, number> = {
  conv1: 290400,
  pool1: 69984,
  conv2: 186624,
  pool2: 43264,
  conv3: 64896,
  conv4: 64896,
  conv5: 43264,
  pool5: 9216,
  fc6: 4096,
  fc7: 4096,
  fc8: 1000,
};

const LAYER_ORDER = Object.keys(LAYER_DIMS);

export interface TapModel {
  /** Forward a batch, returning flattened activations per requested layer. */
  run(batch: tf.Tensor4D): Promise<Map<string, Float32Array[]>>;
  describe: string;
  dispose(): void;
}

function deepestIndex(layers: string[]): number {
  let deepest = -1;
  for (const name of layers) {
    const idx = LAYER_ORDER.indexOf(name);
    if (idx < 0) {
      throw new LayerUnknown(`unknown layer '${name}' (expected one of ${LAYER_ORDER.join(', ')})`);
    }
    deepest = Math.max(deepest, idx);
  }
  return deepest;
}

/**
 * Scene-classification CNN geometry with deterministic seeded weights.
 *
 * The graph reproduces the reference architecture's tap dimensions
 * exactly; without downloadable pretrained weights the kernels are drawn
 * from seeded initializers, which keeps the pipeline deterministic and
 * the file contract intact. Supplying a trained model via
 * loadModelFromDisk gives the same interface real weights. The graph is
 * built only as deep as the requested taps need.
 */
export function buildSeededModel(layers: string[], seed: number): TapModel {
  const deepest = deepestIndex(layers);
  const glorot = (offset: number) => tf.initializers.glorotUniform({ seed: seed + offset });

  const input = tf.input({ shape: [INPUT_SIZE, INPUT_SIZE, 3] });
  const taps = new Map<string, tf.SymbolicTensor>();
  let x: tf.SymbolicTensor = input;
  const steps: Array<[string, () => tf.SymbolicTensor]> = [
    ['conv1', () => tf.layers.conv2d({
      filters: 96, kernelSize: 11, strides: 4, activation: 'relu',
      kernelInitializer: glorot(1), name: 'conv1',
    }).apply(x) as tf.SymbolicTensor],
    ['pool1', () => tf.layers.maxPooling2d({ poolSize: 3, strides: 2, name: 'pool1' })
      .apply(x) as tf.SymbolicTensor],
    ['conv2', () => tf.layers.conv2d({
      filters: 256, kernelSize: 5, padding: 'same', activation: 'relu',
      kernelInitializer: glorot(2), name: 'conv2',
    }).apply(x) as tf.SymbolicTensor],
    ['pool2', () => tf.layers.maxPooling2d({ poolSize: 3, strides: 2, name: 'pool2' })
      .apply(x) as tf.SymbolicTensor],
    ['conv3', () => tf.layers.conv2d({
      filters: 384, kernelSize: 3, padding: 'same', activation: 'relu',
      kernelInitializer: glorot(3), name: 'conv3',
    }).apply(x) as tf.SymbolicTensor],
    ['conv4', () => tf.layers.conv2d({
      filters: 384, kernelSize: 3, padding: 'same', activation: 'relu',
      kernelInitializer: glorot(4), name: 'conv4',
    }).apply(x) as tf.SymbolicTensor],
    ['conv5', () => tf.layers.conv2d({
      filters: 256, kernelSize: 3, padding: 'same', activation: 'relu',
      kernelInitializer: glorot(5), name: 'conv5',
    }).apply(x) as tf.SymbolicTensor],
    ['pool5', () => tf.layers.maxPooling2d({ poolSize: 3, strides: 2, name: 'pool5' })
      .apply(x) as tf.SymbolicTensor],
    ['fc6', () => tf.layers.dense({
      units: 4096, activation: 'relu', kernelInitializer: glorot(6), name: 'fc6',
    }).apply(tf.layers.flatten().apply(x)) as tf.SymbolicTensor],
    ['fc7', () => tf.layers.dense({
      units: 4096, activation: 'relu', kernelInitializer: glorot(7), name: 'fc7',
    }).apply(x) as tf.SymbolicTensor],
    ['fc8', () => tf.layers.dense({
      units: 1000, kernelInitializer: glorot(8), name: 'fc8',
    }).apply(x) as tf.SymbolicTensor],
  ];
  for (let i = 0; i <= deepest; i++) {
    const [name, build] = steps[i];
    x = build();
    taps.set(name, x);
  }

  const outputs = layers.map((name) => taps.get(name)!);
  const model = tf.model({ inputs: input, outputs });
  return wrapModel(model, layers, `seeded-reference-cnn(seed=${seed})`);
}

/** Tap a user-supplied tfjs Layers model by layer name. */
export async function loadModelFromDisk(modelDir: string, layers: string[]): Promise<TapModel> {
  const jsonPath = path.join(modelDir, 'model.json');
  if (!fs.existsSync(jsonPath)) {
    throw new ModelUnavailable(`${jsonPath} not found`);
  }
  const manifest = JSON.parse(fs.readFileSync(jsonPath, 'utf-8'));
  const weightSpecs: tf.io.WeightsManifestEntry[] = [];
  const buffers: Buffer[] = [];
  for (const group of manifest.weightsManifest ?? []) {
    weightSpecs.push(...group.weights);
    for (const p of group.paths) {
      buffers.push(fs.readFileSync(path.join(modelDir, p)));
    }
  }
  const weightData = Buffer.concat(buffers);
  const base = await tf.loadLayersModel(
    tf.io.fromMemory({
      modelTopology: manifest.modelTopology,
      weightSpecs,
      weightData: weightData.buffer.slice(
        weightData.byteOffset,
        weightData.byteOffset + weightData.byteLength,
      ),
    }),
  );
  const outputs = layers.map((name) => {
    try {
      return base.getLayer(name).output as tf.SymbolicTensor;
    } catch {
      throw new LayerUnknown(`model has no layer named '${name}'`);
    }
  });
  const model = tf.model({ inputs: base.inputs, outputs });
  return wrapModel(model, layers, `local:${modelDir}`);
}

function wrapModel(model: tf.LayersModel, layers: string[], describe: string): TapModel {
  return {
    describe,
    async run(batch: tf.Tensor4D): Promise<Map<string, Float32Array[]>> {
      const raw = model.predict(batch);
      const outputs = Array.isArray(raw) ? raw : [raw];
      const result = new Map<string, Float32Array[]>();
      const batchSize = batch.shape[0];
      for (let li = 0; li < layers.length; li++) {
        const flat = outputs[li].reshape([batchSize, -1]);
        const data = (await flat.data()) as Float32Array;
        const dim = flat.shape[1] as number;
        const rows: Float32Array[] = [];
        for (let b = 0; b < batchSize; b++) {
          rows.push(data.slice(b * dim, (b + 1) * dim));
        }
        result.set(layers[li], rows);
        flat.dispose();
        outputs[li].dispose();
      }
      return result;
    },
    dispose() {
      model.dispose();
    },
  };
}

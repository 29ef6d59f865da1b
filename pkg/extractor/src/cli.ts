#!/usr/bin/env node
import yargs from 'yargs';
import { hideBin } from 'yargs/helpers';

import { DecodeFailure, LayerUnknown, ModelUnavailable } from './errors.js';
import { extract } from './extract.js';

async function main(): Promise<number> {
  const argv = await yargs(hideBin(process.argv))
    .usage('Export CNN layer activations from an image directory as descriptor files')
    .option('images', { type: 'string', demandOption: true, describe: 'directory of .pgm frames' })
    .option('layer', {
      type: 'string',
      demandOption: true,
      describe: 'tap point(s), comma separated (e.g. conv3,pool5)',
    })
    .option('out', {
      type: 'string',
      demandOption: true,
      describe: 'output file; use {layer} as a placeholder for multiple taps',
    })
    .option('batch-size', { type: 'number', default: 4 })
    .option('model', {
      type: 'string',
      describe: 'directory with a tfjs Layers model.json (seeded weights when omitted)',
    })
    .option('seed', { type: 'number', default: 1, describe: 'weight seed for the built-in model' })
    .strict()
    .parse();

  const layers = argv.layer.split(',').map((s) => s.trim()).filter(Boolean);
  try {
    const result = await extract({
      imagesDir: argv.images,
      layers,
      outFile: argv.out,
      batchSize: argv['batch-size'],
      modelDir: argv.model,
      seed: argv.seed,
    });
    for (const [layer, file] of result.files) {
      console.log(`${layer}: ${result.frameNames.length} descriptors -> ${file}`);
    }
    return 0;
  } catch (err) {
    if (err instanceof DecodeFailure || err instanceof LayerUnknown || err instanceof ModelUnavailable) {
      console.error(`error: ${err.message}`);
      return 2;
    }
    throw err;
  }
}

main().then((code) => {
  process.exitCode = code;
});

#!/usr/bin/env node
/**
 * CLI for turning frame images or raw video into binary feature files.
 *
 * Usage:
 *   compemo-extract -i frames_dir -o clip.feat [--crops crops.json]
 *   compemo-extract -i video.y4m -o clip.feat --backbone builtin-v1
 */
import { Command } from 'commander'
import { extract } from './extract'

const program = new Command('compemo-extract')
  .description('Extract per-frame face features into the binary feature format')
  .requiredOption('-i, --input <path>', 'frame directory (.png/.ppm) or .y4m video')
  .requiredOption('-o, --out <path>', 'output feature file')
  .option('--crops <path>', 'face crop metadata JSON')
  .option('--backbone <name>', 'builtin-v1 or a tfjs LayersModel path', 'builtin-v1')
  .option('--seed <n>', 'builtin backbone weight seed', '1')
  .action(async opts => {
    const video = await extract({
      inputPath: opts.input,
      outPath: opts.out,
      cropsPath: opts.crops,
      backboneName: opts.backbone,
      seed: parseInt(opts.seed, 10),
    })
    const detected = video.mask.reduce((a, b) => a + b, 0)
    console.log(
      `${opts.out}: ${video.numFrames} frames x ${video.dim} features, ` +
      `${detected} detected`,
    )
  })

program.parseAsync(process.argv).catch(err => {
  console.error(`error: ${err.message ?? err}`)
  process.exit(1)
})

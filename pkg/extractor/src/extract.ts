/**
 * Frames -> face crops -> 224x224 -> backbone -> one pooled feature row
 * per original frame, written as an atomic binary feature file.
 * Undetected frames get the zero vector and a 0 mask byte; substituting
 * a neighboring frame is the recognition pipeline's job.
 */
import * as tf from '@tensorflow/tfjs'
import { Backbone, FEATURE_DIM, builtinBackbone, frameToInput, loadModelBackbone } from './backbone'
import { FrameCrop, applyCrop, defaultCrops, loadCrops } from './crops'
import { VideoFeatures, writeFeaturesAtomic } from './feature-file'
import { loadFrames } from './frames'

export interface ExtractOptions {
  inputPath: string
  outPath: string
  /** face boxes + detection flags; absent = every frame detected, full frame */
  cropsPath?: string
  /** "builtin-v1" (default) or a tfjs LayersModel path */
  backboneName?: string
  seed?: number
}

export async function resolveBackbone(name: string | undefined, seed: number): Promise<Backbone> {
  if (!name || name === 'builtin-v1') return builtinBackbone(seed)
  return loadModelBackbone(name)
}

export function extractFeatures(
  frames: ReturnType<typeof loadFrames>,
  crops: FrameCrop[],
  backbone: Backbone,
): VideoFeatures {
  const numFrames = frames.length
  const features = new Float32Array(numFrames * FEATURE_DIM)
  const mask = new Uint8Array(numFrames)
  for (let t = 0; t < numFrames; t++) {
    if (!crops[t].detected) continue
    const input = frameToInput(applyCrop(frames[t], crops[t]))
    const row = backbone.run(input)
    const values = row.dataSync() as Float32Array
    if (values.some(v => !Number.isFinite(v))) {
      throw new Error(`non-finite features at frame ${t}`)
    }
    features.set(values, t * FEATURE_DIM)
    mask[t] = 1
    input.dispose()
    row.dispose()
  }
  return { features, mask, numFrames, dim: FEATURE_DIM }
}

export async function extract(options: ExtractOptions): Promise<VideoFeatures> {
  const frames = loadFrames(options.inputPath)
  const crops = options.cropsPath
    ? loadCrops(options.cropsPath, frames.length)
    : defaultCrops(frames.length)
  const backbone = await resolveBackbone(options.backboneName, options.seed ?? 1)
  try {
    const video = extractFeatures(frames, crops, backbone)
    writeFeaturesAtomic(video, options.outPath)
    return video
  } finally {
    backbone.dispose()
    tf.disposeVariables()
  }
}

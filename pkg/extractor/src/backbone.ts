/**
 * Image backbones: every backbone maps a 224x224 RGB crop to one pooled
 * 512-dim feature row.
 *
 * `builtin-v1` is a fixed-weight convolutional stack whose weights come
 * from a seeded generator, so extraction is fully deterministic and
 * self-contained. A genuinely pretrained tfjs LayersModel with a 512-wide
 * output can be plugged in via a `file://` path instead; weight
 * provenance is the caller's choice, the file format contract is the
 * same either way.
 */
import * as tf from '@tensorflow/tfjs'
import { RgbFrame } from './frames'

export const INPUT_SIZE = 224
export const FEATURE_DIM = 512

export interface Backbone {
  name: string
  /** (1, 224, 224, 3) float input in [0,1] -> (1, 512) features */
  run(input: tf.Tensor4D): tf.Tensor2D
  dispose(): void
}

/** Deterministic PRNG (mulberry32) for reproducible built-in weights. */
export function seededUniform(seed: number, count: number, scale: number): Float32Array {
  let state = seed >>> 0
  const out = new Float32Array(count)
  for (let i = 0; i < count; i++) {
    state = (state + 0x6d2b79f5) >>> 0
    let t = state
    t = Math.imul(t ^ (t >>> 15), t | 1)
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61)
    const u = ((t ^ (t >>> 14)) >>> 0) / 4294967296
    out[i] = (2 * u - 1) * scale
  }
  return out
}

interface ConvSpec {
  kernel: number
  inCh: number
  outCh: number
  stride: number
}

const BUILTIN_LAYERS: ConvSpec[] = [
  { kernel: 3, inCh: 3, outCh: 16, stride: 2 },
  { kernel: 3, inCh: 16, outCh: 32, stride: 2 },
  { kernel: 3, inCh: 32, outCh: 64, stride: 2 },
  { kernel: 3, inCh: 64, outCh: 128, stride: 2 },
  { kernel: 1, inCh: 128, outCh: FEATURE_DIM, stride: 1 },
]

export function builtinBackbone(seed = 1): Backbone {
  const kernels = BUILTIN_LAYERS.map((spec, i) => {
    const fanIn = spec.kernel * spec.kernel * spec.inCh
    const count = fanIn * spec.outCh
    const scale = Math.sqrt(2.0 / fanIn)
    return tf.tensor4d(
      seededUniform(seed + 101 * i, count, scale),
      [spec.kernel, spec.kernel, spec.inCh, spec.outCh],
    )
  })
  return {
    name: `builtin-v1(seed=${seed})`,
    run(input: tf.Tensor4D): tf.Tensor2D {
      return tf.tidy(() => {
        let x = input
        for (let i = 0; i < kernels.length; i++) {
          x = tf.relu(tf.conv2d(x, kernels[i] as tf.Tensor4D,
            BUILTIN_LAYERS[i].stride, 'same'))
        }
        return tf.mean(x, [1, 2]) as tf.Tensor2D
      })
    },
    dispose() {
      kernels.forEach(k => k.dispose())
    },
  }
}

export async function loadModelBackbone(modelPath: string): Promise<Backbone> {
  const url = modelPath.startsWith('file://') ? modelPath : `file://${modelPath}`
  const model = await tf.loadLayersModel(url)
  return {
    name: modelPath,
    run(input: tf.Tensor4D): tf.Tensor2D {
      return tf.tidy(() => {
        let out = model.predict(input) as tf.Tensor
        if (out.rank === 4) out = tf.mean(out, [1, 2])
        out = out.reshape([input.shape[0], -1])
        if (out.shape[1] !== FEATURE_DIM) {
          throw new Error(
            `backbone emits ${out.shape[1]} features, want ${FEATURE_DIM}`,
          )
        }
        return out as tf.Tensor2D
      })
    },
    dispose() {
      model.dispose()
    },
  }
}

/** Bilinear resize of a face crop to the backbone input, scaled to [0,1]. */
export function frameToInput(frame: RgbFrame): tf.Tensor4D {
  return tf.tidy(() => {
    const img = tf.tensor3d(frame.data, [frame.height, frame.width, 3], 'int32')
    const resized = tf.image.resizeBilinear(img as tf.Tensor3D, [INPUT_SIZE, INPUT_SIZE], true)
    return resized.div(255).expandDims(0) as tf.Tensor4D
  })
}

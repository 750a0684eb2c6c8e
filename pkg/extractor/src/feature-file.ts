/**
 * Binary per-video feature file, shared with the recognition pipeline.
 *
 * Layout (little-endian, bit-exact):
 *   magic "TLHN" | u32 version=1 | u32 N | u32 D |
 *   N*D float32 features, row-major | N mask bytes (0/1)
 */
import { mkdtempSync, renameSync, rmSync, writeFileSync } from 'fs'
import { readFileSync } from 'fs'
import { dirname, join } from 'path'

export const FEATURE_MAGIC = 'TLHN'
export const FEATURE_VERSION = 1

export interface VideoFeatures {
  /** one row per original video frame, row-major */
  features: Float32Array
  /** frames with a detected face */
  mask: Uint8Array
  numFrames: number
  dim: number
}

export function encodeFeatures(video: VideoFeatures): Buffer {
  const { numFrames, dim, features, mask } = video
  if (features.length !== numFrames * dim) {
    throw new Error(
      `feature buffer holds ${features.length} floats, want ${numFrames}x${dim}`,
    )
  }
  if (mask.length !== numFrames) {
    throw new Error(`mask holds ${mask.length} bytes, want ${numFrames}`)
  }
  const buf = Buffer.alloc(16 + 4 * numFrames * dim + numFrames)
  buf.write(FEATURE_MAGIC, 0, 'ascii')
  buf.writeUInt32LE(FEATURE_VERSION, 4)
  buf.writeUInt32LE(numFrames, 8)
  buf.writeUInt32LE(dim, 12)
  for (let i = 0; i < features.length; i++) {
    buf.writeFloatLE(features[i], 16 + 4 * i)
  }
  for (let i = 0; i < numFrames; i++) {
    buf[16 + 4 * features.length + i] = mask[i] ? 1 : 0
  }
  return buf
}

export function decodeFeatures(buf: Buffer): VideoFeatures {
  if (buf.length < 16 || buf.toString('ascii', 0, 4) !== FEATURE_MAGIC) {
    throw new Error('not a feature file (bad magic)')
  }
  const version = buf.readUInt32LE(4)
  if (version !== FEATURE_VERSION) {
    throw new Error(`unsupported feature file version ${version}`)
  }
  const numFrames = buf.readUInt32LE(8)
  const dim = buf.readUInt32LE(12)
  const expect = 16 + 4 * numFrames * dim + numFrames
  if (buf.length !== expect) {
    throw new Error(`truncated feature file (${buf.length} bytes, want ${expect})`)
  }
  const features = new Float32Array(numFrames * dim)
  for (let i = 0; i < features.length; i++) {
    features[i] = buf.readFloatLE(16 + 4 * i)
  }
  const mask = Uint8Array.from(buf.subarray(16 + 4 * features.length))
  return { features, mask, numFrames, dim }
}

/** Write via a temp file in the same directory, then rename into place. */
export function writeFeaturesAtomic(video: VideoFeatures, path: string): void {
  const tmpDir = mkdtempSync(join(dirname(path), '.feat-'))
  const tmpFile = join(tmpDir, 'out.feat')
  try {
    writeFileSync(tmpFile, encodeFeatures(video))
    renameSync(tmpFile, path)
  } finally {
    rmSync(tmpDir, { recursive: true, force: true })
  }
}

export function readFeatures(path: string): VideoFeatures {
  return decodeFeatures(readFileSync(path))
}

/**
 * Per-frame face crop metadata, as produced by an upstream face detector.
 *
 * JSON shape: { "frames": [{ "index": 0, "detected": true,
 * "box": [x, y, w, h] }, ...] }. Frames without an entry count as
 * detected, full frame. Undetected frames get a zero feature row and a
 * 0 mask byte downstream.
 */
import { readFileSync } from 'fs'
import { RgbFrame } from './frames'

export interface FrameCrop {
  detected: boolean
  /** pixel box [x, y, w, h]; absent = whole frame */
  box?: [number, number, number, number]
}

export function loadCrops(path: string, numFrames: number): FrameCrop[] {
  const parsed = JSON.parse(readFileSync(path, 'utf-8'))
  if (!parsed || !Array.isArray(parsed.frames)) {
    throw new Error(`${path}: expected { "frames": [...] }`)
  }
  const crops: FrameCrop[] = Array.from({ length: numFrames }, () => ({
    detected: true,
  }))
  for (const entry of parsed.frames) {
    const index = entry.index
    if (!Number.isInteger(index) || index < 0 || index >= numFrames) {
      throw new Error(`${path}: frame index ${index} outside [0, ${numFrames})`)
    }
    const crop: FrameCrop = { detected: entry.detected !== false }
    if (entry.box !== undefined) {
      if (!Array.isArray(entry.box) || entry.box.length !== 4) {
        throw new Error(`${path}: box must be [x, y, w, h]`)
      }
      crop.box = entry.box.map(Number) as [number, number, number, number]
    }
    crops[index] = crop
  }
  return crops
}

export function defaultCrops(numFrames: number): FrameCrop[] {
  return Array.from({ length: numFrames }, () => ({ detected: true }))
}

/** Clamped crop; whole frame when no box is given. */
export function applyCrop(frame: RgbFrame, crop: FrameCrop): RgbFrame {
  if (!crop.box) return frame
  let [x, y, w, h] = crop.box.map(Math.round)
  x = Math.min(Math.max(x, 0), frame.width - 1)
  y = Math.min(Math.max(y, 0), frame.height - 1)
  w = Math.min(Math.max(w, 1), frame.width - x)
  h = Math.min(Math.max(h, 1), frame.height - y)
  const data = new Uint8Array(w * h * 3)
  for (let row = 0; row < h; row++) {
    const src = 3 * ((y + row) * frame.width + x)
    data.set(frame.data.subarray(src, src + 3 * w), 3 * row * w)
  }
  return { width: w, height: h, data }
}

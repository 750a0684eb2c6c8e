/**
 * Frame sources: a directory of per-frame images (PNG or binary PPM,
 * ordered by filename) or a raw YUV4MPEG2 (.y4m) video file.
 */
import { readFileSync, readdirSync, statSync } from 'fs'
import { extname, join } from 'path'
import { PNG } from 'pngjs'

export interface RgbFrame {
  width: number
  height: number
  /** packed RGB, 3 bytes per pixel */
  data: Uint8Array
}

export function loadFrames(inputPath: string): RgbFrame[] {
  const stat = statSync(inputPath)
  if (stat.isDirectory()) {
    return loadFrameDirectory(inputPath)
  }
  if (extname(inputPath).toLowerCase() === '.y4m') {
    return decodeY4m(readFileSync(inputPath))
  }
  throw new Error(
    `unsupported input ${inputPath}: expected a frame directory or a .y4m file`,
  )
}

export function loadFrameDirectory(dir: string): RgbFrame[] {
  const names = readdirSync(dir)
    .filter(n => ['.png', '.ppm'].includes(extname(n).toLowerCase()))
    .sort()
  if (names.length === 0) {
    throw new Error(`no .png or .ppm frames under ${dir}`)
  }
  return names.map(name => decodeImage(join(dir, name)))
}

export function decodeImage(path: string): RgbFrame {
  const raw = readFileSync(path)
  return extname(path).toLowerCase() === '.ppm' ? decodePpm(raw) : decodePng(raw)
}

function decodePng(raw: Buffer): RgbFrame {
  const png = PNG.sync.read(raw)
  const data = new Uint8Array(png.width * png.height * 3)
  for (let i = 0; i < png.width * png.height; i++) {
    data[3 * i] = png.data[4 * i]
    data[3 * i + 1] = png.data[4 * i + 1]
    data[3 * i + 2] = png.data[4 * i + 2]
  }
  return { width: png.width, height: png.height, data }
}

/** Binary PPM (P6), maxval 255. */
export function decodePpm(raw: Buffer): RgbFrame {
  let pos = 0
  const token = (): string => {
    while (pos < raw.length) {
      while (pos < raw.length && isSpace(raw[pos])) pos++
      if (raw[pos] === 0x23) {
        while (pos < raw.length && raw[pos] !== 0x0a) pos++
        continue
      }
      break
    }
    const start = pos
    while (pos < raw.length && !isSpace(raw[pos])) pos++
    return raw.toString('ascii', start, pos)
  }
  if (token() !== 'P6') throw new Error('not a binary PPM (P6) file')
  const width = parseInt(token(), 10)
  const height = parseInt(token(), 10)
  const maxval = parseInt(token(), 10)
  if (!(width > 0 && height > 0) || maxval !== 255) {
    throw new Error(`unsupported PPM geometry ${width}x${height} maxval ${maxval}`)
  }
  pos++ // single whitespace after maxval
  const need = width * height * 3
  if (raw.length - pos < need) throw new Error('truncated PPM pixel data')
  return { width, height, data: Uint8Array.from(raw.subarray(pos, pos + need)) }
}

function isSpace(byte: number): boolean {
  return byte === 0x20 || byte === 0x0a || byte === 0x0d || byte === 0x09
}

/**
 * YUV4MPEG2 with 4:2:0 chroma; frames converted to RGB via BT.601
 * (studio range).
 */
export function decodeY4m(raw: Buffer): RgbFrame[] {
  const headerEnd = raw.indexOf(0x0a)
  if (headerEnd < 0) throw new Error('missing y4m header')
  const header = raw.toString('ascii', 0, headerEnd)
  if (!header.startsWith('YUV4MPEG2')) throw new Error('not a y4m file')
  let width = 0
  let height = 0
  let chroma = 'C420'
  for (const field of header.split(' ').slice(1)) {
    if (field.startsWith('W')) width = parseInt(field.slice(1), 10)
    else if (field.startsWith('H')) height = parseInt(field.slice(1), 10)
    else if (field.startsWith('C')) chroma = field
  }
  if (!(width > 0 && height > 0)) throw new Error(`bad y4m geometry in ${header}`)
  if (!chroma.startsWith('C420')) {
    throw new Error(`unsupported y4m chroma ${chroma}; only 4:2:0 is handled`)
  }
  if (width % 2 || height % 2) {
    throw new Error(`4:2:0 needs even dimensions, got ${width}x${height}`)
  }
  const ySize = width * height
  const cSize = (width / 2) * (height / 2)
  const frames: RgbFrame[] = []
  let pos = headerEnd + 1
  while (pos < raw.length) {
    const markerEnd = raw.indexOf(0x0a, pos)
    if (markerEnd < 0) throw new Error('truncated y4m frame marker')
    if (raw.toString('ascii', pos, pos + 5) !== 'FRAME') {
      throw new Error('missing y4m FRAME marker')
    }
    pos = markerEnd + 1
    if (raw.length - pos < ySize + 2 * cSize) throw new Error('truncated y4m frame')
    frames.push(yuv420ToRgb(raw.subarray(pos, pos + ySize + 2 * cSize), width, height))
    pos += ySize + 2 * cSize
  }
  if (frames.length === 0) throw new Error('y4m file holds no frames')
  return frames
}

function yuv420ToRgb(plane: Buffer, width: number, height: number): RgbFrame {
  const ySize = width * height
  const cw = width / 2
  const data = new Uint8Array(width * height * 3)
  for (let row = 0; row < height; row++) {
    for (let col = 0; col < width; col++) {
      const y = plane[row * width + col]
      const ci = (row >> 1) * cw + (col >> 1)
      const u = plane[ySize + ci] - 128
      const v = plane[ySize + cw * (height / 2) + ci] - 128
      const yy = 1.164 * (y - 16)
      const i = 3 * (row * width + col)
      data[i] = clamp8(yy + 1.596 * v)
      data[i + 1] = clamp8(yy - 0.392 * u - 0.813 * v)
      data[i + 2] = clamp8(yy + 2.017 * u)
    }
  }
  return { width, height, data }
}

function clamp8(x: number): number {
  return x < 0 ? 0 : x > 255 ? 255 : Math.round(x)
}

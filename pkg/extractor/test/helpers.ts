import { PNG } from 'pngjs'

export function pngBytes(
  width: number,
  height: number,
  fill: (x: number, y: number) => [number, number, number],
): Buffer {
  const png = new PNG({ width, height })
  for (let y = 0; y < height; y++) {
    for (let x = 0; x < width; x++) {
      const [r, g, b] = fill(x, y)
      const i = 4 * (y * width + x)
      png.data[i] = r
      png.data[i + 1] = g
      png.data[i + 2] = b
      png.data[i + 3] = 255
    }
  }
  return PNG.sync.write(png)
}

/** Solid-color y4m frames: one [y, u, v] triple per frame. */
export function y4mBytes(
  width: number,
  height: number,
  yuvFrames: Array<[number, number, number]>,
): Buffer {
  const parts: Buffer[] = [
    Buffer.from(`YUV4MPEG2 W${width} H${height} F25:1 Ip A1:1 C420\n`, 'ascii'),
  ]
  for (const [y, u, v] of yuvFrames) {
    parts.push(Buffer.from('FRAME\n', 'ascii'))
    parts.push(Buffer.alloc(width * height, y))
    parts.push(Buffer.alloc((width / 2) * (height / 2), u))
    parts.push(Buffer.alloc((width / 2) * (height / 2), v))
  }
  return Buffer.concat(parts)
}

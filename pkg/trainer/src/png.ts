/**
 * Minimal grayscale PNG reader: 8-bit, color type 0, non-interlaced
 * (exactly what the reconstruction engine writes). Scanline filters 0-4
 * are supported; anything else is rejected loudly.
 */

import { readFileSync } from "node:fs";
import { inflateSync } from "node:zlib";

const PNG_SIGNATURE = Buffer.from([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a]);

export interface GrayImage {
  width: number;
  height: number;
  pixels: Float64Array; // row-major, 0..255
}

export function readGrayPng(path: string): GrayImage {
  const raw = readFileSync(path);
  if (raw.length < 8 || !raw.subarray(0, 8).equals(PNG_SIGNATURE)) {
    throw new Error(`not a PNG file: ${path}`);
  }
  let off = 8;
  let width = 0, height = 0, bitDepth = 0, colorType = -1, interlace = 0;
  const idat: Buffer[] = [];
  while (off < raw.length) {
    const len = raw.readUInt32BE(off);
    const type = raw.subarray(off + 4, off + 8).toString("latin1");
    const data = raw.subarray(off + 8, off + 8 + len);
    if (type === "IHDR") {
      width = data.readUInt32BE(0);
      height = data.readUInt32BE(4);
      bitDepth = data[8];
      colorType = data[9];
      interlace = data[12];
    } else if (type === "IDAT") {
      idat.push(data);
    } else if (type === "IEND") {
      break;
    }
    off += 12 + len; // length + type + data + crc
  }
  if (colorType !== 0 || (bitDepth !== 8 && bitDepth !== 16) || interlace !== 0) {
    throw new Error(
      `unsupported PNG variant in ${path}: bit depth ${bitDepth}, color type ${colorType}, interlace ${interlace}`);
  }
  const decompressed = inflateSync(Buffer.concat(idat));
  const bpp = bitDepth / 8;
  const stride = width * bpp;
  const pixels = new Float64Array(width * height);
  const prev = new Uint8Array(stride);
  const cur = new Uint8Array(stride);
  let pos = 0;
  for (let row = 0; row < height; row++) {
    const filter = decompressed[pos++];
    for (let j = 0; j < stride; j++) {
      const x = decompressed[pos++];
      const a = j >= bpp ? cur[j - bpp] : 0; // left (same byte lane)
      const b = prev[j]; // up
      const c = j >= bpp ? prev[j - bpp] : 0; // upper-left
      let v: number;
      switch (filter) {
        case 0: v = x; break;
        case 1: v = x + a; break;
        case 2: v = x + b; break;
        case 3: v = x + Math.floor((a + b) / 2); break;
        case 4: {
          const p = a + b - c;
          const pa = Math.abs(p - a), pb = Math.abs(p - b), pc = Math.abs(p - c);
          v = x + (pa <= pb && pa <= pc ? a : pb <= pc ? b : c);
          break;
        }
        default:
          throw new Error(`unsupported PNG filter ${filter} in ${path}`);
      }
      cur[j] = v & 0xff;
    }
    if (bitDepth === 8) {
      for (let j = 0; j < width; j++) pixels[row * width + j] = cur[j];
    } else {
      // network byte order, rescaled so 65535 -> 255
      for (let j = 0; j < width; j++) {
        pixels[row * width + j] = ((cur[2 * j] << 8) | cur[2 * j + 1]) / 257.0;
      }
    }
    prev.set(cur);
  }
  return { width, height, pixels };
}

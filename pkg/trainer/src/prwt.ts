/**
 * PRWT weights container, byte-compatible with the reconstruction
 * engine: magic "PRWT\0\0\0\1", uint32-LE header length, UTF-8 JSON
 * header {version, arch, extras}, then float32-LE tensor blobs in header
 * order. Tensors are (out, in, 3, 3) weights and (out) biases per layer.
 */

import { readFileSync, writeFileSync } from "node:fs";
import { LAYERS, ResidualCnn } from "./model.js";

export const PRWT_MAGIC = Buffer.from("PRWT\0\0\0", "latin1");
export const PRWT_VERSION = 1;

interface ArchEntry {
  name: string;
  shape: number[];
  activation: string;
}

export function cnnArch(): ArchEntry[] {
  const arch: ArchEntry[] = [];
  LAYERS.forEach((l, idx) => {
    const act = l.relu ? "relu" : "linear";
    arch.push({ name: `conv${idx + 1}.weight`, shape: [l.cout, l.cin, 3, 3], activation: act });
    arch.push({ name: `conv${idx + 1}.bias`, shape: [l.cout], activation: act });
  });
  return arch;
}

export function exportWeights(model: ResidualCnn, lambdas: number[] | null, path: string): void {
  const arch = cnnArch();
  const header: Record<string, unknown> = { arch, extras: {}, version: PRWT_VERSION };
  if (lambdas !== null) {
    if (lambdas.some((v) => !(v > 0 && v <= 1))) {
      throw new Error("lambda entries must lie in (0, 1]");
    }
    (header.extras as Record<string, unknown>)["lambda"] = lambdas;
  }
  const blobs: Buffer[] = [];
  for (const entry of arch) {
    const match = /^conv(\d+)\.(weight|bias)$/.exec(entry.name);
    if (!match) throw new Error(`unexpected arch entry ${entry.name}`);
    const p = model.params[Number(match[1]) - 1];
    const data = match[2] === "weight" ? p.weight : p.bias;
    const count = entry.shape.reduce((a, b) => a * b, 1);
    if (data.length !== count) {
      throw new Error(`tensor ${entry.name} has ${data.length} values, expected ${count}`);
    }
    const f32 = new Float32Array(data);
    blobs.push(Buffer.from(f32.buffer, f32.byteOffset, f32.byteLength));
  }
  // python json.dumps(sort_keys=True) style: sorted keys, ", "/": " separators
  const headerJson = canonicalJson(header);
  const headerBuf = Buffer.from(headerJson, "utf8");
  const lenBuf = Buffer.alloc(4);
  lenBuf.writeUInt32LE(headerBuf.length, 0);
  writeFileSync(path, Buffer.concat([PRWT_MAGIC, lenBuf, headerBuf, ...blobs]));
}

/** JSON with recursively sorted object keys, matching the engine's writer. */
function canonicalJson(value: unknown): string {
  if (Array.isArray(value)) {
    return "[" + value.map(canonicalJson).join(", ") + "]";
  }
  if (value !== null && typeof value === "object") {
    const entries = Object.entries(value as Record<string, unknown>).sort(([a], [b]) =>
      a < b ? -1 : a > b ? 1 : 0);
    return "{" + entries.map(([k, v]) => JSON.stringify(k) + ": " + canonicalJson(v)).join(", ") + "}";
  }
  return JSON.stringify(value);
}

export interface LoadedWeights {
  model: ResidualCnn;
  lambdas: number[] | null;
}

export function loadWeights(path: string): LoadedWeights {
  const raw = readFileSync(path);
  if (raw.length < 12 || !raw.subarray(0, 8).equals(PRWT_MAGIC)) {
    throw new Error(`not a PRWT v${PRWT_VERSION} file: ${path}`);
  }
  const hlen = raw.readUInt32LE(8);
  const header = JSON.parse(raw.subarray(12, 12 + hlen).toString("utf8"));
  if (header.version !== PRWT_VERSION) {
    throw new Error(`unsupported PRWT version ${header.version}`);
  }
  const model = new ResidualCnn();
  let off = 12 + hlen;
  for (const entry of header.arch as ArchEntry[]) {
    const count = entry.shape.reduce((a: number, b: number) => a * b, 1);
    const end = off + 4 * count;
    if (end > raw.length) throw new Error(`truncated tensor ${entry.name}`);
    const f32 = new Float32Array(count);
    for (let k = 0; k < count; k++) f32[k] = raw.readFloatLE(off + 4 * k);
    const match = /^conv(\d+)\.(weight|bias)$/.exec(entry.name);
    if (!match) throw new Error(`unexpected arch entry ${entry.name}`);
    const p = model.params[Number(match[1]) - 1];
    const dst = match[2] === "weight" ? p.weight : p.bias;
    if (dst.length !== count) throw new Error(`shape mismatch for ${entry.name}`);
    dst.set(f32);
    off = end;
  }
  const lambdas = header.extras && header.extras.lambda ? (header.extras.lambda as number[]) : null;
  return { model, lambdas };
}

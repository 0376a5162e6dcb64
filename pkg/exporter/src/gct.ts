/**
 * Writer/reader for the toolkit's binary tensor container.
 *
 * Layout: "GCT1" | dtype u8 (1 = float32, 2 = uint8) | rank u8 |
 * rank x u32 little-endian extents | row-major little-endian payload.
 */

import { readFileSync, writeFileSync } from "fs";

export type GctData = Float32Array | Uint8Array;

export interface GctTensor {
  dtype: "float32" | "uint8";
  shape: number[];
  data: GctData;
}

const MAGIC = "GCT1";

export function encodeGct(shape: number[], data: GctData): Buffer {
  if (shape.length < 1 || shape.length > 4) {
    throw new Error(`rank must be 1..4, got ${shape.length}`);
  }
  const count = shape.reduce((a, b) => a * b, 1);
  if (shape.some((e) => e < 1) || count !== data.length) {
    throw new Error(`shape ${JSON.stringify(shape)} does not match ${data.length} elements`);
  }
  const dtypeCode = data instanceof Float32Array ? 1 : 2;
  const itemSize = data instanceof Float32Array ? 4 : 1;
  const header = Buffer.alloc(6 + 4 * shape.length);
  header.write(MAGIC, 0, "ascii");
  header.writeUInt8(dtypeCode, 4);
  header.writeUInt8(shape.length, 5);
  shape.forEach((extent, i) => header.writeUInt32LE(extent, 6 + 4 * i));
  const payload = Buffer.alloc(count * itemSize);
  if (data instanceof Float32Array) {
    data.forEach((v, i) => payload.writeFloatLE(v, i * 4));
  } else {
    payload.set(data);
  }
  return Buffer.concat([header, payload]);
}

export function writeGct(path: string, shape: number[], data: GctData): void {
  writeFileSync(path, encodeGct(shape, data));
}

export function readGct(path: string): GctTensor {
  const blob = readFileSync(path);
  if (blob.subarray(0, 4).toString("ascii") !== MAGIC) {
    throw new Error(`${path}: bad magic`);
  }
  const dtypeCode = blob.readUInt8(4);
  const rank = blob.readUInt8(5);
  if (rank < 1 || rank > 4) throw new Error(`${path}: bad rank ${rank}`);
  const shape: number[] = [];
  for (let i = 0; i < rank; i++) shape.push(blob.readUInt32LE(6 + 4 * i));
  const count = shape.reduce((a, b) => a * b, 1);
  const offset = 6 + 4 * rank;
  if (dtypeCode === 1) {
    if (blob.length !== offset + 4 * count) throw new Error(`${path}: payload length mismatch`);
    const data = new Float32Array(count);
    for (let i = 0; i < count; i++) data[i] = blob.readFloatLE(offset + 4 * i);
    return { dtype: "float32", shape, data };
  }
  if (dtypeCode === 2) {
    if (blob.length !== offset + count) throw new Error(`${path}: payload length mismatch`);
    return { dtype: "uint8", shape, data: new Uint8Array(blob.subarray(offset)) };
  }
  throw new Error(`${path}: unsupported dtype code ${dtypeCode}`);
}

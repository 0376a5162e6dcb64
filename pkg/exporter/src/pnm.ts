/** Minimal binary PGM (P5) / PPM (P6) reader, maxval 255. */

import { readFileSync, readdirSync } from "fs";
import { join } from "path";

export interface Frame {
  height: number;
  width: number;
  channels: 1 | 3;
  pixels: Uint8Array; // row-major, interleaved channels
}

export function readPnm(path: string): Frame {
  const blob = readFileSync(path);
  const magic = blob.subarray(0, 2).toString("ascii");
  if (magic !== "P5" && magic !== "P6") {
    throw new Error(`${path}: not a binary PGM/PPM file`);
  }
  const channels = magic === "P5" ? 1 : 3;
  let pos = 2;
  const fields: number[] = [];
  while (fields.length < 3) {
    const c = String.fromCharCode(blob[pos]);
    if (/\s/.test(c)) {
      pos++;
    } else if (c === "#") {
      while (pos < blob.length && blob[pos] !== 0x0a) pos++;
    } else {
      let token = "";
      while (pos < blob.length && !/\s/.test(String.fromCharCode(blob[pos]))) {
        token += String.fromCharCode(blob[pos]);
        pos++;
      }
      if (!/^\d+$/.test(token)) throw new Error(`${path}: bad header token ${token}`);
      fields.push(parseInt(token, 10));
    }
  }
  const [width, height, maxval] = fields;
  if (maxval !== 255) throw new Error(`${path}: maxval ${maxval} unsupported`);
  pos++; // single whitespace separator
  const expected = width * height * channels;
  const pixels = blob.subarray(pos, pos + expected);
  if (pixels.length !== expected) {
    throw new Error(`${path}: expected ${expected} pixel bytes, got ${pixels.length}`);
  }
  return { height, width, channels: channels as 1 | 3, pixels: new Uint8Array(pixels) };
}

/** Frame files in a directory, sorted by name. */
export function listFrameFiles(dir: string): string[] {
  const files = readdirSync(dir)
    .filter((name) => /\.(pgm|ppm|pnm)$/i.test(name))
    .sort();
  if (files.length === 0) throw new Error(`no PGM/PPM frames in ${dir}`);
  return files.map((name) => join(dir, name));
}

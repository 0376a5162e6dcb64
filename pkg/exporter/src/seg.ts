/**
 * Maps a segmentation model's raw class ids onto the toolkit's 6-id
 * taxonomy (0 background, 1 head, 2 torso, 3 arms, 4 hands, 5 legs).
 *
 * The stand-in model classifies by intensity bands, emitting raw ids
 * 0..7 so the mapping table actually has work to do; any raw id missing
 * from the table is an error naming the id.
 */

import { Frame } from "./pnm";

export const DEFAULT_CLASS_MAPPING: Record<number, number> = {
  0: 0, // void -> background
  1: 1, // head
  2: 2, // torso
  3: 3, // arms
  4: 4, // hands
  5: 5, // legs
  6: 1, // hair -> head
  7: 5, // feet -> legs
};

export function syntheticRawClasses(frame: Frame, seed: number): Uint8Array {
  const { height, width, channels, pixels } = frame;
  const out = new Uint8Array(height * width);
  for (let i = 0; i < height * width; i++) {
    const v =
      channels === 3
        ? (pixels[3 * i] + pixels[3 * i + 1] + pixels[3 * i + 2]) / 3
        : pixels[i];
    // intensity bands, rotated by the seed so different runs differ
    out[i] = v < 32 ? 0 : 1 + ((Math.floor(v / 32) + seed) % 7);
  }
  return out;
}

export function mapToTaxonomy(
  raw: Uint8Array,
  mapping: Record<number, number>
): Uint8Array {
  const out = new Uint8Array(raw.length);
  for (let i = 0; i < raw.length; i++) {
    const mapped = mapping[raw[i]];
    if (mapped === undefined) {
      throw new Error(`raw segmentation class ${raw[i]} has no taxonomy mapping`);
    }
    if (mapped < 0 || mapped > 5) {
      throw new Error(`mapping sends class ${raw[i]} to invalid id ${mapped}`);
    }
    out[i] = mapped;
  }
  return out;
}

/**
 * export-seg: run the (stand-in) segmentation model over a frame
 * directory and write uint8 [H, W] masks in the 6-id taxonomy.
 *
 *   node dist/export-seg.js --frames DIR --out-pattern seg_%04d.gct \
 *     [--seed 4] [--mapping mapping.json]
 */

import { readFileSync } from "fs";
import { basename } from "path";

import { parseFlags, runCli } from "./args";
import { writeGct } from "./gct";
import { listFrameFiles, readPnm } from "./pnm";
import { DEFAULT_CLASS_MAPPING, mapToTaxonomy, syntheticRawClasses } from "./seg";

function renderPattern(pattern: string, index: number): string {
  const m = /%0?(\d*)d/.exec(pattern);
  if (!m) throw new Error(`pattern ${pattern} has no %d placeholder`);
  const width = m[1] ? parseInt(m[1], 10) : 0;
  return pattern.replace(m[0], String(index).padStart(width, "0"));
}

runCli(() => {
  const flags = parseFlags(process.argv.slice(2), {
    required: ["frames", "out-pattern"],
    defaults: { seed: "4" },
  });
  const seed = parseInt(flags["seed"], 10);
  let mapping = DEFAULT_CLASS_MAPPING;
  if (flags["mapping"]) {
    const doc = JSON.parse(readFileSync(flags["mapping"], "utf-8"));
    mapping = Object.fromEntries(
      Object.entries(doc).map(([k, v]) => [parseInt(k, 10), v as number])
    );
  }

  listFrameFiles(flags["frames"]).forEach((path, position) => {
    const frame = readPnm(path);
    const digits = /(\d+)(?=\.[a-z]+$)/i.exec(basename(path));
    const index = digits ? parseInt(digits[1], 10) : position;
    const mask = mapToTaxonomy(syntheticRawClasses(frame, seed), mapping);
    writeGct(renderPattern(flags["out-pattern"], index), [frame.height, frame.width], mask);
  });
});

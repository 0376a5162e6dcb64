/**
 * export-pose: run the (stand-in) pose detector over a frame directory
 * and write the toolkit's annotation JSON, keypoints in COCO order with
 * confidences clamped into [0, 1].
 *
 *   node dist/export-pose.js --frames DIR --out pose.json \
 *     [--seed 4] [--clip-id ID] [--fps 2] [--label mid]
 */

import { writeFileSync } from "fs";
import { basename } from "path";

import { parseFlags, runCli } from "./args";
import { listFrameFiles, readPnm } from "./pnm";
import { poseToKeypointJson, syntheticPoses } from "./pose";

runCli(() => {
  const flags = parseFlags(process.argv.slice(2), {
    required: ["frames", "out"],
    defaults: { seed: "4", "clip-id": "", fps: "2", label: "mid" },
  });
  const seed = parseInt(flags["seed"], 10);
  const files = listFrameFiles(flags["frames"]);
  const clipId = flags["clip-id"] || basename(flags["frames"]);

  const frames = files.map((path, position) => {
    const frame = readPnm(path);
    const digits = /(\d+)(?=\.[a-z]+$)/i.exec(basename(path));
    const index = digits ? parseInt(digits[1], 10) : position;
    const poses = syntheticPoses(index, frame.width, frame.height, seed);
    return {
      index,
      boxes: [],
      keypoints: poses.map(poseToKeypointJson),
    };
  });

  const doc = {
    clip_id: clipId,
    fps: parseFloat(flags["fps"]),
    label: flags["label"],
    frames,
  };
  writeFileSync(flags["out"], JSON.stringify(doc, null, 2) + "\n");
});

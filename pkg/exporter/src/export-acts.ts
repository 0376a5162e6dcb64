/**
 * export-acts: dump a layer's activations and the class-score gradients
 * for one clip as float32 [K, h, w] tensors, plus a manifest recording
 * the class actually used.
 *
 *   node dist/export-acts.js --layer conv1 --class-policy predicted \
 *     --frames DIR --out-prefix out/clip [--seed 7] [--class-index N] [--label mid]
 */

import { writeFileSync } from "fs";
import { basename } from "path";

import { parseFlags, runCli } from "./args";
import { writeGct } from "./gct";
import { buildToyModel, CLASS_NAMES, dumpActivationGradients } from "./model";
import { listFrameFiles, readPnm } from "./pnm";

runCli(() => {
  const flags = parseFlags(process.argv.slice(2), {
    required: ["layer", "class-policy", "frames", "out-prefix"],
    defaults: { seed: "7" },
  });
  const policy = flags["class-policy"];
  if (!["predicted", "ground-truth", "explicit"].includes(policy)) {
    throw new Error(`unknown class policy ${policy}`);
  }
  let classIndex: number | undefined;
  if (policy === "explicit") {
    if (!("class-index" in flags)) throw new Error("explicit policy needs --class-index");
    classIndex = parseInt(flags["class-index"], 10);
  } else if (policy === "ground-truth") {
    const label = flags["label"];
    const idx = (CLASS_NAMES as readonly string[]).indexOf(label);
    if (idx < 0) throw new Error(`ground-truth policy needs --label (one of ${CLASS_NAMES.join(", ")})`);
    classIndex = idx;
  }

  const frames = listFrameFiles(flags["frames"]).map(readPnm);
  const model = buildToyModel(parseInt(flags["seed"], 10));
  const dump = dumpActivationGradients(
    model,
    frames,
    flags["layer"],
    policy as "predicted" | "ground-truth" | "explicit",
    classIndex
  );

  const prefix = flags["out-prefix"];
  writeGct(`${prefix}.activations.gct`, dump.shape, dump.activations);
  writeGct(`${prefix}.gradients.gct`, dump.shape, dump.gradients);
  const manifest = {
    model: model.id,
    layer: flags["layer"],
    class_policy: policy,
    class_index: dump.classIndex,
    class_name: CLASS_NAMES[dump.classIndex],
    activation_shape: dump.shape,
    frame_count: frames.length,
    outputs: {
      // basenames: the manifest always sits next to its tensors
      activations: basename(`${prefix}.activations.gct`),
      gradients: basename(`${prefix}.gradients.gct`),
    },
  };
  writeFileSync(`${prefix}.manifest.json`, JSON.stringify(manifest, null, 2) + "\n");
});

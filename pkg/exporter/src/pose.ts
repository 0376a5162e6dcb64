/**
 * Maps per-frame pose-detector output into the toolkit's annotation JSON.
 *
 * The detector stand-in is synthetic: a seeded walker that emits 17-point
 * skeletons in COCO order with raw confidences that may fall outside
 * [0, 1] (real detectors do), which the adapter clamps. Frames where the
 * detector finds nobody get an empty keypoint list, not zeros.
 */

import { mulberry32, Rng } from "./prng";

export const COCO_POINT_COUNT = 17;

export interface RawPose {
  role: "parent" | "child";
  points: Array<[number, number, number]>; // x, y, raw confidence
}

export function syntheticPoses(
  frameIndex: number,
  width: number,
  height: number,
  seed: number
): RawPose[] {
  const rng = mulberry32(seed * 7919 + frameIndex);
  const poses: RawPose[] = [];
  for (const role of ["parent", "child"] as const) {
    if (rng() < 0.1) continue; // detector misses this person
    const cx = (0.25 + 0.5 * rng()) * width;
    const cy = (0.25 + 0.5 * rng()) * height;
    const points: Array<[number, number, number]> = [];
    for (let j = 0; j < COCO_POINT_COUNT; j++) {
      const x = cx + (rng() - 0.5) * width * 0.2;
      const y = cy + (rng() - 0.5) * height * 0.4;
      const conf = rng() * 1.4 - 0.2; // deliberately exceeds [0, 1]
      points.push([x, y, conf]);
    }
    poses.push({ role, points });
  }
  return poses;
}

const round5 = (v: number) => Math.round(v * 1e5) / 1e5;

export function poseToKeypointJson(pose: RawPose): {
  role: string;
  points: number[][];
} {
  if (pose.points.length !== COCO_POINT_COUNT) {
    throw new Error(
      `pose has ${pose.points.length} points, expected ${COCO_POINT_COUNT}`
    );
  }
  return {
    role: pose.role,
    points: pose.points.map(([x, y, conf]) => [
      round5(x),
      round5(y),
      round5(Math.min(Math.max(conf, 0), 1)),
    ]),
  };
}

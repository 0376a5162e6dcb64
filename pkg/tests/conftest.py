import json

import numpy as np
import pytest

from jegauge import write_frame_pnm, write_tensor

FRAME_COUNT = 10
SIZE = 32  # fixture frames are SIZE x SIZE


def make_fixture_clip(root):
    """Synthesizes a small but complete clip under ``root``.

    Layout: frames/frame_%04d.ppm, acts/act_%04d.gct + grad_%04d.gct,
    seg/seg_%04d.gct, clip.json. A bright blob drifts right one pixel
    per frame; boxes and keypoints track it.
    """
    rng = np.random.default_rng(123)
    frames_dir = root / "frames"
    acts_dir = root / "acts"
    seg_dir = root / "seg"
    for d in (frames_dir, acts_dir, seg_dir):
        d.mkdir(parents=True, exist_ok=True)

    ann_frames = []
    yy, xx = np.mgrid[0:SIZE, 0:SIZE].astype(np.float64)
    for i in range(FRAME_COUNT):
        cx, cy = 8.0 + i, 16.0
        blob = 220.0 * np.exp(-((xx - cx) ** 2 + (yy - cy) ** 2) / (2 * 4.0**2))
        frame = np.clip(blob + rng.normal(0, 2.0, blob.shape) + 20, 0, 255)
        frame = frame.astype(np.uint8)
        write_frame_pnm(np.repeat(frame[:, :, None], 3, axis=2),
                        frames_dir / f"frame_{i:04d}.ppm")

        acts = rng.random((3, 8, 8)).astype(np.float32)
        grads = rng.normal(size=(3, 8, 8)).astype(np.float32)
        write_tensor(acts, acts_dir / f"act_{i:04d}.gct")
        write_tensor(grads, acts_dir / f"grad_{i:04d}.gct")

        seg = np.zeros((SIZE, SIZE), dtype=np.uint8)
        bx = int(cx)
        seg[12:21, max(bx - 4, 0) : bx + 5] = 2  # torso
        seg[10:14, max(bx - 2, 0) : bx + 3] = 1  # head
        write_tensor(seg, seg_dir / f"seg_{i:04d}.gct")

        points = [[float(bx), 12.0, 1.0]] + [
            [float(bx + (j % 3) - 1), float(14 + j % 5), 0.8] for j in range(16)
        ]
        ann_frames.append(
            {
                "index": i,
                "boxes": [
                    {"role": "parent", "part": "face",
                     "x": max(bx - 3, 0), "y": 10, "w": 7, "h": 6},
                    {"role": "child", "part": "body",
                     "x": max(bx - 5, 0), "y": 14, "w": 11, "h": 10},
                ],
                "keypoints": [{"role": "parent", "points": points}],
            }
        )

    ann = {"clip_id": "fixture-clip", "fps": 2.0, "label": "mid", "frames": ann_frames}
    (root / "clip.json").write_text(json.dumps(ann, indent=2))
    return {
        "root": root,
        "frames": frames_dir,
        "acts": acts_dir,
        "seg": seg_dir,
        "ann": root / "clip.json",
    }


@pytest.fixture(scope="session")
def fixture_clip(tmp_path_factory):
    return make_fixture_clip(tmp_path_factory.mktemp("clip"))

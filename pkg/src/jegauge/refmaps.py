"""Reference maps the attention maps are scored against.

Two references per frame: a motion map (dense optical-flow magnitude,
orientation discarded) and a semantic map (keypoint-centered Gaussian
heatmaps fused with body-segment masks under part-importance weights,
emphasizing head and upper body).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .annotations import COCO_KEYPOINT_NAMES, KeypointSet, N_KEYPOINTS
from .errors import DimensionError, ValidationError

# segment mask taxonomy (uint8 per-pixel ids)
SEG_BACKGROUND = 0
SEG_HEAD = 1
SEG_TORSO = 2
SEG_ARMS = 3
SEG_HANDS = 4
SEG_LEGS = 5
N_SEGMENTS = 6

SEGMENT_NAMES = ("background", "head", "torso", "arms", "hands", "legs")

# sigma defaults are calibrated for this frame width and scale with it
SIGMA_REFERENCE_WIDTH = 224


@dataclass(frozen=True, eq=False)
class PartWeightTable:
    """Importance in [0, 1] per COCO keypoint and per segment id."""

    keypoint_weights: np.ndarray  # (17,) float32
    segment_weights: np.ndarray   # (6,) float32

    def __post_init__(self):
        kw = np.asarray(self.keypoint_weights, dtype=np.float32)
        sw = np.asarray(self.segment_weights, dtype=np.float32)
        if kw.shape != (N_KEYPOINTS,):
            raise DimensionError(
                f"keypoint_weights: expected {N_KEYPOINTS} values, got shape {kw.shape}"
            )
        if sw.shape != (N_SEGMENTS,):
            raise DimensionError(
                f"segment_weights: expected {N_SEGMENTS} values, got shape {sw.shape}"
            )
        for name, arr in (("keypoint_weights", kw), ("segment_weights", sw)):
            if not np.all(np.isfinite(arr)) or arr.min() < 0.0 or arr.max() > 1.0:
                raise ValidationError(f"{name}: weights must lie in [0, 1]")
        object.__setattr__(self, "keypoint_weights", kw)
        object.__setattr__(self, "segment_weights", sw)

    def __eq__(self, other):
        if not isinstance(other, PartWeightTable):
            return NotImplemented
        return np.array_equal(
            self.keypoint_weights, other.keypoint_weights
        ) and np.array_equal(self.segment_weights, other.segment_weights)

    def to_dict(self) -> dict:
        return {
            "keypoint_weights": [float(v) for v in self.keypoint_weights],
            "segment_weights": [float(v) for v in self.segment_weights],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "PartWeightTable":
        for key in ("keypoint_weights", "segment_weights"):
            if key not in doc:
                raise ValidationError(f"weight table: missing field {key}")
        return cls(np.asarray(doc["keypoint_weights"], dtype=np.float32),
                   np.asarray(doc["segment_weights"], dtype=np.float32))


def default_part_weights() -> PartWeightTable:
    """Head and upper-body parts weigh 1.0, hips 0.6, knees/ankles 0.3."""
    kw = np.ones(N_KEYPOINTS, dtype=np.float32)
    for i, name in enumerate(COCO_KEYPOINT_NAMES):
        if "hip" in name:
            kw[i] = 0.6
        elif "knee" in name or "ankle" in name:
            kw[i] = 0.3
    sw = np.array([0.0, 0.9, 0.8, 0.8, 0.9, 0.3], dtype=np.float32)
    return PartWeightTable(kw, sw)


def load_part_weights(path) -> PartWeightTable:
    with open(path, "r", encoding="utf-8") as fh:
        return PartWeightTable.from_dict(json.load(fh))


def save_part_weights(table: PartWeightTable, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(table.to_dict(), fh, indent=2)
        fh.write("\n")


def _as_gray(frame: np.ndarray, name: str) -> np.ndarray:
    arr = np.asarray(frame)
    if arr.ndim != 2:
        raise DimensionError(f"{name}: expected a single-channel (H, W) frame")
    if arr.dtype == np.uint8:
        return arr.astype(np.float32) / 255.0
    arr = arr.astype(np.float32)
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name}: values must be finite")
    return arr


def _central_dx(img: np.ndarray) -> np.ndarray:
    p = np.pad(img, ((0, 0), (1, 1)), mode="edge")
    return 0.5 * (p[:, 2:] - p[:, :-2])


def _central_dy(img: np.ndarray) -> np.ndarray:
    p = np.pad(img, ((1, 1), (0, 0)), mode="edge")
    return 0.5 * (p[2:, :] - p[:-2, :])


def _neighbor4_mean(m: np.ndarray) -> np.ndarray:
    p = np.pad(m, 1, mode="edge")
    return 0.25 * (p[:-2, 1:-1] + p[2:, 1:-1] + p[1:-1, :-2] + p[1:-1, 2:])


def horn_schunck_flow(
    f0: np.ndarray,
    f1: np.ndarray,
    smoothness: float = 0.1,
    iterations: int = 100,
) -> np.ndarray:
    """Dense optical flow between two grayscale frames.

    Classic iterative scheme: spatial gradients are central differences
    of the frame average, the temporal gradient is the frame difference,
    and each sweep relaxes the flow toward its 4-neighbor mean under the
    data constraint. uint8 frames are scaled to [0, 1] first.

    Returns a (2, H, W) float32 field, components (u, v) in pixels/frame.
    """
    if iterations < 1:
        raise ValidationError(f"iterations must be >= 1, got {iterations}")
    if not smoothness > 0:
        raise ValidationError(f"smoothness must be > 0, got {smoothness}")
    a = _as_gray(f0, "f0")
    b = _as_gray(f1, "f1")
    if a.shape != b.shape:
        raise DimensionError(f"frame extents differ: {a.shape} vs {b.shape}")

    avg = 0.5 * (a + b)
    ix = _central_dx(avg)
    iy = _central_dy(avg)
    it = b - a
    lam2 = float(smoothness) ** 2
    denom = lam2 + ix * ix + iy * iy

    u = np.zeros_like(a)
    v = np.zeros_like(a)
    for _ in range(iterations):
        ubar = _neighbor4_mean(u)
        vbar = _neighbor4_mean(v)
        d = (ix * ubar + iy * vbar + it) / denom
        u = ubar - ix * d
        v = vbar - iy * d
    return np.stack([u, v]).astype(np.float32)


def horn_schunck_energy(
    f0: np.ndarray, f1: np.ndarray, flow: np.ndarray, smoothness: float
) -> float:
    """Global energy (data term + smoothness term) of a candidate flow."""
    a = _as_gray(f0, "f0")
    b = _as_gray(f1, "f1")
    u, v = np.asarray(flow, dtype=np.float64)
    avg = 0.5 * (a + b)
    ix = _central_dx(avg)
    iy = _central_dy(avg)
    it = b - a
    data = ix * u + iy * v + it
    grads = 0.0
    for comp in (u, v):
        gx = np.diff(comp, axis=1)
        gy = np.diff(comp, axis=0)
        grads += float(np.sum(gx * gx) + np.sum(gy * gy))
    return float(np.sum(data * data)) + float(smoothness) ** 2 * grads


def horn_schunck_energies(
    f0: np.ndarray,
    f1: np.ndarray,
    smoothness: float = 0.1,
    iterations: int = 100,
) -> np.ndarray:
    """Energy after each relaxation sweep (diagnostic for convergence)."""
    energies = np.empty(iterations, dtype=np.float64)
    for i in range(1, iterations + 1):
        flow = horn_schunck_flow(f0, f1, smoothness, i)
        energies[i - 1] = horn_schunck_energy(f0, f1, flow, smoothness)
    return energies


def flow_magnitude(flow: np.ndarray) -> np.ndarray:
    """Per-pixel flow magnitude, min-max normalized to [0, 1].

    Orientation is discarded entirely; a constant-magnitude field maps
    to all zeros (no motion contrast).
    """
    arr = np.asarray(flow, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[0] != 2:
        raise DimensionError(f"flow: expected (2, H, W), got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("flow: values must be finite")
    mag = np.hypot(arr[0], arr[1])
    lo, hi = mag.min(), mag.max()
    if hi == lo:
        return np.zeros(mag.shape, dtype=np.float32)
    return np.clip((mag - lo) / (hi - lo), 0.0, 1.0).astype(np.float32)


def keypoint_heatmap(
    keypoint_sets: list[KeypointSet] | tuple[KeypointSet, ...],
    weights: PartWeightTable,
    sigma: float,
    width: int,
    height: int,
) -> np.ndarray:
    """Gaussian bumps centered on body keypoints, max-combined.

    Each keypoint contributes weight * confidence * exp(-d^2 / 2 sigma^2);
    bumps from all keypoints of all persons are combined with a pixelwise
    maximum, so the result stays in [0, 1]. Keypoints outside the frame
    contribute whatever tail falls inside it.
    """
    if sigma <= 0:
        raise ValidationError(f"sigma must be > 0, got {sigma}")
    if width < 1 or height < 1:
        raise DimensionError(f"extents must be >= 1, got {width}x{height}")
    out = np.zeros((height, width), dtype=np.float64)
    yy = np.arange(height, dtype=np.float64)[:, None]
    xx = np.arange(width, dtype=np.float64)[None, :]
    inv = 1.0 / (2.0 * float(sigma) ** 2)
    for kset in keypoint_sets:
        pts = np.asarray(kset.points, dtype=np.float64)
        for j in range(pts.shape[0]):
            x, y, conf = pts[j]
            amp = float(weights.keypoint_weights[j]) * conf
            if amp <= 0.0:
                continue
            bump = amp * np.exp(-((xx - x) ** 2 + (yy - y) ** 2) * inv)
            np.maximum(out, bump, out=out)
    return np.clip(out, 0.0, 1.0).astype(np.float32)


def combine_semantic(
    heat: np.ndarray, seg: np.ndarray, weights: PartWeightTable
) -> np.ndarray:
    """Fuse a keypoint heatmap with a segment mask by pixelwise maximum.

    Non-background pixels are at least their segment's weight; background
    pixels pass the heatmap through unchanged.
    """
    h = np.asarray(heat, dtype=np.float64)
    s = np.asarray(seg)
    if h.ndim != 2 or s.ndim != 2:
        raise DimensionError("heat and segment mask must be 2-d arrays")
    if h.shape != s.shape:
        raise DimensionError(f"extent mismatch: heat {h.shape} vs seg {s.shape}")
    if s.dtype != np.uint8:
        raise ValidationError(f"segment mask must be uint8, got {s.dtype}")
    if s.max(initial=0) >= N_SEGMENTS:
        raise ValidationError(
            f"segment mask contains id {int(s.max())}, taxonomy has {N_SEGMENTS} ids"
        )
    if h.min() < 0.0 or h.max() > 1.0:
        raise ValidationError("heat: values must lie in [0, 1]")
    lut = np.asarray(weights.segment_weights, dtype=np.float64)
    soft = lut[s]
    out = np.where(s != SEG_BACKGROUND, np.maximum(h, soft), h)
    return out.astype(np.float32)

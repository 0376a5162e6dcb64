"""Attention-map scoring against motion and semantic references.

Two metrics per annotated region: mutual information between binned
intensities (crop first, then histogram) and cross-entropy between pixel
distributions (softmax the full maps first, then crop and renormalize).
Each metric blends its motion-based and semantic-based values with a
weight alpha in [0, 1]; alpha rides on the motion branch.

All logarithms are natural, so scores are in nats.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .annotations import PARTS, ROLES, RegionBox
from .errors import (
    BoundsError,
    DimensionError,
    IncompatibleReportsError,
    UndefinedInputError,
    ValidationError,
)

METRICS = ("mi", "ce")


def check_unit_map(m: np.ndarray, name: str = "map") -> np.ndarray:
    """Validate a 2-d float map with values in [0, 1]."""
    arr = np.asarray(m, dtype=np.float64)
    if arr.ndim != 2 or arr.size == 0:
        raise DimensionError(f"{name}: expected non-empty 2-d array, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name}: values must be finite")
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise ValidationError(f"{name}: values must lie in [0, 1]")
    return arr


@dataclass(frozen=True)
class ScoringConfig:
    alpha: float = 0.5
    bins: int = 20
    roles: tuple[str, ...] = ROLES
    parts: tuple[str, ...] = PARTS

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValidationError(f"alpha must be in [0, 1], got {self.alpha}")
        if self.bins < 2:
            raise ValidationError(f"bins must be >= 2, got {self.bins}")
        for role in self.roles:
            if role not in ROLES:
                raise ValidationError(f"unknown role {role!r}")
        for part in self.parts:
            if part not in PARTS:
                raise ValidationError(f"unknown part {part!r}")


@dataclass(frozen=True, eq=False)
class Histogram2D:
    """Joint intensity counts of two equally shaped [0, 1] maps."""

    bins: int
    counts: np.ndarray  # (bins, bins) int64

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def joint_p(self) -> np.ndarray:
        total = self.total
        if total == 0:
            return np.zeros_like(self.counts, dtype=np.float64)
        return self.counts.astype(np.float64) / total


@dataclass(frozen=True, eq=False)
class PixelDistribution:
    """Flattened per-pixel probabilities with the source map shape."""

    probs: np.ndarray  # (h*w,) float64, strictly positive, sums to 1
    shape: tuple[int, int]


def _bin_indices(values: np.ndarray, bins: int) -> np.ndarray:
    # uniform bins over [0, 1]; the top edge folds into the last bin
    idx = np.floor(values * bins).astype(np.intp)
    return np.minimum(idx, bins - 1)


def joint_histogram(a: np.ndarray, b: np.ndarray, bins: int) -> Histogram2D:
    """Bi-dimensional histogram of two maps over uniform [0, 1] bins."""
    if bins < 2:
        raise ValidationError(f"bins must be >= 2, got {bins}")
    am = check_unit_map(a, "a")
    bm = check_unit_map(b, "b")
    if am.shape != bm.shape:
        raise DimensionError(f"extent mismatch: {am.shape} vs {bm.shape}")
    ia = _bin_indices(am.ravel(), bins)
    ib = _bin_indices(bm.ravel(), bins)
    counts = np.zeros((bins, bins), dtype=np.int64)
    np.add.at(counts, (ia, ib), 1)
    return Histogram2D(bins, counts)


def mutual_information(hist: Histogram2D) -> float:
    """Mutual information (nats) of the joint distribution in ``hist``."""
    if hist.total == 0:
        raise UndefinedInputError("mutual information of an empty histogram")
    p = hist.joint_p
    px = p.sum(axis=1)
    py = p.sum(axis=0)
    outer = px[:, None] * py[None, :]
    nz = p > 0
    return float(np.sum(p[nz] * np.log(p[nz] / outer[nz])))


def image_softmax(img: np.ndarray) -> PixelDistribution:
    """Convert a map to a pixel distribution.

    Min-max normalize to [0, 1] (a constant map becomes all zeros), then
    softmax over the flattened pixels, so every pixel gets a strictly
    positive probability.
    """
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 2 or arr.size == 0:
        raise DimensionError(f"image: expected non-empty 2-d array, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("image: values must be finite")
    lo, hi = arr.min(), arr.max()
    norm = np.zeros_like(arr) if hi == lo else (arr - lo) / (hi - lo)
    flat = norm.ravel()
    e = np.exp(flat - flat.max())
    return PixelDistribution(e / e.sum(), arr.shape)


def cross_entropy(p_ref: PixelDistribution, q_cand: PixelDistribution) -> float:
    """-sum(p * ln q) in nats; minimized (to H(p)) when q equals p."""
    p = p_ref.probs
    q = q_cand.probs
    if p.shape != q.shape:
        raise DimensionError(f"distribution lengths differ: {p.shape} vs {q.shape}")
    return float(-np.sum(p * np.log(q)))


def _check_box(box: RegionBox, shape: tuple[int, int]):
    h, w = shape
    if box.x < 0 or box.y < 0 or box.x + box.w > w or box.y + box.h > h:
        raise BoundsError(
            f"box {box.x},{box.y} {box.w}x{box.h} outside {w}x{h} extents"
        )


def crop_region(x, box: RegionBox):
    """Extract the sub-rectangle under ``box``.

    Maps are sliced; a PixelDistribution is sliced in its 2-d shape and
    the surviving probabilities are renormalized to sum to 1.
    """
    if isinstance(x, PixelDistribution):
        _check_box(box, x.shape)
        grid = x.probs.reshape(x.shape)
        sub = grid[box.y : box.y + box.h, box.x : box.x + box.w]
        flat = sub.ravel()
        return PixelDistribution(flat / flat.sum(), (box.h, box.w))
    arr = np.asarray(x)
    if arr.ndim != 2:
        raise DimensionError(f"crop: expected 2-d array, got shape {arr.shape}")
    _check_box(box, arr.shape)
    return arr[box.y : box.y + box.h, box.x : box.x + box.w].copy()


def score_frame(
    cam: np.ndarray,
    motion: np.ndarray,
    semantic: np.ndarray,
    boxes: list[RegionBox] | tuple[RegionBox, ...],
    cfg: ScoringConfig,
) -> dict:
    """Score one frame's attention map against both references.

    Returns {"mi": {role: {part: value}}, "ce": {...}} with an entry per
    box that passes the config's role/part filters. The motion branch
    carries alpha, the semantic branch (1 - alpha).
    """
    c = check_unit_map(cam, "cam")
    m = check_unit_map(motion, "motion")
    s = check_unit_map(semantic, "semantic")
    if not (c.shape == m.shape == s.shape):
        raise DimensionError(
            f"map extents differ: cam {c.shape}, motion {m.shape}, semantic {s.shape}"
        )
    alpha = float(cfg.alpha)
    scores: dict = {metric: {} for metric in METRICS}
    selected = [b for b in boxes if b.role in cfg.roles and b.part in cfg.parts]
    if not selected:
        return scores

    # softmax once over each full map; crops renormalize per box
    cam_d = image_softmax(c)
    motion_d = image_softmax(m)
    semantic_d = image_softmax(s)

    for box in selected:
        cam_c = crop_region(c, box)
        mi1 = mutual_information(joint_histogram(cam_c, crop_region(m, box), cfg.bins))
        mi2 = mutual_information(joint_histogram(cam_c, crop_region(s, box), cfg.bins))
        mi = alpha * mi1 + (1.0 - alpha) * mi2

        cam_q = crop_region(cam_d, box)
        ce1 = cross_entropy(crop_region(motion_d, box), cam_q)
        ce2 = cross_entropy(crop_region(semantic_d, box), cam_q)
        ce = alpha * ce1 + (1.0 - alpha) * ce2

        scores["mi"].setdefault(box.role, {})[box.part] = mi
        scores["ce"].setdefault(box.role, {})[box.part] = ce
    return scores


@dataclass(frozen=True, eq=False)
class ClipScoreReport:
    clip_id: str
    config: ScoringConfig
    frames: tuple  # of (frame index, scores dict)
    aggregate: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "clip_id": self.clip_id,
            "config": {"alpha": self.config.alpha, "bins": self.config.bins},
            "frames": [
                {"index": idx, "scores": scores} for idx, scores in self.frames
            ],
            "aggregate": self.aggregate,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ClipScoreReport":
        try:
            cfg = ScoringConfig(alpha=doc["config"]["alpha"], bins=doc["config"]["bins"])
            frames = tuple((f["index"], f["scores"]) for f in doc["frames"])
            return cls(doc["clip_id"], cfg, frames, doc["aggregate"])
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed clip report: {exc}") from exc


def _aggregate(frames, n_frames: int) -> dict:
    agg: dict = {}
    for metric in METRICS:
        per_region: dict = {}
        for _, scores in frames:
            for role, parts in scores.get(metric, {}).items():
                for part, value in parts.items():
                    per_region.setdefault((role, part), []).append(value)
        block: dict = {}
        for role in ROLES:
            for part in PARTS:
                values = per_region.get((role, part))
                if not values:
                    continue
                arr = np.asarray(values, dtype=np.float64)
                block.setdefault(role, {})[part] = {
                    "mean": float(arr.mean()),
                    "std": float(arr.std()),  # population std
                    "coverage": [len(values), n_frames],
                }
        agg[metric] = block
    return agg


def score_clip(
    frames,
    cfg: ScoringConfig,
    clip_id: str = "clip",
    indices=None,
    jobs: int = 1,
) -> ClipScoreReport:
    """Score a sequence of (cam, motion, semantic, boxes) frames.

    ``indices`` optionally names each frame (defaults to 0..n-1). Frames
    may be scored in parallel (``jobs``) but the report is reduced in
    input order, so the result is independent of the worker count.
    """
    frames = list(frames)
    if not frames:
        raise UndefinedInputError("score_clip: empty frame sequence")
    if indices is None:
        indices = range(len(frames))
    indices = [int(i) for i in indices]
    if len(indices) != len(frames):
        raise DimensionError(
            f"{len(indices)} indices for {len(frames)} frames"
        )

    def work(entry):
        cam, motion, semantic, boxes = entry
        return score_frame(cam, motion, semantic, boxes, cfg)

    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(work, frames))
    else:
        results = [work(entry) for entry in frames]

    scored = tuple(zip(indices, results))
    return ClipScoreReport(clip_id, cfg, scored, _aggregate(scored, len(frames)))


def write_report(report: ClipScoreReport, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(), fh, indent=2)
        fh.write("\n")


def read_report(path) -> ClipScoreReport:
    with open(path, "r", encoding="utf-8") as fh:
        return ClipScoreReport.from_dict(json.load(fh))


def check_same_config(reports) -> ScoringConfig:
    """Ensure all reports share (alpha, bins); returns that config."""
    reports = list(reports)
    if not reports:
        raise UndefinedInputError("no reports")
    first = reports[0].config
    for rep in reports[1:]:
        if (rep.config.alpha, rep.config.bins) != (first.alpha, first.bins):
            raise IncompatibleReportsError(
                f"report {rep.clip_id!r} was scored with alpha={rep.config.alpha}, "
                f"bins={rep.config.bins}; expected alpha={first.alpha}, bins={first.bins}"
            )
    return first

"""Frame augmentation ops and dataset rebalancing plans.

Every op is deterministic given its inputs and seed. Randomness comes
from numpy's default PCG64 generator seeded explicitly, so equal
(input, seed) pairs always produce identical bytes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .annotations import (
    COCO_LR_SWAP,
    FrameAnnotation,
    KeypointSet,
    LABELS,
    PARTS,
    RegionBox,
)
from .errors import (
    BoundsError,
    DimensionError,
    QuotaError,
    ResourceError,
    UndefinedInputError,
    ValidationError,
)
from .tensorio import check_frame


# --- op directives -----------------------------------------------------------


@dataclass(frozen=True)
class BgSolid:
    r: int
    g: int
    b: int

    def __post_init__(self):
        for v in (self.r, self.g, self.b):
            if not 0 <= v <= 255:
                raise ValidationError(f"color component {v} outside [0, 255]")


@dataclass(frozen=True, eq=False)
class BgImage:
    image: np.ndarray  # uint8 (H, W, 3), resized to the frame at apply time


@dataclass(frozen=True)
class BgBlur:
    radius: int

    def __post_init__(self):
        if self.radius < 1:
            raise ValidationError(f"blur radius must be >= 1, got {self.radius}")


@dataclass(frozen=True)
class Noise:
    sigma: float
    seed: int

    def __post_init__(self):
        if self.sigma < 0:
            raise ValidationError(f"noise sigma must be >= 0, got {self.sigma}")


@dataclass(frozen=True)
class Rotate:
    degrees: float

    def __post_init__(self):
        if not -180.0 < self.degrees <= 180.0:
            raise ValidationError(
                f"rotation must lie in (-180, 180], got {self.degrees}"
            )


@dataclass(frozen=True)
class HFlip:
    pass


@dataclass(frozen=True)
class Cutout:
    parts: tuple[str, ...] = ("face",)

    def __post_init__(self):
        for part in self.parts:
            if part not in PARTS:
                raise ValidationError(f"unknown part {part!r}")


# --- pixel ops ---------------------------------------------------------------


def _box_slices(box: RegionBox, shape) -> tuple[slice, slice]:
    h, w = shape[:2]
    if box.x + box.w > w or box.y + box.h > h:
        raise BoundsError(f"box {box} outside {w}x{h} frame")
    return slice(box.y, box.y + box.h), slice(box.x, box.x + box.w)


def apply_cutout(frame: np.ndarray, boxes, parts=("face",)) -> np.ndarray:
    """Black out every annotated box whose part is selected (any role)."""
    check_frame(frame)
    out = frame.copy()
    for box in boxes:
        if box.part in parts:
            ys, xs = _box_slices(box, frame.shape)
            out[ys, xs] = 0
    return out


def _foreground_mask(shape, seg, boxes) -> np.ndarray:
    h, w = shape[:2]
    if seg is not None:
        seg = np.asarray(seg)
        if seg.shape != (h, w):
            raise DimensionError(f"segment mask {seg.shape} vs frame {(h, w)}")
        return seg != 0
    if boxes is None:
        raise ValidationError("background replacement needs a segment mask or boxes")
    mask = np.zeros((h, w), dtype=bool)
    for box in boxes:
        ys, xs = _box_slices(box, shape)
        mask[ys, xs] = True
    return mask


def _round_u8(values: np.ndarray) -> np.ndarray:
    # half-up rounding, bit-stable across platforms
    return np.clip(np.floor(values + 0.5), 0, 255).astype(np.uint8)


def box_blur(frame: np.ndarray, radius: int) -> np.ndarray:
    """Mean filter over the in-frame part of a (2r+1)^2 window."""
    check_frame(frame)
    if radius < 1:
        raise ValidationError(f"blur radius must be >= 1, got {radius}")
    arr = frame.astype(np.float64)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    h, w, c = arr.shape

    def window_sums(img):
        # integral image with a zero border; windows clip at the edges
        integ = np.zeros((h + 1, w + 1) + img.shape[2:], dtype=np.float64)
        integ[1:, 1:] = img.cumsum(axis=0).cumsum(axis=1)
        ys = np.arange(h)
        xs = np.arange(w)
        y0 = np.maximum(ys - radius, 0)
        y1 = np.minimum(ys + radius + 1, h)
        x0 = np.maximum(xs - radius, 0)
        x1 = np.minimum(xs + radius + 1, w)
        a = integ[np.ix_(y1, x1)]
        b = integ[np.ix_(y0, x1)]
        cc = integ[np.ix_(y1, x0)]
        d = integ[np.ix_(y0, x0)]
        return a - b - cc + d

    sums = window_sums(arr)
    counts = window_sums(np.ones((h, w, 1)))
    out = _round_u8(sums / counts)
    return out[:, :, 0] if frame.ndim == 2 else out


def apply_background(frame: np.ndarray, op, seg=None, boxes=None) -> np.ndarray:
    """Replace background pixels; foreground comes from the segment mask
    or, failing that, from the union of annotated boxes."""
    check_frame(frame)
    fg = _foreground_mask(frame.shape, seg, boxes)
    if isinstance(op, BgSolid):
        replacement = np.empty_like(frame)
        if frame.ndim == 2:
            replacement[:] = _round_u8(
                np.array(0.299 * op.r + 0.587 * op.g + 0.114 * op.b)
            )
        else:
            replacement[:] = (op.r, op.g, op.b)
    elif isinstance(op, BgImage):
        if op.image is None:
            raise ResourceError("background image missing")
        replacement = resize_frame(op.image, frame.shape[1], frame.shape[0])
        if frame.ndim == 2 and replacement.ndim == 3:
            replacement = _round_u8(replacement.astype(np.float64) @ (0.299, 0.587, 0.114))
        elif frame.ndim == 3 and replacement.ndim == 2:
            replacement = np.repeat(replacement[:, :, None], 3, axis=2)
    elif isinstance(op, BgBlur):
        replacement = box_blur(frame, op.radius)
    else:
        raise ValidationError(f"unknown background op {op!r}")
    out = frame.copy()
    out[~fg] = replacement[~fg]
    return out


def resize_frame(frame: np.ndarray, width: int, height: int) -> np.ndarray:
    """Bilinear resize of a uint8 frame (half-pixel-centered sampling)."""
    from .gradcam import upsample_bilinear

    check_frame(frame)
    if frame.ndim == 2:
        return _round_u8(upsample_bilinear(frame.astype(np.float64), width, height))
    planes = [
        upsample_bilinear(frame[:, :, ch].astype(np.float64), width, height)
        for ch in range(3)
    ]
    return _round_u8(np.stack(planes, axis=-1))


def add_gaussian_noise(frame: np.ndarray, sigma: float, seed: int) -> np.ndarray:
    """Add N(0, sigma^2) noise per pixel channel, round half-up, clamp.

    Noise comes from numpy's PCG64 generator (default_rng) seeded with
    ``seed``; sigma 0 returns the frame unchanged.
    """
    check_frame(frame)
    if sigma < 0:
        raise ValidationError(f"sigma must be >= 0, got {sigma}")
    if sigma == 0:
        return frame.copy()
    rng = np.random.default_rng(seed)
    noise = rng.normal(0.0, sigma, size=frame.shape)
    return _round_u8(frame.astype(np.float64) + noise)


def rotate(frame: np.ndarray, degrees: float) -> np.ndarray:
    """Rotate about the frame center (positive = counterclockwise).

    Bilinear sampling on the inverse map; pixels with no source are
    black. 0 degrees is a bit-exact identity.
    """
    check_frame(frame)
    if not -180.0 < degrees <= 180.0:
        raise ValidationError(f"rotation must lie in (-180, 180], got {degrees}")
    h, w = frame.shape[:2]
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    theta = np.deg2rad(degrees)
    cos_t, sin_t = np.cos(theta), np.sin(theta)

    ys, xs = np.mgrid[0:h, 0:w].astype(np.float64)
    dx = xs - cx
    dy = ys - cy
    sx = cx + cos_t * dx - sin_t * dy
    sy = cy + sin_t * dx + cos_t * dy

    x0 = np.floor(sx).astype(np.intp)
    y0 = np.floor(sy).astype(np.intp)
    fx = sx - x0
    fy = sy - y0

    arr = frame.astype(np.float64)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    out = np.zeros_like(arr)

    for oy, ox, wgt in (
        (0, 0, (1 - fy) * (1 - fx)),
        (0, 1, (1 - fy) * fx),
        (1, 0, fy * (1 - fx)),
        (1, 1, fy * fx),
    ):
        yy = y0 + oy
        xx = x0 + ox
        valid = (yy >= 0) & (yy < h) & (xx >= 0) & (xx < w)
        yc = np.clip(yy, 0, h - 1)
        xc = np.clip(xx, 0, w - 1)
        out += np.where(valid, wgt, 0.0)[:, :, None] * arr[yc, xc]

    out = _round_u8(out)
    return out[:, :, 0] if frame.ndim == 2 else out


def hflip(frame: np.ndarray, frame_ann: FrameAnnotation | None = None):
    """Mirror a frame about its vertical axis, remapping annotations.

    Boxes map x -> W - x - w; keypoints map x -> W - 1 - x with left and
    right identities exchanged. Returns (frame, updated annotation) where
    the annotation is None if none was given.
    """
    check_frame(frame)
    flipped = frame[:, ::-1].copy()
    if frame_ann is None:
        return flipped, None
    width = frame.shape[1]
    boxes = tuple(
        RegionBox(b.role, b.part, width - b.x - b.w, b.y, b.w, b.h)
        for b in frame_ann.boxes
    )
    keypoints = []
    for kset in frame_ann.keypoints:
        pts = np.asarray(kset.points, dtype=np.float32)[list(COCO_LR_SWAP)].copy()
        pts[:, 0] = (width - 1) - pts[:, 0]
        pts.flags.writeable = False
        keypoints.append(KeypointSet(kset.role, pts))
    return flipped, FrameAnnotation(frame_ann.index, boxes, tuple(keypoints))


# --- dataset plans -----------------------------------------------------------


@dataclass(frozen=True)
class LabelRecord:
    clip_id: str
    label: str

    def __post_init__(self):
        if self.label not in LABELS:
            raise ValidationError(f"unknown label {self.label!r}")


@dataclass(frozen=True)
class BalancePlan:
    """Duplication recipe that equalizes all label counts to the max."""

    duplicates: dict  # label -> number of duplicated clips
    assignments: tuple  # of (clip_id, copies), copies >= 1, full dataset

    @property
    def total_duplicates(self) -> int:
        return sum(self.duplicates.values())


def plan_balance(records) -> BalancePlan:
    """Oversample minority labels up to the largest label count.

    Duplicates are dealt round-robin over each label's clips in sorted
    clip_id order, so the plan is a pure function of the record set.
    """
    records = list(records)
    if not records:
        raise UndefinedInputError("plan_balance: no records")
    by_label: dict[str, list[str]] = {label: [] for label in LABELS}
    seen = set()
    for rec in records:
        if rec.clip_id in seen:
            raise ValidationError(f"duplicate clip_id {rec.clip_id!r}")
        seen.add(rec.clip_id)
        by_label[rec.label].append(rec.clip_id)
    for label in LABELS:
        if not by_label[label]:
            raise ValidationError(f"label {label!r} has no clips")

    target = max(len(v) for v in by_label.values())
    duplicates = {}
    assignments = []
    for label in LABELS:
        clips = sorted(by_label[label])
        need = target - len(clips)
        duplicates[label] = need
        base, extra = divmod(need, len(clips))
        for i, clip_id in enumerate(clips):
            assignments.append((clip_id, 1 + base + (1 if i < extra else 0)))
    return BalancePlan(duplicates, tuple(assignments))


@dataclass(frozen=True)
class MixPlan:
    """Seeded half-and-half draw from two source datasets per label."""

    counts: dict  # label -> (from_a, from_b)
    picks: tuple  # of (clip_id, "a" | "b")
    seed: int


def plan_mix(a, b, total: int, seed: int) -> MixPlan:
    """Draw ``total`` clips, split evenly over labels and over sources.

    Per label the quota is total/3 (earlier labels absorb the remainder),
    split half to source a, half to b with the odd clip going to a.
    Sampling is without replacement from each source's sorted clip list
    using numpy's PCG64 generator, so a seed fully determines the plan.
    """
    if total < 1:
        raise ValidationError(f"total must be >= 1, got {total}")
    pools = {}
    for name, records in (("a", a), ("b", b)):
        by_label: dict[str, list[str]] = {label: [] for label in LABELS}
        for rec in records:
            by_label[rec.label].append(rec.clip_id)
        pools[name] = {label: sorted(ids) for label, ids in by_label.items()}

    base, extra = divmod(total, len(LABELS))
    rng = np.random.default_rng(seed)
    counts = {}
    picks = []
    for li, label in enumerate(LABELS):
        quota = base + (1 if li < extra else 0)
        need_a = (quota + 1) // 2
        need_b = quota // 2
        counts[label] = (need_a, need_b)
        for source, need in (("a", need_a), ("b", need_b)):
            pool = pools[source][label]
            if len(pool) < need:
                raise QuotaError(
                    f"label {label!r}: source {source} has {len(pool)} clips, "
                    f"needs {need}"
                )
            chosen = rng.choice(len(pool), size=need, replace=False)
            for idx in sorted(chosen):
                picks.append((pool[idx], source))
    return MixPlan(counts, tuple(picks), seed)

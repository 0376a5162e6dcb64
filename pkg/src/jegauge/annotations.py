"""Per-clip annotation records: engagement label, region boxes, keypoints.

One JSON document per clip::

    {"clip_id": str, "fps": number, "label": "low"|"mid"|"high",
     "frames": [{"index": int,
                 "boxes": [{"role", "part", "x", "y", "w", "h"}, ...],
                 "keypoints": [{"role", "points": [[x, y, conf] x 17]}, ...]}]}

Roles are "parent"/"child", parts "face"/"body". Keypoints follow the
standard 17-point COCO order. Validation is strict: a document that
violates any invariant is rejected, never repaired.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import BoundsError, ValidationError

ROLES = ("parent", "child")
PARTS = ("face", "body")
LABELS = ("low", "mid", "high")

N_KEYPOINTS = 17

COCO_KEYPOINT_NAMES = (
    "nose",
    "left_eye", "right_eye",
    "left_ear", "right_ear",
    "left_shoulder", "right_shoulder",
    "left_elbow", "right_elbow",
    "left_wrist", "right_wrist",
    "left_hip", "right_hip",
    "left_knee", "right_knee",
    "left_ankle", "right_ankle",
)

# index permutation that exchanges left/right keypoint identities
COCO_LR_SWAP = (0, 2, 1, 4, 3, 6, 5, 8, 7, 10, 9, 12, 11, 14, 13, 16, 15)


@dataclass(frozen=True)
class RegionBox:
    role: str
    part: str
    x: int
    y: int
    w: int
    h: int

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValidationError(f"box role: expected one of {ROLES}, got {self.role!r}")
        if self.part not in PARTS:
            raise ValidationError(f"box part: expected one of {PARTS}, got {self.part!r}")
        if self.x < 0 or self.y < 0:
            raise ValidationError(f"box origin must be >= 0, got ({self.x}, {self.y})")
        if self.w <= 0 or self.h <= 0:
            raise ValidationError(f"box extents must be > 0, got {self.w}x{self.h}")


@dataclass(frozen=True, eq=False)
class KeypointSet:
    role: str
    points: np.ndarray  # (17, 3) float32 rows of (x, y, confidence)

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValidationError(f"keypoint role: expected one of {ROLES}, got {self.role!r}")
        pts = np.asarray(self.points, dtype=np.float32)
        if pts.shape != (N_KEYPOINTS, 3):
            raise ValidationError(
                f"points: expected {N_KEYPOINTS} (x, y, confidence) rows, got {pts.shape}"
            )
        if not np.all(np.isfinite(pts)):
            raise ValidationError("points: coordinates must be finite")
        conf = pts[:, 2]
        if conf.min() < 0.0 or conf.max() > 1.0:
            raise ValidationError("points: confidence must lie in [0, 1]")
        object.__setattr__(self, "points", pts)


@dataclass(frozen=True, eq=False)
class FrameAnnotation:
    index: int
    boxes: tuple[RegionBox, ...] = ()
    keypoints: tuple[KeypointSet, ...] = ()


@dataclass(frozen=True, eq=False)
class ClipAnnotation:
    clip_id: str
    fps: float
    label: str
    frames: tuple[FrameAnnotation, ...] = field(default_factory=tuple)


def _require(cond: bool, where: str, message: str):
    if not cond:
        raise ValidationError(f"{where}: {message}")


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _is_num(v) -> bool:
    return (isinstance(v, (int, float)) and not isinstance(v, bool)
            and np.isfinite(v))


def _parse_box(doc, where: str, frame_size) -> RegionBox:
    _require(isinstance(doc, dict), where, "box must be an object")
    for key in ("role", "part", "x", "y", "w", "h"):
        _require(key in doc, f"{where}.{key}", "missing field")
    _require(doc["role"] in ROLES, f"{where}.role",
             f"expected one of {ROLES}, got {doc['role']!r}")
    _require(doc["part"] in PARTS, f"{where}.part",
             f"expected one of {PARTS}, got {doc['part']!r}")
    for key in ("x", "y", "w", "h"):
        _require(_is_int(doc[key]), f"{where}.{key}", "must be an integer")
    _require(doc["x"] >= 0 and doc["y"] >= 0, f"{where}", "x and y must be >= 0")
    _require(doc["w"] > 0 and doc["h"] > 0, f"{where}", "w and h must be > 0")
    box = RegionBox(doc["role"], doc["part"], doc["x"], doc["y"], doc["w"], doc["h"])
    if frame_size is not None:
        fw, fh = frame_size
        if box.x + box.w > fw or box.y + box.h > fh:
            raise BoundsError(
                f"{where}: box {box.x},{box.y} {box.w}x{box.h} exceeds frame {fw}x{fh}"
            )
    return box


def _parse_keypoints(doc, where: str) -> KeypointSet:
    _require(isinstance(doc, dict), where, "keypoint set must be an object")
    _require("role" in doc, f"{where}.role", "missing field")
    _require(doc["role"] in ROLES, f"{where}.role",
             f"expected one of {ROLES}, got {doc['role']!r}")
    pts = doc.get("points")
    _require(isinstance(pts, list), f"{where}.points", "missing or not a list")
    _require(len(pts) == N_KEYPOINTS, f"{where}.points",
             f"expected {N_KEYPOINTS} points, got {len(pts)}")
    out = np.empty((N_KEYPOINTS, 3), dtype=np.float32)
    for i, p in enumerate(pts):
        _require(isinstance(p, list) and len(p) == 3, f"{where}.points[{i}]",
                 "expected [x, y, confidence]")
        _require(all(_is_num(v) for v in p), f"{where}.points[{i}]",
                 "coordinates must be finite numbers")
        _require(0.0 <= p[2] <= 1.0, f"{where}.points[{i}]",
                 f"confidence must be in [0, 1], got {p[2]}")
        out[i] = p
    out.flags.writeable = False
    return KeypointSet(doc["role"], out)


def parse_annotation(doc, frame_size: tuple[int, int] | None = None) -> ClipAnnotation:
    """Validate a decoded annotation document and build a ClipAnnotation.

    ``frame_size`` — (width, height) — enables box bounds checking; the
    JSON schema itself carries no frame extents.
    """
    _require(isinstance(doc, dict), "document", "must be a JSON object")
    _require(isinstance(doc.get("clip_id"), str) and doc["clip_id"] != "",
             "clip_id", "must be a non-empty string")
    _require(_is_num(doc.get("fps")) and doc["fps"] > 0, "fps",
             "must be a positive number")
    _require(doc.get("label") in LABELS, "label",
             f"expected one of {LABELS}, got {doc.get('label')!r}")
    _require(isinstance(doc.get("frames"), list), "frames", "must be a list")

    frames = []
    prev_index = -1
    for fi, fdoc in enumerate(doc["frames"]):
        where = f"frames[{fi}]"
        _require(isinstance(fdoc, dict), where, "must be an object")
        _require(_is_int(fdoc.get("index")), f"{where}.index", "must be an integer")
        _require(fdoc["index"] >= 0, f"{where}.index", "must be >= 0")
        _require(fdoc["index"] > prev_index, f"{where}.index",
                 "frame indices must be strictly increasing")
        prev_index = fdoc["index"]

        boxes = []
        seen = set()
        for bi, bdoc in enumerate(fdoc.get("boxes", [])):
            box = _parse_box(bdoc, f"{where}.boxes[{bi}]", frame_size)
            key = (box.role, box.part)
            _require(key not in seen, f"{where}.boxes[{bi}]",
                     f"duplicate box for ({box.role}, {box.part})")
            seen.add(key)
            boxes.append(box)

        keypoints = [
            _parse_keypoints(kdoc, f"{where}.keypoints[{ki}]")
            for ki, kdoc in enumerate(fdoc.get("keypoints", []))
        ]
        frames.append(FrameAnnotation(fdoc["index"], tuple(boxes), tuple(keypoints)))

    return ClipAnnotation(doc["clip_id"], float(doc["fps"]), doc["label"], tuple(frames))


def read_annotation(path, frame_size: tuple[int, int] | None = None) -> ClipAnnotation:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: not valid JSON ({exc})") from exc
    return parse_annotation(doc, frame_size)


def annotation_to_dict(ann: ClipAnnotation) -> dict:
    return {
        "clip_id": ann.clip_id,
        "fps": ann.fps,
        "label": ann.label,
        "frames": [
            {
                "index": f.index,
                "boxes": [
                    {"role": b.role, "part": b.part,
                     "x": b.x, "y": b.y, "w": b.w, "h": b.h}
                    for b in f.boxes
                ],
                "keypoints": [
                    {"role": k.role,
                     "points": [[float(x), float(y), float(c)] for x, y, c in k.points]}
                    for k in f.keypoints
                ],
            }
            for f in ann.frames
        ],
    }


def write_annotation(ann: ClipAnnotation, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(annotation_to_dict(ann), fh, indent=2)
        fh.write("\n")

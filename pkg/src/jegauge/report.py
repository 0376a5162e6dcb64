"""Annotation-agreement and classification metrics, plus report rollups.

Ratings are items x raters matrices on the [-2, 2] engagement scale.
Intraclass correlation uses the two-way mixed, consistency definition in
both its single-rater and average-rater forms; the caller must pick one
explicitly. Mean ratings convert to low/mid/high classes by thresholds.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .annotations import LABELS
from .errors import (
    DimensionError,
    UndefinedInputError,
    ValidationError,
)
from .matching import METRICS, check_same_config

ICC_FORMS = ("single", "average")

DEFAULT_THRESHOLDS = (-0.5, 0.5)


def check_ratings(ratings: np.ndarray) -> np.ndarray:
    arr = np.asarray(ratings, dtype=np.float64)
    if arr.ndim != 2:
        raise DimensionError(f"ratings: expected (items, raters), got {arr.shape}")
    n, k = arr.shape
    if n < 2 or k < 2:
        raise ValidationError(f"ratings: need >= 2 items and >= 2 raters, got {n}x{k}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("ratings: missing or non-finite cells")
    return arr


def icc_consistency(ratings: np.ndarray, form: str = "single") -> float:
    """Two-way mixed, consistency intraclass correlation.

    From the two-way decomposition with between-items mean square BMS and
    residual mean square EMS over k raters:

        single  -> (BMS - EMS) / (BMS + (k - 1) * EMS)
        average -> (BMS - EMS) / BMS

    Rater offsets cancel (consistency ignores rater means). Raises when
    the form's denominator is zero (no variance across items).
    """
    if form not in ICC_FORMS:
        raise ValidationError(f"form must be one of {ICC_FORMS}, got {form!r}")
    arr = check_ratings(ratings)
    n, k = arr.shape
    grand = arr.mean()
    row_means = arr.mean(axis=1)
    col_means = arr.mean(axis=0)
    ss_total = float(np.sum((arr - grand) ** 2))
    ss_rows = float(k * np.sum((row_means - grand) ** 2))
    ss_cols = float(n * np.sum((col_means - grand) ** 2))
    ss_err = ss_total - ss_rows - ss_cols
    bms = ss_rows / (n - 1)
    ems = ss_err / ((n - 1) * (k - 1))
    denom = bms if form == "average" else bms + (k - 1) * ems
    if denom == 0.0:
        raise UndefinedInputError("ICC undefined: zero variance across items")
    return (bms - ems) / denom


def class_from_rating(mean_rating: float, thresholds=DEFAULT_THRESHOLDS) -> str:
    """Map a mean rating to low/mid/high; boundaries belong to mid."""
    t_low, t_high = thresholds
    if not t_low < t_high:
        raise ValidationError(f"thresholds must satisfy t_low < t_high, got {thresholds}")
    if mean_rating < t_low:
        return "low"
    if mean_rating > t_high:
        return "high"
    return "mid"


@dataclass(frozen=True, eq=False)
class PredictionRecord:
    clip_id: str
    logits: np.ndarray  # (3,) float, ordered (low, mid, high)
    true_label: str

    def __post_init__(self):
        arr = np.asarray(self.logits, dtype=np.float64)
        if arr.shape != (len(LABELS),):
            raise DimensionError(f"logits: expected {len(LABELS)} values, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValidationError("logits: values must be finite")
        if self.true_label not in LABELS:
            raise ValidationError(f"unknown label {self.true_label!r}")
        object.__setattr__(self, "logits", arr)


def top1_accuracy(preds) -> float:
    """Fraction of records whose argmax logit matches the true label.

    Ties break toward the lowest index (low < mid < high).
    """
    preds = list(preds)
    if not preds:
        raise UndefinedInputError("top1_accuracy: no predictions")
    hits = sum(
        1 for p in preds if int(np.argmax(p.logits)) == LABELS.index(p.true_label)
    )
    return hits / len(preds)


def mean_ce_loss(preds) -> float:
    """Mean negative log softmax probability of the true label (nats)."""
    preds = list(preds)
    if not preds:
        raise UndefinedInputError("mean_ce_loss: no predictions")
    losses = []
    for p in preds:
        z = p.logits - p.logits.max()
        log_softmax = z - np.log(np.sum(np.exp(z)))
        losses.append(-log_softmax[LABELS.index(p.true_label)])
    return float(np.mean(losses))


@dataclass(frozen=True)
class SummaryRow:
    group: str
    metric: str
    role: str
    part: str
    mean: float
    std: float
    n: int


def aggregate_reports(reports, groups=None) -> list[SummaryRow]:
    """Roll clip reports up into per-group summary rows.

    ``groups`` labels each report (e.g. the dataset variant it came
    from); all reports must share the same scoring config. For each
    (group, metric, role, part) the row holds the mean of the clip-level
    means, their population std, and the number of contributing clips.
    Rows come out in lexicographic order.
    """
    reports = list(reports)
    check_same_config(reports)
    if groups is None:
        groups = ["all"] * len(reports)
    groups = list(groups)
    if len(groups) != len(reports):
        raise DimensionError(f"{len(groups)} groups for {len(reports)} reports")

    cells: dict[tuple[str, str, str, str], list[float]] = {}
    for group, rep in zip(groups, reports):
        for metric in METRICS:
            for role, parts in rep.aggregate.get(metric, {}).items():
                for part, stats in parts.items():
                    cells.setdefault((group, metric, role, part), []).append(
                        float(stats["mean"])
                    )
    rows = []
    for key in sorted(cells):
        values = np.asarray(cells[key], dtype=np.float64)
        rows.append(
            SummaryRow(*key, mean=float(values.mean()), std=float(values.std()),
                       n=len(values))
        )
    return rows


# --- CSV plumbing -------------------------------------------------------------


def read_labels_csv(path):
    """`clip_id,label` rows -> list of LabelRecord."""
    from .augment import LabelRecord

    records = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip() for c in header[:2]] != ["clip_id", "label"]:
            raise ValidationError(f"{path}: expected header 'clip_id,label'")
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) < 2:
                raise ValidationError(f"{path}:{line_no}: expected 'clip_id,label'")
            records.append(LabelRecord(row[0].strip(), row[1].strip()))
    return records


def read_ratings_csv(path) -> np.ndarray:
    """`item_id,rater1,rater2[,...]` rows -> (items, raters) matrix."""
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or len(header) < 3 or header[0].strip() != "item_id":
            raise ValidationError(
                f"{path}: expected header 'item_id,rater1,rater2[,...]'"
            )
        width = len(header)
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != width:
                raise ValidationError(f"{path}:{line_no}: expected {width} columns")
            try:
                rows.append([float(v) for v in row[1:]])
            except ValueError as exc:
                raise ValidationError(f"{path}:{line_no}: non-numeric rating") from exc
    if not rows:
        raise ValidationError(f"{path}: no rating rows")
    return np.asarray(rows, dtype=np.float64)


def read_predictions_csv(path):
    """`clip_id,logit_low,logit_mid,logit_high,label` -> PredictionRecords."""
    expected = ["clip_id", "logit_low", "logit_mid", "logit_high", "label"]
    records = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip() for c in header] != expected:
            raise ValidationError(f"{path}: expected header {','.join(expected)}")
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 5:
                raise ValidationError(f"{path}:{line_no}: expected 5 columns")
            try:
                logits = [float(v) for v in row[1:4]]
            except ValueError as exc:
                raise ValidationError(f"{path}:{line_no}: non-numeric logit") from exc
            records.append(PredictionRecord(row[0].strip(), np.asarray(logits),
                                            row[4].strip()))
    if not records:
        raise ValidationError(f"{path}: no prediction rows")
    return records


def write_summary_csv(rows, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["group", "metric", "role", "part", "mean", "std", "n"])
        for r in rows:
            writer.writerow(
                [r.group, r.metric, r.role, r.part, repr(r.mean), repr(r.std), r.n]
            )

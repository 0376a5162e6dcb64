"""Command-line front end: one subcommand per pipeline stage.

Exit codes: 0 success, 2 validation error, 3 I/O or resource error,
4 incompatible inputs.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import augment as aug
from . import gradcam as gc
from . import matching, refmaps, report as rpt
from .annotations import ClipAnnotation, read_annotation, write_annotation
from .errors import (
    IncompatibleReportsError,
    ResourceError,
    ValidationError,
)
from .tensorio import read_frame_pnm, read_tensor, write_frame_pnm, write_tensor

FRAME_EXTENSIONS = (".pgm", ".ppm", ".pnm")


def _parse_size(text: str) -> tuple[int, int]:
    m = re.fullmatch(r"(\d+)x(\d+)", text)
    if not m:
        raise ValidationError(f"--size expects WxH (e.g. 224x224), got {text!r}")
    w, h = int(m.group(1)), int(m.group(2))
    if w < 1 or h < 1:
        raise ValidationError(f"--size extents must be >= 1, got {text!r}")
    return w, h


def _parse_csv_list(text: str, allowed, flag: str) -> tuple[str, ...]:
    items = tuple(t.strip() for t in text.split(",") if t.strip())
    for item in items:
        if item not in allowed:
            raise ValidationError(f"{flag}: unknown value {item!r}, allowed {allowed}")
    if not items:
        raise ValidationError(f"{flag}: empty list")
    return items


def _stem_index(path: Path):
    m = re.search(r"(\d+)$", path.stem)
    return int(m.group(1)) if m else None


def _pattern_path(pattern: str, index: int) -> Path:
    try:
        rendered = pattern % index
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"bad file pattern {pattern!r}: {exc}") from exc
    if rendered == pattern % (index + 1):
        raise ValidationError(f"file pattern {pattern!r} ignores the frame index")
    return Path(rendered)


def _list_frames(directory: str) -> list[Path]:
    root = Path(directory)
    if not root.is_dir():
        raise FileNotFoundError(f"frame directory {directory!r} not found")
    files = sorted(p for p in root.iterdir() if p.suffix.lower() in FRAME_EXTENSIONS)
    if not files:
        raise ValidationError(f"no PGM/PPM frames in {directory!r}")
    return files


def _index_maps(directory: str) -> dict[int, Path]:
    root = Path(directory)
    if not root.is_dir():
        raise FileNotFoundError(f"map directory {directory!r} not found")
    out = {}
    for path in sorted(root.glob("*.gct")):
        idx = _stem_index(path)
        if idx is not None:
            out[idx] = path
    if not out:
        raise ValidationError(f"no indexed .gct maps in {directory!r}")
    return out


def _to_gray(frame: np.ndarray) -> np.ndarray:
    if frame.ndim == 2:
        return frame
    return (frame.astype(np.float64) @ (0.299, 0.587, 0.114)).astype(np.float32) / 255.0


def _read_unit_map(path, name: str) -> np.ndarray:
    arr = read_tensor(path)
    if arr.ndim != 2 or arr.dtype != np.float32:
        raise ValidationError(f"{name} {path}: expected float32 [H,W] map")
    return arr


# --- subcommand bodies --------------------------------------------------------


def cmd_gradcam(args) -> int:
    activations = read_tensor(args.activations)
    gradients = read_tensor(args.gradients)
    raw = gc.compute_gradcam(activations, gradients)
    if args.size:
        w, h = _parse_size(args.size)
        raw = gc.upsample_bilinear(raw, w, h)
    cam = gc.normalize_map(raw)
    write_tensor(cam, args.out)
    if args.render:
        write_frame_pnm(gc.render_colormap(cam), args.render)
    return 0


def cmd_flow(args) -> int:
    files = _list_frames(args.frames)
    if len(files) < 2:
        raise ValidationError("flow needs at least two frames")
    frames = [_to_gray(read_frame_pnm(p)) for p in files]

    def work(i):
        flow = refmaps.horn_schunck_flow(
            frames[i], frames[i + 1], args.smoothness, args.iters
        )
        return flow, refmaps.flow_magnitude(flow)

    pairs = range(len(frames) - 1)
    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(work, pairs))
    else:
        results = [work(i) for i in pairs]

    for i, (flow, mag) in zip(pairs, results):
        index = _stem_index(files[i])
        if index is None:
            index = i
        write_tensor(mag, _pattern_path(args.out_mag, index))
        if args.out_flow:
            write_tensor(flow, _pattern_path(args.out_flow, index))
    return 0


def cmd_semref(args) -> int:
    ann = read_annotation(args.ann)
    table = refmaps.load_part_weights(args.weights) if args.weights \
        else refmaps.default_part_weights()
    size = _parse_size(args.size) if args.size else None
    for frame in ann.frames:
        seg = None
        if args.seg:
            seg_path = _pattern_path(args.seg, frame.index)
            if seg_path.exists():
                seg = read_tensor(seg_path)
                if seg.ndim != 2 or seg.dtype != np.uint8:
                    raise ValidationError(f"{seg_path}: expected uint8 [H,W] mask")
        if seg is not None:
            height, width = seg.shape
        elif size is not None:
            width, height = size
        else:
            raise ValidationError(
                f"frame {frame.index}: no segment mask and no --size given"
            )
        sigma = args.sigma * width / refmaps.SIGMA_REFERENCE_WIDTH
        heat = refmaps.keypoint_heatmap(frame.keypoints, table, sigma, width, height)
        ref = heat if seg is None else refmaps.combine_semantic(heat, seg, table)
        write_tensor(ref, _pattern_path(args.out, frame.index))
    return 0


def cmd_score(args) -> int:
    ann = read_annotation(args.ann)
    cam_maps = _index_maps(args.cam)
    motion_maps = _index_maps(args.motion)
    semantic_maps = _index_maps(args.semantic)
    cfg = matching.ScoringConfig(
        alpha=args.alpha,
        bins=args.bins,
        roles=_parse_csv_list(args.roles, matching.ROLES, "--roles"),
        parts=_parse_csv_list(args.parts, matching.PARTS, "--parts"),
    )
    frames = []
    indices = []
    # stream semantics: stop at the first frame any input runs out of
    for fa in ann.frames:
        if not (fa.index in cam_maps and fa.index in motion_maps
                and fa.index in semantic_maps):
            break
        frames.append(
            (
                _read_unit_map(cam_maps[fa.index], "cam"),
                _read_unit_map(motion_maps[fa.index], "motion"),
                _read_unit_map(semantic_maps[fa.index], "semantic"),
                fa.boxes,
            )
        )
        indices.append(fa.index)
    if not frames:
        raise ValidationError(
            "no annotation frame has cam, motion and semantic maps"
        )
    report = matching.score_clip(
        frames, cfg, clip_id=ann.clip_id, indices=indices, jobs=args.jobs
    )
    matching.write_report(report, args.out)
    return 0


def _build_augment_op(args):
    if args.op == "cutout":
        return aug.Cutout(_parse_csv_list(args.parts, matching.PARTS, "--parts"))
    if args.op == "bg-solid":
        rgb = [t.strip() for t in args.color.split(",")]
        if len(rgb) != 3 or not all(t.isdigit() for t in rgb):
            raise ValidationError(f"--color expects R,G,B integers, got {args.color!r}")
        return aug.BgSolid(*(int(t) for t in rgb))
    if args.op == "bg-image":
        if not args.bg_image:
            raise ValidationError("--op bg-image requires --bg-image PATH")
        path = Path(args.bg_image)
        if not path.exists():
            raise ResourceError(f"background image {args.bg_image!r} not found")
        return aug.BgImage(read_frame_pnm(path))
    if args.op == "bg-blur":
        return aug.BgBlur(args.radius)
    if args.op == "noise":
        return aug.Noise(args.sigma, args.seed)
    if args.op == "rotate":
        if args.random:
            return None  # per-frame angle drawn below
        return aug.Rotate(args.degrees)
    if args.op == "hflip":
        return aug.HFlip()
    raise ValidationError(f"unknown op {args.op!r}")


def cmd_augment(args) -> int:
    files = _list_frames(args.frames)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    ann = read_annotation(args.ann) if args.ann else None
    by_index = {f.index: f for f in ann.frames} if ann else {}
    op = _build_augment_op(args)

    def frame_entry(path: Path, position: int):
        idx = _stem_index(path)
        return by_index.get(idx if idx is not None else position)

    def angle_for(index: int) -> float:
        rng = np.random.default_rng([args.seed, index])
        return float(rng.uniform(-args.max_degrees, args.max_degrees))

    flipped_entries = {}

    def work(item):
        position, path = item
        frame = read_frame_pnm(path)
        entry = frame_entry(path, position)
        boxes = entry.boxes if entry else ()
        if isinstance(op, aug.Cutout):
            return aug.apply_cutout(frame, boxes, op.parts), None
        idx = _stem_index(path)
        if idx is None:
            idx = position
        if isinstance(op, (aug.BgSolid, aug.BgImage, aug.BgBlur)):
            seg = None
            if args.seg:
                seg_path = _pattern_path(args.seg, idx)
                if seg_path.exists():
                    seg = read_tensor(seg_path)
            if seg is None and not boxes:
                raise ValidationError(
                    f"{path.name}: background op needs a segment mask or boxes"
                )
            return aug.apply_background(frame, op, seg=seg, boxes=boxes or None), None
        if isinstance(op, aug.Noise):
            # per-frame stream so output is independent of worker count
            return aug.add_gaussian_noise(frame, op.sigma, (args.seed, idx)), None
        if isinstance(op, aug.Rotate) or (args.op == "rotate" and op is None):
            degrees = op.degrees if op else angle_for(idx)
            return aug.rotate(frame, degrees), None
        if isinstance(op, aug.HFlip):
            flipped, new_entry = aug.hflip(frame, entry)
            return flipped, new_entry
        raise ValidationError(f"unhandled op {args.op!r}")

    items = list(enumerate(files))
    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(work, items))
    else:
        results = [work(item) for item in items]

    for (position, path), (out_frame, new_entry) in zip(items, results):
        write_frame_pnm(out_frame, out_dir / path.name)
        if new_entry is not None:
            flipped_entries[new_entry.index] = new_entry

    if args.out_ann:
        if ann is None:
            raise ValidationError("--out-ann requires --ann")
        if args.op == "hflip":
            frames = tuple(
                flipped_entries.get(f.index, f) for f in ann.frames
            )
            ann = ClipAnnotation(ann.clip_id, ann.fps, ann.label, frames)
        write_annotation(ann, args.out_ann)
    return 0


def cmd_balance(args) -> int:
    records = rpt.read_labels_csv(args.labels)
    plan = aug.plan_balance(records)
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        fh.write("clip_id,copies\n")
        for clip_id, copies in plan.assignments:
            fh.write(f"{clip_id},{copies}\n")
    total_copies = sum(copies for _, copies in plan.assignments)
    print(json.dumps({
        "duplicates": plan.duplicates,
        "total_duplicates": plan.total_duplicates,
        "per_label_total": total_copies // len(plan.duplicates),
    }))
    return 0


def cmd_mix(args) -> int:
    a = rpt.read_labels_csv(args.a)
    b = rpt.read_labels_csv(args.b)
    plan = aug.plan_mix(a, b, args.total, args.seed)
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        fh.write("clip_id,source\n")
        for clip_id, source in plan.picks:
            fh.write(f"{clip_id},{source}\n")
    print(json.dumps({
        "counts": {label: list(pair) for label, pair in plan.counts.items()},
        "total": len(plan.picks),
        "seed": plan.seed,
    }))
    return 0


def cmd_icc(args) -> int:
    matrix = rpt.read_ratings_csv(args.ratings)
    value = rpt.icc_consistency(matrix, args.form)
    print(json.dumps({
        "icc": value,
        "form": args.form,
        "n_items": matrix.shape[0],
        "n_raters": matrix.shape[1],
    }))
    return 0


def cmd_acc(args) -> int:
    preds = rpt.read_predictions_csv(args.preds)
    print(json.dumps({
        "top1_accuracy": rpt.top1_accuracy(preds),
        "mean_ce_loss": rpt.mean_ce_loss(preds),
        "n": len(preds),
    }))
    return 0


def cmd_report(args) -> int:
    root = Path(args.in_dir)
    if not root.is_dir():
        raise FileNotFoundError(f"report directory {args.in_dir!r} not found")
    paths = sorted(root.rglob("*.json"))
    if not paths:
        raise ValidationError(f"no report JSON files under {args.in_dir!r}")
    reports = [matching.read_report(p) for p in paths]
    if args.group_by == "variant":
        groups = [
            p.parent.relative_to(root).as_posix() if p.parent != root else "all"
            for p in paths
        ]
    else:
        groups = ["all"] * len(paths)
    rows = rpt.aggregate_reports(reports, groups)
    rpt.write_summary_csv(rows, args.out)
    return 0


# --- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jegauge",
        description="Score video-model attention maps against motion and "
        "social-cue reference maps.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gradcam", help="saliency map from activation/gradient tensors")
    p.add_argument("--activations", required=True)
    p.add_argument("--gradients", required=True)
    p.add_argument("--size", help="upsample to WxH before normalizing")
    p.add_argument("--out", required=True)
    p.add_argument("--render", help="also write a jet-colormapped PPM")
    p.set_defaults(func=cmd_gradcam)

    p = sub.add_parser("flow", help="motion magnitude maps from a frame directory")
    p.add_argument("--frames", required=True)
    p.add_argument("--smoothness", type=float, default=0.1)
    p.add_argument("--iters", type=int, default=100)
    p.add_argument("--out-mag", required=True, dest="out_mag",
                   help="output pattern, e.g. mag_%%04d.gct")
    p.add_argument("--out-flow", dest="out_flow",
                   help="optional [2,H,W] flow field pattern")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_flow)

    p = sub.add_parser("semref", help="semantic reference maps from keypoints and masks")
    p.add_argument("--ann", required=True)
    p.add_argument("--seg", help="uint8 mask pattern, e.g. seg_%%04d.gct")
    p.add_argument("--weights", help="part weight table JSON")
    p.add_argument("--sigma", type=float, default=6.0,
                   help="Gaussian sigma at 224-px reference width")
    p.add_argument("--size", help="WxH when no segment masks are given")
    p.add_argument("--out", required=True, help="output pattern, e.g. ref_%%04d.gct")
    p.set_defaults(func=cmd_semref)

    p = sub.add_parser("score", help="score attention maps against both references")
    p.add_argument("--cam", required=True)
    p.add_argument("--motion", required=True)
    p.add_argument("--semantic", required=True)
    p.add_argument("--ann", required=True)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--bins", type=int, default=20)
    p.add_argument("--roles", default="parent,child")
    p.add_argument("--parts", default="face,body")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("augment", help="apply one augmentation op to a frame directory")
    p.add_argument("--frames", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--op", required=True,
                   choices=["cutout", "bg-solid", "bg-image", "bg-blur",
                            "noise", "rotate", "hflip"])
    p.add_argument("--ann", help="annotation JSON supplying boxes/keypoints")
    p.add_argument("--out-ann", dest="out_ann",
                   help="write the (possibly remapped) annotation here")
    p.add_argument("--seg", help="uint8 mask pattern for background ops")
    p.add_argument("--parts", default="face", help="cutout parts (comma list)")
    p.add_argument("--color", default="0,0,0", help="bg-solid R,G,B")
    p.add_argument("--bg-image", dest="bg_image", help="bg-image replacement PPM/PGM")
    p.add_argument("--radius", type=int, default=5, help="bg-blur radius")
    p.add_argument("--sigma", type=float, default=5.0, help="noise sigma")
    p.add_argument("--degrees", type=float, default=0.0, help="rotation angle")
    p.add_argument("--random", action="store_true",
                   help="rotate: draw a per-frame angle instead of --degrees")
    p.add_argument("--max-degrees", dest="max_degrees", type=float, default=15.0,
                   help="rotate --random: uniform angle bound")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("balance", help="oversampling plan equalizing label counts")
    p.add_argument("--labels", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_balance)

    p = sub.add_parser("mix", help="seeded half-and-half sampling plan from two sources")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--total", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_mix)

    p = sub.add_parser("icc", help="intraclass correlation of a ratings matrix")
    p.add_argument("--ratings", required=True)
    p.add_argument("--form", required=True, choices=["single", "average"])
    p.set_defaults(func=cmd_icc)

    p = sub.add_parser("acc", help="top-1 accuracy and cross-entropy of predictions")
    p.add_argument("--preds", required=True)
    p.set_defaults(func=cmd_acc)

    p = sub.add_parser("report", help="roll clip reports up into a summary CSV")
    p.add_argument("--in", required=True, dest="in_dir")
    p.add_argument("--group-by", dest="group_by", default="variant",
                   choices=["variant", "all"])
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except IncompatibleReportsError as exc:
        print(f"jegauge: {exc}", file=sys.stderr)
        return 4
    except ValidationError as exc:
        print(f"jegauge: {exc}", file=sys.stderr)
        return 2
    except (ResourceError, OSError) as exc:
        print(f"jegauge: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

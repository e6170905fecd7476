"""Command-line front end wiring the library into reproducible pipelines.

Every command prints one machine-readable JSON report (stable key order) to
stdout; the only nondeterministic field is ``wall_time``. Configuration
precedence is flags > environment (``ABC_SEED``, ``ABC_LOG``) > defaults.

Exit codes: 0 ok, 2 validation error, 3 I/O error, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time

import numpy as np

from . import decoder as dec
from . import formats, postproc, quant
from .align import SampleGrid
from .codec import decode_targets, encode_targets
from .errors import (
    CorruptFileError,
    DegenerateError,
    IntegerOverflowError,
    ValidationError,
)
from .gt import bbox_fit_report, polygon_to_bbox

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_IO = 3
EXIT_NUMERIC = 4

log = logging.getLogger("beziertext")


def _env_seed(flag_value):
    if flag_value is not None:
        return flag_value
    raw = os.environ.get("ABC_SEED")
    if raw is not None:
        try:
            return int(raw)
        except ValueError as exc:
            raise ValidationError(f"ABC_SEED must be an integer, got {raw!r}") from exc
    return 0


def _report(command: str, parameters: dict, items, started: float) -> dict:
    return {
        "command": command,
        "parameters": parameters,
        "items": items,
        "wall_time": time.perf_counter() - started,
    }


def _emit(report: dict) -> None:
    json.dump(report, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")


# --------------------------------------------------------------------------
#  Commands
# --------------------------------------------------------------------------

def cmd_fit(args) -> dict:
    started = time.perf_counter()
    anns = formats.load_annotations(args.in_json)
    items = []
    fitted = []
    for i, ann in enumerate(anns):
        bbox = polygon_to_bbox(ann, order=args.order)
        stats = bbox_fit_report(bbox, ann)
        fitted.append((bbox, ann.transcript))
        items.append({"index": i, "residual": stats, "transcript": ann.transcript})
    formats.save_bboxes(args.out_json, fitted)
    return _report("fit", {"in": args.in_json, "out": args.out_json, "order": args.order},
                   items, started)


def cmd_render(args) -> dict:
    started = time.perf_counter()
    boxes = formats.load_bboxes(args.bezier_json)
    pts = np.vstack([
        np.vstack([b.top.control_points, b.bottom.control_points]) for b, _, _ in boxes
    ]) if boxes else np.zeros((1, 2))
    margin = 10.0
    size = (float(pts[:, 0].max() + margin), float(pts[:, 1].max() + margin))
    scene = formats.render_bezier_svg([b for b, _, _ in boxes], size=size)
    scene.save(args.out_svg)
    items = [{"index": i, "order": b.order} for i, (b, _, _) in enumerate(boxes)]
    return _report("render", {"in": args.bezier_json, "out": args.out_svg,
                              "size": list(size)}, items, started)


def cmd_rectify(args) -> dict:
    started = time.perf_counter()
    image = formats.read_image(args.image_png)
    boxes = formats.load_bboxes(args.bezier_json)
    grid = SampleGrid(h_out=args.height * args.scale, w_out=args.width * args.scale,
                      pixel_center=args.pixel_center)
    items = []
    for i, (bbox, transcript, _) in enumerate(boxes):
        patch = formats.rectify_image(image, bbox, grid)
        out_path = args.out_png if len(boxes) == 1 else _indexed(args.out_png, i)
        formats.write_image(out_path, patch)
        items.append({"index": i, "out": out_path, "transcript": transcript,
                      "shape": list(patch.shape)})
    return _report("rectify", {"image": args.image_png, "boxes": args.bezier_json,
                               "h": args.height, "w": args.width, "scale": args.scale,
                               "pixel_center": args.pixel_center}, items, started)


def _indexed(path: str, i: int) -> str:
    root, dot, ext = path.rpartition(".")
    return f"{root}_{i}.{ext}" if dot else f"{path}_{i}"


def cmd_codec(args) -> dict:
    started = time.perf_counter()
    boxes = formats.load_bboxes(args.bezier_json)
    items = []
    for i, (bbox, _, _) in enumerate(boxes):
        target = encode_targets(bbox)
        entry = {
            "index": i,
            "x_min": target.x_min,
            "y_min": target.y_min,
            "deltas": [[float(dx), float(dy)] for dx, dy in target.deltas],
        }
        if args.roundtrip:
            back = decode_targets(target, bbox.order)
            err = max(
                np.abs(back.top.control_points - bbox.top.control_points).max(),
                np.abs(back.bottom.control_points - bbox.bottom.control_points).max(),
            )
            # decode(encode) is algebraically the identity; arbitrary float
            # coordinates can pick up 1-ulp re-rounding, so gate at 1e-9 px.
            if err > 1e-9:
                raise DegenerateError(f"roundtrip error {err} on box {i}")
            entry["roundtrip_exact"] = bool(err == 0.0)
            entry["roundtrip_max_error"] = float(err)
        items.append(entry)
    return _report("codec", {"in": args.bezier_json, "roundtrip": args.roundtrip},
                   items, started)


def cmd_nms_assign(args) -> dict:
    started = time.perf_counter()
    det_objs = formats.load_bboxes(args.dets_json)
    gt_objs = formats.load_bboxes(args.gts_json)
    dets = []
    for i, (bbox, _, score) in enumerate(det_objs):
        if score is None:
            raise ValidationError(f"$[{i}]: detection is missing required field 'score'")
        dets.append(postproc.Detection(bbox, score))
    gts = [(bbox, transcript) for bbox, transcript, _ in gt_objs]

    confident = postproc.filter_by_score(dets, args.score_th)
    kept = postproc.nms(confident, args.iou_th)
    assignments = postproc.assign_recognition(kept, gts)
    items = [
        {
            "detection_index": a.detection_index,
            "gt_index": a.gt_index,
            "distance": a.distance,
            "transcript": gts[a.gt_index][1],
        }
        for a in assignments
    ]
    return _report(
        "nms-assign",
        {"dets": args.dets_json, "gts": args.gts_json, "score_th": args.score_th,
         "iou_th": args.iou_th, "n_input": len(dets), "n_confident": len(confident),
         "n_kept": len(kept)},
        items, started)


def _load_finite_tensor(path) -> np.ndarray:
    arr = formats.read_tensor(path).astype(float)
    if not np.isfinite(arr).all():
        raise ValidationError(f"{path}: tensor contains NaN or Inf")
    return arr


def cmd_quant(args) -> dict:
    started = time.perf_counter()
    x = _load_finite_tensor(args.tensor_file)
    spec = quant.QuantSpec(args.bits, alpha_a=args.alpha, alpha_w=args.alpha)
    q, z = (quant.quant_weight if args.weights else quant.quant_act)(x, spec)
    err = q - np.clip(x, -args.alpha if args.weights else 0.0, args.alpha)
    counts, edges = np.histogram(q - x, bins=16)
    item = {
        "bits": args.bits,
        "alpha": args.alpha,
        "weights": args.weights,
        "levels_used": int(len(np.unique(z))),
        "max_clip_region_error": float(np.abs(err).max()),
        "sum_squared_error": quant.discretization_error(x, spec, weights=args.weights),
        "histogram": {"counts": counts.tolist(),
                      "edges": [float(e) for e in edges]},
        "memory_saving": quant.memory_saving(args.bits),
    }
    if args.check_against:
        other = _load_finite_tensor(args.check_against)
        _, _, max_diff = quant.int_matmul_check(x, other, spec)
        item["int_reorder_max_abs_diff"] = max_diff
        table = quant.ENERGY_PJ
        if args.energy_table:
            with open(args.energy_table, encoding="utf-8") as fh:
                table = quant.load_energy_table(json.load(fh))
        n, k = x.shape
        m = other.shape[1]
        muls, adds = n * k * m, n * max(k - 1, 0) * m
        item["matmul_energy_pj"] = {
            "float": quant.energy_estimate(
                {"32-bit floating-point MULT": muls, "32-bit floating-point ADD": adds},
                table),
            "fixed": quant.energy_estimate(
                {"32-bit Fixed-point MULT": muls, "32-bit Fixed-point ADD": adds},
                table),
        }
        item["speedup_vs_fp16"] = (quant.speedup_estimate(args.bits)
                                   if args.bits in quant.OPS_PER_CYCLE else None)
    return _report("quant", {"tensor": args.tensor_file,
                             "check_against": args.check_against,
                             "energy_table": args.energy_table}, [item], started)


def cmd_decode(args) -> dict:
    started = time.perf_counter()
    seed = _env_seed(args.seed)
    feats = _load_finite_tensor(args.feats_tensor)
    if feats.ndim != 2:
        raise ValidationError(f"feature tensor must be rank 2, got rank {feats.ndim}")
    params = dec.load_params(args.params_manifest)
    charset = dec.ENGLISH if args.charset == "en" else dec.BILINGUAL
    symbols = dec.decode_sequence(feats, params, charset, max_steps=args.max_steps,
                                  rng_seed=seed)
    item = {"symbols": symbols, "length": len(symbols),
            "stopped_early": len(symbols) < args.max_steps}
    return _report("decode", {"feats": args.feats_tensor, "manifest": args.params_manifest,
                              "charset": args.charset, "max_steps": args.max_steps,
                              "seed": seed}, [item], started)


# --------------------------------------------------------------------------
#  Argument parsing and dispatch
# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="beziertext",
        description="Bezier text geometry toolbox: fitting, rendering, "
                    "rectification, codecs, NMS/assignment, quantization, decoding.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit polygon annotations with Bezier boxes")
    p.add_argument("in_json")
    p.add_argument("out_json")
    p.add_argument("--order", type=int, default=3, choices=(3, 4, 5))
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("render", help="render Bezier boxes to SVG")
    p.add_argument("bezier_json")
    p.add_argument("out_svg")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("rectify", help="warp curved regions to straight patches")
    p.add_argument("image_png")
    p.add_argument("bezier_json")
    p.add_argument("out_png")
    p.add_argument("--h", dest="height", type=int, default=32)
    p.add_argument("--w", dest="width", type=int, default=8)
    p.add_argument("--scale", type=int, default=1)
    p.add_argument("--pixel-center", action="store_true")
    p.set_defaults(func=cmd_rectify)

    p = sub.add_parser("codec", help="encode boxes as corner-relative offsets")
    p.add_argument("bezier_json")
    p.add_argument("--roundtrip", action="store_true")
    p.set_defaults(func=cmd_codec)

    p = sub.add_parser("nms-assign", help="filter, suppress and assign recognition targets")
    p.add_argument("dets_json")
    p.add_argument("gts_json")
    p.add_argument("--score-th", type=float, default=0.5)
    p.add_argument("--iou-th", type=float, default=0.5)
    p.set_defaults(func=cmd_nms_assign)

    p = sub.add_parser("quant", help="quantize a tensor and report the error")
    p.add_argument("tensor_file")
    p.add_argument("--bits", type=int, default=4)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--weights", action="store_true")
    p.add_argument("--check-against", default=None,
                   help="second tensor for the integer-reordering matmul check")
    p.add_argument("--energy-table", default=None,
                   help="JSON file overriding the built-in per-op energy constants")
    p.set_defaults(func=cmd_quant)

    p = sub.add_parser("decode", help="greedy attention decoding demo")
    p.add_argument("feats_tensor")
    p.add_argument("params_manifest")
    p.add_argument("--charset", choices=("en", "bilingual"), default="en")
    p.add_argument("--max-steps", type=int, default=25)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_decode)

    return parser


def main(argv=None) -> int:
    level = os.environ.get("ABC_LOG", "WARNING").upper()
    if level not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
        level = "WARNING"
    logging.basicConfig(
        level=level,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report = args.func(args)
    except ValidationError as exc:
        log.error("validation: %s", exc)
        return EXIT_VALIDATION
    except (CorruptFileError, OSError, json.JSONDecodeError) as exc:
        log.error("i/o: %s", exc)
        return EXIT_IO
    except (DegenerateError, IntegerOverflowError, np.linalg.LinAlgError) as exc:
        log.error("numeric: %s", exc)
        return EXIT_NUMERIC
    _emit(report)
    return EXIT_OK


def entrypoint() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()

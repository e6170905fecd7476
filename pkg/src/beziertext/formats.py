"""File formats: the TNSR tensor container, annotation / Bezier-box JSON,
PNG raster import/export, and SVG curve rendering.

TNSR layout (little-endian regardless of host): magic bytes ``TNSR``, one
version byte (1), u32 rank, rank u32 dims, then product(dims) float32 values
in row-major order. Rank 0 is rejected. All writers are deterministic:
identical inputs produce byte-identical files.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field

import numpy as np
from PIL import Image

from .align import SampleGrid, bezier_align
from .bezier import BezierCurve
from .errors import CorruptFileError, ValidationError
from .gt import BezierBBox, PolygonAnnotation

TENSOR_MAGIC = b"TNSR"
TENSOR_VERSION = 1


def write_tensor(path, arr) -> None:
    """Write an array as a TNSR file (float32 payload)."""
    arr = np.asarray(arr)
    if arr.ndim == 0:
        raise ValidationError("rank-0 tensors are not representable")
    data = np.ascontiguousarray(arr, dtype="<f4")
    with open(path, "wb") as fh:
        fh.write(TENSOR_MAGIC)
        fh.write(struct.pack("<B", TENSOR_VERSION))
        fh.write(struct.pack("<I", arr.ndim))
        fh.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
        fh.write(data.tobytes())


def read_tensor(path) -> np.ndarray:
    """Read a TNSR file back as a float32 array; write/read round-trips are
    bit-identical."""
    with open(path, "rb") as fh:
        blob = fh.read()
    head = 4 + 1 + 4
    if len(blob) < head or blob[:4] != TENSOR_MAGIC:
        raise CorruptFileError(f"{path}: not a TNSR file (bad magic)")
    if blob[4] != TENSOR_VERSION:
        raise CorruptFileError(f"{path}: unsupported TNSR version {blob[4]}")
    (rank,) = struct.unpack_from("<I", blob, 5)
    if rank == 0:
        raise CorruptFileError(f"{path}: rank-0 tensor is forbidden")
    if len(blob) < head + 4 * rank:
        raise CorruptFileError(f"{path}: truncated dimension list")
    dims = struct.unpack_from(f"<{rank}I", blob, head)
    count = 1
    for d in dims:
        count *= d
    payload = blob[head + 4 * rank:]
    if len(payload) != 4 * count:
        raise CorruptFileError(
            f"{path}: payload holds {len(payload)} bytes, expected {4 * count}"
        )
    return np.frombuffer(payload, dtype="<f4").reshape(dims).copy()


# --------------------------------------------------------------------------
#  JSON schemas
# --------------------------------------------------------------------------

def _point_list(obj, where: str) -> np.ndarray:
    if not isinstance(obj, list) or not obj:
        raise ValidationError(f"{where}: expected a non-empty list of [x, y] pairs")
    for k, item in enumerate(obj):
        if (not isinstance(item, list) or len(item) != 2
                or not all(isinstance(v, (int, float)) for v in item)):
            raise ValidationError(f"{where}[{k}]: expected an [x, y] number pair")
    return np.asarray(obj, dtype=float)


def _require(obj: dict, key: str, where: str):
    if key not in obj:
        raise ValidationError(f"{where}: missing required field {key!r}")
    return obj[key]


def parse_annotations(data, where: str = "$") -> list[PolygonAnnotation]:
    """Validate and decode the annotation JSON schema:
    [{"points": [[x,y],...], "transcript": "...", "language": "en"|null}, ...]."""
    if not isinstance(data, list):
        raise ValidationError(f"{where}: expected a list of annotation objects")
    out = []
    for i, item in enumerate(data):
        loc = f"{where}[{i}]"
        if not isinstance(item, dict):
            raise ValidationError(f"{loc}: expected an object")
        points = _point_list(_require(item, "points", loc), f"{loc}.points")
        transcript = item.get("transcript", "")
        if not isinstance(transcript, str):
            raise ValidationError(f"{loc}.transcript: expected a string")
        language = item.get("language")
        if language is not None and not isinstance(language, str):
            raise ValidationError(f"{loc}.language: expected a string or null")
        try:
            out.append(PolygonAnnotation(points, transcript, language))
        except ValidationError as exc:
            raise ValidationError(f"{loc}: {exc}") from exc
    return out


def load_annotations(path) -> list[PolygonAnnotation]:
    with open(path, encoding="utf-8") as fh:
        return parse_annotations(json.load(fh))


def bbox_to_obj(bbox: BezierBBox, transcript: str = "", score: float | None = None) -> dict:
    obj = {
        "order": bbox.order,
        "top": [[float(x), float(y)] for x, y in bbox.top.control_points],
        "bottom": [[float(x), float(y)] for x, y in bbox.bottom.control_points],
        "transcript": transcript,
    }
    if score is not None:
        obj["score"] = float(score)
    return obj


def bbox_from_obj(item, where: str = "$") -> tuple[BezierBBox, str, float | None]:
    if not isinstance(item, dict):
        raise ValidationError(f"{where}: expected an object")
    order = _require(item, "order", where)
    if not isinstance(order, int) or order < 1:
        raise ValidationError(f"{where}.order: expected a positive integer")
    curves = {}
    for side in ("top", "bottom"):
        pts = _point_list(_require(item, side, where), f"{where}.{side}")
        if len(pts) != order + 1:
            raise ValidationError(
                f"{where}.{side}: expected {order + 1} control points, got {len(pts)}"
            )
        curves[side] = BezierCurve(pts)
    transcript = item.get("transcript", "")
    if not isinstance(transcript, str):
        raise ValidationError(f"{where}.transcript: expected a string")
    score = item.get("score")
    if score is not None:
        if not isinstance(score, (int, float)):
            raise ValidationError(f"{where}.score: expected a number")
        score = float(score)
    return BezierBBox(curves["top"], curves["bottom"]), transcript, score


def parse_bboxes(data, where: str = "$") -> list[tuple[BezierBBox, str, float | None]]:
    if not isinstance(data, list):
        raise ValidationError(f"{where}: expected a list of box objects")
    return [bbox_from_obj(item, f"{where}[{i}]") for i, item in enumerate(data)]


def load_bboxes(path) -> list[tuple[BezierBBox, str, float | None]]:
    with open(path, encoding="utf-8") as fh:
        return parse_bboxes(json.load(fh))


def save_bboxes(path, items) -> None:
    """items: iterable of (bbox, transcript) or (bbox, transcript, score)."""
    objs = [bbox_to_obj(*item) for item in items]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(objs, fh, indent=2, sort_keys=True)
        fh.write("\n")


# --------------------------------------------------------------------------
#  Raster images (PNG, 8-bit, values scaled from [0, 1] reals)
# --------------------------------------------------------------------------

def read_image(path) -> np.ndarray:
    """PNG to a (C, H, W) float array in [0, 1]; C is 1 or 3."""
    with Image.open(path) as img:
        if img.mode not in ("L", "RGB"):
            img = img.convert("RGB")
        arr = np.asarray(img, dtype=float) / 255.0
    if arr.ndim == 2:
        arr = arr[None]
    else:
        arr = arr.transpose(2, 0, 1)
    return arr


def write_image(path, arr) -> None:
    """(C, H, W) float array in [0, 1] to PNG (grayscale or RGB)."""
    arr = np.asarray(arr, dtype=float)
    if arr.ndim != 3 or arr.shape[0] not in (1, 3):
        raise ValidationError(f"expected a (1|3, H, W) image array, got shape {arr.shape}")
    data = np.clip(np.rint(arr * 255.0), 0, 255).astype(np.uint8)
    if data.shape[0] == 1:
        img = Image.fromarray(data[0], mode="L")
    else:
        img = Image.fromarray(data.transpose(1, 2, 0), mode="RGB")
    img.save(path, format="PNG")


def rectify_image(image, bbox: BezierBBox, grid: SampleGrid = SampleGrid(),
                  scale: float = 1.0) -> np.ndarray:
    """Straighten the curved region of a raster image onto the output grid."""
    return np.clip(bezier_align(image, bbox, grid, scale=scale), 0.0, 1.0)


# --------------------------------------------------------------------------
#  SVG rendering
# --------------------------------------------------------------------------

def _fmt(v: float) -> str:
    if not np.isfinite(v):
        raise ValidationError("SVG coordinates must be finite")
    return f"{v:.3f}".rstrip("0").rstrip(".")


@dataclass
class SvgScene:
    """Layered vector scene serializing to deterministic XML bytes."""

    width: float
    height: float
    elements: list[str] = field(default_factory=list)

    def add_polyline(self, points, stroke: str, dashed: bool = False,
                     width: float = 1.0, closed: bool = False) -> None:
        coords = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in points)
        tag = "polygon" if closed else "polyline"
        dash = ' stroke-dasharray="4,3"' if dashed else ""
        self.elements.append(
            f'<{tag} points="{coords}" fill="none" stroke="{stroke}"'
            f' stroke-width="{_fmt(width)}"{dash}/>'
        )

    def add_path(self, d: str, stroke: str, width: float = 1.0) -> None:
        self.elements.append(
            f'<path d="{d}" fill="none" stroke="{stroke}" stroke-width="{_fmt(width)}"/>'
        )

    def add_circle(self, cx: float, cy: float, r: float, fill: str) -> None:
        self.elements.append(
            f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="{_fmt(r)}" fill="{fill}"/>'
        )

    def add_text(self, x: float, y: float, text: str, fill: str = "black") -> None:
        safe = text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
        self.elements.append(f'<text x="{_fmt(x)}" y="{_fmt(y)}" fill="{fill}">{safe}</text>')

    def to_xml(self) -> str:
        body = "\n".join(f"  {el}" for el in self.elements)
        return (
            '<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(self.width)}"'
            f' height="{_fmt(self.height)}" viewBox="0 0 {_fmt(self.width)} {_fmt(self.height)}">\n'
            f"{body}\n</svg>\n"
        )

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_xml())


def _curve_path(curve: BezierCurve) -> str:
    cps = curve.control_points
    x0, y0 = cps[0]
    if curve.order == 3:
        segs = " ".join(f"{_fmt(x)} {_fmt(y)}" for x, y in cps[1:])
        return f"M {_fmt(x0)} {_fmt(y0)} C {segs}"
    if curve.order == 2:
        segs = " ".join(f"{_fmt(x)} {_fmt(y)}" for x, y in cps[1:])
        return f"M {_fmt(x0)} {_fmt(y0)} Q {segs}"
    # SVG has no native command beyond cubic; emit a dense polyline.
    pts = curve.points(np.linspace(0.0, 1.0, 64))
    return "M " + " L ".join(f"{_fmt(x)} {_fmt(y)}" for x, y in pts)


def render_bezier_svg(bboxes, annotations=None, size=(640, 480)) -> SvgScene:
    """Curves in green, dashed control polygons and control-point dots in red,
    source annotations (when given) in gray underneath."""
    w, h = size
    if w <= 0 or h <= 0:
        raise ValidationError(f"scene size must be positive, got {size}")
    scene = SvgScene(float(w), float(h))
    if annotations:
        for ann in annotations:
            pts = ann.points if isinstance(ann, PolygonAnnotation) else np.asarray(ann, float)
            scene.add_polyline(pts, stroke="#999999", closed=True)
    for bbox in bboxes:
        for curve in (bbox.top, bbox.bottom):
            scene.add_polyline(curve.control_points, stroke="#dd2222", dashed=True, width=0.8)
        for curve in (bbox.top, bbox.bottom):
            scene.add_path(_curve_path(curve), stroke="#11aa11", width=1.5)
        for curve in (bbox.top, bbox.bottom):
            for x, y in curve.control_points:
                scene.add_circle(x, y, 2.0, fill="#dd2222")
    return scene

"""Ground-truth generation: polygon and quadrilateral text annotations to
Bezier bounding boxes.

A text region is bounded by a top and a bottom curve of equal order. Both
curves are stored running left-to-right along reading order so that a single
parameter t addresses matching boundary points; annotations arriving as a
closed ring (top side left-to-right then bottom side right-to-left) have
their bottom half reversed on ingestion.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .bezier import (
    BezierCurve,
    as_point_array,
    chord_length_params,
    fit_curve,
    fit_residual,
    merge_coincident,
)
from .errors import DegenerateError, ValidationError


@dataclass(frozen=True, eq=False)
class PolygonAnnotation:
    """A closed 2m-point boundary plus its transcription.

    Canonical point order: m points along the top side left-to-right followed
    by m points along the bottom side right-to-left (a closed ring).
    """

    points: np.ndarray  # (2m, 2)
    transcript: str = ""
    language: str | None = None

    def __post_init__(self):
        pts = as_point_array(self.points, min_count=4)
        if len(pts) % 2 != 0:
            raise ValidationError(f"annotation needs an even point count, got {len(pts)}")
        pts = pts.copy()
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def side_count(self) -> int:
        return len(self.points) // 2


@dataclass(frozen=True, eq=False)
class BezierBBox:
    """Text region bounded by top and bottom curves of equal order, both
    parameterized left-to-right."""

    top: BezierCurve
    bottom: BezierCurve

    def __post_init__(self):
        if self.top.order != self.bottom.order:
            raise ValidationError(
                f"top/bottom orders differ: {self.top.order} vs {self.bottom.order}"
            )

    @property
    def order(self) -> int:
        return self.top.order

    def translated(self, dx: float, dy: float) -> "BezierBBox":
        return BezierBBox(self.top.translated(dx, dy), self.bottom.translated(dx, dy))

    def scaled(self, factor: float) -> "BezierBBox":
        return BezierBBox(
            BezierCurve(self.top.control_points * factor),
            BezierCurve(self.bottom.control_points * factor),
        )


def _densify(points: np.ndarray, min_count: int) -> np.ndarray:
    """Insert segment midpoints until the polyline has at least min_count
    points. Exact for straight sides, which keeps the fit consistent with the
    tripartite construction of quad_to_bbox."""
    pts = points
    while len(pts) < min_count:
        mids = 0.5 * (pts[:-1] + pts[1:])
        out = np.empty((len(pts) + len(mids), 2))
        out[0::2] = pts
        out[1::2] = mids
        pts = out
    return pts


def fit_side(points, order: int) -> BezierCurve:
    """Fit one boundary side (left-to-right points) with pinned endpoints."""
    pts = merge_coincident(points)
    if len(pts) < 2:
        raise DegenerateError("boundary side collapses to a single point")
    pts = _densify(pts, order + 1)
    return fit_curve(pts, chord_length_params(pts), order)


def fit_bbox(top_points, bottom_points, order: int = 3) -> BezierBBox:
    """Fit a BezierBBox from already-split sides, both running left-to-right."""
    return BezierBBox(fit_side(top_points, order), fit_side(bottom_points, order))


def polygon_to_bbox(ann: PolygonAnnotation, order: int = 3) -> BezierBBox:
    """Convert a closed polygon annotation to a Bezier bounding box.

    The first half of the ring is the top side (kept in order); the second
    half is the bottom side (reversed so both sides run left-to-right). Each
    side is chord-length parameterized and least-squares fitted with its
    endpoints pinned to the first and last annotated points.
    """
    if order not in (3, 4, 5):
        raise ValidationError(f"bbox order must be 3, 4 or 5, got {order}")
    if order == 5:
        warnings.warn(
            "order-5 boxes tend to overfit text boundaries; 3 or 4 is the usual choice",
            stacklevel=2,
        )
    m = ann.side_count
    top = ann.points[:m]
    bottom = ann.points[m:][::-1]
    return fit_bbox(top, bottom, order)


def quad_to_bbox(corners) -> BezierBBox:
    """Cubic bbox for a straight quad given as (TL, TR, BR, BL).

    Control points are placed at the tripartite points of each long side, so
    every boundary curve degenerates to a straight line.
    """
    pts = as_point_array(corners)
    if len(pts) != 4:
        raise ValidationError(f"expected 4 corners, got {len(pts)}")
    tl, tr, br, bl = pts

    def tripartite(a, b):
        if not np.any(a != b):
            raise DegenerateError("zero-length side in quad")
        return np.array([a, a + (b - a) / 3.0, a + 2.0 * (b - a) / 3.0, b])

    return BezierBBox(BezierCurve(tripartite(tl, tr)), BezierCurve(tripartite(bl, br)))


def bbox_corners(bbox: BezierBBox) -> np.ndarray:
    """The four boundary endpoints (TL, TR, BR, BL), shape (4, 2).

    These are exactly the first/last control points of each curve."""
    return np.array(
        [
            bbox.top.control_points[0],
            bbox.top.control_points[-1],
            bbox.bottom.control_points[-1],
            bbox.bottom.control_points[0],
        ]
    )


def bbox_to_polygon(bbox: BezierBBox, samples_per_side: int = 16) -> np.ndarray:
    """Closed boundary polygon: top sampled left-to-right, bottom right-to-left.

    Returns 2 * samples_per_side vertices."""
    if samples_per_side < 2:
        raise ValidationError("samples_per_side must be >= 2")
    ts = np.linspace(0.0, 1.0, samples_per_side)
    return np.vstack([bbox.top.points(ts), bbox.bottom.points(ts)[::-1]])


def bbox_fit_report(bbox: BezierBBox, ann: PolygonAnnotation) -> dict:
    """Residual statistics of a fitted bbox against its source annotation."""
    m = ann.side_count
    stats = {}
    for name, curve, pts in (
        ("top", bbox.top, ann.points[:m]),
        ("bottom", bbox.bottom, ann.points[m:][::-1]),
    ):
        pts = merge_coincident(pts)
        pts = _densify(pts, bbox.order + 1)
        mx, rms = fit_residual(curve, pts, chord_length_params(pts))
        stats[name] = {"max": mx, "rms": rms}
    return stats

"""Regression-target codec: control points as pixel offsets from the
minimum-corner reference of the box.

Offsets are stored in absolute pixels with no stride normalization, which
keeps encode/decode exactly inverse. Offsets may be negative or exceed the
image bounds; only the four boundary endpoints define the reference corner.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bezier import BezierCurve, as_point_array
from .errors import ValidationError
from .gt import BezierBBox, bbox_corners


@dataclass(frozen=True, eq=False)
class RegressionTarget:
    """Reference corner plus per-control-point offsets.

    deltas holds 2*(order+1) rows: the top curve's control points first, then
    the bottom curve's, each as (dx, dy) relative to (x_min, y_min)."""

    x_min: float
    y_min: float
    deltas: np.ndarray

    def __post_init__(self):
        d = as_point_array(self.deltas, min_count=4)
        if len(d) % 2 != 0:
            raise ValidationError(f"delta count must be even, got {len(d)}")
        d = d.copy()
        d.setflags(write=False)
        object.__setattr__(self, "deltas", d)


def encode_targets(bbox: BezierBBox) -> RegressionTarget:
    """Offsets of every control point from the minimum x/y of the 4 corners."""
    corners = bbox_corners(bbox)
    x_min = corners[:, 0].min()
    y_min = corners[:, 1].min()
    cps = np.vstack([bbox.top.control_points, bbox.bottom.control_points])
    return RegressionTarget(float(x_min), float(y_min), cps - np.array([x_min, y_min]))


def decode_targets(target: RegressionTarget, order: int) -> BezierBBox:
    """Inverse of encode_targets; decode(encode(b)) reproduces b exactly."""
    n_cp = order + 1
    if len(target.deltas) != 2 * n_cp:
        raise ValidationError(
            f"expected {2 * n_cp} deltas for order {order}, got {len(target.deltas)}"
        )
    cps = target.deltas + np.array([target.x_min, target.y_min])
    return BezierBBox(BezierCurve(cps[:n_cp]), BezierCurve(cps[n_cp:]))

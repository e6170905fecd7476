"""Feature-map samplers: curved-region alignment onto a fixed output grid,
the horizontal and quadrilateral baseline samplers, and coordinate-channel
construction.

Sampling conventions
--------------------
Feature maps are (C, H, W) row-major arrays indexed in pixel coordinates,
x along width and y along height. For an output grid of h_out x w_out the
column parameter is t = g_iw / w_out and the vertical mix weight is
v = g_ih / h_out; a sample point on column t is

    op = bottom(t) * v + top(t) * (1 - v),

read with 4-neighbor bilinear interpolation. Neighbors outside the map
contribute zero (zero padding). In this literal form t never reaches 1;
``pixel_center`` shifts both fractions by +0.5 for center-of-cell sampling.

All functions are pure; outputs do not depend on evaluation order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateError, ValidationError
from .gt import BezierBBox


@dataclass(frozen=True)
class SampleGrid:
    """Output grid geometry; 32 rows by 8 columns unless overridden."""

    h_out: int = 32
    w_out: int = 8
    pixel_center: bool = False

    def __post_init__(self):
        if self.h_out < 1 or self.w_out < 1:
            raise ValidationError(f"grid must be at least 1x1, got {self.h_out}x{self.w_out}")

    def col_params(self) -> np.ndarray:
        offs = 0.5 if self.pixel_center else 0.0
        return (np.arange(self.w_out) + offs) / self.w_out

    def row_weights(self) -> np.ndarray:
        offs = 0.5 if self.pixel_center else 0.0
        return (np.arange(self.h_out) + offs) / self.h_out


def _check_feat(feat: np.ndarray) -> np.ndarray:
    feat = np.asarray(feat, dtype=float)
    if feat.ndim != 3:
        raise ValidationError(f"feature map must be (C, H, W), got shape {feat.shape}")
    if not np.isfinite(feat).all():
        raise ValidationError("feature map contains NaN or Inf")
    return feat


def _bilinear(feat: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Zero-padded bilinear reads; returns (C,) + xs.shape."""
    _, h, w = feat.shape
    x0 = np.floor(xs).astype(np.int64)
    y0 = np.floor(ys).astype(np.int64)
    fx = xs - x0
    fy = ys - y0

    out = None
    for dy, wy in ((0, 1.0 - fy), (1, fy)):
        yi = y0 + dy
        y_ok = (yi >= 0) & (yi <= h - 1)
        yc = np.clip(yi, 0, h - 1)
        for dx, wx in ((0, 1.0 - fx), (1, fx)):
            xi = x0 + dx
            ok = y_ok & (xi >= 0) & (xi <= w - 1)
            xc = np.clip(xi, 0, w - 1)
            term = feat[:, yc, xc] * (wy * wx * ok)
            out = term if out is None else out + term
    return out


def bilinear_at(feat, p) -> np.ndarray:
    """Bilinear read of a (C, H, W) map at pixel-index point p=(x, y).

    Points outside [0, W-1] x [0, H-1] draw zeros from out-of-range
    neighbors."""
    feat = _check_feat(feat)
    x, y = float(p[0]), float(p[1])
    if not (np.isfinite(x) and np.isfinite(y)):
        raise ValidationError("sample point must be finite")
    return _bilinear(feat, np.array(x), np.array(y))


def bezier_align(feat, bbox: BezierBBox, grid: SampleGrid = SampleGrid(),
                 scale: float = 1.0) -> np.ndarray:
    """Warp the region between the box's top and bottom curves onto the grid.

    Column g_iw samples both curves at t = g_iw / w_out and mixes them
    linearly down the column; each sample is a bilinear read of `feat`.
    `scale` multiplies the box coordinates first, for boxes annotated at a
    different resolution than the feature map (e.g. pyramid levels).
    Returns (C, h_out, w_out).
    """
    feat = _check_feat(feat)
    if scale != 1.0:
        bbox = bbox.scaled(scale)
    ts = grid.col_params()
    tops = bbox.top.points(ts)        # (w_out, 2)
    bots = bbox.bottom.points(ts)
    v = grid.row_weights()[:, None, None]
    ops = bots[None, :, :] * v + tops[None, :, :] * (1.0 - v)  # (h_out, w_out, 2)
    return _bilinear(feat, ops[..., 0], ops[..., 1])


def horizontal_align(feat, rect, grid: SampleGrid = SampleGrid()) -> np.ndarray:
    """Axis-aligned crop-resize of rect = (x0, y0, x1, y1) onto the grid.

    Uses the same fractional sampling as bezier_align, so the two agree
    exactly on straight boxes spanning the same rectangle."""
    feat = _check_feat(feat)
    x0, y0, x1, y1 = (float(v) for v in rect)
    if not (x1 > x0 and y1 > y0):
        raise DegenerateError(f"degenerate rectangle {rect}")
    xs = x0 + (x1 - x0) * grid.col_params()
    ys = y0 + (y1 - y0) * grid.row_weights()
    gx, gy = np.meshgrid(xs, ys)
    return _bilinear(feat, gx, gy)


def quad_align(feat, corners, grid: SampleGrid = SampleGrid()) -> np.ndarray:
    """Bilinear (not projective) sampling of a quad (TL, TR, BR, BL).

    Sample points are row/column lerps of the corner lerps; on an
    axis-aligned rectangle this reduces to horizontal_align."""
    feat = _check_feat(feat)
    pts = np.asarray(corners, dtype=float)
    if pts.shape != (4, 2):
        raise ValidationError(f"expected 4 corners, got shape {pts.shape}")
    tl, tr, br, bl = pts
    rel = pts[1:] - pts[0]
    cross = rel[:, 0, None] * rel[None, :, 1] - rel[:, 1, None] * rel[None, :, 0]
    if np.abs(cross).max() == 0.0:
        raise DegenerateError("quad corners are collinear")
    ts = grid.col_params()[None, :, None]
    v = grid.row_weights()[:, None, None]
    top_edge = tl + ts * (tr - tl)
    bot_edge = bl + ts * (br - bl)
    ops = bot_edge * v + top_edge * (1.0 - v)
    return _bilinear(feat, ops[..., 0], ops[..., 1])


def make_coord_channels(h: int, w: int) -> np.ndarray:
    """(2, h, w) map of absolute coordinates: channel 0 holds x, channel 1
    holds y."""
    if h < 1 or w < 1:
        raise ValidationError(f"coordinate map must be at least 1x1, got {h}x{w}")
    ys, xs = np.mgrid[0:h, 0:w].astype(float)
    return np.stack([xs, ys])


def concat_coords(feat) -> np.ndarray:
    """Append the absolute-coordinate channels after the existing ones."""
    feat = _check_feat(feat)
    _, h, w = feat.shape
    return np.concatenate([feat, make_coord_channels(h, w)], axis=0)

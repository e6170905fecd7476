"""Bernstein bases, Bezier curve evaluation, chord-length parameterization and
constrained least-squares curve fitting.

All functions are pure and operate on immutable inputs; they are safe to call
concurrently from any number of threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateError, ValidationError

MAX_ORDER = 10

# Pascal's triangle up to MAX_ORDER, kept as exact Python integers so that no
# binomial coefficient is ever computed through floating-point factorials.
_BINOMIAL: list[list[int]] = [[1]]
for _n in range(1, MAX_ORDER + 1):
    _prev = _BINOMIAL[-1]
    _BINOMIAL.append([1] + [_prev[_k - 1] + _prev[_k] for _k in range(1, _n)] + [1])

# Condition-number threshold above which the interior fit switches from the
# normal equations to a pseudo-inverse solve.
_COND_LIMIT = 1e12


def binomial(n: int, i: int) -> int:
    """Exact binomial coefficient C(n, i) for n <= MAX_ORDER."""
    if not (0 <= i <= n <= MAX_ORDER):
        raise ValidationError(f"binomial({n},{i}) outside supported range 0<=i<=n<={MAX_ORDER}")
    return _BINOMIAL[n][i]


def bernstein(i: int, n: int, t: float) -> float:
    """Bernstein basis value C(n,i) * t^i * (1-t)^(n-i).

    Requires 0 <= i <= n <= MAX_ORDER and t in [0, 1]; the result is in [0, 1].
    """
    if not (0 <= i <= n <= MAX_ORDER):
        raise ValidationError(f"bernstein index ({i},{n}) outside 0<=i<=n<={MAX_ORDER}")
    if not (0.0 <= t <= 1.0):
        raise ValidationError(f"bernstein parameter t={t} outside [0, 1]")
    return _BINOMIAL[n][i] * t**i * (1.0 - t) ** (n - i)


def bernstein_matrix(n: int, ts: np.ndarray) -> np.ndarray:
    """Basis matrix B with B[k, i] = bernstein(i, n, ts[k]); shape (len(ts), n+1)."""
    if not (1 <= n <= MAX_ORDER):
        raise ValidationError(f"order {n} outside 1..{MAX_ORDER}")
    ts = np.asarray(ts, dtype=float)
    if ts.ndim != 1:
        raise ValidationError("ts must be one-dimensional")
    if ts.size and (ts.min() < 0.0 or ts.max() > 1.0):
        raise ValidationError("parameters outside [0, 1]")
    i = np.arange(n + 1)
    coef = np.array(_BINOMIAL[n], dtype=float)
    return coef * ts[:, None] ** i * (1.0 - ts[:, None]) ** (n - i)


def as_point_array(points, min_count: int = 1) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValidationError(f"expected an (m, 2) point array, got shape {pts.shape}")
    if len(pts) < min_count:
        raise ValidationError(f"need at least {min_count} points, got {len(pts)}")
    if not np.isfinite(pts).all():
        raise ValidationError("points contain NaN or Inf")
    return pts


@dataclass(frozen=True, eq=False)
class BezierCurve:
    """A parametric curve of order n defined by n+1 control points (pixels).

    The curve value is the Bernstein-weighted sum of the control points; it
    interpolates the first and last control point exactly at t=0 and t=1.
    """

    control_points: np.ndarray  # (order+1, 2) float64, read-only

    def __post_init__(self):
        pts = as_point_array(self.control_points, min_count=2)
        if len(pts) - 1 > MAX_ORDER:
            raise ValidationError(f"curve order {len(pts) - 1} exceeds {MAX_ORDER}")
        pts = pts.copy()
        pts.setflags(write=False)
        object.__setattr__(self, "control_points", pts)

    @property
    def order(self) -> int:
        return len(self.control_points) - 1

    def point(self, t: float) -> np.ndarray:
        """Curve point at parameter t in [0, 1], shape (2,)."""
        if not (0.0 <= t <= 1.0):
            raise ValidationError(f"curve parameter t={t} outside [0, 1]")
        # Endpoints are returned bit-exactly, not through the weighted sum.
        if t == 0.0:
            return self.control_points[0].copy()
        if t == 1.0:
            return self.control_points[-1].copy()
        basis = bernstein_matrix(self.order, np.array([t]))
        return (basis @ self.control_points)[0]

    def points(self, ts: np.ndarray) -> np.ndarray:
        """Curve points at each parameter, shape (len(ts), 2)."""
        ts = np.asarray(ts, dtype=float)
        out = bernstein_matrix(self.order, ts) @ self.control_points
        exact = ts == 0.0
        if exact.any():
            out[exact] = self.control_points[0]
        exact = ts == 1.0
        if exact.any():
            out[exact] = self.control_points[-1]
        return out

    def translated(self, dx: float, dy: float) -> "BezierCurve":
        return BezierCurve(self.control_points + np.array([dx, dy]))

    def reversed(self) -> "BezierCurve":
        return BezierCurve(self.control_points[::-1])


def eval_curve(curve: BezierCurve, t: float) -> np.ndarray:
    """Point on `curve` at parameter t; see BezierCurve.point."""
    return curve.point(t)


def merge_coincident(points) -> np.ndarray:
    """Drop points that exactly coincide with their predecessor.

    Zero-length chords would otherwise duplicate parameter values and collapse
    rows of the fitting system.
    """
    pts = as_point_array(points)
    keep = np.ones(len(pts), dtype=bool)
    keep[1:] = np.any(pts[1:] != pts[:-1], axis=1)
    return pts[keep]


def chord_length_params(points) -> np.ndarray:
    """Cumulative-chord-length parameters of a polyline, normalized to [0, 1].

    ts[k] is the ratio of the polyline length up to point k to the total
    length; ts[0] = 0 and ts[-1] = 1 exactly.
    """
    pts = as_point_array(points, min_count=2)
    seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    total = seg.sum()
    if total <= 0.0:
        raise DegenerateError("polyline has zero total length")
    ts = np.empty(len(pts))
    ts[0] = 0.0
    ts[1:] = np.cumsum(seg) / total
    ts[-1] = 1.0
    return ts


def _validate_params(ts: np.ndarray, count: int) -> np.ndarray:
    ts = np.asarray(ts, dtype=float)
    if ts.ndim != 1 or len(ts) != count:
        raise ValidationError(f"expected {count} parameter values, got {ts.shape}")
    if ts[0] != 0.0 or ts[-1] != 1.0 or np.any(np.diff(ts) < 0.0):
        raise ValidationError("parameters must be non-decreasing with ts[0]=0 and ts[-1]=1")
    return ts


def fit_curve(points, ts, order: int) -> BezierCurve:
    """Least-squares Bezier fit with hard-pinned endpoints.

    Minimizes sum_k ||c(ts[k]) - points[k]||^2 over curves of the given order
    subject to c(0) = points[0] and c(1) = points[-1]; only the interior
    control points are solved for. Uses the normal equations of the reduced
    system, falling back to a pseudo-inverse when the design matrix condition
    number exceeds 1e12. Raises DegenerateError when the reduced matrix is
    singular (e.g. duplicated ts collapsing too many rows).
    """
    if not (1 <= order <= 5):
        raise ValidationError(f"fit order must be in 1..5, got {order}")
    pts = as_point_array(points, min_count=order + 1)
    ts = _validate_params(ts, len(pts))

    first, last = pts[0], pts[-1]
    if order == 1:
        return BezierCurve(np.array([first, last]))

    basis = bernstein_matrix(order, ts)
    design = basis[:, 1:order]  # interior columns only
    rhs = pts - np.outer(basis[:, 0], first) - np.outer(basis[:, order], last)

    sv = np.linalg.svd(design, compute_uv=False)
    if sv[-1] <= sv[0] * np.finfo(float).eps * max(design.shape):
        raise DegenerateError("reduced design matrix is singular; fit has no unique solution")
    if sv[0] / sv[-1] > _COND_LIMIT:
        interior = np.linalg.pinv(design) @ rhs
    else:
        gram = design.T @ design
        interior = np.linalg.solve(gram, design.T @ rhs)

    return BezierCurve(np.vstack([first, interior, last]))


def fit_residual(curve: BezierCurve, points, ts) -> tuple[float, float]:
    """Max and RMS distance between curve(ts[k]) and points[k]."""
    pts = as_point_array(points)
    ts = np.asarray(ts, dtype=float)
    if len(ts) != len(pts):
        raise ValidationError("points and ts lengths differ")
    dist = np.linalg.norm(curve.points(ts) - pts, axis=1)
    return float(dist.max()), float(np.sqrt(np.mean(dist**2)))

"""Synthetic curved-text-band fixtures shared by the unit and acceptance
tests.

Exactly-recoverable bands: a fit against sampled boundary points reproduces
the generating curve only when the samples' cumulative-chord parameters equal
the parameters they were sampled at. Generic cubics admit no such sampling
(chord shortfall varies with local curvature), so the generators below work
backwards: they solve for cubics whose five uniform-parameter samples have
equal consecutive chords. Chord parameters of those samples are then exactly
uniform, and a pinned-endpoint least-squares fit at them returns the
generating control points to machine precision.
"""

import numpy as np
from scipy.optimize import root

SAMPLES_PER_SIDE = 5  # ten-point annotations, five per boundary


def chord_params_of(pts: np.ndarray) -> np.ndarray:
    seg = np.sqrt(((pts[1:] - pts[:-1]) ** 2).sum(axis=1))
    ts = np.zeros(len(pts))
    ts[1:] = np.cumsum(seg) / seg.sum()
    ts[-1] = 1.0
    return ts


def _eval_poly(cps: np.ndarray, ts: np.ndarray) -> np.ndarray:
    """Repeated-lerp curve evaluation (independent of the package's basis
    form)."""
    pts = np.repeat(cps[None, :, :], len(ts), axis=0)
    t = ts[:, None, None]
    while pts.shape[1] > 1:
        pts = (1.0 - t) * pts[:, :-1] + t * pts[:, 1:]
    return pts[:, 0]


def equal_chord_cubic(rng: np.random.Generator, width: float, y_start: float,
                      y_end: float, bend: float) -> np.ndarray:
    """Cubic control points whose 5 uniform-t samples are equally spaced in
    chord length. `bend` sets how far the interior dips from the endpoint
    chord (positive bows down in image coordinates)."""
    b0 = np.array([0.0, y_start])
    b3 = np.array([width, y_end])
    for _ in range(40):
        a1 = rng.uniform(0.28, 0.38) * width

        def unpack(v):
            h1, a2, h2 = v
            return np.array([b0, [a1, h1], [a2, h2], b3])

        def chord_gaps(v):
            pts = _eval_poly(unpack(v), np.linspace(0.0, 1.0, SAMPLES_PER_SIDE))
            d = np.sqrt(((pts[1:] - pts[:-1]) ** 2).sum(axis=1))
            return d[1:] - d[:-1]

        v0 = np.array([y_start + bend, rng.uniform(0.62, 0.72) * width, y_end + bend])
        sol = root(chord_gaps, v0, method="hybr", tol=1e-14)
        cps = unpack(sol.x)
        xs = cps[:, 0]
        line_dev = np.abs(cps[1:3, 1] - np.interp(xs[1:3], [xs[0], xs[3]], [y_start, y_end]))
        # reject both near-straight degenerations and wild solution branches
        # whose interior control points fly far off the band; by the convex
        # hull property the cap also bounds the curve itself
        if (sol.success and np.abs(chord_gaps(sol.x)).max() < 1e-10
                and np.all(np.diff(xs) > 0.05 * width)
                and line_dev.max() > 0.25 * abs(bend)
                and line_dev.max() < 2.0 * abs(bend) + 10.0):
            return cps
        bend = float(np.sign(bend) * np.clip(abs(bend) * rng.uniform(0.7, 1.3), 8.0, 30.0))
    raise RuntimeError("equal-chord construction failed to converge")


def equal_chord_band(rng: np.random.Generator, width: float = 200.0,
                     height: float = 64.0, max_bend: float = 28.0):
    """Top/bottom cubic control points, each exactly recoverable from its
    5-point boundary sampling."""
    y_top = rng.uniform(90.0, 110.0)
    bend = rng.uniform(10.0, max_bend) * rng.choice([-1.0, 1.0])
    top = equal_chord_cubic(rng, width, y_top, y_top + rng.uniform(-8.0, 8.0), bend)
    bottom = equal_chord_cubic(rng, width, y_top + height,
                               y_top + height + rng.uniform(-8.0, 8.0),
                               bend + rng.uniform(-5.0, 5.0))
    return top, bottom


def side_samples(cps: np.ndarray, count: int = SAMPLES_PER_SIDE) -> np.ndarray:
    return _eval_poly(cps, np.linspace(0.0, 1.0, count))


def band_annotation(top_cps: np.ndarray, bot_cps: np.ndarray,
                    points_per_side: int = SAMPLES_PER_SIDE) -> np.ndarray:
    """Closed-ring annotation (top left-to-right, bottom right-to-left)."""
    top_pts = side_samples(top_cps, points_per_side)
    bot_pts = side_samples(bot_cps, points_per_side)
    return np.vstack([top_pts, bot_pts[::-1]])


def random_cubic_pair(rng: np.random.Generator, width: float = 200.0,
                      height: float = 64.0, amplitude: float = 25.0):
    """Generic gently curved band (no exact-recovery guarantee); for sampler
    and rasterization tests."""
    x = np.array([
        0.0,
        rng.uniform(0.28, 0.39) * width,
        rng.uniform(0.61, 0.72) * width,
        width,
    ])
    y_top = 100.0 + rng.uniform(-amplitude, amplitude, 4)
    top = np.column_stack([x, y_top])
    bottom = top + np.array([0.0, height]) + rng.uniform(-3.0, 3.0, (4, 2))
    bottom[:, 0] = top[:, 0]
    return top, bottom


def wave_sides(rng: np.random.Generator, points_per_side: int = 20,
               crests: int = 3, width: float = 300.0, thickness: float = 40.0,
               amp_range: tuple = (8.0, 16.0)):
    """Multi-crest sinusoid band boundaries (not representable by any single
    low-order curve)."""
    amp = rng.uniform(*amp_range)
    phase = rng.uniform(0.0, 2.0 * np.pi)
    base = rng.uniform(80.0, 120.0)
    x = np.linspace(0.0, width, points_per_side)
    y = base + amp * np.sin(phase + crests * 2.0 * np.pi * x / width)
    top = np.column_stack([x, y])
    bottom = np.column_stack([x, y + thickness])
    return top, bottom


def paint_band_image(top_cps: np.ndarray, bot_cps: np.ndarray, w: int, h: int,
                     stripe_half_width: float = 2.0) -> np.ndarray:
    """White image with a dark stripe along the band's center curve; the
    stripe acts as a synthetic text baseline."""
    img = np.ones((1, h, w))
    mid = 0.5 * (top_cps + bot_cps)
    pts = _eval_poly(mid, np.linspace(0.0, 1.0, 8 * w))
    baseline = np.full(w, np.nan)
    cols = np.clip(np.round(pts[:, 0]).astype(int), 0, w - 1)
    baseline[cols] = pts[:, 1]
    rows = np.arange(h, dtype=float)[:, None]
    mask = np.abs(rows - baseline[None, :]) <= stripe_half_width
    img[0][mask & ~np.isnan(baseline)[None, :]] = 0.0
    return img


def baseline_row_variance(patch: np.ndarray) -> float:
    """Variance (normalized by patch height) of the darkness-weighted centroid
    row across columns; a straight baseline gives ~0."""
    gray = patch[0]
    rows = np.arange(gray.shape[0], dtype=float)
    dark = 1.0 - gray
    col_mass = dark.sum(axis=0)
    keep = col_mass > 1e-9
    centroid = (dark[:, keep] * rows[:, None]).sum(axis=0) / col_mass[keep]
    normalized = centroid / max(gray.shape[0] - 1, 1)
    return float(np.var(normalized))

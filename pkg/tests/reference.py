"""Independently coded reference sampler used as an oracle.

Deliberately shares no helpers with the package: curve points come from
de Casteljau's algorithm instead of the Bernstein basis, and every output
pixel is computed with direct nested loops and scalar bilinear reads.
"""


def de_casteljau(cps, t):
    pts = [(float(x), float(y)) for x, y in cps]
    while len(pts) > 1:
        nxt = []
        for (x0, y0), (x1, y1) in zip(pts[:-1], pts[1:]):
            nxt.append(((1.0 - t) * x0 + t * x1, (1.0 - t) * y0 + t * y1))
        pts = nxt
    return pts[0]


def bilinear_scalar(feat, c, x, y):
    """Zero-padded 4-neighbor bilinear read of feat[c] at (x, y)."""
    h = len(feat[c])
    w = len(feat[c][0])
    import math

    x0 = math.floor(x)
    y0 = math.floor(y)
    fx = x - x0
    fy = y - y0
    total = 0.0
    for dy, wy in ((0, 1.0 - fy), (1, fy)):
        yy = y0 + dy
        if yy < 0 or yy > h - 1:
            continue
        for dx, wx in ((0, 1.0 - fx), (1, fx)):
            xx = x0 + dx
            if xx < 0 or xx > w - 1:
                continue
            total += feat[c][yy][xx] * wy * wx
    return total


def sample_region(feat, top_cps, bot_cps, h_out, w_out, pixel_center):
    """Per-pixel reference of the curved-region sampler; returns nested lists
    [c][ih][iw]."""
    channels = len(feat)
    offs = 0.5 if pixel_center else 0.0
    out = [[[0.0] * w_out for _ in range(h_out)] for _ in range(channels)]
    for ih in range(h_out):
        v = (ih + offs) / h_out
        for iw in range(w_out):
            t = (iw + offs) / w_out
            tx, ty = de_casteljau(top_cps, t)
            bx, by = de_casteljau(bot_cps, t)
            ox = bx * v + tx * (1.0 - v)
            oy = by * v + ty * (1.0 - v)
            for c in range(channels):
                out[c][ih][iw] = bilinear_scalar(feat, c, ox, oy)
    return out

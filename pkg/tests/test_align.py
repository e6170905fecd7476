import numpy as np
import pytest

from beziertext import (
    DegenerateError,
    SampleGrid,
    ValidationError,
    bezier_align,
    bilinear_at,
    concat_coords,
    horizontal_align,
    make_coord_channels,
    quad_align,
    quad_to_bbox,
)
from reference import sample_region


def ramp_feature(c, h, w):
    """feat[ch][y][x] = x + 10*y + 100*ch."""
    cs, ys, xs = np.mgrid[0:c, 0:h, 0:w].astype(float)
    return xs + 10.0 * ys + 100.0 * cs


class TestBilinear:
    def test_lattice_points_exact(self):
        rng = np.random.default_rng(0)
        feat = rng.uniform(-5, 5, (3, 6, 7))
        for _ in range(20):
            x = int(rng.integers(0, 7))
            y = int(rng.integers(0, 6))
            assert np.array_equal(bilinear_at(feat, (x, y)), feat[:, y, x])

    def test_center_average(self):
        feat = np.array([[[0.0, 1.0], [2.0, 3.0]]])
        assert bilinear_at(feat, (0.5, 0.5))[0] == pytest.approx(1.5)

    def test_far_outside_is_zero(self):
        feat = np.ones((2, 4, 4))
        assert np.all(bilinear_at(feat, (100.0, -50.0)) == 0.0)

    def test_edge_fade(self):
        feat = np.ones((1, 3, 3))
        # Half a pixel outside: one valid neighbor pair at weight 0.5.
        assert bilinear_at(feat, (-0.5, 1.0))[0] == pytest.approx(0.5)


class TestBezierAlign:
    def test_ramp_example(self):
        feat = np.tile(np.arange(4.0), (4, 1))[None]  # F[0][y][x] = x
        bb = quad_to_bbox([[0, 0], [3, 0], [3, 3], [0, 3]])
        out = bezier_align(feat, bb, SampleGrid(4, 4))
        for ih in range(4):
            for iw in range(4):
                assert out[0, ih, iw] == pytest.approx(0.75 * iw, abs=1e-12)

    def test_constant_map(self):
        feat = np.full((2, 8, 8), 3.25)
        bb = quad_to_bbox([[1, 1], [6, 2], [6, 6], [1, 5]])
        out = bezier_align(feat, bb, SampleGrid(5, 3))
        assert np.allclose(out, 3.25)

    def test_matches_crop_resize_on_rectangles(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            feat = rng.uniform(0, 1, (2, 16, 16))
            x0, y0 = rng.uniform(0, 6, 2)
            x1, y1 = x0 + rng.uniform(2, 8), y0 + rng.uniform(2, 8)
            grid = SampleGrid(int(rng.integers(1, 9)), int(rng.integers(1, 9)),
                              pixel_center=bool(rng.integers(0, 2)))
            bb = quad_to_bbox([[x0, y0], [x1, y0], [x1, y1], [x0, y1]])
            a = bezier_align(feat, bb, grid)
            b = horizontal_align(feat, (x0, y0, x1, y1), grid)
            assert np.abs(a - b).max() < 1e-6

    def test_matches_nested_loop_reference(self):
        rng = np.random.default_rng(2)
        for _ in range(25):
            c = int(rng.integers(1, 4))
            h = int(rng.integers(4, 12))
            w = int(rng.integers(4, 12))
            feat = rng.uniform(-1, 1, (c, h, w))
            top = np.column_stack([np.sort(rng.uniform(0, w, 4)), rng.uniform(0, h / 2, 4)])
            bot = np.column_stack([np.sort(rng.uniform(0, w, 4)), rng.uniform(h / 2, h, 4)])
            from beziertext import BezierBBox, BezierCurve

            bb = BezierBBox(BezierCurve(top), BezierCurve(bot))
            grid = SampleGrid(int(rng.integers(1, 9)), int(rng.integers(1, 6)),
                              pixel_center=bool(rng.integers(0, 2)))
            got = bezier_align(feat, bb, grid)
            want = np.array(sample_region(feat.tolist(), top.tolist(), bot.tolist(),
                                          grid.h_out, grid.w_out, grid.pixel_center))
            assert np.abs(got - want).max() < 1e-9

    def test_linearity(self):
        rng = np.random.default_rng(3)
        f = rng.uniform(-1, 1, (2, 10, 10))
        g = rng.uniform(-1, 1, (2, 10, 10))
        bb = quad_to_bbox([[1, 1], [8, 2], [8, 8], [1, 7]])
        grid = SampleGrid(6, 4)
        lhs = bezier_align(2.5 * f - 1.5 * g, bb, grid)
        rhs = 2.5 * bezier_align(f, bb, grid) - 1.5 * bezier_align(g, bb, grid)
        assert np.abs(lhs - rhs).max() < 1e-9

    def test_scale_factor(self):
        feat = ramp_feature(1, 16, 16)
        bb = quad_to_bbox([[0, 0], [30, 0], [30, 30], [0, 30]])  # half-scale level
        direct = bezier_align(feat, bb.scaled(0.5), SampleGrid(4, 4))
        scaled = bezier_align(feat, bb, SampleGrid(4, 4), scale=0.5)
        assert np.array_equal(direct, scaled)


class TestHorizontalAlign:
    def test_identity_crop(self):
        feat = ramp_feature(2, 5, 6)
        out = horizontal_align(feat, (0, 0, 6, 5), SampleGrid(5, 6))
        assert np.array_equal(out, feat)

    def test_halved_ramp(self):
        feat = ramp_feature(1, 1, 8)
        out = horizontal_align(feat, (0, 0, 8, 1), SampleGrid(1, 4))
        # columns sample x = 0, 2, 4, 6 on f(x) = x
        assert np.allclose(out[0, 0], [0.0, 2.0, 4.0, 6.0])

    def test_differs_from_curved_sampler(self):
        rng = np.random.default_rng(4)
        feat = rng.uniform(0, 1, (1, 12, 12))
        from beziertext import BezierBBox, BezierCurve

        top = BezierCurve([[1, 1], [4, 5], [8, 1], [11, 3]])
        bot = BezierCurve([[1, 8], [4, 11], [8, 8], [11, 10]])
        bb = BezierBBox(top, bot)
        cps = np.vstack([top.control_points, bot.control_points])
        rect = (cps[:, 0].min(), cps[:, 1].min(), cps[:, 0].max(), cps[:, 1].max())
        grid = SampleGrid(8, 4)
        assert np.abs(bezier_align(feat, bb, grid) - horizontal_align(feat, rect, grid)).max() > 1e-3

    def test_degenerate_rect(self):
        with pytest.raises(DegenerateError):
            horizontal_align(np.ones((1, 4, 4)), (2, 1, 2, 3), SampleGrid(2, 2))


class TestQuadAlign:
    def test_rectangle_matches_horizontal(self):
        rng = np.random.default_rng(5)
        feat = rng.uniform(0, 1, (2, 10, 10))
        rect = (1.0, 2.0, 7.5, 8.25)
        corners = [[rect[0], rect[1]], [rect[2], rect[1]], [rect[2], rect[3]], [rect[0], rect[3]]]
        grid = SampleGrid(5, 3)
        assert np.allclose(quad_align(feat, corners, grid),
                           horizontal_align(feat, rect, grid), atol=1e-12)

    def test_matches_straight_box_sampler(self):
        rng = np.random.default_rng(6)
        feat = rng.uniform(0, 1, (1, 12, 12))
        corners = np.array([[1, 1], [10, 2], [11, 9], [2, 8]], dtype=float)
        grid = SampleGrid(6, 4)
        a = quad_align(feat, corners, grid)
        b = bezier_align(feat, quad_to_bbox(corners), grid)
        assert np.abs(a - b).max() < 1e-6

    def test_rotated_square_on_ramp(self):
        feat = ramp_feature(1, 9, 9)
        corners = np.array([[4, 1], [7, 4], [4, 7], [1, 4]], dtype=float)  # diamond
        out = quad_align(feat, corners, SampleGrid(2, 2))
        # rows sample v in {0, 1/2}, columns t in {0, 1/2}
        expect = {
            (0, 0): corners[0],
            (0, 1): 0.5 * (corners[0] + corners[1]),
            (1, 0): 0.5 * (corners[0] + corners[3]),
            (1, 1): 0.25 * corners.sum(axis=0),
        }
        for (ih, iw), p in expect.items():
            assert out[0, ih, iw] == pytest.approx(p[0] + 10.0 * p[1], abs=1e-12)

    def test_collinear_quad(self):
        with pytest.raises(DegenerateError):
            quad_align(np.ones((1, 4, 4)), [[0, 0], [1, 1], [2, 2], [3, 3]], SampleGrid(2, 2))


class TestCoordChannels:
    def test_small_grid(self):
        coords = make_coord_channels(2, 3)
        assert coords[0].tolist() == [[0, 1, 2], [0, 1, 2]]
        assert coords[1].tolist() == [[0, 0, 0], [1, 1, 1]]

    def test_single_cell(self):
        assert np.array_equal(make_coord_channels(1, 1), np.zeros((2, 1, 1)))

    def test_max_is_extent(self):
        coords = make_coord_channels(5, 9)
        assert coords[0].max() == 8.0
        assert coords[1].max() == 4.0

    def test_concat_preserves_features(self):
        rng = np.random.default_rng(7)
        feat = rng.uniform(0, 1, (3, 4, 5))
        out = concat_coords(feat)
        assert out.shape == (5, 4, 5)
        assert np.array_equal(out[:3], feat)
        assert np.array_equal(out[3:], make_coord_channels(4, 5))

    def test_coords_independent_of_content(self):
        a = concat_coords(np.zeros((1, 2, 2)))
        b = concat_coords(np.full((1, 2, 2), 42.0))
        assert np.array_equal(a[1:], b[1:])

    def test_rank_error(self):
        with pytest.raises(ValidationError):
            concat_coords(np.zeros((2, 2)))


class TestGrid:
    def test_defaults(self):
        grid = SampleGrid()
        assert grid.h_out == 32 and grid.w_out == 8 and not grid.pixel_center

    def test_invalid(self):
        with pytest.raises(ValidationError):
            SampleGrid(0, 4)

import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from squarepeg import (
    Curve,
    CurveSpec,
    build_n_square,
    build_nonsmooth_two_square,
    build_smooth_two_square,
    closest_point,
    is_convex,
    signed_curvature,
    unit_circle_spec,
)
from squarepeg.constructions import default_anchors
from squarepeg.curve import (
    INV_SQRT2,
    CircleArc,
    CurveError,
    GraphBumpArc,
    PolarBumpArc,
    angle_point,
    bump,
    closest_points,
    semicircle_arc,
)

CIRCLE = Curve(unit_circle_spec())
SMOOTH = Curve(build_smooth_two_square(1.18264))
NONSMOOTH = Curve(build_nonsmooth_two_square())
NSQUARE = Curve(build_n_square(anchors=default_anchors(4)))

# 9-point central difference weights for the first derivative
STENCIL = np.array([1 / 280, -4 / 105, 1 / 5, -4 / 5, 0.0, 4 / 5, -1 / 5, 4 / 105, -1 / 280])


def stencil_derivative(f, t, h):
    return sum(w * f(t + (i - 4) * h) for i, w in enumerate(STENCIL) if w) / h


def away_from_joints(curve, t, margin):
    gap = np.min(np.abs((t[:, None] - curve.breaks[None, :-1] + 0.5) % 1.0 - 0.5), axis=1)
    return t[gap > margin]


def polar_spec(U, V, c):
    """Unit circle whose arc between U and V is replaced by a polar bump arc."""
    return CurveSpec((CircleArc((0.0, 0.0), 1.0, V, U + 2 * math.pi), PolarBumpArc(U=U, V=V, c=c)), name="polar-test")


def mp_bump(x, left, right, a=0.02):
    return mpmath.exp(-(a / (x - left) ** 2 + a / (right - x) ** 2))


class TestEvaluation:
    def test_circle_at_zero(self):
        assert np.allclose(CIRCLE.eval(0.0), [1.0, 0.0], atol=1e-15)

    def test_graph_apex_against_high_precision(self):
        mpmath.mp.dps = 40
        seg = GraphBumpArc(c=1.18264)
        expected = -1 + mpmath.mpf("1.18264") * mpmath.exp(mpmath.mpf("-0.08"))
        y = seg.local(np.array([0.0]))[0][0, 1]
        assert abs(y - float(expected)) < 1e-15
        assert abs(y - 0.09172) < 5e-5

    @pytest.mark.parametrize("x", [-0.6, -0.31, 0.05, 0.3, 0.7])
    def test_graph_height_against_high_precision(self, x):
        mpmath.mp.dps = 40
        r = mpmath.sqrt(2) / 2
        expected = -mpmath.sqrt(1 - mpmath.mpf(x) ** 2) + mpmath.mpf("1.18264") * mp_bump(mpmath.mpf(x), -r, r)
        y = GraphBumpArc(c=1.18264).local(np.array([x]))[0][0, 1]
        assert abs(y - float(expected)) < 1e-14

    def test_semicircle_passes_through_origin(self):
        p = semicircle_arc().local(np.array([math.pi / 2]))[0][0]
        assert np.allclose(p, [0.0, 0.0], atol=1e-15)

    def test_polar_radius_value(self):
        seg = PolarBumpArc(U=0.0, V=math.pi / 4, c=0.05)
        assert seg.radius(math.pi / 8)[0] == pytest.approx(1.0385764, abs=1e-7)

    def test_periodicity(self, rng):
        t = rng.random(1000)
        for curve in (SMOOTH, NONSMOOTH, NSQUARE):
            assert np.max(np.linalg.norm(curve.eval(t) - curve.eval(t + 1.0), axis=1)) < 1e-12

    def test_closed_at_one(self):
        for curve in (CIRCLE, SMOOTH, NONSMOOTH, NSQUARE):
            assert np.linalg.norm(curve.eval(0.0) - curve.eval(1.0 - 1e-15)) < 1e-12

    def test_vectorized_matches_scalar(self, rng):
        t = rng.random(20)
        batch = NSQUARE.eval(t)
        for ti, p in zip(t, batch):
            assert np.array_equal(NSQUARE.eval(float(ti)), p)

    def test_shares_follow_arclength(self):
        assert SMOOTH.shares.sum() == pytest.approx(1.0, abs=1e-15)
        assert SMOOTH.lengths[0] == pytest.approx(1.5 * math.pi, rel=1e-12)
        assert np.allclose(SMOOTH.shares, SMOOTH.lengths / SMOOTH.length)


class TestDerivatives:
    def test_circle_tangent_points_up(self):
        d = CIRCLE.deriv(0.0, 1)
        assert abs(d[0]) < 1e-12 and d[1] > 0

    def test_graph_point_finite_difference(self):
        # parameter of the graph point at x = 0.3
        t = closest_point(SMOOTH, SMOOTH.spec.segments[1].local(np.array([0.3]))[0][0]).t
        h = 1e-5
        fd = (SMOOTH.eval(t + h) - SMOOTH.eval(t - h)) / (2 * h)
        d1 = SMOOTH.deriv(t, 1)
        assert np.linalg.norm(d1 - fd) / np.linalg.norm(d1) < 1e-6

    @pytest.mark.parametrize("curve", [CIRCLE, NONSMOOTH], ids=["circle", "nonsmooth2"])
    def test_three_point_differences_on_arcs(self, curve, rng):
        t = away_from_joints(curve, rng.random(1000), 1e-3)
        p, d1, d2 = curve.jets(t)
        f1 = (curve.eval(t + 1e-5) - curve.eval(t - 1e-5)) / 2e-5
        f2 = (curve.eval(t + 1e-4) - 2 * p + curve.eval(t - 1e-4)) / 1e-8
        assert np.max(np.linalg.norm(d1 - f1, axis=1) / np.linalg.norm(d1, axis=1)) < 1e-6
        assert np.max(np.linalg.norm(d2 - f2, axis=1) / np.linalg.norm(d2, axis=1)) < 1e-6

    @pytest.mark.parametrize("curve", [SMOOTH, NSQUARE], ids=["smooth2", "nsquare-4"])
    def test_high_order_differences_on_bump_curves(self, curve, rng):
        t = away_from_joints(curve, rng.random(1000), 1e-3)
        p, d1, d2 = curve.jets(t)
        f1 = stencil_derivative(curve.eval, t, 1e-4)
        f2 = stencil_derivative(lambda s: curve.jets(s)[1], t, 1e-4)
        assert np.max(np.linalg.norm(d1 - f1, axis=1) / np.linalg.norm(d1, axis=1)) < 1e-6
        assert np.max(np.linalg.norm(d2 - f2, axis=1) / np.linalg.norm(d2, axis=1)) < 1e-6

    @pytest.mark.parametrize("curve", [SMOOTH, NSQUARE, CIRCLE], ids=["smooth2", "nsquare-4", "circle"])
    def test_smooth_joints_are_continuous(self, curve):
        for b in curve.breaks[:-1]:
            left = curve.jets(b - 1e-15 if b > 0 else 1.0 - 1e-16)
            right = curve.jets(b)
            for L, R in zip(left, right):
                assert np.linalg.norm(L - R) <= 1e-8 * max(1.0, np.linalg.norm(R))

    def test_corner_derivative_is_one_sided(self):
        corner = NONSMOOTH.corners[0]
        right = NONSMOOTH.deriv(corner, 1)
        ahead = (NONSMOOTH.eval(corner + 1e-7) - NONSMOOTH.eval(corner)) / 1e-7
        assert np.linalg.norm(right - ahead) / np.linalg.norm(right) < 1e-5
        assert NONSMOOTH.corners.size == 2

    def test_bump_endpoints_flat(self):
        for seg, lo, hi in (
            (GraphBumpArc(c=1.18264), -INV_SQRT2, INV_SQRT2),
            (PolarBumpArc(U=-0.3, V=0.2, c=0.01), -0.3, 0.2),
        ):
            near = np.array([lo + 1e-3, hi - 1e-3])
            ends = np.array([lo, hi])
            for vals in (bump(near, lo, hi, seg.a, order=3), bump(ends, lo, hi, seg.a, order=3)):
                assert seg.c * np.max(np.abs(vals)) < 1e-12

    def test_bump_derivatives_against_mpmath(self):
        mpmath.mp.dps = 50
        lo, hi = -0.4, 0.5
        for u in (-0.3, 0.0, 0.21, 0.45):
            ours = bump(np.array([u]), lo, hi, 0.02, order=3)
            for k in range(4):
                ref = mpmath.diff(lambda x: mp_bump(x, lo, hi), mpmath.mpf(u), k)
                assert float(ours[k][0]) == pytest.approx(float(ref), rel=1e-9, abs=1e-14)


class TestCurvature:
    def test_unit_circle(self, rng):
        assert np.allclose(signed_curvature(CIRCLE, rng.random(50)), 1.0, atol=1e-9)

    def test_semicircle_dent(self):
        t = 0.5 * (NONSMOOTH.breaks[1] + 1.0)
        assert abs(signed_curvature(NONSMOOTH, t)) == pytest.approx(math.sqrt(2), abs=1e-9)

    def test_polar_formula_at_one_point(self):
        mpmath.mp.dps = 40
        U, V, c = 0.0, math.pi / 4, 0.05
        curve = Curve(polar_spec(U, V, c))
        th = mpmath.pi / 8
        r = lambda x: 1 + c * mp_bump(x, U, mpmath.pi / 4)
        r0, r1, r2 = r(th), mpmath.diff(r, th, 1), mpmath.diff(r, th, 2)
        expected = (r0**2 + 2 * r1**2 - r0 * r2) / (r0**2 + r1**2) ** 1.5
        t = closest_point(curve, np.array([float(r0 * mpmath.cos(th)), float(r0 * mpmath.sin(th))])).t
        assert signed_curvature(curve, t) == pytest.approx(float(expected), rel=1e-8)

    def test_polar_formula_agrees_everywhere(self):
        seg = PolarBumpArc(U=-0.2, V=0.5, c=0.006)
        theta = np.linspace(-0.2, 0.5, 1002)[1:-1]
        r0, r1, r2 = seg.radius(theta, order=2)
        polar = (r0**2 + 2 * r1**2 - r0 * r2) / (r0**2 + r1**2) ** 1.5
        _, d1, d2 = seg.local(theta)
        param = (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]) / np.hypot(d1[:, 0], d1[:, 1]) ** 3
        assert np.max(np.abs(param - polar) / np.abs(polar)) < 1e-8

    def test_convexity(self):
        ok, kmin = is_convex(CIRCLE)
        assert ok and kmin == pytest.approx(1.0, abs=1e-9)
        ok, kmin = is_convex(SMOOTH, samples=100_000)
        assert not ok and kmin < 0
        ok, kmin = is_convex(NSQUARE)
        assert ok and kmin > 0

    def test_convexity_rejects_corners_and_few_samples(self):
        with pytest.raises(CurveError):
            is_convex(NONSMOOTH)
        with pytest.raises(ValueError):
            is_convex(CIRCLE, samples=999)


def brute_force_crossings(P: np.ndarray) -> int:
    """Proper crossings between non-adjacent edges of a closed polyline."""
    A, B = P, np.roll(P, -1, axis=0)
    n = len(P)
    count = 0
    for start in range(0, n, 256):
        a, b = A[start : start + 256, None], B[start : start + 256, None]
        c, d = A[None], B[None]

        def orient(p, q, r):
            return np.sign((q[..., 0] - p[..., 0]) * (r[..., 1] - p[..., 1]) - (q[..., 1] - p[..., 1]) * (r[..., 0] - p[..., 0]))

        cross = (orient(a, b, c) * orient(a, b, d) < 0) & (orient(c, d, a) * orient(c, d, b) < 0)
        i = np.arange(start, min(start + 256, n))[:, None]
        j = np.arange(n)[None]
        gap = np.abs(i - j)
        cross &= (gap > 1) & (gap < n - 1)
        count += int(cross.sum())
    return count // 2


class TestSimplicity:
    @pytest.mark.parametrize(
        "spec",
        [build_nonsmooth_two_square(), build_smooth_two_square(1.19), build_n_square(anchors=default_anchors(5))],
        ids=["nonsmooth2", "smooth2", "nsquare-5"],
    )
    def test_constructions_have_no_crossings(self, spec):
        assert spec.is_simple()
        assert brute_force_crossings(spec.polyline()) == 0

    def test_oversized_bump_crosses(self):
        spec = CurveSpec((CircleArc((0.0, 0.0), 1.0, -math.pi / 4, 5 * math.pi / 4), GraphBumpArc(c=2.5)))
        assert not spec.is_simple()
        assert brute_force_crossings(spec.polyline()) > 0


class TestClosestPoint:
    def test_outside_circle(self):
        cp = closest_point(CIRCLE, (2.0, 0.0))
        assert cp.t == pytest.approx(0.0, abs=1e-12) and cp.distance == pytest.approx(1.0, abs=1e-12)

    def test_center_of_circle_ties_to_smallest_parameter(self):
        cp = closest_point(CIRCLE, (0.0, 0.0))
        assert cp.distance == pytest.approx(1.0, abs=1e-12)
        assert cp.t == 0.0

    def test_against_dense_scan(self):
        q = np.array([0.0, 0.5])
        t = np.arange(1_000_000) / 1_000_000
        best = float(np.min(np.linalg.norm(SMOOTH.eval(t) - q, axis=1)))
        cp = closest_point(SMOOTH, q)
        assert cp.converged
        assert cp.distance == pytest.approx(best, abs=1e-6)
        assert cp.distance <= best + 1e-12

    @settings(max_examples=40, deadline=None)
    @given(st.floats(-1.6, 1.6), st.floats(-1.6, 1.6))
    def test_batched_matches_single(self, x, y):
        single = closest_point(NSQUARE, (x, y))
        t, dist = closest_points(NSQUARE, np.array([[x, y]]))
        assert dist[0] == pytest.approx(single.distance, abs=1e-9)


class TestSpecFiles:
    @pytest.mark.parametrize(
        "spec",
        [build_nonsmooth_two_square(), build_smooth_two_square(1.18264), build_n_square(anchors=(-0.2, 0.1, 0.4)), unit_circle_spec()],
        ids=["nonsmooth2", "smooth2", "nsquare", "circle"],
    )
    def test_json_round_trip(self, spec, tmp_path, rng):
        path = tmp_path / "curve.json"
        spec.save(path)
        again = CurveSpec.load(path)
        t = rng.random(1000)
        assert np.max(np.abs(Curve(spec).eval(t) - Curve(again).eval(t))) <= 1e-15
        assert again.name == spec.name

    def test_empty_segment_list(self):
        with pytest.raises(CurveError):
            CurveSpec(())

    def test_open_chain_rejected(self):
        with pytest.raises(CurveError):
            CurveSpec((CircleArc((0.0, 0.0), 1.0, 0.0, math.pi),))

    def test_angle_point(self):
        assert np.allclose(angle_point(-math.pi / 4), [INV_SQRT2, -INV_SQRT2])

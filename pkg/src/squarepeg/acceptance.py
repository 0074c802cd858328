"""Reproduction suite: eight numbered criteria with fixed tolerances.

Each criterion returns a :class:`CriterionResult` carrying the expected and
observed values as short strings. Enumerations shared between criteria (the
n-square curves, the two-square curves and their oracle runs) are computed
once per :class:`AcceptanceSuite` instance.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.optimize import linear_sum_assignment

from .constructions import (
    QUARTER,
    build_n_square,
    build_nonsmooth_two_square,
    build_smooth_two_square,
    critical_c,
    default_anchors,
    graph_locus_intersections,
    locus,
    max_convex_c,
    _min_arc_curvature,
)
from .curve import (
    DEFAULT_SHARPNESS,
    INV_SQRT2,
    Curve,
    CurveSpec,
    GraphBumpArc,
    PolarBumpArc,
    angle_point,
    bump,
    is_convex,
    unit_circle_spec,
)
from .oracle import oracle_enumerate
from .solver import SolveConfig, SolveReport, Square, enumerate_squares, residual_jacobian, square_residual

__all__ = ["AcceptanceSuite", "CriterionResult", "hausdorff", "format_table"]

N_VALUES = (1, 2, 3, 4, 5)
ORACLE_RESOLUTION = 512
SEED = 20240601


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    expected: str
    observed: str
    seconds: float

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"[{flag}] {self.number}. {self.name}: expected {self.expected}; observed {self.observed}"

    def to_dict(self) -> dict:
        return {
            "number": self.number,
            "name": self.name,
            "passed": self.passed,
            "expected": self.expected,
            "observed": self.observed,
            "seconds": round(self.seconds, 3),
        }


def hausdorff(A: np.ndarray, B: np.ndarray) -> float:
    """Symmetric Hausdorff distance between two finite point sets."""
    D = np.linalg.norm(A[:, None, :] - B[None, :, :], axis=-1)
    return float(max(D.min(axis=1).max(), D.min(axis=0).max()))


def match_square_sets(first: list[Square], second: list[Square]) -> tuple[bool, float]:
    """Whether the two lists pair up one-to-one, and the worst paired vertex-set distance."""
    if len(first) != len(second):
        return False, math.inf
    if not first:
        return True, 0.0
    cost = np.array([[hausdorff(np.asarray(a.vertices), np.asarray(b.vertices)) for b in second] for a in first])
    rows, cols = linear_sum_assignment(cost)
    worst = float(cost[rows, cols].max())
    return True, worst


def format_table(results: list[CriterionResult]) -> str:
    width = max(len(r.name) for r in results)
    lines = [f"{'#':>2}  {'criterion':<{width}}  {'result':<6}  {'time':>7}  observed (expected)"]
    for r in results:
        flag = "pass" if r.passed else "FAIL"
        lines.append(f"{r.number:>2}  {r.name:<{width}}  {flag:<6}  {r.seconds:6.1f}s  {r.observed} ({r.expected})")
    return "\n".join(lines)


def _fd_smooth_points(curve: Curve, rng: np.random.Generator, count: int, margin: float) -> np.ndarray:
    t = rng.random(count * 2)
    if curve.corners.size:
        gap = np.min(np.abs((t[:, None] - curve.corners[None, :] + 0.5) % 1.0 - 0.5), axis=1)
        t = t[gap > margin]
    return t[:count]


class AcceptanceSuite:
    """Runs the criteria and caches the enumerations they share."""

    def __init__(self, config: SolveConfig | None = None, oracle_resolution: int = ORACLE_RESOLUTION, seed: int = SEED):
        self.config = config or SolveConfig()
        self.oracle_resolution = oracle_resolution
        self.seed = seed
        self._reports: dict[str, tuple[SolveReport, float]] = {}
        self._oracle: dict[str, list[Square]] = {}

    # shared inputs

    @cached_property
    def critical(self):
        start = time.perf_counter()
        result = critical_c()
        return result, time.perf_counter() - start

    @cached_property
    def c_star(self) -> float:
        return self.critical[0].c_star

    @cached_property
    def n_square_specs(self) -> dict[int, CurveSpec]:
        return {n: build_n_square(anchors=default_anchors(n)) for n in N_VALUES}

    @cached_property
    def two_square_specs(self) -> dict[str, CurveSpec]:
        cs = self.c_star
        return {
            "nonsmooth2": build_nonsmooth_two_square(),
            "smooth2 c*": build_smooth_two_square(cs),
            "smooth2 c*-0.01": build_smooth_two_square(cs - 0.01),
            "smooth2 c*+0.01": build_smooth_two_square(cs + 0.01),
        }

    def constructions(self) -> dict[str, CurveSpec]:
        out = {f"nsquare-{n}": spec for n, spec in self.n_square_specs.items()}
        out.update(self.two_square_specs)
        return out

    def report(self, label: str, spec: CurveSpec) -> tuple[SolveReport, float]:
        if label not in self._reports:
            start = time.perf_counter()
            rep = enumerate_squares(Curve(spec), self.config)
            self._reports[label] = (rep, time.perf_counter() - start)
        return self._reports[label]

    def oracle(self, label: str, spec: CurveSpec) -> list[Square]:
        if label not in self._oracle:
            self._oracle[label] = oracle_enumerate(Curve(spec), self.oracle_resolution, self.config)
        return self._oracle[label]

    # criteria

    def criterion_1(self) -> CriterionResult:
        start = time.perf_counter()
        counts, failures, slowest = [], [], 0.0
        for n, spec in self.n_square_specs.items():
            rep, secs = self.report(f"nsquare-{n}", spec)
            slowest = max(slowest, secs)
            counts.append(len(rep.squares))
            if len(rep.squares) != n:
                failures.append(f"n={n} count")
                continue
            anchors = np.array([angle_point(p) for p in (-QUARTER,) + default_anchors(n)])
            hit = []
            for sq in rep.squares:
                V = np.asarray(sq.vertices)
                d = np.linalg.norm(V[:, None, :] - anchors[None, :, :], axis=-1)
                v, a = np.unravel_index(np.argmin(d), d.shape)
                others = np.delete(V, v, axis=0)
                if d[v, a] >= 1e-6 or np.max(np.abs(np.hypot(others[:, 0], others[:, 1]) - 1.0)) >= 1e-6:
                    failures.append(f"n={n} vertices")
                hit.append(a)
            if sorted(hit) != list(range(n)):
                failures.append(f"n={n} anchor matching")
            if secs >= 60:
                failures.append(f"n={n} runtime")
        return CriterionResult(
            1,
            "exactly-n reproduction",
            not failures,
            "counts [1, 2, 3, 4, 5], anchor vertex and circle vertices within 1e-6, < 60 s each",
            f"counts {counts}, slowest {slowest:.1f} s" + (f", failed: {', '.join(failures)}" if failures else ""),
            time.perf_counter() - start,
        )

    def criterion_2(self) -> CriterionResult:
        start = time.perf_counter()
        result, secs = self.critical
        cs = result.c_star
        below = graph_locus_intersections(cs - 0.01).count
        above = graph_locus_intersections(cs + 0.01).count
        ok = 1.18164 <= cs <= 1.18364 and below == 0 and above == 2 and secs < 5
        return CriterionResult(
            2,
            "critical amplitude",
            ok,
            "c* in [1.18164, 1.18364], counts 0 and 2 at c* -+ 0.01, < 5 s",
            f"c* = {cs:.10f}, counts {below} and {above}, {secs:.2f} s",
            time.perf_counter() - start,
        )

    def criterion_3(self) -> CriterionResult:
        start = time.perf_counter()
        counts = {}
        for label, spec in self.two_square_specs.items():
            counts[label] = len(self.report(label, spec)[0].squares)
        oracle_counts = {
            label: len(self.oracle(label, self.two_square_specs[label])) for label in ("smooth2 c*-0.01", "smooth2 c*+0.01")
        }
        ok = (
            counts["nonsmooth2"] == 2
            and counts["smooth2 c*"] == 2
            and all(counts[k] == v for k, v in oracle_counts.items())
        )
        return CriterionResult(
            3,
            "two-square curves",
            ok,
            "nonsmooth2 2, smooth2 at c* 2, smooth2 at c* -+ 0.01 equal to oracle "
            f"({oracle_counts['smooth2 c*-0.01']} and {oracle_counts['smooth2 c*+0.01']})",
            f"nonsmooth2 {counts['nonsmooth2']}, c* {counts['smooth2 c*']}, "
            f"c*-0.01 {counts['smooth2 c*-0.01']}, c*+0.01 {counts['smooth2 c*+0.01']}",
            time.perf_counter() - start,
        )

    def criterion_4(self) -> CriterionResult:
        start = time.perf_counter()
        minima, convex = [], []
        widths = set()
        for n, spec in self.n_square_specs.items():
            ok, kmin = is_convex(Curve(spec), samples=100_000)
            convex.append(ok and kmin > 0)
            minima.append(kmin)
            pts = (-QUARTER,) + default_anchors(n) + (QUARTER,)
            widths.update((u, v) for u, v in zip(pts, pts[1:]))
        doubled = [
            _min_arc_curvature(2 * max_convex_c(u, v), u, v, DEFAULT_SHARPNESS, 100_000) for u, v in sorted(widths)
        ]
        ok = all(convex) and max(doubled) < 0
        return CriterionResult(
            4,
            "convexity",
            ok,
            "convex with min curvature > 0 for n = 1..5, negative arc curvature at 2 max_convex_c",
            f"min curvature {min(minima):.4g}, worst doubled-arc minimum {max(doubled):.4g} over {len(doubled)} arcs",
            time.perf_counter() - start,
        )

    def criterion_5(self) -> CriterionResult:
        start = time.perf_counter()
        curve = Curve(unit_circle_spec())
        theta = np.random.default_rng(self.seed).random(1000)
        T = np.stack([theta, theta + 0.25, theta + 0.5, theta + 0.75], axis=1)
        worst = float(np.max(np.linalg.norm(square_residual(curve, T), axis=1)))
        rep, _ = self.report("unit-circle", unit_circle_spec())
        ok = worst < 1e-12 and rep.family_suspected
        return CriterionResult(
            5,
            "circle degeneracy",
            ok,
            "residual < 1e-12 on 1000 family squares, family suspected",
            f"max residual {worst:.2e}, familySuspected {rep.family_suspected} ({len(rep.squares)} squares)",
            time.perf_counter() - start,
        )

    def criterion_6(self) -> CriterionResult:
        start = time.perf_counter()
        worst, mismatched = 0.0, []
        for label, spec in self.constructions().items():
            rep, _ = self.report(label, spec)
            same, dist = match_square_sets(rep.squares, self.oracle(label, spec))
            if not same or dist >= 1e-6:
                mismatched.append(label)
            if same:
                worst = max(worst, dist)
        return CriterionResult(
            6,
            "oracle equivalence",
            not mismatched,
            f"identical sets on {len(self.constructions())} constructions, Hausdorff < 1e-6",
            f"worst Hausdorff {worst:.2e}" + (f", mismatched: {', '.join(mismatched)}" if mismatched else ""),
            time.perf_counter() - start,
        )

    def criterion_7(self) -> CriterionResult:
        start = time.perf_counter()
        rng = np.random.default_rng(self.seed + 7)
        specs = dict(self.constructions())
        specs["unit-circle"] = unit_circle_spec()
        worst = {"d1": 0.0, "d2": 0.0, "jac": 0.0, "flat": 0.0}
        failing = []
        for label, spec in specs.items():
            curve = Curve(spec)
            e = derivative_errors(curve, rng)
            j = jacobian_error(curve, rng)
            for key, val in (("d1", e[0]), ("d2", e[1]), ("jac", j)):
                worst[key] = max(worst[key], val)
            if e[0] >= 1e-6 or e[1] >= 1e-6 or j >= 1e-5:
                failing.append(label)
            for seg in spec.segments:
                if isinstance(seg, (GraphBumpArc, PolarBumpArc)):
                    worst["flat"] = max(worst["flat"], bump_flatness(seg))
        ok = not failing and worst["flat"] < 1e-12
        return CriterionResult(
            7,
            "numerical hygiene",
            ok,
            "deriv FD rel < 1e-6, Jacobian FD rel < 1e-5, bump flatness < 1e-12",
            f"deriv1 {worst['d1']:.2e}, deriv2 {worst['d2']:.2e}, Jacobian {worst['jac']:.2e}, "
            f"flatness {worst['flat']:.2e}" + (f", failing on: {', '.join(failing)}" if failing else ""),
            time.perf_counter() - start,
        )

    def criterion_8(self) -> CriterionResult:
        start = time.perf_counter()
        exact = max(abs(locus(0.0) - 1.0), abs(locus(INV_SQRT2) + INV_SQRT2), abs(locus(-INV_SQRT2) + INV_SQRT2))
        x = np.random.default_rng(self.seed + 8).uniform(-INV_SQRT2, INV_SQRT2, 100)
        worst = max(locus_square_error(xi) for xi in x)
        ok = exact <= 1e-15 and worst <= 1e-12
        return CriterionResult(
            8,
            "locus identities",
            ok,
            "endpoint identities to 1e-15, square relations to 1e-12",
            f"identity error {exact:.1e}, square relation error {worst:.1e}",
            time.perf_counter() - start,
        )

    def run(self, numbers=None) -> list[CriterionResult]:
        numbers = numbers or range(1, 9)
        return [getattr(self, f"criterion_{k}")() for k in numbers]


def derivative_errors(curve: Curve, rng: np.random.Generator, count: int = 1000) -> tuple[float, float]:
    """Worst relative errors of deriv orders 1 and 2 against central differences (steps 1e-5, 1e-4)."""
    t = _fd_smooth_points(curve, rng, count, margin=1e-3)
    p, d1, d2 = curve.jets(t)
    h = 1e-5
    f1 = (curve.eval(t + h) - curve.eval(t - h)) / (2 * h)
    h = 1e-4
    f2 = (curve.eval(t + h) - 2 * p + curve.eval(t - h)) / (h * h)
    e1 = np.linalg.norm(d1 - f1, axis=1) / np.linalg.norm(d1, axis=1)
    e2 = np.linalg.norm(d2 - f2, axis=1) / np.linalg.norm(d2, axis=1)
    return float(e1.max()), float(e2.max())


def jacobian_error(curve: Curve, rng: np.random.Generator, count: int = 100, h: float = 1e-6) -> float:
    """Worst entrywise error of the analytic Jacobian against central differences.

    Entries are compared relative to ``max(|J_ij|, 1)`` so that entries
    that vanish analytically are compared in absolute terms.
    """
    T = np.stack([_fd_smooth_points(curve, rng, count, margin=1e-3) for _ in range(4)], axis=1)
    J = residual_jacobian(curve, T)
    fd = np.empty_like(J)
    for k in range(4):
        e = np.zeros(4)
        e[k] = h
        fd[:, :, k] = (square_residual(curve, T + e) - square_residual(curve, T - e)) / (2 * h)
    return float(np.max(np.abs(J - fd) / np.maximum(np.abs(J), 1.0)))


def bump_flatness(seg, distance: float = 1e-3) -> float:
    """Largest bump term or derivative (orders 0 to 3) at ``distance`` inside either end."""
    if isinstance(seg, GraphBumpArc):
        lo, hi = -INV_SQRT2, INV_SQRT2
    else:
        lo, hi = seg.U, seg.V
    u = np.array([lo + distance, hi - distance])
    vals = bump(u, lo, hi, seg.a, order=3)
    return float(seg.c * np.max(np.abs(np.asarray(vals))))


def locus_square_error(x: float) -> float:
    """Deviation of the chord square at ``x`` from exact square relations."""
    top = math.sqrt(1.0 - x * x)
    y = locus(x)
    P = np.array([[x, top], [-x, top], [-x, y], [x, y]])
    sides = np.linalg.norm(P - np.roll(P, -1, axis=0), axis=1)
    diag = np.array([np.linalg.norm(P[0] - P[2]), np.linalg.norm(P[1] - P[3])])
    return float(
        max(
            np.max(np.abs(sides - sides[0])),
            abs(diag[0] - diag[1]),
            abs(diag[0] - math.sqrt(2.0) * sides[0]),
            abs(np.dot(P[0] - P[2], P[1] - P[3])),
        )
    )

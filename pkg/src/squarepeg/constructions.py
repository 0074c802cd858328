"""Factories for the curves with a prescribed number of inscribed squares.

Three families are built here:

* the non-smooth two-square curve: the unit circle with its lower quarter
  replaced by an inward semicircular dent;
* the smooth two-square curve: the same quarter replaced by the lower circle
  plus a flat bump of amplitude ``c``;
* the n-square curve: the right quarter ``[-pi/4, pi/4]`` replaced by a chain
  of polar bump arcs joined at the anchor angles.

It also provides the locus of square base points used to locate the critical
bump amplitude, and the two scalar searches (critical amplitude and largest
amplitude that keeps a polar bump arc convex).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .curve import (
    DEFAULT_SHARPNESS,
    INV_SQRT2,
    CircleArc,
    CurveError,
    CurveSpec,
    GraphBumpArc,
    PolarBumpArc,
    bump,
    semicircle_arc,
)

__all__ = [
    "ConstructionParams",
    "CriticalSearchResult",
    "IntersectionResult",
    "build_nonsmooth_two_square",
    "build_smooth_two_square",
    "build_n_square",
    "default_anchors",
    "locus",
    "graph_locus_intersections",
    "critical_c",
    "max_convex_c",
]

QUARTER = math.pi / 4
TANGENCY_TOLERANCE = 1e-9


@dataclass(frozen=True)
class ConstructionParams:
    """Anchors strictly inside ``(-pi/4, pi/4)`` plus bump settings.

    ``c`` is either one amplitude for every arc, a sequence with one entry
    per arc, or ``None`` for half the largest convex amplitude of each arc.
    """

    anchors: tuple[float, ...] = ()
    c: float | tuple[float, ...] | None = None
    a: float = DEFAULT_SHARPNESS

    def __post_init__(self):
        anchors = tuple(float(p) for p in self.anchors)
        object.__setattr__(self, "anchors", anchors)
        for p in anchors:
            if not -QUARTER < p < QUARTER:
                raise CurveError(f"anchor {p} is not inside (-pi/4, pi/4)")
        if any(b <= a for a, b in zip(anchors, anchors[1:])):
            raise CurveError("anchors must be strictly increasing")
        if not self.a > 0:
            raise CurveError(f"sharpness must be > 0, got {self.a}")
        if self.c is not None and not np.isscalar(self.c):
            cs = tuple(float(c) for c in self.c)
            if len(cs) != len(anchors) + 1:
                raise CurveError(f"expected {len(anchors) + 1} amplitudes, got {len(cs)}")
            object.__setattr__(self, "c", cs)

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return (-QUARTER,) + self.anchors + (QUARTER,)

    @property
    def target_count(self) -> int:
        return len(self.anchors) + 1

    def amplitudes(self) -> tuple[float, ...]:
        pts = self.breakpoints
        if self.c is None:
            return tuple(0.5 * max_convex_c(u, v, self.a) for u, v in zip(pts, pts[1:]))
        if np.isscalar(self.c):
            return (float(self.c),) * (len(pts) - 1)
        return self.c


@dataclass(frozen=True)
class IntersectionResult:
    count: int
    abscissas: tuple[float, ...]
    tangent: bool = False


@dataclass(frozen=True)
class CriticalSearchResult:
    c_star: float
    bracket: tuple[float, float]
    tangency_x: float
    iterations: int

    def to_dict(self) -> dict:
        return {
            "cStar": self.c_star,
            "bracket": list(self.bracket),
            "tangencyX": self.tangency_x,
            "iterations": self.iterations,
        }


def default_anchors(n: int) -> tuple[float, ...]:
    """``n - 1`` anchors evenly spaced in ``(-pi/4, pi/4)``."""
    if n < 1:
        raise CurveError(f"square count must be >= 1, got {n}")
    return tuple(-QUARTER + i * (2 * QUARTER) / n for i in range(1, n))


def build_nonsmooth_two_square() -> CurveSpec:
    """Unit circle with the arc between 5pi/4 and 7pi/4 replaced by a semicircle."""
    return CurveSpec(
        segments=(CircleArc((0.0, 0.0), 1.0, -QUARTER, 5 * QUARTER), semicircle_arc()),
        name="nonsmooth2",
        params={"kind": "nonsmooth2"},
    )


def build_smooth_two_square(c: float, a: float = DEFAULT_SHARPNESS) -> CurveSpec:
    """Three-quarter unit circle closed by the bumped lower graph."""
    if not c >= 0:
        raise CurveError(f"bump amplitude must be >= 0, got {c}")
    spec = CurveSpec(
        segments=(CircleArc((0.0, 0.0), 1.0, -QUARTER, 5 * QUARTER), GraphBumpArc(c=float(c), a=float(a))),
        name="smooth2",
        params={"kind": "smooth2", "c": float(c), "a": float(a)},
    )
    if not spec.is_simple():
        raise CurveError(f"non-simple curve: bump amplitude c={c} makes the graph cross the circle")
    return spec


def build_n_square(params: ConstructionParams | None = None, **kwargs) -> CurveSpec:
    """Curve whose inscribed squares correspond one-to-one to ``{-pi/4} + anchors``.

    The right quarter of the unit circle is replaced by polar bump arcs
    joining consecutive breakpoints ``-pi/4, anchors..., pi/4``.
    """
    if params is None:
        params = ConstructionParams(**kwargs)
    pts = params.breakpoints
    cs = params.amplitudes()
    arcs = tuple(PolarBumpArc(U=u, V=v, c=c, a=params.a) for u, v, c in zip(pts, pts[1:], cs))
    spec = CurveSpec(
        segments=(CircleArc((0.0, 0.0), 1.0, QUARTER, 7 * QUARTER),) + arcs,
        name=f"nsquare-{params.target_count}",
        params={
            "kind": "nsquare",
            "n": params.target_count,
            "anchors": list(params.anchors),
            "c": list(cs),
            "a": params.a,
        },
    )
    if not spec.is_simple():
        raise CurveError("non-simple curve: bump amplitudes too large")
    return spec


def locus(x):
    """Base corner ``sqrt(1 - x**2) - 2|x|`` of the square hanging from a chord.

    The square has its top side on the horizontal chord with endpoints
    ``(+-x, sqrt(1 - x**2))`` of the unit circle; ``(x, locus(x))`` is one
    of its two lower corners.
    """
    xa = np.abs(np.asarray(x, dtype=float))
    if np.any(xa > INV_SQRT2):
        raise ValueError(f"locus is defined for |x| <= 1/sqrt(2), got {x}")
    y = np.sqrt(1.0 - xa * xa) - 2.0 * xa
    return y if np.ndim(y) else float(y)


def _graph_minus_locus(x, c, a):
    return -np.sqrt(1.0 - x * x) + c * bump(x, -INV_SQRT2, INV_SQRT2, a)[0] - locus(x)


def graph_locus_intersections(
    c: float, a: float = DEFAULT_SHARPNESS, grid: int = 100_000
) -> IntersectionResult:
    """Crossings of the bumped graph with the right side of the locus.

    Counts sign changes of ``graph - locus`` on a grid over ``(0, 1/sqrt2)``
    (the shared endpoint at ``x = 1/sqrt2`` is excluded), refining each by
    bisection. Without a sign change, a near-touch ``min |g| < 1e-9`` is
    reported as a single tangency.
    """
    x = np.linspace(0.0, INV_SQRT2, grid + 2)[1:-1]
    g = _graph_minus_locus(x, c, a)
    flips = np.flatnonzero(np.sign(g[:-1]) * np.sign(g[1:]) < 0)
    roots = []
    for i in flips:
        lo, hi = x[i], x[i + 1]
        glo = g[i]
        while hi - lo > 1e-12:
            mid = 0.5 * (lo + hi)
            gm = _graph_minus_locus(mid, c, a)
            if np.sign(gm) == np.sign(glo):
                lo, glo = mid, gm
            else:
                hi = mid
        roots.append(0.5 * (lo + hi))
    exact = np.flatnonzero(g == 0.0)
    roots.extend(float(x[i]) for i in exact)
    if roots:
        return IntersectionResult(len(roots), tuple(sorted(roots)))
    i = int(np.argmin(np.abs(g)))
    if abs(g[i]) < TANGENCY_TOLERANCE:
        return IntersectionResult(1, (float(x[i]),), tangent=True)
    return IntersectionResult(0, ())


def _touch_point(c, a, grid=100_000):
    x = np.linspace(0.0, INV_SQRT2, grid + 2)[1:-1]
    g = _graph_minus_locus(x, c, a)
    return float(x[np.argmax(g)])


def critical_c(
    bracket: tuple[float, float] = (1.0, 1.4),
    a: float = DEFAULT_SHARPNESS,
    tol: float = 1e-10,
) -> CriticalSearchResult:
    """Bisect for the amplitude at which the bumped graph first touches the locus."""
    lo, hi = map(float, bracket)
    if not (lo < hi and graph_locus_intersections(lo, a).count == 0 and graph_locus_intersections(hi, a).count >= 1):
        raise ValueError(f"invalid bracket {bracket}: must go from 0 to >= 1 intersections")
    iterations = 0
    while hi - lo >= tol:
        mid = 0.5 * (lo + hi)
        if graph_locus_intersections(mid, a).count >= 1:
            hi = mid
        else:
            lo = mid
        iterations += 1
    c_star = 0.5 * (lo + hi)
    return CriticalSearchResult(c_star, (lo, hi), _touch_point(c_star, a), iterations)


def _min_arc_curvature(c, U, V, a, samples):
    theta = np.linspace(U, V, samples + 2)[1:-1]
    _, d1, d2 = PolarBumpArc(U=U, V=V, c=c, a=a).local(theta)
    num = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
    return float(np.min(num / np.hypot(d1[:, 0], d1[:, 1]) ** 3))


def max_convex_c(
    U: float, V: float, a: float = DEFAULT_SHARPNESS, samples: int = 100_000, tol: float = 1e-6
) -> float:
    """Largest bump amplitude keeping the polar arc's sampled curvature positive.

    Curvature of the arc is invariant under rotation, so only ``V - U``
    matters.
    """
    if not U < V:
        raise ValueError(f"need U < V, got U={U}, V={V}")
    return _max_convex_width(round(V - U, 15), float(a), samples, tol)


@lru_cache(maxsize=256)
def _max_convex_width(width: float, a: float, samples: int, tol: float) -> float:
    U, V = 0.0, width
    lo, hi = 0.0, 1.0
    if _min_arc_curvature(tol * 1e-3, U, V, a, samples) <= 0:
        raise RuntimeError("curvature sampling reports a non-convex arc at vanishing amplitude")
    if _min_arc_curvature(hi, U, V, a, samples) > 0:
        return hi
    while hi - lo >= tol:
        mid = 0.5 * (lo + hi)
        if _min_arc_curvature(mid, U, V, a, samples) > 0:
            lo = mid
        else:
            hi = mid
    return lo

"""Piecewise-analytic closed plane curves.

A closed curve is an ordered list of segments. Besides circular arcs there
are two bumped kinds: the lower unit-circle graph with a flat bump added
(``GraphBumpArc``) and its polar counterpart (``PolarBumpArc``). The semicircular dent of the non-smooth two-square curve
is a :class:`CircleArc` built by :func:`semicircle_arc`.

Every segment is evaluated in its own *native* parameter (an angle for the
arcs, the abscissa for the graph). :class:`Curve` maps a global parameter
``t`` in ``[0, 1)`` onto the segments, giving each segment a share of the
unit interval proportional to its arclength. Inside each share a monotone
warp of the native parameter makes the speed equal to the total length at
both ends of every segment, so geometrically smooth joints are also smooth
in ``t``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, NamedTuple, Union

import numpy as np
import shapely
from scipy.integrate import simpson

__all__ = [
    "Point",
    "CircleArc",
    "GraphBumpArc",
    "PolarBumpArc",
    "Segment",
    "CurveSpec",
    "Curve",
    "CurveError",
    "DegenerateParameterization",
    "ClosestPoint",
    "angle_point",
    "bump",
    "semicircle_arc",
    "signed_curvature",
    "is_convex",
    "closest_point",
    "closest_points",
    "unit_circle_spec",
]

INV_SQRT2 = 1.0 / math.sqrt(2.0)
DEFAULT_SHARPNESS = 0.02
JOINT_TOLERANCE = 1e-12
SIMPLICITY_SAMPLES = 4096
ARCLENGTH_SAMPLES = 1024
CLOSEST_POINT_SAMPLES = 4096

# exp(-700) is already far below the smallest normal double
_EXPONENT_CUTOFF = 700.0


class CurveError(ValueError):
    """Raised for malformed curve specifications."""


class DegenerateParameterization(ArithmeticError):
    """Raised when the curve speed vanishes where a curvature is requested."""


class Point(NamedTuple):
    x: float
    y: float


def angle_point(theta: float) -> Point:
    """Point of the unit circle at polar angle ``theta`` (radians)."""
    return Point(math.cos(theta), math.sin(theta))


def bump(u, left: float, right: float, a: float = DEFAULT_SHARPNESS, order: int = 0):
    """Flat bump ``exp(-(a/(u-left)**2 + a/(right-u)**2))`` and its derivatives.

    Returns a tuple ``(b, b', ..., b^(order))`` of arrays shaped like ``u``
    (``order`` at most 3). Outside the open interval ``(left, right)`` every
    entry is exactly zero, which is the continuous extension of the bump and
    all of its derivatives.
    """
    u = np.asarray(u, dtype=float)
    out = [np.zeros_like(u) for _ in range(order + 1)]
    inside = (u > left) & (u < right)
    if not np.any(inside):
        return tuple(out)
    p = u[inside] - left
    q = u[inside] - right
    e0 = a / p**2 + a / q**2
    ok = e0 < _EXPONENT_CUTOFF
    if not np.any(ok):
        return tuple(out)
    p, q, e0 = p[ok], q[ok], e0[ok]
    b = np.exp(-e0)
    idx = np.flatnonzero(inside)[ok]
    out[0].flat[idx] = b
    if order >= 1:
        e1 = -2 * a / p**3 - 2 * a / q**3
        out[1].flat[idx] = -e1 * b
    if order >= 2:
        e2 = 6 * a / p**4 + 6 * a / q**4
        out[2].flat[idx] = (e1 * e1 - e2) * b
    if order >= 3:
        e3 = -24 * a / p**5 - 24 * a / q**5
        out[3].flat[idx] = (-(e1**3) + 3 * e1 * e2 - e3) * b
    return tuple(out)


@dataclass(frozen=True)
class CircleArc:
    """Arc of a circle, traversed from ``start`` to ``end``.

    ``end > start`` runs counterclockwise, ``end < start`` clockwise.
    """

    center: tuple[float, float]
    radius: float
    start: float
    end: float
    kind: str = field(default="CircleArc", init=False, repr=False)

    def __post_init__(self):
        if not self.radius > 0:
            raise CurveError(f"circle radius must be positive, got {self.radius}")
        if self.start == self.end:
            raise CurveError("circle arc has zero angular extent")

    @property
    def native_range(self) -> tuple[float, float]:
        return self.start, self.end

    def local(self, u):
        cx, cy = self.center
        c, s = np.cos(u), np.sin(u)
        r = self.radius
        p = np.stack([cx + r * c, cy + r * s], axis=-1)
        d1 = np.stack([-r * s, r * c], axis=-1)
        d2 = np.stack([-r * c, -r * s], axis=-1)
        return p, d1, d2

    def deviation(self, u):
        """Size of the perturbation away from the base curve (none here)."""
        return np.full(np.shape(u), np.inf)

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "center": list(self.center),
            "radius": self.radius,
            "startAngle": self.start,
            "endAngle": self.end,
        }


def semicircle_arc() -> CircleArc:
    """Upper half of the circle of radius 1/sqrt(2) about (0, -1/sqrt(2)).

    This is the graph ``y = sqrt(1/2 - x**2) - 1/sqrt(2)``. It is traversed
    from ``x = -1/sqrt(2)`` to ``x = +1/sqrt(2)`` (clockwise about its own
    center) so that it closes a counterclockwise three-quarter unit circle.
    """
    return CircleArc(center=(0.0, -INV_SQRT2), radius=INV_SQRT2, start=math.pi, end=0.0)


@dataclass(frozen=True)
class GraphBumpArc:
    """Graph ``y = -sqrt(1 - x**2) + c * bump(x)`` for ``x`` in ``[-1/sqrt2, 1/sqrt2]``.

    Traversed left to right, i.e. counterclockwise along the lower circle.
    """

    c: float
    a: float = DEFAULT_SHARPNESS
    kind: str = field(default="GraphBumpArc", init=False, repr=False)

    def __post_init__(self):
        if not self.c >= 0:
            raise CurveError(f"bump amplitude must be >= 0, got {self.c}")
        if not self.a > 0:
            raise CurveError(f"sharpness must be > 0, got {self.a}")

    @property
    def native_range(self) -> tuple[float, float]:
        return -INV_SQRT2, INV_SQRT2

    def height(self, x):
        return -np.sqrt(1.0 - np.asarray(x) ** 2) + self.c * bump(x, -INV_SQRT2, INV_SQRT2, self.a)[0]

    def local(self, x):
        x = np.asarray(x, dtype=float)
        w = np.sqrt(1.0 - x * x)
        b0, b1, b2 = bump(x, -INV_SQRT2, INV_SQRT2, self.a, order=2)
        y = -w + self.c * b0
        y1 = x / w + self.c * b1
        y2 = 1.0 / w**3 + self.c * b2
        one, zero = np.ones_like(x), np.zeros_like(x)
        return (
            np.stack([x, y], axis=-1),
            np.stack([one, y1], axis=-1),
            np.stack([zero, y2], axis=-1),
        )

    def deviation(self, x):
        return self.c * bump(x, -INV_SQRT2, INV_SQRT2, self.a)[0]

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, "c": self.c, "a": self.a}


@dataclass(frozen=True)
class PolarBumpArc:
    """Polar arc ``r(theta) = 1 + c * bump(theta)`` for ``theta`` in ``[U, V]``."""

    U: float
    V: float
    c: float
    a: float = DEFAULT_SHARPNESS
    kind: str = field(default="PolarBumpArc", init=False, repr=False)

    def __post_init__(self):
        if not self.U < self.V:
            raise CurveError(f"polar arc needs U < V, got U={self.U}, V={self.V}")
        if not self.c >= 0:
            raise CurveError(f"bump amplitude must be >= 0, got {self.c}")
        if not self.a > 0:
            raise CurveError(f"sharpness must be > 0, got {self.a}")

    @property
    def native_range(self) -> tuple[float, float]:
        return self.U, self.V

    def radius(self, theta, order: int = 0):
        """``(r, r', ...)`` up to ``order`` at ``theta``."""
        bs = bump(theta, self.U, self.V, self.a, order=order)
        return (1.0 + self.c * bs[0],) + tuple(self.c * b for b in bs[1:])

    def local(self, theta):
        theta = np.asarray(theta, dtype=float)
        r, r1, r2 = self.radius(theta, order=2)
        c, s = np.cos(theta), np.sin(theta)
        p = np.stack([r * c, r * s], axis=-1)
        d1 = np.stack([r1 * c - r * s, r1 * s + r * c], axis=-1)
        d2 = np.stack([(r2 - r) * c - 2 * r1 * s, (r2 - r) * s + 2 * r1 * c], axis=-1)
        return p, d1, d2

    def deviation(self, theta):
        return self.c * bump(theta, self.U, self.V, self.a)[0]

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, "U": self.U, "V": self.V, "c": self.c, "a": self.a}


Segment = Union[CircleArc, GraphBumpArc, PolarBumpArc]
BUMP_KINDS = (GraphBumpArc, PolarBumpArc)


def segment_from_dict(d: dict[str, Any]) -> Segment:
    kind = d.get("kind")
    if kind == "CircleArc":
        return CircleArc(
            center=tuple(map(float, d["center"])),
            radius=float(d["radius"]),
            start=float(d["startAngle"]),
            end=float(d["endAngle"]),
        )
    if kind == "SemicircleArc":
        return semicircle_arc()
    if kind == "GraphBumpArc":
        return GraphBumpArc(c=float(d["c"]), a=float(d.get("a", DEFAULT_SHARPNESS)))
    if kind == "PolarBumpArc":
        return PolarBumpArc(
            U=float(d["U"]), V=float(d["V"]), c=float(d["c"]), a=float(d.get("a", DEFAULT_SHARPNESS))
        )
    raise CurveError(f"unknown segment kind {kind!r}")


def _segment_endpoints(seg: Segment) -> tuple[np.ndarray, np.ndarray]:
    u0, u1 = seg.native_range
    p = seg.local(np.array([u0, u1]))[0]
    return p[0], p[1]


@dataclass(frozen=True)
class CurveSpec:
    """Declarative closed curve: an ordered, cyclically joined list of segments."""

    segments: tuple[Segment, ...]
    name: str = "curve"
    params: dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        if not self.segments:
            raise CurveError("curve specification has no segments")
        n = len(self.segments)
        for k, seg in enumerate(self.segments):
            end = _segment_endpoints(seg)[1]
            nxt = _segment_endpoints(self.segments[(k + 1) % n])[0]
            gap = float(np.hypot(*(end - nxt)))
            if gap > JOINT_TOLERANCE:
                raise CurveError(f"segment {k} ends {gap:.3e} away from the start of segment {(k + 1) % n}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "params": self.params,
            "segments": [s.to_dict() for s in self.segments],
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "CurveSpec":
        try:
            segs = [segment_from_dict(s) for s in d["segments"]]
        except (KeyError, TypeError) as exc:
            raise CurveError(f"malformed curve specification: {exc}") from exc
        return cls(segments=tuple(segs), name=d.get("name", "curve"), params=dict(d.get("params", {})))

    @classmethod
    def from_json(cls, text: str) -> "CurveSpec":
        return cls.from_dict(json.loads(text))

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_json())
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "CurveSpec":
        with open(path) as fh:
            return cls.from_json(fh.read())

    def polyline(self, samples: int = SIMPLICITY_SAMPLES) -> np.ndarray:
        return Curve(self).eval(np.arange(samples) / samples)

    def is_simple(self, samples: int = SIMPLICITY_SAMPLES) -> bool:
        """True when the closed sampled polyline has no self-intersection."""
        ring = shapely.LinearRing(self.polyline(samples))
        return bool(ring.is_simple)


def unit_circle_spec() -> CurveSpec:
    return CurveSpec(segments=(CircleArc((0.0, 0.0), 1.0, 0.0, 2 * math.pi),), name="unit-circle")


# smoothstep complement 1 - 10x^3 + 15x^4 - 6x^5: one at 0, zero at 1, flat to second order at both
_CUTOFF = np.polynomial.Polynomial([1.0, 0.0, 0.0, -10.0, 15.0, -6.0])
_CUTOFF_MASS = 0.5
_CUTOFF_MOMENT = 1.0 / 7.0


class _EndWarp:
    """Monotone map ``s -> psi(s)`` of ``[0, 1]`` onto itself with prescribed end jets.

    ``psi'`` is a constant ``gamma`` in the middle and blends, inside windows
    of width ``delta`` at each end, into ``alpha + beta * x`` (``x`` the
    distance from that end) through a smoothstep cutoff. Inside a window
    ``psi'`` is a convex combination of ``gamma`` and the end line, so the
    map is increasing whenever both are positive, which the window width
    guarantees.
    """

    def __init__(self, alpha0: float, beta0: float, alpha1: float, beta1: float):
        delta = 0.25 / max(alpha0, alpha1, 1.0)
        for alpha, beta in ((alpha0, beta0), (alpha1, beta1)):
            if beta < 0:
                delta = min(delta, 0.5 * alpha / -beta)
        if beta0 != beta1:
            delta = min(delta, math.sqrt(0.25 / (_CUTOFF_MOMENT * abs(beta0 - beta1))))
        mass, moment = delta * _CUTOFF_MASS, delta * delta * _CUTOFF_MOMENT
        gamma = (1.0 - mass * (alpha0 + alpha1) - moment * (beta0 - beta1)) / (1.0 - 2.0 * mass)
        cut = _CUTOFF(np.polynomial.Polynomial([0.0, 1.0 / delta]))
        # left window in s, right window in r = 1 - s (slope in r is -beta1)
        self.delta, self.gamma = float(delta), float(gamma)
        left = np.polynomial.Polynomial([alpha0 - gamma, beta0]) * cut
        right = np.polynomial.Polynomial([alpha1 - gamma, -beta1]) * cut
        # coefficient arrays, highest degree first, for (integral, value, derivative)
        self._left = tuple(q.coef[::-1].copy() for q in (left.integ(), left, left.deriv()))
        self._right = tuple(q.coef[::-1].copy() for q in (right.integ(), right, right.deriv()))
        self._trivial = not (np.any(left.coef) or np.any(right.coef))

    @classmethod
    def for_segment(cls, seg, share: float, length: float) -> "_EndWarp":
        """Warp giving the global speed ``length`` with zero acceleration at both segment ends."""
        u0, u1 = seg.native_range
        du = u1 - u0
        jets = []
        for u_end in (u0, u1):
            _, p1, p2 = seg.local(np.array([u_end]))
            speed = float(np.hypot(*p1[0]))
            if speed < 1e-12:
                raise DegenerateParameterization(f"zero native speed at the end of {type(seg).__name__}")
            dspeed = float(np.dot(p1[0], p2[0])) / speed
            u_t = math.copysign(length / speed, du)
            u_tt = -dspeed * u_t * u_t / speed
            jets.append((u_t * share / du, u_tt * share * share / du))
        (a0, b0), (a1, b1) = jets
        return cls(a0, b0, a1, b1)

    def __call__(self, s):
        """``psi``, ``psi'`` and ``psi''`` at ``s``."""
        s = np.asarray(s, dtype=float)
        psi = self.gamma * s
        dpsi = np.full(s.shape, self.gamma)
        ddpsi = np.zeros(s.shape)
        if self._trivial:
            return psi, dpsi, ddpsi
        d = self.delta
        m = s < d
        if np.any(m):
            x = s[m]
            psi[m] += np.polyval(self._left[0], x)
            dpsi[m] += np.polyval(self._left[1], x)
            ddpsi[m] += np.polyval(self._left[2], x)
        psi[~m] += np.polyval(self._left[0], d)
        m = 1.0 - s < d
        if np.any(m):
            r = 1.0 - s[m]
            psi[m] += np.polyval(self._right[0], d) - np.polyval(self._right[0], r)
            dpsi[m] += np.polyval(self._right[1], r)
            ddpsi[m] -= np.polyval(self._right[2], r)
        return psi, dpsi, ddpsi


class Curve:
    """Evaluatable closed curve over the global parameter ``t`` in ``[0, 1)``.

    All evaluation methods accept scalars or arrays of ``t``; values outside
    ``[0, 1)`` are wrapped. A parameter lying exactly on a joint belongs to
    the segment that starts there.
    """

    def __init__(self, spec: CurveSpec):
        self.spec = spec
        self.segments = spec.segments
        s = np.linspace(0.0, 1.0, ARCLENGTH_SAMPLES)
        lengths = []
        for seg in self.segments:
            u0, u1 = seg.native_range
            speed = np.hypot(*seg.local(u0 + s * (u1 - u0))[1].T)
            lengths.append(float(simpson(speed, x=s) * abs(u1 - u0)))
        self.lengths = np.array(lengths)
        self.length = float(self.lengths.sum())
        shares = self.lengths / self.length
        self.breaks = np.concatenate([[0.0], np.cumsum(shares)])
        self.breaks[-1] = 1.0
        self.shares = np.diff(self.breaks)
        self._warps = [_EndWarp.for_segment(seg, share, self.length) for seg, share in zip(self.segments, self.shares)]
        self._ranges = np.array([seg.native_range for seg in self.segments])

    @property
    def name(self) -> str:
        return self.spec.name

    def __repr__(self):
        return f"Curve({self.name!r}, {len(self.segments)} segments)"

    def locate(self, t):
        """Segment index and local parameter ``s`` in ``[0, 1)`` for each ``t``."""
        t = np.mod(np.asarray(t, dtype=float), 1.0)
        k = np.searchsorted(self.breaks, t, side="right") - 1
        k = np.clip(k, 0, len(self.segments) - 1)
        s = (t - self.breaks[k]) / self.shares[k]
        return k, s

    def _native(self, t):
        """Native segment parameters with the chain-rule factors du/dt and d2u/dt2."""
        k, s = self.locate(t)
        psi = np.empty_like(s)
        dpsi = np.empty_like(s)
        ddpsi = np.empty_like(s)
        for j, warp in enumerate(self._warps):
            m = k == j
            if np.any(m):
                psi[m], dpsi[m], ddpsi[m] = warp(s[m])
        u0, u1 = self._ranges[k, 0], self._ranges[k, 1]
        du, share = u1 - u0, self.shares[k]
        return k, u0 + du * psi, du * dpsi / share, du * ddpsi / (share * share)

    def jets(self, t):
        """Position, first and second ``t``-derivatives, each shaped ``(..., 2)``."""
        t = np.asarray(t, dtype=float)
        shape = t.shape
        k, u, u_t, u_tt = self._native(t.ravel())
        p = np.empty((u.size, 2))
        d1 = np.empty((u.size, 2))
        d2 = np.empty((u.size, 2))
        for j, seg in enumerate(self.segments):
            m = k == j
            if not np.any(m):
                continue
            pj, d1j, d2j = seg.local(u[m])
            p[m] = pj
            d1[m] = d1j * u_t[m, None]
            d2[m] = d2j * (u_t[m, None] ** 2) + d1j * u_tt[m, None]
        return p.reshape(shape + (2,)), d1.reshape(shape + (2,)), d2.reshape(shape + (2,))

    def eval(self, t) -> np.ndarray:
        return self.jets(t)[0]

    def point(self, t: float) -> Point:
        x, y = self.eval(float(t))
        return Point(float(x), float(y))

    def deriv(self, t, order: int = 1) -> np.ndarray:
        """Analytic ``d^order position / dt^order`` for order 1 or 2.

        At a corner joint the derivative of the segment owning ``t`` is
        returned (the one-sided derivative from the right).
        """
        if order not in (1, 2):
            raise ValueError(f"derivative order must be 1 or 2, got {order}")
        return self.jets(t)[order]

    def deviation(self, t):
        """Magnitude of the bump term at ``t``; ``inf`` off bump segments."""
        t = np.asarray(t, dtype=float)
        k, u, _, _ = self._native(t.ravel())
        out = np.full(u.shape, np.inf)
        for j, seg in enumerate(self.segments):
            m = k == j
            if np.any(m):
                out[m] = seg.deviation(u[m])
        return out.reshape(t.shape)

    def segment_bounds(self, t) -> tuple[float, float]:
        """``(start, end)`` global parameters of the segment owning ``t``."""
        k, _ = self.locate(float(t))
        return float(self.breaks[k]), float(self.breaks[k + 1])

    @cached_property
    def corners(self) -> np.ndarray:
        """Global parameters of joints where the unit tangent jumps."""
        out = []
        n = len(self.segments)
        for j in range(n):
            prev = self.segments[j - 1]
            cur = self.segments[j]
            u0p, u1p = prev.native_range
            u0c, u1c = cur.native_range
            tin = prev.local(np.array([u1p]))[1][0] * np.sign(u1p - u0p)
            tout = cur.local(np.array([u0c]))[1][0] * np.sign(u1c - u0c)
            tin = tin / np.hypot(*tin)
            tout = tout / np.hypot(*tout)
            if np.hypot(*(tin - tout)) > 1e-8:
                out.append(self.breaks[j])
        return np.array(out)

    @property
    def is_smooth(self) -> bool:
        return self.corners.size == 0

    @cached_property
    def bump_joints(self) -> np.ndarray:
        """Global parameters of joints adjacent to a bump segment."""
        out = []
        n = len(self.segments)
        for j in range(n):
            if isinstance(self.segments[j], BUMP_KINDS) or isinstance(self.segments[j - 1], BUMP_KINDS):
                out.append(self.breaks[j])
        return np.array(out)

    @cached_property
    def dense_samples(self) -> tuple[np.ndarray, np.ndarray]:
        t = np.arange(CLOSEST_POINT_SAMPLES) / CLOSEST_POINT_SAMPLES
        return t, self.eval(t)


def signed_curvature(curve: Curve, t):
    """``(x'y'' - y'x'') / |p'|**3``; positive on counterclockwise convex arcs."""
    _, d1, d2 = curve.jets(t)
    speed = np.hypot(d1[..., 0], d1[..., 1])
    if np.any(speed < 1e-12):
        raise DegenerateParameterization("degenerate parameterization: zero speed")
    kappa = (d1[..., 0] * d2[..., 1] - d1[..., 1] * d2[..., 0]) / speed**3
    return kappa if np.ndim(kappa) else float(kappa)


def is_convex(curve: Curve, samples: int = 100_000) -> tuple[bool, float]:
    """Check convexity by sampling the signed curvature uniformly in ``t``.

    Returns ``(convex, min_curvature)``. Samples within 1e-9 of a joint are
    skipped. Curves with corner joints are rejected.
    """
    if samples < 1000:
        raise ValueError("convexity check needs at least 1000 samples")
    if not curve.is_smooth:
        raise CurveError("convexity check requires a curve without corner joints")
    t = np.arange(samples) / samples
    dist = np.abs(t[:, None] - curve.breaks[None, :]).min(axis=1)
    t = t[dist > 1e-9]
    kappa = signed_curvature(curve, t)
    kmin = float(np.min(kappa))
    return bool(kmin > 0), kmin


class ClosestPoint(NamedTuple):
    t: float
    distance: float
    converged: bool


def closest_point(curve: Curve, q, samples: int | None = None, max_iter: int = 30) -> ClosestPoint:
    """Globally closest curve point to ``q``.

    Dense sampling picks candidate basins (ties go to the smallest ``t``);
    each is refined by Newton on ``(p(t) - q) . p'(t) = 0`` kept inside the
    neighbouring sample interval. If no refinement converges the best sample
    is returned with ``converged=False``.
    """
    q = np.asarray(q, dtype=float)
    if samples is None:
        ts, ps = curve.dense_samples
    else:
        ts = np.arange(samples) / samples
        ps = curve.eval(ts)
    n = ts.size
    h = 1.0 / n
    d = np.hypot(ps[:, 0] - q[0], ps[:, 1] - q[1])
    dmin = d.min()
    ties = np.flatnonzero(d <= dmin + 1e-12)
    # local minima that could still beat the best sample after refinement
    local = np.flatnonzero((d <= np.roll(d, 1)) & (d <= np.roll(d, -1)) & (d <= dmin + 2 * h * curve.length))
    local = local[np.argsort(d[local], kind="stable")][:16]
    candidates = [int(ties[0])] + [int(i) for i in local if i != ties[0]]

    best = ClosestPoint(float(ts[ties[0]]), float(dmin), False)
    best_key = (dmin, ts[ties[0]])
    for i in candidates:
        t = ts[i]
        lo, hi = t - h, t + h
        ok = False
        for _ in range(max_iter):
            p, d1, d2 = curve.jets(t)
            r = p - q
            g = r @ d1
            gp = d1 @ d1 + r @ d2
            if abs(g) < 1e-15 * max(1.0, d1 @ d1):
                ok = True
                break
            if gp <= 0:
                break
            step = g / gp
            t_new = min(max(t - step, lo), hi)
            if abs(t_new - t) < 1e-16:
                ok = True
                break
            t = t_new
        if not ok:
            continue
        dist = float(np.hypot(*(curve.eval(t) - q)))
        tw = float(np.mod(t, 1.0))
        key = (dist, tw)
        if not best.converged or dist < best_key[0] - 1e-14 or (abs(dist - best_key[0]) <= 1e-14 and tw < best_key[1]):
            best = ClosestPoint(tw, dist, True)
            best_key = key
    return best


def closest_points(curve: Curve, Q, k: int = 8, max_iter: int = 30) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized closest-point projection of many query points.

    The ``k`` nearest dense samples of each query seed clamped Newton
    refinements; the best refined candidate wins. Returns ``(t, distance)``.
    """
    from scipy.spatial import cKDTree

    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    ts, ps = curve.dense_samples
    h = 1.0 / ts.size
    tree = curve._sample_tree if hasattr(curve, "_sample_tree") else None
    if tree is None:
        tree = cKDTree(ps)
        curve._sample_tree = tree
    k = min(k, ts.size)
    _, nn = tree.query(Q, k=k)
    nn = nn.reshape(len(Q), k)
    t = ts[nn].ravel()
    lo, hi = t - h, t + h
    q = np.repeat(Q, k, axis=0)
    for _ in range(max_iter):
        p, d1, d2 = curve.jets(t)
        r = p - q
        g = np.sum(r * d1, axis=1)
        gp = np.sum(d1 * d1, axis=1) + np.sum(r * d2, axis=1)
        step = np.where(gp > 0, g / np.where(gp > 0, gp, 1.0), 0.0)
        t_new = np.clip(t - step, lo, hi)
        if np.max(np.abs(t_new - t)) < 1e-16:
            t = t_new
            break
        t = t_new
    dist = np.hypot(*(curve.eval(t) - q).T).reshape(len(Q), k)
    best = np.argmin(dist, axis=1)
    rows = np.arange(len(Q))
    return np.mod(t.reshape(len(Q), k)[rows, best], 1.0), dist[rows, best]

"""Enumeration of squares inscribed in a closed curve.

Four curve parameters ``t1..t4`` describe a square ``p1 p2 p3 p4`` (in that
cyclic order) exactly when its diagonals share a midpoint, have equal length
and are perpendicular::

    F1 = x1 + x3 - x2 - x4
    F2 = y1 + y3 - y2 - y4
    F3 = |p1 - p3|**2 - |p2 - p4|**2
    F4 = (p1 - p3) . (p2 - p4)

``F = 0`` also holds on the degenerate manifold ``t1 = t2 = t3 = t4``, which
is removed by a minimum side length.

The enumerator runs damped Newton from every cyclically ordered point of a
4D seed grid, then post-processes the roots:

* Bump arcs agree with their base curve to all orders at their end joints,
  so near a joint the curve is numerically indistinguishable from the base
  circle and Newton accepts a short continuum of near-squares. Any root with
  a vertex inside such a flat zone is replaced by the root obtained with
  that vertex pinned to the joint, which is where the bump term vanishes
  exactly.
* Near a corner joint the iteration is retried with the vertex pinned to the
  corner.
* A stalled iterate whose residual is below ``tangent_tolerance`` is kept as
  a tangential (double) root and flagged.
"""

from __future__ import annotations

import itertools
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np

from scipy.spatial import cKDTree

from .curve import Curve, closest_points

__all__ = [
    "SolveConfig",
    "Square",
    "SolveReport",
    "NewtonResult",
    "square_residual",
    "residual_jacobian",
    "newton_refine",
    "pinned_refine",
    "enumerate_squares",
    "canonical_key",
    "make_square",
    "verify_square",
    "verify_squares",
    "dedup_squares",
    "family_suspected",
]

GRID_ENV = "SQUAREPEG_SEED_GRID"


def _default_grid() -> int:
    return int(os.environ.get(GRID_ENV, 24))


@dataclass(frozen=True)
class SolveConfig:
    grid_resolution: int = field(default_factory=_default_grid)
    newton_tolerance: float = 1e-12
    max_newton_iterations: int = 50
    dedup_tolerance: float = 1e-6
    min_side_length: float = 1e-2
    family_gap_threshold: float = 1e-5
    family_chain_length: int = 10
    vertex_tolerance: float = 1e-9
    tangent_tolerance: float = 1e-8
    condition_limit: float = 1e12
    # bump term below which a vertex sits in a flat zone of its joint
    flat_tolerance: float = 1e-9
    snap_tolerance: float = 1e-6
    corner_window: float = 0.02
    max_step: float = 0.2
    threads: int = 1

    def __post_init__(self):
        if self.grid_resolution < 8:
            raise ValueError(f"grid resolution must be >= 8, got {self.grid_resolution}")
        for name in (
            "newton_tolerance",
            "dedup_tolerance",
            "min_side_length",
            "family_gap_threshold",
            "vertex_tolerance",
            "tangent_tolerance",
            "flat_tolerance",
            "snap_tolerance",
        ):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class Square:
    params: tuple[float, float, float, float]
    vertices: tuple[tuple[float, float], ...]
    center: tuple[float, float]
    half_diagonal: tuple[float, float]
    side_length: float
    residual_norm: float
    tangent: bool = False
    pinned: bool = False

    @property
    def angle(self) -> float:
        """Direction of the first diagonal modulo pi/2."""
        return math.atan2(self.half_diagonal[1], self.half_diagonal[0]) % (math.pi / 2)

    def features(self) -> np.ndarray:
        return np.array([self.center[0], self.center[1], self.side_length, self.angle])

    def to_dict(self) -> dict:
        return {
            "params": list(self.params),
            "vertices": [list(v) for v in self.vertices],
            "center": list(self.center),
            "halfDiagonal": list(self.half_diagonal),
            "sideLength": self.side_length,
            "residualNorm": self.residual_norm,
            "tangent": self.tangent,
            "pinned": self.pinned,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Square":
        return cls(
            params=tuple(d["params"]),
            vertices=tuple(tuple(v) for v in d["vertices"]),
            center=tuple(d["center"]),
            half_diagonal=tuple(d.get("halfDiagonal", (0.0, 0.0))),
            side_length=float(d["sideLength"]),
            residual_norm=float(d["residualNorm"]),
            tangent=bool(d.get("tangent", False)),
            pinned=bool(d.get("pinned", False)),
        )


@dataclass
class SolveReport:
    curve: str
    config: SolveConfig
    squares: list[Square]
    family_suspected: bool
    seeds_tried: int = 0
    converged: int = 0
    filtered_degenerate: int = 0
    filtered_off_curve: int = 0
    filtered_flat: int = 0
    pinned: int = 0
    wall_time: float = 0.0

    def to_dict(self) -> dict:
        return {
            "curve": self.curve,
            "config": self.config.to_dict(),
            "squares": [s.to_dict() for s in self.squares],
            "familySuspected": self.family_suspected,
            "stats": {
                "seedsTried": self.seeds_tried,
                "converged": self.converged,
                "filteredDegenerate": self.filtered_degenerate,
                "filteredOffCurve": self.filtered_off_curve,
                "filteredFlat": self.filtered_flat,
                "pinned": self.pinned,
                "wallTime": self.wall_time,
            },
        }

    def to_csv(self) -> str:
        rows = ["t1,t2,t3,t4,x1,y1,x2,y2,x3,y3,x4,y4,cx,cy,side,residual,tangent"]
        for s in self.squares:
            vals = list(s.params) + [c for v in s.vertices for c in v]
            vals += [s.center[0], s.center[1], s.side_length, s.residual_norm]
            rows.append(",".join(repr(float(v)) for v in vals) + f",{int(s.tangent)}")
        return "\n".join(rows) + "\n"


def _residual_from_points(P: np.ndarray) -> np.ndarray:
    p1, p2, p3, p4 = P[..., 0, :], P[..., 1, :], P[..., 2, :], P[..., 3, :]
    d13 = p1 - p3
    d24 = p2 - p4
    s = p1 + p3 - p2 - p4
    return np.stack(
        [
            s[..., 0],
            s[..., 1],
            np.sum(d13 * d13, axis=-1) - np.sum(d24 * d24, axis=-1),
            np.sum(d13 * d24, axis=-1),
        ],
        axis=-1,
    )


def square_residual(curve: Curve, t) -> np.ndarray:
    """Square residual ``F(t)`` for one quadruple ``(4,)`` or a batch ``(N, 4)``."""
    return _residual_from_points(curve.eval(np.asarray(t, dtype=float)))


def _jacobian_from_jets(P: np.ndarray, D: np.ndarray) -> np.ndarray:
    d13 = P[..., 0, :] - P[..., 2, :]
    d24 = P[..., 1, :] - P[..., 3, :]
    J = np.empty(P.shape[:-2] + (4, 4))
    # F1, F2: +p1 -p2 +p3 -p4
    J[..., 0, :] = np.array([1.0, -1.0, 1.0, -1.0]) * D[..., 0]
    J[..., 1, :] = np.array([1.0, -1.0, 1.0, -1.0]) * D[..., 1]
    # F3 = |d13|^2 - |d24|^2 with d13 = p1 - p3, d24 = p2 - p4
    J[..., 2, 0] = 2 * np.sum(d13 * D[..., 0, :], axis=-1)
    J[..., 2, 2] = -2 * np.sum(d13 * D[..., 2, :], axis=-1)
    J[..., 2, 1] = -2 * np.sum(d24 * D[..., 1, :], axis=-1)
    J[..., 2, 3] = 2 * np.sum(d24 * D[..., 3, :], axis=-1)
    # F4 = d13 . d24
    J[..., 3, 0] = np.sum(D[..., 0, :] * d24, axis=-1)
    J[..., 3, 2] = -np.sum(D[..., 2, :] * d24, axis=-1)
    J[..., 3, 1] = np.sum(d13 * D[..., 1, :], axis=-1)
    J[..., 3, 3] = -np.sum(d13 * D[..., 3, :], axis=-1)
    return J


def residual_jacobian(curve: Curve, t) -> np.ndarray:
    """Analytic ``dF/dt`` shaped ``(4, 4)`` or ``(N, 4, 4)``.

    At a corner joint the one-sided derivative of the owning segment is used.
    """
    P, D, _ = curve.jets(np.asarray(t, dtype=float))
    return _jacobian_from_jets(P, D)


class NewtonResult(NamedTuple):
    t: np.ndarray
    converged: bool
    tangent: bool
    reason: str
    residual: float
    iterations: int


def _wrap(T):
    return np.mod(T, 1.0)


def _newton_batch(curve: Curve, seeds: np.ndarray, config: SolveConfig, fixed: np.ndarray | None = None):
    """Damped Newton on many seeds at once.

    Steps come from a truncated SVD of the Jacobian, so directions whose
    singular value is below ``1/condition_limit`` of the largest are left
    alone. Returns final iterates, residual norms and a status array with
    values ``converged``, ``tangent``, ``singular`` (ill-conditioned and no
    descent), ``stalled``, ``no convergence``.

    ``fixed`` is an optional ``(N, 4)`` mask of parameters held constant;
    their Jacobian columns are zeroed, which makes the step a Gauss-Newton
    step in the remaining parameters.
    """
    T = _wrap(np.array(seeds, dtype=float, copy=True))
    n = T.shape[0]
    status = np.full(n, "", dtype=object)
    iters = np.zeros(n, dtype=int)
    P = curve.eval(T)
    F = _residual_from_points(P)
    norm = np.linalg.norm(F, axis=1)
    active = np.ones(n, dtype=bool)
    tol = config.newton_tolerance
    for it in range(config.max_newton_iterations + 1):
        done = active & (norm < tol)
        status[done] = "converged"
        active &= ~done
        if it == config.max_newton_iterations or not np.any(active):
            break
        idx = np.flatnonzero(active)
        Pa, Da, _ = curve.jets(T[idx])
        J = _jacobian_from_jets(Pa, Da)
        if fixed is not None:
            J = J * ~fixed[idx][:, None, :]
        U, sv, Vt = np.linalg.svd(J)
        rank_def = sv[:, 0] > config.condition_limit * sv[:, -1]
        # truncated-SVD step: directions below 1/condition_limit are dropped
        keep = sv > sv[:, :1] / config.condition_limit
        inv = np.where(keep, 1.0 / np.where(keep, sv, 1.0), 0.0)
        coeff = -np.einsum("nji,nj->ni", U, F[idx]) * inv
        step = np.einsum("nji,nj->ni", Vt, coeff)
        big = np.max(np.abs(step), axis=1)
        step *= np.minimum(1.0, config.max_step / np.maximum(big, 1e-300))[:, None]
        lam = np.ones(idx.size)
        pending = np.ones(idx.size, dtype=bool)
        for _ in range(30):
            cand = _wrap(T[idx[pending]] + lam[pending, None] * step[pending])
            Fc = square_residual(curve, cand)
            nc = np.linalg.norm(Fc, axis=1)
            ok = nc < norm[idx[pending]]
            sel = np.flatnonzero(pending)[ok]
            T[idx[sel]] = cand[ok]
            F[idx[sel]] = Fc[ok]
            norm[idx[sel]] = nc[ok]
            pending[sel] = False
            if not np.any(pending):
                break
            lam[pending] *= 0.5
        stalled = idx[pending]
        status[stalled] = np.where(rank_def[pending], "singular", "stalled")
        active[stalled] = False
        iters[idx] = it + 1
    status[active] = "no convergence"
    near = (status != "converged") & (norm < config.tangent_tolerance) & (status != "no convergence")
    status[near] = "tangent"
    return T, norm, status, iters


def newton_refine(curve: Curve, seed, config: SolveConfig | None = None) -> NewtonResult:
    """Damped Newton from one seed quadruple."""
    config = config or SolveConfig()
    T, norm, status, iters = _newton_batch(curve, np.asarray(seed, dtype=float)[None, :], config)
    s = status[0]
    return NewtonResult(T[0], s == "converged", s == "tangent", s, float(norm[0]), int(iters[0]))


def pinned_refine(curve: Curve, t, index: int, joint: float, config: SolveConfig | None = None) -> NewtonResult:
    """Gauss-Newton on the three free parameters with ``t[index] = joint`` held fixed."""
    config = config or SolveConfig()
    T, norm, status, iters = _pinned_batch(curve, np.asarray(t, dtype=float)[None, :], np.array([index]), np.array([joint]), config)
    s = status[0]
    return NewtonResult(T[0], s == "converged", False, s, float(norm[0]), int(iters[0]))


def _pinned_batch(curve: Curve, T: np.ndarray, index: np.ndarray, joint: np.ndarray, config: SolveConfig):
    T = _wrap(np.array(T, dtype=float))
    rows = np.arange(T.shape[0])
    T[rows, index] = np.mod(joint, 1.0)
    fixed = np.zeros(T.shape, dtype=bool)
    fixed[rows, index] = True
    return _newton_batch(curve, T, config, fixed=fixed)


def _square_arrays(curve: Curve, T: np.ndarray):
    """Vertices, sides, center, half diagonal and features for a batch."""
    P = curve.eval(T)
    side = np.linalg.norm(P - np.roll(P, -1, axis=1), axis=2).mean(axis=1)
    center = 0.25 * P.sum(axis=1)
    half = 0.5 * (P[:, 2] - P[:, 0])
    angle = np.mod(np.arctan2(half[:, 1], half[:, 0]), math.pi / 2)
    feats = np.column_stack([center, side, angle])
    return P, side, center, half, feats


def make_square(curve: Curve, t, residual: float | None = None, tangent: bool = False, pinned: bool = False) -> Square:
    T = _wrap(np.asarray(t, dtype=float))
    P = curve.eval(T)
    if residual is None:
        residual = float(np.linalg.norm(_residual_from_points(P)))
    sides = np.linalg.norm(P - np.roll(P, -1, axis=0), axis=1)
    center = 0.25 * P.sum(axis=0)
    half = 0.5 * (P[2] - P[0])
    return Square(
        params=tuple(float(x) for x in T),
        vertices=tuple((float(x), float(y)) for x, y in P),
        center=(float(center[0]), float(center[1])),
        half_diagonal=(float(half[0]), float(half[1])),
        side_length=float(sides.mean()),
        residual_norm=float(residual),
        tangent=tangent,
        pinned=pinned,
    )


def canonical_key(square: Square, tolerance: float = 1e-6) -> tuple[int, int, int, int]:
    """Rounded ``(center, side, diagonal angle mod pi/2)``; labeling invariant."""
    cx, cy, side, ang = square.features()
    if ang > math.pi / 2 - 0.5 * tolerance:
        ang -= math.pi / 2
    return tuple(int(round(v / tolerance)) for v in (cx, cy, side, ang))


def verify_squares(curve: Curve, squares: list[Square], vertex_tolerance: float = 1e-9, rel: float = 1e-8) -> np.ndarray:
    """Independent check of stored vertices: on the curve and a true square.

    Uses closest-point projection for the on-curve test and plain vertex
    geometry for the square test. Returns one boolean per square.
    """
    if not squares:
        return np.zeros(0, dtype=bool)
    P = np.array([s.vertices for s in squares], dtype=float)
    _, dist = closest_points(curve, P.reshape(-1, 2))
    on_curve = np.all(dist.reshape(-1, 4) < vertex_tolerance, axis=1)
    sides = np.linalg.norm(P - np.roll(P, -1, axis=1), axis=2)
    scale = sides.mean(axis=1)
    d1 = P[:, 2] - P[:, 0]
    d2 = P[:, 3] - P[:, 1]
    ok = (scale > 0) & (np.ptp(sides, axis=1) <= rel * scale)
    ok &= np.abs(np.linalg.norm(d1, axis=1) - np.linalg.norm(d2, axis=1)) <= rel * scale
    ok &= np.abs(np.sum(d1 * d2, axis=1)) <= rel * scale**2
    ok &= np.linalg.norm(0.5 * (P[:, 0] + P[:, 2] - P[:, 1] - P[:, 3]), axis=1) <= rel * scale
    return on_curve & ok


def verify_square(curve: Curve, square: Square, vertex_tolerance: float = 1e-9, rel: float = 1e-8) -> bool:
    return bool(verify_squares(curve, [square], vertex_tolerance, rel)[0])


def _embedded(squares: list[Square]) -> np.ndarray:
    """Features with the periodic angle unrolled onto a small circle."""
    F = np.array([s.features() for s in squares]).reshape(-1, 4)
    a = 4 * F[:, 3]
    return np.column_stack([F[:, :3], np.cos(a) / 4, np.sin(a) / 4])


def dedup_squares(squares: list[Square], tolerance: float) -> list[Square]:
    """Merge squares whose features agree within ``tolerance``.

    A pair involving a tangential root merges within ``sqrt(tolerance)``,
    the accuracy to which a double root is determined. Exact roots are
    preferred as representatives; the output is sorted by features and does
    not depend on input order.
    """
    if not squares:
        return []
    order = sorted(squares, key=lambda s: (s.tangent, s.residual_norm, tuple(s.features())))
    E = _embedded(order)
    tree = cKDTree(E)
    loose = math.sqrt(tolerance)
    kept = np.zeros(len(order), dtype=bool)
    for i, sq in enumerate(order):
        dup = False
        for j in tree.query_ball_point(E[i], loose, p=np.inf):
            if j != i and kept[j]:
                lim = loose if (sq.tangent or order[j].tangent) else tolerance
                if np.max(np.abs(E[i] - E[j])) < lim:
                    dup = True
                    break
        kept[i] = not dup
    out = [s for s, k in zip(order, kept) if k]
    return sorted(out, key=lambda s: tuple(np.round(s.features(), 12)))


def family_suspected(squares: list[Square], config: SolveConfig) -> bool:
    """Heuristic continuum detection over deduplicated squares.

    Fires when there are more distinct squares than ``4 * grid_resolution``
    or when a chain of ``family_chain_length`` squares is linked by gaps
    below ``family_gap_threshold`` in feature space.
    """
    if len(squares) > 4 * config.grid_resolution:
        return True
    if len(squares) < config.family_chain_length:
        return False
    E = _embedded(squares)
    pairs = cKDTree(E).query_pairs(config.family_gap_threshold, p=np.inf, output_type="ndarray")
    parent = list(range(len(squares)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in pairs:
        parent[find(i)] = find(j)
    sizes = np.bincount([find(i) for i in range(len(squares))])
    return bool(sizes.max() >= config.family_chain_length)


def _seed_grid(curve: Curve, config: SolveConfig) -> np.ndarray:
    g = config.grid_resolution
    ticks = (np.arange(g) + 0.5) / g
    combos = np.array(list(itertools.combinations(range(g), 4)))
    seeds = ticks[combos]
    P = curve.eval(seeds)
    sides = np.linalg.norm(P - np.roll(P, -1, axis=1), axis=2)
    return seeds[sides.min(axis=1) > config.min_side_length]


def _nearest_joint(t: np.ndarray, joints: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Nearest joint to each parameter (cyclic) and the distance to it."""
    if joints.size == 0:
        return np.zeros_like(t), np.full(t.shape, np.inf)
    d = np.abs((joints[None, :] - t.reshape(-1, 1) + 0.5) % 1.0 - 0.5)
    k = np.argmin(d, axis=1)
    return joints[k].reshape(t.shape), d[np.arange(d.shape[0]), k].reshape(t.shape)


def _postprocess(curve: Curve, T: np.ndarray, norm: np.ndarray, status: np.ndarray, config: SolveConfig):
    """Turn Newton outcomes into candidate roots (see module docstring).

    Returns ``(T, residual, tangent, pinned, flat_dropped)`` arrays.
    """
    dev = curve.deviation(T)
    _, corner_gap = _nearest_joint(T, curve.corners)
    joints = np.concatenate([curve.bump_joints, curve.corners])
    nearest, _ = _nearest_joint(T, joints)
    snap = (dev < config.snap_tolerance) | (corner_gap < config.corner_window)
    if joints.size == 0:
        snap[:] = False
    k, i = np.nonzero(snap)
    pin_T = np.zeros((0, 4))
    pin_res = np.zeros(0)
    if k.size:
        # the pinned solve depends on the start only through its basin
        keys = np.column_stack([i, nearest[k, i], np.round(T[k], 3)])
        _, first = np.unique(keys, axis=0, return_index=True)
        k, i = k[first], i[first]
        PT, pn, pst, _ = _pinned_batch(curve, T[k], i, nearest[k, i], config)
        ok = pst == "converged"
        pin_T, pin_res = PT[ok], pn[ok]

    conv = status == "converged"
    tang = status == "tangent"
    conv_flat = conv & np.any(dev < config.flat_tolerance, axis=1)
    tang_flat = tang & np.any(dev < config.snap_tolerance, axis=1)
    keep_conv = conv & ~conv_flat
    keep_tang = tang & ~tang_flat
    out_T = np.concatenate([pin_T, T[keep_conv], T[keep_tang]])
    out_res = np.concatenate([pin_res, norm[keep_conv], norm[keep_tang]])
    n_pin, n_conv = len(pin_T), int(keep_conv.sum())
    tangent = np.zeros(len(out_T), dtype=bool)
    tangent[n_pin + n_conv :] = True
    pinned = np.zeros(len(out_T), dtype=bool)
    pinned[:n_pin] = True
    return out_T, out_res, tangent, pinned, int(conv_flat.sum() + tang_flat.sum())


def _build_squares(curve: Curve, T, res, tangent, pinned, config: SolveConfig):
    """Squares from candidate roots, pre-collapsing exact repeats.

    Returns ``(squares, degenerate_count, multiplicity)`` where
    ``multiplicity[j]`` counts the candidates collapsed into ``squares[j]``.
    """
    if len(T) == 0:
        return [], 0, np.zeros(0, dtype=int)
    P, side, center, half, feats = _square_arrays(curve, T)
    good = side >= config.min_side_length
    degenerate = int((~good).sum())
    idx = np.flatnonzero(good)
    # exact roots before tangential ones, then smallest residual
    idx = idx[np.lexsort((res[idx], tangent[idx]))]
    q = np.round(feats[idx] / (0.01 * config.dedup_tolerance)).astype(np.int64)
    q = np.column_stack([q, tangent[idx]])
    _, first, counts = np.unique(q, axis=0, return_index=True, return_counts=True)
    squares = []
    for j in idx[first]:
        squares.append(
            Square(
                params=tuple(float(x) for x in T[j]),
                vertices=tuple((float(x), float(y)) for x, y in P[j]),
                center=(float(center[j, 0]), float(center[j, 1])),
                half_diagonal=(float(half[j, 0]), float(half[j, 1])),
                side_length=float(side[j]),
                residual_norm=float(res[j]),
                tangent=bool(tangent[j]),
                pinned=bool(pinned[j]),
            )
        )
    return squares, degenerate, counts


def enumerate_squares(curve: Curve, config: SolveConfig | None = None) -> SolveReport:
    """Find all inscribed squares reachable from the seed grid."""
    config = config or SolveConfig()
    start = time.perf_counter()
    seeds = _seed_grid(curve, config)
    if config.threads > 1 and len(seeds) > 0:
        chunks = np.array_split(seeds, config.threads)
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            parts = list(pool.map(lambda s: _newton_batch(curve, s, config), chunks))
        T = np.concatenate([p[0] for p in parts])
        norm = np.concatenate([p[1] for p in parts])
        status = np.concatenate([p[2] for p in parts])
    else:
        T, norm, status, _ = _newton_batch(curve, seeds, config)

    cT, cres, ctan, cpin, flat_dropped = _postprocess(curve, T, norm, status, config)
    found, degenerate, mult = _build_squares(curve, cT, cres, ctan, cpin, config)
    report = SolveReport(curve=curve.name, config=config, squares=[], family_suspected=False)
    report.seeds_tried = len(seeds)
    report.converged = len(cT) + flat_dropped
    report.filtered_flat = flat_dropped
    report.filtered_degenerate = degenerate
    # verification is the expensive step, so only distinct squares are checked
    distinct = dedup_squares(found, config.dedup_tolerance)
    passed = verify_squares(curve, distinct, config.vertex_tolerance)
    good = [s for s, ok in zip(distinct, passed) if ok]
    bad = [s for s, ok in zip(distinct, passed) if not ok]
    if bad:
        E = _embedded(found)
        Eb = _embedded(bad)
        near = np.min(np.max(np.abs(E[:, None, :] - Eb[None, :, :]), axis=2), axis=1)
        report.filtered_off_curve = int(mult[near < math.sqrt(config.dedup_tolerance)].sum())
    report.squares = good
    report.pinned = sum(1 for s in good if s.pinned)
    report.family_suspected = family_suspected(good, config)
    report.wall_time = time.perf_counter() - start
    return report

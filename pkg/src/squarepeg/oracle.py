"""Independent square finder over diagonal pairs.

A square is fixed by one diagonal: for curve points ``p1 = p(t1)`` and
``p3 = p(t3)`` the other two corners are ``m +- rot90(d)`` with
``m = (p1 + p3)/2`` and ``d = (p3 - p1)/2``. The square is inscribed when
both corners lie on the curve, so the residual is the pair of signed
distances from those corners to the curve. This is a 2D search, unrelated to
the 4D Newton system of :mod:`squarepeg.solver`; the two only share the final
filters and deduplication.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.spatial import cKDTree

from .curve import Curve, closest_points
from .solver import (
    SolveConfig,
    Square,
    _build_squares,
    _nearest_joint,
    _wrap,
    dedup_squares,
    square_residual,
    verify_squares,
)

__all__ = ["oracle_enumerate", "oracle_residual"]

REFINE = 3


def _rot90(v):
    return np.stack([-v[..., 1], v[..., 0]], axis=-1)


def _corners(P1, P3):
    m = 0.5 * (P1 + P3)
    rd = _rot90(0.5 * (P3 - P1))
    return m + rd, m - rd


def _signed_distance(curve: Curve, Q):
    """Signed distance (positive outside a counterclockwise curve) and foot parameter."""
    t, _ = closest_points(curve, Q)
    p, d1, _ = curve.jets(t)
    n = np.stack([d1[:, 1], -d1[:, 0]], axis=1) / np.hypot(d1[:, 0], d1[:, 1])[:, None]
    return np.sum((Q - p) * n, axis=1), n, t


def oracle_residual(curve: Curve, t1, t3) -> np.ndarray:
    """Signed curve distances of the two completing corners, shaped ``(..., 2)``."""
    t1 = np.atleast_1d(np.asarray(t1, dtype=float))
    t3 = np.atleast_1d(np.asarray(t3, dtype=float))
    qp, qm = _corners(curve.eval(t1), curve.eval(t3))
    sp = _signed_distance(curve, qp)[0]
    sm = _signed_distance(curve, qm)[0]
    return np.stack([sp, sm], axis=-1)


def _polish(curve: Curve, T: np.ndarray, config: SolveConfig, fixed: np.ndarray | None = None):
    """Damped Newton on the signed-distance pair over ``(t1, t3)``."""
    T = _wrap(np.array(T, dtype=float))
    n = len(T)
    status = np.full(n, "no convergence", dtype=object)
    active = np.ones(n, dtype=bool)

    def evaluate(TT):
        P1, D1, _ = curve.jets(TT[:, 0])
        P3, D3, _ = curve.jets(TT[:, 1])
        qp, qm = _corners(P1, P3)
        sp, np_, _ = _signed_distance(curve, qp)
        sm, nm, _ = _signed_distance(curve, qm)
        R1, R3 = _rot90(D1), _rot90(D3)
        # corners m +- R d; d/dt1 = p1'/2 -+ R p1'/2, d/dt3 = p3'/2 +- R p3'/2
        J = np.empty((len(TT), 2, 2))
        J[:, 0, 0] = np.sum(np_ * 0.5 * (D1 - R1), axis=1)
        J[:, 0, 1] = np.sum(np_ * 0.5 * (D3 + R3), axis=1)
        J[:, 1, 0] = np.sum(nm * 0.5 * (D1 + R1), axis=1)
        J[:, 1, 1] = np.sum(nm * 0.5 * (D3 - R3), axis=1)
        return np.stack([sp, sm], axis=1), J

    R, J = evaluate(T)
    norm = np.linalg.norm(R, axis=1)
    for _ in range(config.max_newton_iterations):
        done = active & (norm < config.newton_tolerance)
        status[done] = "converged"
        active &= ~done
        if not np.any(active):
            break
        idx = np.flatnonzero(active)
        Ja = J[idx] if fixed is None else J[idx] * ~fixed[idx][:, None, :]
        U, sv, Vt = np.linalg.svd(Ja)
        keep = sv > sv[:, :1] / config.condition_limit
        inv = np.where(keep, 1.0 / np.where(keep, sv, 1.0), 0.0)
        step = np.einsum("nji,nj->ni", Vt, -np.einsum("nji,nj->ni", U, R[idx]) * inv)
        big = np.max(np.abs(step), axis=1)
        step *= np.minimum(1.0, config.max_step / np.maximum(big, 1e-300))[:, None]
        lam = np.ones(idx.size)
        pending = np.ones(idx.size, dtype=bool)
        for _ in range(30):
            rows = idx[pending]
            cand = _wrap(T[rows] + lam[pending, None] * step[pending])
            Rc, Jc = evaluate(cand)
            nc = np.linalg.norm(Rc, axis=1)
            ok = nc < norm[rows]
            sel = rows[ok]
            T[sel], R[sel], J[sel], norm[sel] = cand[ok], Rc[ok], Jc[ok], nc[ok]
            pending[np.flatnonzero(pending)[ok]] = False
            if not np.any(pending):
                break
            lam[pending] *= 0.5
        stalled = idx[pending]
        status[stalled] = "stalled"
        active[stalled] = False
    done = active & (norm < config.newton_tolerance)
    status[done] = "converged"
    tangent = (status != "converged") & (status != "no convergence") & (norm < config.tangent_tolerance)
    status[tangent] = "tangent"
    return T, norm, status


def _grid_minima(curve: Curve, resolution: int, config: SolveConfig) -> np.ndarray:
    """Discrete local minima of the unsigned residual over the pair grid."""
    ts = (np.arange(resolution) + 0.5) / resolution
    P = curve.eval(ts)
    _, samples = curve.dense_samples
    tree = cKDTree(samples)
    P1 = np.repeat(P, resolution, axis=0)
    P3 = np.tile(P, (resolution, 1))
    qp, qm = _corners(P1, P3)
    dp, _ = tree.query(qp)
    dm, _ = tree.query(qm)
    r = np.hypot(dp, dm).reshape(resolution, resolution)
    side = np.linalg.norm(P1 - P3, axis=1).reshape(resolution, resolution) / math.sqrt(2)
    r[side < config.min_side_length] = np.inf
    is_min = np.ones_like(r, dtype=bool)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di or dj:
                is_min &= r <= np.roll(np.roll(r, di, axis=0), dj, axis=1)
    threshold = 4.0 * curve.length / resolution
    # swapping t1 and t3 swaps the two completing corners, so r is symmetric
    i, j = np.nonzero(is_min & (r < threshold) & np.triu(np.ones_like(is_min), 1))
    minima = np.column_stack([ts[i], ts[j]])
    # two roots can share a cell near a tangency; start Newton from a small
    # stencil around each minimum so that both basins get a seed
    offsets = np.linspace(-1.0, 1.0, REFINE) / resolution
    stencil = np.array([(a, b) for a in offsets for b in offsets])
    return (minima[:, None, :] + stencil[None, :, :]).reshape(-1, 2)


def oracle_enumerate(curve: Curve, resolution: int = 512, config: SolveConfig | None = None) -> list[Square]:
    """All inscribed squares found from local minima of the diagonal-pair residual.

    Minima on a ``resolution**2`` grid of ``(t1, t3)`` are polished by 2D
    Newton on the signed distances, starting from a ``REFINE x REFINE``
    stencil spanning the neighbouring cells. Near a bump or corner joint the diagonal
    endpoint ``t1`` (or ``t3``) is pinned to the joint. Roots with an
    unpinned corner in a flat bump zone are discarded, since another
    diagonal of the same square carries that corner as a pinned endpoint.
    """
    if resolution < 256:
        raise ValueError(f"oracle resolution must be >= 256, got {resolution}")
    config = config or SolveConfig()
    seeds = _grid_minima(curve, resolution, config)
    if len(seeds) == 0:
        return []
    T, norm, status = _polish(curve, seeds, config)

    joints = np.concatenate([curve.bump_joints, curve.corners])
    pinned_T = np.zeros((0, 2))
    pinned_status = np.zeros(0, dtype=object)
    pinned_norm = np.zeros(0)
    if joints.size:
        dev = curve.deviation(T)
        nearest, _ = _nearest_joint(T, joints)
        _, corner_gap = _nearest_joint(T, curve.corners)
        snap = (dev < config.snap_tolerance) | (corner_gap < config.corner_window)
        k, i = np.nonzero(snap)
        if k.size:
            keys = np.column_stack([i, nearest[k, i], np.round(T[k], 3)])
            _, first = np.unique(keys, axis=0, return_index=True)
            k, i = k[first], i[first]
            start = T[k].copy()
            start[np.arange(k.size), i] = nearest[k, i]
            fixed = np.zeros(start.shape, dtype=bool)
            fixed[np.arange(k.size), i] = True
            pinned_T, pinned_norm, pinned_status = _polish(curve, start, config, fixed=fixed)
            keep = pinned_status == "converged"
            pinned_T, pinned_norm, pinned_status = pinned_T[keep], pinned_norm[keep], pinned_status[keep]

    all_T = np.concatenate([pinned_T, T])
    all_status = np.concatenate([pinned_status, status])
    is_pinned = np.zeros(len(all_T), dtype=bool)
    is_pinned[: len(pinned_T)] = True
    ok = (all_status == "converged") | (all_status == "tangent")
    all_T, all_status, is_pinned = all_T[ok], all_status[ok], is_pinned[ok]
    if len(all_T) == 0:
        return []

    P1, P3 = curve.eval(all_T[:, 0]), curve.eval(all_T[:, 1])
    qp, qm = _corners(P1, P3)
    tp, _ = closest_points(curve, qp)
    tm, _ = closest_points(curve, qm)
    # counterclockwise square order: p1, m - R d, p3, m + R d
    quad = np.column_stack([all_T[:, 0], tm, all_T[:, 1], tp])
    tangent = all_status == "tangent"

    dev = curve.deviation(quad)
    limit = np.where(tangent, config.snap_tolerance, config.flat_tolerance)
    flat = np.any(dev < limit[:, None], axis=1) & ~is_pinned
    quad, tangent, is_pinned = quad[~flat], tangent[~flat], is_pinned[~flat]

    res = np.linalg.norm(square_residual(curve, quad), axis=1) if len(quad) else np.zeros(0)
    squares, _, _ = _build_squares(curve, quad, res, tangent, is_pinned, config)
    distinct = dedup_squares(squares, config.dedup_tolerance)
    passed = verify_squares(curve, distinct, config.vertex_tolerance)
    return [s for s, good in zip(distinct, passed) if good]

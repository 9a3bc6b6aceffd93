"""Hölder norms, exponent fits, oscillation and weak Harnack ratios."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull, QhullError, cKDTree

from .elliptic import DiscreteField


def _points_values(u, points=None, subset=None):
    if isinstance(u, DiscreteField):
        points, values = u.grid.all_points, u.all_values
    else:
        values = np.asarray(u, dtype=float)
        if points is None:
            raise ValueError("points are required for raw value arrays")
        points = np.asarray(points, dtype=float)
        if points.ndim == 1:
            points = points[:, None]
    if subset is not None:
        points, values = points[subset], values[subset]
    return points, values


def set_diameter(points: np.ndarray) -> float:
    if len(points) < 2:
        return 0.0
    cand = points
    if len(points) > 2000:
        try:
            cand = points[ConvexHull(points).vertices]
        except (QhullError, ValueError):
            lo, hi = np.argmin(points, axis=0), np.argmax(points, axis=0)
            cand = points[np.unique(np.concatenate([lo, hi]))]
    d = cand[:, None, :] - cand[None, :, :]
    return float(np.sqrt(np.max(np.sum(d * d, axis=-1))))


def _pair_sequence(points, max_pairs, seed):
    """Deterministic pair list; a larger budget always extends a smaller one."""
    n = len(points)
    if n * (n - 1) // 2 <= max_pairs:
        i, j = np.triu_indices(n, 1)
        return i, j
    k = min(9, n)
    _, nbr = cKDTree(points).query(points, k=k)
    # neighbour rank 1 for every point, then rank 2, ...
    i = np.tile(np.arange(n), k - 1)
    j = nbr[:, 1:].T.ravel()
    rng = np.random.default_rng(seed)
    extra = max(max_pairs - len(i), 0)
    ri = rng.integers(0, n, size=extra)
    rj = rng.integers(0, n, size=extra)
    i, j = np.concatenate([i, ri])[:max_pairs], np.concatenate([j, rj])[:max_pairs]
    keep = i != j
    return i[keep], j[keep]


def holder_seminorm(u, beta: float, subset=None, points=None, max_pairs: int = 100_000,
                    seed: int = 0) -> float:
    """``sup |u(x) - u(y)| / |x - y|^beta`` over sampled pairs (a lower bound)."""
    if not 0 < beta <= 1:
        raise ValueError("beta must lie in (0, 1]")
    p, v = _points_values(u, points, subset)
    if len(p) < 2:
        raise ValueError("need at least two points")
    i, j = _pair_sequence(p, max_pairs, seed)
    dist = np.linalg.norm(p[i] - p[j], axis=1)
    ok = dist > 0
    return float(np.max(np.abs(v[i] - v[j])[ok] / dist[ok] ** beta, initial=0.0))


def holder_norm(u, beta: float, subset=None, points=None, max_pairs: int = 100_000,
                seed: int = 0) -> float:
    """``sup|u| + diam(E)^beta [u]_beta`` on the node set ``E``.

    Pairs beyond ``max_pairs`` are subsampled (nearest neighbours first, then
    random pairs), so the result is a lower bound that never decreases when
    the budget grows.
    """
    p, v = _points_values(u, points, subset)
    semi = holder_seminorm(v, beta, points=p, max_pairs=max_pairs, seed=seed)
    return float(np.max(np.abs(v)) + set_diameter(p) ** beta * semi)


def oscillation(u, subset=None) -> float:
    v = u.all_values if isinstance(u, DiscreteField) else np.asarray(u, dtype=float)
    if subset is not None:
        v = v[subset]
    if v.size == 0:
        raise ValueError("empty subset")
    return float(v.max() - v.min())


@dataclass(frozen=True)
class HolderFit:
    beta_hat: float
    seminorm_hat: float
    fit_r2: float
    scale_range: tuple
    radii: np.ndarray
    omega: np.ndarray
    degenerate: bool = False


_DIRS = np.array([[1, 0], [0, 1], [1, 1], [1, -1]])


def modulus_of_continuity(lat: np.ndarray, multiples) -> np.ndarray:
    """``max |u(x) - u(y)|`` over lattice pairs with ``|x - y| <= m h``.

    ``lat`` holds lattice values with NaN off the domain.  Offsets run along
    the axes and diagonals; a running maximum keeps the result monotone.
    """
    out = []
    ny, nx = lat.shape
    for m in multiples:
        best = 0.0
        for d in _DIRS:
            a = int(m) if d[1] == 0 or d[0] == 0 else int(np.floor(m / np.sqrt(2.0)))
            if a < 1:
                continue
            dr, dc = a * d[1], a * d[0]
            A = lat[max(dr, 0):ny + min(dr, 0), max(dc, 0):nx + min(dc, 0)]
            B = lat[max(-dr, 0):ny + min(-dr, 0), max(-dc, 0):nx + min(-dc, 0)]
            diff = np.abs(A - B)
            if np.any(np.isfinite(diff)):
                best = max(best, float(np.nanmax(diff)))
        out.append(best)
    return np.maximum.accumulate(np.array(out))


def fit_lattice(lat: np.ndarray, h: float, scale_range, n_scales: int = 12) -> HolderFit:
    """Least-squares slope of ``log omega(r)`` against ``log r`` for lattice values."""
    lo, hi = scale_range
    m = np.unique(np.rint(np.geomspace(lo / h, hi / h, n_scales)).astype(int))
    r = m * h
    omega = modulus_of_continuity(lat, m)
    if np.any(omega <= 0):
        return HolderFit(np.nan, 0.0, np.nan, (lo, hi), r, omega, degenerate=True)
    x, y = np.log(r), np.log(omega)
    slope, intercept = np.polyfit(x, y, 1)
    pred = slope * x + intercept
    ss = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum((y - pred) ** 2) / ss if ss > 0 else 1.0
    return HolderFit(float(slope), float(np.exp(intercept)), float(r2), (lo, hi), r, omega)


def default_scale_range(u: DiscreteField) -> tuple:
    return (4 * u.grid.h, u.grid.diam / 4)


def holder_fit(u: DiscreteField, scale_range=None, n_scales: int = 12) -> HolderFit:
    """Fitted Hölder exponent of ``u`` from its modulus of continuity.

    Scales default to ``[4h, diam/4]``: below that the lattice dominates,
    above it the modulus saturates.
    """
    h = u.grid.h
    lo, hi = default_scale_range(u) if scale_range is None else scale_range
    if lo < 2 * h * (1 - 1e-9) or hi > u.grid.diam / 2 or hi <= lo:
        raise ValueError("scale range must lie within (2h, diam/2)")
    return fit_lattice(u.lattice(), h, (lo, hi), n_scales)


def lattice_from_points(points, values):
    """Place scattered samples of a uniform lattice back onto an array; returns ``(lat, h)``."""
    p = np.asarray(points, dtype=float)
    xs, ys = np.unique(p[:, 0]), np.unique(p[:, 1])
    steps = np.concatenate([np.diff(xs), np.diff(ys)])
    h = float(steps[steps > 1e-12].min())
    lo = p.min(axis=0)
    idx = np.rint((p - lo) / h).astype(int)
    on = np.all(np.abs((p - lo) / h - idx) < 1e-6, axis=1)
    lat = np.full((idx[:, 1].max() + 1, idx[:, 0].max() + 1), np.nan)
    lat[idx[on, 1], idx[on, 0]] = np.asarray(values, dtype=float)[on]
    return lat, h


@dataclass(frozen=True)
class HarnackResult:
    ratios: np.ndarray
    max_ratio: float
    clamped: np.ndarray


def weak_harnack_ratio(u: DiscreteField, balls) -> HarnackResult:
    """Ball average over ball minimum for each ``(center, r)`` with ``B(x, 2r)`` inside."""
    g = u.grid
    ratios, clamped = [], []
    for center, r in balls:
        c = np.asarray(center, dtype=float)
        if not g.domain.contains(c[None])[0] or 2 * r > g.domain.distance(c[None])[0] * (1 + 1e-12):
            raise ValueError("B(x, 2r) must lie inside the domain")
        v = u.values[np.sum((g.points - c) ** 2, axis=1) < r * r]
        if v.size == 0:
            raise ValueError("ball contains no nodes")
        if v.min() < 0:
            raise ValueError("u is negative on a requested ball")
        low = v.min()
        clamped.append(low < 1e-14)
        ratios.append(v.mean() / max(low, 1e-14))
    ratios = np.array(ratios)
    return HarnackResult(ratios, float(ratios.max()), np.array(clamped))

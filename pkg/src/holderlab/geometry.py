"""Domains, uniform grids, distance to the boundary and singular coefficient profiles.

A :class:`Grid` carries two kinds of points:

* interior nodes, the lattice points strictly inside the domain;
* boundary points, where a lattice line through an interior node first meets
  the boundary.  On lattice-aligned polygons these are lattice nodes lying on
  the boundary; on curved boundaries they are the cut points used by the
  Shortley-Weller stencil.

Every interior node stores its four neighbours (east, west, north, south) and
the arm length to each, which is ``h`` except next to a curved or
off-lattice boundary.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .measure import DiscreteMeasure

PRESETS = ("unit_square", "unit_disk", "l_shape", "slit_square", "annulus")

# east, west, north, south
DIRECTIONS = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])


class GeometryError(ValueError):
    pass


def _polygon_area(vertices):
    x, y = vertices[:, 0], vertices[:, 1]
    return 0.5 * (np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def _cross(a, b):
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


@dataclass(frozen=True)
class Domain:
    """Bounded open planar set described by its boundary curves.

    Membership uses the even-odd rule over the closed curves (``rings`` and
    ``circles``).  ``cuts`` are extra boundary segments that do not bound a
    region, such as the slit of ``slit_square``.
    """

    preset: str
    rings: tuple = ()
    circles: tuple = ()
    cuts: tuple = ()

    @property
    def segments(self) -> np.ndarray:
        segs = []
        for ring in self.rings:
            ring = np.asarray(ring, dtype=float)
            segs.append(np.stack([ring, np.roll(ring, -1, axis=0)], axis=1))
        for cut in self.cuts:
            segs.append(np.asarray(cut, dtype=float).reshape(1, 2, 2))
        if not segs:
            return np.zeros((0, 2, 2))
        return np.concatenate(segs, axis=0)

    @property
    def bbox(self):
        lo = np.array([np.inf, np.inf])
        hi = -lo
        for ring in self.rings:
            ring = np.asarray(ring, dtype=float)
            lo = np.minimum(lo, ring.min(axis=0))
            hi = np.maximum(hi, ring.max(axis=0))
        for cx, cy, r in self.circles:
            lo = np.minimum(lo, [cx - r, cy - r])
            hi = np.maximum(hi, [cx + r, cy + r])
        return lo, hi

    @property
    def diam(self) -> float:
        pts = [np.asarray(r, dtype=float) for r in self.rings]
        d = 0.0
        if pts:
            p = np.concatenate(pts)
            d = float(np.max(np.linalg.norm(p[:, None] - p[None], axis=-1)))
        for cx, cy, r in self.circles:
            d = max(d, 2.0 * r)
        return d

    def contains(self, points) -> np.ndarray:
        """Even-odd membership, boundary points excluded."""
        p = np.atleast_2d(np.asarray(points, dtype=float))
        parity = np.zeros(len(p), dtype=bool)
        for ring in self.rings:
            ring = np.asarray(ring, dtype=float)
            a, b = ring, np.roll(ring, -1, axis=0)
            px, py = p[:, 0:1], p[:, 1:2]
            straddle = (a[:, 1] > py) != (b[:, 1] > py)
            with np.errstate(divide="ignore", invalid="ignore"):
                xint = a[:, 0] + (py - a[:, 1]) * (b[:, 0] - a[:, 0]) / (b[:, 1] - a[:, 1])
            hits = straddle & (px < xint)
            parity ^= (hits.sum(axis=1) % 2).astype(bool)
        for cx, cy, r in self.circles:
            parity ^= np.hypot(p[:, 0] - cx, p[:, 1] - cy) < r
        scale = max(self.diam, 1.0)
        return parity & (self.distance(p) > 1e-12 * scale)

    def distance(self, points) -> np.ndarray:
        """Exact Euclidean distance to the boundary."""
        p = np.atleast_2d(np.asarray(points, dtype=float))
        d = np.full(len(p), np.inf)
        segs = self.segments
        if len(segs):
            a = segs[None, :, 0, :]
            ab = segs[None, :, 1, :] - a
            ap = p[:, None, :] - a
            t = np.clip(np.sum(ap * ab, axis=-1) / np.sum(ab * ab, axis=-1), 0.0, 1.0)
            closest = a + t[..., None] * ab
            d = np.minimum(d, np.min(np.linalg.norm(p[:, None, :] - closest, axis=-1), axis=1))
        for cx, cy, r in self.circles:
            d = np.minimum(d, np.abs(np.hypot(p[:, 0] - cx, p[:, 1] - cy) - r))
        return d

    def ray_distance(self, points, direction) -> np.ndarray:
        """Distance along ``direction`` (unit vector) to the first boundary hit."""
        p = np.atleast_2d(np.asarray(points, dtype=float))
        e = np.asarray(direction, dtype=float)
        out = np.full(len(p), np.inf)
        eps = 1e-12 * max(self.diam, 1.0)
        segs = self.segments
        if len(segs):
            a = segs[None, :, 0, :]
            d = segs[None, :, 1, :] - a
            ap = a - p[:, None, :]
            denom = _cross(np.broadcast_to(e, d.shape), d)
            with np.errstate(divide="ignore", invalid="ignore"):
                t = _cross(ap, d) / denom
                s = _cross(ap, np.broadcast_to(e, ap.shape)) / denom
            ok = (np.abs(denom) > eps) & (t > eps) & (s >= -1e-12) & (s <= 1 + 1e-12)
            t = np.where(ok, t, np.inf)
            # collinear segments: first endpoint ahead of the ray
            col = (np.abs(denom) <= eps) & (np.abs(_cross(ap, np.broadcast_to(e, ap.shape))) <= eps)
            ta = np.sum(ap * e, axis=-1)
            tb = np.sum((segs[None, :, 1, :] - p[:, None, :]) * e, axis=-1)
            tc = np.where(ta > eps, ta, np.inf)
            tc = np.minimum(tc, np.where(tb > eps, tb, np.inf))
            t = np.where(col, np.minimum(t, tc), t)
            out = np.minimum(out, t.min(axis=1))
        for cx, cy, r in self.circles:
            pc = p - [cx, cy]
            bq = pc @ e
            cq = np.sum(pc * pc, axis=1) - r * r
            disc = bq * bq - cq
            sq = np.sqrt(np.where(disc >= 0, disc, np.nan))
            for root in (-bq - sq, -bq + sq):
                root = np.where(np.isnan(root) | (root <= eps), np.inf, root)
                out = np.minimum(out, root)
        return out

    def boundary_samples(self, n_points: int) -> np.ndarray:
        """``n_points`` points spread uniformly in arclength over the boundary."""
        pieces = []  # (length, callable s -> point)
        for a, b in self.segments:
            length = float(np.linalg.norm(b - a))
            pieces.append((length, lambda s, a=a, b=b, L=length: a + (b - a) * (s / L)))
        for cx, cy, r in self.circles:
            length = 2 * np.pi * r
            pieces.append((length, lambda s, cx=cx, cy=cy, r=r: np.array(
                [cx + r * np.cos(s / r), cy + r * np.sin(s / r)])))
        total = sum(L for L, _ in pieces)
        out = []
        for s in np.arange(n_points) * total / n_points:
            for L, f in pieces:
                if s <= L or f is pieces[-1][1]:
                    out.append(f(min(s, L)))
                    break
                s -= L
        return np.array(out)


def make_domain(preset: str = "unit_square", vertices: Sequence | None = None) -> Domain:
    """Build a preset domain, or a custom polygon when ``vertices`` is given."""
    if vertices is not None:
        v = np.asarray(vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3 or abs(_polygon_area(v)) < 1e-14:
            raise GeometryError("degenerate polygon")
        return Domain("polygon", rings=(v,))
    if preset == "unit_square":
        return Domain(preset, rings=(np.array([[0, 0], [1, 0], [1, 1], [0, 1]], float),))
    if preset == "unit_disk":
        return Domain(preset, circles=((0.0, 0.0, 1.0),))
    if preset == "l_shape":
        v = np.array([[-1, -1], [0, -1], [0, 0], [1, 0], [1, 1], [-1, 1]], float)
        return Domain(preset, rings=(v,))
    if preset == "slit_square":
        sq = np.array([[-1, -1], [1, -1], [1, 1], [-1, 1]], float)
        return Domain(preset, rings=(sq,), cuts=(np.array([[0.0, 0.0], [1.0, 0.0]]),))
    if preset == "annulus":
        return Domain(preset, circles=((0.0, 0.0, 1.0), (0.0, 0.0, 0.5)))
    raise GeometryError(f"unknown domain preset {preset!r}")


@dataclass(frozen=True, eq=False)
class Grid:
    domain: Domain
    h: float
    x: np.ndarray
    y: np.ndarray
    node_index: np.ndarray  # lattice (ny, nx) -> interior index or -1
    points: np.ndarray  # interior node coordinates (N, 2)
    ij: np.ndarray  # lattice (row, col) of interior nodes
    delta: np.ndarray  # distance to boundary per interior node
    boundary_points: np.ndarray  # (M, 2)
    neighbors: np.ndarray  # (N, 4); >= 0 interior, -1 - k boundary point k
    arms: np.ndarray  # (N, 4) distance to each neighbour
    n: int = 2

    @property
    def n_interior(self) -> int:
        return len(self.points)

    @property
    def n_boundary(self) -> int:
        return len(self.boundary_points)

    @property
    def cell_volume(self) -> float:
        return self.h ** self.n

    @property
    def diam(self) -> float:
        return self.domain.diam

    @property
    def all_points(self) -> np.ndarray:
        return np.vstack([self.points, self.boundary_points])

    @property
    def all_delta(self) -> np.ndarray:
        return np.concatenate([self.delta, np.zeros(self.n_boundary)])

    @property
    def aligned(self) -> bool:
        """True when every arm equals ``h`` (boundary points are lattice nodes)."""
        return bool(np.allclose(self.arms, self.h, rtol=1e-9, atol=0))

    def lattice(self, values, fill=np.nan) -> np.ndarray:
        """Scatter interior values onto the full lattice array."""
        out = np.full(self.node_index.shape, fill, dtype=float)
        out[self.ij[:, 0], self.ij[:, 1]] = values
        return out

    def locate(self, point) -> int:
        """Index of the interior node nearest to ``point``."""
        return int(np.argmin(np.sum((self.points - np.asarray(point)) ** 2, axis=1)))


def build_grid(domain: Domain | str, resolution: int) -> Grid:
    """Uniform grid with ``h = size / resolution``, size being the longer bbox side."""
    if isinstance(domain, str):
        domain = make_domain(domain)
    if resolution < 8:
        raise GeometryError("resolution must be >= 8")
    lo, hi = domain.bbox
    size = float(np.max(hi - lo))
    if not size > 0:
        raise GeometryError("degenerate domain")
    h = size / resolution
    nx = int(round((hi[0] - lo[0]) / h))
    ny = int(round((hi[1] - lo[1]) / h))
    x = lo[0] + h * np.arange(nx + 1)
    y = lo[1] + h * np.arange(ny + 1)
    X, Y = np.meshgrid(x, y)
    lat = np.column_stack([X.ravel(), Y.ravel()])
    inside = domain.contains(lat)
    if not inside.any():
        raise GeometryError("grid too coarse: no interior nodes")
    node_index = np.full(X.shape, -1, dtype=np.int64)
    flat = np.flatnonzero(inside)
    node_index.ravel()[flat] = np.arange(len(flat))
    ij = np.column_stack(np.unravel_index(flat, X.shape))
    points = lat[flat]
    delta = domain.distance(points)

    N = len(points)
    neighbors = np.empty((N, 4), dtype=np.int64)
    arms = np.empty((N, 4))
    bkeys: dict = {}
    bpts: list = []

    def boundary_id(pt):
        key = (round(pt[0] / h * 1e6), round(pt[1] / h * 1e6))
        if key not in bkeys:
            bkeys[key] = len(bpts)
            bpts.append(pt)
        return -1 - bkeys[key]

    offsets = [(0, 1), (0, -1), (1, 0), (-1, 0)]  # (drow, dcol) for E, W, N, S
    for k, e in enumerate(DIRECTIONS):
        t = domain.ray_distance(points, e)
        dr, dc = offsets[k]
        rr, cc = ij[:, 0] + dr, ij[:, 1] + dc
        valid = (rr >= 0) & (rr <= ny) & (cc >= 0) & (cc <= nx)
        nb = np.full(N, -1, dtype=np.int64)
        nb[valid] = node_index[rr[valid], cc[valid]]
        cut = t < h * (1 - 1e-9)
        neighbors[:, k] = nb
        arms[:, k] = h
        for m in np.flatnonzero(cut | (nb < 0)):
            step = t[m] if cut[m] else h
            neighbors[m, k] = boundary_id(points[m] + step * e)
            arms[m, k] = step
    return Grid(
        domain=domain, h=h, x=x, y=y, node_index=node_index, points=points, ij=ij,
        delta=delta, boundary_points=np.array(bpts).reshape(-1, 2),
        neighbors=neighbors, arms=arms,
    )


@dataclass(frozen=True, eq=False)
class CoefficientSet:
    """Operator data: matrix field ``A``, drift ``b`` and zeroth-order measure ``mu``."""

    grid: Grid
    A: np.ndarray  # (N, 2, 2)
    b: np.ndarray  # (N, 2)
    mu: DiscreteMeasure
    L: float = 1.0
    profile: dict = field(default_factory=dict)

    @property
    def has_lower_order(self) -> bool:
        return bool(np.any(self.b != 0) or np.any(self.mu.cell_mass != 0))

    def check_ellipticity(self, tol: float = 1e-12) -> bool:
        """``|xi|^2 <= A xi.xi <= L |xi|^2`` at every node."""
        if not np.allclose(self.A, np.swapaxes(self.A, 1, 2)):
            return False
        ev = np.linalg.eigvalsh(self.A)
        return bool(ev.min() >= 1 - tol and ev.max() <= self.L + tol and self.L >= 1)

    def principal_part(self) -> CoefficientSet:
        """Same ``A`` with ``b = 0`` and ``mu = 0``."""
        return CoefficientSet(self.grid, self.A, np.zeros_like(self.b),
                              DiscreteMeasure.zero(self.grid), self.L)

    def scaled(self, b_factor: float = 1.0, mu_factor: float = 1.0) -> CoefficientSet:
        return CoefficientSet(self.grid, self.A, b_factor * self.b,
                              mu_factor * self.mu, self.L, dict(self.profile))


def identity_coefficients(grid: Grid) -> CoefficientSet:
    N = grid.n_interior
    return CoefficientSet(grid, np.broadcast_to(np.eye(2), (N, 2, 2)).copy(),
                          np.zeros((N, 2)), DiscreteMeasure.zero(grid), 1.0)


def clamped_delta(grid: Grid) -> np.ndarray:
    """Distance to the boundary clamped below by ``h/2``."""
    return np.maximum(grid.delta, 0.5 * grid.h)


def singular_coefficients(grid: Grid, beta: float, b_scale: float = 0.0,
                          c_scale: float = 0.0, direction=(1.0, 0.0)) -> CoefficientSet:
    """Identity ``A`` with ``|b| = b_scale d^(beta-1)`` and ``mu = c_scale d^(beta-2) m``.

    ``d`` is the distance to the boundary clamped below by ``h/2``; ``b``
    points along the unit vector ``direction``.
    """
    if not 0 < beta < 1:
        raise ValueError("beta must lie in (0, 1)")
    if b_scale < 0 or c_scale < 0:
        raise ValueError("scales must be nonnegative")
    e = np.asarray(direction, dtype=float)
    e = e / np.linalg.norm(e)
    d = clamped_delta(grid)
    N = grid.n_interior
    b = (b_scale * d ** (beta - 1.0))[:, None] * e[None, :]
    density = c_scale * d ** (beta - 2.0)
    mu = DiscreteMeasure(grid, density * grid.cell_volume)
    profile = dict(beta=beta, b_scale=b_scale, c_scale=c_scale, direction=tuple(e))
    return CoefficientSet(grid, np.broadcast_to(np.eye(2), (N, 2, 2)).copy(), b, mu, 1.0, profile)

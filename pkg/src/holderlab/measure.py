"""Signed cell-mass measures and the distance-weighted Morrey norm.

Each interior node owns one square cell of side ``h`` centred on it; a
measure is the array of signed cell masses.  The Morrey norm of ``nu`` is

    diam^(2 - n/q) * sup r^(n/q - n) |nu|(B(x, r)),

the supremum running over interior centres ``x`` and radii ``0 < r < d(x)/2``
with ``d`` the distance to the boundary.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from .geometry import Grid


class GridMismatch(ValueError):
    pass


class BallOutsideDomain(ValueError):
    pass


class DiscreteMeasure:
    """Signed measure given by one mass per interior cell."""

    def __init__(self, grid: Grid, cell_mass):
        cell_mass = np.asarray(cell_mass, dtype=float)
        if cell_mass.shape != (grid.n_interior,):
            raise ValueError(f"expected {grid.n_interior} cell masses, got {cell_mass.shape}")
        self.grid = grid
        self.cell_mass = cell_mass
        self.cell_mass.flags.writeable = False
        self.total_variation = float(np.abs(cell_mass).sum())

    @classmethod
    def zero(cls, grid):
        return cls(grid, np.zeros(grid.n_interior))

    @classmethod
    def lebesgue(cls, grid):
        return cls(grid, np.full(grid.n_interior, grid.cell_volume))

    @classmethod
    def from_density(cls, grid, density):
        """``density`` is an array of nodal values or a callable ``f(x, y)``."""
        if callable(density):
            density = density(grid.points[:, 0], grid.points[:, 1])
        return cls(grid, np.broadcast_to(density, (grid.n_interior,)) * grid.cell_volume)

    @classmethod
    def point_mass(cls, grid, point, mass=1.0):
        m = np.zeros(grid.n_interior)
        m[grid.locate(point)] = mass
        return cls(grid, m)

    @property
    def density(self) -> np.ndarray:
        return self.cell_mass / self.grid.cell_volume

    @property
    def is_nonnegative(self) -> bool:
        return bool(np.all(self.cell_mass >= 0))

    def pair(self, f) -> float:
        """Integral of a nodal test function against the measure."""
        return float(np.dot(np.asarray(f, dtype=float), self.cell_mass))

    def _check(self, other):
        if other.grid is not self.grid:
            raise GridMismatch("measures live on different grids")

    def __add__(self, other):
        self._check(other)
        return DiscreteMeasure(self.grid, self.cell_mass + other.cell_mass)

    def __sub__(self, other):
        self._check(other)
        return DiscreteMeasure(self.grid, self.cell_mass - other.cell_mass)

    def __neg__(self):
        return DiscreteMeasure(self.grid, -self.cell_mass)

    def __mul__(self, a):
        return DiscreteMeasure(self.grid, float(a) * self.cell_mass)

    __rmul__ = __mul__

    def __repr__(self):
        return f"DiscreteMeasure(cells={len(self.cell_mass)}, |nu|={self.total_variation:.6g})"


def measure_axpy(a: float, nu: DiscreteMeasure, mu: DiscreteMeasure) -> DiscreteMeasure:
    """Cell-wise ``a * nu + mu``."""
    if nu.grid is not mu.grid:
        raise GridMismatch("measures live on different grids")
    return DiscreteMeasure(nu.grid, a * nu.cell_mass + mu.cell_mass)


def ball_mass(nu: DiscreteMeasure, center, radius: float) -> tuple[float, float]:
    """Signed and absolute mass of the cells whose centres lie in the open ball.

    Brute force over all cells; used directly and as the oracle for the
    Morrey scan.
    """
    grid = nu.grid
    c = np.asarray(center, dtype=float)
    reach = float(grid.domain.distance(c[None])[0])
    if not grid.domain.contains(c[None])[0] or radius > reach * (1 + 1e-12):
        raise BallOutsideDomain(f"B({c.tolist()}, {radius}) is not contained in the domain")
    inside = np.sum((grid.points - c) ** 2, axis=1) < radius ** 2
    m = nu.cell_mass[inside]
    return float(m.sum()), float(np.abs(m).sum())


@dataclass(frozen=True)
class MorreyNormResult:
    q: float
    value: float
    argmax_center: np.ndarray
    argmax_radius: float

    def __float__(self):
        return self.value


def _scan_ball_masses(grid, weights, rows, cols, rho):
    """Sum of lattice ``weights`` over open discs of radius ``rho`` (in units of h).

    Uses row prefix sums; work is proportional to the total disc height.
    """
    ny, nx = weights.shape
    prefix = np.zeros((ny, nx + 1))
    np.cumsum(weights, axis=1, out=prefix[:, 1:])
    order = np.argsort(-rho)
    rows, cols, rho = rows[order], cols[order], rho[order]
    rho2 = rho * rho
    total = np.zeros(len(rho))
    top = int(np.ceil(rho[0])) if len(rho) else 0
    for dy in range(0, top + 1):
        active = int(np.searchsorted(-rho, -float(dy), side="left"))  # rho > dy
        if active == 0:
            break
        r2 = rho2[:active] - dy * dy
        w = np.ceil(np.sqrt(r2)).astype(np.int64) - 1
        c = cols[:active]
        lo = np.clip(c - w, 0, nx)
        hi = np.clip(c + w + 1, 0, nx)
        for sgn in ((1, -1) if dy else (1,)):
            rr = rows[:active] + sgn * dy
            ok = (rr >= 0) & (rr < ny)
            rrc = np.clip(rr, 0, ny - 1)
            total[:active] += np.where(ok, prefix[rrc, hi] - prefix[rrc, lo], 0.0)
    out = np.empty_like(total)
    out[order] = total
    return out


def morrey_norm(nu: DiscreteMeasure, q: float, depth: int = 6) -> MorreyNormResult:
    """Distance-weighted Morrey norm by a dyadic radius scan.

    Radii ``d(x)/2 * 2**-k`` for ``k = 0..depth`` at every interior centre.
    The closed endpoint ``r = d(x)/2`` is included.
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    grid = nu.grid
    n = grid.n
    weights = grid.lattice(np.abs(nu.cell_mass), fill=0.0)
    N = grid.n_interior
    k = np.arange(depth + 1)
    radii = (grid.delta[:, None] / 2.0) * 2.0 ** (-k[None, :])
    rows = np.repeat(grid.ij[:, 0], depth + 1)
    cols = np.repeat(grid.ij[:, 1], depth + 1)
    flat_r = radii.ravel()
    masses = _scan_ball_masses(grid, weights, rows, cols, flat_r / grid.h)
    scores = flat_r ** (n / q - n) * masses
    best = int(np.argmax(scores)) if N else 0
    value = grid.diam ** (2 - n / q) * float(scores[best]) if N else 0.0
    return MorreyNormResult(q=q, value=value, argmax_center=grid.points[best // (depth + 1)].copy(),
                            argmax_radius=float(flat_r[best]))


def write_measure_csv(nu: DiscreteMeasure, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["cell", "x", "y", "mass"])
        for i, ((x, y), m) in enumerate(zip(nu.grid.points, nu.cell_mass)):
            w.writerow([i, repr(float(x)), repr(float(y)), repr(float(m))])


def read_measure_csv(grid, path) -> DiscreteMeasure:
    mass = np.zeros(grid.n_interior)
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            mass[int(row["cell"])] = float(row["mass"])
    return DiscreteMeasure(grid, mass)

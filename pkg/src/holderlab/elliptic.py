"""Finite-difference operators, the Green operator and harmonic extension.

The principal part is the conservative 5-point stencil for ``-div(A grad u)``
with diagonal ``A`` evaluated at edge midpoints.  Next to curved boundaries
the arms are shortened (Shortley-Weller), which keeps the M-matrix sign
pattern and second-order accuracy.  The drift ``b.grad u`` is upwinded and
``mu`` enters as a diagonal of cell masses over cell volume.

Rows are in density form: ``(K u)_i`` approximates the operator at node
``i``, so a measure ``nu`` enters the right-hand side as ``nu_i / h^2``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .geometry import CoefficientSet, Grid, identity_coefficients
from .measure import DiscreteMeasure, morrey_norm

DIRECT_LIMIT = 257 * 257


class SolverError(RuntimeError):
    def __init__(self, msg, residual=np.nan):
        super().__init__(f"{msg} (relative residual {residual:.3e})")
        self.residual = residual


class NotElliptic(ValueError):
    pass


class DiscreteField:
    """Nodal function: values at interior nodes plus the boundary trace."""

    def __init__(self, grid: Grid, values, trace=None):
        self.grid = grid
        self.values = np.asarray(values, dtype=float)
        self.trace = np.zeros(grid.n_boundary) if trace is None else np.asarray(trace, dtype=float)
        if self.values.shape != (grid.n_interior,) or self.trace.shape != (grid.n_boundary,):
            raise ValueError("field shape does not match grid")
        if not (np.all(np.isfinite(self.values)) and np.all(np.isfinite(self.trace))):
            raise ValueError("field has non-finite values")

    @classmethod
    def from_function(cls, grid, f):
        p, q = grid.points, grid.boundary_points
        return cls(grid, f(p[:, 0], p[:, 1]), f(q[:, 0], q[:, 1]))

    @property
    def all_values(self) -> np.ndarray:
        return np.concatenate([self.values, self.trace])

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.all_values)))

    def lattice(self) -> np.ndarray:
        """Values on the full lattice; boundary points off the lattice are dropped."""
        g = self.grid
        out = g.lattice(self.values)
        rel = (g.boundary_points - [g.x[0], g.y[0]]) / g.h
        idx = np.rint(rel).astype(int)
        on = np.all(np.abs(rel - idx) < 1e-6, axis=1)
        out[idx[on, 1], idx[on, 0]] = self.trace[on]
        return out

    def __add__(self, other):
        if isinstance(other, DiscreteField):
            return DiscreteField(self.grid, self.values + other.values, self.trace + other.trace)
        return DiscreteField(self.grid, self.values + other, self.trace + other)

    def __sub__(self, other):
        return self + (-1.0) * other

    def __mul__(self, a):
        return DiscreteField(self.grid, a * self.values, a * self.trace)

    __rmul__ = __mul__


def boundary_trace(grid: Grid, g) -> np.ndarray:
    """Sample ``g`` at the boundary points; arrays and scalars pass through."""
    if callable(g):
        q = grid.boundary_points
        return np.asarray(g(q[:, 0], q[:, 1]), dtype=float) * np.ones(grid.n_boundary)
    return np.broadcast_to(np.asarray(g, dtype=float), (grid.n_boundary,)).copy()


class OperatorMatrix:
    """Assembled interior operator ``K`` and boundary coupling ``Kb``.

    ``K = principal + drift + mass``; the three parts are kept so the
    perturbation solver can reuse the lower-order block.
    """

    def __init__(self, grid, principal, drift, mass, bnd_principal, bnd_drift, stencil):
        self.grid = grid
        self.h = grid.h
        self.stencil = stencil
        self.principal = principal
        self.drift = drift
        self.mass = mass
        self.bnd_principal = bnd_principal
        self.bnd_drift = bnd_drift
        self.K = (principal + drift + mass).tocsc()
        self.Kb = (bnd_principal + bnd_drift).tocsr()
        self._lu = None

    @property
    def lower_order(self):
        return self.drift + self.mass

    @property
    def is_symmetric(self) -> bool:
        d = self.K - self.K.T
        return d.nnz == 0 or abs(d).max() <= 1e-12 * abs(self.K).max()

    def apply(self, u: DiscreteField) -> np.ndarray:
        return self.K @ u.values + self.Kb @ u.trace

    def residual_measure(self, u: DiscreteField, nu: DiscreteMeasure | None = None) -> DiscreteMeasure:
        """``K u`` as cell masses, minus ``nu``."""
        r = self.grid.cell_volume * self.apply(u)
        if nu is not None:
            r = r - nu.cell_mass
        return DiscreteMeasure(self.grid, r)

    def factorize(self):
        if self._lu is None and self.K.shape[0] <= DIRECT_LIMIT:
            try:
                self._lu = spla.splu(self.K)
            except RuntimeError as exc:  # exactly singular
                raise SolverError(str(exc), np.inf) from exc
        return self._lu

    def solve(self, rhs, rtol: float = 1e-10) -> np.ndarray:
        rhs = np.asarray(rhs, dtype=float)
        scale = np.linalg.norm(rhs)
        if scale == 0:
            return np.zeros_like(rhs)
        lu = self.factorize()
        if lu is not None:
            x = lu.solve(rhs)
            res = np.linalg.norm(self.K @ x - rhs) / scale
            if res > rtol:  # one step of iterative refinement
                x += lu.solve(rhs - self.K @ x)
                res = np.linalg.norm(self.K @ x - rhs) / scale
        else:
            ilu = spla.spilu(self.K, drop_tol=1e-5, fill_factor=20)
            M = spla.LinearOperator(self.K.shape, ilu.solve)
            x, info = spla.bicgstab(self.K, rhs, rtol=rtol * 0.1, atol=0.0, M=M, maxiter=5000)
            res = np.linalg.norm(self.K @ x - rhs) / scale
        if not np.all(np.isfinite(x)) or res > rtol:
            raise SolverError("linear solve did not reach tolerance", res)
        return x

    def condition_estimate(self) -> float:
        """1-norm condition number estimate from the factorization."""
        lu = self.factorize()
        if lu is None:
            return np.nan
        n = self.K.shape[0]
        inv = spla.LinearOperator((n, n), matvec=lu.solve, rmatvec=lambda v: lu.solve(v, trans="T"),
                                  dtype=float)
        return float(spla.onenormest(self.K) * spla.onenormest(inv))


def assemble(grid: Grid, coeffs: CoefficientSet | None = None, include_lower_order: bool = True) -> OperatorMatrix:
    """Assemble ``-div(A grad .) [+ b.grad . + mu]`` on the interior nodes."""
    coeffs = identity_coefficients(grid) if coeffs is None else coeffs
    if not coeffs.check_ellipticity():
        raise NotElliptic("coefficient matrix violates the ellipticity bounds")
    A = coeffs.A
    if np.any(np.abs(A[:, 0, 1]) > 1e-14):
        raise NotImplementedError("off-diagonal A is not supported by the M-matrix stencil")
    N, M = grid.n_interior, grid.n_boundary
    nb, arms = grid.neighbors, grid.arms
    rows_i, rows_b = [], []
    diag = np.zeros(N)
    idx = np.arange(N)

    for axis, (kp, km) in enumerate(((0, 1), (2, 3))):
        a_node = A[:, axis, axis]
        hp, hm = arms[:, kp], arms[:, km]
        for k, hk in ((kp, hp), (km, hm)):
            j = nb[:, k]
            inner = j >= 0
            a_mid = a_node.copy()
            a_mid[inner] = 0.5 * (a_node[inner] + a_node[j[inner]])
            w = 2.0 * a_mid / (hk * (hp + hm))
            diag += w
            rows_i.append((idx[inner], j[inner], -w[inner]))
            rows_b.append((idx[~inner], -1 - j[~inner], -w[~inner]))

    def build(parts, ncols):
        if not parts:
            return sp.csr_matrix((N, ncols))
        r = np.concatenate([p[0] for p in parts])
        c = np.concatenate([p[1] for p in parts])
        v = np.concatenate([p[2] for p in parts])
        return sp.csr_matrix((v, (r, c)), shape=(N, ncols))

    principal = build(rows_i, N) + sp.diags(diag)
    bnd_principal = build(rows_b, M)

    drift_i, drift_b = [], []
    ddiag = np.zeros(N)
    mass = sp.csr_matrix((N, N))
    if include_lower_order:
        for axis, (kp, km) in enumerate(((0, 1), (2, 3))):
            bc = coeffs.b[:, axis]
            pos = bc > 0
            # b > 0: backward difference toward the minus neighbour
            k_of = np.where(pos, km, kp)
            hk = arms[idx, k_of]
            j = nb[idx, k_of]
            w = np.abs(bc) / hk
            ddiag += w
            inner = j >= 0
            drift_i.append((idx[inner], j[inner], -w[inner]))
            drift_b.append((idx[~inner], -1 - j[~inner], -w[~inner]))
        mass = sp.diags(coeffs.mu.cell_mass / grid.cell_volume).tocsr()
    drift = build(drift_i, N) + sp.diags(ddiag)
    bnd_drift = build(drift_b, M)
    stencil = "5-point" if grid.aligned else "5-point Shortley-Weller"
    return OperatorMatrix(grid, principal.tocsr(), drift.tocsr(), mass, bnd_principal, bnd_drift, stencil)


def green_apply(op: OperatorMatrix, nu: DiscreteMeasure) -> DiscreteField:
    """Solve ``-div(A grad u) = nu``, ``u = 0`` on the boundary, with the principal part of ``op``."""
    base = principal_operator(op)
    return DiscreteField(op.grid, base.solve(nu.cell_mass / op.grid.cell_volume))


def principal_operator(op: OperatorMatrix) -> OperatorMatrix:
    if op.drift.nnz == 0 and op.mass.nnz == 0:
        return op
    if getattr(op, "_principal_op", None) is None:
        g = op.grid
        zero = sp.csr_matrix((g.n_interior, g.n_interior))
        op._principal_op = OperatorMatrix(g, op.principal, zero, zero, op.bnd_principal,
                                          sp.csr_matrix((g.n_interior, g.n_boundary)), op.stencil)
    return op._principal_op


def harmonic_extension(op: OperatorMatrix, g) -> DiscreteField:
    """Solve ``-div(A grad w) = 0`` with boundary trace ``g``."""
    base = principal_operator(op)
    trace = boundary_trace(op.grid, g)
    rhs = -(base.Kb @ trace)
    return DiscreteField(op.grid, base.solve(rhs) if np.any(rhs) else np.zeros(op.grid.n_interior), trace)


def gradient(u: DiscreteField) -> np.ndarray:
    """Nodal gradient, ``(N, 2)``.

    Three-point differences on the (possibly unequal) arms; exact for
    quadratics, so second order next to curved boundaries too.
    """
    g = u.grid
    vals = u.all_values
    nb = np.where(g.neighbors >= 0, g.neighbors, g.n_interior - 1 - g.neighbors)
    out = np.empty((g.n_interior, 2))
    for axis, (kp, km) in enumerate(((0, 1), (2, 3))):
        hp, hm = g.arms[:, kp], g.arms[:, km]
        up, um, u0 = vals[nb[:, kp]], vals[nb[:, km]], u.values
        out[:, axis] = (hm / (hp * (hp + hm))) * up - (hp / (hm * (hp + hm))) * um \
            + ((hp - hm) / (hp * hm)) * u0
    return out


@dataclass(frozen=True)
class CaccioppoliResult:
    lhs: float  # gradient energy on B(x, r)
    scale: float  # (|u|_inf^2 + |u|_inf * Morrey(nu)) r^(n-2)
    rhs: float
    constant: float  # lhs / scale


def caccioppoli_check(u: DiscreteField, nu: DiscreteMeasure, center, r: float, q: float,
                      C: float | None = None, depth: int = 6) -> CaccioppoliResult:
    """Local gradient energy against the sup-norm/data bound on ``B(center, r)``.

    ``C`` defaults to the realised ratio, which is what gets reported.
    """
    g = u.grid
    c = np.asarray(center, dtype=float)
    if not g.domain.contains(c[None])[0] or 4 * r > g.domain.distance(c[None])[0] * (1 + 1e-12):
        raise ValueError("B(x, 4r) must lie inside the domain")
    inside = np.sum((g.points - c) ** 2, axis=1) < r * r
    grad = gradient(u)
    lhs = float(np.sum(grad[inside] ** 2) * g.cell_volume)
    s = u.sup_norm()
    scale = (s * s + s * morrey_norm(nu, q, depth).value) * r ** (g.n - 2)
    const = lhs / scale if scale > 0 else 0.0
    C = const if C is None else C
    return CaccioppoliResult(lhs, scale, C * scale, const)

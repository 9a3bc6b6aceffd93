"""Lower-order terms as a perturbation of the Green operator.

With ``G0`` the zero-boundary solution operator of ``-div(A grad .)`` and

    T nu = -(b.grad + mu) G0 nu,

a solution of ``-div(A grad u) + b.grad u + mu u = nu`` is ``u = G0 sigma``
where ``sigma - T sigma = nu``.  When ``T`` contracts in the Morrey norm
``sigma`` is the Neumann series; otherwise the full system is solved
directly and a (near-)singular matrix is reported as the kernel case.

Non-zero boundary data ``g`` is lifted by the harmonic extension ``w`` and
the remainder ``v = u - w`` solves the zero-boundary problem with data
``nu - b.grad w - mu w``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .analysis import HolderFit, holder_fit, holder_norm
from .elliptic import (DiscreteField, OperatorMatrix, SolverError, principal_operator, assemble,
                       boundary_trace, harmonic_extension)
from .geometry import CoefficientSet
from .measure import DiscreteMeasure, morrey_norm

CONDITION_LIMIT = 1e12


@dataclass
class SolveReport:
    mode: str
    q: float
    iterate_norms: list = field(default_factory=list)
    contraction_ratio_hat: float = np.nan
    non_contractive: bool = False
    residual: float = np.nan
    series_vs_direct_gap: float = np.nan
    empirical_C2: float = np.nan
    holder_fit: HolderFit | None = None
    condition_estimate: float = np.nan
    data_norm: float = np.nan  # Morrey norm of nu
    trace_norm: float = np.nan  # C^beta norm of g on the boundary
    solution_holder_norm: float = np.nan
    empirical_C: float = np.nan  # ||u||_{C^beta*} / (Morrey(nu) + ||g||_{C^beta})

    def as_row(self) -> dict:
        fit = self.holder_fit
        return dict(
            mode=self.mode, q=self.q, iterations=max(len(self.iterate_norms) - 1, 0),
            contraction_ratio_hat=self.contraction_ratio_hat, non_contractive=self.non_contractive,
            residual=self.residual, series_vs_direct_gap=self.series_vs_direct_gap,
            empirical_C2=self.empirical_C2, condition_estimate=self.condition_estimate,
            beta_hat=fit.beta_hat if fit else np.nan, holder_seminorm_hat=fit.seminorm_hat if fit else np.nan,
            fit_r2=fit.fit_r2 if fit else np.nan, data_norm=self.data_norm, trace_norm=self.trace_norm,
            solution_holder_norm=self.solution_holder_norm, empirical_C=self.empirical_C,
        )


class NonContractive(RuntimeError):
    def __init__(self, report: SolveReport):
        super().__init__(f"Neumann series did not converge (ratio {report.contraction_ratio_hat:.3g})")
        self.report = report


class FredholmCaseOne(RuntimeError):
    def __init__(self, report: SolveReport):
        super().__init__(f"operator is singular or nearly so (cond ~ {report.condition_estimate:.3g})")
        self.report = report


def data_exponent(beta: float, n: int = 2) -> float:
    """Morrey exponent ``n / (2 - beta)`` for data, ``mu`` and the iterates."""
    return n / (2.0 - beta)


def _beta_of(coeffs: CoefficientSet, beta):
    beta = coeffs.profile.get("beta") if beta is None else beta
    if beta is None:
        raise ValueError("beta is required when the coefficients carry no profile")
    if not 0 < beta < 1:
        raise ValueError("beta must lie in (0, 1)")
    return float(beta)


@lru_cache(maxsize=16)
def operator_for(coeffs: CoefficientSet) -> OperatorMatrix:
    return assemble(coeffs.grid, coeffs, include_lower_order=True)


def coefficient_size(coeffs: CoefficientSet, beta=None, depth: int = 6) -> tuple[float, float]:
    """``(Morrey(|b|^2 m)^(1/2), Morrey(mu))`` at exponents ``n/(2-2beta)``, ``n/(2-beta)``."""
    beta = _beta_of(coeffs, beta)
    g = coeffs.grid
    b2 = DiscreteMeasure(g, np.sum(coeffs.b ** 2, axis=1) * g.cell_volume)
    nb = morrey_norm(b2, g.n / (2 - 2 * beta), depth).value ** 0.5
    nm = morrey_norm(coeffs.mu, data_exponent(beta, g.n), depth).value
    return nb, nm


def apply_T(coeffs: CoefficientSet, nu: DiscreteMeasure) -> DiscreteMeasure:
    """``T nu = -(b.grad + mu) G0 nu`` as cell masses.

    Uses the same upwinded drift as the assembled full operator, so the
    series and the direct solve agree to solver precision.
    """
    op = operator_for(coeffs)
    base = principal_operator(op)
    u = base.solve(nu.cell_mass / op.grid.cell_volume)
    return DiscreteMeasure(op.grid, -(op.lower_order @ u) * op.grid.cell_volume)


def _residual(op, u: DiscreteField, nu: DiscreteMeasure) -> float:
    r = op.residual_measure(u, nu).cell_mass
    cv = op.grid.cell_volume
    # interior and boundary parts cancel for harmonic u, so scale by each separately
    scale = max(np.linalg.norm(nu.cell_mass), cv * np.linalg.norm(op.K @ u.values),
                cv * np.linalg.norm(op.Kb @ u.trace), 1e-300)
    return float(np.linalg.norm(r) / scale)


def neumann_solve(coeffs: CoefficientSet, nu: DiscreteMeasure, tol: float = 1e-10,
                  max_iter: int = 200, beta=None, depth: int = 6):
    """Zero-boundary solve through ``sigma = sum_k T^k nu``.

    Stops once ``Morrey(T^k nu) <= tol * Morrey(nu)``.  Raises
    :class:`NonContractive` when that does not happen within ``max_iter``
    terms or the terms blow up.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    beta = _beta_of(coeffs, beta)
    q = data_exponent(beta, coeffs.grid.n)
    op = operator_for(coeffs)
    base = principal_operator(op)
    cv = op.grid.cell_volume
    report = SolveReport(mode="neumann", q=q)
    n0 = morrey_norm(nu, q, depth).value
    report.iterate_norms.append(n0)
    report.data_norm = n0
    sigma = nu.cell_mass.copy()
    if n0 == 0:
        report.contraction_ratio_hat = 0.0
        report.residual = 0.0
        return DiscreteField(op.grid, np.zeros(op.grid.n_interior)), report
    term = nu.cell_mass
    converged = False
    for _ in range(max_iter):
        term = -(op.lower_order @ base.solve(term / cv)) * cv
        nk = morrey_norm(DiscreteMeasure(op.grid, term), q, depth).value
        report.iterate_norms.append(nk)
        sigma = sigma + term
        if nk <= tol * n0:
            converged = True
            break
        if not np.isfinite(nk) or nk > 1e8 * n0:
            break
    norms = np.array(report.iterate_norms)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = norms[1:] / norms[:-1]
    ratios = ratios[np.isfinite(ratios)]
    report.contraction_ratio_hat = float(ratios.max()) if len(ratios) else 0.0
    if len(norms) > 1 and norms[0] > 0:
        nb, nm = coefficient_size(coeffs, beta, depth)
        if nb + nm > 0:
            report.empirical_C2 = norms[1] / ((nb + nm) * norms[0])
    if not converged:
        report.non_contractive = True
        raise NonContractive(report)
    u = DiscreteField(op.grid, base.solve(sigma / cv))
    report.residual = _residual(op, u, nu)
    return u, report


def direct_solve(coeffs: CoefficientSet, nu: DiscreteMeasure, g=0.0, beta=None, depth: int = 6,
                 condition_limit: float = CONDITION_LIMIT):
    """Solve the full system for ``v`` after lifting ``g``; returns ``u = v + w``.

    A singular or ill-conditioned matrix raises :class:`FredholmCaseOne`.
    """
    beta = _beta_of(coeffs, beta)
    q = data_exponent(beta, coeffs.grid.n)
    op = operator_for(coeffs)
    grid = op.grid
    report = SolveReport(mode="direct", q=q)
    try:
        op.factorize()
        report.condition_estimate = op.condition_estimate()
    except SolverError:
        report.condition_estimate = np.inf
        raise FredholmCaseOne(report)
    if not report.condition_estimate < condition_limit:
        raise FredholmCaseOne(report)
    trace = boundary_trace(grid, g)
    w = harmonic_extension(op, trace)
    corrected = nu.cell_mass / grid.cell_volume - (op.lower_order @ w.values + op.bnd_drift @ trace)
    v = op.solve(corrected)
    u = DiscreteField(grid, v + w.values, trace)
    report.residual = _residual(op, u, nu)
    report.data_norm = morrey_norm(nu, q, depth).value
    return u, report


def lifted_data(coeffs: CoefficientSet, g) -> DiscreteMeasure:
    """``b.grad w + mu w`` as cell masses, ``w`` the harmonic extension of ``g``."""
    op = operator_for(coeffs)
    trace = boundary_trace(op.grid, g)
    w = harmonic_extension(op, trace)
    dens = op.lower_order @ w.values + op.bnd_drift @ trace
    return DiscreteMeasure(op.grid, dens * op.grid.cell_volume)


def solve_bvp(coeffs: CoefficientSet, nu: DiscreteMeasure, g=0.0, strategy: str = "direct",
              beta=None, depth: int = 6, tol: float = 1e-10, max_iter: int = 200,
              compare: bool = True, fit: bool = True):
    """Full pipeline ``u = v + w`` with a Hölder fit and the empirical estimate constant.

    ``strategy`` selects how ``v`` is found: ``"neumann"`` or ``"direct"``.
    With ``compare`` the Neumann answer is checked against the direct one.
    """
    if strategy not in ("neumann", "direct"):
        raise ValueError(f"unknown strategy {strategy!r}")
    beta = _beta_of(coeffs, beta)
    op = operator_for(coeffs)
    grid = op.grid
    trace = boundary_trace(grid, g)
    w = harmonic_extension(op, trace)
    rho = nu - lifted_data(coeffs, trace)
    if strategy == "neumann":
        v, report = neumann_solve(coeffs, rho, tol=tol, max_iter=max_iter, beta=beta, depth=depth)
        u = DiscreteField(grid, v.values + w.values, trace)
        if compare:
            ud, rd = direct_solve(coeffs, nu, trace, beta=beta, depth=depth)
            report.series_vs_direct_gap = float(np.max(np.abs(u.all_values - ud.all_values)))
            report.condition_estimate = rd.condition_estimate
    else:
        u, report = direct_solve(coeffs, nu, trace, beta=beta, depth=depth)
    report.residual = _residual(op, u, nu)
    report.data_norm = morrey_norm(nu, data_exponent(beta, grid.n), depth).value
    if grid.n_boundary >= 2:
        report.trace_norm = holder_norm(trace, beta, points=grid.boundary_points)
    if fit:
        report.holder_fit = holder_fit(u)
        bstar = report.holder_fit.beta_hat
        if np.isfinite(bstar):
            bstar = float(np.clip(bstar, 1e-3, 1.0))
            report.solution_holder_norm = holder_norm(u, bstar)
            denom = report.data_norm + report.trace_norm
            report.empirical_C = report.solution_holder_norm / denom if denom > 0 else np.nan
    return u, report

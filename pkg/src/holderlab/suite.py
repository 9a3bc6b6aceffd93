"""Acceptance battery: every check returns a :class:`Criterion` row.

Each check pairs the implementation with an independent reference: a closed
form, an analytic solution, or an exact algebraic identity.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .analysis import holder_fit, holder_norm, oscillation
from .capacity import ball_capacity, cdc_ratio, cdc_sweep
from .elliptic import DiscreteField, assemble, green_apply, harmonic_extension
from .geometry import build_grid, singular_coefficients
from .measure import DiscreteMeasure, measure_axpy, morrey_norm
from .perturbation import (NonContractive, operator_for, apply_T, coefficient_size, data_exponent,
                           direct_solve, neumann_solve, solve_bvp)
from .references import CAP_ANNULUS, MORREY_SQUARE, cusp_trace, disk_poisson, disk_quartic, imsqrt


@dataclass
class Criterion:
    id: int
    name: str
    passed: bool
    measured: str
    threshold: str
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] C{self.id:02d} {self.name}: {self.measured} (need {self.threshold}) [{self.seconds:.1f}s]"


def morrey_oracle() -> Criterion:
    g = build_grid("unit_square", 256)
    t = time.perf_counter()
    val = morrey_norm(DiscreteMeasure.lebesgue(g), 4 / 3, depth=6).value
    dt = time.perf_counter() - t
    rel = abs(val - MORREY_SQUARE) / MORREY_SQUARE
    return Criterion(1, "Morrey norm of Lebesgue measure", rel <= 0.05 and dt < 10,
                     f"{val:.5f} vs {MORREY_SQUARE:.5f} (rel {rel:.2e}), {dt:.2f}s", "rel <= 5%, < 10 s")


def random_measure(grid, rng):
    kind = rng.integers(3)
    if kind == 0:
        m = rng.normal(size=grid.n_interior) * grid.cell_volume
    elif kind == 1:
        m = np.zeros(grid.n_interior)
        m[rng.integers(grid.n_interior, size=5)] = rng.normal(size=5)
    else:
        m = rng.uniform(0, 3, size=grid.n_interior) * grid.cell_volume * (rng.random(grid.n_interior) < 0.3)
    return DiscreteMeasure(grid, m)


def norm_axioms(n_instances: int = 50, seed: int = 0) -> Criterion:
    rng = np.random.default_rng(seed)
    g = build_grid("unit_square", 32)
    q1, q2 = 4 / 3, 2.0
    failures = 0
    for _ in range(n_instances):
        nu, mu = random_measure(g, rng), random_measure(g, rng)
        a = rng.normal() * 3
        n_nu = morrey_norm(nu, q1).value
        ok = (n_nu > 0) == (nu.total_variation > 0)
        ok &= abs(morrey_norm(a * nu, q1).value - abs(a) * n_nu) <= 1e-12 * max(1, abs(a) * n_nu)
        ok &= morrey_norm(nu + mu, q1).value <= n_nu + morrey_norm(mu, q1).value + 1e-12
        ok &= n_nu <= morrey_norm(nu, q2).value + 1e-12
        failures += not ok
    zero_ok = morrey_norm(DiscreteMeasure.zero(g), q1).value == 0.0
    nu = random_measure(g, rng)
    gaps = [morrey_norm(measure_axpy(1 - 2.0 ** -j, nu, -nu), q1).value for j in range(1, 11)]
    ratios = np.array(gaps[1:]) / np.array(gaps[:-1])
    geometric = bool(np.all(np.abs(ratios - 0.5) < 1e-9))
    return Criterion(2, "norm axioms, monotonicity in q, Cauchy proxy",
                     failures == 0 and zero_ok and geometric,
                     f"{failures} failures / {n_instances}, Cauchy ratios {ratios.min():.6f}..{ratios.max():.6f}",
                     "0 failures, ratio 1/2")


def capacity_oracle() -> Criterion:
    errs = []
    for res in (64, 128, 256):
        errs.append(abs(ball_capacity(1.0, 4.0 / res) - CAP_ANNULUS) / CAP_ANNULUS)
    converging = errs[0] > errs[1] > errs[2]
    return Criterion(3, "capacity of concentric condenser", errs[-1] <= 0.02 and converging,
                     f"rel errors {', '.join(f'{e:.4f}' for e in errs)} at 64/128/256",
                     "<= 2% at 256, decreasing")


def cdc_check(resolution: int = 128) -> Criterion:
    radii = [0.05, 0.1, 0.2]
    gammas = {}
    for name in ("unit_square", "l_shape", "slit_square"):
        _, gammas[name] = cdc_sweep(build_grid(name, resolution), 16, radii)
    sq = build_grid("unit_square", resolution)
    mid = [cdc_ratio(sq, (0.5, 0.0), R) for R in radii]
    spread = max(abs(r / np.mean(mid) - 1) for r in mid)
    ok = all(v > 0 for v in gammas.values()) and spread <= 0.10
    return Criterion(4, "capacity density sweep",
                     ok, ", ".join(f"{k} {v:.3f}" for k, v in gammas.items()) + f"; edge spread {spread:.3f}",
                     "gamma_hat > 0, spread <= 10%")


def green_oracle() -> Criterion:
    quad_err, quart_err, min_u = [], [], np.inf
    for res in (64, 128, 256):
        g = build_grid("unit_disk", res)
        op = assemble(g)
        r2 = np.sum(g.points ** 2, axis=1)
        u = green_apply(op, DiscreteMeasure.lebesgue(g))
        quad_err.append(np.max(np.abs(u.values - disk_poisson(*g.points.T))))
        v = green_apply(op, DiscreteMeasure.from_density(g, 16 * r2))
        quart_err.append(np.max(np.abs(v.values - disk_quartic(*g.points.T))))
        min_u = min(min_u, u.values.min(), v.values.min())
    orders = np.log2(np.array(quart_err[:-1]) / np.array(quart_err[1:]))
    worst_mp = max(0.0, -min_u, -maximum_principle_sweep())
    ok = orders.min() >= 1.8 and max(quad_err) <= 1e-10 and worst_mp <= 1e-10
    return Criterion(5, "Green operator oracle and maximum principle", ok,
                     f"quadratic err {max(quad_err):.1e} (reproduced), quartic orders "
                     f"{', '.join(f'{o:.2f}' for o in orders)}, worst violation {worst_mp:.1e}",
                     "order >= 1.8, violation <= 1e-10")


def maximum_principle_sweep(seed: int = 1) -> float:
    """Smallest value of ``G0 nu`` / harmonic extensions over nonnegative data."""
    rng = np.random.default_rng(seed)
    low = np.inf
    for name in ("unit_square", "unit_disk", "l_shape", "slit_square", "annulus"):
        g = build_grid(name, 64)
        op = assemble(g)
        for _ in range(3):
            nu = DiscreteMeasure(g, rng.uniform(0, 1, g.n_interior) * (rng.random(g.n_interior) < 0.2))
            low = min(low, green_apply(op, nu).values.min())
            low = min(low, harmonic_extension(op, rng.uniform(0, 1, g.n_boundary)).values.min())
    return float(low)


def boundary_lift(seed: int = 2) -> Criterion:
    rng = np.random.default_rng(seed)
    worst = -np.inf
    for k in range(10):
        name = ("unit_disk", "unit_square", "l_shape", "slit_square", "annulus")[k % 5]
        g = build_grid(name, 64)
        trace = rng.normal(size=g.n_boundary) * rng.uniform(0.1, 10)
        w = harmonic_extension(assemble(g), trace)
        worst = max(worst, oscillation(w) - oscillation(trace))
    g = build_grid("slit_square", 128)
    fit = holder_fit(harmonic_extension(assemble(g), imsqrt))
    ok = worst <= 1e-10 and 0.45 <= fit.beta_hat <= 0.55
    return Criterion(6, "boundary lift comparison and slit exponent", ok,
                     f"max osc(w) - osc(g) = {worst:.1e}, slit beta_hat {fit.beta_hat:.3f}",
                     "<= 1e-10, beta_hat in [0.45, 0.55]")


SMALL_SCALES = (0.05, 0.1, 0.2)


def perturbation_equivalence(resolution: int = 128) -> Criterion:
    g = build_grid("unit_square", resolution)
    nu = DiscreteMeasure.lebesgue(g)
    worst, converged = 0.0, 0
    for bs in SMALL_SCALES:
        for cs in SMALL_SCALES:
            c = singular_coefficients(g, 0.5, bs, cs)
            try:
                un, _ = neumann_solve(c, nu)
            except NonContractive:
                continue
            converged += 1
            ud, _ = direct_solve(c, nu)
            worst = max(worst, float(np.max(np.abs(un.values - ud.values))))
    return Criterion(7, "Neumann series vs direct solve", worst <= 1e-6 and converged > 0,
                     f"max gap {worst:.1e} over {converged}/9 convergent runs", "gap <= 1e-6")


def bound_shape(resolution: int = 64) -> Criterion:
    g = build_grid("unit_square", resolution)
    nu = DiscreteMeasure.lebesgue(g)
    q = data_exponent(0.5)
    n_nu = morrey_norm(nu, q).value
    consts = []
    for s, theta in zip(np.geomspace(0.02, 2.0, 10), np.linspace(0, np.pi / 2, 10)):
        c = singular_coefficients(g, 0.5, s * np.cos(theta), s * np.sin(theta))
        nb, nm = coefficient_size(c)
        consts.append(morrey_norm(apply_T(c, nu), q).value / ((nb + nm) * n_nu))
    factor = max(consts) / min(consts)
    ratios = []
    for bs in SMALL_SCALES:
        _, rep = neumann_solve(singular_coefficients(g, 0.5, bs, 0.0), nu)
        ratios.append(rep.contraction_ratio_hat)
    mono = bool(np.all(np.diff(ratios) > 0))
    return Criterion(8, "operator bound shape", factor <= 3 and mono,
                     f"C2 range factor {factor:.2f}, contraction {', '.join(f'{r:.4f}' for r in ratios)}",
                     "factor <= 3, increasing")


def suite_coefficients():
    out = []
    for name, res in (("unit_square", 64), ("unit_disk", 64), ("slit_square", 64), ("l_shape", 64)):
        g = build_grid(name, res)
        out.append(singular_coefficients(g, 0.5, 0.0, 0.0))
        for bs, cs in ((0.5, 0.0), (0.0, 0.5), (1.0, 1.0), (5.0, 5.0)):
            out.append(singular_coefficients(g, 0.5, bs, cs))
        out.append(singular_coefficients(g, 0.25, 1.0, 1.0, direction=(1, 1)))
    return out


def uniqueness() -> Criterion:
    worst = 0.0
    configs = suite_coefficients()
    for c in configs:
        u, _ = direct_solve(c, DiscreteMeasure.zero(c.grid), 0.0)
        worst = max(worst, u.sup_norm())
    return Criterion(9, "uniqueness for nonnegative mu", worst <= 1e-10,
                     f"max |u| {worst:.1e} over {len(configs)} configurations", "<= 1e-10")


DEMO_SCALE = 0.25


def holder_demo() -> Criterion:
    fits, consts, sups = [], [], []
    lo = 4.0 / 128
    for res in (128, 256):
        g = build_grid("unit_square", res)
        c = singular_coefficients(g, 0.5, DEMO_SCALE, DEMO_SCALE)
        u, rep = solve_bvp(c, DiscreteMeasure.lebesgue(g), cusp_trace, "direct", fit=False)
        f = holder_fit(u, (lo, g.diam / 4))
        fits.append(f.beta_hat)
        rep_norm = holder_norm(u, min(f.beta_hat, 1.0))
        consts.append(rep_norm / (rep.data_norm + rep.trace_norm))
        sups.append(u.sup_norm())
    ok = (np.isfinite(sups).all() and min(fits) > 0 and abs(fits[1] - fits[0]) <= 0.05
          and abs(consts[1] / consts[0] - 1) <= 0.25)
    return Criterion(10, "Hölder estimate with singular coefficients", bool(ok),
                     f"beta_hat {fits[0]:.3f} -> {fits[1]:.3f}, C {consts[0]:.3f} -> {consts[1]:.3f}, "
                     f"sup|u| {sups[1]:.3f}", "beta_hat > 0, drift <= 0.05, C within 25%")


def manufactured(resolution: int = 128) -> Criterion:
    g = build_grid("unit_square", resolution)
    c = singular_coefficients(g, 0.5, 1.0, 1.0)
    op = operator_for(c)
    ustar = DiscreteField.from_function(g, lambda x, y: np.sin(np.pi * x) * np.sin(np.pi * y))
    nu = op.residual_measure(ustar)
    u, _ = direct_solve(c, nu, ustar.trace)
    err = float(np.max(np.abs(u.values - ustar.values)))
    return Criterion(11, "manufactured discrete solution", err <= 1e-8, f"sup error {err:.1e}", "<= 1e-8")


CHECKS = (morrey_oracle, norm_axioms, capacity_oracle, cdc_check, green_oracle, boundary_lift,
          perturbation_equivalence, bound_shape, uniqueness, holder_demo, manufactured)


def run_check(check) -> Criterion:
    t = time.perf_counter()
    res = check()
    res.seconds = time.perf_counter() - t
    return res


def run_suite(verbose: bool = True) -> list[Criterion]:
    out = []
    for check in CHECKS:
        res = run_check(check)
        if verbose:
            print(res.line(), flush=True)
        out.append(res)
    return out

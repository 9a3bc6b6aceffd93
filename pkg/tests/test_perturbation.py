import numpy as np
import pytest

from holderlab.elliptic import DiscreteField, assemble, green_apply
from holderlab.geometry import CoefficientSet, build_grid, identity_coefficients, singular_coefficients
from holderlab.measure import DiscreteMeasure
from holderlab.perturbation import (FredholmCaseOne, NonContractive, apply_T, coefficient_size,
                                    data_exponent, direct_solve, neumann_solve, solve_bvp)
from holderlab.references import disk_poisson


def with_beta(c, beta=0.5):
    return CoefficientSet(c.grid, c.A, c.b, c.mu, c.L, dict(beta=beta))


def test_data_exponent():
    assert data_exponent(0.5) == pytest.approx(4 / 3)
    assert data_exponent(0.0) == 1.0


def test_T_with_unit_potential_on_disk():
    g = build_grid("unit_disk", 128)
    base = identity_coefficients(g)
    c = with_beta(CoefficientSet(g, base.A, base.b, DiscreteMeasure.lebesgue(g)))
    t = apply_T(c, DiscreteMeasure.lebesgue(g))
    assert np.allclose(t.density, -disk_poisson(*g.points.T), atol=1e-10)
    assert t.cell_mass.sum() == pytest.approx(-np.pi / 8, rel=0.02)


def test_T_vanishes_without_lower_order(square32):
    c = with_beta(identity_coefficients(square32))
    assert np.all(apply_T(c, DiscreteMeasure.lebesgue(square32)).cell_mass == 0)
    u, rep = neumann_solve(c, DiscreteMeasure.lebesgue(square32))
    assert len(rep.iterate_norms) == 2
    assert np.allclose(u.values, green_apply(assemble(square32), DiscreteMeasure.lebesgue(square32)).values)


@pytest.mark.parametrize("b_scale, c_scale", [(0.1, 0.0), (0.0, 0.2), (0.2, 0.1)])
def test_neumann_matches_direct(b_scale, c_scale):
    g = build_grid("l_shape", 64)
    c = singular_coefficients(g, 0.5, b_scale, c_scale, direction=(1, 1))
    nu = DiscreteMeasure.lebesgue(g)
    un, rn = neumann_solve(c, nu)
    ud, rd = direct_solve(c, nu)
    assert np.max(np.abs(un.values - ud.values)) <= 1e-8
    assert rn.residual <= 1e-9 and rd.residual <= 1e-9
    assert rn.contraction_ratio_hat < 1


def test_contraction_grows_with_b_scale():
    g = build_grid("unit_square", 32)
    nu = DiscreteMeasure.lebesgue(g)
    ratios = [neumann_solve(singular_coefficients(g, 0.5, s), nu)[1].contraction_ratio_hat
              for s in (0.05, 0.1, 0.2)]
    assert ratios[0] < ratios[1] < ratios[2]
    assert ratios[1] / ratios[0] == pytest.approx(2, rel=0.05)


def test_coefficient_size_scales_linearly(square32):
    a = coefficient_size(singular_coefficients(square32, 0.5, 0.1, 0.1))
    b = coefficient_size(singular_coefficients(square32, 0.5, 0.3, 0.2))
    assert b[0] == pytest.approx(3 * a[0]) and b[1] == pytest.approx(2 * a[1])


def test_non_contractive():
    g = build_grid("unit_square", 32)
    c = singular_coefficients(g, 0.5, 5.0)
    with pytest.raises(NonContractive) as err:
        neumann_solve(c, DiscreteMeasure.lebesgue(g), max_iter=30)
    assert err.value.report.non_contractive
    # the direct route still solves it
    u, rep = direct_solve(c, DiscreteMeasure.lebesgue(g))
    assert rep.residual < 1e-9 and u.values.min() >= 0


def test_fredholm_case_one():
    g = build_grid("unit_square", 32)
    h = g.h
    lam = 8 / h ** 2 * np.sin(np.pi * h / 2) ** 2
    base = identity_coefficients(g)
    c = CoefficientSet(g, base.A, base.b, -lam * DiscreteMeasure.lebesgue(g), 1.0, dict(beta=0.5))
    with pytest.raises(FredholmCaseOne) as err:
        direct_solve(c, DiscreteMeasure.lebesgue(g))
    assert err.value.report.condition_estimate >= 1e12
    # a shift away from the eigenvalue is solvable
    ok = CoefficientSet(g, base.A, base.b, -0.5 * lam * DiscreteMeasure.lebesgue(g), 1.0, dict(beta=0.5))
    direct_solve(ok, DiscreteMeasure.lebesgue(g))


def test_bvp_linearity():
    g = build_grid("slit_square", 32)
    c = singular_coefficients(g, 0.5, 0.1, 0.1)
    rng = np.random.default_rng(0)
    n1 = DiscreteMeasure(g, rng.normal(size=g.n_interior) * g.cell_volume)
    n2 = DiscreteMeasure.point_mass(g, (-0.5, 0.5))
    g1 = lambda x, y: x * y
    g2 = lambda x, y: np.cos(x)
    u1, _ = solve_bvp(c, n1, g1, fit=False, compare=False)
    u2, _ = solve_bvp(c, n2, g2, fit=False, compare=False)
    u12, _ = solve_bvp(c, n1 + 2 * n2, lambda x, y: g1(x, y) + 2 * g2(x, y), fit=False, compare=False)
    assert np.allclose(u12.all_values, u1.all_values + 2 * u2.all_values, atol=1e-10)


def test_bvp_strategies_agree_with_boundary_data():
    g = build_grid("unit_disk", 64)
    c = singular_coefficients(g, 0.5, 0.1, 0.1)
    nu = DiscreteMeasure.lebesgue(g)
    un, rn = solve_bvp(c, nu, lambda x, y: x, strategy="neumann")
    ud, rd = solve_bvp(c, nu, lambda x, y: x, strategy="direct")
    assert rn.series_vs_direct_gap <= 1e-8
    assert np.allclose(un.all_values, ud.all_values, atol=1e-8)
    assert rd.holder_fit is not None and rd.empirical_C > 0
    row = rd.as_row()
    assert row["beta_hat"] == rd.holder_fit.beta_hat


def test_unique_for_nonnegative_mu():
    g = build_grid("annulus", 32)
    c = singular_coefficients(g, 0.5, 0.5, 0.5, direction=(0, 1))
    u, _ = direct_solve(c, DiscreteMeasure.zero(g))
    assert np.max(np.abs(u.values)) == 0


def test_beta_required(square32):
    with pytest.raises(ValueError):
        neumann_solve(identity_coefficients(square32), DiscreteMeasure.lebesgue(square32))
    with pytest.raises(ValueError):
        solve_bvp(with_beta(identity_coefficients(square32)), DiscreteMeasure.lebesgue(square32),
                  strategy="cg")

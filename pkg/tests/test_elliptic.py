import numpy as np
import pytest

from holderlab.elliptic import (DiscreteField, NotElliptic, assemble, caccioppoli_check, gradient,
                                green_apply, harmonic_extension)
from holderlab.geometry import CoefficientSet, build_grid, singular_coefficients
from holderlab.measure import DiscreteMeasure
from holderlab.references import disk_poisson, disk_quartic


def test_interior_row_is_five_point(square32):
    op = assemble(square32)
    h = square32.h
    i = square32.locate((0.5, 0.5))
    row = op.K.getrow(i).toarray().ravel()
    assert row[i] == pytest.approx(4 / h ** 2)
    assert sorted(row[row < 0]) == pytest.approx([-1 / h ** 2] * 4)
    assert op.is_symmetric


def test_m_matrix_with_drift(disk64):
    c = singular_coefficients(disk64, 0.5, b_scale=1.0, c_scale=0.5, direction=(1, -2))
    op = assemble(disk64, c)
    K = op.K.tocoo()
    off = K.row != K.col
    assert np.all(K.data[off] <= 0)
    assert np.all(op.K.diagonal() > 0)
    assert np.all(op.Kb.data <= 0)
    # row sums: zeroth order only
    rows = np.asarray(op.K.sum(axis=1)).ravel() + np.asarray(op.Kb.sum(axis=1)).ravel()
    assert np.allclose(rows, c.mu.density)


def test_residual_is_cell_volume(disk64):
    op = assemble(disk64)
    u = green_apply(op, DiscreteMeasure.lebesgue(disk64))
    r = op.residual_measure(u)
    assert np.allclose(r.cell_mass, disk64.cell_volume, rtol=1e-9)


def test_poisson_disk_reproduced(disk64):
    u = green_apply(assemble(disk64), DiscreteMeasure.lebesgue(disk64))
    exact = disk_poisson(*disk64.points.T)
    assert np.max(np.abs(u.values - exact)) < 1e-10


def test_quartic_second_order():
    errs = []
    for res in (32, 64, 128):
        g = build_grid("unit_disk", res)
        nu = DiscreteMeasure.from_density(g, lambda x, y: 16 * (x * x + y * y))
        u = green_apply(assemble(g), nu)
        errs.append(np.max(np.abs(u.values - disk_quartic(*g.points.T))))
    orders = np.log2(np.array(errs[:-1]) / errs[1:])
    assert np.all(orders >= 1.8)


@pytest.mark.parametrize("preset", ["unit_square", "unit_disk", "l_shape", "annulus"])
def test_linear_functions_are_harmonic(preset):
    g = build_grid(preset, 32)
    op = assemble(g)
    f = lambda x, y: 2 * x - 3 * y + 1
    w = harmonic_extension(op, f)
    assert np.allclose(w.values, f(*g.points.T), atol=1e-10)


def test_saddle_on_square(square32):
    f = lambda x, y: x * x - y * y
    w = harmonic_extension(assemble(square32), f)
    assert np.allclose(w.values, f(*square32.points.T), atol=1e-10)


def test_green_linearity(disk64):
    op = assemble(disk64)
    rng = np.random.default_rng(0)
    a = DiscreteMeasure(disk64, rng.normal(size=disk64.n_interior))
    b = DiscreteMeasure(disk64, rng.normal(size=disk64.n_interior))
    lhs = green_apply(op, 2 * a + b).values
    rhs = 2 * green_apply(op, a).values + green_apply(op, b).values
    assert np.allclose(lhs, rhs, atol=1e-12)


@pytest.mark.parametrize("preset", ["unit_square", "l_shape", "slit_square", "annulus"])
def test_maximum_principle(preset):
    g = build_grid(preset, 32)
    rng = np.random.default_rng(4)
    c = singular_coefficients(g, 0.5, 0.3, 0.3, direction=tuple(rng.normal(size=2)))
    op = assemble(g, c)
    nu = rng.uniform(size=g.n_interior) * g.cell_volume
    assert op.solve(nu / g.cell_volume).min() >= -1e-12
    gval = rng.uniform(-1, 2, size=g.n_boundary)
    w = harmonic_extension(op, gval)
    assert gval.min() - 1e-10 <= w.values.min() and w.values.max() <= gval.max() + 1e-10


def test_gradient_exact_for_quadratics(disk64):
    f = lambda x, y: 1 + x - 2 * y + 3 * x * x - x * y + 0.5 * y * y
    u = DiscreteField.from_function(disk64, f)
    x, y = disk64.points.T
    grad = gradient(u)
    assert np.allclose(grad[:, 0], 1 + 6 * x - y, atol=1e-9)
    assert np.allclose(grad[:, 1], -2 - x + y, atol=1e-9)


def test_caccioppoli_energy_on_disk():
    g = build_grid("unit_disk", 256)
    u = DiscreteField.from_function(g, disk_poisson)
    r = 0.2
    res = caccioppoli_check(u, DiscreteMeasure.lebesgue(g), (0, 0), r, 4 / 3)
    assert res.lhs == pytest.approx(np.pi * r ** 4 / 8, rel=0.05)
    assert res.rhs == pytest.approx(res.lhs)
    with pytest.raises(ValueError):
        caccioppoli_check(u, DiscreteMeasure.lebesgue(g), (0.5, 0), r, 4 / 3)


def test_rejects_bad_coefficients(square32):
    N = square32.n_interior
    A = np.broadcast_to(np.array([[1.0, 0.2], [0.2, 1.0]]), (N, 2, 2)).copy()
    with pytest.raises(NotImplementedError):
        assemble(square32, CoefficientSet(square32, 2 * A, np.zeros((N, 2)),
                                          DiscreteMeasure.zero(square32), L=3.0))
    with pytest.raises(NotElliptic):
        assemble(square32, CoefficientSet(square32, 0.5 * A, np.zeros((N, 2)),
                                          DiscreteMeasure.zero(square32)))


def test_field_validation(square32):
    with pytest.raises(ValueError):
        DiscreteField(square32, np.zeros(3))
    with pytest.raises(ValueError):
        DiscreteField(square32, np.full(square32.n_interior, np.nan))
    u = DiscreteField.from_function(square32, lambda x, y: x)
    assert (2 * u - u).sup_norm() == pytest.approx(1.0)

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from holderlab.analysis import (fit_lattice, holder_fit, holder_norm, holder_seminorm,
                                lattice_from_points, oscillation, set_diameter, weak_harnack_ratio)
from holderlab.elliptic import DiscreteField, assemble, green_apply
from holderlab.geometry import build_grid
from holderlab.measure import DiscreteMeasure
from holderlab.references import disk_poisson


def test_seminorm_of_linear_function():
    p = np.random.default_rng(0).uniform(size=(200, 2))
    v = 3 * p[:, 0] - 4 * p[:, 1]
    assert holder_seminorm(v, 1.0, points=p) == pytest.approx(5.0, rel=0.05)
    assert holder_seminorm(v, 1.0, points=p) <= 5.0 + 1e-12


def test_norm_example():
    p = np.array([[0.0, 0.0], [1.0, 0.0]])
    v = np.array([0.0, 2.0])
    # sup|u| = 2, diam = 1, seminorm = 2
    assert holder_norm(v, 0.5, points=p) == pytest.approx(4.0)
    assert oscillation(v) == 2.0


@settings(max_examples=25, deadline=None)
@given(st.floats(-5, 5), st.floats(0.1, 4), st.floats(0.1, 1.0))
def test_seminorm_translation_and_scaling(c, a, beta):
    rng = np.random.default_rng(1)
    p = rng.uniform(size=(80, 2))
    v = np.sin(4 * p[:, 0]) + p[:, 1] ** 2
    s = holder_seminorm(v, beta, points=p)
    assert holder_seminorm(v + c, beta, points=p) == pytest.approx(s, rel=1e-9)
    assert holder_seminorm(a * v, beta, points=p) == pytest.approx(a * s, rel=1e-9)


def test_seminorm_grows_with_beta_on_unit_diameter_set():
    p = np.random.default_rng(2).uniform(0, 1 / np.sqrt(2), size=(100, 2))
    assert set_diameter(p) <= 1
    v = np.cos(3 * p[:, 0] * p[:, 1])
    s = [holder_seminorm(v, b, points=p) for b in (0.2, 0.5, 0.8, 1.0)]
    assert np.all(np.diff(s) >= 0)


def test_budget_monotone():
    g = build_grid("unit_square", 64)
    u = DiscreteField.from_function(g, lambda x, y: np.sqrt(np.hypot(x, y)))
    vals = [holder_norm(u, 0.5, max_pairs=m) for m in (5_000, 20_000, 80_000, 320_000)]
    assert np.all(np.diff(vals) >= 0)


def test_set_diameter_hull_path():
    t = np.linspace(0, 2 * np.pi, 5000)
    p = np.column_stack([np.cos(t), np.sin(t)])
    assert set_diameter(p) == pytest.approx(2.0, rel=1e-6)


def test_fit_of_square_root_cusp():
    g = build_grid("unit_square", 256)
    # the cusp sits on a lattice node so the smallest pairs see it
    u = DiscreteField.from_function(g, lambda x, y: ((x - 0.5) ** 2 + (y - 0.5) ** 2) ** 0.25)
    f = holder_fit(u)
    assert f.beta_hat == pytest.approx(0.5, abs=0.03)
    assert f.fit_r2 > 0.99


def test_fit_of_poisson_is_lipschitz():
    g = build_grid("unit_disk", 256)
    u = green_apply(assemble(g), DiscreteMeasure.lebesgue(g))
    f = holder_fit(u, (4 * g.h, 0.1))
    assert f.beta_hat == pytest.approx(1.0, abs=0.05)


def test_fit_scale_invariance():
    g = build_grid("unit_square", 64)
    u = DiscreteField.from_function(g, lambda x, y: np.sqrt(x) + y)
    a, b = holder_fit(u), holder_fit(3.0 * u)
    assert b.beta_hat == pytest.approx(a.beta_hat, abs=1e-12)
    assert b.seminorm_hat == pytest.approx(3 * a.seminorm_hat)


def test_fit_degenerate_and_bad_range(square32):
    f = holder_fit(DiscreteField(square32, np.full(square32.n_interior, 2.0), np.full(square32.n_boundary, 2.0)))
    assert f.degenerate and np.isnan(f.beta_hat)
    with pytest.raises(ValueError):
        holder_fit(DiscreteField.from_function(square32, lambda x, y: x), (square32.h, 0.2))


def test_lattice_from_points_round_trip():
    g = build_grid("l_shape", 32)
    u = DiscreteField.from_function(g, lambda x, y: x * y)
    lat, h = lattice_from_points(g.all_points, u.all_values)
    assert h == pytest.approx(g.h)
    a, b = fit_lattice(lat, h, (4 * h, 0.5)), holder_fit(u, (4 * h, 0.5))
    assert a.beta_hat == pytest.approx(b.beta_hat)


def test_weak_harnack():
    g = build_grid("unit_square", 64)
    u = DiscreteField.from_function(g, lambda x, y: x + 2)
    res = weak_harnack_ratio(u, [((0.5, 0.5), 0.2), ((0.3, 0.6), 0.1)])
    assert 1 <= res.max_ratio <= 3
    with pytest.raises(ValueError):
        weak_harnack_ratio(u, [((0.1, 0.5), 0.2)])


def test_weak_harnack_refinement():
    ratios = []
    for res in (64, 128):
        g = build_grid("unit_disk", res)
        u = green_apply(assemble(g), DiscreteMeasure.lebesgue(g))
        ratios.append(weak_harnack_ratio(u, [((0.2, 0.1), 0.3)]).max_ratio)
    assert ratios[1] == pytest.approx(ratios[0], rel=0.25)
    exact = DiscreteField.from_function(build_grid("unit_disk", 128), disk_poisson)
    assert weak_harnack_ratio(exact, [((0.2, 0.1), 0.3)]).max_ratio == pytest.approx(ratios[1], rel=1e-6)

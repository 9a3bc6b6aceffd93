import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from holderlab.geometry import (CoefficientSet, GeometryError, build_grid, clamped_delta,
                                identity_coefficients, make_domain, singular_coefficients)
from holderlab.measure import DiscreteMeasure


def test_unit_square_counts():
    g = build_grid("unit_square", 8)
    assert g.h == pytest.approx(1 / 8)
    assert g.n_interior == 49
    assert g.n_boundary == 28
    assert g.aligned


def test_disk_grid_is_shortley_weller():
    g = build_grid("unit_disk", 16)
    assert g.h == pytest.approx(2 / 16)
    assert not g.aligned
    assert np.all(g.arms > 0) and np.all(g.arms <= g.h * (1 + 1e-12))
    r = np.hypot(*g.boundary_points.T)
    assert np.allclose(r, 1.0)


@pytest.mark.parametrize("preset, point, dist", [
    ("unit_square", (0.5, 0.5), 0.5),
    ("unit_square", (0.1, 0.7), 0.1),
    ("unit_disk", (0.0, 0.0), 1.0),
    ("unit_disk", (0.6, 0.0), 0.4),
    ("l_shape", (-0.5, -0.5), 0.5),
    ("l_shape", (0.5, 0.25), 0.25),
    ("slit_square", (0.5, 0.1), 0.1),
    ("slit_square", (-0.3, 0.0), 0.3),
    ("annulus", (0.75, 0.0), 0.25),
])
def test_distance_examples(preset, point, dist):
    d = make_domain(preset)
    assert d.contains(np.array([point]))[0]
    assert d.distance(np.array([point]))[0] == pytest.approx(dist)


@pytest.mark.parametrize("preset, point", [
    ("unit_square", (1.5, 0.5)),
    ("l_shape", (0.5, -0.5)),
    ("slit_square", (0.5, 0.0)),
    ("annulus", (0.0, 0.0)),
    ("unit_disk", (0.8, 0.8)),
])
def test_outside_points(preset, point):
    assert not make_domain(preset).contains(np.array([point]))[0]


def test_slit_nodes_are_boundary():
    g = build_grid("slit_square", 16)
    on_slit = (np.abs(g.points[:, 1]) < 1e-12) & (g.points[:, 0] >= 0)
    assert not on_slit.any()
    assert np.any((np.abs(g.boundary_points[:, 1]) < 1e-12) & (g.boundary_points[:, 0] > 0))


@settings(max_examples=50, deadline=None)
@given(st.sampled_from(["unit_square", "unit_disk", "l_shape", "slit_square", "annulus"]),
       st.lists(st.floats(-1, 1), min_size=4, max_size=4))
def test_distance_is_lipschitz(preset, c):
    d = make_domain(preset)
    p = np.array([c[:2], c[2:]])
    ok = d.contains(p)
    if ok.all():
        dd = d.distance(p)
        assert abs(dd[0] - dd[1]) <= np.linalg.norm(p[0] - p[1]) + 1e-12


def test_polygon_matches_preset():
    sq = build_grid("unit_square", 16)
    poly = build_grid(make_domain(vertices=[[0, 0], [1, 0], [1, 1], [0, 1]]), 16)
    assert np.allclose(np.sort(sq.points, axis=0), np.sort(poly.points, axis=0))
    assert np.allclose(np.sort(sq.delta), np.sort(poly.delta))


def test_errors():
    with pytest.raises(GeometryError):
        make_domain("triangle")
    with pytest.raises(GeometryError):
        make_domain(vertices=[[0, 0], [1, 1], [2, 2]])
    with pytest.raises(GeometryError):
        build_grid("unit_square", 4)


def test_boundary_samples_on_boundary():
    for preset in ("unit_square", "l_shape", "annulus", "slit_square"):
        d = make_domain(preset)
        p = d.boundary_samples(20)
        assert len(p) == 20
        assert np.allclose(d.distance(p), 0, atol=1e-12)


def test_ellipticity(square32):
    c = identity_coefficients(square32)
    assert c.check_ellipticity()
    N = square32.n_interior
    weak = CoefficientSet(square32, np.broadcast_to(0.5 * np.eye(2), (N, 2, 2)).copy(),
                          np.zeros((N, 2)), DiscreteMeasure.zero(square32))
    assert not weak.check_ellipticity()
    strong = CoefficientSet(square32, np.broadcast_to(2 * np.eye(2), (N, 2, 2)).copy(),
                            np.zeros((N, 2)), DiscreteMeasure.zero(square32))
    assert not strong.check_ellipticity()
    assert CoefficientSet(strong.grid, strong.A, strong.b, strong.mu, L=2.0).check_ellipticity()


def test_singular_profile_exact(square32):
    c = singular_coefficients(square32, 0.5, b_scale=0.3, c_scale=0.2, direction=(3, 4))
    d = clamped_delta(square32)
    assert np.allclose(np.linalg.norm(c.b, axis=1), 0.3 * d ** -0.5)
    assert np.allclose(c.b[:, 0] / c.b[:, 1], 0.75)
    assert np.allclose(c.mu.density, 0.2 * d ** -1.5)
    assert c.profile["beta"] == 0.5
    assert c.has_lower_order and not c.principal_part().has_lower_order
    with pytest.raises(ValueError):
        singular_coefficients(square32, 1.2)

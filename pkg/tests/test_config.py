import numpy as np
import pytest

from holderlab.config import ConfigError, RunConfig, nu_descriptor, parse_config, trace_function

EXAMPLE = """
[domain]
preset = l_shape
resolution = 32

[coefficients]
beta = 0.4
b_scale = 0.1   # drift size
direction = 0, 1

[data]
nu = points: 0.5 0.5 1.0; -0.5 0.5 2.0
g = const: 1.5
"""


def test_parse_example():
    cfg = parse_config(EXAMPLE)
    assert cfg.preset == "l_shape" and cfg.resolution == 32
    assert cfg.direction == (0.0, 1.0) and cfg.b_scale == 0.1
    assert cfg.q == pytest.approx(2 / 1.6)
    kind, pts = nu_descriptor(cfg.nu)
    assert kind == "points" and pts[1] == (-0.5, 0.5, 2.0)
    assert trace_function(cfg.g)(np.zeros(3), np.zeros(3)).tolist() == [1.5] * 3
    assert "source" not in cfg.echo()


def test_defaults_validate():
    assert RunConfig().validate().q == pytest.approx(4 / 3)


@pytest.mark.parametrize("text, needle", [
    ("[domain]\nresolution = 100\n", "line 2"),
    ("[domain]\npreset = circle\n", "unknown preset"),
    ("[coefficients]\nbeta = 1.0\n", "beta"),
    ("[coefficients]\nq = 2\n", "derived"),
    ("[domain]\nsize = 3\n", "unknown key"),
    ("[plot]\nx = 1\n", "unknown section"),
    ("[solver]\nstrategy = cg\n", "strategy"),
    ("[data]\nnu = density: __import__('os')\n", "not allowed"),
    ("[data]\nnu = density: x +\n", "bad expression"),
    ("[data]\ng = spiral\n", "trace"),
    ("[domain]\nresolution = many\n", "line 2"),
])
def test_errors_reference_field(text, needle):
    with pytest.raises(ConfigError, match=needle):
        parse_config(text)


def test_density_expression():
    kind, f = nu_descriptor("density: 1 + x * y + sqrt(delta)")
    assert kind == "density"
    assert f(np.array([2.0]), np.array([3.0]), np.array([4.0]))[0] == pytest.approx(9.0)


def test_polygon_vertices():
    cfg = parse_config("[domain]\nvertices = 0 0; 2 0; 0 1\nresolution = 16\n")
    assert cfg.preset == "polygon"
    assert cfg.domain().contains(np.array([[0.2, 0.2]]))[0]

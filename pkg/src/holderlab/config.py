"""Run configuration: sectioned ``key = value`` files.

Example::

    [domain]
    preset = unit_disk
    resolution = 128

    [coefficients]
    beta = 0.5
    b_scale = 0.1
    c_scale = 0.1
    direction = 1, 0

    [data]
    nu = lebesgue
    g = zero
    # optional analytic solution to score against
    reference = disk_poisson

    [solver]
    strategy = direct

The Morrey exponent is derived from ``beta`` and cannot be set.
"""
from __future__ import annotations

import configparser
import re
from dataclasses import asdict, dataclass, field

import numpy as np

from .geometry import PRESETS, make_domain
from .references import cusp_trace, disk_poisson, disk_quartic, imsqrt


class ConfigError(ValueError):
    pass


SCHEMA = {
    "domain": {"preset", "resolution", "vertices"},
    "coefficients": {"beta", "b_scale", "c_scale", "direction"},
    "data": {"nu", "g", "reference"},
    "solver": {"strategy", "tol", "max_iter", "depth"},
    "output": {"prefix"},
    "capacity": {"radius", "points", "radii"},
    "holder": {"input", "range"},
    "run": {"seed", "threads"},
}


@dataclass
class RunConfig:
    preset: str = "unit_square"
    vertices: list | None = None
    resolution: int = 64
    beta: float = 0.5
    b_scale: float = 0.0
    c_scale: float = 0.0
    direction: tuple = (1.0, 0.0)
    nu: str = "lebesgue"
    g: str = "zero"
    reference: str | None = None
    strategy: str = "direct"
    tol: float = 1e-10
    max_iter: int = 200
    depth: int = 6
    prefix: str = "out/run"
    capacity_radius: float = 0.25
    cdc_points: int = 16
    cdc_radii: tuple = (0.05, 0.1, 0.2)
    holder_input: str | None = None
    holder_range: tuple | None = None
    seed: int = 0
    threads: int = 1
    source: dict = field(default_factory=dict, repr=False)

    @property
    def q(self) -> float:
        return 2.0 / (2.0 - self.beta)

    def echo(self) -> dict:
        d = asdict(self)
        d.pop("source")
        return d

    def domain(self):
        return make_domain(self.preset, self.vertices)

    def validate(self):
        def bad(section, key, msg):
            line = self.source.get((section, key))
            where = f"[{section}] {key}" + (f" (line {line})" if line else "")
            raise ConfigError(f"{where}: {msg}")

        if self.vertices is None and self.preset not in PRESETS:
            bad("domain", "preset", f"unknown preset {self.preset!r}; choose from {', '.join(PRESETS)}")
        if not (8 <= self.resolution <= 1024 and self.resolution & (self.resolution - 1) == 0):
            bad("domain", "resolution", "must be a power of two in [8, 1024]")
        if not 0 < self.beta < 1:
            bad("coefficients", "beta", "must lie in (0, 1)")
        if self.b_scale < 0:
            bad("coefficients", "b_scale", "must be nonnegative")
        if self.c_scale < 0:
            bad("coefficients", "c_scale", "must be nonnegative")
        if len(self.direction) != 2 or np.hypot(*self.direction) == 0:
            bad("coefficients", "direction", "must be a nonzero 2-vector")
        if self.strategy not in ("neumann", "direct"):
            bad("solver", "strategy", "must be neumann or direct")
        if self.tol <= 0:
            bad("solver", "tol", "must be positive")
        if self.depth < 0:
            bad("solver", "depth", "must be >= 0")
        if self.cdc_points < 4:
            bad("capacity", "points", "must be >= 4")
        try:
            nu_descriptor(self.nu)
        except ValueError as exc:
            bad("data", "nu", str(exc))
        if self.reference is not None and self.reference not in REFERENCE_SOLUTIONS:
            bad("data", "reference", f"unknown reference; choose from {', '.join(REFERENCE_SOLUTIONS)}")
        try:
            trace_function(self.g)
        except ValueError as exc:
            bad("data", "g", str(exc))
        return self


def _floats(text):
    return tuple(float(t) for t in re.split(r"[,\s]+", text.strip()) if t)


def _key_lines(text):
    lines, section = {}, None
    for no, raw in enumerate(text.splitlines(), 1):
        s = raw.strip()
        m = re.match(r"\[(.+)\]", s)
        if m:
            section = m.group(1).strip()
        elif "=" in s and not s.startswith(("#", ";")):
            lines[(section, s.split("=", 1)[0].strip())] = no
    return lines


def parse_config(text: str) -> RunConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    lines = _key_lines(text)
    cfg = RunConfig(source=lines)

    for section in cp.sections():
        if section not in SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        for key in cp[section]:
            if key == "q":
                raise ConfigError(f"[{section}] q (line {lines.get((section, key))}): "
                                  "q is derived from beta and cannot be set")
            if key not in SCHEMA[section]:
                raise ConfigError(f"[{section}] {key} (line {lines.get((section, key))}): unknown key")

    def get(section, key, conv, attr):
        if cp.has_option(section, key):
            try:
                setattr(cfg, attr, conv(cp.get(section, key)))
            except ValueError as exc:
                raise ConfigError(f"[{section}] {key} (line {lines.get((section, key))}): {exc}") from exc

    get("domain", "preset", str.strip, "preset")
    get("domain", "resolution", int, "resolution")
    get("domain", "vertices", lambda s: [list(_floats(p)) for p in s.split(";") if p.strip()], "vertices")
    get("coefficients", "beta", float, "beta")
    get("coefficients", "b_scale", float, "b_scale")
    get("coefficients", "c_scale", float, "c_scale")
    get("coefficients", "direction", _floats, "direction")
    get("data", "nu", str.strip, "nu")
    get("data", "g", str.strip, "g")
    get("data", "reference", str.strip, "reference")
    get("solver", "strategy", str.strip, "strategy")
    get("solver", "tol", float, "tol")
    get("solver", "max_iter", int, "max_iter")
    get("solver", "depth", int, "depth")
    get("output", "prefix", str.strip, "prefix")
    get("capacity", "radius", float, "capacity_radius")
    get("capacity", "points", int, "cdc_points")
    get("capacity", "radii", _floats, "cdc_radii")
    get("holder", "input", str.strip, "holder_input")
    get("holder", "range", _floats, "holder_range")
    get("run", "seed", int, "seed")
    get("run", "threads", int, "threads")
    if cfg.vertices is not None:
        cfg.preset = "polygon"
    return cfg.validate()


def load_config(path) -> RunConfig:
    try:
        with open(path) as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


_SAFE = {name: getattr(np, name) for name in
         ("sqrt", "exp", "log", "sin", "cos", "tan", "abs", "arctan2", "hypot", "pi", "minimum", "maximum")}


def _expression(expr: str):
    try:
        code = compile(expr, "<config>", "eval")
    except SyntaxError as exc:
        raise ValueError(f"bad expression {expr!r}: {exc.msg}") from exc
    for name in code.co_names:
        if name not in _SAFE and name not in ("x", "y", "delta"):
            raise ValueError(f"name {name!r} not allowed in expression")

    def f(x, y, delta=None):
        return eval(code, {"__builtins__": {}}, dict(_SAFE, x=x, y=y, delta=delta))
    return f


def nu_descriptor(text: str):
    """Parse ``lebesgue``, ``zero``, ``density: EXPR`` or ``points: x y m; ...``."""
    kind, _, rest = text.partition(":")
    kind = kind.strip()
    if kind in ("lebesgue", "zero"):
        return kind, None
    if kind == "density":
        return kind, _expression(rest.strip())
    if kind == "points":
        pts = [_floats(p) for p in rest.split(";") if p.strip()]
        if not pts or any(len(p) != 3 for p in pts):
            raise ValueError("point masses are 'x y mass' triples separated by ';'")
        return kind, pts
    raise ValueError(f"unknown measure descriptor {text!r}")


# analytic solutions a run can be scored against
REFERENCE_SOLUTIONS = {
    "disk_poisson": disk_poisson,
    "disk_quartic": disk_quartic,
    "imsqrt": imsqrt,
}

NAMED_TRACES = {
    "zero": lambda x, y: np.zeros_like(x),
    "x": lambda x, y: x,
    "imsqrt": imsqrt,
    "cusp": cusp_trace,
}


def trace_function(text: str):
    """Parse a named trace, ``const: C`` or ``expr: EXPR``."""
    kind, _, rest = text.partition(":")
    kind = kind.strip()
    if kind in NAMED_TRACES and not rest:
        return NAMED_TRACES[kind]
    if kind == "const":
        c = float(rest)
        return lambda x, y: np.full_like(x, c)
    if kind == "expr":
        f = _expression(rest.strip())
        return lambda x, y: np.asarray(f(x, y), dtype=float) * np.ones_like(x)
    raise ValueError(f"unknown boundary trace {text!r}")

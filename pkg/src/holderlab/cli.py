"""Command-line runner: ``holderlab COMMAND [options]``.

Commands write CSV artifacts under ``--out PREFIX`` together with a
``PREFIX_provenance.txt`` file.  Exit codes: 0 ok, 1 failed acceptance
criteria, 2 configuration error, 3 non-contractive series, 4 singular
operator, 5 solver failure.
"""
from __future__ import annotations

import argparse
import dataclasses
import sys

import numpy as np

from . import artifacts
from .analysis import fit_lattice, lattice_from_points, set_diameter
from .capacity import ball_capacity, cdc_sweep
from .config import (REFERENCE_SOLUTIONS, ConfigError, RunConfig, load_config, nu_descriptor,
                     trace_function)
from .elliptic import SolverError
from .geometry import GeometryError, build_grid, clamped_delta, singular_coefficients
from .measure import DiscreteMeasure, morrey_norm, read_measure_csv
from .perturbation import FredholmCaseOne, NonContractive, solve_bvp
from .references import condenser_capacity

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_NONCONTRACTIVE, EXIT_FREDHOLM, EXIT_SOLVER = 0, 1, 2, 3, 4, 5
SWEEP_PARAMS = ("b_scale", "c_scale", "resolution", "beta")


def build_measure(cfg: RunConfig, grid) -> DiscreteMeasure:
    kind, arg = nu_descriptor(cfg.nu)
    if kind == "zero":
        return DiscreteMeasure.zero(grid)
    if kind == "lebesgue":
        return DiscreteMeasure.lebesgue(grid)
    if kind == "density":
        x, y = grid.points.T
        dens = np.asarray(arg(x, y, clamped_delta(grid)), dtype=float)
        return DiscreteMeasure.from_density(grid, dens)
    nu = DiscreteMeasure.zero(grid)
    for px, py, m in arg:
        nu = nu + DiscreteMeasure.point_mass(grid, (px, py), m)
    return nu


def setup(cfg: RunConfig):
    grid = build_grid(cfg.domain(), cfg.resolution)
    coeffs = singular_coefficients(grid, cfg.beta, cfg.b_scale, cfg.c_scale, cfg.direction)
    return grid, coeffs, build_measure(cfg, grid), trace_function(cfg.g)


def reference_error(cfg: RunConfig, u) -> float:
    if cfg.reference is None:
        return np.nan
    exact = REFERENCE_SOLUTIONS[cfg.reference]
    pts = u.grid.all_points
    return float(np.max(np.abs(u.all_values - exact(pts[:, 0], pts[:, 1]))))


def run_solve(cfg: RunConfig):
    """One solve; returns ``(status, row, u)`` with ``u`` None on failure."""
    grid, coeffs, nu, g = setup(cfg)
    row = dict(h=grid.h, n_interior=grid.n_interior)
    try:
        u, rep = solve_bvp(coeffs, nu, g, cfg.strategy, depth=cfg.depth, tol=cfg.tol,
                           max_iter=cfg.max_iter)
    except NonContractive as exc:
        row.update(exc.report.as_row())
        return "non_contractive", row, None
    except FredholmCaseOne as exc:
        row.update(exc.report.as_row())
        return "fredholm_case_one", row, None
    except SolverError as exc:
        row.update(residual=exc.residual)
        return "solver_failure", row, None
    row.update(rep.as_row())
    row["reference_error"] = reference_error(cfg, u)
    return "ok", row, u


REPORT_COLUMNS = ["status", "mode", "h", "n_interior", "q", "iterations", "contraction_ratio_hat",
                  "non_contractive", "residual", "series_vs_direct_gap", "empirical_C2",
                  "condition_estimate", "beta_hat", "holder_seminorm_hat", "fit_r2", "data_norm",
                  "trace_norm", "solution_holder_norm", "empirical_C", "reference_error"]
STATUS_CODES = {"ok": EXIT_OK, "non_contractive": EXIT_NONCONTRACTIVE,
                "fredholm_case_one": EXIT_FREDHOLM, "solver_failure": EXIT_SOLVER}


def cmd_solve(cfg, args):
    if args.strategy:
        cfg = dataclasses.replace(cfg, strategy=args.strategy).validate()
    status, row, u = run_solve(cfg)
    row["status"] = status
    artifacts.write_csv(f"{args.out}_report.csv", REPORT_COLUMNS, [row])
    if u is not None:
        artifacts.write_field_csv(u, f"{args.out}_solution.csv")
        artifacts.write_lattice_csv(u, f"{args.out}_lattice.csv")
    artifacts.write_provenance(args.out, "solve", cfg.echo(), row["h"], cfg.q)
    print(f"{status}: beta_hat={row.get('beta_hat', np.nan):.4g} residual={row.get('residual', np.nan):.3g}")
    return STATUS_CODES[status]


def cmd_morrey(cfg, args):
    grid = build_grid(cfg.domain(), cfg.resolution)
    nu = read_measure_csv(grid, args.measure) if args.measure else build_measure(cfg, grid)
    q = args.q if args.q is not None else cfg.q
    res = morrey_norm(nu, q, cfg.depth)
    cx, cy = res.argmax_center
    artifacts.write_csv(f"{args.out}_morrey.csv", ["q", "depth", "value", "argmax_x", "argmax_y", "argmax_radius"],
                        [[q, cfg.depth, res.value, cx, cy, res.argmax_radius]])
    artifacts.write_provenance(args.out, "morrey-norm", cfg.echo(), grid.h, q)
    print(f"morrey_norm = {res.value:.10g} (q = {q:.6g}) at ({cx:.6g}, {cy:.6g}), r = {res.argmax_radius:.6g}")
    return EXIT_OK


def cmd_capacity(cfg, args):
    R = args.radius if args.radius is not None else cfg.capacity_radius
    if R <= 0:
        raise ConfigError("--radius must be positive")
    h = 4 * R / cfg.resolution
    value = ball_capacity(R, h)
    ref = condenser_capacity(R, 2 * R)
    artifacts.write_csv(f"{args.out}_capacity.csv", ["R", "outer", "h", "capacity", "reference", "rel_error"],
                        [[R, 2 * R, h, value, ref, abs(value - ref) / ref]])
    artifacts.write_provenance(args.out, "capacity", cfg.echo(), h, cfg.q)
    print(f"cap(B(0,{R:g}), B(0,{2 * R:g})) = {value:.6g} (reference {ref:.6g})")
    return EXIT_OK


def cmd_cdc(cfg, args):
    domain = args.domain or cfg.preset
    cfg = dataclasses.replace(cfg, preset=domain, vertices=None if args.domain else cfg.vertices,
                              resolution=args.resolution or cfg.resolution,
                              cdc_points=args.points or cfg.cdc_points,
                              cdc_radii=tuple(args.radii) if args.radii else cfg.cdc_radii).validate()
    grid = build_grid(cfg.domain(), cfg.resolution)
    try:
        reports, gamma = cdc_sweep(grid, cfg.cdc_points, cfg.cdc_radii, threads=args.threads or cfg.threads)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    rows = [[rep.xi[0], rep.xi[1], R, ratio, flag]
            for rep in reports for R, ratio, flag in zip(rep.radii, rep.ratios, rep.warnings)]
    artifacts.write_csv(f"{args.out}_cdc.csv", ["xi_x", "xi_y", "R", "ratio", "warning"], rows)
    artifacts.write_provenance(args.out, "cdc-check", cfg.echo(), grid.h, cfg.q)
    print(f"gamma_hat = {gamma:.4g} over R in [{min(cfg.cdc_radii):g}, {max(cfg.cdc_radii):g}] "
          f"({len(rows)} rows)")
    return EXIT_OK


def cmd_holder_fit(cfg, args):
    path = args.input or cfg.holder_input
    if not path:
        raise ConfigError("holder-fit needs --in FIELD.csv")
    try:
        pts, vals, _ = artifacts.read_field_csv(path)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    lat, h = lattice_from_points(pts, vals)
    diam = set_diameter(pts)
    lo, hi = args.range or cfg.holder_range or (4 * h, diam / 4)
    if not 2 * h * (1 - 1e-9) <= lo < hi <= diam / 2:
        raise ConfigError(f"range must satisfy 2h <= a < b <= diam/2 (h = {h:.6g}, diam = {diam:.6g})")
    fit = fit_lattice(lat, h, (lo, hi), args.scales)
    artifacts.write_csv(f"{args.out}_fit.csv",
                        ["beta_hat", "seminorm_hat", "fit_r2", "range_lo", "range_hi", "h", "degenerate"],
                        [[fit.beta_hat, fit.seminorm_hat, fit.fit_r2, lo, hi, h, fit.degenerate]])
    artifacts.write_csv(f"{args.out}_modulus.csv", ["r", "omega"], zip(fit.radii * 1.0, fit.omega))
    artifacts.write_provenance(args.out, "holder-fit", dict(cfg.echo(), holder_input=path), h, cfg.q)
    print(f"beta_hat = {fit.beta_hat:.4g}, seminorm_hat = {fit.seminorm_hat:.4g}, r2 = {fit.fit_r2:.4f} "
          f"(realised exponent of this field only)")
    return EXIT_OK


def cmd_suite(cfg, args):
    from .suite import run_suite
    results = run_suite(verbose=True)
    artifacts.write_csv(f"{args.out}_suite.csv", ["id", "name", "passed", "measured", "threshold"],
                        ([r.id, r.name, r.passed, r.measured, r.threshold] for r in results))
    artifacts.write_provenance(args.out, "suite", cfg.echo())
    failed = [r.id for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return EXIT_FAILED if failed else EXIT_OK


def sweep_rows(cfg: RunConfig, param: str, values, threads: int = 1):
    """One run per value; a failing run is recorded and the sweep continues."""
    if param not in SWEEP_PARAMS:
        raise ConfigError(f"--param must be one of {', '.join(SWEEP_PARAMS)}")

    def one(value):
        row = dict(param=param, value=value)
        try:
            v = int(value) if param == "resolution" else float(value)
            run = dataclasses.replace(cfg, **{param: v}).validate()
            status, out, _ = run_solve(run)
            row.update(out)
        except (ConfigError, GeometryError, ValueError) as exc:
            status = "config_error"
            row["error"] = str(exc)
        row["status"] = status
        return row

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(threads) as ex:
            return list(ex.map(one, values))
    return [one(v) for v in values]


def cmd_sweep(cfg, args):
    values = args.values or []
    rows = sweep_rows(cfg, args.param, values, args.threads or cfg.threads)
    header = ["param", "value"] + REPORT_COLUMNS + ["error"]
    artifacts.write_csv(f"{args.out}_sweep.csv", header, rows)
    artifacts.write_provenance(args.out, f"sweep {args.param}", cfg.echo(), q=cfg.q)
    bad = sum(r["status"] != "ok" for r in rows)
    print(f"{len(rows)} runs, {bad} failed")
    return EXIT_OK


def _floats(text):
    try:
        return [float(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _range(text):
    v = _floats(text)
    if len(v) != 2:
        raise argparse.ArgumentTypeError("range is 'a,b'")
    return tuple(v)


def _values(text):
    return [t for t in text.replace(",", " ").split()]


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="run configuration file")
    common.add_argument("--out", help="output prefix (default: config [output] prefix)")
    common.add_argument("--threads", type=int, help="worker threads for sweeps")

    p = argparse.ArgumentParser(prog="holderlab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", parents=[common], help="solve the boundary value problem")
    s.add_argument("--strategy", choices=("neumann", "direct"))
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("morrey-norm", parents=[common], help="Morrey norm of the data measure")
    s.add_argument("--measure", help="measure CSV (cell, x, y, mass) on the config grid")
    s.add_argument("--q", type=float, help="exponent (default n/(2-beta))")
    s.set_defaults(func=cmd_morrey)

    s = sub.add_parser("capacity", parents=[common], help="capacity of a disk in its double")
    s.add_argument("--radius", type=float)
    s.set_defaults(func=cmd_capacity)

    s = sub.add_parser("cdc-check", parents=[common], help="capacity density ratios along the boundary")
    s.add_argument("--domain")
    s.add_argument("--points", type=int)
    s.add_argument("--radii", type=_floats)
    s.add_argument("--resolution", type=int, help="grid resolution (default: config value)")
    s.set_defaults(func=cmd_cdc)

    s = sub.add_parser("holder-fit", parents=[common], help="fit a Hölder exponent to a field CSV")
    s.add_argument("--in", dest="input")
    s.add_argument("--range", type=_range)
    s.add_argument("--scales", type=int, default=12)
    s.set_defaults(func=cmd_holder_fit)

    s = sub.add_parser("suite", parents=[common], help="run the acceptance battery")
    s.set_defaults(func=cmd_suite)

    s = sub.add_parser("sweep", parents=[common], help="repeat solve over one parameter")
    s.add_argument("--param", required=True)
    s.add_argument("--values", type=_values, default=[])
    s.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else RunConfig().validate()
        if args.command == "solve" and not args.config:
            raise ConfigError("solve needs --config FILE")
        args.out = args.out or cfg.prefix
        return args.func(cfg, args)
    except (ConfigError, GeometryError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())

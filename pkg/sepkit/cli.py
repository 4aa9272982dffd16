#
# Copyright (c) 2025, sepkit developers
#
# SPDX-License-Identifier: BSD 2-Clause License
#

"""sepkit command-line interface.

Sub-commands:
- portrait: trajectories from a seed grid, drawn as an SVG (or written as CSV)
- field: normalized direction field as SVG plus the raw samples as CSV
- equilibria: zeros of f with their classification, as JSON
- separatrix: separatrix candidates by index scan, ZDP, BVP or curvature, as JSON
- escape: forward and backward escape-time report for one start point, as JSON

Exit codes: 0 success, 2 usage/parse/config error, 3 no converged result, 4 I/O error.
escape counts as "no result" when both directions only ran out of time.

Environment:
- SEPKIT_CONFIG: TOML configuration used when --config is not given
- SEPKIT_LOG_LEVEL: log level of the diagnostic stream (default INFO)
"""

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np
from loguru import logger

from sepkit import __version__, export, plotting
from sepkit.config import RunConfig, build_config, load_config_file
from sepkit.equilibria import EquilibriumType, find_zeros
from sepkit.exceptions import ConfigError, ParseError, SepkitError
from sepkit.expressions import HolomorphicFunction, parse
from sepkit.flow import REAL_TIME, REVERSED_TIME, IntegrationSettings, TerminationKind, escape_report, integrate
from sepkit.separatrix import (
    BvpProblem,
    Method,
    bvp_separatrix_point,
    curvature_max_scan,
    index_scan,
    oriented_bvp_problem,
    zdp_curve,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NO_RESULT = 3
EXIT_IO = 4


class UsageError(SepkitError):
    pass


def _setup_logging(args) -> str:
    level = os.getenv("SEPKIT_LOG_LEVEL", "INFO").upper()
    if args.quiet:
        level = "WARNING"
    if args.verbose:
        level = "DEBUG"
    logger.remove()
    logger.add(sys.stderr, level=level)
    return level


def _function(cfg: RunConfig) -> HolomorphicFunction:
    if not cfg.function:
        raise UsageError("no function given (use --f or set 'function' in the config file)")
    return parse(cfg.function)


def _out(cfg: RunConfig, default: str) -> Path:
    return Path(cfg.out or default)


def _provenance(settings: IntegrationSettings) -> dict:
    return {
        "sepkit_version": __version__,
        "rtol": settings.rtol,
        "atol": settings.atol,
        "t_max": settings.t_max,
        "r_blowup": settings.r_blowup,
        "closure_rtol": settings.closure_rtol,
    }


def _seed_grid(domain, n: int) -> np.ndarray:
    """Cell centers of an n × n partition of the domain, row-major."""
    x_min, x_max, y_min, y_max = domain
    xs = x_min + (np.arange(n) + 0.5) * (x_max - x_min) / n
    ys = y_min + (np.arange(n) + 0.5) * (y_max - y_min) / n
    return (xs[None, :] + 1j * ys[:, None]).ravel()


def _sample_grid(domain, n: int) -> np.ndarray:
    x_min, x_max, y_min, y_max = domain
    xs = np.linspace(x_min, x_max, n)
    ys = np.linspace(y_min, y_max, n)
    return xs[None, :] + 1j * ys[:, None]


def seed_trajectory(source: str, seed: complex, settings: IntegrationSettings) -> tuple[np.ndarray, np.ndarray]:
    """Trajectory through seed in both time directions, ordered by increasing time."""
    f = parse(source)
    forward = integrate(f, seed, REAL_TIME, settings)
    backward = integrate(f, seed, REVERSED_TIME, settings)
    times = np.concatenate((-backward.times[:0:-1], forward.times))
    points = np.concatenate((backward.points[:0:-1], forward.points))
    return times, points


def _trajectories(cfg: RunConfig, settings: IntegrationSettings, seeds: np.ndarray) -> list:
    jobs = [(cfg.function, complex(seed), settings) for seed in seeds]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            return list(pool.map(seed_trajectory, *zip(*jobs)))
    return [seed_trajectory(*job) for job in jobs]


# Sub-commands =========================================================================


def _overlay_candidates(f: HolomorphicFunction, cfg: RunConfig) -> list[complex]:
    settings = cfg.integration_settings()
    candidates = []
    for x_star in cfg.overlay_x_star:
        try:
            problem = oriented_bvp_problem(f, x_star, cfg.bracket, settings=settings)
            candidate = bvp_separatrix_point(f, problem, settings)
        except SepkitError as e:
            logger.warning(f"No separatrix point for x*={x_star}: {e}")
            continue
        if candidate.converged:
            candidates.append(candidate.z)
        else:
            logger.warning(f"BVP at x*={x_star} did not converge; not drawn")
    return candidates


def cmd_portrait(cfg: RunConfig) -> int:
    f = _function(cfg)
    settings = cfg.integration_settings(t_max=cfg.portrait_t_max)
    seeds = _seed_grid(cfg.domain, cfg.grid_n)
    logger.info(f"Integrating {len(seeds)} seeds of {f} (workers={cfg.workers})")
    trajectories = _trajectories(cfg, settings, seeds)

    if cfg.format == "csv":
        folder = _out(cfg, "portrait")
        folder.mkdir(parents=True, exist_ok=True)
        for k, (times, points) in enumerate(trajectories):
            export.write_trajectory_csv(folder / f"trajectory_{k:04d}.csv", times, points)
        logger.info(f"Wrote {len(trajectories)} trajectory CSV files to {folder}")
        return EXIT_OK

    equilibria = find_zeros(f, cfg.domain)
    candidates = _overlay_candidates(f, cfg)
    path = plotting.portrait_svg(
        _out(cfg, "portrait.svg"),
        f"ż = {f.to_source()}",
        cfg.domain,
        [p for _, p in trajectories],
        equilibria,
        candidates,
    )
    logger.info(f"Wrote phase portrait to {path}")
    return EXIT_OK


def cmd_field(cfg: RunConfig) -> int:
    f = _function(cfg)
    grid = _sample_grid(cfg.domain, cfg.grid_n)
    values = f.evaluate_grid(grid)
    svg = _out(cfg, "field.svg")
    plotting.field_svg(svg, f"direction field of {f.to_source()}", cfg.domain, grid, values)
    table = export.write_field_csv(svg.with_suffix(".csv"), grid, values)
    logger.info(f"Wrote direction field to {svg} and {table}")
    return EXIT_OK


def _write_document(cfg: RunConfig, default: str, results: list, diagnostics: dict) -> Path:
    doc = export.document(cfg.model_dump(mode="json"), results, diagnostics)
    path = export.write_json(_out(cfg, default), doc)
    logger.info(f"Wrote {len(results)} results to {path}")
    return path


def cmd_equilibria(cfg: RunConfig) -> int:
    f = _function(cfg)
    equilibria = find_zeros(f, cfg.domain, grid_n=cfg.grid_n)
    results = [export.equilibrium_record(eq) for eq in equilibria]
    diagnostics = {"count": len(results), "has_branch_cut": f.has_branch_cut, "is_entire": f.is_entire}
    _write_document(cfg, "equilibria.json", results, diagnostics)
    return EXIT_OK if results else EXIT_NO_RESULT


def _separatrix_index(f, cfg, settings, failures) -> list:
    if cfg.segment is None:
        raise UsageError("--method index needs --segment X0,Y0,X1,Y1")
    centers = [eq for eq in find_zeros(f, cfg.domain) if eq.kind.type is EquilibriumType.CENTER]
    x0, y0, x1, y1 = cfg.segment
    candidates = index_scan(f, (complex(x0, y0), complex(x1, y1)), centers, cfg.epsilon, settings)
    return [export.candidate_record(c) for c in candidates]


def _separatrix_zdp(f, cfg, settings, failures) -> list:
    polylines = zdp_curve(f, cfg.domain, grid_n=max(cfg.grid_n, 8), part=cfg.part)
    return [export.polyline_record(p) for p in polylines]


def _separatrix_bvp(f, cfg, settings, failures) -> list:
    results = []
    for x_star in cfg.x_star:
        if cfg.t1 is None:
            problem = oriented_bvp_problem(f, x_star, cfg.bracket, settings=settings)
        else:
            problem = BvpProblem(x_star, 0.0, cfg.t1, cfg.bracket)
        try:
            results.append(export.candidate_record(bvp_separatrix_point(f, problem, settings)))
        except SepkitError as e:
            logger.warning(f"BVP at x*={x_star} failed: {e}")
            failures.append({"x_star": x_star, "error": type(e).__name__, "message": str(e)})
    return results


def _separatrix_curvature(f, cfg, settings, failures) -> list:
    if not cfg.seeds:
        raise UsageError("--method curvature needs at least one --seed RE,IM")
    results = []
    for seed in cfg.seeds:
        try:
            results.append(export.candidate_record(curvature_max_scan(f, complex(*seed), settings)))
        except SepkitError as e:
            logger.warning(f"Curvature scan from {seed} failed: {e}")
            failures.append({"seed": list(seed), "error": type(e).__name__, "message": str(e)})
    return results


_SEPARATRIX_METHODS = {
    Method.INDEX_SCAN: _separatrix_index,
    Method.ZDP: _separatrix_zdp,
    Method.BVP: _separatrix_bvp,
    Method.CURVATURE: _separatrix_curvature,
}


def cmd_separatrix(cfg: RunConfig) -> int:
    f = _function(cfg)
    if cfg.method is None:
        raise UsageError("no separatrix method given (use --method index|zdp|bvp|curvature)")
    settings = cfg.integration_settings()
    failures: list = []
    results = _SEPARATRIX_METHODS[cfg.method](f, cfg, settings, failures)
    diagnostics = _provenance(settings) | {"method": cfg.method.value, "failures": failures}
    _write_document(cfg, "separatrix.json", results, diagnostics)
    return EXIT_OK if any(r["converged"] for r in results) else EXIT_NO_RESULT


def cmd_escape(cfg: RunConfig) -> int:
    f = _function(cfg)
    if cfg.z0 is None:
        raise UsageError("escape needs --z0 RE,IM")
    settings = cfg.integration_settings()
    report = escape_report(f, complex(*cfg.z0), settings)
    results = [
        export.trajectory_record("forward", report.forward),
        export.trajectory_record("backward", report.backward),
    ]
    diagnostics = _provenance(settings) | {
        "positive_separatrix": report.is_positive_separatrix,
        "negative_separatrix": report.is_negative_separatrix,
    }
    _write_document(cfg, "escape.json", results, diagnostics)
    timed_out = TerminationKind.MAX_TIME
    if report.forward.termination.kind is timed_out and report.backward.termination.kind is timed_out:
        return EXIT_NO_RESULT
    return EXIT_OK


COMMANDS = {
    "portrait": cmd_portrait,
    "field": cmd_field,
    "equilibria": cmd_equilibria,
    "separatrix": cmd_separatrix,
    "escape": cmd_escape,
}


# Argument parsing =====================================================================


def _method(text: str) -> Method:
    return Method.INDEX_SCAN if text == "index" else Method(text)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, help="TOML configuration file (default: $SEPKIT_CONFIG)")
    common.add_argument("--rtol", type=float, help="Relative integration tolerance")
    common.add_argument("--atol", type=float, help="Absolute integration tolerance")
    common.add_argument("--workers", type=int, help="Worker processes for portrait trajectories")
    common.add_argument("-q", "--quiet", action="store_true", help="Only log warnings and errors")
    common.add_argument("-v", "--verbose", action="store_true", help="Log debug output")
    common.add_argument("--f", dest="function", type=str, help="Right-hand side f(z), e.g. 'cosh(z-0.5)'")
    common.add_argument("--out", type=str, help="Output path")

    def with_domain(p, grid_help: str):
        p.add_argument("--domain", type=str, help="Rectangle XMIN,XMAX,YMIN,YMAX ('pi' allowed)")
        p.add_argument("--grid", dest="grid_n", type=int, help=grid_help)

    parser = argparse.ArgumentParser(prog="sepkit", description="Separatrices of holomorphic flows ż = f(z)")
    parser.add_argument("--version", action="version", version=f"sepkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("portrait", parents=[common], help="Phase portrait from a seed grid")
    with_domain(p, "Seeds per axis (grid² trajectories)")
    p.add_argument("--format", choices=("svg", "csv"), help="SVG picture or per-trajectory CSV files")
    p.add_argument("--tmax", dest="portrait_t_max", type=float, help="Time limit per direction")
    p.add_argument(
        "--xstar", dest="overlay_x_star", type=str, help="Comma list of x* values; overlays BVP separatrix points"
    )

    p = sub.add_parser("field", parents=[common], help="Direction field as SVG and CSV")
    with_domain(p, "Samples per axis")

    p = sub.add_parser("equilibria", parents=[common], help="Locate and classify zeros of f")
    with_domain(p, "Newton seeds per axis")

    p = sub.add_parser("separatrix", parents=[common], help="Separatrix candidates")
    with_domain(p, "Contouring grid (zdp)")
    p.add_argument("--method", type=_method, help="index, zdp, bvp or curvature")
    p.add_argument("--segment", type=str, help="Scan segment X0,Y0,X1,Y1 (index)")
    p.add_argument("--epsilon", type=float, help="Offset of the index-product test points (index)")
    p.add_argument("--xstar", dest="x_star", type=str, help="Comma list of constraint values Re z(t1) (bvp)")
    p.add_argument("--t1", type=float, help="Constraint time, negative for an upstream constraint (bvp)")
    p.add_argument("--bracket", type=str, help="Search interval LO,HI for Im z(t0) (bvp)")
    p.add_argument("--seed", dest="seeds", action="append", type=str, help="Start point RE,IM; repeatable (curvature)")
    p.add_argument("--part", choices=("imag", "real"), help="Contour Im f = 0 or Re f = 0 (zdp)")

    p = sub.add_parser("escape", parents=[common], help="Escape-time report for one start point")
    p.add_argument("--z0", type=str, help="Start point RE,IM")
    p.add_argument("--tmax", dest="t_max", type=float, help="Time limit per direction")
    return parser


_NOT_CONFIG = {"command", "config", "quiet", "verbose"}
_POINT_FLAGS = {"--domain", "--segment", "--xstar", "--bracket", "--seed", "--z0"}


def _join_point_values(argv: list[str]) -> list[str]:
    """Rewrite `--flag -1,0` as `--flag=-1,0`; argparse takes a leading '-' for an option."""
    joined = []
    k = 0
    while k < len(argv):
        token = argv[k]
        if token in _POINT_FLAGS and k + 1 < len(argv) and argv[k + 1].startswith("-"):
            joined.append(f"{token}={argv[k + 1]}")
            k += 2
            continue
        joined.append(token)
        k += 1
    return joined


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(_join_point_values(sys.argv[1:] if argv is None else list(argv)))
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE
    level = _setup_logging(args)

    try:
        flags = {k: v for k, v in vars(args).items() if k not in _NOT_CONFIG}
        cfg = build_config(load_config_file(args.config), flags)
        return COMMANDS[args.command](cfg)
    except (ParseError, ConfigError, UsageError, ValueError) as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_USAGE
    except SepkitError as e:
        if level == "DEBUG":
            logger.exception(e)
        else:
            logger.error(f"{type(e).__name__}: {e}")
        return EXIT_NO_RESULT
    except OSError as e:
        logger.error(f"I/O error: {e}")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

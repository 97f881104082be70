"""Command-line client for the toolkit service.

Subcommands mirror the service endpoints (solve, sweep, estimates, eigen).
Requests are built from a flat TOML config plus flag overrides and executed
in-process by default; with --url they are POSTed to a running service
instead. CSV rendering happens client-side either way, so identical
configurations produce byte-identical files.

Exit codes: 0 success, 1 usage or validation error, 2 solver failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from pydantic import ValidationError

from . import experiments, service
from .errors import (EigenFailure, MeasureZeroBoundaryError, NoContractionError,
                     OcpFailure, SolverFailure)
from .schemas import (EigenRequest, EstimatesRequest, ProblemConfig,
                      SolveRequest, SweepRequest)

PROBLEM_KEYS = ("n", "gamma1_sides", "bc", "alpha", "b", "z_d", "m1", "m2",
                "pde_tol", "ocp_tol")

_ENDPOINTS = {"solve": "/solve", "sweep": "/sweep",
              "estimates": "/estimates", "eigen": "/eigen"}


class CliError(Exception):
    """Configuration or usage problem; maps to exit code 1."""


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    file = Path(path)
    if not file.is_file():
        raise CliError(f"config file not found: {file}")
    try:
        with open(file, "rb") as handle:
            return tomllib.load(handle)
    except tomllib.TOMLDecodeError as exc:
        raise CliError(f"config file {file} is not valid TOML: {exc}")


def build_problem_config(config: dict, args) -> ProblemConfig:
    kwargs = {key: config[key] for key in PROBLEM_KEYS if key in config}
    sides = kwargs.get("gamma1_sides")
    if isinstance(sides, str):
        kwargs["gamma1_sides"] = [s.strip() for s in sides.split(",") if s.strip()]
    if getattr(args, "n", None) is not None:
        kwargs["n"] = args.n
    return ProblemConfig(**kwargs)


def _dispatch(args, path: str, request, runner):
    if args.url:
        import httpx

        response = httpx.post(args.url.rstrip("/") + path,
                              json=request.model_dump(mode="json"),
                              timeout=3600.0)
        if response.status_code != 200:
            raise CliError(f"service returned {response.status_code}: {response.text}")
        return response.json()
    return runner(request).model_dump(mode="json")


def _write_csv(path: str, columns, rows) -> None:
    Path(path).write_text(experiments.render_csv(columns, rows), encoding="utf-8")


def cmd_solve(args) -> int:
    config = load_config(args.config)
    request = SolveRequest(problem=build_problem_config(config, args))
    result = _dispatch(args, "/solve", request, service.run_solve)
    print(f"J={result['cost']!r} residual={result['residual']!r} "
          f"iterations={result['iterations']}")
    return 0


def cmd_sweep(args) -> int:
    config = load_config(args.config)
    request = SweepRequest(
        problem=build_problem_config(config, args),
        mode=args.mode or config.get("mode", "optimal"),
        alphas=args.alphas or config.get("alphas", "1:1e6:x10"),
        g=config.get("g", 0.0),
        q=config.get("q", 0.0))
    result = _dispatch(args, "/sweep", request, service.run_sweep)
    out = args.out or config.get("out", "sweep.csv")
    _write_csv(out, result["columns"], result["rows"])
    print(f"wrote {len(result['rows'])} rows to {out} "
          f"(reference J={result['reference_cost']!r})")
    return 0


def cmd_estimates(args) -> int:
    config = load_config(args.config)
    request = EstimatesRequest(
        problem=build_problem_config(config, args),
        seeds=args.seeds if args.seeds is not None else config.get("seeds", 5),
        seed=args.seed if args.seed is not None else config.get("seed", 0),
        alphas=args.alphas or config.get("alphas", "1:1e6:x10"))
    result = _dispatch(args, "/estimates", request, service.run_estimates)
    out = args.out or config.get("out", "estimates.csv")
    bounds_path = Path(out)
    bounds_out = str(bounds_path.with_name(bounds_path.stem + "_bounds" + bounds_path.suffix))
    _write_csv(out, result["columns"], result["rows"])
    _write_csv(bounds_out, result["bound_columns"], result["bound_rows"])
    status = "all passed" if result["all_passed"] else "VIOLATIONS FOUND"
    print(f"wrote {len(result['rows'])} inequality rows to {out} and "
          f"{len(result['bound_rows'])} bound rows to {bounds_out}: {status}")
    return 0


def cmd_eigen(args) -> int:
    config = load_config(args.config)
    request = EigenRequest(problem=build_problem_config(config, args))
    result = _dispatch(args, "/eigen", request, service.run_eigen)
    for key in ("lam", "lam_1", "lam_alpha", "alpha", "trace_norm",
                "trace_norm_v0", "c0", "c0_alpha"):
        print(f"{key}={result[key]!r}")
    if args.out:
        columns = list(result.keys())
        _write_csv(args.out, columns, [result])
    return 0


def build_parser() -> _ArgumentParser:
    parser = _ArgumentParser(prog="heatopt",
                             description="Optimal control of mixed Poisson problems.")
    parser.add_argument("--verbose", action="store_true",
                        help="log per-stage wall times to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    def common(p, seeds=False):
        p.add_argument("--config", help="flat TOML config file")
        p.add_argument("--url", help="base URL of a running service; "
                                     "default runs in-process")
        p.add_argument("--n", type=int, help="mesh subdivisions override")
        p.add_argument("--out", help="output CSV path")
        if seeds:
            p.add_argument("--seeds", type=int, help="number of random specs")
            p.add_argument("--seed", type=int, help="base seed for random specs")

    p_solve = sub.add_parser("solve", help="solve one optimal control problem")
    common(p_solve)
    p_solve.set_defaults(handler=cmd_solve)

    p_sweep = sub.add_parser("sweep", help="Robin-to-Dirichlet convergence sweep")
    common(p_sweep)
    p_sweep.add_argument("--mode", choices=("fixed", "optimal"))
    p_sweep.add_argument("--alphas", help="schedule start:end:x<factor>")
    p_sweep.set_defaults(handler=cmd_sweep)

    p_est = sub.add_parser("estimates", help="certify the comparison estimates")
    common(p_est, seeds=True)
    p_est.add_argument("--alphas", help="schedule for the boundedness study")
    p_est.set_defaults(handler=cmd_estimates)

    p_eigen = sub.add_parser("eigen", help="measure coercivity/trace constants")
    common(p_eigen)
    p_eigen.set_defaults(handler=cmd_eigen)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.verbose:
        logging.basicConfig(level=logging.INFO, stream=sys.stderr,
                            format="%(name)s: %(message)s")
    try:
        return args.handler(args)
    except (CliError, ValidationError, MeasureZeroBoundaryError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (SolverFailure, OcpFailure, EigenFailure, NoContractionError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""FastAPI service exposing the toolkit's solve, sweep, estimate and eigen
operations.

The handler functions are plain request -> response functions; the CLI calls
them in-process and the HTTP routes wrap them, so both fronts share one code
path. Solves are pure functions of the request, which makes the endpoints
safe for concurrent use.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from . import __version__, control, experiments
from .errors import (EigenFailure, MeasureZeroBoundaryError, NoContractionError,
                     OcpFailure, SolverFailure)
from .problem import DiscreteProblem
from .schemas import (EigenRequest, EigenResponse, EstimatesRequest,
                      EstimatesResponse, SolveRequest, SolveResponse,
                      SweepRequest, SweepResponse)

SOLVER_ERRORS = (SolverFailure, OcpFailure, EigenFailure, NoContractionError)


def run_solve(request: SolveRequest) -> SolveResponse:
    problem = DiscreteProblem(request.problem.to_spec())
    solution = control.solve_ocp(problem)
    d = problem.d
    return SolveResponse(
        bc=problem.spec.bc,
        alpha=problem.spec.alpha,
        cost=solution.cost,
        iterations=solution.iterations,
        residual=solution.residual,
        g_norm_h=d.h_norm(solution.control.g),
        q_norm_q=d.q_norm(solution.control.q),
        q_min=float(solution.control.q.min()),
        u_norm_v=d.v_norm(solution.state.u),
        p_norm_v=d.v_norm(solution.adjoint.p),
    )


def _schedule(alphas) -> tuple:
    if isinstance(alphas, str):
        return experiments.parse_alpha_schedule(alphas)
    return tuple(float(a) for a in alphas)


def run_sweep(request: SweepRequest) -> SweepResponse:
    config = experiments.SweepConfig(
        spec=request.problem.to_spec(),
        alphas=_schedule(request.alphas),
        mode=request.mode,
        g=request.g, q=request.q)
    report = experiments.run_alpha_sweep(config)
    return SweepResponse(
        mode=request.mode,
        columns=report.columns,
        rows=report.rows,
        reference_cost=report.reference_cost,
        reference_u_norm_v=report.reference_u_norm_v)


def run_estimates(request: EstimatesRequest) -> EstimatesResponse:
    suite = experiments.run_estimate_report(
        request.problem.to_spec(), seed_count=request.seeds,
        seed=request.seed, alphas=_schedule(request.alphas))
    return EstimatesResponse(
        columns=suite.columns, rows=suite.rows,
        bound_columns=suite.bound_columns, bound_rows=suite.bound_rows,
        all_passed=suite.all_passed)


def run_eigen(request: EigenRequest) -> EigenResponse:
    problem = DiscreteProblem(request.problem.to_spec())
    constants = control.estimate_constants(problem)
    return EigenResponse(
        lam=constants.lam, lam_1=constants.lam_1,
        lam_alpha=constants.lam_alpha, alpha=constants.alpha,
        trace_norm=constants.trace_norm, trace_norm_v0=constants.trace_norm_v0,
        c0=constants.c0, c0_alpha=constants.c0_alpha)


app = FastAPI(title="heatopt", version=__version__,
              description="Distributed + boundary-flux optimal control of mixed "
                          "Poisson problems with Robin-to-Dirichlet asymptotics.")


def _guard(fn, request):
    try:
        return fn(request)
    except (ValueError, MeasureZeroBoundaryError) as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    except SOLVER_ERRORS as exc:
        raise HTTPException(status_code=500, detail=str(exc))


@app.get("/health")
def health():
    return {"status": "ok", "version": __version__}


@app.post("/solve", response_model=SolveResponse)
def solve_endpoint(request: SolveRequest) -> SolveResponse:
    return _guard(run_solve, request)


@app.post("/sweep", response_model=SweepResponse)
def sweep_endpoint(request: SweepRequest) -> SweepResponse:
    return _guard(run_sweep, request)


@app.post("/estimates", response_model=EstimatesResponse)
def estimates_endpoint(request: EstimatesRequest) -> EstimatesResponse:
    return _guard(run_estimates, request)


@app.post("/eigen", response_model=EigenResponse)
def eigen_endpoint(request: EigenRequest) -> EigenResponse:
    return _guard(run_eigen, request)

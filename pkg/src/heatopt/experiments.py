"""Sweep drivers and report generation: the quantitative certification layer.

Two studies are provided: the Robin-to-Dirichlet sweep, which tracks how
states, adjoints, optimal controls and cost values approach their Dirichlet
limits as the heat transfer coefficient grows, and the estimate report,
which certifies the scalar-vs-vectorial comparison inequalities on a family
of seeded random problem instances and records the boundedness of optimal
control norms across the coefficient schedule.

All outputs are plain column/row tables rendered to CSV with round-trip
float formatting, so identical configurations produce byte-identical files.
Wall times are logged, never written into the tables.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, replace

import numpy as np

from . import control
from .catalog import resolve_field
from .problem import DiscreteProblem, Discretization, ProblemSpec

log = logging.getLogger("heatopt")

DEFAULT_ALPHA_SCHEDULE = tuple(10.0 ** k for k in range(7))

SWEEP_COLUMNS = [
    "alpha",
    "u_gap_v", "p_gap_v", "ctrl_gap_hq", "cost_gap",
    "u_gap_rel", "p_gap_rel", "ctrl_gap_rel", "cost_gap_rel",
    "u_ratio", "p_ratio", "ctrl_ratio", "cost_ratio",
    "bound_q_lhs", "bound_q_rhs", "bound_q_ok",
    "bound_g_lhs", "bound_g_rhs_m1", "bound_g_ok_m1",
    "bound_g_rhs_m2", "bound_g_ok_m2",
]

ESTIMATE_COLUMNS = ["spec_id", "bc", "inequality", "lhs", "rhs", "slack",
                    "resolution", "passed"]

BOUND_COLUMNS = ["alpha", "g_norm_h", "q_norm_q", "cost"]


@dataclass(frozen=True)
class SweepConfig:
    """One Robin-to-Dirichlet convergence study."""

    spec: ProblemSpec
    alphas: tuple = DEFAULT_ALPHA_SCHEDULE
    mode: str = "optimal"
    g: object = 0.0
    q: object = 0.0

    def __post_init__(self):
        if self.mode not in ("fixed", "optimal"):
            raise ValueError(f"mode must be 'fixed' or 'optimal', got {self.mode!r}")
        alphas = tuple(float(a) for a in self.alphas)
        if not alphas or any(a <= 0 for a in alphas):
            raise ValueError("alpha schedule must be nonempty and positive")
        if any(b <= a for a, b in zip(alphas, alphas[1:])):
            raise ValueError("alpha schedule must be strictly increasing")
        object.__setattr__(self, "alphas", alphas)


@dataclass
class ConvergenceReport:
    columns: list
    rows: list
    reference_cost: float
    reference_u_norm_v: float


@dataclass
class EstimateSuite:
    columns: list
    rows: list
    bound_columns: list
    bound_rows: list
    all_passed: bool


def parse_alpha_schedule(text: str) -> tuple:
    """Parse 'start:end:x<factor>' into a geometric schedule, ends inclusive."""
    parts = text.split(":")
    if len(parts) != 3 or not parts[2].startswith("x"):
        raise ValueError(
            f"alpha schedule must look like 'start:end:x<factor>', got {text!r}")
    start, end = float(parts[0]), float(parts[1])
    factor = float(parts[2][1:])
    if start <= 0 or end < start or factor <= 1:
        raise ValueError(f"bad alpha schedule {text!r}")
    values = []
    a = start
    while a <= end * (1 + 1e-12):
        values.append(a)
        a *= factor
    return tuple(values)


def _ratio(value, previous):
    if previous is None or previous == 0.0:
        return ""
    return value / previous


def _rel(gap, reference):
    return gap / reference if reference > 0 else 0.0


def run_alpha_sweep(config: SweepConfig) -> ConvergenceReport:
    """Solve the Dirichlet reference once, then every Robin instance.

    In fixed mode the control data is held fixed and only the state and
    adjoint move; in optimal mode each instance is a full optimal control
    solve (warm-started along the schedule). Every row carries the gap
    columns, their empirical decay ratios, and both Step-2 style bounds for
    the control components (the distributed one in both weight variants).
    """
    spec = replace(config.spec, bc="dirichlet", alpha=None)
    disc = Discretization(spec.n, spec.gamma1_sides)
    dirichlet = DiscreteProblem(spec, disc)
    constants = control.estimate_constants(dirichlet)
    trace = constants.trace_norm
    m1, m2 = spec.m1, spec.m2

    t0 = time.perf_counter()
    if config.mode == "fixed":
        g_nodal = disc.interpolate(resolve_field(config.g))
        flux = dirichlet.resolve_flux(config.q)
        load = disc.domain_mass @ g_nodal - flux.load
        g_sq = disc.h_inner(g_nodal, g_nodal)

        def fixed_cost(problem, state):
            misfit = state.u - problem.z_d
            return 0.5 * disc.h_inner(misfit, misfit) + 0.5 * m1 * g_sq \
                + 0.5 * m2 * flux.sqnorm

        ref_state = dirichlet.solve_state_load(load)
        ref_adjoint = dirichlet.solve_adjoint(ref_state)
        ref_cost = fixed_cost(dirichlet, ref_state)
        ref_control = None
    else:
        ref = control.solve_ocp(dirichlet)
        ref_state, ref_adjoint, ref_cost = ref.state, ref.adjoint, ref.cost
        ref_control = ref.control
    log.info("reference (dirichlet) solve: %.3f s", time.perf_counter() - t0)

    ref_u_norm = disc.v_norm(ref_state.u)
    ref_p_norm = disc.v_norm(ref_adjoint.p)
    ref_ctrl_norm = (control.hq_norm(dirichlet, ref_control)
                     if ref_control is not None else 0.0)

    rows = []
    previous = {}
    warm = None
    for alpha in config.alphas:
        t0 = time.perf_counter()
        robin = DiscreteProblem(replace(spec, bc="robin", alpha=alpha), disc)
        if config.mode == "fixed":
            state = robin.solve_state_load(load)
            adjoint = robin.solve_adjoint(state)
            cost_value = fixed_cost(robin, state)
            ctrl_gap = 0.0
            gap_g_h = 0.0
            gap_q_q = 0.0
        else:
            sol = control.solve_ocp(robin, initial=warm)
            warm = sol.control
            state, adjoint, cost_value = sol.state, sol.adjoint, sol.cost
            diff = sol.control - ref_control
            ctrl_gap = control.hq_norm(dirichlet, diff)
            gap_g_h = disc.h_norm(diff.g)
            gap_q_q = disc.q_norm(diff.q)

        u_gap = disc.v_norm(state.u - ref_state.u)
        p_gap = disc.v_norm(adjoint.p - ref_adjoint.p)
        cost_gap = abs(cost_value - ref_cost)

        bound_q_rhs = (trace / m2) * p_gap
        bound_g_rhs_m1 = p_gap / m1
        bound_g_rhs_m2 = p_gap / m2
        row = {
            "alpha": alpha,
            "u_gap_v": u_gap, "p_gap_v": p_gap,
            "ctrl_gap_hq": ctrl_gap, "cost_gap": cost_gap,
            "u_gap_rel": _rel(u_gap, ref_u_norm),
            "p_gap_rel": _rel(p_gap, ref_p_norm),
            "ctrl_gap_rel": _rel(ctrl_gap, ref_ctrl_norm),
            "cost_gap_rel": _rel(cost_gap, abs(ref_cost)),
            "u_ratio": _ratio(u_gap, previous.get("u")),
            "p_ratio": _ratio(p_gap, previous.get("p")),
            "ctrl_ratio": _ratio(ctrl_gap, previous.get("ctrl")),
            "cost_ratio": _ratio(cost_gap, previous.get("cost")),
            "bound_q_lhs": gap_q_q,
            "bound_q_rhs": bound_q_rhs,
            "bound_q_ok": gap_q_q <= bound_q_rhs + 1e-9 * (1.0 + bound_q_rhs),
            "bound_g_lhs": gap_g_h,
            "bound_g_rhs_m1": bound_g_rhs_m1,
            "bound_g_ok_m1": gap_g_h <= bound_g_rhs_m1 + 1e-9 * (1.0 + bound_g_rhs_m1),
            "bound_g_rhs_m2": bound_g_rhs_m2,
            "bound_g_ok_m2": gap_g_h <= bound_g_rhs_m2 + 1e-9 * (1.0 + bound_g_rhs_m2),
        }
        rows.append(row)
        previous = {"u": u_gap, "p": p_gap, "ctrl": ctrl_gap, "cost": cost_gap}
        log.info("alpha=%g: %.3f s", alpha, time.perf_counter() - t0)

    return ConvergenceReport(columns=list(SWEEP_COLUMNS), rows=rows,
                             reference_cost=ref_cost,
                             reference_u_norm_v=ref_u_norm)


def random_spec(base: ProblemSpec, index: int, seed: int = 0) -> ProblemSpec:
    """Deterministic random problem instance derived from a base spec.

    Even indices stay Dirichlet, odd ones become Robin with a drawn
    coefficient; weights and data are drawn from moderate ranges.
    """
    rng = np.random.default_rng(seed * 1000 + index)
    m1 = float(rng.uniform(0.5, 4.0))
    m2 = float(rng.uniform(0.5, 4.0))
    offset = float(rng.uniform(-1.2, -0.3))
    amplitude = float(rng.uniform(-0.5, 0.5))
    b_value = float(rng.uniform(0.2, 0.8))
    bc = "dirichlet" if index % 2 == 0 else "robin"
    alpha = float(rng.uniform(0.5, 50.0)) if bc == "robin" else None
    return replace(base, bc=bc, alpha=alpha, m1=m1, m2=m2,
                   b=f"constant:{b_value}", z_d=f"sine:{offset},{amplitude}")


def run_estimate_report(spec: ProblemSpec, seed_count: int = 5, seed: int = 0,
                        alphas=DEFAULT_ALPHA_SCHEDULE) -> EstimateSuite:
    """Certify the comparison estimates on the base spec plus seeded variants,
    and record optimal-control norms across the coefficient schedule."""
    disc = Discretization(spec.n, spec.gamma1_sides)

    rows = []

    def append_report(spec_id, problem):
        report = control.verify_estimates(problem)
        for r in report.rows:
            rows.append({
                "spec_id": spec_id,
                "bc": problem.spec.bc,
                "inequality": r.name,
                "lhs": r.lhs, "rhs": r.rhs, "slack": r.slack,
                "resolution": r.resolution, "passed": r.passed,
            })

    t0 = time.perf_counter()
    append_report("base", DiscreteProblem(spec, disc))
    for i in range(seed_count):
        variant = random_spec(spec, i, seed=seed)
        append_report(f"seed{i}", DiscreteProblem(variant, disc))
    log.info("estimate rows: %.3f s", time.perf_counter() - t0)

    # Boundedness of the optimal controls along the coefficient schedule.
    t0 = time.perf_counter()
    bound_rows = []
    warm = None
    for alpha in alphas:
        robin = DiscreteProblem(replace(spec, bc="robin", alpha=float(alpha)), disc)
        sol = control.solve_ocp(robin, initial=warm)
        warm = sol.control
        bound_rows.append({
            "alpha": float(alpha),
            "g_norm_h": disc.h_norm(sol.control.g),
            "q_norm_q": disc.q_norm(sol.control.q),
            "cost": sol.cost,
        })
    log.info("bound rows: %.3f s", time.perf_counter() - t0)

    return EstimateSuite(
        columns=list(ESTIMATE_COLUMNS), rows=rows,
        bound_columns=list(BOUND_COLUMNS), bound_rows=bound_rows,
        all_passed=all(r["passed"] for r in rows))


def _format_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def render_csv(columns, rows) -> str:
    """Deterministic CSV: round-trip float repr, lowercase booleans."""
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_format_cell(row[c]) for c in columns))
    return "\n".join(lines) + "\n"

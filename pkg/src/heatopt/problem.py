"""State and adjoint solves for the mixed Dirichlet and Robin Poisson problems.

A ProblemSpec describes one problem instance (mesh resolution, boundary
split, boundary-condition kind, data, cost weights, tolerances). Building a
DiscreteProblem assembles all operators once; state and adjoint solves are
then pure functions of the control. Dirichlet and Robin instances share one
discretization so that comparisons across the Robin coefficient use
identical meshes and matrices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp

from . import assembly, catalog, linalg
from .mesh import BoundaryTag, Mesh, SIDES, build_unit_square_mesh, classify_boundary

BC_KINDS = ("dirichlet", "robin")


@dataclass(frozen=True)
class ProblemSpec:
    """Full description of one state problem plus its control cost weights."""

    n: int = 16
    gamma1_sides: tuple = ("left",)
    bc: str = "dirichlet"
    alpha: Optional[float] = None
    b: object = 0.0
    z_d: object = 0.0
    m1: float = 1.0
    m2: float = 1.0
    pde_tol: float = 1e-12
    ocp_tol: float = 1e-8

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"mesh subdivision must be positive, got {self.n}")
        if self.bc not in BC_KINDS:
            raise ValueError(f"bc must be one of {BC_KINDS}, got {self.bc!r}")
        if self.bc == "robin":
            if self.alpha is None or self.alpha <= 0:
                raise ValueError("robin problems need a positive heat transfer coefficient")
        if self.m1 <= 0 or self.m2 <= 0:
            raise ValueError("cost weights m1, m2 must be positive")
        if self.pde_tol <= 0 or self.ocp_tol <= 0:
            raise ValueError("tolerances must be positive")
        object.__setattr__(self, "gamma1_sides", tuple(self.gamma1_sides))


class Discretization:
    """Mesh plus every assembled operator, shared by all bc kinds."""

    def __init__(self, n: int, gamma1_sides=("left",)):
        mesh = classify_boundary(build_unit_square_mesh(n), gamma1_sides)
        self.mesh: Mesh = mesh
        self.stiffness = assembly.assemble_stiffness(mesh)
        self.domain_mass = assembly.assemble_domain_mass(mesh)
        self.gamma1_mass = assembly.assemble_boundary_mass(mesh, BoundaryTag.GAMMA1)
        self.gamma2_mass = assembly.assemble_boundary_mass(mesh, BoundaryTag.GAMMA2)
        self.gram = (self.stiffness + self.domain_mass).tocsr()

        self.gamma1_vertices = mesh.tagged_vertices(BoundaryTag.GAMMA1)
        self.gamma2_vertices = mesh.tagged_vertices(BoundaryTag.GAMMA2)
        mask = np.ones(mesh.num_vertices, dtype=bool)
        mask[self.gamma1_vertices] = False
        self.free = np.flatnonzero(mask)

        # Compact Gamma2 operators, indexed by position in gamma2_vertices.
        g2 = self.gamma2_vertices
        self.gamma2_mass_compact = self.gamma2_mass[g2][:, g2].tocsr()
        self.gamma2_lumped = np.asarray(self.gamma2_mass.sum(axis=1)).ravel()[g2]

        self.stiffness_free = self.stiffness[self.free][:, self.free].tocsr()

    @property
    def num_vertices(self) -> int:
        return self.mesh.num_vertices

    def interpolate(self, data) -> np.ndarray:
        if isinstance(data, np.ndarray):
            if data.shape != (self.num_vertices,):
                raise ValueError(f"nodal field must have shape ({self.num_vertices},)")
            return data.astype(float, copy=True)
        return assembly.interpolate(self.mesh, catalog.resolve_field(data))

    # Inner products and norms in the discrete Gram metrics.
    def h_inner(self, u, v) -> float:
        return float(u @ (self.domain_mass @ v))

    def h_norm(self, v) -> float:
        return float(np.sqrt(max(self.h_inner(v, v), 0.0)))

    def v_norm(self, v) -> float:
        return float(np.sqrt(max(v @ (self.gram @ v), 0.0)))

    def q_inner(self, q, eta) -> float:
        return float(q @ (self.gamma2_mass_compact @ eta))

    def q_norm(self, q) -> float:
        return float(np.sqrt(max(self.q_inner(q, q), 0.0)))

    def trace_gamma2(self, v) -> np.ndarray:
        """Restriction of a nodal field to the Gamma2 vertices (compact order)."""
        return v[self.gamma2_vertices]

    def scatter_gamma2(self, q) -> np.ndarray:
        full = np.zeros(self.num_vertices)
        full[self.gamma2_vertices] = q
        return full


@dataclass
class StateSolution:
    u: np.ndarray
    report: linalg.SolveReport


@dataclass
class AdjointSolution:
    p: np.ndarray
    report: linalg.SolveReport


@dataclass
class BoundaryFlux:
    """Assembled Gamma2 flux data: its load functional and exact squared norm."""

    load: np.ndarray
    sqnorm: float


class DiscreteProblem:
    """One problem instance bound to a discretization, ready to solve."""

    def __init__(self, spec: ProblemSpec, discretization: Discretization | None = None):
        self.spec = spec
        self.d = discretization or Discretization(spec.n, spec.gamma1_sides)
        d = self.d

        self.b = d.interpolate(spec.b)
        self.z_d = d.interpolate(spec.z_d)

        if spec.bc == "robin":
            self.operator = (d.stiffness + spec.alpha * d.gamma1_mass).tocsr()
            self._robin_b_load = spec.alpha * (d.gamma1_mass @ self.b)
        else:
            self.operator = d.stiffness_free
            lifting = np.zeros(d.num_vertices)
            lifting[d.gamma1_vertices] = self.b[d.gamma1_vertices]
            self._lifting = lifting
            self._lifting_load = d.stiffness @ lifting
        self._u_zero: StateSolution | None = None

    @property
    def bc(self) -> str:
        return self.spec.bc

    def control_load(self, control) -> np.ndarray:
        """Load functional of a control: (g, v)_H - (q, v)_Q."""
        d = self.d
        load = d.domain_mass @ control.g
        load[d.gamma2_vertices] -= d.gamma2_mass_compact @ control.q
        return load

    def resolve_flux(self, q_data) -> BoundaryFlux:
        """Assemble side-aware Gamma2 flux data exactly, edge by edge."""
        data = catalog.resolve_boundary_data(q_data)
        load = assembly.boundary_functional(self.d.mesh, BoundaryTag.GAMMA2, data)
        sqnorm = assembly.boundary_squared_norm(self.d.mesh, BoundaryTag.GAMMA2, data)
        return BoundaryFlux(load=load, sqnorm=sqnorm)

    def solve_homogeneous(self, rhs_full: np.ndarray, start=None) -> linalg.SolveReport:
        """Solve the operator with homogeneous Gamma1 data; returns a full field."""
        d = self.d
        if self.spec.bc == "robin":
            report = linalg.solve_spd(self.operator, rhs_full, tol=self.spec.pde_tol, x0=start)
            return report
        x0 = None if start is None else start[d.free]
        reduced = linalg.solve_spd(self.operator, rhs_full[d.free], tol=self.spec.pde_tol, x0=x0)
        x = np.zeros(d.num_vertices)
        x[d.free] = reduced.x
        return linalg.SolveReport(x=x, iterations=reduced.iterations,
                                  residual=reduced.residual)

    def solve_state_load(self, load: np.ndarray, start=None) -> StateSolution:
        """Solve the state problem for a given control load functional."""
        d = self.d
        if self.spec.bc == "robin":
            rhs = load + self._robin_b_load
            report = linalg.solve_spd(self.operator, rhs, tol=self.spec.pde_tol, x0=start)
            return StateSolution(u=report.x, report=report)
        rhs = (load - self._lifting_load)[d.free]
        x0 = None if start is None else start[d.free]
        report = linalg.solve_spd(self.operator, rhs, tol=self.spec.pde_tol, x0=x0)
        u = self._lifting.copy()
        u[d.free] = report.x
        return StateSolution(u=u, report=report)

    def solve_state(self, control, start=None) -> StateSolution:
        return self.solve_state_load(self.control_load(control), start=start)

    def solve_adjoint(self, state, start=None) -> AdjointSolution:
        """Adjoint problem driven by u - z_d, with homogeneous Gamma1 data."""
        u = state.u if isinstance(state, StateSolution) else state
        rhs_full = self.d.domain_mass @ (u - self.z_d)
        report = self.solve_homogeneous(rhs_full, start=start)
        return AdjointSolution(p=report.x, report=report)

    def state_at_zero(self) -> StateSolution:
        """State for zero control (cached; depends only on the boundary data)."""
        if self._u_zero is None:
            self._u_zero = self.solve_state_load(np.zeros(self.d.num_vertices))
        return self._u_zero


def build_problem(spec: ProblemSpec, discretization: Discretization | None = None) -> DiscreteProblem:
    return DiscreteProblem(spec, discretization)

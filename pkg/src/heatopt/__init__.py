"""Optimal control toolkit for mixed Poisson problems on the unit square.

Solves the steady heat-conduction state problems with Dirichlet or Robin
data on one boundary portion and a flux condition on the other, the
simultaneous distributed + boundary-flux optimal control problems over them,
and certifies the comparison estimates, fixed-point characterization and
large-coefficient asymptotics numerically.
"""

__version__ = "0.1.0"

from .control import (ControlPair, OcpSolution, cost, estimate_constants,
                      fixed_point_solve, gradient, project_admissible,
                      solve_ocp, solve_scalar_g, solve_scalar_q,
                      verify_estimates)
from .mesh import BoundaryTag, Mesh, build_unit_square_mesh, classify_boundary
from .problem import DiscreteProblem, Discretization, ProblemSpec, build_problem

__all__ = [
    "BoundaryTag", "ControlPair", "DiscreteProblem", "Discretization",
    "Mesh", "OcpSolution", "ProblemSpec", "build_problem",
    "build_unit_square_mesh", "classify_boundary", "cost",
    "estimate_constants", "fixed_point_solve", "gradient",
    "project_admissible", "solve_ocp", "solve_scalar_g", "solve_scalar_q",
    "verify_estimates", "__version__",
]

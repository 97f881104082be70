"""Pydantic request/response models for the service and the CLI client."""

from __future__ import annotations

from typing import Any, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .mesh import SIDES
from .problem import ProblemSpec

DataSpec = Union[float, str]


class ProblemConfig(BaseModel):
    """Wire form of a problem instance; mirrors ProblemSpec."""

    model_config = ConfigDict(extra="forbid")

    n: int = Field(16, ge=1)
    gamma1_sides: list[str] = ["left"]
    bc: Literal["dirichlet", "robin"] = "dirichlet"
    alpha: Optional[float] = Field(None, gt=0)
    b: DataSpec = 0.0
    z_d: DataSpec = 0.0
    m1: float = Field(1.0, gt=0)
    m2: float = Field(1.0, gt=0)
    pde_tol: float = Field(1e-12, gt=0)
    ocp_tol: float = Field(1e-8, gt=0)

    @model_validator(mode="after")
    def _check(self):
        unknown = [s for s in self.gamma1_sides if s not in SIDES]
        if unknown:
            raise ValueError(f"unknown sides {unknown}; valid sides are {list(SIDES)}")
        sides = set(self.gamma1_sides)
        if not sides or sides == set(SIDES):
            raise ValueError("gamma1_sides must be a nonempty proper subset of the four sides")
        if self.bc == "robin" and self.alpha is None:
            raise ValueError("robin problems require alpha")
        return self

    def to_spec(self) -> ProblemSpec:
        return ProblemSpec(
            n=self.n, gamma1_sides=tuple(self.gamma1_sides), bc=self.bc,
            alpha=self.alpha, b=self.b, z_d=self.z_d, m1=self.m1, m2=self.m2,
            pde_tol=self.pde_tol, ocp_tol=self.ocp_tol)


class SolveRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    problem: ProblemConfig = ProblemConfig()


class SolveResponse(BaseModel):
    bc: str
    alpha: Optional[float]
    cost: float
    iterations: int
    residual: float
    g_norm_h: float
    q_norm_q: float
    q_min: float
    u_norm_v: float
    p_norm_v: float


class SweepRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    problem: ProblemConfig = ProblemConfig()
    mode: Literal["fixed", "optimal"] = "optimal"
    alphas: Union[str, list[float]] = "1:1e6:x10"
    g: DataSpec = 0.0
    q: DataSpec = 0.0


class SweepResponse(BaseModel):
    mode: str
    columns: list[str]
    rows: list[dict[str, Any]]
    reference_cost: float
    reference_u_norm_v: float


class EstimatesRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    problem: ProblemConfig = ProblemConfig()
    seeds: int = Field(5, ge=0)
    seed: int = 0
    alphas: Union[str, list[float]] = "1:1e6:x10"


class EstimatesResponse(BaseModel):
    columns: list[str]
    rows: list[dict[str, Any]]
    bound_columns: list[str]
    bound_rows: list[dict[str, Any]]
    all_passed: bool


class EigenRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    problem: ProblemConfig = ProblemConfig()


class EigenResponse(BaseModel):
    lam: float
    lam_1: float
    lam_alpha: float
    alpha: float
    trace_norm: float
    trace_norm_v0: float
    c0: float
    c0_alpha: float

"""
Run Configuration Types
=======================

Pydantic models for a run configuration. Each section maps to one TOML
table; `RunConfig` is the root document.
"""

from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..objective import TargetSpec
from ..state import NewtonSettings


class ConfigError(Exception):
    """Exception raised for an invalid configuration; lists every violation."""

    def __init__(self, violations: List[str], source: Optional[str] = None):
        self.violations = list(violations)
        self.source = source
        super().__init__(str(self))

    def __str__(self) -> str:
        head = f"invalid configuration{f' in {self.source}' if self.source else ''}"
        return head + "".join(f"\n  - {v}" for v in self.violations)


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ProblemConfig(_Section):
    gamma: float = Field(-1.0, lt=0, description="Prescribed normal flux γ on the free boundary")
    epsilon: float = Field(1e-3, gt=0, description="Penalty scale ε")
    eta: float = Field(0.0, ge=0, description="Gray-region penalty weight η (0 disables)")
    inclusion_radius: float = Field(1.0, gt=0, description="Radius R of the initial circular inclusion")
    mu: float = Field(0.5, gt=0, description="Pseudo-solid shear modulus")
    lam: float = Field(0.0, ge=0, description="Pseudo-solid first Lamé coefficient")


class DesignConfig(_Section):
    n: int = Field(10, ge=4, description="RBF knots per axis N")
    x_min: float = -2.0
    x_max: float = 2.0
    y_min: float = -2.0
    y_max: float = 2.0
    alpha_min: float = Field(-1e20, description="Lower coefficient bound")
    alpha_max: float = Field(1e20, description="Upper coefficient bound")

    @model_validator(mode="after")
    def _check(self) -> "DesignConfig":
        if not self.x_max > self.x_min:
            raise ValueError("design.x_max must exceed design.x_min")
        if not self.y_max > self.y_min:
            raise ValueError("design.y_max must exceed design.y_min")
        if not self.alpha_max > self.alpha_min:
            raise ValueError("design.alpha_max must exceed design.alpha_min")
        return self


class MeshConfig(_Section):
    h: float = Field(0.1, gt=0, description="Characteristic mesh size")
    max_nodes: int = Field(200_000, ge=16, description="Node budget of the mesher")
    initial_radius: Optional[float] = Field(
        None, gt=0, description="Radius of the initial reference disk (default: C(1, γ))"
    )


class ScheduleConfig(_Section):
    i_max: int = Field(8, ge=1, description="Number of re-initializations")
    toler: float = Field(1e-6, ge=0, description="Step-norm stopping tolerance")
    k_max_base: int = Field(5, ge=1)
    k_max_growth: int = Field(2, ge=1)


class OptimizerConfig(_Section):
    memory: int = Field(10, ge=1, description="L-BFGS memory")
    c1: float = Field(1e-4, gt=0, lt=1, description="Armijo constant")
    shrink: float = Field(0.5, gt=0, lt=1, description="Backtracking factor")
    max_backtracks: int = Field(30, ge=0)
    first_step: float = Field(0.1, gt=0, description="Length of the first step of each stage")


class GradCheckConfig(_Section):
    components: int = Field(5, ge=1, description="Randomly sampled α components")
    include_zero: bool = Field(True, description="Also check a zero-gradient component")
    step: float = Field(1e-5, gt=0, description="Relative central-difference step")
    newton_tol: float = Field(1e-12, gt=0)
    threshold: float = Field(1e-4, gt=0, description="Maximum accepted relative error")


class OutputConfig(_Section):
    samples: int = Field(512, ge=16, description="Polar sample angles M (raised to 4 per boundary node)")
    snapshots: bool = Field(True, description="Write per-stage VTK and α snapshots")
    plots: bool = Field(True, description="Render SVG contour plots")


class VerifyConfig(_Section):
    delta: Optional[float] = Field(None, gt=0, description="Gray half width at both levels (default: the coarse h)")
    angles: int = Field(64, ge=8, description="Directions averaged in the radial penalty profile")
    profile_points: int = Field(4001, ge=101, description="Radii tabulated in the radial penalty profile")


class AcceptanceConfig(_Section):
    radius_tolerance: float = Field(0.01, gt=0, description="verify-analytic relative radius error")
    min_order: float = Field(1.5, description="verify-analytic observed convergence order under h -> h/2")
    objective: Optional[float] = Field(None, gt=0, description="optimize: final 𝒥 + 𝒥_η threshold")


class RunConfig(_Section):
    """Root configuration document."""

    problem: ProblemConfig = Field(default_factory=ProblemConfig)
    design: DesignConfig = Field(default_factory=DesignConfig)
    mesh: MeshConfig = Field(default_factory=MeshConfig)
    schedule: ScheduleConfig = Field(default_factory=ScheduleConfig)
    optimizer: OptimizerConfig = Field(default_factory=OptimizerConfig)
    newton: NewtonSettings = Field(default_factory=NewtonSettings)
    target: TargetSpec = Field(default_factory=TargetSpec)
    gradcheck: GradCheckConfig = Field(default_factory=GradCheckConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)
    verify: VerifyConfig = Field(default_factory=VerifyConfig)
    acceptance: AcceptanceConfig = Field(default_factory=AcceptanceConfig)

    seed: int = Field(0, ge=0, lt=2**64, description="Seed for sampled components")
    deterministic: bool = Field(False, description="Serial, seeded run")
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = "INFO"
    alpha_file: Optional[str] = Field(None, description="N×N coefficient table for solve-state")
    out_dir: str = Field("out", description="Output directory")

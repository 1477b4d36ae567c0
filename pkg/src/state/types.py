"""
State Types
===========

Unknowns, residuals and parameters of the discrete pseudo-solid system.

Layout of the stacked vectors (n nodes, n_e boundary nodes):
    q = [q_u (n) | q_v (2n, entry n + 2i + d) | q_p (n_e, entry 3n + k)]
    r = [r1 (n)  | r2 (n_e, entry n + k)      | r3 (2n, entry n + n_e + 2i + d)]
"""

from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from ..levelset import SmoothingParams


class StateSolveError(Exception):
    """Exception raised when the state problem cannot be solved."""

    def __init__(self, message: str, residual_norm: Optional[float] = None):
        self.message = message
        self.residual_norm = residual_norm
        super().__init__(self.message)

    def __str__(self) -> str:
        if self.residual_norm is not None:
            return f"{self.message} (|r|_inf={self.residual_norm:.3e})"
        return self.message


class NewtonConvergenceError(StateSolveError):
    """Newton iteration did not reach the tolerance."""

    def __init__(self, residual_norm: float, iterations: int, history: Optional[list] = None):
        self.iterations = iterations
        self.history = history or []
        super().__init__(f"Newton did not converge in {iterations} iterations", residual_norm)


class NewtonStepRejected(StateSolveError):
    """No trial along the Newton direction decreased ‖r‖ within the allowed halvings."""

    def __init__(self, residual_norm: float, iteration: int, halvings: int, history: Optional[list] = None):
        self.iteration = iteration
        self.halvings = halvings
        self.history = history or []
        super().__init__(f"Newton step {iteration} rejected: no residual decrease after {halvings} halvings", residual_norm)


def _vector(value) -> np.ndarray:
    arr = np.array(value, dtype=float).reshape(-1)
    arr.flags.writeable = False
    return arr


class StateVector(BaseModel):
    """Nodal potential u, nodal displacement v and boundary multiplier p."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    u: np.ndarray = Field(..., description="Potential at the n nodes")
    v: np.ndarray = Field(..., description="Displacement, entry 2i + d")
    p: np.ndarray = Field(..., description="Multiplier at the n_e boundary nodes")

    @field_validator("u", "v", "p", mode="before")
    @classmethod
    def as_vector(cls, value):
        return _vector(value)

    @field_validator("v")
    @classmethod
    def _check_pairs(cls, value):
        if value.size % 2:
            raise ValueError("displacement must have two entries per node")
        return value

    @property
    def n(self) -> int:
        return self.u.size

    @property
    def n_e(self) -> int:
        return self.p.size

    @property
    def displacement(self) -> np.ndarray:
        """v as an (n, 2) array."""
        return self.v.reshape(-1, 2)

    def stack(self) -> np.ndarray:
        return np.concatenate([self.u, self.v, self.p])

    @classmethod
    def from_stacked(cls, q: np.ndarray, n: int, n_e: int) -> "StateVector":
        q = np.asarray(q, dtype=float)
        if q.size != 3 * n + n_e:
            raise StateSolveError(f"state of length {q.size} does not match 3n + n_e = {3 * n + n_e}")
        return cls(u=q[:n], v=q[n : 3 * n], p=q[3 * n :])

    @classmethod
    def zeros(cls, n: int, n_e: int) -> "StateVector":
        return cls(u=np.zeros(n), v=np.zeros(2 * n), p=np.zeros(n_e))


class Residual(BaseModel):
    """Potential equation r1, boundary constraint r2, elasticity r3."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    r1: np.ndarray
    r2: np.ndarray
    r3: np.ndarray

    @field_validator("r1", "r2", "r3", mode="before")
    @classmethod
    def as_vector(cls, value):
        return _vector(value)

    def stack(self) -> np.ndarray:
        return np.concatenate([self.r1, self.r2, self.r3])

    @property
    def norms(self) -> tuple:
        """Max norms of (r1, r2, r3)."""
        return tuple(float(np.max(np.abs(r), initial=0.0)) for r in (self.r1, self.r2, self.r3))

    @property
    def max_norm(self) -> float:
        return max(self.norms)

    @property
    def l2_norm(self) -> float:
        return float(np.linalg.norm(self.stack()))


class ElasticityParams(BaseModel):
    """Lamé coefficients of the pseudo-solid."""

    model_config = ConfigDict(frozen=True)

    mu: float = Field(0.5, gt=0, description="Shear modulus μ")
    lam: float = Field(0.0, ge=0, description="Lamé coefficient λ")


class StateParams(BaseModel):
    """Everything the residual depends on besides mesh, state and design."""

    model_config = ConfigDict(frozen=True)

    gamma: float = Field(..., lt=0, description="Prescribed normal flux γ")
    smoothing: SmoothingParams
    elasticity: ElasticityParams = Field(default_factory=ElasticityParams)

    @classmethod
    def build(cls, gamma: float, delta: float, epsilon: float = 1e-3, mu: float = 0.5, lam: float = 0.0) -> "StateParams":
        return cls(
            gamma=gamma,
            smoothing=SmoothingParams(delta=delta, epsilon=epsilon),
            elasticity=ElasticityParams(mu=mu, lam=lam),
        )

    def with_delta(self, delta: float) -> "StateParams":
        return self.model_copy(update={"smoothing": self.smoothing.model_copy(update={"delta": delta})})


class NewtonIteration(BaseModel):
    """One row of the Newton residual log."""

    iteration: int
    r1: float
    r2: float
    r3: float
    halvings: int = 0

    def row(self) -> list:
        return [self.iteration, self.r1, self.r2, self.r3, self.halvings]


class NewtonResult(BaseModel):
    """Converged state plus the iteration history and final Jacobian."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    state: StateVector
    iterations: int
    history: List[NewtonIteration] = Field(default_factory=list)
    residual: Residual
    jacobian: Optional[object] = Field(None, exclude=True, description="∂r/∂q at the returned state (csr)")

    @property
    def residual_norm(self) -> float:
        return self.residual.max_norm


class NewtonSettings(BaseModel):
    """Stopping and damping controls of the Newton iteration."""

    model_config = ConfigDict(frozen=True)

    tol: float = Field(1e-10, gt=0, description="Stop when ‖r‖_∞ ≤ tol")
    max_iter: int = Field(25, ge=1, description="Maximum Newton steps")
    max_halvings: int = Field(8, ge=0, description="Maximum step halvings per step")

"""
Optimization Types
==================

Re-initialization schedule, per-evaluation trace and step results.
"""

import csv
from pathlib import Path
from typing import Any, List, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field


class OptimizationError(Exception):
    """Exception raised when the optimization run cannot continue."""

    def __init__(self, message: str, stage: Optional[int] = None, trace: Optional["OptimizationTrace"] = None):
        self.message = message
        self.stage = stage
        self.trace = trace
        super().__init__(self.message)

    def __str__(self) -> str:
        if self.stage is not None:
            return f"[stage {self.stage}] {self.message}"
        return self.message


class TrialRejected(OptimizationError):
    """A trial design whose evaluation failed; the line search backtracks."""


class Schedule(BaseModel):
    """
    Re-initialization schedule.

    Stage i (1-based) uses δ_i = ½(i_max − i + 1)h and
    k_max_i = base·growth^i optimization steps.
    """

    model_config = ConfigDict(frozen=True)

    i_max: int = Field(8, ge=1, description="Number of re-initializations")
    h: float = Field(..., gt=0, description="Characteristic mesh size")
    toler: float = Field(1e-6, ge=0, description="Step-norm stopping tolerance")
    k_max_base: int = Field(5, ge=1, description="k_max multiplier")
    k_max_growth: int = Field(2, ge=1, description="k_max growth factor per stage")

    def _check(self, stage: int) -> None:
        if not 1 <= stage <= self.i_max:
            raise ValueError(f"stage {stage} outside 1..{self.i_max}")

    def delta(self, stage: int) -> float:
        self._check(stage)
        return 0.5 * (self.i_max - stage + 1) * self.h

    def k_max(self, stage: int) -> int:
        self._check(stage)
        return self.k_max_base * self.k_max_growth**stage


TRACE_HEADER = [
    "evaluation",
    "stage",
    "step",
    "accepted",
    "J",
    "J_eta",
    "objective",
    "grad_norm",
    "step_norm",
    "newton_iterations",
    "note",
]


class TraceRecord(BaseModel):
    """One objective evaluation (one Newton solve), accepted or not."""

    evaluation: int
    stage: int
    step: int
    accepted: bool = False
    tracking: Optional[float] = None
    gray: Optional[float] = None
    grad_norm: Optional[float] = None
    step_norm: Optional[float] = None
    newton_iterations: Optional[int] = None
    note: str = ""

    @property
    def objective(self) -> Optional[float]:
        if self.tracking is None:
            return None
        return self.tracking + (self.gray or 0.0)

    def row(self) -> list:
        def fmt(value):
            return "" if value is None else repr(float(value))

        return [
            self.evaluation,
            self.stage,
            self.step,
            int(self.accepted),
            fmt(self.tracking),
            fmt(self.gray),
            fmt(self.objective),
            fmt(self.grad_norm),
            fmt(self.step_norm),
            "" if self.newton_iterations is None else self.newton_iterations,
            self.note,
        ]


class StageSummary(BaseModel):
    stage: int
    delta: float
    k_max: int
    steps: int = 0
    evaluations: int = 0
    first_objective: Optional[float] = None
    last_objective: Optional[float] = None
    remesh_delta: Optional[float] = Field(None, description="First objective minus the previous stage's last")
    stop_reason: str = ""


class OptimizationTrace(BaseModel):
    """Every evaluation of a run, in order."""

    records: List[TraceRecord] = Field(default_factory=list)
    stages: List[StageSummary] = Field(default_factory=list)

    def record(self, **fields) -> TraceRecord:
        rec = TraceRecord(evaluation=len(self.records) + 1, **fields)
        self.records.append(rec)
        return rec

    @property
    def evaluations(self) -> int:
        return len(self.records)

    @property
    def accepted(self) -> List[TraceRecord]:
        return [r for r in self.records if r.accepted]

    @property
    def steps(self) -> int:
        """Accepted optimization steps (stage-initial evaluations excluded)."""
        return sum(1 for r in self.records if r.accepted and r.step > 0)

    @property
    def rejections(self) -> int:
        return sum(1 for r in self.records if not r.accepted)

    def write_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(TRACE_HEADER)
            for rec in self.records:
                writer.writerow(rec.row())
        return path


class StepResult(BaseModel):
    """Outcome of one projected descent step."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    x: np.ndarray
    value: float
    gradient: np.ndarray
    step_norm: float = 0.0
    evaluations: int = 0
    success: bool = True
    direction: str = "lbfgs"
    payload: Any = None

"""
Re-initialized Shape Optimization
=================================

The outer loop: fit the initial level set, mesh the initial disk, then for
every stage set δ and k_max, run projected descent steps on α (each
evaluation one Newton solve plus one adjoint solve) and rebuild the
reference domain from the deformed boundary.
"""

import logging
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict

from ..analytic import AnnulusSolution, annulus_state, bernoulli_radius, circle_levelset
from ..config import RunConfig
from ..levelset import DesignVector, RbfGrid, fit_initial_alpha
from ..mesh import Mesh, MeshError, mesh_disk, reinitialize_domain, transfer_field
from ..objective import NonStarLikeError, TargetShape
from ..sensitivity import Evaluation, SensitivityError, ShapeProblem
from ..state import StateAssembler, StateParams, StateSolveError, StateVector
from .base import DescentMethod
from .lbfgs import ProjectedLBFGS
from .types import OptimizationError, OptimizationTrace, Schedule, StageSummary, TrialRejected

logger = logging.getLogger(__name__)

# Failures of a trial design that the line search recovers from.
RECOVERABLE = (StateSolveError, MeshError, NonStarLikeError, SensitivityError)


class AlgorithmResult(BaseModel):
    """Final design, trace and the last stage's mesh/state."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    design: DesignVector
    trace: OptimizationTrace
    mesh: Mesh
    state: StateVector
    evaluation: Evaluation
    assembler: StateAssembler
    target: TargetShape

    @property
    def objective(self) -> float:
        return self.evaluation.total

    @property
    def deformed_mesh(self) -> Mesh:
        return self.assembler.deformed_mesh(self.state.stack())


def schedule_from_config(config: RunConfig) -> Schedule:
    return Schedule(
        i_max=config.schedule.i_max,
        h=config.mesh.h,
        toler=config.schedule.toler,
        k_max_base=config.schedule.k_max_base,
        k_max_growth=config.schedule.k_max_growth,
    )


def initial_design(config: RunConfig, grid: RbfGrid) -> DesignVector:
    """α interpolating the level set of the initial circular inclusion."""
    radius = config.problem.inclusion_radius
    return fit_initial_alpha(
        grid,
        lambda points: circle_levelset(points, radius),
        alpha_min=config.design.alpha_min,
        alpha_max=config.design.alpha_max,
    )


def build_grid(config: RunConfig) -> RbfGrid:
    d = config.design
    return RbfGrid(n=d.n, x_min=d.x_min, x_max=d.x_max, y_min=d.y_min, y_max=d.y_max)


def initial_domain(config: RunConfig, h: Optional[float] = None) -> Tuple[Mesh, StateVector]:
    """
    Reference disk B(0, C(1, γ)) and the annulus warm start on it.

    The disk does not depend on the initial inclusion radius; the warm start
    potential does.

    Raises:
        MeshError: the disk cannot be meshed at size `h` (default mesh.h).
    """
    gamma = config.problem.gamma
    radius = config.mesh.initial_radius or bernoulli_radius(1.0, gamma)
    mesh = mesh_disk(radius, h or config.mesh.h, config.mesh.max_nodes)
    u, v, p = annulus_state(mesh.nodes, mesh.boundary, AnnulusSolution.solve(config.problem.inclusion_radius, gamma))
    return mesh, StateVector(u=u, v=v, p=p)


class BestDesign:
    """Lowest stage-end objective seen so far and its α."""

    def __init__(self):
        self.value = np.inf
        self.design: Optional[DesignVector] = None
        self.stage: Optional[int] = None

    def update(self, stage: int, value: float, design: DesignVector) -> DesignVector:
        """Record a stage result; returns the α the next stage starts from."""
        if self.design is None or value <= self.value:
            self.value, self.design, self.stage = value, design, stage
        return self.design


class ShapeOptimizer:
    """
    Runs the staged optimization for one configuration.

    Args:
        config: validated run configuration
        out_dir: directory for stage snapshots (None disables them)
        method: descent method (default: projected L-BFGS from the config)
        logger: optional logger
    """

    def __init__(
        self,
        config: RunConfig,
        out_dir: Optional[Union[str, Path]] = None,
        method: Optional[DescentMethod] = None,
        logger: Optional[logging.Logger] = None,
    ):
        self.config = config
        self.out_dir = Path(out_dir) if out_dir is not None else None
        self.logger = logger or logging.getLogger(__name__)
        opt = config.optimizer
        self.method = method or ProjectedLBFGS(
            memory=opt.memory,
            c1=opt.c1,
            shrink=opt.shrink,
            max_backtracks=opt.max_backtracks,
            first_step=opt.first_step,
            logger=self.logger,
        )
        self.schedule = schedule_from_config(config)
        self.grid = build_grid(config)
        self.target = TargetShape.from_spec(config.target, config.problem.gamma)
        self.trace = OptimizationTrace()

    def _problem(self, mesh: Mesh, stage: int) -> ShapeProblem:
        p = self.config.problem
        params = StateParams.build(p.gamma, self.schedule.delta(stage), p.epsilon, p.mu, p.lam)
        assembler = StateAssembler(mesh, self.grid, params, logger=self.logger)
        return ShapeProblem(
            assembler,
            self.target,
            eta=p.eta,
            newton=self.config.newton,
            samples=self.config.output.samples,
            center=self.config.target.center,
            logger=self.logger,
        )

    def _record(self, stage: int, step: int, evaluation: Optional[Evaluation] = None, note: str = ""):
        if evaluation is None:
            return self.trace.record(stage=stage, step=step, note=note)
        return self.trace.record(
            stage=stage,
            step=step,
            tracking=evaluation.tracking,
            gray=evaluation.gray,
            grad_norm=float(np.linalg.norm(evaluation.gradient)),
            newton_iterations=evaluation.newton.iterations,
            note=note,
        )

    def run(self) -> AlgorithmResult:
        config = self.config
        design = initial_design(config, self.grid)
        try:
            mesh, state = initial_domain(config, self.schedule.h)
        except MeshError as e:
            raise OptimizationError(f"initial mesh failed: {e}", 1, self.trace)
        self.logger.info(
            f"Initial guess: inclusion R={config.problem.inclusion_radius}, disk radius "
            f"{np.max(np.linalg.norm(mesh.boundary_points, axis=1)):.6f}, N={self.grid.n}, {self.schedule.i_max} stages"
        )

        best = BestDesign()
        start = design
        previous: Optional[float] = None
        for stage in range(1, self.schedule.i_max + 1):
            design, state, evaluation, problem = self._stage(stage, mesh, state, start, previous)
            previous = evaluation.total
            start = best.update(stage, evaluation.total, design)
            if start is not design:
                self.logger.info(
                    f"Stage {stage} ended at {evaluation.total:.6e}, above the best {best.value:.6e} "
                    f"(stage {best.stage}); next stage starts from that α"
                )
            if stage == self.schedule.i_max:
                break
            mesh, state = self._reinitialize(stage, problem.assembler, state)

        self.logger.info(
            f"Finished: objective {evaluation.total:.6e}, {self.trace.steps} optimization steps, "
            f"{self.trace.evaluations} function evaluations ({self.trace.rejections} rejected)"
        )
        return AlgorithmResult(
            design=design,
            trace=self.trace,
            mesh=problem.assembler.mesh,
            state=state,
            evaluation=evaluation,
            assembler=problem.assembler,
            target=self.target,
        )

    def _stage(self, stage: int, mesh: Mesh, state: StateVector, design: DesignVector, previous: Optional[float]):
        delta, k_max = self.schedule.delta(stage), self.schedule.k_max(stage)
        problem = self._problem(mesh, stage)
        summary = StageSummary(stage=stage, delta=delta, k_max=k_max)
        self.trace.stages.append(summary)
        self.logger.info(f"Stage {stage}: delta={delta:.4g}, k_max={k_max}, {mesh.n_nodes} nodes")

        try:
            evaluation = problem.evaluate(design, state)
        except RECOVERABLE as e:
            self._record(stage, 0, note=f"rejected: {type(e).__name__}")
            raise OptimizationError(f"initial evaluation failed: {e}", stage, self.trace)
        self._record(stage, 0, evaluation).accepted = True
        summary.evaluations += 1
        summary.first_objective = evaluation.total
        if previous is not None:
            summary.remesh_delta = evaluation.total - previous
            self.logger.info(f"Stage {stage} warm start: objective change from remeshing {summary.remesh_delta:+.3e}")

        current = {"state": evaluation.newton.state}
        k = 1

        def fun(x: np.ndarray):
            summary.evaluations += 1
            trial = design.with_alpha(x)
            try:
                result = problem.evaluate(trial, current["state"])
            except RECOVERABLE as e:
                self._record(stage, k, note=f"rejected: {type(e).__name__}")
                raise TrialRejected(str(e), stage)
            self._record(stage, k, result)
            return result.total, result.gradient, result

        self.method.reset()
        x, value, gradient = design.flat.copy(), evaluation.total, evaluation.gradient
        while True:
            step = self.method.step(fun, x, value, gradient, design.alpha_min, design.alpha_max)
            if not step.success:
                summary.stop_reason = "no decrease"
                self.logger.info(f"Stage {stage}: no decrease found at step {k}, stage ends")
                break
            if step.payload is None:
                summary.stop_reason = "stationary"
                break
            accepted = self.trace.records[-1]
            accepted.accepted = True
            accepted.step_norm = step.step_norm
            x, value, gradient = step.x, step.value, step.gradient
            evaluation = step.payload
            current["state"] = evaluation.newton.state
            summary.steps += 1
            self.logger.info(
                f"Stage {stage} step {k}: objective {value:.6e}, |step| {step.step_norm:.3e}, "
                f"{step.evaluations} evaluation(s)"
            )
            k += 1
            if step.step_norm <= self.schedule.toler:
                summary.stop_reason = "step tolerance"
                break
            if k >= k_max:
                summary.stop_reason = "k_max"
                break

        design = design.with_alpha(x)
        summary.last_objective = evaluation.total
        state = current["state"]
        if self.out_dir is not None and self.config.output.snapshots:
            from ..reporting import write_stage_snapshot

            write_stage_snapshot(self.out_dir, stage, problem.assembler, state.stack(), design)
        return design, state, evaluation, problem

    def _reinitialize(self, stage: int, assembler: StateAssembler, state: StateVector):
        """New reference mesh from the deformed boundary; u transferred, v and p reset."""
        q = state.stack()
        try:
            deformed = assembler.deformed_mesh(q)
            mesh = reinitialize_domain(deformed, self.schedule.h, self.config.mesh.max_nodes)
        except MeshError as e:
            raise OptimizationError(f"re-initialization failed: {e}", stage, self.trace)
        u = transfer_field(deformed, state.u, mesh.nodes)
        u[mesh.boundary] = 0.0
        return mesh, StateVector(u=u, v=np.zeros(2 * mesh.n_nodes), p=np.zeros(mesh.n_boundary))


def run_algorithm1(
    config: RunConfig,
    out_dir: Optional[Union[str, Path]] = None,
    logger: Optional[logging.Logger] = None,
) -> AlgorithmResult:
    """
    Full staged optimization for `config`.

    Raises:
        OptimizationError: the initial evaluation of a stage failed or the
            mesher could not rebuild the domain; carries the trace so far.
    """
    return ShapeOptimizer(config, out_dir=out_dir, logger=logger).run()

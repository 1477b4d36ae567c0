"""
Bernoulli Free Boundary Shape Optimization CLI
==============================================

Batch front end for the exterior Bernoulli solver and the level-set shape
optimizer.

Commands:
--------
    verify-analytic  - Fixed-inclusion annulus solve at h and h/2 against C(R, γ)
    solve-state      - One state solve for a given coefficient table
    optimize         - Full staged optimization run
    grad-check       - Adjoint gradient against central finite differences

Usage:
-----
    python cli.py optimize --config configs/circle_selftest.toml --out runs/circle
    BERNOULLI_PROBLEM__GAMMA=-2 python cli.py solve-state --config configs/cosine_key.toml

Exit codes: 0 success, 1 invalid input, 2 solver failure, 3 acceptance
threshold not met.
"""

import argparse
import logging
import math
import os
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

from src.analytic import AnalyticError, AnnulusSolution, annulus_state, penalized_annulus
from src.config import ConfigError, RunConfig, dump_config, load_config, validate_config
from src.levelset import LevelSetError, radial_heaviside
from src.mesh import MeshError, mesh_disk
from src.objective import ObjectiveError, TargetShape, boundary_radius, gray_region_report, sample_count
from src.optimize import OptimizationError, build_grid, initial_design, initial_domain, run_algorithm1, schedule_from_config
from src.reporting import (
    plot_levelset_svg,
    plot_potential_svg,
    read_alpha,
    write_alpha,
    write_gradcheck_csv,
    write_state_bundle,
    write_table,
)
from src.sensitivity import SensitivityError, ShapeProblem, finite_difference_check, select_components
from src.state import StateAssembler, StateParams, StateSolveError, StateVector, write_newton_log

logger = logging.getLogger("bernoulli")

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_SOLVER = 2
EXIT_ACCEPTANCE = 3

SERIAL_XLA_FLAGS = "--xla_cpu_multi_thread_eigen=false intra_op_parallelism_threads=1"

GRADCHECK_MAX_N = 8
GRADCHECK_MIN_H = 0.2

SOLVER_ERRORS = (StateSolveError, MeshError, SensitivityError, ObjectiveError, OptimizationError, AnalyticError)


def _annulus_problem(config: RunConfig, h: float, delta: float, newton=None, exact_disk: bool = False) -> tuple:
    """
    Disk mesh, α fitted to the inclusion, annulus warm start.

    The disk is the initial domain B(0, C(1, γ)), or B(0, C(R, γ)) itself
    when `exact_disk` is set.
    """
    p = config.problem
    solution = AnnulusSolution.solve(p.inclusion_radius, p.gamma)
    grid = build_grid(config)
    if exact_disk:
        mesh = mesh_disk(solution.outer_radius, h, config.mesh.max_nodes)
        u, v, q_p = annulus_state(mesh.nodes, mesh.boundary, solution)
        state = StateVector(u=u, v=v, p=q_p)
    else:
        mesh, state = initial_domain(config, h)
    params = StateParams.build(p.gamma, delta, p.epsilon, p.mu, p.lam)
    assembler = StateAssembler(mesh, grid, params)
    problem = ShapeProblem(
        assembler,
        _target(config),
        eta=p.eta,
        newton=newton or config.newton,
        samples=config.output.samples,
        center=config.target.center,
    )
    return solution, grid, problem, state


def _serial_mode() -> None:
    """Single-threaded XLA CPU backend. Takes effect only before the first JAX computation."""
    flags = os.environ.get("XLA_FLAGS", "")
    if SERIAL_XLA_FLAGS not in flags:
        os.environ["XLA_FLAGS"] = f"{flags} {SERIAL_XLA_FLAGS}".strip()


def _target(config: RunConfig) -> TargetShape:
    return TargetShape.from_spec(config.target, config.problem.gamma)


def _penalized_reference(config: RunConfig, grid, design, smoothing, outer_radius: float) -> AnnulusSolution:
    """Annulus of the penalized problem for the angle-averaged H_β(ψ) profile of `design`."""
    radius = config.problem.inclusion_radius
    radii = np.linspace(0.25 * radius, outer_radius, config.verify.profile_points)
    profile = radial_heaviside(grid, design, radii, smoothing, angles=config.verify.angles)
    return penalized_annulus(radii, profile, config.problem.epsilon, config.problem.gamma)


# =============================================================================
# Commands
# =============================================================================


def cmd_verify_analytic(config: RunConfig, out: Path) -> int:
    """Free-boundary radius error of the annulus solve at h and h/2."""
    p = config.problem
    h = config.mesh.h
    delta = config.verify.delta or h
    rows, errors = [], []
    solution = reference = None
    for level, size in enumerate((h, h / 2)):
        solution, grid, problem, state = _annulus_problem(config, size, delta, exact_disk=True)
        design = initial_design(config, grid)
        if reference is None:
            reference = _penalized_reference(config, grid, design, problem.assembler.params.smoothing, solution.outer_radius)
            logger.info(
                f"Penalized reference: effective inclusion radius {reference.inner_radius:.8f}, "
                f"free boundary {reference.outer_radius:.8f}"
            )
        result = problem.solve_state(design, state)
        deformed = problem.assembler.deformed_mesh(result.state.stack())
        radii = boundary_radius(deformed, problem.samples).values
        error = float(np.max(np.abs(radii - reference.outer_radius)) / reference.outer_radius)
        closed_form = float(np.max(np.abs(radii - solution.outer_radius)) / solution.outer_radius)
        errors.append(error)
        rows.append([size, delta, p.epsilon, problem.assembler.n, float(radii.mean()), error, closed_form, result.iterations])
        write_newton_log(out / f"newton_log_h{level}.csv", result.history)
        logger.info(
            f"h={size:g}: mean radius {radii.mean():.8f}, error {error:.3e} (penalized), "
            f"{closed_form:.3e} (closed form), {result.iterations} Newton steps"
        )

    order = math.log2(errors[0] / errors[1]) if errors[1] > 0 and errors[0] > 0 else float("inf")
    write_table(
        out / "verify_analytic.csv",
        ["h", "delta", "epsilon", "nodes", "mean_radius", "relative_error", "closed_form_error", "newton_iterations"],
        rows,
    )

    bias = abs(reference.outer_radius - solution.outer_radius) / solution.outer_radius
    print(f"C(R={p.inclusion_radius:g}, gamma={p.gamma:g}) = {solution.outer_radius:.10f}")
    print(
        f"penalized free boundary (epsilon={p.epsilon:g}, delta={delta:g}) = {reference.outer_radius:.10f}, "
        f"penalty bias {bias:.3e}"
    )
    print(f"radius error at h={h:g}: {errors[0]:.3e}, at h={h / 2:g}: {errors[1]:.3e}, observed order {order:.2f}")
    acceptance = config.acceptance
    if errors[0] > acceptance.radius_tolerance:
        print(f"❌ radius error {errors[0]:.3e} exceeds {acceptance.radius_tolerance:g}")
        return EXIT_ACCEPTANCE
    if order < acceptance.min_order:
        print(f"❌ observed order {order:.2f} below {acceptance.min_order:g}")
        return EXIT_ACCEPTANCE
    print("✅ annulus radius reproduced")
    return EXIT_OK


def cmd_solve_state(config: RunConfig, out: Path) -> int:
    """State solve at δ = h/2 for the α table in `alpha_file` (or the fitted initial guess)."""
    h = config.mesh.h
    _, grid, problem, state = _annulus_problem(config, h, h / 2)
    if config.alpha_file:
        design = read_alpha(config.alpha_file, grid.n, config.design.alpha_min, config.design.alpha_max)
    else:
        logger.info("No alpha file given, using the fitted initial guess")
        design = initial_design(config, grid)

    try:
        result = problem.solve_state(design, state)
    except StateSolveError as e:
        history = getattr(e, "history", None)
        if history:
            write_newton_log(out / "newton_log.csv", history)
        raise

    q = result.state.stack()
    write_newton_log(out / "newton_log.csv", result.history)
    paths = write_state_bundle(out, problem.assembler, q, design, samples=problem.samples)
    report = gray_region_report(problem.assembler, q, design)
    if config.output.plots:
        deformed = problem.assembler.deformed_mesh(q)
        plot_levelset_svg(out / "levelset.svg", deformed, problem.assembler.nodal_heaviside(q, design), problem.target.curve())
        plot_potential_svg(out / "potential.svg", deformed, result.state.u)

    tracking, gray = problem.objective_parts(q, design)
    print(f"✅ state converged in {result.iterations} Newton steps, |r|_inf={result.residual_norm:.3e}")
    print(f"   J={tracking:.6e}  J_eta={gray:.6e}  gray nodes={report.nodes} max|u-1|={report.max_deviation or 0.0:.3e}")
    print(f"   wrote {paths['vtk']} and {paths['boundary']}")
    return EXIT_OK


def cmd_optimize(config: RunConfig, out: Path) -> int:
    """Staged optimization with trace, final state and SVG plots."""
    result = run_algorithm1(config, out_dir=out)
    trace = result.trace
    trace.write_csv(out / "trace.csv")
    write_alpha(out / "alpha_final.txt", result.design)
    q = result.state.stack()
    samples = sample_count(config.output.samples, result.assembler.n_e)
    paths = write_state_bundle(out, result.assembler, q, result.design, stem="final", samples=samples)
    if config.output.plots:
        deformed = result.deformed_mesh
        plot_levelset_svg(out / "levelset.svg", deformed, result.assembler.nodal_heaviside(q, result.design), result.target.curve())
        plot_potential_svg(out / "potential.svg", deformed, result.state.u)

    first = trace.stages[0].first_objective if trace.stages else float("nan")
    print(f"✅ optimization finished: objective {first:.6e} -> {result.objective:.6e}")
    print(f"   {trace.steps} optimization steps, {trace.evaluations} function evaluations ({trace.rejections} rejected)")
    print(f"   wrote {out / 'trace.csv'} and {paths['vtk']}")

    threshold = config.acceptance.objective
    if threshold is not None and result.objective > threshold:
        print(f"❌ final objective {result.objective:.3e} above {threshold:g}")
        return EXIT_ACCEPTANCE
    return EXIT_OK


def cmd_grad_check(config: RunConfig, out: Path) -> int:
    """Adjoint gradient against central differences on sampled components."""
    if config.design.n > GRADCHECK_MAX_N:
        raise ConfigError([f"design.n: grad-check needs N <= {GRADCHECK_MAX_N}, got {config.design.n}"])
    h = config.mesh.h
    if h < GRADCHECK_MIN_H:
        print(f"⚠️ grad-check uses a coarse mesh: h raised from {h:g} to {GRADCHECK_MIN_H:g}")
        h = GRADCHECK_MIN_H

    gc = config.gradcheck
    newton = config.newton.model_copy(update={"tol": gc.newton_tol})
    delta = schedule_from_config(config).delta(1)
    _, grid, problem, state = _annulus_problem(config, h, delta, newton=newton)
    design = initial_design(config, grid)
    evaluation = problem.evaluate(design, state)
    rng = np.random.default_rng(config.seed)
    components = select_components(evaluation.gradient, gc.components, rng, include_zero=gc.include_zero)
    report = finite_difference_check(
        problem,
        design,
        evaluation.newton.state,
        evaluation.gradient,
        components,
        step=gc.step,
        newton_tol=gc.newton_tol,
        threshold=gc.threshold,
    )
    write_gradcheck_csv(out / "gradcheck.csv", report)

    print(f"{'component':>9}  {'adjoint':>20}  {'finite diff':>20}  {'rel. error':>10}  {'solves':>6}  {'newton':>6}")
    for row in report.rows:
        print(
            f"{row.component:>9}  {row.adjoint:>20.12e}  {row.finite_difference:>20.12e}  "
            f"{row.relative_error:>10.2e}  {row.newton_solves:>6}  {row.newton_iterations:>6}"
        )
    if not report.passed:
        print(f"❌ max relative error {report.max_relative_error:.3e} above {report.threshold:g}")
        return EXIT_ACCEPTANCE
    print(f"✅ adjoint gradient matches finite differences (max relative error {report.max_relative_error:.3e})")
    return EXIT_OK


COMMANDS = {
    "verify-analytic": cmd_verify_analytic,
    "solve-state": cmd_solve_state,
    "optimize": cmd_optimize,
    "grad-check": cmd_grad_check,
}


# =============================================================================
# Entry point
# =============================================================================


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bernoulli", description="Exterior Bernoulli free boundary shape optimization")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, func in COMMANDS.items():
        cmd = sub.add_parser(name, help=func.__doc__.strip().splitlines()[0])
        cmd.add_argument("--config", type=Path, help="TOML configuration file")
        cmd.add_argument("--out", type=Path, help="Output directory (overrides out_dir)")
        cmd.add_argument("--seed", type=int, help="Seed for sampled components")
        cmd.add_argument("--deterministic", action="store_true", help="Serial run with a fixed seed")
        cmd.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"], help="Logging level")
        if name == "solve-state":
            cmd.add_argument("--alpha", type=Path, help="N×N coefficient table (overrides alpha_file)")
    return parser


def _apply_flags(config: RunConfig, args: argparse.Namespace) -> RunConfig:
    update = {}
    if args.out is not None:
        update["out_dir"] = str(args.out)
    if args.seed is not None:
        update["seed"] = args.seed
    if args.deterministic:
        update["deterministic"] = True
    if args.log_level:
        update["log_level"] = args.log_level
    if getattr(args, "alpha", None) is not None:
        update["alpha_file"] = str(args.alpha)
    if not update:
        return config
    data = config.model_dump()
    data.update(update)
    return validate_config(data)


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _apply_flags(load_config(args.config), args)
    except ConfigError as e:
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_INVALID

    logging.basicConfig(
        level=getattr(logging, config.log_level),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    if config.deterministic:
        _serial_mode()
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    dump_config(config, out / "config.toml")
    mode = "serial deterministic" if config.deterministic else "default"
    logger.info(f"{args.command}: config {args.config or '(defaults)'}, output {out}, seed {config.seed}, {mode} mode")

    try:
        return COMMANDS[args.command](config, out)
    except (ConfigError, LevelSetError) as e:
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_INVALID
    except SOLVER_ERRORS as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"❌ solver failure: {e}", file=sys.stderr)
        if isinstance(e, OptimizationError) and e.trace is not None:
            e.trace.write_csv(out / "trace.csv")
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())

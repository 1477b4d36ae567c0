import numpy as np
import pytest

from src.analytic import AnnulusSolution, annulus_state, circle_levelset
from src.levelset import RbfGrid, fit_initial_alpha
from src.mesh import mesh_disk
from src.objective import TargetShape, TargetSpec
from src.sensitivity import ShapeProblem
from src.state import NewtonSettings, StateAssembler, StateParams, StateVector


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run slow end-to-end tests")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@pytest.fixture(scope="session")
def annulus():
    return AnnulusSolution.solve(1.0, -1.0)


@pytest.fixture(scope="session")
def coarse_mesh(annulus):
    return mesh_disk(annulus.outer_radius, 0.3)


@pytest.fixture(scope="session")
def small_grid():
    return RbfGrid(n=5)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def build_problem(h=0.3, n=5, delta=0.3, gamma=-1.0, eta=0.0, target=None, inclusion=1.0, tol=1e-10):
    """Annulus warm start on a disk mesh with α fitted to B(0, inclusion)."""
    solution = AnnulusSolution.solve(inclusion, gamma)
    mesh = mesh_disk(solution.outer_radius, h)
    grid = RbfGrid(n=n)
    design = fit_initial_alpha(grid, lambda p: circle_levelset(p, inclusion))
    assembler = StateAssembler(mesh, grid, StateParams.build(gamma, delta))
    spec = target or TargetSpec(kind="cosine_key")
    problem = ShapeProblem(assembler, TargetShape.from_spec(spec, gamma), eta=eta, newton=NewtonSettings(tol=tol))
    u, v, p = annulus_state(mesh.nodes, mesh.boundary, solution)
    state = StateVector(u=u, v=v, p=p)
    return problem, design, state


@pytest.fixture(scope="session")
def coarse_problem():
    return build_problem()

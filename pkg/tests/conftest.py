"""
Pytest configuration and shared fixtures for the FCE solver tests
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add src to Python path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root / 'src'))

from fce.constraints import BoundaryCondition, BoundarySpec  # noqa: E402
from fce.fce1d import Partition1D, build_field_1d  # noqa: E402
from fce.fce2d import Mesh2D, build_field_2d  # noqa: E402


UNIT_SQUARE = ((0.0, 1.0), (0.0, 1.0))


# ============================================================================
# RANDOM FIXTURES
# ============================================================================

@pytest.fixture
def rng():
    """
    Seeded generator so property checks are reproducible.
    """
    return np.random.default_rng(20240101)


# ============================================================================
# MESH FIXTURES
# ============================================================================

@pytest.fixture
def partition4():
    """
    Four equal elements on [0, 1].
    """
    return Partition1D.uniform(0.0, 1.0, 4)


@pytest.fixture
def skewed_partition():
    """
    Non-uniform breakpoints on [-1, 2].
    """
    return Partition1D((-1.0, -0.3, 0.4, 1.1, 2.0))


@pytest.fixture
def mesh21():
    """
    2 x 1 mesh on the unit square.
    """
    return Mesh2D.uniform(UNIT_SQUARE, 2, 1)


@pytest.fixture
def mesh22():
    """
    2 x 2 mesh on the unit square.
    """
    return Mesh2D.uniform(UNIT_SQUARE, 2, 2)


@pytest.fixture
def mesh_skewed():
    """
    3 x 2 mesh with uneven spacing.
    """
    return Mesh2D(Partition1D((0.0, 0.2, 0.7, 1.0)), Partition1D((0.0, 0.45, 1.0)))


# ============================================================================
# FIELD FIXTURES
# ============================================================================

@pytest.fixture
def c1_field(partition4):
    """
    C1 field, p=6, no boundary data.
    """
    return build_field_1d(partition4, 'C1', 6)


@pytest.fixture
def c0_field(partition4):
    """
    C0 field, p=5, no boundary data.
    """
    return build_field_1d(partition4, 'C0', 5)


def sin_cos(x, y, kx=0, ky=0):
    """∂^(kx, ky) of sin(πx) cos(πy), used as 2D boundary data"""
    fx = [np.sin, np.cos, lambda t: -np.sin(t)][kx](np.pi * x) * np.pi ** kx
    fy = [np.cos, lambda t: -np.sin(t), lambda t: -np.cos(t)][ky](np.pi * y) * np.pi ** ky
    return fx * fy


@pytest.fixture
def dirichlet_all_sides():
    """
    Exact Dirichlet data from sin(πx)cos(πy) on all four sides.
    """
    return BoundarySpec(tuple(BoundaryCondition.dirichlet(s, sin_cos) for s in ('left', 'right', 'bottom', 'top')))


@pytest.fixture
def c0_field_2d(mesh21, dirichlet_all_sides):
    """
    2D C0 field on the 2 x 1 mesh with Dirichlet data.
    """
    return build_field_2d(mesh21, 'C0', 5, boundary_spec=dirichlet_all_sides)


# ============================================================================
# PYTEST HOOKS
# ============================================================================

def pytest_configure(config):
    """
    Configure pytest with custom markers.
    """
    config.addinivalue_line(
        'markers', 'unit: fast tests of a single module'
    )
    config.addinivalue_line(
        'markers', 'integration: end-to-end runs of benchmark cases'
    )
    config.addinivalue_line(
        'markers', 'slow: larger meshes and sweeps'
    )

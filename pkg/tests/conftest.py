"""Pytest configuration and fixtures."""

import numpy as np
import pytest

from tree_control.graph import MetricTree, build_tree
from tree_control.models import DensityProfile, EdgeSpec, GraphSpec, ModalState
from tree_control.presets import graph_preset
from tree_control.spectral import MeshConfig, SpectralData, solve_spectrum


@pytest.fixture(scope="session")
def interval_tree() -> MetricTree:
    """Unit-density interval of length π."""
    return build_tree(graph_preset("interval"))


@pytest.fixture(scope="session")
def interval_spectral(interval_tree: MetricTree) -> SpectralData:
    """First 12 modes of the interval, eigenvalues close to k²."""
    return solve_spectrum(interval_tree, MeshConfig(modes=12, elements=200))


@pytest.fixture(scope="session")
def fine_interval_spectral(interval_tree: MetricTree) -> SpectralData:
    """First 10 interval modes on 2000 elements (sparse solver)."""
    return solve_spectrum(interval_tree, MeshConfig(modes=10, elements=2000))


@pytest.fixture(scope="session")
def equal_star_tree() -> MetricTree:
    """Star of three unit edges with unit density."""
    return build_tree(graph_preset("equal-star"))


@pytest.fixture(scope="session")
def equal_star_spectral(equal_star_tree: MetricTree) -> SpectralData:
    """First 12 modes of the equal star (with double eigenvalues)."""
    return solve_spectrum(equal_star_tree, MeshConfig(modes=12, elements=150))


@pytest.fixture(scope="session")
def sparse_star_spectral(equal_star_tree: MetricTree) -> SpectralData:
    """First 6 equal-star modes on meshes large enough for the sparse solver."""
    return solve_spectrum(equal_star_tree, MeshConfig(modes=6, elements=600))


@pytest.fixture(scope="session")
def weighted_star_tree() -> MetricTree:
    """Star with lengths 1, 2, 3 and densities 1, 2.25, 4 (optical 1, 3, 6)."""
    return build_tree(graph_preset("weighted-star"))


@pytest.fixture(scope="session")
def weighted_star_spectral(weighted_star_tree: MetricTree) -> SpectralData:
    """First 10 modes of the weighted star."""
    return solve_spectrum(weighted_star_tree, MeshConfig(modes=10, elements=300))


@pytest.fixture(scope="session")
def wide_weighted_star_spectral(weighted_star_tree: MetricTree) -> SpectralData:
    """First 30 modes of the weighted star, for spill-over checks."""
    return solve_spectrum(weighted_star_tree, MeshConfig(modes=30, elements=300))


@pytest.fixture
def path_spec() -> GraphSpec:
    """Path 0 - 1 - 2 with a linear density on the second edge."""
    return GraphSpec(
        (0, 1, 2),
        (
            EdgeSpec(0, 0, 1, 1.0),
            EdgeSpec(1, 1, 2, 2.0, DensityProfile.linear(1.0, 1.5)),
        ),
    )


@pytest.fixture
def mode1_target() -> ModalState:
    """Wave target: first eigenfunction at rest, 12 modes."""
    return ModalState.basis(0, 12, velocity=True)


@pytest.fixture
def sample_state() -> ModalState:
    """Decaying real state on 8 modes."""
    k = np.arange(1, 9)
    return ModalState(1.0 / k, np.zeros(8))


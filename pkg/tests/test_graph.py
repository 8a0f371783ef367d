"""Tests for metric trees and optical geometry."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tree_control.errors import (
    CycleDetected,
    Disconnected,
    GraphError,
    InconsistentChannels,
    InvalidPoint,
    NonpositiveDensity,
    NonpositiveLength,
)
from tree_control.graph import (
    build_tree,
    distance_table,
    eccentricity,
    max_boundary_distance,
    optical_center,
    optical_diameter,
    optical_distance,
    scale_density,
)
from tree_control.models import DensityProfile, EdgeSpec, GraphPoint, GraphSpec
from tree_control.presets import star

edges_strategy = st.lists(
    st.tuples(
        st.floats(min_value=0.1, max_value=5.0),
        st.floats(min_value=0.1, max_value=10.0),
    ),
    min_size=2,
    max_size=6,
)


def random_star(edges):
    lengths = tuple(length for length, _ in edges)
    densities = tuple(rho for _, rho in edges)
    return build_tree(star(lengths, densities))


class TestBuildTree:
    """Tests for graph validation."""

    def test_boundary_and_interior(self, weighted_star_tree):
        """Test that leaves form the boundary in ascending order."""
        assert weighted_star_tree.boundary == (1, 2, 3)
        assert weighted_star_tree.interior == (0,)
        assert weighted_star_tree.m == 3

    def test_optical_lengths(self, weighted_star_tree):
        """Test optical lengths of constant densities."""
        lengths = weighted_star_tree.optical_lengths
        assert lengths[0] == pytest.approx(1.0)
        assert lengths[1] == pytest.approx(3.0)
        assert lengths[2] == pytest.approx(6.0)
        assert weighted_star_tree.total_optical_length == pytest.approx(10.0)

    def test_linear_density_closed_form(self, path_spec):
        """Test the optical length of a linear density."""
        tree = build_tree(path_spec)
        assert tree.optical_lengths[1] == pytest.approx(28.0 / 9.0, rel=1e-14)

    def test_sampled_density(self):
        """Test that a flat sampled density matches the constant one."""
        spec = GraphSpec(
            (0, 1), (EdgeSpec(0, 0, 1, 2.0, DensityProfile.sampled([4.0, 4.0, 4.0])),)
        )
        tree = build_tree(spec)
        assert tree.optical_lengths[0] == pytest.approx(4.0, rel=1e-9)

    def test_cycle_detected(self):
        """Test that a triangle is rejected."""
        spec = GraphSpec(
            (0, 1, 2),
            (EdgeSpec(0, 0, 1, 1.0), EdgeSpec(1, 1, 2, 1.0), EdgeSpec(2, 2, 0, 1.0)),
        )
        with pytest.raises(CycleDetected):
            build_tree(spec)

    def test_parallel_edges_are_a_cycle(self):
        """Test that two edges between the same vertices are rejected."""
        spec = GraphSpec((0, 1), (EdgeSpec(0, 0, 1, 1.0), EdgeSpec(1, 1, 0, 2.0)))
        with pytest.raises(CycleDetected):
            build_tree(spec)

    def test_loop_rejected(self):
        """Test that a loop edge is rejected."""
        spec = GraphSpec((0, 1), (EdgeSpec(0, 0, 1, 1.0), EdgeSpec(1, 1, 1, 1.0)))
        with pytest.raises(CycleDetected):
            build_tree(spec)

    def test_disconnected(self):
        """Test that a forest is rejected."""
        spec = GraphSpec(
            (0, 1, 2, 3), (EdgeSpec(0, 0, 1, 1.0), EdgeSpec(1, 2, 3, 1.0))
        )
        with pytest.raises(Disconnected):
            build_tree(spec)

    def test_nonpositive_length(self):
        """Test that zero length edges are rejected."""
        spec = GraphSpec((0, 1), (EdgeSpec(0, 0, 1, 0.0),))
        with pytest.raises(NonpositiveLength):
            build_tree(spec)

    def test_nonpositive_density(self):
        """Test that a linear density crossing zero is rejected."""
        spec = GraphSpec(
            (0, 1), (EdgeSpec(0, 0, 1, 2.0, DensityProfile.linear(1.0, -1.0)),)
        )
        with pytest.raises(NonpositiveDensity):
            build_tree(spec)

    def test_unknown_vertex(self):
        """Test that edges must reference declared vertices."""
        spec = GraphSpec((0, 1), (EdgeSpec(0, 0, 5, 1.0),))
        with pytest.raises(GraphError):
            build_tree(spec)

    def test_graph_errors_are_input_errors(self):
        """Test that graph errors map to the input exit code."""
        assert CycleDetected.exit_code == 2


class TestGeometry:
    """Tests for optical distances, diameter and center."""

    def test_weighted_star_diameter(self, weighted_star_tree):
        """Test diameter and diametral pair."""
        diameter, pair = optical_diameter(weighted_star_tree)
        assert diameter == pytest.approx(9.0)
        assert pair == (2, 3)

    def test_weighted_star_center(self, weighted_star_tree):
        """Test that the center lies on the longest edge."""
        center = optical_center(weighted_star_tree)
        assert center.edge == 2
        assert center.x == pytest.approx(0.75, abs=1e-10)
        radius = max_boundary_distance(weighted_star_tree, center)
        assert radius == pytest.approx(4.5, abs=1e-9)

    def test_equal_star_center_is_vertex(self, equal_star_tree):
        """Test that the center snaps onto the hub vertex."""
        assert optical_center(equal_star_tree) == GraphPoint(0, 0.0)

    def test_interval_center(self, interval_tree):
        """Test the midpoint of the interval."""
        center = optical_center(interval_tree)
        assert center.edge == 0
        assert center.x == pytest.approx(math.pi / 2, abs=1e-10)

    def test_eccentricity(self, weighted_star_tree):
        """Test the largest distance from each boundary vertex."""
        assert eccentricity(weighted_star_tree, 1) == pytest.approx(7.0)
        assert eccentricity(weighted_star_tree, 2) == pytest.approx(9.0)
        assert eccentricity(weighted_star_tree, 3) == pytest.approx(9.0)

    def test_eccentricity_of_interior_vertex(self, weighted_star_tree):
        """Test that only boundary vertices have an eccentricity."""
        with pytest.raises(InconsistentChannels):
            eccentricity(weighted_star_tree, 0)

    def test_distance_table(self, weighted_star_tree):
        """Test the boundary distance table."""
        table = distance_table(weighted_star_tree)
        expected = np.array([[0, 4, 7], [4, 0, 9], [7, 9, 0]], dtype=float)
        np.testing.assert_allclose(table, expected, rtol=1e-12)

    def test_distance_on_same_edge(self, weighted_star_tree):
        """Test distances between two points of one edge."""
        a = weighted_star_tree.point(2, 0.5)
        b = weighted_star_tree.point(2, 2.0)
        assert optical_distance(weighted_star_tree, a, b) == pytest.approx(3.0)

    def test_distance_across_hub(self, weighted_star_tree):
        """Test distances through the interior vertex."""
        a = weighted_star_tree.point(0, 0.5)
        b = weighted_star_tree.point(1, 1.0)
        assert optical_distance(weighted_star_tree, a, b) == pytest.approx(2.0)

    def test_invalid_point(self, weighted_star_tree):
        """Test that points outside an edge are rejected."""
        with pytest.raises(InvalidPoint):
            weighted_star_tree.point(0, 1.5)

    def test_channels_exclude(self, weighted_star_tree):
        """Test channel selection with an excluded vertex."""
        assert weighted_star_tree.channels(2) == (1, 3)
        with pytest.raises(InconsistentChannels):
            weighted_star_tree.channels(0)


class TestGeometryProperties:
    """Property tests on random stars."""

    @given(edges_strategy)
    @settings(max_examples=40, deadline=None)
    def test_diameter_is_two_longest_edges(self, edges):
        """Test that a star's diameter joins its two optically longest edges."""
        tree = random_star(edges)
        optical = sorted(length * math.sqrt(rho) for length, rho in edges)
        diameter, _ = optical_diameter(tree)
        assert diameter == pytest.approx(optical[-1] + optical[-2], rel=1e-12)

    @given(edges_strategy)
    @settings(max_examples=40, deadline=None)
    def test_center_radius_is_half_diameter(self, edges):
        """Test that the center is at distance d/2 from the boundary."""
        tree = random_star(edges)
        diameter, _ = optical_diameter(tree)
        radius = max_boundary_distance(tree, optical_center(tree))
        assert radius == pytest.approx(diameter / 2, rel=1e-9, abs=1e-9)

    @given(edges_strategy, st.floats(min_value=0.25, max_value=4.0))
    @settings(max_examples=25, deadline=None)
    def test_density_scaling(self, edges, factor):
        """Test that scaling the density scales distances by its root."""
        tree = random_star(edges)
        scaled = build_tree(scale_density(tree.spec, factor))
        np.testing.assert_allclose(
            distance_table(scaled),
            math.sqrt(factor) * distance_table(tree),
            rtol=1e-12,
        )

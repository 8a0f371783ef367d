"""Metric trees and their optical geometry.

The optical metric is ``dσ = √ρ |dx|``; optical lengths are travel times of
unit-speed waves and set the critical control times.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations

import networkx as nx
import numpy as np
from numpy.typing import NDArray
from scipy.optimize import brentq

from tree_control.errors import (
    CycleDetected,
    Disconnected,
    GraphError,
    InconsistentChannels,
    InvalidPoint,
    NonpositiveDensity,
    NonpositiveLength,
)
from tree_control.models import (
    DENSITY_KINDS,
    EdgeSpec,
    GraphPoint,
    GraphSpec,
)

logger = logging.getLogger(__name__)

# optical tolerance for snapping the center onto a vertex
CENTER_SNAP = 1e-10
CENTER_XTOL = 1e-12


@dataclass(frozen=True, eq=False)
class MetricTree:
    """A validated metric tree.

    Build with :func:`build_tree`; never mutate.

    Attributes:
        spec: The validated specification
        graph: ``networkx.MultiGraph`` keyed by edge id
        boundary: Degree-one vertices in ascending id order
        interior: Remaining vertices in ascending id order
        optical_lengths: Optical length of each edge
        vertex_distances: Optical distance between every pair of vertices
    """

    spec: GraphSpec
    graph: nx.MultiGraph
    boundary: tuple[int, ...]
    interior: tuple[int, ...]
    optical_lengths: dict[int, float]
    vertex_distances: dict[int, dict[int, float]]

    @cached_property
    def _edges(self) -> dict[int, EdgeSpec]:
        return {edge.id: edge for edge in self.spec.edges}

    @property
    def m(self) -> int:
        """Number of boundary vertices."""
        return len(self.boundary)

    @property
    def n_edges(self) -> int:
        return len(self.spec.edges)

    @property
    def edge_ids(self) -> tuple[int, ...]:
        return tuple(sorted(self._edges))

    @property
    def total_optical_length(self) -> float:
        return math.fsum(self.optical_lengths.values())

    def edge(self, edge_id: int) -> EdgeSpec:
        try:
            return self._edges[edge_id]
        except KeyError as e:
            raise InvalidPoint(f"unknown edge id {edge_id}") from e

    def incident_edges(self, vertex: int) -> list[int]:
        """Ids of edges incident to ``vertex`` in ascending order."""
        return sorted(key for _, _, key in self.graph.edges(vertex, keys=True))

    def boundary_edge(self, vertex: int) -> EdgeSpec:
        """The unique edge attached to a boundary vertex."""
        if vertex not in self.boundary:
            raise InconsistentChannels(f"vertex {vertex} is not a boundary vertex")
        return self.edge(self.incident_edges(vertex)[0])

    def vertex_point(self, vertex: int) -> GraphPoint:
        """Canonical point of a vertex: its lowest incident edge."""
        if vertex not in self.graph:
            raise InvalidPoint(f"unknown vertex {vertex}")
        edge = self.edge(self.incident_edges(vertex)[0])
        return GraphPoint(edge.id, 0.0 if edge.tail == vertex else edge.length)

    def point(self, edge_id: int, x: float) -> GraphPoint:
        """Validated point in canonical form."""
        edge = self.edge(edge_id)
        if not (0.0 <= x <= edge.length) or not math.isfinite(x):
            raise InvalidPoint(f"x={x} outside edge {edge_id} of length {edge.length}")
        if x == 0.0:
            return self.vertex_point(edge.tail)
        if x == edge.length:
            return self.vertex_point(edge.head)
        return GraphPoint(edge_id, float(x))

    def channels(self, exclude: int | None = None) -> tuple[int, ...]:
        """Boundary vertices used as control channels."""
        if exclude is None:
            return self.boundary
        if exclude not in self.boundary:
            raise InconsistentChannels(
                f"excluded vertex {exclude} is not a boundary vertex "
                f"(boundary: {list(self.boundary)})"
            )
        return tuple(v for v in self.boundary if v != exclude)

    def optical_offset(self, point: GraphPoint) -> float:
        """Optical distance from the tail of the point's edge."""
        edge = self.edge(point.edge)
        if not (0.0 <= point.x <= edge.length):
            raise InvalidPoint(f"{point} lies outside edge {edge.id}")
        return edge.density.sqrt_integral(0.0, point.x, edge.length)


def _check_density(edge: EdgeSpec) -> None:
    density = edge.density
    if density.kind not in DENSITY_KINDS:
        raise GraphError(f"edge {edge.id}: unknown density type {density.kind!r}")
    expected = {"constant": 1, "linear": 2}.get(density.kind)
    if expected is not None and len(density.params) != expected:
        raise GraphError(
            f"edge {edge.id}: {density.kind} density takes {expected} parameter(s)"
        )
    if density.kind == "sampled":
        if len(density.params) < 2:
            raise GraphError(f"edge {edge.id}: sampled density needs two values")
        if density.positions is not None:
            pos = np.asarray(density.positions)
            if (
                pos.shape[0] != len(density.params)
                or pos[0] != 0.0
                or pos[-1] != 1.0
                or np.any(np.diff(pos) <= 0)
            ):
                raise GraphError(
                    f"edge {edge.id}: sample positions must increase from 0 to 1"
                )
    if not all(math.isfinite(v) for v in density.params):
        raise NonpositiveDensity(f"edge {edge.id}: density is not finite")
    low = density.minimum(edge.length)
    if low <= 0.0:
        raise NonpositiveDensity(
            f"edge {edge.id}: density minimum {low} is not positive"
        )


def build_tree(spec: GraphSpec) -> MetricTree:
    """Validate a graph specification and build the metric tree.

    Args:
        spec: Vertices and edges of the graph

    Returns:
        The validated tree with boundary, distances and optical lengths

    Raises:
        GraphError: Empty graph, duplicate ids or unknown vertices
        NonpositiveLength: An edge length is not positive
        NonpositiveDensity: A density is not bounded below by a positive value
        CycleDetected: The graph contains a cycle
        Disconnected: The graph is not connected
    """
    if not spec.vertices or not spec.edges:
        raise GraphError("a tree needs at least one edge")
    if len(set(spec.vertices)) != len(spec.vertices):
        raise GraphError("duplicate vertex ids")
    if len({edge.id for edge in spec.edges}) != len(spec.edges):
        raise GraphError("duplicate edge ids")

    vertices = set(spec.vertices)
    graph = nx.MultiGraph()
    graph.add_nodes_from(sorted(vertices))
    optical: dict[int, float] = {}
    for edge in spec.edges:
        for end in (edge.tail, edge.head):
            if end not in vertices:
                raise GraphError(f"edge {edge.id} references unknown vertex {end}")
        if edge.tail == edge.head:
            raise CycleDetected(f"edge {edge.id} is a loop at vertex {edge.tail}")
        if not (math.isfinite(edge.length) and edge.length > 0.0):
            raise NonpositiveLength(
                f"edge {edge.id}: length {edge.length} is not positive"
            )
        _check_density(edge)
        optical[edge.id] = edge.density.sqrt_integral(0.0, edge.length, edge.length)
        graph.add_edge(edge.tail, edge.head, key=edge.id, optical=optical[edge.id])

    components = nx.number_connected_components(graph)
    if graph.number_of_edges() > graph.number_of_nodes() - components:
        raise CycleDetected(f"{len(spec.edges)} edges on {len(vertices)} vertices")
    if components > 1:
        raise Disconnected(f"graph has {components} connected components")

    boundary = tuple(sorted(v for v, degree in graph.degree() if degree == 1))
    interior = tuple(sorted(v for v, degree in graph.degree() if degree > 1))
    distances = {
        source: dict(lengths)
        for source, lengths in nx.all_pairs_dijkstra_path_length(
            graph, weight="optical"
        )
    }
    logger.debug(
        "built tree: %d vertices, %d edges, boundary %s",
        len(vertices),
        len(spec.edges),
        boundary,
    )
    return MetricTree(spec, graph, boundary, interior, optical, distances)


def _ends(tree: MetricTree, point: GraphPoint) -> tuple[tuple[int, float], ...]:
    # the two edge endpoints with the optical distance to each
    edge = tree.edge(point.edge)
    offset = tree.optical_offset(point)
    return (edge.tail, offset), (edge.head, tree.optical_lengths[edge.id] - offset)


def optical_distance(tree: MetricTree, a: GraphPoint, b: GraphPoint) -> float:
    """Optical length of the unique path between two points.

    Raises:
        InvalidPoint: A point does not lie on the tree
    """
    if a.edge == b.edge:
        edge = tree.edge(a.edge)
        for p in (a, b):
            if not (0.0 <= p.x <= edge.length):
                raise InvalidPoint(f"{p} lies outside edge {edge.id}")
        lo, hi = sorted((a.x, b.x))
        return edge.density.sqrt_integral(lo, hi, edge.length)
    return min(
        da + tree.vertex_distances[u][v] + db
        for u, da in _ends(tree, a)
        for v, db in _ends(tree, b)
    )


def optical_diameter(tree: MetricTree) -> tuple[float, tuple[int, int]]:
    """Largest optical distance between boundary vertices.

    Returns:
        The diameter and the first boundary pair (in boundary order) attaining it
    """
    best = -1.0
    pair = (tree.boundary[0], tree.boundary[1])
    for u, v in combinations(tree.boundary, 2):
        d = tree.vertex_distances[u][v]
        if d > best:
            best, pair = d, (u, v)
    return best, pair


def max_boundary_distance(tree: MetricTree, point: GraphPoint) -> float:
    """Largest optical distance from ``point`` to the boundary."""
    return max(
        optical_distance(tree, point, tree.vertex_point(v)) for v in tree.boundary
    )


def optical_center(tree: MetricTree) -> GraphPoint:
    """The point minimizing the largest optical distance to the boundary.

    On a tree it is the midpoint of any diametral path; it is located on
    that path by solving the balance equation on the edge that contains it.
    """
    diameter, (start, end) = optical_diameter(tree)
    half = diameter / 2.0
    path = nx.shortest_path(tree.graph, start, end, weight="optical")
    travelled = 0.0
    for u, v in zip(path[:-1], path[1:]):
        edge_id = next(iter(tree.graph.get_edge_data(u, v)))
        edge = tree.edge(edge_id)
        length = tree.optical_lengths[edge_id]
        if travelled + length < half - CENTER_SNAP:
            travelled += length
            continue
        remaining = half - travelled
        if remaining <= CENTER_SNAP:
            return tree.vertex_point(u)
        if length - remaining <= CENTER_SNAP:
            return tree.vertex_point(v)

        def balance(x: float) -> float:
            if edge.tail == u:
                reach = edge.density.sqrt_integral(0.0, x, edge.length)
            else:
                reach = edge.density.sqrt_integral(x, edge.length, edge.length)
            return 2.0 * (travelled + reach) - diameter

        x = brentq(balance, 0.0, edge.length, xtol=CENTER_XTOL)
        return tree.point(edge_id, float(x))
    return tree.vertex_point(end)


def eccentricity(tree: MetricTree, vertex: int) -> float:
    """Largest optical distance from a boundary vertex to the rest of Γ.

    Raises:
        InconsistentChannels: ``vertex`` is not a boundary vertex
    """
    others = tree.channels(exclude=vertex)
    return max(tree.vertex_distances[vertex][v] for v in others)


def distance_table(tree: MetricTree) -> NDArray[np.float64]:
    """Optical distances between boundary vertices in boundary order."""
    m = tree.m
    table = np.zeros((m, m))
    for i, u in enumerate(tree.boundary):
        for j, v in enumerate(tree.boundary):
            table[i, j] = tree.vertex_distances[u][v] if i != j else 0.0
    return table


def scale_density(spec: GraphSpec, factor: float) -> GraphSpec:
    """The same graph with every density multiplied by ``factor``."""
    edges = tuple(
        EdgeSpec(e.id, e.tail, e.head, e.length, e.density.scaled(factor))
        for e in spec.edges
    )
    return GraphSpec(spec.vertices, edges)

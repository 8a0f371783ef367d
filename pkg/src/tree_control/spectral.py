"""Dirichlet spectral data of a metric tree.

Eigenpairs of ``-(1/ρ) w'' = λ w`` with continuity and Kirchhoff conditions
at interior vertices and ``w = 0`` on the boundary, computed with P1 finite
elements on every edge. Eigenvalues are Richardson-extrapolated from a base
and a refined mesh; eigenvectors and boundary traces come from the refined
mesh.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import sparse
from scipy.linalg import LinAlgError, eigh
from scipy.sparse.linalg import (
    ArpackError,
    ArpackNoConvergence,
    LinearOperator,
    eigsh,
    splu,
)
from scipy.stats import ortho_group

from tree_control.errors import (
    DegenerateMassMatrix,
    EigenSolverFailure,
    InconsistentChannels,
    InputError,
    MeshTooCoarse,
)
from tree_control.graph import MetricTree
from tree_control.models import EdgeSpec, ModalState

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]
IntArray = NDArray[np.int64]

# dense generalized eigensolver below this many free nodes
DENSE_LIMIT = 1500
# relative eigenvalue gap below which modes form a cluster
CLUSTER_RTOL = 1e-8
# extra modes solved so that clusters cut by K are still canonical
CLUSTER_PAD = 4
# α components below this fraction of max |α_k| count as zero for the sign rule
SIGN_RTOL = 1e-8
# base and refined eigenvalues of one mode differ by less than this fraction
MATCH_RTOL = 0.05
# deflated restarts of the sparse solver looking for missing repeated eigenvalues
MAX_DEFLATIONS = 8

_GAUSS_NODES, _GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(4)


@dataclass(frozen=True)
class MeshConfig:
    """Finite element mesh for the spectral problem.

    Attributes:
        modes: Number of eigenpairs K
        elements: Elements on the optically longest edge (other edges get a
            proportional count, at least 2) or an explicit count per edge id
        refinement: Factor of the refined mesh used for extrapolation
        points_per_wavelength: Required nodes per wavelength of mode K;
            0 disables the check
    """

    modes: int = 10
    elements: int | Mapping[int, int] = 400
    refinement: int = 2
    points_per_wavelength: float = 20.0

    def element_counts(self, tree: MetricTree) -> dict[int, int]:
        """Elements on every edge."""
        if isinstance(self.elements, Mapping):
            missing = [e for e in tree.edge_ids if e not in self.elements]
            if missing:
                raise MeshTooCoarse(f"no element count for edges {missing}")
            counts = {e: int(self.elements[e]) for e in tree.edge_ids}
        else:
            longest = max(tree.optical_lengths.values())
            counts = {
                e: max(2, math.ceil(self.elements * tree.optical_lengths[e] / longest))
                for e in tree.edge_ids
            }
        small = [e for e, n in counts.items() if n < 2]
        if small:
            raise MeshTooCoarse(f"edges {small} need at least 2 elements")
        return counts

    def refined(self, tree: MetricTree) -> MeshConfig:
        """The mesh with every edge count multiplied by ``refinement``."""
        counts = self.element_counts(tree)
        return replace(
            self, elements={e: n * self.refinement for e, n in counts.items()}
        )


def check_resolution(
    tree: MetricTree, counts: Mapping[int, int], modes: int, per_wavelength: float
) -> None:
    """Raise MeshTooCoarse when mode ``modes`` is under-resolved.

    Uses the Weyl estimate ``√λ_K ≈ π K / L_opt``.
    """
    if per_wavelength <= 0:
        return
    frequency = math.pi * modes / tree.total_optical_length
    for edge_id, n in counts.items():
        need = per_wavelength * tree.optical_lengths[edge_id] * frequency
        need /= 2 * math.pi
        if n < need:
            raise MeshTooCoarse(
                f"edge {edge_id}: {n} elements, mode {modes} needs {math.ceil(need)}"
            )


@dataclass(frozen=True, eq=False)
class Discretization:
    """P1 finite element discretization of a tree.

    Nodes are numbered vertices first (ascending id), then the interior nodes
    of each edge in edge id order. Matrices are over all nodes; ``free``
    lists the nodes not on the boundary.
    """

    tree: MetricTree
    counts: dict[int, int]
    coordinates: dict[int, FloatArray]
    edge_nodes: dict[int, IntArray]
    vertex_nodes: dict[int, int]
    stiffness: sparse.csr_matrix
    mass: sparse.csr_matrix
    free: IntArray
    lumped: bool = False

    @property
    def n_nodes(self) -> int:
        return int(self.stiffness.shape[0])

    @property
    def n_free(self) -> int:
        return int(self.free.shape[0])

    @cached_property
    def boundary_nodes(self) -> IntArray:
        """Node index of each boundary vertex in boundary order."""
        return np.array([self.vertex_nodes[v] for v in self.tree.boundary])

    @cached_property
    def free_stiffness(self) -> sparse.csr_matrix:
        return self.stiffness[self.free][:, self.free]

    @cached_property
    def free_mass(self) -> sparse.csr_matrix:
        return self.mass[self.free][:, self.free]

    def expand(self, values: NDArray[Any]) -> NDArray[Any]:
        """Values on free nodes extended by zero to all nodes."""
        out = np.zeros((self.n_nodes,) + values.shape[1:], dtype=values.dtype)
        out[self.free] = values
        return out

    def to_edges(self, values: NDArray[Any]) -> dict[int, NDArray[Any]]:
        """Split a nodal vector into per-edge arrays ordered tail to head."""
        return {e: values[nodes] for e, nodes in self.edge_nodes.items()}

    def from_edges(self, values: Mapping[int, NDArray[Any]]) -> NDArray[Any]:
        """Assemble a nodal vector from per-edge arrays.

        Shared vertex nodes take the value from the lowest edge id.
        """
        first = values[self.tree.edge_ids[0]]
        out = np.zeros((self.n_nodes,) + first.shape[1:], dtype=first.dtype)
        for edge_id in sorted(self.edge_nodes, reverse=True):
            edge_values = values[edge_id]
            if edge_values.shape[0] != self.counts[edge_id] + 1:
                raise InconsistentChannels(
                    f"edge {edge_id}: {edge_values.shape[0]} values for "
                    f"{self.counts[edge_id] + 1} nodes"
                )
            out[self.edge_nodes[edge_id]] = edge_values
        return out

    def inward_derivative(
        self, values: NDArray[Any], vertex: int, edge_id: int
    ) -> NDArray[Any]:
        """Derivative at ``vertex`` along ``edge_id`` pointing into the edge.

        Second-order one-sided difference on the three nodes nearest the
        vertex. Works on stacked nodal vectors (nodes first).
        """
        nodes = self.edge_nodes[edge_id]
        x = self.coordinates[edge_id]
        if self.tree.edge(edge_id).tail == vertex:
            idx, h = nodes[:3], x[1] - x[0]
        else:
            idx, h = nodes[::-1][:3], x[-1] - x[-2]
        u = values[idx]
        return (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h)


def _element_mass(
    edge: EdgeSpec, x: FloatArray
) -> tuple[FloatArray, FloatArray, FloatArray]:
    h = np.diff(x)
    density = edge.density
    if density.is_piecewise_linear:
        rho = density.evaluate(x, edge.length)
        r0, r1 = rho[:-1], rho[1:]
        return h / 12 * (3 * r0 + r1), h / 12 * (r0 + r1), h / 12 * (r0 + 3 * r1)
    s = (1.0 + _GAUSS_NODES) / 2.0
    w = _GAUSS_WEIGHTS / 2.0
    rho = density.evaluate(x[:-1, None] + h[:, None] * s[None, :], edge.length)
    return (
        h * ((rho * (1 - s) ** 2) @ w),
        h * ((rho * (1 - s) * s) @ w),
        h * ((rho * s**2) @ w),
    )


def assemble(tree: MetricTree, mesh: MeshConfig, lump: bool = False) -> Discretization:
    """Assemble stiffness and ρ-weighted mass matrices.

    Args:
        tree: Validated metric tree
        mesh: Element counts and resolution requirement
        lump: Use the row-sum lumped mass matrix

    Returns:
        Discretization with full matrices and the free node index

    Raises:
        MeshTooCoarse: Fewer nodes per wavelength than required
        DegenerateMassMatrix: No free nodes or a nonpositive mass diagonal
    """
    counts = mesh.element_counts(tree)
    check_resolution(tree, counts, mesh.modes, mesh.points_per_wavelength)

    vertex_nodes = {v: i for i, v in enumerate(sorted(tree.graph.nodes))}
    next_index = len(vertex_nodes)
    coordinates: dict[int, FloatArray] = {}
    edge_nodes: dict[int, IntArray] = {}
    rows: list[IntArray] = []
    cols: list[IntArray] = []
    k_data: list[FloatArray] = []
    m_data: list[FloatArray] = []

    for edge_id in tree.edge_ids:
        edge = tree.edge(edge_id)
        n = counts[edge_id]
        x = np.linspace(0.0, edge.length, n + 1)
        nodes = np.empty(n + 1, dtype=np.int64)
        nodes[0] = vertex_nodes[edge.tail]
        nodes[-1] = vertex_nodes[edge.head]
        nodes[1:-1] = np.arange(next_index, next_index + n - 1)
        next_index += n - 1
        coordinates[edge_id] = x
        edge_nodes[edge_id] = nodes

        h = np.diff(x)
        m00, m01, m11 = _element_mass(edge, x)
        if lump:
            m00, m11, m01 = m00 + m01, m01 + m11, np.zeros_like(m01)
        i, j = nodes[:-1], nodes[1:]
        rows += [i, i, j, j]
        cols += [i, j, i, j]
        k_data += [1 / h, -1 / h, -1 / h, 1 / h]
        m_data += [m00, m01, m01, m11]

    shape = (next_index, next_index)
    index = (np.concatenate(rows), np.concatenate(cols))
    stiffness = sparse.coo_matrix((np.concatenate(k_data), index), shape=shape).tocsr()
    mass = sparse.coo_matrix((np.concatenate(m_data), index), shape=shape).tocsr()

    boundary = {vertex_nodes[v] for v in tree.boundary}
    free = np.array([i for i in range(next_index) if i not in boundary], dtype=np.int64)
    if free.size == 0:
        raise DegenerateMassMatrix("mesh has no free nodes")
    if np.any(mass.diagonal()[free] <= 0.0):
        raise DegenerateMassMatrix("mass matrix has a nonpositive diagonal entry")

    logger.debug(
        "assembled %d nodes (%d free), lumped=%s", next_index, free.size, lump
    )
    return Discretization(
        tree, counts, coordinates, edge_nodes, vertex_nodes, stiffness, mass, free, lump
    )


def _shift_invert(
    stiffness: sparse.csr_matrix, mass: sparse.csr_matrix, count: int
) -> tuple[FloatArray, FloatArray]:
    """Lowest ``count`` eigenpairs by ARPACK shift-invert at zero.

    A Krylov space holds one direction per eigenspace, so every converged
    set is followed by a restart on the operator with the found vectors
    projected out; the loop ends when a restart finds nothing below the
    current largest eigenvalue.
    """
    n = stiffness.shape[0]
    try:
        lu = splu(stiffness.tocsc())
    except RuntimeError as e:
        raise EigenSolverFailure(f"stiffness factorization failed: {e}") from e
    rng = np.random.default_rng(0)
    values = np.empty(0)
    vectors = np.empty((n, 0))
    for _ in range(MAX_DEFLATIONS):
        locked = vectors

        def solve(z: FloatArray, locked: FloatArray = locked) -> FloatArray:
            y = lu.solve(z)
            return y - locked @ (locked.T @ (mass @ y))

        k = min(count, n - locked.shape[1] - 2)
        try:
            found, found_vectors = eigsh(
                stiffness,
                k=k,
                M=mass,
                sigma=0.0,
                which="LM",
                v0=rng.standard_normal(n),
                tol=0.0,
                OPinv=LinearOperator((n, n), matvec=solve, dtype=float),
            )
        except ArpackNoConvergence as e:
            raise EigenSolverFailure(f"eigensolver did not converge: {e}") from e
        except (ArpackError, RuntimeError) as e:
            raise EigenSolverFailure(f"eigensolver failed: {e}") from e
        if values.size == count and np.min(found) >= values[-1] * (1 - CLUSTER_RTOL):
            return values, vectors
        merged = np.concatenate([values, found])
        order = np.argsort(merged, kind="stable")[:count]
        values = merged[order]
        vectors = np.hstack([vectors, found_vectors])[:, order]
        logger.debug("shift-invert pass: %d eigenpairs, λ_max=%.6g", count, values[-1])
    raise EigenSolverFailure(
        f"repeated eigenvalues still missing after {MAX_DEFLATIONS} deflations"
    )


def _eigenpairs(disc: Discretization, count: int) -> tuple[FloatArray, FloatArray, str]:
    stiffness, mass = disc.free_stiffness, disc.free_mass
    n = disc.n_free
    if count > n:
        raise MeshTooCoarse(f"{count} modes requested from {n} free nodes")
    if n <= DENSE_LIMIT:
        solver = "dense"
        try:
            values, vectors = eigh(
                stiffness.toarray(), mass.toarray(), subset_by_index=[0, count - 1]
            )
        except LinAlgError as e:
            raise DegenerateMassMatrix(
                f"mass matrix is not positive definite: {e}"
            ) from e
    else:
        solver = "shift-invert"
        if count >= n - 1:
            raise MeshTooCoarse(f"{count} modes requested from {n} free nodes")
        values, vectors = _shift_invert(stiffness, mass, count)
    if not np.all(np.isfinite(values)) or values[0] <= 0.0:
        raise EigenSolverFailure("eigenvalues are not finite and positive")
    return np.asarray(values), np.asarray(vectors), solver


def find_clusters(
    values: ArrayLike, rtol: float = CLUSTER_RTOL
) -> list[tuple[int, ...]]:
    """Index groups of numerically equal eigenvalues (size two or more)."""
    values = np.asarray(values)
    groups: list[tuple[int, ...]] = []
    current = [0]
    for i in range(1, values.shape[0]):
        if values[i] - values[i - 1] <= rtol * values[i]:
            current.append(i)
        else:
            groups.append(tuple(current))
            current = [i]
    groups.append(tuple(current))
    return [g for g in groups if len(g) > 1]


def _orthonormalize(vectors: FloatArray, mass: sparse.csr_matrix) -> FloatArray:
    # ordered modified Gram-Schmidt in the mass inner product
    q = vectors.copy()
    for k in range(q.shape[1]):
        v = q[:, k]
        for j in range(k):
            v -= (q[:, j] @ (mass @ v)) * q[:, j]
        v /= math.sqrt(v @ (mass @ v))
    return q


def _canonical_clusters(
    values: FloatArray, vectors: FloatArray, kappa: FloatArray
) -> None:
    # rotate each cluster so its trace block is upper trapezoidal (QR form)
    for group in find_clusters(values):
        idx = list(group)
        block = kappa[idx]
        q, r = np.linalg.qr(block, mode="complete")
        signs = np.ones(len(idx))
        diag = np.diag(r)
        signs[: diag.shape[0]] = np.where(diag < 0, -1.0, 1.0)
        q = q * signs
        vectors[:, idx] = vectors[:, idx] @ q
        kappa[idx] = q.T @ block


def _sign_convention(alpha: FloatArray) -> FloatArray:
    signs = np.ones(alpha.shape[0])
    for k, row in enumerate(alpha):
        scale = np.max(np.abs(row))
        nonzero = np.flatnonzero(np.abs(row) > SIGN_RTOL * scale)
        if nonzero.size and row[nonzero[0]] < 0:
            signs[k] = -1.0
    return signs


@dataclass(frozen=True, eq=False)
class SpectralData:
    """Dirichlet spectral data ``{λ_k, α_k}`` and eigenfunctions.

    Attributes:
        eigenvalues: Ascending eigenvalues λ_k
        kappa: Inward boundary derivatives κ_k(γ), shape (K, m)
        alpha: ``κ_k(γ) / √λ_k``, shape (K, m)
        boundary: Boundary vertices labelling the columns
        vectors: Nodal eigenfunctions on ``discretization``, shape (nodes, K)
        discretization: Mesh the eigenfunctions live on
        provenance: Mesh and solver metadata
    """

    eigenvalues: FloatArray
    kappa: FloatArray
    alpha: FloatArray
    boundary: tuple[int, ...]
    vectors: FloatArray | None = None
    discretization: Discretization | None = None
    provenance: dict[str, Any] = field(default_factory=dict)

    @property
    def modes(self) -> int:
        return int(self.eigenvalues.shape[0])

    @property
    def frequencies(self) -> FloatArray:
        return np.sqrt(self.eigenvalues)

    def channel_index(self, channels: Sequence[int]) -> list[int]:
        """Columns of ``alpha`` belonging to ``channels``."""
        try:
            return [self.boundary.index(v) for v in channels]
        except ValueError as e:
            raise InconsistentChannels(
                f"channels {list(channels)} not within boundary {list(self.boundary)}"
            ) from e

    def truncated(self, modes: int) -> SpectralData:
        """The first ``modes`` eigenpairs."""
        if not 1 <= modes <= self.modes:
            raise InconsistentChannels(
                f"cannot take {modes} modes from {self.modes} computed"
            )
        return replace(
            self,
            eigenvalues=self.eigenvalues[:modes],
            kappa=self.kappa[:modes],
            alpha=self.alpha[:modes],
            vectors=None if self.vectors is None else self.vectors[:, :modes],
        )

    def clusters(self, rtol: float = CLUSTER_RTOL) -> list[tuple[int, ...]]:
        return find_clusters(self.eigenvalues, rtol)

    def remixed(self, rng: np.random.Generator) -> SpectralData:
        """Apply a random orthogonal rotation inside every cluster."""
        vectors = None if self.vectors is None else self.vectors.copy()
        kappa, alpha = self.kappa.copy(), self.alpha.copy()
        for group in self.clusters():
            idx = list(group)
            rotation = ortho_group.rvs(len(idx), random_state=rng)
            if vectors is not None:
                vectors[:, idx] = vectors[:, idx] @ rotation
            kappa[idx] = rotation.T @ kappa[idx]
            alpha[idx] = rotation.T @ alpha[idx]
        return replace(self, vectors=vectors, kappa=kappa, alpha=alpha)

    def edge_values(self, k: int, edge_id: int) -> tuple[FloatArray, FloatArray]:
        """Coordinates and nodal values of eigenfunction ``k`` on an edge."""
        if self.vectors is None or self.discretization is None:
            raise InputError("spectral data carries no eigenfunctions")
        disc = self.discretization
        return disc.coordinates[edge_id], self.vectors[disc.edge_nodes[edge_id], k]

    def to_dict(self) -> dict[str, Any]:
        return {
            "eigenvalues": self.eigenvalues.tolist(),
            "kappa": self.kappa.tolist(),
            "alpha": self.alpha.tolist(),
            "boundary": list(self.boundary),
            "provenance": self.provenance,
        }


def _match_modes(coarse: FloatArray, fine: FloatArray) -> None:
    """Both meshes must list the same modes before they are extrapolated."""
    off = np.flatnonzero(np.abs(coarse - fine) > MATCH_RTOL * fine)
    if off.size:
        k = int(off[0])
        raise EigenSolverFailure(
            f"mode {k + 1} does not match across meshes: "
            f"{coarse[k]:.6g} on the base mesh, {fine[k]:.6g} refined"
        )


def solve_spectrum(
    tree: MetricTree, mesh: MeshConfig, K: int | None = None
) -> SpectralData:
    """Compute the first K Dirichlet eigenpairs of a tree.

    Args:
        tree: Validated metric tree
        mesh: Base mesh; the refined mesh supplies eigenvectors
        K: Number of modes (defaults to ``mesh.modes``)

    Returns:
        ρ-orthonormal spectral data with canonical cluster bases

    Raises:
        MeshTooCoarse: The mesh cannot resolve K modes
        EigenSolverFailure: The eigensolver did not converge
        DegenerateMassMatrix: The mass matrix is singular
    """
    K = mesh.modes if K is None else K
    if K < 1:
        raise InputError("mode count must be positive")
    mesh = replace(mesh, modes=K)
    coarse = assemble(tree, mesh)
    if K > coarse.n_free:
        raise MeshTooCoarse(f"{K} modes requested from {coarse.n_free} free nodes")
    limit = coarse.n_free if coarse.n_free <= DENSE_LIMIT else coarse.n_free - 2
    count = max(K, min(K + CLUSTER_PAD, limit))

    if mesh.refinement > 1:
        fine = assemble(tree, mesh.refined(tree))
        coarse_values, _, _ = _eigenpairs(coarse, count)
        fine_values, free_vectors, solver = _eigenpairs(fine, count)
        _match_modes(coarse_values[:K], fine_values[:K])
        r2 = float(mesh.refinement) ** 2
        values = (r2 * fine_values - coarse_values) / (r2 - 1.0)
    else:
        fine = coarse
        values, free_vectors, solver = _eigenpairs(fine, count)
        fine_values = values

    vectors = _orthonormalize(fine.expand(free_vectors), fine.mass)
    kappa = np.column_stack(
        [
            fine.inward_derivative(vectors, v, tree.boundary_edge(v).id)
            for v in tree.boundary
        ]
    )
    _canonical_clusters(values, vectors, kappa)
    # derivatives come from the refined mesh, so scale them by its frequencies
    alpha = kappa / np.sqrt(fine_values)[:, None]
    kappa = alpha * np.sqrt(values)[:, None]
    signs = _sign_convention(alpha)
    vectors *= signs
    kappa *= signs[:, None]
    alpha *= signs[:, None]

    provenance = {
        "elements": {str(e): n for e, n in coarse.counts.items()},
        "refinement": mesh.refinement,
        "nodes": fine.n_nodes,
        "solver": solver,
    }
    logger.info(
        "solved %d modes on %d nodes (%s), λ_1=%.6g, λ_K=%.6g",
        K,
        fine.n_nodes,
        solver,
        values[0],
        values[K - 1],
    )
    return SpectralData(
        values[:K],
        kappa[:K],
        alpha[:K],
        tree.boundary,
        vectors[:, :K],
        fine,
        provenance,
    )


def modal_norm(state: ModalState, spectral: SpectralData, p: int = 0) -> float:
    """The ``H_p`` norm ``(Σ λ_k^p |a_k|²)^{1/2}`` for p in {-1, 0, 1}."""
    if p not in (-1, 0, 1):
        raise InputError(f"norm index must be -1, 0 or 1, got {p}")
    if state.modes > spectral.modes:
        raise InconsistentChannels(
            f"state has {state.modes} modes, spectral data {spectral.modes}"
        )
    lam = spectral.eigenvalues[: state.modes]
    return float(np.sqrt(np.sum(lam**p * np.abs(state.a) ** 2)))


def wave_state_norm(state: ModalState, spectral: SpectralData) -> float:
    """Norm of a wave state ``(a, b)`` in ``H × H_{-1}``."""
    position = modal_norm(state, spectral, 0)
    if state.b is None:
        return position
    velocity = modal_norm(ModalState(state.b), spectral, -1)
    return float(math.hypot(position, velocity))


@dataclass(frozen=True, eq=False)
class WeylReport:
    """Eigenvalue counting function against the Weyl asymptotics.

    Attributes:
        mu: Spectral thresholds
        counts: ``N(μ) = #{λ_k <= μ}``
        predicted: ``L_opt √μ / π``
        max_deviation: Largest ``|N(μ) - predicted|``
        monotone: N is nondecreasing in μ
        saturated: Some μ exceed the largest computed eigenvalue
        total_optical_length: ``L_opt``
    """

    mu: FloatArray
    counts: IntArray
    predicted: FloatArray
    max_deviation: float
    monotone: bool
    saturated: bool
    total_optical_length: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "mu": self.mu.tolist(),
            "counts": self.counts.tolist(),
            "predicted": self.predicted.tolist(),
            "max_deviation": self.max_deviation,
            "monotone": self.monotone,
            "saturated": self.saturated,
            "total_optical_length": self.total_optical_length,
        }


def weyl_check(
    spectral: SpectralData, tree: MetricTree, mu: ArrayLike | None = None
) -> WeylReport:
    """Compare the eigenvalue count with ``L_opt √μ / π``.

    Args:
        spectral: Computed spectral data
        tree: The tree it belongs to
        mu: Thresholds (defaults to the computed eigenvalues)
    """
    lam = spectral.eigenvalues
    mu = lam.copy() if mu is None else np.atleast_1d(np.asarray(mu, dtype=float))
    counts = np.searchsorted(lam, mu, side="right").astype(np.int64)
    length = tree.total_optical_length
    predicted = length * np.sqrt(mu) / math.pi
    order = np.argsort(mu, kind="stable")
    return WeylReport(
        mu,
        counts,
        predicted,
        float(np.max(np.abs(counts - predicted))),
        bool(np.all(np.diff(counts[order]) >= 0)),
        bool(np.any(mu > lam[-1])),
        length,
    )


def eigenfunctions(spectral: SpectralData) -> tuple[FloatArray, Discretization]:
    if spectral.vectors is None or spectral.discretization is None:
        raise InputError("spectral data carries no eigenfunctions")
    return spectral.vectors, spectral.discretization


def kirchhoff_residuals(spectral: SpectralData) -> FloatArray:
    """Relative Kirchhoff defect of every mode at every interior vertex.

    Returns:
        ``|Σ ∂φ_k| / max|φ_k'|``, shape (interior vertices, K)
    """
    vectors, disc = eigenfunctions(spectral)
    tree = disc.tree
    slopes = [
        np.max(
            np.abs(np.diff(vectors[nodes], axis=0))
            / np.diff(disc.coordinates[e])[:, None],
            axis=0,
        )
        for e, nodes in disc.edge_nodes.items()
    ]
    scale = np.max(np.vstack(slopes), axis=0)
    residuals = np.zeros((len(tree.interior), spectral.modes))
    for i, vertex in enumerate(tree.interior):
        total = sum(
            disc.inward_derivative(vectors, vertex, e)
            for e in tree.incident_edges(vertex)
        )
        residuals[i] = np.abs(total) / scale
    return residuals


def orthonormality_defect(spectral: SpectralData) -> float:
    """``max |∫ φ_i φ_j ρ - δ_ij|`` in the consistent mass inner product."""
    vectors, disc = eigenfunctions(spectral)
    gram = vectors.T @ (disc.mass @ vectors)
    return float(np.max(np.abs(gram - np.eye(gram.shape[0]))))

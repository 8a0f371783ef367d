"""Forward simulation of the controlled wave, heat and Schrodinger systems.

The spectral propagators evaluate the modal coefficient formulas

    wave:         c_k(t) = Σ α_k(γ) ∫ sin(√λ_k (t - s)) f(γ, s) ds
    heat:         c_k(t) = a_k e^{-λ_k t} + Σ κ_k(γ) ∫ e^{-λ_k (t - s)} f(γ, s) ds
    Schrodinger:  c_k(t) = a_k e^{iλ_k t} + Σ κ_k(γ) ∫ e^{iλ_k (t - s)} f(γ, s) ds

in closed form for expansion controls and by Gauss quadrature for gridded
ones. ``fdtd_wave`` is an independent leapfrog solver used to cross-check
the wave propagator.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Mapping
from dataclasses import dataclass
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray

from tree_control.errors import CFLViolation, InputError, UnderresolvedQuadrature
from tree_control.graph import MetricTree
from tree_control.models import BoundaryControl, GridState, ModalState, Trajectory
from tree_control.spectral import (
    Discretization,
    MeshConfig,
    SpectralData,
    assemble,
    eigenfunctions,
    wave_state_norm,
)

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]

DEFAULT_TIME_SAMPLES = 201
# gridded controls need this many samples per shortest period
MIN_SAMPLES_PER_PERIOD = 8

_GAUSS_NODES, _GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(4)
_S = (1.0 + _GAUSS_NODES) / 2.0
_W = _GAUSS_WEIGHTS / 2.0


def _time_grid(times: ArrayLike | None, horizon: float) -> FloatArray:
    if times is None:
        if not horizon > 0:
            raise InputError(f"horizon must be positive, got {horizon}")
        return np.linspace(0.0, horizon, DEFAULT_TIME_SAMPLES)
    grid = np.atleast_1d(np.asarray(times, dtype=float))
    if grid.size == 0 or grid[0] < 0.0 or np.any(np.diff(grid) <= 0.0):
        raise InputError("time grid must be nonnegative and strictly increasing")
    return grid


def _check_sampling(control: BoundaryControl, rates: NDArray[Any]) -> None:
    assert control.sample_times is not None
    steps = np.diff(control.sample_times)
    fastest = float(np.max(np.abs(rates)))
    if steps.size == 0 or fastest == 0.0:
        return
    period = 2.0 * math.pi / fastest
    if np.max(steps) > period / MIN_SAMPLES_PER_PERIOD:
        raise UnderresolvedQuadrature(
            f"control sample step {np.max(steps):.3g} exceeds "
            f"1/{MIN_SAMPLES_PER_PERIOD} of the shortest period {period:.3g}"
        )


def _panel(
    mu: NDArray[Any], left: NDArray[Any], right: NDArray[Any], h: float
) -> NDArray[Any]:
    # ∫_0^h e^{μ(h - s)} f(s) ds with f linear from left to right; (K, channels)
    kernel = np.exp(np.outer(mu, h * (1.0 - _S))) * (h * _W)
    return kernel @ np.outer(1.0 - _S, left) + kernel @ np.outer(_S, right)


def _gridded_convolution(
    control: BoundaryControl, rates: NDArray[Any], times: FloatArray
) -> NDArray[Any]:
    assert control.sample_times is not None and control.sample_values is not None
    _check_sampling(control, rates)
    ts, fs = control.sample_times, control.sample_values.astype(complex)
    end = control.end
    mu = rates[:, None]
    channels = fs.shape[1]

    # running integral at every sample time
    running = np.zeros((ts.shape[0], rates.shape[0], channels), dtype=complex)
    for i in range(ts.shape[0] - 1):
        if ts[i] >= end:
            running[i + 1 :] = running[i]
            break
        h = ts[i + 1] - ts[i]
        step = _panel(rates, fs[i], fs[i + 1], h)
        running[i + 1] = np.exp(mu * h) * running[i] + step

    out = np.zeros((times.shape[0], rates.shape[0], channels), dtype=complex)
    for n, t in enumerate(times):
        stop = min(t, end)
        if stop <= ts[0]:
            continue
        j = int(np.searchsorted(ts, stop, side="right")) - 1
        value = running[j]
        if stop > ts[j] and j + 1 < ts.shape[0]:
            h = stop - ts[j]
            theta = h / (ts[j + 1] - ts[j])
            at_stop = (1.0 - theta) * fs[j] + theta * fs[j + 1]
            value = np.exp(mu * h) * value + _panel(rates, fs[j], at_stop, h)
        out[n] = np.exp(mu * (t - stop)) * value
    return out


def convolutions(
    control: BoundaryControl | None, rates: ArrayLike, times: FloatArray
) -> NDArray[Any]:
    """``∫_0^t e^{μ_k (t - s)} f(γ, s) ds`` for every time, rate and channel.

    Returns:
        Complex array of shape (len(times), len(rates), channels)
    """
    rates = np.asarray(rates, dtype=complex)
    channels = 0 if control is None else len(control.channels)
    if control is None or control.is_zero:
        return np.zeros((times.shape[0], rates.shape[0], channels), dtype=complex)
    if control.expansion is not None:
        return np.stack(
            [control.expansion.convolve(rates, float(t), control.end) for t in times]
        )
    return _gridded_convolution(control, rates, times)


def _forcing(
    spectral: SpectralData,
    control: BoundaryControl | None,
    rates: NDArray[Any],
    times: FloatArray,
    weights: FloatArray,
) -> NDArray[Any]:
    # Σ_γ weights_k(γ) ∫ e^{μ_k(t-s)} f(γ, s) ds, shape (len(times), K)
    if control is None or control.is_zero:
        return np.zeros((times.shape[0], rates.shape[0]), dtype=complex)
    columns = spectral.channel_index(control.channels)
    conv = convolutions(control, rates, times)
    return np.einsum("nkc,kc->nk", conv, weights[:, columns])


def _modes(spectral: SpectralData, K: int | None) -> SpectralData:
    return spectral if K is None or K == spectral.modes else spectral.truncated(K)


def wave_forward(
    spectral: SpectralData,
    control: BoundaryControl | None,
    T: float,
    K: int | None = None,
    times: ArrayLike | None = None,
    initial: ModalState | None = None,
) -> Trajectory:
    """Modal trajectory ``(c_k, ċ_k)`` of the controlled wave equation.

    Args:
        spectral: Spectral data
        control: Boundary control (None for free evolution)
        T: Final time of the default grid
        K: Number of modes (defaults to all)
        times: Time grid (defaults to a uniform grid on [0, T])
        initial: State ``(a, b)`` at t = 0 (defaults to rest)

    Raises:
        UnderresolvedQuadrature: A gridded control is sampled too coarsely
    """
    data = _modes(spectral, K)
    t = _time_grid(times, T)
    w = data.frequencies
    phase = np.outer(t, w)
    c = np.zeros((t.shape[0], data.modes))
    v = np.zeros_like(c)
    if initial is not None:
        state = initial.truncated(data.modes)
        a = np.real(state.a)
        b = np.zeros(data.modes) if state.b is None else np.real(state.b)
        c += a * np.cos(phase) + (b / w) * np.sin(phase)
        v += -a * w * np.sin(phase) + b * np.cos(phase)
    forcing = _forcing(data, control, 1j * w, t, data.alpha)
    c += forcing.imag
    v += w * forcing.real
    return Trajectory(t, c, v, "wave", "spectral")


def heat_forward(
    spectral: SpectralData,
    a: ModalState | None,
    control: BoundaryControl | None,
    tau: float,
    K: int | None = None,
    times: ArrayLike | None = None,
) -> Trajectory:
    """Modal trajectory of the controlled heat equation from ``a``."""
    data = _modes(spectral, K)
    t = _time_grid(times, tau)
    lam = data.eigenvalues
    c = np.zeros((t.shape[0], data.modes), dtype=complex)
    if a is not None:
        c += a.truncated(data.modes).a * np.exp(-np.outer(t, lam))
    c += _forcing(data, control, -lam.astype(complex), t, data.kappa)
    real = (a is None or not np.iscomplexobj(a.a)) and (
        control is None or not control.is_complex
    )
    return Trajectory(t, c.real if real else c, None, "heat", "spectral")


def schrodinger_forward(
    spectral: SpectralData,
    a: ModalState | None,
    control: BoundaryControl | None,
    tau: float,
    K: int | None = None,
    times: ArrayLike | None = None,
) -> Trajectory:
    """Complex modal trajectory of the controlled Schrodinger equation."""
    data = _modes(spectral, K)
    t = _time_grid(times, tau)
    lam = data.eigenvalues
    c = np.zeros((t.shape[0], data.modes), dtype=complex)
    if a is not None:
        c += a.truncated(data.modes).a * np.exp(1j * np.outer(t, lam))
    c += _forcing(data, control, 1j * lam, t, data.kappa)
    return Trajectory(t, c, None, "schrodinger", "spectral")


@dataclass(frozen=True)
class FdtdMesh:
    """Mesh and time step of the leapfrog wave solver.

    Attributes:
        elements: Elements per edge (int rule or mapping as in MeshConfig);
            None uses ``cells_per_unit`` elements per unit optical length
        cells_per_unit: Elements per unit optical length
        courant: Fraction of the stability limit used for the time step
        time_step: Explicit time step (checked against the stability limit)
    """

    elements: int | Mapping[int, int] | None = None
    cells_per_unit: float = 200.0
    courant: float = 0.9
    time_step: float | None = None

    def mesh_config(self, tree: MetricTree) -> MeshConfig:
        elements: int | Mapping[int, int]
        if self.elements is None:
            elements = {
                e: max(2, math.ceil(self.cells_per_unit * tree.optical_lengths[e]))
                for e in tree.edge_ids
            }
        else:
            elements = self.elements
        return MeshConfig(
            modes=1, elements=elements, refinement=1, points_per_wavelength=0.0
        )


def stability_limit(disc: Discretization) -> float:
    """Largest stable leapfrog step ``min √ρ_min h`` over all edges."""
    tree = disc.tree
    return min(
        math.sqrt(tree.edge(e).density.minimum(tree.edge(e).length))
        * float(np.min(np.diff(disc.coordinates[e])))
        for e in tree.edge_ids
    )


def fdtd_wave(
    tree: MetricTree,
    control: BoundaryControl | None,
    T: float,
    mesh: FdtdMesh | None = None,
) -> GridState:
    """Leapfrog solution of the wave equation from rest, state at time T.

    Lumped-mass P1 in space: per-edge second differences with the half-cell
    flux balance at interior vertices. Boundary nodes follow the control.

    Raises:
        CFLViolation: ``mesh.time_step`` exceeds the stability limit
    """
    mesh = mesh or FdtdMesh()
    if not T > 0:
        raise InputError(f"final time must be positive, got {T}")
    if control is not None and control.is_complex:
        raise InputError("the wave solver takes real controls only")
    disc = assemble(tree, mesh.mesh_config(tree), lump=True)
    limit = mesh.courant * stability_limit(disc)
    if mesh.time_step is not None:
        if mesh.time_step > limit:
            raise CFLViolation(
                f"time step {mesh.time_step:.3g} exceeds the limit {limit:.3g}"
            )
        steps = math.ceil(T / mesh.time_step)
    else:
        steps = math.ceil(T / limit)
    dt = T / steps

    free, bnodes = disc.free, disc.boundary_nodes
    inv_mass = 1.0 / disc.mass.diagonal()[free]
    stiffness = disc.stiffness[free]
    stamps = dt * np.arange(steps + 1)
    if control is None:
        boundary = np.zeros((steps + 1, tree.m))
    else:
        boundary = np.real(control.full_values(stamps))

    def accel(u: FloatArray) -> FloatArray:
        return -inv_mass * (stiffness @ u)

    prev = np.zeros(disc.n_nodes)
    prev[bnodes] = boundary[0]
    current = prev.copy()
    current[free] += 0.5 * dt**2 * accel(prev)
    current[bnodes] = boundary[1]
    for n in range(1, steps):
        nxt = np.empty_like(current)
        nxt[free] = 2.0 * current[free] - prev[free] + dt**2 * accel(current)
        nxt[bnodes] = boundary[n + 1]
        prev, current = current, nxt

    velocity = (current - prev) / dt
    velocity[free] += 0.5 * dt * accel(current)
    logger.debug("fdtd: %d steps of %.3g on %d nodes", steps, dt, disc.n_nodes)
    return GridState(
        float(T),
        dict(disc.coordinates),
        disc.to_edges(current),
        disc.to_edges(velocity),
    )


def _on_mesh(
    disc: Discretization, grid: GridState, values: Mapping[int, FloatArray]
) -> FloatArray:
    per_edge = {}
    for edge_id, x in disc.coordinates.items():
        source_x = grid.coordinates[edge_id]
        if source_x.shape == x.shape and np.allclose(source_x, x, rtol=0, atol=1e-12):
            per_edge[edge_id] = values[edge_id]
        else:
            per_edge[edge_id] = np.interp(x, source_x, values[edge_id])
    return disc.from_edges(per_edge)


def project(
    grid: GridState, spectral: SpectralData, K: int | None = None
) -> ModalState:
    """ρ-weighted projection ``a_k = ∫ u φ_k ρ`` onto the first K modes.

    Grid values on a different mesh are interpolated linearly per edge.
    """
    vectors, disc = eigenfunctions(spectral)
    K = spectral.modes if K is None else K
    basis = vectors[:, :K]
    a = basis.T @ (disc.mass @ _on_mesh(disc, grid, grid.values))
    b = None
    if grid.velocity is not None:
        b = basis.T @ (disc.mass @ _on_mesh(disc, grid, grid.velocity))
    return ModalState(a, b)


def lift(modal: ModalState, spectral: SpectralData, time: float = 0.0) -> GridState:
    """Grid function ``Σ a_k φ_k`` on the spectral mesh."""
    vectors, disc = eigenfunctions(spectral)
    basis = vectors[:, : modal.modes]
    values = disc.to_edges(basis @ modal.a)
    velocity = None if modal.b is None else disc.to_edges(basis @ modal.b)
    return GridState(time, dict(disc.coordinates), values, velocity)


def grid_energy(tree: MetricTree, grid: GridState) -> float:
    """Wave energy ``∫ ρ u_t² + ∫ u_x²`` of a grid state."""
    total = 0.0
    for edge_id, x in grid.coordinates.items():
        edge = tree.edge(edge_id)
        u = grid.values[edge_id]
        total += float(np.sum(np.diff(u) ** 2 / np.diff(x)))
        if grid.velocity is not None:
            rho = edge.density.evaluate(x, edge.length)
            kinetic = rho * grid.velocity[edge_id] ** 2
            total += float(np.sum(0.5 * (kinetic[1:] + kinetic[:-1]) * np.diff(x)))
    return total


def modal_energy(state: ModalState, spectral: SpectralData) -> float:
    """Wave energy ``Σ (b_k² + λ_k a_k²)`` of a modal state."""
    lam = spectral.eigenvalues[: state.modes]
    energy = np.sum(lam * np.abs(state.a) ** 2)
    if state.b is not None:
        energy += np.sum(np.abs(state.b) ** 2)
    return float(energy)


def wave_difference(
    state: ModalState, reference: ModalState, spectral: SpectralData
) -> float:
    """Relative ``H × H_{-1}`` distance of two wave states on common modes."""
    modes = min(state.modes, reference.modes)
    ours, theirs = state.truncated(modes), reference.truncated(modes)
    zero = np.zeros(modes)
    gap = ModalState(
        ours.a - theirs.a,
        (zero if ours.b is None else ours.b) - (zero if theirs.b is None else theirs.b),
    )
    scale = wave_state_norm(theirs, spectral)
    error = wave_state_norm(gap, spectral)
    return error / scale if scale > 0 else error

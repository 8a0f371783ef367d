"""Data models shared across tree-control.

Graph specifications, modal states, boundary controls and simulation
results. Heavier behaviour (geometry, spectra, synthesis) lives in the
dedicated modules; these classes only know how to evaluate and export
themselves.
"""

from __future__ import annotations

from collections.abc import Callable, Iterator, Sequence
from dataclasses import dataclass, field, replace
from functools import cached_property
from pathlib import Path
from typing import TYPE_CHECKING, Any

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.integrate import quad, trapezoid
from scipy.interpolate import PchipInterpolator

from tree_control.utils.numeric import exprel_integral

if TYPE_CHECKING:
    import pandas as pd

FloatArray = NDArray[np.float64]

DENSITY_KINDS = ("constant", "linear", "sampled")

# relative tolerance of adaptive quadrature for sampled densities
SAMPLED_RTOL = 1e-10


@dataclass(frozen=True)
class DensityProfile:
    """Density profile of one edge, in mass-per-length units.

    Attributes:
        kind: One of ``constant``, ``linear`` or ``sampled``
        params: ``(c,)`` for constant, ``(p, q)`` for ``p + q x``, sample
            values for sampled profiles
        positions: Sample positions as fractions of the edge (sampled only,
            default uniform)
    """

    kind: str
    params: tuple[float, ...]
    positions: tuple[float, ...] | None = None

    @classmethod
    def constant(cls, value: float) -> DensityProfile:
        return cls("constant", (float(value),))

    @classmethod
    def linear(cls, p: float, q: float) -> DensityProfile:
        return cls("linear", (float(p), float(q)))

    @classmethod
    def sampled(
        cls, values: Sequence[float], positions: Sequence[float] | None = None
    ) -> DensityProfile:
        return cls(
            "sampled",
            tuple(float(v) for v in values),
            None if positions is None else tuple(float(p) for p in positions),
        )

    @property
    def is_piecewise_linear(self) -> bool:
        """True when element integrals of this profile are exact in closed form."""
        return self.kind in ("constant", "linear")

    @cached_property
    def _fractions(self) -> FloatArray:
        if self.positions is not None:
            return np.asarray(self.positions, dtype=float)
        return np.linspace(0.0, 1.0, len(self.params))

    @cached_property
    def _interpolator(self) -> PchipInterpolator:
        return PchipInterpolator(self._fractions, np.asarray(self.params, dtype=float))

    def evaluate(self, x: ArrayLike, length: float) -> FloatArray:
        """Density at local coordinates ``x`` of an edge of the given length."""
        x = np.asarray(x, dtype=float)
        if self.kind == "constant":
            return np.full_like(x, self.params[0])
        if self.kind == "linear":
            p, q = self.params
            return np.asarray(p + q * x)
        return np.asarray(self._interpolator(x / length))

    def minimum(self, length: float) -> float:
        """Smallest density value on the edge."""
        if self.kind == "constant":
            return self.params[0]
        if self.kind == "linear":
            p, q = self.params
            return min(p, p + q * length)
        # monotone cubic interpolation does not overshoot the samples
        return min(self.params)

    def sqrt_integral(self, a: float, b: float, length: float) -> float:
        """Optical length between local coordinates ``a <= b``."""
        if self.kind == "constant":
            return float(np.sqrt(self.params[0]) * (b - a))
        if self.kind == "linear":
            p, q = self.params
            if q == 0.0:
                return float(np.sqrt(p) * (b - a))
            return float(2.0 / (3.0 * q) * ((p + q * b) ** 1.5 - (p + q * a) ** 1.5))
        value, _ = quad(
            lambda x: np.sqrt(self._interpolator(x / length)),
            a,
            b,
            epsabs=0.0,
            epsrel=SAMPLED_RTOL,
            limit=200,
        )
        return float(value)

    def scaled(self, factor: float) -> DensityProfile:
        """Profile multiplied by ``factor``."""
        return replace(self, params=tuple(factor * v for v in self.params))

    def to_dict(self) -> dict[str, Any]:
        """Convert to the graph-file representation."""
        if self.kind == "sampled":
            params: Any = {"values": list(self.params)}
            if self.positions is not None:
                params["positions"] = list(self.positions)
            return {"type": self.kind, "params": params}
        return {"type": self.kind, "params": list(self.params)}


@dataclass(frozen=True)
class EdgeSpec:
    """An edge of the graph with its local coordinate running tail -> head.

    Attributes:
        id: Edge identifier
        tail: Vertex at local coordinate 0
        head: Vertex at local coordinate ``length``
        length: Edge length in length units
        density: Density profile along the edge
    """

    id: int
    tail: int
    head: int
    length: float
    density: DensityProfile = field(
        default_factory=lambda: DensityProfile.constant(1.0)
    )

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "tail": self.tail,
            "head": self.head,
            "length": self.length,
            "density": self.density.to_dict(),
        }


@dataclass(frozen=True)
class GraphSpec:
    """Unvalidated description of a metric graph.

    Attributes:
        vertices: Vertex identifiers
        edges: Edge specifications
    """

    vertices: tuple[int, ...]
    edges: tuple[EdgeSpec, ...]

    def to_dict(self) -> dict[str, Any]:
        """Convert to the graph-file representation."""
        return {
            "vertices": list(self.vertices),
            "edges": [edge.to_dict() for edge in self.edges],
        }


@dataclass(frozen=True)
class GraphPoint:
    """A point on the tree: an edge and a local coordinate on it."""

    edge: int
    x: float


@dataclass(frozen=True, eq=False)
class ModalState:
    """A state expanded in the Dirichlet eigenfunctions.

    Attributes:
        a: Position coefficients ``a_k`` (real, or complex for Schrodinger)
        b: Velocity coefficients ``b_k`` (wave states only)
    """

    a: NDArray[Any]
    b: NDArray[Any] | None = None

    @property
    def modes(self) -> int:
        return int(self.a.shape[0])

    @classmethod
    def basis(cls, k: int, modes: int, velocity: bool = False) -> ModalState:
        """The state ``e_k`` (0-based) with zero velocity when requested."""
        a = np.zeros(modes)
        a[k] = 1.0
        return cls(a, np.zeros(modes) if velocity else None)

    @classmethod
    def zero(cls, modes: int, velocity: bool = False) -> ModalState:
        return cls(np.zeros(modes), np.zeros(modes) if velocity else None)

    def truncated(self, modes: int) -> ModalState:
        """Keep the first ``modes`` coefficients, zero padding if needed."""

        def fit(values: NDArray[Any]) -> NDArray[Any]:
            out = np.zeros(modes, dtype=values.dtype)
            n = min(modes, values.shape[0])
            out[:n] = values[:n]
            return out

        return ModalState(fit(self.a), None if self.b is None else fit(self.b))

    def __add__(self, other: ModalState) -> ModalState:
        b = None
        if self.b is not None and other.b is not None:
            b = self.b + other.b
        return ModalState(self.a + other.a, b)

    def to_dict(self) -> dict[str, Any]:
        data: dict[str, Any] = {"a": encode_array(self.a)}
        if self.b is not None:
            data["b"] = encode_array(self.b)
        return data


def encode_array(values: NDArray[Any]) -> Any:
    if np.iscomplexobj(values):
        return {"re": values.real.tolist(), "im": values.imag.tolist()}
    return values.tolist()


@dataclass(frozen=True, eq=False)
class ControlExpansion:
    """Exact representation ``f(γ, s) = Σ_j w_j β_j(γ) exp(z_j (H - s))``.

    Attributes:
        weights: Complex term weights ``w_j``
        amplitudes: Channel amplitudes ``β_j(γ)``, shape (terms, channels)
        exponents: Complex exponents ``z_j``
        horizon: Reference time ``H``
    """

    weights: NDArray[np.complex128]
    amplitudes: FloatArray
    exponents: NDArray[np.complex128]
    horizon: float

    def values(self, s: ArrayLike) -> NDArray[np.complex128]:
        """Channel values at times ``s``, shape (len(s), channels)."""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        phases = np.exp(np.outer(self.horizon - s, self.exponents)) * self.weights
        return np.asarray(phases @ self.amplitudes)

    def convolve(
        self, rates: ArrayLike, t: float, stop: float
    ) -> NDArray[np.complex128]:
        """``∫_0^{min(t, stop)} exp(μ_k (t - s)) f(γ, s) ds`` for each rate μ_k.

        Returns shape (len(rates), channels).
        """
        mu = np.asarray(rates, dtype=complex)[:, None]
        z = self.exponents[None, :]
        end = min(t, stop, self.horizon)
        if end <= 0.0:
            return np.zeros((mu.shape[0], self.amplitudes.shape[1]), dtype=complex)
        kernel = (
            np.exp(mu * (t - end))
            * np.exp(z * (self.horizon - end))
            * exprel_integral(mu + z, end)
            * self.weights[None, :]
        )
        return np.asarray(kernel @ self.amplitudes)

    def norm_squared(self, stop: float) -> float:
        """Squared L2 norm over ``[0, min(stop, H)]``."""
        end = min(stop, self.horizon)
        if end <= 0.0:
            return 0.0
        zeta = self.exponents[:, None] + np.conj(self.exponents)[None, :]
        cross = np.exp(zeta * (self.horizon - end)) * exprel_integral(zeta, end)
        overlap = self.amplitudes @ self.amplitudes.T
        w = self.weights
        total = np.sum(np.outer(w, np.conj(w)) * overlap * cross)
        return float(max(total.real, 0.0))


@dataclass(frozen=True, eq=False)
class BoundaryControl:
    """A Dirichlet boundary control on ``[0, horizon]``.

    A control is either an exact expansion over a family of exponentials
    (what synthesis produces) or a uniform grid of samples interpolated
    linearly. With neither it is the zero control.

    Attributes:
        horizon: Control horizon T (or τ)
        boundary: All boundary vertices in the global boundary order
        channels: Controlled vertices, a subsequence of ``boundary``
        is_complex: True for complex-valued (Schrodinger) controls
        family: Name of the family the coefficients refer to
        coefficients: Coefficients over that family at reversed time
        expansion: Exact exponential expansion
        sample_times: Sample grid for gridded controls
        sample_values: Samples, shape (len(sample_times), channels)
        stop: The control vanishes after this time (defaults to horizon)
        max_frequency: Fastest oscillation in the control, used for sampling
    """

    horizon: float
    boundary: tuple[int, ...]
    channels: tuple[int, ...]
    is_complex: bool = False
    family: str | None = None
    coefficients: NDArray[Any] | None = None
    expansion: ControlExpansion | None = None
    sample_times: FloatArray | None = None
    sample_values: NDArray[Any] | None = None
    stop: float | None = None
    max_frequency: float | None = None

    @classmethod
    def zero(
        cls,
        boundary: Sequence[int],
        channels: Sequence[int],
        horizon: float,
        is_complex: bool = False,
    ) -> BoundaryControl:
        return cls(horizon, tuple(boundary), tuple(channels), is_complex)

    @classmethod
    def from_function(
        cls,
        func: Callable[[FloatArray], NDArray[Any]],
        boundary: Sequence[int],
        channels: Sequence[int],
        horizon: float,
        samples: int = 2001,
        is_complex: bool = False,
    ) -> BoundaryControl:
        """Sample ``func(t) -> (len(t), channels)`` on a uniform grid."""
        times = np.linspace(0.0, horizon, samples)
        values = np.asarray(func(times))
        if values.ndim == 1:
            values = values[:, None]
        return cls(
            horizon,
            tuple(boundary),
            tuple(channels),
            is_complex,
            sample_times=times,
            sample_values=values if is_complex else values.real.astype(float),
        )

    @property
    def excluded(self) -> tuple[int, ...]:
        return tuple(v for v in self.boundary if v not in self.channels)

    @property
    def is_zero(self) -> bool:
        return self.expansion is None and self.sample_times is None

    @property
    def end(self) -> float:
        """Time after which the control vanishes."""
        end = self.horizon if self.stop is None else min(self.stop, self.horizon)
        if self.expansion is None and self.sample_times is not None:
            end = min(end, float(self.sample_times[-1]))
        return end

    def values(self, t: ArrayLike) -> NDArray[Any]:
        """Active channel values at times ``t``, shape (len(t), channels)."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        dtype = complex if self.is_complex else float
        out = np.zeros((t.shape[0], len(self.channels)), dtype=dtype)
        inside = (t >= 0.0) & (t <= self.end)
        if not np.any(inside) or self.is_zero:
            return out
        if self.expansion is not None:
            raw = self.expansion.values(t[inside])
        else:
            assert self.sample_times is not None and self.sample_values is not None
            raw = np.column_stack(
                [
                    _interp(t[inside], self.sample_times, self.sample_values[:, c])
                    for c in range(len(self.channels))
                ]
            )
        out[inside] = raw if self.is_complex else np.real(raw)
        return out

    def full_values(self, t: ArrayLike) -> NDArray[Any]:
        """Values on every boundary vertex, zero on excluded ones."""
        active = self.values(t)
        out = np.zeros((active.shape[0], len(self.boundary)), dtype=active.dtype)
        for c, vertex in enumerate(self.channels):
            out[:, self.boundary.index(vertex)] = active[:, c]
        return out

    def truncated(self, stop: float) -> BoundaryControl:
        """The same control switched off after ``stop``."""
        return replace(self, stop=min(stop, self.end))

    def norm(self) -> float:
        """L2 norm over ``[0, horizon]`` summed over channels."""
        if self.is_zero:
            return 0.0
        if self.expansion is not None:
            return float(np.sqrt(self.expansion.norm_squared(self.end)))
        assert self.sample_times is not None
        times = self.sample_times[self.sample_times <= self.end]
        squares = np.sum(np.abs(self.values(times)) ** 2, axis=1)
        return float(np.sqrt(trapezoid(squares, times)))

    def sample_grid(self, per_period: int = 40) -> FloatArray:
        """Uniform export grid with ``per_period`` samples per fastest period."""
        if self.sample_times is not None and self.expansion is None:
            return self.sample_times
        if not self.max_frequency:
            return np.linspace(0.0, self.horizon, 201)
        step = 2.0 * np.pi / self.max_frequency / per_period
        count = max(int(np.ceil(self.horizon / step)), 1)
        return np.linspace(0.0, self.horizon, count + 1)

    def to_csv(self, path: str | Path, per_period: int = 40) -> None:
        """Export samples to CSV with one column per boundary vertex.

        Args:
            path: Output file path
            per_period: Samples per period of the fastest mode
        """
        from tree_control.exporters.csv import export_control_csv

        export_control_csv(self, Path(path), per_period)


def _interp(t: FloatArray, xp: FloatArray, fp: NDArray[Any]) -> NDArray[Any]:
    if np.iscomplexobj(fp):
        return np.interp(t, xp, fp.real) + 1j * np.interp(t, xp, fp.imag)
    return np.interp(t, xp, fp)


@dataclass(eq=False)
class Trajectory:
    """Modal coefficients of a simulated state over a time grid.

    Attributes:
        times: Strictly increasing time grid
        coefficients: ``c_k(t)``, shape (len(times), K)
        velocities: ``ċ_k(t)`` for the wave equation, else None
        equation: ``wave``, ``heat`` or ``schrodinger``
        provenance: ``spectral`` or ``fdtd``
    """

    times: FloatArray
    coefficients: NDArray[Any]
    velocities: NDArray[Any] | None = None
    equation: str = "wave"
    provenance: str = "spectral"

    def __len__(self) -> int:
        return int(self.times.shape[0])

    def __iter__(self) -> Iterator[ModalState]:
        for i in range(len(self)):
            yield self.state_at(i)

    @property
    def modes(self) -> int:
        return int(self.coefficients.shape[1])

    def state_at(self, index: int) -> ModalState:
        b = None if self.velocities is None else self.velocities[index]
        return ModalState(self.coefficients[index], b)

    def final_state(self) -> ModalState:
        return self.state_at(-1)

    def to_csv(self, path: str | Path) -> None:
        """Export to CSV with columns t, c_1..c_K and velocities if present.

        Args:
            path: Output file path
        """
        from tree_control.exporters.csv import export_trajectory_csv

        export_trajectory_csv(self, Path(path))

    def to_dataframe(self) -> pd.DataFrame:
        """Convert trajectory to a pandas DataFrame.

        Requires pandas to be installed: pip install tree-control[pandas]

        Returns:
            DataFrame indexed by time with one column per coefficient
        """
        try:
            import pandas as pd
        except ImportError as e:
            raise ImportError(
                "pandas is required for to_dataframe(). "
                "Install with: pip install tree-control[pandas]"
            ) from e

        from tree_control.exporters.csv import trajectory_table

        columns, rows = trajectory_table(self)
        frame = pd.DataFrame(rows[:, 1:], index=self.times, columns=columns[1:])
        frame.index.name = columns[0]
        return frame


@dataclass(eq=False)
class GridState:
    """Nodal values of a grid function on every edge at one time.

    Attributes:
        time: Time stamp
        coordinates: Local node coordinates per edge
        values: Nodal values per edge
        velocity: Nodal time derivative per edge, if known
    """

    time: float
    coordinates: dict[int, FloatArray]
    values: dict[int, FloatArray]
    velocity: dict[int, FloatArray] | None = None

    def to_csv(self, path: str | Path) -> None:
        """Export to CSV with columns edge, x, value and velocity.

        Args:
            path: Output file path
        """
        from tree_control.exporters.csv import export_grid_csv

        export_grid_csv(self, Path(path))

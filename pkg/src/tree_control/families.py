"""Vector exponential families and their Gram matrices.

A family member is a boundary amplitude vector times a scalar exponential
in time. Gram matrices use ``⟨u, v⟩ = ∫ u(t) · conj(v(t)) dt`` and are
assembled from closed-form integrals only.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, replace
from enum import Enum
from functools import cached_property
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray

from tree_control.errors import (
    IndexOutOfRange,
    InconsistentChannels,
    InputError,
    NumericallySingularWarning,
)
from tree_control.spectral import SpectralData
from tree_control.utils.numeric import (
    cos_integral,
    decay_integral,
    exp_integral,
    sin_integral,
)

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]


class FamilyKind(str, Enum):
    """Kinds of exponential families.

    ``WAVE`` stacks the sine block before the cosine block and ``EXP`` the
    ``e^{+iωt}`` block before ``e^{-iωt}``; both have 2K members.
    """

    SIN = "sin"
    COS = "cos"
    WAVE = "wave"
    EXP = "exp"
    PARABOLIC = "parabolic"
    SCHRODINGER = "schrodinger"

    @property
    def doubled(self) -> bool:
        return self in (FamilyKind.WAVE, FamilyKind.EXP)


@dataclass(frozen=True, eq=False)
class FamilySpec:
    """An exponential family on ``[0, horizon]``.

    Attributes:
        kind: Family kind
        eigenvalues: λ_k; frequencies are √λ_k for the trigonometric kinds
        amplitudes: Boundary vectors α_k (or α'_k), shape (K, channels)
        horizon: Interval length T or τ
        channels: Boundary vertices labelling the amplitude columns
    """

    kind: FamilyKind
    eigenvalues: FloatArray
    amplitudes: FloatArray
    horizon: float
    channels: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.amplitudes.ndim != 2 or (
            self.amplitudes.shape[0] != self.eigenvalues.shape[0]
        ):
            raise InconsistentChannels(
                f"{self.eigenvalues.shape[0]} eigenvalues but amplitudes of shape "
                f"{self.amplitudes.shape}"
            )
        if self.channels and len(self.channels) != self.amplitudes.shape[1]:
            raise InconsistentChannels(
                f"{len(self.channels)} channels for {self.amplitudes.shape[1]} columns"
            )
        if not self.horizon > 0:
            raise InputError(f"horizon must be positive, got {self.horizon}")

    @classmethod
    def from_spectral(
        cls,
        spectral: SpectralData,
        kind: FamilyKind,
        horizon: float,
        modes: int | None = None,
        exclude: int | None = None,
    ) -> FamilySpec:
        """Build a family from spectral data, dropping ``exclude``'s channel."""
        data = spectral if modes is None else spectral.truncated(modes)
        if exclude is not None and exclude not in data.boundary:
            raise InconsistentChannels(
                f"excluded vertex {exclude} is not a boundary vertex"
            )
        channels = tuple(v for v in data.boundary if v != exclude)
        columns = data.channel_index(channels)
        return cls(
            FamilyKind(kind),
            data.eigenvalues.copy(),
            data.alpha[:, columns].copy(),
            float(horizon),
            channels,
        )

    @property
    def modes(self) -> int:
        return int(self.eigenvalues.shape[0])

    @property
    def size(self) -> int:
        """Number of members."""
        return 2 * self.modes if self.kind.doubled else self.modes

    @property
    def is_complex(self) -> bool:
        return self.kind in (FamilyKind.EXP, FamilyKind.SCHRODINGER)

    @property
    def rates(self) -> FloatArray:
        """Frequency or decay rate of each mode."""
        if self.kind in (FamilyKind.PARABOLIC, FamilyKind.SCHRODINGER):
            return self.eigenvalues
        return np.sqrt(self.eigenvalues)

    def truncated(
        self, modes: int | None = None, horizon: float | None = None
    ) -> FamilySpec:
        modes = self.modes if modes is None else modes
        if not 1 <= modes <= self.modes:
            raise InconsistentChannels(
                f"cannot take {modes} modes from a family of {self.modes}"
            )
        return replace(
            self,
            eigenvalues=self.eigenvalues[:modes],
            amplitudes=self.amplitudes[:modes],
            horizon=self.horizon if horizon is None else float(horizon),
        )

    def member_amplitudes(self) -> FloatArray:
        """Amplitude vector of every member, shape (size, channels)."""
        if self.kind.doubled:
            return np.vstack([self.amplitudes, self.amplitudes])
        return self.amplitudes

    def scalar_values(self, t: ArrayLike) -> NDArray[Any]:
        """Scalar time factor of every member, shape (len(t), size)."""
        t = np.atleast_1d(np.asarray(t, dtype=float))[:, None]
        r = self.rates[None, :]
        if self.kind is FamilyKind.SIN:
            return np.sin(r * t)
        if self.kind is FamilyKind.COS:
            return np.cos(r * t)
        if self.kind is FamilyKind.WAVE:
            return np.hstack([np.sin(r * t), np.cos(r * t)])
        if self.kind is FamilyKind.EXP:
            return np.hstack([np.exp(1j * r * t), np.exp(-1j * r * t)])
        if self.kind is FamilyKind.PARABOLIC:
            return np.exp(-r * t)
        return np.exp(1j * r * t)


def eval_member(fam: FamilySpec, k: int, t: ArrayLike) -> NDArray[Any]:
    """Value of member ``k`` (0-based) at time(s) ``t``.

    Returns:
        Channel vector for scalar ``t``, else shape (len(t), channels)

    Raises:
        IndexOutOfRange: ``k`` is not a member index
    """
    if not 0 <= k < fam.size:
        raise IndexOutOfRange(f"member {k} outside family of {fam.size}")
    scalar = np.ndim(t) == 0
    values = fam.scalar_values(t)[:, k][:, None] * fam.member_amplitudes()[k][None, :]
    return values[0] if scalar else values


def member_values(fam: FamilySpec, t: ArrayLike) -> NDArray[Any]:
    """All members at times ``t``, shape (len(t), size, channels)."""
    return fam.scalar_values(t)[:, :, None] * fam.member_amplitudes()[None, :, :]


@dataclass(frozen=True, eq=False)
class Conditioning:
    """Spectral extremes of a Gram matrix."""

    sigma_min: float
    sigma_max: float
    condition: float

    def to_dict(self) -> dict[str, float]:
        return {
            "sigma_min": self.sigma_min,
            "sigma_max": self.sigma_max,
            "condition": self.condition,
        }


@dataclass(frozen=True, eq=False)
class GramMatrix:
    """Gram matrix of a family on ``[start, start + horizon]``.

    Attributes:
        matrix: Hermitian positive semidefinite matrix
        kind: Kind of the family it came from
        modes: Number of modes K
        horizon: Interval length
        start: Interval start
    """

    matrix: NDArray[Any]
    kind: FamilyKind
    modes: int
    horizon: float
    start: float = 0.0

    @property
    def size(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def is_complex(self) -> bool:
        return bool(np.iscomplexobj(self.matrix))

    @cached_property
    def conditioning(self) -> Conditioning:
        return sigma_min(self.matrix)


def _trig_blocks(
    w: FloatArray, start: float, length: float
) -> tuple[FloatArray, FloatArray, FloatArray]:
    # ∫ sin·sin, ∫ sin·cos (row sin), ∫ cos·cos over the interval
    diff = w[:, None] - w[None, :]
    total = w[:, None] + w[None, :]
    ss = 0.5 * (cos_integral(diff, start, length) - cos_integral(total, start, length))
    sc = 0.5 * (sin_integral(total, start, length) + sin_integral(diff, start, length))
    cc = 0.5 * (cos_integral(diff, start, length) + cos_integral(total, start, length))
    return ss, sc, cc


def _scalar_gram(fam: FamilySpec, start: float, length: float) -> NDArray[Any]:
    r = fam.rates
    kind = fam.kind
    if kind in (FamilyKind.SIN, FamilyKind.COS, FamilyKind.WAVE):
        ss, sc, cc = _trig_blocks(r, start, length)
        if kind is FamilyKind.SIN:
            return ss
        if kind is FamilyKind.COS:
            return cc
        return np.block([[ss, sc], [sc.T, cc]])
    if kind is FamilyKind.EXP:
        diff = r[:, None] - r[None, :]
        total = r[:, None] + r[None, :]
        plus = exp_integral(diff, start, length)
        cross = exp_integral(total, start, length)
        return np.block([[plus, cross], [np.conj(cross), np.conj(plus)]])
    if kind is FamilyKind.PARABOLIC:
        return decay_integral(r[:, None] + r[None, :], start, length)
    return exp_integral(r[:, None] - r[None, :], start, length)


def gram(
    fam: FamilySpec,
    modes: int | None = None,
    horizon: float | None = None,
    start: float = 0.0,
) -> GramMatrix:
    """Closed-form Gram matrix ``G_jk = ⟨member_j, member_k⟩``.

    Args:
        fam: The family
        modes: Truncate to the first ``modes`` modes
        horizon: Interval length (defaults to the family horizon)
        start: Interval start

    Returns:
        The Gram matrix on ``[start, start + horizon]``
    """
    fam = fam.truncated(modes, horizon)
    amplitudes = fam.member_amplitudes()
    overlap = amplitudes @ amplitudes.T
    matrix = overlap * _scalar_gram(fam, start, fam.horizon)
    matrix = 0.5 * (matrix + matrix.conj().T)
    return GramMatrix(matrix, fam.kind, fam.modes, fam.horizon, start)


def sigma_min(g: GramMatrix | ArrayLike) -> Conditioning:
    """Smallest and largest eigenvalue and the condition number."""
    matrix = g.matrix if isinstance(g, GramMatrix) else np.asarray(g)
    values = np.linalg.eigvalsh(matrix)
    low, high = float(values[0]), float(values[-1])
    condition = high / low if low > 0 else float("inf")
    return Conditioning(low, high, condition)


@dataclass(frozen=True, eq=False)
class BiorthogonalSystem:
    """Coefficients of the family biorthogonal to a truncated family.

    ``Q'_n = Σ_k coefficients[k, n] · member_k`` satisfies
    ``⟨member_j, Q'_n⟩ = δ_jn`` up to ``defect``.

    Attributes:
        coefficients: ``conj(G^{-1})`` (pseudo-inverse when cut off)
        defect: Achieved ``max |⟨member_j, Q'_n⟩ - δ_jn|``
        rank: Number of Gram eigenvalues kept
        norms: ``‖Q'_n‖``
        singular: True when the spectral cut-off removed eigenvalues
        gram: The Gram matrix it was built from
    """

    coefficients: NDArray[Any]
    defect: float
    rank: int
    norms: FloatArray
    singular: bool
    gram: GramMatrix


def solve_cutoff(matrix: NDArray[Any]) -> tuple[NDArray[Any], int]:
    """Pseudo-inverse with eigenvalue cut-off ``n · ε · σ_max``.

    Returns:
        The (pseudo-)inverse and the number of eigenvalues kept
    """
    values, vectors = np.linalg.eigh(matrix)
    cutoff = matrix.shape[0] * np.finfo(float).eps * max(values[-1], 0.0)
    keep = values > cutoff
    kept = vectors[:, keep]
    inverse = (kept / values[keep]) @ kept.conj().T
    return inverse, int(np.count_nonzero(keep))


def biorthogonal(
    fam: FamilySpec, modes: int | None = None, horizon: float | None = None
) -> BiorthogonalSystem:
    """Biorthogonal family of a truncated exponential family.

    Emits :class:`NumericallySingularWarning` when the Gram matrix is
    singular at working precision and falls back to the pseudo-inverse.
    """
    g = gram(fam, modes, horizon)
    inverse, rank = solve_cutoff(g.matrix)
    singular = rank < g.size
    if singular:
        message = (
            f"{fam.kind.value} Gram matrix of size {g.size} is numerically "
            f"singular (rank {rank}); using the pseudo-inverse"
        )
        logger.info(message)
        warnings.warn(message, NumericallySingularWarning, stacklevel=2)
    coefficients = np.conj(inverse)
    pairing = g.matrix @ np.conj(coefficients)
    defect = float(np.max(np.abs(pairing - np.eye(g.size))))
    norms_sq = np.real(np.diag(coefficients.T @ g.matrix @ np.conj(coefficients)))
    norms = np.sqrt(np.clip(norms_sq, 0.0, None))
    return BiorthogonalSystem(coefficients, defect, rank, norms, singular, g)


@dataclass(frozen=True, eq=False)
class GrowthFit:
    """Least-squares fit ``log ‖Q'_k‖ ≈ intercept + slope · √λ_k``.

    Attributes:
        slope: Fitted exponent β
        intercept: Fitted log C
        residual: Root-mean-square residual of the linear fit
        curvature: Quadratic coefficient of a second-degree fit (0 below 3 modes)
        single_exponential: The quadratic term stays below the linear one
            over the fitted range
        frequencies: √λ_k
        log_norms: log ‖Q'_k‖
        hyperbolic_norms: ‖E'_k‖ of the hyperbolic family, if requested
        ratios: ‖Q'_k‖ / ‖E'_k‖, if requested
    """

    slope: float
    intercept: float
    residual: float
    curvature: float
    single_exponential: bool
    frequencies: FloatArray
    log_norms: FloatArray
    hyperbolic_norms: FloatArray | None = None
    ratios: FloatArray | None = None

    def to_dict(self) -> dict[str, Any]:
        data: dict[str, Any] = {
            "slope": self.slope,
            "intercept": self.intercept,
            "residual": self.residual,
            "curvature": self.curvature,
            "single_exponential": self.single_exponential,
            "frequencies": self.frequencies.tolist(),
            "log_norms": self.log_norms.tolist(),
        }
        if self.hyperbolic_norms is not None and self.ratios is not None:
            data["hyperbolic_norms"] = self.hyperbolic_norms.tolist()
            data["ratios"] = self.ratios.tolist()
        return data


def biorth_growth_fit(
    fam: FamilySpec,
    modes: int | None = None,
    horizon: float | None = None,
    hyperbolic: FamilySpec | None = None,
) -> GrowthFit:
    """Fit the growth of the parabolic biorthogonal norms in √λ_k.

    Args:
        fam: A PARABOLIC family
        modes: Number of modes fitted
        horizon: Control time τ
        hyperbolic: EXP family (usually on ``[0, d(Ω)]``) whose ``e^{+iωt}``
            biorthogonal norms are reported alongside

    Raises:
        InputError: ``fam`` is not parabolic or has a single mode
    """
    if fam.kind is not FamilyKind.PARABOLIC:
        raise InputError(f"growth fit needs a parabolic family, got {fam.kind.value}")
    system = biorthogonal(fam, modes, horizon)
    k = system.gram.modes
    if k < 2:
        raise InputError("growth fit needs at least two modes")
    x = np.sqrt(fam.eigenvalues[:k])
    y = np.log(system.norms)
    slope, intercept = np.polyfit(x, y, 1)
    residual = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    curvature = 0.0
    if k >= 3:
        curvature = float(np.polyfit(x, y, 2)[0])
    span = float(x[-1] - x[0])
    single = abs(curvature) * span <= abs(slope) + residual

    hyper_norms = ratios = None
    if hyperbolic is not None:
        hyper = biorthogonal(hyperbolic, k)
        hyper_norms = hyper.norms[:k]
        ratios = system.norms / hyper_norms
    return GrowthFit(
        float(slope),
        float(intercept),
        residual,
        curvature,
        bool(single),
        x,
        y,
        hyper_norms,
        ratios,
    )


def extension_orthogonality(spectral: SpectralData, K: int, half_width: float) -> float:
    """Largest inner product of odd sine and even cosine extensions.

    The sine members extended oddly and the cosine members extended evenly
    to ``[-T*, T*]`` are orthogonal; each integral is evaluated as the sum of
    its two half-interval closed forms.
    """
    data = spectral.truncated(K)
    w = data.frequencies
    total = w[:, None] + w[None, :]
    diff = w[:, None] - w[None, :]

    def sin_cos(start: float) -> FloatArray:
        return 0.5 * (
            sin_integral(total, start, half_width)
            + sin_integral(diff, start, half_width)
        )

    integral = sin_cos(-half_width) + sin_cos(0.0)
    overlap = data.alpha @ data.alpha.T
    return float(np.max(np.abs(overlap * integral)))


def shift_congruence_defect(fam: FamilySpec, shift: float) -> float:
    """Relative defect of ``G(shift) = D G(0) D*`` for a diagonal phase D.

    Shifting the interval by ``shift`` multiplies every member by a constant
    (a unimodular phase for oscillatory kinds, a decay factor for PARABOLIC).

    Raises:
        InputError: SIN, COS and WAVE members are not rescaled by a shift
    """
    r = fam.rates
    if fam.kind is FamilyKind.EXP:
        factors = np.exp(1j * shift * np.concatenate([r, -r]))
    elif fam.kind is FamilyKind.SCHRODINGER:
        factors = np.exp(1j * shift * r)
    elif fam.kind is FamilyKind.PARABOLIC:
        factors = np.exp(-shift * r)
    else:
        raise InputError(f"{fam.kind.value} members are not rescaled by a shift")
    base = gram(fam).matrix
    shifted = gram(fam, start=shift).matrix
    expected = factors[:, None] * base * np.conj(factors)[None, :]
    return float(np.max(np.abs(shifted - expected)) / np.max(np.abs(base)))

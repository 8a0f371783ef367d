"""Boundary control synthesis by the moment method.

Every problem is reduced to a truncated moment problem in reversed time
``g(s) = f(T - s)``:

    wave:         ⟨g, S_k α_k⟩ = a_k,   ⟨g, C_k α_k⟩ = b_k / √λ_k
    heat:         ⟨g, Q_k α_k⟩ = -a_k e^{-λ_k τ} / √λ_k
    Schrodinger:  ∫ g · D_k α_k = -a_k e^{iλ_k τ} / √λ_k

and the minimal-norm solution is taken from the span of the family (its
conjugate for Schrodinger) by a Gram solve.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import numpy as np
from numpy.typing import NDArray

from tree_control.errors import (
    InconsistentChannels,
    InputError,
    NumericallySingularError,
)
from tree_control.evolution import heat_forward, schrodinger_forward, wave_forward
from tree_control.families import (
    FamilyKind,
    FamilySpec,
    GramMatrix,
    gram,
    solve_cutoff,
)
from tree_control.graph import MetricTree, eccentricity, optical_diameter
from tree_control.models import (
    BoundaryControl,
    ControlExpansion,
    ModalState,
    encode_array,
)
from tree_control.spectral import SpectralData, modal_norm

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]

DEFAULT_HEAT_HORIZON = 0.5
DEFAULT_SCHRODINGER_HORIZON = 0.1
# wave moments are guaranteed to 1e-8 only below this Gram condition
WAVE_MAX_CONDITION = 1e10
# reports carry a warning above this Gram condition
WARN_CONDITION = 1e8


class Equation(str, Enum):
    WAVE = "wave"
    HEAT = "heat"
    SCHRODINGER = "schrodinger"

    @property
    def family(self) -> FamilyKind:
        return {
            Equation.WAVE: FamilyKind.WAVE,
            Equation.HEAT: FamilyKind.PARABOLIC,
            Equation.SCHRODINGER: FamilyKind.SCHRODINGER,
        }[self]


def default_horizon(
    tree: MetricTree, equation: Equation, exclude: int | None = None
) -> float:
    """Control time used when none is given.

    The wave equation needs ``d(Ω)`` with the full boundary and
    ``2 d_1(γ1)`` with γ1 uncontrolled; the parabolic and Schrodinger
    systems are controllable in any time.
    """
    equation = Equation(equation)
    if equation is Equation.WAVE:
        if exclude is None:
            return optical_diameter(tree)[0]
        return 2.0 * eccentricity(tree, exclude)
    if equation is Equation.HEAT:
        return DEFAULT_HEAT_HORIZON
    return DEFAULT_SCHRODINGER_HORIZON


@dataclass(frozen=True, eq=False)
class ControlProblem:
    """A truncated control problem.

    Attributes:
        equation: Which system is controlled
        spectral: Spectral data with at least ``check_modes`` modes
        horizon: Control time T (wave) or τ
        state: Wave target ``(a, b)`` reached from rest, or the initial
            heat/Schrodinger state to be steered to zero
        modes: Number of moment equations K (defaults to all modes)
        exclude: Uncontrolled boundary vertex γ1
        check_modes: Modes used for residuals and the tail report
        max_condition: Refuse Gram matrices above this condition number
            (None uses the equation default, ``math.inf`` disables)
    """

    equation: Equation
    spectral: SpectralData
    horizon: float
    state: ModalState
    modes: int | None = None
    exclude: int | None = None
    check_modes: int | None = None
    max_condition: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "equation", Equation(self.equation))
        if not (math.isfinite(self.horizon) and self.horizon > 0):
            raise InputError(f"horizon must be positive, got {self.horizon}")
        if not 1 <= self.K <= self.spectral.modes:
            raise InconsistentChannels(
                f"{self.K} moment equations from {self.spectral.modes} modes"
            )
        if not self.K <= self.K_check <= self.spectral.modes:
            raise InconsistentChannels(
                f"check modes {self.K_check} must lie between {self.K} "
                f"and {self.spectral.modes}"
            )
        if self.exclude is not None and self.exclude not in self.spectral.boundary:
            raise InconsistentChannels(
                f"excluded vertex {self.exclude} is not a boundary vertex"
            )

    @property
    def K(self) -> int:
        return self.spectral.modes if self.modes is None else self.modes

    @property
    def K_check(self) -> int:
        return self.spectral.modes if self.check_modes is None else self.check_modes

    @property
    def channels(self) -> tuple[int, ...]:
        return tuple(v for v in self.spectral.boundary if v != self.exclude)

    @property
    def condition_limit(self) -> float | None:
        if self.max_condition is not None:
            return self.max_condition
        return WAVE_MAX_CONDITION if self.equation is Equation.WAVE else None

    def family(self, modes: int | None = None) -> FamilySpec:
        return FamilySpec.from_spectral(
            self.spectral,
            self.equation.family,
            self.horizon,
            self.K if modes is None else modes,
            self.exclude,
        )


@dataclass(frozen=True, eq=False)
class SynthesisReport:
    """What a synthesized control achieves.

    Residuals are ``target - achieved`` in moment scaling (positions then
    velocities for the wave equation).

    Attributes:
        equation: Controlled system
        modes: Moment equations K
        horizon: Control time
        channels: Controlled boundary vertices
        residuals: Residuals of the K constrained moments (2K for the wave)
        relative_residual: ``‖residuals‖ / ‖targets‖``
        tail_moments: Residuals of modes ``K < k <= K_check``
        tail_bound: Cauchy-Schwarz bound on each tail residual
        condition: Gram condition number
        sigma_min: Smallest Gram eigenvalue
        rank: Gram eigenvalues kept by the cut-off
        control_norm: L2 norm of the control
        final_error: Relative distance from the goal over K_check modes
        spill_over: Part of final_error carried by the unconstrained modes
        warnings: Accuracy warnings
    """

    equation: Equation
    modes: int
    horizon: float
    channels: tuple[int, ...]
    residuals: NDArray[Any]
    relative_residual: float
    tail_moments: NDArray[Any]
    tail_bound: FloatArray
    condition: float
    sigma_min: float
    rank: int
    control_norm: float
    final_error: float
    spill_over: float
    warnings: tuple[str, ...] = field(default_factory=tuple)

    @property
    def max_residual(self) -> float:
        return float(np.max(np.abs(self.residuals), initial=0.0))

    def to_dict(self) -> dict[str, Any]:
        return {
            "equation": self.equation.value,
            "modes": self.modes,
            "horizon": self.horizon,
            "channels": list(self.channels),
            "residuals": encode_array(self.residuals),
            "relative_residual": self.relative_residual,
            "max_residual": self.max_residual,
            "tail_moments": encode_array(self.tail_moments),
            "tail_bound": self.tail_bound.tolist(),
            "condition": self.condition,
            "sigma_min": self.sigma_min,
            "rank": self.rank,
            "control_norm": self.control_norm,
            "final_error": self.final_error,
            "spill_over": self.spill_over,
            "warnings": list(self.warnings),
        }


def _targets(problem: ControlProblem, modes: int) -> NDArray[Any]:
    # right-hand side of the moment problem for the first ``modes`` modes
    data = problem.spectral.truncated(modes)
    state = problem.state.truncated(modes)
    lam, tau = data.eigenvalues, problem.horizon
    if problem.equation is Equation.WAVE:
        b = np.zeros(modes) if state.b is None else np.real(state.b)
        return np.concatenate([np.real(state.a), b / data.frequencies])
    if problem.equation is Equation.HEAT:
        return -state.a * np.exp(-lam * tau) / np.sqrt(lam)
    return -state.a * np.exp(1j * lam * tau) / np.sqrt(lam)


def _solve(problem: ControlProblem) -> tuple[NDArray[Any], GramMatrix, int]:
    g = gram(problem.family())
    inverse, rank = solve_cutoff(g.matrix)
    conditioning = g.conditioning
    if rank < g.size:
        raise NumericallySingularError(
            f"{problem.equation.value} Gram matrix is singular at working precision "
            f"(rank {rank} of {g.size}); reduce the modes or increase the horizon"
        )
    limit = problem.condition_limit
    if limit is not None and conditioning.condition > limit:
        raise NumericallySingularError(
            f"{problem.equation.value} Gram condition {conditioning.condition:.3g} "
            f"exceeds {limit:.3g} at horizon {problem.horizon:.6g}"
        )
    return inverse @ _targets(problem, problem.K), g, rank


def _expansion(
    problem: ControlProblem, coefficients: NDArray[Any]
) -> tuple[ControlExpansion, float]:
    fam = problem.family()
    amplitudes = fam.amplitudes
    lam = fam.eigenvalues
    if problem.equation is Equation.WAVE:
        K = fam.modes
        p, q = coefficients[:K], coefficients[K:]
        w = np.sqrt(lam)
        expansion = ControlExpansion(
            np.concatenate([q / 2 - 0.5j * p, q / 2 + 0.5j * p]),
            np.vstack([amplitudes, amplitudes]),
            np.concatenate([1j * w, -1j * w]),
            problem.horizon,
        )
        return expansion, float(w[-1])
    exponents = -lam if problem.equation is Equation.HEAT else -1j * lam
    expansion = ControlExpansion(
        coefficients.astype(complex),
        amplitudes.copy(),
        exponents.astype(complex),
        problem.horizon,
    )
    return expansion, float(lam[-1])


def _synthesize(
    problem: ControlProblem, expected: Equation
) -> tuple[BoundaryControl, SynthesisReport]:
    if problem.equation is not expected:
        raise InputError(
            f"{expected.value} synthesis got a {problem.equation.value} problem"
        )
    coefficients, g, rank = _solve(problem)
    expansion, fastest = _expansion(problem, coefficients)
    control = BoundaryControl(
        problem.horizon,
        problem.spectral.boundary,
        problem.channels,
        is_complex=problem.equation is Equation.SCHRODINGER,
        family=problem.equation.family.value,
        coefficients=coefficients,
        expansion=expansion,
        max_frequency=fastest,
    )
    report = _report(problem, control, g, rank)
    logger.info(
        "%s control: K=%d, horizon=%.6g, condition=%.3g, norm=%.6g",
        problem.equation.value,
        problem.K,
        problem.horizon,
        report.condition,
        report.control_norm,
    )
    return control, report


def wave_control(problem: ControlProblem) -> tuple[BoundaryControl, SynthesisReport]:
    """Minimal-norm control steering the wave equation from rest to ``(a, b)``.

    Raises:
        NumericallySingularError: The horizon is too short for K modes
        InconsistentChannels: Modes or channels do not match the spectral data
    """
    return _synthesize(problem, Equation.WAVE)


def heat_null_control(
    problem: ControlProblem,
) -> tuple[BoundaryControl, SynthesisReport]:
    """Control annihilating the first K heat modes at time τ.

    The control lies in the span of the truncated parabolic family, so it
    is the truncated biorthogonal series applied to the decayed data.

    Raises:
        NumericallySingularError: τ is too small for K modes
    """
    return _synthesize(problem, Equation.HEAT)


def schrodinger_control(
    problem: ControlProblem,
) -> tuple[BoundaryControl, SynthesisReport]:
    """Complex minimal-norm control annihilating K Schrodinger modes at τ."""
    return _synthesize(problem, Equation.SCHRODINGER)


def synthesize(problem: ControlProblem) -> tuple[BoundaryControl, SynthesisReport]:
    """Dispatch on ``problem.equation``."""
    if problem.equation is Equation.WAVE:
        return wave_control(problem)
    if problem.equation is Equation.HEAT:
        return heat_null_control(problem)
    return schrodinger_control(problem)


def moment_residual(
    control: BoundaryControl | None,
    spectral: SpectralData,
    problem: ControlProblem,
    K_check: int | None = None,
) -> NDArray[Any]:
    """Residuals ``target - achieved`` of the first ``K_check`` moments.

    Achieved moments come from the forward propagators evaluated at the
    horizon, so controls in expansion form are integrated in closed form
    and gridded controls by quadrature. Wave residuals stack positions
    before velocities (``2 K_check`` entries).
    """
    K_check = problem.K_check if K_check is None else K_check
    if K_check < problem.K:
        raise InconsistentChannels(
            f"K_check={K_check} is smaller than the {problem.K} synthesized modes"
        )
    data = spectral.truncated(K_check)
    state = problem.state.truncated(K_check)
    horizon = problem.horizon
    lam = data.eigenvalues
    if problem.equation is Equation.WAVE:
        final = wave_forward(data, control, horizon, times=[horizon]).final_state()
        assert final.b is not None
        b = np.zeros(K_check) if state.b is None else np.real(state.b)
        return np.concatenate(
            [np.real(state.a) - final.a, (b - final.b) / data.frequencies]
        )
    if problem.equation is Equation.HEAT:
        trajectory = heat_forward(data, state, control, horizon, times=[horizon])
    else:
        trajectory = schrodinger_forward(
            data, state, control, horizon, times=[horizon]
        )
    return -trajectory.final_state().a / np.sqrt(lam)


def _reference(problem: ControlProblem, modes: int) -> float:
    # ‖target‖ in H × H_{-1} for the wave, ‖initial state‖ in H_{-1} otherwise
    if problem.equation is Equation.WAVE:
        return float(np.linalg.norm(_targets(problem, modes)))
    return modal_norm(problem.state.truncated(modes), problem.spectral, -1)


def _defect(problem: ControlProblem, final: ModalState, modes: int) -> FloatArray:
    # squared distance from the goal, mode by mode, in the norm of _reference
    if not 1 <= modes <= problem.spectral.modes:
        raise InconsistentChannels(
            f"cannot measure {modes} modes with {problem.spectral.modes} computed"
        )
    if final.modes < modes:
        raise InconsistentChannels(
            f"final state has {final.modes} modes, {modes} are measured"
        )
    lam = problem.spectral.eigenvalues[:modes]
    reached = final.truncated(modes)
    if problem.equation is Equation.WAVE:
        goal = problem.state.truncated(modes)
        goal_b = np.zeros(modes) if goal.b is None else goal.b
        reached_b = np.zeros(modes) if reached.b is None else reached.b
        return np.asarray(
            np.abs(goal.a - reached.a) ** 2 + np.abs(goal_b - reached_b) ** 2 / lam,
            dtype=float,
        )
    return np.asarray(np.abs(reached.a) ** 2 / lam, dtype=float)


def relative_final_error(
    problem: ControlProblem, final: ModalState, modes: int | None = None
) -> float:
    """Distance of a final state from the goal over the first ``modes`` modes.

    Wave errors are measured in ``H × H_{-1}`` against the target, heat and
    Schrodinger errors in ``H_{-1}`` against the initial state. ``modes``
    defaults to ``K_check``, so uncontrolled modes count; pass ``problem.K``
    for the controlled part alone. A zero reference gives the absolute error.
    """
    modes = problem.K_check if modes is None else modes
    error = float(np.sqrt(np.sum(_defect(problem, final, modes))))
    reference = _reference(problem, modes)
    return error / reference if reference > 0 else error


def spill_over(problem: ControlProblem, final: ModalState) -> float:
    """Share of the final error carried by modes ``K < k <= K_check``.

    Normalized like :func:`relative_final_error` over ``K_check`` modes, so
    the full error is at least the spill-over.
    """
    squares = _defect(problem, final, problem.K_check)
    error = float(np.sqrt(np.sum(squares[problem.K :])))
    reference = _reference(problem, problem.K_check)
    return error / reference if reference > 0 else error


def _split(
    values: NDArray[Any], problem: ControlProblem
) -> tuple[NDArray[Any], NDArray[Any]]:
    # (constrained, tail) parts of a per-moment vector over K_check modes
    K, n = problem.K, problem.K_check
    if problem.equation is Equation.WAVE:
        head = np.concatenate([values[:K], values[n : n + K]])
        tail = np.concatenate([values[K:n], values[n + K :]])
        return head, tail
    return values[:K], values[K:n]


def _tail_bound(problem: ControlProblem, control_norm: float) -> FloatArray:
    # |free part| + ‖f‖ ‖member_k‖ for every checked moment
    fam = problem.family(problem.K_check)
    member_norms = np.sqrt(np.clip(np.real(np.diag(gram(fam).matrix)), 0.0, None))
    free = np.abs(_targets(problem, problem.K_check))
    return np.asarray(free + control_norm * member_norms, dtype=float)


def _report(
    problem: ControlProblem, control: BoundaryControl, g: GramMatrix, rank: int
) -> SynthesisReport:
    residual = moment_residual(control, problem.spectral, problem)
    head, tail = _split(residual, problem)
    target_norm = float(np.linalg.norm(_targets(problem, problem.K)))
    head_norm = float(np.linalg.norm(head))
    relative = head_norm / target_norm if target_norm > 0 else head_norm
    norm = control.norm()
    _, bound = _split(_tail_bound(problem, norm), problem)
    reference = _reference(problem, problem.K_check)
    scale = reference if reference > 0 else 1.0
    final_error = float(np.linalg.norm(residual)) / scale
    spilled = float(np.linalg.norm(tail)) / scale

    conditioning = g.conditioning
    notes: list[str] = []
    if conditioning.condition > WARN_CONDITION:
        note = (
            f"Gram condition {conditioning.condition:.3g}: moments are accurate "
            f"to about {conditioning.condition * np.finfo(float).eps:.1g} only"
        )
        logger.warning(note)
        notes.append(note)
    return SynthesisReport(
        problem.equation,
        problem.K,
        problem.horizon,
        problem.channels,
        head,
        relative,
        tail,
        bound,
        conditioning.condition,
        conditioning.sigma_min,
        rank,
        norm,
        final_error,
        spilled,
        tuple(notes),
    )

"""Tests for control synthesis by the moment method."""

import json
import math

import numpy as np
import pytest

from tree_control.errors import (
    InconsistentChannels,
    InputError,
    NumericallySingularError,
)
from tree_control.evolution import heat_forward, schrodinger_forward, wave_forward
from tree_control.models import ModalState
from tree_control.presets import random_state
from tree_control.synthesis import (
    DEFAULT_HEAT_HORIZON,
    DEFAULT_SCHRODINGER_HORIZON,
    ControlProblem,
    Equation,
    default_horizon,
    heat_null_control,
    moment_residual,
    relative_final_error,
    schrodinger_control,
    spill_over,
    synthesize,
    wave_control,
)


def wave_problem(spectral, state, horizon=math.pi, modes=10, **kwargs):
    return ControlProblem(
        Equation.WAVE, spectral, horizon, state, modes=modes, **kwargs
    )


class TestControlProblem:
    """Tests for problem validation."""

    def test_defaults(self, interval_spectral, mode1_target):
        """Test that K and K_check default to the computed modes."""
        problem = ControlProblem("wave", interval_spectral, math.pi, mode1_target)
        assert problem.equation is Equation.WAVE
        assert problem.K == 12
        assert problem.K_check == 12
        assert problem.channels == (0, 1)

    def test_nonpositive_horizon(self, interval_spectral, mode1_target):
        """Test that the horizon must be positive."""
        with pytest.raises(InputError):
            wave_problem(interval_spectral, mode1_target, horizon=0.0)

    def test_too_many_modes(self, interval_spectral, mode1_target):
        """Test that K cannot exceed the computed modes."""
        with pytest.raises(InconsistentChannels):
            wave_problem(interval_spectral, mode1_target, modes=13)

    def test_check_modes_below_modes(self, interval_spectral, mode1_target):
        """Test that K_check must be at least K."""
        with pytest.raises(InconsistentChannels):
            wave_problem(interval_spectral, mode1_target, check_modes=5)

    def test_exclude_interior(self, weighted_star_spectral):
        """Test that only boundary vertices can be excluded."""
        with pytest.raises(InconsistentChannels):
            wave_problem(
                weighted_star_spectral, ModalState.basis(0, 6), 18.0, 6, exclude=0
            )

    def test_condition_limits(self, interval_spectral, mode1_target):
        """Test the per-equation default condition limits."""
        assert wave_problem(interval_spectral, mode1_target).condition_limit == 1e10
        heat = ControlProblem(
            Equation.HEAT, interval_spectral, 0.5, ModalState.basis(0, 4), modes=4
        )
        assert heat.condition_limit is None


class TestDefaultHorizon:
    """Tests for default control times."""

    def test_wave_full_boundary(self, weighted_star_tree):
        """Test that the wave default is the optical diameter."""
        assert default_horizon(weighted_star_tree, Equation.WAVE) == pytest.approx(9.0)

    def test_wave_excluded_vertex(self, weighted_star_tree):
        """Test that an uncontrolled vertex doubles its eccentricity."""
        horizon = default_horizon(weighted_star_tree, Equation.WAVE, exclude=1)
        assert horizon == pytest.approx(14.0)

    def test_parabolic_defaults(self, interval_tree):
        """Test heat and Schrodinger defaults."""
        assert default_horizon(interval_tree, "heat") == DEFAULT_HEAT_HORIZON
        assert (
            default_horizon(interval_tree, Equation.SCHRODINGER)
            == DEFAULT_SCHRODINGER_HORIZON
        )


class TestWaveControl:
    """Tests for wave synthesis."""

    def test_reaches_first_mode(self, interval_spectral):
        """Test steering the interval from rest to φ_1 at T = π."""
        target = ModalState.basis(0, 10, velocity=True)
        problem = wave_problem(interval_spectral, target)
        control, report = wave_control(problem)
        assert report.relative_residual < 1e-10
        assert report.rank == 20
        assert report.condition < 2.0
        assert control.norm() == pytest.approx(1 / math.sqrt(2), rel=1e-2)
        final = wave_forward(interval_spectral, control, math.pi, times=[math.pi])
        assert relative_final_error(problem, final.final_state(), problem.K) < 1e-10

    def test_report_tail(self, interval_spectral):
        """Test the tail residuals and their Cauchy-Schwarz bound."""
        problem = wave_problem(
            interval_spectral, ModalState.basis(0, 10, velocity=True)
        )
        _, report = wave_control(problem)
        assert report.residuals.shape == (20,)
        assert report.tail_moments.shape == (4,)
        assert np.all(np.abs(report.tail_moments) <= report.tail_bound + 1e-12)

    def test_report_is_json(self, interval_spectral, mode1_target):
        """Test that the report serializes to JSON."""
        _, report = wave_control(wave_problem(interval_spectral, mode1_target))
        data = json.loads(json.dumps(report.to_dict()))
        assert data["equation"] == "wave"
        assert data["modes"] == 10
        assert data["channels"] == [0, 1]

    def test_linearity(self, interval_spectral):
        """Test that coefficients depend linearly on the target."""
        first = random_state(10, seed=1)
        second = random_state(10, seed=2)
        combined = ModalState(2 * first.a - second.a, 2 * first.b - second.b)
        horizon = 1.3 * math.pi
        c1, _ = wave_control(wave_problem(interval_spectral, first, horizon))
        c2, _ = wave_control(wave_problem(interval_spectral, second, horizon))
        c3, _ = wave_control(wave_problem(interval_spectral, combined, horizon))
        np.testing.assert_allclose(
            c3.coefficients, 2 * c1.coefficients - c2.coefficients, atol=1e-10
        )

    def test_minimal_norm(self, interval_spectral):
        """Test that an extra moment constraint never lowers the norm."""
        horizon = 1.5 * math.pi
        state = random_state(7, seed=4)
        short = wave_problem(interval_spectral, state.truncated(6), horizon, modes=6)
        longer = wave_problem(interval_spectral, state, horizon, modes=7)
        control_short, _ = wave_control(short)
        control_long, _ = wave_control(longer)
        assert control_short.norm() <= control_long.norm() * (1 + 1e-10)

    def test_zero_target(self, interval_spectral):
        """Test that the zero target gives the zero function."""
        problem = wave_problem(interval_spectral, ModalState.zero(10, velocity=True))
        control, report = wave_control(problem)
        assert control.norm() == pytest.approx(0.0, abs=1e-14)
        assert report.relative_residual == 0.0

    def test_excluded_vertex(self, weighted_star_spectral):
        """Test control from two vertices at T = 2 d_1(γ1) with a random target."""
        target = random_state(10, seed=8)
        problem = wave_problem(weighted_star_spectral, target, 14.0, 10, exclude=1)
        control, report = wave_control(problem)
        assert control.channels == (2, 3)
        assert control.excluded == (1,)
        values = control.full_values(np.linspace(0, 14.0, 50))
        np.testing.assert_array_equal(values[:, 0], 0.0)
        final = wave_forward(weighted_star_spectral, control, 14.0, times=[14.0])
        assert relative_final_error(problem, final.final_state(), problem.K) <= 1e-3
        assert report.relative_residual <= 1e-3

    def test_weighted_star_at_diameter(self, wide_weighted_star_spectral):
        """Test full-boundary control at T = d(Ω) with a random target."""
        spectral = wide_weighted_star_spectral
        problem = wave_problem(
            spectral, random_state(10, seed=11), 9.0, 10, check_modes=30
        )
        control, report = wave_control(problem)
        final = wave_forward(spectral, control, 9.0, times=[9.0]).final_state()
        assert relative_final_error(problem, final, problem.K) <= 1e-3
        spilled = spill_over(problem, final)
        assert spilled > 0.0
        assert relative_final_error(problem, final) >= spilled
        assert report.final_error == pytest.approx(
            relative_final_error(problem, final), rel=1e-8
        )
        assert report.spill_over == pytest.approx(spilled, rel=1e-8)
        assert np.all(np.abs(report.tail_moments) <= report.tail_bound + 1e-12)

    def test_cluster_invariance(self, equal_star_spectral):
        """Test that rotating a cluster basis leaves the control unchanged."""
        remixed = equal_star_spectral.remixed(np.random.default_rng(7))
        target = ModalState.basis(0, 7, velocity=True)
        control, _ = wave_control(wave_problem(equal_star_spectral, target, 3.0, 7))
        mixed, _ = wave_control(wave_problem(remixed, target, 3.0, 7))
        assert mixed.norm() == pytest.approx(control.norm(), rel=1e-8)
        times = np.linspace(0.0, 3.0, 31)
        np.testing.assert_allclose(
            mixed.values(times), control.values(times), atol=1e-8
        )

    def test_short_horizon_is_singular(self, interval_spectral):
        """Test that T far below the critical time is refused."""
        problem = wave_problem(
            interval_spectral, ModalState.basis(0, 12), 0.2 * math.pi, modes=12
        )
        with pytest.raises(NumericallySingularError) as excinfo:
            wave_control(problem)
        assert excinfo.value.exit_code == 3

    def test_condition_limit(self, interval_spectral):
        """Test that a user condition limit is enforced."""
        state = ModalState.basis(0, 6, velocity=True)
        horizon = 0.8 * math.pi
        with pytest.raises(NumericallySingularError):
            wave_control(
                wave_problem(interval_spectral, state, horizon, 6, max_condition=1.2)
            )
        _, report = wave_control(wave_problem(interval_spectral, state, horizon, 6))
        assert report.condition > 1.2

    def test_wrong_equation(self, interval_spectral):
        """Test that each entry point checks the equation."""
        problem = ControlProblem(
            Equation.HEAT, interval_spectral, 0.5, ModalState.basis(0, 4), modes=4
        )
        with pytest.raises(InputError):
            wave_control(problem)


class TestParabolicControl:
    """Tests for heat and Schrodinger synthesis."""

    def test_heat_null_control(self, interval_spectral, sample_state):
        """Test that the first K heat modes vanish at τ."""
        problem = ControlProblem(
            Equation.HEAT, interval_spectral, 0.5, sample_state, modes=6
        )
        control, report = heat_null_control(problem)
        assert not control.is_complex
        assert control.family == "parabolic"
        final = heat_forward(interval_spectral, sample_state, control, 0.5, times=[0.5])
        assert relative_final_error(problem, final.final_state(), problem.K) < 1e-6
        assert report.relative_residual < 1e-6

    def test_heat_zero_state(self, interval_spectral):
        """Test that nothing is done when the state is already zero."""
        problem = ControlProblem(
            Equation.HEAT, interval_spectral, 0.5, ModalState.zero(6), modes=6
        )
        control, _ = heat_null_control(problem)
        assert control.norm() == pytest.approx(0.0, abs=1e-14)

    def test_schrodinger_control(self, interval_spectral):
        """Test that the first K Schrodinger modes vanish at τ."""
        state = random_state(6, seed=5, velocity=False, complex_=True)
        problem = ControlProblem(
            Equation.SCHRODINGER, interval_spectral, 0.1, state, modes=6
        )
        control, report = schrodinger_control(problem)
        assert control.is_complex
        final = schrodinger_forward(interval_spectral, state, control, 0.1, times=[0.1])
        assert relative_final_error(problem, final.final_state(), problem.K) < 1e-6
        assert report.residuals.dtype.kind == "c"

    def test_dispatch(self, interval_spectral, sample_state):
        """Test that synthesize picks the entry point by equation."""
        problem = ControlProblem(
            Equation.HEAT, interval_spectral, 0.5, sample_state, modes=6
        )
        control, report = synthesize(problem)
        assert report.equation is Equation.HEAT
        assert control.family == "parabolic"


class TestNullControlScenarios:
    """Tests for heat and Schrodinger null control on the interval and the star."""

    @pytest.mark.parametrize("name", ["interval_spectral", "equal_star_spectral"])
    @pytest.mark.parametrize("horizon", [0.5, 0.2])
    @pytest.mark.parametrize("partial, bound", [(False, 1e-4), (True, 1e-3)])
    def test_heat(self, request, sample_state, name, horizon, partial, bound):
        """Test that eight heat modes are steered to zero."""
        spectral = request.getfixturevalue(name)
        exclude = spectral.boundary[0] if partial else None
        problem = ControlProblem(
            Equation.HEAT, spectral, horizon, sample_state, modes=8, exclude=exclude
        )
        control, _ = heat_null_control(problem)
        final = heat_forward(spectral, sample_state, control, horizon, times=[horizon])
        assert relative_final_error(problem, final.final_state(), problem.K) <= bound

    @pytest.mark.parametrize(
        "name, horizon", [("interval_spectral", 0.1), ("equal_star_spectral", 0.2)]
    )
    @pytest.mark.parametrize("partial, bound", [(False, 1e-4), (True, 1e-3)])
    def test_schrodinger(self, request, name, horizon, partial, bound):
        """Test that six Schrodinger modes are steered to zero."""
        spectral = request.getfixturevalue(name)
        state = random_state(6, seed=5, velocity=False, complex_=True)
        exclude = spectral.boundary[0] if partial else None
        problem = ControlProblem(
            Equation.SCHRODINGER, spectral, horizon, state, modes=6, exclude=exclude
        )
        control, _ = schrodinger_control(problem)
        final = schrodinger_forward(spectral, state, control, horizon, times=[horizon])
        assert relative_final_error(problem, final.final_state(), problem.K) <= bound


class TestSpillOver:
    """Tests for the error carried by modes beyond K."""

    def test_heat_spill_over(self, interval_spectral, sample_state):
        """Test that undamped modes beyond K show up in the final error."""
        problem = ControlProblem(
            Equation.HEAT, interval_spectral, 0.2, sample_state, modes=4
        )
        control, report = heat_null_control(problem)
        final = heat_forward(interval_spectral, sample_state, control, 0.2, times=[0.2])
        state = final.final_state()
        spilled = spill_over(problem, state)
        assert spilled > 0.0
        assert relative_final_error(problem, state) >= spilled
        assert relative_final_error(problem, state, problem.K) < 1e-6
        assert report.spill_over == pytest.approx(spilled, rel=1e-8)
        assert report.final_error == pytest.approx(
            relative_final_error(problem, state), rel=1e-8
        )

    def test_report_serializes_errors(self, interval_spectral, mode1_target):
        """Test that final error and spill-over are exported."""
        _, report = wave_control(wave_problem(interval_spectral, mode1_target))
        data = report.to_dict()
        assert data["final_error"] >= data["spill_over"] >= 0.0

    def test_final_state_too_short(self, interval_spectral, sample_state):
        """Test that a final state with fewer modes than measured is refused."""
        problem = ControlProblem(
            Equation.HEAT, interval_spectral, 0.5, sample_state, modes=6
        )
        with pytest.raises(InconsistentChannels):
            relative_final_error(problem, ModalState.zero(4), 8)


class TestMomentResidual:
    """Tests for moment residuals."""

    def test_free_motion(self, interval_spectral, mode1_target):
        """Test that without a control the residual is the target."""
        problem = wave_problem(interval_spectral, mode1_target)
        residual = moment_residual(None, interval_spectral, problem)
        assert residual.shape == (24,)
        assert residual[0] == pytest.approx(1.0)
        np.testing.assert_allclose(residual[1:], 0.0)

    def test_check_modes_too_small(self, interval_spectral, mode1_target):
        """Test that fewer check modes than K are refused."""
        problem = wave_problem(interval_spectral, mode1_target)
        with pytest.raises(InconsistentChannels):
            moment_residual(None, interval_spectral, problem, K_check=4)

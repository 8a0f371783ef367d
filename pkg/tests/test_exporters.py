"""Tests for export formats."""

import csv
import json
import math
import tempfile
from pathlib import Path

import numpy as np

from tree_control.exporters import export_spectral, export_state, write_report
from tree_control.exporters.csv import control_table, trajectory_columns
from tree_control.models import BoundaryControl, GridState, ModalState, Trajectory
from tree_control.parsers import (
    read_control_csv,
    read_spectral,
    read_state_file,
    read_trajectory_csv,
)
from tree_control.synthesis import ControlProblem, wave_control


def sampled_control(is_complex=False):
    times = np.linspace(0.0, 1.0, 11)
    values = np.column_stack([np.sin(times), times / 3])
    if is_complex:
        values = values + 1j * np.cos(times)[:, None]
    return BoundaryControl(
        1.0,
        (1, 2, 3),
        (1, 3),
        is_complex=is_complex,
        sample_times=times,
        sample_values=values,
    )


class TestControlCSV:
    """Tests for control export."""

    def test_export_csv(self):
        """Test exporting a control with an excluded vertex."""
        with tempfile.NamedTemporaryFile(suffix=".csv", delete=False) as f:
            output_path = Path(f.name)

        try:
            sampled_control().to_csv(output_path)
            with open(output_path, newline="") as f:
                rows = list(csv.reader(f))

            assert rows[0] == ["t", "gamma_1", "gamma_2", "gamma_3"]
            assert len(rows) == 12
            assert all(float(row[2]) == 0.0 for row in rows[1:])
        finally:
            output_path.unlink(missing_ok=True)

    def test_complex_columns(self):
        """Test that complex controls get re and im columns."""
        columns, rows = control_table(sampled_control(is_complex=True))
        assert columns[:3] == ["t", "gamma_1.re", "gamma_1.im"]
        assert rows.shape == (11, 7)

    def test_round_trip(self, tmp_path):
        """Test that exported samples read back bit for bit."""
        control = sampled_control()
        path = tmp_path / "control.csv"
        control.to_csv(path)
        restored = read_control_csv(path, channels=(1, 3))
        assert restored.boundary == (1, 2, 3)
        assert restored.channels == (1, 3)
        np.testing.assert_array_equal(restored.sample_times, control.sample_times)
        np.testing.assert_array_equal(restored.sample_values, control.sample_values)

    def test_complex_round_trip(self, tmp_path):
        """Test reading complex controls."""
        control = sampled_control(is_complex=True)
        path = tmp_path / "control.csv"
        control.to_csv(path)
        restored = read_control_csv(path, channels=(1, 3))
        assert restored.is_complex
        np.testing.assert_array_equal(restored.sample_values, control.sample_values)

    def test_expansion_export(self, tmp_path, interval_spectral, mode1_target):
        """Test sampling a synthesized control at the export rate."""
        problem = ControlProblem("wave", interval_spectral, math.pi, mode1_target)
        control, _ = wave_control(problem)
        path = tmp_path / "control.csv"
        control.to_csv(path, per_period=40)
        restored = read_control_csv(path)
        times = restored.sample_times
        assert times[-1] == math.pi
        assert np.max(np.diff(times)) <= 2 * math.pi / 11 / 40
        np.testing.assert_allclose(
            restored.sample_values, control.values(times), atol=1e-15
        )


class TestTrajectoryCSV:
    """Tests for trajectory export."""

    def test_wave_columns(self):
        """Test column order with velocities."""
        trajectory = Trajectory(np.array([0.0, 1.0]), np.zeros((2, 2)), np.ones((2, 2)))
        assert trajectory_columns(trajectory) == ["t", "c_1", "c_2", "dc_1", "dc_2"]

    def test_round_trip(self, tmp_path):
        """Test that a wave trajectory reads back exactly."""
        rng = np.random.default_rng(0)
        trajectory = Trajectory(
            np.linspace(0.0, 1.0, 5), rng.standard_normal((5, 3)), rng.random((5, 3))
        )
        path = tmp_path / "trajectory.csv"
        trajectory.to_csv(path)
        restored = read_trajectory_csv(path)
        assert restored.equation == "wave"
        np.testing.assert_array_equal(restored.coefficients, trajectory.coefficients)
        np.testing.assert_array_equal(restored.velocities, trajectory.velocities)

    def test_schrodinger_inferred(self, tmp_path):
        """Test that complex coefficients read back as Schrodinger."""
        coefficients = np.array([[1.0 + 2.0j, 0.5j], [-1.0j, 3.0]])
        trajectory = Trajectory(
            np.array([0.0, 0.1]), coefficients, None, "schrodinger"
        )
        path = tmp_path / "trajectory.csv"
        trajectory.to_csv(path)
        restored = read_trajectory_csv(path)
        assert restored.equation == "schrodinger"
        assert restored.velocities is None
        np.testing.assert_array_equal(restored.coefficients, coefficients)


class TestGridCSV:
    """Tests for grid state export."""

    def test_export_grid(self, tmp_path):
        """Test one row per node with an empty velocity."""
        grid = GridState(
            0.5,
            {0: np.array([0.0, 0.5, 1.0]), 1: np.array([0.0, 2.0])},
            {0: np.array([0.0, 1.0, 0.0]), 1: np.array([0.0, -1.0])},
        )
        path = tmp_path / "grid.csv"
        grid.to_csv(path)
        with open(path, newline="") as f:
            rows = list(csv.DictReader(f))
        assert len(rows) == 5
        assert rows[1]["edge"] == "0"
        assert float(rows[1]["value"]) == 1.0
        assert rows[4]["velocity"] == ""


class TestReports:
    """Tests for JSON reports."""

    def test_write_report(self, tmp_path):
        """Test indented JSON with a trailing newline."""
        path = tmp_path / "nested" / "report.json"
        write_report({"value": 0.1, "items": [1, 2]}, path)
        text = path.read_text()
        assert text.endswith("\n")
        assert json.loads(text) == {"value": 0.1, "items": [1, 2]}

    def test_spectral_round_trip(self, tmp_path, weighted_star_spectral):
        """Test exported spectral data against the reader."""
        path = tmp_path / "spectrum.json"
        export_spectral(weighted_star_spectral, path)
        restored = read_spectral(path)
        np.testing.assert_array_equal(
            restored.eigenvalues, weighted_star_spectral.eigenvalues
        )
        np.testing.assert_array_equal(restored.kappa, weighted_star_spectral.kappa)
        assert restored.boundary == (1, 2, 3)

    def test_state_round_trip(self, tmp_path):
        """Test exported complex states against the reader."""
        state = ModalState(np.array([1.0 - 0.5j, 1 / 3]))
        path = tmp_path / "state.json"
        export_state(state, path)
        np.testing.assert_array_equal(read_state_file(path).a, state.a)

"""Tests for the command line interface."""

import csv
import json
import math

import pytest

from tree_control.cli import RunConfig, main, run
from tree_control.errors import InputError

FAST = ["--modes", "4", "--mesh", "200"]


def read_json(path):
    return json.loads(path.read_text())


class TestRunConfig:
    """Tests for run configuration."""

    def test_defaults(self):
        """Test default values."""
        config = RunConfig("synthesize")
        assert config.graph == "interval"
        assert config.modes == 10
        assert config.total_modes == 20
        assert config.mesh_config().modes == 20
        assert config.mesh_config(config.modes).modes == 10

    def test_check_modes(self):
        """Test that residual modes enlarge the computed spectrum."""
        config = RunConfig("synthesize", modes=6, check_modes=9)
        assert config.total_modes == 9
        assert config.mesh_config().modes == 9

    @pytest.mark.parametrize(
        "changes",
        [
            {"modes": 0},
            {"horizon": -1.0},
            {"samples": 1},
            {"equation": "burgers"},
            {"modes": 6, "check_modes": 3},
            {"max_condition": 0.5},
        ],
    )
    def test_validate(self, changes):
        """Test that out-of-range values are refused."""
        with pytest.raises(InputError):
            RunConfig("synthesize", **changes).validate()


class TestCommands:
    """Tests for the subcommands."""

    def test_no_command(self, capsys):
        """Test that help is printed without a command."""
        assert main([]) == 0
        assert "tree-control" in capsys.readouterr().out

    def test_geometry(self, tmp_path, capsys):
        """Test the geometry report of the weighted star."""
        args = ["geometry", "--graph", "weighted-star", "--out", str(tmp_path)]
        assert main(args) == 0
        report = read_json(tmp_path / "geometry.json")
        assert report["diameter"] == pytest.approx(9.0)
        assert report["diametral_pair"] == [2, 3]
        assert report["eccentricity"]["1"] == pytest.approx(7.0)
        assert report["total_optical_length"] == pytest.approx(10.0)
        assert "Optical diameter: 9" in capsys.readouterr().out

    def test_spectrum(self, tmp_path):
        """Test the spectrum and diagnostics files."""
        assert main(["spectrum", *FAST, "--out", str(tmp_path)]) == 0
        spectrum = read_json(tmp_path / "spectrum.json")
        assert spectrum["eigenvalues"] == pytest.approx([1, 4, 9, 16], rel=1e-5)
        assert spectrum["boundary"] == [0, 1]
        weyl = read_json(tmp_path / "weyl.json")
        assert weyl["orthonormality_defect"] < 1e-10

    def test_basis_report(self, tmp_path):
        """Test the conditioning sweeps."""
        assert main(["basis-report", *FAST, "--out", str(tmp_path)]) == 0
        report = read_json(tmp_path / "basis_report.json")
        assert report["critical_horizon"] == pytest.approx(math.pi)
        assert [row["fraction"] for row in report["horizon_sweep"]] == [
            0.25,
            0.5,
            0.75,
            1.0,
            1.5,
            2.0,
        ]
        assert [row["modes"] for row in report["mode_sweep"]] == [1, 2, 4]
        assert "growth" in report

    def test_synthesize(self, tmp_path):
        """Test control and report files."""
        assert main(["synthesize", *FAST, "--out", str(tmp_path)]) == 0
        report = read_json(tmp_path / "synthesis.json")
        assert report["equation"] == "wave"
        assert report["relative_residual"] < 1e-10
        with open(tmp_path / "control.csv", newline="") as f:
            header = next(csv.reader(f))
        assert header == ["t", "gamma_0", "gamma_1"]

    def test_synthesize_heat(self, tmp_path):
        """Test heat synthesis from the random preset."""
        args = ["synthesize", *FAST, "--equation", "heat", "--target", "random"]
        assert main([*args, "--out", str(tmp_path)]) == 0
        assert read_json(tmp_path / "synthesis.json")["equation"] == "heat"

    def test_simulate_exported_control(self, tmp_path):
        """Test simulating a control read back from CSV."""
        assert main(["synthesize", *FAST, "--out", str(tmp_path)]) == 0
        control = str(tmp_path / "control.csv")
        args = ["simulate", *FAST, "--control", control, "--samples", "11"]
        assert main([*args, "--out", str(tmp_path)]) == 0
        with open(tmp_path / "trajectory.csv", newline="") as f:
            rows = list(csv.reader(f))
        assert rows[0][:2] == ["t", "c_1"]
        assert len(rows) == 12

    def test_verify(self, tmp_path, capsys):
        """Test that the end-to-end check passes on the interval."""
        args = ["verify", "--modes", "4", "--mesh", "400", "--out", str(tmp_path)]
        assert main(args) == 0
        checks = read_json(tmp_path / "verify.json")
        assert checks["passed"]
        assert checks["check_modes"] == 8
        assert checks["final_error"] <= checks["tolerance"]
        assert 0.0 <= checks["spill_over"] <= checks["final_error"]
        assert checks["controlled_error"] <= checks["final_error"]
        assert checks["fdtd_error"] < checks["fdtd_tolerance"]
        assert "PASS" in capsys.readouterr().out

    def test_verify_counts_spill_over(self, tmp_path, capsys):
        """Test that residue left on unconstrained modes fails the check."""
        args = ["verify", *FAST, "--graph", "weighted-star", "--target", "random"]
        assert main([*args, "--out", str(tmp_path)]) == 1
        checks = read_json(tmp_path / "verify.json")
        assert not checks["spectral_passed"]
        assert checks["spill_over"] > checks["tolerance"]
        assert checks["controlled_error"] < checks["spill_over"]
        assert "FAIL" in capsys.readouterr().out


class TestExitCodes:
    """Tests for error reporting."""

    def test_unknown_graph(self, tmp_path, capsys):
        """Test that an unknown graph is an input error."""
        args = ["geometry", "--graph", "no-such-graph", "--out", str(tmp_path)]
        assert main(args) == 2
        assert "Error:" in capsys.readouterr().err

    def test_bad_modes(self, tmp_path):
        """Test that a nonpositive mode count is an input error."""
        assert main(["spectrum", "--modes", "0", "--out", str(tmp_path)]) == 2

    def test_interior_exclude(self, tmp_path):
        """Test that only boundary vertices can be excluded."""
        args = ["synthesize", "--graph", "weighted-star", "--exclude-vertex", "0"]
        assert main([*args, "--out", str(tmp_path)]) == 2

    def test_singular(self, tmp_path, capsys):
        """Test that a horizon far below the critical time is refused."""
        horizon = str(0.2 * math.pi)
        args = ["synthesize", "--modes", "12", "--horizon", horizon]
        assert main([*args, "--out", str(tmp_path)]) == 3
        assert "Error:" in capsys.readouterr().err

    def test_missing_target_file(self, tmp_path):
        """Test that an unknown target is an input error."""
        config = RunConfig(
            "synthesize", modes=4, mesh=200, target="missing.json", out=tmp_path
        )
        assert run(config) == 2

"""Command-line interface for tree-control."""

from __future__ import annotations

import argparse
import logging
import sys
import warnings
from collections.abc import Callable
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any

import numpy as np

from tree_control import __version__
from tree_control.errors import InputError, TreeControlError
from tree_control.evolution import (
    FdtdMesh,
    fdtd_wave,
    heat_forward,
    project,
    schrodinger_forward,
    wave_difference,
    wave_forward,
)
from tree_control.exporters import export_spectral, write_report
from tree_control.families import (
    FamilyKind,
    FamilySpec,
    biorth_growth_fit,
    extension_orthogonality,
    gram,
)
from tree_control.graph import (
    MetricTree,
    build_tree,
    distance_table,
    eccentricity,
    max_boundary_distance,
    optical_center,
    optical_diameter,
)
from tree_control.models import BoundaryControl, ModalState, Trajectory
from tree_control.parsers import load_graph, read_control_csv, read_state_file
from tree_control.presets import STATE_PRESETS, state_preset
from tree_control.spectral import (
    MeshConfig,
    SpectralData,
    kirchhoff_residuals,
    orthonormality_defect,
    solve_spectrum,
    weyl_check,
)
from tree_control.synthesis import (
    DEFAULT_HEAT_HORIZON,
    ControlProblem,
    Equation,
    default_horizon,
    relative_final_error,
    spill_over,
    synthesize,
)

logger = logging.getLogger(__name__)

COMMANDS = ["geometry", "spectrum", "basis-report", "synthesize", "simulate", "verify"]
EQUATIONS = [equation.value for equation in Equation]

# control times of the conditioning sweep, as fractions of the critical time
HORIZON_FRACTIONS = (0.25, 0.5, 0.75, 1.0, 1.5, 2.0)
FDTD_TOLERANCE = 5e-3


@dataclass(frozen=True)
class RunConfig:
    """Everything one CLI run needs.

    Attributes:
        command: One of COMMANDS
        graph: Graph preset name or graph file
        modes: Moment equations K
        mesh: Elements on the optically longest edge
        refinement: Refinement factor of the extrapolation mesh
        horizon: Control time (defaults per equation)
        exclude_vertex: Uncontrolled boundary vertex γ1
        equation: wave, heat or schrodinger
        target: State preset name or state file
        out: Output directory
        seed: Seed of the random state preset
        check_modes: Modes used for residual and tail reports
        max_condition: Largest accepted Gram condition number
        control: Control CSV to simulate instead of synthesizing
        tolerance: Pass threshold of ``verify``
        samples: Time samples of simulated trajectories
        verbose: Logging verbosity (0 warnings, 1 info, 2 debug)
    """

    command: str
    graph: str = "interval"
    modes: int = 10
    mesh: int = 400
    refinement: int = 2
    horizon: float | None = None
    exclude_vertex: int | None = None
    equation: str = "wave"
    target: str = "mode1"
    out: Path = Path("tree-control-out")
    seed: int = 0
    check_modes: int | None = None
    max_condition: float | None = None
    control: Path | None = None
    tolerance: float = 1e-6
    samples: int = 201
    verbose: int = 0

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> RunConfig:
        names = [f.name for f in fields(cls) if hasattr(args, f.name)]
        values = {name: getattr(args, name) for name in names}
        values["out"] = Path(values["out"])
        if values.get("control") is not None:
            values["control"] = Path(values["control"])
        return cls(**values)

    def validate(self) -> None:
        """Check ranges that do not need the graph.

        Raises:
            InputError: A parameter is out of range
        """
        if self.command not in COMMANDS:
            raise InputError(f"unknown command {self.command!r}")
        if self.equation not in EQUATIONS:
            raise InputError(f"unknown equation {self.equation!r}")
        for name in ("modes", "mesh", "refinement", "samples", "tolerance"):
            if not getattr(self, name) > 0:
                raise InputError(f"--{name} must be positive")
        if self.samples < 2:
            raise InputError("--samples must be at least 2")
        if self.horizon is not None and not self.horizon > 0:
            raise InputError("--horizon must be positive")
        if self.check_modes is not None and self.check_modes < self.modes:
            raise InputError("--check-modes must be at least --modes")
        if self.max_condition is not None and not self.max_condition > 1:
            raise InputError("--max-condition must exceed 1")

    @property
    def total_modes(self) -> int:
        return 2 * self.modes if self.check_modes is None else self.check_modes

    def mesh_config(self, modes: int | None = None) -> MeshConfig:
        """Mesh for ``modes`` modes, by default all checked modes."""
        modes = self.total_modes if modes is None else modes
        return MeshConfig(modes, self.mesh, self.refinement)


def _load_tree(config: RunConfig) -> MetricTree:
    tree = build_tree(load_graph(config.graph))
    tree.channels(config.exclude_vertex)
    return tree


def _state(config: RunConfig, modes: int) -> ModalState:
    if config.target in STATE_PRESETS:
        return state_preset(config.target, modes, config.equation, config.seed)
    path = Path(config.target)
    if not path.exists():
        raise InputError(
            f"--target {config.target} is neither a state file nor a preset "
            f"({', '.join(STATE_PRESETS)})"
        )
    return read_state_file(path)


def _problem(
    config: RunConfig, tree: MetricTree, spectral: SpectralData
) -> ControlProblem:
    equation = Equation(config.equation)
    horizon = config.horizon
    if horizon is None:
        horizon = default_horizon(tree, equation, config.exclude_vertex)
    return ControlProblem(
        equation,
        spectral,
        horizon,
        _state(config, config.modes),
        modes=config.modes,
        exclude=config.exclude_vertex,
        check_modes=config.total_modes,
        max_condition=config.max_condition,
    )


def _forward(
    problem: ControlProblem, control: BoundaryControl, times: Any = None
) -> Trajectory:
    spectral, horizon = problem.spectral, problem.horizon
    if problem.equation is Equation.WAVE:
        return wave_forward(spectral, control, horizon, times=times)
    if problem.equation is Equation.HEAT:
        return heat_forward(spectral, problem.state, control, horizon, times=times)
    return schrodinger_forward(spectral, problem.state, control, horizon, times=times)


def cmd_geometry(config: RunConfig) -> int:
    """Optical distances, diameter, center and eccentricities."""
    tree = _load_tree(config)
    diameter, pair = optical_diameter(tree)
    center = optical_center(tree)
    report = {
        "boundary": list(tree.boundary),
        "diameter": diameter,
        "diametral_pair": list(pair),
        "center": {"edge": center.edge, "x": center.x},
        "center_radius": max_boundary_distance(tree, center),
        "eccentricity": {str(v): eccentricity(tree, v) for v in tree.boundary},
        "total_optical_length": tree.total_optical_length,
        "distances": distance_table(tree).tolist(),
    }
    write_report(report, config.out / "geometry.json")

    print(f"Boundary: {', '.join(str(v) for v in tree.boundary)}")
    print(f"Optical diameter: {diameter:.12g} between {pair[0]} and {pair[1]}")
    print(f"Optical center: edge {center.edge}, x = {center.x:.12g}")
    for v in tree.boundary:
        print(f"  d_1({v}) = {eccentricity(tree, v):.12g}")
    return 0


def cmd_spectrum(config: RunConfig) -> int:
    """Dirichlet eigenvalues, boundary traces and the Weyl comparison."""
    tree = _load_tree(config)
    spectral = solve_spectrum(tree, config.mesh_config(config.modes))
    weyl = weyl_check(spectral, tree)
    export_spectral(spectral, config.out / "spectrum.json")
    diagnostics = weyl.to_dict()
    kirchhoff = kirchhoff_residuals(spectral)
    diagnostics["kirchhoff_max"] = float(np.max(kirchhoff, initial=0.0))
    diagnostics["orthonormality_defect"] = orthonormality_defect(spectral)
    write_report(diagnostics, config.out / "weyl.json")

    print(f"Modes: {spectral.modes} ({spectral.provenance['solver']} solver)")
    for k, value in enumerate(spectral.eigenvalues, start=1):
        print(f"  λ_{k} = {value:.12g}")
    print(f"Weyl deviation: {weyl.max_deviation:.3g}")
    return 0


def cmd_basis_report(config: RunConfig) -> int:
    """Gram conditioning sweeps and the parabolic biorthogonal growth."""
    tree = _load_tree(config)
    spectral = solve_spectrum(tree, config.mesh_config(config.modes))
    exclude = config.exclude_vertex
    critical = default_horizon(tree, Equation.WAVE, exclude)
    wave = FamilySpec.from_spectral(
        spectral, FamilyKind.WAVE, critical, config.modes, exclude
    )
    horizon_sweep = []
    for fraction in HORIZON_FRACTIONS:
        conditioning = gram(wave, horizon=fraction * critical).conditioning
        horizon_sweep.append(
            {"fraction": fraction, "horizon": fraction * critical}
            | conditioning.to_dict()
        )
    quarter, half = max(1, config.modes // 4), max(1, config.modes // 2)
    mode_counts = sorted({quarter, half, config.modes})
    mode_sweep = [
        {"modes": k} | gram(wave, modes=k).conditioning.to_dict() for k in mode_counts
    ]
    report: dict[str, Any] = {
        "critical_horizon": critical,
        "horizon_sweep": horizon_sweep,
        "mode_sweep": mode_sweep,
        "extension_orthogonality": extension_orthogonality(
            spectral, config.modes, critical
        ),
    }

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        if config.modes >= 2:
            tau = config.horizon or DEFAULT_HEAT_HORIZON
            parabolic = FamilySpec.from_spectral(
                spectral, FamilyKind.PARABOLIC, tau, config.modes, exclude
            )
            hyperbolic = FamilySpec.from_spectral(
                spectral, FamilyKind.EXP, critical, config.modes, exclude
            )
            report["growth"] = {"horizon": tau} | biorth_growth_fit(
                parabolic, hyperbolic=hyperbolic
            ).to_dict()
    report["warnings"] = [str(w.message) for w in caught]
    write_report(report, config.out / "basis_report.json")

    print(f"Critical horizon: {critical:.12g}")
    for row in horizon_sweep:
        print(
            f"  T = {row['horizon']:.6g}: σ_min = {row['sigma_min']:.3e}, "
            f"condition = {row['condition']:.3e}"
        )
    if "growth" in report:
        print(f"Biorthogonal growth exponent: {report['growth']['slope']:.6g}")
    for message in report["warnings"]:
        print(f"Warning: {message}", file=sys.stderr)
    return 0


def cmd_synthesize(config: RunConfig) -> int:
    """Synthesize a control and export it with its report."""
    tree = _load_tree(config)
    spectral = solve_spectrum(tree, config.mesh_config())
    problem = _problem(config, tree, spectral)
    control, report = synthesize(problem)
    control.to_csv(config.out / "control.csv")
    write_report(report.to_dict(), config.out / "synthesis.json")

    print(f"Equation: {problem.equation.value}, K = {problem.K}")
    print(f"Horizon: {problem.horizon:.12g}")
    print(f"Gram condition: {report.condition:.3e}")
    print(f"Relative moment residual: {report.relative_residual:.3e}")
    print(f"Control L2 norm: {report.control_norm:.12g}")
    for message in report.warnings:
        print(f"Warning: {message}", file=sys.stderr)
    return 0


def cmd_simulate(config: RunConfig) -> int:
    """Simulate the controlled system and export the modal trajectory."""
    tree = _load_tree(config)
    spectral = solve_spectrum(tree, config.mesh_config())
    if config.control is not None:
        control = read_control_csv(config.control, tree.channels(config.exclude_vertex))
        if config.horizon is None:
            config = replace(config, horizon=control.horizon)
        problem = _problem(config, tree, spectral)
    else:
        problem = _problem(config, tree, spectral)
        control, _ = synthesize(problem)
    times = np.linspace(0.0, problem.horizon, config.samples)
    trajectory = _forward(problem, control, times)
    trajectory.to_csv(config.out / "trajectory.csv")

    final = trajectory.final_state()
    print(f"Simulated {len(trajectory)} samples of {trajectory.modes} modes")
    print(f"Relative final error: {relative_final_error(problem, final):.3e}")
    print(f"  controlled modes: {relative_final_error(problem, final, problem.K):.3e}")
    print(f"  spill-over: {spill_over(problem, final):.3e}")
    return 0


def cmd_verify(config: RunConfig) -> int:
    """Synthesize, simulate and cross-check; exit 1 when a check fails.

    The final error is measured over all ``K_check`` modes, so spill-over
    onto the unconstrained modes counts against the tolerance.
    """
    tree = _load_tree(config)
    spectral = solve_spectrum(tree, config.mesh_config())
    problem = _problem(config, tree, spectral)
    control, report = synthesize(problem)
    final = _forward(problem, control, [problem.horizon]).final_state()
    error = relative_final_error(problem, final)
    checks: dict[str, Any] = {
        "final_error": error,
        "controlled_error": relative_final_error(problem, final, problem.K),
        "spill_over": spill_over(problem, final),
        "check_modes": problem.K_check,
        "tolerance": config.tolerance,
        "spectral_passed": error <= config.tolerance,
    }
    passed = error <= config.tolerance
    if problem.equation is Equation.WAVE:
        assert spectral.discretization is not None
        mesh = FdtdMesh(elements=dict(spectral.discretization.counts))
        grid = fdtd_wave(tree, control, problem.horizon, mesh)
        projected = project(grid, spectral, problem.K_check)
        fdtd_error = wave_difference(projected, final, spectral)
        checks |= {
            "fdtd_error": fdtd_error,
            "fdtd_final_error": relative_final_error(problem, projected),
            "fdtd_tolerance": FDTD_TOLERANCE,
            "fdtd_passed": fdtd_error <= FDTD_TOLERANCE,
        }
        passed = passed and fdtd_error <= FDTD_TOLERANCE
    checks["passed"] = passed
    checks["synthesis"] = report.to_dict()
    write_report(checks, config.out / "verify.json")

    print(
        f"Relative final error over {problem.K_check} modes: {error:.3e} "
        f"(tolerance {config.tolerance:.1e})"
    )
    print(f"  controlled modes: {checks['controlled_error']:.3e}")
    print(f"  spill-over: {checks['spill_over']:.3e}")
    if "fdtd_error" in checks:
        print(f"FDTD against spectral: {checks['fdtd_error']:.3e}")
    print("PASS" if passed else "FAIL")
    return 0 if passed else 1


COMMAND_HANDLERS: dict[str, Callable[[RunConfig], int]] = {
    "geometry": cmd_geometry,
    "spectrum": cmd_spectrum,
    "basis-report": cmd_basis_report,
    "synthesize": cmd_synthesize,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
}


def run(config: RunConfig) -> int:
    """Run one command and map errors to exit codes."""
    try:
        config.validate()
        return COMMAND_HANDLERS[config.command](config)
    except TreeControlError as e:
        logger.debug("command failed", exc_info=True)
        print(f"Error: {e}", file=sys.stderr)
        return e.exit_code


def _common_arguments() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--graph",
        default="interval",
        help="Graph file or preset: interval, equal-star, weighted-star "
        "(default: interval)",
    )
    common.add_argument(
        "--modes", type=int, default=10, help="Number of modes K (default: 10)"
    )
    common.add_argument(
        "--mesh",
        type=int,
        default=400,
        help="Elements on the optically longest edge (default: 400)",
    )
    common.add_argument(
        "--refinement",
        type=int,
        default=2,
        help="Refinement factor for eigenvalue extrapolation (default: 2)",
    )
    common.add_argument("--horizon", type=float, help="Control time T or τ")
    common.add_argument(
        "--exclude-vertex", type=int, help="Boundary vertex left uncontrolled"
    )
    common.add_argument(
        "--equation", choices=EQUATIONS, default="wave", help="Controlled system"
    )
    common.add_argument(
        "--target",
        default="mode1",
        help="State file or preset: mode1, zero, random (default: mode1)",
    )
    common.add_argument(
        "--out",
        default="tree-control-out",
        help="Output directory (default: tree-control-out)",
    )
    common.add_argument(
        "--seed", type=int, default=0, help="Seed of the random preset"
    )
    common.add_argument(
        "--check-modes",
        type=int,
        help="Modes used for residuals and the final error (default: 2K)",
    )
    common.add_argument(
        "--max-condition", type=float, help="Largest accepted Gram condition"
    )
    common.add_argument(
        "-v",
        "--verbose",
        action="count",
        default=0,
        help="Log progress (-v info, -vv debug)",
    )
    return common


def main(argv: list[str] | None = None) -> int:
    """Main entry point for CLI."""
    common = _common_arguments()
    parser = argparse.ArgumentParser(
        prog="tree-control",
        description="Boundary control of waves, heat and Schrodinger "
        "equations on metric trees",
    )
    parser.add_argument(
        "--version",
        action="version",
        version=f"%(prog)s {__version__}",
    )
    subparsers = parser.add_subparsers(dest="command", help="Commands")

    subparsers.add_parser(
        "geometry", parents=[common], help="Optical geometry of the graph"
    )
    subparsers.add_parser(
        "spectrum", parents=[common], help="Dirichlet spectral data"
    )
    subparsers.add_parser(
        "basis-report", parents=[common], help="Conditioning of exponential families"
    )
    subparsers.add_parser(
        "synthesize", parents=[common], help="Synthesize a boundary control"
    )
    simulate_parser = subparsers.add_parser(
        "simulate", parents=[common], help="Simulate the controlled system"
    )
    simulate_parser.add_argument(
        "--control", help="Control CSV to simulate instead of synthesizing"
    )
    simulate_parser.add_argument(
        "--samples", type=int, default=201, help="Time samples (default: 201)"
    )
    verify_parser = subparsers.add_parser(
        "verify", parents=[common], help="End-to-end check of a synthesized control"
    )
    verify_parser.add_argument(
        "--tolerance",
        type=float,
        default=1e-6,
        help="Largest accepted relative final error (default: 1e-6)",
    )

    args = parser.parse_args(argv)

    if not args.command:
        parser.print_help()
        return 0

    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    return run(RunConfig.from_args(args))


if __name__ == "__main__":
    sys.exit(main())

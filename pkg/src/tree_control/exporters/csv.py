"""CSV exporters for controls, trajectories and grid states.

Floats are written with 17 significant digits so that every value reads
back bit-identical. Complex quantities get ``.re`` and ``.im`` columns.
"""

from __future__ import annotations

import csv
from collections.abc import Sequence
from pathlib import Path
from typing import TYPE_CHECKING, Any

import numpy as np
from numpy.typing import NDArray

from tree_control.utils.numeric import format_float

if TYPE_CHECKING:
    from tree_control.models import BoundaryControl, GridState, Trajectory

TIME_COLUMN = "t"
GRID_COLUMNS = ["edge", "x", "value", "velocity"]


def _split_complex(names: Sequence[str], values: NDArray[Any]) -> tuple[list[str], Any]:
    if not np.iscomplexobj(values):
        return list(names), values
    columns = [f"{name}.{part}" for name in names for part in ("re", "im")]
    table = np.empty((values.shape[0], 2 * values.shape[1]))
    table[:, 0::2] = values.real
    table[:, 1::2] = values.imag
    return columns, table


def _write(output_path: Path, columns: list[str], rows: NDArray[np.float64]) -> None:
    output_path.parent.mkdir(parents=True, exist_ok=True)
    with open(output_path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_float(v) for v in row])


def control_table(
    control: BoundaryControl, per_period: int = 40
) -> tuple[list[str], NDArray[np.float64]]:
    """Column names and rows of a control export."""
    times = control.sample_grid(per_period)
    values = control.full_values(times)
    names, table = _split_complex([f"gamma_{v}" for v in control.boundary], values)
    return [TIME_COLUMN] + names, np.column_stack([times, table])


def export_control_csv(
    control: BoundaryControl, output_path: Path, per_period: int = 40
) -> None:
    """Export control samples with one column per boundary vertex.

    Excluded vertices get a column of zeros.

    Args:
        control: Control to sample
        output_path: Path to output file
        per_period: Samples per period of the fastest mode
    """
    columns, rows = control_table(control, per_period)
    _write(output_path, columns, rows)


def trajectory_columns(trajectory: Trajectory) -> list[str]:
    """Column names of a trajectory export, time first."""
    return trajectory_table(trajectory)[0]


def trajectory_table(
    trajectory: Trajectory,
) -> tuple[list[str], NDArray[np.float64]]:
    """Column names and rows: t, c_1..c_K, then dc_1..dc_K if present."""
    modes = range(1, trajectory.modes + 1)
    names, table = _split_complex([f"c_{k}" for k in modes], trajectory.coefficients)
    columns = [TIME_COLUMN] + names
    blocks = [trajectory.times[:, None], table]
    if trajectory.velocities is not None:
        names, table = _split_complex([f"dc_{k}" for k in modes], trajectory.velocities)
        columns += names
        blocks.append(table)
    return columns, np.column_stack(blocks)


def export_trajectory_csv(trajectory: Trajectory, output_path: Path) -> None:
    """Export a modal trajectory to CSV.

    Args:
        trajectory: Trajectory to export
        output_path: Path to output file
    """
    columns, rows = trajectory_table(trajectory)
    _write(output_path, columns, rows)


def export_grid_csv(grid: GridState, output_path: Path) -> None:
    """Export nodal values edge by edge (velocity left empty when unknown).

    Args:
        grid: Grid state to export
        output_path: Path to output file
    """
    output_path.parent.mkdir(parents=True, exist_ok=True)
    with open(output_path, "w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=GRID_COLUMNS)
        writer.writeheader()
        for edge_id in sorted(grid.coordinates):
            x = grid.coordinates[edge_id]
            u = grid.values[edge_id]
            v = None if grid.velocity is None else grid.velocity[edge_id]
            for i in range(x.shape[0]):
                writer.writerow(
                    {
                        "edge": edge_id,
                        "x": format_float(x[i]),
                        "value": format_float(u[i]),
                        "velocity": "" if v is None else format_float(v[i]),
                    }
                )

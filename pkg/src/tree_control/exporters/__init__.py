"""Export formats for controls, trajectories, grid states and reports."""

from tree_control.exporters.csv import (
    export_control_csv,
    export_grid_csv,
    export_trajectory_csv,
)
from tree_control.exporters.report import export_spectral, export_state, write_report

__all__ = [
    "export_control_csv",
    "export_grid_csv",
    "export_spectral",
    "export_state",
    "export_trajectory_csv",
    "write_report",
]

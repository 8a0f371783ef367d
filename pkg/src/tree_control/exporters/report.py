"""JSON exporters for reports and spectral data."""

from __future__ import annotations

import json
from collections.abc import Mapping
from pathlib import Path
from typing import TYPE_CHECKING, Any

if TYPE_CHECKING:
    from tree_control.models import ModalState
    from tree_control.spectral import SpectralData


def write_report(data: Mapping[str, Any], output_path: Path) -> None:
    """Write a report as indented JSON.

    Floats use Python's shortest round-trip representation, so reports of
    identical runs are byte-identical.

    Args:
        data: JSON-serializable mapping
        output_path: Path to output file
    """
    output_path.parent.mkdir(parents=True, exist_ok=True)
    with open(output_path, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2)
        f.write("\n")


def export_spectral(spectral: SpectralData, output_path: Path) -> None:
    """Export eigenvalues, boundary traces and mesh provenance.

    Args:
        spectral: Spectral data to export
        output_path: Path to output file
    """
    write_report(spectral.to_dict(), output_path)


def export_state(state: ModalState, output_path: Path) -> None:
    """Export modal coefficients in the state-file layout."""
    write_report(state.to_dict(), output_path)

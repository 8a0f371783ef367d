"""Readers for the files tree-control writes.

Every exporter has a reader here that restores the in-memory values bit
for bit (CSV floats carry 17 significant digits, JSON uses round-trip
repr).
"""

from __future__ import annotations

import csv
import json
from collections.abc import Sequence
from pathlib import Path
from typing import Any

import numpy as np
from numpy.typing import NDArray

from tree_control.exporters.csv import TIME_COLUMN
from tree_control.models import BoundaryControl, ModalState, Trajectory
from tree_control.parsers.base import ParseError, SchemaError
from tree_control.spectral import SpectralData

SPECTRAL_FIELDS = ("eigenvalues", "kappa", "alpha", "boundary")


def decode_array(value: Any, field: str = "values") -> NDArray[Any]:
    """Inverse of ``models.encode_array``."""
    if isinstance(value, dict):
        if "re" not in value or "im" not in value:
            message = f"complex field '{field}' needs 're' and 'im'"
            raise SchemaError(message, None, field)
        return np.asarray(value["re"], dtype=float) + 1j * np.asarray(
            value["im"], dtype=float
        )
    try:
        return np.asarray(value, dtype=float)
    except (TypeError, ValueError) as e:
        raise SchemaError(f"field '{field}' must hold numbers", None, field) from e


def _load_json(path: Path) -> Any:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ParseError(f"cannot read {path}: {e}") from e
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON in {path}: {e.msg}", e.lineno, e.colno) from e


def _read_table(path: Path) -> tuple[list[str], NDArray[np.float64]]:
    try:
        with open(path, newline="", encoding="utf-8") as f:
            rows = list(csv.reader(f))
    except OSError as e:
        raise ParseError(f"cannot read {path}: {e}") from e
    if not rows or not rows[0] or rows[0][0] != TIME_COLUMN:
        raise SchemaError(f"{path}: first column must be '{TIME_COLUMN}'", None, "t")
    header, body = rows[0], rows[1:]
    values = np.empty((len(body), len(header)))
    for i, row in enumerate(body):
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} fields, got {len(row)}", i + 2)
        try:
            values[i] = [float(cell) for cell in row]
        except ValueError as e:
            raise ParseError(f"bad number in {path}: {e}", i + 2) from e
    return header, values


def _merge_complex(
    header: Sequence[str], values: NDArray[np.float64]
) -> tuple[list[str], NDArray[Any]]:
    # fold name.re / name.im column pairs back into complex columns
    if not any(name.endswith(".re") for name in header):
        return list(header), values
    names = [name[: -len(".re")] for name in header[0::2]]
    return names, values[:, 0::2] + 1j * values[:, 1::2]


def read_spectral(path: Path) -> SpectralData:
    """Read spectral data written by ``export_spectral``.

    Eigenfunctions are not exported, so ``vectors`` is None.
    """
    data = _load_json(path)
    if not isinstance(data, dict):
        raise SchemaError("spectral file must contain a JSON object")
    for key in SPECTRAL_FIELDS:
        if key not in data:
            raise SchemaError(f"missing field '{key}'", None, key)
    eigenvalues = decode_array(data["eigenvalues"], "eigenvalues")
    boundary = tuple(int(v) for v in data["boundary"])
    shape = (eigenvalues.shape[0], len(boundary))
    kappa = decode_array(data["kappa"], "kappa").reshape(shape)
    alpha = decode_array(data["alpha"], "alpha").reshape(shape)
    return SpectralData(
        eigenvalues, kappa, alpha, boundary, provenance=data.get("provenance", {})
    )


def read_state_file(path: Path) -> ModalState:
    """Read modal coefficients ``{"a": [...], "b": [...]}`` (b optional)."""
    data = _load_json(path)
    if not isinstance(data, dict) or "a" not in data:
        raise SchemaError("state file needs an 'a' field", None, "a")
    a = decode_array(data["a"], "a")
    b = None if data.get("b") is None else decode_array(data["b"], "b")
    if a.ndim != 1 or (b is not None and b.shape != a.shape):
        raise SchemaError("'a' and 'b' must be lists of equal length", None, "b")
    return ModalState(a, b)


def read_control_csv(
    path: Path, channels: Sequence[int] | None = None
) -> BoundaryControl:
    """Read a control written by ``export_control_csv`` as a gridded control.

    Args:
        path: CSV file with columns t, gamma_<vertex>...
        channels: Active vertices (defaults to every column)
    """
    header, values = _read_table(path)
    names, table = _merge_complex(header[1:], values[:, 1:])
    try:
        boundary = tuple(int(name.removeprefix("gamma_")) for name in names)
    except ValueError as e:
        raise SchemaError(f"{path}: control columns must be gamma_<vertex>") from e
    active = boundary if channels is None else tuple(channels)
    missing = [v for v in active if v not in boundary]
    if missing:
        message = f"{path}: no columns for vertices {missing}"
        raise SchemaError(message, None, "channels")
    columns = [boundary.index(v) for v in active]
    times = values[:, 0]
    return BoundaryControl(
        float(times[-1]),
        boundary,
        active,
        is_complex=bool(np.iscomplexobj(table)),
        sample_times=times,
        sample_values=table[:, columns],
    )


def read_trajectory_csv(path: Path, equation: str | None = None) -> Trajectory:
    """Read a trajectory written by ``export_trajectory_csv``.

    Without ``equation`` the kind is inferred: velocities mean wave, complex
    coefficients Schrodinger, anything else heat.
    """
    header, values = _read_table(path)
    times = values[:, 0]
    positions = [i for i, name in enumerate(header) if name.startswith("c_")]
    velocities = [i for i, name in enumerate(header) if name.startswith("dc_")]
    _, coefficients = _merge_complex(
        [header[i] for i in positions], values[:, positions]
    )
    rates = None
    if velocities:
        names = [header[i] for i in velocities]
        _, rates = _merge_complex(names, values[:, velocities])
    if equation is None:
        if rates is not None:
            equation = "wave"
        elif np.iscomplexobj(coefficients):
            equation = "schrodinger"
        else:
            equation = "heat"
    return Trajectory(times, coefficients, rates, equation, "spectral")

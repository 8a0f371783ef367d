"""Parser for JSON graph specification files.

Layout::

    {
      "vertices": [0, 1, 2, 3],
      "edges": [
        {"id": 0, "tail": 0, "head": 1, "length": 1.0,
         "density": {"type": "constant", "params": [1.0]}},
        ...
      ]
    }

``density`` is optional (constant 1). Sampled densities take either a list
of values or ``{"values": [...], "positions": [...]}`` with positions as
fractions of the edge.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from tree_control.models import DENSITY_KINDS, DensityProfile, EdgeSpec, GraphSpec
from tree_control.parsers.base import BaseParser, ParseError, SchemaError

EDGE_FIELDS = ("id", "tail", "head", "length")


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _numbers(value: Any, edge: int, field: str) -> tuple[float, ...]:
    if not isinstance(value, list) or not all(_is_number(v) for v in value):
        raise SchemaError(
            f"edge {edge}: '{field}' must be a list of numbers", edge, field
        )
    return tuple(float(v) for v in value)


def _density(raw: Any, edge: int) -> DensityProfile:
    if raw is None:
        return DensityProfile.constant(1.0)
    if not isinstance(raw, dict):
        raise SchemaError(f"edge {edge}: 'density' must be an object", edge, "density")
    kind = raw.get("type")
    if kind not in DENSITY_KINDS:
        raise SchemaError(
            f"edge {edge}: density type must be one of {DENSITY_KINDS}, got {kind!r}",
            edge,
            "density.type",
        )
    if "params" not in raw:
        raise SchemaError(
            f"edge {edge}: missing field 'density.params'", edge, "density.params"
        )
    params = raw["params"]
    if kind == "sampled" and isinstance(params, dict):
        if "values" not in params:
            raise SchemaError(
                f"edge {edge}: sampled density needs 'values'",
                edge,
                "density.params.values",
            )
        values = _numbers(params["values"], edge, "density.params.values")
        positions = None
        if "positions" in params:
            positions = _numbers(params["positions"], edge, "density.params.positions")
        return DensityProfile.sampled(values, positions)
    return DensityProfile(kind, _numbers(params, edge, "density.params"))


def _edge(raw: Any, index: int) -> EdgeSpec:
    if not isinstance(raw, dict):
        raise SchemaError(f"edge #{index} must be an object", None, "edges")
    edge_id = raw.get("id", index)
    for name in EDGE_FIELDS:
        if name not in raw:
            raise SchemaError(f"edge {edge_id}: missing field '{name}'", edge_id, name)
    for name in ("id", "tail", "head"):
        if not isinstance(raw[name], int) or isinstance(raw[name], bool):
            raise SchemaError(
                f"edge {edge_id}: '{name}' must be an integer", edge_id, name
            )
    if not _is_number(raw["length"]):
        raise SchemaError(
            f"edge {edge_id}: 'length' must be a number", edge_id, "length"
        )
    return EdgeSpec(
        raw["id"],
        raw["tail"],
        raw["head"],
        float(raw["length"]),
        _density(raw.get("density"), raw["id"]),
    )


def graph_from_dict(data: Any) -> GraphSpec:
    """Build a GraphSpec from the decoded JSON document.

    Raises:
        SchemaError: A required key is missing or has the wrong type
    """
    if not isinstance(data, dict):
        raise SchemaError("graph file must contain a JSON object")
    for key in ("vertices", "edges"):
        if key not in data:
            raise SchemaError(f"missing top-level field '{key}'", None, key)
        if not isinstance(data[key], list):
            raise SchemaError(f"'{key}' must be a list", None, key)
    vertices = data["vertices"]
    if not all(isinstance(v, int) and not isinstance(v, bool) for v in vertices):
        raise SchemaError("vertex ids must be integers", None, "vertices")
    edges = tuple(_edge(raw, i) for i, raw in enumerate(data["edges"]))
    return GraphSpec(tuple(vertices), edges)


class JsonGraphParser(BaseParser):
    """Parser for ``.json`` graph files."""

    @property
    def name(self) -> str:
        return "JSON graph"

    @property
    def formats(self) -> list[str]:
        return ["json"]

    def can_parse(self, filepath: Path) -> bool:
        return filepath.suffix.lower() == ".json"

    def parse(self, filepath: Path) -> GraphSpec:
        """Read a graph specification from a JSON file.

        Args:
            filepath: Path to the JSON file

        Returns:
            GraphSpec with edges in file order

        Raises:
            ParseError: If the file cannot be read or is not valid JSON
            SchemaError: If the document does not follow the layout above
        """
        try:
            text = filepath.read_text(encoding="utf-8")
        except OSError as e:
            raise ParseError(f"cannot read {filepath}: {e}") from e
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            message = f"invalid JSON in {filepath}: {e.msg}"
            raise ParseError(message, e.lineno, e.colno) from e
        return graph_from_dict(data)

"""Parser for plain-text edge lists.

One edge per line, ``#`` starts a comment::

    # id tail head length [density]
    0 0 1 1.0
    1 0 2 2.0 constant 2.25
    2 0 3 3.0 linear 1 0.5
    3 0 4 1.0 sampled 1 2 4

Vertices are the endpoints that appear in the list.
"""

from __future__ import annotations

from pathlib import Path

from tree_control.models import DENSITY_KINDS, DensityProfile, EdgeSpec, GraphSpec
from tree_control.parsers.base import BaseParser, ParseError, SchemaError

SUFFIXES = (".edges", ".txt")


def _column(line: str, tokens: list[str], index: int) -> int:
    # 1-based column of the token
    position = 0
    for i, token in enumerate(tokens):
        position = line.index(token, position)
        if i == index:
            return position + 1
        position += len(token)
    return 1


def _parse_line(line: str, number: int) -> EdgeSpec:
    tokens = line.split()
    if len(tokens) < 4:
        raise ParseError("expected 'id tail head length [density]'", number, 1)
    values: list[int | float] = []
    for i, token in enumerate(tokens[:4]):
        try:
            values.append(float(token) if i == 3 else int(token))
        except ValueError as e:
            raise ParseError(
                f"bad number {token!r}", number, _column(line, tokens, i)
            ) from e
    edge_id, tail, head = (int(v) for v in values[:3])
    density = DensityProfile.constant(1.0)
    if len(tokens) > 4:
        kind = tokens[4]
        if kind not in DENSITY_KINDS:
            raise SchemaError(
                f"edge {edge_id}: unknown density type {kind!r}",
                edge_id,
                "density.type",
                number,
            )
        params = []
        for i, token in enumerate(tokens[5:], start=5):
            try:
                params.append(float(token))
            except ValueError as e:
                raise ParseError(
                    f"bad number {token!r}", number, _column(line, tokens, i)
                ) from e
        density = DensityProfile(kind, tuple(params))
    return EdgeSpec(edge_id, tail, head, float(values[3]), density)


class EdgeListParser(BaseParser):
    """Parser for whitespace-separated edge lists."""

    @property
    def name(self) -> str:
        return "Edge list"

    @property
    def formats(self) -> list[str]:
        return [suffix.lstrip(".") for suffix in SUFFIXES]

    def can_parse(self, filepath: Path) -> bool:
        return filepath.suffix.lower() in SUFFIXES

    def parse(self, filepath: Path) -> GraphSpec:
        """Read a graph specification from an edge list.

        Args:
            filepath: Path to the text file

        Returns:
            GraphSpec with vertices in ascending order

        Raises:
            ParseError: If a line is malformed
        """
        try:
            text = filepath.read_text(encoding="utf-8")
        except OSError as e:
            raise ParseError(f"cannot read {filepath}: {e}") from e
        edges = []
        for number, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0]
            if line.strip():
                edges.append(_parse_line(line, number))
        vertices = sorted({v for edge in edges for v in (edge.tail, edge.head)})
        return GraphSpec(tuple(vertices), tuple(edges))

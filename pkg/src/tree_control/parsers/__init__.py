"""Parsers for graph specification files and exported results."""

from pathlib import Path

from tree_control.models import GraphSpec
from tree_control.parsers.base import (
    BaseParser,
    ParseError,
    SchemaError,
    UnsupportedFormatError,
)
from tree_control.parsers.edgelist import EdgeListParser
from tree_control.parsers.json_graph import JsonGraphParser
from tree_control.parsers.results import (
    read_control_csv,
    read_spectral,
    read_state_file,
    read_trajectory_csv,
)
from tree_control.presets import GRAPH_PRESETS, graph_preset

# Registry of available parsers (order matters - first match wins)
PARSERS: list[BaseParser] = [
    JsonGraphParser(),
    EdgeListParser(),
]


def get_parser(filepath: str | Path) -> BaseParser:
    """Get a parser that can handle the given file.

    Args:
        filepath: Path to the graph file

    Returns:
        Parser instance that can handle the file

    Raises:
        UnsupportedFormatError: If no parser supports the file
    """
    path = Path(filepath)
    for parser in PARSERS:
        if parser.can_parse(path):
            return parser
    raise UnsupportedFormatError(f"No parser found for: {filepath}")


def parse_graph_file(filepath: str | Path) -> GraphSpec:
    """Read a graph specification, choosing the parser by file type.

    Args:
        filepath: Path to the graph file

    Returns:
        Unvalidated GraphSpec

    Raises:
        UnsupportedFormatError: If no parser supports the file
        ParseError: If parsing fails
    """
    return get_parser(filepath).parse(Path(filepath))


def load_graph(source: str | Path) -> GraphSpec:
    """Graph from a preset name or a file path."""
    if isinstance(source, str) and source in GRAPH_PRESETS:
        return graph_preset(source)
    path = Path(source)
    if not path.exists():
        raise ParseError(
            f"{source} is neither a graph file nor a preset "
            f"({', '.join(sorted(GRAPH_PRESETS))})"
        )
    return parse_graph_file(path)


__all__ = [
    "BaseParser",
    "EdgeListParser",
    "JsonGraphParser",
    "ParseError",
    "SchemaError",
    "UnsupportedFormatError",
    "PARSERS",
    "get_parser",
    "load_graph",
    "parse_graph_file",
    "read_control_csv",
    "read_spectral",
    "read_state_file",
    "read_trajectory_csv",
]

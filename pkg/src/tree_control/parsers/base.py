"""Base parser interface for graph specification files."""

from __future__ import annotations

from abc import ABC, abstractmethod
from pathlib import Path

from tree_control.errors import InputError
from tree_control.models import GraphSpec


class BaseParser(ABC):
    """Abstract base class for graph file parsers.

    Subclasses must implement can_parse() and parse() methods.
    """

    @property
    @abstractmethod
    def name(self) -> str:
        """Human-readable name for this parser."""

    @property
    @abstractmethod
    def formats(self) -> list[str]:
        """List of format identifiers this parser handles."""

    @abstractmethod
    def can_parse(self, filepath: Path) -> bool:
        """Check if this parser can handle the given file.

        Args:
            filepath: Path to the graph file

        Returns:
            True if this parser supports the file format
        """

    @abstractmethod
    def parse(self, filepath: Path) -> GraphSpec:
        """Read a graph specification from the file.

        Args:
            filepath: Path to the graph file

        Returns:
            Unvalidated GraphSpec (validate with ``build_tree``)

        Raises:
            ParseError: If the file is not well-formed
            SchemaError: If a required field is missing or has the wrong type
        """


class ParseError(InputError):
    """Raised when a file cannot be parsed.

    Attributes:
        line: 1-based line of the problem, if known
        column: 1-based column of the problem, if known
    """

    def __init__(
        self, message: str, line: int | None = None, column: int | None = None
    ) -> None:
        location = ""
        if line is not None:
            location = f" (line {line}" + (f", column {column})" if column else ")")
        super().__init__(message + location)
        self.line = line
        self.column = column


class SchemaError(ParseError):
    """Raised when a well-formed file does not follow the expected schema.

    Attributes:
        edge: Id of the offending edge, if any
        field: Name of the offending field
    """

    def __init__(
        self,
        message: str,
        edge: int | None = None,
        field: str | None = None,
        line: int | None = None,
    ) -> None:
        super().__init__(message, line)
        self.edge = edge
        self.field = field


class UnsupportedFormatError(InputError):
    """Raised when no parser supports the file format."""

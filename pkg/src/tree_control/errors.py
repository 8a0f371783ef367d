"""Exception and warning types for tree-control.

Every error carries an ``exit_code`` so the CLI can map failures to the
documented process exit status without a lookup table.
"""

from __future__ import annotations


class TreeControlError(Exception):
    """Base class for all tree-control errors (internal failures)."""

    exit_code = 5


class InputError(TreeControlError):
    """Raised when user supplied input is invalid."""

    exit_code = 2


class GraphError(InputError):
    """Raised when a graph specification does not describe a metric tree."""


class CycleDetected(GraphError):
    """Raised when the graph contains a cycle."""


class Disconnected(GraphError):
    """Raised when the graph has more than one connected component."""


class NonpositiveDensity(GraphError):
    """Raised when a density profile is not bounded below by a positive constant."""


class NonpositiveLength(GraphError):
    """Raised when an edge length is not positive."""


class InvalidPoint(GraphError):
    """Raised when a point does not lie on the tree."""


class InconsistentChannels(InputError):
    """Raised when a channel set, state or mode count does not fit the problem."""


class IndexOutOfRange(TreeControlError, IndexError):
    """Raised when a family member index is outside the family."""


class NumericallySingularError(TreeControlError):
    """Raised when a Gram matrix is singular at working precision."""

    exit_code = 3


class MeshError(TreeControlError):
    """Raised when a mesh or time step cannot resolve the requested problem."""

    exit_code = 4


class MeshTooCoarse(MeshError):
    """Raised when a mesh has too few nodes per wavelength for the mode count."""


class DegenerateMassMatrix(MeshError):
    """Raised when the discrete mass matrix is empty or not positive definite."""


class CFLViolation(MeshError):
    """Raised when an explicit time step exceeds the stability limit."""


class UnderresolvedQuadrature(MeshError):
    """Raised when a sampled control is too coarse for the fastest mode."""


class EigenSolverFailure(TreeControlError):
    """Raised when the eigenvalue solver does not converge."""


class NumericallySingularWarning(UserWarning):
    """Emitted when a Gram solve falls back to a spectral cut-off."""

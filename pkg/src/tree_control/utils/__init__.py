"""Utility functions for tree-control."""

from tree_control.utils.numeric import (
    cos_integral,
    decay_integral,
    exp_integral,
    exprel_integral,
    format_float,
    sin_integral,
)

__all__ = [
    "cos_integral",
    "decay_integral",
    "exp_integral",
    "exprel_integral",
    "format_float",
    "sin_integral",
]

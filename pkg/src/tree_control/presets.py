"""Named graphs and states used by the CLI and the acceptance tests."""

from __future__ import annotations

import math
from collections.abc import Callable

import numpy as np

from tree_control.errors import InputError
from tree_control.models import DensityProfile, EdgeSpec, GraphSpec, ModalState


def interval(length: float = math.pi, density: float = 1.0) -> GraphSpec:
    """A single edge ``0 -> 1``."""
    return GraphSpec(
        (0, 1), (EdgeSpec(0, 0, 1, length, DensityProfile.constant(density)),)
    )


def star(lengths: tuple[float, ...], densities: tuple[float, ...]) -> GraphSpec:
    """Star with center 0 and leaves ``1..n``; edge ``i`` runs center -> leaf."""
    if len(lengths) != len(densities):
        raise InputError("a star needs one density per edge")
    edges = tuple(
        EdgeSpec(i, 0, i + 1, length, DensityProfile.constant(rho))
        for i, (length, rho) in enumerate(zip(lengths, densities))
    )
    return GraphSpec(tuple(range(len(lengths) + 1)), edges)


GRAPH_PRESETS: dict[str, Callable[[], GraphSpec]] = {
    "interval": interval,
    "equal-star": lambda: star((1.0, 1.0, 1.0), (1.0, 1.0, 1.0)),
    "weighted-star": lambda: star((1.0, 2.0, 3.0), (1.0, 2.25, 4.0)),
}

STATE_PRESETS = ("mode1", "zero", "random")


def graph_preset(name: str) -> GraphSpec:
    try:
        return GRAPH_PRESETS[name]()
    except KeyError as e:
        raise InputError(
            f"unknown graph preset {name!r} (choose from {sorted(GRAPH_PRESETS)})"
        ) from e


def random_state(
    modes: int, seed: int = 0, velocity: bool = True, complex_: bool = False
) -> ModalState:
    """Band-limited random state on the first ``modes`` modes.

    Coefficients are standard normal divided by the mode number.
    """
    rng = np.random.default_rng(seed)
    scale = 1.0 / np.arange(1, modes + 1)
    a = rng.standard_normal(modes) * scale
    if complex_:
        a = a + 1j * rng.standard_normal(modes) * scale
    b = rng.standard_normal(modes) * scale if velocity else None
    return ModalState(a, b)


def state_preset(
    name: str, modes: int, equation: str = "wave", seed: int = 0
) -> ModalState:
    """A named target (wave) or initial (heat, Schrodinger) state."""
    velocity = equation == "wave"
    if name == "mode1":
        return ModalState.basis(0, modes, velocity)
    if name == "zero":
        return ModalState.zero(modes, velocity)
    if name == "random":
        return random_state(modes, seed, velocity, complex_=equation == "schrodinger")
    raise InputError(f"unknown state preset {name!r} (choose from {STATE_PRESETS})")

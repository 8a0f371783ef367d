"""Tree Control - boundary controllability of waves on metric trees.

Basic usage:
    from tree_control import (
        ControlProblem, Equation, MeshConfig, ModalState,
        build_tree, load_graph, solve_spectrum, synthesize,
    )

    tree = build_tree(load_graph("weighted-star"))
    spectral = solve_spectrum(tree, MeshConfig(modes=10))
    problem = ControlProblem(
        Equation.WAVE, spectral, 10.0, ModalState.basis(0, 10, velocity=True)
    )
    control, report = synthesize(problem)
    control.to_csv("control.csv")

For more control:
    from tree_control.families import FamilyKind, FamilySpec, gram

    fam = FamilySpec.from_spectral(spectral, FamilyKind.WAVE, 10.0)
    print(gram(fam).conditioning)
"""

__version__ = "0.1.0"

from tree_control.errors import (  # noqa: E402
    InconsistentChannels,
    InputError,
    NumericallySingularError,
    TreeControlError,
)
from tree_control.graph import MetricTree, build_tree  # noqa: E402
from tree_control.models import (  # noqa: E402
    BoundaryControl,
    GraphSpec,
    ModalState,
    Trajectory,
)
from tree_control.parsers import ParseError, load_graph  # noqa: E402
from tree_control.spectral import MeshConfig, SpectralData, solve_spectrum  # noqa: E402
from tree_control.synthesis import (  # noqa: E402
    ControlProblem,
    Equation,
    SynthesisReport,
    synthesize,
)

__all__ = [
    "BoundaryControl",
    "ControlProblem",
    "Equation",
    "GraphSpec",
    "InconsistentChannels",
    "InputError",
    "MeshConfig",
    "MetricTree",
    "ModalState",
    "NumericallySingularError",
    "ParseError",
    "SpectralData",
    "SynthesisReport",
    "Trajectory",
    "TreeControlError",
    "build_tree",
    "load_graph",
    "solve_spectrum",
    "synthesize",
    "__version__",
]

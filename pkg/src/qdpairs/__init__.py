"""Steady-state cascade emission and photon-pair entanglement of a driven
quantum dot in a two-mode (circularly polarized) microcavity."""

from qdpairs.fock_basis import (
    ORDERING_VERSION,
    Operator,
    ProductBasis,
    QdLevel,
    annihilation,
    build_basis,
    excitation_number,
    qd_transition,
)
from qdpairs.model import (
    ModelParams,
    build_drive,
    build_h0,
    rotating_frame_hamiltonian,
)
from qdpairs.dressed import (
    DressedState,
    TransitionTable,
    cubic_shifts,
    diagonalize_manifolds,
    g_minus,
    transition_table,
)
from qdpairs.lindblad import (
    Liouvillian,
    SteadyState,
    SteadyStateError,
    build_liouvillian,
    dissipator,
    steady_state,
)
from qdpairs.pairs import (
    PAIR_LABELS,
    PairDensityMatrix,
    ZeroPairFluxError,
    build_transition_operator,
    concurrence,
    eof,
    pair_density_matrix,
)

__version__ = "0.1.0"

__all__ = [
    "ORDERING_VERSION",
    "Operator",
    "ProductBasis",
    "QdLevel",
    "annihilation",
    "build_basis",
    "excitation_number",
    "qd_transition",
    "ModelParams",
    "build_drive",
    "build_h0",
    "rotating_frame_hamiltonian",
    "DressedState",
    "TransitionTable",
    "cubic_shifts",
    "diagonalize_manifolds",
    "g_minus",
    "transition_table",
    "Liouvillian",
    "SteadyState",
    "SteadyStateError",
    "build_liouvillian",
    "dissipator",
    "steady_state",
    "PAIR_LABELS",
    "PairDensityMatrix",
    "ZeroPairFluxError",
    "build_transition_operator",
    "concurrence",
    "eof",
    "pair_density_matrix",
]

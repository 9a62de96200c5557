"""Liouville-space simulator for Pauli and pseudo twirling of quantum gates.

Dense superoperator dynamics for one to three qubits: randomized compiling
of Clifford gates, pseudo twirling of arbitrary Pauli-generated gates,
Lindblad noise, intra-gate pulse slicing, and first-order KIK mitigation,
plus a declarative experiment runner (see :mod:`pstlab.cli`).
"""

__version__ = "0.1.0"

from .liouville import (
    devectorize,
    expectation,
    expm,
    hamiltonian_superop,
    op_norm,
    triple_product_superop,
    unitary_superop,
    vectorize,
)
from .noise import (
    Dissipator,
    NoiseModel,
    PauliTransfer,
    amplitude_damping,
    extract_noise,
    hermiticity_G,
    lindblad_superop,
    observable_error_bound,
    pauli_transfer_decompose,
)
from .paulis import PauliString, all_paulis, pauli_matrix, pauli_superop, sgn
from .twirl import (
    GateModel,
    HamiltonianTerm,
    NonCliffordGateError,
    TwirlPlan,
    pst_average,
    pst_gate,
    pst_second_order_predictor,
    rc_twirl,
)

__all__ = [
    "__version__",
    "vectorize",
    "devectorize",
    "triple_product_superop",
    "hamiltonian_superop",
    "unitary_superop",
    "expm",
    "op_norm",
    "expectation",
    "PauliString",
    "all_paulis",
    "pauli_matrix",
    "pauli_superop",
    "sgn",
    "Dissipator",
    "NoiseModel",
    "PauliTransfer",
    "lindblad_superop",
    "amplitude_damping",
    "extract_noise",
    "hermiticity_G",
    "pauli_transfer_decompose",
    "observable_error_bound",
    "HamiltonianTerm",
    "GateModel",
    "TwirlPlan",
    "NonCliffordGateError",
    "rc_twirl",
    "pst_gate",
    "pst_average",
    "pst_second_order_predictor",
]

"""n-qubit Pauli strings in symplectic form and their Liouville-space lifts.

Each qubit carries an ``(x, z)`` bit pair decoding to I (0,0), X (1,0),
Y (1,1) or Z (0,1); the global phase of a product is never tracked because
every lift used here has the form ``P kron conj(P)`` where phases cancel.
Commutation is an O(n) symplectic product instead of a matrix trace.

Enumeration is fixed for reproducible sampling: the per-qubit code is the
two-bit integer ``(x << 1) | z`` (I=0, Z=1, X=2, Y=3) and the index of a
string reads qubit 0 as the most significant base-4 digit, so the identity
string always has index 0 and text labels like ``"IXZ"`` (qubit 0 leftmost)
sort the same way as indices.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

from .liouville import hamiltonian_superop

__all__ = [
    "SIGMA",
    "PauliString",
    "all_paulis",
    "pauli_matrix",
    "pauli_superop",
    "pauli_hamiltonian_superop",
    "sgn",
    "sign_table",
    "signed_twirl_sum",
    "plain_twirl_sum",
]

SIGMA = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

_LETTER_FROM_BITS = {(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}
_BITS_FROM_LETTER = {v: k for k, v in _LETTER_FROM_BITS.items()}


@dataclass(frozen=True)
class PauliString:
    """Immutable n-qubit Pauli label in symplectic (x-bits, z-bits) form."""

    x_bits: tuple[int, ...]
    z_bits: tuple[int, ...]

    def __post_init__(self):
        if len(self.x_bits) != len(self.z_bits) or len(self.x_bits) < 1:
            raise ValueError("x_bits and z_bits must have equal positive length")
        if any(b not in (0, 1) for b in self.x_bits + self.z_bits):
            raise ValueError("bits must be 0 or 1")

    @property
    def n(self) -> int:
        return len(self.x_bits)

    @property
    def label(self) -> str:
        """Text form, qubit 0 leftmost, e.g. ``"IXZ"``."""
        return "".join(
            _LETTER_FROM_BITS[(x, z)] for x, z in zip(self.x_bits, self.z_bits)
        )

    @property
    def index(self) -> int:
        """Enumeration index: qubit 0 is the most significant base-4 digit."""
        idx = 0
        for x, z in zip(self.x_bits, self.z_bits):
            idx = (idx << 2) | (x << 1) | z
        return idx

    @property
    def is_identity(self) -> bool:
        return not any(self.x_bits) and not any(self.z_bits)

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        try:
            bits = [_BITS_FROM_LETTER[c] for c in label.upper()]
        except KeyError as exc:
            raise ValueError(f"invalid Pauli letter in {label!r}") from exc
        if not bits:
            raise ValueError("empty Pauli label")
        return cls(tuple(b[0] for b in bits), tuple(b[1] for b in bits))

    @classmethod
    def from_index(cls, n: int, index: int) -> "PauliString":
        if not 0 <= index < 4**n:
            raise ValueError(f"index {index} out of range for n={n}")
        xs, zs = [], []
        for q in range(n):
            code = (index >> (2 * (n - 1 - q))) & 0b11
            xs.append(code >> 1)
            zs.append(code & 1)
        return cls(tuple(xs), tuple(zs))

    def __str__(self) -> str:
        return self.label


def all_paulis(n: int) -> list[PauliString]:
    """All ``4**n`` strings in index order; identity first."""
    return [PauliString.from_index(n, i) for i in range(4**n)]


def pauli_matrix(p: PauliString) -> np.ndarray:
    """Hilbert-space matrix: Kronecker product of single-qubit Paulis, qubit 0 first."""
    return reduce(np.kron, (SIGMA[c] for c in p.label))


def pauli_superop(p: PauliString) -> np.ndarray:
    """Liouville-space Pauli gate ``P kron conj(P)``; involutory, phase-free."""
    mat = pauli_matrix(p)
    return np.kron(mat, mat.conj())


def pauli_hamiltonian_superop(p: PauliString) -> np.ndarray:
    """Liouville-space Pauli Hamiltonian ``P kron I - I kron P^T``."""
    return hamiltonian_superop(pauli_matrix(p))


def sgn(alpha: PauliString, beta: PauliString) -> int:
    """Commutation sign: +1 when the strings commute, -1 when they anticommute.

    Computed from the symplectic product ``x_a.z_b + z_a.x_b mod 2``; agrees
    with the normalized trace ``tr(P_a P_b P_a P_b) / 2**n``.
    """
    if alpha.n != beta.n:
        raise ValueError(f"size mismatch: {alpha.n} vs {beta.n} qubits")
    acc = 0
    for xa, za, xb, zb in zip(alpha.x_bits, alpha.z_bits, beta.x_bits, beta.z_bits):
        acc ^= (xa & zb) ^ (za & xb)
    return -1 if acc else 1


def sign_table(n: int) -> np.ndarray:
    """Full ``4**n x 4**n`` table of commutation signs in enumeration order."""
    paulis = all_paulis(n)
    size = len(paulis)
    table = np.empty((size, size), dtype=np.int8)
    for i, a in enumerate(paulis):
        table[i, i] = 1
        for j in range(i + 1, size):
            s = sgn(a, paulis[j])
            table[i, j] = s
            table[j, i] = s
    return table


def signed_twirl_sum(gamma: PauliString, beta: PauliString) -> np.ndarray:
    """Sign-weighted twirl of a Pauli Hamiltonian.

    Returns ``sum_alpha sgn(alpha, beta) P_alpha H_gamma P_alpha`` over all
    ``4**n`` Liouville Pauli gates.  The sum vanishes for ``gamma != beta``
    and equals ``4**n H_beta`` for ``gamma == beta``.
    """
    if gamma.n != beta.n:
        raise ValueError(f"size mismatch: {gamma.n} vs {beta.n} qubits")
    h_gamma = pauli_hamiltonian_superop(gamma)
    total = np.zeros_like(h_gamma)
    for alpha in all_paulis(gamma.n):
        p_so = pauli_superop(alpha)
        total += sgn(alpha, beta) * (p_so @ h_gamma @ p_so)
    return total


def plain_twirl_sum(gamma: PauliString) -> np.ndarray:
    """Unsigned twirl ``sum_alpha P_alpha H_gamma P_alpha``; zero for every gamma."""
    h_gamma = pauli_hamiltonian_superop(gamma)
    total = np.zeros_like(h_gamma)
    for alpha in all_paulis(gamma.n):
        p_so = pauli_superop(alpha)
        total += p_so @ h_gamma @ p_so
    return total

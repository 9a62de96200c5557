"""Lindblad dissipators, noise-channel extraction and diagnostics.

A jump operator ``A`` generates the Liouville-space dissipator

    L(A) = A kron conj(A) - (1/2) (A^dag A) kron I - (1/2) I kron (A^dag A)^T,

which annihilates the left identity vector (trace preservation).  Rates are
folded into the jump operators as ``sqrt(rate) * A`` when a model is
assembled into a full Lindbladian.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from .liouville import expm, op_norm, unitary_superop, vectorize
from .paulis import SIGMA, PauliString, all_paulis, pauli_matrix

__all__ = [
    "Dissipator",
    "NoiseModel",
    "PauliTransfer",
    "lindblad_superop",
    "amplitude_damping",
    "extract_noise",
    "hermiticity_G",
    "pauli_transfer_decompose",
    "observable_error_bound",
    "random_lindbladian",
    "random_channel",
]

_SIGMA_MINUS = np.array([[0, 1], [0, 0]], dtype=complex)


def lindblad_superop(a) -> np.ndarray:
    """Dissipator of a single jump operator; ``L(A) == L(-A)``."""
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"jump operator must be square, got shape {a.shape}")
    eye = np.eye(a.shape[0])
    ada = a.conj().T @ a
    return np.kron(a, a.conj()) - 0.5 * np.kron(ada, eye) - 0.5 * np.kron(eye, ada.T)


@dataclass(frozen=True)
class Dissipator:
    """A jump operator together with its nonnegative rate."""

    matrix: np.ndarray
    rate: float

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"jump operator must be square, got shape {mat.shape}")
        if not np.all(np.isfinite(mat.view(float))):
            raise ValueError("jump operator contains non-finite entries")
        if not self.rate >= 0.0:
            raise ValueError(f"rate must be nonnegative, got {self.rate}")
        object.__setattr__(self, "matrix", mat)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class NoiseModel:
    """A list of dissipators defining a trace-preserving Lindbladian."""

    dissipators: tuple[Dissipator, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "dissipators", tuple(self.dissipators))
        dims = {d.dim for d in self.dissipators}
        if len(dims) > 1:
            raise ValueError(f"dissipators have mixed dimensions: {sorted(dims)}")

    @property
    def is_empty(self) -> bool:
        return not self.dissipators

    def scaled(self, factor: float) -> "NoiseModel":
        """Same jump operators with every rate multiplied by ``factor``."""
        return NoiseModel(
            tuple(Dissipator(d.matrix, d.rate * factor) for d in self.dissipators)
        )

    def lindbladian(self, dim: int) -> np.ndarray:
        """Total generator ``sum_k L(sqrt(rate_k) A_k)`` as a ``dim**2`` matrix."""
        total = np.zeros((dim * dim, dim * dim), dtype=complex)
        for d in self.dissipators:
            if d.dim != dim:
                raise ValueError(
                    f"dissipator dimension {d.dim} does not match system dimension {dim}"
                )
            total += lindblad_superop(np.sqrt(d.rate) * d.matrix)
        return total


def _embed_single_qubit(op: np.ndarray, qubit: int, n: int) -> np.ndarray:
    factors = [SIGMA["I"]] * n
    factors[qubit] = op
    return reduce(np.kron, factors)


def amplitude_damping(qubit: int, gamma: float, n: int) -> Dissipator:
    """T1 decay on one qubit of an n-qubit register.

    The jump operator is the lowering operator on ``qubit`` (identity
    elsewhere) with rate ``gamma``; the steady state of the lone qubit
    is the ground state.
    """
    if not 0 <= qubit < n:
        raise ValueError(f"qubit {qubit} out of range for n={n}")
    if gamma < 0:
        raise ValueError(f"gamma must be nonnegative, got {gamma}")
    return Dissipator(_embed_single_qubit(_SIGMA_MINUS, qubit, n), gamma)


def extract_noise(channel, ideal) -> np.ndarray:
    """Error channel ``N`` of a noisy gate: ``channel = ideal @ N``.

    ``ideal`` must be a unitary superoperator, so ``N = ideal^dag @ channel``.
    """
    channel = np.asarray(channel, dtype=complex)
    ideal = np.asarray(ideal, dtype=complex)
    if channel.shape != ideal.shape:
        raise ValueError(
            f"dimension mismatch: channel {channel.shape} vs ideal {ideal.shape}"
        )
    return ideal.conj().T @ channel


def hermiticity_G(n_mat) -> float:
    """Non-Hermiticity measure ``|N - N^dag| / |2 N|`` in the operator norm.

    Zero for Hermitian maps (e.g. Pauli channels), one for anti-Hermitian
    maps; invariant under positive rescaling of ``N``.
    """
    n_mat = np.asarray(n_mat, dtype=complex)
    denom = 2.0 * op_norm(n_mat)
    if denom == 0.0:
        raise ValueError("hermiticity measure is undefined for the zero matrix")
    return op_norm(n_mat - n_mat.conj().T) / denom


@dataclass(frozen=True)
class PauliTransfer:
    """Coefficients of a channel in the ``P_a kron conj(P_b)`` operator basis."""

    n: int
    coeffs: np.ndarray

    def reconstruct(self) -> np.ndarray:
        """Resum ``sum_ab coeffs[a, b] P_a kron conj(P_b)``."""
        d2 = 4**self.n
        out = np.zeros((d2, d2), dtype=complex)
        mats = [pauli_matrix(p) for p in all_paulis(self.n)]
        for a in range(len(mats)):
            for b in range(len(mats)):
                c = self.coeffs[a, b]
                if c != 0:
                    out += c * np.kron(mats[a], mats[b].conj())
        return out

    def max_offdiagonal(self) -> float:
        off = self.coeffs.copy()
        np.fill_diagonal(off, 0.0)
        return float(np.max(np.abs(off)))


def pauli_transfer_decompose(channel, n: int) -> PauliTransfer:
    """Expand a superoperator over the ``P_a kron conj(P_b)`` basis.

    The basis is orthogonal with Hilbert-Schmidt norm ``4**n``, so
    ``coeffs[a, b] = tr[(P_a kron conj(P_b))^dag channel] / 4**n`` and the
    reconstruction is exact.
    """
    channel = np.asarray(channel, dtype=complex)
    d2 = 4**n
    if channel.shape != (d2, d2):
        raise ValueError(
            f"channel shape {channel.shape} does not match n={n} (expected {(d2, d2)})"
        )
    mats = [pauli_matrix(p) for p in all_paulis(n)]
    coeffs = np.empty((len(mats), len(mats)), dtype=complex)
    for a in range(len(mats)):
        for b in range(len(mats)):
            basis = np.kron(mats[a], mats[b].conj())
            coeffs[a, b] = np.trace(basis.conj().T @ channel) / d2
    return PauliTransfer(n, coeffs)


def _is_trace_preserving(superop: np.ndarray, atol: float = 1e-9) -> bool:
    d = int(round(np.sqrt(superop.shape[0])))
    left_id = vectorize(np.eye(d)).conj()
    return bool(np.max(np.abs(left_id @ superop - left_id)) <= atol)


def observable_error_bound(obs, rho0_vec, channel, ideal) -> tuple[float, float]:
    """Observable error and its operator-norm bound, as ``(lhs, rhs)``.

    ``lhs = |<obs|(channel - ideal)|rho0>|`` and
    ``rhs = sqrt(<A'|A'>) sqrt(<rho0|rho0>) |channel - ideal|_op`` with
    ``A' = obs - tr(obs) I / d`` when both maps are trace preserving
    (the traceless shift cannot change lhs then) and ``A' = obs`` otherwise.
    Cauchy-Schwarz guarantees ``lhs <= rhs``.
    """
    obs = np.asarray(obs, dtype=complex)
    rho0_vec = np.asarray(rho0_vec, dtype=complex).reshape(-1)
    channel = np.asarray(channel, dtype=complex)
    ideal = np.asarray(ideal, dtype=complex)
    if channel.shape != ideal.shape or channel.shape[0] != rho0_vec.size:
        raise ValueError("dimension mismatch between maps and state")
    if obs.size != rho0_vec.size:
        raise ValueError("dimension mismatch between observable and state")

    diff = channel - ideal
    lhs = abs(np.vdot(vectorize(obs), diff @ rho0_vec))
    if _is_trace_preserving(channel) and _is_trace_preserving(ideal):
        d = obs.shape[0]
        shifted = obs - (np.trace(obs) / d) * np.eye(d)
    else:
        shifted = obs
    rhs = (
        np.linalg.norm(vectorize(shifted))
        * np.linalg.norm(rho0_vec)
        * op_norm(diff)
    )
    return float(lhs), float(rhs)


def random_lindbladian(
    n: int, strength: float, rng: np.random.Generator, jumps: int = 2
) -> NoiseModel:
    """Stand-in random-Lindbladian ensemble for property tests.

    Jump operators have i.i.d. complex Gaussian entries, are normalized to
    unit operator norm and carry rate ``strength``.  This is a simple
    in-house ensemble, not a calibrated one.
    """
    d = 2**n
    dissipators = []
    for _ in range(jumps):
        a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        a /= op_norm(a)
        dissipators.append(Dissipator(a, strength))
    return NoiseModel(tuple(dissipators))


def random_channel(
    n: int,
    strength: float,
    rng: np.random.Generator,
    unitary: PauliString | None = None,
) -> np.ndarray:
    """Random CPTP map ``U e^L`` with ``L`` from :func:`random_lindbladian`.

    ``unitary`` optionally left-composes a Pauli gate so the channel is not
    close to the identity.
    """
    d = 2**n
    lind = random_lindbladian(n, strength, rng).lindbladian(d)
    channel = expm(lind)
    if unitary is not None:
        channel = unitary_superop(pauli_matrix(unitary)) @ channel
    return channel

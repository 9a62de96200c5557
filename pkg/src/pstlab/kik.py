"""First-order KIK error mitigation and its integration with pseudo twirling.

The mitigated map is built from the noisy forward evolution ``K`` and the
pulse inverse ``K_I`` (all drive signs flipped, uncontrolled coherent error
and dissipation unchanged):

    K1 = (3/2) K - (1/2) K K_I K.

For a noiseless gate ``K1 = K`` exactly; for weak noise the first order of
a *Hermitian* noise generator cancels, which is why pseudo twirling (which
Hermitianizes the noise) boosts KIK.

The benchmark system is a transverse-field Ising step on a qubit chain,

    K = exp(-i J sum H_zz - i g sum H_x - i eps sum H_z + L),

with nearest-neighbour ZZ couplings and X fields as independently signed
drives, a drive-independent z-drift of amplitude ``eps``, and per-qubit
amplitude damping ``L``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .liouville import expm, op_norm
from .noise import NoiseModel, amplitude_damping
from .paulis import PauliString
from .rng import child_seed
from .twirl import GateModel, HamiltonianTerm, TwirlPlan, negated_drive, pst_average

__all__ = [
    "DEFAULT_DAMPING_WEIGHTS",
    "DEFAULT_NOISE_SCALE",
    "IsingConfig",
    "MitigationResult",
    "ising_noise",
    "ising_gate",
    "ising_error_terms",
    "ising_superop",
    "ising_ideal",
    "kik_first_order",
    "run_ising_study",
    "suppression_histogram",
]

# Per-qubit amplitude-damping weights of the benchmark chain.
DEFAULT_DAMPING_WEIGHTS = (0.5, 1.7, 0.3)

# Global damping-rate scale; tuned so the raw operator-norm error of the
# default 3-qubit study reaches about 0.25 at drift amplitude 0.05.
DEFAULT_NOISE_SCALE = 0.00465


@dataclass(frozen=True)
class IsingConfig:
    """Transverse-field Ising step with drift, damping, and a twirl plan."""

    epsilon: float
    coupling: float = 0.1
    field: float = 0.2
    n: int = 3
    noise: NoiseModel = NoiseModel()
    plan: TwirlPlan = TwirlPlan.full(3)

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("the chain needs at least two qubits")
        for v in (self.epsilon, self.coupling, self.field):
            if not np.isfinite(v):
                raise ValueError("Ising parameters must be finite")


def ising_noise(
    scale: float = DEFAULT_NOISE_SCALE,
    weights=DEFAULT_DAMPING_WEIGHTS,
    n: int = 3,
) -> NoiseModel:
    """Per-qubit amplitude damping with rates ``scale * weights[q]``."""
    if len(weights) != n:
        raise ValueError(f"need {n} damping weights, got {len(weights)}")
    return NoiseModel(
        tuple(amplitude_damping(q, scale * w, n) for q, w in enumerate(weights))
    )


def _chain_pauli(n: int, letters: dict[int, str]) -> PauliString:
    label = "".join(letters.get(q, "I") for q in range(n))
    return PauliString.from_label(label)


def ising_gate(c: IsingConfig, inverse: bool = False) -> GateModel:
    """Drive part of the step: ZZ couplings and X fields, all independently signed.

    ``inverse=True`` flips every drive coefficient (the pulse inverse);
    the drift and the noise are not part of the drive.
    """
    terms = []
    for i in range(c.n - 1):
        terms.append(
            HamiltonianTerm(_chain_pauli(c.n, {i: "Z", i + 1: "Z"}), c.coupling, "f_odd")
        )
    for i in range(c.n):
        terms.append(HamiltonianTerm(_chain_pauli(c.n, {i: "X"}), c.field, "f_odd"))
    gate = GateModel(c.n, terms[0].pauli, tuple(terms), 1.0)
    if inverse:
        gate = replace(gate, terms=negated_drive(gate.terms))
    return gate


def ising_error_terms(c: IsingConfig) -> tuple[HamiltonianTerm, ...]:
    """Uncontrolled z-drift on every qubit; keeps its sign in the pulse inverse."""
    return tuple(
        HamiltonianTerm(_chain_pauli(c.n, {i: "Z"}), c.epsilon, "g_even")
        for i in range(c.n)
    )


def _generator(c: IsingConfig, inverse: bool) -> np.ndarray:
    gate = ising_gate(c, inverse)
    d2 = 4**c.n
    gen = np.zeros((d2, d2), dtype=complex)
    from .paulis import pauli_hamiltonian_superop

    for t in gate.terms:
        gen += t.coeff * pauli_hamiltonian_superop(t.pauli)
    for t in ising_error_terms(c):
        gen += t.coeff * pauli_hamiltonian_superop(t.pauli)
    gen = -1j * gen
    if not c.noise.is_empty:
        gen = gen + c.noise.lindbladian(2**c.n)
    return gen


def ising_superop(c: IsingConfig, inverse: bool = False) -> np.ndarray:
    """Raw (untwirled) noisy step ``K`` or pulse inverse ``K_I``."""
    return expm(_generator(c, inverse))


def ising_ideal(c: IsingConfig) -> np.ndarray:
    """Error-free step: drive only, no drift, no damping."""
    return ising_gate(c).ideal_superop()


def kik_first_order(k: np.ndarray, k_i: np.ndarray) -> np.ndarray:
    """Mitigated map ``(3/2) K - (1/2) K K_I K``."""
    k = np.asarray(k, dtype=complex)
    k_i = np.asarray(k_i, dtype=complex)
    if k.shape != k_i.shape:
        raise ValueError(f"dimension mismatch: {k.shape} vs {k_i.shape}")
    return 1.5 * k - 0.5 * (k @ k_i @ k)


@dataclass(frozen=True)
class MitigationResult:
    """Operator-norm errors of one grid point and the headline suppression."""

    epsilon: float
    err_raw: float
    err_pst_only: float
    err_kik_only: float
    err_kik_pst: float

    @property
    def suppression_factor(self) -> float:
        return self.err_raw / self.err_kik_pst


def _study_point(c: IsingConfig) -> MitigationResult:
    ideal = ising_ideal(c)
    k_raw = ising_superop(c)
    k_i_raw = ising_superop(c, inverse=True)
    errors = ising_error_terms(c)
    # The same plan (hence the same draws) twirls every K and K_I factor.
    k_pst = pst_average(ising_gate(c), c.plan, errors, c.noise)
    k_i_pst = pst_average(ising_gate(c, inverse=True), c.plan, errors, c.noise)
    return MitigationResult(
        epsilon=c.epsilon,
        err_raw=op_norm(k_raw - ideal),
        err_pst_only=op_norm(k_pst - ideal),
        err_kik_only=op_norm(kik_first_order(k_raw, k_i_raw) - ideal),
        err_kik_pst=op_norm(kik_first_order(k_pst, k_i_pst) - ideal),
    )


def run_ising_study(c: IsingConfig, epsilon_grid) -> list[MitigationResult]:
    """Raw / PST-only / KIK-only / KIK+PST errors across a drift-amplitude grid."""
    epsilon_grid = list(epsilon_grid)
    if not epsilon_grid:
        raise ValueError("epsilon grid must not be empty")
    return [_study_point(replace(c, epsilon=float(eps))) for eps in epsilon_grid]


def suppression_histogram(c: IsingConfig, repeats: int) -> np.ndarray:
    """KIK+PST suppression factors for independently re-seeded twirl plans.

    Repeat ``r`` replays the study point with a plan seeded by
    ``(plan.seed, r)``; a full plan gives a degenerate (single-value)
    histogram.  Precomputes the per-Pauli twirled gates once, so repeats
    only reweight them.
    """
    if repeats < 1:
        raise ValueError("repeats must be at least 1")
    from .twirl import pst_twirled_gates

    ideal = ising_ideal(c)
    err_raw = op_norm(ising_superop(c) - ideal)
    errors = ising_error_terms(c)
    fwd = pst_twirled_gates(ising_gate(c), errors, c.noise)
    inv = pst_twirled_gates(ising_gate(c, inverse=True), errors, c.noise)

    out = np.empty(repeats)
    for r in range(repeats):
        if c.plan.mode == "full":
            idx = c.plan.indices(c.n)
        else:
            idx = TwirlPlan.sampled(c.plan.count, child_seed(c.plan.seed, r)).indices(c.n)
        weights = np.bincount(idx, minlength=fwd.shape[0]).astype(float) / len(idx)
        k_pst = np.tensordot(weights, fwd, axes=1)
        k_i_pst = np.tensordot(weights, inv, axes=1)
        out[r] = err_raw / op_norm(kik_first_order(k_pst, k_i_pst) - ideal)
    return out

"""Twirling engines: randomized compiling for Cliffords, pseudo twirling for all gates.

Randomized compiling (RC) sandwiches a noisy Clifford between a Pauli gate
and its conjugate under the ideal gate; averaging over all Paulis turns the
error channel into a Pauli channel.

Pseudo twirling (PST) works on any gate generated by a sum of Pauli
Hamiltonians: the same Pauli gate is applied on both sides, and the signs of
the controllable drive terms are flipped according to their commutation with
the twirl Pauli, so the error-free gate is left invariant while coherent
errors average away at first order.  The residual second order is a
Hermitian Lindbladian, computed here by quadrature as an independent
predictor.

Sign rule for the modified drive under twirl Pauli ``alpha``:

* ``f_odd``  - independently signed drive term; flips by ``sgn(alpha, term.pauli)``.
  The calibration target is such a term; a multi-drive generator (e.g. an
  Ising step) may carry several.
* ``g_odd``  - parasitic term riding the target's drive knob (e.g. a ZY term
  from a phase miscalibration); flips by ``sgn(alpha, target)`` because only
  the shared knob changes sign.
* ``f_even`` / ``g_even`` - drive-independent physics (crosstalk); never flips.

Extra coherent error terms and Lindblad noise sit inside the twirled
exponent with fixed sign: they model physics the controller cannot touch.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .liouville import expm, op_norm, unitary_superop, vectorize
from .noise import NoiseModel
from .paulis import (
    PauliString,
    all_paulis,
    pauli_hamiltonian_superop,
    pauli_matrix,
    pauli_superop,
    sgn,
)

__all__ = [
    "PARITY_CLASSES",
    "HamiltonianTerm",
    "GateModel",
    "TwirlPlan",
    "NonCliffordGateError",
    "clifford_pauli_map",
    "rc_twirl",
    "pst_gate",
    "pst_twirled_gates",
    "pst_average",
    "pst_effective_lindbladian",
    "pst_second_order_predictor",
    "pst_residual_hamiltonian",
    "negated_drive",
    "effective_physical_twirl",
    "virtual_z_twirl_classes",
]

PARITY_CLASSES = ("f_odd", "f_even", "g_odd", "g_even")


@dataclass(frozen=True)
class HamiltonianTerm:
    """One Pauli term of a gate generator with its drive-parity class."""

    pauli: PauliString
    coeff: float
    parity_class: str = "g_even"

    def __post_init__(self):
        if self.parity_class not in PARITY_CLASSES:
            raise ValueError(
                f"parity_class must be one of {PARITY_CLASSES}, got {self.parity_class!r}"
            )
        if not np.isfinite(self.coeff):
            raise ValueError("coefficient must be finite")

    @property
    def controllable(self) -> bool:
        """True when the term's sign flips under drive inversion (odd classes)."""
        return self.parity_class in ("f_odd", "g_odd")


@dataclass(frozen=True)
class GateModel:
    """A gate generated by ``exp(-i sum_b coeff_b H_b * duration)``.

    ``target_beta`` is the calibration target: the sign anchor for knob-bound
    (``g_odd``) terms.  Even ``f``-class terms must sit on the target Pauli.
    """

    n: int
    target_beta: PauliString
    terms: tuple[HamiltonianTerm, ...]
    duration: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if self.target_beta.n != self.n:
            raise ValueError("target_beta qubit count does not match gate")
        for t in self.terms:
            if t.pauli.n != self.n:
                raise ValueError(f"term {t.pauli.label} does not act on {self.n} qubits")
            if t.parity_class == "f_even" and t.pauli != self.target_beta:
                raise ValueError("f_even terms must sit on the target Pauli")
        if not self.duration > 0:
            raise ValueError("duration must be positive")

    def drive_sign(self, term: HamiltonianTerm, alpha: PauliString) -> int:
        """Sign of ``term`` in the modified drive for twirl Pauli ``alpha``."""
        if term.parity_class == "f_odd":
            return sgn(alpha, term.pauli)
        if term.parity_class == "g_odd":
            return sgn(alpha, self.target_beta)
        return 1

    def hilbert_hamiltonian(self) -> np.ndarray:
        """Hilbert-space generator ``sum_b coeff_b P_b``."""
        d = 2**self.n
        h = np.zeros((d, d), dtype=complex)
        for t in self.terms:
            h += t.coeff * pauli_matrix(t.pauli)
        return h

    def ideal_superop(self) -> np.ndarray:
        """Error-free Liouville gate ``exp(-i sum coeff H * duration)``."""
        d2 = 4**self.n
        gen = np.zeros((d2, d2), dtype=complex)
        for t in self.terms:
            gen += t.coeff * pauli_hamiltonian_superop(t.pauli)
        return expm(-1j * gen * self.duration)


def negated_drive(terms) -> tuple[HamiltonianTerm, ...]:
    """Terms with the drive knob inverted: odd classes flip sign, even keep it."""
    return tuple(
        HamiltonianTerm(t.pauli, -t.coeff if t.controllable else t.coeff, t.parity_class)
        for t in terms
    )


@dataclass(frozen=True)
class TwirlPlan:
    """How to average over twirl Paulis: the full group or i.i.d. samples.

    Sampled draws are uniform with replacement over all ``4**n`` strings
    (identity included) from a Philox stream keyed by ``seed``.
    """

    mode: str
    count: int
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("full", "sampled"):
            raise ValueError(f"mode must be 'full' or 'sampled', got {self.mode!r}")
        if self.count < 1:
            raise ValueError("count must be positive")

    @classmethod
    def full(cls, n: int) -> "TwirlPlan":
        return cls("full", 4**n)

    @classmethod
    def sampled(cls, count: int, seed: int) -> "TwirlPlan":
        return cls("sampled", count, seed)

    def indices(self, n: int) -> np.ndarray:
        """Twirl Pauli indices for an n-qubit gate, in draw order."""
        size = 4**n
        if self.mode == "full":
            if self.count != size:
                raise ValueError(
                    f"full plan for n={n} requires count={size}, got {self.count}"
                )
            return np.arange(size)
        from .rng import substream

        return substream(self.seed).integers(0, size, size=self.count)


class NonCliffordGateError(ValueError):
    """Raised when an RC target does not normalize the Pauli group."""


def clifford_pauli_map(u_cliff: np.ndarray, n: int, atol: float = 1e-9) -> list[int]:
    """Index map ``a -> b`` with ``U P_a U^dag = P_b`` in Liouville space.

    Raises :class:`NonCliffordGateError` naming the first Pauli whose
    conjugate is not a Pauli gate.
    """
    paulis = all_paulis(n)
    superops = [pauli_superop(p) for p in paulis]
    mapping = []
    for a, p in enumerate(paulis):
        conj = u_cliff @ superops[a] @ u_cliff.conj().T
        for b, candidate in enumerate(superops):
            if np.max(np.abs(conj - candidate)) <= atol:
                mapping.append(b)
                break
        else:
            raise NonCliffordGateError(
                f"gate is not Clifford: conjugate of {p.label} is not a Pauli gate"
            )
    return mapping


def rc_twirl(channel: np.ndarray, u_cliff: np.ndarray, plan: TwirlPlan) -> np.ndarray:
    """Randomized-compiling average ``mean_a P'_a channel P_a``.

    ``P'_a = U P_a U^dag`` is the compensating Pauli of the ideal Clifford,
    so an error-free channel is reproduced exactly and the error channel of
    a noisy one is twirled into a Pauli channel.
    """
    channel = np.asarray(channel, dtype=complex)
    u_cliff = np.asarray(u_cliff, dtype=complex)
    if channel.shape != u_cliff.shape:
        raise ValueError(
            f"dimension mismatch: channel {channel.shape} vs gate {u_cliff.shape}"
        )
    n = int(round(np.log2(channel.shape[0]) / 2))
    if 4**n != channel.shape[0]:
        raise ValueError(f"superoperator dimension {channel.shape[0]} is not 4**n")
    mapping = clifford_pauli_map(u_cliff, n)
    superops = [pauli_superop(p) for p in all_paulis(n)]
    total = np.zeros_like(channel)
    idx = plan.indices(n)
    for a in idx:
        total += superops[mapping[a]] @ channel @ superops[a]
    return total / len(idx)


def _depolarizing_superop(n: int, p: float) -> np.ndarray:
    d = 2**n
    eye_vec = vectorize(np.eye(d))
    return (1.0 - p) * np.eye(d * d) + (p / d) * np.outer(eye_vec, eye_vec.conj())


def _twirled_generator(
    gate: GateModel,
    alpha: PauliString,
    extra_coherent: tuple[HamiltonianTerm, ...],
    noise: NoiseModel | None,
) -> np.ndarray:
    d2 = 4**gate.n
    gen = np.zeros((d2, d2), dtype=complex)
    for t in gate.terms:
        gen += gate.drive_sign(t, alpha) * t.coeff * pauli_hamiltonian_superop(t.pauli)
    for t in extra_coherent:
        gen += t.coeff * pauli_hamiltonian_superop(t.pauli)
    gen = -1j * gen
    if noise is not None and not noise.is_empty:
        gen = gen + noise.lindbladian(2**gate.n)
    return gen * gate.duration


def pst_gate(
    gate: GateModel,
    alpha: PauliString,
    extra_coherent=(),
    noise: NoiseModel | None = None,
    twirl_depol: float = 0.0,
) -> np.ndarray:
    """One pseudo-twirl instance ``P_a exp(modified generator) P_a``.

    The drive signs follow the gate's parity classes; extra coherent terms
    and noise keep their sign.  ``twirl_depol`` optionally applies a global
    depolarizing factor of that strength with each twirl Pauli to model
    imperfect twirl gates.
    """
    extra = tuple(extra_coherent)
    p_so = pauli_superop(alpha)
    if twirl_depol > 0.0:
        p_so = _depolarizing_superop(gate.n, twirl_depol) @ p_so
    return p_so @ expm(_twirled_generator(gate, alpha, extra, noise)) @ p_so


def pst_twirled_gates(
    gate: GateModel,
    extra_coherent=(),
    noise: NoiseModel | None = None,
    twirl_depol: float = 0.0,
) -> np.ndarray:
    """All ``4**n`` pseudo-twirl instances, stacked in Pauli index order.

    Each instance depends only on its twirl Pauli, so any plan average is a
    weighted mean over this stack.
    """
    extra = tuple(extra_coherent)
    paulis = all_paulis(gate.n)
    d2 = 4**gate.n
    out = np.empty((len(paulis), d2, d2), dtype=complex)
    depol = _depolarizing_superop(gate.n, twirl_depol) if twirl_depol > 0.0 else None
    for i, alpha in enumerate(paulis):
        p_so = pauli_superop(alpha)
        if depol is not None:
            p_so = depol @ p_so
        out[i] = p_so @ expm(_twirled_generator(gate, alpha, extra, noise)) @ p_so
    return out


def pst_average(
    gate: GateModel,
    plan: TwirlPlan,
    extra_coherent=(),
    noise: NoiseModel | None = None,
    twirl_depol: float = 0.0,
) -> np.ndarray:
    """Plan average of :func:`pst_gate`.

    A full plan with an error-free gate reproduces the ideal gate exactly;
    with errors it cancels the first order of every coherent term except
    the independently signed drives themselves.
    """
    idx = plan.indices(gate.n)
    stack = pst_twirled_gates(gate, extra_coherent, noise, twirl_depol)
    counts = np.bincount(idx, minlength=stack.shape[0]).astype(float)
    return np.tensordot(counts / len(idx), stack, axes=1)


def pst_effective_lindbladian(
    gate: GateModel, h_coh: np.ndarray, quadrature_steps: int = 256
) -> np.ndarray:
    """Second-order residual generator of PST for a coherent error ``h_coh``.

    Returns ``(1/4**n) sum_a L(H_eff_a)`` with
    ``H_eff_a = int_0^T U(t)^dag P_a h_coh P_a U(t) dt`` evaluated by the
    composite midpoint rule; the result is Hermitian as a matrix.
    """
    from .noise import lindblad_superop

    if quadrature_steps < 16:
        raise ValueError("quadrature_steps must be at least 16")
    h_coh = np.asarray(h_coh, dtype=complex)
    h_drive = gate.hilbert_hamiltonian()
    T = gate.duration
    dt = T / quadrature_steps
    times = (np.arange(quadrature_steps) + 0.5) * dt

    paulis = all_paulis(gate.n)
    mats = [pauli_matrix(p) for p in paulis]
    d = 2**gate.n
    h_eff = [np.zeros((d, d), dtype=complex) for _ in paulis]
    for t in times:
        u_t = expm(-1j * h_drive * t)
        for i, p_mat in enumerate(mats):
            h_eff[i] += u_t.conj().T @ (p_mat @ h_coh @ p_mat) @ u_t * dt

    d2 = d * d
    total = np.zeros((d2, d2), dtype=complex)
    for h in h_eff:
        total += lindblad_superop(h)
    return total / len(paulis)


def pst_second_order_predictor(
    gate: GateModel, h_coh: np.ndarray, quadrature_steps: int = 256
) -> np.ndarray:
    """Closed-form prediction ``U_T exp(L_eff)`` of the full-plan PST channel.

    Accurate to third order in the coherent error strength.
    """
    u_T = unitary_superop(expm(-1j * gate.hilbert_hamiltonian() * gate.duration))
    return u_T @ expm(pst_effective_lindbladian(gate, h_coh, quadrature_steps))


def pst_residual_hamiltonian(
    gate: GateModel, extra_coherent=()
) -> tuple[np.ndarray, tuple[HamiltonianTerm, ...]]:
    """First-order effective Hamiltonian surviving a full pseudo twirl.

    Computes the explicit full-plan average of the twirled generator,
    ``(1/4**n) sum_a P_a (sum_b sign_b coeff_b H_b) P_a``, and returns it
    with the analytically surviving terms (the independently signed drives).
    Knob-bound and even error terms average to zero.
    """
    extra = tuple(extra_coherent)
    d2 = 4**gate.n
    total = np.zeros((d2, d2), dtype=complex)
    paulis = all_paulis(gate.n)
    for alpha in paulis:
        p_so = pauli_superop(alpha)
        gen = np.zeros((d2, d2), dtype=complex)
        for t in gate.terms:
            gen += gate.drive_sign(t, alpha) * t.coeff * pauli_hamiltonian_superop(t.pauli)
        for t in extra:
            gen += t.coeff * pauli_hamiltonian_superop(t.pauli)
        total += p_so @ gen @ p_so
    surviving = tuple(t for t in gate.terms if t.parity_class == "f_odd")
    return total / len(paulis), surviving


def effective_physical_twirl(
    p: PauliString, virtual_z_qubits=None
) -> PauliString:
    """Twirl Pauli actually realized when Z factors are frame rotations.

    On a virtual-Z qubit a Z factor acts only through pulse phases: it flips
    the drive sign exactly as commanded but never conjugates error terms, so
    as a twirl it collapses to the identity and a Y built as X.Z_v collapses
    to X.  Qubits listed in ``virtual_z_qubits`` (default: all) are mapped
    per letter as Z -> I and Y -> X; physical qubits keep their letter.
    """
    qubits = range(p.n) if virtual_z_qubits is None else virtual_z_qubits
    virtual = set(qubits)
    xs, zs = list(p.x_bits), list(p.z_bits)
    for q in virtual:
        if not 0 <= q < p.n:
            raise ValueError(f"qubit {q} out of range for n={p.n}")
        zs[q] = 0
    return PauliString(tuple(xs), tuple(zs))


def virtual_z_twirl_classes(
    n: int, virtual_z_qubits=None
) -> dict[PauliString, list[PauliString]]:
    """Equivalence classes of the twirl set induced by virtual-Z implementation.

    Maps each effective physical twirl to the commanded Paulis that collapse
    onto it.  With no virtual qubits every string is its own class
    (``4**n`` classes); with all qubits virtual only ``2**n`` X-type classes
    survive, which is what degrades PST coverage.
    """
    if virtual_z_qubits is None:
        virtual_z_qubits = tuple(range(n))
    classes: dict[PauliString, list[PauliString]] = {}
    for p in all_paulis(n):
        rep = effective_physical_twirl(p, virtual_z_qubits)
        classes.setdefault(rep, []).append(p)
    return classes

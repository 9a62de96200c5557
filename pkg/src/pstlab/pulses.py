"""Cross-resonance pulse models, intra-gate slicing, and calibration scans.

A cross-resonance drive on a control/target pair generates

    H_d = chi a cos(phi) ZX + chi a sin(phi) ZY + zeta ZZ,

where ``a`` is the drive amplitude, ``phi`` its phase, ``zeta`` the always-on
crosstalk and ``chi`` a dimensionless amplitude stretch.  The ZX term is the
calibration target (independently signed), ZY rides the same drive knob, and
ZZ is drive-independent.  Durations are in units where a lone segment has
length 1 unless stated otherwise.

Schedules are ordered lists of constant-Hamiltonian segments and
instantaneous ideal Pauli frames; the echoed gate is two drive segments of
opposite sign separated by X frames on the control.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .liouville import expectation, expm, op_norm, unitary_superop, vectorize
from .noise import NoiseModel
from .paulis import (
    PauliString,
    pauli_hamiltonian_superop,
    pauli_matrix,
    pauli_superop,
)
from .rng import child_seed, substream
from .twirl import (
    GateModel,
    HamiltonianTerm,
    TwirlPlan,
    negated_drive,
    pst_average,
    pst_twirled_gates,
)

__all__ = [
    "CrossResonanceParams",
    "cr_terms",
    "cr_gate",
    "cr_pi_half_params",
    "Segment",
    "Frame",
    "PulseSchedule",
    "single_cr_schedule",
    "echo_cr_schedule",
    "evolve_schedule",
    "sliced_pst",
    "slicing_error_norm",
    "ScanPoint",
    "deep_calibration_scan",
    "variance_of_noisy_means",
]


@dataclass(frozen=True)
class CrossResonanceParams:
    """Drive amplitude/phase, crosstalk coupling, amplitude stretch, segment time."""

    amplitude: float
    phase: float = 0.0
    crosstalk: float = 0.0
    stretch: float = 1.0
    duration: float = 1.0

    def __post_init__(self):
        if not self.duration > 0:
            raise ValueError("duration must be positive")
        if not self.stretch > 0:
            raise ValueError("stretch must be positive")


def cr_terms(p: CrossResonanceParams) -> tuple[HamiltonianTerm, ...]:
    """Generator terms of one cross-resonance segment with parity classes.

    The stretch multiplies only the driven (odd) coefficients; crosstalk is
    drive-independent.
    """
    return (
        HamiltonianTerm(
            PauliString.from_label("ZX"),
            p.stretch * p.amplitude * math.cos(p.phase),
            "f_odd",
        ),
        HamiltonianTerm(
            PauliString.from_label("ZY"),
            p.stretch * p.amplitude * math.sin(p.phase),
            "g_odd",
        ),
        HamiltonianTerm(PauliString.from_label("ZZ"), p.crosstalk, "g_even"),
    )


def cr_gate(p: CrossResonanceParams) -> GateModel:
    """One cross-resonance segment as a twirlable gate (target ZX)."""
    return GateModel(2, PauliString.from_label("ZX"), cr_terms(p), p.duration)


def cr_pi_half_params(
    phase: float = 0.0,
    crosstalk: float = 0.0,
    stretch: float = 1.0,
    segments: int = 1,
) -> CrossResonanceParams:
    """Parameters a calibrated pi/2 pulse would use at stretch 1.

    Sets ``amplitude cos(phase) duration = pi / (4 segments)`` with unit
    segment duration, so the target exponent totals ``-i (pi/4) ZX`` across
    the pulse (one segment for a plain pulse, two for an echo).
    """
    if segments < 1:
        raise ValueError("segments must be positive")
    return CrossResonanceParams(
        amplitude=math.pi / (4 * segments) / math.cos(phase),
        phase=phase,
        crosstalk=crosstalk,
        stretch=stretch,
        duration=1.0,
    )


@dataclass(frozen=True)
class Segment:
    """A constant-Hamiltonian interval of a schedule."""

    terms: tuple[HamiltonianTerm, ...]
    duration: float

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if not self.terms:
            raise ValueError("segment must carry at least one term")
        if not self.duration > 0:
            raise ValueError("segment duration must be positive")


@dataclass(frozen=True)
class Frame:
    """An instantaneous, ideal Pauli gate between segments."""

    pauli: PauliString


@dataclass(frozen=True)
class PulseSchedule:
    """Ordered segments and frames acting on ``n`` qubits."""

    n: int
    elements: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        total = 0.0
        for e in self.elements:
            if isinstance(e, Segment):
                for t in e.terms:
                    if t.pauli.n != self.n:
                        raise ValueError(
                            f"segment term {t.pauli.label} does not act on {self.n} qubits"
                        )
                total += e.duration
            elif isinstance(e, Frame):
                if e.pauli.n != self.n:
                    raise ValueError("frame Pauli does not match qubit count")
            else:
                raise ValueError(f"unsupported schedule element {type(e)!r}")
        if total <= 0.0:
            raise ValueError("schedule must contain positive total duration")

    @property
    def total_duration(self) -> float:
        return sum(e.duration for e in self.elements if isinstance(e, Segment))


def single_cr_schedule(p: CrossResonanceParams) -> PulseSchedule:
    """A lone cross-resonance segment."""
    return PulseSchedule(2, (Segment(cr_terms(p), p.duration),))


def echo_cr_schedule(p: CrossResonanceParams) -> PulseSchedule:
    """Echoed cross-resonance gate: drive, X on control, negated drive, X.

    The X frames flip every drive term's sign in between, so the drive adds
    up while the crosstalk partially self-cancels.
    """
    terms = cr_terms(p)
    x_on_control = Frame(PauliString.from_label("XI"))
    return PulseSchedule(
        2,
        (
            Segment(terms, p.duration),
            x_on_control,
            Segment(negated_drive(terms), p.duration),
            x_on_control,
        ),
    )


def _segment_gate(seg: Segment, n: int) -> GateModel:
    target = next((t.pauli for t in seg.terms if t.parity_class == "f_odd"), None)
    if target is None:
        target = seg.terms[0].pauli
    return GateModel(n, target, seg.terms, seg.duration)


def _segment_superop(
    seg: Segment, n: int, noise: NoiseModel | None, extra_coherent
) -> np.ndarray:
    d2 = 4**n
    gen = np.zeros((d2, d2), dtype=complex)
    for t in seg.terms:
        gen += t.coeff * pauli_hamiltonian_superop(t.pauli)
    for t in extra_coherent:
        gen += t.coeff * pauli_hamiltonian_superop(t.pauli)
    gen = -1j * gen
    if noise is not None and not noise.is_empty:
        gen = gen + noise.lindbladian(2**n)
    return expm(gen * seg.duration)


def evolve_schedule(
    schedule: PulseSchedule,
    noise: NoiseModel | None = None,
    extra_coherent=(),
) -> np.ndarray:
    """Ordered product of segment propagators and frame Paulis."""
    extra = tuple(extra_coherent)
    d2 = 4**schedule.n
    total = np.eye(d2, dtype=complex)
    for e in schedule.elements:
        if isinstance(e, Segment):
            total = _segment_superop(e, schedule.n, noise, extra) @ total
        else:
            total = pauli_superop(e.pauli) @ total
    return total


def sliced_pst(
    schedule: PulseSchedule,
    m: int,
    plan: TwirlPlan,
    noise: NoiseModel | None = None,
    extra_coherent=(),
    twirl_depol: float = 0.0,
) -> np.ndarray:
    """Schedule with every segment cut into ``m`` pseudo-twirled slices.

    Each slice is twirl-averaged independently and the averages are composed
    in order; ``m = 1`` is gate-level PST of each segment.  Sampled plans
    draw a fresh stream per slice, keyed by the plan seed and the slice's
    position in the schedule.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    extra = tuple(extra_coherent)
    d2 = 4**schedule.n
    total = np.eye(d2, dtype=complex)
    slice_counter = 0
    for e in schedule.elements:
        if isinstance(e, Frame):
            total = pauli_superop(e.pauli) @ total
            continue
        slice_gate = _segment_gate(Segment(e.terms, e.duration / m), schedule.n)
        for _ in range(m):
            if plan.mode == "sampled":
                slice_plan = TwirlPlan.sampled(
                    plan.count, child_seed(plan.seed, slice_counter)
                )
            else:
                slice_plan = plan
            avg = pst_average(slice_gate, slice_plan, extra, noise, twirl_depol)
            total = avg @ total
            slice_counter += 1
    return total


def ideal_schedule(schedule: PulseSchedule) -> PulseSchedule:
    """The target pulse: every segment reduced to its independently signed drives.

    Parasitic (``g_odd``) and drive-independent (even) terms are errors and
    are dropped; frames are kept.
    """
    elements = []
    for e in schedule.elements:
        if isinstance(e, Frame):
            elements.append(e)
            continue
        drives = tuple(t for t in e.terms if t.parity_class == "f_odd")
        if drives:
            elements.append(Segment(drives, e.duration))
    return PulseSchedule(schedule.n, tuple(elements))


def slicing_error_norm(
    schedule: PulseSchedule,
    m: int,
    plan: TwirlPlan,
    extra_coherent=(),
    noise: NoiseModel | None = None,
) -> float:
    """Operator-norm error of the m-sliced pseudo-twirled schedule.

    The reference is the error-free target (:func:`ideal_schedule`); with no
    error terms or noise present the norm vanishes to rounding.
    """
    ideal = evolve_schedule(ideal_schedule(schedule))
    twirled = sliced_pst(schedule, m, plan, noise, extra_coherent)
    return op_norm(twirled - ideal)


def variance_of_noisy_means(values) -> float:
    """Spread of per-realization means: sqrt of the unbiased sample variance.

    Estimates the standard deviation of a single shot-averaged realization
    value, which bundles shot noise and twirl-to-twirl variation.
    """
    values = np.asarray(values, dtype=float).reshape(-1)
    if values.size < 2:
        raise ValueError("need at least two realization means")
    mean = values.mean()
    return float(np.sqrt(np.sum((values - mean) ** 2) / (values.size - 1)))


@dataclass(frozen=True)
class ScanPoint:
    """One stretch-factor point of a calibration scan."""

    chi: float
    sp_mean: float
    sigma: float
    n_twirls: int


def _measurement_operators(measure_basis: str) -> tuple[np.ndarray, np.ndarray]:
    p00 = np.zeros((4, 4), dtype=complex)
    p00[0, 0] = 1.0
    if measure_basis == "zx":
        pre = np.eye(16, dtype=complex)
    elif measure_basis == "zy":
        ry = expm(-1j * (math.pi / 4) * pauli_matrix(PauliString.from_label("Y")))
        pre = unitary_superop(np.kron(np.eye(2), ry))
    else:
        raise ValueError(f"measure_basis must be 'zx' or 'zy', got {measure_basis!r}")
    return p00, pre


def deep_calibration_scan(
    reps: int,
    chi_grid,
    params: CrossResonanceParams,
    noise: NoiseModel | None = None,
    plan: TwirlPlan | None = None,
    measure_basis: str = "zx",
    shots: int = 0,
) -> list[ScanPoint]:
    """Survival probability of repeated echoed pulses versus amplitude stretch.

    Runs ``reps`` echoed cross-resonance gates from ``|00>`` and projects
    back onto it; ``measure_basis='zy'`` first rotates the target qubit by
    a quarter turn about y so the outcome responds to the ZY term instead
    of the drive.  With a plan, every realization draws one twirl Pauli per
    segment of the whole sequence and the spread of realizations is reported
    through :func:`variance_of_noisy_means`; ``shots`` adds binomial noise
    per realization.  Deterministic given the plan seed and the grid.
    """
    if reps < 1:
        raise ValueError("reps must be at least 1")
    obs, pre = _measurement_operators(measure_basis)
    rho0 = vectorize(obs)

    points = []
    for gi, chi in enumerate(chi_grid):
        schedule = echo_cr_schedule(replace(params, stretch=chi))
        segments = [e for e in schedule.elements if isinstance(e, Segment)]
        if plan is None:
            k_echo = evolve_schedule(schedule, noise)
            k_total = np.linalg.matrix_power(k_echo, reps)
            sp = float(np.real(expectation(obs, pre @ (k_total @ rho0))))
            points.append(ScanPoint(float(chi), sp, 0.0, 0))
            continue

        stacks = [
            pst_twirled_gates(_segment_gate(seg, schedule.n), (), noise)
            for seg in segments
        ]
        frame_ops = {
            id(e): pauli_superop(e.pauli)
            for e in schedule.elements
            if isinstance(e, Frame)
        }
        sp_values = np.empty(plan.count)
        for j in range(plan.count):
            rng = substream(plan.seed, gi, j)
            draws = rng.integers(0, 4**schedule.n, size=(reps, len(segments)))
            k_total = np.eye(4**schedule.n, dtype=complex)
            for r in range(reps):
                seg_i = 0
                for e in schedule.elements:
                    if isinstance(e, Segment):
                        k_total = stacks[seg_i][draws[r, seg_i]] @ k_total
                        seg_i += 1
                    else:
                        k_total = frame_ops[id(e)] @ k_total
            sp = float(np.real(expectation(obs, pre @ (k_total @ rho0))))
            if shots > 0:
                sp = rng.binomial(shots, min(max(sp, 0.0), 1.0)) / shots
            sp_values[j] = sp
        sigma = variance_of_noisy_means(sp_values) if plan.count >= 2 else 0.0
        points.append(ScanPoint(float(chi), float(sp_values.mean()), sigma, plan.count))
    return points

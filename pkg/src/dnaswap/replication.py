"""Base recognition, pair assembly and the entanglement-swapping protocol.

Pipeline for one pairing attempt::

    recognize(template), recognize(candidate)   # intrabase entanglement
    assemble_pair                               # tensor + interleave (t1 c1 t2 c2 t3 c3)
    swap_protocol                               # V, modified Bell A/B, H + CNOT

Qubit indices are 0-based; the "sixth qubit" of the pair is index 5.
"""

from __future__ import annotations

import enum
import functools
import itertools
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .basecode import (
    ALLOWED_MARKS,
    BASES,
    Edge,
    Nucleobase,
    TautomerAmplitudes,
    TautomerForm,
    complement,
    encode,
)
from .core import (
    BELL_LABELS,
    BETA01,
    BETA11,
    CNOT,
    BellLabel,
    ChemTag,
    GateOp,
    H,
    MeasurementRecord,
    StateVector,
    X,
    apply_gate,
    bell_fidelity,
    custom,
    measure_qubit,
    permute_qubits,
    tensor,
    tensor_all,
)

DEFAULT_THETA = float(np.arccos(1 / np.sqrt(3)))
DEFAULT_PHI = float(np.arccos(1 / np.sqrt(2)))
DEFAULT_ANGLES = (DEFAULT_THETA, DEFAULT_PHI)

PAIR_LAYOUT = (0, 3, 1, 4, 2, 5)
ATOM_PAIRS = ((0, 1), (2, 3), (4, 5))
BELL_TOL = 1e-9


class ProtocolError(ValueError):
    pass


def _check_angles(theta: float, phi: float):
    for name, a in (("theta", theta), ("phi", phi)):
        if not 0 < a < np.pi / 2:
            raise ProtocolError(f"{name}={a!r} outside (0, pi/2)")


# --------------------------------------------------------------------------- recognition


def recognized_terms(base: Nucleobase, theta: float = DEFAULT_THETA, phi: float = DEFAULT_PHI) -> dict[str, float]:
    """WC-edge amplitudes after recognition, keyed by basis string.

    ``phi`` splits weight between the usual and star forms, ``theta`` feeds the
    sharp form of G and C.
    """
    ct, st = np.cos(theta), np.sin(theta)
    cp, sp_ = np.cos(phi), np.sin(phi)
    if base is Nucleobase.A:
        return {"011": sp_, "101": -cp}
    if base is Nucleobase.T:
        return {"010": cp, "100": -sp_}
    if base is Nucleobase.G:
        return {"011": ct * cp, "101": ct * sp_, "110": -st}
    return {"100": -ct * cp, "010": -ct * sp_, "001": st}


def orthonormal_extension(vectors: list[np.ndarray], dim: int, candidates=None, count: int | None = None) -> list[np.ndarray]:
    """Extend orthonormal ``vectors`` by ``count`` new orthonormal vectors.

    Gram-Schmidt over ``candidates`` (default: computational basis order), so
    the result is deterministic. By default completes a basis of C^dim.
    """
    basis = [np.asarray(v, dtype=np.complex128) for v in vectors]
    extra = []
    if candidates is None:
        candidates = range(dim)
    if count is None:
        count = dim - len(basis)
    for idx in candidates:
        if len(extra) == count:
            break
        w = np.zeros(dim, dtype=np.complex128)
        w[idx] = 1.0
        for _ in range(2):
            for b in basis:
                w = w - np.vdot(b, w) * b
        norm = np.linalg.norm(w)
        if norm > 1e-8:
            w = w / norm
            basis.append(w)
            extra.append(w)
    if len(extra) != count:
        raise ProtocolError("candidates do not span the requested complement")  # pragma: no cover
    return extra


@functools.lru_cache(maxsize=32)
def recognition_unitary(theta: float = DEFAULT_THETA, phi: float = DEFAULT_PHI) -> np.ndarray:
    """8x8 unitary sending each usual WC basis state to its recognized state.

    The four unused inputs are completed inside their own lambda sector, so
    the unitary never changes the number of |1> qubits.
    """
    _check_angles(theta, phi)
    u = np.zeros((8, 8), dtype=np.complex128)
    used_in, images = [], []
    for base in BASES:
        col = int(encode(base, Edge.WC), 2)
        img = np.zeros(8, dtype=np.complex128)
        for bits, amp in recognized_terms(base, theta, phi).items():
            img[int(bits, 2)] = amp
        u[:, col] = img
        used_in.append(col)
        images.append(img)
    for weight in range(4):
        sector = [x for x in range(8) if bin(x).count("1") == weight]
        free_in = [x for x in sector if x not in used_in]
        sector_imgs = [v for v in images if abs(v[sector]).sum() > 0]
        fill = orthonormal_extension(sector_imgs, 8, candidates=sector, count=len(free_in))
        for x, v in zip(free_in, fill):
            u[:, x] = v
    u.setflags(write=False)
    return u


@functools.lru_cache(maxsize=64)
def recognition_gate(targets=(0, 1, 2), theta: float = DEFAULT_THETA, phi: float = DEFAULT_PHI) -> GateOp:
    return custom(recognition_unitary(theta, phi), targets, label="U", chem_tag=ChemTag.COMPOSITE)


@dataclass(frozen=True)
class RecognizedState:
    base: Nucleobase
    state: StateVector
    angles: tuple[float, float] = DEFAULT_ANGLES

    def tautomer_amplitudes(self) -> TautomerAmplitudes:
        amps = {}
        for mark in ALLOWED_MARKS[self.base]:
            bits = encode(TautomerForm(self.base, mark), Edge.WC)
            amps[mark] = complex(self.state.amplitudes[int(bits, 2)])
        return TautomerAmplitudes(self.base, amps)


def recognize(base: Nucleobase | str, theta: float = DEFAULT_THETA, phi: float = DEFAULT_PHI) -> RecognizedState:
    if isinstance(base, str):
        base = Nucleobase.parse(base)
    _check_angles(theta, phi)
    initial = StateVector.from_bits(encode(base, Edge.WC))
    state = apply_gate(initial, recognition_gate((0, 1, 2), float(theta), float(phi)))
    return RecognizedState(base, state, (theta, phi))


# --------------------------------------------------------------------------- pairs


class Stage(enum.Enum):
    ASSEMBLED = "assembled"
    AFTER_V = "after-V"
    AFTER_BELL = "after-bell"
    FINAL = "final"


@dataclass(frozen=True)
class PairState:
    template: Nucleobase
    candidate: Nucleobase
    state: StateVector
    stage: Stage = Stage.ASSEMBLED
    angles: tuple[float, float] = DEFAULT_ANGLES

    @property
    def proper(self) -> bool:
        return self.candidate is complement(self.template)

    @property
    def name(self) -> str:
        return f"{self.template}.{self.candidate}"


def assemble_pair(a: RecognizedState, b: RecognizedState) -> PairState:
    if a.state.num_qubits != 3 or b.state.num_qubits != 3:
        raise ProtocolError("recognized states must be 3-qubit WC registers")
    if a.angles != b.angles:
        raise ProtocolError("template and candidate recognized with different angles")
    joint = permute_qubits(tensor(a.state, b.state), PAIR_LAYOUT)
    return PairState(a.base, b.base, joint, Stage.ASSEMBLED, a.angles)


def pair_for(template, candidate, theta: float = DEFAULT_THETA, phi: float = DEFAULT_PHI) -> PairState:
    return assemble_pair(recognize(template, theta, phi), recognize(candidate, theta, phi))


# --------------------------------------------------------------------------- V


def _slot_vector(p1: BellLabel, p2: BellLabel, q5: int, q6: int) -> np.ndarray:
    tail = StateVector.from_bits(f"{q5}{q6}")
    return tensor_all(p1.state(), p2.state(), tail).amplitudes


def v_slot_assignment() -> dict[tuple[Nucleobase, Nucleobase], tuple[BellLabel, BellLabel, int, int]]:
    """Image slot (pair-1 Bell, pair-2 Bell, q5, q6) of every assembled pair."""
    slots: dict = {}
    taken = set()

    def first_free(tail_options):
        for p1, p2, tail in itertools.product(BELL_LABELS, BELL_LABELS, tail_options):
            key = (p1, p2) + tail
            if key not in taken:
                return key
        raise ProtocolError("ran out of image slots")  # pragma: no cover

    A, T, G, C = BASES
    for first, second, tail in ((A, T, (1, 1)), (T, A, (1, 1)), (G, C, (0, 1)), (C, G, (0, 1))):
        canonical = (BETA01, BETA01) + tail
        key = canonical if canonical not in taken else first_free([tail])
        slots[(first, second)] = key
        taken.add(key)
    for t, c in itertools.product(BASES, BASES):
        if c is complement(t):
            continue
        key = first_free([(0, 0), (1, 0)])
        slots[(t, c)] = key
        taken.add(key)
    return slots


@functools.lru_cache(maxsize=32)
def v_matrix(theta: float = DEFAULT_THETA, phi: float = DEFAULT_PHI) -> np.ndarray:
    """64x64 unitary mapping each assembled pair onto its slot."""
    slots = v_slot_assignment()
    ins, outs = [], []
    for (t, c), slot in slots.items():
        ins.append(pair_for(t, c, theta, phi).state.amplitudes)
        outs.append(_slot_vector(*slot))
    v = sum(np.outer(o, i.conj()) for i, o in zip(ins, outs))
    for i, o in zip(orthonormal_extension(ins, 64), orthonormal_extension(outs, 64)):
        v = v + np.outer(o, i.conj())
    v.setflags(write=False)
    return v


@functools.lru_cache(maxsize=32)
def v_gate(theta: float = DEFAULT_THETA, phi: float = DEFAULT_PHI) -> GateOp:
    return custom(v_matrix(theta, phi), range(6), label="V", chem_tag=ChemTag.COMPOSITE)


def transform_V(pair: PairState) -> PairState:
    if pair.stage is not Stage.ASSEMBLED:
        raise ProtocolError(f"V expects an assembled pair, got stage {pair.stage.value}")
    state = apply_gate(pair.state, v_gate(*pair.angles))
    return replace(pair, state=state, stage=Stage.AFTER_V)


# --------------------------------------------------------------------------- execution


Lift = Callable[[GateOp], GateOp]
Trace = Callable[..., None]


class _Run:
    """Applies protocol steps to a state, optionally lifted onto a larger register."""

    def __init__(self, state: StateVector, lift: Lift | None = None, trace: Trace | None = None):
        self.state = state
        self.lift = lift
        self.trace = trace

    def gate(self, g: GateOp):
        self.state = apply_gate(self.state, self.lift(g) if self.lift else g)
        if self.trace:
            self.trace(g.name(), self.state, g.chem_tag.value)

    def measure(self, q: int, seed: int, label: str, record: MeasurementRecord) -> int:
        bit, self.state = measure_qubit(self.state, q, seed)
        record.add(q, bit, label)
        if self.trace:
            self.trace(f"measure[{q}]->{bit}", self.state)
        return bit


class Variant(enum.Enum):
    A = "A"
    B = "B"


VARIANT_TARGET = {Variant.A: BETA11, Variant.B: BETA01}


def _bell_ops(run: _Run, pair: tuple[int, int], variant: Variant, seeds, record: MeasurementRecord, tag: str = ""):
    a, b = pair
    target = VARIANT_TARGET[variant]
    run.gate(CNOT(a, b))
    run.gate(H(a))
    m1 = run.measure(a, int(seeds[0]), f"M1{tag}", record)
    m2 = run.measure(b, int(seeds[1]), f"M2{tag}", record)
    # steer the computational-basis outcome onto the target label, then uncompute
    if m1 != target.phase_bit:
        run.gate(X(a))
    if m2 != target.amplitude_bit:
        run.gate(X(b))
    run.gate(H(a, chem_tag=ChemTag.ANTIBONDING if target.phase_bit else ChemTag.HYDROGEN_BONDING))
    run.gate(CNOT(a, b))
    return BellLabel(m1, m2)


def _seeds(seed: int, count: int) -> np.ndarray:
    return np.random.SeedSequence(seed).generate_state(count)


def modified_bell(
    state: StateVector, pair_qubits: tuple[int, int], variant: Variant | str, seed: int
) -> tuple[BellLabel, StateVector, MeasurementRecord]:
    """Nondestructive Bell measurement followed by corrections onto a fixed Bell state.

    Variant A leaves the pair in beta11, variant B in beta01. Returns the
    measured label, the corrected state and the transcript.
    """
    variant = Variant(variant) if isinstance(variant, str) else variant
    record = MeasurementRecord(seed)
    run = _Run(state)
    label = _bell_ops(run, pair_qubits, variant, _seeds(seed, 2), record)
    return label, run.state, record


def step3_gates() -> list[GateOp]:
    return [H(4), CNOT(4, 5)]


# --------------------------------------------------------------------------- outcomes


class Verdict(enum.Enum):
    PROPER = "proper"
    IMPROPER = "improper"


def classify_pair(state: StateVector, pair: tuple[int, int]) -> BellLabel | None:
    for label in BELL_LABELS:
        if bell_fidelity(state, pair, label) > 1 - BELL_TOL:
            return label
    return None


def bond_name(label: BellLabel | None) -> str:
    return label.name if label is not None else "not-bell"


@dataclass
class PairingOutcome:
    template: Nucleobase
    candidate: Nucleobase
    verdict: Verdict
    bonds: tuple
    transcript: MeasurementRecord
    released: bool = False

    @property
    def signature(self) -> str:
        return ",".join(bond_name(b) for b in self.bonds)

    def as_dict(self) -> dict:
        return {
            "template": self.template.value,
            "candidate": self.candidate.value,
            "verdict": self.verdict.value,
            "bonds": [bond_name(b) for b in self.bonds],
            "released": self.released,
            "transcript": self.transcript.as_dict(),
        }


def verdict_of(bonds) -> Verdict:
    if bonds[0] == BETA01 and bonds[1] == BETA01 and bonds[2] in (BETA01, BETA11):
        return Verdict.PROPER
    return Verdict.IMPROPER


def run_swap(
    pair: PairState, seed: int, lift: Lift | None = None, trace: Trace | None = None, initial: StateVector | None = None
) -> tuple[StateVector, MeasurementRecord]:
    """Execute V, the conditional modified Bell measurements and step 3.

    ``lift``/``initial`` let the same steps run on a register that also
    carries the enzyme site.
    """
    if pair.stage is not Stage.ASSEMBLED:
        raise ProtocolError(f"swap protocol expects an assembled pair, got stage {pair.stage.value}")
    seeds = _seeds(seed, 5)
    record = MeasurementRecord(seed)
    run = _Run(initial if initial is not None else pair.state, lift, trace)
    run.gate(v_gate(*pair.angles))
    q6 = run.measure(5, int(seeds[0]), "q6", record)
    variant = Variant.A if q6 == 0 else Variant.B
    _bell_ops(run, ATOM_PAIRS[0], variant, seeds[1:3], record, tag=".1")
    _bell_ops(run, ATOM_PAIRS[1], variant, seeds[3:5], record, tag=".2")
    for g in step3_gates():
        run.gate(g)
    return run.state, record


def swap_protocol(pair: PairState, seed: int) -> tuple[PairState, PairingOutcome]:
    final, record = run_swap(pair, seed)
    bonds = tuple(classify_pair(final, p) for p in ATOM_PAIRS)
    outcome = PairingOutcome(pair.template, pair.candidate, verdict_of(bonds), bonds, record)
    return replace(pair, state=final, stage=Stage.FINAL), outcome


def release_improper(outcome: PairingOutcome, state: PairState) -> tuple[PairState, PairingOutcome]:
    """Flip the sixth qubit so the third atom pair regains a fixed proton count."""
    if outcome.verdict is not Verdict.IMPROPER:
        raise ProtocolError("only improper pairs are released")
    released = apply_gate(state.state, X(5, chem_tag=ChemTag.PROTON_TUNNELING))
    return replace(state, state=released), replace(outcome, released=True)


def expected_final(template: Nucleobase, candidate: Nucleobase) -> StateVector:
    """Final state of a proper pair: two hydrogen bonds plus the third atom pair."""
    third = BETA11 if template in (Nucleobase.A, Nucleobase.T) else BETA01
    return tensor_all(BETA01.state(), BETA01.state(), third.state())


def tautomer_pair_probabilities(pair: PairState) -> dict[tuple[TautomerForm, TautomerForm], float]:
    """Born weights of every (template form, candidate form) product term.

    Weights are renormalized over the tautomer-pair terms, i.e. conditioned on
    the pair collapsing onto one of them.
    """
    amps = pair.state.amplitudes
    probs = {}
    for mt, mc in itertools.product(ALLOWED_MARKS[pair.template], ALLOWED_MARKS[pair.candidate]):
        ft, fc = TautomerForm(pair.template, mt), TautomerForm(pair.candidate, mc)
        wt, wc = encode(ft, Edge.WC), encode(fc, Edge.WC)
        bits = "".join(wt[i] + wc[i] for i in range(3))
        probs[(ft, fc)] = float(abs(amps[int(bits, 2)]) ** 2)
    total = sum(probs.values())
    if total < 1e-12:
        raise ProtocolError(f"{pair.name} has no weight on tautomer-pair terms")
    return {k: v / total for k, v in probs.items()}


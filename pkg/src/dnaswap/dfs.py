"""Collective decoherence and decoherence-free sectors.

lambda of a basis string is (#0) - (#1). Weak collective dephasing multiplies
every |1> by the same phase, so any state supported on a single lambda sector
only picks up a global phase.

The enzyme active site is modelled as a proton reservoir of ``k`` qubits. A
base-register gate is lifted onto base + enzyme by letting the enzyme absorb
or donate exactly the protons the base gains or loses, which keeps the total
number of |1> qubits fixed (see :func:`lift_gate`).
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from math import comb

import numpy as np
import scipy.sparse as sp

from .core import (
    PAULI,
    ChemTag,
    GateOp,
    StateVector,
    X,
    apply_gate,
    custom,
    gate_matrix,
    measure_qubit,
    popcount,
    tensor,
)

SUPPORT_TOL = 1e-12


def lambda_of(bits: str) -> int:
    return bits.count("0") - bits.count("1")


@dataclass(frozen=True)
class NoiseSector:
    K: int
    lam: int

    def __post_init__(self):
        if self.K < 1 or abs(self.lam) > self.K or (self.K - self.lam) % 2:
            raise ValueError(f"no sector lambda={self.lam} on {self.K} qubits")

    @property
    def ones(self) -> int:
        return (self.K - self.lam) // 2

    @property
    def dimension(self) -> int:
        return comb(self.K, self.ones)

    def basis(self) -> list[str]:
        return [format(x, f"0{self.K}b") for x in range(2**self.K) if popcount(x) == self.ones]


def _lambda_table(n: int) -> np.ndarray:
    ones = np.array([popcount(x) for x in range(2**n)])
    return n - 2 * ones


def sector_support(state: StateVector, tol: float = SUPPORT_TOL) -> set[int]:
    lam = _lambda_table(state.num_qubits)
    w = np.abs(state.amplitudes) ** 2
    return {int(v) for v in np.unique(lam[w > tol])}


def sector_weights(state: StateVector) -> dict[int, float]:
    lam = _lambda_table(state.num_qubits)
    w = np.abs(state.amplitudes) ** 2
    return {int(v): float(w[lam == v].sum()) for v in np.unique(lam) if w[lam == v].sum() > SUPPORT_TOL}


def weak_dephase(state: StateVector, phi: float) -> StateVector:
    """Multiply each basis amplitude by exp(i phi (#1s))."""
    ones = (state.num_qubits - _lambda_table(state.num_qubits)) // 2
    return StateVector(state.num_qubits, state.amplitudes * np.exp(1j * phi * ones))


def dephasing_fidelity(state: StateVector, shots: int, seed: int) -> float:
    """Mean |<psi|D(phi)|psi>|^2 with phi uniform on [0, 2pi) per shot."""
    rng = np.random.default_rng(seed)
    phis = rng.uniform(0, 2 * np.pi, size=shots)
    return float(np.mean([state.fidelity(weak_dephase(state, p)) for p in phis]))


@functools.lru_cache(maxsize=16)
def _pauli_power(axis: str, n: int) -> np.ndarray:
    m = np.array([[1.0]], dtype=np.complex128)
    for _ in range(n):
        m = np.kron(m, PAULI[axis])
    m.setflags(write=False)
    return m


def collective_pauli(axis: str, n: int) -> GateOp:
    """n-fold tensor power of a single Pauli (S_x, S_y, S_z)."""
    axis = axis.lower()
    if axis not in PAULI:
        raise ValueError(f"axis must be x, y or z, got {axis!r}")
    if n > 12:
        raise ValueError("collective Pauli matrices are built densely; n <= 12")
    return custom(_pauli_power(axis, n), range(n), label=f"S{axis}^{n}")


# --------------------------------------------------------------------------- enzyme site


@dataclass(frozen=True)
class EnzymeSite:
    """q acceptors (|0>) followed by k - q donors (|1>)."""

    q: int = 2
    k: int = 4

    def __post_init__(self):
        if not 0 <= self.q <= self.k or self.k < 1:
            raise ValueError(f"need 0 <= q <= k and k >= 1, got q={self.q}, k={self.k}")

    @property
    def bits(self) -> str:
        return "0" * self.q + "1" * (self.k - self.q)

    @property
    def protons(self) -> int:
        return self.k - self.q

    @property
    def lam(self) -> int:
        return 2 * self.q - self.k

    def state(self) -> StateVector:
        return StateVector.from_bits(self.bits)

    def ladder(self, protons: int) -> int:
        """Index of the reservoir state holding ``protons`` donors, right-aligned."""
        return (1 << protons) - 1

    def can_host(self, n_base: int, base_bits: str) -> bool:
        """Whether lifted gates act faithfully on ``base_bits`` + this site."""
        charge = base_bits.count("1") + self.protons
        return n_base <= charge <= self.k


def lift_matrix(m: np.ndarray, n_base: int, k: int):
    """Number-conserving embedding of a base-register unitary.

    On the block of fixed total charge Q (base protons + reservoir protons)
    the lifted map acts as ``m`` with the reservoir compensating, provided the
    reservoir can absorb every base proton count (n_base <= Q <= k). All other
    states are left untouched, so the result is unitary and conserves the total
    number of |1> qubits exactly.
    """
    dim_b, dim_e = 2**n_base, 2**k
    ones = np.array([popcount(x) for x in range(dim_b)])
    rows, cols, vals = [], [], []
    handled = np.zeros(dim_b * dim_e, dtype=bool)
    nz_y, nz_x = np.nonzero(np.abs(m) > 0)
    for charge in range(n_base, k + 1):
        col = np.arange(dim_b) * dim_e + ((1 << (charge - ones)) - 1)
        handled[col] = True
        rows.append(nz_y * dim_e + ((1 << (charge - ones[nz_y])) - 1))
        cols.append(nz_x * dim_e + ((1 << (charge - ones[nz_x])) - 1))
        vals.append(m[nz_y, nz_x])
    rest = np.flatnonzero(~handled)
    rows.append(rest)
    cols.append(rest)
    vals.append(np.ones(rest.size, dtype=np.complex128))
    dim = dim_b * dim_e
    return sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim), dtype=np.complex128
    )


def lift_gate(gate: GateOp, n_base: int, site: EnzymeSite) -> GateOp:
    m = gate_matrix(gate, n_base)
    return custom(
        lift_matrix(m, n_base, site.k),
        range(n_base + site.k),
        label=gate.name(),
        chem_tag=gate.chem_tag,
    )


def joint_initial(base_bits: str, site: EnzymeSite) -> StateVector:
    if not site.can_host(len(base_bits), base_bits):
        raise ValueError(
            f"enzyme site q={site.q}, k={site.k} cannot absorb the proton traffic of a "
            f"{len(base_bits)}-qubit base register starting at |{base_bits}>; "
            f"need {len(base_bits)} <= #1(base) + k - q <= k"
        )
    return tensor(StateVector.from_bits(base_bits), site.state())


def base_marginal_state(joint: StateVector, n_base: int) -> StateVector | None:
    """Base-register state if the joint state factorizes up to reservoir labels.

    Each base basis string pairs with exactly one reservoir state in a single
    charge block, so the base amplitudes are read off directly.
    """
    dim_e = 2 ** (joint.num_qubits - n_base)
    m = joint.amplitudes.reshape(2**n_base, dim_e)
    amps = np.zeros(2**n_base, dtype=np.complex128)
    for x in range(2**n_base):
        nz = np.flatnonzero(np.abs(m[x]) > 1e-12)
        if nz.size > 1:
            return None
        if nz.size:
            amps[x] = m[x, nz[0]]
    return StateVector(n_base, amps)


# --------------------------------------------------------------------------- audits


@dataclass(frozen=True)
class Measure:
    """A projective measurement step inside an audited sequence."""

    qubit: int
    seed: int
    label: str = ""

    def name(self) -> str:
        return self.label or f"measure[{self.qubit}]"


@dataclass
class AuditStep:
    index: int
    name: str
    support: list[int]
    changed: bool
    chem_tag: str | None = None


@dataclass
class AuditReport:
    initial_support: list[int]
    steps: list[AuditStep] = field(default_factory=list)
    label: str = ""

    @property
    def passed(self) -> bool:
        return len(self.initial_support) == 1 and not any(s.changed for s in self.steps)

    @property
    def first_violation(self) -> int | None:
        for s in self.steps:
            if s.changed:
                return s.index
        return None

    def as_dict(self) -> dict:
        return {
            "label": self.label,
            "passed": self.passed,
            "initial_support": self.initial_support,
            "first_violation": self.first_violation,
            "steps": [
                {"index": s.index, "name": s.name, "support": s.support, "changed": s.changed, "chem_tag": s.chem_tag}
                for s in self.steps
            ],
        }


class _Recorder:
    def __init__(self, initial: StateVector, label: str = ""):
        self.report = AuditReport(sorted(sector_support(initial)), label=label)
        self.previous = self.report.initial_support

    def __call__(self, name: str, state: StateVector, chem_tag: str | None = None):
        support = sorted(sector_support(state))
        step = AuditStep(len(self.report.steps), name, support, support != self.previous, chem_tag)
        self.report.steps.append(step)
        self.previous = support


def audit_circuit(steps, initial: StateVector, label: str = "") -> AuditReport:
    """Track the lambda support of ``initial`` through gates and measurements.

    A step is flagged when the set of occupied sectors differs from the
    previous step.
    """
    rec = _Recorder(initial, label)
    state = initial
    for step in steps:
        if isinstance(step, Measure):
            _, state = measure_qubit(state, step.qubit, step.seed)
            rec(step.name(), state)
        else:
            state = apply_gate(state, step)
            rec(step.name(), state, step.chem_tag.value if step.chem_tag else None)
    return rec.report


def uncompensated_fault(qubit: int = 0) -> GateOp:
    """A bare proton flip on one base atom with no enzyme partner."""
    return X(qubit, chem_tag=ChemTag.PROTON_TUNNELING, label=f"fault:X[{qubit}]")


# --------------------------------------------------------------------------- joint realizations

# a pair register (6 base qubits) needs a reservoir that can take every base
# proton count from 2 to 4 initial donors: 6 <= #1 + k - q <= k
PAIR_SITE = EnzymeSite(q=4, k=8)


def _faulted(lift, fault_step: int | None, total_qubits: int):
    """Wrap ``lift`` so that gate number ``fault_step`` is followed by a bare X on qubit 0."""
    count = [0]
    fault = sp.kron(sp.csr_matrix(PAULI["x"]), sp.identity(2 ** (total_qubits - 1)), format="csr")

    def wrapped(g: GateOp) -> GateOp:
        lifted = lift(g)
        idx = count[0]
        count[0] += 1
        if idx != fault_step:
            return lifted
        return custom(fault @ lifted.matrix, lifted.targets, label=f"{lifted.name()}+fault:X[0]")

    return wrapped


def recognition_audit(base, site: EnzymeSite = EnzymeSite(), theta=None, phi=None, fault_step: int | None = None):
    """Audit recognition of one base with the enzyme site co-simulated."""
    from .basecode import Edge, Nucleobase, encode
    from .replication import DEFAULT_THETA, DEFAULT_PHI, _Run, recognition_gate

    base = Nucleobase.parse(base) if isinstance(base, str) else base
    theta = DEFAULT_THETA if theta is None else theta
    phi = DEFAULT_PHI if phi is None else phi
    initial = joint_initial(encode(base, Edge.WC), site)
    lift = _faulted(lambda g: lift_gate(g, 3, site), fault_step, initial.num_qubits)
    rec = _Recorder(initial, label=f"U({base.value}) q={site.q} k={site.k}")
    run = _Run(initial, lift, rec)
    run.gate(recognition_gate((0, 1, 2), theta, phi))
    return rec.report, run.state


def protocol_audit(
    template,
    candidate,
    site: EnzymeSite = PAIR_SITE,
    seed: int = 0,
    theta=None,
    phi=None,
    fault_step: int | None = None,
):
    """Audit U on both bases, the reordering swaps and the full swapping protocol.

    Returns the report and the final joint state.
    """
    from .basecode import Edge, Nucleobase, encode
    from .core import MeasurementRecord, SWAP, permutation_swaps
    from .replication import DEFAULT_THETA, DEFAULT_PHI, PAIR_LAYOUT, _Run, pair_for, recognition_gate, run_swap

    template = Nucleobase.parse(template) if isinstance(template, str) else template
    candidate = Nucleobase.parse(candidate) if isinstance(candidate, str) else candidate
    theta = DEFAULT_THETA if theta is None else theta
    phi = DEFAULT_PHI if phi is None else phi
    bits = encode(template, Edge.WC) + encode(candidate, Edge.WC)
    initial = joint_initial(bits, site)
    lift = _faulted(lambda g: lift_gate(g, 6, site), fault_step, initial.num_qubits)
    rec = _Recorder(initial, label=f"U,S({template.value}.{candidate.value}) q={site.q} k={site.k}")
    run = _Run(initial, lift, rec)
    run.gate(recognition_gate((0, 1, 2), theta, phi))
    run.gate(recognition_gate((3, 4, 5), theta, phi))
    for a, b in permutation_swaps(PAIR_LAYOUT):
        run.gate(SWAP(a, b))
    pair = pair_for(template, candidate, theta, phi)
    final, _ = run_swap(pair, seed, lift=lift, trace=rec, initial=run.state)
    return rec.report, final


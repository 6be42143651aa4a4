"""Dense state-vector simulation primitives.

Qubit 0 is the most significant bit of the basis index, so the ket
``|q0 q1 ... q_{n-1}>`` reads left to right like the written basis strings.
States are immutable; every operation returns a new :class:`StateVector`.
"""

from __future__ import annotations

import enum
import functools
import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

MAX_QUBITS = 24
NORM_TOL = 1e-10
UNITARY_TOL = 1e-12
ZERO_BRANCH_TOL = 1e-14


class StateError(ValueError):
    pass


class GateError(ValueError):
    pass


def basis_string(index: int, n: int) -> str:
    return format(index, f"0{n}b")


def popcount(index: int) -> int:
    return bin(index).count("1")


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized amplitudes over ``num_qubits`` qubits."""

    num_qubits: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        n = self.num_qubits
        if not 1 <= n <= MAX_QUBITS:
            raise StateError(f"num_qubits must be in [1, {MAX_QUBITS}], got {n}")
        amps = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amps.size != 2**n:
            raise StateError(f"expected {2**n} amplitudes, got {amps.size}")
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise StateError(f"state is not normalized (norm^2 = {norm!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_bits(cls, bits: str) -> "StateVector":
        if not bits or set(bits) - {"0", "1"}:
            raise StateError(f"bad basis string {bits!r}")
        amps = np.zeros(2 ** len(bits), dtype=np.complex128)
        amps[int(bits, 2)] = 1.0
        return cls(len(bits), amps)

    @classmethod
    def from_terms(cls, terms: dict[str, complex], normalize: bool = False) -> "StateVector":
        """Build a state from ``{basis string: amplitude}``."""
        n = len(next(iter(terms)))
        amps = np.zeros(2**n, dtype=np.complex128)
        for bits, c in terms.items():
            if len(bits) != n:
                raise StateError("basis strings of unequal length")
            amps[int(bits, 2)] += c
        if normalize:
            amps = amps / np.linalg.norm(amps)
        return cls(n, amps)

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "StateVector":
        v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
        return cls(n, v / np.linalg.norm(v))

    @property
    def dim(self) -> int:
        return 2**self.num_qubits

    def terms(self, tol: float = 1e-12) -> dict[str, complex]:
        """Nonzero amplitudes keyed by basis string."""
        n = self.num_qubits
        idx = np.flatnonzero(np.abs(self.amplitudes) > tol)
        return {basis_string(int(i), n): complex(self.amplitudes[i]) for i in idx}

    def inner(self, other: "StateVector") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def fidelity(self, other: "StateVector") -> float:
        return abs(self.inner(other)) ** 2

    def allclose(self, other: "StateVector", atol: float = 1e-12) -> bool:
        """Exact-amplitude comparison (global phase matters)."""
        return self.num_qubits == other.num_qubits and bool(
            np.allclose(self.amplitudes, other.amplitudes, rtol=0, atol=atol)
        )

    def equal_up_to_phase(self, other: "StateVector", atol: float = 1e-12) -> bool:
        return self.num_qubits == other.num_qubits and abs(abs(self.inner(other)) - 1) < atol

    def __repr__(self):
        body = " + ".join(f"({c:.4g})|{b}>" for b, c in list(self.terms().items())[:8])
        return f"StateVector(n={self.num_qubits}: {body})"


# --------------------------------------------------------------------------- gates


class GateKind(enum.Enum):
    PAULI_X = "X"
    PAULI_Y = "Y"
    PAULI_Z = "Z"
    HADAMARD = "H"
    ROTATION = "R"
    SP = "SP"
    SP_PRIME = "SP'"
    SWAP = "SWAP"
    CUSTOM = "CUSTOM"


class ChemTag(enum.Enum):
    PROTON_TUNNELING = "proton-tunneling"
    HYDROGEN_BONDING = "hydrogen-bonding"
    ANTIBONDING = "antibonding"
    COMPOSITE = "composite"


_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
_H = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2)
_SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=np.complex128)

PAULI = {"x": _X, "y": _Y, "z": _Z}


def rotation_matrix(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]], dtype=np.complex128)


def sp_matrix(theta: float) -> np.ndarray:
    """Superposition gate R(theta) @ Z."""
    return rotation_matrix(theta) @ _Z


def sp_prime_matrix(theta: float) -> np.ndarray:
    """Superposition gate Z @ R(theta)."""
    return _Z @ rotation_matrix(theta)


_DEFAULT_TAG = {
    GateKind.PAULI_X: ChemTag.PROTON_TUNNELING,
    GateKind.PAULI_Y: ChemTag.PROTON_TUNNELING,
    GateKind.PAULI_Z: ChemTag.COMPOSITE,
    GateKind.HADAMARD: ChemTag.HYDROGEN_BONDING,
    GateKind.ROTATION: ChemTag.HYDROGEN_BONDING,
    GateKind.SP: ChemTag.HYDROGEN_BONDING,
    GateKind.SP_PRIME: ChemTag.HYDROGEN_BONDING,
    GateKind.SWAP: ChemTag.PROTON_TUNNELING,
    GateKind.CUSTOM: ChemTag.COMPOSITE,
}


def _max_unitary_defect(m) -> float:
    if sp.issparse(m):
        d = (m.conj().T @ m - sp.identity(m.shape[0], format="csr")).tocoo()
        return float(np.abs(d.data).max()) if d.nnz else 0.0
    return float(np.abs(m.conj().T @ m - np.eye(m.shape[0])).max())


@dataclass(frozen=True, eq=False)
class GateOp:
    """A unitary acting on ``targets``, conditioned on every control being |1>.

    ``matrix`` is only used for ``GateKind.CUSTOM``; it may be a dense array or
    a scipy sparse matrix (large joint-register gates).
    """

    kind: GateKind
    targets: tuple[int, ...]
    controls: tuple[int, ...] = ()
    theta: float | None = None
    matrix: object = field(default=None, repr=False)
    chem_tag: ChemTag | None = None
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        object.__setattr__(self, "controls", tuple(int(c) for c in self.controls))
        if self.chem_tag is None:
            object.__setattr__(self, "chem_tag", _DEFAULT_TAG[self.kind])
        qubits = self.targets + self.controls
        if not self.targets:
            raise GateError("gate needs at least one target")
        if len(set(qubits)) != len(qubits):
            raise GateError(f"targets {self.targets} and controls {self.controls} must be disjoint")
        if min(qubits) < 0:
            raise GateError("negative qubit index")
        if self.kind in (GateKind.ROTATION, GateKind.SP, GateKind.SP_PRIME) and self.theta is None:
            raise GateError(f"{self.kind.value} needs an angle")
        if self.kind is GateKind.CUSTOM:
            m = self.matrix
            if m is None:
                raise GateError("custom gate needs a matrix")
            if not sp.issparse(m):
                m = np.asarray(m, dtype=np.complex128)
                m.setflags(write=False)
                object.__setattr__(self, "matrix", m)
            if m.shape != (2 ** len(self.targets),) * 2:
                raise GateError(f"matrix shape {m.shape} does not match {len(self.targets)} targets")
            defect = _max_unitary_defect(m)
            if defect > UNITARY_TOL:
                raise GateError(f"custom matrix is not unitary (max |U^dag U - I| = {defect:.3g})")
        want = 2 if self.kind is GateKind.SWAP else (1 if self.kind is not GateKind.CUSTOM else None)
        if want is not None and len(self.targets) != want:
            raise GateError(f"{self.kind.value} acts on {want} target(s)")

    @property
    def qubits(self) -> tuple[int, ...]:
        return self.controls + self.targets

    def base_matrix(self):
        """Matrix on the target qubits only (first target = most significant)."""
        k = self.kind
        if k is GateKind.PAULI_X:
            return _X
        if k is GateKind.PAULI_Y:
            return _Y
        if k is GateKind.PAULI_Z:
            return _Z
        if k is GateKind.HADAMARD:
            return _H
        if k is GateKind.ROTATION:
            return rotation_matrix(self.theta)
        if k is GateKind.SP:
            return sp_matrix(self.theta)
        if k is GateKind.SP_PRIME:
            return sp_prime_matrix(self.theta)
        if k is GateKind.SWAP:
            return _SWAP
        return self.matrix

    def name(self) -> str:
        if self.label:
            return self.label
        s = self.kind.value
        if self.theta is not None:
            s += f"({self.theta:.4f})"
        if self.controls:
            s = "c" * len(self.controls) + s + f"[{','.join(map(str, self.controls))}->"
            return s + f"{','.join(map(str, self.targets))}]"
        return s + f"[{','.join(map(str, self.targets))}]"


# convenience constructors
def X(q: int, **kw) -> GateOp:
    return GateOp(GateKind.PAULI_X, (q,), **kw)


def Y(q: int, **kw) -> GateOp:
    return GateOp(GateKind.PAULI_Y, (q,), **kw)


def Z(q: int, **kw) -> GateOp:
    return GateOp(GateKind.PAULI_Z, (q,), **kw)


def H(q: int, **kw) -> GateOp:
    return GateOp(GateKind.HADAMARD, (q,), **kw)


def CNOT(control: int, target: int, **kw) -> GateOp:
    return GateOp(GateKind.PAULI_X, (target,), (control,), **kw)


def SWAP(a: int, b: int, **kw) -> GateOp:
    return GateOp(GateKind.SWAP, (a, b), **kw)


def custom(matrix, targets: Sequence[int], controls: Sequence[int] = (), **kw) -> GateOp:
    return GateOp(GateKind.CUSTOM, tuple(targets), tuple(controls), matrix=matrix, **kw)


def _check_indices(n: int, qubits: Iterable[int]):
    for q in qubits:
        if not 0 <= q < n:
            raise GateError(f"qubit index {q} out of range for {n} qubits")


def apply_gate(state: StateVector, gate: GateOp) -> StateVector:
    n = state.num_qubits
    _check_indices(n, gate.qubits)
    t = len(gate.targets)
    psi = state.amplitudes.reshape((2,) * n).copy()
    # slice where every control reads 1
    index = [slice(None)] * n
    for c in gate.controls:
        index[c] = 1
    index = tuple(index)
    sub = psi[index]
    # remaining axes after removing controls, in original order
    free = [q for q in range(n) if q not in gate.controls]
    tpos = [free.index(q) for q in gate.targets]
    moved = np.moveaxis(sub, tpos, range(t))
    shape = moved.shape
    flat = moved.reshape(2**t, -1)
    out = np.asarray(gate.base_matrix() @ flat).reshape(shape)
    psi[index] = np.moveaxis(out, range(t), tpos)
    return StateVector(n, psi.reshape(-1))


def apply_circuit(state: StateVector, gates: Iterable[GateOp]) -> StateVector:
    for g in gates:
        state = apply_gate(state, g)
    return state


def gate_matrix(gate: GateOp, n: int) -> np.ndarray:
    """Dense 2^n x 2^n matrix of ``gate``, assembled column by column from bits.

    Independent of :func:`apply_gate`; used as its oracle and for audits.
    """
    _check_indices(n, gate.qubits)
    base = np.asarray(gate.base_matrix().toarray() if sp.issparse(gate.base_matrix()) else gate.base_matrix())
    dim = 2**n
    out = np.zeros((dim, dim), dtype=np.complex128)
    shifts = [n - 1 - q for q in gate.targets]
    cmask = sum(1 << (n - 1 - c) for c in gate.controls)
    tmask = sum(1 << s for s in shifts)
    t = len(shifts)
    for x in range(dim):
        if x & cmask != cmask:
            out[x, x] = 1.0
            continue
        sub_in = 0
        for s in shifts:
            sub_in = (sub_in << 1) | ((x >> s) & 1)
        rest = x & ~tmask
        for sub_out in range(2**t):
            amp = base[sub_out, sub_in]
            if amp == 0:
                continue
            y = rest
            for i, s in enumerate(shifts):
                if (sub_out >> (t - 1 - i)) & 1:
                    y |= 1 << s
            out[y, x] += amp
    return out


def circuit_matrix(gates: Iterable[GateOp], n: int) -> np.ndarray:
    m = np.eye(2**n, dtype=np.complex128)
    for g in gates:
        m = gate_matrix(g, n) @ m
    return m


def unitary_defect(gate: GateOp, n: int) -> float:
    return _max_unitary_defect(gate_matrix(gate, n))


# --------------------------------------------------------------------------- measurement


@dataclass
class MeasurementRecord:
    """Ordered transcript of projective measurements."""

    rng_seed: int
    outcomes: list[tuple[int, int]] = field(default_factory=list)
    labels: list[str] = field(default_factory=list)

    def add(self, qubit: int, bit: int, label: str):
        if bit not in (0, 1):
            raise ValueError(f"outcome bit must be 0 or 1, got {bit}")
        self.outcomes.append((qubit, bit))
        self.labels.append(label)

    def extend(self, other: "MeasurementRecord"):
        for (q, b), lab in zip(other.outcomes, other.labels):
            self.add(q, b, lab)

    def as_dict(self) -> dict:
        return {
            "rng_seed": self.rng_seed,
            "outcomes": [{"label": lab, "qubit": q, "bit": b} for (q, b), lab in zip(self.outcomes, self.labels)],
        }


def outcome_probability(state: StateVector, q: int, bit: int) -> float:
    _check_indices(state.num_qubits, [q])
    psi = state.amplitudes.reshape((2,) * state.num_qubits)
    branch = np.take(psi, bit, axis=q)
    return float(np.vdot(branch, branch).real)


def project(state: StateVector, q: int, bit: int) -> StateVector:
    """Post-measurement state for outcome ``bit`` on qubit ``q``."""
    n = state.num_qubits
    p = outcome_probability(state, q, bit)
    if p < ZERO_BRANCH_TOL:
        raise StateError(f"outcome {bit} on qubit {q} has zero probability")
    psi = state.amplitudes.reshape((2,) * n).copy()
    idx = [slice(None)] * n
    idx[q] = 1 - bit
    psi[tuple(idx)] = 0
    return StateVector(n, psi.reshape(-1) / np.sqrt(p))


def measure_qubit(state: StateVector, q: int, rng_seed: int) -> tuple[int, StateVector]:
    p0 = outcome_probability(state, q, 0)
    p1 = outcome_probability(state, q, 1)
    if p0 < ZERO_BRANCH_TOL and p1 < ZERO_BRANCH_TOL:
        raise StateError("both measurement branches vanish; state is corrupted")
    rng = np.random.default_rng(rng_seed)
    bit = int(rng.random() < p1 / (p0 + p1))
    if (p1 if bit else p0) < ZERO_BRANCH_TOL:
        bit = 1 - bit
    return bit, project(state, q, bit)


# --------------------------------------------------------------------------- structure


def permute_qubits(state: StateVector, perm: Sequence[int]) -> StateVector:
    """Reorder qubits: output position ``i`` holds input qubit ``perm[i]``."""
    n = state.num_qubits
    perm = [int(p) for p in perm]
    if sorted(perm) != list(range(n)):
        raise StateError(f"{perm} is not a permutation of 0..{n - 1}")
    psi = state.amplitudes.reshape((2,) * n).transpose(perm)
    return StateVector(n, psi.reshape(-1))


def inverse_permutation(perm: Sequence[int]) -> list[int]:
    inv = [0] * len(perm)
    for i, p in enumerate(perm):
        inv[p] = i
    return inv


def permutation_swaps(perm: Sequence[int]) -> list[tuple[int, int]]:
    """SWAP positions realizing :func:`permute_qubits` with ``perm``, in order."""
    current = list(range(len(perm)))
    swaps = []
    for i, want in enumerate(perm):
        j = current.index(want)
        if j != i:
            current[i], current[j] = current[j], current[i]
            swaps.append((i, j))
    return swaps


def tensor(a: StateVector, b: StateVector) -> StateVector:
    n = a.num_qubits + b.num_qubits
    if n > MAX_QUBITS:
        raise StateError(f"tensor product would have {n} qubits (cap {MAX_QUBITS})")
    return StateVector(n, np.kron(a.amplitudes, b.amplitudes))


def tensor_all(*states: StateVector) -> StateVector:
    out = states[0]
    for s in states[1:]:
        out = tensor(out, s)
    return out


def _check_cut(n: int, cut) -> list[int]:
    cut = sorted({int(c) for c in cut})
    if not cut or len(cut) >= n or cut[0] < 0 or cut[-1] >= n:
        raise StateError(f"cut {cut} must be a nonempty proper subset of 0..{n - 1}")
    return cut


def schmidt_coefficients(state: StateVector, cut) -> np.ndarray:
    n = state.num_qubits
    cut = _check_cut(n, cut)
    rest = [q for q in range(n) if q not in cut]
    m = state.amplitudes.reshape((2,) * n).transpose(cut + rest).reshape(2 ** len(cut), -1)
    return np.linalg.svd(m, compute_uv=False)


def reduced_density_matrix(state: StateVector, keep) -> np.ndarray:
    n = state.num_qubits
    keep = sorted({int(c) for c in keep})
    _check_indices(n, keep)
    rest = [q for q in range(n) if q not in keep]
    m = state.amplitudes.reshape((2,) * n).transpose(keep + rest).reshape(2 ** len(keep), -1)
    return m @ m.conj().T


def entanglement_entropy(state: StateVector, cut) -> float:
    """Base-2 von Neumann entropy of the qubits in ``cut``."""
    p = schmidt_coefficients(state, cut) ** 2
    p = p[p > 1e-15]
    return float(max(0.0, -(p * np.log2(p)).sum()))


# --------------------------------------------------------------------------- Bell states


@dataclass(frozen=True)
class BellLabel:
    """beta_ij = (|0 j> + (-1)^i |1 (1-j)>) / sqrt 2."""

    phase_bit: int
    amplitude_bit: int

    def __post_init__(self):
        if self.phase_bit not in (0, 1) or self.amplitude_bit not in (0, 1):
            raise ValueError("Bell label bits must be 0 or 1")

    @property
    def name(self) -> str:
        return f"beta{self.phase_bit}{self.amplitude_bit}"

    def state(self) -> StateVector:
        return _bell_cached(self.phase_bit, self.amplitude_bit)

    @classmethod
    def parse(cls, name: str) -> "BellLabel":
        digits = name[-2:]
        return cls(int(digits[0]), int(digits[1]))

    def __str__(self):
        return self.name


@functools.lru_cache(maxsize=4)
def _bell_cached(i: int, j: int) -> StateVector:
    return StateVector.from_terms({f"0{j}": 1 / np.sqrt(2), f"1{1 - j}": (-1) ** i / np.sqrt(2)})


BELL_LABELS = tuple(BellLabel(i, j) for i, j in itertools.product((0, 1), repeat=2))
BETA00, BETA01, BETA10, BETA11 = BELL_LABELS


def bell_state(i: int, j: int) -> StateVector:
    return BellLabel(i, j).state()


def bell_fidelity(state: StateVector, pair: tuple[int, int], label: BellLabel) -> float:
    """<beta| rho_pair |beta> for the two qubits in ``pair``."""
    rho = reduced_density_matrix(state, pair)
    if pair[0] > pair[1]:
        # reduced_density_matrix orders kept qubits ascending
        rho = _SWAP @ rho @ _SWAP
    b = label.state().amplitudes
    return float(np.vdot(b, rho @ b).real)

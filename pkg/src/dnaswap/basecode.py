"""Qubit encodings of nucleobase tautomers on the H, WC and S edges.

An atom carrying a shareable proton (donor) is |1>, an acceptor is |0>.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np


class Family(enum.Enum):
    PURINE = "purine"
    PYRIMIDINE = "pyrimidine"


class Nucleobase(enum.Enum):
    A = "A"
    T = "T"
    G = "G"
    C = "C"

    @property
    def family(self) -> Family:
        return Family.PURINE if self in (Nucleobase.A, Nucleobase.G) else Family.PYRIMIDINE

    @classmethod
    def parse(cls, letter: str) -> "Nucleobase":
        try:
            return cls(letter.strip().upper())
        except ValueError:
            raise ValueError(f"not a nucleobase letter: {letter!r}") from None

    def __str__(self):
        return self.value


class Mark(enum.Enum):
    USUAL = ""
    STAR = "*"
    SHARP = "#"


class Edge(enum.Enum):
    H = "H"
    WC = "WC"
    S = "S"


A, T, G, C = Nucleobase.A, Nucleobase.T, Nucleobase.G, Nucleobase.C
BASES = (A, T, G, C)

_COMPLEMENT = {A: T, T: A, G: C, C: G}

# allowed tautomer forms, in the order they appear in the recognized superposition
ALLOWED_MARKS = {
    A: (Mark.USUAL, Mark.STAR),
    T: (Mark.USUAL, Mark.STAR),
    G: (Mark.USUAL, Mark.STAR, Mark.SHARP),
    C: (Mark.USUAL, Mark.STAR, Mark.SHARP),
}


class EncodingError(ValueError):
    pass


@dataclass(frozen=True)
class TautomerForm:
    base: Nucleobase
    mark: Mark = Mark.USUAL

    def __post_init__(self):
        if self.mark not in ALLOWED_MARKS[self.base]:
            raise EncodingError(f"{self.base}{self.mark.value} is not an allowed tautomer")

    @property
    def name(self) -> str:
        return f"{self.base.value}{self.mark.value}"

    @property
    def usual(self) -> bool:
        return self.mark is Mark.USUAL

    def __str__(self):
        return self.name


# (H, WC, S) strings per tautomer form
_TABLE = {
    (A, Mark.USUAL): ("01", "101", "10"),
    (A, Mark.STAR): ("00", "011", "10"),
    (T, Mark.USUAL): ("10", "010", "0"),
    (T, Mark.STAR): ("11", "100", "0"),
    (G, Mark.USUAL): ("00", "011", "10"),
    (G, Mark.STAR): ("01", "101", "10"),
    (G, Mark.SHARP): ("01", "110", "00"),
    (C, Mark.USUAL): ("11", "100", "0"),
    (C, Mark.STAR): ("10", "010", "0"),
    (C, Mark.SHARP): ("10", "001", "1"),
}
_EDGE_COL = {Edge.H: 0, Edge.WC: 1, Edge.S: 2}

ALL_FORMS = tuple(TautomerForm(b, m) for (b, m) in _TABLE)


def complement(base: Nucleobase) -> Nucleobase:
    return _COMPLEMENT[base]


def complement_strand(seq: str) -> str:
    return "".join(complement(Nucleobase.parse(ch)).value for ch in seq)


def encode(form: TautomerForm | Nucleobase, edge: Edge | str, mark: Mark | None = None) -> str:
    """Basis string of a tautomer form on one edge."""
    if isinstance(form, Nucleobase):
        form = TautomerForm(form, mark or Mark.USUAL)
    edge = Edge(edge) if isinstance(edge, str) else edge
    return _TABLE[(form.base, form.mark)][_EDGE_COL[edge]]


def forms_of(base: Nucleobase) -> tuple[TautomerForm, ...]:
    return tuple(TautomerForm(base, m) for m in ALLOWED_MARKS[base])


def forms_with_code(edge: Edge, code: str) -> tuple[TautomerForm, ...]:
    return tuple(f for f in ALL_FORMS if encode(f, edge) == code)


def is_pyrimidine_code(code: str) -> bool:
    return code[0] == "1"


@dataclass(frozen=True)
class HEdgeReading:
    """What an H-edge measurement reveals.

    The second bit is kept as an opaque imino/enol label; which value means
    imino is not fixed by the model.
    """

    family: Family
    imino_enol_bit: int
    forms: tuple[TautomerForm, ...]

    @property
    def imino_enol_label(self) -> str:
        return f"imino-enol:{self.imino_enol_bit}"


def h_edge_readout(code: str) -> HEdgeReading:
    if len(code) != 2 or set(code) - {"0", "1"}:
        raise EncodingError(f"H-edge code must be 2 bits, got {code!r}")
    family = Family.PYRIMIDINE if is_pyrimidine_code(code) else Family.PURINE
    return HEdgeReading(family, int(code[1]), forms_with_code(Edge.H, code))


def pairable(code1: str, code2: str) -> bool:
    """True iff the two H-edge codes are bitwise complements."""
    if len(code1) != 2 or len(code2) != 2:
        raise EncodingError("H-edge codes are 2 bits")
    return all(a != b for a, b in zip(code1, code2))


def read_as(form: TautomerForm) -> Nucleobase:
    """The base whose usual H-edge code matches this form's H-edge code."""
    code = encode(form, Edge.H)
    for base in BASES:
        if encode(base, Edge.H) == code:
            return base
    raise EncodingError(f"no usual base reads as {code}")  # pragma: no cover


def mispairs() -> list[tuple[TautomerForm, TautomerForm]]:
    """(usual, unusual) form pairs whose H-edge codes are complementary."""
    out = []
    for f1 in ALL_FORMS:
        if not f1.usual:
            continue
        for f2 in ALL_FORMS:
            if not f2.usual and pairable(encode(f1, Edge.H), encode(f2, Edge.H)):
                out.append((f1, f2))
    return out


def lambda3_of_wc(form: TautomerForm) -> int:
    bits = encode(form, Edge.WC)
    return bits.count("0") - bits.count("1")


@dataclass(frozen=True)
class TautomerAmplitudes:
    """Amplitude of each allowed tautomer form in a recognized base state."""

    base: Nucleobase
    amplitudes: dict

    def __post_init__(self):
        if set(self.amplitudes) != set(ALLOWED_MARKS[self.base]):
            raise EncodingError(f"amplitudes must be keyed by the allowed marks of {self.base}")
        total = sum(abs(a) ** 2 for a in self.amplitudes.values())
        if abs(total - 1) > 1e-10:
            raise EncodingError(f"tautomer amplitudes not normalized ({total})")

    def probabilities(self) -> dict:
        return {m: float(abs(a) ** 2) for m, a in self.amplitudes.items()}


def catalogue() -> list[dict]:
    """Table of all tautomer forms, machine readable."""
    rows = []
    for f in ALL_FORMS:
        rows.append(
            {
                "base": f.base.value,
                "mark": f.mark.name.lower(),
                "form": f.name,
                "family": f.base.family.value,
                "H": encode(f, Edge.H),
                "WC": encode(f, Edge.WC),
                "S": encode(f, Edge.S),
                "lambda_wc": lambda3_of_wc(f),
            }
        )
    return rows


def wc_vector(form: TautomerForm | Nucleobase) -> np.ndarray:
    bits = encode(form, Edge.WC)
    v = np.zeros(8, dtype=np.complex128)
    v[int(bits, 2)] = 1
    return v

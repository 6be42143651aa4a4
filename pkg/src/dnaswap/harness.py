"""Experiment orchestration behind the CLI: states, pair, replicate, dfs-audit.

Every command returns a report dict with top-level keys
``version, tool, command, config, results, invariant_checks``; see
``report_schema.json``. Reports contain no timestamps so identical configs
give byte-identical JSON.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import asdict, dataclass, field
from importlib import resources
from typing import Callable

import numpy as np

from . import __version__
from .basecode import BASES, Edge, Nucleobase, TautomerForm, catalogue, complement, encode, read_as
from .core import BETA01, BETA11, StateVector, entanglement_entropy
from .dfs import (
    PAIR_SITE,
    EnzymeSite,
    protocol_audit,
    recognition_audit,
    sector_support,
    weak_dephase,
)
from .replication import (
    ATOM_PAIRS,
    DEFAULT_PHI,
    DEFAULT_THETA,
    PairState,
    Verdict,
    classify_pair,
    expected_final,
    pair_for,
    recognize,
    release_improper,
    swap_protocol,
    tautomer_pair_probabilities,
)

SCHEMA_VERSION = "1.0"
FIXED_ORDER = (Nucleobase.A, Nucleobase.T, Nucleobase.G, Nucleobase.C)


class InvariantViolation(RuntimeError):
    pass


@dataclass
class RunConfig:
    sequence: str = ""
    seed: int = 0
    shots: int = 1
    theta: float = DEFAULT_THETA
    phi: float = DEFAULT_PHI
    enzyme: tuple[int, int] | None = None
    order: str = "fixed"
    relaxation: str = "none"
    relaxation_params: dict = field(default_factory=dict)
    fault_step: int | None = None

    def __post_init__(self):
        if self.shots < 1:
            raise ValueError("shots must be >= 1")
        if self.order not in ("fixed", "shuffled"):
            raise ValueError(f"order must be fixed or shuffled, got {self.order!r}")
        if self.relaxation != "none" and self.relaxation not in RELAXATION_MODELS:
            raise ValueError(f"unknown relaxation model {self.relaxation!r}")
        self.sequence = self.sequence.strip().upper()
        bad = set(self.sequence) - set("ATGC")
        if bad:
            raise ValueError(f"sequence contains non-ATGC letters: {''.join(sorted(bad))}")

    def as_dict(self) -> dict:
        d = asdict(self)
        d["enzyme"] = list(self.enzyme) if self.enzyme else None
        return d


def child_seeds(seed: int, count: int) -> list[int]:
    return [int(s) for s in np.random.SeedSequence(seed).generate_state(count)]


def make_report(command: str, config: dict, results, checks: list[dict]) -> dict:
    return {
        "version": SCHEMA_VERSION,
        "tool": {"name": "dnaswap", "version": __version__},
        "command": command,
        "config": config,
        "results": results,
        "invariant_checks": checks,
    }


def check(name: str, passed: bool, detail: str = "") -> dict:
    return {"name": name, "passed": bool(passed), "detail": detail}


def report_ok(report: dict) -> bool:
    return all(c["passed"] for c in report["invariant_checks"])


def dump_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def load_schema() -> dict:
    return json.loads(resources.files("dnaswap").joinpath("report_schema.json").read_text())


def validate_report(report: dict):
    import jsonschema

    jsonschema.validate(report, load_schema())


# --------------------------------------------------------------------------- formatting

_SYMBOLS = [
    (1.0, "1"),
    (1 / math.sqrt(2), "1/sqrt2"),
    (1 / math.sqrt(6), "1/sqrt6"),
    (2 / math.sqrt(6), "2/sqrt6"),
    (0.5, "1/2"),
    (1 / math.sqrt(3), "1/sqrt3"),
]


def symbolic(x: complex, tol: float = 1e-9) -> str:
    """Label exact-looking real amplitudes such as -2/sqrt6; else 6 decimals."""
    if abs(x.imag) < tol:
        for value, label in _SYMBOLS:
            if abs(abs(x.real) - value) < tol:
                return ("-" if x.real < 0 else "+") + label
    if abs(x.imag) < tol:
        return f"{x.real:+.6f}"
    return f"{x.real:+.6f}{x.imag:+.6f}j"


def amp_pair(x: complex) -> list[float]:
    return [float(x.real), float(x.imag)]


def amplitude_map(state: StateVector) -> dict[str, list[float]]:
    return {bits: amp_pair(a) for bits, a in state.terms().items()}


def table(rows: list[list[str]], header: list[str]) -> str:
    cols = [header] + rows
    widths = [max(len(str(r[i])) for r in cols) for i in range(len(header))]
    line = lambda r: "  ".join(str(v).ljust(w) for v, w in zip(r, widths)).rstrip()  # noqa: E731
    out = [line(header), line(["-" * w for w in widths])]
    out += [line(r) for r in rows]
    return "\n".join(out)


# --------------------------------------------------------------------------- states


RECOGNIZED_TARGETS = {
    Nucleobase.A: {"011": 1 / math.sqrt(2), "101": -1 / math.sqrt(2)},
    Nucleobase.T: {"010": 1 / math.sqrt(2), "100": -1 / math.sqrt(2)},
    Nucleobase.G: {"011": 1 / math.sqrt(6), "101": 1 / math.sqrt(6), "110": -2 / math.sqrt(6)},
    Nucleobase.C: {"100": -1 / math.sqrt(6), "010": -1 / math.sqrt(6), "001": 2 / math.sqrt(6)},
}


def run_states(base: str, theta: float = DEFAULT_THETA, phi: float = DEFAULT_PHI) -> tuple[dict, str]:
    b = Nucleobase.parse(base)
    rs = recognize(b, theta, phi)
    initial = StateVector.from_bits(encode(b, Edge.WC))
    st = rs.state
    sectors = sorted(sector_support(st))
    entropies = {str(q): entanglement_entropy(st, [q]) for q in range(3)}
    taut = rs.tautomer_amplitudes()
    results = {
        "base": b.value,
        "angles": {"theta": theta, "phi": phi},
        "initial": amplitude_map(initial),
        "recognized": amplitude_map(st),
        "symbolic": {bits: symbolic(a) for bits, a in st.terms().items()},
        "sector": sectors,
        "entropy_single_qubit_cuts": entropies,
        "tautomer_amplitudes": {
            TautomerForm(b, m).name: amp_pair(a) for m, a in taut.amplitudes.items()
        },
        "catalogue": catalogue(),
    }
    checks = [
        check("norm", abs(np.linalg.norm(st.amplitudes) - 1) < 1e-12),
        check("single_sector", len(sectors) == 1, f"support {sectors}"),
    ]
    if theta == DEFAULT_THETA and phi == DEFAULT_PHI:
        target = StateVector.from_terms(RECOGNIZED_TARGETS[b])
        err = float(np.abs(st.amplitudes - target.amplitudes).max())
        checks.append(check("matches_reference_states", err < 1e-12, f"max |diff| = {err:.3e}"))
    rows = []
    for bits in sorted(set(results["initial"]) | set(results["recognized"])):
        a_in = initial.amplitudes[int(bits, 2)]
        a_q = st.amplitudes[int(bits, 2)]
        rows.append([bits, f"{a_in.real:+.6f}", f"{a_q.real:+.6f}", symbolic(a_q) if abs(a_q) > 1e-12 else "0"])
    text = [
        f"base {b.value}  theta={theta:.6f}  phi={phi:.6f}",
        table(rows, ["basis", "|N>_WC,I", "|N>_WC,Q", "exact"]),
        f"lambda sector: {sectors}",
        "entropy (single-qubit cuts): " + ", ".join(f"q{q}={v:.6f}" for q, v in entropies.items()),
    ]
    return make_report("states", {"base": b.value, "theta": theta, "phi": phi}, results, checks), "\n".join(text)


# --------------------------------------------------------------------------- pair


def _improper_signature_ok(outcome) -> bool:
    from .core import BETA00, BETA10

    return outcome.bonds[0] == BETA11 and outcome.bonds[1] == BETA11 and outcome.bonds[2] in (BETA00, BETA10)


def run_pair(template: str, candidate: str, cfg: RunConfig) -> tuple[dict, str]:
    t, c = Nucleobase.parse(template), Nucleobase.parse(candidate)
    pair = pair_for(t, c, cfg.theta, cfg.phi)
    hist: Counter = Counter()
    verdicts: Counter = Counter()
    transcripts = []
    e4_ok = True
    sig_ok = True
    target = expected_final(t, c) if pair.proper else None
    for i, s in enumerate(child_seeds(cfg.seed, cfg.shots)):
        final, outcome = swap_protocol(pair, s)
        hist[outcome.signature] += 1
        verdicts[outcome.verdict.value] += 1
        if pair.proper:
            e4_ok &= final.state.fidelity(target) >= 1 - 1e-9 and final.state.allclose(target, 1e-10)
            sig_ok &= outcome.verdict is Verdict.PROPER
        else:
            sig_ok &= outcome.verdict is Verdict.IMPROPER and _improper_signature_ok(outcome)
        if i < 16:
            transcripts.append({"shot": i, "seed": s, **outcome.transcript.as_dict()})
    results = {
        "template": t.value,
        "candidate": c.value,
        "proper": pair.proper,
        "shots": cfg.shots,
        "signature_histogram": dict(sorted(hist.items())),
        "verdicts": dict(sorted(verdicts.items())),
        "transcripts": transcripts,
    }
    checks = [check("signature_matches_model", sig_ok)]
    if pair.proper:
        checks.append(check("final_state_is_bell_product_every_shot", e4_ok))
    rows = [[sig, str(n), f"{n / cfg.shots:.4f}"] for sig, n in sorted(hist.items())]
    text = "\n".join(
        [
            f"pair {t.value}.{c.value}  shots={cfg.shots}  seed={cfg.seed}",
            table(rows, ["bonds (pair1,pair2,pair3)", "count", "freq"]),
            "verdicts: " + ", ".join(f"{k}={v}" for k, v in sorted(verdicts.items())),
        ]
    )
    config = {"template": t.value, "candidate": c.value, **cfg.as_dict()}
    return make_report("pair", config, results, checks), text


# --------------------------------------------------------------------------- relaxation models

RelaxationModel = Callable[[PairState, np.random.Generator, dict], tuple[TautomerForm, TautomerForm]]


def uniform_collapse(pair: PairState, rng: np.random.Generator, params: dict) -> tuple[TautomerForm, TautomerForm]:
    """Projective measurement of the final pair onto tautomer-pair product states."""
    probs = tautomer_pair_probabilities(pair)
    keys = list(probs)
    k = rng.choice(len(keys), p=np.array([probs[x] for x in keys]))
    return keys[k]


RELAXATION_MODELS: dict[str, RelaxationModel] = {"uniform-collapse": uniform_collapse}


def register_relaxation(name: str, model: RelaxationModel):
    RELAXATION_MODELS[name] = model


# --------------------------------------------------------------------------- replicate


def _candidate_order(cfg: RunConfig, rng: np.random.Generator) -> list[Nucleobase]:
    if cfg.order == "fixed":
        return list(FIXED_ORDER)
    return [FIXED_ORDER[i] for i in rng.permutation(4)]


def replicate_once(cfg: RunConfig, seed: int) -> dict:
    """One pass over the template strand."""
    seq = [Nucleobase.parse(ch) for ch in cfg.sequence]
    positions = []
    relax = RELAXATION_MODELS.get(cfg.relaxation)
    release_ok = True
    for pos, (template, pos_seed) in enumerate(zip(seq, child_seeds(seed, len(seq)))):
        rng = np.random.default_rng(pos_seed)
        order = _candidate_order(cfg, rng)
        tried, rejected, seeds = [], [], []
        accepted = None
        final_pair = None
        for cand in order:
            attempt_seed = int(rng.integers(2**32))
            seeds.append(attempt_seed)
            tried.append(cand.value)
            final, outcome = swap_protocol(pair_for(template, cand, cfg.theta, cfg.phi), attempt_seed)
            if outcome.verdict is Verdict.PROPER:
                accepted, final_pair = cand, final
                break
            freed, outcome = release_improper(outcome, final)
            third = classify_pair(freed.state, ATOM_PAIRS[2])
            release_ok &= third in (BETA01, BETA11)
            rejected.append({"candidate": cand.value, "bonds": outcome.signature.split(","), "released": outcome.released})
        if accepted is None:
            raise InvariantViolation(f"no candidate accepted at position {pos}")
        record = {
            "position": pos,
            "template": template.value,
            "candidates_tried": tried,
            "rejected": rejected,
            "accepted": accepted.value,
            "read_as": accepted.value,
            "mutation": False,
            "seeds": seeds,
        }
        if relax is not None:
            ft, fc = relax(final_pair, rng, cfg.relaxation_params)
            reading = read_as(fc)
            record["collapse"] = {"template_form": ft.name, "candidate_form": fc.name}
            record["read_as"] = reading.value
            record["mutation"] = reading is not accepted
        positions.append(record)
    strand = "".join(p["read_as"] for p in positions)
    return {"positions": positions, "strand": strand, "release_ok": release_ok}


def replicate(cfg: RunConfig) -> tuple[dict, str]:
    if not cfg.sequence:
        raise ValueError("replicate needs a nonempty sequence")
    expected = "".join(complement(Nucleobase.parse(ch)).value for ch in cfg.sequence)
    runs = [replicate_once(cfg, s) for s in child_seeds(cfg.seed, cfg.shots)]
    n = len(cfg.sequence)
    total = n * len(runs)
    correct = sum(a == b for r in runs for a, b in zip(r["strand"], expected))
    mutations = sum(p["mutation"] for r in runs for p in r["positions"])
    rejections = [len(p["rejected"]) for r in runs for p in r["positions"]]
    accepted_ok = all(p["accepted"] == complement(Nucleobase(p["template"])).value for r in runs for p in r["positions"])
    aggregate = {
        "positions": total,
        "acceptance_fidelity": correct / total,
        "rejected_attempts": int(sum(rejections)),
        "mean_rejections_per_position": float(np.mean(rejections)),
        "mutations": int(mutations),
    }
    if cfg.relaxation != "none":
        forms = Counter(p["collapse"]["template_form"] + "." + p["collapse"]["candidate_form"] for r in runs for p in r["positions"])
        aggregate["collapse_frequencies"] = {k: v / total for k, v in sorted(forms.items())}
    results = {"expected_strand": expected, "aggregate": aggregate, "runs": runs}
    checks = [
        check("accepted_is_complement", accepted_ok),
        check("improper_release_restores_proton_count", all(r["release_ok"] for r in runs)),
    ]
    if cfg.relaxation == "none":
        checks.append(check("no_mutations_without_relaxation", mutations == 0 and correct == total))
    text_rows = [
        ["positions", str(total)],
        ["acceptance fidelity", f"{aggregate['acceptance_fidelity']:.6f}"],
        ["rejected attempts", str(aggregate["rejected_attempts"])],
        ["mean rejections/position", f"{aggregate['mean_rejections_per_position']:.4f}"],
        ["mutations", str(mutations)],
    ]
    for k, v in aggregate.get("collapse_frequencies", {}).items():
        text_rows.append([f"collapse {k}", f"{v:.4f}"])
    preview = runs[0]["strand"]
    text = "\n".join(
        [
            f"replicate  n={n}  shots={cfg.shots}  order={cfg.order}  relaxation={cfg.relaxation}  seed={cfg.seed}",
            f"template : {cfg.sequence[:60]}{'...' if n > 60 else ''}",
            f"product  : {preview[:60]}{'...' if n > 60 else ''}",
            table(text_rows, ["metric", "value"]),
        ]
    )
    return make_report("replicate", cfg.as_dict(), results, checks), text


# --------------------------------------------------------------------------- dfs audit

DEPHASE_SWEEP = [i * math.pi / 4 for i in range(9)]


def dfs_audit(cfg: RunConfig) -> tuple[dict, str]:
    u_site = EnzymeSite(*cfg.enzyme) if cfg.enzyme else EnzymeSite()
    s_site = EnzymeSite(*cfg.enzyme) if cfg.enzyme else PAIR_SITE
    u_reports = []
    for b in BASES:
        rep, _ = recognition_audit(b, u_site, cfg.theta, cfg.phi, fault_step=cfg.fault_step)
        u_reports.append(rep.as_dict())
    s_reports = []
    for t in BASES:
        for c in BASES:
            rep, _ = protocol_audit(t, c, s_site, cfg.seed, cfg.theta, cfg.phi, fault_step=cfg.fault_step)
            s_reports.append(rep.as_dict())
    sweep = {}
    for b in BASES:
        st = recognize(b, cfg.theta, cfg.phi).state
        sweep[b.value] = [abs(st.inner(weak_dephase(st, p))) for p in DEPHASE_SWEEP]
    sweep_ok = all(abs(f - 1) < 1e-12 for fs in sweep.values() for f in fs)
    u_ok = all(r["passed"] for r in u_reports)
    s_ok = all(r["passed"] for r in s_reports)
    results = {
        "enzyme": {"U": {"q": u_site.q, "k": u_site.k}, "S": {"q": s_site.q, "k": s_site.k}},
        "recognition": u_reports,
        "protocol": s_reports,
        "weak_dephase_sweep": {"phi": DEPHASE_SWEEP, "overlap": sweep},
        "verdict": "PASS" if (u_ok and s_ok and sweep_ok) else "FAIL",
    }
    checks = [
        check("recognition_lambda_constant", u_ok),
        check("protocol_lambda_constant", s_ok),
        check("weak_dephase_invariance", sweep_ok),
    ]
    rows = []
    for r in u_reports + s_reports:
        fail = r["first_violation"]
        rows.append([r["label"], str(r["initial_support"]), str(len(r["steps"])), "PASS" if r["passed"] else f"FAIL@{fail}"])
    text = "\n".join(
        [
            table(rows, ["audit", "lambda", "steps", "result"]),
            "weak dephasing overlap |<N|D(phi)|N>|, phi = 0..2pi step pi/4: "
            + ", ".join(f"{b}={min(v):.12f}" for b, v in sweep.items()),
            f"DFS audit: {results['verdict']}",
        ]
    )
    return make_report("dfs-audit", cfg.as_dict(), results, checks), text

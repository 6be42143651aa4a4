"""Command line: ``dnaswap {states,pair,replicate,dfs-audit}``.

Exit codes: 0 success, 1 invariant violation, 2 bad input.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import harness
from .replication import DEFAULT_PHI, DEFAULT_THETA

log = logging.getLogger("dnaswap")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def _enzyme(text: str) -> tuple[int, int]:
    try:
        q, k = (int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("--enzyme expects q,k (two integers)") from None
    return q, k


def _common(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--shots", type=int, default=1)
    p.add_argument("--theta", type=float, default=DEFAULT_THETA, help="recognition angle for the sharp form")
    p.add_argument("--phi", type=float, default=DEFAULT_PHI, help="recognition angle splitting usual/star forms")
    p.add_argument("--json", type=Path, default=None, metavar="PATH", help="write the JSON report here")
    p.add_argument("--enzyme", type=_enzyme, default=None, metavar="Q,K", help="active-site acceptors,total atoms")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dnaswap", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("states", help="recognized WC-edge states of one base")
    p.add_argument("base")
    _common(p)

    p = sub.add_parser("pair", help="run the swapping protocol on one template/candidate pair")
    p.add_argument("template")
    p.add_argument("candidate")
    _common(p)

    p = sub.add_parser("replicate", help="replicate a template strand")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--sequence")
    src.add_argument("--sequence-file", type=Path)
    p.add_argument("--order", choices=["fixed", "shuffled"], default="fixed")
    p.add_argument("--relaxation", choices=["none", *sorted(harness.RELAXATION_MODELS)], default="none")
    _common(p)

    p = sub.add_parser("dfs-audit", help="lambda-sector audit of U and S with the enzyme site")
    p.add_argument("--inject-fault", type=int, default=None, metavar="STEP", help="bare X on base qubit 0 after STEP")
    _common(p)
    return parser


def _config(args) -> harness.RunConfig:
    seq = ""
    if getattr(args, "sequence", None):
        seq = args.sequence
    elif getattr(args, "sequence_file", None):
        seq = "".join(line.strip() for line in args.sequence_file.read_text().splitlines() if not line.startswith(">"))
    return harness.RunConfig(
        sequence=seq,
        seed=args.seed,
        shots=args.shots,
        theta=args.theta,
        phi=args.phi,
        enzyme=args.enzyme,
        order=getattr(args, "order", "fixed"),
        relaxation=getattr(args, "relaxation", "none"),
        fault_step=getattr(args, "inject_fault", None),
    )


def run(args) -> tuple[dict, str]:
    if args.command == "states":
        return harness.run_states(args.base, args.theta, args.phi)
    cfg = _config(args)
    if args.command == "pair":
        return harness.run_pair(args.template, args.candidate, cfg)
    if args.command == "replicate":
        return harness.replicate(cfg)
    return harness.dfs_audit(cfg)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        report, text = run(args)
    except (ValueError, OSError) as exc:
        print(f"dnaswap: error: {exc}", file=sys.stderr)
        return 2
    except harness.InvariantViolation as exc:
        print(f"dnaswap: invariant violation: {exc}", file=sys.stderr)
        return 1
    harness.validate_report(report)
    print(text)
    if args.json:
        try:
            args.json.write_text(harness.dump_json(report))
        except OSError as exc:
            print(f"dnaswap: error: cannot write report: {exc}", file=sys.stderr)
            return 2
    failed = [c["name"] for c in report["invariant_checks"] if not c["passed"]]
    if failed:
        print("invariant checks failed: " + ", ".join(failed), file=sys.stderr)
        return 1
    return 0

"""Print the recognized base states, the assembled pairs and the final bond states.

    python scripts/reproduce_states.py
"""

import itertools

import numpy as np

from dnaswap.basecode import BASES, complement
from dnaswap.harness import symbolic
from dnaswap.replication import pair_for, recognize, swap_protocol


def show(title, state):
    print(title)
    for i, a in enumerate(state.amplitudes):
        if abs(a) > 1e-12:
            print(f"  |{i:0{state.num_qubits}b}>  {symbolic(a):>10}  {a.real:+.6f}")


def main():
    for b in BASES:
        show(f"recognized {b.value}", recognize(b).state)
    for t in ("A", "G"):
        base = next(b for b in BASES if b.value == t)
        pair = pair_for(base, complement(base))
        show(f"assembled {pair.name}  (norm {np.linalg.norm(pair.state.amplitudes):.12f})", pair.state)
    print("\nbond signatures after the swapping protocol (seed 0)")
    for t, c in itertools.product(BASES, BASES):
        _, outcome = swap_protocol(pair_for(t, c), 0)
        print(f"  {t.value}.{c.value}  {outcome.verdict.value:9}  {outcome.signature}")


if __name__ == "__main__":
    main()

"""Verify the witness policies on every fixture and time the product search
on random transducers."""

import argparse
import random
import sys
import time
import warnings
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

from oracles import random_transducer  # noqa: E402

from deon.agents import bad_policy, good_policy  # noqa: E402
from deon.analyzer import Counterexample, check_viability, verify_policy  # noqa: E402
from deon.errors import DeonError  # noqa: E402
from deon.fixtures import SPECS, load_fixture  # noqa: E402


def describe(verdict):
    if isinstance(verdict, Counterexample):
        return f"counterexample at cycle {verdict.cycle}: {' '.join(verdict.extended.tokens)}"
    return "Verified"

warnings.filterwarnings("ignore", message="good-regex of")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--transducers", type=int, default=200)
    ap.add_argument("--max-states", type=int, default=5)
    args = ap.parse_args()
    for name in sorted(SPECS):
        d = load_fixture(name)
        print(f"== {name} ({d.num_states} states)")
        if check_viability(d)[1].holds:
            print("  good_policy:", describe(verify_policy(d, good_policy(d).as_transducer())))
        try:
            print("  bad_policy: ", describe(verify_policy(d, bad_policy(d).as_transducer())))
        except DeonError as e:
            print("  bad_policy:  n/a,", type(e).__name__)
        rng = random.Random(name)
        t0 = time.perf_counter()
        refuted = 0
        for _ in range(args.transducers):
            t = random_transducer(rng, list(d.alphabet.actions), list(d.alphabet.percepts), max_states=args.max_states)
            refuted += isinstance(verify_policy(d, t), Counterexample)
        ms = 1000 * (time.perf_counter() - t0) / args.transducers
        print(f"  random transducers: {refuted}/{args.transducers} refuted, {ms:.2f} ms each")


if __name__ == "__main__":
    main()

"""Weak vs strong viability on the guessing fixture and on random deontologies.

The first block shows the guessing game: a Good continuation always exists,
but no single action survives every percept, so an adversary wins at once.
The second block samples random small deontologies and tallies how often the
two quantifier orders disagree, split by consequence independence."""

import argparse
import random
import sys
import warnings
from collections import Counter
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

from oracles import random_alphabet, random_regex_text, spec_text  # noqa: E402

from deon.agents import adversarial_env, scripted_policy  # noqa: E402
from deon.analyzer import analyze  # noqa: E402
from deon.fixtures import load_fixture  # noqa: E402
from deon.harness import simulate  # noqa: E402
from deon.speclang import compile_text  # noqa: E402


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--samples", type=int, default=500)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    guess = load_fixture("SPEC_GUESS")
    print(analyze(guess).render_text())
    for a in guess.alphabet.actions:
        r = simulate(guess, scripted_policy([a], guess.alphabet), adversarial_env(guess), 5)
        print(f"always {a!r} vs adversary: first violation at cycle {r.first_violation_cycle}")

    rng = random.Random(args.seed)
    tally = Counter()
    while sum(tally.values()) < args.samples:
        actions, percepts = random_alphabet(rng)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            d = compile_text(spec_text(actions, percepts, random_regex_text(rng, actions, percepts)))
        if d.num_states > 20:
            continue
        rep = analyze(d)
        tally[(rep.consequence_independent, rep.weak_viable, rep.strong_viable)] += 1
    print(f"\n{args.samples} random deontologies")
    print(f"{'CI':<6} {'weak':<6} {'strong':<7} count")
    for (ci, w, s), n in sorted(tally.items()):
        print(f"{str(ci):<6} {str(w):<6} {str(s):<7} {n}")
    gap_ci = sum(n for (ci, w, s), n in tally.items() if ci and w != s)
    print(f"gap instances among consequence-independent: {gap_ci}")


if __name__ == "__main__":
    main()

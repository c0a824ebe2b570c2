"""Governed vs ungoverned random runs on every strongly viable fixture.

Prints, per fixture, how many of N seeded runs reached a non-Good prefix
with and without the governor, plus the substitution rate."""

import argparse
import time
import warnings

from deon.agents import random_env, random_policy
from deon.analyzer import check_viability
from deon.fixtures import SPECS, load_fixture
from deon.governor import GovernorConfig, Substituted
from deon.harness import simulate

warnings.filterwarnings("ignore", message="good-regex of")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--runs", type=int, default=100)
    ap.add_argument("--cycles", type=int, default=1000)
    ap.add_argument("--foresight", action="store_true")
    args = ap.parse_args()
    cfg = GovernorConfig(foresight=args.foresight)
    print(f"{'fixture':<12} {'ungoverned viol':>16} {'governed viol':>14} {'subst rate':>11} {'secs':>6}")
    for name in sorted(SPECS):
        d = load_fixture(name)
        if not check_viability(d)[1].holds:
            print(f"{name:<12} skipped: not strongly viable")
            continue
        t0 = time.perf_counter()
        free = gov = subst = proposals = 0
        for seed in range(args.runs):
            mk = lambda: (random_policy(d.alphabet, seed), random_env(d.alphabet, 10_000 + seed))
            free += simulate(d, *mk(), args.cycles).first_violation_cycle is not None
            r = simulate(d, *mk(), args.cycles, governed=True, cfg=cfg)
            gov += r.first_violation_cycle is not None
            subst += sum(isinstance(v, Substituted) for v in r.verdicts)
            proposals += len(r.verdicts)
        secs = time.perf_counter() - t0
        print(f"{name:<12} {free:>16} {gov:>14} {subst / proposals:>11.3f} {secs:>6.1f}")


if __name__ == "__main__":
    main()

"""Sweep the homunculus demo: an inner agent that is always compliant by
construction, mapped onto the outer alphabet with a violation at cycle k."""

import argparse

from deon.agents import random_env
from deon.fixtures import load_fixture
from deon.harness import homunculus_demo, violate_at_mapping


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--cycles", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    ng = load_fixture("SPEC_NG")
    print(f"{'violate_at':>10} {'inner_compliance':>17} {'outer_violation':>16}")
    for k in range(1, args.cycles + 1):
        rep = homunculus_demo(ng, violate_at_mapping("noop", "grab", k), args.cycles,
                              env=random_env(ng.alphabet, args.seed + k))
        print(f"{k:>10} {rep.inner_compliance:>17.2f} {str(rep.outer_compliance_cycle):>16}")


if __name__ == "__main__":
    main()

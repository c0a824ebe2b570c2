"""Command-line entry point: ``deon <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import os
import sys

from .agents import (
    adversarial_env,
    bad_policy,
    good_policy,
    null_policy,
    random_env,
    random_policy,
    scripted_env,
    scripted_policy,
    transducer_policy,
)
from .analyzer import Classification, Counterexample, analyze, classify_history, parse_transducer, verify_policy
from .core import parse_history_text
from .daemon import govern_daemon
from .errors import DeonError
from .fixtures import SPECS
from .governor import PERMISSIVE, STRICT, GovernorConfig
from .harness import homunculus_demo, simulate, violate_at_mapping
from .speclang import Deontology, compile_text, dump_automaton, load_automaton

EXIT_OK, EXIT_COUNTEREXAMPLE, EXIT_FORMAT, EXIT_AMENDABLE, EXIT_DEAD = 0, 1, 2, 3, 4


def load_spec(path: str) -> Deontology:
    """Load a ``.deon`` file, a dumped automaton, or a built-in fixture name."""
    if not os.path.exists(path) and path in SPECS:
        return compile_text(SPECS[path], name=path)
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    name = os.path.splitext(os.path.basename(path))[0]
    if text.lstrip().startswith("deon-dfa"):
        return load_automaton(text, name=name)
    return compile_text(text, name=name)


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def make_policy(spec: str, d: Deontology, seed: int):
    kind, _, arg = spec.partition(":")
    a = d.alphabet
    if kind == "random":
        return random_policy(a, seed)
    if kind == "null":
        return null_policy(arg or a.actions[0], a)
    if kind == "good":
        return good_policy(d)
    if kind == "bad":
        return bad_policy(d)
    if kind == "script":
        return scripted_policy(arg.split(","), a)
    if kind == "fst":
        return transducer_policy(parse_transducer(_read(arg)), a)
    raise DeonError(f"unknown policy {spec!r} (random, null[:ACTION], good, bad, script:A,B,..., fst:PATH)")


def make_env(spec: str, d: Deontology, seed: int):
    kind, _, arg = spec.partition(":")
    if kind == "random":
        return random_env(d.alphabet, seed)
    if kind == "adversarial":
        return adversarial_env(d)
    if kind == "script":
        return scripted_env(arg.split(","), d.alphabet)
    raise DeonError(f"unknown environment {spec!r} (random, adversarial, script:P,Q,...)")


def cmd_check(args) -> int:
    report = analyze(load_spec(args.spec))
    print(json.dumps(report.to_dict(), indent=2) if args.json else report.render_text())
    return EXIT_OK


def cmd_member(args) -> int:
    d = load_spec(args.spec)
    verdict = classify_history(d, parse_history_text(args.history, d.alphabet))
    print(verdict.value)
    return {Classification.GOOD: EXIT_OK, Classification.AMENDABLE: EXIT_AMENDABLE,
            Classification.DEAD: EXIT_DEAD}[verdict]


def cmd_verify(args) -> int:
    d = load_spec(args.spec)
    verdict = verify_policy(d, parse_transducer(_read(args.fst)))
    if isinstance(verdict, Counterexample):
        print(verdict)
        print(f"history: {' '.join(verdict.history.tokens)}")
        print(f"action: {verdict.action}")
        print(f"percept: {verdict.percept}")
        print(f"replay: {' '.join(verdict.extended.tokens)}")
        return EXIT_COUNTEREXAMPLE
    print("Verified")
    return EXIT_OK


def _config(args) -> GovernorConfig:
    order = tuple(args.fallback.split(",")) if getattr(args, "fallback", None) else None
    return GovernorConfig(PERMISSIVE if args.permissive else STRICT, args.foresight, order)


def cmd_simulate(args) -> int:
    d = load_spec(args.spec)
    env_seed = args.env_seed if args.env_seed is not None else args.seed + 1
    record = simulate(d, make_policy(args.policy, d, args.seed), make_env(args.env, d, env_seed),
                      args.cycles, governed=args.govern, cfg=_config(args))
    print(json.dumps(record.to_dict(), indent=2) if args.json else record.render_text())
    return EXIT_OK


def cmd_govern(args) -> int:
    d = load_spec(args.spec)
    transport = "stdio" if args.stdio or not args.listen else args.listen
    govern_daemon(d, transport, _config(args))
    return EXIT_OK


def cmd_demo_homunculus(args) -> int:
    outer = load_spec(args.outer) if args.outer else compile_text(SPECS["SPEC_NG"], name="SPEC_NG")
    benign = args.benign or outer.alphabet.actions[0]
    violating = args.violating or outer.alphabet.actions[-1]
    report = homunculus_demo(outer, violate_at_mapping(benign, violating, args.violate_at), args.cycles)
    print(json.dumps(report.to_dict(), indent=2) if args.json else report.render_text())
    return EXIT_OK


def cmd_compile(args) -> int:
    sys.stdout.write(dump_automaton(load_spec(args.spec)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="deon", description="Deontology specification, analysis and governance.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("check", help="analyze a spec")
    s.add_argument("spec")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("member", help="classify a history (exit 0 GOOD, 3 AMENDABLE, 4 DEAD)")
    s.add_argument("spec")
    s.add_argument("history")
    s.set_defaults(func=cmd_member)

    s = sub.add_parser("verify", help="verify a finite-state policy (exit 0 Verified, 1 counterexample)")
    s.add_argument("spec")
    s.add_argument("fst")
    s.set_defaults(func=cmd_verify)

    def governor_flags(s):
        s.add_argument("--foresight", action="store_true")
        s.add_argument("--permissive", action="store_true")
        s.add_argument("--fallback", help="comma-separated fallback action order")

    s = sub.add_parser("simulate", help="run a policy against an environment")
    s.add_argument("spec")
    s.add_argument("--policy", default="random")
    s.add_argument("--env", default="random")
    s.add_argument("--cycles", type=int, default=100)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--env-seed", type=int)
    s.add_argument("--govern", action="store_true")
    s.add_argument("--json", action="store_true")
    governor_flags(s)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("govern", help="serve the governor line protocol")
    s.add_argument("spec")
    g = s.add_mutually_exclusive_group()
    g.add_argument("--stdio", action="store_true")
    g.add_argument("--listen", metavar="HOST:PORT")
    governor_flags(s)
    s.set_defaults(func=cmd_govern)

    s = sub.add_parser("demo-homunculus", help="compliant inner agent, non-compliant outer agent")
    s.add_argument("--outer")
    s.add_argument("--violate-at", type=int, default=3)
    s.add_argument("--cycles", type=int, default=10)
    s.add_argument("--benign")
    s.add_argument("--violating")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_demo_homunculus)

    s = sub.add_parser("compile", help="print the minimized automaton")
    s.add_argument("spec")
    s.set_defaults(func=cmd_compile)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (DeonError, OSError, ValueError) as exc:
        print(f"deon: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FORMAT


if __name__ == "__main__":
    sys.exit(main())

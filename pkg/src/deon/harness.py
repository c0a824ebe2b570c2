"""Simulation loop, post-hoc compliance checks and the homunculus demo."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Union

from .agents import Environment, Policy, random_env, scripted_env
from .analyzer import Classification, classify_prefixes
from .core import History
from .errors import MappingIncomplete
from .governor import GovernorConfig, Refused, open_session
from .speclang import Deontology, compile_text


@dataclass
class RunRecord:
    spec_name: str
    spec_hash: str
    policy: str
    policy_seed: Optional[int]
    env: str
    env_seed: Optional[int]
    governed: bool
    cycles: int
    history: History
    verdicts: list = field(default_factory=list)
    classifications: list = field(default_factory=list)
    first_violation_cycle: Optional[int] = None

    def to_dict(self) -> dict:
        return {
            "spec_name": self.spec_name,
            "spec_hash": self.spec_hash,
            "policy": self.policy,
            "policy_seed": self.policy_seed,
            "env": self.env,
            "env_seed": self.env_seed,
            "governed": self.governed,
            "cycles": self.cycles,
            "history": " ".join(self.history.tokens),
            "verdicts": [v.wire()[len("verdict "):] if v is not None else None for v in self.verdicts],
            "classifications": [c.value for c in self.classifications],
            "first_violation_cycle": self.first_violation_cycle,
        }

    def render_text(self) -> str:
        counts = {c: 0 for c in Classification}
        for c in self.classifications:
            counts[c] += 1
        lines = [
            f"spec:        {self.spec_name or '-'} ({self.spec_hash})",
            f"policy:      {self.policy} seed={self.policy_seed}",
            f"environment: {self.env} seed={self.env_seed}",
            f"governed:    {'yes' if self.governed else 'no'}",
            f"cycles:      {self.cycles}",
            "prefixes:    " + ", ".join(f"{c.value}={n}" for c, n in counts.items()),
            f"first violation cycle: {self.first_violation_cycle if self.first_violation_cycle else 'none'}",
        ]
        if self.governed:
            subs = sum(1 for v in self.verdicts if v is not None and v.wire().startswith("verdict substituted"))
            lines.append(f"substitutions: {subs}")
        return "\n".join(lines)


def check_run(d: Deontology, h: History) -> list[Classification]:
    """Classification of every completed-cycle prefix of ``h``."""
    return classify_prefixes(d, h)


def simulate(d: Deontology, policy: Policy, env: Environment, cycles: int,
             governed: bool = False, cfg: GovernorConfig | None = None) -> RunRecord:
    if cycles < 0:
        raise ValueError("cycles must be non-negative")
    alphabet = d.alphabet
    session = open_session(d, cfg or GovernorConfig()) if governed else None
    tokens: list = []
    verdicts: list = []
    is_action = alphabet.is_action
    is_percept = alphabet.is_percept
    for _ in range(cycles):
        h = History._trusted(alphabet, tuple(tokens))
        proposal = policy.next_action(h)
        if not is_action(proposal):
            raise ValueError(f"policy {policy.name} proposed {proposal!r}, not an action")
        if session is not None:
            outcome = session.propose(proposal)
            verdicts.append(outcome)
            if isinstance(outcome, Refused):
                break
            action = outcome.emitted
        else:
            action = proposal
        percept = env.next_percept(h, action)
        if not is_percept(percept):
            raise ValueError(f"environment {env.name} produced {percept!r}, not a percept")
        if session is not None:
            session.observe(percept)
        tokens.append(action)
        tokens.append(percept)

    history = History._trusted(alphabet, tuple(tokens))
    # re-derived from the automaton, independent of governor bookkeeping
    classes = check_run(d, history)
    first_bad = next((i + 1 for i, c in enumerate(classes) if c is not Classification.GOOD), None)
    return RunRecord(
        spec_name=d.name,
        spec_hash=d.spec_hash,
        policy=policy.name,
        policy_seed=policy.seed,
        env=env.name,
        env_seed=env.seed,
        governed=governed,
        cycles=history.cycle_count,
        history=history,
        verdicts=verdicts,
        classifications=classes,
        first_violation_cycle=first_bad,
    )


# -- homunculus --------------------------------------------------------------

INNER_GOOD, INNER_BAD = "G", "B"


@dataclass
class HomunculusReport:
    inner_history: History
    outer_history: History
    inner_compliance: float
    outer_compliance_cycle: Optional[int]

    def to_dict(self) -> dict:
        return {
            "inner_history": " ".join(self.inner_history.tokens),
            "outer_history": " ".join(self.outer_history.tokens),
            "inner_compliance": self.inner_compliance,
            "outer_compliance_cycle": self.outer_compliance_cycle,
        }

    def render_text(self) -> str:
        outer = self.outer_compliance_cycle
        return "\n".join([
            f"inner history:  {' '.join(self.inner_history.tokens)}",
            f"outer history:  {' '.join(self.outer_history.tokens)}",
            f"inner compliance: {self.inner_compliance:.3f}",
            "outer deontology violated at cycle: " + (str(outer) if outer else "never"),
        ])


def inner_deontology(percepts) -> Deontology:
    """The homunculus's own deontology: only ever output G."""
    return compile_text(
        f"percepts: {' '.join(percepts)}\nactions: {INNER_GOOD} {INNER_BAD}\ngood: ({INNER_GOOD} _p)*\n",
        name="SPEC_HOM",
    )


MappingLike = Union[Mapping, Callable[[str, int], str]]


def homunculus_demo(outer: Deontology, mapping: MappingLike, cycles: int,
                    env: Environment | None = None) -> HomunculusReport:
    """Run a constant-G inner agent whose intention is translated into an
    outer action by ``mapping(inner_action, cycle)`` (cycles are 1-based).

    The inner agent is compliant by construction; the outer history is
    judged against ``outer`` on its own.
    """
    alphabet = outer.alphabet
    inner = inner_deontology(alphabet.percepts)
    env = env or scripted_env([alphabet.percepts[0]], alphabet)

    def translate(intent, k):
        try:
            out = mapping(intent, k) if callable(mapping) else mapping[(intent, k)]
        except (KeyError, IndexError):
            raise MappingIncomplete(f"mapping has no entry for ({intent!r}, cycle {k})") from None
        if out is None or not alphabet.is_action(out):
            raise MappingIncomplete(f"mapping gave {out!r} for ({intent!r}, cycle {k})")
        return out

    inner_tokens: list = []
    outer_tokens: list = []
    for k in range(1, cycles + 1):
        intent = INNER_GOOD
        action = translate(intent, k)
        percept = env.next_percept(History._trusted(alphabet, tuple(outer_tokens)), action)
        inner_tokens += [intent, percept]
        outer_tokens += [action, percept]

    inner_h = History(inner.alphabet, tuple(inner_tokens))
    outer_h = History(alphabet, tuple(outer_tokens))
    inner_classes = check_run(inner, inner_h)
    good_inner = sum(c is Classification.GOOD for c in inner_classes)
    compliance = good_inner / len(inner_classes) if inner_classes else 1.0
    outer_classes = check_run(outer, outer_h)
    first_bad = next((i + 1 for i, c in enumerate(outer_classes) if c is not Classification.GOOD), None)
    return HomunculusReport(inner_h, outer_h, compliance, first_bad)


def violate_at_mapping(benign: str, violating: str, cycle: Optional[int]) -> Callable[[str, int], str]:
    """Outer implementation that ignores the intention and misbehaves once."""
    def mapping(intent: str, k: int) -> str:
        return violating if cycle is not None and k == cycle else benign
    return mapping

"""Static analysis of compiled deontologies and finite-state policy checks.

Everything here works on the minimized automaton. Boundary states are the
ones reached after whole cycles; the predicates below quantify over the
boundary states that some Good history actually reaches.

General policy verification is undecidable. :func:`verify_policy` only
accepts finite-state transducers, for which the product with the automaton
is finite and a breadth-first search settles the question.
"""

from __future__ import annotations

import enum
import re
from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Union

from .core import Alphabet, History, require_same_alphabet
from .errors import FormatError, PartialPolicy, UnknownSymbol
from .speclang import Deontology, accepts_empty


def _memo(d: Deontology, key: str, build):
    # Deontology is frozen; analyses are cached in its instance dict
    cache = d.__dict__.setdefault("_analysis_cache", {})
    if key not in cache:
        cache[key] = build()
    return cache[key]


class Triviality(str, enum.Enum):
    EMPTY = "EmptyG"
    FULL = "FullG"
    NON_TRIVIAL = "NonTrivial"


class Classification(str, enum.Enum):
    GOOD = "GOOD"
    AMENDABLE = "AMENDABLE"
    DEAD = "DEAD"


# -- reachability ------------------------------------------------------------


def boundary_states(d: Deontology) -> tuple[int, ...]:
    """Boundary states reachable from the start, in breadth-first order."""

    def build():
        order = [d.start]
        seen = {d.start}
        for q in order:
            for a in d.action_ids:
                m = d.delta[q][a]
                for x in d.percept_ids:
                    r = d.delta[m][x]
                    if r not in seen:
                        seen.add(r)
                        order.append(r)
        return tuple(order)

    return _memo(d, "boundary", build)


def good_reachable_states(d: Deontology) -> frozenset:
    """Accepting boundary states reached by some Good history."""
    return _memo(d, "good_reach", lambda: frozenset(q for q in boundary_states(d) if q in d.accepting))


def _good_reachable_ordered(d: Deontology) -> list[int]:
    return [q for q in boundary_states(d) if q in d.accepting]


def check_trivial(d: Deontology) -> Triviality:
    if not good_reachable_states(d):
        return Triviality.EMPTY
    # FullG iff the language equals (action percept)*: walk the product with
    # the two-state interleaving automaton looking for a disagreement
    n_act = len(d.alphabet.actions)
    seen = {(d.start, 0)}
    stack = [(d.start, 0)]
    while stack:
        q, p = stack.pop()
        in_i = p == 0
        if (q in d.accepting) != in_i:
            return Triviality.NON_TRIVIAL
        for sid, r in enumerate(d.delta[q]):
            if p == 2:
                np_ = 2
            elif (sid < n_act) == (p == 0):
                np_ = 1 - p
            else:
                np_ = 2
            if (r, np_) not in seen:
                seen.add((r, np_))
                stack.append((r, np_))
    return Triviality.FULL


# -- safe actions ------------------------------------------------------------


@dataclass(frozen=True)
class SafeActionTable:
    """Per boundary state, the actions that keep the history Good.

    ``strongly[q]`` lists actions Good for every next percept;
    ``weakly[(q, x)]`` lists actions Good when the next percept is ``x``.
    Lists follow the alphabet's action order.
    """

    strongly: dict
    weakly: dict

    def strongly_safe(self, q: int) -> tuple[str, ...]:
        return self.strongly[q]

    def weakly_safe(self, q: int, percept: str) -> tuple[str, ...]:
        return self.weakly[(q, percept)]


def safe_action_table(d: Deontology) -> SafeActionTable:
    def build():
        acts, pers = d.alphabet.actions, d.alphabet.percepts
        strongly, weakly = {}, {}
        for q in range(d.num_states):
            if d.parity[q] != "b":
                continue
            good_after = {}
            for ai, a in zip(d.action_ids, acts):
                m = d.delta[q][ai]
                good_after[a] = [d.delta[m][xi] in d.accepting for xi in d.percept_ids]
            strongly[q] = tuple(a for a in acts if all(good_after[a]))
            for j, x in enumerate(pers):
                weakly[(q, x)] = tuple(a for a in acts if good_after[a][j])
        return SafeActionTable(strongly, weakly)

    return _memo(d, "safe_table", build)


@dataclass(frozen=True)
class ViabilityWitness:
    state: int
    percept: Optional[str] = None
    reason: str = ""


@dataclass(frozen=True)
class Viability:
    holds: bool
    witness: Optional[ViabilityWitness] = None

    def __bool__(self):
        return self.holds


def check_viability(d: Deontology) -> tuple[Viability, Viability]:
    """Return ``(weak, strong)``.

    Weak: every next percept admits some Good action (for all x, exists y).
    Strong: one action is Good for every next percept (exists y, for all x).
    Both also require the empty history to be Good.
    """
    if not accepts_empty(d):
        w = ViabilityWitness(d.start, None, "empty history is not Good")
        return Viability(False, w), Viability(False, w)
    table = safe_action_table(d)
    weak = strong = None
    for q in _good_reachable_ordered(d):
        if weak is None:
            for x in d.alphabet.percepts:
                if not table.weakly[(q, x)]:
                    weak = Viability(False, ViabilityWitness(q, x, "no action is Good after this percept"))
                    break
        if strong is None and not table.strongly[q]:
            strong = Viability(False, ViabilityWitness(q, None, "no action is Good for every percept"))
    return (Viability(True) if weak is None else weak,
            Viability(True) if strong is None else strong)


@dataclass(frozen=True)
class CIWitness:
    state: int
    action: str
    percepts: tuple[str, str]


@dataclass(frozen=True)
class ConsequenceIndependence:
    holds: bool
    witness: Optional[CIWitness] = None

    def __bool__(self):
        return self.holds


def check_consequence_independence(d: Deontology) -> ConsequenceIndependence:
    for q in boundary_states(d):
        for ai, a in zip(d.action_ids, d.alphabet.actions):
            m = d.delta[q][ai]
            first = None
            for xi, x in zip(d.percept_ids, d.alphabet.percepts):
                good = d.delta[m][xi] in d.accepting
                if first is None:
                    first = (x, good)
                elif good != first[1]:
                    return ConsequenceIndependence(False, CIWitness(q, a, (first[0], x)))
    return ConsequenceIndependence(True)


def governable_region(d: Deontology) -> tuple[frozenset, dict]:
    """Winning region of the safety game "stay Good forever".

    Greatest fixpoint: start from all accepting boundary states and drop
    any state where no action keeps every percept-successor inside the set.
    Returns the region and, per state in it, the region-preserving actions.
    """

    def build():
        region = {q for q in d.accepting if d.parity[q] == "b"}
        while True:
            keep = {q for q in region if _preserving(d, q, region)}
            if keep == region:
                break
            region = keep
        table = {q: _preserving(d, q, region) for q in sorted(region)}
        return frozenset(region), table

    return _memo(d, "region", build)


def _preserving(d: Deontology, q: int, region) -> tuple[str, ...]:
    out = []
    for ai, a in zip(d.action_ids, d.alphabet.actions):
        m = d.delta[q][ai]
        if all(d.delta[m][xi] in region for xi in d.percept_ids):
            out.append(a)
    return tuple(out)


# -- classification ----------------------------------------------------------


def _classify_state(d: Deontology, q: int) -> Classification:
    if q in d.accepting:
        return Classification.GOOD
    if q in d.dead_states:
        return Classification.DEAD
    return Classification.AMENDABLE


def classify_history(d: Deontology, h: History) -> Classification:
    require_same_alphabet(d.alphabet, h.alphabet)
    return _classify_state(d, d.run(h.tokens))


def classify_prefixes(d: Deontology, h: History) -> list[Classification]:
    """Classify every completed-cycle prefix in a single pass."""
    require_same_alphabet(d.alphabet, h.alphabet)
    ids = d.alphabet._ids
    delta = d.delta
    acc = d.accepting
    dead = d.dead_states
    good, amend, dead_c = Classification.GOOD, Classification.AMENDABLE, Classification.DEAD
    q = d.start
    out = []
    toks = h.tokens
    for i in range(0, len(toks), 2):
        q = delta[delta[q][ids[toks[i]]]][ids[toks[i + 1]]]
        out.append(good if q in acc else dead_c if q in dead else amend)
    return out


# -- policy transducers ------------------------------------------------------


@dataclass
class PolicyTransducer:
    """Finite-state policy: each state emits an action, percepts move it."""

    start: str
    emit: dict = field(default_factory=dict)
    on: dict = field(default_factory=dict)

    @property
    def states(self) -> list[str]:
        seen = [self.start]
        for s in list(self.emit) + [s for s, _ in self.on] + list(self.on.values()):
            if s not in seen:
                seen.append(s)
        return seen

    def check(self, alphabet: Alphabet) -> None:
        for s in self.states:
            if s not in self.emit:
                raise PartialPolicy(f"state {s!r} has no emitted action")
            if not alphabet.is_action(self.emit[s]):
                raise UnknownSymbol(f"state {s!r} emits {self.emit[s]!r}, not an action")
            for x in alphabet.percepts:
                if (s, x) not in self.on:
                    raise PartialPolicy(f"state {s!r} has no transition on {x!r}")
        for (s, x) in self.on:
            if not alphabet.is_percept(x):
                raise UnknownSymbol(f"transition on {x!r}, not a percept")


_FST_LINE = re.compile(r"(?P<key>start|emit|on)\s*:\s*(?P<rest>.*)")


def parse_transducer(text: str) -> PolicyTransducer:
    start = None
    emit: dict = {}
    on: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _FST_LINE.fullmatch(line)
        if not m:
            raise FormatError(f"line {lineno}: expected start:, emit: or on:")
        key, rest = m.group("key"), m.group("rest").split()
        if key == "start":
            if len(rest) != 1 or start is not None:
                raise FormatError(f"line {lineno}: bad or repeated start")
            start = rest[0]
        elif key == "emit":
            if len(rest) != 2 or rest[0] in emit:
                raise FormatError(f"line {lineno}: expected 'emit: <state> <action>' once per state")
            emit[rest[0]] = rest[1]
        else:
            if len(rest) != 4 or rest[2] != "->":
                raise FormatError(f"line {lineno}: expected 'on: <state> <percept> -> <state>'")
            if (rest[0], rest[1]) in on:
                raise FormatError(f"line {lineno}: duplicate transition")
            on[(rest[0], rest[1])] = rest[3]
    if start is None:
        raise FormatError("missing 'start:' line")
    return PolicyTransducer(start, emit, on)


def dump_transducer(t: PolicyTransducer) -> str:
    lines = [f"start: {t.start}"]
    lines += [f"emit: {s} {a}" for s, a in t.emit.items()]
    lines += [f"on: {s} {x} -> {r}" for (s, x), r in t.on.items()]
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class Verified:
    def __str__(self):
        return "Verified"


@dataclass(frozen=True)
class Counterexample:
    """A Good history, the policy's action there, and a percept that makes
    the extension non-Good."""

    history: History
    action: str
    percept: str

    @property
    def cycle(self) -> int:
        return self.history.cycle_count + 1

    @property
    def extended(self) -> History:
        return History._trusted(self.history.alphabet, self.history.tokens + (self.action, self.percept))

    def __str__(self):
        prefix = " ".join(self.history.tokens) or "(empty)"
        return f"Counterexample at cycle {self.cycle}: after [{prefix}] the policy emits {self.action}; percept {self.percept} leaves G"


Verdict = Union[Verified, Counterexample]


def verify_policy(d: Deontology, t: PolicyTransducer) -> Verdict:
    """Decide whether a finite-state policy only takes Good actions.

    Breadth-first over (policy state, automaton boundary state) pairs; the
    first violation found has the fewest cycles and, among those, the
    least percepts in declaration order.
    """
    alphabet = d.alphabet
    t.check(alphabet)
    acc = d.accepting
    dead = d.dead_states
    start = (t.start, d.start)
    parent: dict = {start: None}
    queue = deque([start])
    while queue:
        pair = queue.popleft()
        s, q = pair
        action = t.emit[s]
        m = d.step(q, action)
        if q in acc:
            for x in alphabet.percepts:
                if d.step(m, x) not in acc:
                    return Counterexample(_path_history(alphabet, parent, t, pair), action, x)
        for x in alphabet.percepts:
            nxt = (t.on[(s, x)], d.step(m, x))
            if nxt[1] in dead or nxt in parent:
                continue
            parent[nxt] = (pair, x)
            queue.append(nxt)
    return Verified()


def _path_history(alphabet, parent, t, pair) -> History:
    tokens = []
    while parent[pair] is not None:
        prev, x = parent[pair]
        tokens.append(x)
        tokens.append(t.emit[prev[0]])
        pair = prev
    tokens.reverse()
    return History._trusted(alphabet, tuple(tokens))


# -- full report -------------------------------------------------------------


@dataclass(frozen=True)
class AnalysisReport:
    triviality: Triviality
    accepts_empty: bool
    weak_viable: bool
    weak_viable_witness: Optional[ViabilityWitness]
    strong_viable: bool
    strong_viable_witness: Optional[ViabilityWitness]
    consequence_independent: bool
    consequence_independent_witness: Optional[CIWitness]
    governable_region_size: int
    governable_from_start: bool
    num_states: int = 0

    def to_dict(self) -> dict:
        def wit(w):
            if w is None:
                return None
            return {k: (list(v) if isinstance(v, tuple) else v) for k, v in w.__dict__.items()}

        return {
            "triviality": self.triviality.value,
            "accepts_empty": self.accepts_empty,
            "weak_viable": self.weak_viable,
            "weak_viable_witness": wit(self.weak_viable_witness),
            "strong_viable": self.strong_viable,
            "strong_viable_witness": wit(self.strong_viable_witness),
            "consequence_independent": self.consequence_independent,
            "consequence_independent_witness": wit(self.consequence_independent_witness),
            "governable_region_size": self.governable_region_size,
            "governable_from_start": self.governable_from_start,
            "num_states": self.num_states,
        }

    def render_text(self) -> str:
        def yn(b):
            return "yes" if b else "no"

        lines = [
            f"states:                  {self.num_states}",
            f"triviality:              {self.triviality.value}",
            f"accepts empty history:   {yn(self.accepts_empty)}",
            f"weakly viable:           {yn(self.weak_viable)}",
        ]
        if self.weak_viable_witness:
            w = self.weak_viable_witness
            lines.append(f"  witness: state {w.state}" + (f", percept {w.percept}" if w.percept else "") + f" ({w.reason})")
        lines.append(f"strongly viable:         {yn(self.strong_viable)}")
        if self.strong_viable_witness:
            w = self.strong_viable_witness
            lines.append(f"  witness: state {w.state} ({w.reason})")
        lines.append(f"consequence-independent: {yn(self.consequence_independent)}")
        if self.consequence_independent_witness:
            w = self.consequence_independent_witness
            lines.append(f"  witness: state {w.state}, action {w.action}, percepts {w.percepts[0]} vs {w.percepts[1]}")
        lines.append(f"governable region size:  {self.governable_region_size}")
        lines.append(f"governable from start:   {yn(self.governable_from_start)}")
        return "\n".join(lines)


def analyze(d: Deontology) -> AnalysisReport:
    weak, strong = check_viability(d)
    ci = check_consequence_independence(d)
    region, _ = governable_region(d)
    return AnalysisReport(
        triviality=check_trivial(d),
        accepts_empty=accepts_empty(d),
        weak_viable=weak.holds,
        weak_viable_witness=weak.witness,
        strong_viable=strong.holds,
        strong_viable_witness=strong.witness,
        consequence_independent=ci.holds,
        consequence_independent_witness=ci.witness,
        governable_region_size=len(region),
        governable_from_start=d.start in region,
        num_states=d.num_states,
    )

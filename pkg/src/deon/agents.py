"""Policies and environments for simulation.

A policy maps the history so far to the next action. An environment maps
the history plus the action just emitted to the next percept. Both are
single-owner objects; seeded ones replay identically from a fresh instance.

``good_policy`` and ``bad_policy`` build, for a given deontology, a policy
that never leaves G and one that provably does.
"""

from __future__ import annotations

import random
from collections import deque
from typing import Optional, Sequence

from .analyzer import (
    PolicyTransducer,
    Triviality,
    boundary_states,
    check_trivial,
    good_reachable_states,
    safe_action_table,
)
from .core import Alphabet, History
from .errors import (
    EmptyHistoryNotGood,
    NotStronglyViable,
    PartialPolicy,
    TrivialDeontology,
    UnknownSymbol,
)
from .speclang import Deontology, accepts_empty


class Policy:
    name = "policy"
    seed: Optional[int] = None

    def next_action(self, history: History) -> str:
        raise NotImplementedError

    def as_transducer(self) -> PolicyTransducer:
        raise NotImplementedError(f"{self.name} has no finite-state form")


class Environment:
    name = "env"
    seed: Optional[int] = None

    def next_percept(self, history: History, action: str) -> str:
        raise NotImplementedError


class _Tracker:
    """Incrementally runs the automaton along a growing history."""

    def __init__(self, d: Deontology):
        self.d = d
        self.tokens: tuple = ()
        self.state = d.start

    def state_of(self, history: History) -> int:
        toks = history.tokens
        n = len(self.tokens)
        if len(toks) >= n and toks[:n] == self.tokens:
            self.state = self.d.run(toks[n:], self.state)
        else:
            self.state = self.d.run(toks)
        self.tokens = toks
        return self.state


# -- policies ----------------------------------------------------------------


class NullPolicy(Policy):
    def __init__(self, noop: str, alphabet: Alphabet):
        self.noop = alphabet.check_action(noop)
        self.alphabet = alphabet
        self.name = f"null:{noop}"

    def next_action(self, history):
        return self.noop

    def as_transducer(self):
        return PolicyTransducer("s0", {"s0": self.noop}, {("s0", x): "s0" for x in self.alphabet.percepts})


def null_policy(noop: str, alphabet: Alphabet) -> NullPolicy:
    return NullPolicy(noop, alphabet)


class RandomPolicy(Policy):
    def __init__(self, alphabet: Alphabet, seed: int = 0):
        self.actions = alphabet.actions
        self.seed = seed
        self.name = "random"
        self._rng = random.Random(seed)

    def next_action(self, history):
        return self.actions[self._rng.randrange(len(self.actions))]


def random_policy(alphabet: Alphabet, seed: int = 0) -> RandomPolicy:
    return RandomPolicy(alphabet, seed)


class ScriptedPolicy(Policy):
    """Plays a fixed action list; cycles past the end repeat the last one."""

    def __init__(self, actions: Sequence[str], alphabet: Alphabet):
        if not actions:
            raise ValueError("script must be non-empty")
        self.script = tuple(alphabet.check_action(a) for a in actions)
        self.name = "script"

    def next_action(self, history):
        return self.script[min(history.cycle_count, len(self.script) - 1)]


def scripted_policy(actions: Sequence[str], alphabet: Alphabet) -> ScriptedPolicy:
    return ScriptedPolicy(actions, alphabet)


class GoodPolicy(Policy):
    """At a Good history, the first action Good for every next percept;
    elsewhere the first declared action."""

    def __init__(self, d: Deontology):
        table = safe_action_table(d)
        for q in sorted(good_reachable_states(d)):
            if not table.strongly[q]:
                raise NotStronglyViable(f"state {q} is reachable by a Good history but has no strongly safe action")
        self.d = d
        self.name = "good"
        first = d.alphabet.actions[0]
        self._choice = {
            q: (table.strongly[q][0] if q in d.accepting and table.strongly[q] else first)
            for q in range(d.num_states)
        }
        self._tracker = _Tracker(d)

    def next_action(self, history):
        return self._choice[self._tracker.state_of(history)]

    def as_transducer(self):
        d = self.d
        emit, on = {}, {}
        todo, seen = [d.start], {d.start}
        while todo:
            q = todo.pop()
            a = self._choice[q]
            emit[f"q{q}"] = a
            m = d.step(q, a)
            for x in d.alphabet.percepts:
                r = d.step(m, x)
                on[(f"q{q}", x)] = f"q{r}"
                if r not in seen:
                    seen.add(r)
                    todo.append(r)
        return PolicyTransducer(f"q{d.start}", emit, on)


def good_policy(d: Deontology) -> GoodPolicy:
    return GoodPolicy(d)


def shortest_violation(d: Deontology) -> Optional[tuple[tuple, str]]:
    """Breadth-first search for the shortest Good history with an action
    some percept turns Bad. Returns (route, action) with route a tuple of
    (action, percept) cycles, or None when no such history exists."""
    route = {d.start: ()}
    queue = deque([d.start])
    acc = d.accepting
    while queue:
        q = queue.popleft()
        if q in acc:
            for a in d.alphabet.actions:
                m = d.step(q, a)
                if any(d.step(m, x) not in acc for x in d.alphabet.percepts):
                    return route[q], a
        for a in d.alphabet.actions:
            m = d.step(q, a)
            for x in d.alphabet.percepts:
                r = d.step(m, x)
                if r not in route:
                    route[r] = route[q] + ((a, x),)
                    queue.append(r)
    return None


class BadPolicy(Policy):
    """Follows a scripted route to a shortest violating Good history, then
    emits the violating action; elsewhere the first declared action."""

    def __init__(self, d: Deontology):
        if check_trivial(d) is not Triviality.NON_TRIVIAL:
            raise TrivialDeontology("bad_policy needs a non-trivial deontology")
        if not accepts_empty(d):
            raise EmptyHistoryNotGood("bad_policy needs the empty history to be Good")
        found = shortest_violation(d)
        if found is None:
            # non-trivial yet no Good history has a Bad successor
            raise TrivialDeontology("no Good history can be extended into a Bad one")
        self.route, self.violation = found
        self.target = tuple(tok for pair in self.route for tok in pair)
        self.d = d
        self.name = "bad"

    def next_action(self, history):
        toks = history.tokens
        n = len(toks)
        if n <= len(self.target) and toks == self.target[:n]:
            if n == len(self.target):
                return self.violation
            return self.target[n]
        return self.d.alphabet.actions[0]

    def as_transducer(self):
        first = self.d.alphabet.actions[0]
        emit, on = {"off": first}, {}
        k = len(self.route)
        for i in range(k + 1):
            emit[f"r{i}"] = self.route[i][0] if i < k else self.violation
            for x in self.d.alphabet.percepts:
                on[(f"r{i}", x)] = f"r{i + 1}" if i < k and x == self.route[i][1] else "off"
        for x in self.d.alphabet.percepts:
            on[("off", x)] = "off"
        return PolicyTransducer("r0", emit, on)


def bad_policy(d: Deontology) -> BadPolicy:
    return BadPolicy(d)


class TransducerPolicy(Policy):
    def __init__(self, t: PolicyTransducer, alphabet: Alphabet):
        t.check(alphabet)
        self.t = t
        self.name = "transducer"
        self._state = t.start
        self._tokens: tuple = ()

    def next_action(self, history):
        toks = history.tokens
        n = len(self._tokens)
        if len(toks) < n or toks[:n] != self._tokens:
            self._state, n = self.t.start, 0
        s = self._state
        for x in toks[n + 1::2]:
            s = self.t.on[(s, x)]
        self._state, self._tokens = s, toks
        return self.t.emit[s]

    def as_transducer(self):
        return self.t


def transducer_policy(t: PolicyTransducer, alphabet: Alphabet) -> TransducerPolicy:
    return TransducerPolicy(t, alphabet)


# -- environments ------------------------------------------------------------


class RandomEnv(Environment):
    def __init__(self, alphabet: Alphabet, seed: int = 0):
        self.percepts = alphabet.percepts
        self.seed = seed
        self.name = "random"
        self._rng = random.Random(seed)

    def next_percept(self, history, action):
        return self.percepts[self._rng.randrange(len(self.percepts))]


def random_env(alphabet: Alphabet, seed: int = 0) -> RandomEnv:
    return RandomEnv(alphabet, seed)


class ScriptedEnv(Environment):
    def __init__(self, percepts: Sequence[str], alphabet: Optional[Alphabet] = None):
        if not percepts:
            raise ValueError("script must be non-empty")
        if alphabet is not None:
            for p in percepts:
                alphabet.check_percept(p)
        self.script = tuple(percepts)
        self.name = "script"

    def next_percept(self, history, action):
        return self.script[min(history.cycle_count, len(self.script) - 1)]


def scripted_env(percepts: Sequence[str], alphabet: Optional[Alphabet] = None) -> ScriptedEnv:
    return ScriptedEnv(percepts, alphabet)


class AdversarialEnv(Environment):
    """Answers each action with the percept that hurts the agent most.

    Percepts that make the history non-Good come first; after that, the
    percept leaving the fewest strongly safe actions; ties go to
    declaration order.
    """

    def __init__(self, d: Deontology):
        self.d = d
        self.name = "adversarial"
        self._tracker = _Tracker(d)
        table = safe_action_table(d)
        self._pick = {}
        for q in range(d.num_states):
            if d.parity[q] != "b":
                continue
            for a in d.alphabet.actions:
                m = d.step(q, a)

                def key(ix):
                    i, x = ix
                    r = d.step(m, x)
                    return (r in d.accepting, len(table.strongly.get(r, ())), i)

                self._pick[(q, a)] = min(enumerate(d.alphabet.percepts), key=key)[1]

    def next_percept(self, history, action):
        return self._pick[(self._tracker.state_of(history), action)]


def adversarial_env(d: Deontology) -> AdversarialEnv:
    return AdversarialEnv(d)

"""Alphabets and interaction histories.

A history is the interleaved token record ``y1 x1 y2 x2 ... yn xn`` of an
agent/environment run: the agent emits an action, then the environment
answers with a percept. Tokens are plain symbol names.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import (
    AlphabetMismatch,
    AlternationViolation,
    DuplicateSymbol,
    EmptyAlphabet,
    UnknownSymbol,
)

ACTION = "action"
PERCEPT = "percept"


@dataclass(frozen=True)
class Alphabet:
    """Disjoint, ordered percept and action symbol sets.

    Declaration order is the canonical tie-break order everywhere downstream.
    """

    percepts: tuple[str, ...]
    actions: tuple[str, ...]
    _ids: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "percepts", tuple(self.percepts))
        object.__setattr__(self, "actions", tuple(self.actions))
        if not self.percepts:
            raise EmptyAlphabet("alphabet needs at least one percept")
        if not self.actions:
            raise EmptyAlphabet("alphabet needs at least one action")
        seen = set()
        for name in self.actions + self.percepts:
            if name in seen:
                raise DuplicateSymbol(f"symbol {name!r} declared twice")
            seen.add(name)
        # actions first: ids follow the cycle order (action, then percept)
        ids = {name: i for i, name in enumerate(self.actions + self.percepts)}
        object.__setattr__(self, "_ids", ids)

    @property
    def symbols(self) -> tuple[str, ...]:
        return self.actions + self.percepts

    def symbol_id(self, name: str) -> int:
        try:
            return self._ids[name]
        except KeyError:
            raise UnknownSymbol(f"unknown symbol {name!r}") from None

    def role(self, name: str) -> str:
        return ACTION if self.symbol_id(name) < len(self.actions) else PERCEPT

    def is_action(self, name: str) -> bool:
        return name in self._ids and self._ids[name] < len(self.actions)

    def is_percept(self, name: str) -> bool:
        return name in self._ids and self._ids[name] >= len(self.actions)

    def __contains__(self, name) -> bool:
        return name in self._ids

    def check_action(self, name: str) -> str:
        if not self.is_action(name):
            raise UnknownSymbol(f"{name!r} is not a declared action")
        return name

    def check_percept(self, name: str) -> str:
        if not self.is_percept(name):
            raise UnknownSymbol(f"{name!r} is not a declared percept")
        return name


def make_alphabet(percept_names: Iterable[str], action_names: Iterable[str]) -> Alphabet:
    return Alphabet(tuple(percept_names), tuple(action_names))


@dataclass(frozen=True)
class History:
    """An element of H: alternating action/percept tokens, action first."""

    alphabet: Alphabet
    tokens: tuple[str, ...] = ()

    def __post_init__(self):
        tokens = tuple(self.tokens)
        object.__setattr__(self, "tokens", tokens)
        for i, tok in enumerate(tokens):
            if tok not in self.alphabet:
                raise UnknownSymbol(f"unknown symbol {tok!r} at position {i}")
            want_action = i % 2 == 0
            if self.alphabet.is_action(tok) != want_action:
                expected = ACTION if want_action else PERCEPT
                raise AlternationViolation(
                    f"token {i} ({tok!r}) should be an {expected}"
                )
        if len(tokens) % 2:
            raise AlternationViolation("history ends mid-cycle (odd token count)")

    @classmethod
    def _trusted(cls, alphabet: Alphabet, tokens: tuple[str, ...]) -> "History":
        # skips validation; callers guarantee well-formed tokens
        h = object.__new__(cls)
        object.__setattr__(h, "alphabet", alphabet)
        object.__setattr__(h, "tokens", tokens)
        return h

    @property
    def cycle_count(self) -> int:
        return len(self.tokens) // 2

    @property
    def actions(self) -> tuple[str, ...]:
        return self.tokens[0::2]

    @property
    def percepts(self) -> tuple[str, ...]:
        return self.tokens[1::2]

    def cycles(self) -> list[tuple[str, str]]:
        return list(zip(self.actions, self.percepts))

    def prefix(self, cycles: int) -> "History":
        return History._trusted(self.alphabet, self.tokens[: 2 * cycles])

    def __len__(self) -> int:
        return len(self.tokens)

    def __str__(self) -> str:
        return render_history(self)


def empty_history(alphabet: Alphabet) -> History:
    return History(alphabet, ())


def append_cycle(h: History, action: str, percept: str) -> History:
    h.alphabet.check_action(action)
    h.alphabet.check_percept(percept)
    return History._trusted(h.alphabet, h.tokens + (action, percept))


def history_from_cycles(alphabet: Alphabet, cycles: Sequence[tuple[str, str]]) -> History:
    return History(alphabet, tuple(tok for pair in cycles for tok in pair))


def parse_history_text(text: str, alphabet: Alphabet) -> History:
    """Parse whitespace-separated token names; ``""`` is the empty history."""
    return History(alphabet, tuple(text.split()))


def render_history(h: History) -> str:
    return " ".join(h.tokens)


def require_same_alphabet(a: Alphabet, b: Alphabet) -> None:
    if a != b:
        raise AlphabetMismatch(f"alphabet mismatch: {a} vs {b}")

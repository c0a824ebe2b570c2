"""Deontological governor: a runtime filter between an agent and its actuators.

The governor sees each proposed action before it is emitted. It approves
the proposal when the action is Good for every possible next percept,
otherwise substitutes the first such action in the fallback order, and
refuses (freezing the session) when none exists.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

from .analyzer import governable_region, safe_action_table
from .core import History
from .errors import EmptyHistoryNotGood, NotGovernable, ProtocolOrder, UnknownSymbol
from .speclang import Deontology, accepts_empty

STRICT = "strict"
PERMISSIVE = "permissive"
AWAITING_PROPOSAL = "awaiting_proposal"
AWAITING_PERCEPT = "awaiting_percept"


@dataclass(frozen=True)
class GovernorConfig:
    mode: str = STRICT
    foresight: bool = False
    fallback_order: Optional[tuple[str, ...]] = None

    def __post_init__(self):
        if self.mode not in (STRICT, PERMISSIVE):
            raise ValueError(f"mode must be {STRICT!r} or {PERMISSIVE!r}, got {self.mode!r}")
        if self.fallback_order is not None:
            object.__setattr__(self, "fallback_order", tuple(self.fallback_order))

    def order_for(self, d: Deontology) -> tuple[str, ...]:
        if self.fallback_order is None:
            return d.alphabet.actions
        if sorted(self.fallback_order) != sorted(d.alphabet.actions):
            raise ValueError("fallback_order must be a permutation of the action alphabet")
        return self.fallback_order


@dataclass(frozen=True)
class Approved:
    action: str

    @property
    def emitted(self) -> str:
        return self.action

    def wire(self) -> str:
        return f"verdict approved {self.action}"


@dataclass(frozen=True)
class Substituted:
    original: str
    replacement: str

    @property
    def emitted(self) -> str:
        return self.replacement

    def wire(self) -> str:
        return f"verdict substituted {self.original} {self.replacement}"


@dataclass(frozen=True)
class Refused:
    reason: str

    @property
    def emitted(self) -> None:
        return None

    def wire(self) -> str:
        return f"verdict refused {self.reason}"


ProposalOutcome = Union[Approved, Substituted, Refused]

NO_SAFE_ACTION = "NoSafeAction"
SESSION_FROZEN = "SessionFrozen"


@dataclass
class GovernorSession:
    deontology: Deontology
    config: GovernorConfig = field(default_factory=GovernorConfig)
    current_state: int = 0
    phase: str = AWAITING_PROPOSAL
    decision_log: list = field(default_factory=list)
    frozen: bool = False
    _tokens: list = field(default_factory=list, repr=False)
    _pending: Optional[str] = field(default=None, repr=False)

    def __post_init__(self):
        d = self.deontology
        self.current_state = d.start
        self._order = self.config.order_for(d)
        table = safe_action_table(d)
        if self.config.foresight:
            region, preserving = governable_region(d)
            allowed = {q: set(preserving.get(q, ())) for q in table.strongly}
        else:
            allowed = {q: set(acts) for q, acts in table.strongly.items()}
        # per state: (safe set, first safe action in fallback order)
        self._safe = {
            q: (acts, next((a for a in self._order if a in acts), None))
            for q, acts in allowed.items()
        }
        self._mid_ids = d.alphabet._ids

    @property
    def emitted_history(self) -> History:
        return History._trusted(self.deontology.alphabet, tuple(self._tokens))

    @property
    def cycles(self) -> int:
        return len(self._tokens) // 2

    def safe_actions(self) -> list[str]:
        safe, _ = self._safe.get(self.current_state, (set(), None))
        return [a for a in self._order if a in safe]

    def propose(self, action: str) -> ProposalOutcome:
        if self.phase != AWAITING_PROPOSAL:
            raise ProtocolOrder("propose called while awaiting a percept")
        if not self.deontology.alphabet.is_action(action):
            raise UnknownSymbol(f"{action!r} is not a declared action")
        if self.frozen:
            outcome = Refused(SESSION_FROZEN)
            self.decision_log.append((action, outcome, None))
            return outcome
        safe, fallback = self._safe.get(self.current_state, (set(), None))
        if action in safe:
            outcome = Approved(action)
        elif fallback is not None:
            outcome = Substituted(action, fallback)
        else:
            self.frozen = True
            outcome = Refused(NO_SAFE_ACTION)
            self.decision_log.append((action, outcome, None))
            return outcome
        self.decision_log.append((action, outcome, outcome.emitted))
        self._pending = outcome.emitted
        self.phase = AWAITING_PERCEPT
        return outcome

    def observe(self, percept: str) -> int:
        """Feed the percept that followed the emitted action; returns the
        number of completed cycles."""
        if self.phase != AWAITING_PERCEPT:
            raise ProtocolOrder("observe called before an approved proposal")
        d = self.deontology
        if not d.alphabet.is_percept(percept):
            raise UnknownSymbol(f"{percept!r} is not a declared percept")
        ids = self._mid_ids
        self.current_state = d.delta[d.delta[self.current_state][ids[self._pending]]][ids[percept]]
        self._tokens.append(self._pending)
        self._tokens.append(percept)
        self._pending = None
        self.phase = AWAITING_PROPOSAL
        return len(self._tokens) // 2

    def trace(self) -> tuple[History, list]:
        return self.emitted_history, list(self.decision_log)


def open_session(d: Deontology, cfg: GovernorConfig | None = None) -> GovernorSession:
    cfg = cfg or GovernorConfig()
    if cfg.mode == STRICT:
        if not accepts_empty(d):
            raise EmptyHistoryNotGood("the empty history is not Good; strict governance impossible")
        if cfg.foresight:
            region, _ = governable_region(d)
            if d.start not in region:
                raise NotGovernable("start state lies outside the governable region")
    return GovernorSession(d, cfg)


def propose(s: GovernorSession, action: str) -> ProposalOutcome:
    return s.propose(action)


def observe(s: GovernorSession, percept: str) -> int:
    return s.observe(percept)


def session_trace(s: GovernorSession) -> tuple[History, list]:
    return s.trace()

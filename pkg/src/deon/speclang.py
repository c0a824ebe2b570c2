"""The ``.deon`` specification language and its compiler.

A spec declares percepts, actions and a regular expression for the Good
histories. Compilation goes regex -> epsilon-NFA -> subset DFA -> product
with the two-state interleaving automaton -> dead-state completion ->
Hopcroft minimization, and yields a :class:`Deontology`.
"""

from __future__ import annotations

import hashlib
import re
import warnings
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence, Union

from .core import Alphabet, History, require_same_alphabet
from .errors import (
    DuplicateSection,
    FormatError,
    SpecSyntaxError,
    StateBlowup,
    UndeclaredSymbol,
    UnknownSymbol,
)

DEFAULT_STATE_CAP = 100_000
RESERVED = frozenset({"eps"})
_NAME = re.compile(r"[A-Za-z][A-Za-z0-9_]*")
_SECTIONS = ("percepts", "actions", "good")


class InterleavingWarning(UserWarning):
    """The good-regex matches token strings that are not well-formed histories."""


# -- regex syntax tree -------------------------------------------------------


@dataclass(frozen=True)
class Sym:
    name: str
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Eps:
    pass


@dataclass(frozen=True)
class Wild:
    kind: str  # "_a", "_p", "_c" or "%"


@dataclass(frozen=True)
class Cls:
    members: tuple[Sym, ...]


@dataclass(frozen=True)
class Cat:
    parts: tuple["Regex", ...]


@dataclass(frozen=True)
class Alt:
    options: tuple["Regex", ...]


@dataclass(frozen=True)
class Rep:
    body: "Regex"
    op: str  # "*", "+" or "?"


Regex = Union[Sym, Eps, Wild, Cls, Cat, Alt, Rep]


def regex_symbols(node: Regex) -> Iterable[Sym]:
    if isinstance(node, Sym):
        yield node
    elif isinstance(node, Cls):
        yield from node.members
    elif isinstance(node, Cat):
        for part in node.parts:
            yield from regex_symbols(part)
    elif isinstance(node, Alt):
        for opt in node.options:
            yield from regex_symbols(opt)
    elif isinstance(node, Rep):
        yield from regex_symbols(node.body)


def render_regex(node: Regex) -> str:
    """Render a syntax tree back to (fully parenthesised) regex text."""
    if isinstance(node, Sym):
        return node.name
    if isinstance(node, Eps):
        return "eps"
    if isinstance(node, Wild):
        return node.kind
    if isinstance(node, Cls):
        return "[" + " ".join(m.name for m in node.members) + "]"
    if isinstance(node, Cat):
        return "(" + " ".join(render_regex(p) for p in node.parts) + ")"
    if isinstance(node, Alt):
        return "(" + " | ".join(render_regex(o) for o in node.options) + ")"
    return "(" + render_regex(node.body) + ")" + node.op


# -- parsing -----------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[()\[\]|*+?%]))")


def _tokenize(text: str, locate):
    pos = 0
    out = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            ws = len(text[pos:]) - len(text[pos:].lstrip())
            raise SpecSyntaxError(f"unexpected character {text[pos + ws]!r}", *locate(pos + ws))
        kind = "name" if m.group("name") else "op"
        out.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    return out


class _RegexParser:
    """Recursive descent over tokens; ``locate`` maps a text offset to a
    (line, column) pair for error messages."""

    def __init__(self, text: str, locate=None):
        self.locate = locate or (lambda off: (1, off + 1))
        self.tokens = _tokenize(text, self.locate)
        self.end = len(text)
        self.i = 0

    def _peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def _error(self, message, tok=None):
        raise SpecSyntaxError(message, *self.locate(tok[2] if tok else self.end))

    def parse(self) -> Regex:
        if not self.tokens:
            self._error("empty regular expression")
        node = self._alt()
        tok = self._peek()
        if tok is not None:
            if tok[1] == ")":
                self._error("unbalanced parenthesis: unexpected ')'", tok)
            self._error(f"unexpected {tok[1]!r}", tok)
        return node

    def _alt(self) -> Regex:
        options = [self._cat()]
        while (tok := self._peek()) is not None and tok[1] == "|":
            self.i += 1
            options.append(self._cat())
        return options[0] if len(options) == 1 else Alt(tuple(options))

    def _cat(self) -> Regex:
        parts = []
        while (tok := self._peek()) is not None and tok[1] not in ("|", ")"):
            parts.append(self._rep())
        if not parts:
            self._error("expected an expression", self._peek())
        return parts[0] if len(parts) == 1 else Cat(tuple(parts))

    def _rep(self) -> Regex:
        node = self._atom()
        tok = self._peek()
        if tok is not None and tok[1] in ("*", "+", "?"):
            self.i += 1
            node = Rep(node, tok[1])
        return node

    def _atom(self) -> Regex:
        tok = self._peek()
        if tok is None:
            self._error("unexpected end of expression")
        kind, value, col = tok
        self.i += 1
        if kind == "name":
            if value == "eps":
                return Eps()
            if value in ("_a", "_p", "_c"):
                return Wild(value)
            if not _NAME.fullmatch(value):
                self._error(f"invalid name {value!r}", tok)
            return Sym(value, *self.locate(col))
        if value == "%":
            return Wild("%")
        if value == "(":
            node = self._alt()
            close = self._peek()
            if close is None or close[1] != ")":
                self._error("unbalanced parenthesis: missing ')'", close)
            self.i += 1
            return node
        if value == "[":
            members = []
            while (t := self._peek()) is not None and t[0] == "name":
                if t[1] in RESERVED or not _NAME.fullmatch(t[1]):
                    self._error(f"{t[1]!r} cannot appear in a symbol class", t)
                members.append(Sym(t[1], *self.locate(t[2])))
                self.i += 1
            close = self._peek()
            if close is None or close[1] != "]":
                self._error("unterminated symbol class: missing ']'", close)
            if not members:
                self._error("empty symbol class", close)
            self.i += 1
            return Cls(tuple(members))
        self._error(f"unexpected {value!r}", tok)


def parse_regex(text: str) -> Regex:
    return _RegexParser(text).parse()


@dataclass(frozen=True)
class SpecDoc:
    alphabet: Alphabet
    good_regex: Regex
    good_text: str = ""
    name: str = ""


def parse_spec(text: str, name: str = "") -> SpecDoc:
    """Parse ``.deon`` text. Lines without a ``key:`` prefix continue the
    previous section."""
    sections: dict[str, list] = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        m = re.match(r"\s*([A-Za-z_]+)\s*:", line)
        if m:
            key = m.group(1)
            if key not in _SECTIONS:
                raise SpecSyntaxError(f"unknown section {key!r}", lineno, m.start(1) + 1)
            if key in sections:
                raise DuplicateSection(f"section {key!r} given twice", lineno, m.start(1) + 1)
            sections[key] = [(lineno, m.end(), line[m.end():])]
            current = key
        elif current is None:
            raise SpecSyntaxError("expected 'percepts:', 'actions:' or 'good:'", lineno, 1)
        else:
            sections[current].append((lineno, 0, line))

    regex = None
    good_text = ""
    if "good" in sections:
        # join continuation lines, remembering where each piece came from
        pieces = []
        offset = 0
        for lineno, col0, body in sections["good"]:
            pieces.append((offset, lineno, col0))
            good_text += body + " "
            offset += len(body) + 1

        def locate(off):
            for start, lineno, col0 in reversed(pieces):
                if off >= start:
                    return lineno, col0 + off - start + 1
            return pieces[0][1], pieces[0][2] + 1

        regex = _RegexParser(good_text, locate).parse()
        good_text = good_text.strip()

    for key in _SECTIONS:
        if key not in sections:
            raise SpecSyntaxError(f"missing section {key!r}", 0, 0)

    names = {}
    for key in ("percepts", "actions"):
        found = []
        for lineno, col0, body in sections[key]:
            for m in re.finditer(r"\S+", body):
                tok = m.group()
                if not _NAME.fullmatch(tok) or tok in RESERVED:
                    raise SpecSyntaxError(f"invalid symbol name {tok!r}", lineno, col0 + m.start() + 1)
                found.append(tok)
        names[key] = found
    alphabet = Alphabet(tuple(names["percepts"]), tuple(names["actions"]))

    for sym in regex_symbols(regex):
        if sym.name not in alphabet:
            raise UndeclaredSymbol(f"symbol {sym.name!r} is not declared", sym.line, sym.column)
    return SpecDoc(alphabet, regex, good_text, name)


# -- automata ----------------------------------------------------------------


class _NFA:
    """Thompson construction: epsilon edges plus symbol edges over ids."""

    def __init__(self):
        self.eps: list[list[int]] = []
        self.edges: list[list[tuple[int, int]]] = []

    def new(self) -> int:
        self.eps.append([])
        self.edges.append([])
        return len(self.eps) - 1

    def build(self, node: Regex, alphabet: Alphabet) -> tuple[int, int]:
        s, f = self.new(), self.new()
        if isinstance(node, Eps):
            self.eps[s].append(f)
        elif isinstance(node, Sym):
            self.edges[s].append((alphabet.symbol_id(node.name), f))
        elif isinstance(node, Cls):
            for m in node.members:
                self.edges[s].append((alphabet.symbol_id(m.name), f))
        elif isinstance(node, Wild):
            return self.build(_expand_wild(node.kind, alphabet), alphabet)
        elif isinstance(node, Cat):
            cur = s
            for part in node.parts:
                ps, pf = self.build(part, alphabet)
                self.eps[cur].append(ps)
                cur = pf
            self.eps[cur].append(f)
        elif isinstance(node, Alt):
            for opt in node.options:
                os_, of = self.build(opt, alphabet)
                self.eps[s].append(os_)
                self.eps[of].append(f)
        elif isinstance(node, Rep):
            bs, bf = self.build(node.body, alphabet)
            self.eps[s].append(bs)
            self.eps[bf].append(f)
            if node.op in ("*", "?"):
                self.eps[s].append(f)
            if node.op in ("*", "+"):
                self.eps[bf].append(bs)
        else:
            raise TypeError(f"not a regex node: {node!r}")
        return s, f

    def closure(self, states: Iterable[int]) -> frozenset:
        stack = list(states)
        seen = set(stack)
        while stack:
            q = stack.pop()
            for r in self.eps[q]:
                if r not in seen:
                    seen.add(r)
                    stack.append(r)
        return frozenset(seen)


def _expand_wild(kind: str, alphabet: Alphabet) -> Regex:
    actions = Cls(tuple(Sym(a) for a in alphabet.actions))
    percepts = Cls(tuple(Sym(p) for p in alphabet.percepts))
    if kind == "_a":
        return actions
    if kind == "_p":
        return percepts
    cycle = Cat((actions, percepts))
    if kind == "_c":
        return cycle
    return Rep(cycle, "*")


def _subset_construction(regex: Regex, alphabet: Alphabet, cap: int):
    """Determinize; returns (delta, accepting) with state 0 the start."""
    nfa = _NFA()
    start, final = nfa.build(regex, alphabet)
    nsym = len(alphabet.symbols)
    first = nfa.closure([start])
    index = {first: 0}
    order = [first]
    delta: list[list[int]] = []
    i = 0
    while i < len(order):
        current = order[i]
        i += 1
        moves: list[set] = [set() for _ in range(nsym)]
        for q in current:
            for sid, r in nfa.edges[q]:
                moves[sid].add(r)
        row = []
        for sid in range(nsym):
            target = nfa.closure(moves[sid])
            if target not in index:
                if len(order) >= cap:
                    raise StateBlowup(f"determinization exceeded {cap} states")
                index[target] = len(order)
                order.append(target)
            row.append(index[target])
        delta.append(row)
    accepting = {i for i, s in enumerate(order) if final in s}
    return delta, accepting


def _interleave_product(delta, accepting, n_actions: int, cap: int):
    """Product with the parity automaton of (action percept)*.

    Returns (delta, accepting, subset_leaks) where state 0 is the start and
    state 1 the shared dead state; subset_leaks is true when some string the
    regex matches is not interleaved.
    """
    nsym = len(delta[0])
    DEAD = 1
    index = {(0, 0): 0}
    order: list = [(0, 0), None]  # slot 1 is the dead state
    out: list = [None, [DEAD] * nsym]
    leaks = False
    i = 0
    while i < len(order):
        if i == DEAD:
            i += 1
            continue
        q, parity = order[i]
        row = []
        for sid in range(nsym):
            if (sid < n_actions) == (parity == 0):
                key = (delta[q][sid], 1 - parity)
                if key not in index:
                    if len(order) >= cap:
                        raise StateBlowup(f"interleaving product exceeded {cap} states")
                    index[key] = len(order)
                    order.append(key)
                    out.append(None)
                row.append(index[key])
            else:
                row.append(DEAD)
        out[i] = row
        i += 1
    acc = {i for i, key in enumerate(order) if key is not None and key[1] == 0 and key[0] in accepting}

    # does the regex DFA accept anything off the interleaving language?
    seen = {(0, 0)}
    stack = [(0, 0)]
    while stack and not leaks:
        q, p = stack.pop()
        if q in accepting and p != 0:
            leaks = True
            break
        for sid in range(nsym):
            if p == 2:
                np_ = 2
            elif (sid < n_actions) == (p == 0):
                np_ = 1 - p
            else:
                np_ = 2
            nxt = (delta[q][sid], np_)
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return out, acc, leaks


def hopcroft_minimize(delta: Sequence[Sequence[int]], accepting: set, start: int = 0):
    """Minimize a complete DFA. Unreachable states are dropped first.

    Returns (delta, accepting) renumbered canonically: breadth-first from the
    start state, symbols in id order.
    """
    nsym = len(delta[0])
    reach = [start]
    seen = {start}
    for q in reach:
        for r in delta[q]:
            if r not in seen:
                seen.add(r)
                reach.append(r)
    states = reach
    inverse: list[dict[int, list[int]]] = [dict() for _ in range(nsym)]
    for q in states:
        for sid in range(nsym):
            inverse[sid].setdefault(delta[q][sid], []).append(q)

    acc = frozenset(q for q in states if q in accepting)
    rej = frozenset(q for q in states if q not in accepting)
    partition = [b for b in (acc, rej) if b]
    block_of = {}
    for bi, b in enumerate(partition):
        for q in b:
            block_of[q] = bi
    work = deque()
    in_work = set()
    if len(partition) == 2:
        smaller = 0 if len(partition[0]) <= len(partition[1]) else 1
        for sid in range(nsym):
            work.append((smaller, sid))
            in_work.add((smaller, sid))
    while work:
        bi, sid = work.popleft()
        in_work.discard((bi, sid))
        splitter = partition[bi]
        preds = set()
        inv = inverse[sid]
        for r in splitter:
            preds.update(inv.get(r, ()))
        touched: dict[int, set] = {}
        for q in preds:
            touched.setdefault(block_of[q], set()).add(q)
        for yi, inside in touched.items():
            block = partition[yi]
            if len(inside) == len(block):
                continue
            outside = block - inside
            inside = frozenset(inside)
            partition[yi] = inside
            partition.append(outside)
            ni = len(partition) - 1
            for q in outside:
                block_of[q] = ni
            for s in range(nsym):
                if (yi, s) in in_work:
                    work.append((ni, s))
                    in_work.add((ni, s))
                else:
                    pick = yi if len(inside) <= len(outside) else ni
                    work.append((pick, s))
                    in_work.add((pick, s))

    # canonical renumbering
    rename = {block_of[start]: 0}
    order = [block_of[start]]
    rep = {bi: next(iter(b)) for bi, b in enumerate(partition)}
    for bi in order:
        q = rep[bi]
        for sid in range(nsym):
            t = block_of[delta[q][sid]]
            if t not in rename:
                rename[t] = len(order)
                order.append(t)
    new_delta = []
    for bi in order:
        q = rep[bi]
        new_delta.append(tuple(rename[block_of[delta[q][sid]]] for sid in range(nsym)))
    new_acc = frozenset(rename[block_of[q]] for q in acc)
    return tuple(new_delta), new_acc


@dataclass(frozen=True)
class Deontology:
    """Compiled Good-history language: a complete minimal DFA over X ∪ Y.

    ``delta[q][i]`` is the successor of state ``q`` on the symbol with id
    ``i`` (actions first, then percepts, in declaration order). ``parity[q]``
    is ``"b"`` for boundary states (even token count) and ``"m"`` for
    mid-cycle states; the dead state is marked ``"b"``.
    """

    alphabet: Alphabet
    delta: tuple[tuple[int, ...], ...]
    accepting: frozenset
    parity: tuple[str, ...]
    start: int = 0
    name: str = ""

    @property
    def action_order(self) -> tuple[str, ...]:
        return self.alphabet.actions

    @property
    def num_states(self) -> int:
        return len(self.delta)

    def step(self, q: int, symbol: str) -> int:
        return self.delta[q][self.alphabet.symbol_id(symbol)]

    def run(self, tokens: Iterable[str], q: int | None = None) -> int:
        ids = self.alphabet._ids
        delta = self.delta
        q = self.start if q is None else q
        for tok in tokens:
            try:
                q = delta[q][ids[tok]]
            except KeyError:
                raise UnknownSymbol(f"unknown symbol {tok!r}") from None
        return q

    def accepts(self, tokens: Iterable[str]) -> bool:
        return self.run(tokens) in self.accepting

    @cached_property
    def action_ids(self) -> tuple[int, ...]:
        return tuple(range(len(self.alphabet.actions)))

    @cached_property
    def percept_ids(self) -> tuple[int, ...]:
        n = len(self.alphabet.actions)
        return tuple(range(n, n + len(self.alphabet.percepts)))

    @cached_property
    def dead_states(self) -> frozenset:
        """States from which no accepting state is reachable."""
        preds: dict[int, set] = {}
        for q, row in enumerate(self.delta):
            for r in row:
                preds.setdefault(r, set()).add(q)
        live = set(self.accepting)
        stack = list(live)
        while stack:
            r = stack.pop()
            for q in preds.get(r, ()):
                if q not in live:
                    live.add(q)
                    stack.append(q)
        return frozenset(q for q in range(self.num_states) if q not in live)

    @cached_property
    def spec_hash(self) -> str:
        return hashlib.sha256(dump_automaton(self).encode()).hexdigest()[:16]


def compile_spec(doc: SpecDoc, max_states: int = DEFAULT_STATE_CAP) -> Deontology:
    return compile_regex(doc.good_regex, doc.alphabet, max_states=max_states, name=doc.name)


# `compile` per the build contract; the builtin name is shadowed only here.
compile = compile_spec


def compile_regex(regex: Regex, alphabet: Alphabet, max_states: int = DEFAULT_STATE_CAP,
                  name: str = "") -> Deontology:
    delta, accepting = _subset_construction(regex, alphabet, max_states)
    pdelta, pacc, leaks = _interleave_product(delta, accepting, len(alphabet.actions), max_states)
    if leaks:
        warnings.warn(
            f"good-regex of {name or 'spec'} matches non-interleaved strings; "
            "they are discarded",
            InterleavingWarning,
            stacklevel=3,
        )
    mdelta, macc = hopcroft_minimize(pdelta, pacc)
    return Deontology(alphabet, mdelta, macc, _parities(mdelta, macc, len(alphabet.actions)), 0, name)


def _parities(delta, accepting, n_actions) -> tuple[str, ...]:
    # live states have a unique parity; anything reached at both is dead
    seen = {(0, 0)}
    stack = [(0, 0)]
    while stack:
        q, p = stack.pop()
        for r in delta[q]:
            if (r, 1 - p) not in seen:
                seen.add((r, 1 - p))
                stack.append((r, 1 - p))
    return tuple(
        "m" if (q, 1) in seen and (q, 0) not in seen else "b" for q in range(len(delta))
    )


def compile_text(text: str, name: str = "", max_states: int = DEFAULT_STATE_CAP) -> Deontology:
    return compile_spec(parse_spec(text, name), max_states=max_states)


def membership(d: Deontology, h: History) -> bool:
    """Decide whether ``h`` is a Good history."""
    require_same_alphabet(d.alphabet, h.alphabet)
    return d.run(h.tokens) in d.accepting


def accepts_empty(d: Deontology) -> bool:
    return d.start in d.accepting


def minimize(d: Deontology) -> Deontology:
    mdelta, macc = hopcroft_minimize(d.delta, set(d.accepting), d.start)
    return Deontology(d.alphabet, mdelta, macc,
                      _parities(mdelta, macc, len(d.alphabet.actions)), 0, d.name)


# -- serialization -----------------------------------------------------------

_HEADER = "deon-dfa v1"


def dump_automaton(d: Deontology) -> str:
    a = d.alphabet
    lines = [
        _HEADER,
        "percepts: " + " ".join(a.percepts),
        "actions: " + " ".join(a.actions),
        f"states: {d.num_states}",
        f"start: {d.start}",
        "accept:" + "".join(f" {q}" for q in sorted(d.accepting)),
        "parity: " + " ".join(d.parity),
    ]
    for q, row in enumerate(d.delta):
        for sid, r in enumerate(row):
            lines.append(f"{q} {a.symbols[sid]} {r}")
    return "\n".join(lines) + "\n"


def load_automaton(text: str, name: str = "") -> Deontology:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if len(lines) < 7 or lines[0] != _HEADER:
        raise FormatError("missing 'deon-dfa v1' header or preamble")

    def field_(i, key):
        prefix = key + ":"
        if not lines[i].startswith(prefix):
            raise FormatError(f"line {i + 1}: expected '{prefix}'")
        return lines[i][len(prefix):].split()

    try:
        alphabet = Alphabet(tuple(field_(1, "percepts")), tuple(field_(2, "actions")))
        (n,) = map(int, field_(3, "states"))
        (start,) = map(int, field_(4, "start"))
        accept = frozenset(map(int, field_(5, "accept")))
        parity = tuple(field_(6, "parity"))
    except FormatError:
        raise
    except ValueError as exc:
        raise FormatError(f"bad preamble: {exc}") from None
    nsym = len(alphabet.symbols)
    if len(parity) != n or set(parity) - {"b", "m"}:
        raise FormatError("parity line must list one of b/m per state")
    if not (0 <= start < n) or any(not 0 <= q < n for q in accept):
        raise FormatError("state id out of range")
    table: list[list] = [[None] * nsym for _ in range(n)]
    for i, ln in enumerate(lines[7:], start=8):
        parts = ln.split()
        if len(parts) != 3:
            raise FormatError(f"line {i}: expected '<state> <symbol> <state>'")
        try:
            q, r = int(parts[0]), int(parts[2])
            sid = alphabet.symbol_id(parts[1])
        except (ValueError, UnknownSymbol) as exc:
            raise FormatError(f"line {i}: {exc}") from None
        if not (0 <= q < n and 0 <= r < n):
            raise FormatError(f"line {i}: state id out of range")
        if table[q][sid] is not None:
            raise FormatError(f"line {i}: duplicate transition")
        table[q][sid] = r
    if any(r is None for row in table for r in row):
        raise FormatError("transition table incomplete (truncated file?)")
    return Deontology(alphabet, tuple(tuple(row) for row in table), accept, parity, start, name)

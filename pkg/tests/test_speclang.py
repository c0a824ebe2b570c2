import random
import warnings

import pytest
from hypothesis import given, settings, strategies as st

from deon.core import make_alphabet, parse_history_text
from deon.errors import (
    AlphabetMismatch,
    DuplicateSection,
    FormatError,
    SpecSyntaxError,
    StateBlowup,
    UndeclaredSymbol,
)
from deon.fixtures import SPECS
from deon.speclang import (
    InterleavingWarning,
    accepts_empty,
    compile_spec,
    compile_text,
    dump_automaton,
    load_automaton,
    membership,
    minimize,
    parse_spec,
)
from oracles import RegexOracle, nerode_class_count, oracle_for, random_token_strings

NG_ALPHA = "percepts: ok err\nactions: noop move grab\n"


def ng_with(good):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return compile_text(NG_ALPHA + f"good: {good}\n")


def test_parse_spec_ng():
    doc = parse_spec(SPECS["SPEC_NG"])
    assert doc.alphabet.percepts == ("ok", "err")
    assert doc.alphabet.actions == ("noop", "move", "grab")


def test_parse_spec_comments_and_continuations():
    text = "# header\npercepts: ok err  # two\nactions: noop\n  move grab\ngood: ([noop move]\n   _p)*\n"
    doc = parse_spec(text)
    assert doc.alphabet.actions == ("noop", "move", "grab")
    assert membership(compile_spec(doc), parse_history_text("move err", doc.alphabet))


def test_unbalanced_parenthesis():
    with pytest.raises(SpecSyntaxError, match="unbalanced") as info:
        parse_spec("good: (noop ok")
    assert info.value.line == 1


def test_undeclared_symbol():
    with pytest.raises(UndeclaredSymbol):
        parse_spec(NG_ALPHA + "good: fly\n")


def test_duplicate_section():
    with pytest.raises(DuplicateSection):
        parse_spec(NG_ALPHA + "good: eps\ngood: %\n")


@pytest.mark.parametrize("good", ["", "noop |", "[ ]", "noop )", "* noop", "noop $"])
def test_syntax_errors(good):
    with pytest.raises(SpecSyntaxError):
        parse_spec(NG_ALPHA + f"good: {good}\n")


def test_syntax_error_column():
    with pytest.raises(SpecSyntaxError) as info:
        parse_spec(NG_ALPHA + "good: noop ok )\n")
    assert (info.value.line, info.value.column) == (3, 15)


@pytest.mark.parametrize("name,states", [("SPEC_NG", 3), ("SPEC_GUESS", 4)])
def test_state_counts_match_nerode_oracle(fixtures, name, states):
    d = fixtures[name]
    assert d.num_states == states
    assert nerode_class_count(oracle_for(name)) == states


def test_ng_state_shape(ng):
    assert ng.accepting == {0}
    assert sorted(ng.parity) == ["b", "b", "m"]


def test_eps_accepts_only_empty():
    d = ng_with("eps")
    assert accepts_empty(d)
    assert not membership(d, parse_history_text("noop ok", d.alphabet))
    assert d.num_states == 1 or d.num_states == 2


def test_accepts_empty(ng):
    assert accepts_empty(ng)
    assert not accepts_empty(ng_with("(noop ok)"))


def test_membership_rs(rs):
    a = rs.alphabet
    assert membership(rs, parse_history_text("go red stop green", a))
    assert not membership(rs, parse_history_text("go red go green", a))


def test_membership_empty(ng):
    assert membership(ng, parse_history_text("", ng.alphabet))


def test_membership_alphabet_mismatch(ng, rs):
    with pytest.raises(AlphabetMismatch):
        membership(ng, parse_history_text("go red", rs.alphabet))


def test_interleaving_warning():
    with pytest.warns(InterleavingWarning):
        compile_text(SPECS["SPEC_RS"])
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        compile_text(SPECS["SPEC_NG"])


def test_state_cap():
    with pytest.raises(StateBlowup):
        compile_text(SPECS["SPEC_NG"], max_states=2)


@pytest.mark.parametrize("name", sorted(SPECS))
def test_dump_load_round_trip(fixtures, name):
    d = fixtures[name]
    e = load_automaton(dump_automaton(d))
    assert e.delta == d.delta and e.accepting == d.accepting and e.parity == d.parity
    oracle = oracle_for(name)
    for toks in random_token_strings(oracle, 1000, seed=11):
        assert d.accepts(toks) == e.accepts(toks)


@pytest.mark.parametrize("cut", [1, 5, 8, -3])
def test_load_truncated(ng, cut):
    lines = dump_automaton(ng).splitlines()
    with pytest.raises(FormatError):
        load_automaton("\n".join(lines[:cut]))


def test_load_garbage():
    with pytest.raises(FormatError):
        load_automaton("hello\n")


@pytest.mark.parametrize("name", sorted(SPECS))
def test_membership_matches_regex_oracle(fixtures, name):
    d = fixtures[name]
    oracle = oracle_for(name)
    for toks in random_token_strings(oracle, 2000, seed=5):
        assert d.accepts(toks) == oracle.accepts(toks), toks


@pytest.mark.parametrize("name", sorted(SPECS))
def test_reminimize_is_stable(fixtures, name):
    d = fixtures[name]
    assert minimize(d).num_states == d.num_states


@pytest.mark.parametrize("name", sorted(SPECS))
def test_accepted_walks_are_interleaved(fixtures, name):
    d = fixtures[name]
    rng = random.Random(3)
    syms = d.alphabet.symbols
    for _ in range(300):
        q, toks = d.start, []
        for _ in range(rng.randint(0, 16)):
            s = rng.choice(syms)
            toks.append(s)
            q = d.step(q, s)
            if q in d.accepting:
                assert len(toks) % 2 == 0
                assert all(d.alphabet.is_action(t) == (i % 2 == 0) for i, t in enumerate(toks))
        if q in d.accepting:
            assert d.parity[q] == "b"


atoms = st.sampled_from(["noop", "move", "grab", "ok", "err", "_a", "_p", "_c", "%", "eps", "[noop ok]"])
regexes = st.recursive(
    atoms,
    lambda inner: st.one_of(
        st.tuples(inner, inner).map(lambda t: f"{t[0]} {t[1]}"),
        st.tuples(inner, inner).map(lambda t: f"({t[0]} | {t[1]})"),
        st.tuples(inner, st.sampled_from("*+?")).map(lambda t: f"({t[0]}){t[1]}"),
    ),
    max_leaves=8,
)


@settings(max_examples=150, deadline=None)
@given(regexes, st.integers(0, 2**32 - 1))
def test_random_regexes_match_oracle(good, seed):
    text = NG_ALPHA + f"good: {good}\n"
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        d = compile_text(text)
    oracle = RegexOracle(text)
    for toks in random_token_strings(oracle, 60, seed=seed, max_len=10):
        assert d.accepts(toks) == oracle.accepts(toks)
    assert minimize(d).num_states == d.num_states

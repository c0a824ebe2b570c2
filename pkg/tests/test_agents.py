import pytest

from deon.agents import (
    adversarial_env,
    bad_policy,
    good_policy,
    null_policy,
    random_env,
    random_policy,
    scripted_env,
    scripted_policy,
    shortest_violation,
    transducer_policy,
)
from deon.analyzer import Counterexample, Verified, check_viability, parse_transducer, verify_policy
from deon.core import History, empty_history, parse_history_text
from deon.errors import NotStronglyViable, PartialPolicy, TrivialDeontology, UnknownSymbol
from deon.fixtures import SPECS
from deon.speclang import compile_text
from oracles import brute_force_min_violation_cycles, oracle_for


def test_null_policy(ng):
    p = null_policy("noop", ng.alphabet)
    assert p.next_action(empty_history(ng.alphabet)) == "noop"
    h = parse_history_text(" ".join(["grab ok"] * 5), ng.alphabet)
    assert p.next_action(h) == "noop"
    assert isinstance(verify_policy(ng, p.as_transducer()), Verified)
    with pytest.raises(UnknownSymbol):
        null_policy("ok", ng.alphabet)


def stream(policy, alphabet, n):
    h = empty_history(alphabet)
    out = []
    for _ in range(n):
        a = policy.next_action(h)
        out.append(a)
        h = History._trusted(alphabet, h.tokens + (a, alphabet.percepts[0]))
    return out


def test_random_policy_determinism(ng):
    assert stream(random_policy(ng.alphabet, 7), ng.alphabet, 100) == stream(random_policy(ng.alphabet, 7), ng.alphabet, 100)
    assert stream(random_policy(ng.alphabet, 7), ng.alphabet, 10) != stream(random_policy(ng.alphabet, 8), ng.alphabet, 10)


def test_random_policy_uniform(ng):
    draws = stream(random_policy(ng.alphabet, 7), ng.alphabet, 10_000)
    for a in ng.alphabet.actions:
        assert abs(draws.count(a) / 10_000 - 1 / 3) <= 0.05 / 3


def test_random_env_determinism(ng):
    h = empty_history(ng.alphabet)
    e1, e2 = random_env(ng.alphabet, 3), random_env(ng.alphabet, 3)
    assert [e1.next_percept(h, "noop") for _ in range(100)] == [e2.next_percept(h, "noop") for _ in range(100)]


def test_good_policy(fixtures):
    rs = fixtures["SPEC_RS"]
    p = good_policy(rs)
    assert p.next_action(parse_history_text("go green", rs.alphabet)) == "go"
    assert p.next_action(parse_history_text("go red", rs.alphabet)) == "stop"
    assert good_policy(fixtures["SPEC_NG"]).next_action(empty_history(fixtures["SPEC_NG"].alphabet)) == "noop"
    with pytest.raises(NotStronglyViable):
        good_policy(fixtures["SPEC_GUESS"])


def test_good_policy_off_g_uses_first_action(fixtures):
    ng = fixtures["SPEC_NG"]
    assert good_policy(ng).next_action(parse_history_text("grab ok", ng.alphabet)) == "noop"


@pytest.mark.parametrize("name", ["SPEC_NG", "SPEC_RS", "SPEC_GAMBLE", "SPEC_DEBT", "SPEC_HOM"])
def test_good_policy_verifies(fixtures, name):
    d = fixtures[name]
    assert check_viability(d)[1].holds
    assert isinstance(verify_policy(d, good_policy(d).as_transducer()), Verified)


def test_bad_policy_examples(fixtures):
    ng, rs = fixtures["SPEC_NG"], fixtures["SPEC_RS"]
    p = bad_policy(ng)
    assert (p.route, p.violation) == ((), "grab")
    p = bad_policy(rs)
    assert (p.route, p.violation) == ((("go", "red"),), "go")
    assert p.next_action(empty_history(rs.alphabet)) == "go"
    assert p.next_action(parse_history_text("go red", rs.alphabet)) == "go"


@pytest.mark.parametrize("name", sorted(SPECS))
def test_bad_policy_refuted_minimally(fixtures, name):
    d = fixtures[name]
    p = bad_policy(d)
    verdict = verify_policy(d, p.as_transducer())
    assert isinstance(verdict, Counterexample)
    assert verdict.cycle == len(p.route) + 1 == brute_force_min_violation_cycles(oracle_for(name))


def test_bad_policy_trivial():
    with pytest.raises(TrivialDeontology):
        bad_policy(compile_text("percepts: ok\nactions: noop\ngood: %\n"))


def test_transducer_policy(ng):
    t = parse_transducer("start: a\nemit: a noop\nemit: b grab\non: a ok -> a\non: a err -> b\non: b ok -> a\non: b err -> b\n")
    p = transducer_policy(t, ng.alphabet)
    assert p.next_action(empty_history(ng.alphabet)) == "noop"
    assert p.next_action(parse_history_text("noop err", ng.alphabet)) == "grab"
    assert p.next_action(parse_history_text("noop err grab ok", ng.alphabet)) == "noop"
    # non-extending history resets the tracker
    assert p.next_action(parse_history_text("noop err", ng.alphabet)) == "grab"
    with pytest.raises(PartialPolicy):
        transducer_policy(parse_transducer("start: a\nemit: a noop\non: a ok -> a\n"), ng.alphabet)


def test_scripted_env(rs):
    e = scripted_env(["red", "green"], rs.alphabet)
    h = empty_history(rs.alphabet)
    out = []
    for _ in range(5):
        x = e.next_percept(h, "go")
        out.append(x)
        h = History(rs.alphabet, h.tokens + ("go", x))
    assert out == ["red", "green", "green", "green", "green"]


def test_adversarial_env(fixtures):
    guess, ng = fixtures["SPEC_GUESS"], fixtures["SPEC_NG"]
    assert adversarial_env(guess).next_percept(empty_history(guess.alphabet), "a") == "pb"
    assert adversarial_env(guess).next_percept(empty_history(guess.alphabet), "b") == "pa"
    assert adversarial_env(ng).next_percept(empty_history(ng.alphabet), "noop") == "ok"


def test_adversary_defeats_fixed_policies(guess):
    for a in guess.alphabet.actions:
        p = scripted_policy([a], guess.alphabet)
        e = adversarial_env(guess)
        h = empty_history(guess.alphabet)
        y = p.next_action(h)
        x = e.next_percept(h, y)
        assert not guess.accepts((y, x))


def test_shortest_violation_none_for_full():
    d = compile_text("percepts: ok\nactions: noop\ngood: %\n")
    assert shortest_violation(d) is None

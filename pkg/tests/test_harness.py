import pytest

from deon.agents import adversarial_env, random_env, random_policy, scripted_env, scripted_policy
from deon.analyzer import Classification, classify_history
from deon.core import empty_history, parse_history_text
from deon.errors import MappingIncomplete, NotGovernable
from deon.governor import GovernorConfig
from deon.harness import check_run, homunculus_demo, simulate, violate_at_mapping

G, A, D = Classification.GOOD, Classification.AMENDABLE, Classification.DEAD


def test_governed_random_run_stays_good(ng):
    r = simulate(ng, random_policy(ng.alphabet, 7), random_env(ng.alphabet, 3), 1000, governed=True)
    assert r.first_violation_cycle is None
    assert r.cycles == 1000 and set(r.classifications) == {G}
    for k in (0, 1, 17, 500, 1000):
        assert ng.accepts(r.history.prefix(k).tokens)


def test_scripted_violation(ng):
    p = scripted_policy(["noop"] * 4 + ["grab", "noop"], ng.alphabet)
    r = simulate(ng, p, random_env(ng.alphabet, 3), 10)
    assert r.first_violation_cycle == 5
    assert r.cycles == 10  # ungoverned runs continue past the violation


def test_adversary_violates_first_cycle(guess):
    r = simulate(guess, random_policy(guess.alphabet, 1), adversarial_env(guess), 10)
    assert r.first_violation_cycle == 1


def test_governed_guess_not_governable(guess):
    with pytest.raises(NotGovernable):
        simulate(guess, random_policy(guess.alphabet, 1), adversarial_env(guess), 10,
                 governed=True, cfg=GovernorConfig(foresight=True))


def test_permissive_refusal_stops_run(guess):
    r = simulate(guess, random_policy(guess.alphabet, 1), adversarial_env(guess), 10,
                 governed=True, cfg=GovernorConfig(mode="permissive"))
    assert r.cycles == 0 and r.verdicts[0].reason == "NoSafeAction"


def test_check_run(fixtures):
    ng, debt = fixtures["SPEC_NG"], fixtures["SPEC_DEBT"]
    assert check_run(ng, parse_history_text("noop ok grab err", ng.alphabet)) == [G, D]
    assert check_run(debt, parse_history_text("borrow tick repay tick", debt.alphabet)) == [A, G]
    assert check_run(ng, empty_history(ng.alphabet)) == []


def test_check_run_agrees_with_classify(rs):
    r = simulate(rs, random_policy(rs.alphabet, 2), random_env(rs.alphabet, 9), 60)
    h = r.history
    assert r.classifications == [classify_history(rs, h.prefix(k)) for k in range(1, h.cycle_count + 1)]


def test_record_replay(rs):
    def run():
        return simulate(rs, random_policy(rs.alphabet, 11), random_env(rs.alphabet, 12), 200, governed=True)

    a, b = run(), run()
    assert a.to_dict() == b.to_dict()
    c = simulate(rs, random_policy(rs.alphabet, a.policy_seed), random_env(rs.alphabet, a.env_seed), 200, governed=True)
    assert c.history == a.history


def test_record_dict_fields(ng):
    r = simulate(ng, random_policy(ng.alphabet, 1), random_env(ng.alphabet, 2), 3, governed=True)
    d = r.to_dict()
    assert set(d) >= {"spec_hash", "policy", "env", "governed", "cycles", "history", "verdicts",
                      "classifications", "first_violation_cycle"}
    assert len(d["verdicts"]) == 3


def test_homunculus(ng):
    rep = homunculus_demo(ng, violate_at_mapping("noop", "grab", 3), 10)
    assert rep.inner_compliance == 1.0
    assert rep.outer_compliance_cycle == 3
    assert set(rep.inner_history.actions) == {"G"}

    rep = homunculus_demo(ng, lambda intent, k: "noop", 10)
    assert rep.inner_compliance == 1.0 and rep.outer_compliance_cycle is None

    rep = homunculus_demo(ng, violate_at_mapping("noop", "grab", 1), 10)
    assert rep.outer_compliance_cycle == 1


def test_homunculus_with_random_env(ng):
    rep = homunculus_demo(ng, violate_at_mapping("noop", "grab", 4), 20, env=random_env(ng.alphabet, 5))
    assert rep.inner_compliance == 1.0 and rep.outer_compliance_cycle == 4
    assert rep.inner_history.percepts == rep.outer_history.percepts


def test_homunculus_mapping_incomplete(ng):
    with pytest.raises(MappingIncomplete):
        homunculus_demo(ng, {("G", 1): "noop"}, 3)
    with pytest.raises(MappingIncomplete):
        homunculus_demo(ng, lambda i, k: "fly", 3)

import os

import pytest
from hypothesis import given, settings

from epitrack.core.certainty import (
    BeliefState,
    attains_certainty,
    belief_run,
    build_certainty_automaton,
    certainty_flags,
    certainty_gaps,
    certainty_period,
    decide_recurring_certainty,
)
from epitrack.core.game import (
    AGENT_ZERO,
    History,
    cycles_through_perfect_information,
    is_history,
    observe,
)
from epitrack.core.pair_automaton import (
    PairAutomaton,
    cross_check_pair_automaton,
    determinise_complement,
)
from epitrack.utils.error_utils import EpitrackError, ErrorType
from tests.conftest import games_with_informed_returns, random_games

ORACLE_EXAMPLES = int(os.getenv("ORACLE_EXAMPLES", "200"))
ORACLE_DEPTH = int(os.getenv("ORACLE_DEPTH", "6"))


# ---------- belief tracking ----------

def test_belief_run_e2(games):
    g = games["E2"]
    beliefs = belief_run(g, [("s0",), ("u1", "u2"), ("s0",)])
    assert beliefs == [frozenset({"s0"}), frozenset({"u1", "u2"}), frozenset({"s0"})]


def test_belief_run_rejects_unrealisable_observations(games):
    g = games["E2"]
    with pytest.raises(EpitrackError) as exc:
        belief_run(g, [("s0",), ("s0",)])
    assert exc.value.type == ErrorType.UNREALISABLE_OBSERVATIONS
    assert exc.value.detail == {"index": 1}

    with pytest.raises(EpitrackError) as exc:
        belief_run(g, [("u1", "u2")])
    assert exc.value.detail == {"index": 0}


def test_attains_certainty_examples(games):
    g = games["E2"]
    assert attains_certainty(g, History.start("s0"))
    assert not attains_certainty(g, History(("s0", "u1"), (("a", "a"),)))
    assert attains_certainty(g, History(("s0", "u2", "s0"), (("a", "a"), ("a", "a"))))


def test_attains_certainty_rejects_non_history(games):
    with pytest.raises(EpitrackError) as exc:
        attains_certainty(games["E2"], History(("s0", "s0"), (("a", "a"),)))
    assert exc.value.type == ErrorType.INVALID_HISTORY


def test_certainty_gaps():
    assert certainty_gaps([True, False, False, True, True, False]) == ([0, 2, 0], 1)
    assert certainty_gaps([]) == ([], 0)


# ---------- automaton, verdicts, periods ----------

@pytest.mark.parametrize(
    "name,states,bound,period",
    [("E1", 2, 3, 0), ("E2", 3, 4, 1), ("E4", 5, 6, 1), ("E5", 9, 10, 2)],
)
def test_recurring_fixtures(games, name, states, bound, period):
    verdict = decide_recurring_certainty(games[name])
    assert verdict.recurring
    assert verdict.automaton_states == states
    assert verdict.state_bound == bound
    assert verdict.minimal_period == period
    assert verdict.witness is None
    assert certainty_period(games[name]) == (period, bound)


def test_e2_automaton_states(games):
    automaton = build_certainty_automaton(games["E2"])
    assert automaton.initial == BeliefState.of("s0", ["s0"])
    assert set(automaton.states) == {
        BeliefState.of("s0", ["s0"]),
        BeliefState.of("u1", ["u1", "u2"]),
        BeliefState.of("u2", ["u1", "u2"]),
    }
    assert automaton.accepting == frozenset({BeliefState.of("s0", ["s0"])})


def test_eternal_fog_has_no_recurring_certainty(games):
    verdict = decide_recurring_certainty(games["E3"])
    assert not verdict.recurring
    assert verdict.automaton_states == 3
    assert verdict.minimal_period is None
    assert verdict.witness.prefix.states == ("s0", "u1")
    assert verdict.witness.cycle.states == ("u1", "u1")


def test_certainty_period_fails_without_recurrence(games):
    with pytest.raises(EpitrackError) as exc:
        certainty_period(games["E3"])
    assert exc.value.type == ErrorType.NOT_RECURRING
    assert exc.value.detail["witness"]["cycle"]["states"] == ["u1", "u1"]


@pytest.mark.parametrize("name,period", [("E1", 0), ("E2", 1), ("E4", 1), ("E5", 2)])
def test_period_is_attained(games, name, period):
    g = games[name]
    _, bound = certainty_period(g)
    longest = max(max(runs.values()) for _, runs in _agent_zero_layers(g, 2 * bound))
    assert longest == period
    assert period <= bound


# ---------- oracle properties ----------

def _agent_zero_layers(g, depth):
    """Round by round, every agent-0 observation sequence with the states it can end in.

    Histories with the same agent-0 sequence and end state have the same
    future, so one representative history per pair stands for all of them.
    Also yields the current uncertain run of each sequence.
    """
    class_of = g.partition.class_of
    layer = {(class_of[g.initial_state],): {g.initial_state: History.start(g.initial_state)}}
    runs = {seq: 0 if len(ends) == 1 else 1 for seq, ends in layer.items()}
    yield layer, runs
    for _ in range(depth):
        following: dict[tuple, dict[str, History]] = {}
        for seq, ends in layer.items():
            for state, h in ends.items():
                for profile, target in g.moves_from(state):
                    following.setdefault(seq + (class_of[target],), {}).setdefault(target, h.extend(profile, target))
        runs = {seq: 0 if len(ends) == 1 else runs[seq[:-1]] + 1 for seq, ends in following.items()}
        layer = following
        yield layer, runs


@pytest.mark.oracle
@settings(max_examples=ORACLE_EXAMPLES, deadline=None)
@given(random_games())
def test_attains_certainty_matches_definition(g):
    for layer, _ in _agent_zero_layers(g, ORACLE_DEPTH):
        for seq, ends in layer.items():
            for state, h in ends.items():
                assert observe(g, h, AGENT_ZERO) == seq
                assert attains_certainty(g, h) == (set(ends) == {state})


@pytest.mark.oracle
@settings(max_examples=ORACLE_EXAMPLES, deadline=None)
@given(random_games())
def test_witness_stays_uncertain(g):
    verdict = decide_recurring_certainty(g)
    if verdict.recurring:
        return
    lasso = verdict.witness
    unrolled = lasso.unroll(-(-2 * verdict.state_bound // lasso.cycle.rounds))
    assert unrolled.rounds >= 2 * verdict.state_bound
    assert is_history(g, unrolled)
    flags = certainty_flags(g, unrolled)
    assert not any(flags[lasso.prefix.rounds:])


@pytest.mark.oracle
@settings(max_examples=ORACLE_EXAMPLES, deadline=None)
@given(random_games())
def test_period_bounds_every_uncertain_run(g):
    verdict = decide_recurring_certainty(g)
    if not verdict.recurring:
        return
    assert verdict.minimal_period <= verdict.state_bound
    for _, runs in _agent_zero_layers(g, ORACLE_DEPTH):
        assert max(runs.values()) <= verdict.minimal_period


@settings(max_examples=ORACLE_EXAMPLES, deadline=None)
@given(random_games())
def test_sufficient_condition_implies_recurrence(g):
    if cycles_through_perfect_information(g):
        assert decide_recurring_certainty(g).recurring


@settings(max_examples=ORACLE_EXAMPLES, deadline=None)
@given(games_with_informed_returns())
def test_informed_returns_are_recurring(g):
    assert cycles_through_perfect_information(g)
    assert decide_recurring_certainty(g).recurring


# ---------- pair automaton cross-check ----------

@pytest.mark.parametrize("name", ["E1", "E2", "E3", "E4", "E5"])
def test_pair_automaton_agrees_on_fixtures(games, name):
    check = cross_check_pair_automaton(games[name])
    assert check.explored >= 1
    assert check.mismatches == ()


@settings(max_examples=ORACLE_EXAMPLES, deadline=None)
@given(random_games())
def test_pair_automaton_agrees_on_random_games(g):
    assert cross_check_pair_automaton(g).mismatches == ()


def test_strict_reading_matches_on_fully_observed_game(games):
    # every player sees every state of E1, so both readings coincide
    assert cross_check_pair_automaton(games["E1"], strict=True).mismatches == ()


def test_strict_reading_disagrees_on_e5(games):
    # player 2 tells every state apart, so the strict reading is always certain
    check = cross_check_pair_automaton(games["E5"], strict=True)
    uncertain = {belief.current for belief, _ in check.mismatches}
    assert uncertain == {"x1", "x2", "m1a", "m1b", "m2a", "m2b"}


def test_determinised_pair_automaton_e2(games):
    nfa = PairAutomaton(games["E2"])
    dfa = determinise_complement(nfa)
    assert dfa.accepts(dfa.initial)
    after = dfa.step(dfa.initial, (("a", "a"), "u1"))
    assert after == frozenset({("u1", "u1"), ("u1", "u2")})
    assert not dfa.accepts(after)

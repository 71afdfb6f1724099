import os

import pytest
from hypothesis import given, settings

from epitrack.core.game import (
    AGENT_ZERO,
    GameStructure,
    History,
    LassoPlay,
    agent0_partition,
    check_history,
    cycles_through_perfect_information,
    enumerate_histories,
    indistinguishable,
    is_history,
    observe,
    own_actions,
    perfect_information_states,
)
from epitrack.utils.error_utils import EpitrackError, ErrorType
from epitrack.utils.validators import validate_structure
from tests.conftest import random_games

ORACLE_EXAMPLES = int(os.getenv("ORACLE_EXAMPLES", "50"))
VIEW_DEPTH = int(os.getenv("VIEW_DEPTH", "3"))


def _without_move(g: GameStructure, move) -> GameStructure:
    return GameStructure.create(
        states=g.states,
        initial_state=g.initial_state,
        players=g.players,
        actions=g.actions,
        observations=g.observations,
        moves=[m for m in g.moves if m != move],
        colours=g.colours,
        name=g.name,
    )


def _recoloured(g: GameStructure, **colours) -> GameStructure:
    return GameStructure.create(
        states=g.states,
        initial_state=g.initial_state,
        players=g.players,
        actions=g.actions,
        observations=g.observations,
        moves=g.moves,
        colours={**g.colours, **colours},
        name=g.name,
    )


# ---------- validate_structure ----------

@pytest.mark.parametrize("name", ["E1", "E2", "E3", "E4", "E5"])
def test_fixtures_are_valid(games, name):
    assert validate_structure(games[name]) == []


def test_missing_move_is_a_totality_violation(games):
    g = _without_move(games["E1"], ("s0", ("a",), "s1"))
    violations = validate_structure(g)
    assert [(v.kind, v.location) for v in violations] == [("totality", ("s0", ("a",)))]


def test_confused_colours_are_an_observability_violation(games):
    g = _recoloured(games["E2"], u1="red", u2="blue")
    violations = validate_structure(g)
    assert [v.kind for v in violations] == ["observability"]
    assert violations[0].location == ("1", "u1", "u2")
    assert violations[0].message == "observability violation for player 1 at (u1, u2)"


def test_unknown_endpoint_and_foreign_action_are_reported(games):
    g = games["E1"]
    broken = GameStructure.create(
        states=g.states,
        initial_state="s9",
        players=g.players,
        actions=g.actions,
        observations=g.observations,
        moves=[*g.moves, ("s0", ("c",), "s7")],
        colours=g.colours,
    )
    kinds = {v.kind for v in validate_structure(broken)}
    assert {"initial", "endpoint", "action"} <= kinds


def test_reserved_agent_zero_id_is_rejected():
    g = GameStructure.create(
        states=["s"],
        initial_state="s",
        players=[AGENT_ZERO],
        actions={AGENT_ZERO: ["a"]},
        observations={AGENT_ZERO: {"s": "s"}},
        moves=[("s", ("a",), "s")],
        colours={"s": "0"},
    )
    assert any(v.kind == "players" for v in validate_structure(g))


def test_single_state_game_is_valid():
    g = GameStructure.create(
        states=["s"],
        initial_state="s",
        players=["1"],
        actions={"1": ["a"]},
        observations={"1": {"s": "s"}},
        moves=[("s", ("a",), "s")],
        colours={"s": "0"},
    )
    assert validate_structure(g) == []


# ---------- observe / indistinguishable ----------

def test_observe_examples(games):
    g = games["E2"]
    h = History.start("s0")
    assert observe(g, h, "1") == ("S",)
    h1 = h.extend(("a", "a"), "u1")
    assert observe(g, h1, "1") == ("S", "U")
    assert observe(g, h1, AGENT_ZERO) == (("s0",), ("u1", "u2"))


def test_observe_rejects_unknown_agent(games):
    with pytest.raises(EpitrackError) as exc:
        observe(games["E2"], History.start("s0"), "7")
    assert exc.value.type == ErrorType.UNKNOWN_AGENT


def test_indistinguishable_examples(games):
    g = games["E2"]
    h1 = History(("s0", "u1"), (("a", "a"),))
    h2 = History(("s0", "u2"), (("a", "a"),))
    assert indistinguishable(g, h1, h2, "1")
    assert not indistinguishable(g, h1, h2, "2")
    assert indistinguishable(g, h1, h1, "2")
    assert indistinguishable(g, h1, h2, AGENT_ZERO)


def test_own_action_is_part_of_the_observation(games):
    g = games["E4"]
    h1 = History(("s0", "x1", "t"), (("a", "a"), ("a", "a")))
    h2 = History(("s0", "x1", "t"), (("b", "a"), ("a", "a")))
    assert not indistinguishable(g, h1, h2, "1")
    # agent 0 sees no actions
    assert indistinguishable(g, h1, h2, AGENT_ZERO)


def test_observe_is_prefix_monotone(games):
    g = games["E5"]
    for h in enumerate_histories(g, 4):
        full = observe(g, h, "1")
        for k, prefix in enumerate(h.prefixes()):
            assert observe(g, prefix, "1") == full[: k + 1]


# ---------- agent 0 ----------

def test_agent0_partition_examples(games):
    assert all(len(c) == 1 for c in games["E1"].partition.classes)
    assert games["E2"].partition.classes == [("s0",), ("u1", "u2")]


def test_agent0_partition_is_transitive():
    g = GameStructure.create(
        states=["p", "q", "r"],
        initial_state="p",
        players=["1", "2"],
        actions={"1": ["a"], "2": ["a"]},
        observations={"1": {"p": "x", "q": "x", "r": "y"}, "2": {"p": "u", "q": "v", "r": "v"}},
        moves=[(s, ("a", "a"), "p") for s in "pqr"],
        colours={s: "0" for s in "pqr"},
    )
    assert agent0_partition(g).classes == [("p", "q", "r")]


def test_agent0_partition_is_idempotent(games):
    g = games["E5"]
    coarse = GameStructure.create(
        states=g.states,
        initial_state=g.initial_state,
        players=["1"],
        actions={"1": ["a"]},
        observations={"1": {s: "|".join(g.partition.class_of[s]) for s in g.states}},
        moves=[(s, ("a",), d) for s, _, d in g.moves],
        colours=g.colours,
    )
    assert agent0_partition(coarse).class_of == g.partition.class_of


@settings(max_examples=ORACLE_EXAMPLES, deadline=None)
@given(random_games(max_states=4))
def test_player_confusion_implies_agent_zero_confusion(g):
    for rounds in range(VIEW_DEPTH + 1):
        histories = list(enumerate_histories(g, rounds))
        for player in g.players:
            # group by what the player sees; every group must look alike to agent 0
            views: dict[tuple, list[History]] = {}
            for h in histories:
                views.setdefault((observe(g, h, player), own_actions(g, h, player)), []).append(h)
            for group in views.values():
                first = group[0]
                for h in group[1:]:
                    assert indistinguishable(g, first, h, player)
                    assert indistinguishable(g, first, h, AGENT_ZERO)


@settings(max_examples=ORACLE_EXAMPLES, deadline=None)
@given(random_games())
def test_random_games_are_total(g):
    assert not [v for v in validate_structure(g) if v.kind == "totality"]
    for state in g.states:
        for profile in g.profiles:
            assert g.successors(state, profile)


# ---------- histories and lassos ----------

def test_history_checks(games):
    g = games["E2"]
    assert is_history(g, History(("s0", "u1", "s0"), (("a", "a"), ("a", "a"))))
    assert not is_history(g, History(("s0", "s0"), (("a", "a"),)))
    with pytest.raises(EpitrackError) as exc:
        check_history(g, History(("u1",), ()))
    assert exc.value.type == ErrorType.INVALID_HISTORY


def test_history_length_mismatch_is_rejected():
    with pytest.raises(EpitrackError):
        History(("s0", "s1"), ())


def test_lasso_unroll():
    prefix = History(("s0", "u1"), (("a",),))
    cycle = History(("u1", "u1"), (("a",),))
    lasso = LassoPlay(prefix=prefix, cycle=cycle)
    assert lasso.unroll(3).states == ("s0", "u1", "u1", "u1", "u1")


def test_lasso_cycle_must_close():
    with pytest.raises(EpitrackError):
        LassoPlay(prefix=History(("s0",)), cycle=History(("s0", "s1"), (("a",),)))


def test_perfect_information_states(games):
    assert perfect_information_states(games["E2"]) == {"s0"}
    assert cycles_through_perfect_information(games["E2"])
    assert not cycles_through_perfect_information(games["E3"])

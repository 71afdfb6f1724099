import itertools
import os

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from epitrack.core import parity
from epitrack.core.parity import (
    COALITION,
    NATURE,
    ParityGame,
    attractor,
    dominant_cycle,
    solve_parity,
)
from epitrack.utils.error_utils import EpitrackError, ErrorType

ORACLE_EXAMPLES = int(os.getenv("PARITY_EXAMPLES", "500"))


def _game(nodes, edges, initial=0) -> ParityGame:
    graph = nx.DiGraph()
    for node, (owner, priority) in nodes.items():
        graph.add_node(node, owner=owner, priority=priority)
    graph.add_edges_from(edges)
    return ParityGame(graph=graph, initial=initial)


@st.composite
def parity_games(draw, max_nodes: int = 7):
    n = draw(st.integers(min_value=1, max_value=max_nodes))
    nodes = {
        i: (draw(st.sampled_from([COALITION, NATURE])), draw(st.integers(min_value=0, max_value=3)))
        for i in range(n)
    }
    edges = []
    for i in range(n):
        targets = draw(st.sets(st.integers(min_value=0, max_value=n - 1), min_size=1, max_size=2))
        edges += [(i, t) for t in sorted(targets)]
    return _game(nodes, edges)


def _coalition_wins_positional(pg: ParityGame) -> set:
    """Brute force over positional strategy pairs."""
    nodes = list(pg.graph)
    mine = [n for n in nodes if pg.owner(n) == COALITION]
    theirs = [n for n in nodes if pg.owner(n) == NATURE]

    def wins(choice: dict, start) -> bool:
        seen: dict = {}
        path = []
        node = start
        while node not in seen:
            seen[node] = len(path)
            path.append(node)
            node = choice[node]
        return min(pg.priority(n) for n in path[seen[node]:]) % 2 == 0

    won: set = set()
    for ours in itertools.product(*(pg.successors(n) for n in mine)):
        sigma0 = dict(zip(mine, ours))
        remaining = set(nodes) - won
        for answer in itertools.product(*(pg.successors(n) for n in theirs)):
            choice = {**sigma0, **dict(zip(theirs, answer))}
            remaining = {v for v in remaining if wins(choice, v)}
            if not remaining:
                break
        won |= remaining
    return won


# ---------- examples ----------

@pytest.mark.parametrize("priority,winner", [(0, COALITION), (1, NATURE), (2, COALITION), (3, NATURE)])
def test_self_loop(priority, winner):
    pg = _game({0: (COALITION, priority)}, [(0, 0)])
    solution = solve_parity(pg)
    assert solution.winner(0) == winner


def test_coalition_escapes_to_even_loop():
    pg = _game({0: (COALITION, 1), 1: (NATURE, 0)}, [(0, 0), (0, 1), (1, 1)])
    solution = solve_parity(pg)
    assert solution.coalition == frozenset({0, 1})
    assert solution.coalition_strategy[0] == 1


def test_nature_keeps_play_on_odd_loop():
    pg = _game({0: (NATURE, 1), 1: (COALITION, 0)}, [(0, 0), (0, 1), (1, 1)])
    solution = solve_parity(pg)
    assert solution.winner(0) == NATURE
    assert solution.winner(1) == COALITION
    assert solution.nature_strategy[0] == 0


def test_least_priority_decides():
    # 0 -> 1 -> 0 sees 1 and 2 forever; 1 is least
    pg = _game({0: (COALITION, 1), 1: (COALITION, 2)}, [(0, 1), (1, 0)])
    assert solve_parity(pg).nature == frozenset({0, 1})


def test_dead_end_is_rejected():
    with pytest.raises(EpitrackError) as exc:
        _game({0: (COALITION, 0), 1: (NATURE, 1)}, [(0, 1)])
    assert exc.value.type == ErrorType.INVALID_STRUCTURE


def test_attractor_layers():
    pg = _game(
        {0: (COALITION, 1), 1: (NATURE, 1), 2: (NATURE, 0), 3: (COALITION, 1)},
        [(0, 2), (0, 3), (1, 2), (1, 3), (2, 2), (3, 3)],
    )
    attracted, strategy = attractor(pg, frozenset(pg.graph), {2}, COALITION)
    assert attracted == {0, 2}
    assert strategy == {0: 2}
    attracted, strategy = attractor(pg, frozenset(pg.graph), {2, 3}, COALITION)
    assert attracted == {0, 1, 2, 3}
    assert strategy[0] == 2


def test_dominant_cycle():
    graph = nx.DiGraph([(0, 1), (1, 0)])
    priority = {0: 1, 1: 2}.__getitem__
    assert dominant_cycle(graph, priority, 1) == (1, [0, 1, 0])
    assert dominant_cycle(graph, priority, 0) is None
    assert dominant_cycle(nx.DiGraph([(0, 0)]), {0: 4}.__getitem__, 0) == (4, [0, 0])


# ---------- oracle ----------

@pytest.mark.oracle
@settings(max_examples=ORACLE_EXAMPLES, deadline=None)
@given(parity_games())
def test_solver_matches_positional_brute_force(pg):
    solution = solve_parity(pg)
    assert solution.coalition | solution.nature == frozenset(pg.graph)
    assert not solution.coalition & solution.nature
    assert set(solution.coalition) == _coalition_wins_positional(pg)
    for node in solution.coalition:
        if pg.owner(node) == COALITION:
            assert solution.coalition_strategy[node] in pg.successors(node)


def test_broken_solution_is_a_fault(monkeypatch):
    # hand every node to nature without a strategy
    monkeypatch.setattr(parity, "_zielonka", lambda pg, nodes, depth=0: ([set(), set(nodes)], [{}, {}]))
    pg = _game({0: (NATURE, 0)}, [(0, 0)])
    with pytest.raises(EpitrackError) as exc:
        solve_parity(pg)
    assert exc.value.type == ErrorType.INTERNAL_INVARIANT

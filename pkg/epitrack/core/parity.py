"""Parity games under the min-even convention and their solver.

A play is won by the coalition (owner 0) iff the least priority seen
infinitely often is even. Solving uses recursive attractor decomposition;
attractors are computed layer by layer so the extracted positional
strategies are reproducible.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Hashable, Iterable

import networkx as nx

from epitrack.utils.error_utils import raise_error, ErrorType

logger = logging.getLogger(__name__)

COALITION = 0
NATURE = 1

Node = Hashable


@dataclass(frozen=True)
class ParityGame:
    """Node attributes: `owner` (0 coalition, 1 nature) and `priority`."""

    graph: nx.DiGraph = field(compare=False)
    initial: Node

    def __post_init__(self):
        dead_ends = [n for n in self.graph if self.graph.out_degree(n) == 0]
        if dead_ends:
            raise_error(ErrorType.INVALID_STRUCTURE, detail={"dead_ends": [repr(n) for n in dead_ends[:10]]})

    def owner(self, node: Node) -> int:
        return self.graph.nodes[node]["owner"]

    def priority(self, node: Node) -> int:
        return self.graph.nodes[node]["priority"]

    @cached_property
    def _order(self) -> dict[Node, int]:
        return {n: i for i, n in enumerate(self.graph.nodes)}

    def order(self, node: Node) -> int:
        # insertion order of the graph
        return self._order[node]

    def successors(self, node: Node, within: Iterable[Node] | None = None) -> list[Node]:
        succ = list(self.graph.successors(node))
        if within is None:
            return succ
        return [s for s in succ if s in within]

    def __len__(self) -> int:
        return self.graph.number_of_nodes()


@dataclass(frozen=True)
class ParitySolution:
    coalition: frozenset
    nature: frozenset
    coalition_strategy: dict = field(compare=False)
    nature_strategy: dict = field(compare=False)

    def winner(self, node: Node) -> int:
        return COALITION if node in self.coalition else NATURE

    def strategy(self, player: int) -> dict:
        return self.coalition_strategy if player == COALITION else self.nature_strategy


def attractor(
    pg: ParityGame,
    nodes: frozenset,
    target: Iterable[Node],
    player: int,
) -> tuple[set, dict]:
    """Attractor of `target` for `player` inside the subgame on `nodes`.

    Player-owned nodes are sent to the first successor, in adjacency order,
    already attracted when the node joins.
    """
    attracted = set(target) & nodes
    strategy: dict = {}
    layer = set(attracted)
    while layer:
        candidates = sorted(
            {p for n in layer for p in pg.graph.predecessors(n) if p in nodes and p not in attracted},
            key=pg.order,
        )
        joined = []
        for node in candidates:
            succ = pg.successors(node, nodes)
            if pg.owner(node) == player:
                strategy[node] = next(s for s in succ if s in attracted)
                joined.append(node)
            elif all(s in attracted for s in succ):
                joined.append(node)
        attracted.update(joined)
        layer = set(joined)
    return attracted, strategy


def _zielonka(pg: ParityGame, nodes: frozenset, depth: int = 0) -> tuple[list[set], list[dict]]:
    if not nodes:
        return [set(), set()], [{}, {}]

    least = min(pg.priority(n) for n in nodes)
    alpha = least % 2
    top = {n for n in nodes if pg.priority(n) == least}
    logger.debug("%ssubgame of %d nodes, least priority %d", "  " * depth, len(nodes), least)

    attracted, attr_strategy = attractor(pg, nodes, top, alpha)
    sub_regions, sub_strategies = _zielonka(pg, nodes - frozenset(attracted), depth + 1)

    if not sub_regions[1 - alpha]:
        regions = [set(), set()]
        strategies: list[dict] = [{}, {}]
        regions[alpha] = set(nodes)
        strategies[alpha] = {**sub_strategies[alpha], **attr_strategy}
        for node in sorted(top, key=pg.order):
            if pg.owner(node) == alpha:
                strategies[alpha][node] = pg.successors(node, nodes)[0]
        return regions, strategies

    lost, lost_strategy = attractor(pg, nodes, sub_regions[1 - alpha], 1 - alpha)
    rest_regions, rest_strategies = _zielonka(pg, nodes - frozenset(lost), depth + 1)

    regions = [set(), set()]
    strategies = [{}, {}]
    regions[alpha] = rest_regions[alpha]
    strategies[alpha] = rest_strategies[alpha]
    regions[1 - alpha] = rest_regions[1 - alpha] | lost
    strategies[1 - alpha] = {
        **rest_strategies[1 - alpha],
        **{n: s for n, s in sub_strategies[1 - alpha].items() if n in sub_regions[1 - alpha]},
        **lost_strategy,
    }
    return regions, strategies


def dominant_cycle(
    graph: nx.DiGraph,
    priority: Callable[[Node], int],
    parity: int,
) -> tuple[int, list[Node]] | None:
    """A cycle whose least priority has the given parity, if one exists.

    Returns the priority and the cycle as a node list starting and ending at a
    node of that priority. Priorities are tried in increasing order.
    """
    priorities = sorted({priority(n) for n in graph if priority(n) % 2 == parity})
    for p in priorities:
        sub = graph.subgraph([n for n in graph if priority(n) >= p])
        for component in sorted(nx.strongly_connected_components(sub), key=lambda c: sorted(map(repr, c))):
            scc = sub.subgraph(component)
            anchors = sorted((n for n in component if priority(n) == p), key=repr)
            for anchor in anchors:
                if scc.number_of_nodes() == 1 and not scc.has_edge(anchor, anchor):
                    continue
                if scc.has_edge(anchor, anchor):
                    return p, [anchor, anchor]
                best = None
                for succ in scc.successors(anchor):
                    path = nx.shortest_path(scc, succ, anchor)
                    if best is None or len(path) < len(best):
                        best = path
                return p, [anchor, *best]
    return None


def count_cycle_checks(graph: nx.DiGraph, priority: Callable[[Node], int], parity: int) -> int:
    """Number of nontrivial components inspected by the cycle criterion."""
    checked = 0
    for p in sorted({priority(n) for n in graph if priority(n) % 2 == parity}):
        sub = graph.subgraph([n for n in graph if priority(n) >= p])
        for component in nx.strongly_connected_components(sub):
            node = next(iter(component))
            if len(component) > 1 or sub.has_edge(node, node):
                checked += 1
    return checked


def restricted_graph(pg: ParityGame, region: Iterable[Node], player: int, strategy: dict) -> nx.DiGraph:
    """The region with `player` held to its strategy and the opponent free."""
    region = set(region)
    graph = nx.DiGraph()
    graph.add_nodes_from(region)
    for node in region:
        if pg.owner(node) == player:
            graph.add_edge(node, strategy[node])
        else:
            graph.add_edges_from((node, s) for s in pg.successors(node, region))
    return graph


def _check_solution(pg: ParityGame, solution: ParitySolution) -> None:
    for player, region in ((COALITION, solution.coalition), (NATURE, solution.nature)):
        strategy = solution.strategy(player)
        for node in region:
            if pg.owner(node) == player and strategy.get(node) not in region:
                raise_error(ErrorType.INTERNAL_INVARIANT, detail=f"strategy for player {player} leaves its region at {node!r}")
            if pg.owner(node) != player and any(s not in region for s in pg.successors(node)):
                raise_error(ErrorType.INTERNAL_INVARIANT, detail=f"region of player {player} is not a trap at {node!r}")
        # within a winning region no consistent cycle may favour the opponent
        if dominant_cycle(restricted_graph(pg, region, player, strategy), pg.priority, 1 - player) is not None:
            raise_error(ErrorType.INTERNAL_INVARIANT, detail=f"cycle criterion fails in the region of player {player}")


def solve_parity(pg: ParityGame) -> ParitySolution:
    regions, strategies = _zielonka(pg, frozenset(pg.graph.nodes))
    solution = ParitySolution(
        coalition=frozenset(regions[COALITION]),
        nature=frozenset(regions[NATURE]),
        coalition_strategy={n: s for n, s in strategies[COALITION].items() if pg.owner(n) == COALITION and n in regions[COALITION]},
        nature_strategy={n: s for n, s in strategies[NATURE].items() if pg.owner(n) == NATURE and n in regions[NATURE]},
    )
    _check_solution(pg, solution)
    logger.info(
        "parity game of %d nodes solved: coalition wins %d, nature wins %d",
        len(pg), len(solution.coalition), len(solution.nature),
    )
    return solution

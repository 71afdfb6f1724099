"""Recurring and periodic certainty.

The grand coalition attains certainty at a history when every history that
agent 0 cannot tell apart from it ends at the same state. Tracking the set of
such end states (the belief) alongside the current state gives a
deterministic Büchi automaton whose accepting states are the certain ones;
since the automaton state contains the game state, it already is the
product with the game.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import networkx as nx

from epitrack.core.game import (
    AGENT_ZERO,
    ClassId,
    GameStructure,
    History,
    LassoPlay,
    Profile,
    State,
    check_history,
    observe,
)
from epitrack.utils.error_utils import raise_error, ErrorType

logger = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class BeliefState:
    current: State
    belief: tuple[State, ...]

    @classmethod
    def of(cls, current: State, belief: Iterable[State]) -> "BeliefState":
        return cls(current, tuple(sorted(set(belief))))

    @property
    def certain(self) -> bool:
        return self.belief == (self.current,)

    def label(self) -> str:
        return f"{self.current} | {{{', '.join(self.belief)}}}"


@dataclass(frozen=True)
class CertaintyAutomaton:
    initial: BeliefState
    states: tuple[BeliefState, ...]
    transitions: dict[tuple[BeliefState, Profile, State], BeliefState] = field(compare=False)

    @property
    def accepting(self) -> frozenset[BeliefState]:
        return frozenset(s for s in self.states if s.certain)

    def step(self, source: BeliefState, profile: Profile, target: State) -> BeliefState:
        return self.transitions[(source, tuple(profile), target)]

    def run(self, h: History) -> list[BeliefState]:
        run = [self.initial]
        for profile, target in zip(h.profiles, h.states[1:]):
            run.append(self.step(run[-1], profile, target))
        return run

    def graph(self) -> nx.DiGraph:
        """State graph in discovery order; edges carry the sorted profiles."""
        graph = nx.DiGraph()
        graph.add_nodes_from(self.states)
        for (source, profile, _), target in self.transitions.items():
            if graph.has_edge(source, target):
                graph[source][target]["profiles"].append(profile)
            else:
                graph.add_edge(source, target, profiles=[profile])
        for _, _, data in graph.edges(data=True):
            data["profiles"].sort()
        return graph


@dataclass(frozen=True)
class CertaintyVerdict:
    recurring: bool
    state_bound: int
    automaton_states: int
    witness: LassoPlay | None = None
    minimal_period: int | None = None


def belief_step(g: GameStructure, belief: Iterable[State], class_id: ClassId) -> frozenset[State]:
    # Witness actions are unconstrained: agent 0 observes no actions
    return frozenset(
        target
        for source in belief
        for target in g.post(source)
        if g.partition.class_of[target] == class_id
    )


def belief_run(g: GameStructure, obs: Sequence[ClassId]) -> list[frozenset[State]]:
    if not obs or tuple(obs[0]) != g.partition.class_of[g.initial_state]:
        raise_error(ErrorType.UNREALISABLE_OBSERVATIONS, detail={"index": 0})
    beliefs = [frozenset({g.initial_state})]
    for index, class_id in enumerate(obs[1:], start=1):
        belief = belief_step(g, beliefs[-1], tuple(class_id))
        if not belief:
            raise_error(ErrorType.UNREALISABLE_OBSERVATIONS, detail={"index": index})
        beliefs.append(belief)
    return beliefs


def attains_certainty(g: GameStructure, h: History) -> bool:
    check_history(g, h)
    return belief_run(g, observe(g, h, AGENT_ZERO))[-1] == frozenset({h.last})


def certainty_flags(g: GameStructure, h: History) -> list[bool]:
    """Certainty at every prefix of h (position k = prefix with k rounds)."""
    check_history(g, h)
    beliefs = belief_run(g, observe(g, h, AGENT_ZERO))
    return [belief == frozenset({state}) for belief, state in zip(beliefs, h.states)]


def certainty_gaps(flags: Sequence[bool]) -> tuple[list[int], int]:
    """Gaps before each certainty point, and the trailing open gap."""
    gaps: list[int] = []
    run = 0
    for certain in flags:
        if certain:
            gaps.append(run)
            run = 0
        else:
            run += 1
    return gaps, run


def build_certainty_automaton(g: GameStructure) -> CertaintyAutomaton:
    initial = BeliefState.of(g.initial_state, [g.initial_state])
    seen = {initial}
    order = [initial]
    transitions: dict[tuple[BeliefState, Profile, State], BeliefState] = {}
    queue = deque([initial])
    while queue:
        source = queue.popleft()
        for profile, target in g.moves_from(source.current):
            belief = belief_step(g, source.belief, g.partition.class_of[target])
            successor = BeliefState.of(target, belief)
            transitions[(source, profile, target)] = successor
            if successor not in seen:
                seen.add(successor)
                order.append(successor)
                queue.append(successor)
    logger.debug("certainty automaton for %s has %d states", g.name, len(order))
    return CertaintyAutomaton(initial=initial, states=tuple(order), transitions=transitions)


def _uncertain_subgraph(graph: nx.DiGraph) -> nx.DiGraph:
    return graph.subgraph([s for s in graph if not s.certain]).copy()


def _edge_profile(graph: nx.DiGraph, source: BeliefState, target: BeliefState) -> Profile:
    return graph[source][target]["profiles"][0]


def _segment(graph: nx.DiGraph, path: list[BeliefState]) -> History:
    profiles = tuple(_edge_profile(graph, a, b) for a, b in zip(path, path[1:]))
    return History(tuple(s.current for s in path), profiles)


def _witness(automaton: CertaintyAutomaton, graph: nx.DiGraph, uncertain: nx.DiGraph) -> LassoPlay:
    # Shortest cycle first, then shortest prefix, then lexicographic labels
    prefixes = nx.single_source_shortest_path(graph, automaton.initial)
    best = None
    for start in sorted(uncertain):
        reach = nx.single_source_shortest_path(uncertain, start)
        for pred in sorted(uncertain.predecessors(start)):
            if pred not in reach:
                continue
            cycle_path = reach[pred] + [start]
            prefix_path = prefixes[start]
            prefix = _segment(graph, prefix_path)
            cycle = _segment(graph, cycle_path)
            rank = (
                cycle.rounds,
                prefix.rounds,
                prefix.states + cycle.states,
                prefix.profiles + cycle.profiles,
            )
            if best is None or rank < best[0]:
                best = (rank, LassoPlay(prefix=prefix, cycle=cycle))
    return best[1]


def decide_recurring_certainty(g: GameStructure) -> CertaintyVerdict:
    automaton = build_certainty_automaton(g)
    graph = automaton.graph()
    uncertain = _uncertain_subgraph(graph)
    bound = len(automaton.states) + 1

    if not nx.is_directed_acyclic_graph(uncertain):
        witness = _witness(automaton, graph, uncertain)
        logger.info("%s lacks recurring certainty; witness cycle of %d rounds", g.name, witness.cycle.rounds)
        return CertaintyVerdict(
            recurring=False,
            state_bound=bound,
            automaton_states=len(automaton.states),
            witness=witness,
        )

    period = nx.dag_longest_path_length(uncertain) + 1 if uncertain.number_of_nodes() else 0
    logger.info("%s has recurring certainty with period %d (bound %d)", g.name, period, bound)
    return CertaintyVerdict(
        recurring=True,
        state_bound=bound,
        automaton_states=len(automaton.states),
        minimal_period=period,
    )


def certainty_period(g: GameStructure) -> tuple[int, int]:
    verdict = decide_recurring_certainty(g)
    if not verdict.recurring:
        raise_error(ErrorType.NOT_RECURRING, detail={"witness": verdict.witness.as_dict()})
    return verdict.minimal_period, verdict.state_bound

"""Game structures with imperfect information, histories and observations.

A game structure is a finite graph of states whose moves are labelled by
action profiles (one action per player). Every player sees an observation
symbol per state and, in addition, its own action. Agent 0 is the fictitious
least-informed observer: two states look alike to it whenever a chain of
single-player confusions connects them.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Mapping

import networkx as nx

from epitrack.utils.error_utils import raise_error, ErrorType

AGENT_ZERO = "0"

State = str
Profile = tuple[str, ...]
ClassId = tuple[str, ...]
Move = tuple[State, Profile, State]


@dataclass(frozen=True)
class GameStructure:
    states: tuple[State, ...]
    initial_state: State
    players: tuple[str, ...]
    actions: Mapping[str, tuple[str, ...]]
    observations: Mapping[str, Mapping[State, str]]
    moves: frozenset[Move]
    colours: Mapping[State, str]
    name: str = field(default="game", compare=False)

    @classmethod
    def create(
        cls,
        *,
        states: Iterable[State],
        initial_state: State,
        players: Iterable[str],
        actions: Mapping[str, Iterable[str]],
        observations: Mapping[str, Mapping[State, str]],
        moves: Iterable[tuple[State, Iterable[str], State]],
        colours: Mapping[State, str],
        name: str = "game",
    ) -> "GameStructure":
        # Normalise containers so equal games compare equal
        return cls(
            states=tuple(states),
            initial_state=initial_state,
            players=tuple(players),
            actions={p: tuple(a) for p, a in actions.items()},
            observations={p: dict(obs) for p, obs in observations.items()},
            moves=frozenset((src, tuple(profile), dst) for src, profile, dst in moves),
            colours={s: str(c) for s, c in colours.items()},
            name=name,
        )

    @cached_property
    def profiles(self) -> tuple[Profile, ...]:
        return tuple(itertools.product(*(self.actions.get(p, ()) for p in self.players)))

    @cached_property
    def _successor_index(self) -> dict[tuple[State, Profile], tuple[State, ...]]:
        index: dict[tuple[State, Profile], list[State]] = {}
        for src, profile, dst in self.moves:
            index.setdefault((src, profile), []).append(dst)
        return {key: tuple(sorted(set(targets))) for key, targets in index.items()}

    def successors(self, state: State, profile: Profile) -> tuple[State, ...]:
        return self._successor_index.get((state, profile), ())

    @cached_property
    def _moves_by_source(self) -> dict[State, tuple[tuple[Profile, State], ...]]:
        index: dict[State, list[tuple[Profile, State]]] = {}
        for src, profile, dst in self.moves:
            index.setdefault(src, []).append((profile, dst))
        return {src: tuple(sorted(pairs)) for src, pairs in index.items()}

    def post(self, state: State) -> tuple[State, ...]:
        # Successors under any profile
        return tuple(sorted({dst for _, dst in self.moves_from(state)}))

    def moves_from(self, state: State) -> tuple[tuple[Profile, State], ...]:
        return self._moves_by_source.get(state, ())

    def player_index(self, player: str) -> int:
        try:
            return self.players.index(player)
        except ValueError:
            raise_error(ErrorType.UNKNOWN_AGENT, detail=f"unknown player {player!r}")

    @cached_property
    def partition(self) -> "Agent0Partition":
        return agent0_partition(self)

    def observation(self, agent: str, state: State) -> str | ClassId:
        if agent == AGENT_ZERO:
            return self.partition.class_of[state]
        if agent not in self.observations:
            raise_error(ErrorType.UNKNOWN_AGENT, detail=f"unknown agent {agent!r}")
        return self.observations[agent][state]

    @property
    def agents(self) -> tuple[str, ...]:
        return (AGENT_ZERO, *self.players)

    def state_graph(self) -> nx.DiGraph:
        graph = nx.DiGraph()
        graph.add_nodes_from(self.states)
        graph.add_edges_from((src, dst) for src, _, dst in sorted(self.moves))
        return graph


@dataclass(frozen=True)
class Agent0Partition:
    class_of: Mapping[State, ClassId]

    @property
    def classes(self) -> list[ClassId]:
        return sorted(set(self.class_of.values()))


@dataclass(frozen=True)
class History:
    """Alternating sequence v0, a0, v1, ..., v_l kept as two parallel tuples."""

    states: tuple[State, ...]
    profiles: tuple[Profile, ...] = ()

    def __post_init__(self):
        if len(self.states) != len(self.profiles) + 1:
            raise_error(
                ErrorType.INVALID_HISTORY,
                detail=f"{len(self.states)} states need {len(self.states) - 1} profiles, got {len(self.profiles)}",
            )

    @classmethod
    def start(cls, state: State) -> "History":
        return cls((state,), ())

    @property
    def last(self) -> State:
        return self.states[-1]

    @property
    def rounds(self) -> int:
        return len(self.profiles)

    def extend(self, profile: Profile, state: State) -> "History":
        return History(self.states + (state,), self.profiles + (tuple(profile),))

    def prefix(self, rounds: int) -> "History":
        return History(self.states[: rounds + 1], self.profiles[:rounds])

    def prefixes(self) -> Iterator["History"]:
        for k in range(self.rounds + 1):
            yield self.prefix(k)

    def concat(self, segment: "History") -> "History":
        # segment must start where this history ends
        if segment.states[0] != self.last:
            raise_error(ErrorType.INVALID_HISTORY, detail="segment does not continue the history")
        return History(self.states + segment.states[1:], self.profiles + segment.profiles)

    def as_dict(self) -> dict:
        return {"states": list(self.states), "profiles": [list(p) for p in self.profiles]}


@dataclass(frozen=True)
class LassoPlay:
    """Ultimately periodic play prefix . cycle^omega; the cycle is a segment."""

    prefix: History
    cycle: History

    def __post_init__(self):
        if self.cycle.rounds == 0:
            raise_error(ErrorType.INVALID_HISTORY, detail="lasso cycle must be nonempty")
        if self.cycle.states[0] != self.prefix.last or self.cycle.states[-1] != self.cycle.states[0]:
            raise_error(ErrorType.INVALID_HISTORY, detail="lasso cycle must start and end at the prefix end")

    def unroll(self, repetitions: int) -> History:
        history = self.prefix
        for _ in range(repetitions):
            history = history.concat(self.cycle)
        return history

    def as_dict(self) -> dict:
        return {"prefix": self.prefix.as_dict(), "cycle": self.cycle.as_dict()}


def agent0_partition(g: GameStructure) -> Agent0Partition:
    # Connected components of the "some player confuses them" graph
    confusion = nx.Graph()
    confusion.add_nodes_from(g.states)
    for player in g.players:
        by_symbol: dict[str, list[State]] = {}
        for state in g.states:
            symbol = g.observations.get(player, {}).get(state)
            if symbol is not None:
                by_symbol.setdefault(symbol, []).append(state)
        for group in by_symbol.values():
            confusion.add_edges_from(zip(group, group[1:]))

    class_of: dict[State, ClassId] = {}
    for component in nx.connected_components(confusion):
        class_id = tuple(sorted(component))
        for state in component:
            class_of[state] = class_id
    return Agent0Partition(class_of=class_of)


def is_history(g: GameStructure, h: History, *, from_initial: bool = True) -> bool:
    if from_initial and h.states[0] != g.initial_state:
        return False
    if any(s not in g.colours for s in h.states):
        return False
    return all(
        dst in g.successors(src, profile)
        for src, profile, dst in zip(h.states, h.profiles, h.states[1:])
    )


def check_history(g: GameStructure, h: History, *, from_initial: bool = True) -> None:
    if not is_history(g, h, from_initial=from_initial):
        raise_error(ErrorType.INVALID_HISTORY, detail=h.as_dict())


def observe(g: GameStructure, h: History, agent: str) -> tuple:
    if agent != AGENT_ZERO and agent not in g.players:
        raise_error(ErrorType.UNKNOWN_AGENT, detail=f"unknown agent {agent!r}")
    return tuple(g.observation(agent, state) for state in h.states)


def own_actions(g: GameStructure, h: History, player: str) -> tuple[str, ...]:
    index = g.player_index(player)
    return tuple(profile[index] for profile in h.profiles)


def indistinguishable(g: GameStructure, h1: History, h2: History, agent: str) -> bool:
    if h1.rounds != h2.rounds:
        return False
    if observe(g, h1, agent) != observe(g, h2, agent):
        return False
    # a player's own action is part of its observation; agent 0 has none
    if agent == AGENT_ZERO:
        return True
    return own_actions(g, h1, agent) == own_actions(g, h2, agent)


def perfect_information_states(g: GameStructure) -> frozenset[State]:
    return frozenset(s for s in g.states if len(g.partition.class_of[s]) == 1)


def cycles_through_perfect_information(g: GameStructure) -> bool:
    """Every cycle of the state graph visits a state no player confuses."""
    graph = g.state_graph()
    graph.remove_nodes_from(perfect_information_states(g))
    return nx.is_directed_acyclic_graph(graph)


def enumerate_histories(g: GameStructure, rounds: int) -> Iterator[History]:
    """All histories with exactly `rounds` rounds, depth first."""
    stack = [History.start(g.initial_state)]
    while stack:
        history = stack.pop()
        if history.rounds == rounds:
            yield history
            continue
        for profile, dst in reversed(g.moves_from(history.last)):
            stack.append(history.extend(profile, dst))

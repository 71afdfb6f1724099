"""Epistemic models: finite Kripke structures over histories.

Worlds stand for histories; each world carries the state its history ends
in, and every agent (players and agent 0) has an equivalence partition of the
worlds it cannot tell apart. Canonical keys identify isomorphic models so the
tracking construction can memoise them.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Hashable, Iterable, Mapping

from epitrack.core.game import AGENT_ZERO, GameStructure, State
from epitrack.utils.error_utils import raise_error, ErrorType

World = Hashable
Block = frozenset
CanonicalKey = tuple


@dataclass(frozen=True)
class EpistemicModel:
    worlds: tuple[World, ...]
    state_of: Mapping[World, State]
    relations: Mapping[str, tuple[Block, ...]]

    @classmethod
    def singleton(cls, agents: Iterable[str], state: State, world: World = 0) -> "EpistemicModel":
        return cls(
            worlds=(world,),
            state_of={world: state},
            relations={agent: (frozenset({world}),) for agent in agents},
        )

    @cached_property
    def _position(self) -> dict[World, int]:
        return {w: i for i, w in enumerate(self.worlds)}

    @cached_property
    def _block_index(self) -> dict[str, dict[World, Block]]:
        return {
            agent: {w: block for block in blocks for w in block}
            for agent, blocks in self.relations.items()
        }

    def block(self, agent: str, world: World) -> Block:
        return self._block_index[agent][world]

    def classes(self, agent: str) -> list[Block]:
        # Ordered by the first world of each block
        return sorted(self.relations[agent], key=lambda b: min(self._position[w] for w in b))

    @property
    def size(self) -> int:
        return len(self.worlds)

    def end_states(self) -> list[State]:
        return sorted(self.state_of[w] for w in self.worlds)

    @property
    def is_singleton(self) -> bool:
        return len(self.worlds) == 1

    def summary(self) -> str:
        return f"{self.size} world{'s' if self.size != 1 else ''} {{{', '.join(self.end_states())}}}"


def initial_model(g: GameStructure) -> EpistemicModel:
    return EpistemicModel.singleton(g.agents, g.initial_state)


def certainty_collapse(m: EpistemicModel) -> EpistemicModel:
    """A connected model whose worlds all end at one state is that state."""
    states = {m.state_of[w] for w in m.worlds}
    if m.is_singleton or len(states) != 1:
        return m
    return EpistemicModel.singleton(m.relations.keys(), states.pop(), world=m.worlds[0])


def model_colour(g: GameStructure, m: EpistemicModel) -> str:
    colours = sorted({g.colours[m.state_of[w]] for w in m.worlds})
    if len(colours) != 1:
        raise_error(
            ErrorType.INCOHERENT_COLOURS,
            detail={"states": m.end_states(), "colours": colours},
        )
    return colours[0]


def _refine(m: EpistemicModel, agents: list[str], colouring: dict[World, int]) -> dict[World, int]:
    # Colour refinement until the number of cells is stable
    while True:
        signature = {
            w: (
                colouring[w],
                tuple(tuple(sorted(colouring[x] for x in m.block(agent, w))) for agent in agents),
            )
            for w in m.worlds
        }
        ranks = {sig: rank for rank, sig in enumerate(sorted(set(signature.values())))}
        refined = {w: ranks[signature[w]] for w in m.worlds}
        if len(ranks) == len(set(colouring.values())):
            return refined
        colouring = refined


def _certificate(m: EpistemicModel, agents: list[str], order: list[World]) -> CanonicalKey:
    position = {w: i for i, w in enumerate(order)}
    partitions = tuple(
        (agent, tuple(sorted(tuple(sorted(position[w] for w in block)) for block in m.relations[agent])))
        for agent in agents
    )
    return (tuple(m.state_of[w] for w in order), partitions)


def _twins(m: EpistemicModel, agents: list[str], w1: World, w2: World) -> bool:
    # swapping w1 and w2 is an automorphism
    if m.state_of[w1] != m.state_of[w2]:
        return False
    for agent in agents:
        b1, b2 = m.block(agent, w1), m.block(agent, w2)
        if b1 != b2 and not (len(b1) == 1 and len(b2) == 1):
            return False
    return True


def _search(m: EpistemicModel, agents: list[str], colouring: dict[World, int]) -> tuple[CanonicalKey, list[World]]:
    colouring = _refine(m, agents, colouring)
    cells: dict[int, list[World]] = {}
    for w in m.worlds:
        cells.setdefault(colouring[w], []).append(w)
    target = next((c for c in sorted(cells) if len(cells[c]) > 1), None)
    if target is None:
        order = sorted(m.worlds, key=lambda w: colouring[w])
        return _certificate(m, agents, order), order

    representatives: list[World] = []
    for w in cells[target]:
        if not any(_twins(m, agents, w, r) for r in representatives):
            representatives.append(w)

    best = None
    for chosen in representatives:
        # individualise one world of the first non-singleton cell
        split = {w: 2 * c + (1 if c == target and w != chosen else 0) for w, c in colouring.items()}
        candidate = _search(m, agents, split)
        if best is None or candidate[0] < best[0]:
            best = candidate
    return best


def canonical_form(m: EpistemicModel) -> tuple[CanonicalKey, dict[World, int]]:
    """Canonical key and the world relabelling onto 0..n-1 that realises it."""
    agents = sorted(m.relations)
    states = sorted({m.state_of[w] for w in m.worlds})
    colouring = {w: states.index(m.state_of[w]) for w in m.worlds}
    key, order = _search(m, agents, colouring)
    return key, {w: i for i, w in enumerate(order)}


def canonical_key(m: EpistemicModel) -> CanonicalKey:
    return canonical_form(m)[0]


def model_from_key(key: CanonicalKey) -> EpistemicModel:
    states, partitions = key
    return EpistemicModel(
        worlds=tuple(range(len(states))),
        state_of=dict(enumerate(states)),
        relations={agent: tuple(frozenset(block) for block in blocks) for agent, blocks in partitions},
    )


def is_partition(m: EpistemicModel, agent: str) -> bool:
    covered = [w for block in m.relations[agent] for w in block]
    return sorted(map(repr, covered)) == sorted(map(repr, m.worlds)) and len(covered) == len(set(covered))


def refines_agent_zero(m: EpistemicModel) -> bool:
    return all(
        m.block(agent, w) <= m.block(AGENT_ZERO, w)
        for agent in m.relations
        for w in m.worlds
    )

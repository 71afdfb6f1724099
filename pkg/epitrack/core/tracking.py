"""Tracking construction: unravel epistemic models into a perfect-information arena.

From a model, the coalition picks an admissible assignment (an action profile
per world, constant on each player's classes); every world then moves along
every game move for its profile, and the successor worlds split into the
components nature chooses among. Components whose worlds all end at one state
collapse to a singleton, and isomorphic models are identified through their
canonical key, so games with recurring certainty yield a finite arena.
"""

from __future__ import annotations

import itertools
import logging
import os
from collections import deque
from dataclasses import dataclass, field
from typing import Literal, Mapping

import networkx as nx

from epitrack.core.certainty import decide_recurring_certainty
from epitrack.core.epistemic import (
    CanonicalKey,
    EpistemicModel,
    World,
    canonical_form,
    certainty_collapse,
    initial_model,
    model_colour,
    model_from_key,
)
from epitrack.core.game import GameStructure, Profile, State
from epitrack.utils.error_utils import raise_error, ErrorType
from epitrack.utils.validators import observability_violations

logger = logging.getLogger(__name__)

DEFAULT_NODE_LIMIT = int(os.getenv("EPITRACK_NODE_LIMIT", "100000"))

Components = Literal["all", "players-only"]
Assignment = Mapping[World, Profile]
Child = tuple[World, Profile, State]


@dataclass(frozen=True)
class Component:
    """One successor component before and after certainty collapse."""

    raw: EpistemicModel
    model: EpistemicModel

    def world_of(self, child: Child) -> World:
        return child if self.model is self.raw else self.model.worlds[0]


@dataclass(frozen=True)
class Successor:
    node: int
    # child world (parent, profile, state) -> world of the successor node's model
    world_map: Mapping[Child, World] = field(compare=False)


@dataclass(frozen=True)
class EdgeGroup:
    group_id: int
    assignment: Assignment = field(compare=False)
    successors: tuple[Successor, ...]

    @property
    def targets(self) -> frozenset[int]:
        return frozenset(s.node for s in self.successors)

    def successor_for(self, child: Child) -> Successor:
        return next(s for s in self.successors if child in s.world_map)


@dataclass
class TrackingArena:
    game: GameStructure
    models: list[EpistemicModel]
    keys: list[CanonicalKey]
    groups: list[tuple[EdgeGroup, ...]]
    colours: list[str | None]
    observable: bool
    components: Components = "all"
    initial: int = 0

    def __len__(self) -> int:
        return len(self.models)

    def graph(self) -> nx.DiGraph:
        graph = nx.DiGraph()
        graph.add_nodes_from(range(len(self.models)))
        for node, groups in enumerate(self.groups):
            for group in groups:
                for succ in group.successors:
                    graph.add_edge(node, succ.node)
        return graph

    def node_order(self) -> list[int]:
        # Stable ordering by canonical key
        return sorted(range(len(self.models)), key=lambda n: self.keys[n])


def admissible_assignments(g: GameStructure, m: EpistemicModel) -> list[dict[World, Profile]]:
    """Every profile-per-world map constant on each player's classes."""
    slots = [(index, block) for index, player in enumerate(g.players) for block in m.classes(player)]
    choices = [g.actions[g.players[index]] for index, _ in slots]
    assignments = []
    for combo in itertools.product(*choices):
        chosen: dict[World, list[str]] = {w: [""] * len(g.players) for w in m.worlds}
        for (index, block), action in zip(slots, combo):
            for w in block:
                chosen[w][index] = action
        assignments.append({w: tuple(chosen[w]) for w in m.worlds})
    return assignments


def _restrict(blocks: list[frozenset], members: frozenset) -> tuple[frozenset, ...]:
    return tuple(b & members for b in blocks if b & members)


def update_components(
    g: GameStructure,
    m: EpistemicModel,
    f: Assignment,
    components: Components = "all",
) -> list[Component]:
    children: list[Child] = [
        (k, f[k], v) for k in m.worlds for v in g.successors(m.state_of[k], f[k])
    ]
    # child ~ child' iff the parents are related and the child states look alike
    relations: dict[str, list[frozenset]] = {}
    for agent in g.agents:
        grouped: dict[tuple, list[Child]] = {}
        for child in children:
            parent, _, state = child
            parent_block = m.classes(agent).index(m.block(agent, parent))
            grouped.setdefault((parent_block, g.observation(agent, state)), []).append(child)
        relations[agent] = [frozenset(members) for members in grouped.values()]

    linking = g.players if components == "players-only" else g.agents
    union = nx.Graph()
    union.add_nodes_from(children)
    for agent in linking:
        for block in relations[agent]:
            members = sorted(block, key=children.index)
            union.add_edges_from(zip(members, members[1:]))

    result = []
    parts = sorted(nx.connected_components(union), key=lambda c: min(children.index(x) for x in c))
    for part in parts:
        members = frozenset(part)
        raw = EpistemicModel(
            worlds=tuple(c for c in children if c in members),
            state_of={c: c[2] for c in members},
            relations={agent: _restrict(relations[agent], members) for agent in g.agents},
        )
        result.append(Component(raw=raw, model=certainty_collapse(raw)))
    return result


def update_model(
    g: GameStructure,
    m: EpistemicModel,
    f: Assignment,
    components: Components = "all",
) -> list[EpistemicModel]:
    return [c.model for c in update_components(g, m, f, components)]


@dataclass
class _Frontier:
    """Memo table shared by the arena builders."""

    game: GameStructure
    node_limit: int
    models: list[EpistemicModel] = field(default_factory=list)
    keys: list[CanonicalKey] = field(default_factory=list)
    index: dict[CanonicalKey, int] = field(default_factory=dict)
    queue: deque = field(default_factory=deque)
    largest: int = 0

    def intern(self, model: EpistemicModel) -> tuple[int, dict[World, int]]:
        key, relabel = canonical_form(model)
        self.largest = max(self.largest, model.size)
        if key not in self.index:
            if len(self.models) >= self.node_limit:
                raise_error(
                    ErrorType.NODE_LIMIT_EXCEEDED,
                    detail={"nodes": len(self.models), "largest_model_worlds": self.largest},
                )
            self.index[key] = len(self.models)
            self.models.append(model_from_key(key))
            self.keys.append(key)
            self.queue.append(self.index[key])
        return self.index[key], relabel


def _edge_groups(
    g: GameStructure,
    model: EpistemicModel,
    components: Components,
    resolve,
) -> tuple[EdgeGroup, ...]:
    groups: list[EdgeGroup] = []
    seen: set[frozenset] = set()
    for f in admissible_assignments(g, model):
        parts = update_components(g, model, f, components)
        # assignments reaching the same successor set form one group
        signature = frozenset(canonical_form(c.model)[0] for c in parts)
        if signature in seen:
            continue
        seen.add(signature)
        successors = []
        for component in parts:
            node, relabel = resolve(component.model)
            world_map = {child: relabel[component.world_of(child)] for child in component.raw.worlds}
            successors.append(Successor(node=node, world_map=world_map))
        groups.append(EdgeGroup(group_id=len(groups), assignment=f, successors=tuple(successors)))
    return tuple(groups)


def _arena_colours(g: GameStructure, models: list[EpistemicModel], observable: bool) -> list[str | None]:
    if not observable:
        return [None] * len(models)
    return [model_colour(g, m) for m in models]


def build_tracking_arena(
    g: GameStructure,
    node_limit: int = DEFAULT_NODE_LIMIT,
    components: Components = "all",
) -> TrackingArena:
    verdict = decide_recurring_certainty(g)
    if not verdict.recurring:
        logger.warning("%s lacks recurring certainty; tracking may not terminate below %d nodes", g.name, node_limit)
    observable = not observability_violations(g)
    if not observable:
        logger.warning("%s has a colouring some player cannot observe; arena nodes stay uncoloured", g.name)

    frontier = _Frontier(game=g, node_limit=node_limit)
    frontier.intern(initial_model(g))
    groups: dict[int, tuple[EdgeGroup, ...]] = {}
    while frontier.queue:
        node = frontier.queue.popleft()
        groups[node] = _edge_groups(g, frontier.models[node], components, frontier.intern)
        logger.debug("arena node %d: %s, %d groups", node, frontier.models[node].summary(), len(groups[node]))

    logger.info("tracking arena for %s has %d nodes", g.name, len(frontier.models))
    return TrackingArena(
        game=g,
        models=frontier.models,
        keys=frontier.keys,
        groups=[groups[n] for n in range(len(frontier.models))],
        colours=_arena_colours(g, frontier.models, observable),
        observable=observable,
        components=components,
    )


def unravel_tracking(
    g: GameStructure,
    depth: int,
    components: Components = "all",
    node_limit: int = DEFAULT_NODE_LIMIT,
) -> TrackingArena:
    """Tree unravelling to `depth` rounds without memoisation.

    Tree nodes keep their structural world identifiers and come first; nodes
    at `depth` are glued onto the memoised arena, which follows the tree.
    """
    memo = build_tracking_arena(g, node_limit, components)
    if depth == 0:
        return memo
    memo_index = {key: node for node, key in enumerate(memo.keys)}

    # Tree node ids are provisional; memo targets are tagged and shifted below
    tree_models: list[EpistemicModel] = [initial_model(g)]
    tree_depth = [0]
    tree_groups: list[tuple[EdgeGroup, ...]] = []
    for node in itertools.count():
        if node >= len(tree_models):
            break

        def resolve(model: EpistemicModel, parent_depth: int = tree_depth[node]):
            key, relabel = canonical_form(model)
            if parent_depth + 1 >= depth:
                return -1 - memo_index[key], relabel
            tree_models.append(model)
            tree_depth.append(parent_depth + 1)
            return len(tree_models) - 1, {w: w for w in model.worlds}

        tree_groups.append(_edge_groups(g, tree_models[node], components, resolve))

    offset = len(tree_models)

    def shifted(groups: tuple[EdgeGroup, ...], relocate) -> tuple[EdgeGroup, ...]:
        return tuple(
            EdgeGroup(
                group_id=group.group_id,
                assignment=group.assignment,
                successors=tuple(Successor(node=relocate(s.node), world_map=s.world_map) for s in group.successors),
            )
            for group in groups
        )

    groups = [shifted(gs, lambda n: offset - 1 - n if n < 0 else n) for gs in tree_groups]
    groups += [shifted(gs, lambda n: n + offset) for gs in memo.groups]
    models = tree_models + memo.models
    return TrackingArena(
        game=g,
        models=models,
        keys=[canonical_form(m)[0] for m in tree_models] + memo.keys,
        groups=groups,
        colours=_arena_colours(g, models, memo.observable),
        observable=memo.observable,
        components=components,
    )

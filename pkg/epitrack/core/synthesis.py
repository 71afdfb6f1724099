"""End-to-end coalition solving and distribution of the winning strategy.

The positional strategy of the product game is a strategy of the grand
coalition on epistemic models. Each player runs it locally: a machine state
is a product node together with the player's class in the model at that
node, which is all the player needs to know to pick its component of the
chosen assignment and to follow the play after the next observation.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from epitrack.core.epistemic import World
from epitrack.core.game import GameStructure
from epitrack.core.objective import (
    ObjectiveSpec,
    ParityAutomaton,
    build_parity_game,
    check_observability,
    colour_alphabet,
    compile_objective,
    coalition_node,
)
from epitrack.core.parity import ParityGame, ParitySolution, solve_parity
from epitrack.core.tracking import DEFAULT_NODE_LIMIT, Components, TrackingArena, build_tracking_arena
from epitrack.utils.error_utils import raise_error, ErrorType

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class StrategyMachine:
    """Moore machine: `output` is played in a state, `step` reads the next observation."""

    player: str
    states: tuple[str, ...]
    initial: str
    output: Mapping[str, str]
    step: Mapping[tuple[str, str], str]
    labels: Mapping[str, str] = field(default_factory=dict, compare=False)

    def next_state(self, state: str, observation: str) -> str | None:
        return self.step.get((state, observation))


@dataclass(frozen=True)
class CoalitionOutcome:
    game: GameStructure
    arena: TrackingArena = field(compare=False)
    automaton: ParityAutomaton = field(compare=False)
    parity_game: ParityGame = field(compare=False)
    solution: ParitySolution = field(compare=False)
    wins: bool = False


def run_machine(machine: StrategyMachine, observations: Sequence[str]) -> list[str]:
    """Actions played along an observation sequence, one per position.

    The first observation is that of the initial state, where the machine sits
    in its initial state.
    """
    if not observations:
        return []
    state = machine.initial
    actions = [machine.output[state]]
    for index, observation in enumerate(observations[1:], start=1):
        state = machine.next_state(state, observation)
        if state is None:
            raise_error(
                ErrorType.INVALID_STRATEGY,
                detail={"player": machine.player, "index": index, "observation": observation},
            )
        actions.append(machine.output[state])
    return actions


def decide_coalition_winner(
    g: GameStructure,
    spec: ObjectiveSpec,
    node_limit: int = DEFAULT_NODE_LIMIT,
    components: Components = "all",
) -> CoalitionOutcome:
    observable, violations = check_observability(g)
    if not observable:
        raise_error(ErrorType.OBSERVABILITY_VIOLATION, detail=[list(v) for v in violations])

    arena = build_tracking_arena(g, node_limit, components)
    return solve_on_arena(arena, spec)


def solve_on_arena(arena: TrackingArena, spec: ObjectiveSpec) -> CoalitionOutcome:
    g = arena.game
    automaton = compile_objective(spec, colour_alphabet(g))
    pg = build_parity_game(arena, automaton)
    solution = solve_parity(pg)
    wins = pg.initial in solution.coalition
    logger.info("coalition %s %s", "wins" if wins else "loses", g.name)
    return CoalitionOutcome(
        game=g,
        arena=arena,
        automaton=automaton,
        parity_game=pg,
        solution=solution,
        wins=wins,
    )


def _class_label(block) -> str:
    return "{" + ",".join(sorted(map(str, block))) + "}"


def _machine_for(outcome: CoalitionOutcome, player: str) -> StrategyMachine:
    g, arena, dpa = outcome.game, outcome.arena, outcome.automaton
    index = g.player_index(player)
    strategy = outcome.solution.coalition_strategy

    def chosen_group(product_node):
        _, node, _, group_id = strategy[product_node]
        return arena.groups[node][group_id]

    start = (outcome.parity_game.initial, arena.models[arena.initial].block(player, arena.models[arena.initial].worlds[0]))
    names = {start: "q0"}
    order = [start]
    output: dict[str, str] = {}
    step: dict[tuple[str, str], str] = {}
    queue = deque([start])
    while queue:
        current = queue.popleft()
        product_node, block = current
        _, node, dpa_state = product_node
        model = arena.models[node]
        group = chosen_group(product_node)
        representative = min(block, key=model.worlds.index)
        output[names[current]] = group.assignment[representative][index]

        # children of the class, grouped by what the player observes next
        by_observation: dict[str, list[tuple[World, tuple, str]]] = {}
        for world in sorted(block, key=model.worlds.index):
            profile = group.assignment[world]
            for target in g.successors(model.state_of[world], profile):
                by_observation.setdefault(g.observation(player, target), []).append((world, profile, target))

        for observation, children in sorted(by_observation.items()):
            successor = group.successor_for(children[0])
            successor_model = arena.models[successor.node]
            successor_block = successor_model.block(player, successor.world_map[children[0]])
            if any(
                group.successor_for(child).node != successor.node
                or successor_model.block(player, successor.world_map[child]) != successor_block
                for child in children[1:]
            ):
                raise_error(
                    ErrorType.INTERNAL_INVARIANT,
                    detail=f"observation {observation!r} of player {player} splits across classes",
                )
            next_product = coalition_node(
                successor.node, dpa.step(dpa_state, arena.colours[successor.node])
            )
            following = (next_product, successor_block)
            if following not in names:
                names[following] = f"q{len(names)}"
                order.append(following)
                queue.append(following)
            step[(names[current], observation)] = names[following]

    labels = {
        names[key]: f"{key[0][1]}/{key[0][2]} {_class_label(key[1])}"
        for key in order
    }
    logger.debug("machine for player %s has %d states", player, len(order))
    return StrategyMachine(
        player=player,
        states=tuple(names[key] for key in order),
        initial="q0",
        output=output,
        step=step,
        labels=labels,
    )


def distribute_strategy(outcome: CoalitionOutcome) -> dict[str, StrategyMachine]:
    """One Moore machine per player realising the coalition's winning strategy."""
    if not outcome.wins:
        raise_error(ErrorType.COALITION_LOSES, detail={"game": outcome.game.name})
    return {player: _machine_for(outcome, player) for player in outcome.game.players}

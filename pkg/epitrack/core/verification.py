"""Checking a profile of strategy machines against an objective.

With every player's machine fixed, only nature branches: the product of game
states, machine states and condition-automaton states is a finite graph, and
the profile wins iff no reachable cycle has an odd least priority.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Literal, Mapping

import networkx as nx

from epitrack.core.game import GameStructure, History, LassoPlay, Profile, State
from epitrack.core.objective import ObjectiveSpec, colour_alphabet, compile_objective
from epitrack.core.parity import count_cycle_checks, dominant_cycle
from epitrack.core.synthesis import StrategyMachine
from epitrack.utils.error_utils import raise_error, ErrorType

logger = logging.getLogger(__name__)

# (game state, machine states in player order, automaton state)
ProductNode = tuple[State, tuple[str, ...], str]


@dataclass(frozen=True)
class VerificationReport:
    verdict: Literal["pass", "fail"]
    counterexample: LassoPlay | None = None
    offending_history: History | None = None
    product_nodes: int = 0
    cycles_checked: int = 0
    product: nx.DiGraph | None = field(default=None, compare=False, repr=False)

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def as_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "counterexample": self.counterexample.as_dict() if self.counterexample else None,
            "offending_history": self.offending_history.as_dict() if self.offending_history else None,
            "product_nodes": self.product_nodes,
            "cycles_checked": self.cycles_checked,
        }


def check_machines(g: GameStructure, machines: Mapping[str, StrategyMachine]) -> list[StrategyMachine]:
    """Machines in player order; rejects missing players and foreign actions."""
    missing = [p for p in g.players if p not in machines]
    if missing:
        raise_error(ErrorType.INVALID_STRATEGY, detail={"players without machine": missing})
    extra = sorted(set(machines) - set(g.players))
    if extra:
        raise_error(ErrorType.UNKNOWN_AGENT, detail={"machines for unknown players": extra})
    ordered = [machines[p] for p in g.players]
    for machine in ordered:
        if machine.initial not in machine.states:
            raise_error(ErrorType.INVALID_STRATEGY, detail={"player": machine.player, "initial": machine.initial})
        for state in machine.states:
            action = machine.output.get(state)
            if action not in g.actions[machine.player]:
                raise_error(
                    ErrorType.INVALID_STRATEGY,
                    detail={"player": machine.player, "state": state, "action": action},
                )
    return ordered


def profile_of(machines: list[StrategyMachine], memory: tuple[str, ...]) -> Profile:
    return tuple(m.output[s] for m, s in zip(machines, memory))


def advance(g: GameStructure, machines: list[StrategyMachine], memory: tuple[str, ...], target: State):
    """Machine states after observing `target`, or None if some machine is undefined there."""
    following = []
    for machine, state in zip(machines, memory):
        nxt = machine.next_state(state, g.observation(machine.player, target))
        if nxt is None:
            return None
        following.append(nxt)
    return tuple(following)


def _history_to(parents: dict, node: ProductNode) -> History:
    states, profiles = [node[0]], []
    while parents[node] is not None:
        node, profile = parents[node]
        states.append(node[0])
        profiles.append(profile)
    return History(tuple(reversed(states)), tuple(reversed(profiles)))


def verify_profile(
    g: GameStructure,
    machines: Mapping[str, StrategyMachine],
    spec: ObjectiveSpec,
) -> VerificationReport:
    ordered = check_machines(g, machines)
    dpa = compile_objective(spec, colour_alphabet(g))

    initial: ProductNode = (
        g.initial_state,
        tuple(m.initial for m in ordered),
        dpa.step(dpa.initial, g.colours[g.initial_state]),
    )
    product = nx.DiGraph()
    product.add_node(initial, priority=dpa.priority[initial[2]])
    parents: dict[ProductNode, tuple[ProductNode, Profile] | None] = {initial: None}
    queue = deque([initial])
    while queue:
        current = queue.popleft()
        state, memory, dpa_state = current
        profile = profile_of(ordered, memory)
        for target in g.successors(state, profile):
            following = advance(g, ordered, memory, target)
            if following is None:
                offending = _history_to(parents, current).extend(profile, target)
                logger.info("profile undefined after %d rounds", offending.rounds)
                return VerificationReport(
                    verdict="fail",
                    offending_history=offending,
                    product_nodes=product.number_of_nodes(),
                    product=product,
                )
            successor = (target, following, dpa.step(dpa_state, g.colours[target]))
            if successor not in product:
                product.add_node(successor, priority=dpa.priority[successor[2]])
                parents[successor] = (current, profile)
                queue.append(successor)
            product.add_edge(current, successor, profile=profile)

    def priority(node: ProductNode) -> int:
        return product.nodes[node]["priority"]

    cycles = count_cycle_checks(product, priority, 1)
    found = dominant_cycle(product, priority, 1)
    if found is None:
        logger.info("profile wins on %s (%d product nodes)", g.name, product.number_of_nodes())
        return VerificationReport(
            verdict="pass",
            product_nodes=product.number_of_nodes(),
            cycles_checked=cycles,
            product=product,
        )

    _, cycle_nodes = found
    prefix = _history_to(parents, cycle_nodes[0])
    profiles = tuple(product[a][b]["profile"] for a, b in zip(cycle_nodes, cycle_nodes[1:]))
    cycle = History(tuple(n[0] for n in cycle_nodes), profiles)
    logger.info("profile loses on %s; rejecting cycle of %d rounds", g.name, cycle.rounds)
    return VerificationReport(
        verdict="fail",
        counterexample=LassoPlay(prefix=prefix, cycle=cycle),
        product_nodes=product.number_of_nodes(),
        cycles_checked=cycles,
        product=product,
    )

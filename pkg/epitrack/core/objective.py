"""Winning conditions over state colours and their product with an arena."""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Annotated, Literal, Sequence, Union

import networkx as nx
from pydantic import BaseModel, ConfigDict, Field, NonNegativeInt

from epitrack.core.game import GameStructure
from epitrack.core.parity import COALITION, NATURE, ParityGame
from epitrack.core.tracking import TrackingArena
from epitrack.utils.error_utils import raise_error, ErrorType
from epitrack.utils.validators import observability_violations

logger = logging.getLogger(__name__)


class _Objective(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class ReachabilityObjective(_Objective):
    kind: Literal["reachability"] = "reachability"
    colours: tuple[str, ...]


class SafetyObjective(_Objective):
    kind: Literal["safety"] = "safety"
    colours: tuple[str, ...]


class BuchiObjective(_Objective):
    kind: Literal["buchi"] = "buchi"
    colours: tuple[str, ...]


class CoBuchiObjective(_Objective):
    kind: Literal["cobuchi"] = "cobuchi"
    colours: tuple[str, ...]


class ParityObjective(_Objective):
    kind: Literal["parity"] = "parity"
    priorities: dict[str, NonNegativeInt]


class AutomatonObjective(_Objective):
    kind: Literal["automaton"] = "automaton"
    states: tuple[str, ...]
    initial: str
    # state -> colour -> state
    transitions: dict[str, dict[str, str]]
    priorities: dict[str, NonNegativeInt]


ObjectiveSpec = Annotated[
    Union[
        ReachabilityObjective,
        SafetyObjective,
        BuchiObjective,
        CoBuchiObjective,
        ParityObjective,
        AutomatonObjective,
    ],
    Field(discriminator="kind"),
]


@dataclass(frozen=True)
class ParityAutomaton:
    """Deterministic parity automaton over colours, min-even acceptance."""

    states: tuple[str, ...]
    initial: str
    alphabet: tuple[str, ...]
    transitions: dict[tuple[str, str], str] = field(compare=False)
    priority: dict[str, int] = field(compare=False)

    def step(self, state: str, colour: str) -> str:
        try:
            return self.transitions[(state, colour)]
        except KeyError:
            raise_error(ErrorType.ALPHABET_MISMATCH, detail={"state": state, "colour": colour})

    def run(self, colours: Sequence[str]) -> list[str]:
        """States after reading each colour; the initial state is not included."""
        states, current = [], self.initial
        for colour in colours:
            current = self.step(current, colour)
            states.append(current)
        return states

    def accepts_lasso(self, prefix: Sequence[str], cycle: Sequence[str]) -> bool:
        if not cycle:
            raise_error(ErrorType.INVALID_HISTORY, detail="lasso cycle must be nonempty")
        current = self.initial
        for colour in prefix:
            current = self.step(current, colour)
        # iterate the cycle until its entry state repeats
        entries: dict[str, int] = {}
        seen_priorities: list[list[int]] = []
        while current not in entries:
            entries[current] = len(seen_priorities)
            lap = []
            for colour in cycle:
                current = self.step(current, colour)
                lap.append(self.priority[current])
            seen_priorities.append(lap)
        recurring = [p for lap in seen_priorities[entries[current]:] for p in lap]
        return min(recurring) % 2 == 0


def _checked_colours(spec, alphabet: Sequence[str]) -> frozenset[str]:
    unknown = sorted(set(spec.colours) - set(alphabet))
    if unknown:
        raise_error(ErrorType.UNKNOWN_COLOUR, detail={"colours": unknown, "alphabet": sorted(alphabet)})
    return frozenset(spec.colours)


def _two_state(alphabet, marked, low: str, high: str, *, absorbing: str | None = None) -> dict[tuple[str, str], str]:
    # `low` is entered on a marked colour, `high` otherwise
    transitions = {}
    for state in (low, high):
        for colour in alphabet:
            if state == absorbing:
                transitions[(state, colour)] = state
            else:
                transitions[(state, colour)] = low if colour in marked else high
    return transitions


def compile_objective(spec: ObjectiveSpec, alphabet: Sequence[str]) -> ParityAutomaton:
    alphabet = tuple(sorted(set(alphabet)))
    kind = spec.kind

    if kind == "buchi":
        marked = _checked_colours(spec, alphabet)
        states, initial = ("seen", "other"), "other"
        transitions = _two_state(alphabet, marked, "seen", "other")
        priority = {"seen": 0, "other": 1}
    elif kind == "cobuchi":
        marked = _checked_colours(spec, alphabet)
        states, initial = ("seen", "other"), "other"
        transitions = _two_state(alphabet, marked, "seen", "other")
        priority = {"seen": 1, "other": 2}
    elif kind == "reachability":
        marked = _checked_colours(spec, alphabet)
        states, initial = ("goal", "pending"), "pending"
        transitions = _two_state(alphabet, marked, "goal", "pending", absorbing="goal")
        priority = {"goal": 0, "pending": 1}
    elif kind == "safety":
        marked = _checked_colours(spec, alphabet)
        states, initial = ("violated", "safe"), "safe"
        transitions = _two_state(alphabet, marked, "violated", "safe", absorbing="violated")
        priority = {"violated": 1, "safe": 0}
    elif kind == "parity":
        unknown = sorted(set(spec.priorities) - set(alphabet))
        if unknown:
            raise_error(ErrorType.UNKNOWN_COLOUR, detail={"colours": unknown, "alphabet": list(alphabet)})
        missing = sorted(set(alphabet) - set(spec.priorities))
        if missing:
            raise_error(ErrorType.INVALID_OBJECTIVE, detail={"colours without priority": missing})
        # one state per colour; reading a colour moves to its state
        states, initial = alphabet, alphabet[0]
        transitions = {(state, colour): colour for state in states for colour in alphabet}
        priority = dict(spec.priorities)
    elif kind == "automaton":
        return _explicit_automaton(spec)
    else:
        raise_error(ErrorType.INVALID_OBJECTIVE, detail=f"unknown objective kind {kind!r}")

    logger.debug("compiled %s objective into %d states", kind, len(states))
    return ParityAutomaton(
        states=tuple(states),
        initial=initial,
        alphabet=alphabet,
        transitions=transitions,
        priority=priority,
    )


def _explicit_automaton(spec: AutomatonObjective) -> ParityAutomaton:
    states = set(spec.states)
    if not spec.states or spec.initial not in states:
        raise_error(ErrorType.INVALID_OBJECTIVE, detail=f"initial state {spec.initial!r} is not an automaton state")
    missing_priority = sorted(states - set(spec.priorities))
    if missing_priority:
        raise_error(ErrorType.INVALID_OBJECTIVE, detail={"states without priority": missing_priority})

    alphabet = tuple(sorted({c for row in spec.transitions.values() for c in row}))
    transitions = {}
    for state in spec.states:
        row = spec.transitions.get(state, {})
        absent = sorted(set(alphabet) - set(row))
        if absent:
            raise_error(ErrorType.INVALID_OBJECTIVE, detail={"state": state, "missing colours": absent})
        for colour, target in row.items():
            if target not in states:
                raise_error(ErrorType.INVALID_OBJECTIVE, detail={"state": state, "unknown target": target})
            transitions[(state, colour)] = target
    extra = sorted(set(spec.transitions) - states)
    if extra:
        raise_error(ErrorType.INVALID_OBJECTIVE, detail={"unknown states": extra})

    return ParityAutomaton(
        states=tuple(spec.states),
        initial=spec.initial,
        alphabet=alphabet,
        transitions=transitions,
        priority=dict(spec.priorities),
    )


def dual_objective(spec: ObjectiveSpec) -> ObjectiveSpec:
    """The objective won exactly by the plays the given one loses."""
    kind = spec.kind
    if kind == "buchi":
        return CoBuchiObjective(colours=spec.colours)
    if kind == "cobuchi":
        return BuchiObjective(colours=spec.colours)
    if kind == "reachability":
        return SafetyObjective(colours=spec.colours)
    if kind == "safety":
        return ReachabilityObjective(colours=spec.colours)
    if kind == "parity":
        return ParityObjective(priorities={c: p + 1 for c, p in spec.priorities.items()})
    return spec.model_copy(update={"priorities": {q: p + 1 for q, p in spec.priorities.items()}})


def check_observability(g: GameStructure) -> tuple[bool, list[tuple[str, str, str]]]:
    violations = observability_violations(g)
    return not violations, violations


def colour_alphabet(g: GameStructure) -> tuple[str, ...]:
    return tuple(sorted(set(g.colours.values())))


def coalition_node(node: int, state: str) -> tuple:
    return ("C", node, state)


def nature_node(node: int, state: str, group_id: int) -> tuple:
    return ("N", node, state, group_id)


def build_parity_game(arena: TrackingArena, dpa: ParityAutomaton) -> ParityGame:
    """Product of the arena with the condition automaton.

    Coalition nodes ("C", arena node, automaton state) choose an edge group;
    nature nodes ("N", arena node, automaton state, group id) choose the
    successor component. The automaton reads the colour of every arena node
    entered, the initial one included.
    """
    if not arena.observable:
        _, violations = check_observability(arena.game)
        raise_error(ErrorType.OBSERVABILITY_VIOLATION, detail=[list(v) for v in violations])
    missing = sorted({c for c in arena.colours if c is not None} - set(dpa.alphabet))
    if missing:
        raise_error(ErrorType.ALPHABET_MISMATCH, detail={"colours": missing, "alphabet": list(dpa.alphabet)})

    graph = nx.DiGraph()
    initial = coalition_node(arena.initial, dpa.step(dpa.initial, arena.colours[arena.initial]))
    graph.add_node(initial, owner=COALITION, priority=dpa.priority[initial[2]])
    queue = deque([initial])
    while queue:
        current = queue.popleft()
        _, node, state = current
        for group in arena.groups[node]:
            choice = nature_node(node, state, group.group_id)
            graph.add_node(choice, owner=NATURE, priority=dpa.priority[state])
            graph.add_edge(current, choice)
            for succ in group.successors:
                target = coalition_node(succ.node, dpa.step(state, arena.colours[succ.node]))
                if target not in graph:
                    graph.add_node(target, owner=COALITION, priority=dpa.priority[target[2]])
                    queue.append(target)
                graph.add_edge(choice, target)

    logger.info("parity game for %s has %d nodes", arena.game.name, graph.number_of_nodes())
    return ParityGame(graph=graph, initial=initial)

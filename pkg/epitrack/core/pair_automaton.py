"""Literal pair-automaton construction for uncertain histories.

The nondeterministic automaton reads letters (profile, state). Its first
component follows the input history; the second guesses another history that
looks the same to agent 0. It accepts when the two components differ, i.e. at
histories where certainty fails. Determinising and complementing it must give
the same verdicts as the belief tracker; this module exists to cross-check
that.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field

from epitrack.core.certainty import BeliefState, build_certainty_automaton
from epitrack.core.game import GameStructure, Profile, State

logger = logging.getLogger(__name__)

SINK = ("<sink>", "<sink>")

Pair = tuple[State, State]
Letter = tuple[Profile, State]


@dataclass(frozen=True)
class PairAutomaton:
    game: GameStructure = field(compare=False)
    strict: bool = False

    @property
    def initial(self) -> Pair:
        return (self.game.initial_state, self.game.initial_state)

    def letters(self) -> list[Letter]:
        return [(profile, state) for profile in self.game.profiles for state in self.game.states]

    def accepting(self, pair: Pair) -> bool:
        return pair != SINK and pair[0] != pair[1]

    def _alike(self, guess: State, target: State) -> bool:
        g = self.game
        if self.strict:
            # the stricter reading: same observation for every player
            return all(g.observations[p][guess] == g.observations[p][target] for p in g.players)
        return g.partition.class_of[guess] == g.partition.class_of[target]

    def step(self, pair: Pair, letter: Letter) -> frozenset[Pair]:
        profile, target = letter
        if pair == SINK:
            return frozenset({SINK})
        first, second = pair
        if target not in self.game.successors(first, profile):
            return frozenset({SINK})
        guesses = {w for w in self.game.post(second) if self._alike(w, target)}
        if not guesses:
            return frozenset({SINK})
        return frozenset((target, w) for w in guesses)


@dataclass(frozen=True)
class SubsetAutomaton:
    """Deterministic automaton over pair sets; accepts the complement language."""

    initial: frozenset[Pair]
    states: tuple[frozenset[Pair], ...]
    transitions: dict[tuple[frozenset[Pair], Letter], frozenset[Pair]] = field(compare=False)

    def accepts(self, subset: frozenset[Pair]) -> bool:
        return not any(pair != SINK and pair[0] != pair[1] for pair in subset)

    def step(self, subset: frozenset[Pair], letter: Letter) -> frozenset[Pair]:
        return self.transitions[(subset, letter)]


def subset_step(nfa: PairAutomaton, subset: frozenset[Pair], letter: Letter) -> frozenset[Pair]:
    return frozenset(q for pair in subset for q in nfa.step(pair, letter))


def determinise_complement(nfa: PairAutomaton) -> SubsetAutomaton:
    initial = frozenset({nfa.initial})
    order = [initial]
    seen = {initial}
    transitions = {}
    queue = deque([initial])
    letters = nfa.letters()
    while queue:
        subset = queue.popleft()
        for letter in letters:
            successor = subset_step(nfa, subset, letter)
            transitions[(subset, letter)] = successor
            if successor not in seen:
                seen.add(successor)
                order.append(successor)
                queue.append(successor)
    logger.debug("determinised pair automaton has %d subsets", len(order))
    return SubsetAutomaton(initial=initial, states=tuple(order), transitions=transitions)


@dataclass(frozen=True)
class CrossCheck:
    explored: int
    mismatches: tuple[tuple[BeliefState, frozenset[Pair]], ...]


def cross_check_pair_automaton(g: GameStructure, *, strict: bool = False) -> CrossCheck:
    """Walk belief tracker and subset automaton in lockstep over every history."""
    tracker = build_certainty_automaton(g)
    dfa = determinise_complement(PairAutomaton(g, strict=strict))
    start = (tracker.initial, dfa.initial)
    seen = {start}
    queue = deque([start])
    mismatches = []
    while queue:
        belief, subset = queue.popleft()
        if belief.certain != dfa.accepts(subset):
            mismatches.append((belief, subset))
        for profile, target in g.moves_from(belief.current):
            pair = (tracker.step(belief, profile, target), dfa.step(subset, (profile, target)))
            if pair not in seen:
                seen.add(pair)
                queue.append(pair)
    if mismatches:
        logger.warning("pair automaton disagrees with the belief tracker on %d product states", len(mismatches))
    return CrossCheck(explored=len(seen), mismatches=tuple(mismatches))

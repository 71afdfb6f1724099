"""Seeded simulation of a strategy profile against a random nature."""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field
from typing import Mapping

import pandas as pd

from epitrack.core.certainty import certainty_flags, certainty_gaps, belief_run
from epitrack.core.game import AGENT_ZERO, GameStructure, History, observe
from epitrack.core.synthesis import StrategyMachine
from epitrack.core.verification import advance, check_machines, profile_of
from epitrack.utils.error_utils import raise_error, ErrorType

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SimulationTrace:
    history: History
    beliefs: list[list[str]] = field(compare=False)
    certain: list[bool] = field(compare=False)
    gap_histogram: dict[int, int] = field(compare=False)
    open_gap: int = 0
    colour_visits: dict[str, int] = field(default_factory=dict, compare=False)
    seed: int = 0

    def as_dict(self) -> dict:
        return {
            "seed": self.seed,
            "steps": self.history.rounds,
            "history": self.history.as_dict(),
            "beliefs": self.beliefs,
            "certain": self.certain,
            "gap_histogram": {str(k): v for k, v in self.gap_histogram.items()},
            "open_gap": self.open_gap,
            "colour_visits": self.colour_visits,
        }


def _counts(values: list) -> dict:
    if not values:
        return {}
    counts = pd.Series(values).value_counts().sort_index()
    return {k.item() if hasattr(k, "item") else k: int(v) for k, v in counts.items()}


def simulate(
    g: GameStructure,
    machines: Mapping[str, StrategyMachine],
    steps: int,
    seed: int,
) -> SimulationTrace:
    """Play `steps` rounds; nature picks uniformly among successors."""
    if steps < 0:
        raise_error(ErrorType.INVALID_HISTORY, detail=f"steps must be nonnegative, got {steps}")
    ordered = check_machines(g, machines)
    rng = random.Random(seed)

    history = History.start(g.initial_state)
    memory = tuple(m.initial for m in ordered)
    for _ in range(steps):
        profile = profile_of(ordered, memory)
        target = rng.choice(g.successors(history.last, profile))
        following = advance(g, ordered, memory, target)
        if following is None:
            raise_error(
                ErrorType.INVALID_STRATEGY,
                detail={"offending_history": history.extend(profile, target).as_dict()},
            )
        history = history.extend(profile, target)
        memory = following

    beliefs = belief_run(g, observe(g, history, AGENT_ZERO))
    flags = certainty_flags(g, history)
    gaps, open_gap = certainty_gaps(flags)
    logger.debug("simulated %d rounds of %s with seed %d", steps, g.name, seed)
    return SimulationTrace(
        history=history,
        beliefs=[sorted(b) for b in beliefs],
        certain=flags,
        gap_histogram=_counts(gaps),
        open_gap=open_gap,
        colour_visits=_counts([g.colours[s] for s in history.states]),
        seed=seed,
    )

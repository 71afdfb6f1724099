from pathlib import Path

import click

from epitrack.commands.common import game_argument, json_option, reported
from epitrack.core.certainty import certainty_flags, decide_recurring_certainty
from epitrack.core.game import cycles_through_perfect_information, perfect_information_states
from epitrack.core.pair_automaton import cross_check_pair_automaton
from epitrack.utils.file_handler import load_game
from epitrack.utils.response_models import Report


@click.command("certainty")
@game_argument
@click.option("--cross-check", is_flag=True, help="Compare with the determinised pair automaton.")
@click.option("--strict", is_flag=True, help="Cross-check the same-observation-for-all-players reading.")
@json_option
@reported
def certainty(path: Path, cross_check: bool, strict: bool) -> Report:
    """Decide recurring certainty and report the certainty period."""
    g, _ = load_game(path)
    verdict = decide_recurring_certainty(g)
    data = {
        "game": g.name,
        "recurring": verdict.recurring,
        "minimal_period": verdict.minimal_period,
        "state_bound": verdict.state_bound,
        "automaton_states": verdict.automaton_states,
        "perfect_information_states": sorted(perfect_information_states(g)),
        "sufficient_condition": cycles_through_perfect_information(g),
        "witness": None,
    }
    if verdict.witness is not None:
        # one unrolling of the cycle, annotated per position
        unrolled = verdict.witness.unroll(1)
        data["witness"] = {**verdict.witness.as_dict(), "certain": certainty_flags(g, unrolled)}
    if cross_check or strict:
        check = cross_check_pair_automaton(g, strict=strict)
        data["cross_check"] = {"strict": strict, "explored": check.explored, "mismatches": len(check.mismatches)}

    if verdict.recurring:
        return Report.verdict(True, f"{g.name}: recurring certainty, period {verdict.minimal_period}", data)
    cycle = " -> ".join(verdict.witness.cycle.states)
    return Report.verdict(False, f"{g.name}: no recurring certainty; witness cycle {cycle}", data)

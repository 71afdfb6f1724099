from pathlib import Path

import click

from epitrack.commands.common import (
    components_option,
    game_argument,
    json_option,
    node_limit_option,
    reported,
    require_objective,
)
from epitrack.core.synthesis import decide_coalition_winner, distribute_strategy
from epitrack.utils.file_handler import load_game, serialise_strategy, write_text_atomic
from epitrack.utils.response_models import Report


def _summary(outcome) -> dict:
    return {
        "game": outcome.game.name,
        "wins": outcome.wins,
        "arena_nodes": len(outcome.arena),
        "parity_game_nodes": len(outcome.parity_game),
        "coalition_region": len(outcome.solution.coalition),
        "nature_region": len(outcome.solution.nature),
    }


@click.command("solve")
@game_argument
@node_limit_option
@components_option
@json_option
@reported
def solve(path: Path, node_limit: int, components: str) -> Report:
    """Decide whether the grand coalition wins the game's objective."""
    g, objective = load_game(path)
    outcome = decide_coalition_winner(g, require_objective(objective, path), node_limit, components)
    verdict = "coalition wins" if outcome.wins else "coalition loses"
    return Report.verdict(outcome.wins, f"{g.name}: {verdict}", _summary(outcome))


@click.command("synth")
@game_argument
@click.option("-o", "--output", "output", type=click.Path(path_type=Path, dir_okay=False), required=True,
              help="Strategy file to write.")
@node_limit_option
@components_option
@json_option
@reported
def synth(path: Path, output: Path, node_limit: int, components: str) -> Report:
    """Synthesise one strategy machine per player and write them to a file."""
    g, objective = load_game(path)
    outcome = decide_coalition_winner(g, require_objective(objective, path), node_limit, components)
    data = _summary(outcome)
    if not outcome.wins:
        return Report.verdict(False, f"{g.name}: coalition loses; no strategy written", data)

    machines = distribute_strategy(outcome)
    write_text_atomic(output, serialise_strategy(machines, game=g.name))
    data["written"] = str(output)
    data["machine_states"] = {player: len(m.states) for player, m in machines.items()}
    return Report.verdict(True, f"{g.name}: strategy written to {output}", data)

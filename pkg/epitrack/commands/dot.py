from pathlib import Path

import click

from epitrack.commands.common import (
    components_option,
    game_argument,
    json_option,
    node_limit_option,
    reported,
    require_objective,
    success,
)
from epitrack.core.certainty import build_certainty_automaton
from epitrack.core.synthesis import decide_coalition_winner, distribute_strategy
from epitrack.core.tracking import build_tracking_arena
from epitrack.core.verification import verify_profile
from epitrack.utils.dot_export import DOT_KINDS, export_dot, node_lines
from epitrack.utils.file_handler import load_game, load_strategy, write_text_atomic
from epitrack.utils.response_models import Report


@click.command("dot")
@game_argument
@click.option("--what", type=click.Choice(DOT_KINDS), required=True, help="Artifact to draw.")
@click.option("-o", "--output", "output", type=click.Path(path_type=Path, dir_okay=False),
              help="File to write; standard output if omitted.")
@click.option("--strategy", "strategy_path", type=click.Path(path_type=Path, dir_okay=False),
              help="Strategy file for the strategy and verification-product drawings.")
@node_limit_option
@components_option
@json_option
@reported
def dot(path: Path, what: str, output: Path | None, strategy_path: Path | None, node_limit: int, components: str) -> Report | None:
    """Export an arena, certainty automaton, strategy or verification product as DOT."""
    g, objective = load_game(path)
    if what == "arena":
        artifact = build_tracking_arena(g, node_limit, components)
    elif what == "beliefs":
        artifact = build_certainty_automaton(g)
    else:
        if strategy_path is not None:
            machines = load_strategy(strategy_path)
        else:
            outcome = decide_coalition_winner(g, require_objective(objective, path), node_limit, components)
            machines = distribute_strategy(outcome)
        if what == "strategy":
            artifact = machines
        else:
            artifact = verify_profile(g, machines, require_objective(objective, path))

    text = export_dot(what, artifact)
    if output is None:
        click.echo(text, nl=False)
        return None
    write_text_atomic(output, text)
    return success(f"{g.name}: {what} written to {output}", {"written": str(output), "nodes": len(node_lines(text))})

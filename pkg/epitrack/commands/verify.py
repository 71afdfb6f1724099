from pathlib import Path

import click

from epitrack.commands.common import game_argument, json_option, reported, require_objective, strategy_argument, success
from epitrack.core.simulation import simulate
from epitrack.core.verification import verify_profile
from epitrack.utils.file_handler import load_game, load_strategy
from epitrack.utils.response_models import Report


@click.command("verify")
@game_argument
@strategy_argument
@json_option
@reported
def verify(path: Path, strategy_path: Path) -> Report:
    """Check that a strategy profile wins against every behaviour of nature."""
    g, objective = load_game(path)
    report = verify_profile(g, load_strategy(strategy_path), require_objective(objective, path))
    data = {"game": g.name, **report.as_dict()}
    if report.passed:
        return Report.verdict(True, f"{g.name}: profile wins", data)
    if report.counterexample is None:
        return Report.verdict(False, f"{g.name}: profile undefined on a reachable observation", data)
    cycle = " -> ".join(report.counterexample.cycle.states)
    return Report.verdict(False, f"{g.name}: profile loses; rejecting cycle {cycle}", data)


@click.command("simulate")
@game_argument
@strategy_argument
@click.option("--steps", type=click.IntRange(min=0), default=20, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@json_option
@reported
def simulate_command(path: Path, strategy_path: Path, steps: int, seed: int) -> Report:
    """Play the profile against a seeded random nature."""
    g, _ = load_game(path)
    trace = simulate(g, load_strategy(strategy_path), steps, seed)
    return success(f"{g.name}: simulated {steps} rounds with seed {seed}", {"game": g.name, **trace.as_dict()})

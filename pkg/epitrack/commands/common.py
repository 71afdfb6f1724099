import functools
import json
from pathlib import Path

import click

from epitrack.core.objective import ObjectiveSpec
from epitrack.core.tracking import DEFAULT_NODE_LIMIT
from epitrack.utils.error_utils import EXIT_ERROR, EpitrackError, raise_error, ErrorType
from epitrack.utils.response_models import Report, render

json_option = click.option("--json", "as_json", is_flag=True, help="Print a machine-readable JSON report.")
game_argument = click.argument("path", type=click.Path(path_type=Path, dir_okay=False))
strategy_argument = click.argument("strategy_path", type=click.Path(path_type=Path, dir_okay=False))
node_limit_option = click.option(
    "--node-limit",
    type=click.IntRange(min=1),
    default=DEFAULT_NODE_LIMIT,
    show_default=True,
    help="Abort tracking after this many distinct epistemic models.",
)
components_option = click.option(
    "--components",
    type=click.Choice(["all", "players-only"]),
    default="all",
    show_default=True,
    help="Agents whose relations link successor worlds into one component.",
)


def reported(func):
    """Run a command body returning a Report; print it and exit with its code."""

    @functools.wraps(func)
    def wrapper(*args, as_json: bool = False, **kwargs):
        ctx = click.get_current_context()
        try:
            report = func(*args, **kwargs)
        except EpitrackError as e:
            if as_json:
                click.echo(json.dumps(e.payload, indent=2, sort_keys=True, default=str), err=True)
            else:
                detail = e.detail if isinstance(e.detail, str) else json.dumps(e.detail, sort_keys=True, default=str)
                click.echo(f"error: {e.type.value}: {detail}", err=True)
            ctx.exit(EXIT_ERROR)
        if report is not None:
            click.echo(render(report, as_json))
            ctx.exit(report.code)

    return wrapper


def require_objective(objective: ObjectiveSpec | None, path: Path) -> ObjectiveSpec:
    if objective is None:
        raise_error(ErrorType.MISSING_OBJECTIVE, detail=f"{path} has no objective section")
    return objective


def success(message: str, data=None) -> Report:
    return Report(status="success", code=0, message=message, data=data)

import logging
import os
import sys

import click

from epitrack.commands.certainty import certainty
from epitrack.commands.dot import dot
from epitrack.commands.solve import solve, synth
from epitrack.commands.track import track
from epitrack.commands.validate import validate
from epitrack.commands.verify import simulate_command, verify

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
LOG_LEVEL = os.getenv("EPITRACK_LOG_LEVEL", "WARNING").upper()


def configure_logging(verbose: int) -> None:
    if verbose >= 2:
        level = logging.DEBUG
    elif verbose == 1:
        level = logging.INFO
    else:
        level = getattr(logging, LOG_LEVEL, logging.WARNING)
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr, force=True)


@click.group()
@click.option("-v", "--verbose", count=True, help="-v for progress, -vv for construction details.")
def cli(verbose: int):
    """Certainty, tracking and strategy synthesis for coordination games."""
    configure_logging(verbose)


cli.add_command(validate)
cli.add_command(certainty)
cli.add_command(track)
cli.add_command(solve)
cli.add_command(synth)
cli.add_command(verify)
cli.add_command(simulate_command, name="simulate")
cli.add_command(dot)


def run_cli(argv: list[str] | None = None) -> int:
    """Run one command and return its exit code."""
    try:
        cli.main(args=argv, prog_name="epitrack", standalone_mode=True)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else (0 if e.code is None else 2)
    return 0

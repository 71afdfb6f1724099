from pathlib import Path

import click

from epitrack.commands.common import game_argument, json_option, reported
from epitrack.utils.file_handler import parse_game_file, read_capped
from epitrack.utils.response_models import Report
from epitrack.utils.validators import sha256_text, validate_structure


@click.command("validate")
@game_argument
@json_option
@reported
def validate(path: Path) -> Report:
    """Check a game file against every structural invariant."""
    text = read_capped(path)
    g, objective = parse_game_file(text, name=path.stem, validate=False)
    violations = validate_structure(g)
    data = {
        "game": g.name,
        "sha256": sha256_text(text),
        "players": len(g.players),
        "states": len(g.states),
        "moves": len(g.moves),
        "objective": objective.kind if objective is not None else None,
        "violations": [v.as_dict() for v in violations],
    }
    if violations:
        return Report.verdict(False, f"{g.name}: {len(violations)} violation(s)", data)
    return Report.verdict(True, f"{g.name}: valid", data)

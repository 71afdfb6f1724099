from pathlib import Path

import click

from epitrack.commands.common import components_option, game_argument, json_option, node_limit_option, reported, success
from epitrack.core.tracking import build_tracking_arena
from epitrack.utils.file_handler import load_game
from epitrack.utils.response_models import Report


@click.command("track")
@game_argument
@node_limit_option
@components_option
@json_option
@reported
def track(path: Path, node_limit: int, components: str) -> Report:
    """Build the epistemic tracking arena."""
    g, _ = load_game(path)
    arena = build_tracking_arena(g, node_limit, components)
    order = arena.node_order()
    nodes = [
        {
            "node": rank,
            "worlds": arena.models[node].size,
            "states": arena.models[node].end_states(),
            "colour": arena.colours[node],
            "groups": len(arena.groups[node]),
            "initial": node == arena.initial,
        }
        for rank, node in enumerate(order)
    ]
    data = {
        "game": g.name,
        "components": components,
        "nodes": len(arena),
        "edge_groups": sum(len(groups) for groups in arena.groups),
        "largest_model_worlds": max(m.size for m in arena.models),
        "observable": arena.observable,
        "models": nodes,
    }
    return success(f"{g.name}: tracking arena with {len(arena)} nodes", data)

import itertools
import json
import os
import tempfile
from contextlib import contextmanager
from pathlib import Path

from filelock import FileLock
from pydantic import ValidationError

from epitrack.core.game import GameStructure
from epitrack.core.objective import ObjectiveSpec
from epitrack.core.synthesis import StrategyMachine
from epitrack.utils.error_utils import raise_error, ErrorType
from epitrack.utils.response_models import (
    GameDocument,
    MachineDocument,
    PlayerDocument,
    StrategyDocument,
)
from epitrack.utils.validators import validate_structure

# Max input size (default 16 MB)
MAX_BYTES = int(os.getenv("EPITRACK_MAX_GAME_BYTES", str(16 * 1024 * 1024)))

WILDCARD = "*"


def read_capped(path: Path) -> str:
    # Stream the file into memory with a hard size cap
    total = 0
    chunks: list[bytes] = []
    try:
        with open(path, "rb") as fh:
            while True:
                chunk = fh.read(1024 * 1024)  # 1 MB
                if not chunk:
                    break
                total += len(chunk)
                if total > MAX_BYTES:
                    raise_error(ErrorType.FILE_TOO_LARGE, detail=f"limit {MAX_BYTES} bytes")
                chunks.append(chunk)
    except OSError as e:
        raise_error(ErrorType.UNREADABLE_FILE, detail=f"{path}: {e.strerror or e}")
    try:
        return b"".join(chunks).decode("utf-8")
    except UnicodeDecodeError as e:
        raise_error(ErrorType.UNREADABLE_FILE, detail=f"{path}: not UTF-8 ({e.reason})")


def _load_json(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise_error(ErrorType.SYNTAX_ERROR, detail={"line": e.lineno, "column": e.colno, "message": e.msg})


def _schema_errors(e: ValidationError) -> list[dict]:
    return [{"loc": [str(part) for part in err["loc"]], "msg": err["msg"]} for err in e.errors()]


def expand_profile(doc: GameDocument, profile: list[str]) -> list[tuple[str, ...]]:
    """Every concrete profile matching one with `*` wildcards."""
    options = []
    for position, action in enumerate(profile):
        if action == WILDCARD and position < len(doc.players):
            options.append(doc.players[position].actions)
        else:
            options.append([action])
    return [tuple(p) for p in itertools.product(*options)]


def game_from_document(doc: GameDocument, name: str = "game") -> GameStructure:
    return GameStructure.create(
        states=doc.states,
        initial_state=doc.initial,
        players=[p.id for p in doc.players],
        actions={p.id: p.actions for p in doc.players},
        observations={p.id: p.observations for p in doc.players},
        moves=[(src, profile, dst) for src, pattern, dst in doc.moves for profile in expand_profile(doc, pattern)],
        colours=doc.colours,
        name=doc.name or name,
    )


def parse_game_file(text: str, *, name: str = "game", validate: bool = True) -> tuple[GameStructure, ObjectiveSpec | None]:
    raw = _load_json(text)
    try:
        doc = GameDocument.model_validate(raw)
    except ValidationError as e:
        raise_error(ErrorType.SCHEMA_ERROR, detail=_schema_errors(e))

    g = game_from_document(doc, name)
    if validate:
        violations = validate_structure(g)
        if violations:
            raise_error(ErrorType.INVALID_STRUCTURE, detail=[v.as_dict() for v in violations])
    return g, doc.objective


def load_game(path: Path, *, validate: bool = True) -> tuple[GameStructure, ObjectiveSpec | None]:
    path = Path(path)
    return parse_game_file(read_capped(path), name=path.stem, validate=validate)


def game_to_document(g: GameStructure, objective: ObjectiveSpec | None = None) -> GameDocument:
    return GameDocument(
        name=g.name,
        players=[
            PlayerDocument(id=p, actions=list(g.actions[p]), observations=dict(g.observations[p]))
            for p in g.players
        ],
        states=list(g.states),
        initial=g.initial_state,
        moves=[(src, list(profile), dst) for src, profile, dst in sorted(g.moves)],
        colours=dict(g.colours),
        objective=objective,
    )


def serialise_game(g: GameStructure, objective: ObjectiveSpec | None = None) -> str:
    doc = game_to_document(g, objective)
    return json.dumps(doc.model_dump(mode="json", exclude_none=True), indent=2) + "\n"


def serialise_strategy(machines: dict[str, StrategyMachine], game: str | None = None) -> str:
    doc = StrategyDocument(
        game=game,
        machines=[
            MachineDocument(
                player=m.player,
                states=list(m.states),
                initial=m.initial,
                output=dict(m.output),
                step={
                    state: {obs: target for (source, obs), target in sorted(m.step.items()) if source == state}
                    for state in m.states
                },
                labels=dict(m.labels),
            )
            for m in machines.values()
        ],
    )
    return json.dumps(doc.model_dump(mode="json", exclude_none=True), indent=2) + "\n"


def _machine_from_document(doc: MachineDocument) -> StrategyMachine:
    states = set(doc.states)
    problems = []
    if doc.initial not in states:
        problems.append(f"initial state {doc.initial!r} is not a machine state")
    problems += [f"state {s!r} has no output" for s in doc.states if s not in doc.output]
    for source, row in doc.step.items():
        if source not in states:
            problems.append(f"step from unknown state {source!r}")
        problems += [f"step to unknown state {t!r}" for t in row.values() if t not in states]
    if problems:
        raise_error(ErrorType.INVALID_STRATEGY, detail={"player": doc.player, "problems": problems})
    return StrategyMachine(
        player=doc.player,
        states=tuple(doc.states),
        initial=doc.initial,
        output=dict(doc.output),
        step={(source, obs): target for source, row in doc.step.items() for obs, target in row.items()},
        labels=dict(doc.labels),
    )


def parse_strategy_file(text: str) -> dict[str, StrategyMachine]:
    raw = _load_json(text)
    try:
        doc = StrategyDocument.model_validate(raw)
    except ValidationError as e:
        raise_error(ErrorType.SCHEMA_ERROR, detail=_schema_errors(e))
    players = [m.player for m in doc.machines]
    duplicates = sorted({p for p in players if players.count(p) > 1})
    if duplicates:
        raise_error(ErrorType.INVALID_STRATEGY, detail={"duplicate players": duplicates})
    return {m.player: _machine_from_document(m) for m in doc.machines}


def load_strategy(path: Path) -> dict[str, StrategyMachine]:
    return parse_strategy_file(read_capped(Path(path)))


@contextmanager
def output_lock(path: Path):
    # Per-target lock so concurrent writers serialise
    lock = FileLock(str(path) + ".lock")
    with lock:
        yield


def write_text_atomic(path: Path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with output_lock(path):
        with tempfile.TemporaryDirectory(dir=str(path.parent)) as td:
            tmp = Path(td) / path.name
            tmp.write_text(text, encoding="utf-8")
            os.replace(tmp, path)
    return path

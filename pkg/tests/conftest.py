# tests/conftest.py

import json
import os
import shutil
import tempfile
import itertools
from pathlib import Path

import pytest
from click.testing import CliRunner
from hypothesis import strategies as st

from epitrack.core.game import GameStructure
from epitrack.main import cli
from epitrack.utils import file_handler

DATA_DIR = Path(__file__).parent / "data"

FIXTURES = {
    "E1": "e1_transparent.json",
    "E2": "e2_veil_and_reveal.json",
    "E3": "e3_eternal_fog.json",
    "E4": "e4_no_signal.json",
    "E5": "e5_signal.json",
}


@pytest.fixture(autouse=True)
def temp_out_dir(monkeypatch):
    tmpdir = Path(tempfile.mkdtemp(prefix="epitrack-test-"))
    monkeypatch.chdir(tmpdir)

    # Reset size cap
    monkeypatch.delenv("EPITRACK_MAX_GAME_BYTES", raising=False)
    monkeypatch.setattr(file_handler, "MAX_BYTES", 16 * 1024 * 1024)

    try:
        yield tmpdir
    finally:
        shutil.rmtree(tmpdir, ignore_errors=True)


@pytest.fixture()
def runner():
    return CliRunner()


def fixture_path(name: str) -> Path:
    return DATA_DIR / FIXTURES[name]


def load_fixture(name: str):
    return file_handler.load_game(fixture_path(name))


@pytest.fixture(scope="session")
def games():
    return {name: file_handler.load_game(DATA_DIR / filename)[0] for name, filename in FIXTURES.items()}


@pytest.fixture(scope="session")
def objectives():
    return {name: file_handler.load_game(DATA_DIR / filename)[1] for name, filename in FIXTURES.items()}


# ---------- helpers used by the CLI tests ----------

def _invoke(runner, *args):
    return runner.invoke(cli, [str(a) for a in args], catch_exceptions=False)


def _err_type(result):
    try:
        payload = json.loads(result.stderr)
        return payload["error"]["type"]
    except Exception:
        return "UNKNOWN"


# ---------- random games for the oracle properties ----------

MAX_STATES = int(os.getenv("ORACLE_MAX_STATES", "5"))


@st.composite
def random_games(draw, max_states: int = MAX_STATES, max_players: int = 2, max_actions: int = 2):
    """Small total games; colours constant so every observation map is observable."""
    n = draw(st.integers(min_value=1, max_value=max_states))
    states = [f"s{i}" for i in range(n)]
    players = [str(p) for p in range(1, draw(st.integers(1, max_players)) + 1)]
    actions = {p: [f"a{k}" for k in range(draw(st.integers(1, max_actions)))] for p in players}
    symbols = st.sampled_from(["o0", "o1", "o2"])
    observations = {p: {s: draw(symbols) for s in states} for p in players}
    moves = []
    for src in states:
        for profile in itertools.product(*(actions[p] for p in players)):
            targets = draw(st.sets(st.sampled_from(states), min_size=1, max_size=min(n, 3)))
            moves += [(src, profile, dst) for dst in sorted(targets)]
    return GameStructure.create(
        states=states,
        initial_state="s0",
        players=players,
        actions=actions,
        observations=observations,
        moves=moves,
        colours={s: "0" for s in states},
        name="random",
    )


@st.composite
def games_with_informed_returns(draw, max_states: int = MAX_STATES):
    """Games whose only back edges enter s0, which every player observes uniquely."""
    n = draw(st.integers(min_value=1, max_value=max_states))
    states = [f"s{i}" for i in range(n)]
    players = [str(p) for p in range(1, draw(st.integers(1, 2)) + 1)]
    actions = {p: [f"a{k}" for k in range(draw(st.integers(1, 2)))] for p in players}
    symbols = st.sampled_from(["o0", "o1"])
    observations = {p: {"s0": "init", **{s: draw(symbols) for s in states[1:]}} for p in players}
    moves = []
    for index, src in enumerate(states):
        forward = states[index + 1:] + ["s0"]
        for profile in itertools.product(*(actions[p] for p in players)):
            targets = draw(st.sets(st.sampled_from(forward), min_size=1, max_size=2))
            moves += [(src, profile, dst) for dst in sorted(targets)]
    return GameStructure.create(
        states=states,
        initial_state="s0",
        players=players,
        actions=actions,
        observations=observations,
        moves=moves,
        colours={s: "0" for s in states},
        name="informed-returns",
    )

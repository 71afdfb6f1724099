from dataclasses import dataclass
import hashlib

from epitrack.core.game import AGENT_ZERO, GameStructure


@dataclass(frozen=True)
class Violation:
    kind: str
    location: tuple
    message: str

    def as_dict(self) -> dict:
        return {"kind": self.kind, "location": _jsonable(self.location), "message": self.message}


def _jsonable(value):
    if isinstance(value, tuple):
        return [_jsonable(v) for v in value]
    return value


def validate_structure(g: GameStructure) -> list[Violation]:
    """Every violated game-structure invariant, with a locating message."""
    violations: list[Violation] = []
    states = set(g.states)

    if not g.players:
        violations.append(Violation("players", (), "game has no players"))
    if len(set(g.players)) != len(g.players):
        violations.append(Violation("players", tuple(g.players), "duplicate player identifiers"))
    if AGENT_ZERO in g.players:
        violations.append(Violation("players", (AGENT_ZERO,), f"player id {AGENT_ZERO!r} is reserved for agent 0"))
    if len(set(g.states)) != len(g.states):
        violations.append(Violation("states", tuple(g.states), "duplicate state identifiers"))
    if g.initial_state not in states:
        violations.append(Violation("initial", (g.initial_state,), f"initial state {g.initial_state!r} is not a state"))

    for player in g.players:
        if not g.actions.get(player):
            violations.append(Violation("actions", (player,), f"player {player!r} has no actions"))
        observed = g.observations.get(player, {})
        for state in g.states:
            if state not in observed:
                violations.append(
                    Violation("observation", (player, state), f"player {player!r} has no observation for state {state!r}")
                )
        for state in sorted(set(observed) - states):
            violations.append(
                Violation("observation", (player, state), f"player {player!r} observes unknown state {state!r}")
            )

    for state in g.states:
        if state not in g.colours:
            violations.append(Violation("colour", (state,), f"state {state!r} has no colour"))
    for state in sorted(set(g.colours) - states):
        violations.append(Violation("colour", (state,), f"colour given for unknown state {state!r}"))

    for src, profile, dst in sorted(g.moves):
        for endpoint in (src, dst):
            if endpoint not in states:
                violations.append(
                    Violation("endpoint", (src, profile, dst), f"move ({src}, {profile}, {dst}) names unknown state {endpoint!r}")
                )
        if len(profile) != len(g.players):
            violations.append(
                Violation("profile", (src, profile, dst), f"profile {profile} needs {len(g.players)} actions")
            )
            continue
        for player, action in zip(g.players, profile):
            if action not in g.actions.get(player, ()):
                violations.append(
                    Violation("action", (src, profile, dst), f"action {action!r} is not available to player {player!r}")
                )

    # Totality only makes sense once every player has actions
    if all(g.actions.get(p) for p in g.players):
        for state in g.states:
            for profile in g.profiles:
                if not g.successors(state, profile):
                    violations.append(
                        Violation("totality", (state, profile), f"totality violation at ({state}, {profile})")
                    )

    if not any(v.kind in {"observation", "colour"} for v in violations):
        for player, v1, v2 in observability_violations(g):
            violations.append(
                Violation(
                    "observability",
                    (player, v1, v2),
                    f"observability violation for player {player} at ({v1}, {v2})",
                )
            )
    return violations


def observability_violations(g: GameStructure) -> list[tuple[str, str, str]]:
    # (player, v, v') with equal observations but different colours
    found = []
    for player in g.players:
        observed = g.observations.get(player, {})
        ordered = sorted(g.states)
        for i, v1 in enumerate(ordered):
            for v2 in ordered[i + 1:]:
                if observed.get(v1) == observed.get(v2) and g.colours.get(v1) != g.colours.get(v2):
                    found.append((player, v1, v2))
    return found


def sha256_text(data: str) -> str:
    h = hashlib.sha256()
    h.update(data.encode("utf-8"))
    return h.hexdigest()

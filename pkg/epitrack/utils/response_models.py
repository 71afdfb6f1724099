import json
from typing import Any, Optional

from pydantic import BaseModel, ConfigDict, Field

from epitrack.core.objective import ObjectiveSpec


class Report(BaseModel):
    status: str
    code: int
    message: str
    data: Optional[Any] = None

    @classmethod
    def verdict(cls, ok: bool, message: str, data: Any = None) -> "Report":
        # exit code 0 for a true verdict, 1 for a false one
        return cls(status="success" if ok else "failure", code=0 if ok else 1, message=message, data=data)


def render(report: Report, as_json: bool) -> str:
    if as_json:
        return json.dumps(report.model_dump(mode="json"), indent=2, sort_keys=True)
    lines = [report.message]
    if isinstance(report.data, dict):
        for key, value in report.data.items():
            shown = value if isinstance(value, (str, int, float, bool)) or value is None else json.dumps(value, sort_keys=True)
            lines.append(f"  {key}: {shown}")
    elif report.data is not None:
        lines.append(f"  {json.dumps(report.data, sort_keys=True)}")
    return "\n".join(lines)


class PlayerDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: str
    actions: list[str]
    observations: dict[str, str]


class GameDocument(BaseModel):
    """Game file: players, states, moves (with `*` wildcards), colours, objective."""

    model_config = ConfigDict(extra="forbid")

    name: Optional[str] = None
    players: list[PlayerDocument] = Field(min_length=1)
    states: list[str]
    initial: str
    moves: list[tuple[str, list[str], str]]
    colours: dict[str, str]
    objective: Optional[ObjectiveSpec] = None


class MachineDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    player: str
    states: list[str]
    initial: str
    output: dict[str, str]
    # state -> observation -> state
    step: dict[str, dict[str, str]]
    labels: dict[str, str] = Field(default_factory=dict)


class StrategyDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    game: Optional[str] = None
    machines: list[MachineDocument]

"""DOT text for arenas, certainty automata, strategy machines and verification products.

Every node is written on its own line starting with its quoted identifier;
edge lines follow all node lines.
"""

from typing import Iterator, Literal, Mapping

from epitrack.core.certainty import CertaintyAutomaton
from epitrack.core.synthesis import StrategyMachine
from epitrack.core.tracking import TrackingArena
from epitrack.core.verification import VerificationReport
from epitrack.utils.error_utils import raise_error, ErrorType

DotKind = Literal["arena", "beliefs", "strategy", "verification-product"]
DOT_KINDS: tuple[str, ...] = ("arena", "beliefs", "strategy", "verification-product")


def _gvquote(s) -> str:
    return '"{}"'.format(str(s).replace('"', r'\"'))


def _arena_lines(arena: TrackingArena) -> Iterator[str]:
    order = arena.node_order()
    name = {node: f"n{rank}" for rank, node in enumerate(order)}
    yield "digraph arena {"
    yield "  rankdir=LR;"
    for node in order:
        model = arena.models[node]
        colour = arena.colours[node]
        label = f"{model.summary()}\\ncolour {colour}" if colour is not None else model.summary()
        shape = "doublecircle" if node == arena.initial else ("box" if model.is_singleton else "ellipse")
        yield f"  {_gvquote(name[node])} [label={_gvquote(label)}, shape={shape}];"
    for node in order:
        for group in arena.groups[node]:
            for target in sorted({s.node for s in group.successors}, key=order.index):
                yield f"  {_gvquote(name[node])} -> {_gvquote(name[target])} [label={_gvquote(f'g{group.group_id}')}];"
    yield "}"


def _belief_lines(automaton: CertaintyAutomaton) -> Iterator[str]:
    graph = automaton.graph()
    name = {state: f"b{rank}" for rank, state in enumerate(automaton.states)}
    yield "digraph beliefs {"
    yield "  rankdir=LR;"
    for state in automaton.states:
        shape = "doublecircle" if state.certain else "circle"
        style = ", style=bold" if state == automaton.initial else ""
        yield f"  {_gvquote(name[state])} [label={_gvquote(state.label())}, shape={shape}{style}];"
    for source, target, data in graph.edges(data=True):
        label = " ".join("(" + ",".join(p) + ")" for p in data["profiles"])
        yield f"  {_gvquote(name[source])} -> {_gvquote(name[target])} [label={_gvquote(label)}];"
    yield "}"


def _strategy_lines(machines: Mapping[str, StrategyMachine]) -> Iterator[str]:
    yield "digraph strategy {"
    yield "  rankdir=LR;"
    for player, machine in machines.items():
        for state in machine.states:
            label = f"{state}: {machine.output[state]}"
            if state in machine.labels:
                label += f"\\n{machine.labels[state]}"
            shape = "doublecircle" if state == machine.initial else "circle"
            yield f"  {_gvquote(f'p{player}.{state}')} [label={_gvquote(label)}, shape={shape}];"
    for player, machine in machines.items():
        for (source, observation), target in sorted(machine.step.items()):
            yield (
                f"  {_gvquote(f'p{player}.{source}')} -> {_gvquote(f'p{player}.{target}')}"
                f" [label={_gvquote(observation)}];"
            )
    yield "}"


def _product_lines(report: VerificationReport) -> Iterator[str]:
    if report.product is None:
        raise_error(ErrorType.KIND_MISMATCH, detail="verification report carries no product graph")
    graph = report.product
    nodes = list(graph.nodes)
    name = {node: f"v{rank}" for rank, node in enumerate(nodes)}
    yield "digraph verification {"
    yield "  rankdir=LR;"
    for node in nodes:
        state, memory, dpa_state = node
        priority = graph.nodes[node]["priority"]
        label = f"{state} [{','.join(memory)}] {dpa_state}\\npriority {priority}"
        shape = "doublecircle" if priority % 2 == 0 else "circle"
        yield f"  {_gvquote(name[node])} [label={_gvquote(label)}, shape={shape}];"
    for source, target, data in graph.edges(data=True):
        yield f"  {_gvquote(name[source])} -> {_gvquote(name[target])} [label={_gvquote(','.join(data['profile']))}];"
    yield "}"


def export_dot(kind: DotKind, artifact) -> str:
    if kind == "arena" and isinstance(artifact, TrackingArena):
        lines = _arena_lines(artifact)
    elif kind == "beliefs" and isinstance(artifact, CertaintyAutomaton):
        lines = _belief_lines(artifact)
    elif kind == "strategy" and isinstance(artifact, StrategyMachine):
        lines = _strategy_lines({artifact.player: artifact})
    elif kind == "strategy" and isinstance(artifact, Mapping) and all(isinstance(m, StrategyMachine) for m in artifact.values()):
        lines = _strategy_lines(artifact)
    elif kind == "verification-product" and isinstance(artifact, VerificationReport):
        lines = _product_lines(artifact)
    else:
        raise_error(
            ErrorType.KIND_MISMATCH,
            detail={"what": kind, "artifact": type(artifact).__name__, "kinds": list(DOT_KINDS)},
        )
    return "\n".join(lines) + "\n"


def node_lines(dot: str) -> list[str]:
    return [line for line in dot.splitlines() if line.lstrip().startswith('"') and "->" not in line]

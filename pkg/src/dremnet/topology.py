"""Directed communication graphs over the sensor network.

Edges point from transmitter to receiver: (j, i) means sensor j's message
reaches sensor i. Delivery is synchronous, a message sent at step k is
consumed by the receiver's update at the same k. Schedules may be static, or
time-varying through a periodic cycle or an explicit per-step table.

Sensors are numbered 1..n. Edge sets never contain self-loops; each sensor's
own message joins its update through the closed neighborhood instead.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

__all__ = [
    "StaticGraph",
    "PeriodicGraph",
    "TableGraph",
    "GraphSchedule",
    "ring",
    "edges_at",
    "in_neighbors",
    "out_neighbors",
    "closed_in_neighborhood",
    "validate_schedule",
    "graph_from_config",
]

Edge = tuple[int, int]


def _freeze_edges(edges) -> tuple[Edge, ...]:
    return tuple((int(j), int(i)) for (j, i) in edges)


@dataclass(frozen=True)
class StaticGraph:
    """One fixed edge set used at every step."""

    n: int
    edges: tuple[Edge, ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"need at least one sensor, got n={self.n}")
        object.__setattr__(self, "edges", _freeze_edges(self.edges))

    def edges_at(self, k: int) -> tuple[Edge, ...]:
        return self.edges


@dataclass(frozen=True)
class PeriodicGraph:
    """Cycles through ``stages`` edge sets: step k uses stage k mod period."""

    n: int
    stages: tuple[tuple[Edge, ...], ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"need at least one sensor, got n={self.n}")
        object.__setattr__(
            self, "stages", tuple(_freeze_edges(s) for s in self.stages)
        )

    def edges_at(self, k: int) -> tuple[Edge, ...]:
        if not self.stages:
            raise ValueError("periodic schedule has period 0")
        return self.stages[k % len(self.stages)]


@dataclass(frozen=True)
class TableGraph:
    """Explicit per-step edge sets; the last entry holds beyond the table."""

    n: int
    table: tuple[tuple[Edge, ...], ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"need at least one sensor, got n={self.n}")
        object.__setattr__(
            self, "table", tuple(_freeze_edges(s) for s in self.table)
        )

    def edges_at(self, k: int) -> tuple[Edge, ...]:
        if not self.table:
            raise ValueError("table schedule has no entries")
        if k < len(self.table):
            return self.table[k]
        return self.table[-1]


GraphSchedule = Union[StaticGraph, PeriodicGraph, TableGraph]


def ring(n: int) -> StaticGraph:
    """Directed ring 1 -> 2 -> ... -> n -> 1."""
    if n < 2:
        raise ValueError(f"a ring needs at least two sensors, got n={n}")
    return StaticGraph(n=n, edges=tuple((i, i % n + 1) for i in range(1, n + 1)))


def edges_at(g: GraphSchedule, k: int) -> tuple[Edge, ...]:
    """Edge set active at step k."""
    if k < 0:
        raise ValueError(f"step index must be nonnegative, got {k}")
    return g.edges_at(k)


def _check_sensor(g: GraphSchedule, i: int) -> None:
    if not 1 <= i <= g.n:
        raise ValueError(f"sensor id {i} out of range for n={g.n}")


def in_neighbors(g: GraphSchedule, i: int, k: int) -> tuple[int, ...]:
    """Sensors whose step-k messages reach sensor i, ascending, i excluded."""
    _check_sensor(g, i)
    return tuple(sorted({j for (j, r) in edges_at(g, k) if r == i and j != i}))


def out_neighbors(g: GraphSchedule, j: int, k: int) -> tuple[int, ...]:
    """Sensors that receive sensor j's step-k message, ascending, j excluded."""
    _check_sensor(g, j)
    return tuple(sorted({r for (s, r) in edges_at(g, k) if s == j and r != j}))


def closed_in_neighborhood(g: GraphSchedule, i: int, k: int) -> tuple[int, ...]:
    """in_neighbors(i, k) plus i itself, ascending. Updates draw on this set."""
    return tuple(sorted(set(in_neighbors(g, i, k)) | {i}))


def _stage_problems(stage: tuple[Edge, ...], n: int, where: str) -> list[str]:
    out = []
    for (j, i) in stage:
        if not (1 <= j <= n and 1 <= i <= n):
            out.append(f"{where}: edge ({j}, {i}) out of range for n={n}")
        elif j == i:
            out.append(f"{where}: self-loop ({j}, {i}) not allowed")
    return out


def validate_schedule(g: GraphSchedule) -> list[str]:
    """Audit a schedule; returns violation strings, empty when it is sound.

    Flags out-of-range endpoints, self-loops, a period-0 periodic schedule,
    and an empty table.
    """
    if isinstance(g, StaticGraph):
        return _stage_problems(g.edges, g.n, "static edge set")
    if isinstance(g, PeriodicGraph):
        if not g.stages:
            return ["periodic schedule has period 0"]
        problems = []
        for s, stage in enumerate(g.stages):
            problems.extend(_stage_problems(stage, g.n, f"stage {s}"))
        return problems
    if not g.table:
        return ["table schedule has no entries"]
    problems = []
    for k, stage in enumerate(g.table):
        problems.extend(_stage_problems(stage, g.n, f"step {k}"))
    return problems


def graph_from_config(cfg: dict) -> GraphSchedule:
    """Build a schedule from its JSON form.

    Expects ``{"n": ..., "kind": "static"|"periodic"|"table", ...}`` with
    ``edges`` for static and ``stages``/``table`` lists of edge lists for the
    time-varying kinds. ``kind: "ring"`` is shorthand for the n-sensor
    directed ring.
    """
    try:
        kind = cfg["kind"]
        n = int(cfg["n"])
    except KeyError as e:
        raise ValueError(f"graph config is missing required field {e.args[0]!r}") from None
    if kind == "ring":
        return ring(n)
    if kind == "static":
        if "edges" not in cfg:
            raise ValueError("static graph config needs an 'edges' list")
        return StaticGraph(n=n, edges=_freeze_edges(cfg["edges"]))
    if kind == "periodic":
        if "stages" not in cfg:
            raise ValueError("periodic graph config needs a 'stages' list")
        return PeriodicGraph(n=n, stages=tuple(_freeze_edges(s) for s in cfg["stages"]))
    if kind == "table":
        if "table" not in cfg:
            raise ValueError("table graph config needs a 'table' list")
        return TableGraph(n=n, table=tuple(_freeze_edges(s) for s in cfg["table"]))
    raise ValueError(f"unknown graph kind {kind!r}")

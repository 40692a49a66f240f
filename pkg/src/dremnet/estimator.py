"""Per-sensor estimator: counter gate, fused LMS update, counter reset.

Each sensor i keeps an estimate theta_hat_i, a countdown counter c_i, and a
regularizer mu_i. One synchronous round at step k:

1. gate: the received scalar regressors delta_bar_j pass through only when
   the receiver's counter has matured, c_i(k) >= d; otherwise delta_j = 0.
2. update: every channel l moves by the same normalized step,

       theta_l += alpha(k) * sum_j delta_j (ybar_jl - delta_j theta_l)
                  / (mu_i + sum_j delta_j^2),

   the sums running over the closed in-neighborhood.
3. reset: the counter returns to 0 when an effective update just happened
   (gated sum of squares nonzero, which requires c_i >= d), else it ticks up.

The gate plus reset force consecutive effective updates of one sensor at
least d+1 steps apart, so the d-wide measurement windows they consume never
overlap: no raw measurement is used twice.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence, Union

import numpy as np

from .drem import DremMessage

__all__ = [
    "NodeState",
    "HarmonicSchedule",
    "TableSchedule",
    "StepSchedule",
    "GatedMessage",
    "step_size",
    "schedule_violations",
    "asymptotic_violations",
    "schedule_from_config",
    "gate",
    "gated_sum",
    "update_estimate",
    "update_counter",
    "node_step",
]


@dataclass(frozen=True)
class NodeState:
    """One sensor's estimator state: estimate, counter, regularizer."""

    theta_hat: np.ndarray
    counter: int
    mu: float

    def __post_init__(self):
        th = np.asarray(self.theta_hat, dtype=float)
        object.__setattr__(self, "theta_hat", th)
        if self.mu <= 0:
            raise ValueError(f"mu must be positive, got {self.mu}")
        if self.counter < 0:
            raise ValueError(f"counter must be nonnegative, got {self.counter}")
        if not np.all(np.isfinite(th)):
            raise ValueError("theta_hat must be finite")


@dataclass(frozen=True)
class HarmonicSchedule:
    """alpha(k) = min(1, c / max(k, 1)); the k=0 clamp keeps it defined and <= 1."""

    c: float

    def __post_init__(self):
        if self.c <= 0:
            raise ValueError(f"harmonic coefficient must be positive, got {self.c}")

    def at(self, k: int) -> float:
        return min(1.0, self.c / max(k, 1))


@dataclass(frozen=True)
class TableSchedule:
    """Explicit per-step alpha values; the last entry holds beyond the table."""

    values: tuple[float, ...]

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        if not vals:
            raise ValueError("table schedule needs at least one value")
        for k, v in enumerate(vals):
            if not 0.0 < v <= 1.0:
                raise ValueError(f"step size must lie in (0, 1], got {v} at entry {k}")

    def at(self, k: int) -> float:
        if k < len(self.values):
            return self.values[k]
        return self.values[-1]


StepSchedule = Union[HarmonicSchedule, TableSchedule]


def step_size(s: StepSchedule, k: int) -> float:
    """alpha(k); always in (0, 1]."""
    if k < 0:
        raise ValueError(f"step index must be nonnegative, got {k}")
    return s.at(k)


def schedule_violations(s: StepSchedule, horizon: int) -> list[str]:
    """Finite-horizon audit of the step-size requirements.

    Checks 0 < alpha <= 1 and monotone non-increase over 0..horizon-1. For
    the harmonic family that is all that can fail; divergence of the sum and
    decay to zero hold analytically. Tables only certify the checked window.
    """
    problems = []
    prev = None
    for k in range(horizon):
        a = step_size(s, k)
        if not 0.0 < a <= 1.0:
            problems.append(f"alpha({k}) = {a} outside (0, 1]")
        if prev is not None and a > prev:
            problems.append(f"alpha({k}) = {a} increases from alpha({k - 1}) = {prev}")
        prev = a
    return problems


def asymptotic_violations(s: StepSchedule) -> list[str]:
    """Audit the tail requirements: alpha(k) -> 0 and sum alpha(k) = inf.

    Harmonic schedules satisfy both analytically. A table holds its last
    value forever, so its divergent sum is automatic but decay to zero is
    not; the table is accepted as a truncated decaying schedule when its
    last value is small against its first (<= max(1e-3, first/10)).
    """
    if isinstance(s, HarmonicSchedule):
        return []
    first, last = s.values[0], s.values[-1]
    if last > max(1e-3, 0.1 * first):
        return [
            f"table schedule does not decay: final alpha {last} vs first {first} "
            "(needs alpha -> 0)"
        ]
    return []


def schedule_from_config(cfg: dict) -> StepSchedule:
    """Build a step schedule from ``{"kind": "harmonic", "c": ...}`` or
    ``{"kind": "table", "values": [...]}``."""
    if "kind" not in cfg:
        raise ValueError("step schedule config is missing required field 'kind'")
    kind = cfg["kind"]
    if kind == "harmonic":
        if "c" not in cfg:
            raise ValueError("harmonic schedule config needs a coefficient 'c'")
        return HarmonicSchedule(c=float(cfg["c"]))
    if kind == "table":
        if "values" not in cfg:
            raise ValueError("table schedule config needs a 'values' list")
        return TableSchedule(values=tuple(float(v) for v in cfg["values"]))
    raise ValueError(f"unknown step schedule kind {kind!r}")


@dataclass(frozen=True, eq=False)
class GatedMessage:
    """A received (ybar, delta_bar) pair after the counter gate."""

    ybar: np.ndarray
    delta: float
    sensor: int


def gate(inbox: Sequence[DremMessage], counter: int, d: int) -> tuple[GatedMessage, ...]:
    """Apply the counter gate to the inbox of the closed in-neighborhood.

    delta_j = delta_bar_j when the receiver's counter satisfies
    counter >= d, else 0. The ybar payloads pass through untouched (a closed
    gate zeroes their delta prefactor in the update anyway). Messages come
    back sorted by sensor id; downstream sums rely on that order.
    """
    keep = counter >= d
    out = [
        GatedMessage(ybar=m.ybar, delta=m.delta_bar if keep else 0.0, sensor=m.sensor)
        for m in inbox
    ]
    out.sort(key=lambda m: m.sensor)
    return tuple(out)


def gated_sum(gated: Sequence[GatedMessage]) -> float:
    """Sum of squared gated deltas, the shared update denominator term."""
    s = 0.0
    for m in gated:
        s += m.delta * m.delta
    return s


def update_estimate(state: NodeState, gated: Sequence[GatedMessage], alpha: float) -> np.ndarray:
    """One fused LMS step; returns the new estimate, state untouched.

    All channels share the step size and the denominator mu + sum delta^2;
    with every delta zero the numerator vanishes and the estimate is
    returned unchanged (same floats).
    """
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    th = state.theta_hat
    num = np.zeros_like(th)
    s = 0.0
    # fixed accumulation order (gate() sorts by sensor id) so the batched
    # engine can replay the identical float sequence
    for m in gated:
        num += m.delta * (m.ybar - m.delta * th)
        s += m.delta * m.delta
    if s == 0.0:
        return th.copy()
    return th + (alpha * num) / (state.mu + s)


def update_counter(counter: int, gated_sum: float, d: int) -> int:
    """Counter reset: 0 iff an effective update just occurred, else tick up.

    The comparison with 0 is exact on purpose: warm-up and genuinely
    degenerate regressor windows produce exact zero determinants, while a
    tiny nonzero determinant is real excitation and must reset.
    """
    if gated_sum != 0.0 and counter >= d:
        return 0
    return counter + 1


def node_step(
    state: NodeState,
    k: int,
    own: DremMessage,
    received: Sequence[DremMessage],
    schedule: StepSchedule,
    d: int,
) -> tuple[NodeState, bool]:
    """One synchronous round for one sensor: gate, update, counter reset.

    ``received`` holds the step-k messages of the in-neighbors (the caller
    assembles them from the graph); ``own`` is the sensor's simultaneous own
    message, completing the closed neighborhood. Returns the successor state
    and whether the update was effective. The sensor's next broadcast comes
    from the data pipeline once the k+1 measurement exists, not from here.
    """
    gated = gate([own, *received], state.counter, d)
    alpha = step_size(schedule, k)
    theta_next = update_estimate(state, gated, alpha)
    s = gated_sum(gated)
    effective = s != 0.0 and state.counter >= d
    counter_next = update_counter(state.counter, s, d)
    return replace(state, theta_hat=theta_next, counter=counter_next), effective

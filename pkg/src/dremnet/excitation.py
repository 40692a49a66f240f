"""Excitation audits over scalar-regressor traces.

A sensor alone is persistently excited when the squared trace of its scalar
regressor delta_bar accumulates at least omega over every length-H window.
The cooperative variant replaces the single trace with the sum over the
sensor's closed in-neighborhood at each step:

    sum_{t=k}^{k+H-1} sum_{j in J_i+(t)} delta_bar_j(t)^2 >= omega.

That neighborhood sum is what the gated update actually normalizes by, so a
sensor whose own delta_bar vanishes identically can still be served by an
excited in-neighbor. Certificates here are horizon-certified: the scan covers
a finite trace, with windows starting after the transform's warm-up.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .topology import GraphSchedule, closed_in_neighborhood

__all__ = [
    "DeltaTrace",
    "PeCertificate",
    "local_pe_check",
    "single_sensor_pe",
    "find_certificate",
    "MARGIN_REL_TOL",
]

# Window sums inherit rounding from the regressor recursions (a cosine
# accumulated into a float can land one ulp under its closed form), so the
# omega comparison grants this much relative slack.
MARGIN_REL_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class DeltaTrace:
    """Per-sensor delta_bar traces on steps 0..K, as an (n, K+1) array.

    ``d`` is the regressor dimension that produced the traces; window scans
    start at d-1, the first step with a full stacking window.
    """

    values: np.ndarray
    d: int = 1

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2:
            raise ValueError(f"traces must be a 2-d (sensor, step) array, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("traces must be finite")
        if self.d < 1:
            raise ValueError(f"regressor dimension must be positive, got {self.d}")
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def steps(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True, eq=False)
class PeCertificate:
    """Outcome of a windowed excitation scan.

    ``margin[i-1]`` is sensor i's smallest window sum; ``satisfied[i-1]``
    compares it against omega with MARGIN_REL_TOL relative slack.
    """

    H: int
    omega: float
    satisfied: tuple[bool, ...]
    margin: tuple[float, ...]
    horizon: int


def _meets(margin: float, omega: float) -> bool:
    return margin >= omega * (1.0 - MARGIN_REL_TOL)


def _window_margin(step_sums: np.ndarray, H: int, start: int, horizon: int) -> float:
    best = np.inf
    for k in range(start, horizon - H + 1):
        w = 0.0
        for t in range(k, k + H):
            w += step_sums[t]
        if w < best:
            best = w
    return float(best)


def _check_window_args(trace: DeltaTrace, H: int, omega: float, horizon: Optional[int]) -> int:
    if H < 1:
        raise ValueError(f"window length must be positive, got {H}")
    if omega <= 0:
        raise ValueError(f"omega must be positive, got {omega}")
    if horizon is None:
        horizon = trace.steps
    if horizon < H:
        raise ValueError(f"horizon {horizon} is shorter than the window H={H}")
    if horizon > trace.steps:
        raise ValueError(f"horizon {horizon} exceeds the trace length {trace.steps}")
    return horizon


def local_pe_check(
    trace: DeltaTrace,
    g: GraphSchedule,
    H: int,
    omega: float,
    horizon: Optional[int] = None,
) -> PeCertificate:
    """Scan every sensor's neighborhood-summed squared trace over H-windows.

    Windows start at d-1 (end of warm-up) and the last one ends at
    horizon-1. Returns per-sensor margins and the slacked omega comparison.
    """
    horizon = _check_window_args(trace, H, omega, horizon)
    sq = trace.values ** 2
    margins = []
    for i in range(1, trace.n + 1):
        step_sums = np.zeros(horizon)
        for t in range(horizon):
            for j in closed_in_neighborhood(g, i, t):
                step_sums[t] += sq[j - 1, t]
        margins.append(_window_margin(step_sums, H, min(trace.d - 1, horizon - H), horizon))
    return PeCertificate(
        H=H,
        omega=omega,
        satisfied=tuple(_meets(m, omega) for m in margins),
        margin=tuple(margins),
        horizon=horizon,
    )


def single_sensor_pe(
    trace: DeltaTrace,
    sensor: int,
    H: int,
    omega: float,
    horizon: Optional[int] = None,
) -> tuple[bool, float]:
    """The windowed scan restricted to one sensor's own trace.

    Equivalent to the neighborhood check with the singleton {sensor}.
    Returns (satisfied, margin).
    """
    if not 1 <= sensor <= trace.n:
        raise ValueError(f"sensor id {sensor} out of range for n={trace.n}")
    horizon = _check_window_args(trace, H, omega, horizon)
    step_sums = trace.values[sensor - 1, :horizon] ** 2
    margin = _window_margin(step_sums, H, min(trace.d - 1, horizon - H), horizon)
    return _meets(margin, omega), margin


def find_certificate(
    trace: DeltaTrace,
    g: GraphSchedule,
    omega: float,
    max_h: int,
    horizon: Optional[int] = None,
) -> dict[int, Optional[int]]:
    """Smallest H <= max_h certifying each sensor at level omega, else None."""
    if max_h < 1:
        raise ValueError(f"max_h must be positive, got {max_h}")
    found: dict[int, Optional[int]] = {i: None for i in range(1, trace.n + 1)}
    for H in range(1, max_h + 1):
        cert = local_pe_check(trace, g, H, omega, horizon)
        for i in range(1, trace.n + 1):
            if found[i] is None and cert.satisfied[i - 1]:
                found[i] = H
        if all(v is not None for v in found.values()):
            break
    return found

"""Scenario loading, seeded runs, Monte Carlo aggregation, CSV export.

A scenario bundles the regression model, the communication graph, the
estimator parameters, and a default horizon. Runs are pure functions of
(scenario, seed): noise is counter-based, so the per-step single-run engine
and the vectorized many-run engine produce bit-identical trajectories, and
Monte Carlo aggregates are byte-stable under any worker count.

Determinism contract: Monte Carlo runs are seeded base_seed+1..base_seed+M,
processed in fixed-size chunks, and reduced strictly in chunk order. Workers
only decide where a chunk is computed, never how results combine.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .drem import drem_transform, extend
from .estimator import (
    HarmonicSchedule,
    NodeState,
    StepSchedule,
    asymptotic_violations,
    node_step,
    schedule_from_config,
    schedule_violations,
    step_size,
)
from .excitation import DeltaTrace, find_certificate, local_pe_check, single_sensor_pe
from .model import (
    Constant,
    NoiseModel,
    PeriodicList,
    RecursiveCosine,
    RegressorGenerator,
    generator_from_config,
    measure,
    noise_block,
    regressor_at,
    sample_noise,
)
from .topology import (
    GraphSchedule,
    closed_in_neighborhood,
    graph_from_config,
    in_neighbors,
    out_neighbors,
    ring,
    validate_schedule,
)

__all__ = [
    "ScenarioError",
    "Scenario",
    "RunResult",
    "MonteCarloAggregate",
    "StepTables",
    "CheckReport",
    "builtin_scenarios",
    "load_scenario",
    "step_tables",
    "delta_traces",
    "run_single",
    "run_monte_carlo",
    "export_csv",
    "check_scenario",
]

CHUNK_RUNS = 64


class ScenarioError(ValueError):
    """A scenario config failed to parse or validate."""


@dataclass(frozen=True, eq=False)
class Scenario:
    """Everything a run needs; immutable and picklable for worker pools."""

    n: int
    d: int
    theta: np.ndarray
    generators: tuple[RegressorGenerator, ...]
    variances: tuple[float, ...]
    graph: GraphSchedule
    schedule: StepSchedule
    mu: tuple[float, ...]
    theta_hat0: np.ndarray
    horizon: int

    def __post_init__(self):
        if self.n < 1:
            raise ScenarioError(f"n must be at least 1, got {self.n}")
        if self.d < 1:
            raise ScenarioError(f"d must be at least 1, got {self.d}")
        theta = np.asarray(self.theta, dtype=float)
        object.__setattr__(self, "theta", theta)
        if theta.shape != (self.d,):
            raise ScenarioError(f"theta must have shape ({self.d},), got {theta.shape}")
        if len(self.generators) != self.n:
            raise ScenarioError(
                f"generators: expected {self.n} entries, got {len(self.generators)}"
            )
        for i, gen in enumerate(self.generators, start=1):
            if gen.dimension != self.d:
                raise ScenarioError(
                    f"generators: sensor {i} emits dimension {gen.dimension}, expected d={self.d}"
                )
        object.__setattr__(self, "variances", tuple(float(r) for r in self.variances))
        if len(self.variances) != self.n:
            raise ScenarioError(
                f"noise: expected {self.n} variances, got {len(self.variances)}"
            )
        for i, r in enumerate(self.variances, start=1):
            if not (math.isfinite(r) and r >= 0.0):
                raise ScenarioError(f"noise: variance for sensor {i} must be >= 0, got {r}")
        object.__setattr__(self, "mu", tuple(float(m) for m in self.mu))
        if len(self.mu) != self.n:
            raise ScenarioError(f"mu: expected {self.n} entries, got {len(self.mu)}")
        for i, m in enumerate(self.mu, start=1):
            if not (math.isfinite(m) and m > 0.0):
                raise ScenarioError(f"mu: entry for sensor {i} must be positive, got {m}")
        th0 = np.asarray(self.theta_hat0, dtype=float)
        object.__setattr__(self, "theta_hat0", th0)
        if th0.shape != (self.n, self.d):
            raise ScenarioError(
                f"theta_hat0 must have shape ({self.n}, {self.d}), got {th0.shape}"
            )
        if self.horizon < 0:
            raise ScenarioError(f"horizon must be nonnegative, got {self.horizon}")
        if self.graph.n != self.n:
            raise ScenarioError(f"graph: n={self.graph.n} does not match scenario n={self.n}")
        graph_problems = validate_schedule(self.graph)
        if graph_problems:
            raise ScenarioError("graph: " + "; ".join(graph_problems))


def _sec5() -> Scenario:
    # four-sensor directed-ring benchmark: one periodic sensor, two cosine
    # random-walk sensors, and one constant (individually unexcited) sensor
    return Scenario(
        n=4,
        d=2,
        theta=np.array([2.5, -1.0]),
        generators=(
            PeriodicList(vectors=((2.0, 3.0), (1.0, 2.0))),
            RecursiveCosine(base=(0.0, 1.0), slot=0, initial=1.0, angle_step=math.pi / 4),
            RecursiveCosine(base=(1.0, 0.0), slot=1, initial=2.0, angle_step=math.pi / 2),
            Constant(vector=(1.0, 1.0)),
        ),
        variances=(1.0, 1.0, 1.0, 1.0),
        graph=ring(4),
        schedule=HarmonicSchedule(c=0.7),
        mu=(0.1, 0.2, 0.3, 0.4),
        theta_hat0=np.zeros((4, 2)),
        horizon=500,
    )


_BUILTINS = {"sec5": _sec5}


def builtin_scenarios() -> tuple[str, ...]:
    return tuple(sorted(_BUILTINS))


def _scenario_from_config(cfg: dict) -> Scenario:
    for section in ("model", "graph", "estimator", "run"):
        if section not in cfg:
            raise ScenarioError(f"config is missing section {section!r}")
    model = cfg["model"]
    for key in ("theta", "generators", "noise"):
        if key not in model:
            raise ScenarioError(f"model: missing field {key!r}")
    theta = np.asarray(model["theta"], dtype=float)
    d = len(theta)
    generators = []
    for i, gcfg in enumerate(model["generators"], start=1):
        try:
            generators.append(generator_from_config(gcfg))
        except ValueError as e:
            raise ScenarioError(f"model.generators[{i}]: {e}") from None
    try:
        graph = graph_from_config(cfg["graph"])
    except ValueError as e:
        raise ScenarioError(f"graph: {e}") from None
    est = cfg["estimator"]
    for key in ("mu", "step"):
        if key not in est:
            raise ScenarioError(f"estimator: missing field {key!r}")
    try:
        schedule = schedule_from_config(est["step"])
    except ValueError as e:
        raise ScenarioError(f"estimator.step: {e}") from None
    n = graph.n
    theta_hat0 = np.asarray(est.get("theta_hat0", np.zeros((n, d))), dtype=float)
    run = cfg["run"]
    if "horizon" not in run:
        raise ScenarioError("run: missing field 'horizon'")
    return Scenario(
        n=n,
        d=d,
        theta=theta,
        generators=tuple(generators),
        variances=tuple(float(r) for r in model["noise"]),
        graph=graph,
        schedule=schedule,
        mu=tuple(float(m) for m in est["mu"]),
        theta_hat0=theta_hat0,
        horizon=int(run["horizon"]),
    )


def load_scenario(source: Union[str, Path]) -> Scenario:
    """Load a builtin scenario by name or a JSON scenario file by path.

    Parse errors carry the file position; constraint violations carry the
    offending field name.
    """
    name = str(source)
    if name in _BUILTINS:
        return _BUILTINS[name]()
    path = Path(source)
    if not path.exists():
        known = ", ".join(builtin_scenarios())
        raise ScenarioError(f"{name}: no such file and not a builtin (known builtins: {known})")
    try:
        text = path.read_text()
    except OSError as e:
        raise OSError(f"cannot read {path}: {e.strerror or e}") from e
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioError(f"{path}:{e.lineno}:{e.colno}: {e.msg}") from None
    if not isinstance(cfg, dict):
        raise ScenarioError(f"{path}: top level must be a JSON object")
    return _scenario_from_config(cfg)


@dataclass(frozen=True, eq=False)
class StepTables:
    """Deterministic per-step tables shared by every run of a scenario.

    Regressors, noise-free measurements, scalar regressors delta_bar and
    adjugates, step sizes, sorted closed neighborhoods, and the full
    counter/gating skeleton (which never depends on noise).
    """

    horizon: int
    phi: np.ndarray        # (n, K, d)
    y_det: np.ndarray      # (n, K)
    delta: np.ndarray      # (n, K)
    adj: np.ndarray        # (n, K, d, d)
    alpha: np.ndarray      # (K,)
    members: tuple[tuple[tuple[int, ...], ...], ...]
    gated_sum: np.ndarray  # (n, K)
    effective: np.ndarray  # (n, K) bool
    counters: np.ndarray   # (n, K+1) int


def step_tables(s: Scenario, horizon: Optional[int] = None) -> StepTables:
    """Precompute every noise-independent quantity for steps 0..horizon-1."""
    K = s.horizon if horizon is None else int(horizon)
    if K < 0:
        raise ValueError(f"horizon must be nonnegative, got {K}")
    n, d = s.n, s.d
    phi = np.zeros((n, K, d))
    y_det = np.zeros((n, K))
    delta = np.zeros((n, K))
    adj = np.zeros((n, K, d, d))
    for i in range(1, n + 1):
        hist: list[np.ndarray] = []
        for k in range(K):
            p = regressor_at(s.generators[i - 1], k)
            phi[i - 1, k] = p
            y_det[i - 1, k] = measure(s.theta, p, 0.0)
            hist.insert(0, p)
            if len(hist) > d:
                hist.pop()
            if len(hist) == d:
                ext = extend(hist)
                delta[i - 1, k] = ext.det
                adj[i - 1, k] = ext.adj
    alpha = np.array([step_size(s.schedule, k) for k in range(K)])
    members = tuple(
        tuple(closed_in_neighborhood(s.graph, i, k) for k in range(K))
        for i in range(1, n + 1)
    )
    gated = np.zeros((n, K))
    eff = np.zeros((n, K), dtype=bool)
    counters = np.zeros((n, K + 1), dtype=np.int64)
    c = [0] * n
    for k in range(K):
        for i in range(1, n + 1):
            acc = 0.0
            if c[i - 1] >= d:
                for j in members[i - 1][k]:
                    dlt = delta[j - 1, k]
                    acc += dlt * dlt
            gated[i - 1, k] = acc
            e = acc != 0.0
            eff[i - 1, k] = e
            c[i - 1] = 0 if e else c[i - 1] + 1
            counters[i - 1, k + 1] = c[i - 1]
    return StepTables(
        horizon=K,
        phi=phi,
        y_det=y_det,
        delta=delta,
        adj=adj,
        alpha=alpha,
        members=members,
        gated_sum=gated,
        effective=eff,
        counters=counters,
    )


def delta_traces(s: Scenario, horizon: Optional[int] = None) -> DeltaTrace:
    """Scalar-regressor traces delta_bar_i(k) for steps 0..horizon-1."""
    tables = step_tables(s, horizon)
    return DeltaTrace(values=tables.delta, d=s.d)


@dataclass(frozen=True, eq=False)
class RunResult:
    """One seeded trajectory.

    ``theta_hat[i-1, k]`` is sensor i's estimate at step k (k=0 is the
    initial state), ``error_norm`` its Euclidean distance to the truth,
    ``effective[i-1, k]`` whether the step-k update moved the estimate, and
    ``counters[i-1, k]`` the counter value entering step k. ``consumed`` is
    the instrumentation trail: per sensor, every (source sensor, measurement
    time) pair that entered an effective update.
    """

    seed: int
    horizon: int
    theta_hat: np.ndarray   # (n, K+1, d)
    error_norm: np.ndarray  # (n, K+1)
    effective: np.ndarray   # (n, K) bool
    counters: np.ndarray    # (n, K+1) int
    payload_size: int
    payload_total: int
    consumed: Optional[tuple[tuple[tuple[int, int], ...], ...]] = None

    def effective_steps(self, sensor: int) -> np.ndarray:
        return np.flatnonzero(self.effective[sensor - 1])


def _error_norm(diff: np.ndarray) -> float:
    # channel loop in ascending order; the batched engine accumulates the
    # same sequence so norms agree bit for bit
    s = 0.0
    for l in range(diff.shape[0]):
        s += diff[l] * diff[l]
    return math.sqrt(s)


def run_single(
    s: Scenario,
    seed: int,
    horizon: Optional[int] = None,
    instrument: bool = False,
) -> RunResult:
    """Simulate one seeded run step by step through the estimator state machine.

    Every sensor produces its message for step k, the full round is
    delivered along the step-k edges, and every sensor consumes its closed
    neighborhood's messages in the same k. With ``instrument`` set, the
    result also carries the measurement-consumption trail.
    """
    K = s.horizon if horizon is None else int(horizon)
    n, d = s.n, s.d
    nm = NoiseModel(variances=s.variances, seed=seed)
    states = [
        NodeState(theta_hat=s.theta_hat0[i - 1].copy(), counter=0, mu=s.mu[i - 1])
        for i in range(1, n + 1)
    ]
    traj = np.zeros((n, K + 1, d))
    err = np.zeros((n, K + 1))
    eff = np.zeros((n, K), dtype=bool)
    counters = np.zeros((n, K + 1), dtype=np.int64)
    for i in range(1, n + 1):
        traj[i - 1, 0] = states[i - 1].theta_hat
        err[i - 1, 0] = _error_norm(states[i - 1].theta_hat - s.theta)
    payload_total = 0
    consumed: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    phi_hist: list[list[np.ndarray]] = [[] for _ in range(n)]
    y_hist: list[list[float]] = [[] for _ in range(n)]
    for k in range(K):
        msgs = {}
        for i in range(1, n + 1):
            p = regressor_at(s.generators[i - 1], k)
            v = sample_noise(nm, i, k)
            y = measure(s.theta, p, 0.0) + v
            phi_hist[i - 1].insert(0, p)
            y_hist[i - 1].insert(0, y)
            if len(phi_hist[i - 1]) > d:
                phi_hist[i - 1].pop()
                y_hist[i - 1].pop()
            msg, _ = drem_transform(i, k, phi_hist[i - 1], y_hist[i - 1])
            assert msg.payload_size == d + 1, "message payload must be d+1 reals"
            payload_total += msg.payload_size * len(out_neighbors(s.graph, i, k))
            msgs[i] = msg
        for i in range(1, n + 1):
            received = [msgs[j] for j in in_neighbors(s.graph, i, k)]
            state, effective = node_step(states[i - 1], k, msgs[i], received, s.schedule, d)
            if instrument and effective:
                for j in closed_in_neighborhood(s.graph, i, k):
                    if msgs[j].delta_bar != 0.0:
                        consumed[i - 1].extend((j, t) for t in range(k - d + 1, k + 1))
            eff[i - 1, k] = effective
            states[i - 1] = state
            counters[i - 1, k + 1] = state.counter
            traj[i - 1, k + 1] = state.theta_hat
            err[i - 1, k + 1] = _error_norm(state.theta_hat - s.theta)
    return RunResult(
        seed=seed,
        horizon=K,
        theta_hat=traj,
        error_norm=err,
        effective=eff,
        counters=counters,
        payload_size=d + 1,
        payload_total=payload_total,
        consumed=tuple(tuple(c) for c in consumed) if instrument else None,
    )


@dataclass(frozen=True, eq=False)
class MonteCarloAggregate:
    """Aggregates over M runs seeded base_seed+1..base_seed+M.

    ``mean_tilde``/``var_tilde`` are the empirical mean and (M-1)-normalized
    variance of the per-channel error theta_hat - theta; ``var_tilde`` is all
    zeros when M=1.
    """

    runs: int
    base_seed: int
    horizon: int
    mean_error_norm: np.ndarray  # (n, K+1)
    mean_tilde: np.ndarray       # (n, K+1, d)
    var_tilde: np.ndarray        # (n, K+1, d)


def _chunk_sums(args: tuple[Scenario, tuple[int, ...], int]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized engine: simulate one chunk of runs, return its raw sums.

    Replays, elementwise across runs, the exact float operations of
    run_single: same neighborhood order, same accumulation order, same update
    expression. Returns (sum_err, sum_tilde, sum_sq) over the chunk's runs.
    """
    s, seeds, K = args
    tables = step_tables(s, K)
    n, d, m = s.n, s.d, len(seeds)
    noise = np.empty((n, K, m))
    for r, seed in enumerate(seeds):
        nm = NoiseModel(variances=s.variances, seed=seed)
        for j in range(1, n + 1):
            noise[j - 1, :, r] = noise_block(nm, j, K)
    y = tables.y_det[:, :, None] + noise  # (n, K, m)
    ybar = np.zeros((n, K, m, d))
    for j in range(n):
        for k in range(d - 1, K):
            for r in range(d):
                ybar[j, k] += y[j, k - r][:, None] * tables.adj[j, k][None, :, r]
    th = np.repeat(s.theta_hat0[:, None, :], m, axis=1)  # (n, m, d)
    sum_err = np.zeros((n, K + 1))
    sum_tilde = np.zeros((n, K + 1, d))
    sum_sq = np.zeros((n, K + 1, d))

    def accumulate(k: int) -> None:
        tilde = th - s.theta[None, None, :]
        sum_tilde[:, k] += tilde.sum(axis=1)
        sum_sq[:, k] += (tilde * tilde).sum(axis=1)
        es = np.zeros((n, m))
        for l in range(d):
            es += tilde[:, :, l] * tilde[:, :, l]
        sum_err[:, k] += np.sqrt(es).sum(axis=1)

    accumulate(0)
    for k in range(K):
        for i in range(1, n + 1):
            srow = tables.gated_sum[i - 1, k]
            if srow == 0.0:
                continue
            cur = th[i - 1]
            num = np.zeros((m, d))
            for j in tables.members[i - 1][k]:
                dlt = tables.delta[j - 1, k]
                num += dlt * (ybar[j - 1, k] - dlt * cur)
            th[i - 1] = cur + (tables.alpha[k] * num) / (s.mu[i - 1] + srow)
        accumulate(k + 1)
    return sum_err, sum_tilde, sum_sq


def run_monte_carlo(
    s: Scenario,
    runs: int,
    base_seed: int,
    workers: int = 1,
    horizon: Optional[int] = None,
    chunk_runs: int = CHUNK_RUNS,
) -> MonteCarloAggregate:
    """Aggregate ``runs`` seeded runs; byte-identical for any worker count.

    Seeds are base_seed+1..base_seed+runs, split into fixed-size chunks whose
    partial sums are reduced strictly in chunk order.
    """
    if runs < 1:
        raise ValueError(f"need at least one run, got {runs}")
    if chunk_runs < 1:
        raise ValueError(f"chunk size must be positive, got {chunk_runs}")
    K = s.horizon if horizon is None else int(horizon)
    seeds = [base_seed + r for r in range(1, runs + 1)]
    chunks = [
        (s, tuple(seeds[c : c + chunk_runs]), K)
        for c in range(0, runs, chunk_runs)
    ]
    if workers > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(chunks))) as pool:
            parts = list(pool.map(_chunk_sums, chunks))
    else:
        parts = [_chunk_sums(c) for c in chunks]
    sum_err = parts[0][0].copy()
    sum_tilde = parts[0][1].copy()
    sum_sq = parts[0][2].copy()
    for pe, pt, pq in parts[1:]:
        sum_err += pe
        sum_tilde += pt
        sum_sq += pq
    mean_err = sum_err / runs
    mean_tilde = sum_tilde / runs
    if runs > 1:
        var = (sum_sq - runs * mean_tilde * mean_tilde) / (runs - 1)
        var = np.maximum(var, 0.0)
    else:
        var = np.zeros_like(mean_tilde)
    return MonteCarloAggregate(
        runs=runs,
        base_seed=base_seed,
        horizon=K,
        mean_error_norm=mean_err,
        mean_tilde=mean_tilde,
        var_tilde=var,
    )


def _fmt(v: float) -> str:
    return repr(float(v))


def export_csv(obj: Union[RunResult, MonteCarloAggregate], path: Union[str, Path]) -> None:
    """Write a run or aggregate as CSV: one row per (step, sensor).

    Floats are written with repr, which round-trips float64 exactly.
    """
    if isinstance(obj, MonteCarloAggregate):
        d = obj.mean_tilde.shape[2]
        header = (
            ["k", "i", "mean_error_norm"]
            + [f"mean_tilde_{l}" for l in range(1, d + 1)]
            + [f"var_tilde_{l}" for l in range(1, d + 1)]
        )

        def row(k: int, i: int) -> list[str]:
            return (
                [str(k), str(i), _fmt(obj.mean_error_norm[i - 1, k])]
                + [_fmt(v) for v in obj.mean_tilde[i - 1, k]]
                + [_fmt(v) for v in obj.var_tilde[i - 1, k]]
            )

        n, steps = obj.mean_error_norm.shape
    elif isinstance(obj, RunResult):
        d = obj.theta_hat.shape[2]
        header = ["k", "i", "error_norm"] + [f"theta_hat_{l}" for l in range(1, d + 1)]

        def row(k: int, i: int) -> list[str]:
            return [str(k), str(i), _fmt(obj.error_norm[i - 1, k])] + [
                _fmt(v) for v in obj.theta_hat[i - 1, k]
            ]

        n, steps = obj.error_norm.shape
    else:
        raise TypeError(f"cannot export object of type {type(obj).__name__}")
    try:
        with open(path, "w", newline="") as f:
            f.write(",".join(header) + "\n")
            for k in range(steps):
                for i in range(1, n + 1):
                    f.write(",".join(row(k, i)) + "\n")
    except OSError as e:
        raise OSError(f"cannot write {path}: {e.strerror or e}") from e


@dataclass(frozen=True, eq=False)
class CheckReport:
    """Assumption audit: boundedness, cooperative excitation, step sizes."""

    bounds: tuple[float, ...]
    realized_max: tuple[float, ...]
    bounded_ok: bool
    pe_h: dict[int, Optional[int]]
    pe_margin: dict[int, float]
    pe_ok: bool
    single_pe_h: dict[int, Optional[int]]
    schedule_problems: tuple[str, ...]
    problems: tuple[str, ...]
    ok: bool


def check_scenario(
    s: Scenario,
    h_max: int = 8,
    omega: float = 1.0,
    horizon: Optional[int] = None,
) -> CheckReport:
    """Audit the three standing assumptions on a scenario.

    Checks regressor boundedness (declared and realized over the horizon),
    searches neighborhood excitation certificates with windows up to h_max at
    level omega, and audits the step-size schedule. Single-sensor excitation
    is reported informationally; it is allowed to fail.
    """
    K = s.horizon if horizon is None else int(horizon)
    tables = step_tables(s, K)
    problems: list[str] = []
    bounds = tuple(g.bound for g in s.generators)
    realized = tuple(
        float(np.max(np.abs(tables.phi[i - 1]))) if K > 0 else 0.0
        for i in range(1, s.n + 1)
    )
    bounded_ok = all(math.isfinite(b) for b in bounds)
    for i, b in enumerate(bounds, start=1):
        if not math.isfinite(b):
            problems.append(f"sensor {i}: regressor sequence is unbounded")
    trace = DeltaTrace(values=tables.delta, d=s.d)
    pe_h = find_certificate(trace, s.graph, omega, h_max, K)
    pe_margin: dict[int, float] = {}
    single_pe_h: dict[int, Optional[int]] = {}
    for i in range(1, s.n + 1):
        h = pe_h[i] if pe_h[i] is not None else h_max
        cert = local_pe_check(trace, s.graph, h, omega, K)
        pe_margin[i] = cert.margin[i - 1]
        single_pe_h[i] = None
        for hh in range(1, h_max + 1):
            sat, _ = single_sensor_pe(trace, i, hh, omega, K)
            if sat:
                single_pe_h[i] = hh
                break
    pe_ok = all(h is not None for h in pe_h.values())
    for i, h in pe_h.items():
        if h is None:
            problems.append(
                f"sensor {i}: no neighborhood excitation certificate with H <= {h_max}, "
                f"omega = {omega} (margin {pe_margin[i]:.3g} at H = {h_max})"
            )
    sched = tuple(schedule_violations(s.schedule, K) + asymptotic_violations(s.schedule))
    problems.extend(sched)
    return CheckReport(
        bounds=bounds,
        realized_max=realized,
        bounded_ok=bounded_ok,
        pe_h=pe_h,
        pe_margin=pe_margin,
        pe_ok=pe_ok,
        single_pe_h=single_pe_h,
        schedule_problems=sched,
        problems=tuple(problems),
        ok=bounded_ok and pe_ok and not sched,
    )

"""Stochastic linear regression model: regressor generators and measurement noise.

Each sensor i observes the scalar measurement

    y_i(k) = theta' phi_i(k) + v_i(k),    k = 0, 1, 2, ...

where theta is the unknown d-vector, phi_i(k) is a deterministic regressor
sequence produced by a per-sensor generator, and v_i(k) is zero-mean i.i.d.
Gaussian noise with per-sensor variance R_i.

Noise draws are a pure function of (seed, sensor, k): each (seed, sensor)
pair keys a Philox counter-based stream and k selects the counter block, so
Monte Carlo workers can evaluate steps in any order and still reproduce the
exact same values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

__all__ = [
    "PeriodicList",
    "RecursiveCosine",
    "Constant",
    "CustomTable",
    "RegressorGenerator",
    "regressor_at",
    "generator_from_config",
    "NoiseModel",
    "sample_noise",
    "noise_block",
    "Measurement",
    "measure",
]

_MASK64 = (1 << 64) - 1
_INV_2_53 = 2.0 ** -53


def _coerce_vectors(vectors) -> tuple[tuple[float, ...], ...]:
    return tuple(tuple(float(x) for x in v) for v in vectors)


@dataclass(frozen=True)
class PeriodicList:
    """Cycles through a fixed list of vectors: phi(k) = vectors[k mod len]."""

    vectors: tuple[tuple[float, ...], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "vectors", _coerce_vectors(self.vectors))
        if not self.vectors:
            raise ValueError("PeriodicList needs at least one vector")
        if len({len(v) for v in self.vectors}) != 1:
            raise ValueError("PeriodicList vectors must share one dimension")

    @property
    def dimension(self) -> int:
        return len(self.vectors[0])

    @property
    def bound(self) -> float:
        """Declared sup-norm bound on every emitted vector."""
        return max(abs(x) for v in self.vectors for x in v)

    def vector_at(self, k: int) -> np.ndarray:
        return np.array(self.vectors[k % len(self.vectors)], dtype=float)


# iterative-recursion values a(0), a(1), ... shared across generator instances;
# grown on demand, never mutated in place, so concurrent readers are safe
_RECURSION_CACHE: dict[tuple[float, float], list[float]] = {}


def _recursion_value(initial: float, angle_step: float, k: int) -> float:
    values = _RECURSION_CACHE.setdefault((initial, angle_step), [initial])
    while len(values) <= k:
        t = len(values)
        values.append(values[-1] + math.cos(t * angle_step))
    return values[k]


@dataclass(frozen=True)
class RecursiveCosine:
    """One slot follows a(k) = a(k-1) + cos(k * angle_step); the rest is fixed.

    The emitted vector is ``base`` with ``base[slot]`` replaced by a(k),
    starting from a(0) = ``initial``. Values are produced by the literal
    float recursion (not a closed form) so that consecutive differences
    recover the cosine increments exactly as summed.
    """

    base: tuple[float, ...]
    slot: int
    initial: float
    angle_step: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "base", tuple(float(x) for x in self.base))
        if not 0 <= self.slot < len(self.base):
            raise ValueError(f"slot {self.slot} outside base of length {len(self.base)}")

    @property
    def dimension(self) -> int:
        return len(self.base)

    @property
    def bound(self) -> float:
        # |sum_{t<=k} cos(t*w)| <= 1/|sin(w/2)| by the Lagrange trig identity;
        # w an exact float multiple of 2*pi makes every increment ~1, so the
        # sums grow linearly and no finite bound is honest (sin(w/2) is then
        # ~1e-16 rather than 0, hence the modulo test)
        if self.angle_step % math.tau == 0.0:
            return math.inf
        s = math.sin(self.angle_step / 2.0)
        if s == 0.0:
            return math.inf
        slot_bound = abs(self.initial) + 1.0 / abs(s)
        fixed = [abs(x) for i, x in enumerate(self.base) if i != self.slot]
        return max([slot_bound, *fixed])

    def vector_at(self, k: int) -> np.ndarray:
        v = np.array(self.base, dtype=float)
        v[self.slot] = _recursion_value(self.initial, self.angle_step, k)
        return v


@dataclass(frozen=True)
class Constant:
    """phi(k) = vector for every k."""

    vector: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "vector", tuple(float(x) for x in self.vector))
        if not self.vector:
            raise ValueError("Constant vector must be non-empty")

    @property
    def dimension(self) -> int:
        return len(self.vector)

    @property
    def bound(self) -> float:
        return max(abs(x) for x in self.vector)

    def vector_at(self, k: int) -> np.ndarray:
        return np.array(self.vector, dtype=float)


@dataclass(frozen=True)
class CustomTable:
    """Explicit per-step vectors; steps beyond the table hold the last entry."""

    vectors: tuple[tuple[float, ...], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "vectors", _coerce_vectors(self.vectors))
        if not self.vectors:
            raise ValueError("CustomTable needs at least one vector")
        if len({len(v) for v in self.vectors}) != 1:
            raise ValueError("CustomTable vectors must share one dimension")

    @property
    def dimension(self) -> int:
        return len(self.vectors[0])

    @property
    def bound(self) -> float:
        return max(abs(x) for v in self.vectors for x in v)

    def vector_at(self, k: int) -> np.ndarray:
        return np.array(self.vectors[min(k, len(self.vectors) - 1)], dtype=float)


RegressorGenerator = Union[PeriodicList, RecursiveCosine, Constant, CustomTable]


def regressor_at(gen: RegressorGenerator, k: int) -> np.ndarray:
    """Evaluate phi(k) for a generator. k must be >= 0."""
    if k < 0:
        raise ValueError(f"regressor index must be >= 0, got {k}")
    return gen.vector_at(k)


_GENERATOR_KINDS = {
    "periodic-list": lambda cfg: PeriodicList(vectors=cfg["vectors"]),
    "recursive-cosine": lambda cfg: RecursiveCosine(
        base=cfg["base"],
        slot=int(cfg["slot"]),
        initial=float(cfg["initial"]),
        angle_step=float(cfg["angle_step"]),
    ),
    "constant": lambda cfg: Constant(vector=cfg["vector"]),
    "custom-table": lambda cfg: CustomTable(vectors=cfg["vectors"]),
}


def generator_from_config(cfg: dict) -> RegressorGenerator:
    """Build a generator from its config dict (see the scenario file format)."""
    kind = cfg.get("kind")
    if kind not in _GENERATOR_KINDS:
        known = ", ".join(sorted(_GENERATOR_KINDS))
        raise ValueError(f"unknown generator kind {kind!r}; expected one of: {known}")
    try:
        return _GENERATOR_KINDS[kind](cfg)
    except KeyError as exc:
        raise ValueError(f"generator kind {kind!r} is missing field {exc.args[0]!r}") from None


@dataclass(frozen=True)
class NoiseModel:
    """Per-sensor Gaussian noise variances plus the run seed."""

    variances: tuple[float, ...]
    seed: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "variances", tuple(float(r) for r in self.variances))
        for i, r in enumerate(self.variances, start=1):
            if not (r >= 0.0 and math.isfinite(r)):
                raise ValueError(f"noise variance R_{i} must be finite and >= 0, got {r}")


def _philox_key(seed: int, sensor: int) -> np.ndarray:
    return np.random.SeedSequence((seed & _MASK64, sensor)).generate_state(2, np.uint64)


def _gauss_from_words(w0: np.ndarray, w1: np.ndarray) -> np.ndarray:
    # Box-Muller on the top 53 bits of two Philox words; u1 is kept in (0, 1]
    # so the log never sees zero
    u1 = ((w0 >> np.uint64(11)).astype(np.float64) + 1.0) * _INV_2_53
    u2 = (w1 >> np.uint64(11)).astype(np.float64) * _INV_2_53
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)


def _check_sensor(model: NoiseModel, sensor: int) -> None:
    if not 1 <= sensor <= len(model.variances):
        raise ValueError(f"sensor id {sensor} outside 1..{len(model.variances)}")


def noise_block(model: NoiseModel, sensor: int, steps: int) -> np.ndarray:
    """All draws v(0), ..., v(steps-1) for one sensor in a single pass.

    Bit-identical to calling :func:`sample_noise` at each k; the block form
    exists because Monte Carlo runs consume whole horizons at once.
    """
    _check_sensor(model, sensor)
    if steps <= 0:
        return np.zeros(0)
    raw = np.random.Philox(key=_philox_key(model.seed, sensor), counter=[0, 0, 0, 0])
    words = raw.random_raw(4 * steps).reshape(steps, 4)
    sigma = math.sqrt(model.variances[sensor - 1])
    return sigma * _gauss_from_words(words[:, 0], words[:, 1])


def sample_noise(model: NoiseModel, sensor: int, k: int) -> float:
    """One Gaussian draw v_sensor(k), deterministic in (seed, sensor, k)."""
    _check_sensor(model, sensor)
    if k < 0:
        raise ValueError(f"time step must be >= 0, got {k}")
    raw = np.random.Philox(key=_philox_key(model.seed, sensor), counter=[k, 0, 0, 0])
    words = raw.random_raw(2)
    sigma = math.sqrt(model.variances[sensor - 1])
    return float(sigma * _gauss_from_words(words[0:1], words[1:2])[0])


@dataclass(frozen=True)
class Measurement:
    """A scalar observation y_i(k)."""

    value: float
    sensor: int
    step: int


def measure(theta: np.ndarray, phi: np.ndarray, noise: float) -> float:
    """Evaluate theta' phi + noise.

    Raises ValueError on dimension mismatch; the model is scalar-output only.
    """
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if theta.shape != phi.shape or theta.ndim != 1:
        raise ValueError(f"dimension mismatch: theta {theta.shape} vs phi {phi.shape}")
    return float(np.dot(theta, phi)) + noise

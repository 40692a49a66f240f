"""Analytical moment recursions for the gated distributed estimator.

With deterministic regressors, graph, and step sizes, the whole gating
skeleton of a scenario is deterministic; only the noise is random. The error
theta_tilde = theta_hat - theta then obeys exact per-channel recursions:

    E[theta_tilde(k+1)]   = (1 - beta_i(k)) E[theta_tilde(k)]
    cov[theta_tilde(k+1)] = (1 - beta_i(k))^2 cov[theta_tilde(k)] + eps_il(k)

with the contraction factor beta_i(k) = alpha(k) S_i(k) / (mu_i + S_i(k)),
S_i(k) the gated sum of squared scalar regressors, and the driving term

    eps_il(k) = (alpha(k) / (mu_i + S_i(k)))^2
                * sum_j delta_j(k)^2 cov[vbar_jl(k)].

The counter spacing makes successive update windows disjoint, so the noise
entering an update is independent of the current error and of the noise of
earlier updates; that independence is what makes these recursions exact (and
it is checked empirically against Monte Carlo output by the test suite). At
non-update steps S=0 forces beta = eps = 0 and both moments hold still.

A looser companion recursion replaces (1-beta)^2 by (1-beta); it dominates
the exact covariance and is the form the convergence argument bounds.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .drem import adjugate
from .harness import Scenario, StepTables, check_scenario, step_tables

__all__ = [
    "StepCoefficients",
    "MomentTrajectory",
    "TheoremReport",
    "beta",
    "mixed_noise_variance",
    "step_coefficients",
    "mean_recursion",
    "covariance_recursion",
    "moments",
    "theorem_check",
    "export_oracle_csv",
]


def beta(alpha: float, mu: float, gated_sum: float) -> float:
    """Contraction factor alpha * S / (mu + S); always in [0, alpha]."""
    if mu <= 0:
        raise ValueError(f"mu must be positive, got {mu}")
    if gated_sum < 0:
        raise ValueError(f"gated sum must be nonnegative, got {gated_sum}")
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    return alpha * gated_sum / (mu + gated_sum)


def mixed_noise_variance(phi: np.ndarray, variance: float, channel: int) -> float:
    """Variance of channel l of adj(Phi) applied to i.i.d. noise of variance R.

    ``channel`` is 1-based, matching the channel indexing everywhere else.
    Returns R times the squared norm of row l of adj(Phi).
    """
    if variance < 0:
        raise ValueError(f"variance must be nonnegative, got {variance}")
    phi = np.asarray(phi, dtype=float)
    d = phi.shape[0]
    if not 1 <= channel <= d:
        raise ValueError(f"channel {channel} out of range 1..{d}")
    row = adjugate(phi)[channel - 1]
    return variance * float(np.dot(row, row))


@dataclass(frozen=True, eq=False)
class StepCoefficients:
    """Per-step deterministic coefficients of the moment recursions.

    ``beta[i-1, k]`` and ``epsilon[i-1, k, l-1]`` drive sensor i's channel-l
    recursions; ``noise_var[j-1, k, l-1]`` is cov of the mixed noise
    vbar_jl(k); ``gated_sum`` is S_i(k).
    """

    alpha: np.ndarray      # (K,)
    beta: np.ndarray       # (n, K)
    epsilon: np.ndarray    # (n, K, d)
    gated_sum: np.ndarray  # (n, K)
    noise_var: np.ndarray  # (n, K, d)

    def __post_init__(self):
        if not np.all((self.beta >= 0.0) & (self.beta <= self.alpha[None, :])):
            raise ValueError("beta must lie in [0, alpha] at every step")
        if not np.all(self.epsilon >= 0.0):
            raise ValueError("epsilon must be nonnegative")


def _tables(s: Scenario, horizon: Optional[int]) -> StepTables:
    return step_tables(s, s.horizon if horizon is None else int(horizon))


def step_coefficients(s: Scenario, horizon: Optional[int] = None) -> StepCoefficients:
    """Evaluate beta, epsilon, and the mixed-noise variances over a horizon."""
    t = _tables(s, horizon)
    n, d, K = s.n, s.d, t.horizon
    noise_var = np.zeros((n, K, d))
    for j in range(n):
        rj = s.variances[j]
        for k in range(d - 1, K):
            rows = t.adj[j, k]
            for l in range(d):
                noise_var[j, k, l] = rj * float(np.dot(rows[l], rows[l]))
    bet = np.zeros((n, K))
    eps = np.zeros((n, K, d))
    for i in range(n):
        mu = s.mu[i]
        for k in range(K):
            srow = t.gated_sum[i, k]
            if srow == 0.0:
                continue
            bet[i, k] = beta(t.alpha[k], mu, srow)
            gain = (t.alpha[k] / (mu + srow)) ** 2
            for j in t.members[i][k]:
                dlt = t.delta[j - 1, k]
                eps[i, k] += gain * dlt * dlt * noise_var[j - 1, k]
    return StepCoefficients(
        alpha=t.alpha, beta=bet, epsilon=eps, gated_sum=t.gated_sum, noise_var=noise_var
    )


def mean_recursion(s: Scenario, horizon: Optional[int] = None) -> np.ndarray:
    """Exact expected-error trajectory, shape (n, horizon+1, d).

    Starts from theta_hat0 - theta and contracts by (1 - beta_i(k)) each
    step; non-update steps have beta = 0 and hold the mean constant.
    """
    coef = step_coefficients(s, horizon)
    n, K = coef.beta.shape
    mean = np.zeros((n, K + 1, s.d))
    mean[:, 0] = s.theta_hat0 - s.theta[None, :]
    for k in range(K):
        mean[:, k + 1] = (1.0 - coef.beta[:, k])[:, None] * mean[:, k]
    return mean


def covariance_recursion(
    s: Scenario, horizon: Optional[int] = None
) -> tuple[np.ndarray, np.ndarray]:
    """Exact covariance trajectory and its dominating bound, (n, horizon+1, d).

    Both start at zero (the initial estimate is deterministic) and share the
    driving term epsilon; the bound contracts by (1-beta) instead of
    (1-beta)^2, so exact <= bound pointwise.
    """
    coef = step_coefficients(s, horizon)
    n, K = coef.beta.shape
    exact = np.zeros((n, K + 1, s.d))
    bound = np.zeros((n, K + 1, s.d))
    for k in range(K):
        damp = 1.0 - coef.beta[:, k]
        exact[:, k + 1] = (damp * damp)[:, None] * exact[:, k] + coef.epsilon[:, k]
        bound[:, k + 1] = damp[:, None] * bound[:, k] + coef.epsilon[:, k]
    return exact, bound


@dataclass(frozen=True, eq=False)
class MomentTrajectory:
    """Mean and covariance trajectories on the simulation step grid."""

    mean: np.ndarray       # (n, K+1, d)
    cov_exact: np.ndarray  # (n, K+1, d)
    cov_bound: np.ndarray  # (n, K+1, d)

    def __post_init__(self):
        if np.any(self.cov_exact < 0) or np.any(self.cov_bound < 0):
            raise ValueError("covariances must be nonnegative")


def moments(s: Scenario, horizon: Optional[int] = None) -> MomentTrajectory:
    exact, bound = covariance_recursion(s, horizon)
    return MomentTrajectory(mean=mean_recursion(s, horizon), cov_exact=exact, cov_bound=bound)


@dataclass(frozen=True, eq=False)
class TheoremReport:
    """Outcome of the mean-square convergence audit on one scenario.

    ``violations`` lists broken standing assumptions; ``mean_final`` and
    ``cov_final`` are the per-sensor, per-channel terminal |E[theta_tilde]|
    and cov; ``ratio_max`` is the largest realized eps/beta against its
    analytical cap C alpha / mu over effective steps.
    """

    horizon: int
    violations: tuple[str, ...]
    mean_final: np.ndarray
    cov_final: np.ndarray
    mean_threshold: float
    cov_threshold: float
    mean_ok: bool
    cov_ok: bool
    ratio_max: float
    ratio_cap_ok: bool
    ok: bool


def theorem_check(
    s: Scenario,
    horizon: Optional[int] = None,
    mean_threshold: float = 1e-2,
    cov_threshold: float = 1e-2,
    pe_h_max: int = 8,
    pe_omega: float = 1.0,
) -> TheoremReport:
    """Audit assumptions and whether both moments vanish within thresholds.

    Convergence is judged on the oracle recursions at the final step;
    epsilon/beta is additionally checked against its cap C * alpha / mu with
    C the realized max squared adjugate-row norm times the largest noise
    variance.
    """
    K = s.horizon if horizon is None else int(horizon)
    report = check_scenario(s, h_max=pe_h_max, omega=pe_omega, horizon=K)
    coef = step_coefficients(s, K)
    mean = mean_recursion(s, K)
    exact, _ = covariance_recursion(s, K)
    mean_final = np.abs(mean[:, K])
    cov_final = exact[:, K]
    mean_ok = bool(np.all(mean_final < mean_threshold))
    cov_ok = bool(np.all(cov_final < cov_threshold))
    r_max = max(s.variances) if s.variances else 0.0
    b_sq = float(np.max(coef.noise_var)) / r_max if r_max > 0 else 0.0
    cap_const = b_sq * r_max
    ratio_max = 0.0
    ratio_ok = True
    for i in range(s.n):
        for k in range(coef.beta.shape[1]):
            b = coef.beta[i, k]
            if b == 0.0:
                continue
            ratio = float(np.max(coef.epsilon[i, k])) / b
            ratio_max = max(ratio_max, ratio)
            cap = cap_const * coef.alpha[k] / s.mu[i]
            if ratio > cap * (1.0 + 1e-12):
                ratio_ok = False
    return TheoremReport(
        horizon=K,
        violations=report.problems,
        mean_final=mean_final,
        cov_final=cov_final,
        mean_threshold=mean_threshold,
        cov_threshold=cov_threshold,
        mean_ok=mean_ok,
        cov_ok=cov_ok,
        ratio_max=ratio_max,
        ratio_cap_ok=ratio_ok,
        ok=not report.problems and mean_ok and cov_ok,
    )


def _write_oracle(m: MomentTrajectory, f) -> None:
    n, steps, d = m.mean.shape
    f.write("k,i,l,mean,cov_exact,cov_bound\n")
    for k in range(steps):
        for i in range(1, n + 1):
            for l in range(1, d + 1):
                f.write(
                    f"{k},{i},{l},{float(m.mean[i - 1, k, l - 1])!r},"
                    f"{float(m.cov_exact[i - 1, k, l - 1])!r},"
                    f"{float(m.cov_bound[i - 1, k, l - 1])!r}\n"
                )


def export_oracle_csv(m: MomentTrajectory, path) -> None:
    """Write oracle trajectories as CSV rows k, i, l, mean, cov_exact, cov_bound.

    ``path`` may also be an open text stream.
    """
    if hasattr(path, "write"):
        _write_oracle(m, path)
        return
    try:
        with open(path, "w", newline="") as f:
            _write_oracle(m, f)
    except OSError as e:
        raise OSError(f"cannot write {path}: {e.strerror or e}") from e

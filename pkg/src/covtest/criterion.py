"""The L_p test of a hypothesised covariance and its Monte Carlo harness.

H is accepted when ``int_0^A |rho_hat - rho|**p dtau < S_delta`` and rejected
otherwise, including at equality.
"""
from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .covariance import DEFAULT_QUAD, CovarianceModel, ObservationWindow, QuadratureSpec, compute_cp, eval_rho
from .errors import CovTestError, DomainError
from .simulate import Correlogram, correlogram_matrix, deviation_statistic, make_sampler, replication_seed, test_statistic
from .tailbound import TailBoundParams, ThresholdBranch, g_tail, s_delta, solve_epsilon_delta, z_threshold


@dataclass(frozen=True)
class TestConfig:
    delta: float
    p: float
    window: ObservationWindow
    null_model: CovarianceModel

    __test__ = False

    def __post_init__(self):
        if not 0 < self.delta < 1:
            raise DomainError(f"delta must lie in (0, 1), got {self.delta!r}")
        if not (math.isfinite(self.p) and self.p >= 1):
            raise DomainError(f"p must be >= 1, got {self.p!r}")


@dataclass(frozen=True)
class Threshold:
    cp: float
    z_p: float
    epsilon_delta: float
    threshold: float
    branch: ThresholdBranch


@dataclass(frozen=True)
class TestDecision:
    statistic: float
    threshold: float
    accepted: bool
    epsilon_delta: float
    z_p: float
    cp: float
    threshold_branch: ThresholdBranch

    __test__ = False

    def to_dict(self):
        return {
            "statistic": self.statistic,
            "threshold": self.threshold,
            "accepted": self.accepted,
            "epsilon_delta": self.epsilon_delta,
            "z_p": self.z_p,
            "cp": self.cp,
            "threshold_branch": self.threshold_branch.value,
        }


@dataclass(frozen=True)
class MonteCarloReport:
    replications: int
    rejections: int
    rejection_rate: float
    binomial_std_err: float
    config_digest: str
    master_seed: int

    def to_json(self) -> str:
        return json.dumps(
            {
                "replications": self.replications,
                "rejections": self.rejections,
                "rejection_rate": self.rejection_rate,
                "binomial_std_err": self.binomial_std_err,
                "config_digest": self.config_digest,
                "master_seed": self.master_seed,
            },
            indent=2,
            sort_keys=True,
        )


def compute_threshold(config: TestConfig, quad: QuadratureSpec = DEFAULT_QUAD) -> Threshold:
    """C_p of the null model and the resulting S_delta."""
    cp = compute_cp(config.null_model, config.window, config.p, quad)
    params = TailBoundParams(config.p, cp)
    eps = solve_epsilon_delta(config.delta, params)
    S, branch = s_delta(config.delta, params)
    if branch is ThresholdBranch.FROM_ROOT:
        eps = S
    return Threshold(cp, z_threshold(params), eps, S, branch)


def decide(statistic: float, th: Threshold) -> TestDecision:
    return TestDecision(
        statistic=float(statistic),
        threshold=th.threshold,
        accepted=bool(statistic < th.threshold),
        epsilon_delta=th.epsilon_delta,
        z_p=th.z_p,
        cp=th.cp,
        threshold_branch=th.branch,
    )


def run_test(corr: Correlogram, config: TestConfig, quad: QuadratureSpec = DEFAULT_QUAD) -> TestDecision:
    stat = test_statistic(corr, config.null_model, config.window.A, config.p)
    return decide(stat, compute_threshold(config, quad))


run_test.__test__ = False


def tail_curve(params: TailBoundParams, epsilons):
    """[(eps, g(eps), eps >= z_p)] for plotting."""
    z = z_threshold(params)
    return [(float(e), g_tail(e, params), bool(e >= z)) for e in epsilons]


def config_digest(true_model, config, reps, master_seed, method="circulant") -> str:
    w = config.window
    return json.dumps(
        {
            "true_model": true_model.describe(),
            "null_model": config.null_model.describe(),
            "T": w.T,
            "A": w.A,
            "dt": w.dt,
            "p": config.p,
            "delta": config.delta,
            "reps": reps,
            "master_seed": master_seed,
            "method": method,
        },
        sort_keys=True,
        separators=(",", ":"),
    )


def _rejections(true_model, config, threshold, master_seed, indices, method):
    """Rejection flags for the given replication indices."""
    w = config.window
    sampler = make_sampler(true_model, w.n_points, w.dt, method)
    rho = eval_rho(config.null_model, np.arange(w.n_A + 1) * w.dt)
    flags = np.empty(len(indices), dtype=bool)
    for j, r in enumerate(indices):
        try:
            x = sampler.draw(np.random.default_rng(replication_seed(master_seed, r)))
            stat = deviation_statistic(correlogram_matrix(x, w), rho, w.dt, config.p)[0]
        except CovTestError as exc:
            raise type(exc)(f"replication {r}: {exc}") from exc
        flags[j] = not stat < threshold
    return flags


def monte_carlo_level(
    true_model: CovarianceModel,
    config: TestConfig,
    reps: int,
    master_seed: int,
    workers: int = 1,
    quad: QuadratureSpec = DEFAULT_QUAD,
    method: str = "circulant",
) -> MonteCarloReport:
    """Rejection frequency of the test on ``reps`` paths drawn from ``true_model``.

    With ``true_model == config.null_model`` this estimates the type I error.
    Output depends only on the arguments, not on ``workers``.
    """
    if reps < 1:
        raise ValueError("reps must be >= 1")
    th = compute_threshold(config, quad)
    idx = np.arange(reps)
    if workers <= 1 or reps == 1:
        flags = _rejections(true_model, config, th.threshold, master_seed, idx, method)
    else:
        chunks = [c for c in np.array_split(idx, workers) if c.size]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(
                _rejections,
                *zip(*[(true_model, config, th.threshold, master_seed, c, method) for c in chunks]),
            )
            flags = np.concatenate(list(parts))
    rejections = int(flags.sum())
    rate = rejections / reps
    return MonteCarloReport(
        replications=reps,
        rejections=rejections,
        rejection_rate=rate,
        binomial_std_err=math.sqrt(rate * (1 - rate) / reps),
        config_digest=config_digest(true_model, config, reps, master_seed, method),
        master_seed=master_seed,
    )


def default_workers() -> int:
    return os.cpu_count() or 1

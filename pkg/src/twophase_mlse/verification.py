"""Randomized cross-checks of the recursive decoders against dense/brute-force routes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .estimation import ls_estimate
from .metrics import CandidateSet, Criterion, evaluate_metrics
from .signal import (TransmitBlock, build_matrices, complex_normal, ebn0_to_noise_var,
                     psk_constellation, transmit)
from .trellis import Trellis, conventional_mlse
from .twophase import two_phase_decode


@dataclass
class VerificationReport:
    name: str
    instances: int
    failures: int
    max_error: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.failures == 0 and self.instances > 0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"[{status}] {self.name}: {self.instances} instances, {self.failures} failures, "
                f"max error {self.max_error:.3g} (tol {self.tolerance:g})")


def random_instance(rng: np.random.Generator, M: int, P: int, N: int, T: int,
                    ebn0_db: float):
    """A random block, channel and noisy reception with its LS estimate."""
    points = psk_constellation(M)
    train_idx = rng.integers(0, 2**M, T)
    data_idx = rng.integers(0, 2**M, N - T)
    block = TransmitBlock(points[train_idx], points[data_idx], P)
    h = complex_normal(rng, P, 1.0 / P)
    noise_var = ebn0_to_noise_var(ebn0_db)
    y = transmit(block, h, noise_var, rng)
    mats = build_matrices(block)
    h_hat = ls_estimate(mats.bp, y[:T]).h_hat
    return block, data_idx, mats, y, h_hat, noise_var


def path_sigmas(trellis: Trellis, result, data_idx) -> np.ndarray:
    """Winning backward metrics at each step along a single-path decode."""
    state = trellis.initial_state
    out = []
    for tau in range(trellis.n_steps):
        out.append(result.backward.sigma_best[0, tau, state])
        a = data_idx[tau] if tau < trellis.n_data else 0
        state = trellis.succ[state, a]
    return np.array(out)


def check_oracle_identity(instances: int = 1000, seed: int = 0,
                          tol: float = 1e-9) -> VerificationReport:
    """Single-path backward metrics versus the dense near-ML metric.

    Instances span P in {2, 3}, M in {1, 2}, N <= 12 and Eb/N0 in [0, 20] dB.
    Every step's Sigma along the forced path must match to relative ``tol``.
    """
    rng = np.random.default_rng(seed)
    failures, worst = 0, 0.0
    for _ in range(instances):
        M = int(rng.integers(1, 3))
        P = int(rng.integers(2, 4))
        N = int(rng.integers(P + 1, 13))
        T = int(rng.integers(P, N))
        block, data_idx, mats, y, h_hat, noise_var = random_instance(
            rng, M, P, N, T, rng.uniform(0.0, 20.0))
        trellis = Trellis(M, P, N, block.training)
        result = two_phase_decode(trellis, y, h_hat, allowed=trellis.path_mask(data_idx))
        ref = evaluate_metrics(mats.bd, mats.bp_gram, y[T:], h_hat, noise_var).near_ml
        err = np.max(np.abs(path_sigmas(trellis, result, data_idx) - ref)) / max(abs(ref), 1e-300)
        worst = max(worst, float(err))
        failures += int(not err <= tol or not np.array_equal(result.data, data_idx))
    return VerificationReport("oracle identity (single-path Sigma vs dense near-ML)",
                              instances, failures, worst, tol)


def check_forward_exactness(instances: int = 1000, seed: int = 1,
                            max_bits: int = 16) -> VerificationReport:
    """Conventional MLSE output versus the exhaustive Euclidean minimizer."""
    rng = np.random.default_rng(seed)
    failures, worst = 0, 0.0
    cache = {}
    for _ in range(instances):
        M = int(rng.integers(1, 3))
        P = int(rng.integers(1, 4))
        n_data = int(rng.integers(1, max_bits // M + 1))
        T = int(rng.integers(P, P + 4))
        N = T + n_data
        block, data_idx, mats, y, h_hat, noise_var = random_instance(
            rng, M, P, N, T, rng.uniform(0.0, 20.0))
        trellis = Trellis(M, P, N, block.training)
        key = (M, P, N, tuple(block.training))
        if key not in cache:
            cache.clear()
            cache[key] = CandidateSet.build(block.training, M, P, N)
        best, metric = cache[key].decode(y[T:], h_hat, noise_var, Criterion.EUCLIDEAN)
        res = conventional_mlse(trellis, y, h_hat)
        worst = max(worst, abs(float(res.metric) - float(metric[0])) / max(float(metric[0]), 1e-300))
        failures += int(not np.array_equal(res.data, best[0]))
    return VerificationReport("forward VA vs exhaustive Euclidean search", instances, failures,
                              worst, 0.0)


def check_metric_sanity(instances: int = 10_000, seed: int = 2,
                        tol: float = 1e-9) -> VerificationReport:
    """Near-ML metrics over random candidates never dip below ``-tol``."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    failures = 0
    for _ in range(instances):
        M = int(rng.integers(1, 3))
        P = int(rng.integers(1, 4))
        N = int(rng.integers(P + 1, 13))
        T = int(rng.integers(P, N))
        block, _, mats, y, h_hat, noise_var = random_instance(rng, M, P, N, T,
                                                              rng.uniform(0.0, 20.0))
        # score a random wrong candidate, not only the transmitted one
        other = psk_constellation(M)[rng.integers(0, 2**M, N - T)]
        cand = build_matrices(TransmitBlock(block.training, other, P))
        for bd in (mats.bd, cand.bd):
            value = evaluate_metrics(bd, mats.bp_gram, y[T:], h_hat, noise_var).near_ml
            worst = min(worst, value)
            failures += int(value < -tol)
    return VerificationReport("near-ML metric nonnegativity", instances, failures,
                              max(0.0, -worst), tol)

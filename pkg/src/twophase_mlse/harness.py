"""
Monte Carlo error-rate sweeps.

Each trial draws its data, channel and unit-variance noise from three
labelled random streams seeded by ``(base_seed, trial_index, stream)``; the
noise is scaled to each Eb/N0 point afterwards. All schemes decode the very
same received block, and a trial looks the same at every Eb/N0 point.

Trials are processed in fixed-size chunks. The stop rule is checked at
chunk boundaries in chunk order, so the worker count never changes results.
"""

from __future__ import annotations

import functools
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from .channel import GaussMarkovParams, draw_block_taps, gauss_markov_trajectory, \
    time_varying_convolve
from .config import Scenario, Scheme, SimConfig
from .estimation import lms_step_size, ls_estimate
from .metrics import CandidateSet, Criterion
from .signal import complex_normal, convolution_matrix, ebn0_to_noise_var, indices_to_bits
from .trellis import DecodeResult, Trellis, conventional_mlse, lms_mlse
from .twophase import two_phase_decode

log = logging.getLogger(__name__)

CHUNK_SIZE = 1000
_STREAMS = {"data": 0, "channel": 1, "noise": 2}


def trial_rng(base_seed: int, trial_index: int, stream: str) -> np.random.Generator:
    ss = np.random.SeedSequence(base_seed, spawn_key=(trial_index, _STREAMS[stream]))
    return np.random.Generator(np.random.PCG64(ss))


@dataclass
class TrialDraws:
    """Random ingredients of a batch of trials (leading axis = trial)."""

    trial_index: np.ndarray
    data: np.ndarray      # (B, N - T) symbol indices
    taps: np.ndarray      # (B, P) or (B, L, P)
    noise: np.ndarray     # (B, L), unit variance per sample


def draw_trials(config: SimConfig, trial_indices) -> TrialDraws:
    trial_indices = np.asarray(trial_indices, dtype=np.int64)
    n_data, q = config.N - config.T, 2**config.M
    data, taps, noise = [], [], []
    gm = (GaussMarkovParams(config.alpha, config.P)
          if config.scenario is Scenario.GAUSS_MARKOV else None)
    for k in trial_indices:
        k = int(k)
        data.append(trial_rng(config.base_seed, k, "data").integers(0, q, n_data))
        ch = trial_rng(config.base_seed, k, "channel")
        taps.append(draw_block_taps(config.P, ch) if gm is None
                    else gauss_markov_trajectory(gm, config.L, ch))
        noise.append(complex_normal(trial_rng(config.base_seed, k, "noise"), config.L))
    tap_shape = (config.P,) if gm is None else (config.L, config.P)
    return TrialDraws(
        trial_index=trial_indices,
        data=np.array(data, dtype=np.int64).reshape(-1, n_data),
        taps=np.array(taps, dtype=complex).reshape((-1,) + tap_shape),
        noise=np.array(noise, dtype=complex).reshape(-1, config.L),
    )


@functools.lru_cache(maxsize=8)
def _trellis(M: int, P: int, N: int, training: tuple) -> Trellis:
    return Trellis(M, P, N, np.array(training, dtype=complex))


@functools.lru_cache(maxsize=4)
def _candidates(M: int, P: int, N: int, training: tuple) -> CandidateSet:
    return CandidateSet.build(np.array(training, dtype=complex), M, P, N)


def received(config: SimConfig, draws: TrialDraws, noise_var: float) -> np.ndarray:
    symbols = np.concatenate(
        [np.broadcast_to(config.training, (draws.data.shape[0], config.T)),
         _trellis(config.M, config.P, config.N, config.training_symbols).points[draws.data]],
        axis=1)
    if config.scenario is Scenario.GAUSS_MARKOV:
        clean = time_varying_convolve(symbols, draws.taps)
    else:
        clean = np.stack([np.convolve(s, h) for s, h in zip(symbols, draws.taps)]) \
            if symbols.shape[0] else np.zeros((0, config.L), dtype=complex)
    return clean + np.sqrt(noise_var) * draws.noise


@dataclass
class SchemeOutcome:
    """Per-trial results of one scheme over a chunk."""

    decoded: np.ndarray
    bit_errors: np.ndarray
    word_errors: np.ndarray
    metric: np.ndarray
    mults: np.ndarray
    lambda_fallbacks: np.ndarray


def decode_trials(config: SimConfig, draws: TrialDraws, ebn0_db: float) -> dict:
    """Run every configured scheme on the same received blocks."""
    noise_var = ebn0_to_noise_var(ebn0_db)
    y = received(config, draws, noise_var)
    T = config.T
    key = (config.M, config.P, config.N, config.training_symbols)
    trellis = _trellis(*key)
    h_ls = ls_estimate(convolution_matrix(config.training, config.P)[:T], y[:, :T]).h_hat
    B = y.shape[0]

    out = {}
    for scheme in config.schemes:
        if scheme is Scheme.TWO_PHASE_LS:
            res = two_phase_decode(trellis, y, h_ls)
        elif scheme is Scheme.CONVENTIONAL_LS:
            res = conventional_mlse(trellis, y, h_ls)
        elif scheme is Scheme.CONVENTIONAL_PERFECT_CSI:
            taps = draws.taps[:, T:] if config.scenario is Scenario.GAUSS_MARKOV else draws.taps
            res = conventional_mlse(trellis, y, taps)
        elif scheme is Scheme.CONVENTIONAL_LMS:
            alpha = 1.0 if config.alpha is None else config.alpha
            res = lms_mlse(trellis, y, h_ls, lms_step_size(alpha))
        else:
            criterion = (Criterion.NEAR_ML if scheme is Scheme.EXHAUSTIVE_NEAR_ML
                         else Criterion.FULL_ML)
            cands = _candidates(*key)
            decoded, metric = cands.decode(y[:, T:], h_ls, noise_var, criterion)
            res = DecodeResult(data=decoded, metric=metric,
                               mults=np.full(B, cands.mults_per_block(criterion)),
                               lambda_fallbacks=np.zeros(B, dtype=np.int64))
        bit_err = np.sum(indices_to_bits(res.data, config.M) != indices_to_bits(draws.data, config.M),
                         axis=(-2, -1))
        out[scheme] = SchemeOutcome(decoded=res.data, bit_errors=bit_err,
                                    word_errors=np.any(res.data != draws.data, axis=-1),
                                    metric=np.asarray(res.metric), mults=np.asarray(res.mults),
                                    lambda_fallbacks=np.asarray(res.lambda_fallbacks))
    return out


@dataclass(frozen=True)
class TrialRecord:
    scheme: Scheme
    ebn0_db: float
    trial_index: int
    seed: int
    bit_errors: int
    word_error: bool
    metric: float
    mults: int
    lambda_fallbacks: int
    decoded: tuple


def run_trial(config: SimConfig, trial_index: int, ebn0_db: float) -> dict:
    """Decode one block with every scheme; returns ``{scheme: TrialRecord}``."""
    draws = draw_trials(config, [trial_index])
    outcome = decode_trials(config, draws, ebn0_db)
    return {
        scheme: TrialRecord(scheme=scheme, ebn0_db=float(ebn0_db), trial_index=int(trial_index),
                            seed=config.base_seed, bit_errors=int(o.bit_errors[0]),
                            word_error=bool(o.word_errors[0]), metric=float(o.metric[0]),
                            mults=int(o.mults[0]), lambda_fallbacks=int(o.lambda_fallbacks[0]),
                            decoded=tuple(int(v) for v in o.decoded[0]))
        for scheme, o in outcome.items()
    }


def wilson_interval(k, n, confidence: float = 0.95):
    """Wilson score interval for ``k`` successes in ``n`` trials; returns ``(lo, hi)``."""
    k = np.asarray(k, dtype=float)
    n = np.asarray(n, dtype=float)
    z = norm.ppf(0.5 + confidence / 2.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        p = k / n
        denom = 1.0 + z**2 / n
        center = (p + z**2 / (2 * n)) / denom
        half = z * np.sqrt(p * (1 - p) / n + z**2 / (4 * n**2)) / denom
    # the bounds are exact at the edges; avoid roundoff residue there
    lo = np.where((n > 0) & (k > 0), center - half, 0.0)
    hi = np.where((n > 0) & (k < n), center + half, 1.0)
    return np.clip(lo, 0.0, 1.0), np.clip(hi, 0.0, 1.0)


@dataclass
class PointResult:
    scheme: Scheme
    ebn0_db: float
    blocks: int = 0
    bit_errors: int = 0
    word_errors: int = 0
    mults: int = 0
    lambda_fallbacks: int = 0
    bits_per_block: int = 1

    @property
    def n_bits(self) -> int:
        return self.blocks * self.bits_per_block

    @property
    def ber(self) -> float:
        return self.bit_errors / self.n_bits if self.blocks else float("nan")

    @property
    def wer(self) -> float:
        return self.word_errors / self.blocks if self.blocks else float("nan")

    def ber_interval(self):
        lo, hi = wilson_interval(self.bit_errors, self.n_bits)
        return float(lo), float(hi)

    def wer_interval(self):
        lo, hi = wilson_interval(self.word_errors, self.blocks)
        return float(lo), float(hi)

    @property
    def ber_ci_half(self) -> float:
        lo, hi = self.ber_interval()
        return (hi - lo) / 2

    @property
    def wer_ci_half(self) -> float:
        lo, hi = self.wer_interval()
        return (hi - lo) / 2

    def absorb(self, outcome: SchemeOutcome) -> None:
        self.blocks += int(outcome.word_errors.size)
        self.bit_errors += int(outcome.bit_errors.sum())
        self.word_errors += int(outcome.word_errors.sum())
        self.mults += int(outcome.mults.sum())
        self.lambda_fallbacks += int(outcome.lambda_fallbacks.sum())


@dataclass
class SweepResult:
    config: SimConfig
    points: list = field(default_factory=list)

    def point(self, scheme, ebn0_db: float) -> PointResult:
        scheme = Scheme(scheme)
        for p in self.points:
            if p.scheme is scheme and p.ebn0_db == float(ebn0_db):
                return p
        raise KeyError((scheme, ebn0_db))

    def curve(self, scheme) -> list:
        scheme = Scheme(scheme)
        return sorted((p for p in self.points if p.scheme is scheme), key=lambda p: p.ebn0_db)


def _chunk_task(config: SimConfig, ebn0_db: float, start: int, stop: int) -> dict:
    draws = draw_trials(config, np.arange(start, stop))
    return decode_trials(config, draws, ebn0_db)


def _chunks(total: int):
    return [(s, min(s + CHUNK_SIZE, total)) for s in range(0, total, CHUNK_SIZE)]


def _stop_reached(config: SimConfig, acc: dict) -> bool:
    if config.min_word_errors is None:
        return False
    return all(p.word_errors >= config.min_word_errors for p in acc.values())


def run_sweep(config: SimConfig, workers: int = 1) -> SweepResult:
    """Simulate every (scheme, Eb/N0) point of ``config``."""
    result = SweepResult(config=config)
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for ebn0_db in config.ebn0_grid_db:
            acc = {s: PointResult(s, ebn0_db, bits_per_block=config.bits_per_block)
                   for s in config.schemes}
            pending = _chunks(config.blocks_per_point)
            done = False
            while pending and not done:
                wave, pending = pending[:max(workers, 1)], pending[max(workers, 1):]
                if pool is None:
                    outcomes = [_chunk_task(config, ebn0_db, a, b) for a, b in wave]
                else:
                    outcomes = list(pool.map(_chunk_task, *zip(*[(config, ebn0_db, a, b)
                                                                  for a, b in wave])))
                for outcome in outcomes:
                    for scheme, o in outcome.items():
                        acc[scheme].absorb(o)
                    if _stop_reached(config, acc):
                        done = True
                        break
            for p in acc.values():
                log.info("%s @ %.2f dB: %d blocks, BER %.3g, WER %.3g",
                         p.scheme.value, ebn0_db, p.blocks, p.ber, p.wer)
            result.points.extend(acc.values())
    finally:
        if pool is not None:
            pool.shutdown()
    return result

"""Block Rayleigh and Gauss-Markov tap generators and time-varying reception."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.signal

from .signal import TransmitBlock, complex_normal


@dataclass(frozen=True)
class GaussMarkovParams:
    """First-order autoregressive tap process ``h_t = alpha h_{t-1} + sqrt(1 - alpha^2) v_t``."""

    alpha: float
    P: int

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.P < 1:
            raise ValueError(f"P must be >= 1, got {self.P}")

    @property
    def tap_var(self) -> float:
        return 1.0 / self.P


def draw_block_taps(P: int, rng: np.random.Generator) -> np.ndarray:
    """i.i.d. complex Gaussian taps with ``E[h h^H] = I / P``."""
    if P < 1:
        raise ValueError(f"P must be >= 1, got {P}")
    return complex_normal(rng, P, 1.0 / P)


def evolve_gauss_markov(prev, params: GaussMarkovParams, rng: np.random.Generator) -> np.ndarray:
    prev = np.asarray(prev, dtype=complex)
    innovation = complex_normal(rng, prev.shape, params.tap_var)
    return params.alpha * prev + np.sqrt(1.0 - params.alpha**2) * innovation


def gauss_markov_trajectory(params: GaussMarkovParams, length: int,
                            rng: np.random.Generator) -> np.ndarray:
    """Taps ``h_1 .. h_length`` as a ``(length, P)`` array.

    ``h_0`` is drawn from the stationary law, so every ``h_t`` has covariance
    ``I / P``. Draw order: ``h_0`` first, then all innovations row by row.
    """
    h0 = draw_block_taps(params.P, rng)
    innovations = complex_normal(rng, (length, params.P), params.tap_var)
    beta = np.sqrt(1.0 - params.alpha**2)
    out, _ = scipy.signal.lfilter([beta], [1.0, -params.alpha], innovations, axis=0,
                                  zi=(params.alpha * h0)[None, :])
    return out


def time_varying_convolve(symbols, trajectory) -> np.ndarray:
    """Noise-free ``y_t = sum_k h_t[k] b_{t-k}`` for a per-sample tap trajectory.

    Works on a single block (``symbols`` of shape ``(N,)``, trajectory ``(L, P)``)
    or a batch with an extra leading axis on both.
    """
    symbols = np.asarray(symbols, dtype=complex)
    trajectory = np.asarray(trajectory, dtype=complex)
    n = symbols.shape[-1]
    L, P = trajectory.shape[-2:]
    if L != n + P - 1:
        raise ValueError(f"trajectory length {L} does not match N + P - 1 = {n + P - 1}")
    padded = np.zeros(symbols.shape[:-1] + (L,), dtype=complex)
    padded[..., :n] = symbols
    y = np.zeros(symbols.shape[:-1] + (L,), dtype=complex)
    for k in range(P):
        y[..., k:] += trajectory[..., k:, k] * padded[..., :L - k]
    return y


def transmit_time_varying(block: TransmitBlock, trajectory, noise_var: float,
                          rng: np.random.Generator) -> np.ndarray:
    trajectory = np.asarray(trajectory, dtype=complex)
    if trajectory.shape != (block.L, block.P):
        raise ValueError(f"trajectory must have shape {(block.L, block.P)}, got {trajectory.shape}")
    if noise_var < 0:
        raise ValueError(f"noise variance must be >= 0, got {noise_var}")
    clean = time_varying_convolve(block.symbols, trajectory)
    if noise_var == 0:
        return clean
    return clean + complex_normal(rng, clean.size, noise_var)

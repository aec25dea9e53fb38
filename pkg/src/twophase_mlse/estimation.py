"""Channel estimators: least squares from training, genie CSI and LMS tracking."""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
import scipy.linalg


class EstimationError(RuntimeError):
    """Training Gram matrix is singular, so the LS estimate does not exist."""


class EstimateSource(str, Enum):
    LS = "LS"
    PERFECT = "PERFECT"
    LMS = "LMS"


@dataclass(frozen=True)
class ChannelEstimate:
    h_hat: np.ndarray
    source: EstimateSource


def ls_estimate(bp, y_p) -> ChannelEstimate:
    """Least-squares taps ``(B_P^H B_P)^{-1} B_P^H y_P``.

    ``y_p`` may carry a leading batch axis; the Gram matrix is factored once.
    """
    bp = np.asarray(bp, dtype=complex)
    y_p = np.asarray(y_p, dtype=complex)
    T, P = bp.shape
    if T < P:
        raise EstimationError(f"need T >= P for LS estimation, got T={T}, P={P}")
    gram = bp.conj().T @ bp
    try:
        factor = scipy.linalg.cho_factor(gram, lower=True)
    except np.linalg.LinAlgError as exc:
        raise EstimationError("training Gram matrix is not positive definite") from exc
    pivots = np.abs(np.diag(factor[0])) ** 2
    if pivots.min() <= 1e-12 * np.trace(gram).real:
        raise EstimationError("training Gram matrix is numerically singular")
    rhs = y_p @ bp.conj()  # rows: B_P^H y_P for every block
    h_hat = scipy.linalg.cho_solve(factor, rhs.T).T
    return ChannelEstimate(h_hat=h_hat, source=EstimateSource.LS)


def perfect_estimate(h) -> ChannelEstimate:
    return ChannelEstimate(h_hat=np.asarray(h, dtype=complex), source=EstimateSource.PERFECT)


@dataclass(frozen=True)
class LmsState:
    h_hat: np.ndarray
    mu: float

    def __post_init__(self):
        if self.mu < 0:
            raise ValueError(f"LMS step size must be >= 0, got {self.mu}")


def lms_step_size(alpha: float) -> float:
    """Step size ``sqrt(1 - alpha^2) / 2`` matched to a Gauss-Markov correlation."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    return float(np.sqrt(1.0 - alpha**2) / 2.0)


def lms_update(state: LmsState, u, y) -> LmsState:
    """One LMS step for the model ``y = u . h`` (``u`` newest symbol first).

    ``h <- h + mu conj(u) e`` with ``e = y - u . h``; the a-priori error then
    shrinks by the factor ``1 - mu |u|^2``.
    """
    u = np.asarray(u, dtype=complex)
    if u.shape[-1] != state.h_hat.shape[-1]:
        raise ValueError(f"u must have {state.h_hat.shape[-1]} entries, got {u.shape[-1]}")
    err = y - np.sum(u * state.h_hat, axis=-1)
    h_new = state.h_hat + state.mu * u.conj() * np.asarray(err)[..., None]
    return replace(state, h_hat=h_new)

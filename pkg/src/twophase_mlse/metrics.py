"""
Dense evaluation of the partial-CSI decoding criteria and exhaustive search.

For a candidate data matrix ``B_D`` and LS estimate ``h_hat`` the residual is
``e = y_D - B_D h_hat`` and::

    euclidean   = ||e||^2
    correction  = e^H B_D (B_D^H B_D + G_P)^{-1} B_D^H e
    near_ml     = euclidean - correction
    logdet_term = noise_var * log det(I + G_P^{-1} B_D^H B_D)
    full_ml     = near_ml + logdet_term

with ``G_P = B_P^H B_P``. These are computed directly from the matrices and
serve as ground truth for the recursive trellis decoder.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.linalg

from ._linalg import forward_substitute, substitution_mults
from .signal import convolution_matrix, psk_constellation

MAX_ENUMERATION_BITS = 24


class Criterion(str, Enum):
    EUCLIDEAN = "EUCLIDEAN"
    NEAR_ML = "NEAR_ML"
    FULL_ML = "FULL_ML"


class EnumerationTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class MetricBreakdown:
    euclidean: float
    correction: float
    logdet_term: float

    @property
    def near_ml(self) -> float:
        return self.euclidean - self.correction

    @property
    def full_ml(self) -> float:
        return self.near_ml + self.logdet_term

    def value(self, criterion: Criterion) -> float:
        criterion = Criterion(criterion)
        if criterion is Criterion.EUCLIDEAN:
            return self.euclidean
        if criterion is Criterion.NEAR_ML:
            return self.near_ml
        return self.full_ml


def _cho(matrix: np.ndarray, what: str):
    try:
        return scipy.linalg.cho_factor(matrix, lower=True)
    except np.linalg.LinAlgError as exc:
        raise ValueError(f"{what} is not Hermitian positive definite") from exc


def _logdet_from_cho(factor) -> float:
    return 2.0 * float(np.sum(np.log(np.abs(np.diag(factor[0])))))


def evaluate_metrics(bd, bp_gram, y_d, h_hat, noise_var: float) -> MetricBreakdown:
    """Evaluate the Euclidean, correction and log-det terms for one candidate."""
    bd = np.asarray(bd, dtype=complex)
    bp_gram = np.asarray(bp_gram, dtype=complex)
    y_d = np.asarray(y_d, dtype=complex)
    h_hat = np.asarray(h_hat, dtype=complex)

    gram_factor = _cho(bp_gram, "training Gram matrix")
    e = y_d - bd @ h_hat
    euclidean = float(np.vdot(e, e).real)

    bd_gram = bd.conj().T @ bd
    total_factor = _cho(bd_gram + bp_gram, "B_D^H B_D + B_P^H B_P")
    r = bd.conj().T @ e
    correction = float(np.vdot(r, scipy.linalg.cho_solve(total_factor, r)).real)

    logdet = _logdet_from_cho(total_factor) - _logdet_from_cho(gram_factor)
    return MetricBreakdown(euclidean=euclidean, correction=max(correction, 0.0),
                           logdet_term=noise_var * logdet)


def enumerate_data(M: int, n_data: int) -> np.ndarray:
    """All symbol-index sequences of length ``n_data``, lexicographic order."""
    if M * n_data > MAX_ENUMERATION_BITS:
        raise EnumerationTooLarge(
            f"exhaustive search over 2^{M * n_data} sequences exceeds the 2^{MAX_ENUMERATION_BITS} guard")
    q = 2**M
    # row c holds the base-q digits of c, most significant first
    codes = np.arange(q**n_data, dtype=np.int64)[:, None]
    return (codes // q ** np.arange(n_data - 1, -1, -1, dtype=np.int64)) % q


@dataclass(frozen=True)
class CandidateSet:
    """Precomputed per-candidate matrices for exhaustive search over one block layout.

    All quantities depend only on the training prefix and the candidate data,
    never on the received samples, so one set serves every block.
    """

    indices: np.ndarray      # (C, N - T)
    bd: np.ndarray           # (C, L - T, P)
    bd_gram: np.ndarray      # (C, P, P) B_D^H B_D
    total_chol: np.ndarray   # (C, P, P) lower Cholesky factor of B_D^H B_D + G_P
    logdet_ratio: np.ndarray  # (C,) log det(I + G_P^{-1} B_D^H B_D)

    @classmethod
    def build(cls, training, M: int, P: int, N: int) -> "CandidateSet":
        training = np.asarray(training, dtype=complex)
        T = training.size
        indices = enumerate_data(M, N - T)
        points = psk_constellation(M)
        symbols = np.concatenate(
            [np.broadcast_to(training, (indices.shape[0], T)), points[indices]], axis=1)
        bp = convolution_matrix(training, P)[:T]
        bp_gram = bp.conj().T @ bp
        gram_factor = _cho(bp_gram, "training Gram matrix")
        # bd[c, t, k] = b_{T+t-k} (0-based), zero past the last symbol
        pos = T + np.arange(N + P - 1 - T)[:, None] - np.arange(P)[None, :]
        padded = np.concatenate([symbols, np.zeros((symbols.shape[0], P), dtype=complex)], axis=1)
        bd = padded[:, np.where(pos < N, pos, N)]
        bd_gram = np.einsum("ctu,ctv->cuv", bd.conj(), bd)
        chol = np.linalg.cholesky(bd_gram + bp_gram)
        logdet_total = 2.0 * np.sum(np.log(np.abs(np.diagonal(chol, axis1=-2, axis2=-1))), axis=-1)
        return cls(indices=indices, bd=bd, bd_gram=bd_gram, total_chol=chol,
                   logdet_ratio=logdet_total - _logdet_from_cho(gram_factor))

    def metrics(self, y_d, h_hat, noise_var: float, criterion: Criterion) -> np.ndarray:
        """Criterion values, shape ``(B, C)``, for a batch of received data segments.

        Uses the expansion ``||y - B h||^2 = ||y||^2 - 2 Re(h^H B^H y) + h^H B^H B h`` so
        the only block-by-candidate product is one matrix multiply.
        """
        criterion = Criterion(criterion)
        y_d = np.atleast_2d(np.asarray(y_d, dtype=complex))
        h_hat = np.atleast_2d(np.asarray(h_hat, dtype=complex))
        C, _, P = self.bd.shape
        g = (y_d @ self.bd.conj().reshape(C, -1, P).transpose(1, 0, 2).reshape(-1, C * P))
        g = g.reshape(-1, C, P)                                   # B_D^H y_D, (B, C, P)
        gh = np.einsum("cuv,bv->bcu", self.bd_gram, h_hat)       # B_D^H B_D h, (B, C, P)
        metric = (np.sum(np.abs(y_d) ** 2, axis=-1)[:, None]
                  - 2.0 * np.einsum("bp,bcp->bc", h_hat.conj(), g).real
                  + np.einsum("bp,bcp->bc", h_hat.conj(), gh).real)
        if criterion is Criterion.EUCLIDEAN:
            return metric
        w = forward_substitute(self.total_chol, g - gh)
        metric = metric - np.sum(np.abs(w) ** 2, axis=-1)
        if criterion is Criterion.FULL_ML:
            metric = metric + noise_var * self.logdet_ratio
        return metric

    def mults_per_block(self, criterion: Criterion) -> int:
        """Complex multiplications to score every candidate against one block."""
        C, rows, P = self.bd.shape
        per_candidate = rows * (P + 1)            # residual filter and squared norm
        if Criterion(criterion) is not Criterion.EUCLIDEAN:
            per_candidate += rows * P + substitution_mults(P) + P
        return C * per_candidate

    def decode(self, y_d, h_hat, noise_var: float, criterion: Criterion):
        """Minimizing candidate per block; ties go to the lexicographically smallest."""
        y_d = np.atleast_2d(np.asarray(y_d, dtype=complex))
        h_hat = np.broadcast_to(np.asarray(h_hat, dtype=complex), (y_d.shape[0], self.bd.shape[-1]))
        # bound the (blocks x candidates) working set to ~2**20 entries
        step = max(1, (1 << 20) // self.indices.shape[0])
        best = np.empty(y_d.shape[0], dtype=np.int64)
        value = np.empty(y_d.shape[0])
        for lo in range(0, y_d.shape[0], step):
            metric = self.metrics(y_d[lo:lo + step], h_hat[lo:lo + step], noise_var, criterion)
            best[lo:lo + step] = np.argmin(metric, axis=-1)
            value[lo:lo + step] = metric[np.arange(metric.shape[0]), best[lo:lo + step]]
        return self.indices[best], value


def exhaustive_decode(y, training, M: int, P: int, N: int, h_hat, noise_var: float,
                      criterion: Criterion = Criterion.NEAR_ML):
    """Exhaustive search over all data sequences of one block.

    Returns:
        ``(data_indices, breakdown)`` for the best candidate under ``criterion``.
    """
    training = np.asarray(training, dtype=complex)
    T = training.size
    cands = CandidateSet.build(training, M, P, N)
    y = np.asarray(y, dtype=complex)
    metric = cands.metrics(y[T:], h_hat, noise_var, criterion)[0]
    best = int(np.argmin(metric))
    idx, bd = cands.indices[best], cands.bd[best]
    bp = convolution_matrix(training, P)[:T]
    breakdown = evaluate_metrics(bd, bp.conj().T @ bp, y[T:], h_hat, noise_var)
    return idx, breakdown

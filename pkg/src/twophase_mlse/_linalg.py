"""Tiny batched Hermitian helpers for P x P systems (P is 1..4 in practice)."""

from __future__ import annotations

import numpy as np


def forward_substitute(chol: np.ndarray, r: np.ndarray) -> np.ndarray:
    """Solve ``chol @ w = r`` for lower-triangular ``chol``, broadcasting leading axes."""
    P = chol.shape[-1]
    w = np.empty(np.broadcast_shapes(chol.shape[:-1], r.shape), dtype=complex)
    for k in range(P):
        acc = r[..., k]
        for m in range(k):
            acc = acc - chol[..., k, m] * w[..., m]
        w[..., k] = acc / chol[..., k, k]
    return w


def cholesky(D: np.ndarray, rel_tol: float = 1e-12):
    """Batched lower Cholesky factor that flags instead of raising.

    Returns:
        ``(chol, ok)``; where ``ok`` is False the pivot fell below
        ``rel_tol`` times the largest diagonal entry and ``chol`` holds an
        identity-padded placeholder.
    """
    P = D.shape[-1]
    chol = np.zeros_like(D, dtype=complex)
    diag = np.diagonal(D, axis1=-2, axis2=-1).real
    floor = rel_tol * np.max(np.abs(diag), axis=-1)
    ok = np.ones(D.shape[:-2], dtype=bool)
    for k in range(P):
        pivot = D[..., k, k].real - np.sum(np.abs(chol[..., k, :k]) ** 2, axis=-1)
        ok &= pivot > floor
        lkk = np.sqrt(np.where(ok, pivot, 1.0))
        chol[..., k, k] = lkk
        for i in range(k + 1, P):
            acc = D[..., i, k] - np.sum(chol[..., i, :k] * chol[..., k, :k].conj(), axis=-1)
            chol[..., i, k] = acc / lkk
    return chol, ok


def toeplitz_hermitian(first_row: np.ndarray) -> np.ndarray:
    """Hermitian Toeplitz matrices with ``D[u, v] = first_row[v - u]`` for ``v >= u``."""
    P = first_row.shape[-1]
    lag = np.arange(P)[None, :] - np.arange(P)[:, None]
    entries = first_row[..., np.abs(lag)]
    return np.where(lag >= 0, entries, entries.conj())


def cholesky_mults(P: int) -> int:
    """Complex multiplications (divisions included) in :func:`cholesky` for one matrix."""
    return sum(k + (P - 1 - k) * (k + 1) for k in range(P))


def substitution_mults(P: int) -> int:
    return P * (P + 1) // 2

"""
Backward Viterbi pass scoring branches with the near-ML criterion.

Every branch ``i -> j`` leaving step ``tau`` joins the forward survivor into
``i`` with the backward survivor out of ``j``. For that joined path::

    Sigma = phi_tau(i) + |c|^2 + varphi_{tau+1}(j) - lambda
    lambda = r^H D^{-1} r

where ``r = B_D^H e`` is assembled from the forward ``eta``, the branch term
and the backward ``zeta``, and ``D = B_D^H B_D + B_P^H B_P`` is the Hermitian
Toeplitz autocorrelation of the whole sequence, assembled from the training
autocorrelation, forward ``rho``, the branch term and backward ``sigma``.
``Sigma`` therefore equals the near-ML metric of the joined path exactly.

Phase-1 recursions are in :mod:`twophase_mlse.trellis`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._linalg import (cholesky, cholesky_mults, forward_substitute, substitution_mults,
                      toeplitz_hermitian)
from .trellis import (DecodeResult, ForwardTables, Trellis, _batch_inputs, _maybe_squeeze,
                      _residuals, forward_pass)


@dataclass
class BackwardTables:
    varphi: np.ndarray       # (B, n_steps + 1, S) suffix Euclidean metric of the backward survivor
    survivor: np.ndarray     # (B, n_steps, S) branch symbol chosen out of each state
    zeta: np.ndarray         # (B, n_steps + 1, S, P)
    sigma_acc: np.ndarray    # (B, n_steps + 1, S, P)
    sigma_best: np.ndarray   # (B, n_steps, S) winning Sigma per state
    lambda_fallbacks: np.ndarray  # (B,)
    mults: np.ndarray        # (B,)


def lambda_correction(ac: np.ndarray, r: np.ndarray):
    """``r^H D^{-1} r`` with ``D`` the Hermitian Toeplitz matrix of first row ``ac``.

    Args:
        ac: Autocorrelation lags ``0 .. P-1`` with arbitrary leading axes.
        r: Matched-filter vector, same shape as ``ac``.

    Returns:
        ``(lam, ok)``; ``lam`` is 0 wherever ``D`` failed the positive-definite check.
    """
    chol, ok = cholesky(toeplitz_hermitian(ac))
    w = forward_substitute(chol, r)
    lam = np.sum(np.abs(w) ** 2, axis=-1)
    return np.where(ok, lam, 0.0), ok


def _backward_branch_mults(P: int) -> int:
    # filter + |c|^2, branch terms of r and psi, Cholesky, substitution, squared norm
    return (P + 1) + 2 * P + cholesky_mults(P) + substitution_mults(P) + P


def backward_pass(trellis: Trellis, y, h_hat, fwd: ForwardTables, allowed=None,
                  use_correction: bool = True) -> BackwardTables:
    """Backward recursion from the terminal flush state to step 0.

    Args:
        trellis: Block layout.
        y: Received samples ``(B, L)``.
        h_hat: Taps, same forms as :func:`~twophase_mlse.trellis.forward_pass`.
        fwd: Tables from the forward pass on the same inputs.
        allowed: Optional branch mask, e.g. a single-path mask.
        use_correction: With False every ``lambda`` is 0 and the pass reduces
            to a Euclidean forward-backward search.
    """
    y, h, allowed, _ = _batch_inputs(trellis, y, h_hat, allowed)
    B, S, P, n, T = y.shape[0], trellis.n_states, trellis.P, trellis.n_steps, trellis.T
    varphi = np.full((B, n + 1, S), np.inf)
    varphi[:, n, trellis.terminal_state] = 0.0
    zeta = np.zeros((B, n + 1, S, P), dtype=complex)
    sigma_acc = np.zeros((B, n + 1, S, P), dtype=complex)
    survivor = np.zeros((B, n, S), dtype=np.int64)
    sigma_best = np.full((B, n, S), np.inf)
    fallbacks = np.zeros(B, dtype=np.int64)
    mults = np.zeros(B, dtype=np.int64)
    rows = np.arange(B)[:, None]
    states = np.arange(S)[None, :]
    succ = trellis.succ
    per_branch = _backward_branch_mults(P)

    for tau in range(n - 1, -1, -1):
        s = tau + 1
        U = trellis.branch_out[tau]                       # (S, Q, P) out of state i at tau
        c = _residuals(U, y[:, T + s - 1], h[:, tau])     # (B, S, Q)
        ok = (allowed[:, tau][:, None, :]
              & np.isfinite(fwd.phi[:, tau])[:, :, None]
              & np.isfinite(varphi[:, s][:, succ]))
        total = varphi[:, s][:, succ] + np.abs(c) ** 2 + fwd.phi[:, tau][:, :, None]
        if use_correction:
            r = fwd.eta[:, tau][:, :, None, :] + U.conj() * c[..., None] + zeta[:, s][:, succ]
            psi = (fwd.rho[:, tau][:, :, None, :] + U[..., :1].conj() * U
                   + sigma_acc[:, s][:, succ])
            lam, pd = lambda_correction(trellis.train_ac + psi, r)
            fallbacks += (ok & ~pd).sum(axis=(1, 2))
            total = total - np.where(ok, lam, 0.0)
        total = np.where(ok, total, np.inf)

        a = np.argmin(total, axis=-1)                     # smallest successor wins ties
        survivor[:, tau] = a
        sigma_best[:, tau] = np.take_along_axis(total, a[..., None], -1)[..., 0]
        j = succ[states, a]
        u = U[states, a]                                  # (B, S, P)
        c_win = np.take_along_axis(c, a[..., None], -1)   # (B, S, 1)
        reach = np.isfinite(sigma_best[:, tau])
        varphi[:, tau] = np.where(reach, varphi[:, s][rows, j] + np.abs(c_win[..., 0]) ** 2, np.inf)
        zeta[:, tau] = zeta[:, s][rows, j] + u.conj() * c_win
        sigma_acc[:, tau] = sigma_acc[:, s][rows, j] + u[..., :1].conj() * u
        mults += ok.sum(axis=(1, 2)) * (per_branch if use_correction else P + 1)
        mults += reach.sum(axis=1) * 2 * P

    return BackwardTables(varphi=varphi, survivor=survivor, zeta=zeta, sigma_acc=sigma_acc,
                          sigma_best=sigma_best, lambda_fallbacks=fallbacks, mults=mults)


def traceback_backward(trellis: Trellis, survivor: np.ndarray) -> np.ndarray:
    """Follow backward-pass choices from the initial training state."""
    B = survivor.shape[0]
    rows = np.arange(B)
    state = np.full(B, trellis.initial_state, dtype=np.int64)
    out = np.zeros((B, trellis.n_data), dtype=np.int64)
    for tau in range(trellis.n_steps):
        a = survivor[rows, tau, state]
        if tau < trellis.n_data:
            out[:, tau] = a
        state = trellis.succ[state, a]
    return out


@dataclass
class TwoPhaseResult(DecodeResult):
    forward_metric: np.ndarray = None
    forward: ForwardTables = None
    backward: BackwardTables = None


def two_phase_decode(trellis: Trellis, y, h_hat, allowed=None,
                     use_correction: bool = True) -> TwoPhaseResult:
    """Forward Euclidean VA followed by the near-ML backward VA.

    Returns:
        Decoded data indices plus diagnostics: ``metric`` is the winning
        backward ``Sigma`` at the initial state, ``forward_metric`` the best
        forward Euclidean metric, and the λ fallback and multiplication
        counters of both phases. The raw tables ride along for inspection.
    """
    single = np.asarray(y).ndim == 1
    y2 = np.atleast_2d(np.asarray(y, dtype=complex))
    h = np.asarray(h_hat, dtype=complex)
    if single and h.ndim == 2 and h.shape[0] == trellis.n_steps:
        h = h[None]
    fwd = forward_pass(trellis, y2, h, allowed)
    bwd = backward_pass(trellis, y2, h, fwd, allowed, use_correction)
    data = traceback_backward(trellis, bwd.survivor)
    result = TwoPhaseResult(
        data=data,
        metric=bwd.sigma_best[:, 0, trellis.initial_state],
        mults=fwd.mults + bwd.mults,
        lambda_fallbacks=bwd.lambda_fallbacks,
        forward_metric=fwd.best_metric,
        forward=fwd,
        backward=bwd,
    )
    if single:
        squeezed = _maybe_squeeze(result, True)
        return TwoPhaseResult(data=squeezed.data, metric=squeezed.metric, mults=squeezed.mults,
                              lambda_fallbacks=squeezed.lambda_fallbacks,
                              forward_metric=fwd.best_metric[0], forward=fwd, backward=bwd)
    return result

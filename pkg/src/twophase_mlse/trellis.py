"""
Trellis bookkeeping, the forward Viterbi pass and the conventional decoders.

State layout: at step ``t`` (``0 <= t <= L - T``) a state holds the ``P - 1``
most recent symbols ``b_{t+T}, b_{t+T-1}, ..., b_{t+T-P+2}`` as base-``2**M``
digits, newest in the least significant digit. Step ``t`` consumes received
sample ``y_{t+T}`` (1-based). Positions past ``N`` are flush zeros; their
digit slot is pinned to 0 and the branch symbol is forced to zero, so the
terminal step has a single reachable state (index 0).

All routines take a leading batch axis of independent blocks; 1-D inputs
are treated as a batch of one.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .signal import psk_constellation, symbol_indices


@dataclass(frozen=True)
class Trellis:
    """Geometry of the decoding trellis for one block layout.

    Args:
        M: Bits per PSK symbol.
        P: Channel taps (memory ``P - 1``).
        N: Block length including training.
        training: The ``T`` known leading symbols, points of the ``2**M``-PSK grid.
    """

    M: int
    P: int
    N: int
    training: np.ndarray
    points: np.ndarray = field(init=False, repr=False)
    pred: np.ndarray = field(init=False, repr=False)
    in_sym: np.ndarray = field(init=False, repr=False)
    succ: np.ndarray = field(init=False, repr=False)
    branch_out: np.ndarray = field(init=False, repr=False)
    branch_in: np.ndarray = field(init=False, repr=False)
    allowed: np.ndarray = field(init=False, repr=False)
    train_ac: np.ndarray = field(init=False, repr=False)
    initial_state: int = field(init=False)

    def __post_init__(self):
        training = np.asarray(self.training, dtype=complex).ravel()
        object.__setattr__(self, "training", training)
        M, P, N, T = self.M, self.P, self.N, training.size
        if M < 1 or P < 1:
            raise ValueError(f"need M >= 1 and P >= 1, got M={M}, P={P}")
        if not P <= T < N:
            raise ValueError(f"need P <= T < N, got P={P}, T={T}, N={N}")
        q, S, n = self.Q, self.n_states, self.n_steps
        points = psk_constellation(M)
        train_idx = symbol_indices(training, M)

        states = np.arange(S)
        if P == 1:
            pred = np.zeros((1, q), dtype=np.int64)
            in_sym = np.arange(q)[None, :]
        else:
            pred = states[:, None] // q + np.arange(q)[None, :] * q ** (P - 2)
            in_sym = np.broadcast_to(states[:, None] % q, (S, q)).copy()
        succ = (states[:, None] * q + np.arange(q)[None, :]) % S

        # digits[j, k] = index of the symbol k steps older than the newest one held in state j
        digits = (states[:, None] // q ** np.arange(max(P - 1, 0))[None, :]) % q
        branch_out = np.zeros((n, S, q, P), dtype=complex)
        allowed = np.zeros((n, q), dtype=bool)
        for t in range(1, n + 1):
            newest = t + T  # position of b_{t+T}
            if newest <= N:
                branch_out[t - 1, :, :, 0] = points[None, :]
                allowed[t - 1] = True
            else:
                allowed[t - 1, 0] = True
            for ell in range(1, P):
                if newest - ell <= N:
                    branch_out[t - 1, :, :, ell] = points[digits[:, ell - 1]][:, None]
        branch_in = branch_out[:, pred, in_sym, :]

        initial_state = int(sum(train_idx[T - 1 - k] * q**k for k in range(P - 1)))
        padded = np.concatenate([np.zeros(P - 1, dtype=complex), training])
        train_ac = np.array([np.sum(training.conj() * padded[P - 1 - ell:P - 1 - ell + T])
                             for ell in range(P)])

        for name, value in dict(points=points, pred=pred, in_sym=in_sym, succ=succ,
                                branch_out=branch_out, branch_in=branch_in, allowed=allowed,
                                train_ac=train_ac, initial_state=initial_state).items():
            object.__setattr__(self, name, value)

    @property
    def T(self) -> int:
        return self.training.size

    @property
    def L(self) -> int:
        return self.N + self.P - 1

    @property
    def Q(self) -> int:
        return 2**self.M

    @property
    def n_states(self) -> int:
        return self.Q ** (self.P - 1)

    @property
    def n_steps(self) -> int:
        return self.L - self.T

    @property
    def n_data(self) -> int:
        return self.N - self.T

    terminal_state = 0

    def path_mask(self, data_indices) -> np.ndarray:
        """Branch mask ``(B, n_steps, Q)`` admitting only the given data sequences.

        Running a decoder under this mask confines the trellis to a single path.
        """
        data_indices = np.atleast_2d(np.asarray(data_indices, dtype=np.int64))
        if data_indices.shape[-1] != self.n_data:
            raise ValueError(f"expected {self.n_data} data symbols, got {data_indices.shape[-1]}")
        mask = np.zeros((data_indices.shape[0], self.n_steps, self.Q), dtype=bool)
        rows = np.arange(data_indices.shape[0])[:, None]
        mask[rows, np.arange(self.n_data)[None, :], data_indices] = True
        mask[:, self.n_data:, 0] = True
        return mask


def _batch_inputs(trellis: Trellis, y, h_hat, allowed):
    y = np.asarray(y, dtype=complex)
    single = y.ndim == 1
    y = np.atleast_2d(y)
    B = y.shape[0]
    if y.shape[1] != trellis.L:
        raise ValueError(f"expected {trellis.L} received samples, got {y.shape[1]}")
    h = np.asarray(h_hat, dtype=complex)
    if h.ndim == 1:
        h = np.broadcast_to(h, (B, trellis.n_steps, trellis.P))
    elif h.ndim == 2:
        h = np.broadcast_to(h[:, None, :], (B, trellis.n_steps, trellis.P))
    elif h.shape[1:] != (trellis.n_steps, trellis.P):
        raise ValueError(f"time-varying taps must have shape (B, {trellis.n_steps}, {trellis.P})")
    if h.shape[-1] != trellis.P:
        raise ValueError(f"expected {trellis.P} taps, got {h.shape[-1]}")
    if allowed is None:
        allowed = trellis.allowed
    allowed = np.broadcast_to(allowed & trellis.allowed, (B, trellis.n_steps, trellis.Q))
    return y, h, allowed, single


@dataclass
class ForwardTables:
    """Phase-1 tables, each with a leading batch axis.

    ``eta[:, t, i, l]`` accumulates ``conj(b_{s+T-l}) c_s`` and ``rho[:, t, i, l]``
    accumulates ``conj(b_{s+T}) b_{s+T-l}`` over steps ``s <= t`` of the survivor
    ending in state ``i``; both keep lag ``l = 0`` as well.
    """

    phi: np.ndarray        # (B, n_steps + 1, S)
    survivor: np.ndarray   # (B, n_steps, S) incoming-branch slot m of the winning predecessor
    eta: np.ndarray        # (B, n_steps + 1, S, P)
    rho: np.ndarray        # (B, n_steps + 1, S, P)
    mults: np.ndarray      # (B,)
    branches: np.ndarray   # (B,) valid branch evaluations

    @property
    def best_metric(self) -> np.ndarray:
        return self.phi[:, -1, Trellis.terminal_state]


def _residuals(branches: np.ndarray, y_t: np.ndarray, h_t: np.ndarray) -> np.ndarray:
    """``c = y - u . h`` for every branch: (B,) and (B, P) against (S, Q, P) -> (B, S, Q)."""
    return y_t[:, None, None] - np.einsum("sqp,bp->bsq", branches, h_t)


def _add_compare_select(trellis: Trellis, t: int, phi_prev, c, allowed_t):
    """One forward ACS step; returns (phi, slot, valid-branch mask)."""
    cand = phi_prev[:, trellis.pred] + np.abs(c) ** 2
    ok = allowed_t[:, trellis.in_sym] & np.isfinite(cand)
    cand = np.where(ok, cand, np.inf)
    slot = np.argmin(cand, axis=-1)
    return np.take_along_axis(cand, slot[..., None], -1)[..., 0], slot, ok


def forward_pass(trellis: Trellis, y, h_hat, allowed=None) -> ForwardTables:
    """Euclidean Viterbi recursion with the auxiliary eta/rho accumulators.

    Args:
        trellis: Block layout.
        y: Received samples, ``(L,)`` or ``(B, L)``.
        h_hat: Taps ``(P,)``, per-block ``(B, P)`` or time-varying ``(B, L - T, P)``.
        allowed: Optional extra branch mask ``(B, L - T, Q)``; see :meth:`Trellis.path_mask`.
    """
    y, h, allowed, _ = _batch_inputs(trellis, y, h_hat, allowed)
    B, S, P, n, T = y.shape[0], trellis.n_states, trellis.P, trellis.n_steps, trellis.T
    phi = np.full((B, n + 1, S), np.inf)
    phi[:, 0, trellis.initial_state] = 0.0
    survivor = np.zeros((B, n, S), dtype=np.int64)
    eta = np.zeros((B, n + 1, S, P), dtype=complex)
    rho = np.zeros((B, n + 1, S, P), dtype=complex)
    mults = np.zeros(B, dtype=np.int64)
    branches = np.zeros(B, dtype=np.int64)
    rows = np.arange(B)[:, None]
    states = np.arange(S)[None, :]

    for t in range(1, n + 1):
        c = _residuals(trellis.branch_in[t - 1], y[:, T + t - 1], h[:, t - 1])
        phi[:, t], slot, ok = _add_compare_select(trellis, t, phi[:, t - 1], c, allowed[:, t - 1])
        survivor[:, t - 1] = slot
        j = trellis.pred[states, slot]
        u = trellis.branch_in[t - 1][states, slot]            # (B, S, P)
        c_win = np.take_along_axis(c, slot[..., None], -1)     # (B, S, 1)
        eta[:, t] = eta[:, t - 1][rows, j] + u.conj() * c_win
        rho[:, t] = rho[:, t - 1][rows, j] + u[..., :1].conj() * u
        # P-tap filter and |c|^2 per branch; eta and rho updates per surviving state
        n_ok = ok.sum(axis=(1, 2))
        branches += n_ok
        mults += n_ok * (P + 1) + np.isfinite(phi[:, t]).sum(axis=1) * 2 * P
    return ForwardTables(phi=phi, survivor=survivor, eta=eta, rho=rho, mults=mults,
                         branches=branches)


def traceback_forward(trellis: Trellis, survivor: np.ndarray) -> np.ndarray:
    """Data-symbol indices ``(B, N - T)`` along forward survivors from the terminal state."""
    B = survivor.shape[0]
    rows = np.arange(B)
    state = np.full(B, trellis.terminal_state, dtype=np.int64)
    out = np.zeros((B, trellis.n_data), dtype=np.int64)
    for t in range(trellis.n_steps, 0, -1):
        slot = survivor[rows, t - 1, state]
        if t <= trellis.n_data:
            out[:, t - 1] = trellis.in_sym[state, slot]
        state = trellis.pred[state, slot]
    return out


@dataclass
class DecodeResult:
    data: np.ndarray            # (B, N - T) symbol indices, or (N - T,) for a single block
    metric: np.ndarray
    mults: np.ndarray
    lambda_fallbacks: np.ndarray


def _maybe_squeeze(result: DecodeResult, single: bool) -> DecodeResult:
    if not single:
        return result
    return DecodeResult(data=result.data[0], metric=result.metric[0], mults=result.mults[0],
                        lambda_fallbacks=result.lambda_fallbacks[0])


def conventional_mlse(trellis: Trellis, y, h_hat) -> DecodeResult:
    """Euclidean-distance MLSE treating ``h_hat`` as the true channel."""
    single = np.asarray(y).ndim == 1
    fwd = forward_pass(trellis, y, h_hat)
    data = traceback_forward(trellis, fwd.survivor)
    result = DecodeResult(data=data, metric=fwd.best_metric,
                          mults=fwd.branches * (trellis.P + 1),
                          lambda_fallbacks=np.zeros_like(fwd.mults))
    return _maybe_squeeze(result, single)


def lms_mlse(trellis: Trellis, y, h_init, mu: float) -> DecodeResult:
    """Conventional MLSE with decision-directed LMS tap tracking.

    After every trellis step the taps are nudged with the zero-delay tentative
    decision of the currently best state, and the next step's branch metrics
    use the updated taps.
    """
    y, h, allowed, single = _batch_inputs(trellis, y, h_init, None)
    B, S, P, n, T = y.shape[0], trellis.n_states, trellis.P, trellis.n_steps, trellis.T
    h_cur = np.array(h[:, 0], dtype=complex)
    phi = np.full((B, S), np.inf)
    phi[:, trellis.initial_state] = 0.0
    survivor = np.zeros((B, n, S), dtype=np.int64)
    rows = np.arange(B)
    mults = np.zeros(B, dtype=np.int64)
    for t in range(1, n + 1):
        y_t = y[:, T + t - 1]
        c = _residuals(trellis.branch_in[t - 1], y_t, h_cur)
        phi, slot, ok = _add_compare_select(trellis, t, phi, c, allowed[:, t - 1])
        survivor[:, t - 1] = slot
        best = np.argmin(phi, axis=-1)
        u = trellis.branch_in[t - 1][best, slot[rows, best]]   # (B, P)
        err = y_t - np.sum(u * h_cur, axis=-1)
        h_cur = h_cur + mu * u.conj() * err[:, None]
        mults += ok.sum(axis=(1, 2)) * (P + 1) + 2 * P
    data = traceback_forward(trellis, survivor)
    result = DecodeResult(data=data, metric=phi[:, trellis.terminal_state], mults=mults,
                          lambda_fallbacks=np.zeros(B, dtype=np.int64))
    return _maybe_squeeze(result, single)

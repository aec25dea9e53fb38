"""
PSK blocks, convolution matrices and the noisy ISI reception model.

A block carries ``N`` unit-modulus symbols, the first ``T`` of which are a
known training prefix. Passing it through a ``P``-tap channel yields
``L = N + P - 1`` received samples::

    y = B h + n,    B = [B_P; B_D]

where ``B_P`` (``T x P``) holds the rows seen by the training samples and
``B_D`` (``(L - T) x P``) the rows of the data and flush samples.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

UNIT_MODULUS_TOL = 1e-12


def psk_constellation(M: int) -> np.ndarray:
    """Return the ``2**M`` PSK points ``exp(2j*pi*k/2**M)`` in natural index order."""
    if M < 1:
        raise ValueError(f"bits per symbol must be >= 1, got {M}")
    q = 2**M
    points = np.exp(2j * np.pi * np.arange(q) / q)
    # exact values for the axis points so BPSK stays real
    points.real[np.abs(points.real) < 1e-15] = 0.0
    points.imag[np.abs(points.imag) < 1e-15] = 0.0
    return points


def bits_to_indices(bits, M: int) -> np.ndarray:
    """Group bits MSB-first into symbol indices."""
    bits = np.asarray(bits, dtype=np.int64).ravel()
    if M < 1:
        raise ValueError(f"bits per symbol must be >= 1, got {M}")
    if bits.size % M:
        raise ValueError(f"bit count {bits.size} is not a multiple of M={M}")
    if np.any((bits != 0) & (bits != 1)):
        raise ValueError("bits must be 0 or 1")
    weights = 1 << np.arange(M - 1, -1, -1)
    return bits.reshape(-1, M) @ weights


def indices_to_bits(indices, M: int) -> np.ndarray:
    """Inverse of :func:`bits_to_indices`; works on arrays of any shape (bits on a new last axis)."""
    indices = np.asarray(indices, dtype=np.int64)
    shifts = np.arange(M - 1, -1, -1)
    return (indices[..., None] >> shifts) & 1


def psk_modulate(bits, M: int) -> np.ndarray:
    """Map a bit sequence to unit-modulus PSK symbols.

    Args:
        bits: Sequence of 0/1 values, length a multiple of ``M``.
        M: Bits per symbol.

    Returns:
        Complex array of ``len(bits) // M`` symbols. For ``M=1`` bit 0 maps
        to +1 and bit 1 to -1.
    """
    return psk_constellation(M)[bits_to_indices(bits, M)]


def symbol_indices(symbols, M: int) -> np.ndarray:
    """Recover constellation indices of symbols that lie on the ``2**M``-PSK grid."""
    symbols = np.asarray(symbols, dtype=complex)
    points = psk_constellation(M)
    dist = np.abs(symbols[..., None] - points)
    idx = np.argmin(dist, axis=-1)
    if symbols.size and np.max(np.min(dist, axis=-1)) > 1e-9:
        raise ValueError(f"symbols are not points of the {2**M}-PSK constellation")
    return idx


def ebn0_to_noise_var(ebn0_db: float) -> float:
    """Noise variance for a unit-power channel: ``10**(-ebn0_db/10)``."""
    ebn0_db = float(ebn0_db)
    if not np.isfinite(ebn0_db):
        raise ValueError(f"Eb/N0 must be finite, got {ebn0_db}")
    return 10.0 ** (-ebn0_db / 10.0)


@dataclass(frozen=True)
class TransmitBlock:
    """Training prefix plus data payload for a ``P``-tap channel."""

    training: np.ndarray
    data: np.ndarray
    P: int
    symbols: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        training = np.asarray(self.training, dtype=complex).ravel()
        data = np.asarray(self.data, dtype=complex).ravel()
        if self.P < 1:
            raise ValueError(f"P must be >= 1, got {self.P}")
        if training.size < self.P:
            raise ValueError(f"training length T={training.size} must be >= P={self.P}")
        symbols = np.concatenate([training, data])
        if np.any(np.abs(np.abs(symbols) ** 2 - 1.0) > UNIT_MODULUS_TOL):
            raise ValueError("all symbols must have unit modulus")
        object.__setattr__(self, "training", training)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "symbols", symbols)

    @property
    def N(self) -> int:
        return self.symbols.size

    @property
    def T(self) -> int:
        return self.training.size

    @property
    def L(self) -> int:
        return self.N + self.P - 1


@dataclass(frozen=True)
class ConvolutionMatrices:
    bp: np.ndarray
    bd: np.ndarray

    @property
    def full(self) -> np.ndarray:
        return np.vstack([self.bp, self.bd])

    @property
    def bp_gram(self) -> np.ndarray:
        return self.bp.conj().T @ self.bp


def convolution_matrix(symbols, P: int) -> np.ndarray:
    """``(N + P - 1) x P`` matrix whose row ``t`` is ``[b_t, b_{t-1}, ..., b_{t-P+1}]``."""
    symbols = np.asarray(symbols, dtype=complex).ravel()
    n = symbols.size
    out = np.zeros((n + P - 1, P), dtype=complex)
    for k in range(P):
        out[k:k + n, k] = symbols
    return out


def build_matrices(block: TransmitBlock) -> ConvolutionMatrices:
    full = convolution_matrix(block.symbols, block.P)
    return ConvolutionMatrices(bp=full[:block.T], bd=full[block.T:])


def complex_normal(rng: np.random.Generator, size, var: float = 1.0) -> np.ndarray:
    """Circularly-symmetric complex Gaussian draws with ``E|z|^2 = var``."""
    scale = np.sqrt(var / 2.0)
    return scale * (rng.standard_normal(size) + 1j * rng.standard_normal(size))


def transmit(block: TransmitBlock, h, noise_var: float, rng: np.random.Generator) -> np.ndarray:
    """Return ``B h + n`` for one block (``L`` complex samples)."""
    h = np.asarray(h, dtype=complex).ravel()
    if h.size != block.P:
        raise ValueError(f"expected {block.P} channel taps, got {h.size}")
    if noise_var < 0:
        raise ValueError(f"noise variance must be >= 0, got {noise_var}")
    clean = np.convolve(block.symbols, h)
    if noise_var == 0:
        return clean
    return clean + complex_normal(rng, clean.size, noise_var)

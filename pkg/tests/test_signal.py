import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twophase_mlse.signal import (TransmitBlock, bits_to_indices, build_matrices,
                                  convolution_matrix, ebn0_to_noise_var, indices_to_bits,
                                  psk_constellation, psk_modulate, symbol_indices, transmit)

FIG1_TRAINING = [-1, -1, -1, 1, -1]


def test_bpsk_sign_convention():
    npt.assert_array_equal(psk_modulate([0, 1], 1), [1, -1])


def test_qpsk_natural_index():
    npt.assert_allclose(psk_modulate([0, 1], 2), [1j], atol=1e-15)


def test_empty_input():
    assert psk_modulate([], 1).size == 0


def test_bits_not_divisible_by_M():
    with pytest.raises(ValueError):
        psk_modulate([0, 1, 1], 2)


@pytest.mark.parametrize("M", [1, 2, 3])
def test_constellation_unit_modulus(M):
    pts = psk_constellation(M)
    assert np.max(np.abs(np.abs(pts) ** 2 - 1)) <= 1e-12
    npt.assert_array_equal(symbol_indices(pts, M), np.arange(2**M))


@given(st.lists(st.integers(0, 1), max_size=30).filter(lambda b: len(b) % 3 == 0))
def test_bits_round_trip(bits):
    idx = bits_to_indices(bits, 3)
    npt.assert_array_equal(indices_to_bits(idx, 3).reshape(-1), bits)


def test_bd_rows_small_example():
    b = psk_constellation(2)[[0, 1, 2, 3]]
    mats = build_matrices(TransmitBlock(b[:2], b[2:], P=2))
    npt.assert_array_equal(mats.bd, [[b[2], b[1]], [b[3], b[2]], [0, b[3]]])


def test_bp_rows_fig1_training():
    mats = build_matrices(TransmitBlock(FIG1_TRAINING, [1] * 10, P=2))
    npt.assert_array_equal(mats.bp, [[-1, 0], [-1, -1], [-1, -1], [1, -1], [-1, 1]])


def test_bp_gram_fig1_training():
    bp = np.array([[-1, 0], [-1, -1], [-1, -1], [1, -1], [-1, 1]])
    expected = bp.T @ bp  # direct product
    npt.assert_array_equal(expected, [[5, 0], [0, 4]])
    mats = build_matrices(TransmitBlock(FIG1_TRAINING, [1] * 10, P=2))
    npt.assert_array_equal(mats.bp_gram, expected)


def test_block_requires_T_ge_P():
    with pytest.raises(ValueError):
        TransmitBlock([1], [1, 1], P=2)


def test_block_rejects_non_unit_symbols():
    with pytest.raises(ValueError):
        TransmitBlock([1, 1], [0.5], P=1)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 4), st.integers(1, 3), st.integers(0, 8), st.integers(0, 2**31 - 1))
def test_stacked_matrices_reproduce_convolution(P, M, extra, seed):
    rng = np.random.default_rng(seed)
    pts = psk_constellation(M)
    T = P + extra % 3
    b = pts[rng.integers(0, 2**M, T + extra + 1)]
    block = TransmitBlock(b[:T], b[T:], P)
    h = rng.standard_normal(P) + 1j * rng.standard_normal(P)
    mats = build_matrices(block)
    assert mats.full.shape == (block.L, P)
    assert block.L == block.N + P - 1
    direct = np.convolve(np.concatenate([b, np.zeros(P - 1)]), h)[:block.L]
    npt.assert_allclose(mats.full @ h, direct, atol=1e-12)
    # column k of B_P has k structural zeros, so the Gram diagonal is T, T-1, ...
    npt.assert_allclose(np.diag(mats.bp_gram).real, T - np.arange(P), atol=1e-12)


def test_transmit_noiseless_equals_Bh():
    rng = np.random.default_rng(0)
    block = TransmitBlock([1, -1, 1], [-1, -1, 1, 1], P=3)
    h = np.array([0.3 + 0.1j, -0.5j, 0.2])
    npt.assert_allclose(transmit(block, h, 0.0, rng), build_matrices(block).full @ h, atol=1e-14)


def test_transmit_identity_channel():
    rng = np.random.default_rng(0)
    block = TransmitBlock([1, -1, 1], [-1, 1], P=3)
    y = transmit(block, [1, 0, 0], 0.0, rng)
    npt.assert_array_equal(y, np.concatenate([block.symbols, np.zeros(2)]))


def test_transmit_wrong_tap_count():
    block = TransmitBlock([1, -1], [1], P=2)
    with pytest.raises(ValueError):
        transmit(block, [1, 0, 0], 0.1, np.random.default_rng(0))


def test_transmit_noise_variance():
    rng = np.random.default_rng(123)
    block = TransmitBlock([1, -1], [1, 1], P=2)
    h = np.array([0.7, 0.2j])
    clean = build_matrices(block).full @ h
    draws = np.array([transmit(block, h, 0.25, rng) - clean for _ in range(25_000)]).ravel()
    assert draws.size >= 1e5
    assert abs(np.mean(np.abs(draws) ** 2) / 0.25 - 1) < 0.02
    # variance split evenly between real and imaginary parts
    assert abs(np.var(draws.real) / 0.125 - 1) < 0.02
    assert abs(np.var(draws.imag) / 0.125 - 1) < 0.02


@pytest.mark.parametrize("db, var", [(0, 1.0), (10, 0.1), (20, 0.01)])
def test_ebn0_to_noise_var(db, var):
    assert ebn0_to_noise_var(db) == pytest.approx(var, rel=1e-15)


def test_ebn0_rejects_nonfinite():
    with pytest.raises(ValueError):
        ebn0_to_noise_var(float("inf"))


def test_convolution_matrix_shape():
    assert convolution_matrix([1, 1, 1], 2).shape == (4, 2)

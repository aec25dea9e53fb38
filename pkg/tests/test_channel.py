import numpy as np
import numpy.testing as npt
import pytest

from twophase_mlse.channel import (GaussMarkovParams, draw_block_taps, evolve_gauss_markov,
                                   gauss_markov_trajectory, time_varying_convolve,
                                   transmit_time_varying)
from twophase_mlse.signal import TransmitBlock, transmit


def _many_taps(P, n, seed=0):
    rng = np.random.default_rng(seed)
    return np.array([draw_block_taps(P, rng) for _ in range(n)])


def test_block_taps_variance_P2():
    h = _many_taps(2, 100_000)
    npt.assert_allclose(np.mean(np.abs(h) ** 2, axis=0), 0.5, rtol=0.02)


def test_block_taps_total_power_P1():
    h = _many_taps(1, 100_000, seed=1)
    assert np.mean(np.sum(np.abs(h) ** 2, axis=1)) == pytest.approx(1.0, rel=0.02)


def test_block_taps_uncorrelated():
    h = _many_taps(2, 100_000, seed=2)
    assert abs(np.mean(h[:, 0] * h[:, 1].conj())) < 0.02


def test_gauss_markov_params_validation():
    with pytest.raises(ValueError):
        GaussMarkovParams(alpha=1.5, P=2)


def test_evolve_alpha_one_is_identity():
    prev = np.array([0.3 - 0.2j, 1.1j])
    out = evolve_gauss_markov(prev, GaussMarkovParams(1.0, 2), np.random.default_rng(0))
    npt.assert_array_equal(out, prev)


def test_evolve_alpha_zero_is_fresh_draw():
    rng = np.random.default_rng(3)
    params = GaussMarkovParams(0.0, 2)
    prev = np.array([5.0, -5.0j])
    out = np.array([evolve_gauss_markov(prev, params, rng) for _ in range(100_000)])
    npt.assert_allclose(np.mean(np.abs(out) ** 2, axis=0), 0.5, rtol=0.02)
    assert np.all(np.abs(np.mean(out, axis=0)) < 0.01)


@pytest.mark.parametrize("alpha", [0.0, 0.5, 0.999])
def test_stationary_marginal(alpha):
    rng = np.random.default_rng(4)
    params = GaussMarkovParams(alpha, 2)
    traj = np.stack([gauss_markov_trajectory(params, 8, rng) for _ in range(100_000 // 8)])
    # every time index keeps covariance I/P
    power = np.mean(np.abs(traj) ** 2, axis=0)
    npt.assert_allclose(np.mean(power, axis=1), 0.5, rtol=0.02)
    assert abs(np.mean(traj[..., 0] * traj[..., 1].conj())) < 0.02


def test_lag_autocorrelation():
    alpha = 0.999
    rng = np.random.default_rng(5)
    traj = np.stack([gauss_markov_trajectory(GaussMarkovParams(alpha, 1), 101, rng)[:, 0]
                     for _ in range(20_000)])
    for k in (1, 10, 50, 100):
        acf = np.mean(traj[:, k] * traj[:, 0].conj()).real / np.mean(np.abs(traj[:, 0]) ** 2)
        assert acf == pytest.approx(alpha**k, rel=0.05)


def test_trajectory_matches_recursion():
    params = GaussMarkovParams(0.9, 3)
    traj = gauss_markov_trajectory(params, 20, np.random.default_rng(6))
    rng = np.random.default_rng(6)
    h = draw_block_taps(3, rng)
    v = np.sqrt(1 / 6) * (rng.standard_normal((20, 3)) + 1j * rng.standard_normal((20, 3)))
    for t in range(20):
        h = 0.9 * h + np.sqrt(1 - 0.81) * v[t]
        npt.assert_allclose(traj[t], h, atol=1e-12)


def test_constant_trajectory_matches_block_transmit():
    block = TransmitBlock([1, -1, 1], [1, 1, -1, 1], P=2)
    h = np.array([0.4 + 0.3j, -0.6])
    traj = np.tile(h, (block.L, 1))
    rng = np.random.default_rng(0)
    npt.assert_allclose(transmit_time_varying(block, traj, 0.0, rng),
                        transmit(block, h, 0.0, rng), atol=1e-14)


def test_alpha_one_trajectory_is_constant():
    traj = gauss_markov_trajectory(GaussMarkovParams(1.0, 2), 30, np.random.default_rng(1))
    npt.assert_allclose(traj, np.tile(traj[0], (30, 1)), atol=0)


def test_memoryless_time_varying():
    block = TransmitBlock([1, -1], [1, -1, -1], P=1)
    traj = (np.arange(5) + 1j)[:, None]
    y = transmit_time_varying(block, traj, 0.0, np.random.default_rng(0))
    npt.assert_allclose(y, block.symbols * traj[:, 0])


def test_time_varying_shape_mismatch():
    block = TransmitBlock([1, -1], [1], P=2)
    with pytest.raises(ValueError):
        transmit_time_varying(block, np.ones((3, 2)), 0.0, np.random.default_rng(0))


def test_batched_time_varying_convolve():
    rng = np.random.default_rng(2)
    sym = np.sign(rng.standard_normal((4, 6)))
    traj = rng.standard_normal((4, 8, 3)) + 0j
    batch = time_varying_convolve(sym, traj)
    for k in range(4):
        npt.assert_allclose(batch[k], time_varying_convolve(sym[k], traj[k]))

import numpy as np
import pytest

from smartpilot.airlink import (
    asymptotic_sinr,
    capacity,
    dft_pilots,
    estimate_channels,
    estimates_from_noise,
    finite_m_sinr,
    pair_sinr_matrix,
    residual_power,
)
from smartpilot.checks import random_link_config, symbol_level_residual
from smartpilot.errors import DimensionError
from smartpilot.fading import ChannelSet, SystemConfig, complex_normal, draw_channels
from smartpilot.experiment import Scenario, trial_beta

NOISELESS = SystemConfig(pilot_noise_var=0.0, data_noise_var=0.0)


def reference_sinr(h, h_hat, assignments, cfg, target, k):
    """Loop-by-loop evaluation of the MF SINR for the target-cell user on pilot k."""
    cells, _, users, _ = h.shape
    own = [assignments[j][k] for j in range(cells)]
    signal = abs(np.vdot(h[target, target, own[target]], h[target, target, own[target]])) ** 2
    contamination = sum(
        abs(np.vdot(h[target, j, own[j]], h[target, j, own[j]])) ** 2
        for j in range(cells)
        if j != target
    )
    residual = 0.0
    for j in range(cells):
        for u in range(users):
            g = np.vdot(h_hat, h[target, j, u])
            if u == own[j]:
                g -= np.vdot(h[target, j, u], h[target, j, u])
            residual += abs(g) ** 2
    noise = cfg.data_noise_var / cfg.data_power * np.vdot(h_hat, h_hat).real
    return signal / (contamination + residual + noise)


def scalar_channels(values):
    h = np.asarray(values, dtype=complex)[..., None]
    return ChannelSet(g=h, h=h)


def test_pilot_book_orthonormal():
    for users in range(1, 17):
        phi = dft_pilots(users).phi
        np.testing.assert_allclose(phi @ phi.conj().T, np.eye(users), atol=1e-12)


def test_noiseless_single_cell_estimate_is_exact(rng):
    ch = draw_channels(rng.uniform(0.1, 3, (1, 1, 4)), 32, rng)
    ident = np.arange(4)[None, :]
    est = estimate_channels(ch, ident, dft_pilots(4), NOISELESS, rng)
    np.testing.assert_array_equal(est.h_hat[0], ch.h[0, 0])


def test_noiseless_two_cells_sum(rng):
    ch = draw_channels(rng.uniform(0.1, 3, (2, 2, 1)), 16, rng)
    est = estimate_channels(ch, np.zeros((2, 1), int), dft_pilots(1), NOISELESS, rng)
    np.testing.assert_array_equal(est.h_hat[0, 0], ch.h[0, 0, 0] + ch.h[0, 1, 0])


def test_contamination_follows_assignments(rng):
    ch = draw_channels(rng.uniform(0.1, 3, (2, 2, 3)), 8, rng)
    assignments = np.array([[2, 0, 1], [1, 2, 0]])
    est = estimate_channels(ch, assignments, dft_pilots(3), NOISELESS, rng)
    for i in range(2):
        for k in range(3):
            np.testing.assert_allclose(
                est.h_hat[i, k], ch.h[i, 0, assignments[0, k]] + ch.h[i, 1, assignments[1, k]]
            )


def test_estimation_paths_agree_with_shared_noise():
    rng = np.random.default_rng(3)
    for _ in range(100):
        ch, assignments, cfg = random_link_config(rng)
        cells, _, users, antennas = ch.h.shape
        noise = complex_normal(rng, (cells, antennas, users), cfg.pilot_noise_var)
        pilots = dft_pilots(users)
        a = estimate_channels(ch, assignments, pilots, cfg, pilot_noise=noise, method="matrix")
        b = estimate_channels(ch, assignments, pilots, cfg, pilot_noise=noise, method="closed")
        np.testing.assert_allclose(a.h_hat, b.h_hat, rtol=0, atol=1e-10)
        np.testing.assert_allclose(a.noise, b.noise, rtol=0, atol=1e-12)


def test_closed_form_noise_variance(rng):
    cfg = SystemConfig(pilot_power=2.0, pilot_noise_var=0.5)
    ch = draw_channels(np.ones((1, 1, 2)), 50_000, rng)
    for method in ("closed", "matrix"):
        est = estimate_channels(ch, np.array([[0, 1]]), dft_pilots(2), cfg, rng, method=method)
        assert np.mean(np.abs(est.noise) ** 2) == pytest.approx(0.25, rel=0.02)


def test_estimation_dimension_errors(rng):
    ch = draw_channels(np.ones((2, 2, 3)), 4, rng)
    with pytest.raises(DimensionError):
        estimate_channels(ch, np.zeros((2, 2), int), dft_pilots(3), NOISELESS, rng)
    with pytest.raises(DimensionError):
        estimate_channels(ch, np.tile(np.arange(3), (2, 1)), dft_pilots(2), NOISELESS, rng)
    with pytest.raises(DimensionError):
        estimate_channels(
            ch, np.tile(np.arange(3), (2, 1)), dft_pilots(3), NOISELESS, pilot_noise=np.zeros((2, 4, 2))
        )


def test_hand_expanded_single_antenna_example():
    # BS 0 hears its own user with h = 2 and the cell-1 user with h = 1
    ch = scalar_channels([[[2.0], [1.0]], [[0.5], [1.5]]])
    cfg = SystemConfig(data_power=1.0, pilot_noise_var=0.0, data_noise_var=0.0)
    assignments = np.zeros((2, 1), int)
    est = estimate_channels(ch, assignments, dft_pilots(1), cfg, pilot_noise=np.zeros((2, 1, 1)))
    assert est.h_hat[0, 0, 0] == 3.0
    assert residual_power(ch, est, assignments, cfg)[0] == pytest.approx(8.0)
    report = finite_m_sinr(ch, est, assignments, cfg)
    assert report.sinr[0] == pytest.approx(16 / 9)


def test_interference_free_noiseless_is_infinite(rng):
    ch = draw_channels(np.ones((1, 1, 1)), 4, rng)
    est = estimate_channels(ch, np.zeros((1, 1), int), dft_pilots(1), NOISELESS, rng)
    report = finite_m_sinr(ch, est, np.zeros((1, 1), int), NOISELESS)
    assert report.sinr[0] == np.inf
    assert report.has_infinite
    assert report.capacity[0] == np.inf


def test_finite_sinr_matches_loop_reference():
    rng = np.random.default_rng(8)
    for _ in range(40):
        ch, assignments, cfg = random_link_config(rng, max_cells=3, max_users=4)
        est = estimate_channels(ch, assignments, dft_pilots(ch.h.shape[2]), cfg, rng)
        target = int(rng.integers(ch.h.shape[0]))
        report = finite_m_sinr(ch, est, assignments, cfg, target=target)
        for k, user in enumerate(assignments[target]):
            expected = reference_sinr(ch.h, est.h_hat[target, k], assignments, cfg, target, k)
            assert report.sinr[user] == pytest.approx(expected, rel=1e-10)
        assert report.min_user == int(np.argmin(report.sinr))
        np.testing.assert_allclose(report.capacity, np.log2(1 + report.sinr))


def test_pair_matrix_matches_reassigned_estimates():
    rng = np.random.default_rng(9)
    for _ in range(20):
        ch, assignments, cfg = random_link_config(rng, max_cells=3, max_users=4)
        cells, _, users, antennas = ch.h.shape
        noise = complex_normal(rng, (cells, users, antennas), cfg.pilot_noise_var)
        est = estimates_from_noise(ch, assignments, noise)
        scores = pair_sinr_matrix(ch, est, assignments, cfg, target=0)
        candidate = rng.permutation(users)
        moved = assignments.copy()
        moved[0] = candidate
        direct = finite_m_sinr(ch, estimates_from_noise(ch, moved, noise), moved, cfg).sinr
        np.testing.assert_allclose(scores[candidate, np.arange(users)], direct[candidate], rtol=1e-10)


def test_residual_power_matches_symbol_level_simulation():
    rng = np.random.default_rng(21)
    for _ in range(20):
        ch, assignments, cfg = random_link_config(rng)
        cells, _, users, antennas = ch.h.shape
        noise = complex_normal(rng, (cells, users, antennas), cfg.pilot_noise_var)
        est = estimates_from_noise(ch, assignments, noise)
        k = int(rng.integers(users))
        analytic = residual_power(ch, est, assignments, cfg)[k]
        samples = symbol_level_residual(ch.h[0], est.h_hat[0, k], assignments[:, k], 0, cfg, rng, 50_000)
        se = samples.std(ddof=1) / np.sqrt(samples.size)
        assert abs(samples.mean() - analytic) <= 4 * se + 1e-12


def test_asymptotic_example():
    beta = np.zeros((3, 3, 1))
    beta[0, 0, 0], beta[0, 1, 0], beta[0, 2, 0] = 1.0, 0.5, 0.5
    sinr = asymptotic_sinr(beta, np.zeros((3, 1), int))
    assert sinr[0] == pytest.approx(2.0)
    assert 10 * np.log10(sinr[0]) == pytest.approx(3.0103, abs=1e-4)


def test_asymptotic_symmetry_and_homogeneity(rng):
    beta = np.ones((2, 2, 1))
    assert asymptotic_sinr(beta, np.zeros((2, 1), int))[0] == 1.0
    beta = rng.uniform(0.01, 100, (7, 7, 8))
    assignments = np.array([rng.permutation(8) for _ in range(7)])
    np.testing.assert_allclose(
        asymptotic_sinr(3.7 * beta, assignments, 2), asymptotic_sinr(beta, assignments, 2), rtol=1e-13
    )


def test_asymptotic_single_cell_is_infinite():
    assert np.isinf(asymptotic_sinr(np.ones((1, 1, 2)), np.array([[1, 0]]))).all()


def test_asymptotic_indexing_per_user():
    beta = np.ones((2, 2, 2))
    beta[0, 0] = [4.0, 1.0]
    beta[0, 1] = [1.0, 2.0]
    # cell 0: pilot 0 -> user 1, pilot 1 -> user 0; cell 1 identity
    sinr = asymptotic_sinr(beta, np.array([[1, 0], [0, 1]]))
    np.testing.assert_allclose(sinr, [16 / 4, 1 / 1])


def test_finite_m_approaches_asymptotic_limit():
    scenario = Scenario(trials=1)
    beta = trial_beta(scenario, 0)
    cfg = scenario.cfg
    assignments = np.tile(np.arange(8), (7, 1))
    limit = asymptotic_sinr(beta, assignments).min()
    rng = np.random.default_rng(4)
    medians = []
    for antennas in (8, 32, 128, 512):
        dev = []
        for _ in range(500):
            ch = draw_channels(beta, antennas, rng)
            noise = complex_normal(rng, (7, 8, antennas), cfg.pilot_noise_var)
            est = estimates_from_noise(ch, assignments, noise)
            dev.append(abs(finite_m_sinr(ch, est, assignments, cfg).min_sinr - limit) / limit)
        medians.append(np.median(dev))
    assert all(a > b for a, b in zip(medians, medians[1:])), medians


def test_capacity_values():
    np.testing.assert_allclose(capacity([1.0, 0.0, 3.0]), [1.0, 0.0, 2.0])
    assert capacity(np.inf) == np.inf
    with pytest.raises(ValueError):
        capacity(-0.5)

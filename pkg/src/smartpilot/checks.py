"""Self-checks run by ``smartpilot validate``.

Each check returns ``(passed, detail)``. They compare the production paths
against independent references: exhaustive enumeration for SPA, the
explicit received-pilot matrix for channel estimation and symbol-level
Monte-Carlo for the residual interference power.
"""

import tempfile
from pathlib import Path

import numpy as np

from . import assignment as pa
from .airlink import (
    ChannelEstimates,
    dft_pilots,
    estimate_channels,
    pilot_sharers,
    residual_power,
)
from .fading import ChannelSet, SystemConfig, complex_normal, draw_channels


def log_uniform(rng, size, decades=6.0):
    return 10.0 ** (decades * rng.random(size))


def check_optimality(instances=1000, seed=0, users=range(2, 8)):
    """SPA attains the exhaustive max-min value on random alpha/gamma instances."""
    rng = np.random.default_rng(seed)
    users = list(users)
    worst = 0.0
    for n in range(instances):
        k = users[n % len(users)]
        m = pa.AssignmentMetrics(alpha=log_uniform(rng, k), gamma=log_uniform(rng, k))
        greedy = pa.min_ratio(m, pa.spa(m))
        _, best = pa.exhaustive_pprime(m)
        worst = max(worst, abs(greedy - best) / best)
    return worst <= 1e-12, f"{instances} instances, max relative gap {worst:.3g}"


def random_link_config(rng, max_cells=3, max_users=3, max_antennas=8, noiseless=False):
    cells = int(rng.integers(1, max_cells + 1))
    users = int(rng.integers(1, max_users + 1))
    antennas = int(rng.integers(1, max_antennas + 1))
    beta = log_uniform(rng, (cells, cells, users), decades=3.0) / 10.0
    noise = 0.0 if noiseless else float(log_uniform(rng, 1, 2.0)[0] / 100.0)
    cfg = SystemConfig(
        pilot_power=float(log_uniform(rng, 1, 1.0)[0]),
        data_power=float(log_uniform(rng, 1, 1.0)[0]),
        pilot_noise_var=noise,
        data_noise_var=noise,
    )
    channels = draw_channels(beta, antennas, rng)
    assignments = np.array([rng.permutation(users) for _ in range(cells)])
    return channels, assignments, cfg


def check_estimation_identity(configs=100, seed=1):
    """Received-pilot matrix path equals the closed form for shared noise."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(configs):
        channels, assignments, cfg = random_link_config(rng)
        cells, _, users, antennas = channels.h.shape
        pilots = dft_pilots(users)
        noise = complex_normal(rng, (cells, antennas, users), cfg.pilot_noise_var)
        a = estimate_channels(channels, assignments, pilots, cfg, pilot_noise=noise, method="matrix")
        b = estimate_channels(channels, assignments, pilots, cfg, pilot_noise=noise, method="closed")
        worst = max(worst, float(np.max(np.abs(a.h_hat - b.h_hat))))
    # noiseless single cell returns the true channels
    rng2 = np.random.default_rng(seed + 1)
    beta = log_uniform(rng2, (1, 1, 4), 3.0)
    channels = draw_channels(beta, 16, rng2)
    cfg = SystemConfig(pilot_noise_var=0.0, data_noise_var=0.0)
    ident = np.arange(4)[None, :]
    est = estimate_channels(
        channels, ident, dft_pilots(4), cfg, pilot_noise=np.zeros((1, 16, 4), complex)
    )
    exact = np.array_equal(est.h_hat[0], channels.h[0, 0])
    return worst <= 1e-10 and exact, f"max path difference {worst:.3g}, noiseless exact={exact}"


def symbol_level_residual(h_bs, h_hat, own, home, cfg, rng, draws):
    """Samples of ``|eps|^2`` from explicit symbols and receiver noise.

    ``eps`` is the MF output minus its coherent part from the users sharing
    the pilot (``own[j]`` in cell ``j``).
    """
    cells, users, antennas = h_bs.shape
    x = complex_normal(rng, (draws, cells, users))
    n = complex_normal(rng, (draws, antennas), cfg.data_noise_var)
    sqrt_rho = np.sqrt(cfg.data_power)
    y = sqrt_rho * np.einsum("dlk,lkm->dm", x, h_bs) + n
    detected = y @ h_hat.conj()
    sharers = h_bs[np.arange(cells), own]  # (L, M)
    gains = np.einsum("lm,lm->l", sharers.conj(), sharers).real
    coherent = sqrt_rho * (x[:, np.arange(cells), own] * gains).sum(axis=1)
    return np.abs(detected - coherent) ** 2


def check_residual_oracle(configs=100, draws=100_000, seed=2, sigmas=3.0):
    """Closed-form residual power agrees with symbol-level simulation."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(configs):
        channels, assignments, cfg = random_link_config(rng)
        cells, _, users, antennas = channels.h.shape
        noise = complex_normal(rng, (cells, users, antennas), cfg.pilot_noise_var / cfg.pilot_power)
        est = ChannelEstimates(pilot_sharers(channels.h, assignments) + noise, noise)
        k = int(rng.integers(users))
        analytic = residual_power(channels, est, assignments, cfg, target=0)[k]
        samples = symbol_level_residual(
            channels.h[0], est.h_hat[0, k], assignments[:, k], 0, cfg, rng, draws
        )
        se = samples.std(ddof=1) / np.sqrt(draws)
        z = abs(samples.mean() - analytic) / se if se > 0 else abs(samples.mean() - analytic)
        worst = max(worst, float(z))
    return worst <= sigmas, f"{configs} configs, worst deviation {worst:.2f} standard errors"


def check_determinism(seed=11):
    """Two CLI runs with the same seed write byte-identical files."""
    from .cli import main

    with tempfile.TemporaryDirectory() as tmp:
        outs = []
        for run in ("a", "b"):
            out = Path(tmp) / run
            argv = ["cdf", "--trials", "20", "--antennas", "8", "--seed", str(seed), "--out", str(out)]
            if main(argv) != 0:
                return False, "cdf command failed"
            files = sorted(out.glob("*.csv")) + [out / "summary.json"]
            outs.append({p.name: p.read_bytes() for p in files})
        same = outs[0] == outs[1]
    return same, "repeated cdf runs byte-identical" if same else "outputs differ"


def run_all(quick=False):
    scale = 10 if quick else 1
    return [
        ("optimality", *check_optimality(instances=1000 // scale)),
        ("estimation_identity", *check_estimation_identity(configs=100 // scale)),
        ("residual_oracle", *check_residual_oracle(configs=100 // scale, draws=100_000 // scale)),
        ("determinism", *check_determinism()),
    ]

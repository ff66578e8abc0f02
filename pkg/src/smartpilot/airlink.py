"""Uplink pilot transmission, matched-filter estimation/detection and SINR.

Assignments for all cells are stored as an ``(L, K)`` integer array where
``assignments[j, k]`` is the user of cell ``j`` that transmits pilot ``k``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError
from .fading import complex_normal


@dataclass(frozen=True)
class PilotBook:
    phi: np.ndarray  # (K, tau) with orthonormal rows

    @property
    def length(self):
        return self.phi.shape[1]


def dft_pilots(users):
    """Unitary DFT pilot book with ``tau = K``."""
    n = np.arange(users)
    return PilotBook(np.exp(-2j * np.pi * np.outer(n, n) / users) / np.sqrt(users))


@dataclass(frozen=True)
class ChannelEstimates:
    h_hat: np.ndarray  # (L, K, M) estimate at BS i for pilot k
    noise: np.ndarray  # (L, K, M) equivalent estimation noise v


@dataclass(frozen=True)
class SinrReport:
    """Per-user SINR of one cell; arrays are indexed by user, not pilot."""

    sinr: np.ndarray
    capacity: np.ndarray
    min_user: int
    asymptotic: np.ndarray | None = None

    @property
    def min_sinr(self):
        return float(self.sinr[self.min_user])

    @property
    def has_infinite(self):
        return bool(np.isinf(self.sinr).any())


def _check_assignments(assignments, cells, users):
    assignments = np.asarray(assignments)
    if assignments.shape != (cells, users):
        raise DimensionError(
            f"assignments have shape {assignments.shape}, expected {(cells, users)}"
        )
    return assignments


def pilot_sharers(h, assignments):
    """Sum over cells of the channels sharing each pilot: ``X[i, k] = sum_j h[i, j, a[j, k]]``."""
    cells = h.shape[0]
    return h[:, np.arange(cells)[:, None], assignments, :].sum(axis=1)


def estimate_channels(
    channels, assignments, pilots, cfg, rng=None, pilot_noise=None, method="closed"
):
    """Matched-filter channel estimates at every BS for every pilot.

    ``pilot_noise`` is the received noise matrix ``N[i]`` of shape
    ``(L, M, tau)``. With ``method="matrix"`` the received pilot block is
    formed explicitly and correlated with each pilot; with ``"closed"`` the
    equivalent noise ``N phi* / sqrt(rho_p)`` is added to the sum of sharing
    channels (drawn directly when no noise matrix is supplied).
    """
    h = channels.h
    cells, _, users, antennas = h.shape
    assignments = _check_assignments(assignments, cells, users)
    phi = pilots.phi
    if phi.shape[0] != users:
        raise DimensionError(f"pilot book has {phi.shape[0]} pilots for K={users} users")
    if pilot_noise is not None and pilot_noise.shape != (cells, antennas, pilots.length):
        raise DimensionError(
            f"pilot noise has shape {pilot_noise.shape}, "
            f"expected {(cells, antennas, pilots.length)}"
        )
    sqrt_rho = np.sqrt(cfg.pilot_power)

    if method == "matrix":
        if pilot_noise is None:
            pilot_noise = complex_normal(rng, (cells, antennas, pilots.length), cfg.pilot_noise_var)
        sharers = pilot_sharers(h, assignments)  # (L, K, M)
        received = sqrt_rho * np.einsum("ikm,kt->imt", sharers, phi) + pilot_noise
        h_hat = np.einsum("imt,kt->ikm", received, phi.conj()) / sqrt_rho
        noise = np.einsum("imt,kt->ikm", pilot_noise, phi.conj()) / sqrt_rho
        return ChannelEstimates(h_hat=h_hat, noise=noise)
    if method != "closed":
        raise ValueError(f"unknown estimation method {method!r}")

    if pilot_noise is None:
        noise = complex_normal(rng, (cells, users, antennas), cfg.pilot_noise_var / cfg.pilot_power)
    else:
        noise = np.einsum("imt,kt->ikm", pilot_noise, phi.conj()) / sqrt_rho
    return estimates_from_noise(channels, assignments, noise)


def estimates_from_noise(channels, assignments, noise):
    """Rebuild estimates for new assignments while keeping the pilot-slot noise."""
    return ChannelEstimates(h_hat=pilot_sharers(channels.h, assignments) + noise, noise=noise)


def _detection_terms(h_bs, h_hat, own, home, noise_ratio):
    """Power terms of the MF output for a batch of estimates at one BS.

    ``h_bs`` is ``(L, K, M)``, ``h_hat`` is ``(P, M)`` and ``own[p, j]`` is
    the user of cell ``j`` that shares the pilot behind row ``p``. All terms
    are normalised by the data power.
    """
    cells, users, antennas = h_bs.shape
    norms = np.einsum("jkm,jkm->jk", h_bs.conj(), h_bs).real
    gains = (h_hat.conj() @ h_bs.reshape(cells * users, antennas).T).reshape(-1, cells, users)
    own_norm = norms[np.arange(cells), own]  # (P, L)
    sharers = h_bs[np.arange(cells), own]  # (P, L, M)
    # h_hat^H h - ||h||^2 written as (h_hat - h)^H h to avoid cancellation
    deviation = np.einsum("pjm,pjm->pj", (h_hat[:, None, :] - sharers).conj(), sharers)
    np.put_along_axis(gains, own[:, :, None], deviation[..., None], axis=2)
    residual = np.einsum("pjk,pjk->p", gains.conj(), gains).real
    signal = own_norm[:, home] ** 2
    contamination = (np.delete(own_norm, home, axis=1) ** 2).sum(axis=1)
    noise = noise_ratio * np.einsum("pm,pm->p", h_hat.conj(), h_hat).real
    return signal, contamination, residual, noise


def residual_power(channels, estimates, assignments, cfg, target=0):
    """Expected ``|eps|^2`` per pilot of the target cell, given the channels.

    Expectation is over unit-power data symbols and receiver noise:
    ``rho_u * sum_j |h_hat^H h_jk - ||h_jk||^2|^2
    + rho_u * sum_j sum_{k' != k} |h_hat^H h_jk'|^2 + sigma_n^2 ||h_hat||^2``.
    """
    _, _, residual, noise = _detection_terms(
        channels.h[target],
        estimates.h_hat[target],
        np.asarray(assignments).T,
        target,
        cfg.data_noise_var / cfg.data_power,
    )
    return cfg.data_power * (residual + noise)


def _ratio(signal, denominator):
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(denominator > 0, signal / np.where(denominator > 0, denominator, 1.0), np.inf)


def finite_m_sinr(channels, estimates, assignments, cfg, target=0, beta=None):
    """Finite-M uplink SINR of every user of the target cell under MF detection."""
    h = channels.h
    cells, _, users, _ = h.shape
    assignments = _check_assignments(assignments, cells, users)
    if estimates.h_hat.shape != (cells, users, h.shape[-1]):
        raise DimensionError(
            f"estimates have shape {estimates.h_hat.shape}, expected {(cells, users, h.shape[-1])}"
        )
    signal, contamination, residual, noise = _detection_terms(
        h[target],
        estimates.h_hat[target],
        assignments.T,
        target,
        cfg.data_noise_var / cfg.data_power,
    )
    per_pilot = _ratio(signal, contamination + residual + noise)
    sinr = np.empty(users)
    sinr[assignments[target]] = per_pilot
    asym = None if beta is None else asymptotic_sinr(beta, assignments, target)
    return SinrReport(sinr=sinr, capacity=capacity(sinr), min_user=int(np.argmin(sinr)), asymptotic=asym)


def pair_sinr_matrix(channels, estimates, assignments, cfg, target=0):
    """Finite-M SINR ``S[u, k]`` the target-cell user ``u`` would get on pilot ``k``.

    Other cells keep their assignments and the pilot-slot noise is held
    fixed, so the SINR of a target-cell user depends only on its own pilot.
    Row ``assignments[target, k]`` of column ``k`` reproduces the estimate in
    ``estimates`` exactly.
    """
    h_bs = channels.h[target]
    cells, users, antennas = h_bs.shape
    assignments = _check_assignments(assignments, cells, users)
    current = assignments[target]
    home = h_bs[target]
    h_hat = estimates.h_hat[target][None, :, :] + (home[:, None, :] - home[current][None, :, :])
    own = np.broadcast_to(assignments.T[None, :, :], (users, users, cells)).copy()
    own[:, :, target] = np.arange(users)[:, None]
    terms = _detection_terms(
        h_bs,
        h_hat.reshape(users * users, antennas),
        own.reshape(users * users, cells),
        target,
        cfg.data_noise_var / cfg.data_power,
    )
    signal, contamination, residual, noise = terms
    return _ratio(signal, contamination + residual + noise).reshape(users, users)


def asymptotic_sinr(beta, assignments, target=0):
    """Large-antenna SINR limit per user: ``beta_home^2 / sum_{j != i} beta_ij^2``."""
    beta = np.asarray(beta, dtype=float)
    cells, _, users = beta.shape
    assignments = _check_assignments(assignments, cells, users)
    sharing = beta[target, np.arange(cells)[:, None], assignments] ** 2  # (L, K) per pilot
    signal = sharing[target]
    interference = np.delete(sharing, target, axis=0).sum(axis=0)
    per_pilot = _ratio(signal, interference)
    sinr = np.empty(users)
    sinr[assignments[target]] = per_pilot
    return sinr


def capacity(sinr):
    """Shannon capacity ``log2(1 + sinr)`` in bits/s/Hz; infinity propagates."""
    sinr = np.asarray(sinr, dtype=float)
    if np.any(sinr < 0) or np.any(np.isnan(sinr)):
        raise ValueError("SINR must be non-negative")
    return np.log2(1.0 + sinr)

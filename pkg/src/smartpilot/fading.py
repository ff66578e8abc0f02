"""Large-scale fading, small-scale fading and composed channel vectors."""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def linear_to_db(x):
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(x)


@dataclass(frozen=True)
class SystemConfig:
    """Link-level constants; powers and noise variances are linear (mW)."""

    pilot_power: float = 1.0
    data_power: float = 1.0
    pilot_noise_var: float = 0.01
    data_noise_var: float = 0.01
    path_loss_exponent: float = 3.0
    shadow_sigma_db: float = 8.0
    cell_edge_snr_db: float = 20.0

    def __post_init__(self):
        for name in ("pilot_power", "data_power"):
            value = getattr(self, name)
            if not value > 0:
                raise ConfigurationError(f"{name} must be > 0, got {value}")
        # zero noise is allowed for noiseless reference cases
        for name in ("pilot_noise_var", "data_noise_var"):
            value = getattr(self, name)
            if not value >= 0:
                raise ConfigurationError(f"{name} must be >= 0, got {value}")
        if self.shadow_sigma_db < 0:
            raise ConfigurationError(f"shadow_sigma_db must be >= 0, got {self.shadow_sigma_db}")

    @classmethod
    def from_dbm(
        cls,
        pilot_power_dbm=0.0,
        data_power_dbm=0.0,
        cell_edge_snr_db=20.0,
        path_loss_exponent=3.0,
        shadow_sigma_db=8.0,
    ):
        """Build a config whose noise floor gives ``cell_edge_snr_db`` at beta = 1.

        Both noise variances equal ``data_power * 10**(-snr/10)``, so an
        unshadowed user at the cell edge sees exactly the requested SNR.
        """
        rho_p = float(db_to_linear(pilot_power_dbm))
        rho_u = float(db_to_linear(data_power_dbm))
        noise = rho_u * float(db_to_linear(-cell_edge_snr_db))
        return cls(
            pilot_power=rho_p,
            data_power=rho_u,
            pilot_noise_var=noise,
            data_noise_var=noise,
            path_loss_exponent=path_loss_exponent,
            shadow_sigma_db=shadow_sigma_db,
            cell_edge_snr_db=cell_edge_snr_db,
        )


@dataclass(frozen=True)
class ChannelSet:
    """One coherence block of channels ``h[i, j, k]`` of length M."""

    g: np.ndarray  # (L, L, K, M) small-scale fading, CN(0, 1) entries
    h: np.ndarray  # (L, L, K, M) composed channels

    @property
    def antennas(self):
        return self.h.shape[-1]


def path_loss(r, radius, exponent):
    """Distance-dependent part of beta: ``(r / R) ** -exponent``."""
    return (np.asarray(r, dtype=float) / radius) ** (-exponent)


def large_scale(r, radius, exponent, shadow_sigma_db, rng):
    """Large-scale coefficients ``beta = z / (r/R)**exponent`` with log-normal ``z``.

    ``10*log10(z)`` is N(0, shadow_sigma_db**2), drawn independently per link.
    """
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("distances must be strictly positive")
    shadow_db = shadow_sigma_db * rng.standard_normal(r.shape)
    return db_to_linear(shadow_db) * path_loss(r, radius, exponent)


def complex_normal(rng, shape, variance=1.0):
    """Circularly-symmetric complex Gaussian samples with the given variance."""
    scale = np.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def draw_channels(beta, antennas, rng):
    """Draw i.i.d. Rayleigh vectors and scale each link by ``sqrt(beta)``."""
    if antennas < 1:
        raise ConfigurationError(f"antenna count must be >= 1, got {antennas}")
    beta = np.asarray(beta, dtype=float)
    g = complex_normal(rng, beta.shape + (antennas,))
    return ChannelSet(g=g, h=g * np.sqrt(beta)[..., None])

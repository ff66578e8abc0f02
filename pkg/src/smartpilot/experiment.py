"""Monte-Carlo harness: paired trials, seeded substreams and summaries.

Every random draw of a trial comes from its own substream keyed by
``(seed, trial, purpose)``, so results do not depend on execution order or
on how trials are split across worker processes.
"""

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from . import assignment as pa
from .airlink import estimates_from_noise, pair_sinr_matrix
from .errors import ConfigurationError
from .fading import SystemConfig, complex_normal, draw_channels, large_scale, linear_to_db
from .geometry import MIN_DISTANCE_RATIO, build_hex_layout, distances, drop_users

log = logging.getLogger(__name__)

STRATEGIES = ("random", "conventional", "spa", "optimal_p", "optimal_pprime")
EXHAUSTIVE = ("optimal_p", "optimal_pprime")
WORKERS_ENV = "SMARTPILOT_WORKERS"

# substream purpose tags
_DROP, _SHADOW, _CHANNEL, _NOISE, _RANDOM = range(5)


@dataclass(frozen=True)
class Scenario:
    cells: int = 7
    users: int = 8
    antennas: tuple = (32,)
    radius: float = 500.0
    cfg: SystemConfig = field(default_factory=SystemConfig.from_dbm)
    trials: int = 1000
    seed: int = 0
    strategies: tuple = ("random", "conventional", "spa")
    target_cell: int = 0
    max_sweeps: int = 10
    k_max_exhaustive: int = pa.K_MAX_EXHAUSTIVE
    min_distance_ratio: float = MIN_DISTANCE_RATIO

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigurationError(f"trials must be >= 1, got {self.trials}")
        if not self.strategies:
            raise ConfigurationError("at least one strategy is required")
        unknown = set(self.strategies) - set(STRATEGIES)
        if unknown:
            raise ConfigurationError(
                f"unknown strategies {sorted(unknown)}; choose from {', '.join(STRATEGIES)}"
            )
        if self.users > self.k_max_exhaustive and set(self.strategies) & set(EXHAUSTIVE):
            raise ConfigurationError(
                f"exhaustive strategies need K <= k_max_exhaustive={self.k_max_exhaustive}, "
                f"got K={self.users} ({self.users}! assignments per trial)"
            )
        if not 0 <= self.target_cell < self.cells:
            raise ConfigurationError(f"target_cell {self.target_cell} outside 0..{self.cells - 1}")
        if any(m < 1 for m in self.antennas) or not self.antennas:
            raise ConfigurationError(f"antenna counts must be >= 1, got {self.antennas}")


def substream(seed, trial, purpose, *extra):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial, purpose, *extra)))


def trial_beta(scenario, trial):
    """Geometry and large-scale fading of one trial."""
    layout = build_hex_layout(scenario.cells, scenario.radius)
    drop = drop_users(
        layout, scenario.users, substream(scenario.seed, trial, _DROP), scenario.min_distance_ratio
    )
    cfg = scenario.cfg
    return large_scale(
        distances(layout, drop),
        scenario.radius,
        cfg.path_loss_exponent,
        cfg.shadow_sigma_db,
        substream(scenario.seed, trial, _SHADOW),
    )


def trial_channels(scenario, trial, beta, antennas):
    """Small-scale channels and pilot-slot noise of one trial at M antennas."""
    cfg = scenario.cfg
    channels = draw_channels(beta, antennas, substream(scenario.seed, trial, _CHANNEL, antennas))
    noise = complex_normal(
        substream(scenario.seed, trial, _NOISE, antennas),
        (beta.shape[0], beta.shape[2], antennas),
        cfg.pilot_noise_var / cfg.pilot_power,
    )
    return channels, noise


@dataclass
class TrialRecord:
    min_sinr: dict  # (strategy, M) -> worst-user finite-M SINR, linear
    min_asymptotic: dict  # (strategy, M) -> worst-user large-antenna SINR, linear


def run_trial(scenario, trial):
    """Run every strategy on one shared drop, fading and noise realisation.

    Non-target cells use the conventional assignment throughout.
    """
    beta = trial_beta(scenario, trial)
    users, target = scenario.users, scenario.target_cell
    base = np.tile(pa.conventional(users), (scenario.cells, 1))
    m = pa.metrics(beta, base, target)

    fixed = {}
    for name in scenario.strategies:
        if name == "random":
            fixed[name] = pa.random_assignment(users, substream(scenario.seed, trial, _RANDOM))
        elif name == "conventional":
            fixed[name] = pa.conventional(users)
        elif name == "spa":
            fixed[name] = pa.spa(m)
        elif name == "optimal_pprime":
            fixed[name] = pa.exhaustive_pprime(m, scenario.k_max_exhaustive)[0]

    record = TrialRecord({}, {})
    for antennas in scenario.antennas:
        channels, noise = trial_channels(scenario, trial, beta, antennas)
        est = estimates_from_noise(channels, base, noise)
        scores = pair_sinr_matrix(channels, est, base, scenario.cfg, target)
        perms = dict(fixed)
        if "optimal_p" in scenario.strategies:
            perms["optimal_p"] = pa.best_permutation(scores, scenario.k_max_exhaustive)[0]
        for name, perm in perms.items():
            record.min_sinr[name, antennas] = float(scores[perm, np.arange(users)].min())
            record.min_asymptotic[name, antennas] = pa.min_ratio(m, perm)
    return record


def worker_count(workers=None):
    if workers is None:
        env = os.environ.get(WORKERS_ENV, "").strip()
        workers = int(env) if env else (os.cpu_count() or 1)
    return max(1, int(workers))


def _map_trials(func, trials, workers):
    workers = worker_count(workers)
    if workers == 1 or trials < 2:
        return [func(t) for t in range(trials)]
    chunk = max(1, trials // (8 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, range(trials), chunksize=chunk))


def finite_samples(samples):
    """Split off infinite samples; returns ``(finite, excluded_count)``."""
    samples = np.asarray(samples, dtype=float)
    keep = np.isfinite(samples)
    return samples[keep], int((~keep).sum())


def empirical_cdf(samples, grid):
    """Fraction of finite samples ``<= x`` for every grid point ``x``."""
    finite, excluded = finite_samples(samples)
    if excluded:
        log.warning("empirical CDF: %d infinite sample(s) excluded", excluded)
    if finite.size == 0:
        raise ValueError("empirical CDF needs at least one finite sample")
    ordered = np.sort(finite)
    return np.searchsorted(ordered, np.asarray(grid, dtype=float), side="right") / ordered.size


def worst_user_capacity(min_sinr):
    """Mean over trials of ``log2(1 + min SINR)``."""
    min_sinr = np.asarray(min_sinr, dtype=float)
    if min_sinr.size == 0:
        raise ValueError("worst-user capacity needs at least one trial")
    return float(np.mean(np.log2(1.0 + min_sinr)))


def cdf_grid(low=-60.0, high=30.0, step=0.25):
    count = int(round((high - low) / step)) + 1
    return low + step * np.arange(count)


@dataclass
class ExperimentResult:
    scenario: Scenario
    min_sinr: dict  # (strategy, M) -> (trials,) linear
    min_asymptotic: dict  # (strategy, M) -> (trials,) linear

    def min_sinr_db(self, strategy, antennas):
        return linear_to_db(self.min_sinr[strategy, antennas])

    def median_db(self, strategy, antennas):
        finite, _ = finite_samples(self.min_sinr_db(strategy, antennas))
        return float(np.median(finite))

    def capacity(self, strategy, antennas):
        return worst_user_capacity(self.min_sinr[strategy, antennas])

    def cdf(self, strategy, antennas, grid):
        return empirical_cdf(self.min_sinr_db(strategy, antennas), grid)

    def statistics(self, strategy, antennas):
        db = self.min_sinr_db(strategy, antennas)
        finite, excluded = finite_samples(db)
        return {
            "trials": int(db.size),
            "excluded_infinite": excluded,
            "median_min_sinr_db": float(np.median(finite)) if finite.size else None,
            "mean_min_sinr_db": float(np.mean(finite)) if finite.size else None,
            "mean_worst_user_capacity": self.capacity(strategy, antennas),
            "median_min_asymptotic_sinr_db": float(
                np.median(linear_to_db(self.min_asymptotic[strategy, antennas]))
            ),
        }


def run_experiment(scenario, workers=None):
    records = _map_trials(partial(run_trial, scenario), scenario.trials, workers)
    keys = records[0].min_sinr.keys()
    return ExperimentResult(
        scenario=scenario,
        min_sinr={key: np.array([r.min_sinr[key] for r in records]) for key in keys},
        min_asymptotic={key: np.array([r.min_asymptotic[key] for r in records]) for key in keys},
    )


def _pad(rows, length):
    rows = np.asarray(rows)
    if len(rows) < length:
        rows = np.concatenate([rows, np.repeat(rows[-1:], length - len(rows), axis=0)])
    return rows


@dataclass
class ConvergenceTrial:
    converged: bool
    sweeps_to_converge: int | None
    traces: dict  # M (or "inf") -> (max_sweeps + 1, L) per-cell min SINR in dB


def run_convergence_trial(scenario, trial):
    """Sequential multi-cell SPA from conventional assignments for one trial.

    Traces start at sweep 0 (initial state) and are padded with the final
    state once the assignments reach a fixed point.
    """
    beta = trial_beta(scenario, trial)
    init = np.tile(pa.conventional(scenario.users), (scenario.cells, 1))
    it = pa.sequential_iterate(beta, init, scenario.max_sweeps)
    rows = scenario.max_sweeps + 1
    traces = {"inf": _pad(linear_to_db(it.trace), rows)}
    for antennas in scenario.antennas:
        channels, noise = trial_channels(scenario, trial, beta, antennas)
        metric = pa.finite_m_cell_metric(channels, noise, scenario.cfg)
        trace = [[metric(a, i) for i in range(scenario.cells)] for a in it.history]
        traces[antennas] = _pad(linear_to_db(np.array(trace)), rows)
    return ConvergenceTrial(it.converged, it.sweeps_to_converge, traces)


@dataclass
class ConvergenceResult:
    scenario: Scenario
    converged: np.ndarray  # (trials,) bool
    sweeps_to_converge: np.ndarray  # (trials,) int, -1 when not converged
    traces: dict  # M (or "inf") -> (trials, max_sweeps + 1, L) dB

    def average_trace(self, key):
        """Trial-averaged per-cell min SINR (dB) after each sweep, ``(sweeps + 1, L)``."""
        trace = self.traces[key]
        out = np.empty(trace.shape[1:])
        for s in range(trace.shape[1]):
            for c in range(trace.shape[2]):
                finite, _ = finite_samples(trace[:, s, c])
                out[s, c] = finite.mean() if finite.size else np.inf
        return out

    def converged_fraction(self):
        return float(self.converged.mean())

    def median_sweeps(self):
        """Median sweeps to convergence, counting non-converged trials as never."""
        sweeps = np.where(self.converged, self.sweeps_to_converge, np.inf)
        return float(np.median(sweeps))


def convergence_trace(scenario, workers=None):
    records = _map_trials(partial(run_convergence_trial, scenario), scenario.trials, workers)
    keys = records[0].traces.keys()
    return ConvergenceResult(
        scenario=scenario,
        converged=np.array([r.converged for r in records]),
        sweeps_to_converge=np.array(
            [r.sweeps_to_converge if r.converged else -1 for r in records]
        ),
        traces={key: np.stack([r.traces[key] for r in records]) for key in keys},
    )

"""Pilot assignment: SPA greedy, baselines, exhaustive max-min search and
the sequential multi-cell iteration.

A single-cell assignment is an integer array ``perm`` of length K with
``perm[k]`` the user holding pilot ``k``.
"""

import itertools
import logging
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .airlink import asymptotic_sinr, estimates_from_noise, finite_m_sinr, pair_sinr_matrix
from .errors import ExhaustiveLimitError

log = logging.getLogger(__name__)

K_MAX_EXHAUSTIVE = 9


def is_permutation(perm):
    perm = np.asarray(perm)
    return perm.ndim == 1 and np.array_equal(np.sort(perm), np.arange(len(perm)))


def _require_permutation(perm, what="assignment"):
    if not is_permutation(perm):
        raise ValueError(f"{what} {list(np.asarray(perm))} is not a permutation")


@dataclass(frozen=True)
class AssignmentMetrics:
    alpha: np.ndarray  # channel quality per user
    gamma: np.ndarray  # inter-cell interference per pilot
    degenerate: bool = False  # no interfering cells, every assignment ties

    @property
    def users(self):
        return len(self.alpha)


def metrics(beta, assignments, target=0):
    """Channel quality ``alpha[k] = beta_iik^2`` and pilot interference
    ``gamma[k] = sum_{j != i} beta_ij(a_j(k))^2`` for the target cell.

    Only the rows of ``assignments`` for the other cells are read.
    """
    beta = np.asarray(beta, dtype=float)
    cells, _, users = beta.shape
    assignments = np.asarray(assignments)
    for j in range(cells):
        if j != target:
            _require_permutation(assignments[j], f"assignment of cell {j}")
    alpha = beta[target, target] ** 2
    others = [j for j in range(cells) if j != target]
    if not others:
        log.debug("single cell: gamma is zero, every pilot assignment is optimal")
        return AssignmentMetrics(alpha=alpha, gamma=np.zeros(users), degenerate=True)
    gamma = sum(beta[target, j, assignments[j]] ** 2 for j in others)
    return AssignmentMetrics(alpha=alpha, gamma=gamma)


def spa(m):
    """Smart pilot assignment.

    Pilots are ranked by interference and users by channel quality, both in
    descending order, and the m-th ranked pilot goes to the m-th ranked
    user: the cleanest pilot ends up with the weakest user. Ties keep the
    lower index first.
    """
    pilots_by_gamma = np.argsort(-m.gamma, kind="stable")
    users_by_alpha = np.argsort(-m.alpha, kind="stable")
    perm = np.empty(m.users, dtype=int)
    perm[pilots_by_gamma] = users_by_alpha
    return perm


def conventional(users):
    """Pilot k to user k."""
    if users < 1:
        raise ValueError(f"users must be >= 1, got {users}")
    return np.arange(users)


def random_assignment(users, rng):
    return rng.permutation(users)


def min_ratio(m, perm):
    """Worst-user large-antenna SINR ``min_k alpha[perm[k]] / gamma[k]``."""
    with np.errstate(divide="ignore"):
        return float(np.min(m.alpha[np.asarray(perm)] / m.gamma))


@lru_cache(maxsize=None)
def _all_permutations(users):
    return np.array(list(itertools.permutations(range(users))), dtype=np.intp).reshape(-1, users)


def best_permutation(scores, k_max=K_MAX_EXHAUSTIVE):
    """Exhaustive max-min over all permutations of a user x pilot score table.

    Returns ``(perm, value)`` maximising ``min_k scores[perm[k], k]``; ties go
    to the lexicographically smallest permutation.
    """
    scores = np.asarray(scores, dtype=float)
    users = scores.shape[0]
    if users > k_max:
        raise ExhaustiveLimitError(users, k_max)
    perms = _all_permutations(users)
    values = scores[perms, np.arange(users)].min(axis=1)
    best = int(np.argmax(values))
    return perms[best].copy(), float(values[best])


def exhaustive_pprime(m, k_max=K_MAX_EXHAUSTIVE):
    """Max-min of the large-antenna SINR by enumeration of all K! assignments."""
    with np.errstate(divide="ignore"):
        scores = m.alpha[:, None] / m.gamma[None, :]
    return best_permutation(scores, k_max)


def exhaustive_p(channels, estimates, assignments, cfg, target=0, k_max=K_MAX_EXHAUSTIVE):
    """Max-min of the finite-M SINR over all assignments of the target cell.

    Other cells keep their assignments and the pilot-slot estimation noise
    is shared by every candidate.
    """
    users = channels.h.shape[2]
    if users > k_max:
        raise ExhaustiveLimitError(users, k_max)
    scores = pair_sinr_matrix(channels, estimates, assignments, cfg, target)
    return best_permutation(scores, k_max)


@dataclass
class IterationResult:
    assignments: np.ndarray  # (L, K) final assignments
    history: list = field(repr=False)  # assignments before sweep 1 and after every sweep
    trace: np.ndarray  # (sweeps + 1, L) per-cell metric, row 0 is the initial state
    converged: bool
    sweeps_to_converge: int | None  # last sweep that changed anything (>= 1)


def min_asymptotic_sinr(beta, assignments, cell):
    return float(np.min(asymptotic_sinr(beta, assignments, cell)))


def sequential_iterate(beta, init, max_sweeps, cell_metric=None):
    """Let every cell reapply SPA in index order until a sweep changes nothing.

    ``cell_metric(assignments, cell)`` is recorded for every cell after each
    sweep; it defaults to the cell's minimum large-antenna SINR.
    """
    if max_sweeps < 1:
        raise ValueError(f"max_sweeps must be >= 1, got {max_sweeps}")
    beta = np.asarray(beta, dtype=float)
    cells = beta.shape[0]
    current = np.array(init, dtype=int, copy=True)
    for j in range(cells):
        _require_permutation(current[j], f"initial assignment of cell {j}")
    if cell_metric is None:
        def cell_metric(a, i):
            return min_asymptotic_sinr(beta, a, i)

    history = [current.copy()]
    trace = [[cell_metric(current, i) for i in range(cells)]]
    last_change = 0
    converged = False
    for sweep in range(1, max_sweeps + 1):
        changed = False
        for i in range(cells):
            new = spa(metrics(beta, current, i))
            if not np.array_equal(new, current[i]):
                current[i] = new
                changed = True
        history.append(current.copy())
        trace.append([cell_metric(current, i) for i in range(cells)])
        if not changed:
            converged = True
            break
        last_change = sweep
    return IterationResult(
        assignments=current,
        history=history,
        trace=np.array(trace),
        converged=converged,
        sweeps_to_converge=max(last_change, 1) if converged else None,
    )


def finite_m_cell_metric(channels, noise, cfg):
    """Per-cell minimum finite-M SINR for use as a ``sequential_iterate`` metric."""
    def metric(assignments, cell):
        est = estimates_from_noise(channels, assignments, noise)
        return finite_m_sinr(channels, est, assignments, cfg, target=cell).min_sinr

    return metric

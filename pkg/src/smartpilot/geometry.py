"""Hexagonal multi-cell layout, user drops and BS-user distances.

Cells are pointy-topped hexagons with circumradius ``R``; the six ring base
stations sit at distance ``sqrt(3) * R`` from the origin at angles
0, 60, ..., 300 degrees, which is where tangent pointy-topped hexagons
place their neighbours. Cell 0 (at the origin) is the target cell.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError

SUPPORTED_CELL_COUNTS = (1, 7)
MIN_DISTANCE_RATIO = 0.1
_MAX_DROP_ROUNDS = 1000


@dataclass(frozen=True)
class CellularLayout:
    bs_positions: np.ndarray  # (L, 2) meters
    cell_radius: float

    @property
    def cell_count(self):
        return len(self.bs_positions)


@dataclass(frozen=True)
class UserDrop:
    positions: np.ndarray  # (L, K, 2) meters, positions[j, k] is user k of cell j

    @property
    def users_per_cell(self):
        return self.positions.shape[1]


def build_hex_layout(cells, radius):
    """Return the BS grid for ``cells`` hexagonal cells of circumradius ``radius``."""
    if cells not in SUPPORTED_CELL_COUNTS:
        raise ConfigurationError(
            f"unsupported cell count L={cells}; supported values are "
            f"{', '.join(map(str, SUPPORTED_CELL_COUNTS))}"
        )
    if not radius > 0:
        raise ConfigurationError(f"cell radius must be > 0, got {radius}")
    positions = [(0.0, 0.0)]
    if cells == 7:
        isd = np.sqrt(3.0) * radius
        angles = np.deg2rad(60.0 * np.arange(6))
        positions += [(isd * np.cos(a), isd * np.sin(a)) for a in angles]
    return CellularLayout(np.array(positions, dtype=float), float(radius))


def in_hexagon(points, radius):
    """Point-in-hexagon test for a pointy-topped hexagon centred at the origin."""
    points = np.asarray(points, dtype=float)
    x = np.abs(points[..., 0])
    y = np.abs(points[..., 1])
    # small slack so that vertices and edge points count as inside
    eps = 1e-9 * radius
    return (x <= np.sqrt(3.0) / 2 * radius + eps) & (y + x / np.sqrt(3.0) <= radius + eps)


def drop_users(layout, users, rng, min_distance_ratio=MIN_DISTANCE_RATIO):
    """Drop ``users`` users uniformly in every cell, away from the home BS.

    Positions are rejection-sampled from the hexagon's bounding box; samples
    closer than ``min_distance_ratio * R`` to the home BS are rejected.
    """
    if users < 1:
        raise ConfigurationError(f"users per cell must be >= 1, got {users}")
    R = layout.cell_radius
    r_min = min_distance_ratio * R
    half_width = np.sqrt(3.0) / 2 * R
    need = layout.cell_count * users
    accepted = np.empty((0, 2))
    for _ in range(_MAX_DROP_ROUNDS):
        batch = max(2 * (need - len(accepted)), 16)
        pts = np.column_stack(
            [rng.uniform(-half_width, half_width, batch), rng.uniform(-R, R, batch)]
        )
        keep = in_hexagon(pts, R) & (np.hypot(pts[:, 0], pts[:, 1]) >= r_min)
        accepted = np.concatenate([accepted, pts[keep]])
        if len(accepted) >= need:
            break
    else:
        raise ConfigurationError(
            f"could not place users after {_MAX_DROP_ROUNDS} sampling rounds; "
            f"minimum distance {r_min} m leaves no room in a cell of radius {R} m"
        )
    offsets = accepted[:need].reshape(layout.cell_count, users, 2)
    return UserDrop(offsets + layout.bs_positions[:, None, :])


def distances(layout, drop):
    """Distance tensor ``r[i, j, k]`` from BS ``i`` to user ``k`` of cell ``j``."""
    if drop.positions.shape[0] != layout.cell_count:
        raise ConfigurationError(
            f"drop has {drop.positions.shape[0]} cells, layout has {layout.cell_count}"
        )
    diff = drop.positions[None, :, :, :] - layout.bs_positions[:, None, None, :]
    return np.hypot(diff[..., 0], diff[..., 1])

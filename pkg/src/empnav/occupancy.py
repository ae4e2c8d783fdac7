"""Ego-centric occupancy maps: the state representation fed to the estimator.

A map is a rows x cols x 3 tensor of cells [occupancy, v_x, v_y], world-axis
aligned and centered on one agent. Columns index x (east), rows index y
(north); cells are half-open [edge, edge + cell_size). A human's full state
vector concatenates its own map with the maps of its k-1 nearest human
neighbors (increasing distance, ties broken by storage index), zero-padded to
a fixed length so network inputs never change size mid-episode. The robot
occupies cells like any other agent: it is part of the humans' environment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .simulation import observe


@dataclass(frozen=True)
class GridSpec:
    rows: int = 4
    cols: int = 4
    cell_size: float = 1.0

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError("grid must have at least one row and column")
        if self.cell_size <= 0.0:
            raise ValueError("cell_size must be positive")

    @property
    def cells(self):
        return self.rows * self.cols

    @property
    def map_length(self):
        return self.cells * 3


@dataclass
class OccupancyMap:
    spec: GridSpec
    grid: np.ndarray  # (rows, cols, 3)

    def flat(self):
        return self.grid.reshape(-1)


def build_ego_map(center, others, spec):
    """Map of `others` around `center`; nearest occupant wins a contested cell."""
    grid = np.zeros((spec.rows, spec.cols, 3))
    best = {}
    half_w = 0.5 * spec.cols * spec.cell_size
    half_h = 0.5 * spec.rows * spec.cell_size
    for ob in others:
        dx = ob.p_x - center.p_x
        dy = ob.p_y - center.p_y
        col = math.floor((dx + half_w) / spec.cell_size)
        row = math.floor((dy + half_h) / spec.cell_size)
        if not (0 <= col < spec.cols and 0 <= row < spec.rows):
            continue
        dist = math.hypot(dx, dy)
        key = (row, col)
        if key in best and best[key] <= dist:
            continue
        best[key] = dist
        grid[row, col, 0] = 1.0
        grid[row, col, 1] = ob.v_x
        grid[row, col, 2] = ob.v_y
    return OccupancyMap(spec=spec, grid=grid)


def assemble_state(subject, world, spec, k=1, include_self=True):
    """Concatenated occupancy-map state for human index `subject`.

    include_self=True (default) stacks the subject's own map first, then the
    k-1 nearest human neighbors' maps; include_self=False stacks the k nearest
    neighbors' maps only. Missing neighbors contribute all-zero maps.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if not (0 <= subject < len(world.humans)):
        raise IndexError(f"human index {subject} out of range")
    me = world.humans[subject]
    neighbors = []
    for i, h in enumerate(world.humans):
        if i == subject:
            continue
        neighbors.append((math.hypot(h.p_x - me.p_x, h.p_y - me.p_y), i))
    neighbors.sort()
    centers = [subject] if include_self else []
    centers += [i for _, i in neighbors]
    centers = centers[:k]

    agents = world.agents()
    maps = []
    for center_idx in centers:
        center = world.humans[center_idx]
        others = [observe(a) for j, a in enumerate(agents) if j != center_idx + 1]
        maps.append(build_ego_map(center, others, spec).flat())
    while len(maps) < k:
        maps.append(np.zeros(spec.map_length))
    return np.concatenate(maps)


def state_length(spec, k=1):
    return k * spec.map_length


MAP_CSV_COLUMNS = "subject_id,t,cell_row,cell_col,occupancy,v_x,v_y"


def map_to_csv_rows(subject_id, t, omap):
    """Debug export: one row per cell."""
    rows = []
    for i in range(omap.spec.rows):
        for j in range(omap.spec.cols):
            occ, vx, vy = omap.grid[i, j]
            rows.append(
                f"{subject_id},{t},{i},{j},{int(occ)},{vx:.9g},{vy:.9g}"
            )
    return rows

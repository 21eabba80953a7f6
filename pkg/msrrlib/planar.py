# Copyright 2018 Nikolas Hemion. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
# ==============================================================================

"""
Two-dimensional views of the three-state occupancy grid: the robot-height
slab projection, obstacle bloating and grid distances.
"""

import heapq
import math

import numpy as np
from scipy import ndimage

UNKNOWN = 0
FREE = 1
OCCUPIED = 2

# 8-connected moves with unit / sqrt(2) step costs
MOVES = (
    (1, 0, 1.0), (-1, 0, 1.0), (0, 1, 1.0), (0, -1, 1.0),
    (1, 1, math.sqrt(2)), (1, -1, math.sqrt(2)),
    (-1, 1, math.sqrt(2)), (-1, -1, math.sqrt(2)))


def slab_layers(resolution, robot_height, floor_z=0.0, origin_z=0.0):
    """ Index range [k0, k1) of the voxel layers from the floor to robot height. """
    k0 = int(math.floor((floor_z - origin_z) / resolution + 1e-9))
    k1 = k0 + max(1, int(math.ceil(robot_height / resolution - 1e-9)))
    return max(k0, 0), k1


def project(cells, resolution, robot_height, floor_z=0.0, origin_z=0.0):
    """
    Project the voxel slab between the floor and robot height onto the floor.

    Returns
    -------
    occupied : bool array (nx, ny)
        Some cell of the column slab is Occupied.

    free : bool array (nx, ny)
        The floor cell of the column is Free and no slab cell is Occupied.
    """
    k0, k1 = slab_layers(resolution, robot_height, floor_z, origin_z)
    k1 = min(k1, cells.shape[2])
    if k0 >= k1:
        shape2d = cells.shape[:2]
        return np.zeros(shape2d, dtype=bool), np.zeros(shape2d, dtype=bool)
    slab = cells[:, :, k0:k1]
    occupied = np.any(slab == OCCUPIED, axis=2)
    free = (slab[:, :, 0] == FREE) & ~occupied
    return occupied, free


def bloat(occupied, radius_cells):
    """
    Cells whose center lies strictly closer than `radius_cells` to the center
    of an occupied cell.

    >>> occ = np.zeros((5, 5), dtype=bool); occ[2, 2] = True
    >>> int(bloat(occ, 2.0).sum())
    9
    """
    if not np.any(occupied):
        return np.zeros(occupied.shape, dtype=bool)
    distance = ndimage.distance_transform_edt(~occupied)
    return distance < radius_cells - 1e-9


def can_step(traversable, i, j, di, dj):
    ni, nj = i + di, j + dj
    if not (0 <= ni < traversable.shape[0] and 0 <= nj < traversable.shape[1]):
        return False
    if not traversable[ni, nj]:
        return False
    if di != 0 and dj != 0:
        # no corner cutting
        return bool(traversable[i + di, j] and traversable[i, j + dj])
    return True


def path_costs(traversable, start):
    """
    Grid path length (in cells) from `start` to every cell, inf where
    unreachable. The start cell itself is always allowed.
    """
    costs = np.full(traversable.shape, np.inf)
    start = (int(start[0]), int(start[1]))
    costs[start] = 0.0
    queue = [(0.0, start)]
    while queue:
        c, (i, j) = heapq.heappop(queue)
        if c > costs[i, j]:
            continue
        for di, dj, w in MOVES:
            if can_step(traversable, i, j, di, dj):
                nc = c + w
                if nc < costs[i + di, j + dj] - 1e-12:
                    costs[i + di, j + dj] = nc
                    heapq.heappush(queue, (nc, (i + di, j + dj)))
    return costs


def cell_of(position, resolution, origin=(0.0, 0.0)):
    """ Planar cell index containing a metric position. """
    return (int(math.floor((position[0] - origin[0]) / resolution)),
            int(math.floor((position[1] - origin[1]) / resolution)))


def cell_center(cell, resolution, origin=(0.0, 0.0)):
    return np.array([
            origin[0] + (cell[0] + 0.5) * resolution,
            origin[1] + (cell[1] + 0.5) * resolution])

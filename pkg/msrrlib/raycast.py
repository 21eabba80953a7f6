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
Vectorized voxel traversal (one cell at a time along every ray, all rays
advanced together). Shared by the simulated depth sensor, the occupancy grid
update and the next-best-view gain evaluation, so that all three agree on
which cells a ray passes through.
"""

import numpy as np

from msrrlib.core import docsig


def ray_directions(heading, fov_h, fov_v, n_h, n_v, pitch=0.0):
    """
    Unit ray directions of a camera with the given yaw `heading` and `pitch`,
    sampled on a regular `n_v` x `n_h` angular grid (cell centers). Returns
    an array of shape (n_v*n_h, 3), row-major over (elevation, azimuth).
    """
    az = heading + fov_h * ((np.arange(n_h) + 0.5) / n_h - 0.5)
    el = pitch + fov_v * ((np.arange(n_v) + 0.5) / n_v - 0.5)
    el, az = np.meshgrid(el, az, indexing='ij')
    d = np.stack([
            np.cos(el) * np.cos(az),
            np.cos(el) * np.sin(az),
            np.sin(el)], axis=-1)
    return d.reshape((-1, 3))


@docsig
def march(origins, directions, max_range, shape, resolution, origin=(0.0, 0.0, 0.0), blocked=None):
    """
    Walk all rays through a voxel array, one voxel crossing per iteration.

    Parameters
    ----------
    origins : array (N, 3)
        Ray origins in meters.

    directions : array (N, 3)
        Unit ray directions.

    max_range : float or array (N,)
        Rays are not followed beyond this distance.

    shape : tuple
        Voxel array shape (nx, ny, nz). Cells outside the array terminate the
        ray; the floor plane z = origin[2] is the lower bound.

    resolution : float
        Edge length of a voxel in meters.

    blocked : bool array of `shape` (optional)
        Rays stop after yielding the first blocked cell they enter.

    Yields
    ------
    ray_inds, cells, t_enter, t_exit, is_blocked
        For every ray still travelling: its index, the integer cell it is
        in, the distances at which it enters and leaves that cell, and
        whether the cell is blocked.
    """
    origins = np.asarray(origins, dtype=float).reshape((-1, 3))
    directions = np.asarray(directions, dtype=float).reshape((-1, 3))
    n = origins.shape[0]
    shape = np.asarray(shape, dtype=int)
    offset = np.asarray(origin, dtype=float)
    max_range = np.broadcast_to(np.asarray(max_range, dtype=float), (n,)).copy()

    local = (origins - offset) / resolution
    cell = np.floor(local).astype(int)
    step = np.sign(directions).astype(int)

    with np.errstate(divide='ignore', invalid='ignore'):
        boundary = np.where(step > 0, cell + 1, cell).astype(float)
        t_max = np.where(step != 0, (boundary - local) * resolution / directions, np.inf)
        t_delta = np.where(step != 0, resolution / np.abs(directions), np.inf)

    t_enter = np.zeros(n)
    active = np.ones(n, dtype=bool)

    while True:
        inside = np.all((cell >= 0) & (cell < shape), axis=1)
        active &= inside & (t_enter < max_range)
        ray_inds = np.flatnonzero(active)
        if ray_inds.size == 0:
            return

        cells = cell[ray_inds]
        t0 = t_enter[ray_inds]
        t1 = np.minimum(t_max[ray_inds].min(axis=1), max_range[ray_inds])
        if blocked is not None:
            is_blocked = blocked[cells[:,0], cells[:,1], cells[:,2]]
        else:
            is_blocked = np.zeros(ray_inds.size, dtype=bool)

        yield ray_inds, cells, t0, t1, is_blocked

        active[ray_inds[is_blocked]] = False

        axis = np.argmin(t_max[ray_inds], axis=1)
        t_enter[ray_inds] = t_max[ray_inds, axis]
        cell[ray_inds, axis] += step[ray_inds, axis]
        t_max[ray_inds, axis] += t_delta[ray_inds, axis]


def cast(origins, directions, max_range, blocked, resolution, origin=(0.0, 0.0, 0.0)):
    """
    First blocked cell along each ray.

    Returns
    -------
    ranges : array (N,)
        Distance at which the ray enters its first blocked cell, or where it
        leaves the array / reaches the floor / reaches `max_range`.

    hit_cells : int array (N, 3)
        The blocked cell per ray, -1 where nothing was hit.
    """
    origins = np.asarray(origins, dtype=float).reshape((-1, 3))
    n = origins.shape[0]
    ranges = np.broadcast_to(np.asarray(max_range, dtype=float), (n,)).copy()
    hit_cells = -np.ones((n, 3), dtype=int)
    for ray_inds, cells, t0, t1, is_blocked in march(
            origins, directions, max_range, blocked.shape, resolution, origin, blocked):
        ranges[ray_inds] = np.where(is_blocked, t0, t1)
        hit_cells[ray_inds[is_blocked]] = cells[is_blocked]
    return ranges, hit_cells

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
The robot's three-state occupancy belief (Unknown / Free / Occupied with an
optional color label), colored object detection on it, and greedy
next-best-view selection for exploration.
"""

import dataclasses
import logging
import math

import numpy as np
from scipy import ndimage

from msrrlib import planar, raycast
from msrrlib.core import SimConfig, chunklist, config_def, docsig, wrap_angle
from msrrlib.errors import NoReachableCandidate
from msrrlib.nav import Waypoint, traversable_map
from msrrlib.planar import UNKNOWN, FREE, OCCUPIED

logger = logging.getLogger(__name__)

STATE_NAMES = {UNKNOWN: 'unknown', FREE: 'free', OCCUPIED: 'occupied'}


class MappingConfig(SimConfig):

    def init(self):
        self.update(
                robot_radius=0.16,
                robot_height=0.16,
                blind_radius=0.32,
                sensor_height=0.12,
                fov_h=math.radians(60.0),
                fov_v=math.radians(45.0),
                gain_rays_h=12,
                gain_rays_v=8,
                gain_range=1.5,
                gain_min=10,
                candidate_spacing=2,
                n_headings=8,
                batch_size=128)


class OccupancyGrid(object):

    def __init__(self, shape, resolution, origin=(0.0, 0.0, 0.0)):
        if resolution <= 0:
            raise ValueError('resolution must be positive.')
        self.cells = np.full(tuple(shape), UNKNOWN, dtype=np.int8)
        self.colors = np.full(tuple(shape), '', dtype='<U16')
        self.resolution = float(resolution)
        self.origin = tuple(float(o) for o in origin)

    def copy(self):
        new = OccupancyGrid.__new__(OccupancyGrid)
        new.cells = self.cells.copy()
        new.colors = self.colors.copy()
        new.resolution = self.resolution
        new.origin = self.origin
        return new

    @property
    def shape(self):
        return self.cells.shape

    def count(self, state):
        return int(np.count_nonzero(self.cells == state))

    def cell_of(self, point):
        return tuple(int(math.floor((p - o) / self.resolution)) for p, o in zip(point[:3], self.origin))

    def centers(self, cells):
        """ Metric centers of an (N, 3) array of cell indices. """
        return (np.asarray(cells, dtype=float) + 0.5) * self.resolution + np.asarray(self.origin)


@dataclasses.dataclass(frozen=True)
class DetectedObject:
    color: str
    centroid: tuple
    height_above_ground: float
    support: tuple

    @property
    def position(self):
        return self.centroid


@dataclasses.dataclass(frozen=True)
class ExplorationComplete:
    best_gain: int = 0


@docsig
def integrate_frame(grid, frame):
    """
    Update the belief with one sensor frame.

    Every cell a ray passes before its hit becomes Free, the hit cell becomes
    Occupied with the ray's color and cells beyond the hit are untouched.
    Occupied cells stay Occupied. Returns a new grid.
    """
    new = grid.copy()
    n = frame.directions.shape[0]
    origins = np.broadcast_to(frame.origin, (n, 3))
    limits = np.where(frame.hit, frame.ranges + 1e-6, frame.ranges)

    free_cells, hit_cells, hit_colors = [], [], []
    for ray_inds, cells, t0, t1, _ in raycast.march(
            origins, frame.directions, limits, grid.shape, grid.resolution, grid.origin):
        at_hit = frame.hit[ray_inds] & (t0 >= frame.ranges[ray_inds] - 1e-9)
        free_cells.append(cells[~at_hit])
        hit_cells.append(cells[at_hit])
        hit_colors.append(frame.colors[ray_inds[at_hit]])

    if free_cells:
        f = np.concatenate(free_cells)
        keep = new.cells[f[:,0], f[:,1], f[:,2]] != OCCUPIED
        f = f[keep]
        new.cells[f[:,0], f[:,1], f[:,2]] = FREE
        h = np.concatenate(hit_cells)
        new.cells[h[:,0], h[:,1], h[:,2]] = OCCUPIED
        new.colors[h[:,0], h[:,1], h[:,2]] = np.concatenate(hit_colors)
    return new


def mark_footprint(grid, position, radius=0.32, height=0.16):
    """
    Unknown cells of the robot-height slab within `radius` of the robot are
    Free: the robot stands there. Covers the ring around the robot that the
    camera cannot see.
    """
    new = grid.copy()
    k0, k1 = planar.slab_layers(grid.resolution, height, position[2] if len(position) > 2 else 0.0, grid.origin[2])
    k1 = min(k1, grid.shape[2])
    xs = (np.arange(grid.shape[0]) + 0.5) * grid.resolution + grid.origin[0]
    ys = (np.arange(grid.shape[1]) + 0.5) * grid.resolution + grid.origin[1]
    near = np.hypot(xs[:, None] - position[0], ys[None, :] - position[1]) <= radius
    slab = new.cells[:, :, k0:k1]
    slab[near[:, :, None] & (slab == UNKNOWN)] = FREE
    return new


def forget_cells(grid, cells):
    """ Cells of an object that was removed from the world become Free. """
    new = grid.copy()
    cells = np.asarray(cells, dtype=int).reshape((-1, 3))
    if cells.size:
        new.cells[cells[:,0], cells[:,1], cells[:,2]] = FREE
        new.colors[cells[:,0], cells[:,1], cells[:,2]] = ''
    return new


def detect_objects(grid, colors):
    """
    Connected components (6-connectivity) of Occupied cells sharing one of
    the requested colors, colors in sorted order.
    """
    structure = ndimage.generate_binary_structure(3, 1)
    objects = []
    for color in sorted(colors):
        mask = (grid.cells == OCCUPIED) & (grid.colors == color)
        labels, n = ndimage.label(mask, structure=structure)
        for label in range(1, n + 1):
            support = np.argwhere(labels == label)
            centroid = grid.centers(support).mean(axis=0)
            objects.append(DetectedObject(
                    color=color,
                    centroid=tuple(float(c) for c in centroid),
                    height_above_ground=float(centroid[2] - grid.origin[2]),
                    support=tuple(tuple(int(v) for v in c) for c in support)))
    return objects


def heading_of(index, n_headings):
    return float(wrap_angle(2.0 * math.pi * index / n_headings))


def view_gains(grid, poses, sensor_height=0.12, fov_h=math.radians(60.0), fov_v=math.radians(45.0),
               gain_rays_h=12, gain_rays_v=8, gain_range=1.5, batch_size=128):
    """
    Number of distinct Unknown cells seen from every pose (x, y, z, heading).
    Occupied cells stop a ray, Unknown cells do not.
    """
    blocked = grid.cells == OCCUPIED
    unknown = grid.cells == UNKNOWN
    n_cells = int(np.prod(grid.shape))
    gains = np.zeros(len(poses), dtype=int)
    n_rays = gain_rays_h * gain_rays_v
    for batch_start, batch in zip(range(0, len(poses), batch_size), chunklist(list(poses), batch_size)):
        origins, directions = [], []
        for x, y, z, h in batch:
            d = raycast.ray_directions(h, fov_h, fov_v, gain_rays_h, gain_rays_v)
            directions.append(d)
            origins.append(np.broadcast_to([x, y, z + sensor_height], d.shape))
        origins = np.concatenate(origins)
        directions = np.concatenate(directions)
        seen = []
        for ray_inds, cells, t0, t1, _ in raycast.march(
                origins, directions, gain_range, grid.shape, grid.resolution, grid.origin, blocked):
            u = unknown[cells[:,0], cells[:,1], cells[:,2]]
            flat = np.ravel_multi_index(tuple(cells[u].T), grid.shape)
            seen.append((ray_inds[u] // n_rays) * n_cells + flat)
        if seen:
            keys = np.unique(np.concatenate(seen))
            gains[batch_start:batch_start + len(batch)] += np.bincount(keys // n_cells, minlength=len(batch))
    return gains


def view_key(grid, waypoint, n_headings=8):
    """ (i, j, heading index) identifying a candidate view. """
    i, j = planar.cell_of(waypoint.position, grid.resolution, grid.origin[:2])
    step = 2.0 * math.pi / n_headings
    return i, j, int(round((waypoint.heading % (2.0 * math.pi)) / step)) % n_headings


def candidate_views(grid, robot_radius, current_pose, robot_height=0.16, candidate_spacing=2, n_headings=8):
    """
    Reachable candidate views as (i, j, heading index, path cost) tuples in
    lexicographic order.
    """
    floor_z = current_pose[2] if len(current_pose) > 3 else 0.0
    traversable = traversable_map(grid, robot_radius, robot_height, floor_z)
    start = planar.cell_of(current_pose, grid.resolution, grid.origin[:2])
    costs = planar.path_costs(traversable, start)
    reachable = np.isfinite(costs) & traversable
    candidates = []
    for i, j in np.argwhere(reachable):
        if i % candidate_spacing or j % candidate_spacing:
            continue
        for k in range(n_headings):
            candidates.append((int(i), int(j), k, float(costs[i, j])))
    return candidates


@config_def
@docsig
def next_best_view(grid, robot_radius, current_pose, exclude=(), robot_height=0.16, sensor_height=0.12,
                   fov_h=math.radians(60.0), fov_v=math.radians(45.0), gain_rays_h=12, gain_rays_v=8,
                   gain_range=1.5, gain_min=10, candidate_spacing=2, n_headings=8, batch_size=128):
    """
    Greedy next best view.

    Parameters
    ----------
    grid : OccupancyGrid

    robot_radius : float
        Bloat radius of the traversability map the candidates live on.

    current_pose : tuple
        (x, y, z, heading) of the robot base.

    exclude : set
        (i, j, heading index) views not to propose again.

    Returns
    -------
    Waypoint or ExplorationComplete
        The reachable candidate with the largest number of visible Unknown
        cells; ties go to the shorter path, then to lexicographic
        (i, j, heading index) order. ExplorationComplete if the best gain is
        below `gain_min`.

    Raises
    ------
    NoReachableCandidate
        If no candidate cell is reachable at all.
    """
    candidates = candidate_views(grid, robot_radius, current_pose, robot_height,
                                 candidate_spacing, n_headings)
    if not candidates:
        raise NoReachableCandidate('no reachable candidate view from {}'.format(tuple(current_pose[:2])))
    exclude = set(exclude)
    candidates = [c for c in candidates if c[:3] not in exclude]
    if not candidates:
        return ExplorationComplete(0)

    floor_z = current_pose[2] if len(current_pose) > 3 else 0.0
    poses = []
    for i, j, k, _ in candidates:
        x, y = planar.cell_center((i, j), grid.resolution, grid.origin[:2])
        poses.append((x, y, floor_z, heading_of(k, n_headings)))
    gains = view_gains(grid, poses, sensor_height, fov_h, fov_v, gain_rays_h, gain_rays_v,
                       gain_range, batch_size)

    best = min(range(len(candidates)),
               key=lambda n: (-gains[n], candidates[n][3], candidates[n][:3]))
    logger.debug('best view %s with gain %d out of %d candidates',
                 candidates[best][:3], gains[best], len(candidates))
    if gains[best] < gain_min:
        return ExplorationComplete(int(gains[best]))
    x, y, _, h = poses[best]
    return Waypoint((float(x), float(y)), h)


def export_map(grid):
    """ One line per non-Unknown cell: x y z state color. """
    lines = []
    known = np.argwhere(grid.cells != UNKNOWN)
    for (i, j, k), (x, y, z) in zip(known, grid.centers(known)):
        lines.append('{:.3f} {:.3f} {:.3f} {:s} {:s}'.format(
                x, y, z, STATE_NAMES[int(grid.cells[i, j, k])], grid.colors[i, j, k] or '-'))
    return '\n'.join(lines) + ('\n' if lines else '')


def unknown_fraction(grid, region_mask=None):
    cells = grid.cells if region_mask is None else grid.cells[region_mask]
    if cells.size == 0:
        return 0.0
    return float(np.count_nonzero(cells == UNKNOWN)) / cells.size

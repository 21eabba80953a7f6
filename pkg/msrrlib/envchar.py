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
Environment characterization: classify the terrain around a detected object
as Free, Tunnel, High or Stairs and pick the staging waypoint from which the
robot acts on it.
"""

import dataclasses
import enum
import logging
import math

import numpy as np

from msrrlib import planar
from msrrlib.core import SimConfig, docsig, wrap_angle
from msrrlib.errors import NoReachablePoint
from msrrlib.nav import Waypoint

logger = logging.getLogger(__name__)


class EnvironmentType(enum.Enum):
    FREE = 'Free'
    TUNNEL = 'Tunnel'
    HIGH = 'High'
    STAIRS = 'Stairs'

    def __str__(self):
        return self.value

    @classmethod
    def parse(cls, name):
        for t in cls:
            if t.value.lower() == str(name).lower():
                return t
        raise ValueError('Unknown environment type "{}".'.format(name))


class CharacterizationParams(SimConfig):

    def init(self):
        self.update(
                robot_radius=0.16,
                robot_height=0.16,
                cone_half_angle=math.radians(20.0),
                dist_threshold=0.30,
                high_threshold=0.20,
                region_extent=2.0)

    def validate(self):
        for key in ('robot_radius', 'cone_half_angle', 'dist_threshold', 'high_threshold', 'region_extent'):
            if not self[key] > 0:
                raise ValueError('{:s} must be strictly positive.'.format(key))
        if self['cone_half_angle'] >= math.pi/2:
            raise ValueError('cone_half_angle must be smaller than pi/2.')


@dataclasses.dataclass(frozen=True)
class Characterization:
    env_type: EnvironmentType
    staging_waypoint: Waypoint
    closest_reachable_distance: float
    q_cell: tuple


def _maps(grid, obj, robot_pose, params):
    """ Occupied, bloated and reachable planar maps around the object. """
    res = grid.resolution
    origin = grid.origin[:2]
    floor_z = robot_pose[2] if len(robot_pose) > 3 else 0.0
    occupied, free = planar.project(grid.cells, res, params['robot_height'], floor_z, grid.origin[2])
    bloated = planar.bloat(occupied, params['robot_radius'] / res)
    traversable = free & ~bloated

    xs = (np.arange(grid.shape[0]) + 0.5) * res + origin[0]
    ys = (np.arange(grid.shape[1]) + 0.5) * res + origin[1]
    gx, gy = np.meshgrid(xs, ys, indexing='ij')
    ox, oy = obj.centroid[0], obj.centroid[1]
    traversable &= np.hypot(gx - ox, gy - oy) <= params['region_extent']

    robot_cell = planar.cell_of(robot_pose, res, origin)
    inside = 0 <= robot_cell[0] < grid.shape[0] and 0 <= robot_cell[1] < grid.shape[1]
    if inside and traversable[robot_cell]:
        reachable = np.isfinite(planar.path_costs(traversable, robot_cell)) & traversable
    else:
        reachable = traversable
    return occupied, bloated, reachable, gx, gy


@docsig
def characterize(grid, obj, robot_pose, params=None):
    """
    Classify the environment of a detected object.

    The robot-height slab is projected to the floor and bloated by the robot
    radius. Among the reachable cells whose bearing from the object lies
    within `cone_half_angle` of the object-to-robot bearing, the one nearest
    the object is q. With d the planar distance from q to the object:

      d > dist_threshold, object on the ground    -> Tunnel
      d > dist_threshold, object above the ground -> Stairs
      height >= high_threshold                    -> High
      otherwise                                   -> Free

    The object counts as on the ground below half of `high_threshold`.

    Parameters
    ----------
    grid : OccupancyGrid

    obj : DetectedObject

    robot_pose : tuple
        (x, y, heading) or (x, y, z, heading).

    params : CharacterizationParams

    Returns
    -------
    Characterization
        With the staging waypoint at q, facing the object.

    Raises
    ------
    NoReachablePoint
        If no reachable cell lies inside the cone.
    """
    params = CharacterizationParams() if params is None else params
    occupied, bloated, reachable, gx, gy = _maps(grid, obj, robot_pose, params)
    ox, oy = obj.centroid[0], obj.centroid[1]
    line_of_sight = math.atan2(robot_pose[1] - oy, robot_pose[0] - ox)

    cells = np.argwhere(reachable)
    if cells.size == 0:
        raise NoReachablePoint('no reachable cell around object at ({:.2f}, {:.2f})'.format(ox, oy))
    dx = gx[reachable] - ox
    dy = gy[reachable] - oy
    bearing_diff = np.abs(wrap_angle(np.arctan2(dy, dx) - line_of_sight))
    in_cone = bearing_diff <= params['cone_half_angle'] + 1e-9
    if not np.any(in_cone):
        raise NoReachablePoint('no reachable cell within the cone toward the robot')

    distance = np.hypot(dx, dy)
    order = np.lexsort((cells[:,1], cells[:,0], np.round(bearing_diff, 9), np.round(distance, 9)))
    best = next(n for n in order if in_cone[n])
    q = (int(cells[best, 0]), int(cells[best, 1]))
    d = float(distance[best])

    height = obj.height_above_ground
    on_ground = height < params['high_threshold'] / 2.0
    if d > params['dist_threshold']:
        env_type = EnvironmentType.TUNNEL if on_ground else EnvironmentType.STAIRS
    elif height >= params['high_threshold']:
        env_type = EnvironmentType.HIGH
    else:
        env_type = EnvironmentType.FREE

    qx, qy = planar.cell_center(q, grid.resolution, grid.origin[:2])
    waypoint = Waypoint((float(qx), float(qy)), math.atan2(oy - qy, ox - qx))
    logger.debug('object %s at (%.2f, %.2f): %s, q=%s, d=%.3f', obj.color, ox, oy, env_type, q, d)
    return Characterization(env_type, waypoint, d, q)


def debug_dump(grid, obj, robot_pose, result, params=None):
    """
    Text rendering of the planar maps used by `characterize`: '#' occupied,
    'x' unreachable by bloating, '.' reachable, 'q' the chosen cell, 'o' the
    object, 'r' the robot. Rows run from high to low y.
    """
    params = CharacterizationParams() if params is None else params
    occupied, bloated, reachable, _, _ = _maps(grid, obj, robot_pose, params)
    chars = np.full(occupied.shape, ' ', dtype='<U1')
    chars[reachable] = '.'
    chars[bloated & ~occupied] = 'x'
    chars[occupied] = '#'
    chars[result.q_cell] = 'q'
    for cell, mark in ((planar.cell_of(obj.centroid, grid.resolution, grid.origin[:2]), 'o'),
                       (planar.cell_of(robot_pose, grid.resolution, grid.origin[:2]), 'r')):
        if 0 <= cell[0] < chars.shape[0] and 0 <= cell[1] < chars.shape[1]:
            chars[cell] = mark
    return '\n'.join(''.join(chars[:, j]) for j in range(chars.shape[1] - 1, -1, -1)) + '\n'

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
Planar navigation for drive-capable configurations: A* on the bloated
robot-height projection of the belief map, pure-pursuit path following and
the differential-drive wheel mapping.
"""

import dataclasses
import heapq
import logging
import math

import numpy as np

from msrrlib import planar
from msrrlib.core import SimConfig, config_def, docsig, wrap_angle
from msrrlib.errors import Unreachable

logger = logging.getLogger(__name__)


class NavConfig(SimConfig):

    def init(self):
        self.update(
                robot_radius=0.16,
                robot_height=0.16,
                lookahead=0.16,
                v_max=0.15,
                w_max=1.0,
                goal_tolerance=0.04,
                heading_tolerance=0.05,
                rotate_threshold=math.pi/4,
                turn_gain=2.0)

    def validate(self):
        for key in ('robot_radius', 'lookahead', 'v_max', 'w_max', 'goal_tolerance'):
            if self[key] <= 0:
                raise ValueError('{:s} must be positive.'.format(key))


@dataclasses.dataclass(frozen=True)
class Waypoint:
    position: tuple
    heading: float = None

    def distance(self, pose):
        return math.hypot(self.position[0] - pose[0], self.position[1] - pose[1])


@dataclasses.dataclass(frozen=True)
class DriveCommand:
    v: float
    omega: float

    def is_stop(self):
        return self.v == 0.0 and self.omega == 0.0


STOP = DriveCommand(0.0, 0.0)


def traversable_map(grid, robot_radius, robot_height=0.16, floor_z=0.0):
    """
    Free cells of the robot-height slab that are not within `robot_radius`
    of an Occupied cell. Unknown cells are never traversable.
    """
    occupied, free = planar.project(
            grid.cells, grid.resolution, robot_height, floor_z, grid.origin[2])
    return free & ~planar.bloat(occupied, robot_radius / grid.resolution)


def octile(a, b):
    di, dj = abs(a[0] - b[0]), abs(a[1] - b[1])
    return max(di, dj) + (math.sqrt(2) - 1) * min(di, dj)


def astar(traversable, start, goal):
    """
    8-connected A* without corner cutting. Returns the list of cells from
    `start` to `goal` and its cost in cells, or (None, inf).
    """
    start, goal = tuple(start), tuple(goal)
    g = {start: 0.0}
    came_from = {}
    open_set = [(octile(start, goal), 0.0, start)]
    closed = set()
    while open_set:
        _, cost, current = heapq.heappop(open_set)
        if current in closed:
            continue
        if current == goal:
            path = [current]
            while current in came_from:
                current = came_from[current]
                path.append(current)
            return path[::-1], cost
        closed.add(current)
        i, j = current
        for di, dj, w in planar.MOVES:
            if not planar.can_step(traversable, i, j, di, dj):
                continue
            neighbor = (i + di, j + dj)
            tentative = cost + w
            if tentative < g.get(neighbor, math.inf) - 1e-12:
                g[neighbor] = tentative
                came_from[neighbor] = current
                heapq.heappush(open_set, (tentative + octile(neighbor, goal), tentative, neighbor))
    return None, math.inf


@config_def
@docsig
def plan_path(grid, start, goal, robot_radius=0.16, robot_height=0.16, floor_z=0.0):
    """
    Collision-free path on the belief map.

    Parameters
    ----------
    grid : OccupancyGrid

    start : sequence
        Current (x, y[, ...]) position in meters.

    goal : Waypoint

    robot_radius : float
        Obstacles are bloated by this radius before planning.

    Returns
    -------
    path : list of Waypoint
        Cell centers after the start cell; the last waypoint is the goal
        itself, with the goal heading.

    Raises
    ------
    Unreachable
        If the goal cell is not traversable or not connected to the start.
    """
    origin = grid.origin[:2]
    traversable = traversable_map(grid, robot_radius, robot_height, floor_z)
    s = planar.cell_of(start, grid.resolution, origin)
    t = planar.cell_of(goal.position, grid.resolution, origin)
    for name, c in (('start', s), ('goal', t)):
        if not (0 <= c[0] < traversable.shape[0] and 0 <= c[1] < traversable.shape[1]):
            raise Unreachable('{:s} {} lies outside the map'.format(name, c))
    if not traversable[t]:
        raise Unreachable('goal cell {} is not traversable'.format(t))
    cells, cost = astar(traversable, s, t)
    if cells is None:
        raise Unreachable('no path from {} to {}'.format(s, t))
    logger.debug('path of %d cells, cost %.2f', len(cells), cost)
    path = [Waypoint(tuple(planar.cell_center(c, grid.resolution, origin))) for c in cells[1:-1]]
    path.append(Waypoint(tuple(goal.position[:2]), goal.heading))
    return path


def path_length(path, start=None):
    points = [p.position[:2] for p in path]
    if start is not None:
        points.insert(0, tuple(start[:2]))
    return float(sum(math.hypot(b[0] - a[0], b[1] - a[1]) for a, b in zip(points[:-1], points[1:])))


def _lookahead_point(path, pose, lookahead):
    distances = [p.distance(pose) for p in path]
    nearest = int(np.argmin(distances))
    for p, d in zip(path[nearest:], distances[nearest:]):
        if d >= lookahead:
            return p
    return path[-1]


@config_def
def follow_path(path, current_pose, lookahead=0.16, v_max=0.15, w_max=1.0,
                goal_tolerance=0.04, heading_tolerance=0.05,
                rotate_threshold=math.pi/4, turn_gain=2.0):
    """
    Pure-pursuit drive command toward the lookahead point of `path` from
    `current_pose` (x, y, heading). The robot turns in place when the target
    bearing exceeds `rotate_threshold`, slows down near the final waypoint,
    and finally turns to the goal heading if one is given.
    """
    if not path:
        raise ValueError('Cannot follow an empty path.')
    x, y, h = current_pose[0], current_pose[1], current_pose[-1]
    goal = path[-1]
    remaining = goal.distance((x, y))

    if remaining <= goal_tolerance:
        if goal.heading is None:
            return STOP
        err = float(wrap_angle(goal.heading - h))
        if abs(err) <= heading_tolerance:
            return STOP
        return DriveCommand(0.0, float(np.clip(turn_gain*err, -w_max, w_max)))

    target = _lookahead_point(path, (x, y), lookahead)
    dx, dy = target.position[0] - x, target.position[1] - y
    alpha = float(wrap_angle(math.atan2(dy, dx) - h))
    if abs(alpha) > rotate_threshold:
        return DriveCommand(0.0, float(np.clip(turn_gain*alpha, -w_max, w_max)))

    v = min(v_max, remaining)
    distance = max(math.hypot(dx, dy), 1e-9)
    omega = v * 2.0 * math.sin(alpha) / distance
    return DriveCommand(v, float(np.clip(omega, -w_max, w_max)))


def to_wheel_speeds(cmd, track_width, wheel_radius):
    """
    Wheel angular velocities (left, right) in rad/s.

    >>> to_wheel_speeds(DriveCommand(0.1, 0.5), 0.16, 0.04)
    (1.5, 3.5)
    """
    if wheel_radius <= 0:
        raise ValueError('wheel_radius must be positive.')
    left = (cmd.v - cmd.omega * track_width / 2.0) / wheel_radius
    right = (cmd.v + cmd.omega * track_width / 2.0) / wheel_radius
    return round(left, 12), round(right, 12)

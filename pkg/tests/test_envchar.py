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

import math

import numpy as np
import pytest

from msrrlib import envchar
from msrrlib.envchar import CharacterizationParams, EnvironmentType
from msrrlib.errors import NoReachablePoint
from msrrlib.mapping import OccupancyGrid, detect_objects
from msrrlib.planar import FREE, OCCUPIED, UNKNOWN

ROBOT = (0.6, 1.24, 0.0, 0.0)


def _grid(object_cell, blocks=()):
    grid = OccupancyGrid((30, 30, 5), 0.08)
    grid.cells[:] = FREE
    for lo, hi in blocks:
        grid.cells[lo[0]:hi[0]+1, lo[1]:hi[1]+1, lo[2]:hi[2]+1] = OCCUPIED
        grid.colors[lo[0]:hi[0]+1, lo[1]:hi[1]+1, lo[2]:hi[2]+1] = 'grey'
    grid.cells[object_cell] = OCCUPIED
    grid.colors[object_cell] = 'pink'
    obj, = detect_objects(grid, ['pink'])
    return grid, obj


def test_free():
    grid, obj = _grid((20, 15, 0))
    result = envchar.characterize(grid, obj, ROBOT)
    assert result.env_type == EnvironmentType.FREE
    assert result.q_cell == (18, 15)
    assert result.closest_reachable_distance == pytest.approx(0.16)
    assert result.staging_waypoint.heading == pytest.approx(0.0)


def test_tunnel():
    walls = [((17, 14, 0), (23, 14, 1)), ((17, 16, 0), (23, 16, 1))]
    grid, obj = _grid((20, 15, 0), walls)
    result = envchar.characterize(grid, obj, ROBOT)
    assert result.env_type == EnvironmentType.TUNNEL
    assert result.q_cell == (15, 15)
    assert result.closest_reachable_distance == pytest.approx(0.40)


def test_high():
    grid, obj = _grid((15, 15, 3), [((15, 15, 0), (15, 15, 2))])
    result = envchar.characterize(grid, obj, ROBOT)
    assert result.env_type == EnvironmentType.HIGH
    assert result.closest_reachable_distance == pytest.approx(0.16)


def test_stairs():
    grid, obj = _grid((18, 15, 3), [((16, 10, 0), (19, 20, 2))])
    result = envchar.characterize(grid, obj, ROBOT)
    assert result.env_type == EnvironmentType.STAIRS
    assert result.q_cell == (14, 15)


def test_no_reachable_point():
    grid, obj = _grid((20, 15, 0))
    grid.cells[grid.cells == FREE] = UNKNOWN
    with pytest.raises(NoReachablePoint):
        envchar.characterize(grid, obj, ROBOT)


def test_debug_dump_marks():
    grid, obj = _grid((20, 15, 0))
    result = envchar.characterize(grid, obj, ROBOT)
    dump = envchar.debug_dump(grid, obj, ROBOT, result)
    rows = dump.splitlines()
    assert len(rows) == 30
    assert rows[29 - 15][18] == 'q'
    assert rows[29 - 15][20] == 'o'
    assert rows[29 - 15][7] == 'r'


def test_params_and_parsing():
    with pytest.raises(ValueError):
        CharacterizationParams(cone_half_angle=math.pi/2)
    with pytest.raises(ValueError):
        CharacterizationParams(dist_threshold=0.0)
    assert EnvironmentType.parse('stairs') is EnvironmentType.STAIRS
    assert str(EnvironmentType.HIGH) == 'High'
    with pytest.raises(ValueError):
        EnvironmentType.parse('swamp')


SCENES = {
    EnvironmentType.FREE: ((20, 15, 0), []),
    EnvironmentType.TUNNEL: ((20, 15, 0), [((17, 14, 0), (23, 14, 1)), ((17, 16, 0), (23, 16, 1))]),
    EnvironmentType.HIGH: ((15, 15, 3), [((15, 15, 0), (15, 15, 2))]),
    EnvironmentType.STAIRS: ((18, 15, 3), [((16, 10, 0), (19, 20, 2))]),
}


def _shifted(env_type, dx, dy):
    cell, blocks = SCENES[env_type]

    def move(c):
        return (c[0] + dx, c[1] + dy, c[2])

    return _grid(move(cell), [(move(lo), move(hi)) for lo, hi in blocks])


@pytest.mark.parametrize('env_type', list(SCENES))
def test_robust_to_small_displacements(env_type):
    rng = np.random.default_rng(list(SCENES).index(env_type))
    correct = 0
    for _ in range(20):
        dx, dy = (int(v) for v in rng.integers(-1, 2, size=2))
        grid, obj = _shifted(env_type, dx, dy)
        robot = (ROBOT[0] + rng.uniform(-0.08, 0.08), ROBOT[1] + rng.uniform(-0.08, 0.08), 0.0, 0.0)
        correct += envchar.characterize(grid, obj, robot).env_type == env_type
    assert correct >= 19


def _rotated(grid):
    rotated = OccupancyGrid(grid.shape, grid.resolution)
    rotated.cells[:] = np.rot90(grid.cells, axes=(0, 1))
    rotated.colors[:] = np.rot90(grid.colors, axes=(0, 1))
    return rotated


@pytest.mark.parametrize('env_type', list(SCENES))
def test_rotation_equivariance(env_type):
    grid, obj = _shifted(env_type, 0, 0)
    result = envchar.characterize(grid, obj, ROBOT)

    # a quarter turn about the grid center maps (x, y) to (L - y, x)
    side = grid.shape[0] * grid.resolution
    rotated = _rotated(grid)
    rotated_obj, = detect_objects(rotated, ['pink'])
    assert rotated_obj.centroid[:2] == pytest.approx((side - obj.centroid[1], obj.centroid[0]))
    robot = (side - ROBOT[1], ROBOT[0], 0.0, ROBOT[3] + math.pi/2)
    turned = envchar.characterize(rotated, rotated_obj, robot)

    assert turned.env_type == result.env_type == env_type
    assert turned.q_cell == (grid.shape[1] - 1 - result.q_cell[1], result.q_cell[0])
    assert turned.closest_reachable_distance == pytest.approx(result.closest_reachable_distance)
    heading = turned.staging_waypoint.heading - result.staging_waypoint.heading - math.pi/2
    assert math.cos(heading) == pytest.approx(1.0)


def test_bloating_grows_with_radius():
    grid, obj = _grid((20, 15, 0))
    previous_bloated, previous_distance = None, 0.0
    for radius in (0.08, 0.12, 0.16, 0.20, 0.24):
        params = CharacterizationParams(robot_radius=radius)
        _, bloated, reachable, _, _ = envchar._maps(grid, obj, ROBOT, params)
        assert not np.any(reachable & bloated)
        if previous_bloated is not None:
            assert np.all(bloated >= previous_bloated)
        result = envchar.characterize(grid, obj, ROBOT, params)
        assert result.closest_reachable_distance >= previous_distance - 1e-9
        previous_bloated, previous_distance = bloated, result.closest_reachable_distance
    assert previous_distance == pytest.approx(0.24)

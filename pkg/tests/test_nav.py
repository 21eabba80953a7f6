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

import doctest
import itertools
import math

import networkx as nx
import numpy as np
import pytest

from msrrlib import nav, planar
from msrrlib.errors import Unreachable
from msrrlib.mapping import OccupancyGrid
from msrrlib.nav import DriveCommand, NavConfig, Waypoint
from msrrlib.planar import FREE, OCCUPIED


def _open_grid(shape=(30, 30, 3), resolution=0.08):
    grid = OccupancyGrid(shape, resolution)
    grid.cells[:] = FREE
    grid.cells[0, :, :] = OCCUPIED
    grid.cells[-1, :, :] = OCCUPIED
    grid.cells[:, 0, :] = OCCUPIED
    grid.cells[:, -1, :] = OCCUPIED
    return grid


def test_doctests():
    failures, _ = doctest.testmod(nav)
    assert failures == 0


def test_plan_path_reaches_goal():
    grid = _open_grid()
    grid.cells[15, 5:27, :] = OCCUPIED
    goal = Waypoint((2.0, 1.2), math.pi/2)
    path = nav.plan_path(grid, (0.6, 1.2), goal, **NavConfig())
    assert path[-1] == goal
    traversable = nav.traversable_map(grid, 0.16, 0.16)
    for p in path[:-1]:
        assert traversable[planar.cell_of(p.position, grid.resolution)]
    assert nav.path_length(path, (0.6, 1.2)) > 1.4


def _cell_graph(traversable):
    """ 8-connected cell graph; a diagonal needs both side cells free. """
    graph = nx.Graph()
    n, m = traversable.shape
    for i, j in zip(*np.nonzero(traversable)):
        i, j = int(i), int(j)
        graph.add_node((i, j))
        for di, dj in itertools.product((-1, 0, 1), repeat=2):
            a, b = i + di, j + dj
            if (di, dj) == (0, 0) or not (0 <= a < n and 0 <= b < m) or not traversable[a, b]:
                continue
            if di and dj and not (traversable[a, j] and traversable[i, b]):
                continue
            graph.add_edge((i, j), (a, b), weight=math.hypot(di, dj))
    return graph


@pytest.mark.parametrize('seed', range(50))
def test_astar_cost_matches_dijkstra(seed):
    rng = np.random.default_rng(seed)
    traversable = rng.random((32, 32)) > 0.3
    traversable[0, 0] = True
    graph = _cell_graph(traversable)
    lengths = nx.single_source_dijkstra_path_length(graph, (0, 0))
    goals = np.argwhere(traversable)
    for goal in goals[rng.choice(len(goals), size=10, replace=False)]:
        goal = tuple(int(v) for v in goal)
        cells, cost = nav.astar(traversable, (0, 0), goal)
        if goal not in lengths:
            assert cells is None
            continue
        assert cost == pytest.approx(lengths[goal])
        assert cells[0] == (0, 0) and cells[-1] == goal
        assert sum(graph.edges[a, b]['weight'] for a, b in zip(cells, cells[1:])) == pytest.approx(cost)


@pytest.mark.parametrize('seed', range(50))
def test_path_keeps_clearance(seed):
    rng = np.random.default_rng(seed)
    grid = _open_grid((32, 32, 3))
    grid.cells[rng.random((32, 32)) < 0.04] = OCCUPIED
    config = NavConfig()
    traversable = nav.traversable_map(grid, config['robot_radius'], config['robot_height'])
    graph = _cell_graph(traversable)
    if graph.number_of_nodes() < 2:
        return
    nodes = sorted(graph.nodes)
    start = nodes[int(rng.integers(len(nodes)))]
    component = sorted(nx.node_connected_component(graph, start))
    goal = component[int(rng.integers(len(component)))]
    res = grid.resolution
    path = nav.plan_path(grid, planar.cell_center(start, res), Waypoint(tuple(planar.cell_center(goal, res))),
                         **config)

    occupied = np.argwhere(np.any(grid.cells == OCCUPIED, axis=2))
    for p in path:
        clearance = np.min(np.hypot(occupied[:, 0] + 0.5 - p.position[0]/res,
                                    occupied[:, 1] + 0.5 - p.position[1]/res)) * res
        assert clearance >= config['robot_radius'] - 1e-9
    assert planar.cell_of(path[-1].position, res) == goal


def test_plan_path_unreachable():
    grid = _open_grid()
    grid.cells[15, :, :] = OCCUPIED
    with pytest.raises(Unreachable):
        nav.plan_path(grid, (0.6, 1.2), Waypoint((2.0, 1.2)))
    with pytest.raises(Unreachable):
        nav.plan_path(grid, (0.6, 1.2), Waypoint((1.2, 1.2)))
    with pytest.raises(Unreachable):
        nav.plan_path(grid, (0.6, 1.2), Waypoint((9.0, 1.2)))


def test_follow_path_turns_then_drives():
    path = [Waypoint((1.0, 0.0)), Waypoint((2.0, 0.0), 0.0)]
    cmd = nav.follow_path(path, (0.0, 0.0, math.pi))
    assert cmd.v == 0.0 and cmd.omega != 0.0
    cmd = nav.follow_path(path, (0.0, 0.0, 0.0))
    assert cmd.v == pytest.approx(0.15) and cmd.omega == pytest.approx(0.0)
    assert nav.follow_path(path, (2.0, 0.0, 0.0)).is_stop()
    cmd = nav.follow_path(path, (2.0, 0.0, 0.5))
    assert cmd.v == 0.0 and cmd.omega == pytest.approx(-1.0)
    with pytest.raises(ValueError):
        nav.follow_path([], (0.0, 0.0, 0.0))


def test_to_wheel_speeds_inverts_to_twist():
    wl, wr = nav.to_wheel_speeds(DriveCommand(0.12, -0.4), 0.16, 0.04)
    assert 0.04 * (wl + wr) / 2 == pytest.approx(0.12)
    assert 0.04 * (wr - wl) / 0.16 == pytest.approx(-0.4)

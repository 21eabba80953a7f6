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

from conftest import demo_path, scenario_dict
from msrrlib import raycast, worldsim
from msrrlib.envchar import EnvironmentType
from msrrlib.errors import BehaviorFailure, ParseError, UnknownModule
from msrrlib.worldsim import FaultProfile, Stairs, scenario_from_dict, step_world


def _car_world(library, **overrides):
    scenario = scenario_from_dict(scenario_dict(**overrides))
    car = library.configuration('Car')
    return scenario.build_world(car.layout(), 's0')


def test_cast_stops_at_first_blocked_cell():
    blocked = np.zeros((10, 1, 1), dtype=bool)
    blocked[5, 0, 0] = True
    ranges, hits = raycast.cast([[0.04, 0.04, 0.04]], [[1.0, 0.0, 0.0]], 3.0, blocked, 0.08)
    assert ranges[0] == pytest.approx(0.36)
    assert tuple(hits[0]) == (5, 0, 0)


def test_scenario_errors():
    d = scenario_dict()
    del d['size']
    with pytest.raises(ParseError):
        scenario_from_dict(d)
    with pytest.raises(ParseError):
        scenario_from_dict(scenario_dict(fault={'cosmic': 0.1}))
    with pytest.raises(ParseError):
        scenario_from_dict(scenario_dict(objects=[{'id': 'a', 'color': 'red'}]))


@pytest.mark.parametrize('fault', [{'hardware': 1.5}, {'network': -0.1}, {'perception': 'often'}])
def test_scenario_fault_out_of_range(fault):
    with pytest.raises(ParseError) as e:
        scenario_from_dict(scenario_dict(fault=fault))
    assert e.value.field == 'fault'


@pytest.mark.parametrize('n', [1, 2, 3])
def test_demo_scenarios_load(n, library):
    scenario = worldsim.load_scenario(demo_path(n, 'scenario.json'))
    config = library.configuration(scenario.initial_configuration)
    world = scenario.build_world(config.layout(), 's0')
    assert world.shape == tuple(scenario.size)
    assert world.tick == 0


def test_build_world_lays_out_cluster(library):
    world = _car_world(library)
    assert world.module('m2').position == pytest.approx((0.6 + 0.16, 1.2, 0.0))
    assert world.module('m3').heading == pytest.approx(-math.pi/2)
    assert set(world.cluster) == {'m1', 'm2', 'm3', 'm4'}
    with pytest.raises(UnknownModule):
        world.module('m9')


def test_step_world_drives_cluster_straight(library):
    world = _car_world(library)
    state = world
    for _ in range(10):
        state = step_world(state, {'m3': (1.0, 1.0), 'm4': (1.0, 1.0)}, 0.1)
    assert state.tick == 10
    assert world.tick == 0
    assert state.robot_pose[0] == pytest.approx(0.6 + 0.04)
    assert state.robot_pose[1] == pytest.approx(1.2)
    assert state.module('m2').position[0] == pytest.approx(0.6 + 0.04 + 0.16)
    with pytest.raises(UnknownModule):
        step_world(world, {'m9': (1.0, 1.0)}, 0.1)
    with pytest.raises(ValueError):
        step_world(world, {}, 0.0)


def test_render_depth_sees_wall(library):
    wall = {'min': [10, 1, 0], 'max': [10, 28, 4], 'color': 'blue'}
    d = scenario_dict()
    d['boxes'] = d['boxes'] + [wall]
    world = scenario_from_dict(d).build_world(library.configuration('Car').layout(), 's0')
    frame = worldsim.render_depth(world)
    hits = frame.hits
    assert hits
    ranges = [r for _, r, _ in hits]
    assert min(ranges) >= (0.8 - 0.6) - 1e-6
    assert min(ranges) < 0.21
    assert 'blue' in set(c for _, _, c in hits)


def test_pick_up_and_drop(library, entry):
    world = _car_world(library, objects=[{'id': 'block', 'color': 'pink', 'position': [0.8, 1.2, 0.04]}])
    with pytest.raises(BehaviorFailure) as e:
        worldsim.apply_behavior_effect(world, entry('Car.pickUp'), EnvironmentType.TUNNEL, 'block')
    assert e.value.reason == 'env_mismatch'

    held = worldsim.apply_behavior_effect(world, entry('Car.pickUp'), EnvironmentType.FREE, 'block')
    assert held.object('block').carried_by == 's0'
    assert world.object('block').carried_by is None
    moved = step_world(held, {'m3': (1.0, 1.0), 'm4': (1.0, 1.0)}, 0.5)
    assert moved.object('block').position[0] == pytest.approx(0.8 + 0.02)

    dropped = worldsim.apply_behavior_effect(moved, entry('Car.drop'), EnvironmentType.FREE)
    block = dropped.object('block')
    assert block.carried_by is None
    assert block.position[0] == pytest.approx(moved.robot_pose[0] + 0.08)
    with pytest.raises(BehaviorFailure):
        worldsim.apply_behavior_effect(dropped, entry('Car.drop'), EnvironmentType.FREE)


def test_drop_releases_whole_load(library, entry):
    world = _car_world(library, objects=[{'id': 'circuit', 'color': 'grey', 'carried': True},
                                         {'id': 'battery', 'color': 'grey', 'carried': True}])
    assert len(world.carried_objects()) == 2
    dropped = worldsim.apply_behavior_effect(world, entry('Car.drop'), EnvironmentType.FREE)
    assert dropped.carried_objects() == []
    assert dropped.object('circuit').position == dropped.object('battery').position
    assert len(world.carried_objects()) == 2


def test_pick_up_out_of_range(library, entry):
    world = _car_world(library, objects=[{'id': 'block', 'color': 'pink', 'position': [1.2, 1.2, 0.04]}])
    with pytest.raises(BehaviorFailure) as e:
        worldsim.apply_behavior_effect(world, entry('Car.pickUp'), EnvironmentType.FREE, 'block')
    assert e.value.reason == 'no_target'


@pytest.mark.parametrize('rise,ok', [(0.08, True), (0.12, False)])
def test_climb_up_rated_rise(library, entry, rise, ok):
    stairs = {'base': [0.7, 1.2], 'heading': 0.0, 'rise': rise, 'run': 0.16, 'steps': 3, 'width': 0.56}
    scenario = scenario_from_dict(scenario_dict(stairs=[stairs]))
    world = scenario.build_world(library.configuration('Snake').layout(), 's0')
    if ok:
        up = worldsim.apply_behavior_effect(world, entry('Snake.climbUp'), EnvironmentType.STAIRS)
        assert up.robot_pose[2] == pytest.approx(3 * rise)
        down = worldsim.apply_behavior_effect(up, entry('Snake.climbDown'), EnvironmentType.STAIRS)
        assert down.robot_pose[2] == 0.0
    else:
        with pytest.raises(BehaviorFailure) as e:
            worldsim.apply_behavior_effect(world, entry('Snake.climbUp'), EnvironmentType.STAIRS)
        assert e.value.reason == 'env_mismatch'


def test_stairs_height():
    s = Stairs(base=(0.0, 0.0), heading=0.0, rise=0.08, run=0.16, steps=3, width=0.5)
    h = s.height_at(np.array([[-0.1, 0.0], [0.1, 0.0], [0.3, 0.0], [0.6, 0.0], [0.1, 0.4]]))
    assert h == pytest.approx([0.0, 0.08, 0.16, 0.24, 0.0])


def test_zone_poses_deterministic(library):
    world = _car_world(library)
    world.config['pose_noise_std'] = 0.005
    a = worldsim.reconfig_zone_poses(world, 's0')
    b = worldsim.reconfig_zone_poses(world, 's0')
    assert [m.module_id for m in a] == ['m1', 'm2', 'm3', 'm4']
    assert a == b
    assert a[0].position != world.module('m1').position


def test_fault_profile():
    with pytest.raises(ValueError):
        FaultProfile(hardware=1.5)
    rng = np.random.default_rng(0)
    assert FaultProfile().draw(rng) is None
    assert FaultProfile(navigation=1.0).draw(rng) == 'navigation'

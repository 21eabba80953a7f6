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

import dataclasses
import json
import math

import numpy as np
import pytest

from conftest import scenario_dict
from msrrlib import reconfig
from msrrlib.designlib import ConfigurationGraph
from msrrlib.errors import InjectedFault, ParseError, PlanError, ReconfigFailure
from msrrlib.reconfig import (AlignAndDock, Detach, MoveTo, ReconfigConfig, ReconfigurationPlan,
                              execute_plan, face_isomorphism, validate_plan)
from msrrlib.worldsim import FaultProfile, WorldConfig, scenario_from_dict

M4_PATH = ((0.08, -0.20), (0.34, -0.16), (0.34, 0.0))


def _world(library, name='Car', **world_config):
    scenario = scenario_from_dict(scenario_dict())
    config = library.configuration(name)
    return scenario.build_world(config.layout(), 's0', WorldConfig(resolution=0.08, **world_config))


def _plan(*steps, to='Proboscis'):
    return ReconfigurationPlan('Car', to, tuple(steps))


def test_shipped_plans_validate(library, plans):
    assert len(plans) == 6
    for plan in plans.values():
        assert validate_plan(plan, library)


def test_identity_plan(library):
    assert validate_plan(ReconfigurationPlan('Car', 'Car'), library)


@pytest.mark.parametrize('steps,reason', [
    ((Detach('m4', 'top'), MoveTo('m4', M4_PATH), AlignAndDock('m4', 'm1', 'top', 'bottom')), 'face_conflict'),
    ((Detach('m2', 'top'),), 'face_conflict'),
    ((MoveTo('m4', M4_PATH),), 'face_conflict'),
    ((Detach('m4', 'top'), MoveTo('m4', ((0.9, 0.0),))), 'out_of_zone'),
    ((Detach('m4', 'top'), MoveTo('m4', ((0.08, 0.20),))), 'collision'),
    ((Detach('m4', 'top'), MoveTo('m4', M4_PATH)), 'topology_mismatch'),
    ((), 'topology_mismatch'),
])
def test_plan_errors(library, steps, reason):
    with pytest.raises(PlanError) as e:
        validate_plan(_plan(*steps), library)
    assert e.value.reason == reason


def test_unknown_configuration(library):
    with pytest.raises(PlanError) as e:
        validate_plan(ReconfigurationPlan('Car', 'Tripod'), library)
    assert e.value.reason == 'topology_mismatch'


def test_plan_files(tmp_path):
    path = tmp_path / 'plans.json'
    path.write_text('')
    assert reconfig.load_plans(str(path)) == {}
    plans = reconfig.plans_from_dict({'plans': [{'from': 'A', 'to': 'B', 'steps': [
            {'op': 'move', 'module': 'm1', 'waypoints': [[0.1, 0.0]]}]}]})
    assert plans[('A', 'B')].steps == (MoveTo('m1', ((0.1, 0.0),)),)
    for bad in [{'plans': [{'to': 'B'}]},
                {'plans': [{'from': 'A', 'to': 'B', 'steps': [{'op': 'jump', 'module': 'm1'}]}]},
                {'plans': [{'from': 'A', 'to': 'B', 'steps': [{'op': 'detach', 'module': 'm1'}]}]},
                {'plans': [{'from': 'A', 'to': 'B', 'steps': [{'op': 'move', 'module': 'm1', 'waypoints': []}]}]}]:
        with pytest.raises(ParseError):
            reconfig.plans_from_dict(bad)
    path.write_text(json.dumps({'plans': [{'from': 'A'}]}))
    with pytest.raises(ParseError):
        reconfig.load_plans(str(path))


def test_face_isomorphism(library):
    car = library.configuration('Car')
    assert face_isomorphism(car, car.copy()) == dict((m, m) for m in car.modules())
    swapped = ConfigurationGraph('swapped', modules=[dict(id=m, kind=car.kind(m)) for m in car.modules()],
                                 connections=[('s0', 'front', 'm1', 'bottom'), ('m1', 'top', 'm2', 'bottom'),
                                              ('m1', 'left', 'm4', 'top'), ('m1', 'right', 'm3', 'top')])
    mapping = face_isomorphism(car, swapped)
    assert mapping['m3'] == 'm4' and mapping['m4'] == 'm3'
    assert face_isomorphism(car, library.configuration('Proboscis')) is None
    assert face_isomorphism(car, library.configuration('Snake')) is None


def test_dock_pose():
    position, heading, normal = reconfig.dock_pose((0.16, 0.0), 0.0, 0.0, math.pi)
    assert position == pytest.approx((0.24, 0.0))
    assert heading == pytest.approx(0.0)
    position, heading, normal = reconfig.dock_pose((0.08, 0.0), 0.0, math.pi/2, 0.0)
    assert position == pytest.approx((0.08, 0.08))
    assert heading == pytest.approx(-math.pi/2)


def _check_log(events, modules):
    assert events[-1].kind == 'verify_ok'
    for module in modules:
        kinds = [e.kind for e in events if e.module_id == module]
        assert kinds[0] == 'detached' and kinds[-1] == 'docked'
        assert kinds.index('aligned') == len(kinds) - 2
    ticks = [e.tick for e in events]
    assert ticks == sorted(ticks)


def test_car_to_proboscis(library, plans):
    world = _world(library)
    result = execute_plan(plans[('Car', 'Proboscis')], world, library)
    _check_log(result.events, ['m4'])
    assert [e.kind for e in result.events].count('waypoint_reached') == 3
    assert result.id_map == dict((m, m) for m in library.configuration('Proboscis').modules())
    assert result.world.cluster['m4'] == pytest.approx((0.24, 0.0, 0.0), abs=1e-9)
    assert result.world.module('m4').position[:2] == pytest.approx((0.6 + 0.24, 1.2))
    assert result.ticks == result.world.tick - world.tick > 0
    assert result.world.robot_pose == world.robot_pose


@pytest.mark.parametrize('seed', range(20))
def test_noisy_docking(library, plans, seed):
    world = dataclasses.replace(_world(library, pose_noise_std=0.005), rng_seed=seed)
    result = execute_plan(plans[('Car', 'Proboscis')], world, library)
    assert result.events[-1].kind == 'verify_ok'


@pytest.mark.parametrize('pair', [('Scorpion', 'Snake'), ('Snake', 'Scorpion'), ('Car', 'Scorpion')])
def test_multi_module_plans(library, plans, pair):
    world = _world(library, pair[0])
    plan = plans[pair]
    result = execute_plan(plan, world, library)
    _check_log(result.events, plan.modules())
    assert set(result.id_map) == set(library.configuration(pair[1]).modules())


def test_module_out_of_zone(library):
    plan = _plan(Detach('m4', 'top'), MoveTo('m4', ((0.08, -0.40),)))
    with pytest.raises(ReconfigFailure) as e:
        execute_plan(plan, _world(library), library)
    assert e.value.reason == 'module_out_of_zone'


def test_module_timeout(library, plans):
    with pytest.raises(ReconfigFailure) as e:
        execute_plan(plans[('Car', 'Proboscis')], _world(library), library,
                     config=ReconfigConfig(module_budget_ticks=5))
    assert e.value.reason == 'timeout'


def test_injected_faults(library, plans):
    rng = np.random.default_rng(0)
    with pytest.raises(ReconfigFailure) as e:
        execute_plan(plans[('Car', 'Proboscis')], _world(library), library,
                     fault=FaultProfile(hardware=1.0), rng=rng)
    assert e.value.reason == 'hardware'
    with pytest.raises(InjectedFault) as e:
        execute_plan(plans[('Car', 'Proboscis')], _world(library), library,
                     fault=FaultProfile(network=1.0), rng=rng)
    assert e.value.category == 'network'


def _module_ticks(result, module, config):
    ticks = dict((e.kind, e.tick) for e in result.events if e.module_id == module)
    return ticks['docked'] - ticks['detached'] + 3*config['wiggle_ticks']


def test_module_budget_spans_detach_to_dock(library, plans):
    config = ReconfigConfig()
    result = execute_plan(plans[('Car', 'Proboscis')], _world(library), library, config=config)
    used = _module_ticks(result, 'm4', config)
    assert 0 < used <= config['module_budget_ticks']
    # the move and the dock share one allowance
    assert execute_plan(plans[('Car', 'Proboscis')], _world(library), library,
                        config=ReconfigConfig(module_budget_ticks=used)).events[-1].kind == 'verify_ok'
    with pytest.raises(ReconfigFailure) as e:
        execute_plan(plans[('Car', 'Proboscis')], _world(library), library,
                     config=ReconfigConfig(module_budget_ticks=used - 1))
    assert e.value.reason == 'timeout'


@pytest.mark.parametrize('pair', [('Scorpion', 'Snake'), ('Car', 'Scorpion')])
def test_each_module_within_budget(library, plans, pair):
    config = ReconfigConfig()
    result = execute_plan(plans[pair], _world(library, pair[0]), library, config=config)
    for module in plans[pair].modules():
        assert _module_ticks(result, module, config) <= config['module_budget_ticks']


def test_overshoot_along_approach_is_misaligned(library, plans):
    with pytest.raises(ReconfigFailure) as e:
        execute_plan(plans[('Car', 'Proboscis')], _world(library), library,
                     config=ReconfigConfig(overdrive=0.06))
    assert e.value.reason == 'dock_misaligned'

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
Mobile reconfiguration: stored plans of detach / move / align-and-dock steps,
their validation by graph rewriting, and their closed-loop execution in the
simulated world with module poses from the localization zone only.

Plan file schema (JSON)::

    {"plans": [{"from": "Car", "to": "Proboscis", "steps": [
        {"op": "detach", "module": "m4", "face": "top"},
        {"op": "move", "module": "m4", "waypoints": [[0.08, -0.20], [0.34, 0.0]]},
        {"op": "dock", "module": "m4", "target": "m2", "target_face": "top", "face": "bottom"}]}]}

Waypoints are in meters in the sensor module frame, module ids are those of
the `from` configuration.
"""

import dataclasses
import json
import math

import networkx as nx
import numpy as np
from networkx.algorithms import isomorphism

from msrrlib.core import Component, SimConfig, wrap_angle
from msrrlib.designlib import FACE_ANGLES, MODULE_SIZE
from msrrlib.errors import InjectedFault, ParseError, PlanError, ReconfigFailure, UnknownConfiguration
from msrrlib.nav import DriveCommand, to_wheel_speeds
from msrrlib import worldsim


class ReconfigConfig(SimConfig):

    def init(self):
        self.update(
                scope_name='msrr.reconfig',
                dt=0.1,
                zone_depth=0.75,
                zone_width=0.5,
                standoff=0.10,
                align_tol=math.radians(3.0),
                overdrive=0.01,
                clearance=0.07,
                module_v=0.05,
                module_w=0.5,
                waypoint_tol=0.01,
                turn_tol=0.05,
                turn_gain=2.0,
                module_budget_ticks=600,
                wiggle_ticks=2,
                module_track=0.08,
                wheel_radius=0.04)


@dataclasses.dataclass(frozen=True)
class Detach:
    module: str
    face: str


@dataclasses.dataclass(frozen=True)
class MoveTo:
    module: str
    waypoints: tuple


@dataclasses.dataclass(frozen=True)
class AlignAndDock:
    module: str
    target: str
    target_face: str
    face: str


@dataclasses.dataclass(frozen=True)
class ReconfigurationPlan:
    from_config: str
    to_config: str
    steps: tuple = ()

    def modules(self):
        return sorted(set(s.module for s in self.steps))


@dataclasses.dataclass(frozen=True)
class ReconfigEvent:
    kind: str
    module_id: str
    tick: int


@dataclasses.dataclass
class ReconfigResult:
    world: object
    events: list
    id_map: dict
    ticks: int


#
# plan files
#

def _step_from_dict(d, field):
    op = d.get('op')
    try:
        if op == 'detach':
            return Detach(d['module'], d['face'])
        if op == 'move':
            waypoints = tuple(tuple(float(v) for v in wp) for wp in d['waypoints'])
            if not waypoints or any(len(wp) != 2 for wp in waypoints):
                raise ParseError('waypoints are non-empty [x, y] pairs', field=field)
            return MoveTo(d['module'], waypoints)
        if op == 'dock':
            return AlignAndDock(d['module'], d['target'], d['target_face'], d['face'])
    except KeyError as e:
        raise ParseError('missing key {}'.format(e), field=field)
    raise ParseError('unknown step "{}"'.format(op), field=field + '.op')


def plans_from_dict(d):
    plans = {}
    for n, p in enumerate(d.get('plans', [])):
        field = 'plans[{:d}]'.format(n)
        if 'from' not in p or 'to' not in p:
            raise ParseError('a plan needs "from" and "to"', field=field)
        steps = tuple(_step_from_dict(s, '{:s}.steps[{:d}]'.format(field, k))
                      for k, s in enumerate(p.get('steps', [])))
        plans[(p['from'], p['to'])] = ReconfigurationPlan(p['from'], p['to'], steps)
    return plans


def load_plans(path):
    with open(path, 'r') as fp:
        text = fp.read()
    if not text.strip():
        return {}
    try:
        d = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, line=e.lineno)
    return plans_from_dict(d)


#
# topology
#

def face_isomorphism(g1, g2):
    """
    A mapping of the modules of configuration `g1` onto those of `g2` that
    preserves module kinds and the faces of every connection, or None. The
    identity is preferred when it qualifies.
    """
    a, b = g1.graph, g2.graph
    if a.number_of_nodes() != b.number_of_nodes() or a.number_of_edges() != b.number_of_edges():
        return None

    def preserves_faces(mapping):
        for u, v, data in a.edges(data=True):
            mu, mv = mapping[u], mapping[v]
            if not b.has_edge(mu, mv):
                return False
            faces = b.edges[mu, mv]['faces']
            if faces[mu] != data['faces'][u] or faces[mv] != data['faces'][v]:
                return False
        return True

    identity = dict((m, m) for m in a.nodes)
    if set(a.nodes) == set(b.nodes) and all(g1.kind(m) == g2.kind(m) for m in a.nodes) and preserves_faces(identity):
        return identity
    matcher = isomorphism.GraphMatcher(a, b, node_match=isomorphism.categorical_node_match('kind', None))
    for mapping in matcher.isomorphisms_iter():
        if preserves_faces(mapping):
            return dict(mapping)
    return None


def _face_angle(config, module_id, face):
    angle = FACE_ANGLES[config.kind(module_id)].get(face)
    if angle is None:
        raise PlanError('face_conflict', '{}.{} is not a horizontal face'.format(module_id, face))
    return angle


def dock_pose(target_xy, target_heading, target_face_angle, own_face_angle, module_size=MODULE_SIZE):
    """
    Where a module docks to a target face: its center position, its heading
    and the outward normal of the target face.
    """
    normal = target_heading + target_face_angle
    position = (target_xy[0] + module_size*math.cos(normal), target_xy[1] + module_size*math.sin(normal))
    heading = float(wrap_angle(normal + math.pi - own_face_angle))
    return position, heading, normal


def _segment_distance(p, a, b):
    p, a, b = np.asarray(p), np.asarray(a), np.asarray(b)
    ab = b - a
    denom = float(ab @ ab)
    t = 0.0 if denom == 0 else float(np.clip((p - a) @ ab / denom, 0.0, 1.0))
    return float(np.linalg.norm(p - (a + t*ab)))


def validate_plan(plan, lib, config=None):
    """
    Replay the steps of a plan on the graph of its source configuration.

    Raises
    ------
    PlanError
        face_conflict if a step uses a free face for detaching or an occupied
        one for docking; out_of_zone if a waypoint leaves the localization
        zone; collision if a module passes closer than `clearance` to a
        resting module; topology_mismatch if the result is not the target
        configuration.
    """
    config = ReconfigConfig() if config is None else config
    try:
        source = lib.configuration(plan.from_config)
        goal = lib.configuration(plan.to_config)
    except UnknownConfiguration as e:
        raise PlanError('topology_mismatch', 'unknown configuration {}'.format(e))

    graph = source.copy()
    poses = dict((m, (np.array(o[:2]), o[2])) for m, o in source.layout().items())
    detached = set()

    def in_zone(xy):
        return 0.0 < xy[0] <= config['zone_depth'] and abs(xy[1]) <= config['zone_width']/2

    def clear(module, a, b, ignore=()):
        for other, (p, _) in poses.items():
            if other == module or other in detached or other in ignore:
                continue
            if _segment_distance(p, a, b) < config['clearance'] - 1e-9:
                raise PlanError('collision', '{} passes {}'.format(module, other))

    for step in plan.steps:
        if step.module not in poses:
            raise PlanError('topology_mismatch', 'unknown module {}'.format(step.module))
        if isinstance(step, Detach):
            try:
                graph.disconnect(step.module, step.face)
            except ValueError as e:
                raise PlanError('face_conflict', str(e))
            detached.add(step.module)
        elif isinstance(step, MoveTo):
            if step.module not in detached:
                raise PlanError('face_conflict', '{} moves while attached'.format(step.module))
            position = poses[step.module][0]
            for wp in step.waypoints:
                wp = np.array(wp)
                if not in_zone(wp):
                    raise PlanError('out_of_zone', '{} at {}'.format(step.module, tuple(wp)))
                clear(step.module, position, wp)
                position = wp
            poses[step.module] = (position, poses[step.module][1])
        elif isinstance(step, AlignAndDock):
            if step.module not in detached:
                raise PlanError('face_conflict', '{} docks while attached'.format(step.module))
            if step.target not in poses or step.target in detached:
                raise PlanError('face_conflict', 'dock target {} is not part of the robot'.format(step.target))
            try:
                graph.connect(step.module, step.face, step.target, step.target_face)
            except ValueError as e:
                raise PlanError('face_conflict', str(e))
            own = _face_angle(graph, step.module, step.face)
            if abs(math.sin(own)) > 1e-9:
                raise PlanError('face_conflict', '{}.{} is not on the drive axis'.format(step.module, step.face))
            target_xy, target_heading = poses[step.target]
            position, heading, normal = dock_pose(
                    target_xy, target_heading, _face_angle(graph, step.target, step.target_face), own)
            predock = np.array(position) + config['standoff']*np.array([math.cos(normal), math.sin(normal)])
            if not in_zone(predock):
                raise PlanError('out_of_zone', 'pre-dock point of {}'.format(step.module))
            clear(step.module, poses[step.module][0], predock)
            clear(step.module, predock, np.array(position), ignore=(step.target,))
            detached.discard(step.module)
            poses[step.module] = (np.array(position), heading)

    if detached:
        raise PlanError('topology_mismatch', 'modules left detached: {}'.format(sorted(detached)))
    if face_isomorphism(graph, goal) is None:
        raise PlanError('topology_mismatch', '{} does not yield {}'.format(plan.from_config, plan.to_config))
    return True


#
# execution
#

class ReconfigExecutor(Component):
    """
    Runs a plan in the world, one module at a time, driving each module from
    the noisy poses of the localization zone.
    """

    config_class = ReconfigConfig

    def __init__(self, lib, config=None, fault=None, rng=None):
        super(ReconfigExecutor, self).__init__(config)
        self.lib = lib
        self.fault = fault
        self.rng = rng if rng is not None else np.random.default_rng(self.config['seed'])

    def execute(self, plan, world, id_map=None):
        """
        Execute `plan` on `world`. `id_map` maps the module ids of the source
        configuration to physical module ids (identity by default).

        Returns
        -------
        ReconfigResult
            The new world, the event log, the id map of the target
            configuration and the number of ticks spent.

        Raises
        ------
        ReconfigFailure
        """
        source = self.lib.configuration(plan.from_config)
        goal = self.lib.configuration(plan.to_config)
        id_map = dict((m, m) for m in source.modules()) if id_map is None else dict(id_map)
        graph = source.copy()
        graph.graph = _relabel(graph.graph, id_map)

        self.world = world
        self.events = []
        start_tick = world.tick
        self.robot = world.robot_pose
        self.logger.info('reconfiguring %s -> %s (%d steps)', plan.from_config, plan.to_config, len(plan.steps))

        for step in plan.steps:
            module = id_map[step.module]
            if isinstance(step, Detach):
                # one budget covers detach, move and dock of a module
                self._budget = self.config['module_budget_ticks']
                self._draw_fault()
                self._detach(module)
                graph.disconnect(module, step.face)
            elif isinstance(step, MoveTo):
                for wp in step.waypoints:
                    self._drive_to(module, self._to_world(wp))
                    self._event('waypoint_reached', module)
            elif isinstance(step, AlignAndDock):
                target = id_map[step.target]
                self._dock(module, graph, target, step.target_face, step.face)
                graph.connect(module, step.face, target, step.target_face)

        mapping = face_isomorphism(goal, graph)
        if mapping is None:
            raise ReconfigFailure('dock_misaligned', 'final topology is not {}'.format(plan.to_config))
        self._event('verify_ok', self.world.sensor_id)
        ticks = self.world.tick - start_tick
        self.logger.info('reconfigured to %s in %d ticks', plan.to_config, ticks)
        return ReconfigResult(self.world, self.events, mapping, ticks)

    def _event(self, kind, module):
        self.events.append(ReconfigEvent(kind, module, self.world.tick))
        self.logger.debug('%s %s at tick %d', kind, module, self.world.tick)

    def _draw_fault(self):
        if self.fault is not None:
            category = self.fault.draw(self.rng)
            if category == 'hardware':
                raise ReconfigFailure('hardware', 'connector failed to release')
            if category is not None:
                raise InjectedFault(category)

    def _step(self, commands):
        self.world = worldsim.step_world(self.world, commands, self.config['dt'])

    def _to_world(self, wp):
        x, y, _, h = self.robot
        c, s = math.cos(h), math.sin(h)
        return (x + c*wp[0] - s*wp[1], y + s*wp[0] + c*wp[1])

    def _observe(self, module):
        for pose in worldsim.reconfig_zone_poses(self.world, self.world.sensor_id):
            if pose.module_id == module:
                return pose
        raise ReconfigFailure('module_out_of_zone', '{} left the localization zone'.format(module))

    def _tick_budget(self, module):
        self._budget -= 1
        if self._budget < 0:
            raise ReconfigFailure('timeout', '{} exceeded {} ticks'.format(module, self.config['module_budget_ticks']))

    def _command(self, module, v, omega):
        wl, wr = to_wheel_speeds(DriveCommand(v, omega), self.config['module_track'], self.config['wheel_radius'])
        self._step({module: (wl, wr)})

    def _detach(self, module):
        # wiggle the tilt joint to break the connection, both wheels end on the ground
        n = self.config['wiggle_ticks']
        for rate in [1.0]*n + [-2.0]*n + [1.0]*n:
            self._tick_budget(module)
            self._step({module: (0.0, 0.0, 0.0, rate)})
        self.world = self.world.copy()
        self.world.cluster.pop(module, None)
        self._event('detached', module)

    def _turn(self, module, heading, tol):
        conf = self.config
        while True:
            pose = self._observe(module)
            err = float(wrap_angle(heading - pose.heading))
            if abs(err) < tol:
                return
            self._tick_budget(module)
            self._command(module, 0.0, float(np.clip(conf['turn_gain']*err, -conf['module_w'], conf['module_w'])))

    def _drive_to(self, module, xy):
        """ Stop, turn, go: turn toward the waypoint, then drive with small heading corrections. """
        conf = self.config
        while True:
            pose = self._observe(module)
            dx, dy = xy[0] - pose.position[0], xy[1] - pose.position[1]
            distance = math.hypot(dx, dy)
            if distance < conf['waypoint_tol']:
                return
            self._tick_budget(module)
            err = float(wrap_angle(math.atan2(dy, dx) - pose.heading))
            omega = float(np.clip(conf['turn_gain']*err, -conf['module_w'], conf['module_w']))
            if abs(err) > conf['turn_tol']:
                self._command(module, 0.0, omega)
            else:
                self._command(module, min(conf['module_v'], distance/conf['dt']), omega)

    def _dock(self, module, graph, target, target_face, face):
        conf = self.config
        offset = self.world.cluster.get(target, (0.0, 0.0, 0.0))
        target_angle = _face_angle(graph, target, target_face)
        own_angle = _face_angle(graph, module, face)
        # ideal pose in the sensor frame, the connection snaps the module there
        ideal, ideal_heading, _ = dock_pose(offset[:2], offset[2], target_angle, own_angle)

        observed = self._observe(target)
        position, heading, normal = dock_pose(observed.position, observed.heading, target_angle, own_angle)
        n = np.array([math.cos(normal), math.sin(normal)])
        predock = np.array(position) + conf['standoff']*n
        self._drive_to(module, predock)
        self._turn(module, heading, conf['align_tol'])
        self._event('aligned', module)

        # forward when the module faces the target, reverse otherwise
        direction = 1.0 if math.cos(heading - (normal + math.pi)) > 0 else -1.0
        travel = conf['standoff'] + conf['overdrive']
        while True:
            pose = self._observe(module)
            progress = float((predock - np.asarray(pose.position[:2])) @ n)
            if progress >= travel - 1e-9:
                break
            self._tick_budget(module)
            self._command(module, direction*min(conf['module_v'], (travel - progress)/conf['dt'] + 1e-6), 0.0)

        # the connection forms on the true poses
        anchor = self.world.module(target)
        position, heading, normal = dock_pose(anchor.position, anchor.heading, target_angle, own_angle)
        true = self.world.module(module)
        error = math.hypot(true.position[0] - position[0], true.position[1] - position[1])
        heading_error = abs(float(wrap_angle(true.heading - heading)))
        if error >= self.world.resolution/2 or heading_error >= 2*conf['align_tol']:
            raise ReconfigFailure('dock_misaligned', '{}: off by {:.3f} m, heading {:.1f} deg'.format(
                    module, error, math.degrees(heading_error)))
        self.world = worldsim.place_cluster(self.world, dict(
                self.world.cluster, **{module: (ideal[0], ideal[1], ideal_heading)}))
        self._event('docked', module)


def _relabel(graph, id_map):
    relabeled = nx.relabel_nodes(graph, id_map, copy=True)
    for a, b in relabeled.edges:
        faces = relabeled.edges[a, b]['faces']
        relabeled.edges[a, b]['faces'] = dict((id_map.get(k, k), v) for k, v in faces.items())
    return relabeled


def execute_plan(plan, world, lib, id_map=None, config=None, fault=None, rng=None):
    """ Functional form of `ReconfigExecutor.execute`. """
    return ReconfigExecutor(lib, config, fault, rng).execute(plan, world, id_map)

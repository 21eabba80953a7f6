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
The closed mission loop.

Every tick the executor senses (every `sense_every` ticks and on arrival),
evaluates the environment propositions, advances the mission automaton and
realizes its system valuation. Each true system proposition owns an
activity, a generator advanced by one tick at a time; the first unfinished
activity in declaration order runs. An activity starts when its proposition
rises and is cancelled when it falls.

Event log: one JSON object per line, ``{"kind": ..., "payload": {...},
"tick": ...}`` with sorted keys.
"""

import dataclasses
import json
import math

import numpy as np

from msrrlib import mapping, planar, worldsim
from msrrlib.core import Component, SimConfig, SimConfigEncoder
from msrrlib.designlib import query
from msrrlib.envchar import CharacterizationParams, EnvironmentType, characterize
from msrrlib.errors import (
        AssumptionViolated, BehaviorFailure, InjectedFault, MissionFailed, NoCapableEntry,
        NoReachableCandidate, NoReachablePoint, ReconfigFailure, Unreachable)
from msrrlib.mapping import ExplorationComplete, MappingConfig, OccupancyGrid
from msrrlib.nav import NavConfig, Waypoint, follow_path, path_length, plan_path, traversable_map
from msrrlib.reconfig import ReconfigConfig, ReconfigExecutor
from msrrlib.synth import Realizable, advance, synthesize

EVENT_KINDS = (
    'object_detected', 'characterized', 'state_transition', 'behavior_started', 'behavior_done',
    'reconfig_started', 'reconfig_done', 'mission_complete', 'mission_failed')


class MissionConfig(SimConfig):

    def init(self):
        self.update(
                scope_name='msrr.executor',
                sense_every=10,
                served_radius=0.24,
                match_radius=0.16,
                target_region=0.5,
                tick_budget=None,
                nav_min_ticks=200,
                nav_slack=4.0)


@dataclasses.dataclass(frozen=True)
class MissionEvent:
    tick: int
    kind: str
    payload: dict = dataclasses.field(default_factory=dict)

    def to_json(self):
        return json.dumps({'tick': self.tick, 'kind': self.kind, 'payload': self.payload},
                          sort_keys=True, cls=SimConfigEncoder)


@dataclasses.dataclass
class MissionState:
    node: int = None
    configuration: str = None
    characterization: object = None
    active: str = None
    events: list = dataclasses.field(default_factory=list)
    result: str = 'running'
    failure: MissionFailed = None
    ticks: int = 0
    reconfigurations: int = 0
    distance: float = 0.0

    def summary(self):
        d = {
            'result': self.result,
            'ticks': self.ticks,
            'reconfigurations': self.reconfigurations,
            'distance': round(self.distance, 6),
            'configuration': self.configuration,
        }
        if self.failure is not None:
            d['cause'] = self.failure.cause
            d['detail'] = self.failure.detail
        return d

    def kinds(self):
        return [e.kind for e in self.events]


@dataclasses.dataclass
class _Activity:
    name: str
    generator: object
    done: bool = False
    started: bool = False


def write_events(events, path):
    with open(path, 'w') as fp:
        for e in events:
            fp.write(e.to_json() + '\n')


def evaluate_propositions(spec, detections, characterization=None, holding=(), done=(), explored=False):
    """
    Environment valuation from perception: seen(c, ...) is true iff an object
    of one of the colors is detected, envtype(t) iff the current
    characterization is t, holding(c, ...) iff the robot carries such an
    object, done(p) iff the activity of p has completed, explored iff
    exploration has run out of informative views.
    """
    seen = set(d.color for d in detections)
    valuation = {}
    for p in spec.propositions:
        if p.side != 'env':
            continue
        kind, args = p.binding.kind, p.binding.args
        if kind == 'seen':
            value = any(c in seen for c in args)
        elif kind == 'holding':
            value = any(c in holding for c in args)
        elif kind == 'envtype':
            value = characterization is not None and characterization.env_type == EnvironmentType.parse(args[0])
        elif kind == 'done':
            value = args[0] in done
        else:
            value = explored
        valuation[p.name] = bool(value)
    return valuation


def select_behavior(lib, prop, env, current, rng, reachable=None):
    """
    Library entry realizing `prop` in `env`. An entry of the current
    configuration is preferred; otherwise one of the candidates (restricted to
    `reachable` configurations if given) is drawn uniformly.

    Returns
    -------
    (entry, reconfigure)

    Raises
    ------
    NoCapableEntry
    """
    candidates = query(lib, prop, env)
    for entry in candidates:
        if entry.configuration.name == current:
            return entry, False
    if reachable is not None:
        candidates = [e for e in candidates if e.configuration.name in reachable]
    if not candidates:
        raise NoCapableEntry('no entry for {:s} in {:s} reachable from {:s}'.format(prop, str(env), str(current)))
    return candidates[int(rng.integers(len(candidates)))], True


class MissionExecutor(Component):

    config_class = MissionConfig

    def __init__(self, scenario, spec, lib, plans, config=None, automaton=None, fault=None):
        super(MissionExecutor, self).__init__(config)
        self.scenario = scenario
        self.spec = spec
        self.lib = lib
        self.plans = plans
        self.fault = scenario.fault if fault is None else fault

        if automaton is None:
            outcome = synthesize(spec)
            if not isinstance(outcome, Realizable):
                raise MissionFailed('unrealizable', outcome.reason)
            automaton = outcome.automaton
        self.automaton = automaton

        self.mapping_config = MappingConfig()
        self.nav_config = NavConfig()
        self.char_params = CharacterizationParams()
        self.rng = np.random.default_rng(self.config['seed'])
        self.fault_rng = np.random.default_rng([self.config['seed'], 1])
        self.reconfig = ReconfigExecutor(
                lib, ReconfigConfig(log_level=self.config['log_level']), fault=self.fault, rng=self.fault_rng)

        initial = lib.configuration(scenario.initial_configuration)
        self.world = scenario.build_world(initial.layout(), initial.sensor_modules()[0])
        self.grid = OccupancyGrid(self.world.shape, self.world.resolution)
        self.id_map = dict((m, m) for m in initial.modules())
        self.state = MissionState(configuration=initial.name)

        colors = set(scenario.colors_of_interest)
        for p in spec.propositions:
            if p.side == 'env' and p.binding.kind in ('seen', 'holding'):
                colors.update(p.binding.args)
        self.colors = sorted(colors)
        self.budget = self.config['tick_budget'] or scenario.tick_budget

        self.detections = []
        self.reported = []
        self.served = []
        self.done = set()
        self.explored = False
        self.visited = set()
        self.activities = {}
        self.sys_valuation = {}
        self._senses = 0
        self.characterizations = []

    #
    # events
    #

    def _emit(self, kind, **payload):
        event = MissionEvent(self.world.tick, kind, payload)
        self.state.events.append(event)
        self.logger.debug('%d %s %s', event.tick, kind, payload)

    #
    # perception
    #

    def _sense(self):
        frame = worldsim.render_depth(self.world)
        self.grid = mapping.integrate_frame(self.grid, frame)
        self.grid = mapping.mark_footprint(
                self.grid, self.world.robot_pose[:3], self.mapping_config['blind_radius'],
                self.mapping_config['robot_height'])
        radius = self.config['served_radius']
        detections = []
        for d in mapping.detect_objects(self.grid, self.colors):
            if any(c == d.color and math.hypot(d.centroid[0] - p[0], d.centroid[1] - p[1]) <= radius
                   for c, p in self.served):
                continue
            detections.append(d)
            if not any(c == d.color and math.hypot(d.centroid[0] - p[0], d.centroid[1] - p[1]) <= radius
                       for c, p in self.reported):
                self.reported.append((d.color, d.centroid))
                self._emit('object_detected', color=d.color, position=[round(v, 4) for v in d.centroid])
        self.detections = detections
        self._characterize_in_view()
        self._senses += 1

    def _characterize_in_view(self):
        """
        Refresh the characterization of every detection whose centroid moved
        by more than a cell or whose support grew. The current
        characterization is that of the nearest detection, none without one.
        """
        res = self.grid.resolution
        cache = []
        for d in self.detections:
            known = None
            for entry in self.characterizations:
                color, centroid, cells, _ = entry
                if color == d.color and math.hypot(d.centroid[0] - centroid[0], d.centroid[1] - centroid[1]) <= res \
                        and len(d.support) <= cells:
                    known = entry
                    break
            if known is None:
                try:
                    result = self._characterize(d)
                except MissionFailed as e:
                    self.logger.debug('cannot characterize %s: %s', d.color, e.detail)
                    result = None
                known = (d.color, d.centroid, len(d.support), result)
            cache.append(known)
        self.characterizations = cache

        pose = self.world.robot_pose
        results = [(math.hypot(d.centroid[0] - pose[0], d.centroid[1] - pose[1]), entry[3])
                   for d, entry in zip(self.detections, cache) if entry[3] is not None]
        self.state.characterization = min(results, key=lambda r: r[0])[1] if results else None

    def _holding(self):
        return set(o.color for o in self.world.carried_objects())

    def env_valuation(self):
        return evaluate_propositions(
                self.spec, self.detections, self.state.characterization, self._holding(),
                self.done, self.explored)

    def _target(self, env_prop):
        """ The detection an effect acts on, nearest by path first. """
        binding = self.spec.proposition(env_prop).binding
        candidates = [d for d in self.detections if d.color in binding.args]
        if not candidates:
            return None
        pose = self.world.robot_pose
        res, origin = self.grid.resolution, self.grid.origin[:2]
        traversable = traversable_map(self.grid, self.nav_config['robot_radius'],
                                      self.nav_config['robot_height'], pose[2])
        start = planar.cell_of(pose, res, origin)
        costs = np.full(traversable.shape, np.inf)
        if 0 <= start[0] < costs.shape[0] and 0 <= start[1] < costs.shape[1] and traversable[start]:
            costs = planar.path_costs(traversable, start)
        xs = (np.arange(costs.shape[0]) + 0.5) * res + origin[0]
        ys = (np.arange(costs.shape[1]) + 0.5) * res + origin[1]

        def key(d):
            near = np.hypot(xs[:, None] - d.centroid[0], ys[None, :] - d.centroid[1]) <= self.config['target_region']
            cost = float(costs[near].min()) if np.any(near) else np.inf
            return cost, math.hypot(d.centroid[0] - pose[0], d.centroid[1] - pose[1]), d.color

        return min(candidates, key=key)

    def _world_object(self, detection):
        """ The physical object an effect acts on, if the detection is one. """
        if detection is None:
            return None
        best, best_distance = None, self.config['match_radius']
        for o in self.world.objects:
            if o.carried_by is not None or o.color != detection.color:
                continue
            distance = math.hypot(o.position[0] - detection.centroid[0], o.position[1] - detection.centroid[1])
            if distance <= best_distance:
                best, best_distance = o, distance
        return best

    def _characterize(self, detection):
        try:
            result = characterize(self.grid, detection, self.world.robot_pose, self.char_params)
        except NoReachablePoint as e:
            raise MissionFailed('perception', str(e))
        self.state.characterization = result
        self._emit('characterized', color=detection.color, env=str(result.env_type),
                   distance=round(result.closest_reachable_distance, 4),
                   waypoint=[round(v, 4) for v in result.staging_waypoint.position])
        return result

    #
    # library and reconfiguration
    #

    def _ensure(self, prop, env):
        """ An entry for (prop, env), reconfiguring first when the current configuration has none. """
        current = self.state.configuration
        reachable = set(to for (frm, to) in self.plans if frm == current)
        try:
            entry, reconfigure = select_behavior(self.lib, prop, env, current, self.rng, reachable)
        except NoCapableEntry as e:
            raise MissionFailed('no_capable_entry', str(e))
        if reconfigure:
            self._reconfigure(entry.configuration.name, prop, env)
        return entry

    def _reconfigure(self, target, prop, env):
        source = self.state.configuration
        plan = self.plans[(source, target)]
        self._emit('reconfig_started', property=prop, env=str(env), **{'from': source, 'to': target})
        try:
            result = self.reconfig.execute(plan, self.world, self.id_map)
        except ReconfigFailure as e:
            raise MissionFailed('hardware' if e.reason == 'hardware' else 'reconfiguration', str(e))
        except InjectedFault as e:
            raise MissionFailed(e.category, str(e))
        self.world = result.world
        self.id_map = result.id_map
        self.state.configuration = target
        self.state.reconfigurations += 1
        self._emit('reconfig_done', ticks=result.ticks, steps=[e.kind for e in result.events],
                   **{'from': source, 'to': target})

    #
    # activities
    #

    def _drive(self, entry, cmd):
        commands = next(entry.behavior.commands(v=cmd.v, omega=cmd.omega))
        joints = dict((self.id_map.get(m, m), w) for m, w in commands.items())
        before = self.world.robot_pose
        self.world = worldsim.step_world(self.world, joints, self.world.config['dt'])
        after = self.world.robot_pose
        self.state.distance += math.hypot(after[0] - before[0], after[1] - before[1])

    def _plan(self, goal):
        return plan_path(self.grid, self.world.robot_pose, goal, floor_z=self.world.robot_pose[2],
                         **self.nav_config)

    def _drive_to(self, goal, required=True):
        """ Drive to a waypoint, replanning after every sensing. Returns whether it was reached. """
        entry = self._ensure('drive', EnvironmentType.FREE)
        try:
            path = self._plan(goal)
        except Unreachable as e:
            if required:
                raise MissionFailed('navigation', str(e))
            return False
        self._emit('behavior_started', property='drive', entry=entry.name, env=str(EnvironmentType.FREE))
        dt = self.world.config['dt']
        budget = self.config['nav_min_ticks'] + self.config['nav_slack'] * path_length(
                path, self.world.robot_pose) / self.nav_config['v_max'] / dt
        ticks, senses = 0, self._senses
        while True:
            pose = self.world.robot_pose
            cmd = follow_path(path, (pose[0], pose[1], pose[3]), **self.nav_config)
            if cmd.is_stop():
                break
            if ticks > budget:
                raise MissionFailed('navigation', 'no progress toward {}'.format(goal.position))
            self._drive(entry, cmd)
            ticks += 1
            yield
            if self._senses != senses:
                senses = self._senses
                try:
                    path = self._plan(goal)
                except Unreachable as e:
                    if required:
                        raise MissionFailed('navigation', str(e))
                    return False
        self._sense()
        self._emit('behavior_done', property='drive', entry=entry.name)
        return True

    def _explore(self):
        while True:
            self._ensure('drive', EnvironmentType.FREE)
            pose = self.world.robot_pose
            try:
                view = mapping.next_best_view(grid=self.grid, current_pose=pose, exclude=self.visited,
                                              **self.mapping_config)
            except NoReachableCandidate as e:
                raise MissionFailed('navigation', str(e))
            if isinstance(view, ExplorationComplete):
                self.logger.info('exploration complete (best gain %d)', view.best_gain)
                self.explored = True
                return
            self.visited.add(mapping.view_key(self.grid, view, self.mapping_config['n_headings']))
            yield from self._drive_to(view, required=False)

    def _goto(self, env_prop):
        target = self._target(env_prop)
        if target is None:
            raise MissionFailed('perception', 'no object for {:s} in the map'.format(env_prop))
        result = self._characterize(target)
        yield from self._drive_to(result.staging_waypoint)

    def _home(self):
        x, y = self.scenario.robot_position
        yield from self._drive_to(Waypoint((x, y), self.scenario.robot_heading))

    def _execute(self, entry, prop, env, target):
        self._emit('behavior_started', property=prop, entry=entry.name, env=str(env))
        if self.fault is not None:
            category = self.fault.draw(self.fault_rng)
            if category is not None:
                raise MissionFailed(category, 'injected fault during {:s}'.format(entry.name))
        if entry.behavior.script:
            script = [{'duration': f['duration'],
                       'joints': dict((self.id_map.get(m, m), j) for m, j in f['joints'].items())}
                      for f in entry.behavior.script]
            self.world = worldsim.play_script(self.world, dataclasses.replace(entry.behavior, script=script))
        carried = [o.object_id for o in self.world.carried_objects()]
        try:
            self.world = worldsim.apply_behavior_effect(self.world, entry, env, self._world_object(target))
        except BehaviorFailure as e:
            raise MissionFailed('behavior', '{:s}: {}'.format(entry.name, e))

        effect = entry.behavior.effect
        if effect == 'pickUp' and target is not None:
            self.grid = mapping.forget_cells(self.grid, target.support)
            self.detections = [d for d in self.detections if d is not target]
        elif effect == 'drop':
            for object_id in carried:
                o = self.world.object(object_id)
                if o.carried_by is None:
                    self.served.append((o.color, o.position))
        self._emit('behavior_done', property=prop, entry=entry.name)
        self.world = worldsim.step_world(self.world, {}, self.world.config['dt'])
        yield

    def _effect(self, prop, target_prop):
        target = None
        env = EnvironmentType.FREE
        if target_prop is not None:
            target = self._target(target_prop)
            if target is None:
                raise MissionFailed('perception', 'no object for {:s} in the map'.format(target_prop))
            result = self._characterize(target)
            env = result.env_type
            yield from self._drive_to(result.staging_waypoint)
        sequence = [prop]
        if env == EnvironmentType.STAIRS:
            sequence = ['climbUp', prop, 'climbDown']
        for p in sequence:
            entry = self._ensure(p, env)
            yield from self._execute(entry, p, env, target)
        # back in a configuration that can drive
        self._ensure('drive', EnvironmentType.FREE)

    def _activity(self, name):
        binding = self.spec.proposition(name).binding
        if binding.kind == 'drive':
            if binding.args[0] == 'explore':
                return self._explore()
            if binding.args[0] == 'home':
                return self._home()
            return self._goto(binding.args[1])
        if binding.kind == 'complete':
            return None
        return self._effect(binding.kind, binding.args[0] if binding.args else None)

    def _enter(self, node, sys_valuation):
        if node != self.state.node:
            self._emit('state_transition', **{
                    'from': self.state.node, 'to': node,
                    'sys': sorted(p for p, v in sys_valuation.items() if v)})
        for name in self.automaton.sys_props:
            was, now = self.sys_valuation.get(name, False), sys_valuation[name]
            if now and not was:
                self.done.discard(name)
                generator = self._activity(name)
                self.activities[name] = _Activity(name, generator, generator is None)
            elif was and not now:
                activity = self.activities.pop(name, None)
                if activity is not None and activity.generator is not None:
                    activity.generator.close()
        self.state.node = node
        self.sys_valuation = dict(sys_valuation)

    def _pending(self):
        for name in self.automaton.sys_props:
            activity = self.activities.get(name)
            if self.sys_valuation.get(name) and activity is not None and not activity.done:
                return activity
        return None

    def _complete_requested(self):
        return any(self.sys_valuation.get(p.name) for p in self.spec.propositions
                   if p.side == 'sys' and p.binding.kind == 'complete')

    def _accepted(self, env):
        """
        Whether an idle mission has reached its goals: every system liveness
        formula holds in the current valuation. A mission with a `complete`
        proposition ends only through it.
        """
        if any(p.side == 'sys' and p.binding.kind == 'complete' for p in self.spec.propositions):
            return False
        valuation = dict(env, **self.sys_valuation)
        return all(goal.evaluate(valuation) for goal in self.spec.sys_live)

    #
    # the loop
    #

    def _loop(self):
        self._sense()
        env = self.env_valuation()
        try:
            node, sys_valuation = self.automaton.initial_state(env)
        except AssumptionViolated as e:
            raise MissionFailed('assumption', str(e))
        self._enter(node, sys_valuation)
        completed = False

        while True:
            if self.world.tick >= self.budget:
                raise MissionFailed('timeout', 'tick budget of {:d} exhausted'.format(self.budget))
            if self.world.tick % self.config['sense_every'] == 0:
                self._sense()
            previous, previous_env = self.state.node, env
            env = self.env_valuation()
            try:
                node, sys_valuation = advance(self.automaton, self.state.node, env)
            except AssumptionViolated as e:
                raise MissionFailed('assumption', str(e))
            # a started activity is only interrupted by a new observation or a completion
            running = [a.name for a in self.activities.values() if a.started and not a.done]
            if env != previous_env or completed or all(sys_valuation[name] for name in running):
                self._enter(node, sys_valuation)
                completed = False
            else:
                node = previous

            activity = self._pending()
            if self._complete_requested() or (activity is None and node == previous and self._accepted(env)):
                return
            if activity is None:
                self.world = worldsim.step_world(self.world, {}, self.world.config['dt'])
                continue
            self.state.active = activity.name
            activity.started = True
            try:
                next(activity.generator)
            except StopIteration:
                activity.done = True
                self.done.add(activity.name)
                self.state.active = None
                completed = True

    def run(self):
        """
        Run the mission to its end.

        Returns
        -------
        MissionState
            With result 'complete' or 'failed'; a failure carries the
            MissionFailed cause.
        """
        self.logger.info('mission %s starting in configuration %s', self.scenario.name, self.state.configuration)
        try:
            self._loop()
            self.state.result = 'complete'
            self._emit('mission_complete', configuration=self.state.configuration)
            self.logger.info('mission complete after %d ticks', self.world.tick)
        except MissionFailed as e:
            self.state.result = 'failed'
            self.state.failure = e
            self._emit('mission_failed', cause=e.cause, detail=e.detail)
            self.logger.warning('mission failed at tick %d: %s', self.world.tick, e)
        self.state.ticks = self.world.tick
        return self.state


def run_mission(scenario, spec, lib, plans, seed=0, config=None, automaton=None, fault=None):
    """ Build an executor for one mission and run it; returns the terminal MissionState. """
    config = MissionConfig(seed=seed) if config is None else config
    return MissionExecutor(scenario, spec, lib, plans, config, automaton, fault).run()

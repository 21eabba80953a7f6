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
Kinematic simulation of the voxel world, the modules, the task objects and
the idealized sensors. Every other part of the system perceives the world
through `render_depth` and `reconfig_zone_poses` only.
"""

import dataclasses
import json
import logging
import math

import numpy as np

from msrrlib.core import SimConfig, docsig, wrap_angle
from msrrlib.errors import UnknownModule, BehaviorFailure, ParseError
from msrrlib import raycast
from msrrlib.planar import FREE, OCCUPIED

logger = logging.getLogger(__name__)

FAULT_CATEGORIES = ('hardware', 'navigation', 'perception', 'network')


class WorldConfig(SimConfig):

    def init(self):
        self.update(
                resolution=0.08,
                dt=0.1,
                fov_h=math.radians(60.0),
                fov_v=math.radians(45.0),
                max_range=3.0,
                n_h=64,
                n_v=48,
                sensor_height=0.12,
                wheel_radius=0.04,
                module_track=0.08,
                cluster_track=0.16,
                pan_limit=math.pi/2,
                tilt_limit=math.pi/2,
                zone_depth=0.75,
                zone_width=0.5,
                pose_noise_std=0.0,
                heading_noise_std=0.0,
                grasp_radius=0.10,
                stairs_tolerance=0.30)


@dataclasses.dataclass(frozen=True)
class ModulePose:
    module_id: str
    position: tuple
    heading: float
    joints: tuple = (0.0, 0.0, 0.0, 0.0)

    def __post_init__(self):
        if len(self.joints) != 4:
            raise ValueError('A module has exactly four joints (left wheel, right wheel, pan, tilt).')


@dataclasses.dataclass(frozen=True)
class TaskObject:
    object_id: str
    color: str
    position: tuple
    height_above_ground: float
    carried_by: str = None
    marked: bool = False


@dataclasses.dataclass(frozen=True)
class Stairs:
    base: tuple
    heading: float
    rise: float
    run: float
    steps: int
    width: float
    landing: float = 0.4

    def direction(self):
        return np.array([math.cos(self.heading), math.sin(self.heading)])

    def top_point(self):
        """ Center of the highest step. """
        u = self.steps * self.run - 0.5 * self.run
        return np.asarray(self.base) + u * self.direction()

    def height_at(self, xy):
        d = np.asarray(xy, dtype=float) - np.asarray(self.base)
        u = d @ self.direction()
        w = d @ np.array([-math.sin(self.heading), math.cos(self.heading)])
        inside = (u >= 0) & (u < self.steps * self.run + self.landing) & (np.abs(w) <= 0.5 * self.width)
        n = np.minimum(np.floor(u / self.run) + 1, self.steps)
        return np.where(inside, n * self.rise, 0.0)


@dataclasses.dataclass(frozen=True)
class SensorFrame:
    directions: np.ndarray
    ranges: np.ndarray
    hit: np.ndarray
    colors: np.ndarray
    sensor_pose: tuple
    fov_h: float
    fov_v: float
    max_range: float

    @property
    def origin(self):
        return np.asarray(self.sensor_pose[:3], dtype=float)

    @property
    def hits(self):
        """ (ray direction, range, color or None) for every ray that hit a solid voxel. """
        return [(self.directions[i], float(self.ranges[i]), self.colors[i] or None)
                for i in np.flatnonzero(self.hit)]


@dataclasses.dataclass
class FaultProfile:
    hardware: float = 0.0
    navigation: float = 0.0
    perception: float = 0.0
    network: float = 0.0
    rng_seed: int = 0

    def __post_init__(self):
        for category in FAULT_CATEGORIES:
            p = getattr(self, category)
            if not 0.0 <= p <= 1.0:
                raise ValueError('Fault probability for {:s} must lie in [0, 1], got {}.'.format(category, p))

    def enabled(self):
        return any(getattr(self, c) > 0.0 for c in FAULT_CATEGORIES)

    def draw(self, rng):
        """ The category failing this behavior execution, or None. """
        if not self.enabled():
            return None
        for category in FAULT_CATEGORIES:
            if rng.random() < getattr(self, category):
                return category
        return None


@dataclasses.dataclass
class WorldState:
    """
    Ground truth. The voxel arrays are shared between successive states and
    never written after the scenario is built.
    """
    voxels: np.ndarray
    colors: np.ndarray
    resolution: float
    objects: list
    modules: list
    robot_pose: tuple
    cluster: dict
    sensor_id: str
    stairs: list = dataclasses.field(default_factory=list)
    tick: int = 0
    rng_seed: int = 0
    config: WorldConfig = dataclasses.field(default_factory=WorldConfig)

    def copy(self):
        return dataclasses.replace(
                self, objects=list(self.objects), modules=list(self.modules),
                cluster=dict(self.cluster), stairs=list(self.stairs))

    @property
    def shape(self):
        return self.voxels.shape

    def module(self, module_id):
        for m in self.modules:
            if m.module_id == module_id:
                return m
        raise UnknownModule(module_id)

    def object(self, object_id):
        for o in self.objects:
            if o.object_id == object_id:
                return o
        raise KeyError(object_id)

    def in_bounds(self, position):
        p = np.asarray(position[:3], dtype=float) / self.resolution
        return bool(np.all(p >= 0) and np.all(p < np.asarray(self.shape)))

    def carried_objects(self):
        members = set(self.cluster) | {self.sensor_id}
        return [o for o in self.objects if o.carried_by in members]

    def sensor_pose(self):
        x, y, z, h = self.robot_pose
        return (x, y, z + self.config['sensor_height'], h)


def _attached_pose(robot_pose, offset):
    x, y, z, h = robot_pose
    dx, dy, dyaw = offset
    c, s = math.cos(h), math.sin(h)
    return (x + c*dx - s*dy, y + s*dx + c*dy, z), float(wrap_angle(h + dyaw))


def _update_cluster(state):
    modules = []
    for m in state.modules:
        if m.module_id in state.cluster:
            position, heading = _attached_pose(state.robot_pose, state.cluster[m.module_id])
            m = dataclasses.replace(m, position=position, heading=heading)
        modules.append(m)
    state.modules = modules


def place_cluster(state, layout):
    """
    Attach modules to the robot. `layout` maps module ids to (dx, dy, dyaw) in
    the sensor module frame; modules not in the layout stay where they are.
    """
    state = state.copy()
    state.cluster = dict(layout)
    state.cluster.pop(state.sensor_id, None)
    _update_cluster(state)
    return state


def _integrate(x, y, h, v, w, dt):
    if abs(w) < 1e-12:
        return x + v*dt*math.cos(h), y + v*dt*math.sin(h), h
    nh = h + w*dt
    return (x + v/w * (math.sin(nh) - math.sin(h)),
            y - v/w * (math.cos(nh) - math.cos(h)),
            nh)


@docsig
def step_world(state, joint_commands, dt):
    """
    Advance the world by `dt` seconds.

    Parameters
    ----------
    state : WorldState

    joint_commands : dict
        Maps module ids to joint velocities (left wheel, right wheel, pan,
        tilt) in rad/s; shorter tuples are padded with zeros.

    dt : float
        Time step in seconds.

    Returns
    -------
    state : WorldState
        The successor state; the input is left untouched.
    """
    if dt <= 0:
        raise ValueError('dt must be positive.')
    ids = set(m.module_id for m in state.modules)
    for module_id in joint_commands:
        if module_id not in ids:
            raise UnknownModule(module_id)

    conf = state.config
    r = conf['wheel_radius']
    new = state.copy()
    before = dict((m.module_id, m.position) for m in state.modules)

    def cmd(module_id):
        c = tuple(joint_commands.get(module_id, ())) + (0.0, 0.0, 0.0, 0.0)
        return c[:4]

    # the cluster moves as one rigid body, driven by its commanded modules
    twists = []
    for module_id in sorted(joint_commands):
        if module_id in state.cluster or module_id == state.sensor_id:
            wl, wr = cmd(module_id)[:2]
            if wl != 0.0 or wr != 0.0:
                twists.append((r*(wl + wr)/2.0, r*(wr - wl)/conf['cluster_track']))
    if twists:
        v = float(np.mean([t[0] for t in twists]))
        w = float(np.mean([t[1] for t in twists]))
        x, y, z, h = state.robot_pose
        x, y, h = _integrate(x, y, h, v, w, dt)
        new.robot_pose = (x, y, z, float(wrap_angle(h)))

    modules = []
    for m in state.modules:
        wl, wr, pan, tilt = cmd(m.module_id)
        joints = (m.joints[0] + wl*dt, m.joints[1] + wr*dt,
                  float(np.clip(m.joints[2] + pan*dt, -conf['pan_limit'], conf['pan_limit'])),
                  float(np.clip(m.joints[3] + tilt*dt, -conf['tilt_limit'], conf['tilt_limit'])))
        position, heading = m.position, m.heading
        if m.module_id not in state.cluster and m.module_id != state.sensor_id:
            v = r*(wl + wr)/2.0
            w = r*(wr - wl)/conf['module_track']
            x, y, heading = _integrate(position[0], position[1], heading, v, w, dt)
            position = (x, y, position[2])
            heading = float(wrap_angle(heading))
        elif m.module_id == state.sensor_id:
            position = tuple(new.robot_pose[:3])
            heading = new.robot_pose[3]
        modules.append(ModulePose(m.module_id, position, heading, joints))
    new.modules = modules
    _update_cluster(new)

    after = dict((m.module_id, m.position) for m in new.modules)
    objects = []
    for o in state.objects:
        if o.carried_by is not None:
            delta = np.asarray(after[o.carried_by]) - np.asarray(before[o.carried_by])
            position = tuple(float(p) for p in np.asarray(o.position) + delta)
            o = dataclasses.replace(o, position=position)
        objects.append(o)
    new.objects = objects
    new.tick = state.tick + 1
    return new


def play_script(state, behavior, dt=None):
    """
    Execute a static behavior: its timed joint-velocity sequence is applied
    step by step through `step_world`.
    """
    dt = state.config['dt'] if dt is None else dt
    for frame in behavior.script:
        for _ in range(max(1, int(round(frame['duration'] / dt)))):
            state = step_world(state, frame['joints'], dt)
    return state


def _cell(state, position):
    return tuple(int(math.floor(p / state.resolution)) for p in position[:3])


def solid_and_colors(state):
    """ Static voxels with the uncarried task objects stamped in. """
    blocked = state.voxels.copy()
    colors = state.colors.copy()
    for o in state.objects:
        if o.carried_by is not None:
            continue
        i, j, k = _cell(state, o.position)
        if 0 <= i < blocked.shape[0] and 0 <= j < blocked.shape[1] and 0 <= k < blocked.shape[2]:
            blocked[i, j, k] = True
            colors[i, j, k] = o.color
    return blocked, colors


def render_depth(state, sensor_pose=None):
    """
    Idealized RGB-D frame: one ray per sample of a fixed angular grid, each
    reporting the first solid voxel it enters (occlusion respected) with its
    color, or the distance at which it left the world / reached the floor.
    """
    if sensor_pose is None:
        sensor_pose = state.sensor_pose()
    if not state.in_bounds(sensor_pose):
        raise ValueError('Sensor pose {} lies outside the world.'.format(sensor_pose))
    conf = state.config
    directions = raycast.ray_directions(
            sensor_pose[3], conf['fov_h'], conf['fov_v'], conf['n_h'], conf['n_v'])
    origins = np.broadcast_to(np.asarray(sensor_pose[:3], dtype=float), directions.shape)
    blocked, colors = solid_and_colors(state)
    ranges, hit_cells = raycast.cast(
            origins, directions, conf['max_range'], blocked, state.resolution)
    hit = hit_cells[:, 0] >= 0
    hit_colors = np.full(directions.shape[0], '', dtype=colors.dtype)
    hc = hit_cells[hit]
    hit_colors[hit] = colors[hc[:,0], hc[:,1], hc[:,2]]
    return SensorFrame(
            directions=directions, ranges=ranges, hit=hit, colors=hit_colors,
            sensor_pose=tuple(float(p) for p in sensor_pose),
            fov_h=conf['fov_h'], fov_v=conf['fov_v'], max_range=conf['max_range'])


def in_zone(state, sensor_pose, position):
    """ Whether a position lies in the localization rectangle in front of the sensor module. """
    conf = state.config
    x, y, h = sensor_pose[0], sensor_pose[1], sensor_pose[-1]
    dx, dy = position[0] - x, position[1] - y
    lx = math.cos(h)*dx + math.sin(h)*dy
    ly = -math.sin(h)*dx + math.cos(h)*dy
    return 0.0 < lx <= conf['zone_depth'] and abs(ly) <= 0.5*conf['zone_width']


def reconfig_zone_poses(state, sensor_module_id):
    """
    Poses of the modules inside the reconfiguration zone, as seen by the
    downward-facing localization camera. Zero-mean Gaussian noise with the
    configured standard deviations is added; the noise is a deterministic
    function of the world seed and tick.
    """
    sensor = state.module(sensor_module_id)
    conf = state.config
    rng = np.random.default_rng([state.rng_seed, state.tick, 7])
    poses = []
    for m in state.modules:
        if m.module_id == sensor_module_id:
            continue
        if not in_zone(state, (sensor.position[0], sensor.position[1], sensor.heading), m.position):
            continue
        noise = rng.normal(0.0, 1.0, size=3)
        position = (m.position[0] + conf['pose_noise_std']*noise[0],
                    m.position[1] + conf['pose_noise_std']*noise[1],
                    m.position[2])
        heading = float(wrap_angle(m.heading + conf['heading_noise_std']*noise[2]))
        poses.append(ModulePose(m.module_id, position, heading, m.joints))
    return poses


def _move_robot(state, xy, z):
    """ Displace the robot (and whatever it carries) to a new base position. """
    new = state.copy()
    before = dict((m.module_id, m.position) for m in state.modules)
    x, y, _, h = state.robot_pose
    new.robot_pose = (float(xy[0]), float(xy[1]), float(z), h)
    new.modules = [dataclasses.replace(m, position=new.robot_pose[:3])
                   if m.module_id == state.sensor_id else m for m in state.modules]
    _update_cluster(new)
    after = dict((m.module_id, m.position) for m in new.modules)
    new.objects = [
        dataclasses.replace(o, position=tuple(float(p) for p in np.asarray(o.position) + np.asarray(after[o.carried_by]) - np.asarray(before[o.carried_by])))
        if o.carried_by is not None else o
        for o in state.objects]
    return new


def _target_geometry(state, target):
    x, y, z, h = state.robot_pose
    d = np.asarray(target.position[:2]) - np.array([x, y])
    forward = float(d @ np.array([math.cos(h), math.sin(h)]))
    lateral = abs(float(d @ np.array([-math.sin(h), math.cos(h)])))
    height = float(target.position[2] - z)
    return forward, lateral, height


def _near_stairs(state, point_fn):
    x, y, _, h = state.robot_pose
    tol = state.config['stairs_tolerance']
    for s in state.stairs:
        p = point_fn(s)
        facing = abs(float(wrap_angle(h - s.heading))) <= math.pi/4
        if np.hypot(p[0] - x, p[1] - y) <= tol and facing:
            return s
    return None


def apply_behavior_effect(state, entry, env, target=None):
    """
    Apply the abstract effect of a library behavior (pickUp, drop, highReach,
    climbUp, climbDown) to the world.

    The behavior succeeds only if the sensed environment type is one the entry
    admits and the entry's rated property values cover the actual terrain;
    otherwise `BehaviorFailure` is raised with reason env_mismatch,
    out_of_reach or no_target. The input state is left untouched.
    """
    effect = entry.behavior.effect
    params = dict(entry.behavior.params)
    params.update(entry.env_property_values)
    if env not in entry.environment_types:
        raise BehaviorFailure('env_mismatch', '{:s} not admitted by {:s}'.format(str(env), entry.name))

    grasp = state.config['grasp_radius']
    if isinstance(target, str):
        target = state.object(target)

    if effect == 'pickUp':
        if target is None or target.carried_by is not None:
            raise BehaviorFailure('no_target')
        forward, lateral, height = _target_geometry(state, target)
        if forward < 0.0 or forward > params.get('reach', 0.24) + grasp or lateral > grasp:
            raise BehaviorFailure('no_target', 'nothing within grasp radius')
        if height > params.get('max_height', 0.12):
            raise BehaviorFailure('out_of_reach', 'object {:.2f} m above the base'.format(height))
        new = state.copy()
        new.objects = [dataclasses.replace(o, carried_by=state.sensor_id)
                       if o.object_id == target.object_id else o for o in state.objects]
        return new

    if effect == 'drop':
        carried = state.carried_objects()
        if not carried:
            raise BehaviorFailure('no_target', 'nothing carried')
        if target is not None:
            forward, lateral, height = _target_geometry(state, target)
            if forward < 0.0 or forward > params.get('reach', 0.24) + 2*grasp or lateral > 2*grasp:
                raise BehaviorFailure('out_of_reach', 'drop point too far from {:s}'.format(target.object_id))
        x, y, z, h = state.robot_pose
        d = params.get('drop_distance', 0.08)
        position = (x + d*math.cos(h), y + d*math.sin(h), z + 0.5*state.resolution)
        new = state.copy()
        # the whole load is released at the drop point
        dropped = set(o.object_id for o in carried)
        new.objects = [dataclasses.replace(o, carried_by=None, position=position, height_above_ground=position[2])
                       if o.object_id in dropped else o for o in state.objects]
        return new

    if effect == 'highReach':
        if target is None:
            raise BehaviorFailure('no_target')
        forward, lateral, height = _target_geometry(state, target)
        if height > params.get('rated_height', 0.32) + 1e-9:
            raise BehaviorFailure('env_mismatch', 'target {:.2f} m high exceeds the rated height'.format(height))
        if forward < 0.0 or forward > params.get('reach', 0.24) + grasp or lateral > grasp:
            raise BehaviorFailure('out_of_reach')
        new = state.copy()
        new.objects = [dataclasses.replace(o, marked=True)
                       if o.object_id == target.object_id else o for o in state.objects]
        return new

    if effect in ('climbUp', 'climbDown'):
        up = effect == 'climbUp'
        if up:
            stairs = _near_stairs(state, lambda s: s.base) if state.robot_pose[2] < 1e-6 else None
        else:
            stairs = _near_stairs(state, lambda s: s.top_point()) if state.robot_pose[2] > 1e-6 else None
        if stairs is None:
            raise BehaviorFailure('out_of_reach', 'no stairs at the robot')
        if stairs.rise > params.get('rated_stair_rise', 0.0) + 1e-9:
            raise BehaviorFailure('env_mismatch', 'stair rise {:.3f} m exceeds rated {:.3f} m'.format(
                    stairs.rise, params.get('rated_stair_rise', 0.0)))
        if up:
            return _move_robot(state, stairs.top_point(), stairs.steps * stairs.rise)
        base = np.asarray(stairs.base) - 0.5*stairs.run*stairs.direction()
        return _move_robot(state, base, 0.0)

    raise ValueError('Behavior {:s} has no abstract effect.'.format(entry.name))


def ground_truth_grid(state, grid_class):
    """ A fully observed occupancy grid of the world (objects included). """
    blocked, colors = solid_and_colors(state)
    grid = grid_class(blocked.shape, state.resolution)
    grid.cells[:] = np.where(blocked, OCCUPIED, FREE)
    grid.colors[:] = np.where(blocked, colors, '')
    return grid


#
# scenario files
#

@dataclasses.dataclass
class Scenario:
    name: str
    size: tuple
    resolution: float
    boxes: list
    objects: list
    stairs: list
    robot_position: tuple
    robot_heading: float
    initial_configuration: str
    seed: int = 0
    tick_budget: int = 6000
    fault: FaultProfile = dataclasses.field(default_factory=FaultProfile)
    colors_of_interest: tuple = ()
    notes: str = ''

    def build_world(self, layout, sensor_id, config=None):
        """
        Voxelize the scenario and place the robot, its modules laid out
        according to `layout` (module id -> (dx, dy, dyaw) in meters/radians
        relative to the sensor module).
        """
        config = WorldConfig(resolution=self.resolution) if config is None else config
        shape = tuple(self.size)
        voxels = np.zeros(shape, dtype=bool)
        colors = np.full(shape, '', dtype='<U16')
        for box in self.boxes:
            lo, hi = box['min'], box['max']
            sl = tuple(slice(max(lo[a], 0), min(hi[a] + 1, shape[a])) for a in range(3))
            voxels[sl] = True
            colors[sl] = box.get('color') or ''
        if self.stairs:
            xs = (np.arange(shape[0]) + 0.5) * self.resolution
            ys = (np.arange(shape[1]) + 0.5) * self.resolution
            gx, gy = np.meshgrid(xs, ys, indexing='ij')
            xy = np.stack([gx, gy], axis=-1)
            zs = (np.arange(shape[2]) + 0.5) * self.resolution
            for s in self.stairs:
                height = s.height_at(xy)
                voxels |= zs[None, None, :] < height[:, :, None]

        x, y = self.robot_position
        robot_pose = (float(x), float(y), 0.0, float(self.robot_heading))
        modules = [ModulePose(sensor_id, robot_pose[:3], robot_pose[3])]
        for module_id in sorted(layout):
            if module_id == sensor_id:
                continue
            position, heading = _attached_pose(robot_pose, layout[module_id])
            modules.append(ModulePose(module_id, position, heading))

        objects = []
        for o in self.objects:
            carried_by = sensor_id if o.get('carried', False) else None
            position = tuple(float(p) for p in (o['position'] if carried_by is None else robot_pose[:3]))
            objects.append(TaskObject(o['id'], o['color'], position, position[2], carried_by))

        state = WorldState(
                voxels=voxels, colors=colors, resolution=self.resolution,
                objects=objects, modules=modules, robot_pose=robot_pose,
                cluster={}, sensor_id=sensor_id, stairs=list(self.stairs),
                tick=0, rng_seed=self.seed, config=config)
        state = place_cluster(state, dict((k, v) for k, v in layout.items() if k != sensor_id))
        for o in state.objects:
            if o.carried_by is None and not state.in_bounds(o.position):
                raise ParseError('object {:s} lies outside the world'.format(o.object_id), field='objects')
        return state


def _require(d, key, field):
    if key not in d:
        raise ParseError('missing key "{:s}"'.format(key), field=field)
    return d[key]


def scenario_from_dict(d):
    size = tuple(int(v) for v in _require(d, 'size', 'size'))
    if len(size) != 3:
        raise ParseError('size needs three voxel counts', field='size')
    robot = _require(d, 'robot', 'robot')
    stairs = []
    for n, s in enumerate(d.get('stairs', [])):
        try:
            stairs.append(Stairs(
                    base=tuple(float(v) for v in s['base']), heading=float(s.get('heading', 0.0)),
                    rise=float(s['rise']), run=float(s['run']), steps=int(s['steps']),
                    width=float(s['width']), landing=float(s.get('landing', 0.4))))
        except KeyError as e:
            raise ParseError('missing key {}'.format(e), field='stairs[{:d}]'.format(n))
    for n, box in enumerate(d.get('boxes', [])):
        if 'min' not in box or 'max' not in box:
            raise ParseError('a box needs "min" and "max" voxel indices', field='boxes[{:d}]'.format(n))
    for n, o in enumerate(d.get('objects', [])):
        for key in ('id', 'color'):
            _require(o, key, 'objects[{:d}]'.format(n))
        if 'position' not in o and not o.get('carried', False):
            raise ParseError('an object needs a position unless carried', field='objects[{:d}]'.format(n))
    fault = d.get('fault', {})
    unknown = set(fault) - set(FAULT_CATEGORIES)
    if unknown:
        raise ParseError('unknown fault category {:s}'.format(sorted(unknown)[0]), field='fault')
    try:
        fault = FaultProfile(rng_seed=int(d.get('seed', 0)), **fault)
    except (TypeError, ValueError) as e:
        raise ParseError(str(e), field='fault')
    return Scenario(
            name=d.get('name', 'scenario'),
            size=size,
            resolution=float(d.get('resolution', 0.08)),
            boxes=list(d.get('boxes', [])),
            objects=list(d.get('objects', [])),
            stairs=stairs,
            robot_position=tuple(float(v) for v in _require(robot, 'position', 'robot.position')),
            robot_heading=float(robot.get('heading', 0.0)),
            initial_configuration=_require(d, 'initial_configuration', 'initial_configuration'),
            seed=int(d.get('seed', 0)),
            tick_budget=int(d.get('tick_budget', 6000)),
            fault=fault,
            colors_of_interest=tuple(d.get('colors_of_interest', ())),
            notes=d.get('notes', ''))


def load_scenario(path):
    with open(path, 'r') as fp:
        try:
            d = json.load(fp)
        except json.JSONDecodeError as e:
            raise ParseError(e.msg, line=e.lineno)
    return scenario_from_dict(d)

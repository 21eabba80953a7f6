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
The library of configurations and behaviors. An entry pairs a configuration
graph with one behavior it can perform, the properties describing what the
behavior does and the environment types it is suitable for.

Library file schema (JSON)::

    {
      "configurations": {
        "<name>": {
          "modules": [{"id": "s0", "kind": "sensor", "layout": [x, y, yaw_deg]}, ...],
          "connections": [["s0", "front", "m1", "bottom"], ...],
          "notes": "..."
        }
      },
      "entries": [
        {
          "configuration": "<name>",
          "behavior": {"name": "pickUp", "kind": "static" | "parametric" | "effect",
                       "params": {...}, "script": [{"duration": s, "joints": {"m1": [wl, wr, pan, tilt]}}]},
          "properties": ["pickUp"],
          "environments": ["free", "tunnel"],
          "env_values": {"rated_stair_rise": 0.08}
        }
      ]
    }

Layouts are in module units (one module edge) relative to the sensor
module, yaw in degrees.
"""

import dataclasses
import json
import logging
import math

import networkx as nx

from msrrlib.envchar import EnvironmentType
from msrrlib.errors import ParseError, UnknownConfiguration
from msrrlib.nav import DriveCommand, to_wheel_speeds

logger = logging.getLogger(__name__)

MODULE_SIZE = 0.08

FACES = {
    'body': ('top', 'left', 'bottom', 'right'),
    'sensor': ('front', 'back'),
    'cube': ('front', 'left', 'back', 'right', 'top', 'bottom'),
}

# outward normal of a face, relative to the module heading
FACE_ANGLES = {
    'body': {'top': 0.0, 'left': math.pi/2, 'bottom': math.pi, 'right': -math.pi/2},
    'sensor': {'front': 0.0, 'back': math.pi},
    'cube': {'front': 0.0, 'left': math.pi/2, 'back': math.pi, 'right': -math.pi/2,
             'top': None, 'bottom': None},
}

EFFECTS = ('pickUp', 'drop', 'highReach', 'climbUp', 'climbDown')


class ConfigurationGraph(object):
    """
    Modules as nodes (with kind and layout), connections as edges carrying the
    face used on either end.
    """

    def __init__(self, name, modules=(), connections=(), notes=''):
        self.name = name
        self.notes = notes
        self.graph = nx.Graph()
        for m in modules:
            self.add_module(m['id'], m['kind'], m.get('layout', (0, 0, 0)))
        for c in connections:
            self.connect(*c)

    def add_module(self, module_id, kind, layout=(0, 0, 0)):
        if kind not in FACES:
            raise ValueError('Unknown module kind "{}".'.format(kind))
        if module_id in self.graph:
            raise ValueError('Duplicate module id "{}".'.format(module_id))
        self.graph.add_node(module_id, kind=kind, layout=tuple(float(v) for v in layout))

    def faces_in_use(self, module_id):
        return set(self.graph.edges[module_id, n]['faces'][module_id] for n in self.graph.neighbors(module_id))

    def connect(self, a, face_a, b, face_b):
        for m, f in ((a, face_a), (b, face_b)):
            if m not in self.graph:
                raise ValueError('Unknown module "{}".'.format(m))
            if f not in FACES[self.kind(m)]:
                raise ValueError('Module {} ({}) has no face "{}".'.format(m, self.kind(m), f))
            if f in self.faces_in_use(m):
                raise ValueError('Face {}.{} is already connected.'.format(m, f))
        if self.graph.has_edge(a, b):
            raise ValueError('Modules {} and {} are already connected.'.format(a, b))
        self.graph.add_edge(a, b, faces={a: face_a, b: face_b})

    def disconnect(self, module_id, face):
        for n in list(self.graph.neighbors(module_id)):
            faces = self.graph.edges[module_id, n]['faces']
            if faces[module_id] == face:
                self.graph.remove_edge(module_id, n)
                return n, faces[n]
        raise ValueError('Face {}.{} is not connected.'.format(module_id, face))

    def kind(self, module_id):
        return self.graph.nodes[module_id]['kind']

    def modules(self):
        return sorted(self.graph.nodes)

    def sensor_modules(self):
        return [m for m in self.modules() if self.kind(m) == 'sensor']

    def connections(self):
        """ Connections as (a, face_a, b, face_b) tuples with a < b, sorted. """
        out = []
        for a, b, data in self.graph.edges(data=True):
            a, b = sorted((a, b))
            out.append((a, data['faces'][a], b, data['faces'][b]))
        return sorted(out)

    def is_connected(self):
        return self.graph.number_of_nodes() > 0 and nx.is_connected(self.graph)

    def validate(self):
        if not self.is_connected():
            raise ValueError('Configuration {} is not connected.'.format(self.name))
        if len(self.sensor_modules()) != 1:
            raise ValueError('Configuration {} needs exactly one sensor module.'.format(self.name))

    def layout(self, module_size=MODULE_SIZE):
        """ Module id -> (dx, dy, dyaw) in meters and radians relative to the sensor module. """
        return dict((m, (d['layout'][0]*module_size, d['layout'][1]*module_size, math.radians(d['layout'][2])))
                    for m, d in self.graph.nodes(data=True))

    def copy(self, name=None):
        new = ConfigurationGraph(self.name if name is None else name, notes=self.notes)
        new.graph = self.graph.copy()
        for a, b in new.graph.edges:
            new.graph.edges[a, b]['faces'] = dict(self.graph.edges[a, b]['faces'])
        return new

    def to_dict(self):
        return {
            'modules': [{'id': m, 'kind': self.kind(m), 'layout': list(self.graph.nodes[m]['layout'])}
                        for m in self.modules()],
            'connections': [list(c) for c in self.connections()],
            'notes': self.notes,
        }

    def __eq__(self, other):
        if not isinstance(other, ConfigurationGraph):
            return NotImplemented
        return self.name == other.name and self.to_dict() == other.to_dict()

    def __repr__(self):
        return 'ConfigurationGraph({!r}, {:d} modules)'.format(self.name, self.graph.number_of_nodes())


@dataclasses.dataclass
class Behavior:
    """
    Base class of behaviors. Subclasses implement `commands`, which yields
    per-module joint velocity dicts.
    """
    name: str
    kind: str = None
    params: dict = dataclasses.field(default_factory=dict)
    script: list = dataclasses.field(default_factory=list)

    def commands(self, **inputs):
        raise NotImplementedError('Implement this in your behavior kind.')

    def modules(self):
        return set(m for frame in self.script for m in frame['joints'])

    def to_dict(self):
        d = {'name': self.name, 'kind': self.kind, 'params': dict(self.params)}
        if self.script:
            d['script'] = [dict(frame) for frame in self.script]
        return d


@dataclasses.dataclass
class StaticBehavior(Behavior):
    """ A fixed, timed joint-velocity sequence. """

    def __post_init__(self):
        self.kind = 'static'

    def commands(self, **inputs):
        for frame in self.script:
            yield frame['duration'], frame['joints']


@dataclasses.dataclass
class ParametricBehavior(Behavior):
    """
    Joint commands generated at run time from declared parameters. The drive
    behavior maps a (v, omega) command to the wheels of its drive modules.
    """

    def __post_init__(self):
        self.kind = 'parametric'

    def parameter_ranges(self):
        return dict((k, tuple(v)) for k, v in self.params.items() if k not in ('drive_modules', 'track', 'wheel_radius'))

    def check(self, **inputs):
        for key, (lo, hi) in self.parameter_ranges().items():
            value = inputs.get(key, 0.0)
            if not lo - 1e-9 <= value <= hi + 1e-9:
                raise ValueError('{:s}={} outside [{}, {}] for {:s}.'.format(key, value, lo, hi, self.name))

    def commands(self, v=0.0, omega=0.0, **inputs):
        self.check(v=v, omega=omega)
        track = self.params.get('track', 2*MODULE_SIZE)
        radius = self.params.get('wheel_radius', MODULE_SIZE/2)
        wl, wr = to_wheel_speeds(DriveCommand(v, omega), track, radius)
        yield dict((m, (wl, wr)) for m in self.params.get('drive_modules', ()))


@dataclasses.dataclass
class EffectBehavior(Behavior):
    """
    A behavior whose outcome is applied to the world as an abstract effect
    (pickUp, drop, highReach, climbUp, climbDown); an optional script is the
    gait that precedes it.
    """

    def __post_init__(self):
        self.kind = 'effect'
        if self.effect not in EFFECTS:
            raise ValueError('Behavior {} has no abstract effect.'.format(self.name))

    @property
    def effect(self):
        return self.params.get('effect', self.name)

    def commands(self, **inputs):
        for frame in self.script:
            yield frame['duration'], frame['joints']


BEHAVIOR_KINDS = {
    'static': StaticBehavior,
    'parametric': ParametricBehavior,
    'effect': EffectBehavior,
}


@dataclasses.dataclass
class LibraryEntry:
    configuration: ConfigurationGraph
    behavior: Behavior
    behavior_properties: frozenset
    environment_types: frozenset
    env_property_values: dict = dataclasses.field(default_factory=dict)

    @property
    def name(self):
        return '{:s}.{:s}'.format(self.configuration.name, self.behavior.name)

    def to_dict(self):
        return {
            'configuration': self.configuration.name,
            'behavior': self.behavior.to_dict(),
            'properties': sorted(self.behavior_properties),
            'environments': [t.value.lower() for t in EnvironmentType if t in self.environment_types],
            'env_values': dict(self.env_property_values),
        }

    def __repr__(self):
        return 'LibraryEntry({:s})'.format(self.name)


class Library(object):
    """ Immutable after loading; entries keep insertion order. """

    def __init__(self, configurations=None, entries=()):
        self.configurations = dict(configurations or {})
        self.entries = list(entries)

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __eq__(self, other):
        if not isinstance(other, Library):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def configuration(self, name):
        if name not in self.configurations:
            raise UnknownConfiguration(name)
        return self.configurations[name]

    def to_dict(self):
        return {
            'configurations': dict((n, c.to_dict()) for n, c in self.configurations.items()),
            'entries': [e.to_dict() for e in self.entries],
        }


def query(lib, prop, env):
    """ Entries with `prop` among their properties and `env` among their environment types. """
    return [e for e in lib.entries if prop in e.behavior_properties and env in e.environment_types]


def entries_for_configuration(lib, config_name):
    lib.configuration(config_name)
    return [e for e in lib.entries if e.configuration.name == config_name]


def _configuration_from_dict(name, d):
    field = 'configurations.{:s}'.format(name)
    try:
        modules = d['modules']
        connections = d.get('connections', [])
    except (KeyError, TypeError):
        raise ParseError('missing key "modules"', field=field)
    for n, m in enumerate(modules):
        for key in ('id', 'kind'):
            if key not in m:
                raise ParseError('missing key "{:s}"'.format(key), field='{:s}.modules[{:d}]'.format(field, n))
        if m['kind'] not in FACES:
            raise ParseError('unknown module kind "{}"'.format(m['kind']), field='{:s}.modules[{:d}].kind'.format(field, n))
    config = ConfigurationGraph(name, notes=d.get('notes', ''))
    try:
        for m in modules:
            config.add_module(m['id'], m['kind'], m.get('layout', (0, 0, 0)))
        for n, c in enumerate(connections):
            if len(c) != 4:
                raise ValueError('a connection is [module_a, face_a, module_b, face_b]')
            config.connect(*c)
        config.validate()
    except ValueError as e:
        raise ParseError(str(e), field=field)
    return config


def _behavior_from_dict(d, field):
    if 'name' not in d:
        raise ParseError('missing key "name"', field=field)
    kind = d.get('kind', 'effect')
    if kind not in BEHAVIOR_KINDS:
        raise ParseError('unknown behavior kind "{}"'.format(kind), field=field + '.kind')
    for n, frame in enumerate(d.get('script', [])):
        if 'duration' not in frame or 'joints' not in frame:
            raise ParseError('a script frame needs "duration" and "joints"', field='{:s}.script[{:d}]'.format(field, n))
    try:
        return BEHAVIOR_KINDS[kind](name=d['name'], params=dict(d.get('params', {})),
                                    script=list(d.get('script', [])))
    except ValueError as e:
        raise ParseError(str(e), field=field)


def _entry_from_dict(lib, d, n):
    field = 'entries[{:d}]'.format(n)
    for key in ('configuration', 'behavior', 'properties', 'environments'):
        if key not in d:
            raise ParseError('missing key "{:s}"'.format(key), field=field)
    name = d['configuration']
    if name not in lib.configurations:
        raise ParseError('unknown configuration "{}"'.format(name), field=field + '.configuration')
    config = lib.configurations[name]
    behavior = _behavior_from_dict(d['behavior'], field + '.behavior')

    if not d['properties']:
        raise ParseError('behavior properties must not be empty', field=field + '.properties')
    if not d['environments']:
        raise ParseError('environment types must not be empty', field=field + '.environments')
    environments = []
    for tag in d['environments']:
        try:
            environments.append(EnvironmentType.parse(tag))
        except ValueError:
            raise ParseError('unknown environment type "{}"'.format(tag), field=field + '.environments')

    used = behavior.modules() | set(behavior.params.get('drive_modules', ()))
    missing = used - set(config.modules())
    if missing:
        raise ParseError('behavior references modules {} not in {}'.format(sorted(missing), name),
                         field=field + '.behavior')
    return LibraryEntry(
            configuration=config,
            behavior=behavior,
            behavior_properties=frozenset(d['properties']),
            environment_types=frozenset(environments),
            env_property_values=dict(d.get('env_values', {})))


def library_from_dict(d):
    lib = Library()
    for name, c in d.get('configurations', {}).items():
        lib.configurations[name] = _configuration_from_dict(name, c)
    for n, e in enumerate(d.get('entries', [])):
        lib.entries.append(_entry_from_dict(lib, e, n))
    logger.debug('library with %d entries for %d configurations', len(lib.entries), len(lib.configurations))
    return lib


def loads_library(text):
    if not text.strip():
        return Library()
    try:
        d = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, line=e.lineno)
    if not isinstance(d, dict):
        raise ParseError('the library must be a JSON object', line=1)
    return library_from_dict(d)


def load_library(path):
    with open(path, 'r') as fp:
        return loads_library(fp.read())


def save_library(lib, path):
    with open(path, 'w') as fp:
        json.dump(lib.to_dict(), fp, indent=1)

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
Command-line entry point.

    msrr run --scenario demo2/scenario.json [--spec ...] [--out DIR]
    msrr synth SPEC
    msrr characterize --scenario demo1/scenario.json OBJECT_ID

Exit codes: 0 success, 2 parse or usage error, 3 unrealizable
specification, 4 mission failed, 5 unknown object.

`run` writes to the output directory: events.jsonl (one event per line),
map.txt (the final belief map), automaton.txt and summary.json (result,
ticks, reconfigurations, distance traveled).
"""

import argparse
import dataclasses
import json
import os
import sys

from msrrlib.core import Component, SimConfig
from msrrlib.designlib import load_library
from msrrlib.envchar import characterize, debug_dump
from msrrlib.errors import MSRRError, MissionFailed, NoReachablePoint, ParseError
from msrrlib.executor import MissionConfig, MissionExecutor, write_events
from msrrlib.mapping import OccupancyGrid, detect_objects, export_map
from msrrlib.reconfig import load_plans
from msrrlib.specparse import load_spec
from msrrlib.synth import Unrealizable, synthesize
from msrrlib import worldsim

DATA_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'data')

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_UNREALIZABLE = 3
EXIT_MISSION_FAILED = 4
EXIT_UNKNOWN_OBJECT = 5


class RunConfig(SimConfig):

    def init(self):
        self.update(
                scope_name='msrr.cli',
                scenario=None,
                spec=None,
                library=os.path.join(DATA_DIR, 'library.json'),
                plans=os.path.join(DATA_DIR, 'plans.json'),
                tick_budget=None,
                fault={},
                out='.')

    def validate(self):
        for key in ('scenario', 'spec', 'library', 'plans'):
            if self[key] is not None and not os.path.isfile(self[key]):
                raise ValueError('{:s} file {} does not exist.'.format(key, self[key]))
        for category, p in self['fault'].items():
            if category not in worldsim.FAULT_CATEGORIES:
                raise ValueError('Unknown fault category "{}".'.format(category))
            if not 0.0 <= p <= 1.0:
                raise ValueError('Fault probability for {} must lie in [0, 1].'.format(category))


def _fault_override(text):
    try:
        category, p = text.split('=')
        return category.strip(), float(p)
    except ValueError:
        raise argparse.ArgumentTypeError('expected <category>=<probability>, got "{}"'.format(text))


def _spec_path(config):
    if config['spec'] is not None:
        return config['spec']
    return os.path.join(os.path.dirname(config['scenario']), 'mission.spec')


class MissionRunner(Component):
    """ Loads the input files of one invocation and runs the requested subsystem. """

    config_class = RunConfig

    def _print_unrealizable(self, outcome):
        print('unrealizable: {:s}'.format(outcome.reason))
        for n, valuation in enumerate(outcome.trace):
            print('  {:d}: {:s}'.format(n, ' '.join(
                    (k if v else '!' + k) for k, v in sorted(valuation.items())) or '-'))
        if outcome.loop is not None:
            print('  loop back to {:d}'.format(outcome.loop))

    def run(self):
        conf = self.config
        try:
            lib = load_library(conf['library'])
            plans = load_plans(conf['plans'])
            scenario = worldsim.load_scenario(conf['scenario'])
            spec = load_spec(_spec_path(conf))
        except (ParseError, OSError) as e:
            self.logger.error('cannot load inputs: %s', e)
            return EXIT_PARSE

        try:
            outcome = synthesize(spec)
        except MSRRError as e:
            self.logger.error('%s', e)
            return EXIT_PARSE
        if isinstance(outcome, Unrealizable):
            self._print_unrealizable(outcome)
            return EXIT_UNREALIZABLE

        if conf['fault']:
            scenario.fault = dataclasses.replace(scenario.fault, **conf['fault'])
        mission_config = MissionConfig(seed=conf['seed'], tick_budget=conf['tick_budget'],
                                       log_level=conf['log_level'])
        try:
            executor = MissionExecutor(scenario, spec, lib, plans, mission_config, outcome.automaton)
        except (MissionFailed, ParseError, ValueError) as e:
            self.logger.error('cannot start the mission: %s', e)
            return EXIT_PARSE
        state = executor.run()

        os.makedirs(conf['out'], exist_ok=True)
        write_events(state.events, os.path.join(conf['out'], 'events.jsonl'))
        with open(os.path.join(conf['out'], 'map.txt'), 'w') as fp:
            fp.write(export_map(executor.grid))
        with open(os.path.join(conf['out'], 'automaton.txt'), 'w') as fp:
            fp.write(outcome.automaton.export())
        with open(os.path.join(conf['out'], 'summary.json'), 'w') as fp:
            json.dump(state.summary(), fp, sort_keys=True, indent=1)

        print(json.dumps(state.summary(), sort_keys=True))
        return EXIT_OK if state.result == 'complete' else EXIT_MISSION_FAILED

    def synth(self, path):
        try:
            spec = load_spec(path)
        except (ParseError, OSError) as e:
            self.logger.error('cannot load %s: %s', path, e)
            return EXIT_PARSE
        try:
            outcome = synthesize(spec)
        except MSRRError as e:
            self.logger.error('%s', e)
            return EXIT_PARSE
        if isinstance(outcome, Unrealizable):
            self._print_unrealizable(outcome)
            return EXIT_UNREALIZABLE
        sys.stdout.write(outcome.automaton.export())
        return EXIT_OK

    def characterize(self, object_id):
        try:
            lib = load_library(self.config['library'])
            scenario = worldsim.load_scenario(self.config['scenario'])
            initial = lib.configuration(scenario.initial_configuration)
            world = scenario.build_world(initial.layout(), initial.sensor_modules()[0])
        except (MSRRError, OSError) as e:
            self.logger.error('cannot load inputs: %s', e)
            return EXIT_PARSE
        try:
            target = world.object(object_id)
        except KeyError:
            self.logger.error('unknown object "%s"', object_id)
            return EXIT_UNKNOWN_OBJECT

        grid = worldsim.ground_truth_grid(world, OccupancyGrid)
        cell = grid.cell_of(target.position)
        detections = [d for d in detect_objects(grid, [target.color]) if cell in d.support]
        if not detections:
            self.logger.error('object "%s" is not visible in the world', object_id)
            return EXIT_UNKNOWN_OBJECT
        try:
            result = characterize(grid, detections[0], world.robot_pose)
        except NoReachablePoint as e:
            print('no reachable point: {}'.format(e))
            return EXIT_MISSION_FAILED
        print('object: {:s} ({:s})'.format(object_id, target.color))
        print('environment: {:s}'.format(str(result.env_type)))
        print('distance: {:.3f}'.format(result.closest_reachable_distance))
        print('waypoint: ({:.3f}, {:.3f}) heading {:.3f}'.format(
                result.staging_waypoint.position[0], result.staging_waypoint.position[1],
                result.staging_waypoint.heading))
        sys.stdout.write(debug_dump(grid, detections[0], world.robot_pose, result))
        return EXIT_OK


def cmd_run(config):
    return MissionRunner(config).run()


def cmd_synth(path, config=None):
    return MissionRunner(config).synth(path)


def cmd_characterize(scenario, object_id, library=None):
    config = RunConfig(scenario=scenario)
    if library is not None:
        config['library'] = library
    return MissionRunner(config).characterize(object_id)


def build_parser():
    parser = argparse.ArgumentParser(prog='msrr', description='Modular self-reconfigurable robot missions.')
    sub = parser.add_subparsers(dest='command')

    run = sub.add_parser('run', help='run a mission')
    run.add_argument('--scenario', required=True)
    run.add_argument('--spec', default=None, help='defaults to mission.spec next to the scenario')
    run.add_argument('--library', default=os.path.join(DATA_DIR, 'library.json'))
    run.add_argument('--plans', default=os.path.join(DATA_DIR, 'plans.json'))
    run.add_argument('--seed', type=int, default=0)
    run.add_argument('--ticks', type=int, default=None, help='tick budget, overrides the scenario')
    run.add_argument('--out', default='.')
    run.add_argument('--fault', type=_fault_override, action='append', default=[],
                     help='<category>=<probability>, repeatable')
    run.add_argument('--verbose', action='store_true')

    synth = sub.add_parser('synth', help='synthesize a mission automaton')
    synth.add_argument('spec')

    char = sub.add_parser('characterize', help='characterize the environment of an object')
    char.add_argument('--scenario', required=True)
    char.add_argument('--library', default=os.path.join(DATA_DIR, 'library.json'))
    char.add_argument('object_id')
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_PARSE if e.code else EXIT_OK
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_PARSE

    if args.command == 'synth':
        return cmd_synth(args.spec)
    try:
        if args.command == 'characterize':
            config = RunConfig(scenario=args.scenario, library=args.library)
            return MissionRunner(config).characterize(args.object_id)
        config = RunConfig(
                scenario=args.scenario, spec=args.spec, library=args.library, plans=args.plans,
                seed=args.seed, tick_budget=args.ticks, out=args.out, fault=dict(args.fault),
                log_level='DEBUG' if args.verbose else 'INFO')
    except ValueError as e:
        print('msrr: {}'.format(e), file=sys.stderr)
        return EXIT_PARSE
    return cmd_run(config)


if __name__ == '__main__':
    sys.exit(main())

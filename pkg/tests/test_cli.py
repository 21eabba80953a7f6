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

import json
import os

import pytest

from conftest import demo_path
from msrrlib import cli
from msrrlib.cli import RunConfig, main

UNREALIZABLE = """
BINDINGS
env a = seen(red)
sys x = drive(explore)
SYS TRANS
next(x) <-> next(a)
SYS LIVE
!x
"""


@pytest.fixture
def unrealizable(tmp_path):
    path = tmp_path / 'toggle.spec'
    path.write_text(UNREALIZABLE)
    return str(path)


def test_synth(capsys):
    assert main(['synth', demo_path(2, 'mission.spec')]) == cli.EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith('# node')
    assert len(lines) > 3
    assert any(line.startswith('*') for line in lines[1:])


def test_synth_unrealizable(capsys, unrealizable):
    assert main(['synth', unrealizable]) == cli.EXIT_UNREALIZABLE
    out = capsys.readouterr().out
    assert 'unrealizable: no initial system valuation is winning' in out
    assert '0: !a' in out
    assert '1: a' in out
    assert 'loop back to 1' in out


def test_synth_malformed(tmp_path):
    path = tmp_path / 'bad.spec'
    path.write_text('BINDINGS\nsys x = drive(explore)\nSYS INIT\nx &\n')
    assert main(['synth', str(path)]) == cli.EXIT_PARSE
    assert main(['synth', str(tmp_path / 'missing.spec')]) == cli.EXIT_PARSE


def test_usage_errors():
    assert main([]) == cli.EXIT_PARSE
    assert main(['fly']) == cli.EXIT_PARSE
    assert main(['run']) == cli.EXIT_PARSE


@pytest.mark.parametrize('n,object_id,env', [
    (1, 'pinkBlock', 'Tunnel'),
    (3, 'package', 'High'),
])
def test_characterize(capsys, n, object_id, env):
    assert main(['characterize', '--scenario', demo_path(n, 'scenario.json'), object_id]) == cli.EXIT_OK
    out = capsys.readouterr().out
    assert 'environment: {:s}'.format(env) in out
    assert 'waypoint: (' in out


def test_characterize_unknown_object():
    assert cli.cmd_characterize(demo_path(3, 'scenario.json'), 'unicorn') == cli.EXIT_UNKNOWN_OBJECT


def test_run(capsys, tmp_path):
    out = str(tmp_path / 'out')
    assert main(['run', '--scenario', demo_path(3, 'scenario.json'), '--out', out]) == cli.EXIT_OK
    for fname in ('events.jsonl', 'map.txt', 'automaton.txt', 'summary.json'):
        assert os.path.isfile(os.path.join(out, fname))

    with open(os.path.join(out, 'summary.json')) as fp:
        summary = json.load(fp)
    assert summary['result'] == 'complete'
    assert summary['reconfigurations'] >= 1
    assert json.loads(capsys.readouterr().out.splitlines()[-1]) == summary

    with open(os.path.join(out, 'events.jsonl')) as fp:
        events = [json.loads(line) for line in fp]
    assert events[-1]['kind'] == 'mission_complete'
    assert any(e['kind'] == 'reconfig_done' and e['payload']['to'] == 'Proboscis' for e in events)


def test_run_failures(tmp_path, unrealizable):
    scenario = demo_path(3, 'scenario.json')
    out = str(tmp_path)
    assert main(['run', '--scenario', scenario, '--spec', unrealizable, '--out', out]) == cli.EXIT_UNREALIZABLE
    assert main(['run', '--scenario', scenario, '--ticks', '5', '--out', out]) == cli.EXIT_MISSION_FAILED
    with open(os.path.join(out, 'summary.json')) as fp:
        assert json.load(fp)['cause'] == 'timeout'


@pytest.mark.parametrize('fault', ['hardware', 'gremlins=0.5', 'hardware=2'])
def test_run_bad_fault(tmp_path, fault):
    argv = ['run', '--scenario', demo_path(3, 'scenario.json'), '--out', str(tmp_path), '--fault', fault]
    assert main(argv) == cli.EXIT_PARSE


def test_run_config():
    config = RunConfig(scenario=demo_path(2, 'scenario.json'))
    assert config['out'] == '.'
    assert os.path.isfile(config['library'])
    with pytest.raises(ValueError):
        RunConfig(scenario='/nonexistent/scenario.json')
    with pytest.raises(ValueError):
        RunConfig(fault={'network': -0.1})


def _many_props(n):
    lines = ['BINDINGS'] + ['sys x{:d} = drive(explore)'.format(i) for i in range(n)]
    return '\n'.join(lines) + '\n'


def test_proposition_bound(tmp_path):
    path = tmp_path / 'large.spec'
    path.write_text(_many_props(17))
    assert main(['synth', str(path)]) == cli.EXIT_PARSE
    argv = ['run', '--scenario', demo_path(3, 'scenario.json'), '--spec', str(path), '--out', str(tmp_path)]
    assert main(argv) == cli.EXIT_PARSE
    assert not os.path.exists(os.path.join(str(tmp_path), 'summary.json'))


def test_run_scenario_fault_out_of_range(tmp_path):
    with open(demo_path(3, 'scenario.json')) as fp:
        d = json.load(fp)
    d['fault'] = {'hardware': 1.5}
    scenario = tmp_path / 'scenario.json'
    scenario.write_text(json.dumps(d))
    argv = ['run', '--scenario', str(scenario), '--spec', demo_path(3, 'mission.spec'), '--out', str(tmp_path)]
    assert main(argv) == cli.EXIT_PARSE

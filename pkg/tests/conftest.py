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

import os

import pytest

import msrrlib
from msrrlib.designlib import load_library
from msrrlib.reconfig import load_plans
from msrrlib.worldsim import scenario_from_dict

DATA_DIR = os.path.join(os.path.dirname(msrrlib.__file__), 'data')


def scenario_dict(**overrides):
    """ A walled 2.4 m x 2.4 m room with the Car in its left half. """
    d = {
        'name': 'room',
        'size': [30, 30, 5],
        'resolution': 0.08,
        'seed': 5,
        'tick_budget': 4000,
        'initial_configuration': 'Car',
        'robot': {'position': [0.6, 1.2], 'heading': 0.0},
        'boxes': [
            {'min': [0, 0, 0], 'max': [29, 0, 4], 'color': 'grey'},
            {'min': [0, 29, 0], 'max': [29, 29, 4], 'color': 'grey'},
            {'min': [0, 0, 0], 'max': [0, 29, 4], 'color': 'grey'},
            {'min': [29, 0, 0], 'max': [29, 29, 4], 'color': 'grey'},
        ],
        'objects': [],
        'colors_of_interest': ['pink'],
    }
    d.update(overrides)
    return d


@pytest.fixture
def library():
    return load_library(os.path.join(DATA_DIR, 'library.json'))


@pytest.fixture
def plans():
    return load_plans(os.path.join(DATA_DIR, 'plans.json'))


@pytest.fixture
def entry(library):

    def lookup(name):
        return next(e for e in library.entries if e.name == name)

    return lookup


@pytest.fixture
def room():
    return scenario_from_dict(scenario_dict())


def demo_path(n, fname):
    return os.path.join(DATA_DIR, 'demo{:d}'.format(n), fname)

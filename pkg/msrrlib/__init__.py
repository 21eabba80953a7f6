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

from msrrlib.core import Component, SimConfig, config_def, docsig
from msrrlib.errors import MSRRError, MissionFailed, ParseError, PlanError, ReconfigFailure
from msrrlib.worldsim import Scenario, WorldState, FaultProfile, load_scenario, step_world, render_depth, apply_behavior_effect
from msrrlib.mapping import OccupancyGrid, DetectedObject, ExplorationComplete, integrate_frame, detect_objects, next_best_view, export_map
from msrrlib.nav import Waypoint, DriveCommand, plan_path, follow_path, to_wheel_speeds
from msrrlib.envchar import EnvironmentType, Characterization, CharacterizationParams, characterize
from msrrlib.designlib import ConfigurationGraph, Library, LibraryEntry, query, load_library
from msrrlib.specparse import MissionSpec, parse_spec, load_spec
from msrrlib.synth import MissionAutomaton, Realizable, Unrealizable, synthesize, advance
from msrrlib.reconfig import ReconfigurationPlan, ReconfigExecutor, validate_plan, execute_plan, load_plans
from msrrlib.executor import MissionExecutor, MissionConfig, MissionState, evaluate_propositions, select_behavior, run_mission

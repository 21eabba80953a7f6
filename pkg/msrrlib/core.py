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

import numpy as np
import logging
import json
import sys
import inspect
import importlib


def docsig(f):
    """
    A decorator to add the function name and signature to the function's
    docstring.
    """
    sig = str(inspect.signature(f))
    sigstr = '{:s}{:s}\n\n'.format(f.__code__.co_name, sig)
    f.__doc__ = sigstr + inspect.cleandoc(f.__doc__ or '')
    return f


def config_def(fun):
    """
    A decorator to allow to pass a SimConfig directly to a function. Only
    the entries of the SimConfig with matching keys to one of the function
    argument names will be passed to the function.
    """
    fun_varnames = inspect.signature(fun).parameters.keys()

    def select_kwargs(*args, **kwargs):
        selected_kwargs = dict([
                (key,val) for key,val in kwargs.items() if key in fun_varnames])
        return fun(*args, **selected_kwargs)

    select_kwargs.__doc__ = fun.__doc__
    select_kwargs.__name__ = fun.__name__
    select_kwargs.__wrapped__ = fun

    return select_kwargs


def chunklist(values, length):
    """
    Create a generator to split a list into chunks of at most `length`
    elements. Unlike a strict split, the trailing shorter chunk is kept, since
    every ray of a batch has to be evaluated.

    >>> [l for l in chunklist(list(range(6)),2)]
    [[0, 1], [2, 3], [4, 5]]
    >>> [l for l in chunklist(list(range(7)),3)]
    [[0, 1, 2], [3, 4, 5], [6]]
    """
    for i in range(0, len(values), length):
        yield values[i:i+length]


def wrap_angle(a):
    """
    Wrap an angle (or array of angles) to [-pi, pi).

    >>> float(wrap_angle(3*np.pi/2))
    -1.5707963267948966
    >>> float(wrap_angle(0.5))
    0.5
    """
    return (np.asarray(a) + np.pi) % (2*np.pi) - np.pi


class SimConfigEncoder(json.JSONEncoder):

    CALLABLE_TYPE = 'MSRRLIB_SIMCONFIG_JSONENCODER__CALLABLE_TYPE'

    def default(self, obj):
        if callable(obj):
            return SimConfigEncoder.CALLABLE_TYPE, obj.__name__, obj.__module__
        if isinstance(obj, np.generic):
            return obj.item()
        if isinstance(obj, (set, frozenset)):
            return sorted(obj)
        return json.JSONEncoder.default(self, obj)


class SimConfig(dict):
    """
    Base configuration dictionary. Subclasses add their own keys in `init`;
    keyword arguments passed to the constructor override the defaults.
    """

    def __init__(self, *args, **kwargs):

        self.defaults = {
            'scope_name':               'msrr',
            'log_level':                logging.INFO,
            'log_file':                 None,
            'seed':                     0,
        }

        self.update(self.defaults)
        self.init()

        super(SimConfig, self).__init__(*args, **kwargs)
        self.validate()

    def init(self):
        pass

    def validate(self):
        pass

    def save(self, fname):
        with open(fname, 'w') as fp:
            json.dump(self, fp, cls=SimConfigEncoder, sort_keys=True, indent=1)

    def load(self, fname):
        with open(fname, 'r') as fp:
            conf = json.load(fp)
        for key,val in conf.items():
            if isinstance(val, list) and len(val) > 0:
                if val[0] == SimConfigEncoder.CALLABLE_TYPE:
                    conf[key] = importlib.import_module(val[2]).__dict__[val[1]]
        self.update(**conf)
        self.validate()
        return self


class Component(object):
    """
    Base class of the stateful parts of the system (mission executor,
    reconfiguration controller). Takes care of the logger set-up from the
    configuration.
    """

    config_class = SimConfig

    def __init__(self, config=None):

        if config is None:
            config = self.config_class()
        elif isinstance(config, str):
            config = self.config_class().load(config)
        elif not isinstance(config, SimConfig):
            raise ValueError('Expecting a SimConfig instance, or path to a config json file.')

        self.config = config
        self.init_logger()

    def init_logger(self):
        self.logger = logging.Logger(
                name=self.config['scope_name'], level=self.config['log_level'])
        self.logger_stderr_handler = logging.StreamHandler(stream=sys.stderr)
        self.logger.addHandler(self.logger_stderr_handler)
        if self.config['log_file'] is not None:
            self.logger_file_handler = logging.FileHandler(
                    self.config['log_file'], mode='w')
            self.logger.addHandler(self.logger_file_handler)

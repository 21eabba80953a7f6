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


class MSRRError(Exception):
    pass


class _ReasonError(MSRRError):
    """ An error carrying one reason out of a fixed vocabulary. """

    reasons = ()

    def __init__(self, reason, detail=''):
        if self.reasons and reason not in self.reasons:
            raise ValueError('Invalid {:s} reason "{:s}".'.format(type(self).__name__, reason))
        self.reason = reason
        self.detail = detail
        msg = reason if not detail else '{:s}: {:s}'.format(reason, detail)
        super(_ReasonError, self).__init__(msg)


class UnknownModule(MSRRError):
    pass


class BehaviorFailure(_ReasonError):
    reasons = ('env_mismatch', 'out_of_reach', 'no_target')


class NoReachablePoint(MSRRError):
    pass


class NoReachableCandidate(MSRRError):
    pass


class Unreachable(MSRRError):
    pass


class UnknownConfiguration(MSRRError):
    pass


class ParseError(MSRRError):

    def __init__(self, message, line=None, field=None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append('line {:d}'.format(line))
        if field is not None:
            where.append('field {:s}'.format(field))
        if where:
            message = '{:s} ({:s})'.format(message, ', '.join(where))
        super(ParseError, self).__init__(message)


class SpecSyntaxError(ParseError):

    def __init__(self, message, position, expected=(), line=None):
        self.position = position
        self.expected = tuple(expected)
        if self.expected:
            message = '{:s}; expected one of: {:s}'.format(message, ', '.join(self.expected))
        super(SpecSyntaxError, self).__init__(
                '{:s} at column {:d}'.format(message, position), line=line)


class UnboundProposition(ParseError):

    def __init__(self, name, line=None):
        self.name = name
        super(UnboundProposition, self).__init__(
                'unbound proposition "{:s}"'.format(name), line=line)


class BoundExceeded(MSRRError):
    pass


class AssumptionViolated(MSRRError):
    pass


class PlanError(_ReasonError):
    reasons = ('topology_mismatch', 'face_conflict', 'collision', 'out_of_zone')


class ReconfigFailure(_ReasonError):
    reasons = ('module_out_of_zone', 'dock_misaligned', 'timeout', 'hardware')


class NoCapableEntry(MSRRError):
    pass


class InjectedFault(MSRRError):

    def __init__(self, category):
        self.category = category
        super(InjectedFault, self).__init__('injected {:s} fault'.format(category))


class MissionFailed(MSRRError):

    def __init__(self, cause, detail=''):
        self.cause = cause
        self.detail = detail
        super(MissionFailed, self).__init__('{:s}: {:s}'.format(cause, detail))

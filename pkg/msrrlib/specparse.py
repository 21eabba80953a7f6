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
Mission specification files.

A file is a sequence of sections, each introduced by a header line::

    BINDINGS
    env mailBox = seen(blue)
    sys explore = drive(explore)
    sys driveToMailBox = drive(goto mailBox)
    sys drop = drop(mailBox)

    SYS INIT
    explore & !driveToMailBox & !drop

    SYS TRANS
    always !next(mailBox) -> next(explore)

    SYS LIVE
    always eventually drop

Sections: BINDINGS, ENV INIT, ENV TRANS, ENV LIVE, SYS INIT, SYS TRANS,
SYS LIVE. One formula per line; the formulas of an INIT or TRANS section are
conjoined, every LIVE line is one justice goal. '#' starts a comment.

Formulas: ``! & | -> <->``, parentheses, ``true``/``false``, ``next(x)``,
``next x`` or ``x'`` for next-step values, and the sugar ``if A then B``.
TRANS lines may start with ``always``, LIVE lines with ``always eventually``.

Environment bindings: ``seen(color, ...)``, ``holding(color, ...)``,
``envtype(free|tunnel|high|stairs)``, ``done(sysprop)``, ``explored``.
System bindings: ``drive(explore)``, ``drive(goto envprop)``,
``drive(home)``, ``<property>(envprop)``, ``<property>()``, ``complete``.
"""

import dataclasses
import re

import numpy as np

from msrrlib.envchar import EnvironmentType
from msrrlib.errors import ParseError, SpecSyntaxError, UnboundProposition

SECTIONS = ('BINDINGS', 'ENV INIT', 'ENV TRANS', 'ENV LIVE', 'SYS INIT', 'SYS TRANS', 'SYS LIVE')
ENV_BINDINGS = ('seen', 'holding', 'envtype', 'done', 'explored')
DRIVE_TARGETS = ('explore', 'goto', 'home')


#
# formula AST
#

class Formula(object):

    def evaluate(self, valuation):
        """ Truth value under a dict of current ("x") and next-step ("x'") values. """
        raise NotImplementedError()

    def vector(self, context):
        """ Truth values over broadcast boolean arrays, same keys as `evaluate`. """
        raise NotImplementedError()

    def variables(self):
        return set()


@dataclasses.dataclass(frozen=True)
class Const(Formula):
    value: bool

    def evaluate(self, valuation):
        return self.value

    def vector(self, context):
        return np.bool_(self.value)

    def __str__(self):
        return 'true' if self.value else 'false'


@dataclasses.dataclass(frozen=True)
class Var(Formula):
    name: str
    primed: bool = False

    @property
    def key(self):
        return self.name + "'" if self.primed else self.name

    def evaluate(self, valuation):
        return bool(valuation[self.key])

    def vector(self, context):
        return context[self.key]

    def variables(self):
        return {(self.name, self.primed)}

    def __str__(self):
        return self.key


@dataclasses.dataclass(frozen=True)
class Not(Formula):
    arg: Formula

    def evaluate(self, valuation):
        return not self.arg.evaluate(valuation)

    def vector(self, context):
        return np.logical_not(self.arg.vector(context))

    def variables(self):
        return self.arg.variables()

    def __str__(self):
        return '!{}'.format(self.arg)


@dataclasses.dataclass(frozen=True)
class Binary(Formula):
    op: str
    left: Formula
    right: Formula

    def evaluate(self, valuation):
        a = self.left.evaluate(valuation)
        b = self.right.evaluate(valuation)
        if self.op == '&':
            return a and b
        if self.op == '|':
            return a or b
        if self.op == '->':
            return (not a) or b
        return a == b

    def vector(self, context):
        a = self.left.vector(context)
        b = self.right.vector(context)
        if self.op == '&':
            return np.logical_and(a, b)
        if self.op == '|':
            return np.logical_or(a, b)
        if self.op == '->':
            return np.logical_or(np.logical_not(a), b)
        return np.equal(a, b)

    def variables(self):
        return self.left.variables() | self.right.variables()

    def __str__(self):
        return '({} {} {})'.format(self.left, self.op, self.right)


TRUE = Const(True)


def conjoin(formulas):
    result = None
    for f in formulas:
        result = f if result is None else Binary('&', result, f)
    return TRUE if result is None else result


def shift(formula):
    """ The same formula one step later (only valid on formulas without next). """
    if isinstance(formula, Var):
        return Var(formula.name, True)
    if isinstance(formula, Not):
        return Not(shift(formula.arg))
    if isinstance(formula, Binary):
        return Binary(formula.op, shift(formula.left), shift(formula.right))
    return formula


#
# tokens and parser
#

TOKEN_RE = re.compile(r"\s*(?:(<->|->|[!&|()',=])|([A-Za-z_][A-Za-z0-9_.]*))")


def tokenize(text, line=None):
    """ (kind, text, column) tuples; columns are 1-based. """
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            column = pos + len(text[pos:]) - len(text[pos:].lstrip()) + 1
            raise SpecSyntaxError('unexpected character "{:s}"'.format(text[column - 1]), column,
                                  ('identifier', 'operator', '('), line=line)
        if m.group(1):
            tokens.append(('op', m.group(1), m.start(1) + 1))
        else:
            tokens.append(('id', m.group(2), m.start(2) + 1))
        pos = m.end()
    tokens.append(('end', '', len(text) + 1))
    return tokens


class _Parser(object):

    KEYWORDS = ('true', 'false', 'next', 'if', 'then', 'always', 'eventually')

    def __init__(self, text, line=None):
        self.tokens = tokenize(text, line)
        self.pos = 0
        self.line = line

    def peek(self):
        return self.tokens[self.pos]

    def take(self):
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def error(self, expected):
        kind, text, column = self.peek()
        found = 'end of line' if kind == 'end' else '"{:s}"'.format(text)
        raise SpecSyntaxError('unexpected {:s}'.format(found), column, expected, line=self.line)

    def accept(self, text):
        if self.peek()[1] == text and self.peek()[0] != 'end':
            return self.take()
        return None

    def expect(self, text):
        if not self.accept(text):
            self.error((text,))

    def parse(self):
        formula = self.formula()
        if self.peek()[0] != 'end':
            self.error(('&', '|', '->', '<->', 'end of line'))
        return formula

    def formula(self):
        if self.accept('if'):
            condition = self.formula()
            self.expect('then')
            return Binary('->', condition, self.formula())
        return self.iff()

    def iff(self):
        left = self.implies()
        while self.accept('<->'):
            left = Binary('<->', left, self.implies())
        return left

    def implies(self):
        left = self.disjunction()
        if self.accept('->'):
            return Binary('->', left, self.implies())
        return left

    def disjunction(self):
        left = self.conjunction()
        while self.accept('|'):
            left = Binary('|', left, self.conjunction())
        return left

    def conjunction(self):
        left = self.unary()
        while self.accept('&'):
            left = Binary('&', left, self.unary())
        return left

    def unary(self):
        if self.accept('!'):
            return Not(self.unary())
        if self.accept('next'):
            return self._next(self.unary())
        return self.primary()

    def _next(self, formula):
        if any(primed for _, primed in formula.variables()):
            self.error(('formula without next',))
        return shift(formula)

    def primary(self):
        kind, text, column = self.peek()
        if self.accept('('):
            formula = self.formula()
            self.expect(')')
            return self._prime(formula)
        if kind == 'id' and text in ('true', 'false'):
            self.take()
            return Const(text == 'true')
        if kind == 'id' and text not in self.KEYWORDS:
            self.take()
            return self._prime(Var(text))
        self.error(('identifier', '(', '!', 'next', 'true', 'false'))

    def _prime(self, formula):
        if self.accept("'"):
            return self._next(formula)
        return formula


def parse_formula(text, line=None):
    """
    >>> str(parse_formula("a & next(b) -> !c"))
    "((a & b') -> !c)"
    """
    return _Parser(text, line).parse()


#
# specifications
#

@dataclasses.dataclass(frozen=True)
class Binding:
    kind: str
    args: tuple = ()

    def __str__(self):
        return '{:s}({:s})'.format(self.kind, ', '.join(self.args))


@dataclasses.dataclass(frozen=True)
class Proposition:
    name: str
    side: str
    binding: Binding

    @property
    def is_drive(self):
        return self.side == 'sys' and self.binding.kind == 'drive'


@dataclasses.dataclass
class MissionSpec:
    propositions: list
    env_init: Formula = TRUE
    env_trans: Formula = TRUE
    env_live: list = dataclasses.field(default_factory=list)
    sys_init: Formula = TRUE
    sys_trans: Formula = TRUE
    sys_live: list = dataclasses.field(default_factory=list)

    @property
    def env_props(self):
        return [p.name for p in self.propositions if p.side == 'env']

    @property
    def sys_props(self):
        return [p.name for p in self.propositions if p.side == 'sys']

    def proposition(self, name):
        for p in self.propositions:
            if p.name == name:
                return p
        raise KeyError(name)


BINDING_RE = re.compile(r'^(env|sys)\s+([A-Za-z_][A-Za-z0-9_]*)\s*=\s*([A-Za-z_][A-Za-z0-9_]*)\s*(?:\((.*)\))?\s*$')


def parse_binding(text, line=None):
    m = BINDING_RE.match(text.strip())
    if m is None:
        raise SpecSyntaxError('malformed binding', 1, ('env <name> = <binding>', 'sys <name> = <binding>'), line=line)
    side, name, kind, args = m.groups()
    args = tuple(a.strip() for a in args.split(',')) if args and args.strip() else ()
    if side == 'env':
        if kind not in ENV_BINDINGS:
            raise ParseError('unknown environment binding "{:s}"'.format(kind), line=line, field=name)
        if kind in ('seen', 'holding') and not args:
            raise ParseError('{:s} needs at least one color'.format(kind), line=line, field=name)
        if kind == 'envtype':
            if len(args) != 1:
                raise ParseError('envtype takes one environment type', line=line, field=name)
            try:
                EnvironmentType.parse(args[0])
            except ValueError:
                raise ParseError('unknown environment type "{:s}"'.format(args[0]), line=line, field=name)
        if kind == 'done' and len(args) != 1:
            raise ParseError('done takes one system proposition', line=line, field=name)
    elif kind == 'drive':
        target = args[0].split() if args else []
        if not target or target[0] not in DRIVE_TARGETS or (target[0] == 'goto') != (len(target) == 2) or len(target) > 2:
            raise ParseError('drive takes explore, home or goto <envprop>', line=line, field=name)
        args = tuple(target)
    elif kind == 'complete' and args:
        raise ParseError('complete takes no arguments', line=line, field=name)
    elif kind != 'complete' and len(args) > 1:
        raise ParseError('a behavior property takes at most one target', line=line, field=name)
    return Proposition(name, side, Binding(kind, args))


def _check_bindings(propositions, lines):
    sides = dict((p.name, p.side) for p in propositions)
    for p in propositions:
        line = lines[p.name]
        if p.binding.kind == 'done' and sides.get(p.binding.args[0]) != 'sys':
            raise UnboundProposition(p.binding.args[0], line=line)
        targets = []
        if p.side == 'sys' and p.binding.kind == 'drive' and p.binding.args[0] == 'goto':
            targets = [p.binding.args[1]]
        elif p.side == 'sys' and p.binding.kind not in ('drive', 'complete'):
            targets = list(p.binding.args)
        for t in targets:
            if sides.get(t) != 'env':
                raise UnboundProposition(t, line=line)


def _check_formula(formula, section, sides, line):
    for name, primed in sorted(formula.variables()):
        if name not in sides:
            raise UnboundProposition(name, line=line)
        if section == 'ENV INIT' and sides[name] == 'sys':
            raise ParseError('environment initial condition on a system proposition', line=line, field=name)
        if primed and section.endswith('INIT'):
            raise ParseError('next-step value in an initial condition', line=line, field=name)
        if primed and section == 'ENV TRANS' and sides[name] == 'sys':
            raise ParseError('environment assumption on a next-step system proposition', line=line, field=name)
        if primed and section.endswith('LIVE'):
            raise ParseError('next-step value in a liveness goal', line=line, field=name)


def _strip_sugar(text, section, line):
    words = text.split()
    if words[:2] == ['always', 'eventually']:
        if not section.endswith('LIVE'):
            raise SpecSyntaxError('"always eventually" outside a LIVE section', 1, ('formula',), line=line)
        return text.split('eventually', 1)[1]
    if words[:1] == ['always']:
        if not section.endswith('TRANS'):
            raise SpecSyntaxError('"always" outside a TRANS section', 1, ('formula',), line=line)
        return text.split('always', 1)[1]
    return text


def parse_spec(text):
    """
    Parse a mission specification.

    Returns
    -------
    MissionSpec
        With its propositions in declaration order.

    Raises
    ------
    SpecSyntaxError
        With line, column and the expected tokens.

    UnboundProposition
        If a formula or binding mentions an undeclared proposition.
    """
    section = None
    propositions = []
    lines = {}
    formulas = dict((s, []) for s in SECTIONS if s != 'BINDINGS')
    for n, raw in enumerate(text.splitlines(), start=1):
        content = raw.split('#', 1)[0].strip()
        if not content:
            continue
        header = ' '.join(content.upper().split())
        if header in SECTIONS:
            section = header
            continue
        if section is None:
            raise SpecSyntaxError('text before the first section', 1, SECTIONS, line=n)
        if section == 'BINDINGS':
            p = parse_binding(content, line=n)
            if p.name in lines:
                raise ParseError('proposition "{:s}" declared twice'.format(p.name), line=n, field=p.name)
            propositions.append(p)
            lines[p.name] = n
        else:
            formulas[section].append((parse_formula(_strip_sugar(content, section, n), line=n), n))

    _check_bindings(propositions, lines)
    sides = dict((p.name, p.side) for p in propositions)
    for s, entries in formulas.items():
        for formula, n in entries:
            _check_formula(formula, s, sides, n)

    return MissionSpec(
            propositions=propositions,
            env_init=conjoin(f for f, _ in formulas['ENV INIT']),
            env_trans=conjoin(f for f, _ in formulas['ENV TRANS']),
            env_live=[f for f, _ in formulas['ENV LIVE']],
            sys_init=conjoin(f for f, _ in formulas['SYS INIT']),
            sys_trans=conjoin(f for f, _ in formulas['SYS TRANS']),
            sys_live=[f for f, _ in formulas['SYS LIVE']])


def load_spec(path):
    with open(path, 'r') as fp:
        return parse_spec(fp.read())

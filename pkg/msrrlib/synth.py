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
Explicit-state GR(1) synthesis.

States are pairs (e, y) of environment and system valuations, indexed
s = e * 2**len(sys_props) + y, with bit k of e (y) holding the k-th
environment (system) proposition. The transition relations are dense boolean
arrays:

    env_trans[s, e']      environment may move to e' from s
    sys_trans[s, e', y']  system may answer e' with y'

The winning region is the usual three-nested fixpoint

    nu Z. and_j mu Y. or_i nu X. (J_j & cpre(Z)) | cpre(Y) | (!Jenv_i & cpre(X))

with cpre(Z) = forall e'. env_trans -> exists y'. sys_trans & Z.
When no initial choice is winning, the dual fixpoint yields an environment
strategy (`CounterStrategy`) that defeats every controller.
"""

import dataclasses
import logging

import numpy as np

from msrrlib.core import SimConfig, docsig
from msrrlib.errors import AssumptionViolated, BoundExceeded
from msrrlib.specparse import TRUE

logger = logging.getLogger(__name__)


class SynthConfig(SimConfig):

    def init(self):
        self.update(max_props=16)


def valuation_bits(n):
    """ bits[v, k]: value of proposition k in valuation index v. """
    return ((np.arange(2**n)[:, None] >> np.arange(n)[None, :]) & 1).astype(bool)


def index_of(valuation, names):
    return int(sum(1 << k for k, name in enumerate(names) if valuation[name]))


def valuation_of(index, names):
    return dict((name, bool((index >> k) & 1)) for k, name in enumerate(names))


class CompiledSpec(object):
    """ The formulas of a MissionSpec evaluated over all valuations. """

    def __init__(self, spec):
        self.spec = spec
        self.env_props = spec.env_props
        self.sys_props = spec.sys_props
        nx, ny = len(self.env_props), len(self.sys_props)
        self.E, self.Y = 2**nx, 2**ny
        self.S = self.E * self.Y
        ebits, ybits = valuation_bits(nx), valuation_bits(ny)

        # current-step values over s, next-step values over e' and y'
        s_e = np.repeat(np.arange(self.E), self.Y)
        s_y = np.tile(np.arange(self.Y), self.E)
        trans = {}
        for k, name in enumerate(self.env_props):
            trans[name] = ebits[s_e, k][:, None, None]
            trans[name + "'"] = ebits[:, k][None, :, None]
        for k, name in enumerate(self.sys_props):
            trans[name] = ybits[s_y, k][:, None, None]
            trans[name + "'"] = ybits[:, k][None, None, :]

        full = (self.S, self.E, self.Y)
        self.env_trans = np.broadcast_to(spec.env_trans.vector(trans), full)[:, :, 0].copy()
        self.sys_trans = np.broadcast_to(spec.sys_trans.vector(trans), full).copy()

        current = dict((name, v[:, 0, 0]) for name, v in trans.items() if not name.endswith("'"))
        self.env_init = np.broadcast_to(spec.env_init.vector(
                dict((name, ebits[:, k]) for k, name in enumerate(self.env_props))), (self.E,)).copy()
        init = {}
        for k, name in enumerate(self.env_props):
            init[name] = ebits[:, k][:, None]
        for k, name in enumerate(self.sys_props):
            init[name] = ybits[:, k][None, :]
        self.sys_init = np.broadcast_to(spec.sys_init.vector(init), (self.E, self.Y)).copy()

        live = spec.sys_live or [TRUE]
        self.goals = [np.broadcast_to(g.vector(current), (self.S,)).copy() for g in live]
        live = spec.env_live or [TRUE]
        self.assumptions = [np.broadcast_to(a.vector(current), (self.S,)).copy() for a in live]

    def cpre(self, Z):
        """ States from which the system can force the next state into Z. """
        Zn = Z.reshape((self.E, self.Y))[None, :, :]
        answer = np.any(self.sys_trans & Zn, axis=2)
        return np.all(~self.env_trans | answer, axis=1)

    def cpre_env(self, S):
        """ States from which the environment can force the next state into S. """
        Sn = S.reshape((self.E, self.Y))[None, :, :]
        forced = np.all(~self.sys_trans | Sn, axis=2)
        return np.any(self.env_trans & forced, axis=1)

    def forcing_moves(self, s, S):
        """ Environment valuations e' from state s after which every system answer lies in S. """
        forced = np.all(~self.sys_trans[s] | S.reshape((self.E, self.Y)), axis=1)
        return np.flatnonzero(self.env_trans[s] & forced)

    def state(self, e, y):
        return e * self.Y + y


def _x_fixpoint(cs, start, assumption):
    X = np.ones(cs.S, dtype=bool)
    while True:
        X_new = start | (~assumption & cs.cpre(X))
        if np.array_equal(X_new, X):
            return X
        X = X_new


def _y_fixpoint(cs, goal, Z, keep_rings=False):
    """ Least fixpoint for one goal; optionally the rings Y^r and their X sets. """
    Y = np.zeros(cs.S, dtype=bool)
    rings, xs = [], []
    goal_now = goal & cs.cpre(Z)
    while True:
        start = goal_now | cs.cpre(Y)
        X_all = [_x_fixpoint(cs, start, a) for a in cs.assumptions]
        Y_new = np.any(X_all, axis=0)
        if keep_rings:
            rings.append(Y_new)
            xs.append((start, X_all))
        if np.array_equal(Y_new, Y):
            return Y, rings, xs
        Y = Y_new


def winning_region(cs):
    Z = np.ones(cs.S, dtype=bool)
    while True:
        Z_new = np.all([_y_fixpoint(cs, goal, Z)[0] for goal in cs.goals], axis=0)
        if np.array_equal(Z_new, Z):
            return Z
        Z = Z_new


@dataclasses.dataclass(frozen=True)
class Realizable:
    automaton: 'MissionAutomaton'


@dataclasses.dataclass(frozen=True)
class Unrealizable:
    trace: list
    reason: str
    loop: int = None
    strategy: 'CounterStrategy' = None


class MissionAutomaton(object):
    """
    The synthesized controller. Node k is the triple nodes[k] = (e, y, j):
    environment and system valuation indices and the liveness goal being
    pursued. transitions[k][e'] is the successor node for environment
    valuation e'.
    """

    def __init__(self, spec, compiled, nodes, transitions, initial):
        self.spec = spec
        self.compiled = compiled
        self.env_props = compiled.env_props
        self.sys_props = compiled.sys_props
        self.nodes = nodes
        self.transitions = transitions
        self.initial = initial

    def __len__(self):
        return len(self.nodes)

    def env_valuation(self, node):
        return valuation_of(self.nodes[node][0], self.env_props)

    def sys_valuation(self, node):
        return valuation_of(self.nodes[node][1], self.sys_props)

    def initial_state(self, env_valuation):
        """ Initial node for the first environment valuation. """
        e = index_of(env_valuation, self.env_props)
        if not self.compiled.env_init[e]:
            raise AssumptionViolated('initial environment valuation violates the assumptions')
        return self.initial[e], self.sys_valuation(self.initial[e])

    def export(self):
        """ Text transition table, one line per node. """
        lines = ['# node goal env sys -> successors (env valuation:node)']
        for k, (e, y, j) in enumerate(self.nodes):
            env = ' '.join((n if (e >> i) & 1 else '!' + n) for i, n in enumerate(self.env_props)) or '-'
            sys = ' '.join((n if (y >> i) & 1 else '!' + n) for i, n in enumerate(self.sys_props)) or '-'
            succ = ' '.join('{:d}:{:d}'.format(ep, t) for ep, t in sorted(self.transitions[k].items()))
            initial = '*' if k in self.initial.values() else ' '
            lines.append('{:s}{:d} j={:d} [{:s}] [{:s}] -> {:s}'.format(initial, k, j, env, sys, succ))
        return '\n'.join(lines) + '\n'


def advance(aut, state, env_valuation):
    """
    Take the transition of `state` matching the environment valuation.

    Returns
    -------
    (next_state, sys_valuation)

    Raises
    ------
    AssumptionViolated
        If the valuation is not allowed by the environment assumptions.
    """
    e = index_of(env_valuation, aut.env_props)
    successors = aut.transitions[state]
    if e not in successors:
        raise AssumptionViolated('environment valuation {} not allowed from state {:d}'.format(
                dict(env_valuation), state))
    nxt = successors[e]
    return nxt, aut.sys_valuation(nxt)


class _Strategy(object):

    def __init__(self, cs, Z):
        self.cs = cs
        self.Z = Z
        self.rank = []
        self.rings = []
        for goal in cs.goals:
            _, rings, xs = _y_fixpoint(cs, goal, Z, keep_rings=True)
            rank = np.full(cs.S, np.iinfo(np.int64).max, dtype=np.int64)
            for r in range(len(rings) - 1, -1, -1):
                rank[rings[r]] = r
            self.rank.append(rank)
            self.rings.append(xs)

    def choose(self, s, e_next, j):
        cs = self.cs
        n_goals = len(cs.goals)
        ys = np.flatnonzero(cs.sys_trans[s, e_next] & self.Z.reshape((cs.E, cs.Y))[e_next])
        if ys.size == 0:
            return None
        targets = cs.state(e_next, ys)
        rank = self.rank[j]

        if cs.goals[j][s]:
            j_next = (j + 1) % n_goals
            best = np.lexsort((ys, self.rank[j_next][targets]))[0]
            return int(ys[best]), j_next

        r = rank[s]
        lower = rank[targets] < r
        if np.any(lower):
            best = np.lexsort((ys[lower], rank[targets][lower]))[0]
            return int(ys[lower][best]), j

        start, X_all = self.rings[j][r]
        for X in X_all:
            if X[s] and not start[s]:
                inside = X[targets]
                if np.any(inside):
                    return int(ys[inside][0]), j
        return int(ys[0]), j


class CounterStrategy(object):
    """
    Environment strategy from the states the system cannot win, computed by
    the dual fixpoint

        mu Z. or_j nu Y. and_i mu X. cpre_env(Z) | (!J_j & ((Jenv_i & cpre_env(Y)) | cpre_env(X)))

    From a state first won at Z ring r the environment either forces the play
    into ring r-1 or keeps goal j false while it visits every assumption in
    turn. The memory is the index of the assumption currently pursued.
    """

    def __init__(self, cs):
        self.cs = cs
        self.levels = []
        Z = np.zeros(cs.S, dtype=bool)
        while True:
            level = [self._y_fixpoint(goal, Z) for goal in cs.goals]
            Z_new = Z | np.any([Y for Y, _ in level], axis=0)
            if np.array_equal(Z_new, Z):
                break
            self.levels.append((Z, level))
            Z = Z_new
        self.region = Z

    def _x_rings(self, goal, escape, Y, assumption):
        cs = self.cs
        base = escape | (~goal & assumption & cs.cpre_env(Y))
        rings = [np.zeros(cs.S, dtype=bool)]
        while True:
            X = base | (~goal & cs.cpre_env(rings[-1]))
            if np.array_equal(X, rings[-1]):
                return rings
            rings.append(X)

    def _y_fixpoint(self, goal, Z):
        escape = self.cs.cpre_env(Z)
        Y = np.ones(self.cs.S, dtype=bool)
        while True:
            rings = [self._x_rings(goal, escape, Y, a) for a in self.cs.assumptions]
            Y_new = np.all([r[-1] for r in rings], axis=0)
            if np.array_equal(Y_new, Y):
                return Y, rings
            Y = Y_new

    def move(self, s, i=0):
        """
        Environment valuation index to play from state s while pursuing
        assumption i, and the next memory. None outside the region.
        """
        cs = self.cs
        for Z, level in self.levels:
            for j, (Y, rings) in enumerate(level):
                if not Y[s]:
                    continue
                moves = cs.forcing_moves(s, Z)
                if moves.size:
                    return int(moves[0]), i
                goal, X = cs.goals[j], rings[i]
                if cs.assumptions[i][s] and not goal[s]:
                    moves = cs.forcing_moves(s, Y)
                    if moves.size:
                        return int(moves[0]), (i + 1) % len(cs.assumptions)
                k = next(k for k in range(len(X)) if X[k][s])
                return int(cs.forcing_moves(s, X[k - 1])[0]), i
        return None

    def lasso(self, e, y):
        """
        Play the strategy from (e, y) against the lowest system answer until
        a position repeats.

        Returns
        -------
        (trace, loop)
            The environment valuation indices and the index the play returns
            to, None when the system runs out of answers.
        """
        cs = self.cs
        s, i = cs.state(e, y), 0
        trace, seen = [e], {}
        while True:
            seen[(s, i)] = len(trace) - 1
            choice = self.move(s, i)
            if choice is None:
                return trace, None
            e_next, i = choice
            ys = np.flatnonzero(cs.sys_trans[s, e_next])
            if ys.size == 0:
                return trace + [e_next], None
            s = cs.state(e_next, int(ys[0]))
            if (s, i) in seen:
                return trace, seen[(s, i)]
            trace.append(e_next)


@docsig
def synthesize(spec, max_props=16):
    """
    Decide realizability and extract a controller.

    Parameters
    ----------
    spec : MissionSpec

    max_props : int
        Upper bound on the number of propositions.

    Returns
    -------
    Realizable or Unrealizable
        The automaton contains the nodes reachable from the initial nodes.
        An Unrealizable outcome carries the environment strategy that defeats
        every controller and a lasso-shaped play of it, starting with the
        environment valuation for which no initial system choice is winning.

    Raises
    ------
    BoundExceeded
        If the spec has more than `max_props` propositions.
    """
    n = len(spec.env_props) + len(spec.sys_props)
    if n > max_props:
        raise BoundExceeded('{:d} propositions exceed the bound of {:d}'.format(n, max_props))
    cs = CompiledSpec(spec)
    Z = winning_region(cs)
    logger.debug('winning region: %d of %d states', int(Z.sum()), cs.S)
    strategy = _Strategy(cs, Z)

    nodes, index, transitions, initial = [], {}, [], {}

    def node_of(e, y, j):
        key = (int(e), int(y), int(j))
        if key not in index:
            index[key] = len(nodes)
            nodes.append(key)
            transitions.append(None)
        return index[key]

    for e in range(cs.E):
        if not cs.env_init[e]:
            continue
        ys = np.flatnonzero(cs.sys_init[e] & Z.reshape((cs.E, cs.Y))[e])
        if ys.size == 0:
            reason = 'no initial system valuation is winning'
            if not np.any(cs.sys_init[e]):
                reason = 'the system initial condition is unsatisfiable'
            counter = CounterStrategy(cs)
            trace, loop = [e], None
            answers = np.flatnonzero(cs.sys_init[e])
            if answers.size:
                trace, loop = counter.lasso(e, int(answers[0]))
            return Unrealizable([valuation_of(v, cs.env_props) for v in trace], reason, loop, counter)
        best = np.lexsort((ys, strategy.rank[0][cs.state(e, ys)]))[0]
        initial[e] = node_of(e, ys[best], 0)

    k = 0
    while k < len(nodes):
        e, y, j = nodes[k]
        s = cs.state(e, y)
        successors = {}
        for e_next in np.flatnonzero(cs.env_trans[s]):
            choice = strategy.choose(s, int(e_next), j)
            if choice is None:
                raise RuntimeError('no winning move from a winning state')
            successors[int(e_next)] = node_of(e_next, choice[0], choice[1])
        transitions[k] = successors
        k += 1

    return Realizable(MissionAutomaton(spec, cs, nodes, transitions, initial))

"""
This module implements the Markov additive process model: a finite
background chain with generator C + D, per-state drift rates v and upward
jumps attached to D-transitions

:copyright: (c) 2018 by Happy Gears, Inc
:license: Apache2, see LICENSE for more details.

"""

import logging
import typing

import networkx as nx
import numpy as np
import scipy.linalg

from . import errors
from . import mixture

ROW_TOLERANCE = 1e-10
STATIONARY_TOLERANCE = 1e-12
CONDITION_LIMIT = 1e12

log = logging.getLogger(__name__)


class Partition(typing.NamedTuple):
    """ascending state indices with negative (minus) and positive (plus) drift"""
    minus: tuple
    plus: tuple


def _frozen(array):
    array = np.array(array, dtype=float)
    array.setflags(write=False)
    return array


class MapModel(object):
    """
    Validated, immutable Markov additive process.

    Matrices are kept in the original state order; block matrices are taken
    with `partition.minus` and `partition.plus` index lists, S- first.
    """

    def __init__(self, v, C, D=None, F=None, name=''):
        super(MapModel, self).__init__()
        v = np.asarray(v, dtype=float).ravel()
        n = v.shape[0]
        C = np.atleast_2d(np.asarray(C, dtype=float))
        D = np.zeros((n, n)) if D is None else np.atleast_2d(np.asarray(D, dtype=float))
        F = dict(F or {})
        problems = _check(v, C, D, F)
        if problems:
            exc_type, message = problems[0]
            raise exc_type(message, diagnostics=[m for _, m in problems])
        self.name = name
        self.n = n
        self.v = _frozen(v)
        self.C = _frozen(C)
        self.D = _frozen(D)
        self.F = {(int(i), int(j)): F[(i, j)] for (i, j) in sorted(F) if D[i, j] > 0}
        self.c = _frozen(-np.diag(C))
        self.partition = Partition(minus=tuple(int(i) for i in np.flatnonzero(v < 0)),
                                   plus=tuple(int(i) for i in np.flatnonzero(v > 0)))
        self._pi = None

    @property
    def generator(self):
        return self.C + self.D

    @property
    def has_jumps(self):
        return bool(np.any(self.D > 0))

    @property
    def theta_max(self):
        """smallest mgf abscissa over all jump mixtures"""
        return min([f.abscissa for f in self.F.values()] + [np.inf])

    @property
    def C_off(self):
        return self.C - np.diag(np.diag(self.C))

    def d_hat(self, theta):
        """matrix moment generating function of D(dx) at theta"""
        result = np.zeros((self.n, self.n))
        for (i, j), f in self.F.items():
            result[i, j] = self.D[i, j] * mixture.mixture_mgf(f, theta)
        return result

    def d_hat_deriv(self, theta):
        result = np.zeros((self.n, self.n))
        for (i, j), f in self.F.items():
            result[i, j] = self.D[i, j] * mixture.mixture_mgf_deriv(f, theta)
        return result

    def jump_mean_matrix(self):
        """int_0^inf y D(dy)"""
        result = np.zeros((self.n, self.n))
        for (i, j), f in self.F.items():
            result[i, j] = self.D[i, j] * mixture.mixture_mean(f)
        return result

    def to_dict(self):
        return {
            'name': self.name,
            'states': self.n,
            'v': self.v.tolist(),
            'C': self.C.tolist(),
            'D': self.D.tolist(),
            'jumps': [{'from': i, 'to': j, 'mixture': f.to_records()} for (i, j), f in self.F.items()],
        }

    def __repr__(self):
        return 'MapModel(name={0!r}, n={1}, minus={2}, plus={3})'.format(
            self.name, self.n, self.partition.minus, self.partition.plus)


def _check(v, C, D, F):
    """returns list of (exception type, message) for every violated invariant"""
    n = v.shape[0]
    if n < 1:
        return [(errors.BadModelFile, 'model has no states')]
    if C.shape != (n, n) or D.shape != (n, n):
        return [(errors.BadModelFile, 'C and D must be {0}x{0} matrices, got {1} and {2}'.format(
            n, C.shape, D.shape))]
    problems = []
    for i in np.flatnonzero(v == 0):
        problems.append((errors.ZeroRate, 'state {0} has zero drift rate'.format(i)))
    off = C - np.diag(np.diag(C))
    for i, j in zip(*np.nonzero(off < 0)):
        problems.append((errors.BadModelFile, 'C[{0}][{1}] is negative'.format(i, j)))
    for i, j in zip(*np.nonzero(D < 0)):
        problems.append((errors.BadModelFile, 'D[{0}][{1}] is negative'.format(i, j)))
    expected = -(off.sum(axis=1) + D.sum(axis=1))
    for i in np.flatnonzero(np.abs(np.diag(C) - expected) > ROW_TOLERANCE):
        problems.append((errors.NonConservativeRows, 'row {0}: C[{0}][{0}]={1!r} but rates out of the state sum '
                                                     'to {2!r}'.format(i, C[i, i], -expected[i])))
    for i, j in zip(*np.nonzero(D > 0)):
        f = F.get((i, j))
        if f is None:
            problems.append((errors.BadMixture, 'D[{0}][{1}] > 0 has no jump mixture'.format(i, j)))
        elif not isinstance(f, mixture.JumpMixture):
            problems.append((errors.BadMixture, 'jump ({0},{1}) is not a JumpMixture'.format(i, j)))
    for (i, j) in F:
        if not (0 <= i < n and 0 <= j < n) or D[i, j] <= 0:
            problems.append((errors.BadMixture, 'jump mixture ({0},{1}) has no positive D entry'.format(i, j)))
    if not problems and n > 1:
        adjacency = ((off + D - np.diag(np.diag(D))) > 0).astype(int)
        graph = nx.from_numpy_array(adjacency, create_using=nx.DiGraph)
        count = sum(1 for _ in nx.strongly_connected_components(graph))
        if count > 1:
            problems.append((errors.Reducible, 'C + D is reducible: {0} communicating classes'.format(count)))
    return problems


def validate(raw):
    """
    builds a MapModel from a raw description: a mapping with keys `v`, `C`,
    optional `D`, `name` and `jumps`. Jumps are either a mapping
    (i, j) -> JumpMixture or a list of records {from, to, mixture} with
    mixture components {weight, kind, params}.
    """
    jumps = raw.get('jumps') or {}
    if isinstance(jumps, dict):
        F = dict(jumps)
    else:
        F = {}
        for record in jumps:
            key = (int(record['from']), int(record['to']))
            F[key] = mixture_from_records(record['mixture'], key)
    states = raw.get('states')
    v = raw['v']
    if states is not None and int(states) != len(v):
        raise errors.BadModelFile('states={0} but v has {1} entries'.format(states, len(v)))
    model = MapModel(v, raw['C'], raw.get('D'), F, name=raw.get('name', ''))
    log.debug('validated %r', model)
    return model


def mixture_from_records(records, key=None):
    components = []
    where = '' if key is None else 'jump {0}: '.format(key)
    for rec in records:
        kind = rec.get('kind')
        params = rec.get('params', {})
        weight = float(rec.get('weight', 1.0))
        try:
            if kind == mixture.ATOM:
                components.append(mixture.Component(weight, kind, location=float(params['location'])))
            elif kind == mixture.EXPONENTIAL:
                components.append(mixture.Component(weight, kind, rate=float(params['rate'])))
            elif kind == mixture.ERLANG:
                shape = params['shape']
                if int(shape) != shape:
                    raise errors.BadMixture('{0}Erlang shape must be an integer, got {1}'.format(where, shape))
                components.append(mixture.Component(weight, kind, rate=float(params['rate']), shape=int(shape)))
            else:
                raise errors.BadMixture('{0}unknown component kind "{1}"'.format(where, kind))
        except KeyError as e:
            raise errors.BadMixture('{0}component "{1}" misses parameter {2}'.format(where, kind, e))
    try:
        return mixture.JumpMixture(components)
    except errors.BadMixture as e:
        raise errors.BadMixture(where + e.message, diagnostics=e.diagnostics)


def stationary_dist(model):
    """solves pi (C + D) = 0, pi e = 1"""
    if model._pi is not None:
        return model._pi
    n = model.n
    system = model.generator.T.copy()
    system[-1, :] = 1.0
    rhs = np.zeros(n)
    rhs[-1] = 1.0
    if np.linalg.cond(system) > CONDITION_LIMIT:
        raise errors.SingularSolve('stationary equations are numerically singular')
    pi = scipy.linalg.solve(system, rhs)
    residual = float(np.max(np.abs(pi @ model.generator)))
    if residual > STATIONARY_TOLERANCE * max(1.0, float(np.max(np.abs(model.generator)))) or np.any(pi <= 0):
        raise errors.SingularSolve('stationary vector is not positive or residual {0!r} too large'.format(residual))
    pi.setflags(write=False)
    model._pi = pi
    return pi


def mean_drift(model):
    """E(Y(1)) = pi Delta_v e + pi int y D(dy) e"""
    pi = stationary_dist(model)
    return float(pi @ model.v + pi @ model.jump_mean_matrix().sum(axis=1))


def dual_model(model):
    """time-reversed model: Delta_pi^-1 X' Delta_pi for C and D, F~_ij = F_ji, same v"""
    pi = stationary_dist(model)
    scale = np.outer(1.0 / pi, pi)
    C = model.C.T * scale
    D = model.D.T * scale
    np.fill_diagonal(C, np.diag(model.C))
    F = {(j, i): f for (i, j), f in model.F.items()}
    name = model.name + '~' if model.name else ''
    return MapModel(model.v, C, D, F, name=name)


def partition_blocks(model, matrix):
    """splits an n x n matrix into its (--, -+, +-, ++) blocks"""
    minus, plus = model.partition
    return (matrix[np.ix_(minus, minus)], matrix[np.ix_(minus, plus)],
            matrix[np.ix_(plus, minus)], matrix[np.ix_(plus, plus)])

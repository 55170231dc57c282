"""
This module implements jump size distributions: finite mixtures of atoms,
exponential and Erlang components, together with the scalar and matrix
transforms the kernels need in closed form

:copyright: (c) 2018 by Happy Gears, Inc
:license: Apache2, see LICENSE for more details.

"""

import math
import typing

import numpy as np
import scipy.linalg
from scipy.special import gammainc, gammaincc

from . import errors

ATOM = 'atom'
EXPONENTIAL = 'exponential'
ERLANG = 'erlang'

KINDS = [ATOM, EXPONENTIAL, ERLANG]

WEIGHT_TOLERANCE = 1e-12


class Component(typing.NamedTuple):
    weight: float
    kind: str
    location: float = 0.0
    rate: float = 0.0
    shape: int = 1

    @property
    def params(self):
        if self.kind == ATOM:
            return {'location': self.location}
        if self.kind == EXPONENTIAL:
            return {'rate': self.rate}
        return {'shape': self.shape, 'rate': self.rate}


class JumpMixture(object):
    """
    Immutable finite mixture of jump size distributions on (0, inf).

    Construct with a list of `Component` or with the helpers `atom`,
    `exponential` and `erlang`; invalid input raises `errors.BadMixture`.
    """

    def __init__(self, components):
        super(JumpMixture, self).__init__()
        components = tuple(components)
        problems = check_components(components)
        if problems:
            raise errors.BadMixture(problems[0], diagnostics=problems)
        self._components = components

    @classmethod
    def atom(cls, location):
        return cls([Component(1.0, ATOM, location=float(location))])

    @classmethod
    def exponential(cls, rate):
        return cls([Component(1.0, EXPONENTIAL, rate=float(rate))])

    @classmethod
    def erlang(cls, shape, rate):
        return cls([Component(1.0, ERLANG, rate=float(rate), shape=int(shape))])

    @property
    def components(self):
        return self._components

    @property
    def abscissa(self):
        """mgf abscissa: the smallest Exponential/Erlang rate, +inf for atoms only"""
        rates = [c.rate for c in self._components if c.kind != ATOM]
        return min(rates) if rates else math.inf

    def __eq__(self, other):
        return isinstance(other, JumpMixture) and self._components == other._components

    def __hash__(self):
        return hash(self._components)

    def __repr__(self):
        return 'JumpMixture({0})'.format(list(self._components))

    def to_records(self):
        return [{'weight': c.weight, 'kind': c.kind, 'params': c.params} for c in self._components]


def check_components(components):
    problems = []
    if not components:
        return ['mixture has no components']
    total = 0.0
    for idx, comp in enumerate(components):
        if comp.kind not in KINDS:
            problems.append('component {0}: unknown kind "{1}"'.format(idx, comp.kind))
            continue
        if not comp.weight >= 0:
            problems.append('component {0}: negative weight {1}'.format(idx, comp.weight))
        total += comp.weight
        if comp.kind == ATOM and not comp.location > 0:
            problems.append('component {0}: atom location must be > 0, got {1}'.format(idx, comp.location))
        if comp.kind != ATOM and not (comp.rate > 0 and math.isfinite(comp.rate)):
            problems.append('component {0}: rate must be > 0, got {1}'.format(idx, comp.rate))
        if comp.kind == ERLANG and (int(comp.shape) != comp.shape or comp.shape < 1):
            problems.append('component {0}: Erlang shape must be an integer >= 1, got {1}'.format(idx, comp.shape))
    if abs(total - 1.0) > WEIGHT_TOLERANCE:
        problems.append('weights sum to {0!r}, expected 1'.format(total))
    return problems


def _check_theta(mixture, theta):
    if theta >= mixture.abscissa:
        raise errors.AbscissaExceeded(
            'theta={0!r} is not below the mgf abscissa {1!r}'.format(theta, mixture.abscissa))


def _check_spectrum(mixture, K):
    rates = [c.rate for c in mixture.components if c.kind != ATOM]
    if not rates:
        return
    bound = float(np.max(np.linalg.eigvals(K).real))
    if bound >= min(rates):
        raise errors.SpectralClash(
            'spectral abscissa {0!r} of the matrix reaches jump rate {1!r}'.format(bound, min(rates)))


########################################################################################
# scalar transforms

def mixture_mean(mixture):
    total = 0.0
    for c in mixture.components:
        if c.kind == ATOM:
            total += c.weight * c.location
        else:
            total += c.weight * c.shape / c.rate
    return total


def mixture_mgf(mixture, theta):
    _check_theta(mixture, theta)
    total = 0.0
    for c in mixture.components:
        if c.kind == ATOM:
            total += c.weight * math.exp(theta * c.location)
        else:
            total += c.weight * (c.rate / (c.rate - theta)) ** c.shape
    return total


def mixture_mgf_deriv(mixture, theta):
    _check_theta(mixture, theta)
    total = 0.0
    for c in mixture.components:
        if c.kind == ATOM:
            total += c.weight * c.location * math.exp(theta * c.location)
        else:
            total += c.weight * c.shape * c.rate ** c.shape / (c.rate - theta) ** (c.shape + 1)
    return total


def mixture_cdf(mixture, x):
    """P(jump <= x)"""
    if x <= 0:
        return 0.0
    total = 0.0
    for c in mixture.components:
        if c.kind == ATOM:
            total += c.weight * (1.0 if c.location <= x else 0.0)
        else:
            total += c.weight * float(gammainc(c.shape, c.rate * x))
    return total


def _phase_generator(shape, rate, q):
    """Erlang phases followed by an absorbing phase that decays at rate q"""
    gen = np.zeros((shape + 1, shape + 1))
    for idx in range(shape):
        gen[idx, idx] = -rate
        gen[idx, idx + 1] = rate
    gen[shape, shape] = -q
    return gen


def mixture_exp_convolution(mixture, q, x):
    """
    returns int_0^x exp(-q(x-u)) F(du): the jump law smoothed by an
    exponential sojourn with rate q > 0
    """
    if x <= 0 or math.isinf(x):
        return 0.0
    total = 0.0
    for c in mixture.components:
        if c.kind == ATOM:
            if c.location <= x:
                total += c.weight * math.exp(-q * (x - c.location))
        else:
            gen = _phase_generator(c.shape, c.rate, q)
            total += c.weight * scipy.linalg.expm(gen * x)[0, c.shape]
    return total


########################################################################################
# matrix transforms, K is a square ML matrix

def _resolvent(rate, K):
    eye = np.eye(K.shape[0])
    return scipy.linalg.solve(rate * eye - K, eye)


def _integrated_exponential(K, t):
    """int_0^t exp(sK) ds from the upper right block of an augmented exponential"""
    m = K.shape[0]
    if t <= 0:
        return np.zeros((m, m))
    block = np.zeros((2 * m, 2 * m))
    block[:m, :m] = K
    block[:m, m:] = np.eye(m)
    return scipy.linalg.expm(block * t)[:m, m:]


def mixture_matrix_transform(mixture, K):
    """returns int_0^inf exp(uK) F(du)"""
    K = np.atleast_2d(np.asarray(K, dtype=float))
    _check_spectrum(mixture, K)
    result = np.zeros_like(K)
    for c in mixture.components:
        if c.kind == ATOM:
            result += c.weight * scipy.linalg.expm(c.location * K)
        else:
            result += c.weight * np.linalg.matrix_power(c.rate * _resolvent(c.rate, K), c.shape)
    return result


def _erlang_density(shape, rate, w):
    if math.isinf(w):
        return 0.0
    if w <= 0:
        return rate if shape == 1 else 0.0
    return math.exp(shape * math.log(rate) + (shape - 1) * math.log(w) - rate * w - math.lgamma(shape))


class MatrixTail(object):
    """
    Matrix tail w -> int_w^inf exp((y-w)K) F(dy) of one mixture against a
    fixed ML matrix K. Resolvent powers are computed once, so repeated
    evaluation on a level grid only pays for the scalar factors (and one
    matrix exponential per atom).

    For Erlang(k, lambda) the tail is sum_m lambda^m (lambda I - K)^-(m+1) f_{k-m}(w)
    with f_j the Erlang(j, lambda) density; an atom a contributes
    exp((a-w)K) for a >= w.
    """

    def __init__(self, mixture, K):
        super(MatrixTail, self).__init__()
        K = np.atleast_2d(np.asarray(K, dtype=float))
        _check_spectrum(mixture, K)
        self.K = K
        self.atoms = []
        self.terms = []
        for c in mixture.components:
            if c.kind == ATOM:
                self.atoms.append((c.weight, c.location))
                continue
            res = _resolvent(c.rate, K)
            power = res.copy()
            for m in range(c.shape):
                self.terms.append((c.weight * c.rate ** m * power, c.shape - m, c.rate))
                power = power @ res

    def at(self, w):
        result = np.zeros_like(self.K)
        for weight, location in self.atoms:
            if location >= w:
                result += weight * scipy.linalg.expm((location - w) * self.K)
        for coef, order, rate in self.terms:
            result += _erlang_density(order, rate, w) * coef
        return result

    def integral(self, x, upper=False):
        """int_0^x at(w) dw, or int_x^inf at(w) dw when `upper` is set"""
        x = max(float(x), 0.0)
        result = np.zeros_like(self.K)
        for weight, a in self.atoms:
            if upper:
                piece = _integrated_exponential(self.K, max(a - x, 0.0))
            else:
                piece = _integrated_exponential(self.K, a) - _integrated_exponential(self.K, a - min(x, a))
            result += weight * piece
        regularized = gammaincc if upper else gammainc
        for coef, order, rate in self.terms:
            result += float(regularized(order, rate * x)) * coef
        return result


def mixture_matrix_tail(mixture, w, K):
    """
    returns int_w^inf exp((y-w)K) F(dy) for w >= 0. An atom at exactly w is
    counted in the tail.
    """
    return MatrixTail(mixture, K).at(w)


def mixture_matrix_tail_integral(mixture, x, K, upper=False):
    """
    closed form of int_0^x mixture_matrix_tail(F, w, K) dw, or of the
    integral over (x, inf) when `upper` is set
    """
    return MatrixTail(mixture, K).integral(x, upper=upper)


def sample(mixture, rng):
    """draw one jump size using numpy Generator `rng`"""
    comps = mixture.components
    if len(comps) == 1:
        c = comps[0]
    else:
        c = comps[rng.choice(len(comps), p=[x.weight for x in comps])]
    if c.kind == ATOM:
        return c.location
    return float(rng.exponential(1.0 / c.rate, size=c.shape).sum())

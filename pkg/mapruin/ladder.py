"""
This module implements the ascending ladder solution of a Markov additive
process: the minimal solution (K, L) of

    -K (I, L) = int_0^inf exp(uK) (I, L) (C(du) + D(du)) Delta_v^-1,

the null vector k of K, the dual objects (Qdual, Rdual) and the ladder
height distribution J(x).

:copyright: (c) 2018 by Happy Gears, Inc
:license: Apache2, see LICENSE for more details.

"""

import logging
import typing

import numpy as np
import scipy.linalg

from . import errors
from . import mixture
from . import model as mdl

STEP_TOLERANCE = 1e-12
MAX_ITERATIONS = 100000
NULL_TOLERANCE = 1e-9

log = logging.getLogger(__name__)


class LadderSolution(typing.NamedTuple):
    K: np.ndarray
    L: np.ndarray
    kminus: typing.Optional[np.ndarray]
    Qdual: np.ndarray
    Rdual: np.ndarray
    residual: float
    iterations: int

    def stacked(self, n, partition):
        """the |S-| x n matrix (I, L) in original state order"""
        return _stack(self.L, n, partition)


class _Arrays(typing.NamedTuple):
    """the pieces of a model the fixed point iteration consumes"""
    v: np.ndarray
    c: np.ndarray
    C_off: np.ndarray
    D: np.ndarray
    F: dict
    partition: mdl.Partition


def _stack(L, n, partition):
    minus, plus = partition
    E = np.zeros((len(minus), n))
    E[:, list(minus)] = np.eye(len(minus))
    if plus:
        E[:, list(plus)] = L
    return E


def _arrays(model, transposed=False):
    if not transposed:
        return _Arrays(model.v, model.c, model.C_off, model.D, model.F, model.partition)
    return _Arrays(model.v, model.c, model.C_off.T, model.D.T,
                   {(j, i): f for (i, j), f in model.F.items()}, model.partition)


def _right_side(arrays, K, E):
    """(I, L) C_off + int exp(uK) (I, L) D(du), column j collecting transitions into j"""
    rhs = E @ arrays.C_off
    for (l, j), f in arrays.F.items():
        rhs[:, j] += arrays.D[l, j] * (mixture.mixture_matrix_transform(f, K) @ E[:, l])
    return rhs


def _minimal_solution(arrays, tol=STEP_TOLERANCE, max_iter=MAX_ITERATIONS):
    """
    monotone substitution from K0 = -diag(c/|v|), L0 = 0. Column j of the
    equation multiplied by v(j) reads v(j) K (I, L)_j + c(j)(I, L)_j = -RHS_j;
    it is solved for K_j when j is in S- and for L_j when j is in S+.
    """
    minus, plus = arrays.partition
    if not minus:
        raise errors.EmptyMinus('no state has negative drift')
    minus, plus = list(minus), list(plus)
    n = arrays.v.shape[0]
    speed = np.abs(arrays.v[minus])
    c_minus = arrays.c[minus]
    K = -np.diag(c_minus / speed)
    L = np.zeros((len(minus), len(plus)))
    eye = np.eye(len(minus))
    for iteration in range(1, max_iter + 1):
        rhs = _right_side(arrays, K, _stack(L, n, arrays.partition))
        K_next = (rhs[:, minus] - np.diag(c_minus)) / speed
        L_next = np.empty_like(L)
        for col, j in enumerate(plus):
            L_next[:, col] = scipy.linalg.solve(arrays.c[j] * eye - arrays.v[j] * K_next, rhs[:, j])
        step = max(float(np.max(np.abs(K_next - K))), float(np.max(np.abs(L_next - L), initial=0.0)))
        K, L = K_next, L_next
        if step < tol:
            log.debug('ladder fixed point converged after %d iterations, last step %.3e', iteration, step)
            return K, L, iteration
    raise errors.NoConvergence('ladder iteration did not converge in {0} iterations (last step {1!r})'.format(
        max_iter, step))


def _residual(arrays, K, L):
    n = arrays.v.shape[0]
    E = _stack(L, n, arrays.partition)
    lhs = -K @ E
    rhs = (_right_side(arrays, K, E) - E * arrays.c) / arrays.v
    return float(np.max(np.abs(lhs - rhs)))


def ladder_residual(model, K, L):
    """sup norm residual of the ascending ladder equation"""
    return _residual(_arrays(model), K, L)


def k_eigenvector(K, pi_minus):
    """right null vector of K normalized by pi_minus k = 1"""
    K = np.atleast_2d(K)
    values, vectors = scipy.linalg.eig(K)
    idx = int(np.argmax(values.real))
    scale = max(1.0, float(np.max(np.abs(K))))
    if abs(values[idx]) > NULL_TOLERANCE * scale:
        raise errors.DriftPositive('K has no zero eigenvalue (Perron value {0!r})'.format(values[idx].real))
    k = np.real(vectors[:, idx])
    k = k / float(pi_minus @ k)
    if np.any(k <= 0):
        raise errors.DriftPositive('null vector of K is not positive')
    return k


def dual_ladder(model, K, L):
    """Qdual = Delta_pi-^-1 K' Delta_pi-, Rdual = Delta_pi+^-1 L' Delta_pi-"""
    pi = mdl.stationary_dist(model)
    minus, plus = model.partition
    pi_minus = pi[list(minus)]
    pi_plus = pi[list(plus)]
    Qdual = (K.T * pi_minus) / pi_minus[:, None]
    Rdual = (L.T * pi_minus) / pi_plus[:, None] if plus else np.zeros((0, len(minus)))
    return Qdual, Rdual


def solve_ladder(model, tol=STEP_TOLERANCE, max_iter=MAX_ITERATIONS):
    """minimal solution of the ascending ladder equation with its derived objects"""
    arrays = _arrays(model)
    K, L, iterations = _minimal_solution(arrays, tol=tol, max_iter=max_iter)
    residual = _residual(arrays, K, L)
    pi = mdl.stationary_dist(model)
    kminus = None
    if mdl.mean_drift(model) <= 0:
        kminus = k_eigenvector(K, pi[list(model.partition.minus)])
    Qdual, Rdual = dual_ladder(model, K, L)
    log.debug('ladder residual %.3e', residual)
    return LadderSolution(K=K, L=L, kminus=kminus, Qdual=Qdual, Rdual=Rdual,
                          residual=residual, iterations=iterations)


def solve_descending(model, tol=STEP_TOLERANCE, max_iter=MAX_ITERATIONS):
    """
    minimal solution (Q, R) of the downward first passage equation

        -(I; R) Q = Delta_v^-1 int (C(du) + D(du)) (I; R) exp(uQ),

    obtained by running the ascending solver on the transposed arrays.
    Returns (Q, R, residual).
    """
    arrays = _arrays(model, transposed=True)
    Kt, Lt, _ = _minimal_solution(arrays, tol=tol, max_iter=max_iter)
    return Kt.T, Lt.T, _residual(arrays, Kt, Lt)


def ladder_height_matrix(model, ladder, x):
    """
    J(x): row i in S- holds P(M(tau_0+) = j, Y(tau_0+) <= x | M(0) = i);
    x may be numpy.inf for the total ascending ladder mass
    """
    minus, plus = model.partition
    E = ladder.stacked(model.n, model.partition)
    integral = np.zeros((len(minus), model.n))
    for (l, j), f in model.F.items():
        integral[:, j] += model.D[l, j] * (mixture.MatrixTail(f, ladder.K).integral(x) @ E[:, l])
    if plus:
        integral[:, list(plus)] += ladder.L * model.v[list(plus)]
    return integral / np.abs(model.v[list(minus)])[:, None]


def ladder_mass(model, ladder):
    return ladder_height_matrix(model, ladder, np.inf)


def ladder_height(model, ladder, i, j, x):
    minus = model.partition.minus
    if i not in minus:
        raise errors.NotMinusState('state {0} does not have negative drift'.format(i))
    return float(ladder_height_matrix(model, ladder, x)[minus.index(i), j])

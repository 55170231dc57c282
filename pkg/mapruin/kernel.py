"""
This module implements the semi-Markov kernel H(x) of the upward hitting
renewal equation, its density, the overshoot kernel Gbar(x), the transform
H^(theta) with its Wiener-Hopf factor T(theta) and the closed form of
int_0^inf exp(alpha x) Gbar(x) dx.

Rows of S+ states come from the first transition after leaving the state:
with q(i) = c(i)/v(i) and g_ij(x) = int_0^x exp(-q(i)(x-u)) F_ij(du),

    H_ij(x) = (1(i!=j) C_ij (1 - exp(-q x)) + D_ij (F_ij(x) - g_ij(x))) / c(i)
    Gbar_ij(x) = 1(i=j) exp(-q x) + D_ij (1 - exp(-q x) - F_ij(x) + g_ij(x)) / c(i)

Rows of S- states combine the ascending ladder jump term
N(w) = int_w^inf exp((y-w)K) (I, L) D(dy) with the S+ rows reached
continuously through L.

:copyright: (c) 2018 by Happy Gears, Inc
:license: Apache2, see LICENSE for more details.

"""

import logging
import math

import numpy as np
import scipy.linalg

from . import errors
from . import ladder as ldr
from . import mixture
from . import model as mdl
from . import spectral

CONDITION_LIMIT = 1e12

log = logging.getLogger(__name__)


class KernelContext(object):
    """
    Model plus its ladder solution and the per-jump matrix tails against K,
    shared by every kernel evaluation.
    """

    def __init__(self, model, ladder=None):
        super(KernelContext, self).__init__()
        if ladder is None:
            ladder = ldr.solve_ladder(model)
        self.model = model
        self.partition = model.partition
        self.ladder = ladder
        self.pi = mdl.stationary_dist(model)
        self.minus = list(model.partition.minus)
        self.plus = list(model.partition.plus)
        self.E = ladder.stacked(model.n, model.partition)
        self.speed_minus = np.abs(model.v[self.minus])
        self.v_plus = model.v[self.plus]
        self.tails = {key: mixture.MatrixTail(f, ladder.K) for key, f in model.F.items()}

    @property
    def n(self):
        return self.model.n

    @property
    def kminus(self):
        return self.ladder.kminus

    @property
    def theta_bound(self):
        """H^(theta) exists for theta below this bound"""
        bounds = [self.model.theta_max] + [self.model.c[i] / self.model.v[i] for i in self.plus]
        return min(bounds)


def make_context(model, ladder=None):
    return KernelContext(model, ladder)


def solve_block(matrix, rhs, what):
    if np.linalg.cond(matrix) > CONDITION_LIMIT:
        raise errors.SingularBlock('{0} is singular'.format(what))
    return scipy.linalg.solve(matrix, rhs)


########################################################################################
# rows of S+ states

def _plus_rows(ctx, x, kind):
    """|S+| x n rows of H (kind='H'), h (kind='h') or Gbar (kind='G') at level x"""
    model = ctx.model
    rows = np.zeros((len(ctx.plus), model.n))
    for r, i in enumerate(ctx.plus):
        c, v = model.c[i], model.v[i]
        q = c / v
        decay = 0.0 if math.isinf(x) else math.exp(-q * x)
        for j in range(model.n):
            cij = model.C[i, j] if i != j else 0.0
            dij = model.D[i, j]
            f = model.F.get((i, j))
            cdf = mixture.mixture_cdf(f, x) if f is not None else 0.0
            smooth = mixture.mixture_exp_convolution(f, q, x) if f is not None else 0.0
            if kind == 'H':
                rows[r, j] = (cij * (1.0 - decay) + dij * (cdf - smooth)) / c
            elif kind == 'h':
                rows[r, j] = (cij * decay + dij * smooth) / v
            else:
                rows[r, j] = (decay if i == j else 0.0) + dij * (1.0 - decay - cdf + smooth) / c
    return rows


########################################################################################
# ladder jump term of S- rows

def _jump_term(ctx, x, kind):
    """
    |S-| x n matrix: N(x) for kind='density', int_0^x N for 'lower' and
    int_x^inf N for 'upper'
    """
    result = np.zeros((len(ctx.minus), ctx.n))
    for (l, j), tail in ctx.tails.items():
        if kind == 'density':
            block = tail.at(x)
        else:
            block = tail.integral(x, upper=(kind == 'upper'))
        result[:, j] += ctx.model.D[l, j] * (block @ ctx.E[:, l])
    return result


def _minus_rows(ctx, jump, plus_rows):
    through_plus = (ctx.ladder.L * ctx.v_plus) @ plus_rows if ctx.plus else 0.0
    return (jump + through_plus) / ctx.speed_minus[:, None]


def _assemble(ctx, minus_rows, plus_rows):
    result = np.zeros((ctx.n, ctx.n))
    result[ctx.minus, :] = minus_rows
    if ctx.plus:
        result[ctx.plus, :] = plus_rows
    return result


def H_at(ctx, x):
    """H(x); x may be numpy.inf for the total kernel mass"""
    if x <= 0:
        return np.zeros((ctx.n, ctx.n))
    plus_rows = _plus_rows(ctx, x, 'H')
    return _assemble(ctx, _minus_rows(ctx, _jump_term(ctx, x, 'lower'), plus_rows), plus_rows)


def H_density(ctx, y):
    """h(y) = dH/dy"""
    plus_rows = _plus_rows(ctx, y, 'h')
    return _assemble(ctx, _minus_rows(ctx, _jump_term(ctx, y, 'density'), plus_rows), plus_rows)


def Gbar_at(ctx, x):
    x = max(float(x), 0.0)
    plus_rows = _plus_rows(ctx, x, 'G')
    return _assemble(ctx, _minus_rows(ctx, _jump_term(ctx, x, 'upper'), plus_rows), plus_rows)


def continuous_overshoot(ctx, x):
    """
    B(x) = Delta_v^-1 (-L; I) Delta_v++ exp(-x Delta_c++ Delta_v++^-1), the
    n x |S+| overshoot term of crossing a level continuously
    """
    model = ctx.model
    stacked = np.zeros((ctx.n, len(ctx.plus)))
    stacked[ctx.minus, :] = -ctx.ladder.L
    stacked[ctx.plus, :] = np.eye(len(ctx.plus))
    decay = np.exp(-x * model.c[ctx.plus] / ctx.v_plus)
    return (stacked * (ctx.v_plus * decay)) / model.v[:, None]


########################################################################################
# transforms

def _check_domain(ctx, theta):
    if theta < 0 or theta >= ctx.theta_bound:
        raise errors.DomainExceeded('theta={0!r} outside [0, {1!r})'.format(theta, ctx.theta_bound))


def T_of_theta(ctx, theta):
    _check_domain(ctx, theta)
    model = ctx.model
    m = len(ctx.minus)
    inner = solve_block(theta * np.eye(m) - ctx.ladder.K, np.eye(m), '(theta I - K)')
    T = np.zeros((ctx.n, ctx.n))
    T[np.ix_(ctx.minus, ctx.minus)] = inner
    if ctx.plus:
        ratio = ctx.v_plus / (model.c[ctx.plus] - theta * ctx.v_plus)
        T[np.ix_(ctx.minus, ctx.plus)] = inner @ ctx.ladder.L + ctx.ladder.L * ratio
        T[np.ix_(ctx.plus, ctx.plus)] = -np.diag(ratio)
    return T


def T_inverse(ctx, theta):
    """closed form inverse of T(theta)"""
    _check_domain(ctx, theta)
    model = ctx.model
    m = len(ctx.minus)
    outer = theta * np.eye(m) - ctx.ladder.K
    T = np.zeros((ctx.n, ctx.n))
    T[np.ix_(ctx.minus, ctx.minus)] = outer
    if ctx.plus:
        ratio = (model.c[ctx.plus] - theta * ctx.v_plus) / ctx.v_plus
        T[np.ix_(ctx.minus, ctx.plus)] = ctx.ladder.L * ratio + outer @ ctx.ladder.L
        T[np.ix_(ctx.plus, ctx.plus)] = -np.diag(ratio)
    return T


def H_hat(ctx, theta):
    """
    H^(theta) = I - Delta_v^-1 T(theta) A(theta). At theta = 0 the factor
    (theta I - K) is singular and the total mass H(inf) is returned.
    """
    _check_domain(ctx, theta)
    if theta == 0:
        return H_at(ctx, np.inf)
    A = spectral.A_of_theta(ctx.model, theta)
    return np.eye(ctx.n) - (T_of_theta(ctx, theta) @ A) / ctx.model.v[:, None]


def wiener_hopf_residual(ctx, theta):
    """sup norm of T(theta)^-1 Delta_v (I - H^(theta)) - A(theta)"""
    A = spectral.A_of_theta(ctx.model, theta)
    factor = T_inverse(ctx, theta) @ (ctx.model.v[:, None] * (np.eye(ctx.n) - H_hat(ctx, theta)))
    return float(np.max(np.abs(factor - A)))


def Gbar_transform(ctx, alpha):
    """int_0^inf exp(alpha x) Gbar(x) dx in closed form"""
    model = ctx.model
    if ctx.kminus is None:
        raise errors.DriftPositive('Gbar transform needs the null vector of K')
    _check_domain(ctx, alpha)
    n, m = ctx.n, len(ctx.minus)
    K, L, E = ctx.ladder.K, ctx.ladder.L, ctx.E
    A = spectral.A_of_theta(model, alpha)
    G = model.generator
    excess = (A - G) / (model.c - alpha * model.v)[:, None]
    result = np.zeros((n, n))
    if ctx.plus:
        result[ctx.plus, :] = excess[ctx.plus, :] / alpha
    k_pi = np.outer(ctx.kminus, ctx.pi[ctx.minus])
    zero_L = np.zeros((m, n))
    if ctx.plus:
        zero_L[:, ctx.plus] = L
    bracket = (solve_block(alpha * np.eye(m) - K, E @ A, '(alpha I - K)')
               + (zero_L * model.v) @ excess
               - k_pi @ E @ (np.diag(model.v) + model.jump_mean_matrix())
               - solve_block(k_pi - K, E @ G, '(k pi- - K)'))
    result[ctx.minus, :] = bracket / (alpha * ctx.speed_minus)[:, None]
    return result


def twisted_kernel(ctx, alpha, h):
    """H_dagger(inf) = Delta_h^-1 H^(alpha) Delta_h, stochastic at the Lundberg root"""
    return (H_hat(ctx, alpha) * h) / h[:, None]

"""
This module implements the Markov renewal equation

    Psi(x) = Gbar(x) + int_0^x H(dy) Psi(x - y)

for the upward hitting probabilities Psi_ij(x) = P(M(tau_x+) = j | M(0) = i)
on a uniform level grid, and the exponential asymptotics of Psi, of the
continuous overshoot and of the stationary fluid queue tail.

:copyright: (c) 2018 by Happy Gears, Inc
:license: Apache2, see LICENSE for more details.

"""

import logging
import math
import typing

import numpy as np
import scipy.linalg

from . import errors
from . import kernel
from . import ladder as ldr
from . import model as mdl
from . import spectral

GRID_TOLERANCE = 1e-12
MIN_DECADES = 5.0
LAST_DECADE = 0.9
MONOTONE_SLACK = 1e-9

log = logging.getLogger(__name__)


class HittingTable(typing.NamedTuple):
    grid: np.ndarray
    psi: np.ndarray
    step: float
    metadata: dict

    @property
    def xmax(self):
        return float(self.grid[-1])

    def row_sums(self):
        return self.psi.sum(axis=2)

    def at(self, x):
        """Psi at the grid point nearest to x"""
        slack = 0.5 * self.step
        if not -slack < x < self.xmax + slack:
            raise errors.BadGrid('level {0!r} is outside the grid [0, {1!r}]'.format(x, self.xmax))
        return self.psi[int(round(x / self.step))]


class AsymptoticResult(typing.NamedTuple):
    alpha: float
    nu: np.ndarray
    eta_alpha: float
    eta_zero: float
    prefactor_full: np.ndarray
    prefactor_total: np.ndarray
    prefactor_continuous: np.ndarray
    gamma: np.ndarray
    mu: np.ndarray
    h: np.ndarray


class FluidTail(typing.NamedTuple):
    alpha: float
    coefficients: np.ndarray
    Q: np.ndarray
    R: np.ndarray
    beta: np.ndarray
    residual: float


class AsymptoteReport(typing.NamedTuple):
    deviation: float
    relative_deviation: float
    monotone: bool
    levels: np.ndarray
    deviations: np.ndarray


class RichardsonReport(typing.NamedTuple):
    coarse: HittingTable
    fine: HittingTable
    sup_difference: float


def check_grid(xmax, h):
    if not (h > 0 and xmax > 0 and math.isfinite(xmax)):
        raise errors.BadGrid('need xmax > 0 and h > 0, got xmax={0!r}, h={1!r}'.format(xmax, h))
    steps = int(round(xmax / h))
    if steps < 1 or abs(steps * h - xmax) > GRID_TOLERANCE * max(1.0, xmax):
        raise errors.BadGrid('xmax={0!r} is not a multiple of h={1!r}'.format(xmax, h))
    return steps


def solve_hitting(ctx, xmax, h):
    """
    marches the trapezoid rule forward in x. The density h(0) does not
    vanish, so every step solves (I - h/2 h(0)) Psi_k = Gbar_k + ...
    """
    steps = check_grid(xmax, h)
    n = ctx.n
    grid = h * np.arange(steps + 1)
    density = np.array([kernel.H_density(ctx, y) for y in grid])
    gbar = np.array([kernel.Gbar_at(ctx, x) for x in grid])
    psi = np.zeros((steps + 1, n, n))
    psi[0] = gbar[0]
    diagonal = scipy.linalg.lu_factor(np.eye(n) - 0.5 * h * density[0])
    for k in range(1, steps + 1):
        history = 0.5 * density[k] @ psi[0]
        if k > 1:
            history = history + np.einsum('lij,ljk->ik', density[1:k], psi[k - 1:0:-1])
        psi[k] = scipy.linalg.lu_solve(diagonal, gbar[k] + h * history)
        if k % 1000 == 0:
            log.debug('renewal march at x=%.4g (%d of %d)', grid[k], k, steps)
    metadata = {'scheme': 'trapezoid', 'steps': steps, 'kernel_at_zero': float(np.max(np.abs(density[0])))}
    return HittingTable(grid=grid, psi=psi, step=float(h), metadata=metadata)


def richardson(ctx, xmax, h):
    """solves on h and h/2 and reports the sup difference on the coarse grid"""
    coarse = solve_hitting(ctx, xmax, h)
    fine = solve_hitting(ctx, xmax, h / 2.0)
    difference = float(np.max(np.abs(fine.psi[::2] - coarse.psi)))
    return RichardsonReport(coarse=coarse, fine=fine, sup_difference=difference)


def duality_ratio(model):
    """(a+, a-) with a+ = sum_{S+} v(i) pi_i and a- = -sum_{S-} v(i) pi_i"""
    pi = mdl.stationary_dist(model)
    minus, plus = model.partition
    a_plus = float(np.sum(model.v[list(plus)] * pi[list(plus)]))
    a_minus = float(-np.sum(model.v[list(minus)] * pi[list(minus)]))
    return a_plus, a_minus


def stationary_hit_ratio(model, psi0):
    """
    P(tau_0+ < inf) when the initial S- state is drawn proportionally to
    |v(i)| pi_i; equals a+/a- for a jump-free model with negative drift
    """
    pi = mdl.stationary_dist(model)
    minus = list(model.partition.minus)
    weights = np.abs(model.v[minus]) * pi[minus]
    return float(weights @ psi0[minus].sum(axis=1) / weights.sum())


########################################################################################
# asymptotics

def nu_vector(ctx, point):
    """nu = -mu T(alpha)^-1 Delta_v, left invariant for H^(alpha)"""
    m = len(ctx.minus)
    if np.linalg.cond(point.theta * np.eye(m) - ctx.ladder.K) > kernel.CONDITION_LIMIT:
        raise errors.SingularBlock('(alpha I - K) is singular')
    return -(point.mu @ kernel.T_inverse(ctx, point.theta)) * ctx.model.v


def gamma_matrix(ctx, alpha):
    """Gamma(alpha): zero S+ rows, S- rows built on the fundamental matrix (k pi- - K)^-1"""
    model = ctx.model
    m = len(ctx.minus)
    k_pi = np.outer(ctx.kminus, ctx.pi[ctx.minus])
    fundamental = kernel.solve_block(k_pi - ctx.ladder.K, np.eye(m), '(k pi- - K)')
    rows = (-k_pi @ ctx.E @ (np.diag(model.v) + model.jump_mean_matrix())
            - (alpha * np.eye(m) - k_pi) @ fundamental @ ctx.E @ model.generator / alpha)
    gamma = np.zeros((ctx.n, ctx.n))
    gamma[ctx.minus, :] = rows
    return gamma


def asymptotics(ctx):
    model = ctx.model
    eta_zero = mdl.mean_drift(model)
    if eta_zero >= 0:
        raise errors.DriftNonNegative('mean drift {0!r} is not negative'.format(eta_zero))
    kminus = ctx.kminus
    alpha = spectral.decay_rate(model, kminus)
    point = spectral.perron(model, alpha, kminus)
    mu, h = point.mu, point.h
    nu = nu_vector(ctx, point)
    eta_alpha = spectral.kappa_prime(model, point)
    gamma = gamma_matrix(ctx, alpha)
    prefactor_full = np.outer(h, mu @ (gamma - model.generator / alpha)) / eta_alpha
    prefactor_total = -eta_zero * h * float(mu[ctx.minus] @ kminus) / eta_alpha
    stacked = np.zeros((ctx.n, len(ctx.plus)))
    stacked[ctx.minus, :] = -ctx.ladder.L
    stacked[ctx.plus, :] = np.eye(len(ctx.plus))
    prefactor_continuous = np.outer(h, (mu @ stacked) * ctx.v_plus) / eta_alpha
    log.debug('alpha=%.12g eta_alpha=%.6g eta_zero=%.6g', alpha, eta_alpha, eta_zero)
    return AsymptoticResult(alpha=alpha, nu=nu, eta_alpha=eta_alpha, eta_zero=eta_zero,
                            prefactor_full=prefactor_full, prefactor_total=prefactor_total,
                            prefactor_continuous=prefactor_continuous, gamma=gamma, mu=mu, h=h)


def stationary_vector(Q):
    """beta with beta Q = 0, beta e = 1"""
    m = Q.shape[0]
    system = Q.T.copy()
    system[-1, :] = 1.0
    rhs = np.zeros(m)
    rhs[-1] = 1.0
    if np.linalg.cond(system) > kernel.CONDITION_LIMIT:
        raise errors.SingularSolve('Q is not a rate matrix with a unique stationary vector')
    return scipy.linalg.solve(system, rhs)


def fluid_tail(model):
    """
    coefficients c_i with exp(alpha x) P(V > x, M = i) -> c_i for the
    stationary buffer content V of the fluid queue driven by the model
    """
    eta_zero = mdl.mean_drift(model)
    if eta_zero >= 0:
        raise errors.DriftNonNegative('mean drift {0!r} is not negative'.format(eta_zero))
    Q, R, residual = ldr.solve_descending(model)
    beta = stationary_vector(Q)
    alpha = spectral.decay_rate(model)
    point = spectral.perron(model, alpha)
    eta_alpha = spectral.kappa_prime(model, point)
    h_minus = point.h[list(model.partition.minus)]
    coefficients = -eta_zero * point.mu * float(beta @ h_minus) / eta_alpha
    log.debug('fluid tail alpha=%.12g coefficients=%s', alpha, coefficients)
    return FluidTail(alpha=alpha, coefficients=coefficients, Q=Q, R=R, beta=beta, residual=residual)


def asymptote_match(table, asym):
    """
    max over the last tenth of the grid of |exp(alpha x) Psi(x) - prefactor_full|,
    with a flag telling whether the deviation decreases there
    """
    if table.xmax < MIN_DECADES / asym.alpha:
        raise errors.HorizonTooShort('xmax={0!r} is below {1}/alpha={2!r}'.format(
            table.xmax, MIN_DECADES, MIN_DECADES / asym.alpha))
    start = int(math.floor(LAST_DECADE * (len(table.grid) - 1)))
    levels = table.grid[start:]
    scaled = np.exp(asym.alpha * levels)[:, None, None] * table.psi[start:]
    deviations = np.max(np.abs(scaled - asym.prefactor_full), axis=(1, 2))
    scale = float(np.max(np.abs(asym.prefactor_full)))
    monotone = bool(np.all(np.diff(deviations) <= MONOTONE_SLACK))
    if not monotone:
        log.warning('deviation from the asymptote is not monotone over the last decade of the grid')
    deviation = float(np.max(deviations))
    return AsymptoteReport(deviation=deviation, relative_deviation=deviation / scale if scale > 0 else math.inf,
                           monotone=monotone, levels=levels, deviations=deviations)

"""
This module implements the Perron root machinery for the ML matrix family
A(theta) = C + D^(theta) + theta Delta_v and the Lundberg root alpha > 0
with kappa(alpha) = 0.

:copyright: (c) 2018 by Happy Gears, Inc
:license: Apache2, see LICENSE for more details.

"""

import logging
import math
import typing

import numpy as np
import scipy.linalg
from scipy import optimize

from . import errors
from . import model as mdl

ROOT_XTOL = 1e-15
ROOT_TOLERANCE = 1e-12
UNBOUNDED_SEARCH = [2.0 ** j for j in range(-6, 41)]

NORMALIZED_BY_KMINUS = 'kminus'
NORMALIZED_BY_SUM = 'sum'

log = logging.getLogger(__name__)


class SpectralPoint(typing.NamedTuple):
    """
    Perron value kappa of A(theta) with positive left (mu) and right (h)
    eigenvectors normalized by mu- kminus = 1 (or mu e = 1 when kminus is
    not available) and mu h = 1
    """
    theta: float
    kappa: float
    mu: np.ndarray
    h: np.ndarray
    normalization: str


def A_of_theta(model, theta):
    return model.C + model.d_hat(theta) + theta * np.diag(model.v)


def kappa(model, theta):
    """maximal real eigenvalue of A(theta)"""
    return float(np.max(scipy.linalg.eigvals(A_of_theta(model, theta)).real))


def perron(model, theta, kminus=None):
    matrix = A_of_theta(model, theta)
    values, left, right = scipy.linalg.eig(matrix, left=True, right=True)
    idx = int(np.argmax(values.real))
    mu = np.real(left[:, idx])
    h = np.real(right[:, idx])
    mu = mu * np.sign(mu.sum())
    h = h * np.sign(h.sum())
    if np.any(mu <= 0) or np.any(h <= 0):
        raise errors.NoConvergence('Perron vectors of A({0!r}) are not positive'.format(theta))
    if kminus is not None:
        mu = mu / float(mu[list(model.partition.minus)] @ kminus)
        normalization = NORMALIZED_BY_KMINUS
    else:
        mu = mu / mu.sum()
        normalization = NORMALIZED_BY_SUM
    h = h / float(mu @ h)
    return SpectralPoint(theta=float(theta), kappa=float(values[idx].real), mu=mu, h=h,
                         normalization=normalization)


def kappa_prime(model, point):
    """kappa'(theta) = mu (Delta_v + D^'(theta)) h"""
    return float(point.mu @ (np.diag(model.v) + model.d_hat_deriv(point.theta)) @ point.h)


def _search_points(theta_max):
    if math.isinf(theta_max):
        return UNBOUNDED_SEARCH
    return [theta_max * (1.0 - 2.0 ** -j) for j in range(1, 53)]


def decay_rate(model, kminus=None):
    """
    the unique alpha in (0, theta_max) with kappa(alpha) = 0. kappa is convex
    with kappa(0) = 0 and kappa'(0) = mean drift < 0, so any theta > 0 with
    kappa(theta) > 0 lies beyond the root.
    """
    drift = mdl.mean_drift(model)
    if drift >= 0:
        raise errors.DriftNonNegative('mean drift {0!r} is not negative'.format(drift))
    theta_max = model.theta_max
    upper = None
    for theta in _search_points(theta_max):
        if kappa(model, theta) > 0:
            upper = theta
            break
    if upper is None:
        raise errors.NoRoot('kappa stays negative below theta_max={0!r}'.format(theta_max))
    lowest = optimize.minimize_scalar(lambda t: kappa(model, t), bounds=(0.0, upper), method='bounded',
                                      options={'xatol': 1e-10})
    lower = float(lowest.x)
    if not kappa(model, lower) < 0:
        raise errors.NoRoot('could not find theta > 0 with kappa(theta) < 0')
    alpha = optimize.brentq(lambda t: kappa(model, t), lower, upper, xtol=ROOT_XTOL, rtol=4 * np.finfo(float).eps,
                            maxiter=500)
    residual = kappa(model, alpha)
    log.debug('decay rate %.15g bracketed in [%.6g, %.6g], kappa residual %.3e', alpha, lower, upper, residual)
    if abs(residual) > ROOT_TOLERANCE:
        raise errors.NoRoot('kappa({0!r}) = {1:.3e} exceeds {2:.0e}'.format(alpha, residual, ROOT_TOLERANCE))
    if kappa_prime(model, perron(model, alpha, kminus)) <= 0:
        raise errors.NoRoot('root {0!r} is not on the increasing branch of kappa'.format(alpha))
    return alpha

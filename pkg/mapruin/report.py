"""
This module implements the invariant report: every residual and identity
the numerical modules promise, evaluated for one model and collected into a
single record

:copyright: (c) 2018 by Happy Gears, Inc
:license: Apache2, see LICENSE for more details.

"""

import logging

import numpy as np

from . import errors
from . import kernel
from . import ladder as ldr
from . import model as mdl
from . import renewal
from . import spectral

THETA_POINTS = 10

log = logging.getLogger(__name__)


def _sup(matrix):
    matrix = np.asarray(matrix, dtype=float)
    return float(np.max(np.abs(matrix))) if matrix.size else 0.0


def theta_grid(ctx, alpha):
    """THETA_POINTS admissible points strictly inside (0, bound)"""
    bound = ctx.theta_bound
    if not np.isfinite(bound):
        bound = 2.0 * alpha
    return bound * np.arange(1, THETA_POINTS + 1) / (THETA_POINTS + 1.0)


def stationary_section(model):
    pi = mdl.stationary_dist(model)
    a_plus, a_minus = renewal.duality_ratio(model)
    return {
        'pi': pi,
        'mean_drift': mdl.mean_drift(model),
        'stationary_residual': _sup(pi @ model.generator),
        'normalization_residual': abs(float(pi.sum()) - 1.0),
        'a_plus': a_plus,
        'a_minus': a_minus,
    }


def ladder_section(model, ladder):
    pi = mdl.stationary_dist(model)
    minus, plus = model.partition
    section = {
        'ladder_residual': ladder.residual,
        'ladder_iterations': ladder.iterations,
        'qdual_row_sums': _sup(ladder.Qdual.sum(axis=1)) if ladder.kminus is not None else None,
        'qdual_min_row_sum': float(ladder.Qdual.sum(axis=1).min()),
        'ladder_mass': ldr.ladder_mass(model, ladder),
    }
    if ladder.kminus is not None:
        pi_minus = pi[list(minus)]
        section['pi_K'] = _sup(pi_minus @ ladder.K)
        section['pi_L'] = _sup(pi_minus @ ladder.L - pi[list(plus)]) if plus else 0.0
        section['kminus'] = ladder.kminus
    dual_ladder = ldr.solve_ladder(mdl.dual_model(model))
    Q, R, residual = ldr.solve_descending(model)
    section['descending_residual'] = residual
    section['dual_consistency'] = _sup(Q - dual_ladder.Qdual)
    section['dual_consistency_R'] = _sup(R - dual_ladder.Rdual)
    return section


def asymptotic_section(ctx, config):
    model = ctx.model
    asym = renewal.asymptotics(ctx)
    alpha = asym.alpha
    thetas = theta_grid(ctx, alpha)
    wiener_hopf = max(kernel.wiener_hopf_residual(ctx, theta) for theta in thetas)
    H_alpha = kernel.H_hat(ctx, alpha)
    minus = ctx.minus
    nu_identity = float(asym.nu[minus] @ (ctx.kminus / ctx.speed_minus)) - alpha
    twisted = kernel.twisted_kernel(ctx, alpha, asym.h)
    gbar = kernel.Gbar_transform(ctx, alpha)
    psi0 = kernel.Gbar_at(ctx, 0.0)
    section = {
        'alpha': alpha,
        'kappa_at_alpha': spectral.kappa(model, alpha),
        'eta_alpha': asym.eta_alpha,
        'wiener_hopf_residual': wiener_hopf,
        'wiener_hopf_thetas': thetas,
        'nu_invariance': _sup(asym.nu @ H_alpha - asym.nu),
        'nu_identity': abs(nu_identity),
        'twisted_row_sums': _sup(twisted.sum(axis=1) - 1.0),
        'prefactor_consistency': _sup(asym.prefactor_full.sum(axis=1) - asym.prefactor_total),
        'prefactor_total': asym.prefactor_total,
        'gbar_envelope': _sup(gbar),
        'stationary_hit_ratio': renewal.stationary_hit_ratio(model, psi0),
    }
    if config is not None and config.xmax >= renewal.MIN_DECADES / alpha:
        table = renewal.solve_hitting(ctx, config.xmax, config.h)
        match = renewal.asymptote_match(table, asym)
        section['asymptote_deviation'] = match.deviation
        section['asymptote_relative_deviation'] = match.relative_deviation
        section['asymptote_monotone'] = match.monotone
    fluid = renewal.fluid_tail(model)
    section['fluid_coefficients'] = fluid.coefficients
    section['fluid_descending_residual'] = fluid.residual
    return section


def invariant_report(model, config=None):
    """
    returns one dictionary with the stationary, ladder and asymptotic
    residuals. Sections that do not apply to the model (no negative drift
    states, non-negative drift) are listed under `skipped` with the reason.
    """
    record = {'model': model.name, 'states': model.n, 'skipped': {}}
    record['stationary'] = stationary_section(model)
    try:
        ladder = ldr.solve_ladder(model, tol=config.tol) if config is not None else ldr.solve_ladder(model)
    except errors.EmptyMinus as e:
        record['skipped']['ladder'] = errors.get_error(e)
        record['skipped']['asymptotics'] = errors.get_error(e)
        return record
    record['ladder'] = ladder_section(model, ladder)
    if record['stationary']['mean_drift'] >= 0:
        e = errors.DriftNonNegative('mean drift {0!r} is not negative'.format(record['stationary']['mean_drift']))
        record['skipped']['asymptotics'] = errors.get_error(e)
        return record
    ctx = kernel.make_context(model, ladder)
    record['asymptotics'] = asymptotic_section(ctx, config)
    log.debug('invariant report for %s complete', model.name)
    return record

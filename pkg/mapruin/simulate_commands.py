"""
This module implements the "simulate" command context: Monte Carlo estimates
printed next to the values the numerical modules predict

:copyright: (c) 2018 by Happy Gears, Inc
:license: Apache2, see LICENSE for more details.

"""

import math

import numpy as np

from . import ladder as ldr
from . import model as mdl
from . import renewal
from . import simulator
from . import sub_command

LADDER_CHECK_POINTS = 50

ESTIMATE_COLUMNS = ['estimate', 'stderr', 'low', 'high']


def _estimate_cells(est):
    return [est.point, est.stderr, est.low, est.high]


class SimulateCommands(sub_command.SubCommand, object):

    def __init__(self, config=None, models=None):
        super(SimulateCommands, self).__init__(config=config, models=models)
        self.prompt = 'simulate # '

    def do_hitting(self, arg):
        """hitting [key=value ...]

        estimate P(M(tau_x+) = j | M(0) = state) for x = level, with the
        paths stopped at the event cap and the probability of never reaching
        the level in the last two rows
        """
        self.execute(self.hitting, arg)

    def do_ladder(self, arg):
        """ladder [key=value ...]

        estimate the ascending ladder law from `state` (a negative drift state)
        and compare it with J(x) inside the DKW band
        """
        self.execute(self.ladder, arg)

    def do_duality(self, arg):
        """duality [key=value ...]

        both sides of the jump-free duality identity with z-scores
        """
        self.execute(self.duality, arg)

    def do_fluid(self, arg):
        """fluid [key=value ...]

        P(V > level, M = i) of the fluid queue after `horizon` time units
        compared with the exponential tail asymptotics
        """
        self.execute(self.fluid, arg)

    def do_occupancy(self, arg):
        """occupancy [key=value ...]

        time fractions and mean holding times along one path of length `horizon`
        """
        self.execute(self.occupancy, arg)

    ##########################################################################################
    def hitting(self, config):
        model = self.get_model(config)
        est = simulator.estimate_hitting(model, config.level, config.state, config.reps, seed=config.seed,
                                         workers=config.workers, confidence=config.confidence)
        rows = [[j] + _estimate_cells(e) for j, e in enumerate(est.targets)]
        rows.append(['capped'] + _estimate_cells(est.capped))
        rows.append(['never'] + _estimate_cells(est.never))
        return {
            'title': 'hitting level {0} from state {1}; cutoff {2:.6g}, truncation bias <= {3:g}'.format(
                config.level, config.state, est.cutoff, est.truncation_bias),
            'columns': ['target'] + ESTIMATE_COLUMNS,
            'rows': rows,
            'record': est,
        }

    def ladder(self, config):
        model = self.get_model(config)
        est = simulator.estimate_ladder(model, config.state, config.reps, seed=config.seed,
                                        workers=config.workers, confidence=config.confidence)
        solution = ldr.solve_ladder(model, tol=config.tol)
        row = model.partition.minus.index(config.state)
        exact_mass = ldr.ladder_mass(model, solution)[row]
        band = simulator.dkw_band(est.count, config.confidence)
        heights = np.concatenate([est.heights[j] for j in range(model.n)] + [np.zeros(1)])
        points = np.unique(np.quantile(heights, np.linspace(0.0, 1.0, LADDER_CHECK_POINTS)))
        deviation = np.zeros(model.n)
        for x in points:
            exact = ldr.ladder_height_matrix(model, solution, x)[row]
            empirical = np.array([est.cdf(j, x) for j in range(model.n)])
            deviation = np.maximum(deviation, np.abs(empirical - exact))
        rows = [[j] + _estimate_cells(est.mass[j]) + [exact_mass[j], deviation[j], band]
                for j in range(model.n)]
        rows.append(['capped'] + _estimate_cells(est.capped) + [0.0, math.nan, math.nan])
        rows.append(['never'] + _estimate_cells(est.defect) + [1.0 - float(exact_mass.sum()), math.nan, math.nan])
        return {
            'title': 'ascending ladder from state {0}'.format(config.state),
            'columns': ['target'] + ESTIMATE_COLUMNS + ['exact', 'sup_cdf_deviation', 'dkw_band'],
            'rows': rows,
            'record': {'mass': est.mass, 'defect': est.defect, 'capped': est.capped, 'exact_mass': exact_mass,
                       'sup_cdf_deviation': deviation, 'dkw_band': band, 'count': est.count},
        }

    def duality(self, config):
        model = self.get_model(config)
        report = simulator.check_duality_nojump(model, config.reps, seed=config.seed, workers=config.workers,
                                                confidence=config.confidence)
        rows = [[p['i'], p['k'], p['left'], p['right'], p['z']] for p in report.pairs]
        return {
            'title': 'P(tau_0+ < inf) = {0:.6g} (expected {1:.6g}, z = {2:.3f})'.format(
                report.hit_probability.point, report.expected_ratio, report.z_ratio),
            'columns': ['i', 'k', 'upward', 'dual_downward', 'z'],
            'rows': rows,
            'record': report,
        }

    def fluid(self, config):
        model = self.get_model(config)
        est = simulator.estimate_fluid_tail(model, config.level, config.horizon, config.reps, seed=config.seed,
                                            workers=config.workers, confidence=config.confidence)
        tail = renewal.fluid_tail(model)
        predicted = tail.coefficients * math.exp(-tail.alpha * config.level)
        rows = [[i] + _estimate_cells(e) + [predicted[i], e.z_score(predicted[i])]
                for i, e in enumerate(est.per_state)]
        rows.append(['busy'] + _estimate_cells(est.busy) + [math.nan, math.nan])
        return {
            'title': 'fluid queue at level {0} after {1} time units (horizon envelope {2:.3g})'.format(
                config.level, config.horizon, est.horizon_envelope),
            'columns': ['state'] + ESTIMATE_COLUMNS + ['asymptotic', 'z'],
            'rows': rows,
            'record': {'estimate': est, 'coefficients': tail.coefficients, 'alpha': tail.alpha},
        }

    def occupancy(self, config):
        model = self.get_model(config)
        occupancy, holding = simulator.estimate_occupancy(model, config.horizon, config.seed)
        pi = mdl.stationary_dist(model)
        rows = [[i, occupancy[i], pi[i], holding[i].point, holding[i].stderr, 1.0 / model.c[i]]
                for i in range(model.n)]
        return {
            'title': 'occupancy over {0} time units'.format(config.horizon),
            'columns': ['state', 'occupancy', 'pi', 'mean_holding', 'stderr', 'expected_holding'],
            'rows': rows,
            'record': {'occupancy': occupancy, 'pi': pi, 'holding': holding},
        }

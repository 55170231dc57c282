"""
This module implements the mapruin command line: one-shot sub-commands and
an interactive shell over the numerical modules

:copyright: (c) 2018 by Happy Gears, Inc
:license: Apache2, see LICENSE for more details.

"""

import argparse
import logging
import math
import sys

import numpy as np

from . import errors
from . import kernel
from . import ladder as ldr
from . import model as mdl
from . import renewal
from . import report
from . import run_config
from . import simulate_commands
from . import spectral
from . import sub_command
from .version import __version__

COMMANDS = ['validate', 'drift', 'ladder', 'decay', 'hitting', 'asymptotics', 'fluid', 'simulate', 'report']
SIMULATE_ARGS = ['hitting', 'ladder', 'duality', 'fluid', 'occupancy']

LOG_FORMAT = '%(levelname)s %(name)s: %(message)s'

log = logging.getLogger(__name__)


def matrix_rows(name, matrix, row_labels=None, col_labels=None):
    """[name, row, col, value] for every entry of a matrix"""
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    rows = []
    for r in range(matrix.shape[0]):
        for c in range(matrix.shape[1]):
            rows.append([name,
                         row_labels[r] if row_labels is not None else r,
                         col_labels[c] if col_labels is not None else c,
                         float(matrix[r, c])])
    return rows


def vector_rows(name, vector, labels=None):
    return [[name, labels[i] if labels is not None else i, '', float(x)] for i, x in enumerate(vector)]


def flatten_record(record, prefix=''):
    """[section, name, value] rows for the scalar entries of a nested record"""
    rows = []
    for key, value in record.items():
        if isinstance(value, dict):
            rows.extend(flatten_record(value, prefix=key if not prefix else prefix + '.' + key))
        elif value is None or isinstance(value, (bool, int, float, str, np.generic)):
            rows.append([prefix, key, value])
    return rows


class MapRuinCommandLine(sub_command.SubCommand, object):
    def __init__(self, config=None, models=None):
        super(MapRuinCommandLine, self).__init__(config=config, models=models)
        self.prompt = 'mapruin > '

    def summary(self):
        print()
        print('mapruin {0}; model: {1}'.format(__version__, self.config.model or '(none, use model=NAME)'))
        print('Type "help" to get list of commands; "help command" returns more details about selected command.')
        print('Commands accept key=value arguments, e.g. "hitting model=cl xmax=20".')
        print('"simulate" with no arguments enters the simulation context; to exit, enter "quit", "q" or "Ctrl-D".')

    ##########################################################################################
    def do_validate(self, arg):
        """validate [key=value ...]

        parse and validate the model, print its states and stationary distribution
        """
        self.execute(self.validate, arg)

    def do_drift(self, arg):
        """drift [key=value ...]

        stationary distribution and mean drift of the level
        """
        self.execute(self.drift, arg)

    def do_ladder(self, arg):
        """ladder [key=value ...]

        minimal solution (K, L) of the ascending ladder equation, the null vector
        of K, the dual objects and the total ascending ladder mass
        """
        self.execute(self.ladder, arg)

    def do_decay(self, arg):
        """decay [key=value ...]

        Lundberg decay rate alpha and the prefactor of the total hitting probability
        """
        self.execute(self.decay, arg)

    def do_hitting(self, arg):
        """hitting [key=value ...]

        table of Psi_ij(x) on the grid 0, h, ..., xmax with the row sums
        """
        self.execute(self.hitting, arg)

    def do_asymptotics(self, arg):
        """asymptotics [key=value ...]

        matrix prefactor of exp(-alpha x) in Psi(x); when xmax >= 5/alpha the
        numerical solution is compared with it over the last tenth of the grid
        """
        self.execute(self.asymptotics, arg)

    def do_fluid(self, arg):
        """fluid [key=value ...]

        tail coefficients of the stationary fluid queue driven by the model
        """
        self.execute(self.fluid, arg)

    def do_report(self, arg):
        """report [key=value ...]

        evaluate every residual and identity for the model as one record
        """
        self.execute(self.report, arg)

    ##########################################################################################
    def do_simulate(self, arg):
        sub_cmd = self.make_simulate()
        if arg:
            sub_cmd.onecmd(arg)
        else:
            sub_cmd.cmdloop()
        self.exit_code = sub_cmd.exit_code

    def help_simulate(self):
        print('simulate {0} [key=value ...]'.format('|'.join(SIMULATE_ARGS)))
        print()
        print('Monte Carlo estimates next to the values computed numerically.')

    def complete_simulate(self, text, _line, _begidx, _endidx):
        return self.complete_cmd(text, SIMULATE_ARGS)

    def make_simulate(self):
        return simulate_commands.SimulateCommands(config=self.config, models=self.models)

    ##########################################################################################
    def validate(self, config):
        model = self.get_model(config)
        pi = mdl.stationary_dist(model)
        minus = model.partition.minus
        rows = [[i, model.v[i], model.c[i], 'S-' if i in minus else 'S+', pi[i]] for i in range(model.n)]
        record = model.to_dict()
        record.update({'pi': pi, 'minus': list(minus), 'plus': list(model.partition.plus)})
        return {
            'title': 'model {0}: {1} states, valid'.format(model.name, model.n),
            'columns': ['state', 'v', 'c', 'sign', 'pi'],
            'rows': rows,
            'record': record,
        }

    def drift(self, config):
        model = self.get_model(config)
        pi = mdl.stationary_dist(model)
        drift = mdl.mean_drift(model)
        a_plus, a_minus = renewal.duality_ratio(model)
        jump_rate = model.jump_mean_matrix().sum(axis=1)
        rows = [[i, pi[i], model.v[i], jump_rate[i], pi[i] * (model.v[i] + jump_rate[i])] for i in range(model.n)]
        return {
            'title': 'mean drift {0!r}'.format(drift),
            'columns': ['state', 'pi', 'v', 'jump_rate', 'contribution'],
            'rows': rows,
            'record': {'pi': pi, 'mean_drift': drift, 'a_plus': a_plus, 'a_minus': a_minus},
        }

    def ladder(self, config):
        model = self.get_model(config)
        solution = ldr.solve_ladder(model, tol=config.tol)
        minus, plus = model.partition
        mass = ldr.ladder_mass(model, solution)
        rows = matrix_rows('K', solution.K, minus, minus)
        rows += matrix_rows('L', solution.L, minus, plus) if plus else []
        rows += vector_rows('k', solution.kminus, minus) if solution.kminus is not None else []
        rows += matrix_rows('Qdual', solution.Qdual, minus, minus)
        rows += matrix_rows('Rdual', solution.Rdual, plus, minus) if plus else []
        rows += matrix_rows('J(inf)', mass, minus)
        record = solution._asdict()
        record['ladder_mass'] = mass
        return {
            'title': 'ladder residual {0:.3e} after {1} iterations'.format(solution.residual, solution.iterations),
            'columns': ['matrix', 'row', 'col', 'value'],
            'rows': rows,
            'record': record,
        }

    def decay(self, config):
        model = self.get_model(config)
        ctx = kernel.make_context(model, ldr.solve_ladder(model, tol=config.tol))
        asym = renewal.asymptotics(ctx)
        rows = [[i, asym.mu[i], asym.h[i], asym.prefactor_total[i]] for i in range(model.n)]
        return {
            'title': 'alpha = {0!r}, kappa(alpha) = {1:.3e}'.format(asym.alpha, spectral.kappa(model, asym.alpha)),
            'columns': ['state', 'mu', 'h', 'prefactor_total'],
            'rows': rows,
            'record': {'alpha': asym.alpha, 'prefactor_total': asym.prefactor_total, 'mu': asym.mu, 'h': asym.h,
                       'eta_alpha': asym.eta_alpha, 'eta_zero': asym.eta_zero},
        }

    def hitting(self, config):
        model = self.get_model(config)
        ctx = kernel.make_context(model, ldr.solve_ladder(model, tol=config.tol))
        table = renewal.solve_hitting(ctx, config.xmax, config.h)
        n = model.n
        columns = ['x'] + ['psi_{0}_{1}'.format(i, j) for i in range(n) for j in range(n)]
        columns += ['rowsum_{0}'.format(i) for i in range(n)]
        sums = table.row_sums()
        rows = [[float(x)] + table.psi[k].ravel().tolist() + sums[k].tolist() for k, x in enumerate(table.grid)]
        return {
            'title': 'Psi(x) on [0, {0}] with step {1}'.format(config.xmax, config.h),
            'columns': columns,
            'rows': rows,
            'record': {'columns': columns, 'rows': rows, 'metadata': table.metadata},
        }

    def asymptotics(self, config):
        model = self.get_model(config)
        ctx = kernel.make_context(model, ldr.solve_ladder(model, tol=config.tol))
        asym = renewal.asymptotics(ctx)
        rows = matrix_rows('prefactor_full', asym.prefactor_full)
        rows += vector_rows('prefactor_total', asym.prefactor_total)
        rows += matrix_rows('prefactor_continuous', asym.prefactor_continuous, None, ctx.plus) if ctx.plus else []
        rows += vector_rows('nu', asym.nu)
        record = asym._asdict()
        title = 'alpha = {0!r}, eta(alpha) = {1!r}'.format(asym.alpha, asym.eta_alpha)
        if config.xmax >= renewal.MIN_DECADES / asym.alpha:
            match = renewal.asymptote_match(renewal.solve_hitting(ctx, config.xmax, config.h), asym)
            record['match'] = {'deviation': match.deviation, 'relative_deviation': match.relative_deviation,
                               'monotone': match.monotone}
            title += ', deviation over the last tenth of the grid {0:.3e} (relative {1:.3e})'.format(
                match.deviation, match.relative_deviation)
        else:
            log.warning('xmax=%g is below %g/alpha=%g, comparison with Psi skipped', config.xmax,
                        renewal.MIN_DECADES, renewal.MIN_DECADES / asym.alpha)
        return {'title': title, 'columns': ['quantity', 'row', 'col', 'value'], 'rows': rows, 'record': record}

    def fluid(self, config):
        model = self.get_model(config)
        tail = renewal.fluid_tail(model)
        decay = math.exp(-tail.alpha * config.level)
        rows = [[i, tail.coefficients[i], tail.coefficients[i] * decay] for i in range(model.n)]
        return {
            'title': 'alpha = {0!r}, descending residual {1:.3e}'.format(tail.alpha, tail.residual),
            'columns': ['state', 'coefficient', 'tail_at_{0:g}'.format(config.level)],
            'rows': rows,
            'record': tail._asdict(),
        }

    def report(self, config):
        model = self.get_model(config)
        record = report.invariant_report(model, config)
        return {
            'title': 'invariant report for {0}'.format(model.name),
            'columns': ['section', 'name', 'value'],
            'rows': flatten_record(record),
            'record': record,
        }


def make_parser():
    parser = argparse.ArgumentParser(prog='mapruin',
                                     description='Hitting probabilities of Markov additive processes with '
                                                 'upward jumps. Without a command an interactive shell starts.')
    parser.add_argument('command', nargs='*', help='one of {0}; "simulate" takes one of {1}'.format(
        ', '.join(COMMANDS), ', '.join(SIMULATE_ARGS)))
    parser.add_argument('--model', default='', help='model file or bundled model name (cl, onoff, mixed3)')
    parser.add_argument('--config', default=None, help='HOCON file merged over the packaged defaults')
    parser.add_argument('--xmax', type=float, default=None, help='right end of the level grid')
    parser.add_argument('--h', type=float, default=None, help='grid step')
    parser.add_argument('--tol', type=float, default=None, help='ladder iteration step tolerance')
    parser.add_argument('--seed', type=int, default=None, help='simulation seed (unsigned 64 bit)')
    parser.add_argument('--reps', type=int, default=None, help='number of simulation replications')
    parser.add_argument('--workers', type=int, default=None, help='simulation worker processes')
    parser.add_argument('--horizon', type=float, default=None, help='simulated time for fluid and occupancy')
    parser.add_argument('--level', type=float, default=None, help='level x of the simulation estimates')
    parser.add_argument('--state', type=int, default=None, help='initial state of the simulation estimates')
    parser.add_argument('--confidence', type=float, default=None, help='confidence level of the intervals')
    parser.add_argument('--format', choices=run_config.FORMATS, default=None, help='output format')
    parser.add_argument('--out', default=None, help='write the output to this file')
    parser.add_argument('--report', action='store_true', default=None,
                        help='print the invariant report of the model as one record')
    parser.add_argument('--verbose', action='store_true', help='log debug messages to stderr')
    parser.add_argument('--version', action='version', version='%(prog)s {0}'.format(__version__))
    return parser


def main(argv=None):
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format=LOG_FORMAT,
                        stream=sys.stderr)
    command = ' '.join(args.command)
    try:
        if args.command and args.command[0] not in COMMANDS:
            raise errors.BadRunConfig('unknown command "{0}", expected one of {1}'.format(args.command[0], COMMANDS))
        if args.report and args.format is None:
            args.format = run_config.FORMAT_RECORD
        config = run_config.make_config(command=command, model=args.model, config_file=args.config,
                                        xmax=args.xmax, h=args.h, tol=args.tol, seed=args.seed, reps=args.reps,
                                        workers=args.workers, horizon=args.horizon, level=args.level,
                                        state=args.state, confidence=args.confidence, format=args.format,
                                        out=args.out, report=args.report)
    except errors.MapRuinError as e:
        return errors.ErrorHandler.handle_error(e)
    cli = MapRuinCommandLine(config)
    if config.report:
        cli.onecmd('report')
        return cli.exit_code
    if not command:
        cli.summary()
        cli.cmdloop()
        return cli.exit_code
    cli.onecmd(command)
    return cli.exit_code


if __name__ == '__main__':
    sys.exit(main())

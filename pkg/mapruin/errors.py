"""
This module implements the error hierarchy of the mapruin package and the
handler that turns errors into single-line diagnostics and exit codes

:copyright: (c) 2018 by Happy Gears, Inc
:license: Apache2, see LICENSE for more details.

"""

import sys

EXIT_OK = 0
EXIT_COMPUTATION = 1
EXIT_VALIDATION = 2


class MapRuinError(Exception):
    exit_code = EXIT_COMPUTATION

    def __init__(self, message='', diagnostics=None):
        super(MapRuinError, self).__init__(message)
        self.message = message
        self.diagnostics = list(diagnostics or [])

    @property
    def code(self):
        return type(self).__name__


class ValidationError(MapRuinError):
    exit_code = EXIT_VALIDATION


class ComputationError(MapRuinError):
    exit_code = EXIT_COMPUTATION


# model validation and input parsing
class NonConservativeRows(ValidationError):
    pass


class Reducible(ValidationError):
    pass


class ZeroRate(ValidationError):
    pass


class BadMixture(ValidationError):
    pass


class BadModelFile(ValidationError):
    pass


class BadRunConfig(ValidationError):
    pass


class BadGrid(ValidationError):
    pass


class NotMinusState(ValidationError):
    pass


class HasJumps(ValidationError):
    pass


class EmptyMinus(ValidationError):
    pass


# numerical failures
class SingularSolve(ComputationError):
    pass


class AbscissaExceeded(ComputationError):
    pass


class SpectralClash(ComputationError):
    pass


class NoConvergence(ComputationError):
    pass


class DriftPositive(ComputationError):
    pass


class DriftNonNegative(ComputationError):
    pass


class NoRoot(ComputationError):
    pass


class DomainExceeded(ComputationError):
    pass


class SingularBlock(ComputationError):
    pass


class HorizonTooShort(ComputationError):
    pass


def get_error(error):
    """
    returns single line machine-greppable description of the error in the form
    ERROR:<code>:<message>. Diagnostics collected by validation are appended
    separated by '; '
    """
    if isinstance(error, MapRuinError):
        parts = [error.message] if error.message else []
        parts.extend(d for d in error.diagnostics if d != error.message)
        text = '; '.join(parts)
        code = error.code
    else:
        text = str(error)
        code = type(error).__name__
    return 'ERROR:{0}:{1}'.format(code, ' '.join(text.split()))


class ErrorHandler:
    @staticmethod
    def handle_error(error, stream=None):
        """
        print the diagnostic line to stderr and return the exit code the
        command line should terminate with
        """
        if stream is None:
            stream = sys.stderr
        print(get_error(error), file=stream)
        return getattr(error, 'exit_code', EXIT_COMPUTATION)

import contextlib
import io
import os
from pathlib import Path
from unittest import mock

import numpy as np

from mapruin import mapruin_main
from mapruin import mixture
from mapruin import model as mdl
from mapruin import model_config
from mapruin import run_config


class CapturedOutput(object):
    def __init__(self, stdout, stderr=None):
        self.stdout = stdout
        self.stderr = stderr


@contextlib.contextmanager
def capture_stdout():
    stdout = io.StringIO()
    with mock.patch('sys.stdout', stdout):
        yield CapturedOutput(stdout)


@contextlib.contextmanager
def capture_output():
    stdout = io.StringIO()
    stderr = io.StringIO()
    with mock.patch('sys.stdout', stdout), mock.patch('sys.stderr', stderr):
        yield CapturedOutput(stdout, stderr)


def run_cmd(cmd, cmdline):
    with capture_stdout() as capture:
        cmd.onecmd(cmdline)
    stdout = capture.stdout.getvalue().strip()
    return stdout


def run_main(argv):
    """returns (exit code, stdout, stderr) of one command line run"""
    with capture_output() as capture:
        code = mapruin_main.main(argv)
    return code, capture.stdout.getvalue().strip(), capture.stderr.getvalue().strip()


def get_cli(model_name='', **overrides):
    config = run_config.make_config(model=model_name, **overrides)
    return mapruin_main.MapRuinCommandLine(config)


def fixture_path(file_name):
    current_path = Path(os.path.dirname(os.path.realpath(__file__)))
    return str(current_path / 'fixtures' / file_name)


def read_file(file_name, as_text=True):
    file_path = Path(fixture_path(file_name))
    if as_text:
        return file_path.read_text()
    else:
        return file_path.read_bytes()


def bundled(name):
    return model_config.load_model(name)


def onoff():
    return mdl.MapModel([-1.0, 1.0], [[-1.0, 1.0], [2.0, -2.0]], name='onoff')


def cl():
    return mdl.MapModel([-1.0], [[-0.5]], [[0.5]], {(0, 0): mixture.JumpMixture.exponential(1.0)}, name='cl')


def random_model(seed):
    """
    drift-negative 3 state model with two draining states and one filling
    state, exponential, Erlang and atom/exponential jumps
    """
    rng = np.random.default_rng(seed)
    off = rng.uniform(0.2, 1.0, size=(3, 3))
    np.fill_diagonal(off, 0.0)
    D = np.zeros((3, 3))
    D[0, 0] = rng.uniform(0.05, 0.2)
    D[1, 2] = rng.uniform(0.05, 0.2)
    D[2, 1] = rng.uniform(0.05, 0.2)
    C = off - np.diag(off.sum(axis=1) + D.sum(axis=1))
    F = {
        (0, 0): mixture.JumpMixture.exponential(rng.uniform(2.0, 4.0)),
        (1, 2): mixture.JumpMixture.erlang(2, rng.uniform(3.0, 6.0)),
        (2, 1): mixture.JumpMixture([mixture.Component(0.5, mixture.ATOM, location=rng.uniform(0.1, 0.5)),
                                     mixture.Component(0.5, mixture.EXPONENTIAL, rate=rng.uniform(3.0, 6.0))]),
    }
    v = [-rng.uniform(1.5, 2.5), -rng.uniform(1.0, 2.0), rng.uniform(0.3, 0.8)]
    return mdl.MapModel(v, C, D, F, name='random{0}'.format(seed))

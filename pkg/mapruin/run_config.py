"""
This module implements the run configuration: packaged defaults, an optional
user HOCON file merged over them and command line overrides merged over both

:copyright: (c) 2018 by Happy Gears, Inc
:license: Apache2, see LICENSE for more details.

"""

import logging
import math
import os
import typing

from pyhocon import ConfigFactory, ConfigTree

from . import errors
from . import renewal

FORMAT_TABLE = 'table'
FORMAT_CSV = 'csv'
FORMAT_RECORD = 'record'

FORMATS = [FORMAT_TABLE, FORMAT_CSV, FORMAT_RECORD]

DEFAULTS_FILE = os.path.join(os.path.dirname(os.path.realpath(__file__)), 'defaults.conf')

# RunConfig field -> key in the HOCON tree
CONFIG_KEYS = {
    'xmax': 'grid.xmax',
    'h': 'grid.h',
    'tol': 'tol',
    'format': 'format',
    'report': 'report',
    'seed': 'simulation.seed',
    'reps': 'simulation.reps',
    'workers': 'simulation.workers',
    'horizon': 'simulation.horizon',
    'level': 'simulation.level',
    'state': 'simulation.state',
    'confidence': 'simulation.confidence',
}

log = logging.getLogger(__name__)


class RunConfig(typing.NamedTuple):
    command: str = ''
    model: str = ''
    xmax: float = 10.0
    h: float = 0.01
    tol: float = 1e-12
    format: str = FORMAT_TABLE
    report: bool = False
    seed: int = 0
    reps: int = 100000
    workers: int = 1
    horizon: float = 200.0
    level: float = 0.0
    state: int = 0
    confidence: float = 0.99
    out: typing.Optional[str] = None

    @property
    def steps(self):
        return renewal.check_grid(self.xmax, self.h)


def check(config):
    """raises BadRunConfig (or BadGrid) when the configuration is unusable"""
    problems = []
    if not (config.tol > 0 and math.isfinite(config.tol)):
        problems.append('tol must be positive, got {0!r}'.format(config.tol))
    if config.format not in FORMATS:
        problems.append('format must be one of {0}, got "{1}"'.format(FORMATS, config.format))
    if config.reps < 1:
        problems.append('reps must be >= 1, got {0}'.format(config.reps))
    if config.workers < 1:
        problems.append('workers must be >= 1, got {0}'.format(config.workers))
    if not config.horizon > 0:
        problems.append('horizon must be positive, got {0!r}'.format(config.horizon))
    if not 0 < config.confidence < 1:
        problems.append('confidence must be in (0, 1), got {0!r}'.format(config.confidence))
    if config.seed < 0 or config.seed >= 2 ** 64:
        problems.append('seed must be an unsigned 64 bit integer, got {0}'.format(config.seed))
    if problems:
        raise errors.BadRunConfig(problems[0], diagnostics=problems)
    renewal.check_grid(config.xmax, config.h)
    return config


def _load_tree(path=None):
    try:
        tree = ConfigFactory.parse_file(DEFAULTS_FILE)
        if path:
            tree = ConfigFactory.parse_file(path).with_fallback(tree)
    except errors.MapRuinError:
        raise
    except Exception as e:
        raise errors.BadRunConfig('can not read configuration {0}: {1}'.format(path, e)) from e
    return tree


def typed_value(field, value):
    kind = RunConfig.__annotations__[field]
    try:
        if kind is bool:
            return value if isinstance(value, bool) else str(value).lower() in ('true', 'yes', '1')
        if kind in (int, float, str):
            return kind(value)
    except (TypeError, ValueError) as e:
        raise errors.BadRunConfig('{0}: {1}'.format(CONFIG_KEYS.get(field, field), e)) from e
    return value


def make_config(command='', model='', config_file=None, **overrides):
    """
    builds RunConfig from defaults.conf, the optional user file and the
    overrides whose value is not None
    """
    tree = _load_tree(config_file)
    values = {'command': command, 'model': model}
    for field, key in CONFIG_KEYS.items():
        value = tree.get(key, None)
        if isinstance(value, ConfigTree):
            raise errors.BadRunConfig('{0} must be a value, not an object'.format(key))
        if value is not None:
            values[field] = typed_value(field, value)
    for field, value in overrides.items():
        if field not in RunConfig._fields:
            raise errors.BadRunConfig('unknown setting "{0}"'.format(field))
        if value is not None:
            values[field] = typed_value(field, value) if field != 'out' else value
    config = check(RunConfig(**values))
    log.debug('run configuration %s', config)
    return config

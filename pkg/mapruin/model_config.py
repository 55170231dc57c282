"""
This module implements parsing of model files. Model files are HOCON
documents (JSON is accepted as well) with the following keys:

    name = "cl"                 # optional
    states = 1
    v = [-1.0]
    C = [[-0.5]]
    D = [[0.5]]                 # optional, all zero when omitted
    jumps = [
      {from = 0, to = 0, mixture = [{weight = 1.0, kind = exponential, params = {rate = 1.0}}]}
    ]

Mixture component kinds are `atom` (params: location), `exponential`
(params: rate) and `erlang` (params: shape, rate). Unknown keys are rejected.

:copyright: (c) 2018 by Happy Gears, Inc
:license: Apache2, see LICENSE for more details.

"""

import logging
import os

from pyhocon import ConfigFactory, ConfigTree

from . import errors
from . import mixture
from . import model

MODEL_KEYS = ['name', 'states', 'v', 'C', 'D', 'jumps']
JUMP_KEYS = ['from', 'to', 'mixture']
COMPONENT_KEYS = ['weight', 'kind', 'params']
PARAM_KEYS = {
    mixture.ATOM: ['location'],
    mixture.EXPONENTIAL: ['rate'],
    mixture.ERLANG: ['shape', 'rate'],
}

MODELS_DIR = os.path.join(os.path.dirname(os.path.realpath(__file__)), 'models')

log = logging.getLogger(__name__)


def bundled_models():
    return sorted(os.path.splitext(f)[0] for f in os.listdir(MODELS_DIR) if f.endswith('.conf'))


def resolve_model_path(name_or_path):
    """returns a path to an existing file or to a bundled model with this name"""
    if os.path.isfile(name_or_path):
        return name_or_path
    bundled = os.path.join(MODELS_DIR, name_or_path + '.conf')
    if os.path.isfile(bundled):
        return bundled
    raise errors.BadModelFile('model "{0}" is neither a file nor one of the bundled models {1}'.format(
        name_or_path, bundled_models()))


def _plain(value):
    if isinstance(value, ConfigTree):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_plain(v) for v in value]
    return value


def _reject_unknown(record, allowed, path):
    if not isinstance(record, dict):
        raise errors.BadModelFile('{0}: expected an object, got {1!r}'.format(path or '<root>', record))
    unknown = [k for k in record if k not in allowed]
    if unknown:
        raise errors.BadModelFile('unknown key "{0}"'.format('.'.join(filter(None, [path, unknown[0]]))),
                                  diagnostics=['unknown key "{0}"'.format('.'.join(filter(None, [path, k])))
                                               for k in unknown])


def check_schema(raw):
    _reject_unknown(raw, MODEL_KEYS, '')
    for key in ['states', 'v', 'C']:
        if key not in raw:
            raise errors.BadModelFile('missing key "{0}"'.format(key))
    for idx, jump in enumerate(raw.get('jumps') or []):
        jump_path = 'jumps[{0}]'.format(idx)
        _reject_unknown(jump, JUMP_KEYS, jump_path)
        for key in JUMP_KEYS:
            if key not in jump:
                raise errors.BadModelFile('{0}: missing key "{1}"'.format(jump_path, key))
        for cidx, comp in enumerate(jump['mixture']):
            comp_path = '{0}.mixture[{1}]'.format(jump_path, cidx)
            _reject_unknown(comp, COMPONENT_KEYS, comp_path)
            kind = comp.get('kind')
            if kind not in PARAM_KEYS:
                raise errors.BadMixture('{0}: unknown kind "{1}"'.format(comp_path, kind))
            _reject_unknown(comp.get('params', {}), PARAM_KEYS[kind], comp_path + '.params')


def parse_string(text, name=''):
    try:
        config = ConfigFactory.parse_string(text)
    except Exception as e:
        raise errors.BadModelFile('can not parse model: {0}'.format(e)) from e
    raw = _plain(config)
    check_schema(raw)
    if name and not raw.get('name'):
        raw['name'] = name
    return raw


def load_model(name_or_path):
    """parse and validate a model file or a bundled model"""
    path = resolve_model_path(name_or_path)
    log.debug('loading model from %s', path)
    try:
        with open(path, 'r') as fh:
            text = fh.read()
    except OSError as e:
        raise errors.BadModelFile('can not read model file {0}: {1}'.format(path, e)) from e
    raw = parse_string(text, name=os.path.splitext(os.path.basename(path))[0])
    return model.validate(raw)

"""
This module implements the base of the mapruin command contexts

:copyright: (c) 2018 by Happy Gears, Inc
:license: Apache2, see LICENSE for more details.

"""

import cmd
import logging

from . import errors
from . import model_config
from . import response_formatter
from . import run_config

SKIP_NAMES_FOR_COMPLETION = ['EOF', 'q']

log = logging.getLogger(__name__)


class SubCommand(cmd.Cmd, object):
    """
    Commands take optional `key=value` arguments overriding fields of the
    run configuration for that command only, e.g. `hitting xmax=20 h=0.005`
    """

    def __init__(self, config=None, models=None):
        super(SubCommand, self).__init__()
        self.config = config if config is not None else run_config.make_config()
        self.models = models if models is not None else {}
        self.exit_code = errors.EXIT_OK
        self.prompt = 'sub # '

    def emptyline(self):
        pass

    def do_quit(self, args):
        return True

    do_EOF = do_quit
    do_q = do_quit

    def complete(self, text, state):
        """Return the next possible completion for 'text' followed by a space"""
        return super(SubCommand, self).complete(text, state) + ' '

    def complete_cmd(self, text, variants):
        if not text:
            completions = variants[:]
        else:
            completions = [f for f in variants if f.startswith(text)]
        return completions

    def get_args(self, text=''):
        return [x for x in self.completenames(text) if x not in SKIP_NAMES_FOR_COMPLETION]

    def completedefault(self, text, _line, _begidx, _endidx):
        return self.complete_cmd(text, ['{0}='.format(f) for f in run_config.CONFIG_KEYS] + ['model='])

    def parse_overrides(self, arg):
        """returns run configuration with `key=value` tokens of the argument applied"""
        overrides = {}
        for token in arg.split():
            key, sep, value = token.partition('=')
            if not sep or key not in run_config.RunConfig._fields or key == 'command':
                raise errors.BadRunConfig('expected key=value with key one of {0}, got "{1}"'.format(
                    list(run_config.CONFIG_KEYS) + ['model', 'out'], token))
            overrides[key] = value if key in ('model', 'out') else run_config.typed_value(key, value)
        if not overrides:
            return self.config
        return run_config.check(self.config._replace(**overrides))

    def get_model(self, config):
        if not config.model:
            raise errors.BadRunConfig('no model given, use --model NAME|PATH or model=NAME')
        if config.model not in self.models:
            self.models[config.model] = model_config.load_model(config.model)
        return self.models[config.model]

    def execute(self, action, arg):
        """
        runs `action(config)` and prints the response it returns. Errors of
        the mapruin family are reported on stderr and kept in `exit_code`
        """
        try:
            config = self.parse_overrides(arg)
            resp = action(config)
            response_formatter.ResponseFormatter(config.format, config.out).print_response(resp)
        except errors.MapRuinError as e:
            log.debug('command failed', exc_info=True)
            self.exit_code = errors.ErrorHandler.handle_error(e)
            return
        self.exit_code = errors.EXIT_OK

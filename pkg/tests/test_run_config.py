import unittest

import testutils
from mapruin import errors
from mapruin import run_config


class RunConfigTestCase(unittest.TestCase):

    def test_defaults(self):
        config = run_config.make_config()
        self.assertEqual(config.xmax, 10.0)
        self.assertEqual(config.h, 0.01)
        self.assertEqual(config.format, run_config.FORMAT_TABLE)
        self.assertEqual(config.steps, 1000)
        self.assertFalse(config.report)

    def test_file_merged_over_defaults(self):
        config = run_config.make_config(config_file=testutils.fixture_path('coarse_grid.conf'))
        self.assertEqual(config.xmax, 4.0)
        self.assertEqual(config.reps, 2000)
        self.assertEqual(config.seed, 0)

    def test_overrides_win(self):
        config = run_config.make_config(config_file=testutils.fixture_path('coarse_grid.conf'), reps=10, h=None)
        self.assertEqual(config.reps, 10)
        self.assertEqual(config.h, 0.05)

    def test_invalid_values(self):
        with self.assertRaises(errors.BadRunConfig) as ctx:
            run_config.make_config(reps=0, tol=-1.0)
        self.assertEqual(len(ctx.exception.diagnostics), 2)
        with self.assertRaises(errors.BadRunConfig):
            run_config.make_config(format='xml')
        with self.assertRaises(errors.BadGrid):
            run_config.make_config(xmax=1.0, h=0.3)

    def test_missing_file(self):
        with self.assertRaises(errors.BadRunConfig):
            run_config.make_config(config_file=testutils.fixture_path('no_such.conf'))

    def test_unknown_setting(self):
        with self.assertRaises(errors.BadRunConfig):
            run_config.make_config(colour='red')

    def test_immutable(self):
        config = run_config.make_config()
        with self.assertRaises(AttributeError):
            config.xmax = 2.0

import unittest

import numpy as np
from numpy.testing import assert_allclose

import testutils
from mapruin import errors
from mapruin import mixture
from mapruin import model as mdl
from mapruin import model_config


class ModelTestCase(unittest.TestCase):

    def test_onoff_stationary(self):
        model = testutils.onoff()
        assert_allclose(mdl.stationary_dist(model), [2.0 / 3.0, 1.0 / 3.0], atol=1e-14)
        self.assertAlmostEqual(mdl.mean_drift(model), -1.0 / 3.0, places=14)
        self.assertEqual(model.partition, mdl.Partition(minus=(0,), plus=(1,)))
        self.assertFalse(model.has_jumps)

    def test_cl_drift(self):
        model = testutils.cl()
        assert_allclose(mdl.stationary_dist(model), [1.0])
        self.assertAlmostEqual(mdl.mean_drift(model), -0.5, places=14)
        self.assertEqual(model.theta_max, 1.0)

    def test_mixed3_stationary(self):
        model = testutils.bundled('mixed3')
        pi = mdl.stationary_dist(model)
        assert_allclose(pi @ model.generator, np.zeros(3), atol=1e-13)
        assert_allclose(pi, [0.5101, 0.2778, 0.2121], atol=1e-3)
        self.assertLess(mdl.mean_drift(model), 0)

    def test_non_conservative_row(self):
        with self.assertRaises(errors.NonConservativeRows) as ctx:
            mdl.MapModel([-1.0, 1.0], [[-1.0, 1.0], [2.0, -1.5]])
        self.assertIn('row 1', ctx.exception.message)

    def test_collects_every_problem(self):
        with self.assertRaises(errors.ValidationError) as ctx:
            mdl.MapModel([0.0, 1.0], [[-1.0, 1.0], [2.0, -1.5]])
        self.assertEqual(len(ctx.exception.diagnostics), 2)
        self.assertIsInstance(ctx.exception, errors.ZeroRate)

    def test_reducible(self):
        with self.assertRaises(errors.Reducible):
            mdl.MapModel([-1.0, 1.0], [[-1.0, 1.0], [0.0, 0.0]])

    def test_communicating_classes(self):
        C = [[-1.0, 1.0, 0.0], [1.0, -1.0, 0.0], [0.0, 0.5, -0.5]]
        with self.assertRaises(errors.Reducible) as ctx:
            mdl.MapModel([-1.0, -1.0, 1.0], C)
        self.assertIn('2 communicating classes', ctx.exception.message)
        # a jump transition from 1 to 2 closes the cycle
        C = [[-1.0, 1.0, 0.0], [1.0, -1.5, 0.0], [0.0, 0.5, -0.5]]
        D = [[0.0, 0.0, 0.0], [0.0, 0.0, 0.5], [0.0, 0.0, 0.0]]
        model = mdl.MapModel([-1.0, -1.0, 1.0], C, D, {(1, 2): mixture.JumpMixture.exponential(1.0)})
        self.assertEqual(model.n, 3)

    def test_missing_mixture(self):
        with self.assertRaises(errors.BadMixture):
            mdl.MapModel([-1.0], [[-0.5]], [[0.5]])

    def test_extra_mixture(self):
        with self.assertRaises(errors.BadMixture):
            mdl.MapModel([-1.0, 1.0], [[-1.0, 1.0], [2.0, -2.0]],
                         F={(0, 1): mixture.JumpMixture.exponential(1.0)})

    def test_dual_model(self):
        model = testutils.bundled('mixed3')
        dual = mdl.dual_model(model)
        pi = mdl.stationary_dist(model)
        assert_allclose(mdl.stationary_dist(dual), pi, atol=1e-12)
        assert_allclose(dual.D[0, 2], pi[2] * model.D[2, 0] / pi[0])
        self.assertEqual(dual.F[(0, 2)], model.F[(2, 0)])
        self.assertAlmostEqual(mdl.mean_drift(dual), mdl.mean_drift(model), places=12)

    def test_dual_of_dual(self):
        models = [testutils.random_model(seed) for seed in range(10)] + [testutils.bundled('mixed3'), testutils.onoff()]
        for model in models:
            twice = mdl.dual_model(mdl.dual_model(model))
            with self.subTest(model=model.name):
                assert_allclose(twice.v, model.v, rtol=0, atol=0)
                assert_allclose(twice.C, model.C, rtol=1e-12, atol=1e-13)
                assert_allclose(twice.D, model.D, rtol=1e-12, atol=1e-13)
                self.assertEqual(sorted(twice.F), sorted(model.F))
                for key, mixture_law in model.F.items():
                    self.assertEqual(twice.F[key], mixture_law)

    def test_frozen(self):
        model = testutils.onoff()
        with self.assertRaises(ValueError):
            model.C[0, 0] = 0.0


class ModelConfigTestCase(unittest.TestCase):

    def test_bundled_models(self):
        self.assertEqual(model_config.bundled_models(), ['cl', 'mixed3', 'onoff'])
        model = model_config.load_model('cl')
        self.assertEqual(model.name, 'cl')
        self.assertEqual(model.F[(0, 0)], mixture.JumpMixture.exponential(1.0))

    def test_json_model(self):
        model = model_config.load_model(testutils.fixture_path('atom_only.json'))
        self.assertEqual(model.F[(0, 0)], mixture.JumpMixture.atom(1.0))

    def test_unknown_key(self):
        with self.assertRaises(errors.BadModelFile) as ctx:
            model_config.load_model(testutils.fixture_path('unknown_key.conf'))
        self.assertIn('jumps[0].mixture[0].params.scale', ctx.exception.message)

    def test_unknown_model(self):
        with self.assertRaises(errors.BadModelFile):
            model_config.load_model('no_such_model')

    def test_parse_error(self):
        with self.assertRaises(errors.BadModelFile):
            model_config.parse_string('v = [-1.0')

    def test_states_mismatch(self):
        raw = model_config.parse_string('states = 2\nv = [-1.0]\nC = [[0.0]]')
        with self.assertRaises(errors.BadModelFile):
            mdl.validate(raw)

    def test_round_trip_through_dict(self):
        model = testutils.bundled('mixed3')
        again = mdl.validate(model.to_dict())
        assert_allclose(again.generator, model.generator)
        self.assertEqual(again.F, model.F)

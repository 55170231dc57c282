import math
import unittest

import numpy as np
from numpy.testing import assert_allclose

import testutils
from mapruin import errors
from mapruin import ladder as ldr
from mapruin import mixture
from mapruin import model as mdl
from mapruin import model_config

RANDOM_SEEDS = range(10)


class LadderTestCase(unittest.TestCase):

    def test_onoff(self):
        solution = ldr.solve_ladder(testutils.onoff())
        assert_allclose(solution.K, [[0.0]], atol=1e-10)
        assert_allclose(solution.L, [[0.5]], atol=1e-10)
        assert_allclose(solution.kminus, [1.5], atol=1e-8)
        assert_allclose(solution.Rdual, [[1.0]], atol=1e-10)

    def test_cl(self):
        model = testutils.cl()
        solution = ldr.solve_ladder(model)
        assert_allclose(solution.K, [[0.0]], atol=1e-10)
        self.assertEqual(solution.L.shape, (1, 0))
        # ladder heights of exponential claims are Exp(1), total mass rho = 0.5
        self.assertAlmostEqual(ldr.ladder_height(model, solution, 0, 0, 1.0), 0.5 * (1.0 - math.exp(-1.0)),
                               places=9)
        assert_allclose(ldr.ladder_mass(model, solution), [[0.5]], atol=1e-9)

    def test_random_models_identities(self):
        for seed in RANDOM_SEEDS:
            model = testutils.random_model(seed)
            with self.subTest(model=model.name):
                solution = ldr.solve_ladder(model)
                pi = mdl.stationary_dist(model)
                minus, plus = model.partition
                self.assertLessEqual(solution.residual, 1e-11)
                assert_allclose(pi[list(minus)] @ solution.K, np.zeros(len(minus)), atol=1e-10)
                assert_allclose(pi[list(minus)] @ solution.L, pi[list(plus)], atol=1e-10)
                assert_allclose(solution.Qdual.sum(axis=1), np.zeros(len(minus)), atol=1e-10)
                self.assertTrue(np.all(solution.Rdual >= 0))
                self.assertTrue(np.all(solution.Rdual.sum(axis=1) <= 1 + 1e-10))
                dual = ldr.solve_ladder(mdl.dual_model(model))
                Q, R, residual = ldr.solve_descending(model)
                self.assertLessEqual(residual, 1e-10)
                assert_allclose(Q, dual.Qdual, atol=1e-9)
                assert_allclose(R, dual.Rdual, atol=1e-9)
                mass = ldr.ladder_mass(model, solution)
                self.assertTrue(np.all(mass.sum(axis=1) < 1.0))

    def test_ladder_residual_of_perturbation(self):
        model = testutils.bundled('mixed3')
        solution = ldr.solve_ladder(model)
        self.assertLess(ldr.ladder_residual(model, solution.K, solution.L), 1e-11)
        self.assertGreater(ldr.ladder_residual(model, solution.K * 1.01, solution.L), 1e-6)

    def test_ladder_height_monotone(self):
        model = testutils.bundled('mixed3')
        solution = ldr.solve_ladder(model)
        values = [ldr.ladder_height_matrix(model, solution, x) for x in [0.0, 0.5, 1.0, 5.0, np.inf]]
        for lower, upper in zip(values, values[1:]):
            self.assertTrue(np.all(upper >= lower - 1e-14))

    def test_ladder_height_needs_minus_state(self):
        model = testutils.onoff()
        solution = ldr.solve_ladder(model)
        with self.assertRaises(errors.NotMinusState):
            ldr.ladder_height(model, solution, 1, 0, 1.0)

    def test_no_minus_states(self):
        model = mdl.MapModel([1.0, 2.0], [[-1.0, 1.0], [1.0, -1.0]])
        with self.assertRaises(errors.EmptyMinus):
            ldr.solve_ladder(model)

    def test_positive_drift(self):
        model = mdl.MapModel([-1.0, 1.0], [[-2.0, 2.0], [1.0, -1.0]])
        solution = ldr.solve_ladder(model)
        self.assertIsNone(solution.kminus)
        self.assertLess(float(np.max(np.linalg.eigvals(solution.K).real)), 0)
        self.assertLess(float(solution.Qdual.sum(axis=1).min()), -1e-8)
        with self.assertRaises(errors.DriftPositive):
            ldr.k_eigenvector(solution.K, mdl.stationary_dist(model)[[0]])

    def test_positive_drift_dual_rates_defective(self):
        # premium 1, claims at rate 2 with mean 1: K = -2 + 2/(1 - K) has roots 0 and -1, the minimal one is -1
        model = model_config.load_model(testutils.fixture_path('drift_positive.conf'))
        solution = ldr.solve_ladder(model)
        assert_allclose(solution.Qdual, [[-1.0]], atol=1e-9)
        assert_allclose(ldr.ladder_mass(model, solution), [[1.0]], atol=1e-9)

        jumpy = mdl.MapModel([-1.0, 2.0], [[-1.0, 1.0], [1.0, -1.5]], [[0.0, 0.0], [0.0, 0.5]],
                             {(1, 1): mixture.JumpMixture.exponential(2.0)})
        self.assertGreater(mdl.mean_drift(jumpy), 0)
        solution = ldr.solve_ladder(jumpy)
        self.assertLess(float(solution.Qdual.sum(axis=1).min()), -1e-8)
        dual = ldr.solve_ladder(mdl.dual_model(jumpy))
        Q, R, _ = ldr.solve_descending(jumpy)
        assert_allclose(Q, dual.Qdual, atol=1e-9)
        assert_allclose(R, dual.Rdual, atol=1e-9)

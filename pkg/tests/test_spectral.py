import unittest
from unittest import mock

import numpy as np
from numpy.testing import assert_allclose

import testutils
from mapruin import errors
from mapruin import ladder as ldr
from mapruin import model as mdl
from mapruin import model_config
from mapruin import spectral


class SpectralTestCase(unittest.TestCase):

    def test_cl_decay_rate(self):
        self.assertAlmostEqual(spectral.decay_rate(testutils.cl()), 0.5, delta=1e-10)

    def test_onoff_decay_rate(self):
        # det(A(theta)) = theta (1 - theta)
        self.assertAlmostEqual(spectral.decay_rate(testutils.onoff()), 1.0, delta=1e-10)

    def test_atom_only_root(self):
        model = model_config.load_model(testutils.fixture_path('atom_only.json'))
        alpha = spectral.decay_rate(model)
        self.assertGreater(alpha, 0)
        # kappa(theta) = -theta + 0.5 (exp(theta) - 1)
        self.assertAlmostEqual(-alpha + 0.5 * (np.exp(alpha) - 1.0), 0.0, delta=1e-12)

    def test_drift_non_negative(self):
        model = model_config.load_model(testutils.fixture_path('drift_positive.conf'))
        with self.assertRaises(errors.DriftNonNegative):
            spectral.decay_rate(model)

    def test_inexact_root_rejected(self):
        brentq = spectral.optimize.brentq

        def off_by_a_little(*args, **kwargs):
            return brentq(*args, **kwargs) + 1e-6

        with mock.patch.object(spectral.optimize, 'brentq', side_effect=off_by_a_little):
            with self.assertRaises(errors.NoRoot):
                spectral.decay_rate(testutils.cl())

    def test_kappa_at_zero(self):
        model = testutils.bundled('mixed3')
        self.assertAlmostEqual(spectral.kappa(model, 0.0), 0.0, delta=1e-12)
        point = spectral.perron(model, 0.0)
        assert_allclose(point.mu, mdl.stationary_dist(model), atol=1e-12)
        assert_allclose(point.h, np.ones(3), atol=1e-12)
        self.assertAlmostEqual(spectral.kappa_prime(model, point), mdl.mean_drift(model), delta=1e-12)

    def test_kappa_prime_numeric(self):
        model = testutils.bundled('mixed3')
        theta, step = 0.4, 1e-6
        numeric = (spectral.kappa(model, theta + step) - spectral.kappa(model, theta - step)) / (2 * step)
        self.assertAlmostEqual(spectral.kappa_prime(model, spectral.perron(model, theta)), numeric, delta=1e-6)

    def test_convexity(self):
        for seed in range(5):
            model = testutils.random_model(seed)
            thetas = np.linspace(0.0, 0.95 * model.theta_max, 25)
            values = np.array([spectral.kappa(model, t) for t in thetas])
            for a, b, c in zip(values, values[1:], values[2:]):
                self.assertLessEqual(b, 0.5 * (a + c) + 1e-10)

    def test_perron_normalization(self):
        model = testutils.bundled('mixed3')
        solution = ldr.solve_ladder(model)
        alpha = spectral.decay_rate(model, solution.kminus)
        point = spectral.perron(model, alpha, solution.kminus)
        self.assertEqual(point.normalization, spectral.NORMALIZED_BY_KMINUS)
        self.assertAlmostEqual(float(point.mu[list(model.partition.minus)] @ solution.kminus), 1.0, places=12)
        self.assertAlmostEqual(float(point.mu @ point.h), 1.0, places=12)
        assert_allclose(point.mu @ spectral.A_of_theta(model, alpha), np.zeros(3), atol=1e-10)
        self.assertGreater(spectral.kappa_prime(model, point), 0)

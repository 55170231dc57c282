import math
import unittest

import numpy as np
from numpy.testing import assert_allclose

import testutils
from mapruin import errors
from mapruin import kernel
from mapruin import model as mdl
from mapruin import renewal


class HittingTestCase(unittest.TestCase):

    def test_cl_closed_form(self):
        ctx = kernel.make_context(testutils.cl())
        table = renewal.solve_hitting(ctx, 10.0, 0.01)
        expected = 0.5 * np.exp(-0.5 * table.grid)
        self.assertLessEqual(float(np.max(np.abs(table.psi[:, 0, 0] - expected))), 1e-3)
        self.assertAlmostEqual(float(table.at(2.0)[0, 0]), 0.5 * math.exp(-1.0), delta=1e-3)
        self.assertEqual(table.metadata['steps'], 1000)

    def test_onoff_stationary_hit_ratio(self):
        model = testutils.onoff()
        ctx = kernel.make_context(model)
        table = renewal.solve_hitting(ctx, 1.0, 0.01)
        a_plus, a_minus = renewal.duality_ratio(model)
        self.assertAlmostEqual(a_plus, 1.0 / 3.0, places=12)
        self.assertAlmostEqual(a_minus, 2.0 / 3.0, places=12)
        self.assertAlmostEqual(renewal.stationary_hit_ratio(model, table.psi[0]), 0.5, delta=1e-8)

    def test_rows_are_substochastic(self):
        ctx = kernel.make_context(testutils.bundled('mixed3'))
        table = renewal.solve_hitting(ctx, 4.0, 0.02)
        sums = table.row_sums()
        self.assertTrue(np.all(sums <= 1.0 + 1e-6))
        self.assertTrue(np.all(np.diff(sums, axis=0) <= 1e-6))
        self.assertTrue(np.all(table.psi >= -1e-12))

    def test_bad_grid(self):
        ctx = kernel.make_context(testutils.cl())
        with self.assertRaises(errors.BadGrid):
            renewal.solve_hitting(ctx, 1.0, 0.3)
        with self.assertRaises(errors.BadGrid):
            renewal.solve_hitting(ctx, 1.0, 0.0)

    def test_lookup_outside_grid(self):
        table = renewal.solve_hitting(kernel.make_context(testutils.cl()), 1.0, 0.1)
        assert_allclose(table.at(1.0), table.psi[-1])
        assert_allclose(table.at(0.0), table.psi[0])
        for x in [-0.5, 1.5, 20.0]:
            with self.assertRaises(errors.BadGrid):
                table.at(x)

    def test_richardson(self):
        ctx = kernel.make_context(testutils.bundled('mixed3'))
        result = renewal.richardson(ctx, 2.0, 0.05)
        self.assertLess(result.sup_difference, 5e-3)
        self.assertEqual(len(result.fine.grid), 2 * len(result.coarse.grid) - 1)


class AsymptoticsTestCase(unittest.TestCase):

    def test_cl(self):
        ctx = kernel.make_context(testutils.cl())
        asym = renewal.asymptotics(ctx)
        self.assertAlmostEqual(asym.alpha, 0.5, delta=1e-10)
        self.assertAlmostEqual(asym.eta_alpha, 1.0, delta=1e-9)
        assert_allclose(asym.prefactor_total, [0.5], atol=1e-8)
        assert_allclose(asym.prefactor_full, [[0.5]], atol=1e-8)
        assert_allclose(asym.nu, [0.5], atol=1e-9)

    def test_onoff(self):
        ctx = kernel.make_context(testutils.onoff())
        asym = renewal.asymptotics(ctx)
        self.assertAlmostEqual(asym.alpha, 1.0, delta=1e-10)
        assert_allclose(asym.mu, [2.0 / 3.0, 2.0 / 3.0], atol=1e-9)
        assert_allclose(asym.h, [0.5, 1.0], atol=1e-9)
        self.assertAlmostEqual(asym.eta_alpha, 1.0 / 3.0, delta=1e-9)
        assert_allclose(asym.prefactor_total, [0.5, 1.0], atol=1e-8)
        assert_allclose(asym.prefactor_full.sum(axis=1), asym.prefactor_total, atol=1e-9)

    def test_identities_on_random_models(self):
        for seed in range(10):
            model = testutils.random_model(seed)
            ctx = kernel.make_context(model)
            asym = renewal.asymptotics(ctx)
            with self.subTest(model=model.name):
                assert_allclose(asym.prefactor_full.sum(axis=1), asym.prefactor_total, atol=1e-9)
                assert_allclose(asym.nu @ kernel.H_hat(ctx, asym.alpha), asym.nu, atol=1e-9)
                identity = float(asym.nu[ctx.minus] @ (ctx.kminus / ctx.speed_minus))
                self.assertAlmostEqual(identity, asym.alpha, delta=1e-9)
                self.assertTrue(np.all(asym.prefactor_total > 0))

    def test_asymptote_match(self):
        ctx = kernel.make_context(testutils.bundled('mixed3'))
        asym = renewal.asymptotics(ctx)
        h = 0.02
        xmax = h * math.ceil(10.0 / asym.alpha / h)
        report = renewal.asymptote_match(renewal.solve_hitting(ctx, xmax, h), asym)
        self.assertLessEqual(report.relative_deviation, 0.05)
        self.assertEqual(len(report.levels), len(report.deviations))

    def test_horizon_too_short(self):
        ctx = kernel.make_context(testutils.cl())
        asym = renewal.asymptotics(ctx)
        with self.assertRaises(errors.HorizonTooShort):
            renewal.asymptote_match(renewal.solve_hitting(ctx, 2.0, 0.1), asym)

    def test_drift_non_negative(self):
        model = mdl.MapModel([-1.0, 1.0], [[-2.0, 2.0], [1.0, -1.0]])
        with self.assertRaises(errors.DriftNonNegative):
            renewal.asymptotics(kernel.make_context(model))


class FluidTailTestCase(unittest.TestCase):

    def test_onoff(self):
        tail = renewal.fluid_tail(testutils.onoff())
        self.assertAlmostEqual(tail.alpha, 1.0, delta=1e-10)
        assert_allclose(tail.coefficients, [1.0 / 3.0, 1.0 / 3.0], atol=1e-8)
        assert_allclose(tail.beta, [1.0], atol=1e-12)

    def test_matches_dual_hitting_prefactor(self):
        model = testutils.bundled('mixed3')
        tail = renewal.fluid_tail(model)
        dual = renewal.asymptotics(kernel.make_context(mdl.dual_model(model)))
        assert_allclose(tail.coefficients, mdl.stationary_dist(model) * dual.prefactor_total, rtol=1e-6)

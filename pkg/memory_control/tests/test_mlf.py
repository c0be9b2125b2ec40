import math

import numpy as np
from django.test import SimpleTestCase

from ..exceptions import InvalidParameterError, MittagLefflerError
from ..services.mlf import (
    MlfParams,
    fit_bound_constant,
    fit_scaled_decay_constants,
    fit_scaled_kernel_constant,
    mittag_leffler,
    mlf_bound_check,
    mlf_derivative_identities,
    mlf_eval,
    mlf_laplace_check,
    mlf_recurrence_residual,
)
from .oracles import mittag_leffler_reference


class MittagLefflerEvaluationTests(SimpleTestCase):
    def test_closed_forms(self):
        z = np.linspace(-5.0, 2.0, 57)
        np.testing.assert_allclose(mittag_leffler(1.0, 1.0, z), np.exp(z), rtol=1e-14)

        x = np.linspace(0.0, 5.0, 51)
        np.testing.assert_allclose(mittag_leffler(2.0, 1.0, -(x**2)), np.cos(x), atol=1e-14)
        expected = np.sinc(x / math.pi)
        np.testing.assert_allclose(mittag_leffler(2.0, 2.0, -(x**2)), expected, atol=1e-14)

    def test_value_at_zero_is_reciprocal_gamma(self):
        for alpha, beta in [(0.5, 1.0), (1.5, 0.75), (1.8, 2.5)]:
            value = mlf_eval(MlfParams(alpha, beta), 0.0)
            self.assertAlmostEqual(value, 1.0 / math.gamma(beta), delta=1e-15)

    def test_matches_extended_precision_series(self):
        cases = [
            (0.5, 1.0, [-0.5, -3.0, -10.0]),
            (0.8, 0.9, [-1.0, -6.0, -20.0]),
            (1.3, 1.0, [-0.5, -12.0, -25.0]),
            (1.5, 1.5, [-2.0, -12.0, -25.0]),
            (1.5, 0.75, [-1.0, -9.0, -30.0]),
            (1.5, 2.5, [-4.0, -20.0]),
            (1.9, 1.2, [-3.0, -25.0]),
        ]
        for alpha, beta, points in cases:
            for z in points:
                with self.subTest(alpha=alpha, beta=beta, z=z):
                    value = mlf_eval(MlfParams(alpha, beta), z)
                    reference = mittag_leffler_reference(alpha, beta, z)
                    self.assertAlmostEqual(value, reference, delta=5e-10)

    def test_large_negative_arguments(self):
        for alpha, beta, z in [(1.5, 1.0, -200.0), (1.5, 1.0, -2000.0), (0.7, 1.0, -60.0)]:
            with self.subTest(alpha=alpha, z=z):
                value = mlf_eval(MlfParams(alpha, beta), z)
                self.assertAlmostEqual(
                    value, mittag_leffler_reference(alpha, beta, z), delta=5e-10
                )

    def test_random_sample_on_negative_axis(self):
        rng = np.random.default_rng(20240611)
        alphas = [1.0, 1.2, 1.5, 1.8, 2.0]
        betas = [0.5, 1.0, 1.5, 2.0]
        for _ in range(200):
            alpha = float(rng.choice(alphas))
            beta = float(rng.choice(betas))
            z = -float(rng.uniform(0.0, 1e4))
            with self.subTest(alpha=alpha, beta=beta, z=z):
                value = mlf_eval(MlfParams(alpha, beta), z)
                reference = mittag_leffler_reference(alpha, beta, z)
                self.assertAlmostEqual(value, reference, delta=1e-10)

    def test_reference_integral_forms_match_closed_forms(self):
        self.assertAlmostEqual(
            mittag_leffler_reference(2.0, 1.0, -90000.0), math.cos(300.0), delta=1e-14
        )
        self.assertAlmostEqual(
            mittag_leffler_reference(2.0, 2.0, -90000.0), math.sin(300.0) / 300.0, delta=1e-14
        )
        self.assertAlmostEqual(mittag_leffler_reference(1.0, 2.0, -500.0), 1.0 / 500.0, delta=1e-14)

    def test_vectorised_shape_is_preserved(self):
        z = -np.linspace(0.0, 30.0, 12).reshape(3, 4)
        values = mittag_leffler(1.5, 1.0, z)
        self.assertEqual(values.shape, (3, 4))
        self.assertAlmostEqual(values[1, 2], mlf_eval(MlfParams(1.5, 1.0), z[1, 2]), delta=1e-11)

    def test_invalid_parameters(self):
        with self.assertRaises(InvalidParameterError):
            MlfParams(0.0, 1.0)
        with self.assertRaises(InvalidParameterError):
            MlfParams(2.5, 1.0)
        with self.assertRaises(InvalidParameterError):
            MlfParams(1.5, 1.0, tol=0.0)
        with self.assertRaises(InvalidParameterError):
            mlf_eval(MlfParams(1.5, 1.0), math.inf)

    def test_positive_argument_beyond_series_range(self):
        with self.assertRaises(MittagLefflerError) as ctx:
            mittag_leffler(0.5, 1.0, 1000.0)
        self.assertEqual(ctx.exception.alpha, 0.5)
        self.assertEqual(ctx.exception.z, 1000.0)


class MittagLefflerIdentityTests(SimpleTestCase):
    def test_recurrence_residual(self):
        for alpha, beta, z in [(1.5, 1.2, -2.0), (0.8, 1.0, -5.0), (1.9, 0.6, -12.0)]:
            with self.subTest(alpha=alpha, beta=beta, z=z):
                self.assertLess(mlf_recurrence_residual(alpha, beta, z, 1e-4), 1e-6)

    def test_recurrence_rejects_zero_argument(self):
        with self.assertRaises(InvalidParameterError):
            mlf_recurrence_residual(1.5, 1.0, 0.0, 1e-4)

    def test_decay_bound(self):
        params = MlfParams(0.8, 1.0)
        sweep = -np.linspace(0.0, 100.0, 201)
        constant = fit_bound_constant(params, sweep)
        self.assertTrue(math.isfinite(constant))
        self.assertGreaterEqual(constant, 1.0)
        self.assertTrue(mlf_bound_check(params, -50.0, constant))
        self.assertFalse(mlf_bound_check(params, -50.0, 1e-6))
        with self.assertRaises(InvalidParameterError):
            mlf_bound_check(params, 1.0, constant)

    def test_laplace_transform(self):
        self.assertLess(mlf_laplace_check(1.5, 1.5, 1.0, 2.0, 50.0), 1e-6)

    def test_laplace_divergence_warns(self):
        with self.assertLogs("memory_control.services.mlf", level="WARNING") as logs:
            mlf_laplace_check(1.5, 1.0, 4.0, 1.0, 5.0)
        self.assertIn("diverges", logs.output[0])

    def test_derivative_identities(self):
        residuals = mlf_derivative_identities(1.5, 2.0, 0.7)
        self.assertLess(residuals.max(), 1e-6)

        at_origin = mlf_derivative_identities(1.5, 2.0, 0.0)
        self.assertTrue(math.isnan(at_origin.first))
        self.assertEqual(at_origin.integral, 0.0)
        self.assertEqual(at_origin.max(), 0.0)

    def test_scaled_constants_are_finite(self):
        times = np.linspace(0.01, 1.0, 50)
        decay = fit_scaled_decay_constants(1.5, 1.0, [1.0, 10.0, 100.0], times, 1.0, 0.0)
        self.assertGreater(decay, 0.0)
        self.assertLess(decay, 5.0)

        kernel = fit_scaled_kernel_constant(1.5, 1.5, [1.0, 10.0, 100.0], times, 2.0 / 3.0)
        self.assertTrue(math.isfinite(kernel))
        with self.assertRaises(InvalidParameterError):
            fit_scaled_decay_constants(1.5, 1.0, [1.0], times, 1.5, 0.0)

import math

import numpy as np
from django.test import SimpleTestCase

from ..exceptions import InvalidParameterError
from ..services.spectral import (
    Field,
    SpaceGrid,
    SpectralBasis,
    Subdomain,
    bilinear_form,
    builtin_dirichlet_laplacian,
    builtin_spectral_fractional,
    gram_matrix,
    l2_pairing,
    orthonormality_residual,
    project,
    synthesize,
    v_gamma_norm,
)


class SpectralBasisTests(SimpleTestCase):
    def setUp(self):
        self.basis = builtin_dirichlet_laplacian(2.0, 6)

    def test_dirichlet_eigenvalues(self):
        expected = (np.arange(1, 7) * math.pi / 2.0) ** 2
        np.testing.assert_allclose(self.basis.eigenvalues, expected)
        self.assertEqual(self.basis.size, 6)
        self.assertEqual(self.basis.name, "dirichlet")

    def test_eigenfunctions_are_orthonormal(self):
        grid = SpaceGrid.trapezoid(self.basis.length, 512)
        self.assertLess(orthonormality_residual(self.basis, grid), 1e-12)

        values = self.basis.evaluate([0.0, 2.0])
        np.testing.assert_allclose(values, 0.0, atol=1e-14)

    def test_fractional_power(self):
        power = builtin_spectral_fractional(self.basis, 0.5)
        np.testing.assert_allclose(power.eigenvalues, np.arange(1, 7) * math.pi / 2.0)
        np.testing.assert_allclose(power.evaluate(0.3), self.basis.evaluate(0.3))
        self.assertIs(builtin_spectral_fractional(self.basis, 1.0), self.basis)
        with self.assertRaises(InvalidParameterError):
            builtin_spectral_fractional(self.basis, 1.5)

    def test_restrict(self):
        small = self.basis.restrict(3)
        self.assertEqual(small.size, 3)
        np.testing.assert_allclose(small.eigenvalues, self.basis.eigenvalues[:3])
        with self.assertRaises(InvalidParameterError):
            self.basis.restrict(7)

    def test_repeated_eigenvalues_cluster(self):
        basis = SpectralBasis(
            np.array([1.0, 4.0, 4.0, 9.0]), self.basis.evaluator, self.basis.length
        )
        clusters = [group.tolist() for group in basis.clusters()]
        self.assertEqual(clusters, [[0], [1, 2], [3]])

    def test_invalid_spectra(self):
        with self.assertRaises(InvalidParameterError):
            SpectralBasis(np.array([0.0, 1.0]), self.basis.evaluator, 1.0)
        with self.assertRaises(InvalidParameterError):
            SpectralBasis(np.array([2.0, 1.0]), self.basis.evaluator, 1.0)
        with self.assertRaises(InvalidParameterError):
            builtin_dirichlet_laplacian(1.0, 0)


class FieldTests(SimpleTestCase):
    def setUp(self):
        self.basis = builtin_dirichlet_laplacian(1.0, 4)
        self.grid = SpaceGrid.trapezoid(1.0, 512)

    def test_project_and_synthesize(self):
        samples = synthesize(Field(self.basis, [1.0, 3.0, 0.0, 0.0]), self.grid)
        field = project(samples, self.basis, self.grid)
        np.testing.assert_allclose(field.coefficients, [1.0, 3.0, 0.0, 0.0], atol=1e-12)

        x = np.array([0.25, 0.5])
        expected = math.sqrt(2.0) * (np.sin(math.pi * x) + 3.0 * np.sin(2 * math.pi * x))
        np.testing.assert_allclose(synthesize(field, x), expected, atol=1e-12)

    def test_norms_and_forms(self):
        u = Field(self.basis, [1.0, 1.0, 0.0, 0.0])
        lam = self.basis.eigenvalues
        self.assertAlmostEqual(v_gamma_norm(u, 0.0), math.sqrt(2.0))
        self.assertAlmostEqual(
            v_gamma_norm(u, 0.5), math.sqrt(lam[0] + lam[1]), delta=1e-12
        )
        self.assertAlmostEqual(
            v_gamma_norm(u, -0.5), math.sqrt(1 / lam[0] + 1 / lam[1]), delta=1e-12
        )

        v = Field(self.basis, [2.0, -1.0, 5.0, 0.0])
        self.assertAlmostEqual(bilinear_form(u, v), 2.0 * lam[0] - lam[1], delta=1e-12)
        self.assertAlmostEqual(l2_pairing(u, v), 1.0)

    def test_constructors(self):
        phi3 = Field.mode(self.basis, 3)
        np.testing.assert_array_equal(phi3.coefficients, [0.0, 0.0, 1.0, 0.0])
        self.assertTrue(Field.zero(self.basis).is_zero)
        self.assertFalse(phi3.is_zero)
        np.testing.assert_array_equal((phi3 + phi3.scaled(2.0)).coefficients, [0, 0, 3, 0])

        first = Field.random(self.basis, np.random.default_rng(4))
        second = Field.random(self.basis, np.random.default_rng(4))
        np.testing.assert_array_equal(first.coefficients, second.coefficients)

        with self.assertRaises(InvalidParameterError):
            Field.mode(self.basis, 5)
        with self.assertRaises(InvalidParameterError):
            Field(self.basis, [1.0, 2.0])
        with self.assertRaises(InvalidParameterError):
            project(np.ones(3), self.basis, self.grid)


class SubdomainTests(SimpleTestCase):
    def setUp(self):
        self.basis = builtin_dirichlet_laplacian(1.0, 4)

    def test_intervals_are_sorted_and_measured(self):
        omega = Subdomain(((0.6, 0.8), (0.1, 0.3)))
        self.assertEqual(omega.intervals, ((0.1, 0.3), (0.6, 0.8)))
        self.assertAlmostEqual(omega.measure, 0.4)
        np.testing.assert_array_equal(omega.indicator([0.05, 0.2, 0.5, 0.7]), [0, 1, 0, 1])
        self.assertAlmostEqual(omega.quadrature().measure, 0.4, delta=1e-14)

    def test_invalid_intervals(self):
        with self.assertRaises(InvalidParameterError):
            Subdomain(((0.1, 0.5), (0.4, 0.8)))
        with self.assertRaises(InvalidParameterError):
            Subdomain(((0.3, 0.3),))
        with self.assertRaises(InvalidParameterError):
            Subdomain(((0.5, 1.5),)).validate_within(1.0)

    def test_gram_matrix(self):
        whole = Subdomain.whole(self.basis).quadrature()
        np.testing.assert_allclose(gram_matrix(self.basis, whole), np.eye(4), atol=1e-13)

        part = Subdomain(((0.0, 0.5),)).quadrature()
        gram = gram_matrix(self.basis, part, columns=2)
        self.assertEqual(gram.shape, (4, 2))
        self.assertAlmostEqual(gram[0, 0], 0.5, delta=1e-13)

        empty = Subdomain(())
        self.assertTrue(empty.is_empty)
        self.assertTrue(empty.quadrature().is_empty)
        np.testing.assert_array_equal(gram_matrix(self.basis, empty.quadrature()), 0.0)

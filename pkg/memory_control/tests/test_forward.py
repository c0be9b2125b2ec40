import math

import numpy as np
from django.test import SimpleTestCase

from ..exceptions import InvalidParameterError
from ..services.forward import (
    ControlField,
    ForwardProblem,
    ModalField,
    estimate_cds_check,
    family_properties,
    memory_state,
    memory_trace,
    operator_families,
    pde_residual,
    solve_forward,
    solve_forward_alt,
)
from ..services.fracops import (
    Anchor,
    FractionalOrder,
    GridFunction,
    TimeGrid,
    frac_integral_left,
    grid_derivative,
)
from ..services.mlf import mittag_leffler
from ..services.spectral import Field, Subdomain, builtin_dirichlet_laplacian
from .oracles import wave_mode


def memory_rate_consistency(problem: ForwardProblem) -> float:
    """Max gap between mem_rate and a finite-difference derivative of mem."""
    trace = memory_trace(problem)
    nodes = problem.grid.nodes
    mem = trace["mem"].coefficients
    rate = trace["mem_rate"].coefficients
    numeric = np.vstack([grid_derivative(row, nodes, 1) for row in mem])
    return float(np.max(np.abs(numeric[:, 1:-1] - rate[:, 1:-1])))


class WaveLimitTests(SimpleTestCase):
    """mu = 2 reduces to u'' + A u = f with mode frequencies n on (0, pi)."""

    def setUp(self):
        self.basis = builtin_dirichlet_laplacian(math.pi, 3)
        self.order = FractionalOrder(2.0, 0.5)
        self.grid = TimeGrid.uniform(2.0 * math.pi, 128)

    def test_mode_traces_are_trigonometric(self):
        problem = ForwardProblem(
            self.order,
            self.basis,
            self.grid,
            Field.mode(self.basis, 1),
            Field.mode(self.basis, 2),
        )
        solution = solve_forward(problem)
        t = self.grid.nodes
        np.testing.assert_allclose(solution.mode(1), wave_mode(1.0, 1.0, 0.0, t), atol=1e-12)
        np.testing.assert_allclose(solution.mode(2), wave_mode(4.0, 0.0, 1.0, t), atol=1e-12)
        np.testing.assert_allclose(solution.mode(3), 0.0, atol=1e-15)
        self.assertFalse(solution.singular.any())

    def test_piecewise_constant_control(self):
        horizon = 0.5 * math.pi
        omega = Subdomain.whole(self.basis)
        control = ControlField.uniform(omega, horizon, [[2.0]])
        zero = Field.zero(self.basis)
        grid = TimeGrid.uniform(horizon, 64)
        problem = ForwardProblem(self.order, self.basis, grid, zero, zero, control)

        solution = solve_forward(problem)
        np.testing.assert_allclose(
            solution.mode(1), 2.0 * (1.0 - np.cos(grid.nodes)), atol=1e-12
        )
        np.testing.assert_allclose(solution.coefficients[1:], 0.0, atol=1e-12)

        state = memory_state(problem, solution)
        self.assertAlmostEqual(state.mem.coefficients[0], 2.0, delta=1e-12)
        self.assertAlmostEqual(state.mem_rate.coefficients[0], 2.0, delta=1e-12)

    def test_pde_residual_is_small(self):
        problem = ForwardProblem(
            self.order, self.basis, self.grid, Field.mode(self.basis, 1), Field.zero(self.basis)
        )
        self.assertLess(pde_residual(problem), 1e-3)

    def test_operator_families(self):
        t = 0.7
        families = operator_families(self.basis, self.order, t)
        n = np.arange(1, 4)
        np.testing.assert_allclose(families.s_mu, np.sin(n * t) / (n * t), atol=1e-13)
        np.testing.assert_allclose(families.s_mu_minus_one, np.cos(n * t), atol=1e-13)
        np.testing.assert_allclose(families.s1, np.cos(n * t), atol=1e-13)
        np.testing.assert_allclose(families.s3, np.sin(n * t) / n, atol=1e-13)
        with self.assertRaises(InvalidParameterError):
            operator_families(self.basis, self.order, 0.0)


class FractionalForwardTests(SimpleTestCase):
    def setUp(self):
        self.basis = builtin_dirichlet_laplacian(math.pi, 2)
        self.order = FractionalOrder(1.5, 0.5)
        self.phi1 = Field.mode(self.basis, 1)
        self.zero = Field.zero(self.basis)

    def problem(self, u0, u1, steps=256, control=None, grading=1.0):
        grid = TimeGrid.graded(1.0, steps, grading)
        return ForwardProblem(self.order, self.basis, grid, u0, u1, control)

    def test_singular_start(self):
        solution = solve_forward(self.problem(self.phi1, self.zero))
        self.assertTrue(solution.singular[0])
        self.assertTrue(np.isnan(solution.coefficients[:, 0]).all())
        self.assertFalse(solution.singular[1:].any())

        regular = solve_forward(self.problem(self.zero, self.phi1))
        self.assertFalse(regular.singular.any())
        np.testing.assert_array_equal(regular.coefficients[:, 0], 0.0)

    def test_memory_matches_fractional_integral_of_solution(self):
        problem = self.problem(self.phi1, self.zero)
        beta = self.order.beta
        nodes = problem.grid.nodes
        regular = mittag_leffler(self.order.mu, 1.0 - beta, -(nodes**self.order.mu))
        g = GridFunction(problem.grid, regular, -beta, Anchor.LEFT)
        integral = frac_integral_left(beta, g).samples()

        mem = memory_trace(problem)["mem"].mode(1)
        self.assertLess(float(np.max(np.abs(integral - mem))), 1e-3)

    def test_memory_starts_from_initial_data(self):
        u0 = Field(self.basis, [0.7, -1.2])
        u1 = Field(self.basis, [0.4, 2.0])
        trace = memory_trace(self.problem(u0, u1, steps=16))
        np.testing.assert_allclose(trace["mem"].coefficients[:, 0], u0.coefficients, atol=1e-15)
        np.testing.assert_allclose(
            trace["mem_rate"].coefficients[:, 0], u1.coefficients, atol=1e-15
        )

        tiny = ForwardProblem(self.order, self.basis, TimeGrid.uniform(1e-30, 4), u0, u1)
        state = memory_state(tiny)
        np.testing.assert_allclose(state.mem.coefficients, u0.coefficients, atol=1e-12)
        np.testing.assert_allclose(state.mem_rate.coefficients, u1.coefficients, atol=1e-12)

    def test_memory_state_is_the_last_trace_column(self):
        u0 = Field(self.basis, [0.3, 0.5])
        problem = self.problem(u0, self.phi1, steps=32)
        state = memory_state(problem)
        trace = memory_trace(problem)
        np.testing.assert_allclose(state.mem.coefficients, trace["mem"].coefficients[:, -1])
        np.testing.assert_allclose(
            state.mem_rate.coefficients, trace["mem_rate"].coefficients[:, -1]
        )

    def test_memory_rate_matches_derivative_of_memory(self):
        coarse = memory_rate_consistency(self.problem(self.phi1, self.phi1, steps=32))
        fine = memory_rate_consistency(self.problem(self.phi1, self.phi1, steps=256))
        self.assertLess(fine, coarse)

    def test_operator_representation_agrees(self):
        problem = self.problem(self.phi1, self.phi1)
        direct = solve_forward(problem)
        alternate = solve_forward_alt(problem)
        self.assertTrue(alternate.singular[0])
        tail = problem.grid.nodes >= 0.1
        gap = np.abs(direct.coefficients[:, tail] - alternate.coefficients[:, tail])
        self.assertLess(float(np.max(gap)), 1e-3)

    def test_operator_representation_rejects_controls(self):
        control = ControlField.uniform(Subdomain.whole(self.basis), 1.0, [[1.0]])
        with self.assertRaises(InvalidParameterError):
            solve_forward_alt(self.problem(self.phi1, self.zero, control=control))

    def test_pde_residual_decreases_under_refinement(self):
        coarse = pde_residual(self.problem(self.phi1, self.zero, steps=64))
        fine = pde_residual(self.problem(self.phi1, self.zero, steps=256))
        self.assertLess(fine, coarse)

    def test_solution_estimate(self):
        rng = np.random.default_rng(2)
        control = ControlField.uniform(
            Subdomain(((0.5, 1.5),)), 1.0, rng.standard_normal((4, 2))
        )
        problem = self.problem(
            Field.random(self.basis, rng), Field.random(self.basis, rng), 64, control
        )
        report = estimate_cds_check(problem)
        self.assertTrue(report.holds)
        self.assertGreater(report.constant, 0.0)
        self.assertEqual(report.ratios.size, 64)

    def test_family_properties(self):
        reports = family_properties(self.basis, self.order, np.linspace(0.05, 1.0, 20), 0.3)
        self.assertEqual([report.name for report in reports], ["S_mu", "S_mu-1"])
        for report in reports:
            self.assertTrue(math.isfinite(report.bound_constant))
            self.assertTrue(math.isfinite(report.derivative_constant))
            self.assertLess(report.commutation_residual, 1e-12)
            self.assertLess(report.commutativity_residual, 1e-12)


class ForwardValidationTests(SimpleTestCase):
    def setUp(self):
        self.basis = builtin_dirichlet_laplacian(1.0, 3)
        self.order = FractionalOrder(1.5, 0.5)
        self.grid = TimeGrid.uniform(1.0, 8)
        self.zero = Field.zero(self.basis)

    def test_integrability_exponent(self):
        with self.assertRaises(InvalidParameterError):
            ForwardProblem(self.order, self.basis, self.grid, self.zero, self.zero, p=2.0)
        ForwardProblem(self.order, self.basis, self.grid, self.zero, self.zero, p=3.0)

    def test_data_must_match_basis(self):
        other = Field.zero(builtin_dirichlet_laplacian(1.0, 2))
        with self.assertRaises(InvalidParameterError):
            ForwardProblem(self.order, self.basis, self.grid, other, self.zero)

    def test_control_cells_must_end_at_horizon(self):
        control = ControlField.uniform(Subdomain.whole(self.basis), 0.5, [[1.0], [1.0]])
        with self.assertRaises(InvalidParameterError):
            ForwardProblem(self.order, self.basis, self.grid, self.zero, self.zero, control)

    def test_modal_field_shape(self):
        with self.assertRaises(InvalidParameterError):
            ModalField(self.basis, self.grid, np.zeros((3, 4)))


class ControlFieldTests(SimpleTestCase):
    def setUp(self):
        self.basis = builtin_dirichlet_laplacian(1.0, 3)
        self.omega = Subdomain.whole(self.basis)
        self.control = ControlField.uniform(self.omega, 1.0, [[2.0], [-1.0]])

    def test_lp_norms(self):
        grid = self.omega.quadrature()
        self.assertAlmostEqual(self.control.lp_norm(math.inf, self.basis, grid), 2.0, delta=1e-12)
        self.assertAlmostEqual(
            self.control.lp_norm(2.0, self.basis, grid), math.sqrt(2.5), delta=1e-12
        )

    def test_point_values(self):
        values = self.control.evaluate(self.basis, [0.5, 0.25], [0.25, 0.75])
        self.assertEqual(values.shape, (2, 2))
        self.assertAlmostEqual(values[0, 0], 2.0 * math.sqrt(2.0), delta=1e-12)
        self.assertAlmostEqual(values[0, 1], -math.sqrt(2.0), delta=1e-12)

    def test_modal_amplitudes(self):
        amplitudes = self.control.modal_amplitudes(self.basis, self.omega.quadrature())
        np.testing.assert_allclose(amplitudes, [[2.0, -1.0], [0.0, 0.0], [0.0, 0.0]], atol=1e-13)

    def test_invalid_layout(self):
        with self.assertRaises(InvalidParameterError):
            ControlField(self.omega, np.array([0.0, 0.5, 0.5, 1.0]), np.ones((3, 1)))
        with self.assertRaises(InvalidParameterError):
            ControlField(self.omega, np.array([0.0, 0.5, 1.0]), np.ones((3, 1)))

"""
Spectral solution of the controlled Hilfer evolution problem

    D^{mu,nu} u + A u = f chi_omega,   mem(0) = u0,   mem_rate(0) = u1,

where mem = I^beta u and mem_rate = (I^beta u)'. Every mode is solved in
closed form with Mittag-Leffler functions; piecewise-constant controls enter
through the exact primitive s^b E_{mu,b+1}(-lam s^mu) of s^(b-1) E_{mu,b}.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy import special

from ..exceptions import InvalidParameterError
from .fracops import (
    Anchor,
    FractionalOrder,
    GammaChoice,
    GridFunction,
    TimeGrid,
    frac_integral_left,
    hilfer_derivative_left,
)
from .mlf import mittag_leffler
from .spectral import Field, SpaceGrid, SpectralBasis, Subdomain, gram_matrix, v_gamma_norm

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ControlField:
    """
    f(x, t) = chi_omega(x) sum_m c[j, m] phi_m(x) for t in the j-th cell.

    cell_edges partition [0, T] into J cells; coefficients has shape (J, M_ctrl).
    """

    omega: Subdomain
    cell_edges: np.ndarray
    coefficients: np.ndarray

    def __post_init__(self):
        edges = np.array(self.cell_edges, dtype=float)
        coefficients = np.array(self.coefficients, dtype=float)
        if edges.ndim != 1 or edges.size < 2 or edges[0] != 0.0 or np.any(np.diff(edges) <= 0):
            raise InvalidParameterError(
                "control.cells", "cell edges must increase strictly from 0"
            )
        if coefficients.ndim != 2 or coefficients.shape[0] != edges.size - 1:
            raise InvalidParameterError(
                "control.coefficients", f"expected {edges.size - 1} rows of coefficients"
            )
        object.__setattr__(self, "cell_edges", edges)
        object.__setattr__(self, "coefficients", coefficients)

    @classmethod
    def uniform(cls, omega: Subdomain, horizon: float, coefficients) -> "ControlField":
        coefficients = np.atleast_2d(np.asarray(coefficients, dtype=float))
        return cls(omega, np.linspace(0.0, horizon, coefficients.shape[0] + 1), coefficients)

    @property
    def cells(self) -> int:
        return self.coefficients.shape[0]

    @property
    def space_functions(self) -> int:
        return self.coefficients.shape[1]

    def modal_amplitudes(self, basis: SpectralBasis, omega_grid: SpaceGrid) -> np.ndarray:
        """Cell amplitudes f_n = sum_m c[j, m] (phi_n, chi_omega phi_m), shape (N, J)."""
        if self.space_functions > basis.size:
            raise InvalidParameterError(
                "control.space_functions", f"must not exceed {basis.size} modes"
            )
        gram = gram_matrix(basis, omega_grid, self.space_functions)
        return gram @ self.coefficients.T

    def lp_norm(self, p: float, basis: SpectralBasis, omega_grid: SpaceGrid) -> float:
        """Norm of f in L^p(0, T; L^2(Omega))."""
        gram = gram_matrix(basis, omega_grid, self.space_functions)[: self.space_functions]
        energy = np.einsum("jm,mk,jk->j", self.coefficients, gram, self.coefficients)
        spatial = np.sqrt(np.maximum(energy, 0.0))
        if math.isinf(p):
            return float(np.max(spatial))
        return float(np.sum(np.diff(self.cell_edges) * spatial**p) ** (1.0 / p))

    def evaluate(self, basis: SpectralBasis, x, t) -> np.ndarray:
        """Point values on the tensor grid x by t, shape (len(x), len(t))."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        t = np.atleast_1d(np.asarray(t, dtype=float))
        cell = np.clip(np.searchsorted(self.cell_edges, t, side="right") - 1, 0, self.cells - 1)
        shapes = basis.evaluate(x, self.space_functions) * self.omega.indicator(x)
        return shapes.T @ self.coefficients[cell].T


@dataclass(frozen=True, eq=False)
class ModalField:
    """Mode traces on a time grid; coefficients has shape (N, M + 1)."""

    basis: SpectralBasis
    grid: TimeGrid
    coefficients: np.ndarray
    singular: np.ndarray = field(default=None)

    def __post_init__(self):
        coefficients = np.array(self.coefficients, dtype=float)
        expected = (self.basis.size, self.grid.nodes.size)
        if coefficients.shape != expected:
            raise InvalidParameterError("coefficients", f"expected shape {expected}")
        singular = (
            np.zeros(self.grid.nodes.size, dtype=bool)
            if self.singular is None
            else np.array(self.singular, dtype=bool)
        )
        object.__setattr__(self, "coefficients", coefficients)
        object.__setattr__(self, "singular", singular)

    def mode(self, n: int) -> np.ndarray:
        """Trace of mode n, counted from 1."""
        return self.coefficients[n - 1]

    def at(self, j: int) -> Field:
        return Field(self.basis, self.coefficients[:, j])

    def v_gamma_norms(self, gamma: float) -> np.ndarray:
        weights = self.basis.eigenvalues[:, None] ** (2.0 * gamma)
        return np.sqrt(np.sum(weights * self.coefficients**2, axis=0))


@dataclass(frozen=True, eq=False)
class MemoryState:
    """The pair (I^beta u(T), d/dt I^beta u(T))."""

    mem: Field
    mem_rate: Field

    def vector(self) -> np.ndarray:
        return np.concatenate([self.mem.coefficients, self.mem_rate.coefficients])

    @classmethod
    def from_vector(cls, basis: SpectralBasis, values: np.ndarray) -> "MemoryState":
        return cls(Field(basis, values[: basis.size]), Field(basis, values[basis.size :]))


@dataclass(frozen=True, eq=False)
class ForwardProblem:
    order: FractionalOrder
    basis: SpectralBasis
    grid: TimeGrid
    u0: Field
    u1: Field
    control: Optional[ControlField] = None
    gamma_choice: GammaChoice = GammaChoice.MU
    p: float = math.inf
    omega_points: int = 16

    def __post_init__(self):
        object.__setattr__(self, "gamma_choice", GammaChoice(self.gamma_choice))
        for name, data in (("u0", self.u0), ("u1", self.u1)):
            if data.basis.size != self.basis.size:
                raise InvalidParameterError(name, f"expected {self.basis.size} modes")
        threshold = (
            1.0 / (self.order.mu - 1.0)
            if self.gamma_choice is GammaChoice.MU
            else 2.0 / self.order.mu
        )
        if not self.p > threshold:
            raise InvalidParameterError(
                "p", f"must exceed {threshold:.6g} for gamma={self.gamma_choice.value}"
            )
        if self.control is not None:
            if not math.isclose(self.control.cell_edges[-1], self.grid.horizon, rel_tol=1e-12):
                raise InvalidParameterError("control.cells", "cells must end at the horizon T")
            self.control.omega.validate_within(self.basis.length)

    @property
    def gamma(self) -> float:
        return self.order.gamma(self.gamma_choice)

    def amplitudes(self) -> Optional[np.ndarray]:
        if self.control is None:
            return None
        return self.control.modal_amplitudes(
            self.basis, self.control.omega.quadrature(self.omega_points)
        )


def _kernel(mu: float, b: float, lam: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Get t^(b-1) E_{mu,b}(-lam t^mu) on the outer product lam x t, for t > 0."""
    t = np.asarray(t, dtype=float)
    return t ** (b - 1.0) * mittag_leffler(mu, b, -np.outer(lam, t**mu))


def _duhamel(
    mu: float, b: float, lam: np.ndarray, amplitudes: np.ndarray, edges: np.ndarray, times
) -> np.ndarray:
    """
    Exact sum_j f[n, j] int_{cell j, tau < t} (t - tau)^(b-1) E_{mu,b}(-lam (t - tau)^mu) dtau.

    Returns shape (N, len(times)).
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    lag = np.clip(times[None, :] - edges[:, None], 0.0, None)
    primitive = lag[None] ** b * mittag_leffler(mu, b + 1.0, -lam[:, None, None] * lag[None] ** mu)
    increments = primitive[:, :-1, :] - primitive[:, 1:, :]
    return np.einsum("njk,nj->nk", increments, amplitudes)


def _memory_terms(problem: ForwardProblem, times: np.ndarray):
    order = problem.order
    mu, gap = order.mu, order.nu_gap
    lam = problem.basis.eigenvalues
    u0 = problem.u0.coefficients[:, None]
    u1 = problem.u1.coefficients[:, None]
    arg = -np.outer(lam, times**mu)

    mem = u0 * mittag_leffler(mu, 1.0, arg) + u1 * times * mittag_leffler(mu, 2.0, arg)
    rate = -u0 * lam[:, None] * times ** (mu - 1.0) * mittag_leffler(mu, mu, arg)
    rate = rate + u1 * mittag_leffler(mu, 1.0, arg)

    amplitudes = problem.amplitudes()
    if amplitudes is not None:
        edges = problem.control.cell_edges
        mem = mem + _duhamel(mu, 2.0 - gap, lam, amplitudes, edges, times)
        rate = rate + _duhamel(mu, 1.0 - gap, lam, amplitudes, edges, times)
    return mem, rate


def solve_forward(problem: ForwardProblem) -> ModalField:
    """Mode traces u_n(t_j); node 0 is flagged singular when beta > 0 and u0 != 0."""
    order = problem.order
    mu, beta = order.mu, order.beta
    lam = problem.basis.eigenvalues
    nodes = problem.grid.nodes
    positive = nodes[1:]

    values = np.zeros((lam.size, nodes.size))
    values[:, 1:] = problem.u0.coefficients[:, None] * _kernel(mu, 1.0 - beta, lam, positive)
    values[:, 1:] += problem.u1.coefficients[:, None] * _kernel(mu, 2.0 - beta, lam, positive)

    singular = np.zeros(nodes.size, dtype=bool)
    if beta > 0 and not problem.u0.is_zero:
        singular[0] = True
        values[:, 0] = np.nan
    else:
        # beta = 0 leaves u0 E_{mu,1}(0) = u0; the u1 term vanishes like t^(1-beta)
        values[:, 0] = problem.u0.coefficients if beta == 0 else 0.0

    amplitudes = problem.amplitudes()
    if amplitudes is not None:
        values += _duhamel(mu, mu, lam, amplitudes, problem.control.cell_edges, nodes)

    logger.debug(
        f"Forward solve: {lam.size} modes, {nodes.size} nodes, mu={mu}, nu={order.nu}"
    )
    return ModalField(problem.basis, problem.grid, values, singular)


def _check_solution(problem: ForwardProblem, solution: Optional[ModalField]):
    if solution is None:
        return
    shape = (problem.basis.size, problem.grid.nodes.size)
    if solution.coefficients.shape != shape:
        raise InvalidParameterError("solution", "does not belong to this problem")


def memory_state(problem: ForwardProblem, solution: Optional[ModalField] = None) -> MemoryState:
    """Closed-form memory state at t = T, never by differentiating the solution."""
    _check_solution(problem, solution)
    mem, rate = _memory_terms(problem, np.array([problem.grid.horizon]))
    return MemoryState(Field(problem.basis, mem[:, 0]), Field(problem.basis, rate[:, 0]))


def memory_trace(problem: ForwardProblem) -> Dict[str, ModalField]:
    """mem and mem_rate at every grid node; both are finite down to t = 0."""
    mem, rate = _memory_terms(problem, problem.grid.nodes)
    return {
        "mem": ModalField(problem.basis, problem.grid, mem),
        "mem_rate": ModalField(problem.basis, problem.grid, rate),
    }


def solve_forward_alt(problem: ForwardProblem) -> ModalField:
    """
    The uncontrolled solution built from the solution operators,

        u = I^{nu(2-mu)} [t^(mu-2) S_{mu-1}(t) u0] + I^{nu(2-mu)} [t^(mu-1) S_mu(t) u1],

    with each fractional integral done by product integration on the grid.
    """
    if problem.control is not None and np.any(problem.control.coefficients):
        raise InvalidParameterError("control", "the alternate representation needs f = 0")
    order = problem.order
    mu, gap = order.mu, order.nu_gap
    grid = problem.grid
    lam = problem.basis.eigenvalues
    arg = -np.outer(lam, grid.nodes**mu)
    regular0 = mittag_leffler(mu, mu - 1.0, arg)
    regular1 = mittag_leffler(mu, mu, arg)

    values = np.zeros((lam.size, grid.nodes.size))
    for n in range(lam.size):
        c0 = problem.u0.coefficients[n]
        c1 = problem.u1.coefficients[n]
        if c0:
            trace = GridFunction(grid, regular0[n], mu - 2.0, Anchor.LEFT)
            values[n] += c0 * frac_integral_left(gap, trace).samples()
        if c1:
            trace = GridFunction(grid, regular1[n], mu - 1.0, Anchor.LEFT)
            values[n] += c1 * frac_integral_left(gap, trace).samples()

    singular = np.zeros(grid.nodes.size, dtype=bool)
    singular[0] = bool(np.any(np.isnan(values[:, 0])))
    return ModalField(problem.basis, grid, values, singular)


@dataclass(frozen=True)
class OperatorFamilies:
    """Diagonal symbols at a single time t, one entry per mode."""

    s1: np.ndarray
    s2: np.ndarray
    s3: np.ndarray
    s_mu: np.ndarray
    s_mu_minus_one: np.ndarray


def operator_families(basis: SpectralBasis, order: FractionalOrder, t: float) -> OperatorFamilies:
    if t <= 0:
        raise InvalidParameterError("t", f"must be positive, got {t}")
    mu, beta = order.mu, order.beta
    lam = basis.eigenvalues
    arg = -lam * t**mu
    return OperatorFamilies(
        s1=t ** (-beta) * mittag_leffler(mu, 1.0 - beta, arg),
        s2=t ** (1.0 - beta) * mittag_leffler(mu, 2.0 - beta, arg),
        s3=t ** (mu - 1.0) * mittag_leffler(mu, mu, arg),
        s_mu=mittag_leffler(mu, mu, arg),
        s_mu_minus_one=mittag_leffler(mu, mu - 1.0, arg),
    )


@dataclass(frozen=True)
class FamilyReport:
    name: str
    bound_constant: float
    commutation_residual: float
    commutativity_residual: float
    derivative_constant: float


def family_properties(
    basis: SpectralBasis,
    order: FractionalOrder,
    times: Sequence[float],
    tau: float,
    seed: int = 0,
) -> List[FamilyReport]:
    """Boundedness, commutation with A, commutativity and t^-1 derivative bounds."""
    rng = np.random.default_rng(seed)
    u = rng.standard_normal(basis.size)
    lam = basis.eigenvalues
    times = np.asarray(times, dtype=float)
    if np.any(times <= 0) or tau <= 0:
        raise InvalidParameterError("times", "the sweep must be strictly positive")

    reports = []
    for name, beta in (("S_mu", order.mu), ("S_mu-1", order.mu - 1.0)):

        def symbol(t):
            return mittag_leffler(order.mu, beta, -np.outer(lam, np.atleast_1d(t) ** order.mu))

        values = symbol(times)
        bound = float(np.max(np.abs(values)))

        at_t = values[:, 0]
        at_tau = symbol(tau)[:, 0]
        scale = max(float(np.linalg.norm(lam * u)), 1.0)
        commutation = np.linalg.norm(lam * (at_t * u) - at_t * (lam * u)) / scale
        commutativity = np.linalg.norm(at_t * (at_tau * u) - at_tau * (at_t * u)) / scale

        step = 1e-5 * times
        rate = (symbol(times + step) - symbol(times - step)) / (2.0 * step)
        derivative = float(np.max(np.abs(rate) * times))

        report = FamilyReport(name, bound, float(commutation), float(commutativity), derivative)
        logger.info(
            f"{name}: C1={bound:.6e}, C2={derivative:.6e}, "
            f"commutation={report.commutation_residual:.2e}"
        )
        reports.append(report)
    return reports


@dataclass(frozen=True)
class CdsReport:
    constant: float
    times: np.ndarray
    ratios: np.ndarray

    @property
    def holds(self) -> bool:
        return math.isfinite(self.constant)


def estimate_cds_check(problem: ForwardProblem) -> CdsReport:
    """
    Fit C with ||u(t)||_{V_gamma} <= C (t^-beta ||u0||_{V_gamma} + t^-beta ||u1||
    + t^(mu-1-1/p) ||f||_{L^p}) over the positive grid nodes.
    """
    order = problem.order
    gamma = problem.gamma
    solution = solve_forward(problem)
    times = problem.grid.nodes[1:]
    lhs = solution.v_gamma_norms(gamma)[1:]

    data = v_gamma_norm(problem.u0, gamma) + v_gamma_norm(problem.u1, 0.0)
    rhs = times ** (-order.beta) * data
    if problem.control is not None:
        omega_grid = problem.control.omega.quadrature(problem.omega_points)
        forcing = problem.control.lp_norm(problem.p, problem.basis, omega_grid)
        exponent = order.mu - 1.0 - (0.0 if math.isinf(problem.p) else 1.0 / problem.p)
        rhs = rhs + times**exponent * forcing

    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(rhs > 0, lhs / rhs, 0.0)
    constant = float(np.max(ratios))
    logger.info(f"Solution estimate constant: {constant:.6e} over {times.size} nodes")
    return CdsReport(constant, times, ratios)


def _time_weights(nodes: np.ndarray) -> np.ndarray:
    weights = np.zeros(nodes.size)
    spacing = np.diff(nodes)
    weights[:-1] += 0.5 * spacing
    weights[1:] += 0.5 * spacing
    return weights


def interior_dual_norm(residual: np.ndarray, nodes: np.ndarray, eigenvalues, gamma: float) -> float:
    """Time-averaged V_{-gamma} norm of a modal residual on the interior nodes."""
    norms = np.sqrt(np.sum(eigenvalues[:, None] ** (-2.0 * gamma) * residual**2, axis=0))
    weights = _time_weights(nodes)
    inner = slice(1, nodes.size - 1)
    return float(np.sum(weights[inner] * norms[inner]) / nodes[-1])


def pde_residual(problem: ForwardProblem, solution: Optional[ModalField] = None) -> float:
    """Discrete V_{-gamma} norm of D^{mu,nu} u + A u - f on the interior nodes."""
    solution = solve_forward(problem) if solution is None else solution
    _check_solution(problem, solution)
    order = problem.order
    beta = order.beta
    grid = problem.grid
    nodes = grid.nodes
    lam = problem.basis.eigenvalues

    derivative = np.zeros_like(solution.coefficients)
    for n in range(lam.size):
        trace = solution.coefficients[n]
        if beta > 0:
            regular = np.empty_like(trace)
            regular[1:] = trace[1:] * nodes[1:] ** beta
            regular[0] = problem.u0.coefficients[n] * special.rgamma(1.0 - beta)
            g = GridFunction(grid, regular, -beta, Anchor.LEFT)
        else:
            g = GridFunction(grid, trace)
        derivative[n] = hilfer_derivative_left(order, g).samples()

    forcing = np.zeros_like(derivative)
    amplitudes = problem.amplitudes()
    if amplitudes is not None:
        edges = problem.control.cell_edges
        cell = np.clip(np.searchsorted(edges, nodes, side="right") - 1, 0, edges.size - 2)
        forcing = amplitudes[:, cell]

    residual = derivative + lam[:, None] * solution.coefficients - forcing
    return interior_dual_norm(residual, nodes, lam, problem.gamma)

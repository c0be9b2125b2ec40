"""
Backward dual system D_{t,T}^{mu,1-nu} v + A v = 0 with final memory data

    I_{t,T}^{nu(2-mu)} v (T) = v0,   D_{t,T}^{1-nu(2-mu)} v (T) = v1.

With s = T - t and a = nu(2-mu) each mode reads

    v_n(t) = v0_n s^(-a) E_{mu,1-a}(-lam s^mu) + v1_n s^(1-a) E_{mu,2-a}(-lam s^mu).
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from ..exceptions import InvalidParameterError
from .forward import ModalField, interior_dual_norm
from .fracops import (
    Anchor,
    FractionalOrder,
    GammaChoice,
    GridFunction,
    TimeGrid,
    hilfer_derivative_right,
)
from .mlf import mittag_leffler
from .spectral import Field, SpaceGrid, SpectralBasis, v_gamma_norm

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class AdjointProblem:
    order: FractionalOrder
    basis: SpectralBasis
    grid: TimeGrid
    v0: Field
    v1: Field
    gamma_choice: GammaChoice = GammaChoice.MU

    def __post_init__(self):
        object.__setattr__(self, "gamma_choice", GammaChoice(self.gamma_choice))
        for name, data in (("v0", self.v0), ("v1", self.v1)):
            if data.basis.size != self.basis.size:
                raise InvalidParameterError(name, f"expected {self.basis.size} modes")

    @property
    def gamma(self) -> float:
        return self.order.gamma(self.gamma_choice)

    @property
    def endpoint_singular(self) -> bool:
        return self.order.nu_gap > 0 and not self.v0.is_zero


def sample_adjoint(problem: AdjointProblem, times) -> np.ndarray:
    """
    Mode values v_n(t) at arbitrary times in [0, T], shape (N, len(times)).

    Values at t = T are NaN when the trace is singular there.
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    horizon = problem.grid.horizon
    if np.any(times < 0) or np.any(times > horizon):
        raise InvalidParameterError("times", f"must lie in [0, {horizon}]")
    mu, gap = problem.order.mu, problem.order.nu_gap
    lam = problem.basis.eigenvalues
    s = horizon - times
    inside = s > 0

    out = np.zeros((lam.size, times.size))
    lag = s[inside]
    arg = -np.outer(lam, lag**mu)
    v0 = problem.v0.coefficients[:, None]
    v1 = problem.v1.coefficients[:, None]
    out[:, inside] = v0 * lag ** (-gap) * mittag_leffler(mu, 1.0 - gap, arg)
    out[:, inside] += v1 * lag ** (1.0 - gap) * mittag_leffler(mu, 2.0 - gap, arg)
    if problem.endpoint_singular:
        out[:, ~inside] = np.nan
    elif gap == 0:
        out[:, ~inside] = problem.v0.coefficients[:, None]
    return out


def solve_adjoint(problem: AdjointProblem) -> ModalField:
    values = sample_adjoint(problem, problem.grid.nodes)
    singular = np.zeros(problem.grid.nodes.size, dtype=bool)
    singular[-1] = problem.endpoint_singular
    logger.debug(
        f"Adjoint solve: {problem.basis.size} modes, endpoint singular={singular[-1]}"
    )
    return ModalField(problem.basis, problem.grid, values, singular)


def adjoint_regular_part(problem: AdjointProblem) -> ModalField:
    """(T - t)^a v_n(t), finite up to t = T where it equals v0_n / Gamma(1 - a)."""
    mu, gap = problem.order.mu, problem.order.nu_gap
    lam = problem.basis.eigenvalues
    s = problem.grid.horizon - problem.grid.nodes
    arg = -np.outer(lam, s**mu)
    values = problem.v0.coefficients[:, None] * mittag_leffler(mu, 1.0 - gap, arg)
    values = values + problem.v1.coefficients[:, None] * s * mittag_leffler(mu, 2.0 - gap, arg)
    return ModalField(problem.basis, problem.grid, values)


def adjoint_trace(problem: AdjointProblem, n: int) -> GridFunction:
    """Mode n (counted from 1) with its endpoint singularity factored out."""
    regular = adjoint_regular_part(problem).mode(n)
    return GridFunction(problem.grid, regular, -problem.order.nu_gap, Anchor.RIGHT)


def adjoint_final_conditions(
    problem: AdjointProblem, solution: Optional[ModalField] = None
) -> Tuple[ModalField, ModalField]:
    """
    Closed forms of I_{t,T}^a v and D_{t,T}^{1-a} v on the grid:

        v0 E_{mu,1}(-lam s^mu) + v1 s E_{mu,2}(-lam s^mu),
        -v0 lam s^(mu-1) E_{mu,mu}(-lam s^mu) + v1 E_{mu,1}(-lam s^mu).

    Both equal (v0, v1) at t = T.
    """
    if solution is not None and solution.coefficients.shape[0] != problem.basis.size:
        raise InvalidParameterError("solution", "does not belong to this problem")
    mu = problem.order.mu
    lam = problem.basis.eigenvalues
    s = problem.grid.horizon - problem.grid.nodes
    arg = -np.outer(lam, s**mu)
    v0 = problem.v0.coefficients[:, None]
    v1 = problem.v1.coefficients[:, None]
    smoothed = v0 * mittag_leffler(mu, 1.0, arg) + v1 * s * mittag_leffler(mu, 2.0, arg)
    rate = -v0 * lam[:, None] * s ** (mu - 1.0) * mittag_leffler(mu, mu, arg)
    rate = rate + v1 * mittag_leffler(mu, 1.0, arg)
    return (
        ModalField(problem.basis, problem.grid, smoothed),
        ModalField(problem.basis, problem.grid, rate),
    )


def restrict_to_omega(solution: ModalField, omega_grid: SpaceGrid) -> np.ndarray:
    """Samples v(x_p, t_j) on omega nodes by time nodes, shape (P, M + 1)."""
    if omega_grid.is_empty:
        return np.zeros((0, solution.grid.nodes.size))
    return solution.basis.evaluate(omega_grid.nodes).T @ solution.coefficients


@dataclass(frozen=True)
class AdjointNormReport:
    state_constant: float
    rate_constant: float

    @property
    def holds(self) -> bool:
        return math.isfinite(self.state_constant) and math.isfinite(self.rate_constant)


def adjoint_norm_checks(problem: AdjointProblem) -> AdjointNormReport:
    """
    Fit C in ||v(t)||^2_{V_gamma} <= C (T-t)^(-2a) (||v0||^2_{V_gamma} + ||v1||^2)
    and ||D_{t,T}^{1-a} v(t)||^2 <= C (||v0||^2_{V_gamma} + ||v1||^2).
    """
    gamma = problem.gamma
    data = v_gamma_norm(problem.v0, gamma) ** 2 + v_gamma_norm(problem.v1, 0.0) ** 2
    if data == 0:
        return AdjointNormReport(0.0, 0.0)
    s = problem.grid.horizon - problem.grid.nodes[:-1]
    state = solve_adjoint(problem).v_gamma_norms(gamma)[:-1] ** 2
    state_constant = float(np.max(state * s ** (2.0 * problem.order.nu_gap) / data))
    _, rate = adjoint_final_conditions(problem)
    rate_constant = float(np.max(rate.v_gamma_norms(0.0) ** 2) / data)
    logger.info(
        f"Adjoint norm constants: state={state_constant:.6e}, rate={rate_constant:.6e}"
    )
    return AdjointNormReport(state_constant, rate_constant)


def backward_pde_residual(
    problem: AdjointProblem, solution: Optional[ModalField] = None
) -> float:
    """Discrete V_{-gamma} norm of D_{t,T}^{mu,1-nu} v + A v on the interior nodes."""
    solution = solve_adjoint(problem) if solution is None else solution
    dual = problem.order.dual()
    lam = problem.basis.eigenvalues
    nodes = problem.grid.nodes

    derivative = np.zeros_like(solution.coefficients)
    for n in range(1, lam.size + 1):
        derivative[n - 1] = hilfer_derivative_right(dual, adjoint_trace(problem, n)).samples()
    residual = derivative + lam[:, None] * solution.coefficients
    return interior_dual_norm(residual, nodes, lam, problem.gamma)

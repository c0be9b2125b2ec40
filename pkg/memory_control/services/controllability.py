"""
Control-to-memory map, observation map and regularised control synthesis.

Controls are piecewise constant in time on J cells and spanned in space by
chi_omega phi_1 .. chi_omega phi_M. The memory state pairs with the adjoint
final data through

    sum_n mem_rate_n v0_n + mem_n v1_n = int_0^T int_omega f v dx dt.
"""

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Sequence

import numpy as np
from scipy.sparse.linalg import LinearOperator, cg

from ..conf import numeric_default
from ..exceptions import ControlSynthesisError, InvalidParameterError, NumericalError
from .adjoint import AdjointProblem, sample_adjoint
from .forward import ControlField, ForwardProblem, MemoryState, memory_state
from .fracops import FractionalOrder, GammaChoice, TimeGrid, cell_quadrature
from .spectral import Field, SpaceGrid, SpectralBasis, Subdomain

logger = logging.getLogger(__name__)

DEFAULT_EPS_PATH = [10.0 ** (-k) for k in range(1, 9)]
UCP_FLOOR = 1e-14


def _parallel_map(func: Callable, items: Iterable, threads: int) -> List:
    """Map in submission order, so results do not depend on the thread count."""
    items = list(items)
    if threads <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, items))


@dataclass(frozen=True, eq=False)
class ControlTemplate:
    order: FractionalOrder
    basis: SpectralBasis
    horizon: float
    omega: Subdomain
    cells: int = 16
    space_functions: int = 8
    gamma_choice: GammaChoice = GammaChoice.MU
    time_steps: int = 32
    gauss_points: int = 8
    omega_points: int = 16
    threads: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "gamma_choice", GammaChoice(self.gamma_choice))
        if self.threads is None:
            object.__setattr__(self, "threads", int(numeric_default("DEFAULT_THREADS", 1)))
        if self.horizon <= 0:
            raise InvalidParameterError("grid.horizon", f"must be positive, got {self.horizon}")
        if self.cells < 1:
            raise InvalidParameterError("control.cells", f"must be positive, got {self.cells}")
        if not 1 <= self.space_functions <= self.basis.size:
            raise InvalidParameterError(
                "control.space_functions", f"must lie in [1, {self.basis.size}]"
            )
        if self.time_steps < 2 or self.gauss_points < 1 or self.omega_points < 1:
            raise InvalidParameterError("grid.steps", "quadrature sizes must be positive")
        if self.threads < 1:
            raise InvalidParameterError("run.threads", f"must be positive, got {self.threads}")
        self.omega.validate_within(self.basis.length)

    @property
    def gamma(self) -> float:
        return self.order.gamma(self.gamma_choice)

    @property
    def cell_edges(self) -> np.ndarray:
        return np.linspace(0.0, self.horizon, self.cells + 1)

    @property
    def grid(self) -> TimeGrid:
        return TimeGrid.uniform(self.horizon, self.time_steps)

    @property
    def columns(self) -> int:
        return self.cells * self.space_functions

    def omega_grid(self) -> SpaceGrid:
        return self.omega.quadrature(self.omega_points)

    def target_weights(self) -> np.ndarray:
        """lambda^gamma on the mem block and 1 on the mem_rate block."""
        return np.concatenate([self.basis.eigenvalues**self.gamma, np.ones(self.basis.size)])


@dataclass(frozen=True, eq=False)
class ControlMap:
    """Matrix of f -> (mem, mem_rate) with rows [mem; mem_rate], columns j-major."""

    template: ControlTemplate
    matrix: np.ndarray
    weights: np.ndarray

    def apply(self, coefficients) -> np.ndarray:
        return self.matrix @ np.ravel(coefficients)

    def control_field(self, coefficients) -> ControlField:
        template = self.template
        shaped = np.reshape(coefficients, (template.cells, template.space_functions))
        return ControlField(template.omega, template.cell_edges, shaped)

    def memory_state(self, coefficients) -> MemoryState:
        return MemoryState.from_vector(self.template.basis, self.apply(coefficients))


@dataclass(frozen=True, eq=False)
class ObservationMap:
    """
    Matrix of (v0, v1) -> v on the omega x (0, T) quadrature nodes.

    Rows run time-major over (t_q, x_p); weights hold the matching products of
    time and space quadrature weights.
    """

    template: ControlTemplate
    matrix: np.ndarray
    weights: np.ndarray
    times: np.ndarray
    space_nodes: np.ndarray
    cell_index: np.ndarray = field(repr=False)

    def apply(self, v0: Field, v1: Field) -> np.ndarray:
        return self.matrix @ np.concatenate([v0.coefficients, v1.coefficients])

    def control_samples(self, coefficients) -> np.ndarray:
        """Samples of the control with the given coefficients on the same nodes."""
        template = self.template
        shaped = np.reshape(coefficients, (template.cells, template.space_functions))
        shapes = template.basis.evaluate(self.space_nodes, template.space_functions)
        return (shaped[self.cell_index] @ shapes).ravel()

    def control_matrix(self) -> np.ndarray:
        """Synthesis matrix from control coefficients to node samples."""
        template = self.template
        unit = np.eye(template.columns)
        return np.column_stack([self.control_samples(unit[k]) for k in range(template.columns)])


def assemble_control_map(template: ControlTemplate) -> ControlMap:
    """Columns are the memory states of the JM unit controls, with u0 = u1 = 0."""
    basis = template.basis
    grid = template.grid
    zero = Field.zero(basis)
    edges = template.cell_edges

    def column(index: int) -> np.ndarray:
        coefficients = np.zeros((template.cells, template.space_functions))
        coefficients.flat[index] = 1.0
        problem = ForwardProblem(
            template.order,
            basis,
            grid,
            zero,
            zero,
            ControlField(template.omega, edges, coefficients),
            template.gamma_choice,
            omega_points=template.omega_points,
        )
        return memory_state(problem).vector()

    started = time.perf_counter()
    columns = _parallel_map(column, range(template.columns), template.threads)
    matrix = np.column_stack(columns)
    logger.info(
        f"Control map assembled: {matrix.shape[0]}x{matrix.shape[1]} "
        f"in {time.perf_counter() - started:.2f}s ({template.threads} threads)"
    )
    return ControlMap(template, matrix, template.target_weights())


def assemble_observation_map(template: ControlTemplate) -> ObservationMap:
    """Rows come from the 2N adjoint solutions with unit final data."""
    basis = template.basis
    size = basis.size
    edges = np.union1d(template.grid.nodes, template.cell_edges)
    times, time_weights = cell_quadrature(
        edges, template.gauss_points, right_exponent=template.order.nu_gap
    )
    omega_grid = template.omega_grid()
    shapes = basis.evaluate(omega_grid.nodes) if not omega_grid.is_empty else np.zeros((size, 0))
    unit = np.eye(size)
    zero = Field.zero(basis)

    def column(index: int) -> np.ndarray:
        mode = Field(basis, unit[index % size])
        data = (mode, zero) if index < size else (zero, mode)
        problem = AdjointProblem(template.order, basis, template.grid, *data, template.gamma_choice)
        trace = sample_adjoint(problem, times)
        return (trace.T @ shapes).ravel()

    matrix = np.column_stack(_parallel_map(column, range(2 * size), template.threads))
    weights = np.outer(time_weights, omega_grid.weights).ravel()
    cell_index = np.clip(
        np.searchsorted(template.cell_edges, times, side="right") - 1, 0, template.cells - 1
    )
    logger.info(f"Observation map assembled: {matrix.shape[0]}x{matrix.shape[1]}")
    return ObservationMap(template, matrix, weights, times, omega_grid.nodes, cell_index)


def duality_residual(
    order: FractionalOrder,
    basis: SpectralBasis,
    grid: TimeGrid,
    f: ControlField,
    v0: Field,
    v1: Field,
    gauss_points: int = 8,
    omega_points: int = 16,
) -> float:
    """
    |sum_n (mem_rate_n v0_n + mem_n v1_n) - int int_omega f v| for u0 = u1 = 0.

    The space-time integral uses Gauss rules on every grid and control cell,
    with Gauss-Jacobi on the last cell for the (T - t)^(-a) endpoint behaviour.
    """
    zero = Field.zero(basis)
    forward = ForwardProblem(order, basis, grid, zero, zero, f, omega_points=omega_points)
    state = memory_state(forward)
    lhs = state.mem_rate.coefficients @ v0.coefficients + state.mem.coefficients @ v1.coefficients

    omega_grid = f.omega.quadrature(omega_points)
    if omega_grid.is_empty:
        return abs(lhs)
    edges = np.union1d(grid.nodes, f.cell_edges)
    times, time_weights = cell_quadrature(edges, gauss_points, right_exponent=order.nu_gap)
    trace = sample_adjoint(AdjointProblem(order, basis, grid, v0, v1), times)
    adjoint = basis.evaluate(omega_grid.nodes).T @ trace
    control = f.evaluate(basis, omega_grid.nodes, times)
    rhs = float(omega_grid.weights @ (control * adjoint) @ time_weights)
    return abs(lhs - rhs)


def _weighted(obs: ObservationMap) -> np.ndarray:
    return np.sqrt(obs.weights)[:, None] * obs.matrix


def ucp_smallest_singular_value(obs: ObservationMap) -> float:
    """Smallest singular value of the weighted observation matrix; 0 for an empty omega."""
    rows, cols = obs.matrix.shape
    if rows < cols:
        return 0.0
    return float(np.linalg.svd(_weighted(obs), compute_uv=False)[-1])


@dataclass(frozen=True)
class UcpDiagnosis:
    sigma_min: float
    injective: bool
    kernel: Optional[np.ndarray] = None


def ucp_diagnose(obs: ObservationMap, floor: float = UCP_FLOOR) -> UcpDiagnosis:
    """Injectivity verdict, with the offending (v0, v1) direction when it fails."""
    rows, cols = obs.matrix.shape
    if rows == 0:
        kernel = np.zeros(cols)
        kernel[0] = 1.0
        return UcpDiagnosis(0.0, False, kernel)
    _, singular, vt = np.linalg.svd(_weighted(obs), full_matrices=rows < cols)
    sigma = float(singular[-1]) if rows >= cols else 0.0
    if sigma >= floor:
        return UcpDiagnosis(sigma, True)
    logger.warning(f"Unique continuation fails at this truncation: sigma_min={sigma:.3e}")
    return UcpDiagnosis(sigma, False, vt[-1])


def _rotated_power(eta: np.ndarray, exponent: float) -> np.ndarray:
    """eta^exponent with the branch cut on the negative imaginary axis."""
    angle = np.angle(eta)
    angle = np.where(angle <= -0.5 * math.pi, angle + 2.0 * math.pi, angle)
    return np.abs(eta) ** exponent * np.exp(1j * exponent * angle)


@dataclass(frozen=True)
class ResidueReport:
    eigenvalue: float
    modes: np.ndarray
    residues: np.ndarray
    expected: np.ndarray
    observed_norm: float


def residue_diagnostic(
    template: ControlTemplate, v0: Field, v1: Field, points: int = 64
) -> List[ResidueReport]:
    """
    Residues of the Laplace-transformed observation at eta = -lambda_l.

    In s = T - t the transformed mode is (v0 eta^((b+1)/mu) + v1 eta^(b/mu)) / (eta + lambda)
    with eta = z^mu and b = (1 - nu)(mu - 2). Each residue is a trapezoid rule on a
    small circle and is compared with the principal-branch combination.
    """
    order = template.order
    mu = order.mu
    b = (1.0 - order.nu) * (mu - 2.0)
    lam = template.basis.eigenvalues
    omega_grid = template.omega_grid()
    shapes = (
        template.basis.evaluate(omega_grid.nodes)
        if not omega_grid.is_empty
        else np.zeros((lam.size, 0))
    )
    distinct = np.array([lam[group[0]] for group in template.basis.clusters()])
    angles = 2.0 * math.pi * np.arange(points) / points

    reports = []
    for k, group in enumerate(template.basis.clusters()):
        centre = distinct[k]
        neighbours = np.abs(np.delete(distinct, k) - centre)
        radius = 0.5 * min(centre, float(np.min(neighbours)) if neighbours.size else centre)
        offset = radius * np.exp(1j * angles)
        eta = -centre + offset
        numerator = (
            v0.coefficients[:, None] * _rotated_power(eta, (b + 1.0) / mu)[None, :]
            + v1.coefficients[:, None] * _rotated_power(eta, b / mu)[None, :]
        )
        transformed = numerator / (eta[None, :] + lam[:, None])
        residues = np.mean(transformed * offset[None, :], axis=1)

        pole = complex(-centre)
        expected = v0.coefficients[group] * pole ** ((b + 1.0) / mu)
        expected = expected + v1.coefficients[group] * pole ** (b / mu)
        observed = shapes.T @ residues if shapes.size else np.zeros(0)
        observed_norm = float(np.max(np.abs(observed))) if observed.size else 0.0
        reports.append(
            ResidueReport(float(centre), group, residues[group], expected, observed_norm)
        )
    return reports


def pairing_gap(cm: ControlMap, om: ObservationMap, coefficients, v0: Field, v1: Field) -> float:
    """|<F c, (v0, v1)> - <f, F*(v0, v1)>_{L^2(omega x (0, T))}| for one probe."""
    size = cm.template.basis.size
    state = cm.apply(coefficients)
    lhs = state[size:] @ v0.coefficients + state[:size] @ v1.coefficients
    rhs = float(np.sum(om.weights * om.control_samples(coefficients) * om.apply(v0, v1)))
    return abs(lhs - rhs)


def duality_adjointness_residual(
    cm: ControlMap, om: ObservationMap, probes: int = 10, seed: int = 0
) -> float:
    rng = np.random.default_rng(seed)
    basis = cm.template.basis
    worst = 0.0
    for _ in range(probes):
        coefficients = rng.standard_normal(cm.template.columns)
        v0 = Field.random(basis, rng)
        v1 = Field.random(basis, rng)
        worst = max(worst, pairing_gap(cm, om, coefficients, v0, v1))
    return worst


@dataclass(frozen=True, eq=False)
class SynthesisResult:
    control: ControlField
    coefficients: np.ndarray
    residual: float
    iterations: int
    converged: bool
    control_norm: float


def synthesize_control(
    cm: ControlMap,
    target: MemoryState,
    reg: float,
    strict: bool = False,
    rtol: Optional[float] = None,
) -> SynthesisResult:
    """
    Tikhonov control: minimise ||W (F c - y)||^2 + reg ||c||^2 by CG on the
    normal equations, with W = diag(lambda^gamma, 1).
    """
    if not reg > 0:
        raise InvalidParameterError("run.eps", f"must be positive, got {reg}")
    rtol = float(numeric_default("CG_RELATIVE_TOLERANCE", 1e-10)) if rtol is None else rtol
    maxiter = int(numeric_default("CG_ITERATION_FACTOR", 10)) * cm.template.columns

    weighted = cm.weights[:, None] * cm.matrix
    goal = cm.weights * target.vector()
    columns = weighted.shape[1]
    normal = LinearOperator(
        (columns, columns),
        matvec=lambda c: weighted.T @ (weighted @ c) + reg * c,
        dtype=float,
    )
    counter = {"iterations": 0}

    def count(_):
        counter["iterations"] += 1

    solution, info = cg(
        normal, weighted.T @ goal, rtol=rtol, atol=0.0, maxiter=maxiter, callback=count
    )
    if info < 0:
        raise NumericalError(f"CG received invalid input (info={info})")

    residual = float(np.linalg.norm(weighted @ solution - goal))
    iterations = counter["iterations"]
    converged = info == 0
    if not converged:
        logger.warning(
            f"CG stopped after {iterations} iterations without converging "
            f"(eps={reg:.1e}, residual={residual:.3e})"
        )
        if strict:
            raise ControlSynthesisError(residual, iterations)
    return SynthesisResult(
        control=cm.control_field(solution),
        coefficients=solution,
        residual=residual,
        iterations=iterations,
        converged=converged,
        control_norm=float(np.linalg.norm(solution)),
    )


@dataclass(frozen=True)
class ReportRow:
    target_id: str
    eps: float
    residual: float
    control_norm: float
    cg_iters: int
    runtime: float


def controllability_report(
    template: ControlTemplate,
    targets: Dict[str, MemoryState],
    eps_path: Optional[Sequence[float]] = None,
    control_map: Optional[ControlMap] = None,
    rtol: Optional[float] = None,
) -> List[ReportRow]:
    """Synthesis residual and control size along the eps path, per target."""
    eps_path = list(numeric_default("EPS_PATH", DEFAULT_EPS_PATH) if eps_path is None else eps_path)
    cm = assemble_control_map(template) if control_map is None else control_map
    rows = []
    for target_id, target in targets.items():
        for eps in eps_path:
            started = time.perf_counter()
            result = synthesize_control(cm, target, eps, rtol=rtol)
            rows.append(
                ReportRow(
                    target_id,
                    float(eps),
                    result.residual,
                    result.control_norm,
                    result.iterations,
                    time.perf_counter() - started,
                )
            )
            logger.info(
                f"target={target_id} eps={eps:.1e} residual={result.residual:.6e} "
                f"iterations={result.iterations}"
            )
    return rows


def gramian(cm: ControlMap) -> np.ndarray:
    """W F F^T W, symmetric positive semidefinite."""
    weighted = cm.weights[:, None] * cm.matrix
    return weighted @ weighted.T

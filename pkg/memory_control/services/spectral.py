"""
Spectral data of the operator A, spatial quadrature and modal fields.

A is given entirely by its eigenpairs (lambda_n, phi_n); nothing is assembled.
"""

import logging
import math
from dataclasses import dataclass
from functools import partial
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import special

from ..exceptions import InvalidParameterError

logger = logging.getLogger(__name__)

# (mode numbers starting at 1, points) -> array of shape (modes, points)
Evaluator = Callable[[np.ndarray, np.ndarray], np.ndarray]


def _sine_modes(length: float, modes: np.ndarray, x: np.ndarray) -> np.ndarray:
    return math.sqrt(2.0 / length) * np.sin(np.outer(modes, x) * (math.pi / length))


@dataclass(frozen=True, eq=False)
class SpectralBasis:
    eigenvalues: np.ndarray
    evaluator: Evaluator
    length: float
    name: str = "custom"

    def __post_init__(self):
        eigenvalues = np.array(self.eigenvalues, dtype=float)
        if eigenvalues.ndim != 1 or eigenvalues.size == 0:
            raise InvalidParameterError("basis.modes", "need at least one eigenvalue")
        if eigenvalues[0] <= 0:
            raise InvalidParameterError(
                "basis.eigenvalues", f"lambda_1 must be positive, got {eigenvalues[0]}"
            )
        if np.any(np.diff(eigenvalues) < 0):
            raise InvalidParameterError("basis.eigenvalues", "must be nondecreasing")
        if self.length <= 0:
            raise InvalidParameterError("basis.length", f"must be positive, got {self.length}")
        eigenvalues.setflags(write=False)
        object.__setattr__(self, "eigenvalues", eigenvalues)

    @property
    def size(self) -> int:
        return self.eigenvalues.size

    def evaluate(self, x, modes: Optional[int] = None) -> np.ndarray:
        """Values phi_n(x) for n = 1..modes as a (modes, len(x)) array."""
        count = self.size if modes is None else modes
        return self.evaluator(np.arange(1, count + 1), np.atleast_1d(np.asarray(x, dtype=float)))

    def restrict(self, modes: int) -> "SpectralBasis":
        if not 1 <= modes <= self.size:
            raise InvalidParameterError("basis.modes", f"must lie in [1, {self.size}], got {modes}")
        return SpectralBasis(self.eigenvalues[:modes], self.evaluator, self.length, self.name)

    def clusters(self, rtol: float = 1e-10) -> List[np.ndarray]:
        """Index groups of (numerically) repeated eigenvalues, in order."""
        groups = [[0]]
        for n in range(1, self.size):
            previous = self.eigenvalues[groups[-1][0]]
            if abs(self.eigenvalues[n] - previous) <= rtol * previous:
                groups[-1].append(n)
            else:
                groups.append([n])
        return [np.array(group) for group in groups]


def builtin_dirichlet_laplacian(length: float, modes: int) -> SpectralBasis:
    """-d^2/dx^2 on (0, L) with Dirichlet conditions: lambda_n = (n pi / L)^2."""
    if length <= 0:
        raise InvalidParameterError("basis.length", f"must be positive, got {length}")
    if modes < 1:
        raise InvalidParameterError("basis.modes", f"must be at least 1, got {modes}")
    eigenvalues = (np.arange(1, modes + 1) * math.pi / length) ** 2
    return SpectralBasis(eigenvalues, partial(_sine_modes, length), length, "dirichlet")


def builtin_spectral_fractional(base: SpectralBasis, s: float) -> SpectralBasis:
    """Spectral fractional power A^s: same eigenfunctions, eigenvalues lambda_n^s."""
    if not 0 < s <= 1:
        raise InvalidParameterError("basis.s", f"must lie in (0, 1], got {s}")
    if s == 1:
        return base
    return SpectralBasis(base.eigenvalues**s, base.evaluator, base.length, f"{base.name}^{s:g}")


@dataclass(frozen=True, eq=False)
class SpaceGrid:
    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float).ravel()
        weights = np.array(self.weights, dtype=float).ravel()
        if nodes.shape != weights.shape:
            raise InvalidParameterError("space_grid", "nodes and weights differ in length")
        if np.any(weights <= 0):
            raise InvalidParameterError("space_grid.weights", "must be positive")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @property
    def measure(self) -> float:
        return float(np.sum(self.weights))

    @property
    def is_empty(self) -> bool:
        return self.nodes.size == 0

    @classmethod
    def trapezoid(cls, length: float, intervals: int) -> "SpaceGrid":
        """Trapezoid rule on [0, L]; exact for phi_n phi_m whenever n + m < 2P."""
        if intervals < 1:
            raise InvalidParameterError("basis.space_points", f"must be positive, got {intervals}")
        nodes = np.linspace(0.0, length, intervals + 1)
        weights = np.full(nodes.size, length / intervals)
        weights[[0, -1]] *= 0.5
        return cls(nodes, weights)

    @classmethod
    def gauss(
        cls, intervals: Sequence[Tuple[float, float]], points: int, panels: int = 8
    ) -> "SpaceGrid":
        """Composite Gauss-Legendre rule on a union of intervals."""
        x, w = special.roots_legendre(points)
        nodes, weights = [], []
        for lo, hi in intervals:
            edges = np.linspace(lo, hi, panels + 1)
            half = 0.5 * np.diff(edges)[:, None]
            mid = 0.5 * (edges[1:] + edges[:-1])[:, None]
            nodes.append((half * x + mid).ravel())
            weights.append((half * w).ravel())
        if not nodes:
            return cls(np.empty(0), np.empty(0))
        return cls(np.concatenate(nodes), np.concatenate(weights))


@dataclass(frozen=True)
class Subdomain:
    """The control region omega as a union of disjoint closed sub-intervals."""

    intervals: Tuple[Tuple[float, float], ...]

    def __post_init__(self):
        intervals = tuple(sorted((float(lo), float(hi)) for lo, hi in self.intervals))
        for lo, hi in intervals:
            if not lo < hi:
                raise InvalidParameterError("control.omega", f"empty interval ({lo}, {hi})")
        for (_, first_hi), (second_lo, _) in zip(intervals, intervals[1:]):
            if second_lo < first_hi:
                raise InvalidParameterError("control.omega", "intervals overlap")
        object.__setattr__(self, "intervals", intervals)

    @classmethod
    def whole(cls, basis: SpectralBasis) -> "Subdomain":
        return cls(((0.0, basis.length),))

    @property
    def is_empty(self) -> bool:
        return not self.intervals

    @property
    def measure(self) -> float:
        return sum(hi - lo for lo, hi in self.intervals)

    def validate_within(self, length: float):
        for lo, hi in self.intervals:
            if lo < 0 or hi > length:
                raise InvalidParameterError(
                    "control.omega", f"({lo}, {hi}) is not inside (0, {length})"
                )

    def indicator(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        inside = np.zeros(x.shape, dtype=bool)
        for lo, hi in self.intervals:
            inside |= (x >= lo) & (x <= hi)
        return inside

    def quadrature(self, points_per_interval: int = 16, panels: int = 8) -> SpaceGrid:
        return SpaceGrid.gauss(self.intervals, points_per_interval, panels)


@dataclass(frozen=True, eq=False)
class Field:
    """Spectral coefficients u_n = (u, phi_n) of a spatial function."""

    basis: SpectralBasis
    coefficients: np.ndarray

    def __post_init__(self):
        coefficients = np.array(self.coefficients, dtype=float).ravel()
        if coefficients.size != self.basis.size:
            raise InvalidParameterError(
                "coefficients", f"expected {self.basis.size} values, got {coefficients.size}"
            )
        object.__setattr__(self, "coefficients", coefficients)

    @classmethod
    def zero(cls, basis: SpectralBasis) -> "Field":
        return cls(basis, np.zeros(basis.size))

    @classmethod
    def mode(cls, basis: SpectralBasis, k: int) -> "Field":
        """The eigenfunction phi_k, with k counted from 1."""
        if not 1 <= k <= basis.size:
            raise InvalidParameterError("mode", f"must lie in [1, {basis.size}], got {k}")
        coefficients = np.zeros(basis.size)
        coefficients[k - 1] = 1.0
        return cls(basis, coefficients)

    @classmethod
    def random(cls, basis: SpectralBasis, rng: np.random.Generator) -> "Field":
        return cls(basis, rng.standard_normal(basis.size))

    @property
    def is_zero(self) -> bool:
        return not np.any(self.coefficients)

    def __add__(self, other: "Field") -> "Field":
        return Field(self.basis, self.coefficients + other.coefficients)

    def scaled(self, factor: float) -> "Field":
        return Field(self.basis, factor * self.coefficients)


def project(samples, basis: SpectralBasis, grid: SpaceGrid) -> Field:
    """Quadrature inner products (u, phi_n)."""
    samples = np.asarray(samples, dtype=float)
    if samples.shape != grid.nodes.shape:
        raise InvalidParameterError("samples", "must match the space grid")
    return Field(basis, basis.evaluate(grid.nodes) @ (grid.weights * samples))


def synthesize(field: Field, grid) -> np.ndarray:
    """Point values sum_n u_n phi_n(x) on a SpaceGrid or an array of points."""
    nodes = grid.nodes if isinstance(grid, SpaceGrid) else np.asarray(grid, dtype=float)
    return field.coefficients @ field.basis.evaluate(nodes)


def v_gamma_norm(u: Field, gamma: float) -> float:
    """(sum lambda_n^(2 gamma) u_n^2)^(1/2); negative gamma gives the dual norm."""
    return float(np.sqrt(np.sum(u.basis.eigenvalues ** (2.0 * gamma) * u.coefficients**2)))


def bilinear_form(u: Field, v: Field) -> float:
    return float(np.sum(u.basis.eigenvalues * u.coefficients * v.coefficients))


def l2_pairing(u: Field, v: Field) -> float:
    return float(u.coefficients @ v.coefficients)


def gram_matrix(basis: SpectralBasis, grid: SpaceGrid, columns: Optional[int] = None) -> np.ndarray:
    """
    Quadrature Gram matrix (phi_n, phi_m) over the grid, of shape (N, columns).

    On a grid restricted to omega this is (phi_n, chi_omega phi_m).
    """
    count = basis.size if columns is None else columns
    if grid.is_empty:
        return np.zeros((basis.size, count))
    values = basis.evaluate(grid.nodes)
    return (values * grid.weights) @ values[:count].T


def orthonormality_residual(basis: SpectralBasis, grid: SpaceGrid) -> float:
    gram = gram_matrix(basis, grid)
    return float(np.max(np.abs(gram - np.eye(basis.size))))

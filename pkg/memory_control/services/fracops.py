"""
Discrete Riemann-Liouville and Hilfer operators on a time grid.

Integrals use product integration: grid values carry a piecewise-linear
interpolant and the kernel moments against it are integrated exactly on every
cell. A GridFunction may declare a weak endpoint singularity dist^p in front of
its values; the moments then come from regularised incomplete beta functions,
so data such as t^(mu-2) E(-lam t^mu) is integrated without losing order.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, List, Sequence, Tuple

import numpy as np
from scipy import special
from scipy.interpolate import CubicSpline

from ..exceptions import InvalidParameterError

logger = logging.getLogger(__name__)


class GammaChoice(str, Enum):
    MU = "1/mu"
    HALF = "1/2"


class Anchor(str, Enum):
    LEFT = "left"
    RIGHT = "right"


@dataclass(frozen=True)
class FractionalOrder:
    mu: float
    nu: float

    def __post_init__(self):
        if not (1.0 < self.mu <= 2.0):
            raise InvalidParameterError("mu", f"must lie in (1, 2], got {self.mu}")
        if not (0.0 <= self.nu <= 1.0):
            raise InvalidParameterError("nu", f"must lie in [0, 1], got {self.nu}")

    @property
    def beta(self) -> float:
        """Memory exponent (1 - nu)(2 - mu)."""
        return (1.0 - self.nu) * (2.0 - self.mu)

    @property
    def nu_gap(self) -> float:
        return self.nu * (2.0 - self.mu)

    @property
    def gamma_mu(self) -> float:
        return 1.0 / self.mu

    @property
    def gamma_half(self) -> float:
        return 0.5

    def gamma(self, choice: GammaChoice) -> float:
        return self.gamma_mu if GammaChoice(choice) is GammaChoice.MU else self.gamma_half

    def dual(self) -> "FractionalOrder":
        """Order (mu, 1 - nu) of the right-hand derivative in the adjoint system."""
        return FractionalOrder(self.mu, 1.0 - self.nu)


@dataclass(frozen=True, eq=False)
class TimeGrid:
    nodes: np.ndarray
    grading: float = 1.0

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < 2:
            raise InvalidParameterError("grid.nodes", "need at least two nodes")
        if nodes[0] != 0.0:
            raise InvalidParameterError("grid.nodes", "the first node must be t0 = 0")
        if np.any(np.diff(nodes) <= 0):
            raise InvalidParameterError("grid.nodes", "nodes must be strictly increasing")
        if self.grading < 1.0:
            raise InvalidParameterError("grid.grading", f"must be >= 1, got {self.grading}")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)

    @classmethod
    def uniform(cls, horizon: float, steps: int) -> "TimeGrid":
        return cls.graded(horizon, steps, 1.0)

    @classmethod
    def graded(cls, horizon: float, steps: int, grading: float) -> "TimeGrid":
        """Nodes t_j = T (j / M)^r clustered near t = 0."""
        if horizon <= 0:
            raise InvalidParameterError("grid.horizon", f"must be positive, got {horizon}")
        if steps < 2:
            raise InvalidParameterError("grid.steps", f"must be at least 2, got {steps}")
        nodes = horizon * (np.arange(steps + 1) / steps) ** grading
        nodes[-1] = horizon
        return cls(nodes, grading)

    @staticmethod
    def recommended_grading(order: FractionalOrder) -> float:
        return min(2.0 / order.beta, 4.0) if order.beta > 0 else 1.0

    @property
    def horizon(self) -> float:
        return float(self.nodes[-1])

    @property
    def steps(self) -> int:
        return self.nodes.size - 1

    def is_uniform(self) -> bool:
        spacing = np.diff(self.nodes)
        return bool(np.allclose(spacing, spacing[0], rtol=1e-10, atol=0.0))

    def mirrored(self) -> "TimeGrid":
        """The grid under s = T - t, still increasing from 0."""
        nodes = self.horizon - self.nodes[::-1]
        nodes[0] = 0.0
        return TimeGrid(nodes, self.grading)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """
    Samples dist^p * values on a time grid.

    dist is the distance to the anchor endpoint (t for LEFT, T - t for RIGHT);
    p = singular_exponent, which defaults to 0 for plain samples.
    """

    grid: TimeGrid
    values: np.ndarray
    singular_exponent: float = 0.0
    anchor: Anchor = field(default=Anchor.LEFT)

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != self.grid.nodes.shape:
            raise InvalidParameterError(
                "values", f"expected {self.grid.nodes.size} samples, got {values.size}"
            )
        if self.singular_exponent <= -1.0:
            raise InvalidParameterError(
                "singular_exponent", f"must exceed -1, got {self.singular_exponent}"
            )
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "anchor", Anchor(self.anchor))

    @classmethod
    def from_callable(cls, grid: TimeGrid, func: Callable[[np.ndarray], np.ndarray]):
        return cls(grid, func(grid.nodes))

    def distance(self) -> np.ndarray:
        if self.anchor is Anchor.LEFT:
            return self.grid.nodes
        return self.grid.horizon - self.grid.nodes

    def samples(self) -> np.ndarray:
        """Full function values; NaN where the singular factor blows up."""
        if self.singular_exponent == 0.0:
            return self.values.copy()
        dist = self.distance()
        with np.errstate(divide="ignore", invalid="ignore"):
            out = dist**self.singular_exponent * self.values
        if self.singular_exponent < 0:
            out[dist == 0.0] = np.nan
        return out

    def mirrored(self) -> "GridFunction":
        flipped = Anchor.RIGHT if self.anchor is Anchor.LEFT else Anchor.LEFT
        return GridFunction(
            self.grid.mirrored(), self.values[::-1], self.singular_exponent, flipped
        )


def _check_order(alpha: float, name: str = "alpha"):
    if not math.isfinite(alpha) or alpha < 0:
        raise InvalidParameterError(name, f"must be nonnegative, got {alpha}")


def _left_weights(nodes: np.ndarray, alpha: float, exponent: float) -> np.ndarray:
    """Product-integration matrix W with (I^alpha g)(t_j) = sum_k W[j, k] g_k."""
    target = nodes[:, None]
    start = nodes[None, :-1]
    end = nodes[None, 1:]
    width = np.diff(nodes)[None, :]
    weights = np.zeros((nodes.size, nodes.size))

    if exponent == 0.0:
        far = np.clip(target - start, 0.0, None)
        near = np.clip(target - end, 0.0, None)
        zeroth = (far**alpha - near**alpha) / alpha
        first = far * zeroth - (far ** (alpha + 1) - near ** (alpha + 1)) / (alpha + 1)
        weights[:, :-1] += zeroth - first / width
        weights[:, 1:] += first / width
    else:
        # int_0^x (t - s)^(alpha-1) s^q ds = t^(alpha+q) B(q+1, alpha) I_{x/t}(q+1, alpha)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(target > 0, np.clip(nodes[None, :] / target, 0.0, 1.0), 0.0)

        def moment(q):
            with np.errstate(divide="ignore", invalid="ignore"):
                scale = np.where(target > 0, target ** (alpha + q), 0.0)
            scale = scale * special.beta(q + 1, alpha)
            cumulative = scale * special.betainc(q + 1, alpha, ratio)
            return np.diff(cumulative, axis=1)

        plain = moment(exponent)
        shifted = moment(exponent + 1.0)
        weights[:, :-1] += (end * plain - shifted) / width
        weights[:, 1:] += (shifted - start * plain) / width

    return weights / special.gamma(alpha)


def frac_integral_left(alpha: float, g: GridFunction) -> GridFunction:
    """Get (I_t^alpha g)(t_j) at every node by product integration."""
    _check_order(alpha)
    if alpha == 0.0:
        return g
    exponent = g.singular_exponent
    if exponent != 0.0 and g.anchor is not Anchor.LEFT:
        raise InvalidParameterError("g", "the singular factor must sit at t = 0")

    nodes = g.grid.nodes
    values = _left_weights(nodes, alpha, exponent) @ g.values
    lead = exponent + alpha
    if exponent != 0.0 and abs(lead) < 1e-14:
        values[0] = g.values[0] * special.gamma(exponent + 1.0)
    elif lead < 0:
        values[0] = np.nan
    else:
        values[0] = 0.0
    return GridFunction(g.grid, values)


def frac_integral_right(alpha: float, g: GridFunction) -> GridFunction:
    """Get (I_{t,T}^alpha g)(t_j) through the reflection s = T - t."""
    _check_order(alpha)
    if alpha == 0.0:
        return g
    if g.singular_exponent != 0.0 and g.anchor is not Anchor.RIGHT:
        raise InvalidParameterError("g", "the singular factor must sit at t = T")
    reflected = frac_integral_left(alpha, g.mirrored())
    return GridFunction(g.grid, reflected.values[::-1])


def fd_weights(x0: float, stencil: np.ndarray, order: int) -> np.ndarray:
    """Finite-difference weights for the derivative of given order at x0."""
    n = stencil.size
    c = np.zeros((n, order + 1))
    c[0, 0] = 1.0
    c1 = 1.0
    c4 = stencil[0] - x0
    for i in range(1, n):
        mn = min(i, order)
        c2 = 1.0
        c5 = c4
        c4 = stencil[i] - x0
        for j in range(i):
            c3 = stencil[i] - stencil[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, order]


def grid_derivative(values: np.ndarray, nodes: np.ndarray, order: int) -> np.ndarray:
    """
    Derivative of order 1 or 2 at every node: 3-point centred stencils in the
    interior, one-sided stencils (3 points for order 1, 4 for order 2) at the ends.
    """
    size = nodes.size
    width = order + 2
    if size < width:
        raise InvalidParameterError("grid.steps", f"need at least {width} nodes to differentiate")
    out = np.empty(size)
    for j in range(size):
        if 0 < j < size - 1:
            index = np.arange(j - 1, j + 2)
        elif j == 0:
            index = np.arange(0, width)
        else:
            index = np.arange(size - width, size)
        out[j] = fd_weights(nodes[j], nodes[index], order) @ values[index]
    return out


def leading_exponent(rest: np.ndarray, nodes: np.ndarray) -> float:
    """
    Power p in rest ~ c t^p near t = 0, read off the first two nonzero nodes.

    Estimates within 0.1 of a positive integer snap to it. A vanishing or
    sign-changing start falls back to p = 1.
    """
    first, second = rest[1], rest[2]
    if first == 0.0 or second == 0.0 or np.sign(first) != np.sign(second):
        return 1.0
    power = math.log(second / first) / math.log(nodes[2] / nodes[1])
    if not math.isfinite(power) or power <= 0.0:
        return 1.0
    nearest = round(power)
    if nearest >= 1 and abs(power - nearest) <= 0.1:
        return float(nearest)
    return power


def _split_at_origin(g: GridFunction) -> Tuple[float, float, np.ndarray]:
    """Write g = c + t^p w with w bounded at t = 0."""
    if g.singular_exponent != 0.0:
        if g.anchor is not Anchor.LEFT:
            raise InvalidParameterError("g", "the singular factor sits at the wrong endpoint")
        return 0.0, g.singular_exponent, g.values
    nodes = g.grid.nodes
    constant = float(g.values[0])
    rest = g.values - constant
    power = leading_exponent(rest, nodes)
    scaled = np.empty_like(rest)
    scaled[1:] = rest[1:] / nodes[1:] ** power
    scaled[0] = scaled[1] - (scaled[2] - scaled[1]) * nodes[1] / (nodes[2] - nodes[1])
    return constant, power, scaled


def _rl_derivative_origin(alpha: float, g: GridFunction) -> np.ndarray:
    """
    (d/dt) I^(1-alpha) g for alpha in (0, 1].

    With g = c + t^p w the integral is t^q H, q = p + 1 - alpha, where H is
    smooth; only H goes through the difference stencil.
    """
    constant, power, scaled = _split_at_origin(g)
    nodes = g.grid.nodes
    lead = power + 1.0 - alpha
    if abs(lead - round(lead)) < 1e-12:
        lead = float(round(lead))

    if alpha == 1.0:
        integral = nodes**power * scaled
    else:
        integral = _left_weights(nodes, 1.0 - alpha, power) @ scaled
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = integral / nodes**lead
        ratio[0] = scaled[0] * special.gamma(power + 1.0) * special.rgamma(lead + 1.0)
        slope = grid_derivative(ratio, nodes, 1)
        rate = lead * nodes ** (lead - 1.0) * ratio + nodes**lead * slope
        if alpha < 1.0:
            rate = rate + constant * special.rgamma(1.0 - alpha) * nodes ** (-alpha)

    if (constant != 0.0 and alpha < 1.0) or (lead < 1.0 and lead != 0.0):
        rate[0] = np.nan
    elif lead > 1.0:
        rate[0] = 0.0
    elif lead == 1.0:
        rate[0] = ratio[0]
    else:
        rate[0] = slope[0]
    return rate


def rl_derivative_left(alpha: float, g: GridFunction) -> GridFunction:
    """Get D^alpha g = (d/dt) I^(1-alpha) g for alpha in (0, 1]."""
    if not (0.0 < alpha <= 1.0):
        raise InvalidParameterError("alpha", f"must lie in (0, 1], got {alpha}")
    return GridFunction(g.grid, _rl_derivative_origin(alpha, g))


def rl_derivative_right(alpha: float, g: GridFunction) -> GridFunction:
    """
    Get D_{t,T}^alpha g = -(d/dt) I_{t,T}^(1-alpha) g for alpha in (0, 1].

    The power-law part of g at t = T is split off and differentiated exactly,
    so g = (T - t)^p converges up to the endpoint.
    """
    if not (0.0 < alpha <= 1.0):
        raise InvalidParameterError("alpha", f"must lie in (0, 1], got {alpha}")
    reflected = _rl_derivative_origin(alpha, g.mirrored())
    return GridFunction(g.grid, reflected[::-1])


def _hilfer_smooth(order: FractionalOrder, g: GridFunction) -> GridFunction:
    # D^{mu,nu} g = I^(2-mu) g'' + [beta > 0] g'(0) t^(1-mu) / Gamma(2-mu)
    nodes = g.grid.nodes
    curvature = grid_derivative(g.values, nodes, 2)
    if order.mu == 2.0:
        return GridFunction(g.grid, curvature)
    tail = frac_integral_left(2.0 - order.mu, GridFunction(g.grid, curvature)).values
    values = nodes ** (order.mu - 1.0) * tail
    if order.beta > 0.0:
        slope = fd_weights(nodes[0], nodes[:4], 1) @ g.values[:4]
        values = values + slope * special.rgamma(2.0 - order.mu)
    return GridFunction(g.grid, values, 1.0 - order.mu)


def hilfer_derivative_left(order: FractionalOrder, g: GridFunction) -> GridFunction:
    """
    Get I^(nu(2-mu)) d^2/dt^2 I^((1-nu)(2-mu)) g on the grid.

    Plain data starting with an integer power (and g(0) = 0 when beta > 0) is
    differentiated first and integrated once; the result then carries the
    t^(1-mu) factor as its singular exponent. Other data runs the composition.
    """
    if g.singular_exponent == 0.0 and (order.beta == 0.0 or g.values[0] == 0.0):
        power = leading_exponent(g.values - g.values[0], g.grid.nodes)
        if power.is_integer():
            return _hilfer_smooth(order, g)
    smoothed = frac_integral_left(order.beta, g).samples()
    curvature = grid_derivative(smoothed, g.grid.nodes, 2)
    outer = frac_integral_left(order.nu_gap, GridFunction(g.grid, curvature))
    return GridFunction(g.grid, outer.samples())


def hilfer_derivative_right(order: FractionalOrder, g: GridFunction) -> GridFunction:
    """
    Right-hand Hilfer derivative I_{t,T}^(nu(2-mu)) d^2/dt^2 I_{t,T}^((1-nu)(2-mu)) g.

    The second-order composition carries the sign (-1)^2 = +1, so that it is the
    formal adjoint of hilfer_derivative_left with nu replaced by 1 - nu.
    """
    reflected = hilfer_derivative_left(order, g.mirrored())
    exponent = reflected.singular_exponent
    anchor = Anchor.RIGHT if exponent != 0.0 else Anchor.LEFT
    return GridFunction(g.grid, reflected.values[::-1], exponent, anchor)


def product_integral(a: np.ndarray, b: np.ndarray, nodes: np.ndarray) -> float:
    """Exact integral over the grid of the product of two piecewise-linear interpolants."""
    width = np.diff(nodes)
    a0, a1, b0, b1 = a[:-1], a[1:], b[:-1], b[1:]
    return float(np.sum(width * (2 * a0 * b0 + a0 * b1 + a1 * b0 + 2 * a1 * b1)) / 6.0)


def grid_integral(a: np.ndarray, g: GridFunction, points: int = 8) -> float:
    """
    int_0^T a(t) g(t) dt with a and the regular values of g carried by cubic
    splines. The singular factor of g is integrated by Gauss-Jacobi on its
    endpoint cell.
    """
    if g.anchor is Anchor.RIGHT:
        g = g.mirrored()
        a = a[::-1]
    nodes = g.grid.nodes
    weight = CubicSpline(nodes, a)
    regular = CubicSpline(nodes, g.values)
    power = g.singular_exponent
    if power == 0.0:
        x, w = cell_quadrature(nodes, points)
        return float(np.sum(w * weight(x) * regular(x)))

    x, w = cell_quadrature(nodes[1:], points)
    total = np.sum(w * x**power * weight(x) * regular(x))
    xj, wj = special.roots_jacobi(points, 0.0, power)
    half = 0.5 * nodes[1]
    t = half * (1.0 + xj)
    total += half ** (power + 1.0) * np.sum(wj * weight(t) * regular(t))
    return float(total)


def _convolve(a: np.ndarray, b: np.ndarray, step: float) -> np.ndarray:
    out = np.zeros_like(a)
    for j in range(1, a.size):
        k = np.arange(j)
        a0, a1 = a[j - k], a[j - k - 1]
        b0, b1 = b[k], b[k + 1]
        out[j] = step * np.sum(2 * a0 * b0 + a0 * b1 + a1 * b0 + 2 * a1 * b1) / 6.0
    return out


def convolution_commute_residual(alpha: float, f: GridFunction, g: GridFunction) -> float:
    """Max-norm of (I^alpha f) * g - f * (I^alpha g) on a uniform grid."""
    _check_order(alpha)
    if not np.array_equal(f.grid.nodes, g.grid.nodes):
        raise InvalidParameterError("g", "f and g must share a grid")
    if not f.grid.is_uniform():
        raise InvalidParameterError("grid", "convolutions need a uniform grid")
    step = f.grid.nodes[1]
    left = _convolve(frac_integral_left(alpha, f).samples(), g.samples(), step)
    right = _convolve(f.samples(), frac_integral_left(alpha, g).samples(), step)
    return float(np.max(np.abs(left - right)))


def ipf_sides(alpha: float, phi: GridFunction, psi: GridFunction) -> Tuple[float, float]:
    """Both sides of int phi I^alpha psi = int psi I_{t,T}^alpha phi."""
    nodes = phi.grid.nodes
    lhs = product_integral(phi.samples(), frac_integral_left(alpha, psi).samples(), nodes)
    rhs = product_integral(psi.samples(), frac_integral_right(alpha, phi).samples(), nodes)
    return lhs, rhs


def ipf_residual(alpha: float, phi: GridFunction, psi: GridFunction) -> float:
    lhs, rhs = ipf_sides(alpha, phi, psi)
    return abs(lhs - rhs)


def ibp_residual(order: FractionalOrder, u: GridFunction, v: GridFunction) -> float:
    """
    Residual of the fractional integration-by-parts identity

        int v D^{mu,nu} u = int u D_{t,T}^{mu,1-nu} v
                            + [ (I^beta u)' I_{t,T}^{nu_gap} v + I^beta u D_{t,T}^{1-nu_gap} v ]_0^T
    """
    forward = hilfer_derivative_left(order, u)
    backward = hilfer_derivative_right(order.dual(), v)

    memory = frac_integral_left(order.beta, u).samples()
    memory_rate = rl_derivative_left(1.0 - order.beta, u).samples()
    dual_memory = frac_integral_right(order.nu_gap, v).samples()
    dual_rate = rl_derivative_right(1.0 - order.nu_gap, v).samples()
    bracket = memory_rate * dual_memory + memory * dual_rate

    lhs = grid_integral(v.samples(), forward)
    rhs = grid_integral(u.samples(), backward)
    return abs(lhs - rhs - (bracket[-1] - bracket[0]))


def power_law_residual(alpha: float, exponent: float, grid: TimeGrid) -> float:
    """Max error of I^alpha t^p against Gamma(p+1)/Gamma(p+alpha+1) t^(p+alpha)."""
    g = GridFunction.from_callable(grid, lambda t: t**exponent)
    approx = frac_integral_left(alpha, g).samples()
    exact = special.gamma(exponent + 1) * special.rgamma(exponent + alpha + 1)
    exact = exact * grid.nodes ** (exponent + alpha)
    return float(np.max(np.abs(approx[1:] - exact[1:])))


def semigroup_residual(alpha: float, beta: float, g: GridFunction) -> float:
    nested = frac_integral_left(alpha, frac_integral_left(beta, g)).samples()
    direct = frac_integral_left(alpha + beta, g).samples()
    return float(np.max(np.abs(nested - direct)))


def _merge_edges(edges: np.ndarray) -> np.ndarray:
    """Collapse breakpoints closer than rounding, keeping the later one."""
    tol = 1e-12 * max(abs(edges[-1]), 1.0)
    merged = [edges[0]]
    for edge in edges[1:]:
        if edge - merged[-1] > tol:
            merged.append(edge)
        else:
            merged[-1] = edge
    return np.array(merged)


def cell_quadrature(
    edges: Sequence[float], points: int, right_exponent: float = 0.0
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Composite Gauss-Legendre nodes and weights over the cells between edges.

    With right_exponent = a > 0 the last cell switches to Gauss-Jacobi for the
    weight (T - t)^(-a); the returned weights already include the (T - t)^a
    correction, so they integrate integrands with that endpoint behaviour directly.
    """
    edges = _merge_edges(np.sort(np.asarray(edges, dtype=float)))
    x, w = special.roots_legendre(points)
    lo, hi = edges[:-1, None], edges[1:, None]
    half = 0.5 * (hi - lo)
    nodes = half * x[None, :] + 0.5 * (hi + lo)
    weights = half * w[None, :]
    if right_exponent > 0:
        xj, wj = special.roots_jacobi(points, -right_exponent, 0.0)
        nodes[-1] = half[-1] * xj + 0.5 * (hi[-1] + lo[-1])
        weights[-1] = half[-1] * wj * (1.0 - xj) ** right_exponent
    return nodes.ravel(), weights.ravel()


def refinement_order(errors: Sequence[float], steps: Sequence[int]) -> List[float]:
    """Empirical convergence orders between successive refinement levels."""
    orders = []
    for (e0, e1), (m0, m1) in zip(zip(errors, errors[1:]), zip(steps, steps[1:])):
        if e0 <= 0 or e1 <= 0:
            orders.append(math.inf)
        else:
            orders.append(math.log(e0 / e1) / math.log(m1 / m0))
    return orders

"""
Two-parameter Mittag-Leffler function on the real axis.

E_{alpha,beta}(z) = sum_k z^k / Gamma(alpha k + beta) is evaluated in three
regimes keyed on zeta = |z|^(1/alpha):

* zeta <= SERIES_ZETA: the Taylor series, where cancellation costs at most
  e^zeta ulps;
* zeta >= ASYMPTOTIC_ZETA on the negative axis: the algebraic asymptotic
  expansion truncated near its smallest term, plus the pole residues when
  alpha > 1;
* in between: the branch-cut integral representation obtained by collapsing
  the inverse Laplace contour of s^(alpha-beta)/(s^alpha + lam) onto the
  negative real axis, plus the same residues.

All three paths are vectorised over z so the solvers can evaluate kernels on
whole time grids at once.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

import numpy as np
from scipy import integrate, special

from ..conf import numeric_default
from ..exceptions import InvalidParameterError, MittagLefflerError

logger = logging.getLogger(__name__)

SERIES_ZETA = 7.0
POSITIVE_SERIES_ZETA = 30.0
ASYMPTOTIC_ZETA = 40.0
ASYMPTOTIC_MAX_TERMS = 80
BRANCH_CUTOFF = 80.0


def default_tolerance() -> float:
    return float(numeric_default("MLF_TOLERANCE", 1e-12))


@dataclass(frozen=True)
class MlfParams:
    alpha: float
    beta: float
    tol: float = 1e-12

    def __post_init__(self):
        if not math.isfinite(self.alpha) or self.alpha <= 0 or self.alpha > 2:
            raise InvalidParameterError("alpha", f"must lie in (0, 2], got {self.alpha}")
        if not math.isfinite(self.beta):
            raise InvalidParameterError("beta", f"must be finite, got {self.beta}")
        if not math.isfinite(self.tol) or self.tol <= 0:
            raise InvalidParameterError("tol", f"must be positive, got {self.tol}")


@dataclass(frozen=True)
class DerivativeResiduals:
    """Residuals of the three derivative identities and the integral identity."""

    first: float
    second: float
    third: float
    integral: float

    def max(self) -> float:
        values = (self.first, self.second, self.third, self.integral)
        finite = [r for r in values if math.isfinite(r)]
        return max(finite) if finite else 0.0


def _series(alpha: float, beta: float, z: np.ndarray) -> np.ndarray:
    zeta = float(np.max(np.abs(z))) ** (1.0 / alpha) if z.size else 0.0
    terms = int(math.ceil((math.e * max(zeta, 1.0) + 45.0) / alpha)) + 2
    k = np.arange(terms)
    coefficients = special.rgamma(alpha * k + beta)
    powers = z[:, None] ** k[None, :]
    return powers @ coefficients


def _residues(alpha: float, beta: float, lam: np.ndarray) -> np.ndarray:
    # s^alpha = -lam has principal-sheet roots only when alpha > 1
    if alpha <= 1.0:
        return np.zeros_like(lam)
    pole = lam ** (1.0 / alpha) * np.exp(1j * math.pi / alpha)
    return (2.0 / alpha) * np.real(pole ** (1.0 - beta) * np.exp(pole))


def _asymptotic(alpha: float, beta: float, z: np.ndarray) -> np.ndarray:
    lam = -z
    zeta = lam ** (1.0 / alpha)
    k = np.arange(1, ASYMPTOTIC_MAX_TERMS + 1)
    coefficients = special.rgamma(beta - alpha * k)
    cutoff = np.clip(np.floor(zeta / alpha), 1, ASYMPTOTIC_MAX_TERMS)
    keep = k[None, :] <= cutoff[:, None]
    terms = np.where(keep, (1.0 / z)[:, None] ** k[None, :], 0.0) * coefficients[None, :]
    return -terms.sum(axis=1) + _residues(alpha, beta, lam)


def _quad_vec(
    func: Callable, a: float, b: float, tol: float, alpha: float, beta: float, z: np.ndarray
):
    try:
        value, error, info = integrate.quad_vec(
            func,
            a,
            b,
            epsabs=0.1 * tol,
            epsrel=0.0,
            norm="max",
            limit=4000,
            full_output=True,
        )
    except Exception as e:
        worst = float(z[np.argmax(np.abs(z))])
        logger.error(f"Quadrature failed in the Mittag-Leffler gap regime: {str(e)}")
        raise MittagLefflerError(alpha, beta, worst, f"quadrature raised {str(e)}") from e
    if error > tol:
        worst = float(z[np.argmax(np.abs(z))])
        reason = f"gap quadrature error {error:.2e} exceeds {tol:.1e} ({info.message})"
        raise MittagLefflerError(alpha, beta, worst, reason)
    return value


def _branch_integral(alpha: float, beta: float, z: np.ndarray, tol: float) -> np.ndarray:
    lam = -z
    if beta >= 1.0 + alpha:
        lower = _branch_integral(alpha, beta - alpha, z, tol * 1e-2)
        return (lower - special.rgamma(beta - alpha)) / z

    sin_beta = math.sin(math.pi * beta)
    sin_shift = math.sin(math.pi * (alpha - beta))
    cos_alpha = math.cos(math.pi * alpha)

    def rational(r):
        ra = r**alpha
        numerator = ra * sin_beta - lam * sin_shift
        denominator = ra * ra + 2.0 * lam * ra * cos_alpha + lam * lam
        return numerator / denominator

    exponent = alpha - beta
    if exponent < 0:
        # r = u^q absorbs the integrable r^(alpha-beta) endpoint singularity
        q = 1.0 / (1.0 + exponent)

        def integrand(u):
            r = u**q
            return q * math.exp(-r) * rational(r)

        upper = BRANCH_CUTOFF ** (1.0 / q)
    else:

        def integrand(r):
            return math.exp(-r) * r**exponent * rational(r)

        upper = BRANCH_CUTOFF

    cut = _quad_vec(integrand, 0.0, upper, math.pi * tol, alpha, beta, z) / math.pi
    return cut + _residues(alpha, beta, lam)


def _exponential_family(beta: float, z: np.ndarray, tol: float) -> np.ndarray:
    """E_{1,beta} through int_0^1 (1-s)^(beta-2) e^(zs) ds / Gamma(beta-1)."""
    if beta <= 1.0:
        return special.rgamma(beta) + z * _exponential_family(beta + 1.0, z, tol * 1e-2)

    if beta < 2.0:
        q = 1.0 / (beta - 1.0)

        def integrand(w):
            return q * np.exp(z * (1.0 - w**q))

    else:

        def integrand(s):
            return (1.0 - s) ** (beta - 2.0) * np.exp(z * s)

    scale = special.rgamma(beta - 1.0)
    return scale * _quad_vec(integrand, 0.0, 1.0, tol / max(abs(scale), 1.0), 1.0, beta, z)


def _closed_form(alpha: float, beta: float, z: np.ndarray) -> Optional[np.ndarray]:
    if alpha == 1.0 and beta == 1.0:
        return np.exp(z)
    if alpha == 1.0 and beta == 2.0:
        safe = np.where(z == 0.0, 1.0, z)
        return np.where(z == 0.0, 1.0, np.expm1(z) / safe)
    if alpha == 2.0 and beta in (1.0, 2.0) and np.all(z <= 0.0):
        root = np.sqrt(-z)
        if beta == 1.0:
            return np.cos(root)
        safe = np.where(root == 0.0, 1.0, root)
        return np.where(root == 0.0, 1.0, np.sin(root) / safe)
    return None


def mittag_leffler(alpha: float, beta: float, z, tol: Optional[float] = None) -> np.ndarray:
    """Evaluate E_{alpha,beta} elementwise on a real array."""
    params = MlfParams(alpha, beta, default_tolerance() if tol is None else tol)
    values = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(values)):
        raise InvalidParameterError("z", "arguments must be finite")

    flat = values.ravel()
    closed = _closed_form(params.alpha, params.beta, flat)
    if closed is not None:
        return closed.reshape(values.shape)

    out = np.empty_like(flat)
    zeta = np.abs(flat) ** (1.0 / params.alpha)
    series = (zeta <= SERIES_ZETA) | ((flat > 0) & (zeta <= POSITIVE_SERIES_ZETA))
    if np.any((flat > 0) & ~series):
        offending = float(flat[(flat > 0) & ~series][0])
        raise MittagLefflerError(
            params.alpha, params.beta, offending, "positive argument beyond the series range"
        )
    asymptotic = (flat < 0) & (zeta >= ASYMPTOTIC_ZETA)
    gap = ~series & ~asymptotic

    if np.any(series):
        out[series] = _series(params.alpha, params.beta, flat[series])
    if np.any(asymptotic):
        out[asymptotic] = _asymptotic(params.alpha, params.beta, flat[asymptotic])
    if np.any(gap):
        unique, inverse = np.unique(flat[gap], return_inverse=True)
        if params.alpha == 1.0:
            gap_values = _exponential_family(params.beta, unique, params.tol)
        else:
            gap_values = _branch_integral(params.alpha, params.beta, unique, params.tol)
        out[gap] = gap_values[inverse]
        logger.debug(
            f"E_{{{params.alpha},{params.beta}}}: {int(series.sum())} series, "
            f"{unique.size} integral, {int(asymptotic.sum())} asymptotic points"
        )

    if not np.all(np.isfinite(out)):
        offending = float(flat[~np.isfinite(out)][0])
        raise MittagLefflerError(params.alpha, params.beta, offending, "non-finite result")
    return out.reshape(values.shape)


def mlf_eval(params: MlfParams, z: float) -> float:
    """Get E_{alpha,beta}(z) to the absolute tolerance in params."""
    if not math.isfinite(z):
        raise InvalidParameterError("z", f"must be finite, got {z}")
    return float(mittag_leffler(params.alpha, params.beta, z, params.tol))


def mlf_bound_check(params: MlfParams, z: float, c: float) -> bool:
    if z > 0:
        raise InvalidParameterError("z", "the decay bound is checked on z <= 0 only")
    if c <= 0:
        raise InvalidParameterError("c", f"must be positive, got {c}")
    return abs(mlf_eval(params, z)) * (1.0 + abs(z)) <= c


def fit_bound_constant(params: MlfParams, z_values: Iterable[float]) -> float:
    """Get the smallest c with |E(z)| <= c / (1 + |z|) over the sweep."""
    z = np.asarray(list(z_values), dtype=float)
    if np.any(z > 0):
        raise InvalidParameterError("z_values", "the decay bound is fitted on z <= 0 only")
    values = mittag_leffler(params.alpha, params.beta, z, params.tol)
    return float(np.max(np.abs(values) * (1.0 + np.abs(z))))


def mlf_recurrence_residual(alpha: float, beta: float, z: float, h: float) -> float:
    """Residual of E_{a,b} = b E_{a,b+1} + a z E'_{a,b+1} with a central difference."""
    if z == 0:
        raise InvalidParameterError("z", "must be nonzero")
    if h <= 0:
        raise InvalidParameterError("h", f"must be positive, got {h}")
    shifted = mittag_leffler(alpha, beta + 1.0, np.array([z - h, z, z + h]))
    derivative = (shifted[2] - shifted[0]) / (2.0 * h)
    value = float(mittag_leffler(alpha, beta, z))
    return abs(value - beta * shifted[1] - alpha * z * derivative)


def composite_gauss(
    func: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    panels: int,
    points: int = 20,
    left_exponent: float = 0.0,
) -> float:
    """
    Integrate a vectorised function over [a, b] with panelled Gauss rules.

    When left_exponent != 0 the integrand is func(t) * (t - a)^left_exponent and the
    first panel uses the matching Gauss-Jacobi rule.
    """
    edges = np.linspace(a, b, panels + 1)
    x, w = special.roots_legendre(points)
    lo, hi = edges[:-1, None], edges[1:, None]
    nodes = 0.5 * (hi - lo) * x[None, :] + 0.5 * (hi + lo)
    weights = 0.5 * (hi - lo) * w[None, :]
    if left_exponent != 0.0:
        weights = weights * (nodes - a) ** left_exponent
        xj, wj = special.roots_jacobi(points, 0.0, left_exponent)
        half = 0.5 * (edges[1] - edges[0])
        nodes[0] = half * xj + a + half
        weights[0] = half ** (1.0 + left_exponent) * wj
    return float(np.sum(weights * func(nodes)))


def mlf_laplace_check(
    alpha: float,
    beta: float,
    gamma_coef: float,
    lam: float,
    t_max: float,
    panels_per_unit: int = 4,
) -> float:
    """
    Residual of int_0^t_max e^(-lam t) t^(beta-1) E(-gamma t^alpha) dt against
    lam^(alpha-beta) / (lam^alpha + gamma).

    The panel count is doubled until two successive estimates agree to 1e-11.
    """
    if beta <= 0:
        raise InvalidParameterError("beta", "the transform needs beta > 0")
    if lam**alpha <= abs(gamma_coef):
        logger.warning(
            f"Laplace transform diverges: lam^alpha={lam**alpha:.4g} "
            f"<= |gamma|={abs(gamma_coef):.4g}"
        )

    def integrand(t):
        return np.exp(-lam * t) * mittag_leffler(alpha, beta, -gamma_coef * t**alpha)

    # e^(-lam t) is below 1e-19 past this point
    horizon = min(t_max, 45.0 / lam + 1.0)
    panels = max(1, int(math.ceil(panels_per_unit * horizon)))
    current = composite_gauss(integrand, 0.0, horizon, panels, left_exponent=beta - 1.0)
    for _ in range(3):
        previous = current
        panels *= 2
        current = composite_gauss(integrand, 0.0, horizon, panels, left_exponent=beta - 1.0)
        if abs(current - previous) < 1e-11:
            break
    exact = lam ** (alpha - beta) / (lam**alpha + gamma_coef)
    return abs(current - exact)


def mlf_derivative_identities(
    alpha: float, lam: float, t: float, h: Optional[float] = None
) -> DerivativeResiduals:
    if t < 0:
        raise InvalidParameterError("t", f"must be nonnegative, got {t}")
    if lam <= 0:
        raise InvalidParameterError("lambda", f"must be positive, got {lam}")
    if t == 0:
        return DerivativeResiduals(math.nan, math.nan, math.nan, 0.0)

    step = 1e-4 * t if h is None else h
    stencil = np.array([t - step, t + step])

    def arg(s):
        return -lam * s**alpha

    def central(values):
        return (values[1] - values[0]) / (2.0 * step)

    e1 = mittag_leffler(alpha, 1.0, arg(stencil))
    kernel = float(mittag_leffler(alpha, alpha, arg(t)))
    first = abs(central(e1) + lam * t ** (alpha - 1.0) * kernel)

    e2 = stencil * mittag_leffler(alpha, 2.0, arg(stencil))
    second = abs(central(e2) - float(mittag_leffler(alpha, 1.0, arg(t))))

    e3 = stencil ** (alpha - 1.0) * mittag_leffler(alpha, alpha, arg(stencil))
    third = abs(
        central(e3) - t ** (alpha - 2.0) * float(mittag_leffler(alpha, alpha - 1.0, arg(t)))
    )

    quadrature = composite_gauss(
        lambda s: mittag_leffler(alpha, 1.0, arg(s)), 0.0, t, panels=8
    )
    integral = abs(quadrature - t * float(mittag_leffler(alpha, 2.0, arg(t))))
    return DerivativeResiduals(first, second, third, integral)


def fit_scaled_decay_constants(
    alpha: float,
    beta: float,
    lambdas: Iterable[float],
    times: Iterable[float],
    nu: float,
    gamma: float,
) -> float:
    """Fit C in |lam^nu t^gamma E(-lam t^alpha)| <= C t^(gamma - alpha nu)."""
    if not 0 <= nu <= 1:
        raise InvalidParameterError("nu", f"must lie in [0, 1], got {nu}")
    lam = np.asarray(list(lambdas), dtype=float)[:, None]
    t = np.asarray(list(times), dtype=float)[None, :]
    values = mittag_leffler(alpha, beta, -lam * t**alpha)
    ratio = np.abs(lam**nu * t**gamma * values) / t ** (gamma - alpha * nu)
    constant = float(np.max(ratio))
    logger.info(f"Scaled decay constant for E_{{{alpha},{beta}}} (nu={nu}): {constant:.6e}")
    return constant


def fit_scaled_kernel_constant(
    alpha: float,
    beta: float,
    lambdas: Iterable[float],
    times: Iterable[float],
    gamma: float,
) -> float:
    """Fit C in |lam^(1-gamma) t^(alpha-2) E(-lam t^alpha)| <= C t^(alpha gamma - 2)."""
    if not 0 <= gamma <= 1:
        raise InvalidParameterError("gamma", f"must lie in [0, 1], got {gamma}")
    lam = np.asarray(list(lambdas), dtype=float)[:, None]
    t = np.asarray(list(times), dtype=float)[None, :]
    values = mittag_leffler(alpha, beta, -lam * t**alpha)
    ratio = np.abs(lam ** (1.0 - gamma) * t ** (alpha - 2.0) * values) / t ** (alpha * gamma - 2.0)
    constant = float(np.max(ratio))
    logger.info(f"Scaled kernel constant for E_{{{alpha},{beta}}} (gamma={gamma}): {constant:.6e}")
    return constant

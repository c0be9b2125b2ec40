"""Reference values computed independently of the services under test."""

import math

import mpmath
import numpy as np
from scipy import special

SERIES_ZETA = 100.0
INTEGRAL_DIGITS = 30


def _series_reference(alpha: float, beta: float, z: float, digits: int) -> float:
    zeta = abs(z) ** (1.0 / alpha)
    # the largest term is about e^zeta, so carry that many extra digits
    with mpmath.workdps(digits + int(zeta / math.log(10.0)) + 10):
        a = mpmath.mpf(alpha)
        b = mpmath.mpf(beta)
        x = mpmath.mpf(z)
        bound = abs(x) ** (1 / a)
        eps = mpmath.mpf(10) ** (-digits - 5)
        total = mpmath.mpf(0)
        power = mpmath.mpf(1)
        small = 0
        k = 0
        while True:
            term = power * mpmath.rgamma(a * k + b)
            total += term
            small = small + 1 if abs(term) < eps else 0
            if k >= 200 and a * k > bound + 1 and small >= 2:
                break
            power *= x
            k += 1
        return float(total)


def _exponential_reference(beta: float, z: float) -> float:
    """E_{1,beta}(z) from the integral over (0, 1) and the upward recurrence."""
    with mpmath.workdps(INTEGRAL_DIGITS):
        x = mpmath.mpf(z)
        b = mpmath.mpf(beta)
        shift = 0
        while b + shift < 1:
            shift += 1
        top = b + shift
        if top == 1:
            value = mpmath.exp(x)
        else:
            scale = max(abs(x), 1)
            cuts = [0] + [c / scale for c in (1, 10, 100) if c < scale] + [1]
            value = mpmath.quad(lambda s: (1 - s) ** (top - 2) * mpmath.exp(x * s), cuts)
            value *= mpmath.rgamma(top - 1)
        for k in range(shift, 0, -1):
            value = x * value + mpmath.rgamma(b + k - 1)
        return float(value)


def _branch_reference(alpha: float, beta: float, lam: float) -> float:
    """E_{alpha,beta}(-lam) for 1 < alpha <= 2 by inverting s^(alpha-beta) / (s^alpha + lam)."""
    with mpmath.workdps(INTEGRAL_DIGITS):
        a = mpmath.mpf(alpha)
        b = mpmath.mpf(beta)
        x = mpmath.mpf(lam)
        cut_a = mpmath.sinpi(b)
        cut_b = x * mpmath.sinpi(a - b)

        def integrand(r):
            ra = r**a
            denominator = ra * ra + 2 * x * ra * mpmath.cospi(a) + x * x
            return mpmath.exp(-r) * r ** (a - b) * (ra * cut_a - cut_b) / denominator

        cut = mpmath.quad(integrand, [0, 1, 10, 100, mpmath.inf]) / mpmath.pi
        pole = x ** (1 / a) * mpmath.expjpi(1 / a)
        residues = 2 / a * mpmath.re(pole ** (1 - b) * mpmath.exp(pole))
        return float(cut + residues)


def mittag_leffler_reference(alpha: float, beta: float, z: float, digits: int = 50) -> float:
    """
    E_{alpha,beta}(z) in extended precision.

    The power series is summed whenever |z|^(1/alpha) <= SERIES_ZETA. Beyond
    that, on the negative axis, alpha = 1 uses the integral over (0, 1) and
    1 < alpha <= 2 with beta < 1 + alpha the Laplace branch cut plus poles.
    """
    zeta = abs(z) ** (1.0 / alpha)
    if zeta > SERIES_ZETA and z < 0:
        if alpha == 1.0:
            return _exponential_reference(beta, z)
        if 1.0 < alpha <= 2.0 and beta < 1.0 + alpha:
            return _branch_reference(alpha, beta, -z)
    return _series_reference(alpha, beta, z, digits)


def hilfer_power_derivative(mu: float, exponent: float, t: np.ndarray) -> np.ndarray:
    """
    D^{mu,nu} t^p = Gamma(p+1)/Gamma(p+1-mu) t^(p-mu).

    Valid only for p > 1 - (1-nu)(2-mu): below that the second derivative of
    I^((1-nu)(2-mu)) t^p is not integrable at t = 0.
    """
    return special.gamma(exponent + 1.0) * special.rgamma(exponent + 1.0 - mu) * t ** (
        exponent - mu
    )


def wave_mode(lam: float, u0: float, u1: float, t: np.ndarray) -> np.ndarray:
    """u'' + lam u = 0 with u(0) = u0, u'(0) = u1."""
    root = math.sqrt(lam)
    return u0 * np.cos(root * t) + u1 * np.sin(root * t) / root

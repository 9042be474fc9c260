"""Special-function numerics for the product-Rayleigh channel law.

Self-contained evaluation of the modified Bessel function K1, of the
scaled form x*K1(x) and its derivative, and of the CDF of the squared
magnitude of a product of two independent complex-Gaussian coefficients,

    F(x) = 1 - 2*sqrt(x)*K1(2*sqrt(x)),   F(x) ~ -x*ln(x) as x -> 0.

Small arguments use the ascending log series of x*K1(x); large arguments
use the Steed/Thompson-Barnett continued fraction.  No third-party
special-function library is involved, so the test suite can check these
routines against an independent quadrature oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "SeriesAccuracy",
    "SeriesConvergenceError",
    "bessel_k1",
    "tilde_k1",
    "tilde_k1_series",
    "tilde_k1_derivative",
    "cdf_gsq",
]

EULER_GAMMA = 0.57721566490153286061

# crossover between the ascending series and the continued fraction
_SERIES_CUTOFF = 2.0
# the differentiated series is only used inside its tested validity range
_SERIES_LIMIT = 4.0


class SeriesConvergenceError(RuntimeError):
    """Raised when a series fails to meet tolerance within max_terms."""


@dataclass(frozen=True)
class SeriesAccuracy:
    """Truncation control for the ascending series."""

    relative_tolerance: float = 1e-12
    max_terms: int = 60

    def __post_init__(self) -> None:
        if not (self.relative_tolerance > 0.0):
            raise ValueError("relative_tolerance must be > 0")
        if self.max_terms < 1:
            raise ValueError("max_terms must be >= 1")


_DEFAULT_ACCURACY = SeriesAccuracy()


def _check_positive(x: float, name: str) -> float:
    x = float(x)
    if not math.isfinite(x) or x <= 0.0:
        raise ValueError(f"{name} must be a finite positive real, got {x!r}")
    return x


def _digamma_int(n: int) -> float:
    # psi(1) = -gamma, psi(k+1) = psi(k) + 1/k; only small integers occur
    value = -EULER_GAMMA
    for k in range(1, n):
        value += 1.0 / k
    return value


def _a_coeff(k: int) -> float:
    """Average of digamma at k+1 and k+2, the series' log-free coefficient."""
    return 0.5 * (_digamma_int(k + 1) + _digamma_int(k + 2))


def tilde_k1_series(x: float, accuracy: SeriesAccuracy | None = None) -> float:
    """Ascending-series evaluation of x*K1(x), valid for x <= 4.

    x*K1(x) = 1 - 2*sum_k (x/2)^(2k+2) * (A(k) - ln(x/2)) / (k!(k+1)!)
    with A(k) = (psi(k+1) + psi(k+2)) / 2.
    """
    x = _check_positive(x, "x")
    if x > _SERIES_LIMIT:
        raise ValueError(f"series evaluation limited to x <= {_SERIES_LIMIT}, got {x}")
    acc = accuracy or _DEFAULT_ACCURACY
    half = 0.5 * x
    log_half = math.log(half)
    q = half * half  # (x/2)^2
    pw = q           # (x/2)^(2k+2) at k=0
    kfact = 1.0      # k!(k+1)! at k=0
    a_k = _a_coeff(0)
    total = 1.0
    for k in range(acc.max_terms):
        term = -2.0 * pw * (a_k - log_half) / kfact
        total += term
        if abs(term) < acc.relative_tolerance * abs(total):
            return total
        pw *= q
        kfact *= (k + 1) * (k + 2)
        # A(k+1) = A(k) + (1/(k+1) + 1/(k+2))/2
        a_k += 0.5 * (1.0 / (k + 1) + 1.0 / (k + 2))
    raise SeriesConvergenceError(
        f"x*K1(x) series did not converge within {acc.max_terms} terms at x={x}"
    )


def _k1_continued_fraction(x: float) -> float:
    """K1(x) for x >= 2 via Steed's evaluation of the CF2 continued fraction."""
    eps = 1e-16
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = d
    delh = d
    a1 = 0.25
    q1 = 0.0
    q2 = 1.0
    q = a1
    c = a1
    a = -a1
    s = 1.0 + q * delh
    for i in range(1, 20000):
        a -= 2 * i
        c = -a * c / (i + 1.0)
        qnew = (q1 - b * q2) / a
        q1 = q2
        q2 = qnew
        q += c * qnew
        b += 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h += delh
        dels = q * delh
        s += dels
        if abs(dels) < eps * abs(s):
            break
    else:  # pragma: no cover - convergence is rapid for x >= 2
        raise SeriesConvergenceError(f"continued fraction stalled at x={x}")
    k0 = math.sqrt(math.pi / (2.0 * x)) * math.exp(-x) / s
    return k0 * (x + 0.5 - a1 * h) / x


def bessel_k1(x: float, accuracy: SeriesAccuracy | None = None) -> float:
    """Modified Bessel function of the second kind, order one."""
    x = _check_positive(x, "x")
    if x <= _SERIES_CUTOFF:
        return tilde_k1_series(x, accuracy) / x
    return _k1_continued_fraction(x)


def tilde_k1(x: float, accuracy: SeriesAccuracy | None = None) -> float:
    """x*K1(x): series branch for x <= 2, product branch above."""
    x = _check_positive(x, "x")
    if x <= _SERIES_CUTOFF:
        return tilde_k1_series(x, accuracy)
    return x * _k1_continued_fraction(x)


def tilde_k1_derivative(x: float, accuracy: SeriesAccuracy | None = None) -> float:
    """d/dx of x*K1(x) from the termwise-differentiated ascending series.

    Valid for x <= 4; always negative (x*K1(x) is strictly decreasing).
    """
    x = _check_positive(x, "x")
    if x > _SERIES_LIMIT:
        raise ValueError(f"derivative series limited to x <= {_SERIES_LIMIT}, got {x}")
    acc = accuracy or _DEFAULT_ACCURACY
    half = 0.5 * x
    log_half = math.log(half)
    q = half * half
    pw = half        # (x/2)^(2k+1) at k=0
    kfact = 1.0
    a_k = _a_coeff(0)
    total = 0.0
    for k in range(acc.max_terms):
        term = -2.0 * pw * ((k + 1) * (a_k - log_half) - 0.5) / kfact
        total += term
        if abs(term) < acc.relative_tolerance * max(abs(total), 1e-300):
            return total
        pw *= q
        kfact *= (k + 1) * (k + 2)
        a_k += 0.5 * (1.0 / (k + 1) + 1.0 / (k + 2))
    raise SeriesConvergenceError(
        f"derivative series did not converge within {acc.max_terms} terms at x={x}"
    )


def cdf_gsq(x: float) -> float:
    """CDF of the squared product-Rayleigh magnitude: 1 - 2*sqrt(x)*K1(2*sqrt(x))."""
    x = float(x)
    if not math.isfinite(x) or x < 0.0:
        raise ValueError(f"cdf argument must be a finite nonnegative real, got {x!r}")
    if x < 1e-300:
        # below the precision of -x*ln(x); the CDF is 0 to double precision
        return 0.0
    return 1.0 - tilde_k1(2.0 * math.sqrt(x))

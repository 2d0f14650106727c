"""Special values needed by the verification suite.

Everything here is computed from integral representations with the
package's own quadrature; no external special-function library is
involved, so the representations themselves stay test subjects.

* ``bessel_k0``: the modified Bessel function of the second kind, order
  zero, primarily from K0(x) = int_1^inf (t^2-1)^{-1/2} e^{-xt} dt
  (square substitution at t = 1), cross-checked against
  K0(x) = (1/2) int_0^inf e^{-t - x^2/(4t)} / t dt.
* ``laplace_k0``: the closed form of int_0^inf e^{-sx} K0(x) dx, with a
  three-term series across the removable singularity at s = 1.
* ``h_integral`` / ``h_inverse``: the Gaussian tail integral
  h(t) = int_t^inf e^{-u^2} du and its inverse on (0, sqrt(pi)/2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import OutOfRange, RootFindFailure
from .quadrature import (DEFAULT_BUDGET, Decay, QuadratureBudget,
                         integrate_adaptive, integrate_semiinfinite)

__all__ = ["SpecialFnResult", "bessel_k0", "bessel_k0_alt", "k0_values",
           "laplace_k0", "h_integral", "h_inverse", "typeA_laplace",
           "SQRT_PI", "HALF_SQRT_PI"]

SQRT_PI = math.sqrt(math.pi)
HALF_SQRT_PI = 0.5 * SQRT_PI

# exp(-x) underflows past this point; K0(x) is then below 1e-304.
_UNDERFLOW_X = 700.0


@dataclass(frozen=True)
class SpecialFnResult:
    value: float
    est_error: float
    method: str


def bessel_k0(x: float, budget: QuadratureBudget = DEFAULT_BUDGET) -> SpecialFnResult:
    """K0(x) for x > 0 via the exponential-kernel representation.

    After t = 1 + w^2 the integrand becomes
    2 (2 + w^2)^{-1/2} e^{-x} e^{-x w^2}, smooth with Gaussian tail; the
    factor e^{-x} is kept outside so relative accuracy survives far into
    the tail.
    """
    if x <= 0:
        raise OutOfRange("bessel_k0 requires x > 0")
    if x > _UNDERFLOW_X:
        return SpecialFnResult(0.0, 0.0, "underflow")

    def g(w):
        w = np.asarray(w, dtype=float)
        return 2.0 / np.sqrt(2.0 + w * w) * np.exp(-x * w * w)

    res = integrate_semiinfinite(g, 0.0, Decay.exponential(x, 2.0), budget)
    scale = math.exp(-x)
    return SpecialFnResult(scale * res.value, scale * res.est_error, "integral_rep")


def bessel_k0_alt(x: float, budget: QuadratureBudget = DEFAULT_BUDGET) -> SpecialFnResult:
    """K0(x) via the Laplace-type representation
    (1/2) int_0^inf e^{-t - x^2/(4t)} / t dt, written with the stable
    exponent (2t - x)^2 / (4t) so that e^{-x} factors out exactly."""
    if x <= 0:
        raise OutOfRange("bessel_k0_alt requires x > 0")
    if x > _UNDERFLOW_X:
        return SpecialFnResult(0.0, 0.0, "underflow")

    def g(t):
        t = np.asarray(t, dtype=float)
        expo = (2.0 * t - x) ** 2 / (4.0 * t)
        return 0.5 * np.exp(-np.minimum(expo, 745.0)) / t

    # The exponent is superexponentially large toward t -> 0 and grows
    # like t at infinity; split at the saddle t = x/2.
    mid = 0.5 * x
    left = integrate_adaptive(g, 0.0, mid, budget)
    right = integrate_semiinfinite(g, mid, Decay.exponential(1.0, 1.0), budget)
    scale = math.exp(-x)
    return SpecialFnResult(scale * (left.value + right.value),
                           scale * (left.est_error + right.est_error),
                           "integral_rep_laplace")


def k0_values(xs, budget: QuadratureBudget = DEFAULT_BUDGET) -> np.ndarray:
    """Vectorised K0 over a 1-d array of positive abscissae."""
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    return np.array([bessel_k0(float(x), budget).value for x in xs])


# Series for arccos(s) / sqrt(1 - s^2) around s = 1 (same analytic
# function as arccosh(s) / sqrt(s^2 - 1) for s > 1), in powers of 1 - s.
_SERIES_C = (1.0, 1.0 / 3.0, 2.0 / 15.0)
_SERIES_WIDTH = 1e-4


def laplace_k0(s: float) -> float:
    """Laplace transform of K0 at s > 0:

        arccos(s) / sqrt(1 - s^2)          for s < 1,
        1                                  at s = 1,
        log(s + sqrt(s^2-1)) / sqrt(s^2-1) for s > 1,

    with the removable singularity at s = 1 bridged by a short series
    because both branch formulas cancel catastrophically there."""
    if s <= 0:
        raise OutOfRange("laplace_k0 requires s > 0")
    d = 1.0 - s
    if abs(d) < _SERIES_WIDTH:
        return _SERIES_C[0] + d * (_SERIES_C[1] + d * _SERIES_C[2])
    if s < 1.0:
        return math.acos(s) / math.sqrt(1.0 - s * s)
    root = math.sqrt(s * s - 1.0)
    return math.log(s + root) / root


def h_integral(t: float, budget: QuadratureBudget = DEFAULT_BUDGET) -> float:
    """Gaussian tail integral h(t) = int_t^inf e^{-u^2} du, t >= 0."""
    if t < 0:
        raise OutOfRange("h_integral requires t >= 0")

    def g(u):
        u = np.asarray(u, dtype=float)
        return np.exp(-np.minimum(u * u, 745.0))

    res = integrate_semiinfinite(g, t, Decay.exponential(1.0, 2.0), budget)
    return res.value


def h_inverse(s: float, tol: float = 1e-12,
              budget: QuadratureBudget = DEFAULT_BUDGET) -> float:
    """Inverse of h on (0, sqrt(pi)/2]: the t >= 0 with h(t) = s.

    Safeguarded Newton iteration (h' = -e^{-t^2} is analytic) inside a
    bracket found by doubling; converges to |h(t) - s| <= tol."""
    if not (0.0 < s <= HALF_SQRT_PI + 1e-15):
        raise OutOfRange(f"h_inverse requires s in (0, {HALF_SQRT_PI}]")
    if s >= HALF_SQRT_PI:
        return 0.0
    lo, hi = 0.0, 1.0
    while h_integral(hi, budget) > s:
        lo, hi = hi, 2.0 * hi
        if hi > 64.0:
            raise RootFindFailure("bracket expansion failed for h_inverse")
    t = 0.5 * (lo + hi)
    for _ in range(200):
        val = h_integral(t, budget) - s
        if abs(val) <= tol:
            return t
        if val > 0:
            lo = t
        else:
            hi = t
        step = val / math.exp(-t * t)  # Newton: h' = -e^{-t^2}
        cand = t + step
        t = cand if lo < cand < hi else 0.5 * (lo + hi)
    raise RootFindFailure(f"h_inverse failed to reach tolerance {tol}")


def typeA_laplace(s: float, gamma0: float = 0.0) -> float:
    """Laplace transform of the nonnegative infinitely divisible law
    whose jump density is K0 and whose drift is gamma0:
    exp(-gamma0 s + laplace_k0(s) - pi/2) for s >= 0."""
    if s < 0:
        raise OutOfRange("typeA_laplace requires s >= 0")
    if gamma0 < 0:
        raise OutOfRange("gamma0 must be nonnegative")
    phi = math.pi / 2.0 if s == 0.0 else laplace_k0(s)
    return math.exp(-gamma0 * s + phi - math.pi / 2.0)

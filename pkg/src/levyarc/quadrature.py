"""Adaptive quadrature kernels for the transform machinery.

Three integral shapes cover everything the measure transformations need:

* finite intervals with smooth integrands (adaptive Gauss-Kronrod 7/15),
* endpoint inverse-square-root singularities, removed exactly by the
  substitution s = singular_point +/- w**2 before subdividing,
* semi-infinite integrals whose tails are truncated where a declared
  analytic decay bound falls below the absolute floor.

Integrands must accept a 1-d ndarray of abscissae and return an ndarray
of the same shape.  All routines return a :class:`QuadResult` carrying
the value and an error estimate; they raise
:class:`~levyarc.errors.NonConvergent` when the estimate cannot be
brought below the requested relative tolerance within budget.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .errors import DivergentIntegral, DomainError, NonConvergent

# 15-point Kronrod abscissae on [-1, 1] and the matching weights.  The
# odd-indexed abscissae form the embedded 7-point Gauss rule.
_XK = np.array([
    -0.991455371120812639206854697526329,
    -0.949107912342758524526189684047851,
    -0.864864423359769072789712788640926,
    -0.741531185599394439863864773280788,
    -0.586087235467691130294144838258730,
    -0.405845151377397166906606412076961,
    -0.207784955007898467600689403773245,
    0.0,
    0.207784955007898467600689403773245,
    0.405845151377397166906606412076961,
    0.586087235467691130294144838258730,
    0.741531185599394439863864773280788,
    0.864864423359769072789712788640926,
    0.949107912342758524526189684047851,
    0.991455371120812639206854697526329,
])
_WK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
    0.204432940075298892414161999234649,
    0.190350578064785409913256402421014,
    0.169004726639267902826583426598550,
    0.140653259715525918745189590510238,
    0.104790010322250183839876322541518,
    0.063092092629978553290700663189204,
    0.022935322010529224963732008058970,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
    0.381830050505118944950369775488975,
    0.279705391489276667901467771423780,
    0.129484966168869693270611432679082,
])
_GAUSS_IDX = np.arange(1, 15, 2)


@dataclass(frozen=True)
class QuadratureBudget:
    """Resource limits for one logical integral.

    rel_tol is the requested relative error; abs_floor is the magnitude
    below which contributions are treated as exact zero (used for tail
    truncation); max_subdivisions bounds the bisection depth and
    max_evals the total number of integrand evaluations.
    """

    rel_tol: float = 1e-10
    abs_floor: float = 1e-300
    max_subdivisions: int = 60
    max_evals: int = 10 ** 6

    def __post_init__(self):
        if not (0.0 < self.rel_tol < 1.0):
            raise ValueError("rel_tol must lie in (0, 1)")
        if self.abs_floor <= 0 or self.max_subdivisions <= 0 or self.max_evals <= 0:
            raise ValueError("budget limits must be positive")

    def tightened(self, factor: float = 1e-2) -> "QuadratureBudget":
        """Budget for inner integrals of a composed transform."""
        return QuadratureBudget(
            rel_tol=max(self.rel_tol * factor, 1e-14),
            abs_floor=self.abs_floor,
            max_subdivisions=self.max_subdivisions,
            max_evals=self.max_evals,
        )


DEFAULT_BUDGET = QuadratureBudget()


@dataclass(frozen=True)
class QuadResult:
    value: float
    est_error: float

    def __add__(self, other):
        return QuadResult(self.value + other.value, self.est_error + other.est_error)

    def scaled(self, c: float) -> "QuadResult":
        return QuadResult(c * self.value, abs(c) * self.est_error)


_ZERO = QuadResult(0.0, 0.0)


def _gk15(f, a: float, b: float):
    """One Gauss-Kronrod 7/15 panel.  Returns (value, err_estimate)."""
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    y = np.asarray(f(c + h * _XK), dtype=float)
    if not np.all(np.isfinite(y)):
        # Integrable endpoint behaviour reaches the panel only through
        # interior nodes; a non-finite value means a genuine blow-up.
        y = np.where(np.isfinite(y), y, 0.0)
        bad = True
    else:
        bad = False
    k15 = h * float(_WK @ y)
    g7 = h * float(_WG @ y[_GAUSS_IDX])
    resasc = h * float(_WK @ np.abs(y - k15 / (b - a)))
    diff = abs(k15 - g7)
    if resasc != 0.0 and diff != 0.0:
        err = resasc * min(1.0, (200.0 * diff / resasc) ** 1.5)
    else:
        err = diff
    if bad:
        err = max(err, abs(k15)) + diff
    return k15, err


def integrate_adaptive(f, a: float, b: float,
                       budget: QuadratureBudget = DEFAULT_BUDGET,
                       rel_tol: float | None = None,
                       abs_tol: float = 0.0) -> QuadResult:
    """Adaptive GK15 on a finite interval.

    Subdivides the interval with the largest error estimate until the
    summed estimate drops below rel_tol * |integral| (or abs_tol /
    abs_floor; abs_tol matters for integrals that cancel to near zero).
    """
    if not (math.isfinite(a) and math.isfinite(b)):
        raise DomainError("integrate_adaptive needs finite endpoints")
    if a == b:
        return _ZERO
    if a > b:
        return integrate_adaptive(f, b, a, budget, rel_tol, abs_tol).scaled(-1.0)
    tol = budget.rel_tol if rel_tol is None else rel_tol

    val, err = _gk15(f, a, b)
    evals = 15
    heap = [(-err, 0, a, b, val, err, 0)]
    total, toterr = val, err
    tie = 1
    while toterr > max(tol * abs(total), abs_tol, budget.abs_floor):
        if evals + 30 > budget.max_evals or not heap:
            raise NonConvergent(
                f"budget exhausted at error {toterr:.3e} (target "
                f"{max(tol * abs(total), budget.abs_floor):.3e})",
                value=total, est_error=toterr)
        _, _, lo, hi, v0, e0, depth = heapq.heappop(heap)
        if depth >= budget.max_subdivisions:
            # Nothing left to refine at allowed depth.
            heapq.heappush(heap, (0.0, tie, lo, hi, v0, e0, depth))
            tie += 1
            if all(item[0] == 0.0 for item in heap):
                raise NonConvergent(
                    f"max subdivision depth reached at error {toterr:.3e}",
                    value=total, est_error=toterr)
            continue
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            # Interval at floating-point resolution; keep as is.
            heapq.heappush(heap, (0.0, tie, lo, hi, v0, 0.0, depth))
            tie += 1
            total, toterr = _resum(heap)
            continue
        v1, e1 = _gk15(f, lo, mid)
        v2, e2 = _gk15(f, mid, hi)
        evals += 30
        heapq.heappush(heap, (-e1, tie, lo, mid, v1, e1, depth + 1))
        heapq.heappush(heap, (-e2, tie + 1, mid, hi, v2, e2, depth + 1))
        tie += 2
        total += v1 + v2 - v0
        toterr += e1 + e2 - e0
        if toterr < 0.0:
            total, toterr = _resum(heap)
    return QuadResult(total, toterr)


def _resum(heap):
    total = sum(item[4] for item in heap)
    toterr = sum(item[5] for item in heap)
    return total, toterr


def integrate_sqrt_singular(g, lower: float, upper: float, singular_end: str,
                            budget: QuadratureBudget = DEFAULT_BUDGET,
                            decay=None) -> QuadResult:
    """Integral of g over (lower, upper) with an inverse-square-root
    singularity at one endpoint.

    The substitution s = singular_point +/- w**2 turns the weight
    (s - lower)**-0.5 (or (upper - s)**-0.5) into a constant, removing
    the singularity exactly; the transformed integrand is handed to the
    adaptive rule.  `upper` may be inf when the singular end is the
    lower one; `decay` then describes g's tail for truncation.
    """
    if singular_end not in ("lower", "upper"):
        raise DomainError("singular_end must be 'lower' or 'upper'")
    if upper <= lower:
        return _ZERO
    if singular_end == "upper":
        if not math.isfinite(upper):
            raise DomainError("singular upper endpoint must be finite")

        def h(w):
            w = np.asarray(w, dtype=float)
            return 2.0 * w * g(upper - w * w)

        return integrate_adaptive(h, 0.0, math.sqrt(upper - lower), budget)

    def h(w):
        w = np.asarray(w, dtype=float)
        return 2.0 * w * g(lower + w * w)

    if math.isfinite(upper):
        return integrate_adaptive(h, 0.0, math.sqrt(upper - lower), budget)
    wdecay = None if decay is None else decay.under_square_shift(lower)
    return integrate_semiinfinite(h, 0.0, wdecay, budget)


@dataclass(frozen=True)
class Decay:
    """Declared tail behaviour of a density at +inf.

    kind 'exponential': |f(r)| <= C exp(-rate * r**power) eventually
    (power 1 is a plain exponential; power 1/2 covers exp(-sqrt(r))).
    kind 'polynomial': f(r) ~ C r**exponent with exponent < 0.
    """

    kind: str
    rate: float = 0.0
    power: float = 1.0
    exponent: float = 0.0

    def __post_init__(self):
        if self.kind not in ("exponential", "polynomial"):
            raise ValueError("decay kind must be 'exponential' or 'polynomial'")
        if self.kind == "exponential" and (self.rate <= 0 or self.power <= 0):
            raise ValueError("exponential decay needs positive rate and power")

    @staticmethod
    def exponential(rate: float, power: float = 1.0) -> "Decay":
        return Decay("exponential", rate=rate, power=power)

    @staticmethod
    def polynomial(exponent: float) -> "Decay":
        return Decay("polynomial", exponent=exponent)

    def under_square_shift(self, shift: float) -> "Decay":
        """Tail of w -> f(shift + w**2) given the tail of f."""
        if self.kind == "exponential":
            return Decay.exponential(self.rate, 2.0 * self.power)
        return Decay.polynomial(2.0 * self.exponent + 1.0)

    def under_power(self, p: float) -> "Decay":
        """Tail of u -> f(u**(1/p)) style rescaling used by radial power maps."""
        if self.kind == "exponential":
            return Decay.exponential(self.rate, self.power / p)
        return Decay.polynomial((self.exponent + 1.0) / p - 1.0)


def integrate_semiinfinite(g, a: float, decay: Decay | None = None,
                           budget: QuadratureBudget = DEFAULT_BUDGET) -> QuadResult:
    """Integral of g over (a, inf).

    With exponential decay metadata the tail is cut at the point where
    the fitted bound C exp(-rate u**power) integrates to below the
    absolute floor; the finite part is covered by geometrically growing
    blocks.  Polynomial tails are folded onto a finite interval by
    t = 1/u.  Without metadata, blocks are accumulated until two
    consecutive contributions fall below the relative tolerance (with a
    generous extra margin in the error estimate).
    """
    if decay is not None and decay.kind == "polynomial":
        if decay.exponent >= -1.0:
            raise DivergentIntegral(
                f"declared polynomial tail exponent {decay.exponent} >= -1")
        head = integrate_adaptive(g, a, a + 1.0, budget)
        t_hi = 1.0 / (a + 1.0)

        def folded(t):
            t = np.asarray(t, dtype=float)
            return g(1.0 / t) / (t * t)

        # t -> 0 endpoint behaves like t**(-exponent-2), integrable.
        tail_part = integrate_adaptive(folded, 0.0, t_hi, budget)
        return head + tail_part

    if decay is not None:
        rate, power = decay.rate, decay.power
        # Fit the bound constant on probe points past the start.
        probes = a + np.array([0.5, 1.0, 2.0, 4.0, 8.0])
        vals = np.abs(np.asarray(g(probes), dtype=float))
        with np.errstate(over="ignore"):
            c_fit = float(np.nanmax(vals * np.exp(np.minimum(
                rate * probes ** power, 700.0))))
        c_fit = max(c_fit, 1.0) * 100.0
        # Cut where the bound's integrated tail is negligible.
        log_cut = math.log(c_fit) + 690.0
        t_cut = a + max(1.0, (log_cut / rate) ** (1.0 / power))
    else:
        t_cut = math.inf

    total = _ZERO
    lo = a
    width = 1.0
    blocks_below = 0
    blocks = 0
    while lo < t_cut:
        blocks += 1
        if blocks > 240:
            raise NonConvergent(
                "semi-infinite tail did not stabilise within the block budget",
                value=total.value, est_error=total.est_error)
        hi = min(lo + width, t_cut)
        part = integrate_adaptive(g, lo, hi, budget)
        total = total + part
        scale = max(abs(total.value), budget.abs_floor)
        if abs(part.value) < 0.25 * budget.rel_tol * scale:
            blocks_below += 1
            if decay is None and blocks_below >= 2:
                # Undeclared tail: stop on stagnation, widen the error.
                return QuadResult(total.value,
                                  total.est_error + 4.0 * abs(part.value))
            if decay is not None and blocks_below >= 2 and lo > a + 8.0:
                break
        else:
            blocks_below = 0
        lo = hi
        width *= 2.0
    return total


def integrate_dyadic_endpoint(f, a: float, b: float, toward: str,
                              budget: QuadratureBudget = DEFAULT_BUDGET,
                              rel_tol: float | None = None,
                              max_levels: int = 48) -> QuadResult:
    """Integral over (a, b) of an integrand whose behaviour at one finite
    endpoint is unknown: geometric blocks shrinking toward that end.

    Convergence is certified by geometric decay of the block sums, and
    the unexplored remainder is bounded by extrapolating the measured
    ratio.  Non-decaying block sums raise DivergentIntegral.
    """
    if toward not in ("lower", "upper"):
        raise DomainError("toward must be 'lower' or 'upper'")
    if b <= a:
        return _ZERO
    tol = budget.rel_tol if rel_tol is None else rel_tol
    span = b - a
    shrink = 0.25
    total = _ZERO
    prev = None
    ratios = []
    offs = span
    for level in range(max_levels):
        noffs = offs * shrink
        if toward == "lower":
            lo, hi = a + noffs, a + offs
        else:
            lo, hi = b - offs, b - noffs
        part = integrate_adaptive(f, lo, hi, budget, rel_tol=tol)
        total = total + part
        if prev is not None and abs(prev) > 0:
            ratios.append(abs(part.value) / abs(prev))
        prev = part.value
        offs = noffs
        scale = max(abs(total.value), budget.abs_floor)
        if len(ratios) >= 4:
            recent = ratios[-4:]
            if all(r >= 0.98 for r in recent) and abs(part.value) > tol * scale:
                raise DivergentIntegral(
                    f"block sums near the {toward} endpoint do not decay "
                    f"(last block {part.value:.3e})")
        if abs(part.value) <= 0.25 * tol * scale and len(ratios) >= 2:
            q = min(max(ratios[-1], ratios[-2]), 0.9)
            rem = abs(part.value) * q / (1.0 - q)
            return QuadResult(total.value, total.est_error + rem)
    # Ran out of levels without certifying; report with inflated error.
    rem = abs(prev) if prev is not None else 0.0
    result = QuadResult(total.value, total.est_error + 8.0 * rem)
    if result.est_error > tol * max(abs(result.value), budget.abs_floor):
        raise NonConvergent(
            f"dyadic endpoint scan stalled at error {result.est_error:.3e}",
            value=result.value, est_error=result.est_error)
    return result

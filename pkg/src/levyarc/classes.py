"""Membership tests for the classical subfamilies of jump measures.

All verdicts are numerical falsification tests, never proofs: each flag
carries a certificate recording the grid, the worst violation and the
tolerance used.

* Jurek class U: per-direction radial density nonincreasing (sampled at
  64 log-spaced points per decade; ties within tolerance count as
  nonincreasing).
* Bondesson class B: radial density completely monotone.
* Generalised type G: the density is g(r^2) with g completely monotone,
  i.e. r -> l(sqrt(r)) passes the same test.
* Arcsine range (type A): the constructive inverse recovers tails that
  are nonnegative and nonincreasing, and the density has no interior
  support gap (positive up to some bound, zero after).

Complete monotonicity is probed through sign conditions on forward
finite differences: (-1)^n D_h^n g(x) >= 0 for all orders n and steps
h > 0.  Differences below the floating-point cancellation floor are
reported as underflow rather than treated as evidence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DomainError
from .measures import PolarLevyMeasure, RadialMeasure, in_ML_k
from .quadrature import (DEFAULT_BUDGET, Decay, QuadratureBudget, QuadResult,
                         integrate_sqrt_singular)
from .transforms import _bounded_piece, invert_arcsine
from .quadrature import integrate_semiinfinite

__all__ = [
    "BernsteinMeasure", "CMVerdict", "ClassVerdict", "CheckCertificate",
    "is_completely_monotone", "cm_to_arcsine_rep",
    "gaussian_arcsine_identity", "classify", "default_cm_grid",
]


@dataclass(frozen=True, eq=False)
class BernsteinMeasure:
    """Mixing measure Q of a completely monotone function
    g(u) = int e^{-uv} Q(dv); no mass at the origin by construction."""

    measure: RadialMeasure


@dataclass(frozen=True)
class CMViolation:
    x: float
    order: int
    step: float
    value: float  # signed (-1)^n difference, negative = violation


@dataclass(frozen=True, eq=False)
class CMVerdict:
    consistent: bool
    worst: float  # most negative normalised signed difference seen
    violations: tuple
    underflow_points: tuple

    def __bool__(self):
        return self.consistent


def default_cm_grid(lo: float = 0.05, hi: float = 20.0, n: int = 32) -> np.ndarray:
    return np.geomspace(lo, hi, n)


def is_completely_monotone(g: Callable, grid=None, max_order: int = 8,
                           rel_tol: float = 1e-6) -> CMVerdict:
    """Finite-difference falsification test of complete monotonicity.

    Checks (-1)^n D_h^n g(x) >= -rel_tol * |g(x)| for n <= max_order and
    h in {x/16, x/8, x/4} across the grid.  A consistent verdict is
    compatible with complete monotonicity, not a proof of it.
    """
    if grid is None:
        grid = default_cm_grid()
    grid = np.asarray(grid, dtype=float)
    violations = []
    underflow = []
    worst = 0.0
    for x in grid:
        gx = float(np.asarray(g(np.array([x])))[0])
        for h in (x / 16.0, x / 8.0, x / 4.0):
            stencil = x + h * np.arange(max_order + 1)
            vals = np.asarray(g(stencil), dtype=float)
            if not np.all(np.isfinite(vals)):
                underflow.append((float(x), float(h)))
                continue
            vmax = float(np.max(np.abs(vals)))
            diffs = vals.copy()
            for n in range(1, max_order + 1):
                diffs = np.diff(diffs)
                signed = (-1.0) ** n * diffs[0]
                noise = (2.0 ** n) * np.finfo(float).eps * vmax * (n + 1)
                if abs(signed) < noise:
                    underflow.append((float(x), float(h)))
                    continue
                ref = max(abs(gx), 1e-300)
                if signed < -rel_tol * ref:
                    violations.append(CMViolation(float(x), n, float(h),
                                                  float(signed)))
                    worst = min(worst, signed / ref)
    return CMVerdict(not violations, worst, tuple(violations), tuple(underflow))


def cm_to_arcsine_rep(Q: BernsteinMeasure,
                      budget: QuadratureBudget = DEFAULT_BUDGET):
    """From the mixing measure Q, build the completely monotone function
    g(u) = int e^{-uv} Q(dv) together with the arcsine profile

        h(s) = (sqrt(pi)/2) int e^{-sv} v^{1/2} Q(dv),

    which satisfy g(r^2) = int a_1(r; s) h(s) ds with the k=1 arcsine
    kernel.  Returns (g, h) as vectorised evaluators."""
    meas = Q.measure

    def laplace_like(u: float, half_power: bool) -> float:
        if u <= 0:
            raise DomainError("evaluation point must be positive")
        total = 0.0
        for v, w in meas.atoms:
            total += w * math.exp(-u * v) * (math.sqrt(v) if half_power else 1.0)
        for part in meas.parts:
            a, b = part.support
            dens = part.density_at

            def f(v):
                v = np.asarray(v, dtype=float)
                extra = np.sqrt(v) if half_power else 1.0
                return np.exp(-u * v) * extra * dens(v)

            if math.isinf(b):
                mid = max(2.0 * a, a + 1.0)
                head = _bounded_piece(f, a, mid, part.left_exponent, 0.0, budget)
                # The e^{-uv} factor makes any declared tail exponential.
                tail_res = integrate_semiinfinite(f, mid, Decay.exponential(u, 1.0),
                                                  budget)
                total += head.value + tail_res.value
            else:
                total += _bounded_piece(f, a, b, part.left_exponent,
                                        part.right_exponent, budget).value
        return total

    def vec(fn):
        def ev(u):
            u = np.asarray(u, dtype=float)
            scalar = u.ndim == 0
            u = np.atleast_1d(u)
            out = np.array([fn(float(x)) for x in u])
            return float(out[0]) if scalar else out
        return ev

    g = vec(lambda u: laplace_like(u, False))
    h = vec(lambda s: (0.5 * math.sqrt(math.pi)) * laplace_like(s, True))
    return g, h


def gaussian_arcsine_identity(x: float, t: float,
                              budget: QuadratureBudget = DEFAULT_BUDGET):
    """Both sides of the polar factorisation of the centred Gaussian
    density: mixing the symmetric arcsine kernel
    a(x; s) = pi^{-1} (s - x^2)^{-1/2} over an exponential parameter
    with mean 2t reproduces the normal density with variance t,

        phi(x; t) = (2t)^{-1} int_0^inf e^{-s/(2t)} a(x; s) ds.

    (This is the distributional content of the Box-Muller construction:
    X = sqrt(2E) cos Theta with E exponential.)  Returns the closed form
    and the quadrature value as a pair."""
    if t <= 0:
        raise DomainError("t must be positive")
    closed = math.exp(-x * x / (2.0 * t)) / math.sqrt(2.0 * math.pi * t)
    mean = 2.0 * t

    def g(s):
        s = np.asarray(s, dtype=float)
        return np.exp(-s / mean) / (mean * math.pi * np.sqrt(s - x * x))

    quad = integrate_sqrt_singular(g, x * x, math.inf, "lower", budget,
                                   decay=Decay.exponential(1.0 / mean, 1.0))
    return closed, quad


@dataclass(frozen=True)
class CheckCertificate:
    passed: Optional[bool]
    worst: float
    tolerance: float
    note: str = ""

    def to_json(self):
        return {"passed": self.passed, "worst": self.worst,
                "tolerance": self.tolerance, "note": self.note}


@dataclass(frozen=True, eq=False)
class ClassVerdict:
    """Flags are True/False/None (None = inconclusive); every flag comes
    with the certificate that produced it."""

    flags: dict
    certificates: dict

    def to_json(self):
        return {"flags": dict(self.flags),
                "certificates": {k: v.to_json() for k, v in self.certificates.items()}}


def _direction_grid(rad: RadialMeasure, per_decade: int = 64) -> np.ndarray:
    sup = rad.sup_support
    lo_support = max(rad.inf_support, 0.0)
    if math.isinf(sup):
        lo, hi = 1e-2, 1e2
    else:
        lo, hi = 1e-3 * sup, 0.995 * sup
    lo = max(lo, lo_support + 1e-3 * (hi - lo_support))
    decades = max(math.log10(hi / lo), 0.1)
    n = max(int(per_decade * decades), 16)
    return np.geomspace(lo, hi, n)


def _support_gap_scan(vals: np.ndarray, tol: float) -> bool:
    """True when the sampled density is positive up to some index and
    negligible after (no interior gap)."""
    scale = float(np.max(vals)) if vals.size else 0.0
    if scale <= 0:
        return True
    small = vals < tol * scale
    if not small.any():
        return True
    first_small = int(np.argmax(small))
    return bool(np.all(small[first_small:]))


def classify(nu: PolarLevyMeasure,
             budget: QuadratureBudget = DEFAULT_BUDGET,
             cm_grid=None, cm_tol: float = 1e-6,
             mono_tol: float = 1e-6,
             range_tol: float = 1e-6) -> ClassVerdict:
    """Run all membership tests on a polar measure.

    Atoms rule out the density-defined classes immediately.  Densities
    are probed per direction; a measure belongs to a class only if every
    direction passes."""
    flags = {"ml1": None, "ml2": None, "jurek_u": None, "bondesson_b": None,
             "type_g": None, "type_a_range": None}
    certs = {}

    ml1 = in_ML_k(nu, 1, rel_tol=1e-5)
    ml2 = in_ML_k(nu, 2, rel_tol=1e-5)
    flags["ml1"] = ml1.member
    flags["ml2"] = ml2.member
    certs["ml1"] = CheckCertificate(ml1.member, ml1.value, 1e-5, ml1.note)
    certs["ml2"] = CheckCertificate(ml2.member, ml2.value, 1e-5, ml2.note)

    has_atoms = any(rad.atoms for rad in nu.radial)
    if has_atoms:
        note = "atoms present; class requires an absolutely continuous radial part"
        for key in ("jurek_u", "bondesson_b", "type_g", "type_a_range"):
            flags[key] = False
            certs[key] = CheckCertificate(False, math.inf, 0.0, note)
        return ClassVerdict(flags, certs)

    worst_mono = -math.inf
    worst_b = 0.0
    worst_g = 0.0
    u_ok = b_ok = g_ok = True
    for rad in nu.radial:
        grid = _direction_grid(rad)
        dens = rad.density_at
        vals = np.asarray(dens(grid), dtype=float)
        scale = max(float(np.max(vals)), 1e-300)
        inc = float(np.max(np.diff(vals))) / scale
        worst_mono = max(worst_mono, inc)
        if inc > mono_tol:
            u_ok = False
        sub = cm_grid if cm_grid is not None else _cm_probe_grid(rad)
        cm_b = is_completely_monotone(dens, sub, rel_tol=cm_tol)
        if not cm_b.consistent:
            b_ok = False
        worst_b = min(worst_b, cm_b.worst)
        g_fn = lambda u: dens(np.sqrt(np.asarray(u, dtype=float)))
        cm_g = is_completely_monotone(g_fn, sub ** 2, rel_tol=cm_tol)
        if not cm_g.consistent:
            g_ok = False
        worst_g = min(worst_g, cm_g.worst)
    flags["jurek_u"] = u_ok
    certs["jurek_u"] = CheckCertificate(u_ok, worst_mono, mono_tol,
                                        "max normalised increase over log grid")
    flags["bondesson_b"] = b_ok
    certs["bondesson_b"] = CheckCertificate(b_ok, worst_b, cm_tol,
                                            "finite-difference complete monotonicity")
    flags["type_g"] = g_ok
    certs["type_g"] = CheckCertificate(g_ok, worst_g, cm_tol,
                                       "complete monotonicity of l(sqrt(u))")

    # Arcsine-range test: constructive inverse plus support-gap scan.
    try:
        inv = invert_arcsine(1, nu, budget)
        grids = []
        gap_ok = True
        for rad in nu.radial:
            grid = _direction_grid(rad, per_decade=16)
            vals = np.asarray(rad.density_at(grid), dtype=float)
            gap_ok = gap_ok and _support_gap_scan(vals, range_tol)
            sup = rad.sup_support
            if math.isinf(sup):
                grids.append(np.geomspace(1e-2, 25.0, 20))
            else:
                grids.append(np.linspace(0.05 * sup, 1.1 * sup, 20) ** 2)
        certs_range = inv.certify(grids, tol=range_tol)
        passed = gap_ok and all(c.passed for c in certs_range)
        worst = min(min(c.worst_negative for c in certs_range),
                    -max(c.worst_increase for c in certs_range))
        note = "inversion positivity/monotonicity"
        if not gap_ok:
            note += "; interior support gap"
        flags["type_a_range"] = passed
        certs["type_a_range"] = CheckCertificate(passed, worst, range_tol, note)
    except DomainError as exc:
        flags["type_a_range"] = None
        certs["type_a_range"] = CheckCertificate(None, math.nan, range_tol, str(exc))
    return ClassVerdict(flags, certs)


def _cm_probe_grid(rad: RadialMeasure, n: int = 16) -> np.ndarray:
    sup = rad.sup_support
    if math.isinf(sup):
        return np.geomspace(0.05, 8.0, n)
    # Keep the order-8 stencil x + 2x inside the support.
    return np.geomspace(5e-3 * sup, 0.3 * sup, n)

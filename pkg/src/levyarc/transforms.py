"""Measure transformations built on the one-sided arcsine kernels.

For a radial measure m on (0, inf) the two transformed radial densities
are

    (k=1)  r -> (2/pi) int_{(r^2, inf)} (s   - r^2)^{-1/2} m(ds),  r > 0,
    (k=2)  r -> (2/pi) int_{(r,   inf)} (s^2 - r^2)^{-1/2} m(ds),  r > 0,

applied per direction of a polar measure.  The k=1 domain is the class
with finite integral of 1 ^ r, the k=2 domain the class with finite
integral of 1 ^ r^2, and the two maps agree modulo radial power
substitutions: the k=2 image of m equals the k=1 image of the
2-power-transform of m.

Dilation mixtures ("Upsilon" maps) share the form

    (U_tau m)(B) = int_0^inf m(u^{-1} B) tau(du)

and include the exponential mixture U0 (tau = e^{-u} du), the
two-parameter family with kernel beta * u^{-alpha-1} e^{-u^beta} du,
and the arcsine mixture that reproduces the k=2 transform.

The half-order fractional integral

    (H m)(u) = int_{(u, inf)} pi^{-1/2} (s - u)^{-1/2} m(ds),  u > 0,

composes with itself to the tail function: (H H m)(u) = m((u, inf)).
That self-composition identity is what makes the arcsine maps
invertible, and `invert_arcsine` implements the resulting constructive
inverse, returning per-direction tail functions together with a
nonnegativity / monotonicity certificate.

All outputs are lazy: densities are evaluated by quadrature on demand
and carry enough endpoint/tail metadata for further composition.  Inner
evaluations of a composed transform run at one hundredth of the outer
tolerance so composition error stays within the outer budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, NegativeTail
from .measures import (Decay, PolarLevyMeasure, RadialDensity, RadialMeasure,
                       in_ML_k, integrate_radial, p_transform)
from .quadrature import (DEFAULT_BUDGET, QuadratureBudget, QuadResult,
                         integrate_adaptive, integrate_dyadic_endpoint,
                         integrate_semiinfinite, integrate_sqrt_singular)

__all__ = [
    "DilationMeasure", "TransformedDensity", "arcsine_density",
    "arcsine_transform", "arcsine_transform_upsilon_form", "half_integral",
    "invert_arcsine", "ArcsineInversion", "RangeCertificate",
    "upsilon0", "upsilon_alpha_beta", "upsilon_general",
    "check_commutation", "first_moment",
    "exp_dilation", "arcsine_dilation", "alpha_beta_dilation",
]


@dataclass(frozen=True, eq=False)
class DilationMeasure:
    """Mixing measure of an Upsilon transformation."""

    measure: RadialMeasure


@dataclass(frozen=True, eq=False)
class TransformedDensity(PolarLevyMeasure):
    """Polar measure whose density parts are quadrature-backed
    evaluators; remembers where it came from and can be rebuilt at a
    tighter budget for composition."""

    provenance: str = ""
    _rebuild: Optional[Callable] = field(default=None, repr=False, compare=False)

    def with_budget(self, budget: QuadratureBudget) -> "TransformedDensity":
        if self._rebuild is None:
            return self
        return self._rebuild(budget)


def _tightened_input(nu, budget: QuadratureBudget):
    """Inner evaluations of a composition run at outer tol * 1e-2."""
    if isinstance(nu, TransformedDensity):
        return nu.with_budget(budget.tightened())
    return nu


# ---------------------------------------------------------------------------
# arcsine kernels


def arcsine_density(k: int, r, s: float):
    """One-sided arcsine kernel a_k(r; s).

    k=1: (2/pi) (s - r^2)^{-1/2} on 0 < r < sqrt(s);
    k=2: (2/pi) (s^2 - r^2)^{-1/2} on 0 < r < s.
    Returns +inf on the boundary r^2 = s^k, 0 outside the support.
    """
    if k not in (1, 2):
        raise DomainError("k must be 1 or 2")
    if s <= 0:
        raise DomainError("s must be positive")
    r = np.asarray(r, dtype=float)
    scalar = r.ndim == 0
    r = np.atleast_1d(r)
    gap = s ** k - r * r
    out = np.zeros_like(r)
    inside = (r > 0) & (gap > 0)
    out[inside] = (2.0 / math.pi) / np.sqrt(gap[inside])
    out[(r > 0) & (gap == 0.0)] = math.inf
    return float(out[0]) if scalar else out


def _combined_tail(decay: Optional[Decay], extra_poly: float) -> Optional[Decay]:
    """Tail of density * s**extra_poly."""
    if decay is None:
        return None
    if decay.kind == "exponential":
        return decay
    return Decay.polynomial(decay.exponent + extra_poly)


def _ak_part_value(part: RadialDensity, k: int, r: float,
                   budget: QuadratureBudget) -> QuadResult:
    """(2/pi) integral of (s^k - r^2)^{-1/2} against one density part.

    When the kernel blow-up point lies inside the support the integral
    is computed in the substituted variable s = sing + w^2, where the
    kernel cancels exactly (k=1) or reduces to the smooth factor
    (2r + w^2)^{-1/2} (k=2); this avoids the catastrophic cancellation
    of recomputing s - r^2 near the singularity."""
    a, b = part.support
    sing = r * r if k == 1 else r  # kernel blow-up point in s
    if sing >= b:
        return QuadResult(0.0, 0.0)
    dens = part.density_at

    if sing >= a:
        if k == 1:
            def h(w):
                w = np.asarray(w, dtype=float)
                return 2.0 * dens(sing + w * w)
        else:
            def h(w):
                w = np.asarray(w, dtype=float)
                return 2.0 * dens(sing + w * w) / np.sqrt(2.0 * r + w * w)

        if sing == a:
            le = part.left_exponent
            lower_exp = None if le is None else 2.0 * le
        else:
            lower_exp = 0.0
        if math.isinf(b):
            wdecay = _w_space_decay(part.decay, k)
            if lower_exp == 0.0:
                res = integrate_semiinfinite(h, 0.0, wdecay, budget)
            else:
                res = (_bounded_piece(h, 0.0, 1.0, lower_exp, 0.0, budget)
                       + integrate_semiinfinite(h, 1.0, wdecay, budget))
        else:
            w_hi = math.sqrt(b - sing)
            res = _bounded_piece(h, 0.0, w_hi, lower_exp,
                                 part.right_exponent, budget)
    else:
        # Kernel smooth on the whole support; only the part's own
        # endpoint behaviour matters.
        if k == 1:
            kern = lambda s: 1.0 / np.sqrt(s - r * r)
        else:
            kern = lambda s: 1.0 / np.sqrt((s - r) * (s + r))

        def g(s):
            s = np.asarray(s, dtype=float)
            return dens(s) * kern(s)

        res = _part_with_smooth_factor(part, g, budget, inf_poly=-k / 2.0)
    return res.scaled(2.0 / math.pi)


def _w_space_decay(decay: Optional[Decay], k: int) -> Optional[Decay]:
    """Tail of w -> dens(sing + w^2) (times the k=2 smooth factor)."""
    if decay is None:
        return None
    if decay.kind == "exponential":
        return Decay.exponential(decay.rate, 2.0 * decay.power)
    return Decay.polynomial(2.0 * decay.exponent - (0.0 if k == 1 else 1.0))


def _part_with_smooth_factor(part: RadialDensity, g: Callable,
                             budget: QuadratureBudget,
                             inf_poly: float) -> QuadResult:
    """Integrate g (density times a factor smooth on the closed support)
    honouring the part's declared endpoint behaviour."""
    a, b = part.support
    le, re = part.left_exponent, part.right_exponent
    if math.isinf(b):
        mid = max(2.0 * a, a + 1.0)
        head = _bounded_piece(g, a, mid, le, 0.0, budget)
        return head + integrate_semiinfinite(
            g, mid, _combined_tail(part.decay, inf_poly), budget)
    return _bounded_piece(g, a, b, le, re, budget)


def _bounded_piece(g, lo, hi, le, re, budget) -> QuadResult:
    if hi <= lo:
        return QuadResult(0.0, 0.0)

    def mode(e):
        if e is None:
            return "dyadic"
        if abs(e + 0.5) < 1e-9:
            return "sqrt"
        return "plain" if e >= 0.0 else "dyadic"

    lmode, rmode = mode(le), mode(re)
    if lmode == "plain" and rmode == "plain":
        return integrate_adaptive(g, lo, hi, budget)
    mid = 0.5 * (lo + hi)
    out = QuadResult(0.0, 0.0)
    if lmode == "plain":
        out = out + integrate_adaptive(g, lo, mid, budget)
    elif lmode == "sqrt":
        out = out + integrate_sqrt_singular(g, lo, mid, "lower", budget)
    else:
        out = out + integrate_dyadic_endpoint(g, lo, mid, "lower", budget)
    if rmode == "plain":
        out = out + integrate_adaptive(g, mid, hi, budget)
    elif rmode == "sqrt":
        out = out + integrate_sqrt_singular(g, mid, hi, "upper", budget)
    else:
        out = out + integrate_dyadic_endpoint(g, mid, hi, "upper", budget)
    return out


def _ak_output_metadata(rad: RadialMeasure, k: int):
    """Support bound, right exponent and tail decay of the transformed
    density in one direction."""
    sup = rad.sup_support
    out_sup = math.inf if math.isinf(sup) else (math.sqrt(sup) if k == 1 else sup)
    out_decay = None
    if math.isinf(sup):
        decays = [p.decay for p in rad.parts if math.isinf(p.support[1])]
        if all(d is not None for d in decays) and decays:
            if all(d.kind == "exponential" for d in decays):
                rate = min(d.rate for d in decays)
                power = min(d.power for d in decays)
                out_decay = Decay.exponential(rate, 2.0 * power if k == 1 else power)
            else:
                expo = max(d.exponent for d in decays if d.kind == "polynomial")
                out_decay = Decay.polynomial(2.0 * expo + 1.0 if k == 1 else expo)
    atom_at_sup = any(s == sup for s, _ in rad.atoms)
    out_right = -0.5 if (math.isfinite(sup) and atom_at_sup) else None
    if math.isinf(sup):
        out_right = 0.0
    return out_sup, out_right, out_decay


def arcsine_transform(k: int, nu: PolarLevyMeasure,
                      budget: QuadratureBudget = DEFAULT_BUDGET) -> TransformedDensity:
    """Arcsine transformation of order k, computed directly from the
    radial integral formula.

    Requires the order-k truncated moment of the input to be finite;
    per direction, atoms contribute a_k(r; s_i) w_i exactly and density
    segments are integrated with the square substitution at the kernel
    singularity.
    """
    if k not in (1, 2):
        raise DomainError("k must be 1 or 2")
    verdict = in_ML_k(nu, k, rel_tol=1e-6)
    if verdict.member is False:
        raise DomainError(f"input fails the 1 ^ r^{k} integrability test")

    def build(bud: QuadratureBudget) -> TransformedDensity:
        src = _tightened_input(nu, bud)
        rads = []
        for rad in src.radial:
            rads.append(_ak_radial(rad, k, bud))
        return TransformedDensity(
            nu.dimension, nu.directions, tuple(rads),
            provenance=f"arcsine_transform(k={k})", _rebuild=build)

    return build(budget)


def _ak_radial(rad: RadialMeasure, k: int, budget: QuadratureBudget) -> RadialMeasure:
    out_sup, out_right, out_decay = _ak_output_metadata(rad, k)
    atoms = tuple(rad.atoms)
    parts = tuple(rad.parts)

    def ev(r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        out = np.zeros_like(r)
        for i, ri in enumerate(r):
            acc = 0.0
            for s, w in atoms:
                acc += w * arcsine_density(k, float(ri), s)
            for part in parts:
                acc += _ak_part_value(part, k, float(ri), budget).value
            out[i] = acc
        return out

    dens = RadialDensity((0.0, out_sup), ev, None, out_right, out_decay)
    return RadialMeasure(parts=(dens,))


# ---------------------------------------------------------------------------
# Upsilon transformations


def exp_dilation() -> DilationMeasure:
    """tau(du) = e^{-u} du: the exponential mixture."""
    dens = RadialDensity((0.0, math.inf), lambda u: np.exp(-np.asarray(u, dtype=float)),
                         0.0, None, Decay.exponential(1.0, 1.0))
    return DilationMeasure(RadialMeasure(parts=(dens,)))


def arcsine_dilation() -> DilationMeasure:
    """tau(du) = (2/pi)(1 - u^2)^{-1/2} du on (0, 1)."""

    def dens(u):
        u = np.asarray(u, dtype=float)
        return (2.0 / math.pi) / np.sqrt(1.0 - u * u)

    return DilationMeasure(RadialMeasure(parts=(
        RadialDensity((0.0, 1.0), dens, 0.0, -0.5, None),)))


def alpha_beta_dilation(alpha: float, beta: float) -> DilationMeasure:
    """tau(du) = beta u^{-alpha-1} e^{-u^beta} du."""
    if not (alpha < 2.0 and 0.0 < beta <= 2.0):
        raise DomainError("need alpha < 2 and beta in (0, 2]")

    def dens(u):
        u = np.asarray(u, dtype=float)
        return beta * u ** (-alpha - 1.0) * np.exp(-u ** beta)

    return DilationMeasure(RadialMeasure(parts=(
        RadialDensity((0.0, math.inf), dens, -alpha - 1.0, None,
                      Decay.exponential(1.0, beta)),)))


def _product_tail(nu_rad: RadialMeasure, tau_rad: RadialMeasure):
    """Support bound and decay of the dilation-mixture density: the
    output radius is a product of an input radius and a mixing radius,
    so tails combine multiplicatively."""
    s_nu, s_tau = nu_rad.sup_support, tau_rad.sup_support
    if math.isfinite(s_nu) and math.isfinite(s_tau):
        return s_nu * s_tau, None
    nu_decays = [p.decay for p in nu_rad.parts if math.isinf(p.support[1])]
    tau_decays = [p.decay for p in tau_rad.parts if math.isinf(p.support[1])]

    def summarise(decays, sup):
        if math.isfinite(sup):
            return ("bounded", sup)
        if not decays or any(d is None for d in decays):
            return ("unknown", None)
        if all(d.kind == "exponential" for d in decays):
            return ("exp", (min(d.rate for d in decays), min(d.power for d in decays)))
        return ("poly", max(d.exponent for d in decays if d.kind == "polynomial"))

    a = summarise(nu_decays, s_nu)
    t = summarise(tau_decays, s_tau)
    if a[0] == "unknown" or t[0] == "unknown":
        return math.inf, None
    if a[0] == "poly" or t[0] == "poly":
        exps = [x[1] for x in (a, t) if x[0] == "poly"]
        return math.inf, Decay.polynomial(max(exps))
    if a[0] == "bounded":
        rate, power = t[1]
        return math.inf, Decay.exponential(rate / a[1] ** power, power)
    if t[0] == "bounded":
        rate, power = a[1]
        return math.inf, Decay.exponential(rate / t[1] ** power, power)
    (lam, p), (kap, q) = a[1], t[1]
    # Laplace balance of kap*(x/s)^q + lam*s^p over s gives a stretched
    # exponential with power pq/(p+q); rate shaved for safety.
    power = p * q / (p + q)
    rate = (kap ** (p / (p + q)) * lam ** (q / (p + q))
            * ((p / q) ** (q / (p + q)) + (q / p) ** (p / (p + q))))
    return math.inf, Decay.exponential(0.9 * rate, power)


def _cross_dilation_integral(nu_part: RadialDensity, tau_part: RadialDensity,
                             x: float, budget: QuadratureBudget) -> float:
    """integral over s of (1/s) k_tau(x/s) l_nu(s) ds."""
    a, b = nu_part.support
    u0, u1 = tau_part.support
    lo = a if u1 == math.inf else max(a, x / u1)
    hi = b if u0 == 0.0 else min(b, x / u0)
    if hi <= lo:
        return 0.0
    dens_nu = nu_part.density_at
    dens_tau = tau_part.density_at

    def g(s):
        s = np.asarray(s, dtype=float)
        return dens_nu(s) * dens_tau(x / s) / s

    # Endpoint behaviour: the kernel's right edge maps to the lower s
    # limit, its left edge to the upper s limit.
    if lo > a:
        left_exp = tau_part.right_exponent
    else:
        left_exp = nu_part.left_exponent
        if math.isfinite(u1) and abs(lo - x / u1) < 1e-300:
            left_exp = None
    if math.isfinite(hi):
        if hi < b:
            right_exp = tau_part.left_exponent
        else:
            right_exp = nu_part.right_exponent
        return _bounded_piece(g, lo, hi, left_exp, right_exp, budget).value

    # Unbounded upper limit: kernel argument x/s tends to 0, so the tail
    # of g is the nu tail shifted by the kernel's left exponent.
    mid = max(2.0 * lo, lo + 1.0)
    head = _bounded_piece(g, lo, mid, left_exp, 0.0, budget)
    tle = tau_part.left_exponent
    if nu_part.decay is not None and nu_part.decay.kind == "exponential":
        tail_decay = nu_part.decay
    elif (nu_part.decay is not None and nu_part.decay.kind == "polynomial"
          and tle is not None):
        tail_decay = Decay.polynomial(nu_part.decay.exponent - 1.0 - tle)
    else:
        tail_decay = None
    return (head + integrate_semiinfinite(g, mid, tail_decay, budget)).value


def upsilon_general(nu: PolarLevyMeasure, tau,
                    budget: QuadratureBudget = DEFAULT_BUDGET,
                    name: str = "upsilon_general",
                    check_domain: bool = False) -> TransformedDensity:
    """General dilation mixture (U_tau m)(B) = int m(u^{-1}B) tau(du),
    applied per direction.

    Atom/atom combinations stay atoms; every other combination yields a
    density, evaluated on demand.  With ``check_domain`` the output is
    required to pass the 1 ^ r^2 integrability test.
    """
    tau_rad = tau.measure if isinstance(tau, DilationMeasure) else tau

    def build(bud: QuadratureBudget) -> TransformedDensity:
        src = _tightened_input(nu, bud)
        rads = tuple(_upsilon_radial(rad, tau_rad, bud) for rad in src.radial)
        return TransformedDensity(nu.dimension, nu.directions, rads,
                                  provenance=name, _rebuild=build)

    out = build(budget)
    if check_domain:
        verdict = in_ML_k(out, 2, rel_tol=1e-5)
        if verdict.member is not True:
            raise DomainError(
                f"{name}: output fails (or cannot be certified for) the "
                f"1 ^ r^2 integrability test: {verdict.note}")
    return out


def _upsilon_radial(rad: RadialMeasure, tau_rad: RadialMeasure,
                    budget: QuadratureBudget) -> RadialMeasure:
    out_atoms = tuple((s * u, w * m)
                      for s, w in rad.atoms for u, m in tau_rad.atoms)
    has_density = rad.parts or tau_rad.parts
    if not has_density:
        return RadialMeasure(atoms=out_atoms)

    nu_atoms, nu_parts = rad.atoms, rad.parts
    tau_atoms, tau_parts = tau_rad.atoms, tau_rad.parts

    def ev(x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros_like(x)
        for s, w in nu_atoms:
            for tp in tau_parts:
                out += w / s * tp.density_at(x / s)
        for u, m in tau_atoms:
            for p in nu_parts:
                out += m / u * p.density_at(x / u)
        for i, xi in enumerate(x):
            acc = 0.0
            for p in nu_parts:
                for tp in tau_parts:
                    acc += _cross_dilation_integral(p, tp, float(xi), budget)
            out[i] += acc
        return out

    out_sup, out_decay = _product_tail(rad, tau_rad)
    left_exps = []
    for s, w in nu_atoms:
        left_exps.extend(tp.left_exponent for tp in tau_parts)
    for u, m in tau_atoms:
        left_exps.extend(p.left_exponent for p in nu_parts)
    if nu_parts and tau_parts:
        left_exps.append(None)
    left = None
    if left_exps and all(e is not None for e in left_exps):
        left = min(left_exps)
    dens = RadialDensity((0.0, out_sup), ev, left, None, out_decay)
    return RadialMeasure(atoms=out_atoms, parts=(dens,))


def upsilon0(nu: PolarLevyMeasure,
             budget: QuadratureBudget = DEFAULT_BUDGET) -> TransformedDensity:
    """Exponential dilation mixture: atoms at s become densities
    (w/s) e^{-x/s}; density parts are mixed against e^{-u} du."""
    return upsilon_general(nu, exp_dilation(), budget, name="upsilon0")


def upsilon_alpha_beta(nu: PolarLevyMeasure, alpha: float, beta: float,
                       budget: QuadratureBudget = DEFAULT_BUDGET) -> TransformedDensity:
    """Dilation mixture with kernel beta u^{-alpha-1} e^{-u^beta} du,
    alpha < 2, beta in (0, 2].

    For (alpha, beta) = (-2, 2) every valid jump measure is in the
    domain; for other parameters the output's 1 ^ r^2 integrability is
    certified numerically.
    """
    tau = alpha_beta_dilation(alpha, beta)
    check = not (alpha == -2.0 and beta == 2.0)
    return upsilon_general(nu, tau, budget,
                           name=f"upsilon_alpha_beta({alpha},{beta})",
                           check_domain=check)


def arcsine_transform_upsilon_form(k: int, nu: PolarLevyMeasure,
                                   budget: QuadratureBudget = DEFAULT_BUDGET
                                   ) -> TransformedDensity:
    """Arcsine transformation computed through the dilation-mixture
    route: power-transform the input by k/2, then mix against the
    arcsine dilation on (0, 1).

    Exists as an independent cross-check of `arcsine_transform`; the two
    must agree pointwise within combined quadrature tolerance.
    """
    if k not in (1, 2):
        raise DomainError("k must be 1 or 2")
    verdict = in_ML_k(nu, k, rel_tol=1e-6)
    if verdict.member is False:
        raise DomainError(f"input fails the 1 ^ r^{k} integrability test")
    shifted = p_transform(_tightened_input(nu, budget), k / 2.0)
    return upsilon_general(shifted, arcsine_dilation(), budget,
                           name=f"arcsine_upsilon_form(k={k})")


# ---------------------------------------------------------------------------
# half-order fractional integral and the constructive inverse


def half_integral(rho: RadialMeasure,
                  budget: QuadratureBudget = DEFAULT_BUDGET) -> RadialDensity:
    """Density of the order-1/2 fractional integral
    u -> int_{(u, inf)} pi^{-1/2} (s - u)^{-1/2} rho(ds).

    Requires int_{(b, inf)} s^{-1/2} rho(ds) < inf for every b > 0,
    which the declared tail metadata must certify."""
    for part in rho.parts:
        if math.isinf(part.support[1]):
            d = part.decay
            if d is None:
                raise DomainError("unbounded density part without decay metadata")
            if d.kind == "polynomial" and d.exponent >= -0.5:
                raise DomainError(
                    "tail too heavy: integral of s^{-1/2} against the measure diverges")
    atoms, parts = rho.atoms, rho.parts
    c = 1.0 / math.sqrt(math.pi)

    def ev(u):
        u = np.atleast_1d(np.asarray(u, dtype=float))
        out = np.zeros_like(u)
        for i, ui in enumerate(u):
            acc = 0.0
            for s, w in atoms:
                if s > ui:
                    acc += w / math.sqrt(s - ui)
            for part in parts:
                acc += _half_integral_part(part, float(ui), budget)
            out[i] = c * acc
        return out

    sup = rho.sup_support
    left = _half_integral_left_exponent(rho)
    right = _half_integral_right_exponent(rho)
    decay = _half_integral_decay(rho)
    return RadialDensity((0.0, sup), ev, left, right, decay)


def _half_integral_part(part: RadialDensity, u: float,
                        budget: QuadratureBudget) -> float:
    a, b = part.support
    if u >= b:
        return 0.0
    dens = part.density_at

    if u >= a:
        # s = u + w^2 cancels the kernel exactly.
        def h(w):
            w = np.asarray(w, dtype=float)
            return 2.0 * dens(u + w * w)

        if u == a:
            le = part.left_exponent
            lower_exp = None if le is None else 2.0 * le
        else:
            lower_exp = 0.0
        if math.isinf(b):
            wdecay = _w_space_decay(part.decay, 1)
            if lower_exp == 0.0:
                return integrate_semiinfinite(h, 0.0, wdecay, budget).value
            return (_bounded_piece(h, 0.0, 1.0, lower_exp, 0.0, budget)
                    + integrate_semiinfinite(h, 1.0, wdecay, budget)).value
        w_hi = math.sqrt(b - u)
        return _bounded_piece(h, 0.0, w_hi, lower_exp,
                              part.right_exponent, budget).value

    def g(s):
        s = np.asarray(s, dtype=float)
        return dens(s) / np.sqrt(s - u)

    return _part_with_smooth_factor(part, g, budget, inf_poly=-0.5).value


def _half_integral_left_exponent(rho: RadialMeasure) -> Optional[float]:
    exps = [0.0]
    for p in rho.parts:
        if p.support[0] == 0.0:
            if p.left_exponent is None:
                return None
            exps.append(min(0.0, p.left_exponent + 0.5))
    return min(exps)


def _half_integral_right_exponent(rho: RadialMeasure) -> Optional[float]:
    sup = rho.sup_support
    if math.isinf(sup):
        return 0.0
    if any(s == sup for s, _ in rho.atoms):
        return -0.5
    for p in rho.parts:
        if p.support[1] == sup:
            if p.right_exponent is None:
                return None
            return p.right_exponent + 0.5
    return None


def _half_integral_decay(rho: RadialMeasure) -> Optional[Decay]:
    if math.isfinite(rho.sup_support):
        return None
    decays = [p.decay for p in rho.parts if math.isinf(p.support[1])]
    if not decays or any(d is None for d in decays):
        return None
    if all(d.kind == "exponential" for d in decays):
        return Decay.exponential(min(d.rate for d in decays),
                                 min(d.power for d in decays))
    return Decay.polynomial(max(d.exponent for d in decays
                                if d.kind == "polynomial") + 0.5)


@dataclass(frozen=True)
class RangeCertificate:
    """Evidence from the constructive inverse: tails must be nonnegative
    and nonincreasing up to a normalised tolerance."""

    passed: bool
    worst_negative: float
    worst_increase: float
    tolerance: float
    grid: np.ndarray
    values: np.ndarray


@dataclass(frozen=True, eq=False)
class ArcsineInversion:
    """Per-direction tail functions u -> nu((u, inf)) recovered from a
    transformed density."""

    directions: tuple
    tails: tuple  # vectorised callables

    def tail_at(self, direction_index: int, u):
        return self.tails[direction_index](u)

    def certify(self, grids, tol: float = 1e-6) -> tuple:
        """Normalised nonnegativity / monotonicity certificates on the
        given per-direction grids."""
        certs = []
        for t, grid in zip(self.tails, grids):
            grid = np.asarray(grid, dtype=float)
            vals = np.asarray(t(grid), dtype=float)
            scale = max(float(np.max(np.abs(vals))), 1e-300)
            worst_neg = float(np.min(vals)) / scale
            worst_inc = float(np.max(np.diff(vals))) / scale
            passed = (worst_neg >= -tol) and (worst_inc <= tol)
            certs.append(RangeCertificate(passed, worst_neg, worst_inc,
                                          tol, grid, vals))
        return tuple(certs)

    def require_in_range(self, grids, tol: float = 1e-6) -> None:
        for cert in self.certify(grids, tol):
            if not cert.passed:
                raise NegativeTail(
                    f"recovered tail violates nonnegativity/monotonicity "
                    f"(worst negative {cert.worst_negative:.3e}, worst "
                    f"increase {cert.worst_increase:.3e}, tol {tol:g})",
                    certificate=cert)


def invert_arcsine(k: int, ltilde: PolarLevyMeasure,
                   budget: QuadratureBudget = DEFAULT_BUDGET) -> ArcsineInversion:
    """Constructive inverse of the order-k arcsine transformation.

    For k=1 the recovered tail is T(u) = int_0^inf l(sqrt(u + w^2)) dw,
    obtained by applying the half-order integral twice (its
    self-composition yields the tail function).  For k=2 the same
    formula is evaluated at u^2, because the k=2 transform equals the
    k=1 transform of the 2-power-transformed measure.

    The result is meaningful only when the input is an arcsine image;
    `certify` / `require_in_range` turn failures of tail positivity or
    monotonicity into an explicit certificate.
    """
    if k not in (1, 2):
        raise DomainError("k must be 1 or 2")
    src = _tightened_input(ltilde, budget)
    tails = []
    for rad in src.radial:
        if rad.atoms:
            raise DomainError("transform images have no atoms; cannot invert")
        tails.append(_tail_from_density(rad, k, budget))
    return ArcsineInversion(ltilde.directions, tuple(tails))


def _tail_from_density(rad: RadialMeasure, k: int,
                       budget: QuadratureBudget) -> Callable:
    parts = rad.parts
    sup = rad.sup_support

    def dens(r):
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        for p in parts:
            out += p.density_at(r)
        return out

    decays = [p.decay for p in parts if math.isinf(p.support[1])]
    if decays and all(d is not None and d.kind == "exponential" for d in decays):
        # l(sqrt(u + w^2)) ~ exp(-rate * w^power) for large w
        rate = min(d.rate for d in decays)
        power = min(d.power for d in decays)
        w_decay = Decay.exponential(rate, power)
    elif decays and all(d is not None for d in decays):
        w_decay = Decay.polynomial(max(d.exponent for d in decays))
    else:
        w_decay = None
    right_exps = [p.right_exponent for p in parts
                  if math.isfinite(sup) and p.support[1] == sup]
    edge_exp = right_exps[0] if len(right_exps) == 1 else None

    def tail_one(u: float) -> float:
        def g(w):
            w = np.asarray(w, dtype=float)
            return dens(np.sqrt(u + w * w))

        if math.isinf(sup):
            return integrate_semiinfinite(g, 0.0, w_decay, budget).value
        top = sup * sup - u
        if top <= 0.0:
            return 0.0
        wb = math.sqrt(top)
        if edge_exp is not None and abs(edge_exp + 0.5) < 1e-9:
            # Split so the edge singularity is removed exactly.
            mid = 0.5 * wb
            return (integrate_adaptive(g, 0.0, mid, budget)
                    + integrate_sqrt_singular(g, mid, wb, "upper", budget)).value
        if edge_exp is not None and edge_exp >= 0.0:
            return integrate_adaptive(g, 0.0, wb, budget).value
        mid = 0.5 * wb
        return (integrate_adaptive(g, 0.0, mid, budget)
                + integrate_dyadic_endpoint(g, mid, wb, "upper", budget)).value

    if k == 1:
        def tail(u):
            u = np.asarray(u, dtype=float)
            scalar = u.ndim == 0
            u = np.atleast_1d(u)
            out = np.array([tail_one(float(x)) for x in u])
            return float(out[0]) if scalar else out
    else:
        def tail(u):
            u = np.asarray(u, dtype=float)
            scalar = u.ndim == 0
            u = np.atleast_1d(u)
            out = np.array([tail_one(float(x * x)) for x in u])
            return float(out[0]) if scalar else out

    return tail


# ---------------------------------------------------------------------------
# composite checks


def first_moment(nu: PolarLevyMeasure,
                 budget: QuadratureBudget = DEFAULT_BUDGET) -> np.ndarray:
    """Vector integral of x over the measure: sum over directions of
    direction * (radial first moment)."""
    out = np.zeros(nu.dimension)
    ident = lambda r: np.asarray(r, dtype=float)
    for xi, rad in zip(nu.directions, nu.radial):
        m = integrate_radial(rad, ident, budget, zero_power=1.0, inf_power=1.0)
        if math.isinf(m.value):
            raise DomainError("first moment diverges")
        out = out + xi * m.value
    return out


def check_commutation(rho: PolarLevyMeasure, grid,
                      budget: QuadratureBudget = DEFAULT_BUDGET,
                      floor: float = 1e-300) -> float:
    """Maximum normalised discrepancy over the grid between the two
    composite routes

        U_{-2,2} after arcsine(k=1)   and   arcsine(k=1) after U0,

    which agree for inputs with finite integral of 1 ^ r."""
    verdict = in_ML_k(rho, 1, rel_tol=1e-6)
    if verdict.member is False:
        raise DomainError("commutation requires finite integral of 1 ^ r")
    lhs = upsilon_alpha_beta(arcsine_transform(1, rho, budget), -2.0, 2.0, budget)
    rhs = arcsine_transform(1, upsilon0(rho, budget), budget)
    grid = np.asarray(grid, dtype=float)
    worst = 0.0
    for lr, rr in zip(lhs.radial, rhs.radial):
        lv = lr.density_at(grid)
        rv = rr.density_at(grid)
        disc = np.abs(lv - rv) / (np.abs(lv) + floor)
        worst = max(worst, float(np.max(disc)))
    return worst

"""Radial measures on (0, inf), their polar assemblies, and basic calculus.

A measure is represented as finitely many atoms plus density segments.
Each density segment declares its endpoint behaviour (power exponents at
the support edges, tail decay at infinity); the quadrature layer uses
those declarations to pick substitutions and to decide convergence
analytically where possible.  Measures with infinite total mass are
legal throughout; operations report them as ``math.inf`` rather than
failing.

Multivariate measures live in polar form: finitely many unit directions,
one radial measure per direction.  Spherical weights are folded into the
radial parts at construction time, so equality of measures is equality
of per-direction radial measures and no rescaling gauge survives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DivergentIntegral, DomainError, NonConvergent, ValidationError
from .quadrature import (DEFAULT_BUDGET, Decay, QuadratureBudget, QuadResult,
                         integrate_adaptive, integrate_dyadic_endpoint,
                         integrate_semiinfinite, integrate_sqrt_singular)

__all__ = [
    "Decay", "RadialDensity", "RadialMeasure", "PolarLevyMeasure",
    "LevyTriplet", "DensityTable", "MLVerdict",
    "integrate", "tail", "truncated_moment", "in_ML_k", "p_transform",
]


def _masked(f: Callable, a: float, b: float) -> Callable:
    """Wrap a raw density callable so it vanishes outside (a, b) and
    accepts scalars or arrays."""

    def ev(r):
        arr = np.asarray(r, dtype=float)
        scalar = arr.ndim == 0
        arr = np.atleast_1d(arr)
        out = np.zeros_like(arr)
        m = (arr > a) & (arr < b)
        if m.any():
            out[m] = np.asarray(f(arr[m]), dtype=float)
        return float(out[0]) if scalar else out

    return ev


@dataclass(frozen=True, eq=False)
class RadialDensity:
    """One density segment of a radial measure.

    ``evaluate`` is the raw nonnegative density on the open interval
    ``support``; use :meth:`density_at` for the everywhere-defined
    version.  ``left_exponent`` / ``right_exponent`` declare power-law
    behaviour at the finite endpoints (e.g. -0.5 for an inverse square
    root blow-up); ``None`` means unknown, in which case integration
    falls back to certified endpoint scans.  ``decay`` describes the
    tail when the support is unbounded.
    """

    support: tuple
    evaluate: Callable
    left_exponent: Optional[float] = 0.0
    right_exponent: Optional[float] = 0.0
    decay: Optional[Decay] = None
    _masked_eval: Callable = field(init=False, repr=False, default=None)

    def __post_init__(self):
        a, b = self.support
        if not (0.0 <= a < b):
            raise ValidationError(f"support ({a}, {b}) is not a valid interval in [0, inf)")
        if math.isinf(b) and self.decay is None:
            raise ValidationError("unbounded support requires decay metadata")
        object.__setattr__(self, "support", (float(a), float(b)))
        object.__setattr__(self, "_masked_eval", _masked(self.evaluate, float(a), float(b)))

    def density_at(self, r):
        return self._masked_eval(r)

    def scaled(self, c: float) -> "RadialDensity":
        if c <= 0:
            raise ValidationError("scale factor must be positive")
        f = self.evaluate
        return RadialDensity(self.support, lambda r: c * np.asarray(f(r), dtype=float),
                             self.left_exponent, self.right_exponent, self.decay)

    def check_declared_exponents(self, n_probe: int = 6, slack: float = 30.0) -> bool:
        """Grid check that declared endpoint exponents bound the local
        behaviour within a constant factor.  Falsification only."""
        a, b = self.support
        ok = True
        if self.left_exponent is not None:
            base = (b - a) / 4 if math.isfinite(b) else 1.0
            d = base * 2.0 ** -np.arange(8, 8 + n_probe)
            vals = self.density_at(a + d)
            ref = d ** self.left_exponent
            ratio = vals / ref
            pos = ratio[vals > 0]
            if pos.size >= 2 and (pos.max() / max(pos.min(), 1e-300)) > slack:
                ok = False
        if self.right_exponent is not None and math.isfinite(b):
            base = (b - a) / 4
            d = base * 2.0 ** -np.arange(8, 8 + n_probe)
            vals = self.density_at(b - d)
            ref = d ** self.right_exponent
            ratio = vals / ref
            pos = ratio[vals > 0]
            if pos.size >= 2 and (pos.max() / max(pos.min(), 1e-300)) > slack:
                ok = False
        return ok


@dataclass(frozen=True, eq=False)
class RadialMeasure:
    """Atoms plus density segments on (0, inf)."""

    atoms: tuple = ()
    parts: tuple = ()

    def __post_init__(self):
        atoms = tuple((float(s), float(w)) for s, w in self.atoms)
        locs = [s for s, _ in atoms]
        if any(s <= 0 for s in locs):
            raise ValidationError("atom locations must be strictly positive")
        if any(w <= 0 for _, w in atoms):
            raise ValidationError("atom masses must be strictly positive")
        if len(set(locs)) != len(locs):
            raise ValidationError("atom locations must be distinct")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "parts", tuple(self.parts))

    @staticmethod
    def from_atom(s: float, w: float = 1.0) -> "RadialMeasure":
        return RadialMeasure(atoms=((s, w),))

    @staticmethod
    def from_density(density: RadialDensity) -> "RadialMeasure":
        return RadialMeasure(parts=(density,))

    def scaled(self, c: float) -> "RadialMeasure":
        return RadialMeasure(tuple((s, c * w) for s, w in self.atoms),
                             tuple(p.scaled(c) for p in self.parts))

    def density_at(self, r):
        """Sum of the density segments (atoms excluded)."""
        arr = np.asarray(r, dtype=float)
        scalar = arr.ndim == 0
        arr = np.atleast_1d(arr)
        out = np.zeros_like(arr)
        for p in self.parts:
            out += p.density_at(arr)
        return float(out[0]) if scalar else out

    @property
    def sup_support(self) -> float:
        his = [s for s, _ in self.atoms] + [p.support[1] for p in self.parts]
        return max(his) if his else 0.0

    @property
    def inf_support(self) -> float:
        los = [s for s, _ in self.atoms] + [p.support[0] for p in self.parts]
        return min(los) if los else 0.0


@dataclass(frozen=True, eq=False)
class PolarLevyMeasure:
    """Finitely many unit directions with one radial measure each.

    Spherical weights are normalised to one at construction; any
    supplied weights are folded into the radial measures.
    """

    dimension: int
    directions: tuple
    radial: tuple

    def __post_init__(self):
        dirs = tuple(np.asarray(d, dtype=float) for d in self.directions)
        if len(dirs) != len(self.radial):
            raise ValidationError("one radial measure per direction required")
        for d in dirs:
            if d.shape != (self.dimension,):
                raise ValidationError(f"direction {d} does not live in R^{self.dimension}")
            if abs(np.linalg.norm(d) - 1.0) > 1e-12:
                raise ValidationError(f"direction {d} is not a unit vector (tol 1e-12)")
        for i in range(len(dirs)):
            for j in range(i + 1, len(dirs)):
                if np.max(np.abs(dirs[i] - dirs[j])) < 1e-12:
                    raise ValidationError("duplicate directions")
        object.__setattr__(self, "directions", dirs)
        object.__setattr__(self, "radial", tuple(self.radial))

    @staticmethod
    def build(directions: Sequence, radial: Sequence[RadialMeasure],
              weights: Optional[Sequence[float]] = None,
              dimension: Optional[int] = None) -> "PolarLevyMeasure":
        dirs = [np.asarray(d, dtype=float) for d in directions]
        if dimension is None:
            dimension = dirs[0].size
        if weights is not None:
            if any(w <= 0 for w in weights):
                raise ValidationError("spherical weights must be strictly positive")
            radial = [m.scaled(float(w)) for m, w in zip(radial, weights)]
        return PolarLevyMeasure(dimension, tuple(dirs), tuple(radial))

    @staticmethod
    def one_dim(radial_pos: RadialMeasure,
                radial_neg: Optional[RadialMeasure] = None) -> "PolarLevyMeasure":
        """Measure on the real line: mass on (0, inf), optionally on (-inf, 0)."""
        dirs = [np.array([1.0])]
        rads = [radial_pos]
        if radial_neg is not None:
            dirs.append(np.array([-1.0]))
            rads.append(radial_neg)
        return PolarLevyMeasure(1, tuple(dirs), tuple(rads))


@dataclass(frozen=True, eq=False)
class LevyTriplet:
    """Gaussian part, polar jump measure, shift."""

    sigma: np.ndarray
    nu: PolarLevyMeasure
    gamma: np.ndarray
    check_levy: bool = True

    def __post_init__(self):
        sigma = np.asarray(self.sigma, dtype=float)
        gamma = np.asarray(self.gamma, dtype=float)
        d = self.nu.dimension
        if sigma.shape != (d, d):
            raise ValidationError(f"sigma must be {d}x{d}")
        if gamma.shape != (d,):
            raise ValidationError(f"gamma must have length {d}")
        if np.max(np.abs(sigma - sigma.T)) > 1e-12:
            raise ValidationError("sigma must be symmetric (tol 1e-12)")
        if np.min(np.linalg.eigvalsh(0.5 * (sigma + sigma.T))) < -1e-12:
            raise ValidationError("sigma must be positive semidefinite (tol 1e-12)")
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "gamma", gamma)
        if self.check_levy:
            verdict = in_ML_k(self.nu, 2, rel_tol=1e-6)
            if verdict.member is False:
                raise ValidationError("nu fails the 1 ^ |x|^2 integrability test")


@dataclass(frozen=True)
class MLVerdict:
    """Outcome of an integrability test; ``member`` is None when the
    quadrature could not certify either way within budget."""

    member: Optional[bool]
    value: float
    note: str = ""

    def __bool__(self):
        return bool(self.member)


@dataclass(frozen=True, eq=False)
class DensityTable:
    """Tabulated radial densities: the universal output format."""

    direction_index: np.ndarray
    grid: np.ndarray
    values: np.ndarray
    est_errors: np.ndarray

    def rows(self):
        for i in range(self.grid.size):
            yield (int(self.direction_index[i]), float(self.grid[i]),
                   float(self.values[i]), float(self.est_errors[i]))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="\n") as fh:
            fh.write("direction_index,r,density,est_error\n")
            for idx, r, v, e in self.rows():
                fh.write(f"{idx},{r:.17g},{v:.17g},{e:.17g}\n")


# ---------------------------------------------------------------------------
# integration against a radial measure


def _endpoint_mode(exponent: Optional[float]) -> str:
    if exponent is None:
        return "dyadic"
    if exponent <= -1.0:
        return "divergent"
    if abs(exponent + 0.5) < 1e-9:
        return "sqrt"
    if exponent < 0.0:
        return "dyadic"
    return "plain"


def _combine_power(e1: Optional[float], e2: Optional[float]) -> Optional[float]:
    if e1 is None or e2 is None:
        return None
    return e1 + e2


def _integrate_part(part: RadialDensity, f: Callable, budget: QuadratureBudget,
                    zero_power: Optional[float], inf_power: Optional[float],
                    lo: Optional[float] = None, hi: Optional[float] = None) -> QuadResult:
    """Integral of f * density over the part's support clipped to
    [lo, hi].  Returns inf value when endpoint analysis proves
    divergence; raises DivergentIntegral only from the certified scans.
    """
    a, b = part.support
    lo = a if lo is None else max(lo, a)
    hi = b if hi is None else min(hi, b)
    if hi <= lo:
        return QuadResult(0.0, 0.0)
    dens = part.density_at

    def q(r):
        r = np.asarray(r, dtype=float)
        return np.asarray(f(r), dtype=float) * dens(r)

    left_sing = lo == a  # density's declared left behaviour applies
    right_sing = hi == b and math.isfinite(b)
    tail_open = hi == b and math.isinf(b)

    left_exp = _combine_power(part.left_exponent, zero_power if a == 0.0 else 0.0) \
        if left_sing else 0.0
    right_exp = part.right_exponent if right_sing else 0.0
    if left_sing and _endpoint_mode(left_exp) == "divergent":
        return QuadResult(math.inf, 0.0)
    if right_sing and _endpoint_mode(right_exp) == "divergent":
        return QuadResult(math.inf, 0.0)

    if tail_open:
        if part.decay is not None and part.decay.kind == "polynomial":
            total_exp = _combine_power(part.decay.exponent, inf_power)
            if total_exp is not None and total_exp >= -1.0:
                return QuadResult(math.inf, 0.0)
        mid = max(2.0 * lo, lo + 1.0)
        head = _finite_piece(q, lo, mid, left_exp if left_sing else 0.0, 0.0, budget)
        if part.decay is not None and part.decay.kind == "polynomial":
            eff = Decay.polynomial(_combine_power(part.decay.exponent, inf_power))
            return head + integrate_semiinfinite(q, mid, eff, budget)
        return head + integrate_semiinfinite(q, mid, part.decay, budget)

    return _finite_piece(q, lo, hi, left_exp if left_sing else 0.0,
                         right_exp if right_sing else 0.0, budget)


def _finite_piece(q: Callable, lo: float, hi: float,
                  left_exp: Optional[float], right_exp: Optional[float],
                  budget: QuadratureBudget) -> QuadResult:
    lmode = _endpoint_mode(left_exp)
    rmode = _endpoint_mode(right_exp)
    if lmode == "plain" and rmode == "plain":
        return integrate_adaptive(q, lo, hi, budget)
    mid = 0.5 * (lo + hi)
    out = QuadResult(0.0, 0.0)
    if lmode == "plain":
        out = out + integrate_adaptive(q, lo, mid, budget)
    elif lmode == "sqrt":
        out = out + integrate_sqrt_singular(q, lo, mid, "lower", budget)
    else:
        out = out + integrate_dyadic_endpoint(q, lo, mid, "lower", budget)
    if rmode == "plain":
        out = out + integrate_adaptive(q, mid, hi, budget)
    elif rmode == "sqrt":
        out = out + integrate_sqrt_singular(q, mid, hi, "upper", budget)
    else:
        out = out + integrate_dyadic_endpoint(q, mid, hi, "upper", budget)
    return out


def integrate_radial(nu: RadialMeasure, f: Callable,
                     budget: QuadratureBudget = DEFAULT_BUDGET,
                     zero_power: Optional[float] = None,
                     inf_power: Optional[float] = None,
                     lo: Optional[float] = None,
                     hi: Optional[float] = None) -> QuadResult:
    """Integral of f against the measure, restricted to [lo, hi].

    ``zero_power`` / ``inf_power`` declare f's power behaviour at 0 and
    at infinity; with them, endpoint convergence is decided analytically
    from the density metadata.  Without them, certified endpoint scans
    are used, which can raise DivergentIntegral.  Returns value inf when
    the analysis proves divergence of a nonnegative integrand.
    """
    total = QuadResult(0.0, 0.0)
    for s, w in nu.atoms:
        if (lo is None or s > lo) and (hi is None or s <= hi):
            total = total + QuadResult(w * float(np.asarray(f(np.array([s])))[0]), 0.0)
    for part in nu.parts:
        res = _integrate_part(part, f, budget, zero_power, inf_power, lo, hi)
        if math.isinf(res.value):
            return QuadResult(math.inf, 0.0)
        total = total + res
    return total


def integrate(nu: RadialMeasure, f: Callable, rel_tol: float = 1e-10,
              budget: Optional[QuadratureBudget] = None,
              zero_power: Optional[float] = None,
              inf_power: Optional[float] = None) -> QuadResult:
    """Public integral of a nonnegative function against a radial measure.

    Raises DivergentIntegral when the integral is proven infinite and
    NonConvergent when the budget runs out first.
    """
    if budget is None:
        budget = QuadratureBudget(rel_tol=rel_tol)
    res = integrate_radial(nu, f, budget, zero_power, inf_power)
    if math.isinf(res.value):
        raise DivergentIntegral("integral of a nonnegative integrand diverges")
    return res


def tail(nu: RadialMeasure, u: float,
         budget: QuadratureBudget = DEFAULT_BUDGET) -> float:
    """nu((u, inf)); may be math.inf."""
    if u <= 0:
        raise DomainError("tail requires u > 0")
    total = sum(w for s, w in nu.atoms if s > u)
    one = lambda r: np.ones_like(np.asarray(r, dtype=float))
    for part in nu.parts:
        res = _integrate_part(part, one, budget, None, 0.0, lo=u)
        if math.isinf(res.value):
            return math.inf
        total += res.value
    return float(total)


def truncated_moment(nu: RadialMeasure, k: int,
                     budget: QuadratureBudget = DEFAULT_BUDGET) -> float:
    """The defining integral of the k-th truncated moment class:
    integral of (1 ^ r**k) d nu.  Returns math.inf when divergent."""
    if k not in (1, 2):
        raise DomainError("k must be 1 or 2")
    total = sum(w * min(1.0, s ** k) for s, w in nu.atoms)
    powf = lambda r: np.asarray(r, dtype=float) ** k
    one = lambda r: np.ones_like(np.asarray(r, dtype=float))
    for part in nu.parts:
        below = _integrate_part(part, powf, budget, float(k), None, hi=1.0)
        if math.isinf(below.value):
            return math.inf
        above = _integrate_part(part, one, budget, None, 0.0, lo=1.0)
        if math.isinf(above.value):
            return math.inf
        total += below.value + above.value
    return float(total)


def in_ML_k(nu: PolarLevyMeasure, k: int, rel_tol: float = 1e-8) -> MLVerdict:
    """Membership test for the class of measures with finite
    integral of (1 ^ |x|**k): sums truncated moments over directions."""
    budget = QuadratureBudget(rel_tol=rel_tol)
    total = 0.0
    for rad in nu.radial:
        try:
            m = truncated_moment(rad, k, budget)
        except NonConvergent as exc:
            return MLVerdict(None, float(exc.value or math.nan),
                             f"inconclusive: {exc}")
        except DivergentIntegral as exc:
            return MLVerdict(False, math.inf, str(exc))
        if math.isinf(m):
            return MLVerdict(False, math.inf, "truncated moment diverges")
        total += m
    return MLVerdict(True, total)


def p_transform(nu, p: float):
    """Pushforward under the radial power map r -> r**p.

    Atoms move to s**p; a density l(r) becomes
    u -> l(u**(1/p)) * (1/p) * u**(1/p - 1).  Directions are unchanged.
    The inverse is the (1/p)-transformation.
    """
    if p <= 0:
        raise DomainError("p must be positive")
    if isinstance(nu, PolarLevyMeasure):
        cls = type(nu)
        kwargs = {}
        if hasattr(nu, "provenance"):
            kwargs["provenance"] = f"p_transform({p}) of {nu.provenance}"
        return cls(nu.dimension, nu.directions,
                   tuple(p_transform(r, p) for r in nu.radial), **kwargs)
    if p == 1.0:
        return nu
    atoms = tuple((s ** p, w) for s, w in nu.atoms)
    parts = []
    for part in nu.parts:
        a, b = part.support
        parts.append(_power_mapped_part(part, p, a, b))
    return RadialMeasure(atoms, tuple(parts))


def _power_mapped_part(part: RadialDensity, p: float, a: float, b: float) -> RadialDensity:
    f = part.density_at
    inv = 1.0 / p

    def ev(u):
        u = np.asarray(u, dtype=float)
        r = u ** inv
        return f(r) * inv * u ** (inv - 1.0)

    new_left = None if part.left_exponent is None else (part.left_exponent + 1.0) / p - 1.0
    new_decay = None if part.decay is None else part.decay.under_power(p)
    new_b = math.inf if math.isinf(b) else b ** p
    return RadialDensity((a ** p, new_b), ev, new_left, part.right_exponent, new_decay)

"""Named measures used throughout the verification suite and demos.

The two flagship densities are a matched pair: the exponential dilation
mixture of the scaled Gamma(1/2) measure equals the sqrt-decay measure,
and the order-1 arcsine transform of the latter has density K0.
"""

from __future__ import annotations

import math

import numpy as np

from .measures import Decay, PolarLevyMeasure, RadialDensity, RadialMeasure
from .special import k0_values

__all__ = [
    "unit_atom", "atom_at", "sqrt_decay_measure", "gamma_half_measure",
    "exp_measure", "uniform01_measure", "k0_measure",
    "one_dim", "SQRT_DECAY_MASS",
]

# Total mass of the sqrt-decay measure: int (pi/4) x^{-1/2} e^{-sqrt x} dx = pi/2.
SQRT_DECAY_MASS = math.pi / 2.0


def atom_at(s: float, w: float = 1.0) -> RadialMeasure:
    return RadialMeasure.from_atom(s, w)


def unit_atom() -> RadialMeasure:
    return RadialMeasure.from_atom(1.0, 1.0)


def sqrt_decay_measure() -> RadialMeasure:
    """(pi/4) x^{-1/2} e^{-sqrt(x)} dx on (0, inf)."""

    def dens(x):
        x = np.asarray(x, dtype=float)
        return 0.25 * math.pi / np.sqrt(x) * np.exp(-np.sqrt(x))

    return RadialMeasure.from_density(RadialDensity(
        (0.0, math.inf), dens, -0.5, None, Decay.exponential(1.0, 0.5)))


def gamma_half_measure() -> RadialMeasure:
    """(sqrt(pi)/4) x^{-1/2} e^{-x/4} dx on (0, inf); total mass pi/2."""

    def dens(x):
        x = np.asarray(x, dtype=float)
        return 0.25 * math.sqrt(math.pi) / np.sqrt(x) * np.exp(-x / 4.0)

    return RadialMeasure.from_density(RadialDensity(
        (0.0, math.inf), dens, -0.5, None, Decay.exponential(0.25, 1.0)))


def exp_measure(rate: float = 1.0) -> RadialMeasure:
    """e^{-rate r} dr on (0, inf)."""

    def dens(r):
        r = np.asarray(r, dtype=float)
        return np.exp(-rate * r)

    return RadialMeasure.from_density(RadialDensity(
        (0.0, math.inf), dens, 0.0, None, Decay.exponential(rate, 1.0)))


def uniform01_measure() -> RadialMeasure:
    """Density 1 on (0, 1)."""
    return RadialMeasure.from_density(RadialDensity(
        (0.0, 1.0), lambda r: np.ones_like(np.asarray(r, dtype=float)),
        0.0, 0.0, None))


def k0_measure() -> RadialMeasure:
    """K0(x) dx on (0, inf): logarithmic blow-up at 0, exponential tail."""
    return RadialMeasure.from_density(RadialDensity(
        (0.0, math.inf), lambda x: k0_values(x), None, None,
        Decay.exponential(1.0, 1.0)))


def one_dim(rad: RadialMeasure) -> PolarLevyMeasure:
    """Wrap a radial measure as a measure on (0, inf) subset of R^1."""
    return PolarLevyMeasure.one_dim(rad)

"""Cavity-assisted emission probability and heralded pair rates.

All quantities are SI: meters, seconds, coulomb-meters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import constants

C = constants.c
HBAR = constants.hbar
H = constants.h
EPS0 = constants.epsilon_0


def _positive(**values: float) -> None:
    for name, v in values.items():
        if not v > 0:
            raise ValueError(f"{name} must be positive, got {v!r}")


def _probability(**values: float) -> None:
    for name, v in values.items():
        if not 0 <= v <= 1:
            raise ValueError(f"{name} must lie in [0, 1], got {v!r}")


@dataclass(frozen=True)
class CavityParams:
    finesse: float
    length: float
    wavelength: float
    dipole: float
    loss_rate: float  # non-cavity loss rate Gamma, 1/s

    def __post_init__(self):
        _positive(
            finesse=self.finesse,
            length=self.length,
            wavelength=self.wavelength,
            dipole=self.dipole,
            loss_rate=self.loss_rate,
        )


@dataclass(frozen=True)
class YieldParams:
    p_cav: float
    eta: float  # detector efficiency
    xi: float  # cavity out-coupling efficiency
    a2: float  # |a|^2 of the nonmaximally entangled channel
    rate: float = 1.0  # input photons per second

    def __post_init__(self):
        _probability(p_cav=self.p_cav, eta=self.eta, xi=self.xi, a2=self.a2)
        if not self.rate >= 0:
            raise ValueError(f"rate must be nonnegative, got {self.rate!r}")


def cavity_decay_rate(finesse: float, length: float) -> float:
    """Field decay rate ``4 pi c / (F L)`` of a cavity, in 1/s."""
    _positive(finesse=finesse, length=length)
    return 4 * math.pi * C / (finesse * length)


def mode_volume(length: float, wavelength: float) -> float:
    """Smallest mode volume ``L^2 lambda / 4``, reached by a confocal cavity."""
    _positive(length=length, wavelength=wavelength)
    return length**2 * wavelength / 4


def coupling_constant(dipole: float, wavelength: float, volume: float) -> float:
    """Ion-cavity coupling ``(D/hbar) sqrt(h c / (2 eps0 lambda V))``, in 1/s."""
    _positive(dipole=dipole, wavelength=wavelength, volume=volume)
    return dipole / HBAR * math.sqrt(H * C / (2 * EPS0 * wavelength * volume))


def emission_probability(gamma: float, loss_rate: float, omega: float) -> float:
    """Probability that the decay photon goes into the cavity mode.

    ``4 gamma Omega^2 / ((gamma + Gamma)(gamma Gamma + 4 Omega^2))``; with no
    competing loss (``Gamma == 0``) it is exactly 1.
    """
    if gamma < 0 or loss_rate < 0 or omega < 0:
        raise ValueError("rates must be nonnegative")
    if gamma + loss_rate == 0:
        raise ZeroDivisionError("gamma + Gamma is zero")
    if omega == 0:
        return 0.0
    if loss_rate == 0:
        return 1.0
    return 4 * gamma * omega**2 / ((gamma + loss_rate) * (gamma * loss_rate + 4 * omega**2))


def cavity_emission_probability(cavity: CavityParams) -> float:
    gamma = cavity_decay_rate(cavity.finesse, cavity.length)
    omega = coupling_constant(cavity.dipole, cavity.wavelength, mode_volume(cavity.length, cavity.wavelength))
    return emission_probability(gamma, cavity.loss_rate, omega)


def success_probability(y: YieldParams) -> float:
    """Per-photon probability of one concentrated pair, including losses."""
    return y.a2 * (1 - y.a2) / 2 * y.p_cav**2 * y.eta * y.xi


def concentration_rate(y: YieldParams) -> float:
    """Concentrated pairs per second for an input photon rate ``y.rate``."""
    return y.rate * success_probability(y)


# 40Ca+ numbers quoted alongside the cavity estimate. Informational only;
# nothing in this package models branching or decay dynamics.
CA40 = {
    "qubit_wavelength_m": 854e-9,
    "p12_to_s12_rate_per_s": 1.3e8,
    "p12_d32_vs_s12_branching": 1 / 15,
    "p32_d52_vs_s12_branching": 1 / 30,
    "p32_to_d52_rate_per_s": 0.5e7,
    "photon_package_s": 100e-9,
}

# Quoted operating point for the 40Ca+ estimate. The decay rate printed for
# it does not follow from 4 pi c / (F L) (that gives ~6.61e7/s), and p_cav
# cannot be rebuilt without Omega and Gamma, so both are kept as-is.
REFERENCE_SETUP = {
    "finesse": 19000.0,
    "length_m": 3e-3,
    "quoted_gamma_per_s": 9.9e6,
    "quoted_p_cav": 0.01,
    "eta": 0.7,
    "xi": 1.0,
    "a2": 0.7,
    "input_rate_per_s": 1e6,
    "quoted_pairs_per_s": 8,
}

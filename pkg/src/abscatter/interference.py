"""Two-beam interference patterns behind a toroidal magnet.

A beam through the hole and a reference beam outside it superpose on the
screen with relative phase ``theta`` (the enclosed flux in phase units).
A tilted reference beam adds a linear phase and produces parallel fringes.
Predictions hold up to an O(1/v) correction, which is not modeled.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .scattering import WavePacket

CAVEAT = "leading high-velocity order; O(1/v) corrections not modeled"


@dataclass(frozen=True)
class FringePattern:
    intensity: np.ndarray
    theta: float
    v0: np.ndarray
    mass_scale: float
    packet: WavePacket
    meta: dict = field(default_factory=lambda: {"caveat": CAVEAT})

    @property
    def max_intensity(self) -> float:
        """Upper bound ``4 max|phi|^2`` of the pattern."""
        return 4.0 * float(np.max(np.abs(self.packet.amplitude) ** 2))


def two_beam_pattern(theta: float, phi: WavePacket) -> FringePattern:
    factor = np.abs(1.0 + np.exp(1j * theta)) ** 2
    return FringePattern(factor * np.abs(phi.amplitude) ** 2, float(theta), np.zeros(3), 0.0, phi)


def tilted_pattern(theta: float, v0, mass_scale: float, phi: WavePacket) -> FringePattern:
    v0 = np.asarray(v0, dtype=float).reshape(3)
    if abs(v0 @ phi.direction) > 1e-9:
        raise ConfigError("the tilt velocity must lie in the screen plane")
    psi = theta - mass_scale * (phi.nodes() @ v0)
    factor = np.abs(1.0 + np.exp(1j * psi)) ** 2
    return FringePattern(factor * np.abs(phi.amplitude) ** 2, float(theta), v0, float(mass_scale), phi)


def fringe_period(v0, mass_scale: float) -> float:
    k = mass_scale * np.linalg.norm(v0)
    if k == 0.0:
        raise ConfigError("untilted beams have no fringe period")
    return 2.0 * np.pi / k


def fringe_shift(theta1: float, theta2: float, v0, mass_scale: float) -> float:
    """Fringe displacement as a fraction of the period, in (-1/2, 1/2]."""
    fringe_period(v0, mass_scale)
    d = (theta2 - theta1) / (2.0 * np.pi)
    return float(d - np.ceil(d - 0.5))

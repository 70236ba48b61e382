"""Physical constants and unit conventions.

Every frequency inside the library is an *angular* frequency in rad/s.
Laboratory values are usually quoted as ``2*pi x N Hz``; convert them once
at the boundary with :func:`angular` and never again.  Temperatures are in
kelvin; use :data:`NANOKELVIN` to convert.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float = 1.054571817e-34  # J s
    k_B: float = 1.380649e-23  # J / K


CONSTANTS = PhysicalConstants()
HBAR = CONSTANTS.hbar
K_B = CONSTANTS.k_B

NANOKELVIN = 1e-9
MICROMETRE = 1e-6
NANOMETRE = 1e-9


def angular(ordinary_hz: float) -> float:
    """Convert an ordinary frequency in Hz to rad/s."""
    f = float(ordinary_hz)
    if not math.isfinite(f):
        raise ValueError(f"frequency must be finite, got {ordinary_hz!r}")
    return 2.0 * math.pi * f


def ordinary(angular_rad_s: float) -> float:
    """Inverse of :func:`angular`."""
    return float(angular_rad_s) / (2.0 * math.pi)


def thermal_ratio(omega_a: float, T: float) -> float:
    """Dimensionless inverse temperature ``hbar*omega_a / (k_B*T)``.

    Written as a ratio of two small numbers (hbar/k_B and T) so that
    temperatures down to 1e-12 K stay far from overflow.
    """
    if not T > 0:
        raise ValueError(f"temperature must be positive, got {T!r}")
    if not omega_a > 0:
        raise ValueError(f"mode frequency must be positive, got {omega_a!r}")
    return (HBAR / K_B) * omega_a / T

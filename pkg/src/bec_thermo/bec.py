"""Mapping from condensate parameters to the effective qubit-mode model.

Covers the phonon mode frequency of a box of length L, the dot-phonon
coupling, rotating-wave and adiabatic validity margins, the number of
independent probes that fit in the condensate, and the Unruh temperature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import DomainError, ValidationError
from .jc import SystemParams, cycle_time, mixing_angle
from .units import HBAR, K_B, thermal_ratio

INDEPENDENCE_MESSAGE = (
    "spatial separation must be larger than the healing length "
    "to keep the probes independent"
)


@dataclass(frozen=True)
class CondensateParams:
    length_L: float  # m
    speed_c: float  # m/s
    g_bb: float  # J m^3
    g_ab: float  # J m^3
    healing_length: float  # m
    dot_spacing: float  # m
    volume_V: float | None = None  # m^3, defaults to L^3
    g_aa: float | None = None  # J m^3, documentation only

    def __post_init__(self) -> None:
        for name in ("length_L", "speed_c", "healing_length", "dot_spacing"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValidationError(f"{name} must be positive, got {v!r}")
        if self.volume_V is not None and not (math.isfinite(self.volume_V) and self.volume_V > 0):
            raise ValidationError(f"volume_V must be positive, got {self.volume_V!r}")

    @property
    def volume(self) -> float:
        return self.volume_V if self.volume_V is not None else self.length_L**3

    @property
    def volume_is_default(self) -> bool:
        return self.volume_V is None

    @property
    def wavenumber(self) -> float:
        """Fundamental wavenumber with wavelength equal to the condensate length."""
        return 2.0 * math.pi / self.length_L


def phonon_frequency(length_L: float, speed_c: float) -> float:
    """``omega = c k`` with ``k = 2 pi / L`` (rad/s)."""
    if not (length_L > 0 and speed_c > 0):
        raise DomainError("length and speed of sound must be positive")
    return 2.0 * math.pi * speed_c / length_L


def dot_coupling(cond: CondensateParams, k: float | None = None) -> float:
    """``sqrt(c k / (2 hbar V g_bb)) (g_ab - g_bb)`` in rad/s; sign kept."""
    k = cond.wavenumber if k is None else k
    if cond.g_bb <= 0:
        raise DomainError(f"g_bb must be positive, got {cond.g_bb!r}")
    if k <= 0:
        raise DomainError(f"wavenumber must be positive, got {k!r}")
    return math.sqrt(cond.speed_c * k / (2.0 * HBAR * cond.volume * cond.g_bb)) * (cond.g_ab - cond.g_bb)


@dataclass(frozen=True)
class ValidityThresholds:
    rwa: float = 0.1
    adiabatic: float = 0.1


@dataclass(frozen=True)
class ValidityReport:
    rwa_margin: float
    rwa_ok: bool
    adiabatic_margin: float
    adiabatic_ok: bool
    adiabatic_reference: float
    n_eval: float
    interaction_time: float
    thresholds: ValidityThresholds
    notes: tuple[str, ...] = field(default_factory=tuple)


def transition_ratio(n: float, params: SystemParams) -> float:
    """``|<n+| dH/dt |n->| / (E_+ - E_-)`` for the coupling phase swept at rate delta.

    With ``H(t) = U(theta) H0 U^dag`` and ``theta' = -delta`` the matrix element
    is ``delta (E_+ - E_-) <n+| a^dag a |n->``.  The overlap equals
    ``sin(alpha_n) / 2``, so the ratio is ``delta sin(alpha_n) / 2`` (1/s).
    """
    return 0.5 * params.delta * math.sin(float(mixing_angle(n, params)))


def validity_report(
    params: SystemParams,
    interaction_time: float | None = None,
    thresholds: ValidityThresholds = ValidityThresholds(),
    *,
    T: float | None = None,
    g_aa: float | None = None,
) -> ValidityReport:
    """Rotating-wave and adiabatic margins of a parameter set.

    ``rwa_margin = max(g, delta) / (Omega_a + Omega_d)``.
    ``adiabatic_margin`` is the transition ratio times the interaction time,
    evaluated at the thermal mean occupation (n = 0 without T).  The printed
    right-hand side ``g t / 2`` is reported as ``adiabatic_reference``.
    """
    t = cycle_time(params) if interaction_time is None else interaction_time
    if t <= 0:
        raise DomainError(f"interaction time must be positive, got {t!r}")
    rwa = max(params.g, params.delta) / (params.omega_a + params.omega_d)
    n_eval = 0.0 if T is None else 1.0 / math.expm1(thermal_ratio(params.omega_a, T))
    adiabatic = transition_ratio(n_eval, params) * t
    notes = []
    if g_aa is not None:
        notes.append(f"g_aa={g_aa:.3e} J m^3 assumed large enough for single occupancy; enters no formula")
    return ValidityReport(
        rwa_margin=rwa,
        rwa_ok=rwa < thresholds.rwa,
        adiabatic_margin=adiabatic,
        adiabatic_ok=adiabatic < thresholds.adiabatic,
        adiabatic_reference=0.5 * params.g * t,
        n_eval=n_eval,
        interaction_time=t,
        thresholds=thresholds,
        notes=tuple(notes),
    )


def probe_budget(length_L: float, dot_spacing: float, healing_length: float) -> int:
    """Number of independent dots that fit along the condensate."""
    if not (length_L > 0 and dot_spacing > 0 and healing_length > 0):
        raise ValidationError("lengths must be positive")
    if dot_spacing < healing_length:
        raise ValidationError(
            f"dot spacing {dot_spacing:.3e} m < healing length {healing_length:.3e} m: "
            + INDEPENDENCE_MESSAGE
        )
    # guard against L/s landing a hair under an integer
    return int(math.floor(length_L / dot_spacing * (1.0 + 1e-12)))


def unruh_temperature(a: float, speed_c: float) -> float:
    """``hbar a / (2 pi c k_B)`` in kelvin."""
    if a < 0:
        raise DomainError(f"acceleration must be non-negative, got {a!r}")
    if speed_c <= 0:
        raise DomainError(f"speed of sound must be positive, got {speed_c!r}")
    return HBAR * a / (2.0 * math.pi * speed_c * K_B)

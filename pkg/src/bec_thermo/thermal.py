"""Thermal field state and thermally averaged phases.

The field starts in ``rho = sum_n p_n |n><n|`` with geometric weights
``p_n = exp(-F n) (1 - exp(-F))``.  The series is truncated at the smallest
``n_max`` whose discarded tail mass falls below ``tail_tol``.  Weights are
not renormalised: the missing mass is carried in ``tail_mass``.

Thermal dynamical phases keep the free-evolution terms
``-2 pi Omega_a (n - 1/2) / delta``.  These terms do not depend on the
coupling and cancel in any relative phase.  :func:`coupling_phase` removes
them by subtracting the same sum evaluated at g = 0.  That is the quantity
the closed-form small-coupling series describes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SingularityError, TruncationError
from .jc import (
    Branch,
    FormulaMode,
    SystemParams,
    dynamical_phase_level,
    geometric_phase_level,
)
from .units import thermal_ratio

DEFAULT_TAIL_TOL = 1e-12
DEFAULT_HARD_CAP = 10**7
SINGULAR_MODULUS = 1e-12


@dataclass(frozen=True, eq=False)
class ThermalField:
    F: float
    weights: np.ndarray
    n_max: int
    tail_mass: float
    T: float | None = None

    @property
    def n(self) -> np.ndarray:
        return np.arange(self.n_max + 1, dtype=float)

    @property
    def mean_occupation(self) -> float:
        """Untruncated Bose-Einstein occupation ``1 / (e^F - 1)``."""
        return 1.0 / math.expm1(self.F)

    def weight_derivative(self) -> np.ndarray:
        """``d p_n / dT`` for the untruncated distribution at fixed n."""
        if self.T is None:
            raise DomainError("temperature derivative needs a field built from T")
        return self.weights * (self.n - self.mean_occupation) * self.F / self.T

    def average_derivative(self, levels: np.ndarray) -> float:
        """``d/dT sum_n p_n levels[n]``.

        The full weights sum to one at every T, so a constant offset cannot
        contribute.  The truncated weights do not, so the n = 0 level is
        subtracted first to keep a constant from leaking in.
        """
        return float(np.dot(self.weight_derivative(), levels - levels[0]))


def truncation_index(F: float, tail_tol: float) -> int:
    """Smallest n_max with ``exp(-F (n_max + 1)) < tail_tol``."""
    return int(math.floor(-math.log(tail_tol) / F))


def thermal_weights(
    F: float,
    tail_tol: float = DEFAULT_TAIL_TOL,
    *,
    n_max: int | None = None,
    hard_cap: int = DEFAULT_HARD_CAP,
    T: float | None = None,
) -> ThermalField:
    """Truncated thermal occupation weights for dimensionless inverse temperature F.

    ``n_max`` overrides the tail-tolerance rule, which is useful when a
    derivative is taken by finite differences and the truncation must not
    move with T.
    """
    if math.isnan(F) or F <= 0:
        raise DomainError(f"F must be positive, got {F!r}")
    if not 0 < tail_tol < 1:
        raise DomainError(f"tail_tol must lie in (0, 1), got {tail_tol!r}")
    if n_max is None:
        n_max = truncation_index(F, tail_tol) if math.isfinite(F) else 0
    if n_max > hard_cap:
        raise TruncationError(
            f"F={F:.3e} needs n_max={n_max} > hard cap {hard_cap}; temperature too high"
        )
    if not math.isfinite(F):
        w = np.zeros(n_max + 1)
        w[0] = 1.0
        return ThermalField(F=F, weights=w, n_max=n_max, tail_mass=0.0, T=T)
    n = np.arange(n_max + 1, dtype=float)
    w = np.exp(-F * n) * -math.expm1(-F)
    tail = math.exp(-F * (n_max + 1))
    return ThermalField(F=F, weights=w, n_max=n_max, tail_mass=tail, T=T)


def thermal_field(
    T: float,
    params: SystemParams,
    tail_tol: float = DEFAULT_TAIL_TOL,
    *,
    n_max: int | None = None,
    hard_cap: int = DEFAULT_HARD_CAP,
) -> ThermalField:
    F = thermal_ratio(params.omega_a, T)
    return thermal_weights(F, tail_tol, n_max=n_max, hard_cap=hard_cap, T=T)


def dynamical_tail_bound(field: ThermalField, params: SystemParams) -> float:
    """Upper bound on ``sum_{n > n_max} p_n |gamma_Dn|`` for either mode and branch.

    Uses the envelope ``|gamma_Dn| <= (2 pi / delta) ((Omega_a + g) n + Omega_a + delta + 2 g)``
    and ``E[n | n > n_max] = n_max + 1 + nbar``.
    """
    slope = params.omega_a + params.g
    offset = params.omega_a + params.delta + 2.0 * params.g
    conditional_mean = field.n_max + 1 + field.mean_occupation
    return field.tail_mass * (2.0 * math.pi / params.delta) * (offset + slope * conditional_mean)


# -- dynamical phases -----------------------------------------------------


def mixed_dynamical_phase(
    T: float,
    params: SystemParams,
    branch: Branch = Branch.MINUS,
    mode: FormulaMode = FormulaMode.PAPER,
    *,
    tail_tol: float = DEFAULT_TAIL_TOL,
    n_max: int | None = None,
) -> float:
    """Thermal average ``sum_n p_n gamma_Dn`` of the per-level dynamical phase."""
    field = thermal_field(T, params, tail_tol, n_max=n_max)
    return float(np.dot(field.weights, dynamical_phase_level(field.n, branch, params, mode)))


def mixed_dynamical_phase_derivative(
    T: float,
    params: SystemParams,
    branch: Branch = Branch.MINUS,
    mode: FormulaMode = FormulaMode.PAPER,
    *,
    tail_tol: float = DEFAULT_TAIL_TOL,
    n_max: int | None = None,
) -> float:
    """Analytic ``d/dT`` of :func:`mixed_dynamical_phase` at fixed truncation."""
    field = thermal_field(T, params, tail_tol, n_max=n_max)
    return field.average_derivative(dynamical_phase_level(field.n, branch, params, mode))


def _coupling_levels(field: ThermalField, params: SystemParams, branch, mode):
    bare = params.with_coupling(0.0)
    return (dynamical_phase_level(field.n, branch, params, mode)
            - dynamical_phase_level(field.n, branch, bare, mode))


def coupling_phase(
    T: float,
    params: SystemParams,
    branch: Branch = Branch.MINUS,
    mode: FormulaMode = FormulaMode.PAPER,
    *,
    tail_tol: float = DEFAULT_TAIL_TOL,
    n_max: int | None = None,
) -> float:
    """Thermal dynamical phase with the g = 0 contribution subtracted.

    This vanishes as T -> 0 in paper mode and is what the small-coupling
    series :func:`approx_dynamical_phase` approximates.
    """
    field = thermal_field(T, params, tail_tol, n_max=n_max)
    return float(np.dot(field.weights, _coupling_levels(field, params, branch, mode)))


def coupling_phase_derivative(
    T: float,
    params: SystemParams,
    branch: Branch = Branch.MINUS,
    mode: FormulaMode = FormulaMode.PAPER,
    *,
    tail_tol: float = DEFAULT_TAIL_TOL,
    n_max: int | None = None,
) -> float:
    field = thermal_field(T, params, tail_tol, n_max=n_max)
    return field.average_derivative(_coupling_levels(field, params, branch, mode))


def ramsey_relative_phase(
    T: float,
    params: SystemParams,
    mode: FormulaMode = FormulaMode.PAPER,
    *,
    tail_tol: float = DEFAULT_TAIL_TOL,
    n_max: int | None = None,
) -> float:
    """Relative phase ``Gamma_D = gamma_D^+ - gamma_D^-`` picked up in a Ramsey sequence."""
    kw = dict(tail_tol=tail_tol, n_max=n_max)
    return (mixed_dynamical_phase(T, params, Branch.PLUS, mode, **kw)
            - mixed_dynamical_phase(T, params, Branch.MINUS, mode, **kw))


def ramsey_relative_phase_derivative(
    T: float,
    params: SystemParams,
    mode: FormulaMode = FormulaMode.PAPER,
    *,
    tail_tol: float = DEFAULT_TAIL_TOL,
    n_max: int | None = None,
) -> float:
    field = thermal_field(T, params, tail_tol, n_max=n_max)
    levels = (dynamical_phase_level(field.n, Branch.PLUS, params, mode)
              - dynamical_phase_level(field.n, Branch.MINUS, params, mode))
    return field.average_derivative(levels)


# -- geometric phases -----------------------------------------------------


def _principal_arg(z: complex) -> float:
    phi = math.atan2(z.imag, z.real)
    return math.pi if phi == -math.pi else phi


def _geometric_sum(field: ThermalField, params: SystemParams, branch) -> complex:
    phasors = np.exp(1j * geometric_phase_level(field.n, branch, params))
    s = complex(np.dot(field.weights, phasors))
    if abs(s) < SINGULAR_MODULUS:
        raise SingularityError(
            f"|sum p_n exp(i gamma_Gn)| = {abs(s):.3e} < {SINGULAR_MODULUS:.0e} "
            f"(F={field.F:.6g}, g={params.g:.6g}, delta={params.delta:.6g}); Arg undefined"
        )
    return s


def mixed_geometric_phase(
    T: float,
    params: SystemParams,
    branch: Branch = Branch.MINUS,
    *,
    tail_tol: float = DEFAULT_TAIL_TOL,
    n_max: int | None = None,
) -> float:
    """Mixed-state geometric phase ``Arg(sum_n p_n exp(i gamma_Gn))`` in (-pi, pi]."""
    field = thermal_field(T, params, tail_tol, n_max=n_max)
    return _principal_arg(_geometric_sum(field, params, branch))


def mixed_geometric_phase_derivative(
    T: float,
    params: SystemParams,
    branch: Branch = Branch.MINUS,
    *,
    tail_tol: float = DEFAULT_TAIL_TOL,
    n_max: int | None = None,
) -> float:
    # d Arg S = Im(dS / S)
    field = thermal_field(T, params, tail_tol, n_max=n_max)
    s = _geometric_sum(field, params, branch)
    phasors = np.exp(1j * geometric_phase_level(field.n, branch, params))
    ds = complex(np.dot(field.weight_derivative(), phasors - phasors[0]))
    return (ds / s).imag


# -- closed-form small-coupling series -------------------------------------


def approx_geometric_phase(T: float, params: SystemParams) -> float:
    """Leading small-coupling form ``g^2 / (delta^2 (e^F - 1))``."""
    F = thermal_ratio(params.omega_a, T)
    return params.g**2 / (params.delta**2 * math.expm1(F))


def approx_dynamical_phase(T: float, params: SystemParams) -> float:
    """Leading small-coupling form ``4 pi g^2 e^-F / (delta^2 (1 - e^-F))``."""
    F = thermal_ratio(params.omega_a, T)
    return 4.0 * math.pi * params.g**2 * math.exp(-F) / (params.delta**2 * -math.expm1(-F))


def approx_geometric_phase_derivative(T: float, params: SystemParams) -> float:
    F = thermal_ratio(params.omega_a, T)
    em1 = math.expm1(F)
    # d/dT 1/(e^F - 1) = F e^F / (T (e^F - 1)^2)
    return params.g**2 / params.delta**2 * F * math.exp(F) / (T * em1 * em1)


def approx_dynamical_phase_derivative(T: float, params: SystemParams) -> float:
    return 4.0 * math.pi * approx_geometric_phase_derivative(T, params)


# -- report ---------------------------------------------------------------


@dataclass(frozen=True)
class PhaseReport:
    T: float
    F: float
    gamma_d_minus: float
    gamma_d_plus: float
    gamma_g_minus: float
    gamma_g_plus: float
    gamma_d_coupling: float
    gamma_d_approx: float
    gamma_g_approx: float
    Gamma_D: float
    formula_mode: FormulaMode


def phase_report(
    T: float,
    params: SystemParams,
    mode: FormulaMode = FormulaMode.PAPER,
    *,
    tail_tol: float = DEFAULT_TAIL_TOL,
) -> PhaseReport:
    kw = dict(tail_tol=tail_tol)
    d_minus = mixed_dynamical_phase(T, params, Branch.MINUS, mode, **kw)
    d_plus = mixed_dynamical_phase(T, params, Branch.PLUS, mode, **kw)
    return PhaseReport(
        T=T,
        F=thermal_ratio(params.omega_a, T),
        gamma_d_minus=d_minus,
        gamma_d_plus=d_plus,
        gamma_g_minus=mixed_geometric_phase(T, params, Branch.MINUS, **kw),
        gamma_g_plus=mixed_geometric_phase(T, params, Branch.PLUS, **kw),
        gamma_d_coupling=coupling_phase(T, params, Branch.MINUS, mode, **kw),
        gamma_d_approx=approx_dynamical_phase(T, params),
        gamma_g_approx=approx_geometric_phase(T, params),
        Gamma_D=d_plus - d_minus,
        formula_mode=FormulaMode(mode),
    )

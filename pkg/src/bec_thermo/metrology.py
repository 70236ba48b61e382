"""Quantum Fisher information and Cramer-Rao precision for the thermometer.

Three read-out schemes are supported:

* ``mz_geometric``  - Mach-Zehnder, geometric phase of the minus branch.
* ``mz_dynamical``  - Mach-Zehnder, coupling part of the minus-branch dynamical phase.
* ``ramsey_dynamical`` - Ramsey, relative phase ``Gamma_D`` of the two branches.

For a phase ``gamma(T)`` written onto a pure qubit the Fisher information
is ``(d gamma / dT)^2``.  The closed-form bounds printed for the two
Mach-Zehnder schemes are exposed separately so they can be checked against
the exact-derivative numbers.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np

from .errors import DomainError, ValidationError
from .jc import Branch, FormulaMode, SystemParams
from .thermal import (
    DEFAULT_TAIL_TOL,
    coupling_phase_derivative,
    mixed_geometric_phase_derivative,
    ramsey_relative_phase_derivative,
)
from .units import NANOKELVIN, thermal_ratio

ZERO_EIGENVALUE_TOL = 1e-12
PHYSICALITY_TOL = 1e-12


class ConditioningWarning(RuntimeWarning):
    """The finite-difference derivative of a density matrix is not converged."""


class Scheme(str, enum.Enum):
    RAMSEY_DYNAMICAL = "ramsey_dynamical"
    MZ_DYNAMICAL = "mz_dynamical"
    MZ_GEOMETRIC = "mz_geometric"


class BoundKind(str, enum.Enum):
    EXACT_NUMERIC = "exact_numeric"
    PAPER_LOWER = "paper_lower"
    PAPER_UPPER = "paper_upper"


# -- general QFI ------------------------------------------------------------


@dataclass(frozen=True)
class ParamDensity:
    """A one-parameter family of density matrices ``x -> rho(x)``."""

    dimension: int
    matrix_at: Callable[[float], np.ndarray]
    derivative: Optional[Callable[[float], np.ndarray]] = None

    def at(self, x: float) -> np.ndarray:
        rho = np.asarray(self.matrix_at(x), dtype=complex)
        validate_density(rho, self.dimension)
        return rho


def validate_density(rho: np.ndarray, dimension: int | None = None, tol: float = PHYSICALITY_TOL) -> None:
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValidationError(f"density matrix must be square, got shape {rho.shape}")
    if dimension is not None and rho.shape[0] != dimension:
        raise ValidationError(f"expected dimension {dimension}, got {rho.shape[0]}")
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise ValidationError("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > tol or abs(np.trace(rho).imag) > tol:
        raise ValidationError(f"density matrix trace is {np.trace(rho)}, not 1")
    lowest = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0]
    if lowest < -tol:
        raise ValidationError(f"density matrix has negative eigenvalue {lowest:.3e}")


def _central(rho: ParamDensity, x: float, h: float) -> np.ndarray:
    return (rho.at(x + h) - rho.at(x - h)) / (2.0 * h)


def density_derivative(rho: ParamDensity, x: float, step: float | None = None,
                       *, step_floor: float = NANOKELVIN, rtol: float = 1e-6) -> np.ndarray:
    """``d rho / dx`` by central differences with one Richardson step-halving.

    A :class:`ConditioningWarning` is issued when the two step sizes disagree
    by more than ``rtol`` relative to the derivative norm.
    """
    if rho.derivative is not None:
        return np.asarray(rho.derivative(x), dtype=complex)
    h = step if step is not None else 1e-4 * max(abs(x), step_floor)
    coarse = _central(rho, x, h)
    fine = _central(rho, x, h / 2)
    scale = max(np.linalg.norm(fine), np.finfo(float).tiny)
    disagreement = np.linalg.norm(fine - coarse) / scale
    if disagreement > rtol and np.linalg.norm(fine) > 0:
        warnings.warn(
            f"finite-difference derivative not converged at x={x!r}: relative "
            f"step-halving change {disagreement:.2e} (step {h:.3e})",
            ConditioningWarning,
            stacklevel=3,
        )
    return (4.0 * fine - coarse) / 3.0


def qfi_from_matrices(rho: np.ndarray, drho: np.ndarray, zero_tol: float = ZERO_EIGENVALUE_TOL) -> float:
    """``2 sum_{mn} |<m| drho |n>|^2 / (rho_m + rho_n)`` in the eigenbasis of ``rho``.

    Pairs whose eigenvalue sum is at or below ``zero_tol`` are excluded.
    """
    evals, evecs = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    d = evecs.conj().T @ drho @ evecs
    denom = evals[:, None] + evals[None, :]
    keep = denom > zero_tol
    return float(2.0 * np.sum(np.abs(d[keep]) ** 2 / denom[keep]))


def qfi_general(rho: ParamDensity, x: float, step: float | None = None,
                *, zero_tol: float = ZERO_EIGENVALUE_TOL, step_floor: float = NANOKELVIN) -> float:
    """Quantum Fisher information of the family ``rho`` at ``x``."""
    r = rho.at(x)
    dr = density_derivative(rho, x, step, step_floor=step_floor)
    return qfi_from_matrices(r, dr, zero_tol)


def phase_qubit_family(phase: Callable[[float], float]) -> ParamDensity:
    """Pure qubit ``(|0> + exp(i phase(x)) |1>) / sqrt(2)``, the ideal Ramsey output."""

    def matrix_at(x: float) -> np.ndarray:
        psi = np.array([1.0, np.exp(1j * phase(x))]) / math.sqrt(2.0)
        return np.outer(psi, psi.conj())

    return ParamDensity(dimension=2, matrix_at=matrix_at)


# -- scheme Fisher information ------------------------------------------------


def phase_fisher(dgamma_dT: float, scheme: Scheme = Scheme.RAMSEY_DYNAMICAL) -> float:
    """Fisher information carried by a phase with sensitivity ``dgamma_dT``.

    Pass the sensitivity of the phase the scheme actually reads: the
    minus-branch phase for Mach-Zehnder, ``d Gamma_D / dT`` for Ramsey.
    """
    Scheme(scheme)
    if not math.isfinite(dgamma_dT):
        raise DomainError(f"phase sensitivity must be finite, got {dgamma_dT!r}")
    return dgamma_dT * dgamma_dT


def scheme_sensitivity(T: float, params: SystemParams, scheme: Scheme,
                       mode: FormulaMode = FormulaMode.PAPER,
                       *, tail_tol: float = DEFAULT_TAIL_TOL) -> float:
    """Exact ``d(phase)/dT`` of the phase read out by ``scheme``."""
    scheme = Scheme(scheme)
    if params.g == 0.0:
        # every level phase is T-independent; skip the sums and their rounding noise
        return 0.0
    if scheme is Scheme.RAMSEY_DYNAMICAL:
        return ramsey_relative_phase_derivative(T, params, mode, tail_tol=tail_tol)
    if scheme is Scheme.MZ_DYNAMICAL:
        return coupling_phase_derivative(T, params, Branch.MINUS, mode, tail_tol=tail_tol)
    return mixed_geometric_phase_derivative(T, params, Branch.MINUS, tail_tol=tail_tol)


def scheme_fisher(T: float, params: SystemParams, scheme: Scheme,
                  mode: FormulaMode = FormulaMode.PAPER,
                  *, tail_tol: float = DEFAULT_TAIL_TOL) -> float:
    return phase_fisher(scheme_sensitivity(T, params, scheme, mode, tail_tol=tail_tol), scheme)


def cramer_rao(fisher: float, M: int) -> float:
    """Smallest unbiased-estimator error ``1 / sqrt(M F)``.

    Returns ``inf`` when the Fisher information is zero.
    """
    if M < 1:
        raise DomainError(f"measurement count must be >= 1, got {M!r}")
    if fisher < 0 or math.isnan(fisher):
        raise DomainError(f"Fisher information must be non-negative, got {fisher!r}")
    if fisher == 0:
        return math.inf
    return 1.0 / math.sqrt(M * fisher)


# -- printed closed-form bounds --------------------------------------------------


class GeometricBound(NamedTuple):
    value: float
    valid: bool


def geometric_mz_bound(T: float, params: SystemParams, M: int) -> GeometricBound:
    """``T delta^2 (e^F - 2) / (sqrt(M) F g^2)``.

    Only meaningful for ``e^F > 2``.  Otherwise the value is returned as
    computed with ``valid=False``.
    """
    if M < 1:
        raise DomainError(f"measurement count must be >= 1, got {M!r}")
    F = thermal_ratio(params.omega_a, T)
    if params.g == 0:
        return GeometricBound(math.inf, False)
    value = T * params.delta**2 * (math.exp(F) - 2.0) / (math.sqrt(M) * F * params.g**2)
    return GeometricBound(value, F > math.log(2.0))


def dynamical_mz_bounds(T: float, params: SystemParams, M: int) -> tuple[float, float]:
    """``(lower, upper)`` with ``upper = 2 * lower`` for the dynamical Mach-Zehnder error."""
    if M < 1:
        raise DomainError(f"measurement count must be >= 1, got {M!r}")
    F = thermal_ratio(params.omega_a, T)
    if params.g == 0:
        return math.inf, math.inf
    em1 = math.expm1(F)
    # em1^2 / e^F written as em1 * (1 - e^-F) to avoid overflow at large F
    core = T * params.delta**2 * em1 * -math.expm1(-F) / (math.sqrt(M) * F * params.g**2)
    lower = core / (8.0 * math.pi)
    return lower, 2.0 * lower


def ramsey_bounds(T: float, params: SystemParams, M: int) -> tuple[float, float]:
    """Ramsey reading halves the Mach-Zehnder error."""
    lower, upper = dynamical_mz_bounds(T, params, M)
    return lower / 2.0, upper / 2.0


# -- entanglement --------------------------------------------------------------


def entangled_precision(N: int, base_fisher: float, M_batches: int = 1) -> float:
    """Error with ``M_batches`` repetitions of an N-probe maximally entangled input.

    The entangled probes pick up N times the single-probe phase, so each
    batch carries ``N^2`` times the single-probe Fisher information.
    """
    if N < 1:
        raise DomainError(f"probe count must be >= 1, got {N!r}")
    return cramer_rao(N * N * base_fisher, M_batches)


# -- report ---------------------------------------------------------------------


@dataclass(frozen=True)
class PrecisionReport:
    scheme: Scheme
    T: float
    fisher: float
    M: int
    delta_T: float
    relative_error: float
    bound_kind: BoundKind
    valid: bool = True


def precision_report(
    T: float,
    params: SystemParams,
    scheme: Scheme,
    M: int,
    bound_kind: BoundKind = BoundKind.EXACT_NUMERIC,
    mode: FormulaMode = FormulaMode.PAPER,
    *,
    tail_tol: float = DEFAULT_TAIL_TOL,
) -> PrecisionReport:
    """Temperature error for one scheme, either exact or from the printed bounds.

    For printed bounds, ``fisher`` is the value the bound would correspond to,
    ``1 / (M delta_T^2)``.
    """
    scheme, bound_kind = Scheme(scheme), BoundKind(bound_kind)
    valid = True
    if bound_kind is BoundKind.EXACT_NUMERIC:
        fisher = scheme_fisher(T, params, scheme, mode, tail_tol=tail_tol)
        delta_T = cramer_rao(fisher, M)
    else:
        if scheme is Scheme.MZ_GEOMETRIC:
            if bound_kind is BoundKind.PAPER_UPPER:
                raise DomainError("the geometric scheme only has a printed lower bound")
            delta_T, valid = geometric_mz_bound(T, params, M)
        else:
            pair = (ramsey_bounds if scheme is Scheme.RAMSEY_DYNAMICAL else dynamical_mz_bounds)(T, params, M)
            delta_T = pair[0] if bound_kind is BoundKind.PAPER_LOWER else pair[1]
        fisher = 1.0 / (M * delta_T**2) if valid and delta_T > 0 and math.isfinite(delta_T) else 0.0
    return PrecisionReport(
        scheme=scheme, T=T, fisher=fisher, M=M, delta_T=delta_T,
        relative_error=delta_T / T, bound_kind=bound_kind, valid=valid,
    )

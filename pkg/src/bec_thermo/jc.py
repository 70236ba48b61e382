"""Jaynes-Cummings dressed states and their per-level phases.

Two ways of getting the dressed energies are offered:

``FormulaMode.PAPER``
    The closed-form bracket ``Omega_a (n - 1/2) +/- sqrt(delta^2 + 4 g^2 n)``
    used for the published dynamical phases.
``FormulaMode.DIAGONALIZATION``
    Eigenvalues of the 2x2 block of ``H_JC`` on ``{|n+1, g>, |n, e>}``.
    This is an independent oracle.  Its splitting is
    ``sqrt(delta^2 + 4 g^2 (n+1))`` and its mean is ``Omega_a (n + 1/2)``,
    so the two modes do not coincide, even at g = 0.  Use
    :func:`mode_discrepancy` to quantify the gap.

The phase ``theta`` of the coupling only conjugates the Hamiltonian by
``exp(i theta a^dag a)`` and leaves the spectrum alone, so the block is
always built at theta = 0.

Phases are returned unwrapped.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .units import HBAR, angular

_DELTA_RTOL = 1e-9


class FormulaMode(str, enum.Enum):
    PAPER = "paper"
    DIAGONALIZATION = "diagonalization"


class Branch(str, enum.Enum):
    PLUS = "plus"
    MINUS = "minus"

    @property
    def sign(self) -> int:
        return 1 if self is Branch.PLUS else -1


@dataclass(frozen=True)
class SystemParams:
    """Qubit-mode parameters, all angular frequencies in rad/s.

    ``delta`` must equal ``|omega_a - omega_d|``.  Use :meth:`build` to
    supply one of them and derive the other.
    """

    omega_a: float
    omega_d: float
    g: float
    delta: float

    def __post_init__(self) -> None:
        for name in ("omega_a", "omega_d", "g", "delta"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValidationError(f"{name} must be finite, got {v!r}")
        if self.omega_a <= 0:
            raise ValidationError(f"omega_a must be positive, got {self.omega_a!r}")
        if self.omega_d < 0:
            raise ValidationError(f"omega_d must be non-negative, got {self.omega_d!r}")
        if self.g < 0:
            raise ValidationError(f"g must be non-negative, got {self.g!r}")
        if self.delta <= 0:
            raise ValidationError(f"delta must be positive, got {self.delta!r}")
        expected = abs(self.omega_a - self.omega_d)
        if abs(expected - self.delta) > _DELTA_RTOL * max(self.delta, expected):
            raise ValidationError(
                f"delta={self.delta!r} does not match |omega_a - omega_d|={expected!r}"
            )

    @classmethod
    def build(
        cls,
        omega_a: float,
        g: float,
        *,
        delta: float | None = None,
        omega_d: float | None = None,
    ) -> "SystemParams":
        """Construct from exactly one of ``delta`` or ``omega_d``.

        When only ``delta`` is given the qubit is placed above the mode,
        ``omega_d = omega_a + delta``.
        """
        if (delta is None) == (omega_d is None):
            raise ValidationError("exactly one of delta / omega_d must be given")
        if delta is None:
            delta = abs(omega_a - omega_d)
        else:
            omega_d = omega_a + delta
        return cls(omega_a=float(omega_a), omega_d=float(omega_d), g=float(g), delta=float(delta))

    @classmethod
    def from_hz(
        cls,
        omega_a_hz: float,
        g_hz: float,
        *,
        delta_hz: float | None = None,
        omega_d_hz: float | None = None,
    ) -> "SystemParams":
        """Same as :meth:`build` but every argument is an ordinary frequency."""
        return cls.build(
            angular(omega_a_hz),
            angular(g_hz),
            delta=None if delta_hz is None else angular(delta_hz),
            omega_d=None if omega_d_hz is None else angular(omega_d_hz),
        )

    def with_coupling(self, g: float) -> "SystemParams":
        return SystemParams(self.omega_a, self.omega_d, g, self.delta)


@dataclass(frozen=True)
class DressedLevel:
    n: int
    branch: Branch
    alpha_n: float
    energy: float  # J
    formula_mode: FormulaMode


def _as_index(n):
    arr = np.asarray(n)
    if np.any(arr < 0):
        raise ValidationError("photon index must be non-negative")
    return arr.astype(float)


def mixing_angle(n, params: SystemParams):
    """``alpha_n = arctan(2 g sqrt(n+1) / delta)``, in [0, pi/2)."""
    nf = _as_index(n)
    return np.arctan2(2.0 * params.g * np.sqrt(nf + 1.0), params.delta)


def cycle_time(params: SystemParams) -> float:
    """Interaction time for one full cycle of the coupling phase, ``2 pi / delta``."""
    return 2.0 * math.pi / params.delta


def block_hamiltonian(n: int, params: SystemParams) -> np.ndarray:
    """2x2 block of ``H_JC / hbar`` on ``{|n+1, g>, |n, e>}`` (rad/s)."""
    nf = float(_as_index(n))
    a = params.omega_a * (nf + 1.0) - 0.5 * params.omega_d
    d = params.omega_a * nf + 0.5 * params.omega_d
    b = params.g * math.sqrt(nf + 1.0)
    return np.array([[a, b], [b, d]])


def _diagonalized_frequencies(nf: np.ndarray, params: SystemParams):
    a = params.omega_a * (nf + 1.0) - 0.5 * params.omega_d
    d = params.omega_a * nf + 0.5 * params.omega_d
    b = params.g * np.sqrt(nf + 1.0)
    blocks = np.empty(nf.shape + (2, 2))
    blocks[..., 0, 0] = a
    blocks[..., 1, 1] = d
    blocks[..., 0, 1] = b
    blocks[..., 1, 0] = b
    w = np.linalg.eigvalsh(blocks)  # ascending
    return w[..., 1], w[..., 0]


def _paper_frequencies(nf: np.ndarray, params: SystemParams):
    centre = params.omega_a * (nf - 0.5)
    split = np.sqrt(params.delta**2 + 4.0 * params.g**2 * nf)
    return centre + split, centre - split


def dressed_frequencies(n, params: SystemParams, mode: FormulaMode = FormulaMode.PAPER):
    """Dressed energies divided by hbar, ``(E_plus/hbar, E_minus/hbar)`` in rad/s."""
    nf = _as_index(n)
    if FormulaMode(mode) is FormulaMode.PAPER:
        return _paper_frequencies(nf, params)
    return _diagonalized_frequencies(nf, params)


def dressed_energies(n, params: SystemParams, mode: FormulaMode = FormulaMode.PAPER):
    """Dressed energies ``(E_n^+, E_n^-)`` in joules."""
    plus, minus = dressed_frequencies(n, params, mode)
    return HBAR * plus, HBAR * minus


def dressed_level(n: int, branch: Branch, params: SystemParams,
                  mode: FormulaMode = FormulaMode.PAPER) -> DressedLevel:
    plus, minus = dressed_energies(n, params, mode)
    energy = plus if Branch(branch) is Branch.PLUS else minus
    return DressedLevel(
        n=int(n),
        branch=Branch(branch),
        alpha_n=float(mixing_angle(n, params)),
        energy=float(energy),
        formula_mode=FormulaMode(mode),
    )


def dynamical_phase_level(n, branch: Branch, params: SystemParams,
                          mode: FormulaMode = FormulaMode.PAPER):
    """Dynamical phase ``-E_n^{+/-} t / hbar`` over one cycle ``t = 2 pi / delta``."""
    plus, minus = dressed_frequencies(n, params, mode)
    w = plus if Branch(branch) is Branch.PLUS else minus
    return -cycle_time(params) * w


def geometric_phase_level(n, branch: Branch, params: SystemParams):
    """Cyclic geometric phase of ``|n+/->``, not reduced modulo 2 pi."""
    nf = _as_index(n)
    half = 0.5 * mixing_angle(nf, params)
    if Branch(branch) is Branch.PLUS:
        return 2.0 * math.pi * (nf - np.cos(half) ** 2)
    return 2.0 * math.pi * (nf - np.sin(half) ** 2)


def mode_discrepancy(n, branch: Branch, params: SystemParams):
    """Difference (paper - diagonalization) of the per-level dynamical phase."""
    return (dynamical_phase_level(n, branch, params, FormulaMode.PAPER)
            - dynamical_phase_level(n, branch, params, FormulaMode.DIAGONALIZATION))

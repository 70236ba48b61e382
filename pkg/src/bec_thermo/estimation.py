"""Monte-Carlo simulation of Ramsey thermometry.

Each shot is one dot prepared in ``|g> + |e>``, left to interact with the
thermal mode for one cycle, and read out.  The read-out law is the standard
Ramsey fringe

    P_e(T) = (1 - v cos(Gamma_D(T) + phi_c)) / 2

with visibility ``v`` and a user-set control phase ``phi_c``.  The default
operating point puts the fringe midpoint (``Gamma_D + phi_c = pi/2``) at a
chosen prior temperature, where the slope is largest.

Shots are independent.  A run of ``M`` shots therefore reduces to a single
binomial count, and the temperature is recovered by maximising the binomial
likelihood over a caller-supplied window.
"""

from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import xlogy

from .errors import DomainError, NoInformationError, ThermoError
from .jc import FormulaMode, SystemParams
from .metrology import Scheme, cramer_rao, scheme_fisher
from .thermal import DEFAULT_TAIL_TOL, ramsey_relative_phase, ramsey_relative_phase_derivative

GRID_POINTS = 512
REFINE_RTOL = 1e-6
FLAT_TOL = 1e-9  # phase sums carry ~1e-11 rounding


class MonotonicityWarning(RuntimeWarning):
    """The fringe is not monotone over the search window; the MLE may alias."""


@dataclass(frozen=True)
class MeasurementModel:
    params: SystemParams
    control_phase: float = math.pi / 2
    visibility: float = 1.0
    mode: FormulaMode = FormulaMode.PAPER
    tail_tol: float = DEFAULT_TAIL_TOL

    def __post_init__(self) -> None:
        if not 0.0 <= self.visibility <= 1.0:
            raise DomainError(f"visibility must lie in [0, 1], got {self.visibility!r}")

    @classmethod
    def at_midpoint(cls, params: SystemParams, T0: float, **kwargs) -> "MeasurementModel":
        """Model whose control phase puts the fringe midpoint at ``T0``."""
        mode = kwargs.get("mode", FormulaMode.PAPER)
        tail_tol = kwargs.get("tail_tol", DEFAULT_TAIL_TOL)
        phase = math.pi / 2 - ramsey_relative_phase(T0, params, mode, tail_tol=tail_tol)
        return cls(params, control_phase=math.remainder(phase, 2 * math.pi), **kwargs)

    def retuned(self, T0: float) -> "MeasurementModel":
        return MeasurementModel.at_midpoint(
            self.params, T0, visibility=self.visibility, mode=self.mode, tail_tol=self.tail_tol)

    def relative_phase(self, T: float) -> float:
        return ramsey_relative_phase(T, self.params, self.mode, tail_tol=self.tail_tol)


def excitation_probability(T: float, model: MeasurementModel) -> float:
    phi = model.relative_phase(T) + model.control_phase
    p = 0.5 * (1.0 - model.visibility * math.cos(phi))
    return min(1.0, max(0.0, p))


def excitation_probability_derivative(T: float, model: MeasurementModel) -> float:
    phi = model.relative_phase(T) + model.control_phase
    dgamma = ramsey_relative_phase_derivative(T, model.params, model.mode, tail_tol=model.tail_tol)
    return 0.5 * model.visibility * math.sin(phi) * dgamma


def readout_fisher(T: float, model: MeasurementModel) -> float:
    """Classical Fisher information of one excitation measurement."""
    p = excitation_probability(T, model)
    if p <= 0.0 or p >= 1.0:
        return 0.0
    dp = excitation_probability_derivative(T, model)
    return dp * dp / (p * (1.0 - p))


# -- single experiment -------------------------------------------------------


@dataclass(frozen=True)
class ExperimentRecord:
    T_true: float
    M: int
    seed: int | tuple
    excited_count: int
    T_hat: float | None = None
    search_window: tuple[float, float] | None = None
    at_boundary: bool = False
    log_likelihood_curve: tuple[np.ndarray, np.ndarray] | None = field(default=None, compare=False)


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.SeedSequence):
        return np.random.default_rng(seed)
    return np.random.default_rng(np.random.SeedSequence(seed))


def simulate_experiment(T_true: float, model: MeasurementModel, M: int, seed) -> ExperimentRecord:
    """Draw ``M`` independent shots at the true temperature and count excitations."""
    if M < 1:
        raise DomainError(f"shot count must be >= 1, got {M!r}")
    p = excitation_probability(T_true, model)
    k = int(_rng(seed).binomial(M, p))
    seed_repr = tuple(seed.spawn_key) if isinstance(seed, np.random.SeedSequence) else seed
    return ExperimentRecord(T_true=T_true, M=M, seed=seed_repr, excited_count=k)


@functools.lru_cache(maxsize=256)
def _probability_grid(model: MeasurementModel, lo: float, hi: float, points: int):
    grid = np.geomspace(lo, hi, points)
    probs = np.array([excitation_probability(t, model) for t in grid])
    probs.setflags(write=False)
    grid.setflags(write=False)
    return grid, probs


def _log_likelihood(k: int, M: int, p):
    return xlogy(k, p) + xlogy(M - k, 1.0 - p)


@dataclass(frozen=True)
class Estimate:
    T_hat: float
    at_boundary: bool
    grid: np.ndarray = field(compare=False, repr=False)
    log_likelihood: np.ndarray = field(compare=False, repr=False)


def estimate_temperature(
    excited_count: int,
    M: int,
    model: MeasurementModel,
    window: tuple[float, float],
    *,
    grid_points: int = GRID_POINTS,
    rtol: float = REFINE_RTOL,
) -> Estimate:
    """Maximum-likelihood temperature from an excitation count.

    A log-spaced grid locates the peak, then golden-section search refines it
    to relative tolerance ``rtol``.
    """
    lo, hi = window
    if not 0 < lo < hi:
        raise DomainError(f"window must satisfy 0 < lo < hi, got {window!r}")
    if not 0 <= excited_count <= M:
        raise DomainError(f"count {excited_count} outside [0, {M}]")
    grid, probs = _probability_grid(model, float(lo), float(hi), int(grid_points))
    if np.ptp(probs) < FLAT_TOL:
        raise NoInformationError(
            "excitation probability is constant over the window; the count carries no temperature information")
    steps = np.diff(probs)
    if np.any(steps > 0) and np.any(steps < 0):
        warnings.warn("fringe is not monotone over the search window", MonotonicityWarning, stacklevel=2)

    ll = _log_likelihood(excited_count, M, probs)
    i = int(np.argmax(ll))
    if i == 0 or i == len(grid) - 1:
        return Estimate(float(grid[i]), True, grid, ll)

    def neg(t):
        return -_log_likelihood(excited_count, M, excitation_probability(t, model))

    try:
        res = minimize_scalar(neg, bracket=(grid[i - 1], grid[i], grid[i + 1]),
                              method="golden", options={"xtol": rtol})
        t_hat = float(res.x)
    except ValueError:
        # flat top on the grid: the bracket condition fails, fall back to a bounded search
        res = minimize_scalar(neg, bounds=(grid[i - 1], grid[i + 1]), method="bounded",
                              options={"xatol": rtol * grid[i]})
        t_hat = float(res.x)
    t_hat = min(max(t_hat, float(grid[i - 1])), float(grid[i + 1]))
    return Estimate(t_hat, False, grid, ll)


def run_experiment(T_true: float, model: MeasurementModel, M: int, seed,
                   window: tuple[float, float], *, keep_curve: bool = False) -> ExperimentRecord:
    """Simulate and estimate in one go."""
    rec = simulate_experiment(T_true, model, M, seed)
    est = estimate_temperature(rec.excited_count, M, model, window)
    return replace(
        rec,
        T_hat=est.T_hat,
        search_window=(float(window[0]), float(window[1])),
        at_boundary=est.at_boundary,
        log_likelihood_curve=(est.grid, est.log_likelihood) if keep_curve else None,
    )


# -- sweeps ------------------------------------------------------------------


def cell_seed(master_seed: int, t_index: int, m_index: int, trial: int) -> np.random.SeedSequence:
    """Independent, order-free seed for one trial of one sweep cell."""
    return np.random.SeedSequence(master_seed, spawn_key=(t_index, m_index, trial))


@dataclass(frozen=True)
class SweepCell:
    T: float
    M: int
    trials: int
    successes: int
    boundary_hits: int
    mean_T_hat: float
    empirical_rel_error: float
    cr_rel_error: float
    readout_cr_rel_error: float
    bias_rel: float
    p_true: float
    failed: bool
    message: str = ""

    @property
    def efficiency_ratio(self) -> float:
        return self.empirical_rel_error / self.cr_rel_error


def run_cell(
    T: float,
    M: int,
    model: MeasurementModel,
    trials: int,
    master_seed: int,
    t_index: int,
    m_index: int,
    *,
    window_factors: tuple[float, float] = (0.5, 2.0),
    retune: bool = True,
) -> SweepCell:
    cell_model = model.retuned(T) if retune else model
    window = (T * window_factors[0], T * window_factors[1])
    p_true = excitation_probability(T, cell_model)
    if not 0.0 <= p_true <= 1.0:
        raise AssertionError(f"probability {p_true} outside [0, 1]")
    theory = cramer_rao(scheme_fisher(T, model.params, Scheme.RAMSEY_DYNAMICAL, model.mode,
                                      tail_tol=model.tail_tol), M) / T
    readout = cramer_rao(readout_fisher(T, cell_model), M) / T

    estimates, boundary, message = [], 0, ""
    for trial in range(trials):
        try:
            rec = run_experiment(T, cell_model, M, cell_seed(master_seed, t_index, m_index, trial), window)
        except ThermoError as exc:
            message = f"{type(exc).__name__}: {exc}"
            continue
        estimates.append(rec.T_hat)
        boundary += rec.at_boundary
    n_ok = len(estimates)
    if n_ok < 2:
        nan = math.nan
        return SweepCell(T, M, trials, n_ok, boundary, nan, nan, theory, readout, nan, p_true, True,
                         message or "fewer than two successful trials")
    est = np.asarray(estimates)
    return SweepCell(
        T=T, M=M, trials=trials, successes=n_ok, boundary_hits=boundary,
        mean_T_hat=float(est.mean()),
        empirical_rel_error=float(est.std(ddof=1) / T),
        cr_rel_error=theory,
        readout_cr_rel_error=readout,
        bias_rel=float(est.mean() / T - 1.0),
        p_true=p_true,
        failed=False,
        message=message,
    )


def precision_sweep(
    T_grid: Sequence[float],
    model: MeasurementModel,
    M_list: Sequence[int],
    trials: int,
    seed: int,
    *,
    window_factors: tuple[float, float] = (0.5, 2.0),
    retune: bool = True,
    executor=None,
) -> list[SweepCell]:
    """Empirical vs Cramer-Rao relative error on a (T, M) grid.

    Cells are keyed by index and seeded independently, so passing a
    ``concurrent.futures`` executor changes nothing in the output.
    """
    if trials < 2:
        raise DomainError("need at least two trials per cell for a standard deviation")
    jobs = [(T, M, model, trials, seed, i, j)
            for i, T in enumerate(T_grid) for j, M in enumerate(M_list)]
    kw = dict(window_factors=window_factors, retune=retune)
    if executor is None:
        return [run_cell(*job, **kw) for job in jobs]
    futures = [executor.submit(run_cell, *job, **kw) for job in jobs]
    return [f.result() for f in futures]


def exact_mle_moments(T: float, model: MeasurementModel, M: int, window: tuple[float, float]):
    """Mean and standard deviation of the MLE by summing over every count.

    Expensive (``M + 1`` estimates), but noise-free; used as an oracle.
    """
    from scipy.stats import binom

    p = excitation_probability(T, model)
    ks = np.arange(M + 1)
    w = binom.pmf(ks, M, p)
    keep = w > 1e-14
    t_hat = np.array([estimate_temperature(int(k), M, model, window).T_hat for k in ks[keep]])
    w = w[keep] / w[keep].sum()
    mean = float(np.dot(w, t_hat))
    return mean, float(math.sqrt(np.dot(w, (t_hat - mean) ** 2)))


def iter_rows(cells: Iterable[SweepCell]):
    for c in cells:
        yield {
            "T_K": c.T, "M": c.M, "trials": c.trials, "successes": c.successes,
            "boundary_hits": c.boundary_hits, "empirical_rel_error": c.empirical_rel_error,
            "cr_rel_error": c.cr_rel_error, "readout_cr_rel_error": c.readout_cr_rel_error,
            "bias_rel": c.bias_rel, "p_true": c.p_true, "failed": int(c.failed),
        }

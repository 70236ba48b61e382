"""Run configuration: TOML loading, unit parsing, validation.

Temperatures and lengths must carry a unit (``"0.5 nK"``, ``"300 nm"``).
Frequencies may be bare numbers, read as ordinary Hz.  Every error names the
file and line of the offending key.
"""

from __future__ import annotations

import hashlib
import math
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .bec import CondensateParams, ValidityThresholds
from .errors import ThermoError, ValidationError
from .jc import FormulaMode, SystemParams
from .metrology import Scheme
from .thermal import DEFAULT_TAIL_TOL
from .units import angular

_TEMPERATURE = {"K": 1.0, "mK": 1e-3, "uK": 1e-6, "µK": 1e-6, "nK": 1e-9, "pK": 1e-12}
_LENGTH = {"m": 1.0, "mm": 1e-3, "um": 1e-6, "µm": 1e-6, "nm": 1e-9}
_FREQUENCY = {"Hz": 1.0, "kHz": 1e3, "mHz": 1e-3}
_SPEED = {"m/s": 1.0, "mm/s": 1e-3, "um/s": 1e-6, "µm/s": 1e-6}
_ACCEL = {"m/s^2": 1.0, "m/s2": 1.0}
_QUANTITY = re.compile(r"^\s*([-+]?[0-9.]+(?:[eE][-+]?\d+)?)\s*(\S+)?\s*$")

U64_MAX = 2**64 - 1


class ConfigError(ValidationError):
    """Configuration problem with file/line attribution."""


@dataclass(frozen=True)
class SurfaceConfig:
    g_hz: tuple[float, ...]
    delta_hz: tuple[float, ...]
    T: float


@dataclass(frozen=True)
class SimConfig:
    trials: int = 200
    seed: int = 0
    visibility: float = 1.0
    control_phase: float | None = None  # None: fringe midpoint at each T
    window: tuple[float, float] = (0.5, 2.0)  # factors of the true T
    T_grid: tuple[float, ...] = ()


@dataclass(frozen=True)
class RunConfig:
    path: Path
    digest: str
    system: SystemParams
    mode: FormulaMode
    T_grid: tuple[float, ...]
    tail_tol: float
    schemes: tuple[Scheme, ...]
    M_list: tuple[int, ...]
    sim: SimConfig
    surface: SurfaceConfig | None
    condensate: CondensateParams | None
    accelerations: tuple[float, ...]
    thresholds: ValidityThresholds
    out_dir: str | None
    formats: tuple[str, ...] = ("csv", "json")
    raw: dict = field(default_factory=dict, compare=False, repr=False)


class _Source:
    """Maps ``section.key`` to the line it was written on."""

    def __init__(self, path: Path, text: str):
        self.path = path
        self.lines: dict[str, int] = {}
        section = ""
        for i, line in enumerate(text.splitlines(), 1):
            s = line.split("#", 1)[0].strip()
            m = re.match(r"^\[\s*([A-Za-z0-9_.-]+)\s*\]$", s)
            if m:
                section = m.group(1)
                self.lines.setdefault(section, i)
                continue
            m = re.match(r"^([A-Za-z0-9_-]+)\s*=", s)
            if m:
                self.lines.setdefault(f"{section}.{m.group(1)}" if section else m.group(1), i)

    def error(self, key: str, msg: str) -> ConfigError:
        line = self.lines.get(key) or self.lines.get(key.split(".")[0])
        where = f"{self.path}:{line}" if line else str(self.path)
        return ConfigError(f"{where}: {key}: {msg}")


def _quantity(src: _Source, key: str, value, table: dict, *, bare_unit: str | None = None) -> float:
    if isinstance(value, bool):
        raise src.error(key, f"expected a quantity, got {value!r}")
    if isinstance(value, (int, float)):
        if bare_unit is None:
            raise src.error(key, f"a unit is required (one of {', '.join(table)})")
        return float(value) * table[bare_unit]
    if not isinstance(value, str):
        raise src.error(key, f"expected a quantity, got {value!r}")
    m = _QUANTITY.match(value)
    if not m:
        raise src.error(key, f"cannot parse quantity {value!r}")
    number, unit = float(m.group(1)), m.group(2)
    if unit is None:
        if bare_unit is None:
            raise src.error(key, f"a unit is required (one of {', '.join(table)})")
        unit = bare_unit
    if unit not in table:
        raise src.error(key, f"unknown unit {unit!r}; expected one of {', '.join(table)}")
    out = number * table[unit]
    if not math.isfinite(out):
        raise src.error(key, "value must be finite")
    return out


def _positive(src: _Source, key: str, x: float) -> float:
    if not x > 0:
        raise src.error(key, f"must be positive, got {x!r}")
    return x


def _list(src: _Source, key: str, value) -> list:
    if isinstance(value, list):
        return value
    return [value]


def _temperatures(src: _Source, section: dict, prefix: str) -> tuple[float, ...]:
    """Either ``T = [...]`` / ``T = "0.5 nK"`` or ``T_min, T_max, T_points``."""
    if "T" in section:
        key = f"{prefix}.T"
        values = [_positive(src, key, _quantity(src, key, v, _TEMPERATURE)) for v in _list(src, key, section["T"])]
        if not values:
            raise src.error(key, "temperature grid is empty")
        return tuple(values)
    if "T_min" in section or "T_max" in section:
        lo = _positive(src, f"{prefix}.T_min", _quantity(src, f"{prefix}.T_min", section.get("T_min"), _TEMPERATURE))
        hi = _positive(src, f"{prefix}.T_max", _quantity(src, f"{prefix}.T_max", section.get("T_max"), _TEMPERATURE))
        n = section.get("T_points", 20)
        if not isinstance(n, int) or n < 1:
            raise src.error(f"{prefix}.T_points", f"must be a positive integer, got {n!r}")
        if hi < lo:
            raise src.error(f"{prefix}.T_max", "T_max must not be below T_min")
        return tuple(float(t) for t in (lo + (hi - lo) * i / max(n - 1, 1) for i in range(n)))
    return ()


def _system(src: _Source, sec: dict) -> SystemParams:
    if not sec:
        raise src.error("system", "section is required")
    has_d, has_od = "delta" in sec, "omega_d" in sec
    if has_d == has_od:
        raise src.error("system", "give exactly one of delta or omega_d")
    freq = lambda k: angular(_quantity(src, f"system.{k}", sec[k], _FREQUENCY, bare_unit="Hz"))
    for k in ("omega_a", "g"):
        if k not in sec:
            raise src.error("system", f"missing key {k!r}")
    try:
        if has_d:
            return SystemParams.build(freq("omega_a"), freq("g"), delta=freq("delta"))
        return SystemParams.build(freq("omega_a"), freq("g"), omega_d=freq("omega_d"))
    except ThermoError as exc:
        raise src.error("system", str(exc)) from None
    except ValueError as exc:
        raise src.error("system", str(exc)) from None


def _condensate(src: _Source, sec: dict) -> CondensateParams | None:
    if not sec:
        return None
    need = ("length", "speed_c", "g_bb", "g_ab", "healing_length", "dot_spacing")
    for k in need:
        if k not in sec:
            raise src.error("bec", f"missing key {k!r}")

    def energy(k):
        v = sec[k]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise src.error(f"bec.{k}", "expected a number in J m^3")
        return float(v)

    volume = None
    if "volume" in sec:
        volume = _positive(src, "bec.volume", float(sec["volume"]))
    try:
        return CondensateParams(
            length_L=_quantity(src, "bec.length", sec["length"], _LENGTH),
            speed_c=_quantity(src, "bec.speed_c", sec["speed_c"], _SPEED),
            g_bb=energy("g_bb"),
            g_ab=energy("g_ab"),
            healing_length=_quantity(src, "bec.healing_length", sec["healing_length"], _LENGTH),
            dot_spacing=_quantity(src, "bec.dot_spacing", sec["dot_spacing"], _LENGTH),
            volume_V=volume,
            g_aa=energy("g_aa") if "g_aa" in sec else None,
        )
    except ValidationError as exc:
        raise src.error("bec", str(exc)) from None


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc.strerror}") from None
    text = data.decode("utf-8")
    src = _Source(path, text)
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None

    known = {"system", "bec", "thermal", "metrology", "sim", "surface", "output"}
    for k in raw:
        if k not in known:
            raise src.error(k, "unknown section")

    system_sec = raw.get("system", {})
    params = _system(src, system_sec)
    try:
        mode = FormulaMode(system_sec.get("mode", "paper"))
    except ValueError:
        raise src.error("system.mode", f"expected one of {[m.value for m in FormulaMode]}") from None

    thermal = raw.get("thermal", {})
    T_grid = _temperatures(src, thermal, "thermal")
    if "thermal" in raw and not T_grid:
        raise src.error("thermal", "temperature grid is empty")
    tail_tol = float(thermal.get("tail_tol", DEFAULT_TAIL_TOL))
    if not 0 < tail_tol < 1:
        raise src.error("thermal.tail_tol", f"must lie in (0, 1), got {tail_tol!r}")

    metro = raw.get("metrology", {})
    try:
        schemes = tuple(Scheme(s) for s in _list(src, "metrology.schemes",
                                                 metro.get("schemes", [s.value for s in Scheme])))
    except ValueError:
        raise src.error("metrology.schemes", f"expected names from {[s.value for s in Scheme]}") from None
    M_list = tuple(_list(src, "metrology.M", metro.get("M", [1000, 3000, 5000])))
    for M in M_list:
        if isinstance(M, bool) or not isinstance(M, int) or M < 1:
            raise src.error("metrology.M", f"shot counts must be positive integers, got {M!r}")
    if not M_list:
        raise src.error("metrology.M", "empty list")

    sim_sec = raw.get("sim", {})
    seed = sim_sec.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed <= U64_MAX:
        raise src.error("sim.seed", "seed must be an unsigned 64-bit integer")
    trials = sim_sec.get("trials", 200)
    if isinstance(trials, bool) or not isinstance(trials, int) or trials < 2:
        raise src.error("sim.trials", f"need an integer >= 2, got {trials!r}")
    vis = float(sim_sec.get("visibility", 1.0))
    if not 0 <= vis <= 1:
        raise src.error("sim.visibility", f"must lie in [0, 1], got {vis!r}")
    phase = sim_sec.get("control_phase")
    window = tuple(float(x) for x in sim_sec.get("window", (0.5, 2.0)))
    if len(window) != 2 or not 0 < window[0] < 1 < window[1]:
        raise src.error("sim.window", "expected [low_factor, high_factor] with 0 < low < 1 < high")
    sim = SimConfig(
        trials=trials, seed=seed, visibility=vis,
        control_phase=None if phase is None else float(phase),
        window=window, T_grid=_temperatures(src, sim_sec, "sim") or T_grid,
    )

    surf_sec = raw.get("surface")
    surface = None
    if surf_sec is not None:
        hz = lambda k: tuple(_quantity(src, f"surface.{k}", v, _FREQUENCY, bare_unit="Hz")
                             for v in _list(src, f"surface.{k}", surf_sec.get(k, [])))
        g_hz, d_hz = hz("g"), hz("delta")
        if not g_hz or not d_hz:
            raise src.error("surface", "g and delta grids must be non-empty")
        if any(g < 0 for g in g_hz):
            raise src.error("surface.g", "couplings must be non-negative")
        if any(d <= 0 for d in d_hz):
            raise src.error("surface.delta", "detunings must be positive")
        T_s = _temperatures(src, surf_sec, "surface")
        if len(T_s) != 1:
            raise src.error("surface.T", "give exactly one temperature")
        surface = SurfaceConfig(g_hz, d_hz, T_s[0])

    bec_sec = raw.get("bec", {})
    condensate = _condensate(src, bec_sec)
    accelerations = tuple(_quantity(src, "bec.accelerations", a, _ACCEL, bare_unit="m/s^2")
                          for a in _list(src, "bec.accelerations", bec_sec.get("accelerations", [9.81])))
    thresholds = ValidityThresholds(
        rwa=float(bec_sec.get("rwa_threshold", 0.1)),
        adiabatic=float(bec_sec.get("adiabatic_threshold", 0.1)),
    )

    out = raw.get("output", {})
    formats = tuple(_list(src, "output.formats", out.get("formats", ["csv", "json"])))
    for f in formats:
        if f not in ("csv", "json"):
            raise src.error("output.formats", f"unknown format {f!r}")
    if "csv" not in formats:
        raise src.error("output.formats", "csv output is required")

    return RunConfig(
        path=path,
        digest=hashlib.sha256(data).hexdigest(),
        system=params,
        mode=mode,
        T_grid=T_grid,
        tail_tol=tail_tol,
        schemes=schemes,
        M_list=M_list,
        sim=sim,
        surface=surface,
        condensate=condensate,
        accelerations=accelerations,
        thresholds=thresholds,
        out_dir=out.get("directory"),
        formats=formats,
        raw=raw,
    )

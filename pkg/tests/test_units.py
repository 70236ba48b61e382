import math

import pytest
from hypothesis import given, strategies as st

from bec_thermo.units import HBAR, K_B, angular, ordinary, thermal_ratio

temps = st.floats(min_value=1e-12, max_value=1e3)
freqs = st.floats(min_value=1e-3, max_value=1e9)


def test_codata_values():
    assert HBAR == 1.054571817e-34
    assert K_B == 1.380649e-23


@pytest.mark.parametrize("hz, expected", [(10.0, 62.83185307179586), (0.0, 0.0), (2.0, 12.566370614359172)])
def test_angular(hz, expected):
    assert angular(hz) == pytest.approx(expected, rel=1e-15)
    assert ordinary(angular(hz)) == pytest.approx(hz)


@pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
def test_angular_rejects_non_finite(bad):
    with pytest.raises(ValueError):
        angular(bad)


def test_thermal_ratio_values():
    # mpmath at 30 digits: 0.959848614..., 0.239962153...
    assert thermal_ratio(angular(10), 0.5e-9) == pytest.approx(0.9598486140851266, rel=1e-14)
    assert thermal_ratio(angular(10), 2e-9) == pytest.approx(0.23996215352128165, rel=1e-14)


def test_thermal_ratio_halving_temperature_doubles():
    w = angular(10)
    assert thermal_ratio(w, 0.25e-9) == pytest.approx(2 * thermal_ratio(w, 0.5e-9), rel=1e-15)


@pytest.mark.parametrize("T", [0.0, -1e-9, math.nan])
def test_thermal_ratio_domain(T):
    with pytest.raises(ValueError):
        thermal_ratio(angular(10), T)


def test_thermal_ratio_no_overflow_at_picokelvin():
    F = thermal_ratio(angular(10), 1e-12)
    assert math.isfinite(F) and F > 400


@given(freqs, temps, temps)
def test_ratio_of_ratios_is_inverse_temperature_ratio(w, t1, t2):
    lhs = thermal_ratio(w, t1) / thermal_ratio(w, t2)
    assert lhs == pytest.approx(t2 / t1, rel=1e-14)


@given(freqs, temps)
def test_linear_in_frequency(w, t):
    assert thermal_ratio(2 * w, t) == pytest.approx(2 * thermal_ratio(w, t), rel=1e-15)


@given(freqs, temps, temps)
def test_strictly_decreasing_in_temperature(w, t1, t2):
    if t1 < t2 * (1 - 1e-12):
        assert thermal_ratio(w, t1) > thermal_ratio(w, t2)

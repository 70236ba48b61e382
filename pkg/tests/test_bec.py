import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bec_thermo.bec import (
    CondensateParams,
    ValidityThresholds,
    dot_coupling,
    phonon_frequency,
    probe_budget,
    transition_ratio,
    unruh_temperature,
    validity_report,
)
from bec_thermo.errors import DomainError, ValidationError
from bec_thermo.jc import SystemParams, block_hamiltonian
from bec_thermo.units import HBAR, MICROMETRE, NANOKELVIN, NANOMETRE, angular

A0 = 5.29177210903e-11
M_RB87 = 1.443160648e-25


def contact(a_bohr):
    return 4 * math.pi * HBAR**2 * a_bohr * A0 / M_RB87


@pytest.fixture
def condensate():
    # Rb-87 background scattering length 100.4 a0; dot-condensate length
    # Feshbach-tuned to 820 a0; elongated 500 x 10 x 10 um cloud.
    return CondensateParams(
        length_L=500 * MICROMETRE,
        speed_c=5e-3,
        g_bb=contact(100.4),
        g_ab=contact(820.0),
        healing_length=200 * NANOMETRE,
        dot_spacing=300 * NANOMETRE,
        volume_V=500e-6 * 10e-6 * 10e-6,
    )


def test_phonon_frequency_headline():
    assert phonon_frequency(500 * MICROMETRE, 5e-3) == pytest.approx(angular(10.0), rel=1e-14)


def test_phonon_frequency_scaling():
    assert phonon_frequency(250 * MICROMETRE, 5e-3) == pytest.approx(angular(20.0), rel=1e-14)
    assert phonon_frequency(1000 * MICROMETRE, 5e-3) == pytest.approx(angular(5.0), rel=1e-14)


def test_phonon_frequency_domain():
    with pytest.raises(DomainError):
        phonon_frequency(0.0, 5e-3)


def test_coupling_vanishes_when_couplings_match(condensate):
    same = CondensateParams(**{**condensate.__dict__, "g_ab": condensate.g_bb})
    assert dot_coupling(same) == 0.0


def test_coupling_volume_scaling(condensate):
    big = CondensateParams(**{**condensate.__dict__, "volume_V": 4 * condensate.volume})
    assert dot_coupling(big) == pytest.approx(dot_coupling(condensate) / 2, rel=1e-14)


def test_coupling_sign_preserved(condensate):
    weaker = CondensateParams(**{**condensate.__dict__, "g_ab": 0.5 * condensate.g_bb})
    assert dot_coupling(weaker) < 0 < dot_coupling(condensate)


def test_coupling_lands_in_tunable_window(condensate):
    g_hz = dot_coupling(condensate) / (2 * math.pi)
    assert 0.1 <= g_hz <= 10.0


def test_coupling_domain(condensate):
    bad = CondensateParams(**{**condensate.__dict__, "g_bb": 0.0})
    with pytest.raises(DomainError):
        dot_coupling(bad)


def test_default_volume_is_cube():
    c = CondensateParams(500e-6, 5e-3, 1e-51, 2e-51, 2e-7, 3e-7)
    assert c.volume == pytest.approx((500e-6) ** 3)
    assert c.volume_is_default


def test_speed_rescaling(condensate):
    # c -> 2c doubles Omega_a and multiplies |g| by sqrt(2) at fixed k
    k = condensate.wavenumber
    fast = CondensateParams(**{**condensate.__dict__, "speed_c": 2 * condensate.speed_c})
    assert phonon_frequency(fast.length_L, fast.speed_c) == pytest.approx(
        2 * phonon_frequency(condensate.length_L, condensate.speed_c))
    assert dot_coupling(fast, k) == pytest.approx(math.sqrt(2) * dot_coupling(condensate, k), rel=1e-14)


# validity


def test_reference_rwa_passes():
    p = SystemParams.from_hz(10, 0.2, delta_hz=2)
    r = validity_report(p)
    assert r.rwa_margin == pytest.approx(2 / 22, rel=1e-14)
    assert r.rwa_ok


def test_strong_coupling_fails_rwa():
    p = SystemParams.from_hz(10, 10, delta_hz=2)
    r = validity_report(p)
    assert r.rwa_margin == pytest.approx(10 / 22)
    assert not r.rwa_ok


def test_vanishing_coupling_is_adiabatic():
    p = SystemParams.from_hz(10, 1e-9, delta_hz=2)
    r = validity_report(p, T=1 * NANOKELVIN)
    assert r.adiabatic_margin < 1e-8
    assert r.adiabatic_ok


@pytest.mark.parametrize("n", [0, 1, 5])
def test_transition_ratio_matches_explicit_matrix_element(n):
    # H(t) = U H0 U^dag with theta' = -delta, so dH/dt = -i delta [N, H]
    p = SystemParams.from_hz(10, 0.3, delta_hz=2)
    H = block_hamiltonian(n, p)
    N = np.diag([n + 1.0, float(n)])
    Hdot = -1j * p.delta * (N @ H - H @ N)
    w, v = np.linalg.eigh(H)
    element = abs(v[:, 1].conj() @ Hdot @ v[:, 0])
    assert element / (w[1] - w[0]) == pytest.approx(transition_ratio(n, p), rel=1e-12)


def test_adiabatic_reports_both_sides():
    p = SystemParams.from_hz(10, 0.2, delta_hz=2)
    r = validity_report(p, interaction_time=0.1, T=0.5 * NANOKELVIN)
    assert r.interaction_time == 0.1
    assert r.adiabatic_reference == pytest.approx(0.5 * p.g * 0.1)
    assert r.adiabatic_margin == pytest.approx(transition_ratio(r.n_eval, p) * 0.1)
    # 1 / (e^F - 1) at F = 0.959848614... (mpmath)
    assert r.n_eval == pytest.approx(0.6206164582293085, rel=1e-12)


def test_thresholds_configurable():
    p = SystemParams.from_hz(10, 0.2, delta_hz=2)
    assert not validity_report(p, thresholds=ValidityThresholds(rwa=0.05)).rwa_ok
    assert validity_report(p, thresholds=ValidityThresholds(adiabatic=10.0)).adiabatic_ok


def test_g_aa_note():
    p = SystemParams.from_hz(10, 0.2, delta_hz=2)
    assert any("g_aa" in n for n in validity_report(p, g_aa=1e-50).notes)


@given(st.floats(0.01, 5.0), st.floats(0.01, 5.0), st.floats(1.01, 3.0))
def test_margins_monotone(g, delta, factor):
    p = SystemParams.build(60.0, g, delta=delta)
    base = validity_report(p)
    more_g = validity_report(p.with_coupling(g * factor))
    assert more_g.rwa_margin >= base.rwa_margin
    assert more_g.adiabatic_margin >= base.adiabatic_margin


# probes and Unruh


def test_probe_budget_headline():
    n = probe_budget(500 * MICROMETRE, 300 * NANOMETRE, 200 * NANOMETRE)
    assert n == 1666
    assert n >= 1500


def test_probe_budget_simple_cases():
    assert probe_budget(500e-6, 500e-6, 1e-7) == 1
    assert probe_budget(100 * MICROMETRE, 1 * MICROMETRE, 0.2 * MICROMETRE) == 100


def test_probe_budget_spacing_below_healing_length():
    with pytest.raises(ValidationError, match="healing length"):
        probe_budget(500e-6, 100e-9, 200e-9)


def test_unruh_headline():
    assert unruh_temperature(9.81, 5e-3) == pytest.approx(2.4 * NANOKELVIN, rel=0.05)


def test_unruh_zero_and_linear():
    assert unruh_temperature(0.0, 5e-3) == 0.0
    assert unruh_temperature(19.62, 5e-3) == pytest.approx(2 * unruh_temperature(9.81, 5e-3), rel=1e-15)


@pytest.mark.parametrize("a", np.logspace(-2, 3, 6))
@pytest.mark.parametrize("c", np.logspace(-4, -1, 4))
def test_unruh_scaling_grid(a, c):
    base = unruh_temperature(1.0, 1e-3)
    assert unruh_temperature(a, c) == pytest.approx(base * a * 1e-3 / c, rel=1e-13)


def test_unruh_domain():
    with pytest.raises(DomainError):
        unruh_temperature(-1.0, 5e-3)
    with pytest.raises(DomainError):
        unruh_temperature(1.0, 0.0)

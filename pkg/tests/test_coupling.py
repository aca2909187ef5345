import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from efiber.constants import C0, HBAR, M_E
from efiber.coupling import (TANGENCY_CONSTANT, BetaWarning, NotPhaseMatchedError,
                             PhaseMatchPoint, ResolutionError, SingularCouplingError,
                             analyze_coupling, beta_factor, competitor_set, coupling_spectrum,
                             find_phase_match, gq2_closed_form, integrate_spectrum,
                             kerr_and_phase, mode_overlap, overlap_integral, resolved_grid,
                             sinc2_integral_closed, sinc2_integral_quad, total_coupling,
                             validate_regime)
from efiber.fiber_modes import mode_area
from efiber.pondero_guide import ElectronBeam


def two_pi_ghz(kappa):
    return kappa / (2 * math.pi) / 1e9


# --- phase matching --------------------------------------------------------------

def test_uniform_intersection(uniform):
    pm = uniform.pm
    assert pm.kind == "Intersection" and pm.m_order == 0
    assert abs(pm.omega0 - pm.v_e * pm.recoil_q) / pm.omega0 < 1e-3


def test_bragg_tangency(bragg):
    pm = bragg.pm
    assert pm.kind == "Tangency" and pm.m_order == 2
    assert pm.wavelength == pytest.approx(423e-9, rel=0.01)
    assert abs(1 - pm.v_g / pm.meta["electron_slope"]) < 1e-3
    assert pm.recoil_q == pytest.approx(pm.q0 + 4 * math.pi / bragg.geometry.period, rel=1e-14)


def test_not_phase_matched(uniform):
    with pytest.raises(NotPhaseMatchedError):
        find_phase_match(uniform.band, ElectronBeam.from_beta(0.3), 0)


def test_phase_match_point_invariants():
    with pytest.raises(ValueError):
        PhaseMatchPoint("Intersection", 1e7, 1e15, 0, 1e8, 1e8 * (1 - 1e-4), 0.0, 1e7)
    with pytest.raises(ValueError):
        PhaseMatchPoint("Tangency", 1e7, 1e15, 0, 1e8, 0.5e8, 10.0, 1e7)


# --- overlap -------------------------------------------------------------------

def test_selection_rule():
    rho = np.linspace(0, 1e-7, 201)
    f = np.exp(-(rho / 3e-8) ** 2)
    assert overlap_integral(rho, f, f, f, l_f=0, l_i=0, l_field=1) == 0
    assert overlap_integral(rho, f, f, f, l_f=2, l_i=0, l_field=1) == 0
    assert abs(overlap_integral(rho, f, f, f, l_f=1, l_i=0, l_field=1)) > 0
    with pytest.raises(ValueError):
        overlap_integral(rho, f, f, f[:-1])


@pytest.mark.xfail(strict=True, reason="solver gives 0.267 at its own phase-matching point; see ledger")
def test_uniform_overlap(uniform):
    assert abs(uniform.result.overlap["TM01_p0"]) == pytest.approx(0.3487, rel=0.05)


def test_bragg_overlap(bragg):
    assert abs(bragg.result.overlap["TM01_p0"]) == pytest.approx(0.0154, rel=0.10)


def test_normalization_independence(uniform):
    p = uniform.point
    q = dataclasses.replace(p, coeffs=p.coeffs * (3.7 - 1.2j), meta={})
    Om = uniform.trap.Omega
    g_p = total_coupling(uniform.pm, mode_overlap(p, Om), mode_area(p), 0.04)
    g_q = total_coupling(uniform.pm, mode_overlap(q, Om), mode_area(q), 0.04)
    assert g_q == pytest.approx(g_p, rel=1e-10)


# --- |g_Q|^2 ---------------------------------------------------------------------

def test_injected_intermediates():
    g_u = gq2_closed_form("Intersection", 0.3487, 0.5175, 0.04, 646.53e-9, 0.7 * C0, 0.4124 * C0)
    assert math.sqrt(g_u) == pytest.approx(16.07, rel=0.01)
    g_b = gq2_closed_form("Tangency", 0.0154, 0.3775, 0.01, 423e-9, 0.2575 * C0, 0.2575 * C0, 87.1)
    assert math.sqrt(g_b) == pytest.approx(2.77, rel=0.01)


@pytest.mark.parametrize("kind,slope", [("Intersection", 1.0), ("Tangency", 1.5)])
def test_loglog_slopes(kind, slope):
    L = np.geomspace(1e-3, 0.1, 10)
    g = [gq2_closed_form(kind, 0.3, 0.5, x, 6e-7, 0.7 * C0, 0.4 * C0 if kind == "Intersection" else 0.7 * C0, 80.0)
         for x in L]
    fit = np.polyfit(np.log(L), np.log(g), 1)[0]
    assert abs(fit - slope) < 1e-3


def test_singular_intersection():
    with pytest.raises(SingularCouplingError):
        sinc2_integral_closed(0.0, 50.0, 0.01, 1e8, "Intersection")


@pytest.mark.parametrize("mismatch", [0.4, -0.2, 0.05])
def test_sinc2_intersection_quadrature(mismatch):
    assert sinc2_integral_quad(mismatch, 0.0, 0.04, 2e8) == pytest.approx(1 / abs(mismatch), rel=1e-6)


@pytest.mark.parametrize("w2,L,v", [(87.1, 0.01, 0.2575 * C0), (30.0, 0.003, 1e8)])
def test_sinc2_tangency_quadrature(w2, L, v):
    closed = sinc2_integral_closed(0.0, w2, L, v, "Tangency")
    assert closed == pytest.approx(TANGENCY_CONSTANT * math.sqrt(L * v / w2), rel=1e-15)
    assert sinc2_integral_quad(0.0, w2, L, v) == pytest.approx(closed, rel=1e-6)


@pytest.mark.parametrize("which", ["uniform", "bragg"])
def test_spectrum_integral_matches_closed_form(which, request):
    sc = request.getfixturevalue(which)
    pm = sc.pm
    L = sc.result.L_int
    ov = sc.result.overlap["TM01_p0"]
    q = resolved_grid(pm, L)
    if pm.kind == "Tangency":
        # evaluate the band expansion with the slope-matched electron line
        pm = dataclasses.replace(pm, v_g=pm.v_e, meta={"tangency_threshold": 1e-3})
    g = coupling_spectrum(pm, L, q, ov, sc.area)
    closed = total_coupling(pm, ov, sc.area, L)
    assert integrate_spectrum(q, g) == pytest.approx(closed, rel=1e-3)


def test_spectrum_resolution_check(uniform):
    q = np.linspace(uniform.pm.q0 - 1e7, uniform.pm.q0 + 1e7, 11)
    with pytest.raises(ResolutionError):
        coupling_spectrum(uniform.pm, 0.04, q, 0.3, 0.5)


# --- beta -----------------------------------------------------------------------

def test_beta_single_mode():
    with pytest.warns(BetaWarning):
        assert beta_factor({"TM01": 2.0}) == 1.0
    assert beta_factor({"TM01": 3.0, "HE1": 1.0}) == 0.75


def test_beta_uniform(uniform):
    assert uniform.result.beta == pytest.approx(0.89, abs=0.05)


def test_beta_bragg(bragg):
    assert bragg.result.beta == pytest.approx(0.99, abs=0.01)


def test_beta_tends_to_one_with_confinement(uniform):
    betas = []
    for f in (1.0, 2.0, 4.0, 8.0, 16.0):
        Om = uniform.trap.Omega * f
        comp, _ = competitor_set(uniform.geometry, uniform.beam, uniform.pm, Om, 0.04)
        r = analyze_coupling(uniform.point, uniform.pm, uniform.beam, Om, 0.04, comp, area=uniform.area)
        assert 0 <= r.beta <= 1
        betas.append(r.beta)
    assert np.all(np.diff(betas) > 0)
    assert betas[-1] > 0.99


# --- Kerr term ------------------------------------------------------------------

def test_kerr_uniform_example():
    k, d = kerr_and_phase(1.39e7, 0.04, 0.7 * C0)
    assert two_pi_ghz(k) == pytest.approx(1.77, rel=0.01)
    assert d / math.pi == pytest.approx(1.35, rel=0.01)


@pytest.mark.xfail(strict=True, reason="rest-mass formula gives 2 pi x 30.67 GHz; see ledger")
def test_kerr_bragg_example():
    k, d = kerr_and_phase(5.77e7, 0.01, 0.2575 * C0)
    assert two_pi_ghz(k) == pytest.approx(30.06, rel=0.01)
    assert d / math.pi == pytest.approx(15.88, rel=0.01)


def test_kerr_scaling_and_consistency(bragg):
    k1, _ = kerr_and_phase(2e7, 0.01, 1e8)
    k2, _ = kerr_and_phase(4e7, 0.01, 1e8)
    assert k2 == pytest.approx(4 * k1, rel=1e-15)
    r = bragg.result
    assert r.delta_nl == pytest.approx(2 * r.kappa * r.L_int / bragg.pm.v_e, rel=1e-15)
    assert r.kappa == pytest.approx(HBAR * bragg.pm.recoil_q ** 2 / (2 * M_E), rel=1e-15)


def test_relativistic_mass_flag(bragg):
    rel = analyze_coupling(bragg.point, bragg.pm, bragg.beam, bragg.trap.Omega, 0.01,
                           area=bragg.area, relativistic_mass=True)
    assert rel.kappa == pytest.approx(bragg.result.kappa / bragg.beam.gamma, rel=1e-12)


# --- regime ---------------------------------------------------------------------

@pytest.mark.xfail(strict=True, reason="narrowband limit with margin 5 needs dE below 0.077 eV at 1 cm; see ledger")
def test_regime_bragg_passes(bragg):
    r = validate_regime(ElectronBeam(17800.0, 0.1), bragg.pm, 0.01)
    assert r.narrowband_ok and r.particlelike_ok


def test_regime_bragg_narrower_spread(bragg):
    r = validate_regime(ElectronBeam(17800.0, 0.05), bragg.pm, 0.01)
    assert r.narrowband_ok and r.particlelike_ok


def test_regime_limits(bragg):
    pm = bragg.pm
    assert not validate_regime(ElectronBeam(17800.0, 0.0), pm, 0.01).particlelike_ok
    hw = HBAR * pm.omega0 / 1.602176634e-19
    assert not validate_regime(ElectronBeam(17800.0, hw), pm, 0.01).narrowband_ok


@settings(max_examples=30, deadline=None)
@given(st.dictionaries(st.sampled_from(["HE1", "EH1", "HE2", "EH2"]), st.floats(0, 1e3), min_size=1),
       st.floats(1e-6, 1e3))
def test_property_beta_in_unit_interval(comp, target):
    b = beta_factor({"TM01": target, **comp})
    assert 0 <= b <= 1

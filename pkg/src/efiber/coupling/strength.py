"""Coupling strength g_q, its spectrum and the total |g_Q|^2."""
from __future__ import annotations

import math

import numpy as np
from scipy import integrate

from ..constants import ALPHA, C0

# int dx/pi sinc^2(x^2) = TANGENCY_CONSTANT
TANGENCY_CONSTANT = 4.0 / (3.0 * math.sqrt(math.pi))
POINTS_PER_LOBE = 16


class SingularCouplingError(ZeroDivisionError):
    pass


class ResolutionError(ValueError):
    pass


def overlap_integral(rho, psi_f, psi_i, u_mz, l_f=0, l_i=0, l_field=0):
    """int d^2 rho psi_f^* psi_i u over radial profiles sampled on ``rho``.

    The angular factors exp(i l phi) are integrated analytically: the
    result is exactly zero unless l_field = l_f - l_i, otherwise
    2 pi int psi_f^* psi_i u rho d rho by Simpson's rule.
    """
    rho = np.asarray(rho, dtype=float)
    arrs = [np.asarray(x) for x in (psi_f, psi_i, u_mz)]
    if any(a.shape != rho.shape for a in arrs):
        raise ValueError("profiles must be sampled on the same radial grid (resample first)")
    if l_field != l_f - l_i:
        return 0.0 + 0.0j
    f = np.conj(arrs[0]) * arrs[1] * arrs[2] * rho
    return complex(2.0 * np.pi * integrate.simpson(f, x=rho))


def mode_overlap(point, Omega, m_order=0, l_f=0, p_f=0, l_i=0, p_i=0, n_rho=2001, extent=12.0):
    """Overlap of a solved mode's m-th E_z harmonic with oscillator states.

    The mode is normalized to max eps |E|^2 = 1 over the cell, the same
    normalization that defines the mode area.
    """
    from ..fiber_modes import fourier_uz
    from ..pondero_guide import delta_r, guided_wavefunction

    rho = np.linspace(0.0, extent * delta_r(Omega) * math.sqrt(1 + p_f + p_i + abs(l_f) + abs(l_i)), n_rho)
    orders, uz = fourier_uz(point, rho)
    idx = int(np.nonzero(orders == m_order)[0][0])
    psi_f = guided_wavefunction(Omega, l_f, p_f, rho)
    psi_i = guided_wavefunction(Omega, l_i, p_i, rho)
    return overlap_integral(rho, psi_f, psi_i, uz[idx], l_f, l_i, point.l)


def sinc2_integral_closed(velocity_mismatch, omega2, L_int, v_e, kind):
    """Closed form of int dx/pi sinc^2[(1 - v_g/v) x - omega'' x^2 / (L v)]."""
    if kind == "Intersection":
        if velocity_mismatch == 0:
            raise SingularCouplingError("v_g = v_e: the intersection form diverges, use the tangency form")
        return 1.0 / abs(velocity_mismatch)
    if kind == "Tangency":
        if omega2 == 0:
            raise SingularCouplingError("tangency form needs a nonzero omega''")
        return TANGENCY_CONSTANT * math.sqrt(L_int * v_e / abs(omega2))
    raise ValueError(f"unknown phase-matching kind {kind!r}")


def sinc2_integral_quad(velocity_mismatch, omega2, L_int, v_e):
    """Direct quadrature of the phase-matching integral (any mismatch and omega'').

    Oscillatory part on panels of one lobe out to a large |x|, the tail
    from the lobe-averaged integrand 1 / (2 arg^2).
    """
    a = velocity_mismatch
    b = omega2 / (L_int * v_e)

    def arg(x):
        return a * x - b * x * x

    def f(x):
        t = arg(x)
        return 1.0 if t == 0 else (math.sin(t) / t) ** 2

    # |x| range where the argument reaches ~4000 lobes
    X = 1.0
    while abs(arg(X)) < 4000 * math.pi or abs(arg(-X)) < 4000 * math.pi:
        X *= 2.0
    # breakpoints every half lobe of the local argument
    quad_step = math.sqrt(0.5 * math.pi / abs(b)) if b else math.inf
    xs = [0.0]
    while xs[-1] < X:
        x = xs[-1]
        slope = max(abs(a - 2 * b * x), abs(a + 2 * b * x))
        xs.append(x + min(0.5 * math.pi / slope if slope else math.inf, quad_step, X))
    edges = np.array(xs)
    total = 0.0
    for sgn in (1.0, -1.0):
        for lo, hi in zip(edges[:-1], edges[1:]):
            total += integrate.quad(lambda x: f(sgn * x), lo, hi, epsabs=0, epsrel=1e-12)[0]
        # x = X / u maps the tail onto u in (0, 1]
        X = edges[-1]
        tail = integrate.quad(lambda u: 0.5 * X / (u * arg(sgn * X / u)) ** 2, 0.0, 1.0,
                              epsabs=0, epsrel=1e-10)[0]
        total += tail
    return total / math.pi


def gq2_closed_form(kind, overlap, area, L_int, wavelength, v_e, v_g, omega2=0.0):
    """|g_Q|^2 = (alpha / A~) (L / lambda) |overlap|^2 int dx/pi sinc^2(...)."""
    if not (area > 0 and L_int > 0 and wavelength > 0):
        raise ValueError("area, L_int and wavelength must be positive")
    # the tangency form takes v = v_g by construction
    I = sinc2_integral_closed(1.0 - v_g / v_e, omega2, L_int, v_g if kind == "Tangency" else v_e, kind)
    return ALPHA / area * L_int / wavelength * abs(overlap) ** 2 * I


def total_coupling(pm, overlap, area, L_int):
    """|g_Q|^2 at a phase-matching point in its closed form."""
    return gq2_closed_form(pm.kind, overlap, area, L_int, pm.wavelength, pm.v_e, pm.v_g, pm.omega2)


def taylor_band(pm):
    """Second-order expansion of omega(q) around the phase-matching point."""
    def omega(q):
        d = np.asarray(q, dtype=float) - pm.q0
        return pm.omega0 + pm.v_g * d + 0.5 * pm.omega2 * d * d
    return omega


def coupling_spectrum(pm, L_int, q, overlap, area, omega_model=None, profile_resolved=False):
    """Spectral coupling g_q on the photon wavenumber grid ``q`` (1/m).

    g_q = sqrt(2 pi alpha c / (omega A)) overlap int_0^L exp(i Delta z) dz
    with Delta = [omega0 + v (q - q0) - omega(q)] / v. ``omega_model``
    maps q to omega (default: second-order expansion at the phase-matching
    point). With ``profile_resolved`` the 1/omega prefactor follows the
    band; otherwise it is frozen at omega0. The grid must resolve every
    sinc lobe with at least 16 samples.
    """
    q = np.asarray(q, dtype=float)
    if q.ndim != 1 or q.size < 3 or np.any(np.diff(q) <= 0):
        raise ValueError("q grid must be increasing with at least 3 points")
    omega = (omega_model or taylor_band(pm))(q)
    v = pm.v_e
    delta = (pm.omega0 + v * (q - pm.q0) - omega) / v
    phase = 0.5 * delta * L_int
    if np.max(np.abs(np.diff(phase))) > math.pi / POINTS_PER_LOBE:
        raise ResolutionError(
            f"q grid too coarse: need at least {POINTS_PER_LOBE} samples per sinc lobe")
    A = area * pm.wavelength ** 2
    w_pref = omega if profile_resolved else pm.omega0
    amp = np.sqrt(2.0 * math.pi * ALPHA * C0 / (w_pref * A)) * overlap * L_int
    return amp * np.sinc(phase / math.pi) * np.exp(1j * phase)


def integrate_spectrum(q, g):
    """int dq / 2 pi |g_q|^2 by the trapezoidal rule."""
    return float(integrate.trapezoid(np.abs(g) ** 2, q) / (2.0 * math.pi))


def resolved_grid(pm, L_int, lobes=2000, per_lobe=POINTS_PER_LOBE):
    """Uniform q grid spanning ``lobes`` sinc lobes on each side of q0."""
    if pm.kind == "Intersection":
        span = lobes * 2.0 * math.pi / (L_int * abs(pm.velocity_mismatch))
        n = int(2 * lobes * per_lobe * 1.1) + 1
    else:
        # lobe index grows as (q - q0)^2 for the quadratic mismatch
        span = math.sqrt(4.0 * math.pi * lobes * pm.v_e / (L_int * abs(pm.omega2)))
        dq = math.pi / per_lobe / (abs(pm.omega2) * span * L_int / (2.0 * pm.v_e)) * 0.9
        n = int(2 * span / dq) + 1
    return np.linspace(pm.q0 - span, pm.q0 + span, n)

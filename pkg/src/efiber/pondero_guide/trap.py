"""Ponderomotive trap of a TE pump mode and its guided electron states."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from ..constants import E_CHARGE, HBAR, M_E
from ..fiber_modes.fields import fourier_fields, poynting_power, quadrature_grid, real_space
from ..specfun import laguerre_poly

FIT_WINDOW = 0.6
RESIDUAL_LIMIT = 0.2

# U_p = PREFACTOR[convention] * e^2 |E|^2 / (m omega^2) for complex amplitude E
PONDEROMOTIVE_PREFACTOR = {"cycle_averaged": 0.25, "literal": 1.0}


class FamilyError(ValueError):
    pass


class TrapNotParabolicWarning(UserWarning):
    pass


def _power_scaled_coeffs(te_mode, P0):
    s = te_mode.setup()
    P = poynting_power(s, te_mode.coeffs)
    if not P > 0:
        raise FamilyError("pump mode carries no forward power")
    return s, te_mode.coeffs * np.sqrt(P0 / P)


def ponderomotive_potential(te_mode, P0, rho=None, n_rho=241, convention="cycle_averaged"):
    """Ponderomotive potential (eV) inside the core for pump power ``P0`` (W).

    The mode amplitude is fixed by the longitudinal Poynting flux
    (1/2) Re int E x H* . z = P0. For a Bragg shell the cell-averaged
    |E|^2 is used. ``convention="cycle_averaged"`` gives
    e^2 |E|^2 / (4 m omega^2), the cycle-averaged quiver energy for the
    complex amplitude E; ``"literal"`` drops the factor 1/4.
    Returns (rho in m, U in eV).
    """
    if te_mode.family != "TE":
        raise FamilyError(f"pump must be a TE mode, got {te_mode.family}")
    if P0 < 0:
        raise ValueError("pump power must be non-negative")
    pref = PONDEROMOTIVE_PREFACTOR[convention]
    a = te_mode.geometry.a
    rho = np.linspace(0.0, a, n_rho) if rho is None else np.asarray(rho, dtype=float)
    if np.any(rho > a * (1 + 1e-12)) or np.any(rho < 0):
        raise ValueError("potential is only defined inside the core")
    if P0 == 0:
        return rho, np.zeros_like(rho)
    s, c = _power_scaled_coeffs(te_mode, P0)
    f = fourier_fields(s, c, rho * s.k0, "core")
    e2 = sum(np.sum(np.abs(f[k]) ** 2, axis=0) for k in ("Erho", "Ephi", "Ez"))
    U = pref * E_CHARGE ** 2 * e2 / (M_E * te_mode.omega ** 2)
    return rho, U / E_CHARGE


def peak_fluence(te_mode, P0, tau):
    """Peak pulse fluence (J/cm^2): tau times the maximum longitudinal intensity."""
    s, c = _power_scaled_coeffs(te_mode, P0)
    from ..constants import Z0

    z = np.linspace(0.0, s.geom.period, 128, endpoint=False) if s.geom.is_bragg else np.zeros(1)
    best = 0.0
    for region, (r, _) in quadrature_grid(s).items():
        f = fourier_fields(s, c, r, region)
        sz = np.real(real_space(s, f["Erho"], z) * real_space(s, f["Hphi"], z).conj()
                     - real_space(s, f["Ephi"], z) * real_space(s, f["Hrho"], z).conj()) / (2 * Z0)
        best = max(best, float(sz.max()))
    return best * tau / 1e4


@dataclass
class TrapFit:
    Omega: float
    hbar_Omega_eV: float
    delta_r: float
    residual: float


def fit_trap(rho, U_eV, a, window=FIT_WINDOW):
    """Least-squares fit of U = m Omega^2 rho^2 / 2 on rho in [0, window a].

    Returns a :class:`TrapFit`; the relative residual is the rms misfit
    over the rms potential in the window.
    """
    rho = np.asarray(rho, dtype=float)
    U = np.asarray(U_eV, dtype=float) * E_CHARGE
    sel = rho <= window * a * (1 + 1e-12)
    r2 = rho[sel] ** 2
    u = U[sel]
    if sel.sum() < 3 or not np.any(u > 0):
        raise ValueError("not enough positive samples inside the fit window")
    k = np.dot(r2, u) / np.dot(r2, r2)
    if k <= 0:
        raise ValueError("potential is not confining")
    resid = float(np.linalg.norm(u - k * r2) / np.linalg.norm(u))
    if resid > RESIDUAL_LIMIT:
        warnings.warn(f"trap is not parabolic (relative residual {resid:.3f})", TrapNotParabolicWarning)
    Omega = math.sqrt(2.0 * k / M_E)
    return TrapFit(Omega=Omega, hbar_Omega_eV=HBAR * Omega / E_CHARGE,
                   delta_r=math.sqrt(HBAR / (2.0 * M_E * Omega)), residual=resid)


def delta_r(Omega):
    """Ground-state width sqrt(hbar / 2 m Omega)."""
    return math.sqrt(HBAR / (2.0 * M_E * Omega))


def guided_wavefunction(Omega, l, p, rho, phi=None):
    """2-D oscillator eigenfunction psi_lp, unit normalized over the plane.

    psi = N x^|l| exp(-x^2/4) L_p^|l|(x^2/2) exp(i l phi), x = rho / delta_r.
    Without ``phi`` only the radial factor (real) is returned.
    """
    if Omega <= 0:
        raise ValueError("Omega must be positive")
    if p < 0:
        raise ValueError("radial index must be non-negative")
    dr = delta_r(Omega)
    al = abs(int(l))
    x = np.asarray(rho, dtype=float) / dr
    norm = math.sqrt(math.factorial(p) / (2.0 * math.pi * dr * dr * 2.0 ** al * math.factorial(p + al)))
    radial = norm * x ** al * np.exp(-x * x / 4.0) * laguerre_poly(p, al, x * x / 2.0)
    if phi is None:
        return radial
    return radial * np.exp(1j * l * np.asarray(phi))


@dataclass
class TrapSolution:
    Omega: float
    hbar_Omega_eV: float
    delta_r: float
    fit_residual: float
    P0: float
    fluence_J_cm2: float
    abar: float
    leaky_eigs: list = field(default_factory=list)
    mfp: list = field(default_factory=list)
    max_potential_eV: float = float("nan")

    def to_dict(self):
        return {
            "Omega_rad_s": self.Omega,
            "hbar_Omega_eV": self.hbar_Omega_eV,
            "delta_r_m": self.delta_r,
            "fit_residual": self.fit_residual,
            "P0_W": self.P0,
            "fluence_J_cm2": self.fluence_J_cm2,
            "abar": self.abar,
            "leaky_eigs_re": [e.real for e in self.leaky_eigs],
            "leaky_eigs_im": [e.imag for e in self.leaky_eigs],
            "mfp_m": self.mfp,
            "max_potential_eV": self.max_potential_eV,
        }


class TrapError(RuntimeError):
    pass


def solve_trap(te_mode, P0, beam, tau=None, n_radial=3, convention="cycle_averaged", window=FIT_WINDOW):
    """Trap, leaky eigenvalues and mean free paths for a TE pump at power ``P0``.

    ``beam`` supplies the electron velocity for the mean free path; with
    ``tau`` (s) the peak fluence of the pump pulse is included. Raises
    :class:`TrapError` if the ground state sits above the potential maximum.
    """
    from .leaky import leaky_eigenvalue, mean_free_path

    rho, U = ponderomotive_potential(te_mode, P0, convention=convention)
    fit = fit_trap(rho, U, te_mode.geometry.a, window)
    umax = float(U.max())
    if not fit.hbar_Omega_eV < umax:
        raise TrapError(f"ground state {fit.hbar_Omega_eV:.3g} eV above barrier {umax:.3g} eV")
    abar = te_mode.geometry.a / fit.delta_r
    eigs = [leaky_eigenvalue(abar, p) for p in range(n_radial)]
    mfp = [mean_free_path(fit.Omega, beam.velocity, e) for e in eigs]
    fluence = peak_fluence(te_mode, P0, tau) if tau is not None else float("nan")
    return TrapSolution(Omega=fit.Omega, hbar_Omega_eV=fit.hbar_Omega_eV, delta_r=fit.delta_r,
                        fit_residual=fit.residual, P0=P0, fluence_J_cm2=fluence, abar=abar,
                        leaky_eigs=eigs, mfp=mfp, max_potential_eV=umax)

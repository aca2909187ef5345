"""Kerr nonlinearity from quantum recoil and regime-of-validity checks."""
from __future__ import annotations

import math
from dataclasses import dataclass

from ..constants import E_CHARGE, H_PLANCK, HBAR, M_E

MARGIN = 5.0


def kerr_and_phase(recoil_q, L_int, v_e, mass=M_E):
    """kappa = hbar q^2 / 2m (rad/s) and delta_NL = 2 kappa L / v_e (rad)."""
    kappa = HBAR * recoil_q ** 2 / (2.0 * mass)
    return kappa, 2.0 * kappa * L_int / v_e


@dataclass
class RegimeReport:
    relative_spread: float
    narrowband_limit: float
    particlelike_limit: float
    narrowband_ok: bool
    particlelike_ok: bool
    margin: float

    def to_dict(self):
        return dict(self.__dict__)


def validate_regime(beam, pm, L_int, margin=MARGIN):
    """Check the electron energy spread against the single-momentum conditions.

    narrowband: dE/E * margin <= min(hbar omega / 2E, 2 beta lambda / L)
    particle-like: dE/E >= margin * 2 (lambda_dB / L) * {1/|1 - v_g/v|, sqrt(L v / pi omega'')}
    with E the kinetic energy and lambda_dB = h / (m v).
    """
    E = beam.energy_eV
    rel = beam.delta_E_eV / E
    hw = HBAR * pm.omega0 / E_CHARGE
    nb = min(hw / (2.0 * E), 2.0 * beam.beta * pm.wavelength / L_int)
    lam_db = H_PLANCK / (M_E * beam.velocity)
    if pm.kind == "Intersection":
        factor = 1.0 / abs(pm.velocity_mismatch)
    else:
        factor = math.sqrt(L_int * beam.velocity / (math.pi * abs(pm.omega2)))
    pl = 2.0 * lam_db / L_int * factor
    return RegimeReport(relative_spread=rel, narrowband_limit=nb, particlelike_limit=pl,
                        narrowband_ok=bool(rel * margin <= nb), particlelike_ok=bool(rel >= margin * pl),
                        margin=margin)

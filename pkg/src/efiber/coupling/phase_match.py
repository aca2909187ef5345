"""Phase matching between the electron and a traced photonic band."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from ..constants import C0, HBAR

TANGENCY_THRESHOLD = 1e-3
TANGENCY_DETUNING = 5e-3


class NotPhaseMatchedError(RuntimeError):
    pass


@dataclass
class PhaseMatchPoint:
    """Resonance between the electron and a photonic mode.

    ``q0`` is the Bloch wavenumber of the photon, ``recoil_q`` the momentum
    transferred to the electron (q0 plus the Fourier-order shift).
    ``detuning`` is the relative frequency gap between band and electron
    line at a near-tangency, zero for an exact crossing.
    """

    kind: str
    q0: float
    omega0: float
    m_order: int
    v_e: float
    v_g: float
    omega2: float
    recoil_q: float
    detuning: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("Intersection", "Tangency"):
            raise ValueError(f"unknown phase-matching kind {self.kind!r}")
        mismatch = abs(1.0 - self.v_g / self.v_e)
        thr = self.meta.get("tangency_threshold", TANGENCY_THRESHOLD)
        if self.kind == "Intersection" and not mismatch > thr:
            raise ValueError("intersection requires |1 - v_g/v_e| above the tangency threshold")
        if self.kind == "Tangency" and (mismatch > thr or self.omega2 == 0):
            raise ValueError("tangency requires matched velocities and nonzero omega''")

    @property
    def wavelength(self):
        return 2.0 * math.pi * C0 / self.omega0

    @property
    def velocity_mismatch(self):
        return 1.0 - self.v_g / self.v_e

    def to_dict(self):
        d = {
            "kind": self.kind, "q0_per_m": self.q0, "omega0_rad_s": self.omega0,
            "wavelength_m": self.wavelength, "m_order": self.m_order, "v_e_m_s": self.v_e,
            "v_g_m_s": self.v_g, "omega2_m2_s": self.omega2, "recoil_q_per_m": self.recoil_q,
            "detuning": self.detuning,
        }
        return d


def harmonic_shift(geom, m_order):
    if m_order == 0:
        return 0.0
    if not geom.is_bragg:
        raise ValueError("a nonzero Fourier order needs a periodic fiber")
    return 2.0 * math.pi * m_order / geom.period


def electron_velocity_after(beam, Q):
    """Group velocity dE/dk / hbar of the electron after giving up momentum Q."""
    k = beam.wavenumber - Q
    return C0 ** 2 * HBAR * k / beam.energy_at(k)


def find_phase_match(band, beam, m_order=0, threshold=TANGENCY_THRESHOLD,
                     max_detuning=TANGENCY_DETUNING):
    """Solve omega(q) = [E(k) - E(k - q - 2 pi m / period)] / hbar on a band.

    The band is interpolated by a cubic spline in q. Crossings are found
    from sign changes of the frequency mismatch and classified as a
    tangency when |1 - v_g/v_e| <= ``threshold``. Without a crossing the
    slope-match point (v_g equal to the electron velocity) is accepted as
    a tangency if the band lies within ``max_detuning`` (relative) of the
    electron line there; otherwise :class:`NotPhaseMatchedError` is raised.
    """
    pts = band.points
    if len(pts) < 4:
        raise NotPhaseMatchedError("band too short to search for phase matching")
    geom = pts[0].geometry
    shift = harmonic_shift(geom, m_order)
    q = band.q
    order = np.argsort(q)
    q, w = q[order], band.omega[order]
    spl = CubicSpline(q, w)
    v_e = beam.velocity

    def mismatch(x):
        return float(spl(x) - beam.emission_frequency(x + shift))

    vals = np.array([mismatch(x) for x in q])
    roots = []
    for i in range(q.size - 1):
        if vals[i] == 0:
            roots.append(q[i])
        elif vals[i] * vals[i + 1] < 0:
            roots.append(brentq(mismatch, q[i], q[i + 1], xtol=1e-14 * abs(q[i]), rtol=1e-15))
    if vals[-1] == 0:
        roots.append(q[-1])

    def point(kind, x, detuning):
        vg = float(spl(x, 1))
        w2 = float(spl(x, 2))
        ve = electron_velocity_after(beam, x + shift) if kind == "Tangency" else v_e
        return PhaseMatchPoint(kind=kind, q0=float(x), omega0=float(spl(x)), m_order=m_order,
                               v_e=v_e, v_g=vg, omega2=w2, recoil_q=float(x + shift),
                               detuning=detuning,
                               meta={"tangency_threshold": threshold, "electron_slope": ve})

    if roots:
        # a crossing with matched slopes counts as tangency, otherwise the
        # first crossing in q is the intersection point
        for x in roots:
            if abs(1.0 - float(spl(x, 1)) / v_e) <= threshold:
                return point("Tangency", x, 0.0)
        return point("Intersection", roots[0], 0.0)

    slope = np.array([float(spl(x, 1)) - electron_velocity_after(beam, x + shift) for x in q])
    cands = [brentq(lambda x: float(spl(x, 1)) - electron_velocity_after(beam, x + shift),
                    q[i], q[i + 1], xtol=1e-14 * abs(q[i]), rtol=1e-15)
             for i in range(q.size - 1) if slope[i] * slope[i + 1] < 0]
    if not cands:
        raise NotPhaseMatchedError("electron line neither crosses nor touches the band in the window")
    x = min(cands, key=lambda c: abs(mismatch(c)))
    det = mismatch(x) / float(spl(x))
    if abs(det) > max_detuning:
        raise NotPhaseMatchedError(
            f"closest approach to the band is {det:.2e} (relative), above {max_detuning:.1e}")
    return point("Tangency", x, float(det))

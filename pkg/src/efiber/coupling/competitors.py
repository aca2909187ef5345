"""Phase-matched competing modes along the electron line and the beta-factor."""
from __future__ import annotations

import logging

import numpy as np

from ..fiber_modes.fields import AccuracyError
from ..fiber_modes.solver import (RootNotFoundError, default_cutoff, golden_minimum,
                                  local_derivatives, make_point, singular_surrogate)
from ..specfun import SpecialFunctionError
from .phase_match import (TANGENCY_THRESHOLD, PhaseMatchPoint, electron_velocity_after,
                          harmonic_shift)
from .strength import mode_overlap, total_coupling

log = logging.getLogger(__name__)

DEFAULT_COMPETITORS = (("HE", 1), ("EH", 1), ("HE", 2), ("EH", 2))


def line_matches(geom, beam, l, family, m_order, q_window, n_scan=201, N=None, tol=1e-8):
    """All guided modes of (family, l) lying on the electron line in ``q_window``.

    Along the line omega = [E(k) - E(k - q - 2 pi m / period)] / hbar the
    boundary-matrix surrogate is scanned and every minimum refined; each
    root is a phase-matched mode. Hybrid families are searched on the full
    matrix and labelled afterwards. Returns a list of BandPoints.
    """
    if N is None:
        N = default_cutoff(geom)
    shift = harmonic_shift(geom, m_order)
    fam = "TM" if (family in ("TM", "TE") and l == 0) else "HE"
    if l == 0 and family in ("TM", "TE"):
        fam = family

    def f(q):
        return singular_surrogate(geom, q, float(beam.emission_frequency(q + shift)), l, fam, N)

    qs = np.linspace(q_window[0], q_window[1], n_scan)
    vals = np.array([f(q) for q in qs])
    out = []
    for i in range(1, n_scan - 1):
        if vals[i] <= vals[i - 1] and vals[i] <= vals[i + 1]:
            res = golden_minimum(f, qs[i - 1], qs[i + 1])
            if res.fun > tol:
                continue
            w = float(beam.emission_frequency(res.x + shift))
            try:
                pt = make_point(geom, l, fam, float(res.x), w, N)
            except (RootNotFoundError, SpecialFunctionError, AccuracyError) as exc:
                # roots on or near a harmonic light line are not guided modes
                log.info("skipping line root at q = %.6e: %s", res.x, exc)
                continue
            out.append(pt)
    return out


def competitor_coupling(point, beam, Omega, m_order, L_int, area, p_max=2, signs=2):
    """|g_Q|^2 of one competing mode summed over final states psi_{l, p}, p <= p_max.

    The initial state is psi_00; the OAM selection rule fixes l_f = l.
    ``signs=2`` counts the degenerate -l partner mode.
    """
    if point.vg is None:
        local_derivatives(point)
    shift = harmonic_shift(point.geometry, m_order)
    ve = beam.velocity
    kind = "Tangency" if abs(1.0 - point.vg / ve) <= TANGENCY_THRESHOLD else "Intersection"
    pm = PhaseMatchPoint(kind=kind, q0=point.q, omega0=point.omega, m_order=m_order, v_e=ve,
                         v_g=point.vg, omega2=point.omega2, recoil_q=point.q + shift)
    total = 0.0
    for p in range(p_max + 1):
        ov = mode_overlap(point, Omega, m_order, l_f=point.l, p_f=p)
        total += total_coupling(pm, ov, area, L_int)
    factor = signs if point.l != 0 else 1
    return factor * total, pm


def electron_slope(beam, pm):
    return electron_velocity_after(beam, pm.recoil_q)

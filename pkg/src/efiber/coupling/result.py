"""Coupling results: assembly from solved modes, JSON and CSV export."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from ..constants import M_E
from ..fiber_modes import mode_area
from .beta import beta_factor
from .competitors import DEFAULT_COMPETITORS, competitor_coupling, line_matches
from .kerr import kerr_and_phase
from .phase_match import harmonic_shift
from .strength import mode_overlap, total_coupling

SWEEP_COLUMNS = ("L_int_m", "gQ2", "beta", "kappa_rad_s", "delta_nl_rad")
TARGET = "TM01"
FREQUENCY_WINDOW = (0.5, 0.1)
EXPONENT = {"Intersection": 1.0, "Tangency": 1.5}


@dataclass
class CouplingResult:
    gQ2_per_family: dict
    beta: float
    overlap: dict
    kappa: float
    delta_nl: float
    L_int: float
    area: float
    phase_match: object = None
    competitors: list = field(default_factory=list)
    kerr_mass: float = M_E

    def __post_init__(self):
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError("beta must lie in [0, 1]")
        if any(v < 0 for v in self.gQ2_per_family.values()):
            raise ValueError("|g_Q|^2 must be non-negative")

    @property
    def gQ2(self):
        return self.gQ2_per_family[TARGET]

    @property
    def gQ(self):
        return math.sqrt(self.gQ2)

    def to_dict(self):
        return {
            "gQ2_per_family": dict(sorted(self.gQ2_per_family.items())),
            "gQ": self.gQ,
            "beta": self.beta,
            "overlap": {k: [v.real, v.imag] for k, v in sorted(self.overlap.items())},
            "kappa_rad_s": self.kappa,
            "delta_nl_rad": self.delta_nl,
            "L_int_m": self.L_int,
            "area_norm": self.area,
            "phase_match": None if self.phase_match is None else self.phase_match.to_dict(),
            "competitors": self.competitors,
            "kerr_mass_kg": self.kerr_mass,
        }


def competitor_set(geom, beam, pm, Omega, L_int, families=DEFAULT_COMPETITORS,
                   window=FREQUENCY_WINDOW, n_scan=201):
    """Phase-matched hybrid modes with omega in [(1 - lo) omega0, (1 + hi) omega0].

    Returns {label: |g_Q|^2} summed over final states psi_{l,p}, p <= 2,
    and a list of per-mode records.
    """
    shift = harmonic_shift(geom, pm.m_order)
    v = beam.velocity
    wmin, wmax = pm.omega0 * (1.0 - window[0]), pm.omega0 * (1.0 + window[1])
    qwin = (wmin / v - shift, wmax / v - shift)
    couplings, records = {}, []
    for l in sorted({l for _, l in families}):
        wanted = {f for f, ll in families if ll == l}
        for pt in line_matches(geom, beam, l, "HE", pm.m_order, qwin, n_scan=n_scan):
            if pt.family not in wanted or not wmin <= pt.omega <= wmax:
                continue
            area = mode_area(pt)
            g2, cpm = competitor_coupling(pt, beam, Omega, pm.m_order, L_int, area)
            label = f"{pt.family}{l}_q{pt.q:.6e}"
            couplings[label] = g2
            records.append({"label": label, "family": pt.family, "l": l, "q_per_m": pt.q,
                            "omega_rad_s": pt.omega, "vg_m_s": pt.vg, "area_norm": area,
                            "gQ2": g2, "kind": cpm.kind})
    return couplings, records


def analyze_coupling(point, pm, beam, Omega, L_int, competitors=None, area=None, p_max=2,
                     competitor_records=(), relativistic_mass=False):
    """|g_Q|^2, beta, kappa and delta_NL for a solved target mode at ``pm``.

    The target coupling is the psi_00 -> psi_00 transition; radially excited
    final states of the same mode (p <= p_max) and the supplied
    ``competitors`` map enter the beta denominator. The Kerr term uses the
    rest mass unless ``relativistic_mass`` asks for gamma m.
    """
    if area is None:
        area = mode_area(point)
    overlaps = {}
    for p in range(p_max + 1):
        overlaps[f"{TARGET}_p{p}"] = mode_overlap(point, Omega, pm.m_order, l_f=0, p_f=p)
    g2 = {TARGET: total_coupling(pm, overlaps[f"{TARGET}_p0"], area, L_int)}
    for p in range(1, p_max + 1):
        g2[f"{TARGET}_p{p}"] = total_coupling(pm, overlaps[f"{TARGET}_p{p}"], area, L_int)
    comp = dict(competitors or {})
    g_all = dict(g2, **comp)
    beta = _beta(g2, comp)
    mass = beam.gamma * M_E if relativistic_mass else M_E
    kappa, dnl = kerr_and_phase(pm.recoil_q, L_int, pm.v_e, mass)
    return CouplingResult(gQ2_per_family=g_all, beta=beta, overlap=overlaps, kappa=kappa,
                          delta_nl=dnl, L_int=L_int, area=area, phase_match=pm,
                          competitors=list(competitor_records), kerr_mass=mass)


def _beta(target_terms, comp):
    if not comp:
        return 1.0
    return beta_factor({TARGET: sum(target_terms.values()), **comp})


def write_coupling_json(path, result):
    with open(path, "w") as fh:
        json.dump(result.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def sweep_rows(result, lengths):
    """Rows of SWEEP_COLUMNS for the same modes at other interaction lengths."""
    pm = result.phase_match
    ov = result.overlap[f"{TARGET}_p0"]
    kinds = {r["label"]: r["kind"] for r in result.competitors}
    rows = []
    for L in np.asarray(lengths, dtype=float):
        g2 = total_coupling(pm, ov, result.area, L)
        # closed forms are pure power laws in L
        scale = {k: (L / result.L_int) ** EXPONENT[kinds.get(k, pm.kind)]
                 for k in result.gQ2_per_family}
        target = {k: v * scale[k] for k, v in result.gQ2_per_family.items() if k.startswith(TARGET)}
        comp = {k: v * scale[k] for k, v in result.gQ2_per_family.items() if not k.startswith(TARGET)}
        kappa, dnl = kerr_and_phase(pm.recoil_q, L, pm.v_e, result.kerr_mass)
        rows.append((float(L), float(g2), float(_beta(target, comp)), float(kappa), float(dnl)))
    return rows


def write_sweep_csv(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for r in rows:
            w.writerow([repr(float(x)) for x in r])

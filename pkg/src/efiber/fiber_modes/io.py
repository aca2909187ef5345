"""CSV and JSON export of bands and band points."""
from __future__ import annotations

import csv
import json

import numpy as np

from .geometry import FiberGeometry
from .solver import BandPoint

BAND_COLUMNS = ("q_per_m", "omega_rad_s", "vg_m_s", "omega2_m2_s", "area_norm")


def _fmt(x):
    if x is None or (isinstance(x, float) and np.isnan(x)):
        return "nan"
    return repr(float(x))


def write_band_csv(band, path, header_comment=None):
    with open(path, "w", newline="") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        w = csv.writer(fh)
        w.writerow(BAND_COLUMNS)
        for p in band.points:
            w.writerow([_fmt(p.q), _fmt(p.omega), _fmt(p.vg), _fmt(p.omega2), _fmt(p.area)])


def point_to_dict(p: BandPoint):
    return {
        "geometry": p.geometry.to_dict(),
        "family": p.family,
        "l": p.l,
        "q_per_m": p.q,
        "omega_rad_s": p.omega,
        "N": p.N,
        "coeffs_re": np.real(p.coeffs).tolist(),
        "coeffs_im": np.imag(p.coeffs).tolist(),
        "residual": p.residual,
        "vg_m_s": p.vg,
        "omega2_m2_s": p.omega2,
        "area_norm": p.area,
        "meta": p.meta,
    }


def point_from_dict(d):
    return BandPoint(geometry=FiberGeometry.from_dict(d["geometry"]), family=d["family"], l=d["l"],
                     q=d["q_per_m"], omega=d["omega_rad_s"], N=d["N"],
                     coeffs=np.array(d["coeffs_re"]) + 1j * np.array(d["coeffs_im"]),
                     residual=d["residual"], vg=d["vg_m_s"], omega2=d["omega2_m2_s"],
                     area=d["area_norm"], meta=dict(d.get("meta", {})))


def write_point_json(p, path):
    with open(path, "w") as fh:
        json.dump(point_to_dict(p), fh, indent=2, sort_keys=True)

"""CSV and JSON export of trajectories, Wigner grids and run manifests."""
from __future__ import annotations

import csv
import json

import numpy as np


def trajectory_columns(M):
    return ["t_over_T", "N_expect", "g2zero"] + [f"n_mode_{k}" for k in range(M)]


def write_trajectory_csv(path, traj):
    """One row per snapshot; g2zero is written as nan for the vacuum."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(trajectory_columns(traj.populations.shape[1]))
        for t, N, g2, pops in zip(traj.tau, traj.N, traj.g2, traj.populations):
            w.writerow([repr(float(v)) for v in (t, N, g2, *pops)])


def write_wigner_csv(path, re_axis, im_axis, W):
    """Matrix layout: header row of Re(alpha), first column Im(alpha)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["im_alpha\\re_alpha"] + [repr(float(x)) for x in re_axis])
        for y, row in zip(im_axis, W):
            w.writerow([repr(float(y))] + [repr(float(v)) for v in row])


def read_wigner_csv(path):
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    re_axis = np.array([float(x) for x in rows[0][1:]])
    im_axis = np.array([float(r[0]) for r in rows[1:]])
    W = np.array([[float(x) for x in r[1:]] for r in rows[1:]])
    return re_axis, im_axis, W


def basis_summary(basis):
    out = {"kind": basis.kind, "M": basis.M, "gQ": float(basis.gQ), "kappaT": float(basis.kappaT),
           "delta_nl": float(basis.delta_nl), "gram_error": float(basis.meta.get("gram_error", 0.0))}
    if basis.sigma is not None:
        out["sigma_prime"] = float(basis.sigma)
    if basis.m_cavity is not None:
        out["m_cavity"] = int(basis.m_cavity)
    return out


def write_manifest(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")

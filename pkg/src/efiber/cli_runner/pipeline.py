"""Scenario stages (bands, trap, coupling, dynamics, cavity) and run bookkeeping."""
from __future__ import annotations

import datetime
import hashlib
import io
import json
import logging
import math
import os
import warnings
from importlib import metadata

import numpy as np
import scipy

from ..constants import C0
from ..coupling import (NotPhaseMatchedError, analyze_coupling, competitor_set, find_phase_match,
                        sweep_rows, validate_regime)
from ..coupling.result import EXPONENT, SWEEP_COLUMNS
from ..fiber_modes import (BAND_COLUMNS, FiberGeometry, dispersion_root, local_derivatives, mode_area,
                           trace_band)
from ..pondero_guide import (ElectronBeam, LEAKY_COLUMNS, geometric_bound, gvm_length, leaky_table,
                             loss_length, solve_trap)
from ..quantum_dynamics import (WignerAccuracyWarning, basis_summary, build_cavity,
                                build_supermodes, evolve, evolve_auto, reduce_and_wigner,
                                trajectory_columns)
from ..quantum_dynamics.observables import classify_ratio
from .config import canonical, config_hash

log = logging.getLogger(__name__)

STAGES = ("bands", "trap", "coupling", "dynamics", "cavity")
_CACHE = {}


class StageError(RuntimeError):
    """A pipeline stage failed; ``stage`` names it and ``cause`` is the original error."""

    def __init__(self, stage, cause):
        super().__init__(f"stage {stage!r} failed: {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause


def _fmt(x):
    if x is None:
        return "nan"
    return repr(float(x))


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        return float(x) if math.isfinite(x) else str(float(x))
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x


class RunContext:
    """Output directory bookkeeping: every data file carries the config hash."""

    def __init__(self, out_dir, cfg, defaults=()):
        self.out = out_dir
        os.makedirs(out_dir, exist_ok=True)
        self.cfg = cfg
        self.hash = config_hash(cfg)
        self.defaults = list(defaults)
        self.files = {}
        self.stages = []
        self.warnings = []
        self.results = {}
        self.current = None
        self.started = datetime.datetime.now(datetime.timezone.utc).isoformat()

    def enter(self, stage):
        self.current = stage
        if stage not in self.stages:
            self.stages.append(stage)

    def path(self, name):
        return os.path.join(self.out, name)

    def _record(self, name, data):
        with open(self.path(name), "wb") as fh:
            fh.write(data)
        self.files[name] = hashlib.sha256(data).hexdigest()

    def write_csv(self, name, header, rows):
        buf = io.StringIO()
        buf.write(f"# config_sha256={self.hash}\n")
        buf.write(",".join(header) + "\n")
        for r in rows:
            buf.write(",".join(v if isinstance(v, str) else _fmt(v) for v in r) + "\n")
        self._record(name, buf.getvalue().encode())

    def write_json(self, name, payload):
        payload = dict(_jsonable(payload), config_sha256=self.hash)
        self._record(name, (json.dumps(payload, indent=2, sort_keys=True) + "\n").encode())

    def manifest(self, status="ok", error=None):
        try:
            version = metadata.version("artifact")
        except metadata.PackageNotFoundError:
            version = "unknown"
        payload = {
            "name": self.cfg.get("name", "scenario"),
            "config_sha256": self.hash,
            "config": self.cfg,
            "defaults_applied": self.defaults,
            "stages": self.stages,
            "files": dict(sorted(self.files.items())),
            "status": status,
            "error": error,
            "warnings": self.warnings,
            "versions": {"artifact": version, "numpy": np.__version__, "scipy": scipy.__version__},
            "started_utc": self.started,
            "finished_utc": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        }
        with open(self.path("manifest.json"), "w") as fh:
            json.dump(_jsonable(payload), fh, indent=2, sort_keys=True)
            fh.write("\n")


# --- model construction -----------------------------------------------------

def geometry_from(cfg):
    g = cfg["geometry"]
    return FiberGeometry(g["kind"], g["a_m"], g["b_m"], g["n1"], g.get("n2"), g.get("period_m"),
                         g.get("duty"), g.get("p_smooth", 10))


def beam_from(cfg):
    e = cfg["electron"]
    if "beta" in e:
        return ElectronBeam.from_beta(e["beta"], e.get("delta_E_eV", 0.0))
    return ElectronBeam(e["energy_eV"], e.get("delta_E_eV", 0.0))


def _need(cfg, *blocks):
    missing = [b for b in blocks if b not in cfg]
    if missing:
        raise KeyError(f"config lacks required block(s): {', '.join(missing)}")


def _key(cfg, *blocks):
    return canonical({b: cfg.get(b) for b in blocks})


def _cached(key, fn):
    if key not in _CACHE:
        _CACHE[key] = fn()
    return _CACHE[key]


def clear_cache():
    _CACHE.clear()


def _solve_band(cfg):
    geom = geometry_from(cfg)
    b = cfg["bands"]
    qs = np.linspace(b["q_min_per_m"], b["q_max_per_m"], b["n_q"])
    w = lambda lam: 2.0 * math.pi * C0 / lam
    window = (w(b["wavelength_max_m"]), w(b["wavelength_min_m"]))
    band = trace_band(geom, b["l"], b["family"], qs, w(b["seed_wavelength_m"]), window,
                      select=b["select"])
    out = {"geometry": geom, "band": band}
    if "electron" in cfg:
        beam = beam_from(cfg)
        pm = find_phase_match(band, beam, b["m_order"])
        # the resonance comes from a spline; re-solve so the fields sit on an exact root
        w0 = pm.omega0
        point = dispersion_root(geom, b["l"], b["family"], (pm.q0, w0),
                                (w0 * (1 - 1e-4), w0 * (1 + 1e-4)), n_scan=9)
        out.update(beam=beam, pm=pm, point=point, area=mode_area(point))
    return out


def _solve_pump(cfg):
    geom = geometry_from(cfg)
    p = cfg["pump"]
    omega = 2.0 * math.pi * C0 / p["wavelength_m"]
    k0 = omega / C0
    nmax = max(geom.n1, geom.n2 or 1.0)
    lo = p.get("q_min_per_m", k0 * (1.0 + 1e-6))
    hi = p.get("q_max_per_m", k0 * nmax * (1.0 - 1e-6))
    return dispersion_root(geom, 0, "TE", (0.5 * (lo + hi), omega), (lo, hi), axis="q",
                           select="highest")


def _pump_mode(cfg):
    return _cached(_key(cfg, "geometry", "pump") + "te", lambda: _solve_pump(cfg))


def _pump_group_velocity(cfg):
    return _cached(_key(cfg, "geometry", "pump") + "vg", lambda: local_derivatives(_pump_mode(cfg))[0])


def _solve_trap(cfg):
    te = _pump_mode(cfg)
    p = cfg["pump"]
    return te, solve_trap(te, p["P0_W"], beam_from(cfg), tau=p.get("tau_s"),
                          n_radial=p["n_radial"], convention=p["convention"])


def _competitors_at(cfg, photon, trap, L):
    """Competitor couplings at length L, scanned once and rescaled by the closed-form power laws."""
    run = cfg["run"]
    key = _key(cfg, "geometry", "electron", "bands", "pump") + f"comp{run['competitor_scan']}"
    ref_L = 1.0
    comp, rec = _cached(key, lambda: competitor_set(photon["geometry"], photon["beam"], photon["pm"],
                                                    trap.Omega, ref_L,
                                                    n_scan=run["competitor_scan"]))
    scale = {r["label"]: (L / ref_L) ** EXPONENT[r["kind"]] for r in rec}
    comp = {k: v * scale[k] for k, v in comp.items()}
    rec = [dict(r, gQ2=r["gQ2"] * scale[r["label"]]) for r in rec]
    return comp, rec


# --- stages -----------------------------------------------------------------

def stage_bands(cfg, ctx):
    ctx.enter("bands")
    _need(cfg, "geometry", "bands")
    res = _cached(_key(cfg, "geometry", "electron", "bands"), lambda: _solve_band(cfg))
    band = res["band"]
    ctx.write_csv("bands.csv", BAND_COLUMNS,
                  [(p.q, p.omega, p.vg, p.omega2, p.area) for p in band.points])
    summary = {"band_complete": band.complete, "diagnostic": band.diagnostic, "n_points": len(band.points)}
    if "pm" in res:
        pm = res["pm"]
        summary.update(phase_match=pm.to_dict(), area_norm=res["area"],
                       geometric_bound_m=geometric_bound(res["beam"], pm.wavelength))
    ctx.write_json("bands.json", summary)
    return res


def stage_trap(cfg, ctx):
    ctx.enter("trap")
    _need(cfg, "geometry", "pump", "electron")
    te, trap = _cached(_key(cfg, "geometry", "pump", "electron"), lambda: _solve_trap(cfg))
    run = cfg["run"]
    beam = beam_from(cfg)
    payload = dict(trap.to_dict(), te_q_per_m=te.q, te_omega_rad_s=te.omega,
                   te_vg_m_s=_pump_group_velocity(cfg),
                   geometric_bound_m=geometric_bound(beam, cfg["pump"]["wavelength_m"]))
    ctx.write_json("trap.json", payload)
    abars = np.linspace(run["abar_min"], run["abar_max"], run["abar_points"])
    rows = leaky_table(abars, range(cfg["pump"]["n_radial"]))
    ctx.write_csv("leaky.csv", LEAKY_COLUMNS, [(a, str(p), m) for a, p, m in rows])
    return trap


def interaction_length(cfg, photon, trap):
    """Explicit L_int or min(mean free path, walk-off length, loss length) for ``"auto"``.

    The walk-off is between the electron and the TE pump pulse that traps it.
    """
    run = cfg["run"]
    tau = cfg["pump"].get("tau_s")
    limits = {
        "mfp_m": trap.mfp[0],
        "gvm_m": gvm_length(photon["beam"].velocity, _pump_group_velocity(cfg), tau) if tau else math.inf,
        "loss_m": loss_length(run["loss_dB_per_m"]) if "loss_dB_per_m" in run else math.inf,
    }
    if run["L_int_m"] != "auto":
        return float(run["L_int_m"]), "explicit", limits
    rule = min(limits, key=limits.get)
    L = limits[rule]
    if not math.isfinite(L):
        raise ValueError("automatic L_int is unbounded; give run.L_int_m or run.loss_dB_per_m")
    return L, f"auto:{rule}", limits


def stage_coupling(cfg, ctx):
    ctx.enter("coupling")
    _need(cfg, "geometry", "bands", "electron", "pump")
    photon = stage_bands(cfg, ctx)
    trap = stage_trap(cfg, ctx)
    L, rule, limits = interaction_length(cfg, photon, trap)
    run = cfg["run"]
    comp, rec = _competitors_at(cfg, photon, trap, L) if run["competitors"] else ({}, [])
    result = analyze_coupling(photon["point"], photon["pm"], photon["beam"], trap.Omega, L, comp,
                              area=photon["area"], competitor_records=rec,
                              relativistic_mass=run["relativistic_kerr_mass"])
    regime = validate_regime(photon["beam"], photon["pm"], L)
    ctx.write_json("coupling.json", dict(result.to_dict(), L_int_rule=rule, length_limits=limits,
                                         regime=regime.to_dict()))
    lengths = np.geomspace(run["L_sweep_min_m"], run["L_sweep_max_m"], run["L_sweep_points"])
    ctx.write_csv("coupling_vs_length.csv", SWEEP_COLUMNS, sweep_rows(result, lengths))
    return result


def _wigner_grid(dyn):
    ext, n = dyn["wigner_extent"], dyn["wigner_points"]
    return np.linspace(-ext, ext, n)


def stage_dynamics(cfg, ctx):
    ctx.enter("dynamics")
    dyn = cfg["dynamics"]
    if "gQ" in dyn and "kappaT" in dyn:
        gQ, kappaT, kind = dyn["gQ"], dyn["kappaT"], dyn["kind"]
        if kind == "auto":
            raise ValueError("dynamics.kind must be given when the photonics stages are bypassed")
        source = "config"
    else:
        result = stage_coupling(cfg, ctx)
        gQ = dyn.get("gQ", result.gQ)
        kappaT = dyn.get("kappaT", 0.5 * result.delta_nl)
        kind = dyn["kind"]
        if kind == "auto":
            kind = "Continuum" + result.phase_match.kind
        source = "coupling"
    basis = build_supermodes(kind, M=dyn["M"], gQ=gQ, kappaT=kappaT)
    n = dyn["n_snapshots"]
    if dyn["N_max"] == "auto":
        traj = evolve_auto(basis, n_snapshots=n, tol=dyn["tolerance"])
    else:
        traj = evolve(basis, dyn["N_max"], n_snapshots=n, tol=dyn["tolerance"])
    ctx.write_csv("trajectory.csv", trajectory_columns(basis.M),
                  [(t, N, g2, *p) for t, N, g2, p in zip(traj.tau, traj.N, traj.g2, traj.populations)])
    axis = _wigner_grid(dyn)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", WignerAccuracyWarning)
        rho, W = reduce_and_wigner(traj.space, traj.final, 0, axis, axis)
    ctx.warnings += [str(w.message) for w in caught]
    ctx.write_csv("wigner.csv", ["im_alpha\\re_alpha"] + [_fmt(x) for x in axis],
                  [(y, *row) for y, row in zip(axis, W)])
    W0 = float(reduce_and_wigner(traj.space, traj.final, 0, [0.0], [0.0])[1][0, 0])
    summary = {
        "source": source, "basis": basis_summary(basis), "N_max": traj.meta["N_max"],
        "N_final": traj.N[-1], "g2_final": traj.g2[-1], "populations_final": traj.populations[-1].tolist(),
        "W0": W0, "leakage": traj.leakage, "norm_drift": traj.norm_drift, "steps": traj.steps,
        "rho0_diag": np.real(np.diag(rho)).tolist(),
    }
    ctx.write_json("dynamics.json", summary)
    return summary


def stage_cavity(cfg, ctx):
    ctx.enter("cavity")
    cav = cfg["cavity"]
    m = cav["m"]
    # 2 kappa = ratio * Delta with Delta T = 2 pi |m|
    kappaT = cav["ratio"] * math.pi * abs(m)
    basis = build_cavity(m, cav["n_modes"], cav["gQ"], kappaT)
    n = cav["n_snapshots"]
    if cav["N_max"] == "auto":
        traj = evolve_auto(basis, n_snapshots=n)
    else:
        traj = evolve(basis, cav["N_max"], n_snapshots=n)
    modes = basis.meta["mode_index"]
    order = np.argsort(modes, kind="stable")
    cols = ["t_over_T", "N_expect", "g2zero"] + [f"n_mode_{int(j)}" for j in modes[order]]
    ctx.write_csv("cavity_trajectory.csv", cols,
                  [(t, N, g2, *p[order]) for t, N, g2, p in zip(traj.tau, traj.N, traj.g2, traj.populations)])
    peaks = traj.populations.max(axis=0)
    ranked = np.argsort(-peaks, kind="stable")
    summary = {
        "m": m, "ratio": cav["ratio"], "classification": classify_ratio(cav["ratio"]),
        "kappaT": kappaT, "gQ": cav["gQ"], "N_max": traj.meta["N_max"],
        "mode_index": [int(j) for j in modes[order]], "peak_population": peaks[order].tolist(),
        "N_final": traj.N[-1], "N_peak": float(traj.N.max()),
        "primary_mode": int(modes[ranked[0]]), "primary_peak": float(peaks[ranked[0]]),
        "secondary_peak": float(peaks[ranked[1]]) if len(ranked) > 1 else 0.0,
        "leakage": traj.leakage, "norm_drift": traj.norm_drift,
    }
    ctx.write_json("cavity.json", summary)
    return summary


def stage_validate(cfg, ctx):
    """Config already validated; build the models and check the electron regime if possible."""
    ctx.enter("validate")
    report = {"config_valid": True}
    if "geometry" in cfg:
        geometry_from(cfg)
    if "electron" in cfg:
        beam = beam_from(cfg)
        report["electron"] = {"energy_eV": beam.energy_eV, "beta": beam.beta, "gamma": beam.gamma}
    if "bands" in cfg and "electron" in cfg and "geometry" in cfg:
        photon = stage_bands(cfg, ctx)
        L = cfg["run"]["L_int_m"]
        if L == "auto":
            if "pump" in cfg:
                L = interaction_length(cfg, photon, stage_trap(cfg, ctx))[0]
            else:
                L = None
        if L is not None:
            reg = validate_regime(photon["beam"], photon["pm"], L)
            report["regime"] = dict(reg.to_dict(), L_int_m=L)
    ctx.write_json("validate.json", report)
    return report


RUNNERS = {"bands": stage_bands, "trap": stage_trap, "coupling": stage_coupling,
           "dynamics": stage_dynamics, "cavity": stage_cavity, "validate": stage_validate}


def summarize(stage, out):
    """Flat numeric summary of a stage result for sweep tables."""
    if stage == "trap":
        return {"hbar_Omega_eV": out.hbar_Omega_eV, "delta_r_m": out.delta_r, "abar": out.abar,
                "mfp0_m": out.mfp[0]}
    if stage == "coupling":
        return {"L_int_m": out.L_int, "gQ": out.gQ, "gQ2": out.gQ2, "beta": out.beta,
                "kappa_rad_s": out.kappa, "delta_nl_rad": out.delta_nl}
    if stage == "dynamics":
        return {"N_final": out["N_final"], "g2_final": out["g2_final"], "W0": out["W0"],
                "N_max": out["N_max"]}
    if stage == "cavity":
        return {"N_final": out["N_final"], "N_peak": out["N_peak"],
                "primary_peak": out["primary_peak"], "secondary_peak": out["secondary_peak"]}
    return {}


SUMMARY_COLUMNS = {
    "trap": ("hbar_Omega_eV", "delta_r_m", "abar", "mfp0_m"),
    "coupling": ("L_int_m", "gQ", "gQ2", "beta", "kappa_rad_s", "delta_nl_rad"),
    "dynamics": ("N_final", "g2_final", "W0", "N_max"),
    "cavity": ("N_final", "N_peak", "primary_peak", "secondary_peak"),
}


def run_scenario(cfg, out_dir, stage="coupling", defaults=()):
    """Run one stage (with its prerequisites) and write data files plus a manifest.

    Errors are re-raised as :class:`StageError` after the manifest records
    the failure; files written before the failure are kept.
    """
    if stage not in RUNNERS:
        raise ValueError(f"unknown stage {stage!r}")
    ctx = RunContext(out_dir, cfg, defaults)
    try:
        out = RUNNERS[stage](cfg, ctx)
    except Exception as exc:
        err = StageError(ctx.current or stage, exc)
        ctx.manifest("error", str(err))
        raise err from exc
    ctx.results[stage] = out
    ctx.manifest()
    return ctx, out

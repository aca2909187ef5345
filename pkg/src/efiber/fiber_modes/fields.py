"""Field reconstruction, power flow and mode area for solved guided modes.

All radial coordinates here are scaled (rho_bar = k0 rho). Fields are
returned as Fourier harmonics of the Bloch function, so a component at
(rho, z) is sum_m F_m(rho) exp(2 pi i m z / period) times exp(iqz).
"""
from __future__ import annotations

import numpy as np

from ..constants import Z0
from .geometry import smooth_permittivity
from .solver import _columns

COMPONENTS = ("Erho", "Ephi", "Ez", "Hrho", "Hphi", "Hz")


class AccuracyError(RuntimeError):
    pass


def fourier_fields(s, coeffs, rho, region):
    """Harmonics of all field components on ``rho`` (all in one region).

    Returns a dict component -> (K, len(rho)) complex array.
    """
    rho = np.atleast_1d(np.asarray(rho, dtype=float))
    K = 2 * s.N + 1
    out = {c: np.zeros((K, rho.size), dtype=complex) for c in COMPONENTS}
    for col, f in _columns(s, region, rho):
        w = coeffs[col]
        if w == 0:
            continue
        for c in COMPONENTS:
            out[c] += w * f[c]
    return out


def _gl_panels(edges, nodes=16):
    x, w = np.polynomial.legendre.leggauss(nodes)
    xs, ws = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        xs.append(0.5 * (hi - lo) * x + 0.5 * (hi + lo))
        ws.append(0.5 * (hi - lo) * w)
    return np.concatenate(xs), np.concatenate(ws)


def _graded_edges(lo, hi, grade_lo, grade_hi, levels=12, uniform=8):
    """Panel edges on [lo, hi], geometrically refined toward graded ends."""
    width = hi - lo
    base = np.linspace(0.0, 1.0, uniform + 1)
    pts = set(base.tolist())
    fr = 0.5 ** np.arange(1, levels + 1) / uniform
    if grade_lo:
        pts.update(fr.tolist())
    if grade_hi:
        pts.update((1.0 - fr).tolist())
    e = np.array(sorted(pts))
    return lo + width * e


def outer_extent(s, decades=30.0):
    """Scaled radius beyond which |E|^2 has decayed by e^(-2*decades)."""
    im = np.min(s.zeta.imag)
    if im <= 0:
        raise AccuracyError("mode is not guided: an outer harmonic does not decay")
    return s.bbar + decades / im


def quadrature_grid(s, nodes=16, levels=12):
    """Gauss-Legendre radial rules per region: dict region -> (rho, weights)."""
    rmax = outer_extent(s)
    return {
        "core": _gl_panels(_graded_edges(0.0, s.abar, False, True, levels), nodes),
        "shell": _gl_panels(_graded_edges(s.abar, s.bbar, True, True, levels), nodes),
        "outer": _gl_panels(_graded_edges(s.bbar, rmax, True, False, levels, 16), nodes),
    }


def _shell_eps_z(s, nz):
    z = np.arange(nz) * (s.geom.period / nz if s.geom.is_bragg else 1.0)
    if s.geom.is_bragg:
        return z, smooth_permittivity(s.geom, z)
    return z[:1], np.full(1, s.geom.n1 ** 2)


def _harmonic_phase(s, z):
    m = np.arange(-s.N, s.N + 1)
    if not s.geom.is_bragg:
        return np.ones((1, 1), dtype=complex)
    return np.exp(2j * np.pi * np.outer(z, m) / s.geom.period)


def real_space(s, harm, z):
    """Bloch-periodic field on (z, rho) from harmonics (K, nrho)."""
    return _harmonic_phase(s, z) @ harm


def energy_density_grid(s, coeffs, n_rad=512, nz=256):
    """eps |E|^2 on a (z, rho) grid covering [0, 2b] with both interface sides.

    Returns (z, rho, density) with density shape (nz, nrho).
    """
    rmax = max(2.0 * s.bbar, s.bbar * 1.05)
    per = n_rad / rmax
    core = np.linspace(0.0, s.abar, max(int(per * s.abar), 8) + 1)
    shell = np.linspace(s.abar, s.bbar, max(int(per * (s.bbar - s.abar)), 8) + 1)
    outer = np.linspace(s.bbar, rmax, max(int(per * (rmax - s.bbar)), 8) + 1)
    z, eps_z = _shell_eps_z(s, nz)
    blocks, rhos = [], []
    for region, r in (("core", core), ("shell", shell), ("outer", outer)):
        f = fourier_fields(s, coeffs, r, region)
        e2 = sum(np.abs(real_space(s, f[c], z)) ** 2 for c in ("Erho", "Ephi", "Ez"))
        eps = eps_z[:, None] if region == "shell" else 1.0
        blocks.append(eps * e2)
        rhos.append(r)
    return z, np.concatenate(rhos), np.concatenate(blocks, axis=1)


def _integrated_energy(s, coeffs, grid):
    """Cell-resolved integral 2 pi int eps |E|^2 rho drho, shape (nz,)."""
    z, eps_z = _shell_eps_z(s, 256)
    total = np.zeros(z.size)
    for region, (r, w) in grid.items():
        f = fourier_fields(s, coeffs, r, region)
        e2 = sum(np.abs(real_space(s, f[c], z)) ** 2 for c in ("Erho", "Ephi", "Ez"))
        eps = eps_z[:, None] if region == "shell" else 1.0
        total += 2.0 * np.pi * (eps * e2) @ (w * r)
    return z, total


def _area_once(s, coeffs, n_rad, nz, convention):
    grid = quadrature_grid(s)
    z, energy = _integrated_energy(s, coeffs, grid)
    zz, _, dens = energy_density_grid(s, coeffs, n_rad, nz)
    lam2 = (2.0 * np.pi) ** 2
    if convention == "cell_max" or not s.geom.is_bragg:
        return float(np.mean(energy) / dens.max() / lam2)
    # A(z) with the local transverse maximum, averaged over the cell
    if zz.size != z.size:
        raise AccuracyError("longitudinal grids differ")
    return float(np.mean(energy / dens.max(axis=1)) / lam2)


def mode_area(point, n_rad=512, nz=256, convention="cell_max", check=True):
    """Normalized mode area A / lambda^2 of a solved mode.

    ``convention="cell_max"`` divides the cell-averaged energy by the
    maximum of eps |E|^2 over the whole cell (the normalization used for
    the coupling prefactor); ``"local"`` averages A(z) computed with the
    transverse maximum at each z. With ``check`` the calculation is
    repeated on a doubled grid and must agree to 0.5 %.
    """
    s = point.setup()
    a1 = _area_once(s, point.coeffs, n_rad, nz, convention)
    if check:
        a2 = _area_once(s, point.coeffs, 2 * n_rad, nz, convention)
        if abs(a2 - a1) > 5e-3 * abs(a2):
            raise AccuracyError(f"mode area not converged: {a1:.5g} vs {a2:.5g}")
        point.meta["area_converged"] = True
        return a2
    return a1


def poynting_power(s, coeffs):
    """Cell-averaged longitudinal power (W) of the unscaled coefficients.

    Coefficients are read with E in V/m; the transverse integral is
    converted back from scaled to physical radius.
    """
    grid = quadrature_grid(s)
    total = 0.0
    for region, (r, w) in grid.items():
        f = fourier_fields(s, coeffs, r, region)
        sz = np.real(np.sum(f["Erho"] * f["Hphi"].conj() - f["Ephi"] * f["Hrho"].conj(), axis=0))
        total += 2.0 * np.pi * np.dot(sz, w * r)
    return total / (2.0 * Z0) / s.k0 ** 2


def longitudinal_energies(s, coeffs):
    """Transverse integrals of |E_z|^2 and |H~_z|^2 (harmonic sums)."""
    grid = quadrature_grid(s, nodes=12, levels=8)
    ez = hz = 0.0
    for region, (r, w) in grid.items():
        f = fourier_fields(s, coeffs, r, region)
        ez += np.dot(np.sum(np.abs(f["Ez"]) ** 2, axis=0), w * r)
        hz += np.dot(np.sum(np.abs(f["Hz"]) ** 2, axis=0), w * r)
    return ez, hz


def continuity_residual(s, coeffs):
    """Relative jump of E_z, H_phi, H_z, E_phi across both interfaces."""
    worst = 0.0
    for rho, inner, outer in ((s.abar, "core", "shell"), (s.bbar, "shell", "outer")):
        fi = fourier_fields(s, coeffs, [rho], inner)
        fo = fourier_fields(s, coeffs, [rho], outer)
        scale = max(max(np.abs(fi[c]).max(), np.abs(fo[c]).max()) for c in ("Ez", "Hphi", "Hz", "Ephi"))
        for c in ("Ez", "Hphi", "Hz", "Ephi"):
            worst = max(worst, np.abs(fi[c] - fo[c]).max() / scale)
    return float(worst)


def normalization_scale(s, coeffs, n_rad=512, nz=256):
    """Factor making max over the cell of eps |E|^2 equal to one."""
    _, _, dens = energy_density_grid(s, coeffs, n_rad, nz)
    return 1.0 / np.sqrt(dens.max())


def fourier_uz(point, rho, normalized=True):
    """Radial profiles u_{m,z}(rho) of E_z per Fourier order (rho in metres).

    Returns (orders, array of shape (K, len(rho))). With ``normalized`` the
    mode is scaled so that max over the cell of eps |E|^2 is one.
    """
    s = point.setup()
    rb = np.atleast_1d(np.asarray(rho, dtype=float)) * s.k0
    out = np.zeros((2 * s.N + 1, rb.size), dtype=complex)
    for region, mask in (("core", rb < s.abar), ("shell", (rb >= s.abar) & (rb <= s.bbar)),
                         ("outer", rb > s.bbar)):
        if mask.any():
            out[:, mask] = fourier_fields(s, point.coeffs, rb[mask], region)["Ez"]
    if normalized:
        out *= normalization_scale(s, point.coeffs)
        # global phase: largest on-axis-nearest component real positive
        k = np.unravel_index(np.argmax(np.abs(out)), out.shape)
        out *= np.abs(out[k]) / out[k]
    return np.arange(-s.N, s.N + 1), out


def sample_fields(point, rho, z):
    """Real-space E and H~ (=Z0 H) of the Bloch function on a (z, rho) grid.

    ``rho`` and ``z`` in metres; fields scaled so max eps |E|^2 = 1.
    Returns dict component -> (len(z), len(rho)) complex array.
    """
    s = point.setup()
    rb = np.atleast_1d(np.asarray(rho, dtype=float)) * s.k0
    z = np.atleast_1d(np.asarray(z, dtype=float))
    scale = normalization_scale(s, point.coeffs)
    out = {c: np.zeros((z.size, rb.size), dtype=complex) for c in COMPONENTS}
    for region, mask in (("core", rb < s.abar), ("shell", (rb >= s.abar) & (rb <= s.bbar)),
                         ("outer", rb > s.bbar)):
        if mask.any():
            f = fourier_fields(s, point.coeffs, rb[mask], region)
            for c in COMPONENTS:
                out[c][:, mask] = scale * (_harmonic_phase(s, z) @ f[c] if s.geom.is_bragg
                                           else np.broadcast_to(f[c], (z.size, f[c].shape[1])))
    return out

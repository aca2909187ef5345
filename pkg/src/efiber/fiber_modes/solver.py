"""Boundary-matrix assembly and dispersion-root search for hollow-core fibers.

Fields in every region are sums of separable TE_z and TM_z potentials,
f (H_z-type) and g (E_z-type). With lengths scaled by k0 and H~ = Z0 H, a
term R(rho) Z(z) exp(il phi) contributes (beta = harmonic wavenumbers,
P = Toeplitz(1/eps), kappa = transverse wavenumber of the term):

    TM:  E_z = kappa^2 R P c      E_phi = -(l/rho) R P (beta c)   H_phi = i R' c
         E_rho = R' P (i beta c)  H_rho = (l/rho) R c
    TE:  H_z = kappa^2 R c        H_phi = -(l/rho) R (beta c)     E_phi = -i R' c
         H_rho = R' (i beta c)    E_rho = -(l/rho) R c

Columns of the boundary matrix are ordered A, B, C, D (TM: core, shell H1,
shell H2, outside) then E, F, G, H (TE), each block holding 2N+1 entries.
Rows are E_z and H_phi at a and b followed by H_z and E_phi at a and b, so
for l = 0 the matrix is block diagonal with the TM block first.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from ..constants import C0
from ..specfun import cylinder_ratio
from .bloch import BlochModes, bloch_eigen
from .geometry import FiberGeometry

log = logging.getLogger(__name__)

FAMILIES = ("TE", "TM", "HE", "EH")
COND_LIMIT = 1e14
DEFAULT_N_BRAGG = 7
CONTINUITY_LIMIT = 1e-6


class RootNotFoundError(RuntimeError):
    pass


class ConditioningWarning(UserWarning):
    pass


def default_cutoff(geom: FiberGeometry):
    return DEFAULT_N_BRAGG if geom.is_bragg else 0


def _ksqrt(x):
    """Transverse wavenumber with Im >= 0 (decaying H1, regular J)."""
    k = np.sqrt(np.asarray(x, dtype=complex))
    return np.where(k.imag < 0, -k, k)


@dataclass
class _Setup:
    geom: FiberGeometry
    q: float
    omega: float
    l: int
    N: int
    k0: float
    abar: float
    bbar: float
    bloch: BlochModes
    zeta: np.ndarray      # vacuum transverse wavenumbers per harmonic
    eta: np.ndarray       # TE shell transverse wavenumbers per Bloch mode
    gamma: np.ndarray     # TM shell transverse wavenumbers per Bloch mode


def _setup(geom, q, omega, l, N, n_samples=1024):
    if omega <= 0:
        raise ValueError("omega must be positive")
    if geom.is_bragg and N is None:
        N = DEFAULT_N_BRAGG
    if not geom.is_bragg:
        N = 0
    bl = bloch_eigen(geom, q, omega, N, n_samples=n_samples)
    k0 = omega / C0
    return _Setup(geom=geom, q=q, omega=omega, l=int(l), N=N, k0=k0,
                  abar=k0 * geom.a, bbar=k0 * geom.b, bloch=bl,
                  zeta=_ksqrt(1.0 - bl.beta ** 2),
                  eta=_ksqrt(bl.eta2), gamma=_ksqrt(bl.gamma2))


def _term(pol, kappa, c, s: _Setup, rho, R, dR, shell):
    """Harmonic components of all six field components of one term.

    ``c`` is the (K,) coefficient vector of the term; R, dR are arrays over
    rho. Returns dict of (K, nrho) arrays.
    """
    beta = s.bloch.beta
    l = s.l
    rho = np.asarray(rho, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        lr = np.where(rho > 0, l * R / np.where(rho > 0, rho, 1.0), l * dR if l == 1 else 0.0)
    out = {}
    if pol == "TM":
        Pc = s.bloch.inv_eps @ c if shell else c
        Pbc = s.bloch.inv_eps @ (beta * c) if shell else beta * c
        out["Ez"] = kappa ** 2 * Pc[:, None] * R[None, :]
        out["Ephi"] = -Pbc[:, None] * lr[None, :]
        out["Erho"] = 1j * Pbc[:, None] * dR[None, :]
        out["Hz"] = np.zeros_like(out["Ez"])
        out["Hphi"] = 1j * c[:, None] * dR[None, :]
        out["Hrho"] = c[:, None] * lr[None, :]
    else:
        out["Hz"] = kappa ** 2 * c[:, None] * R[None, :]
        out["Ephi"] = -1j * c[:, None] * dR[None, :]
        out["Erho"] = -c[:, None] * lr[None, :]
        out["Ez"] = np.zeros_like(out["Hz"])
        out["Hphi"] = -(beta * c)[:, None] * lr[None, :]
        out["Hrho"] = 1j * (beta * c)[:, None] * dR[None, :]
    return out


def _columns(s: _Setup, region, rho):
    """Yield (column index, field dict) for every unknown living in ``region``."""
    K = 2 * s.N + 1
    eye = np.eye(K)
    rho = np.atleast_1d(np.asarray(rho, dtype=float))
    for pol, off in (("TM", 0), ("TE", 4 * K)):
        if region == "core":
            for m in range(K):
                R, dR = cylinder_ratio("J", s.l, s.zeta[m], rho, s.abar)
                yield off + m, _term(pol, s.zeta[m], eye[m], s, rho, R, dR, False)
        elif region == "shell":
            kap = s.gamma if pol == "TM" else s.eta
            vecs = s.bloch.tm_vecs if pol == "TM" else s.bloch.te_vecs
            for j in range(K):
                R, dR = cylinder_ratio("H1", s.l, kap[j], rho, s.abar)
                yield off + K + j, _term(pol, kap[j], vecs[:, j], s, rho, R, dR, True)
                R, dR = cylinder_ratio("H2", s.l, kap[j], rho, s.bbar)
                yield off + 2 * K + j, _term(pol, kap[j], vecs[:, j], s, rho, R, dR, True)
        elif region == "outer":
            for m in range(K):
                R, dR = cylinder_ratio("H1", s.l, s.zeta[m], rho, s.bbar)
                yield off + 3 * K + m, _term(pol, s.zeta[m], eye[m], s, rho, R, dR, False)
        else:
            raise ValueError(region)


_ROW_FIELDS = (("Ez", 0), ("Hphi", 1), ("Hz", 4), ("Ephi", 5))


def _assemble(s: _Setup):
    K = 2 * s.N + 1
    M = np.zeros((8 * K, 8 * K), dtype=complex)
    for iface, (rho, inner, outer) in enumerate(((s.abar, "core", "shell"),
                                                 (s.bbar, "shell", "outer"))):
        for region, sign in ((inner, 1.0), (outer, -1.0)):
            for col, fields in _columns(s, region, [rho]):
                for name, blk in _ROW_FIELDS:
                    rows = slice((blk + 2 * iface) * K, (blk + 2 * iface + 1) * K)
                    M[rows, col] += sign * fields[name][:, 0]
    return M


def boundary_matrix(geom: FiberGeometry, q, omega, l=0, N=None, n_samples=1024):
    """Continuity matrix M(q, omega) of size 8(2N+1); guided modes satisfy M c = 0.

    Emits :class:`ConditioningWarning` when cond(M) exceeds 1e14 after
    row/column equilibration.
    """
    s = _setup(geom, q, omega, l, N, n_samples)
    M = _assemble(s)
    Mb, _, _ = balance(M)
    cond = np.linalg.cond(Mb)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        warnings.warn(f"boundary matrix ill-conditioned (cond={cond:.2e})", ConditioningWarning)
    return M


def balance(M):
    """Row then column norm equilibration: returns (Dr M Dc, dr, dc)."""
    dr = 1.0 / np.maximum(np.linalg.norm(M, axis=1), 1e-300)
    Mr = M * dr[:, None]
    dc = 1.0 / np.maximum(np.linalg.norm(Mr, axis=0), 1e-300)
    return Mr * dc[None, :], dr, dc


def family_block(family, l, K):
    """Row/column index set of the sub-problem for a family (None = full matrix)."""
    if l == 0 and family in ("TM", "TE"):
        sl = np.arange(0, 4 * K) if family == "TM" else np.arange(4 * K, 8 * K)
        return sl
    return None


def _reduced(s, family):
    M = _assemble(s)
    K = 2 * s.N + 1
    idx = family_block(family, s.l, K)
    if idx is not None:
        M = M[np.ix_(idx, idx)]
    return M, idx


def singular_surrogate(geom, q, omega, l, family, N=None, n_samples=1024):
    """Smallest singular value of the balanced (family-reduced) boundary matrix."""
    s = _setup(geom, q, omega, l, N, n_samples)
    M, _ = _reduced(s, family)
    Mb, _, _ = balance(M)
    return np.linalg.svd(Mb, compute_uv=False)[-1]


@dataclass
class BandPoint:
    """A solved guided mode."""

    geometry: FiberGeometry
    family: str
    l: int
    q: float
    omega: float
    N: int
    coeffs: np.ndarray
    residual: float
    vg: float | None = None
    omega2: float | None = None
    area: float | None = None
    meta: dict = field(default_factory=dict)

    @property
    def wavelength(self):
        return 2.0 * np.pi * C0 / self.omega

    @property
    def k0(self):
        return self.omega / C0

    def setup(self, n_samples=1024):
        return _setup(self.geometry, self.q, self.omega, self.l, self.N, n_samples)


def _null_vector(s, family):
    M, idx = _reduced(s, family)
    Mb, dr, dc = balance(M)
    _, sv, vh = np.linalg.svd(Mb)
    v = vh[-1].conj() * dc
    K = 2 * s.N + 1
    c = np.zeros(8 * K, dtype=complex)
    if idx is None:
        c[:] = v
    else:
        c[idx] = v
    c /= np.linalg.norm(c)
    return c, sv[-1], sv[0] / max(sv[-2], 1e-300)


def classify(s, coeffs):
    """Family label from OAM and longitudinal-energy dominance."""
    from .fields import longitudinal_energies

    ez, hz = longitudinal_energies(s, coeffs)
    if s.l == 0:
        return "TM" if ez >= hz else "TE"
    if np.isclose(ez, hz, rtol=1e-3):
        log.warning("hybrid mode with balanced E_z/H_z energy (l=%d); labelled EH", s.l)
    return "EH" if ez >= hz else "HE"


def dispersion_root(geom: FiberGeometry, l, family, seed, window, N=None, n_scan=41,
                    tol=1e-9, n_samples=1024, axis="omega", select="nearest"):
    """Find a guided mode near ``seed = (q, omega)``.

    The search runs over ``omega`` at fixed ``q`` (``axis="omega"``) or over
    ``q`` at fixed ``omega`` (``axis="q"``) inside ``window``. The scan looks
    for minima of the smallest singular value of the equilibrated boundary
    matrix; the minimum nearest the seed is refined by golden-section search down
    to machine precision on the V-shaped surrogate.
    ``select="lowest"`` / ``"highest"`` take the smallest / largest root in
    the window instead (the fundamental mode of a family is the lowest root
    in omega and the highest in q).
    """
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}")
    q0, w0 = seed
    lo, hi = window
    if not lo < (w0 if axis == "omega" else q0) < hi:
        raise ValueError("seed outside search window")
    if N is None:
        N = default_cutoff(geom)
    check_window(geom, N, axis, q0 if axis == "omega" else w0, lo, hi)

    def surrogate(x):
        q, w = (q0, x) if axis == "omega" else (x, w0)
        return singular_surrogate(geom, q, w, l, family, N, n_samples)

    xs = np.linspace(lo, hi, n_scan)
    vals = np.array([surrogate(x) for x in xs])
    minima = [i for i in range(1, n_scan - 1) if vals[i] <= vals[i - 1] and vals[i] <= vals[i + 1]]
    if not minima:
        raise RootNotFoundError("no surrogate minimum inside the search window")
    target = w0 if axis == "omega" else q0
    if select == "lowest":
        minima.sort(key=lambda i: xs[i])
    elif select == "highest":
        minima.sort(key=lambda i: -xs[i])
    elif select == "nearest":
        minima.sort(key=lambda i: abs(xs[i] - target))
    else:
        raise ValueError(f"unknown selection rule {select!r}")
    best = None
    for i in minima[:4]:
        res = golden_minimum(surrogate, xs[i - 1], xs[i + 1])
        if res.fun < tol:
            best = res
            break
        if best is None or res.fun < best.fun:
            best = res
    if best is None or best.fun >= tol:
        raise RootNotFoundError(
            f"minimum of surrogate {best.fun if best else np.nan:.2e} above tolerance {tol:.1e}")
    q, w = (q0, best.x) if axis == "omega" else (best.x, w0)
    return make_point(geom, l, family, q, w, N, n_samples)


def check_window(geom, N, axis, fixed, lo, hi):
    """Reject search windows that cross a vacuum light line (branch point of zeta_m)."""
    m = np.arange(-N, N + 1) if geom.is_bragg else np.zeros(1)
    shift = 2.0 * np.pi * m / geom.period if geom.is_bragg else 0.0 * m
    if axis == "omega":
        if lo <= 0:
            raise ValueError("omega window must be positive")
        qmin = np.min(np.abs(fixed + shift))
        if hi >= C0 * qmin:
            raise ValueError(f"window crosses the light line of a harmonic (omega = {C0 * qmin:.6e})")
    else:
        k0 = fixed / C0
        for s in shift:
            a, b = lo + s, hi + s
            if a < k0 and b > -k0:
                raise ValueError("q window crosses the light line of a harmonic")


@dataclass
class _Min:
    x: float
    fun: float


def golden_minimum(f, lo, hi, rtol=4e-16, maxiter=200):
    """Golden-section search down to ``rtol`` relative width.

    Brent's bounded method stops near sqrt(machine eps) in relative terms;
    the V-shaped singular-value surrogate needs the full precision.
    """
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(maxiter):
        if abs(b - a) <= rtol * max(abs(a), abs(b)):
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return _Min(c, fc) if fc < fd else _Min(d, fd)


def make_point(geom, l, family, q, omega, N=None, n_samples=1024):
    """Build a :class:`BandPoint` (null vector, classification) at a known root."""
    if N is None:
        N = default_cutoff(geom)
    s = _setup(geom, q, omega, l, N, n_samples)
    c, smin, cond = _null_vector(s, family)
    from .fields import continuity_residual

    jump = continuity_residual(s, c)
    if jump > CONTINUITY_LIMIT:
        # degenerate shell basis (a Bloch transverse wavenumber near zero)
        raise RootNotFoundError(f"null vector violates field continuity (relative jump {jump:.1e})")
    label = classify(s, c)
    if family in ("TE", "TM") and label != family:
        raise RootNotFoundError(f"root classified as {label}, expected {family}")
    pt = BandPoint(geometry=geom, family=label, l=l, q=q, omega=omega, N=s.N,
                   coeffs=c, residual=float(smin))
    pt.meta["cond_ratio"] = float(cond)
    pt.meta["continuity"] = float(jump)
    return pt


# --- band tracing ---------------------------------------------------------

_STENCIL1 = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
_STENCIL2 = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0


@dataclass
class Band:
    """A traced dispersion curve: ordered band points on a uniform q grid."""

    family: str
    l: int
    N: int
    points: list
    complete: bool = True
    diagnostic: str = ""

    @property
    def q(self):
        return np.array([p.q for p in self.points])

    @property
    def omega(self):
        return np.array([p.omega for p in self.points])

    @property
    def vg(self):
        return np.array([np.nan if p.vg is None else p.vg for p in self.points])

    @property
    def omega2(self):
        return np.array([np.nan if p.omega2 is None else p.omega2 for p in self.points])


def five_point_derivatives(omega, h):
    """First and second derivatives on a uniform grid with 5-point stencils.

    Interior points use central stencils; the two points at each end use
    the shifted 5-point stencils of the same order.
    """
    w = np.asarray(omega, dtype=float)
    n = w.size
    if n < 5:
        raise ValueError("need at least 5 points for 5-point stencils")
    d1 = np.empty(n)
    d2 = np.empty(n)
    for i in range(n):
        j0 = min(max(i - 2, 0), n - 5)
        x = np.arange(j0, j0 + 5) - i
        # weights from the Vandermonde system (exact for quartics)
        V = np.vander(x.astype(float), 5, increasing=True).T
        w1 = np.linalg.solve(V, np.array([0.0, 1.0, 0.0, 0.0, 0.0]))
        w2 = np.linalg.solve(V, np.array([0.0, 0.0, 2.0, 0.0, 0.0]))
        d1[i] = w1 @ w[j0:j0 + 5] / h
        d2[i] = w2 @ w[j0:j0 + 5] / h ** 2
    return d1, d2


def _follow(geom, l, family, q, w_pred, width, N, n_samples):
    for factor in (1.0, 4.0):
        win = (w_pred - factor * width, w_pred + factor * width)
        try:
            return dispersion_root(geom, l, family, (q, w_pred), win, N=N, n_scan=9,
                                   n_samples=n_samples)
        except RootNotFoundError:
            continue
    return None


def trace_band(geom, l, family, q_grid, seed_omega, window, N=None, n_samples=1024,
               select="nearest"):
    """Continue a band over a uniform ``q_grid`` by predictor-corrector.

    The first point is found inside ``window`` near ``seed_omega``; later
    points are seeded by linear extrapolation and searched in a narrow
    window. If tracking fails the partial band is returned with
    ``complete=False`` and a diagnostic.
    """
    q_grid = np.asarray(q_grid, dtype=float)
    if N is None:
        N = default_cutoff(geom)
    h = q_grid[1] - q_grid[0] if q_grid.size > 1 else 0.0
    if q_grid.size > 2 and not np.allclose(np.diff(q_grid), h, rtol=1e-9, atol=0):
        raise ValueError("q grid must be uniform")
    first = dispersion_root(geom, l, family, (q_grid[0], seed_omega), window, N=N,
                            n_samples=n_samples, select=select)
    pts = [first]
    band = Band(family=first.family, l=l, N=first.N, points=pts)
    for q in q_grid[1:]:
        if len(pts) >= 2:
            slope = (pts[-1].omega - pts[-2].omega) / (pts[-1].q - pts[-2].q)
            w_pred = pts[-1].omega + slope * (q - pts[-1].q)
            width = max(4.0 * abs(pts[-1].omega - pts[-2].omega), 1e-4 * pts[-1].omega)
        else:
            w_pred = pts[-1].omega
            width = 2e-2 * pts[-1].omega
        pt = _follow(geom, l, family, q, w_pred, width, N, n_samples)
        if pt is None or (len(pts) >= 2 and abs(pt.omega - w_pred) > width):
            band.complete = False
            band.diagnostic = f"band lost at q = {q:.6e} 1/m (predicted omega {w_pred:.6e})"
            log.warning(band.diagnostic)
            break
        pts.append(pt)
    if len(pts) >= 5:
        d1, d2 = five_point_derivatives([p.omega for p in pts], h)
        for p, v, w2 in zip(pts, d1, d2):
            p.vg = float(v)
            p.omega2 = float(w2)
    return band


def local_derivatives(point, h=None, n_samples=1024):
    """Group velocity and omega'' at a solved point from a centered 5-point stencil."""
    if h is None:
        h = 1e-3 * abs(point.q) if point.q != 0 else 1e3
    ws = []
    for k in (-2, -1, 0, 1, 2):
        if k == 0:
            ws.append(point.omega)
            continue
        q = point.q + k * h
        guess = point.omega + (point.vg or 0.0) * k * h
        width = max(abs(k) * h * C0, 1e-6 * point.omega)
        pt = dispersion_root(point.geometry, point.l, point.family,
                             (q, guess), (guess - width, guess + width), N=point.N, n_scan=9,
                             n_samples=n_samples)
        ws.append(pt.omega)
    ws = np.array(ws)
    vg = _STENCIL1 @ ws / h
    w2 = _STENCIL2 @ ws / h ** 2
    point.vg, point.omega2 = float(vg), float(w2)
    return point.vg, point.omega2

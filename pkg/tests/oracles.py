"""Independent numerical oracles used only by the test-suite."""
from __future__ import annotations

import math

import numpy as np
from scipy import linalg

from efiber.quantum_dynamics import driving_terms


# --- exterior-complex-scaling finite differences for the leaky trap ---------

def _ecs_grid(abar, h, theta=0.5, gap=2.0, ramp=4.0, length=30.0):
    n_a = int(round(abar / h))
    h = abar / n_a
    s_end = abar + gap + ramp + length
    n = int(np.ceil(s_end / h))
    s = h * np.arange(n + 2)
    s_half = s[:-1] + 0.5 * h

    def smooth(t):
        u = np.clip((t - abar - gap) / ramp, 0.0, 1.0)
        return u * u * u * (10 - 15 * u + 6 * u * u)

    def integral(t):
        # exact antiderivative of the smoothstep ramp
        u = np.clip((t - abar - gap) / ramp, 0.0, 1.0)
        inside = ramp * (u ** 4 * (10 / 4 - 3 * u + u * u))
        beyond = np.where(t > abar + gap + ramp, t - abar - gap - ramp, 0.0)
        return inside + beyond

    rot = np.exp(1j * theta) - 1.0
    X = s + rot * integral(s)
    dX = 1.0 + rot * smooth(s)
    Xh = s_half + rot * integral(s_half)
    dXh = 1.0 + rot * smooth(s_half)
    V = np.where(s < abar, s * s / 4.0, 0.0)
    V[n_a] = 0.5 * abar * abar / 4.0
    ld = np.clongdouble
    return h, n_a, X.astype(ld), dX.astype(ld), (Xh / dXh).astype(ld), V.astype(np.longdouble)


def _coefficients(grid):
    h, n_a, X, dX, c, V = grid
    return X * dX * np.longdouble(h) ** 2, c, V


def _ecs_mismatch(lam, grid, j_m, mp=None):
    """Log-derivative mismatch at node j_m between the regular and outgoing solutions."""
    w, c, V = _coefficients(grid)
    n = w.size - 1
    if mp is None:
        lam = np.clongdouble(lam)
        conv = lambda x: x  # noqa: E731
        one = np.clongdouble(1.0)
    else:
        lam = mp.mpc(lam)
        conv = lambda x: mp.mpc(complex(x))  # noqa: E731
        one = mp.mpc(1)
    # outward from the origin: 4 (phi1 - phi0)/h^2 + (lam - V0) phi0 = 0
    p0 = one
    h2 = conv(np.longdouble(grid[0]) ** 2)
    p1 = one - (lam - conv(V[0])) * h2 / 4
    for j in range(1, j_m + 1):
        cj, cm = conv(c[j]), conv(c[j - 1])
        p0, p1 = p1, ((cj + cm) * p1 - cm * p0 - (lam - conv(V[j])) * conv(w[j]) * p1) / cj
    left = p1 / p0
    # inward from the Dirichlet end
    r1, r0 = 0 * one, one * 1e-200 if mp is None else mp.mpf("1e-200")
    for j in range(n - 1, j_m, -1):
        cj, cm = conv(c[j]), conv(c[j - 1])
        r1, r0 = r0, ((cj + cm) * r0 - cj * r1 - (lam - conv(V[j])) * conv(w[j]) * r0) / cm
        if mp is None and abs(r0) > 1e200:
            r0, r1 = r0 * 1e-200, r1 * 1e-200
    right = r1 / r0
    return left - right


def _secant(f, seed, tol, floor):
    x0 = seed
    x1 = seed + 1e-6
    f0, f1 = f(x0), f(x1)
    best = None
    for _ in range(100):
        if f1 == f0:
            break
        x2 = x1 - f1 * (x1 - x0) / (f1 - f0)
        x0, f0 = x1, f1
        x1, f1 = x2, f(x2)
        step = abs(x1 - x0)
        if step <= tol * abs(x1):
            return x1
        if best is not None and step >= best[0] and best[0] < floor * abs(x1):
            return best[1]   # stagnated at rounding level
        if best is None or step < best[0]:
            best = (step, x1)
    if best is not None and best[0] < floor * abs(x1):
        return best[1]
    raise RuntimeError("ECS secant iteration did not converge")


def ecs_eigenvalue(abar, seed, h=0.004):
    """Complex eigenvalue (2p+1) of the truncated trap from complex-scaled FD.

    The radial operator (1/x)(x phi')' + (lam - V) phi is mapped to a
    smoothly rotated contour beyond the trap and discretized in conservative
    form; the eigenvalue is found by two-sided shooting and secant iteration
    on the log-derivative mismatch at the classical turning point. The
    recurrences run in extended precision, and in 32-digit arithmetic when
    the imaginary part is below 1e-9 of the real part (rounding noise of the
    long inward recurrence would otherwise dominate it).
    """
    grid = _ecs_grid(abar, h)
    j_m = max(2, int(round(2.0 * np.sqrt(complex(seed).real) / grid[0])))
    lam = _secant(lambda x: _ecs_mismatch(x, grid, j_m), np.clongdouble(seed), 1e-19, 1e-16)
    if abs(lam.imag) > 1e-9 * abs(lam.real):
        return complex(lam)
    import mpmath

    with mpmath.workdps(32):
        lam = _secant(lambda x: _ecs_mismatch(x, grid, j_m, mpmath), mpmath.mpc(complex(lam)),
                      mpmath.mpf("1e-30"), mpmath.mpf("1e-26"))
        return complex(lam)


def ecs_eigenvalue_extrapolated(abar, seed, h=0.004):
    """Richardson extrapolation (h, h/2) of :func:`ecs_eigenvalue`."""
    e1 = ecs_eigenvalue(abar, seed, h)
    e2 = ecs_eigenvalue(abar, e1, h / 2)
    return (4.0 * e2 - e1) / 3.0, e1, e2


# --- closed-form characteristic equation of the uniform hollow fiber --------

def uniform_l0_determinant(family, n, a, b, q, omega):
    """4x4 matching determinant for l = 0 TE or TM modes (guided: k0 < q < n k0).

    Unknowns: I_0 amplitude in the core, J_0 and Y_0 in the shell, K_0 outside.
    Rows: longitudinal field and the tangential partner at rho = a and b.
    """
    from scipy.special import iv, jv, kv, yv
    C0 = 299792458.0
    k0 = omega / C0
    p = np.sqrt(q * q - k0 * k0)
    h = np.sqrt(n * n * k0 * k0 - q * q)
    w = n * n if family == "TM" else 1.0
    M = np.array([
        [iv(0, p * a), -jv(0, h * a), -yv(0, h * a), 0.0],
        [-iv(1, p * a) / p, w / h * jv(1, h * a), w / h * yv(1, h * a), 0.0],
        [0.0, jv(0, h * b), yv(0, h * b), -kv(0, p * b)],
        [0.0, -w / h * jv(1, h * b), -w / h * yv(1, h * b), -kv(1, p * b) / p],
    ])
    return np.linalg.det(M)


def uniform_l0_roots(family, n, a, b, q, n_scan=2000):
    """All guided omega roots at fixed q, bracketed by sign changes and refined by brentq."""
    from scipy.optimize import brentq
    C0 = 299792458.0
    ws = np.linspace(C0 * q / n * (1 + 1e-9), C0 * q * (1 - 1e-9), n_scan)
    f = lambda w: uniform_l0_determinant(family, n, a, b, q, w)
    d = np.array([f(w) for w in ws])
    out = []
    for i in np.nonzero(np.sign(d[:-1]) != np.sign(d[1:]))[0]:
        out.append(brentq(f, ws[i], ws[i + 1], xtol=1e-12 * ws[i], rtol=1e-15))
    return np.array(out)


# --- dense finite-difference Bloch operators --------------------------------

def _fd_bloch(geom, q, k0, n, family):
    from efiber.fiber_modes import smooth_permittivity
    from scipy.linalg import eigh
    L = geom.period
    h = L / n
    z = np.arange(n) * h
    eps = smooth_permittivity(geom, z)
    c = 1.0 / smooth_permittivity(geom, z + h / 2) if family == "TM" else np.ones(n)
    ph = np.exp(1j * q * L)
    i = np.arange(n)
    A = np.zeros((n, n), complex)
    A[i, i] = -(c + np.roll(c, 1)) / h ** 2 + (k0 ** 2 if family == "TM" else eps * k0 ** 2)
    A[i[:-1], i[:-1] + 1] = c[:-1] / h ** 2
    A[i[1:], i[1:] - 1] = c[:-1] / h ** 2
    A[n - 1, 0] = ph * c[-1] / h ** 2
    A[0, n - 1] = np.conj(ph) * c[-1] / h ** 2
    B = np.diag(1.0 / eps) if family == "TM" else None
    return np.sort(eigh(A, B, eigvals_only=True))[::-1] / k0 ** 2


def fd_bloch_eigenvalues(geom, q, k0, family, n=800, count=4):
    """Leading Bloch eigenvalues (scaled by k0^2), Richardson-extrapolated from n and 2n points."""
    e1 = _fd_bloch(geom, q, k0, n, family)[:count]
    e2 = _fd_bloch(geom, q, k0, 2 * n, family)[:count]
    return (4 * e2 - e1) / 3


# --- dense Magnus propagator for the Fock-space dynamics ----------------------

def dense_magnus_reference(basis, space, psi0, n_steps=2000, drive=None):
    """Fourth-order Magnus with dense exponentials on a fine uniform grid."""
    occ = np.array(space.states)
    tot = occ.sum(axis=1)
    idx = {s: i for i, s in enumerate(space.states)}
    A = []
    for k in range(space.M):
        a = np.zeros((space.dim, space.dim))
        for s, i in idx.items():
            if s[k]:
                t = list(s)
                t[k] -= 1
                a[idx[tuple(t)], i] = math.sqrt(s[k])
        A.append(a)
    H0 = np.diag(basis.kappaT * tot * (tot - 1)).astype(complex)

    drive = drive or (lambda t: driving_terms(basis, t))

    def H(t):
        S = drive(t)
        return H0 + sum(S[k] * A[k].T + np.conj(S[k]) * A[k] for k in range(space.M))

    h = 1.0 / n_steps
    c = math.sqrt(3) / 6
    psi = psi0.copy()
    for i in range(n_steps):
        t = -0.5 + i * h
        H1, H2 = H(t + (0.5 - c) * h), H(t + (0.5 + c) * h)
        Om = -1j * h * 0.5 * (H1 + H2) - (math.sqrt(3) / 12) * h * h * (H2 @ H1 - H1 @ H2)
        psi = linalg.expm(Om) @ psi
    return psi


def one_photon_wigner(a):
    """Closed-form Wigner function of the one-photon Fock state."""
    r2 = np.abs(a) ** 2
    return (2 / math.pi) * np.exp(-2 * r2) * (4 * r2 - 1)

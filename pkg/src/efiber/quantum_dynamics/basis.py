"""Supermode bases and their driving terms.

Time is measured as tau = t / T on [-1/2, 1/2] and the spectral variable
as x, with Delta_k T / 2 = D(x): D = x at an intersection and D = x^2 at
a tangency. In these units the fundamental wavepacket is
w_0(x) = sinc(D(x)) / sqrt(C) and the drive of a wavepacket f is

    S[f](tau) = T s(t) = |g_Q| / sqrt(C) int dx exp(2 i tau D(x)) f(x),

with C = pi (intersection) or 4 sqrt(pi) / 3 (tangency), so that
int S_0 dtau = |g_Q|. Drives are zero outside the interaction window.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from ..specfun import hermite_functions

KINDS = ("ContinuumIntersection", "ContinuumTangency", "Cavity", "Discrete")
SINC2_NORM = {"ContinuumIntersection": math.pi, "ContinuumTangency": 4.0 * math.sqrt(math.pi) / 3.0}
GRAM_TOL = 1e-8
COND_LIMIT = 1e8


class BasisError(ValueError):
    pass


def _dispersion(kind, x):
    return x if kind == "ContinuumIntersection" else x * x


def _hermite_scaled(nmax, x, sp):
    """Hermite functions psi_n(x / sp) / sqrt(sp), shape (nmax + 1, len(x))."""
    return hermite_functions(nmax, np.asarray(x, dtype=float) / sp) / math.sqrt(sp)


def _w0(kind, x):
    d = _dispersion(kind, x)
    return np.sinc(d / math.pi) / math.sqrt(SINC2_NORM[kind])


def _quadrature(kind, sp, nmax, panels=None):
    """Gauss-Legendre nodes covering the Hermite functions up to order nmax."""
    X = sp * (math.sqrt(2.0 * nmax + 1.0) + 12.0)
    if panels is None:
        # resolve the sinc oscillations of w_0 as well
        osc = X if kind == "ContinuumIntersection" else X * X
        panels = int(max(64, 4 * osc / math.pi))
    xg, wg = np.polynomial.legendre.leggauss(16)
    edges = np.linspace(-X, X, panels + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * np.diff(edges)
    x = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
    w = (half[:, None] * wg[None, :]).ravel()
    return x, w


def optimal_scale(kind):
    """sigma' maximizing the overlap of the Gaussian psi_0 with w_0."""
    if kind not in SINC2_NORM:
        raise BasisError(f"no Hermite scale for kind {kind!r}")

    def neg(sp):
        x, w = _quadrature(kind, sp, 0)
        return -float(np.sum(w * _w0(kind, x) * _hermite_scaled(0, x, sp)[0]))

    res = optimize.minimize_scalar(neg, bounds=(0.2, 5.0), method="bounded",
                                   options={"xatol": 1e-10})
    return float(res.x), -float(res.fun)


def _tangency_drive_even(n, tau, sp):
    """Closed-form drive of psi_2n at a tangency (unit |g_Q|)."""
    th = 4.0 * sp * sp * tau
    c = math.factorial(2 * n) / math.sqrt(2.0 ** (2 * n) * math.factorial(2 * n)) / math.factorial(n)
    return c * math.sqrt(1.5 * sp) * np.exp(1j * (2 * n + 0.5) * np.arctan(th)) / (1.0 + th * th) ** 0.25


def hermite_drive(kind, n, tau, sp):
    """Drive S[psi_n](tau) / |g_Q| of the scaled Hermite function psi_n."""
    tau = np.asarray(tau, dtype=float)
    if kind == "ContinuumIntersection":
        y = 2.0 * sp * tau
        return (1j ** n) * math.sqrt(2.0 * sp) * hermite_functions(n, y)[n]
    if kind == "ContinuumTangency":
        if n % 2:
            return np.zeros(tau.shape, dtype=complex)
        return _tangency_drive_even(n // 2, tau, sp)
    raise BasisError(f"no Hermite drive for kind {kind!r}")


def fundamental_drive(kind, tau):
    """Drive S[w_0](tau) / |g_Q| inside the window."""
    tau = np.asarray(tau, dtype=float)
    if kind == "ContinuumIntersection":
        return np.ones(tau.shape, dtype=complex)
    if kind == "ContinuumTangency":
        return (3.0 / (2.0 * math.sqrt(2.0))) * (np.sqrt(0.5 + tau) * np.exp(0.25j * math.pi)
                                                 + np.sqrt(0.5 - tau) * np.exp(-0.25j * math.pi))
    raise BasisError(f"no closed-form fundamental drive for kind {kind!r}")


@dataclass
class SupermodeBasis:
    """Orthonormal wavepacket basis containing the linear-regime mode w_0.

    Continuum kinds: ``coeffs[n, m]`` expands w_n over the generating set
    (w_0, psi_h1, psi_h2, ...) where ``hermite_orders`` lists the Hermite
    orders used (odd orders are omitted at a tangency, where they are never
    driven). Discrete kinds (cavity and k-grid) store the wavepackets
    directly as rows of ``vectors`` over modes with detunings ``detuning``
    (times T) and drive weights ``weights``.
    """

    kind: str
    M: int
    gQ: float
    kappaT: float = 0.0
    sigma: float | None = None
    hermite_orders: tuple = ()
    coeffs: np.ndarray | None = None
    x: np.ndarray | None = None
    wavepackets: np.ndarray | None = None
    vectors: np.ndarray | None = None
    detuning: np.ndarray | None = None
    weights: np.ndarray | None = None
    m_cavity: int | None = None
    meta: dict = field(default_factory=dict)

    @property
    def delta_nl(self):
        return 2.0 * self.kappaT

    def gram(self):
        """Gram matrix of the wavepackets (identity for a valid basis)."""
        if self.vectors is not None:
            v = self.vectors
            return v.conj() @ v.T
        B = self.coeffs
        return B @ self.meta["generator_gram"] @ B.T


def _gram_schmidt(gen_gram):
    """Coefficients B with rows orthonormal under the generating-set Gram matrix."""
    cond = np.linalg.cond(gen_gram)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise BasisError(f"generating set nearly dependent (cond {cond:.2e})")
    L = np.linalg.cholesky(gen_gram)
    # rows of inv(L) give the classical Gram-Schmidt sequence in order
    return np.linalg.inv(L).conj()


def build_continuum(kind, M, gQ, kappaT=0.0, sigma=None):
    """Gram-Schmidt basis {w_0} + Hermite functions at the optimal scale."""
    if kind not in SINC2_NORM:
        raise BasisError(f"unknown continuum kind {kind!r}")
    if M < 1:
        raise BasisError("need at least one supermode")
    if sigma is None:
        sigma, _ = optimal_scale(kind)
    step = 2 if kind == "ContinuumTangency" else 1
    orders = tuple(step * j for j in range(1, M))
    nmax = max(orders, default=0)
    x, w = _quadrature(kind, sigma, nmax)
    H = _hermite_scaled(nmax, x, sigma)
    gen = np.vstack([_w0(kind, x)[None, :]] + [H[n][None, :] for n in orders])
    G = (gen * w) @ gen.T
    # w_0 is normalized analytically; its slow tail is cut by the finite grid
    G[0, 0] = 1.0
    B = _gram_schmidt(G)
    if B[0, 0] < 0:
        B = -B
    basis = SupermodeBasis(kind=kind, M=M, gQ=gQ, kappaT=kappaT, sigma=sigma,
                           hermite_orders=orders, coeffs=B, x=x, wavepackets=B @ gen,
                           meta={"quad_weights": w, "generator_gram": G})
    _check_gram(basis)
    return basis


def build_discrete(detuning_T, weights, M=None, gQ=None, kappaT=0.0, kind="Discrete"):
    """Basis on a finite set of modes with detunings Delta_j T and real drive weights Omega_j T.

    The fundamental wavepacket is proportional to weights_j sinc(Delta_j T / 2);
    the rest of the basis is Gram-Schmidt of unit vectors ordered by
    increasing |detuning|. ``gQ`` defaults to the coupling implied by the
    weights, |g_Q|^2 = sum_j |weights_j sinc(Delta_j T / 2)|^2.
    """
    d = np.asarray(detuning_T, dtype=float)
    wts = np.asarray(weights, dtype=float)
    K = d.size
    M = K if M is None else int(M)
    if not 1 <= M <= K:
        raise BasisError("M must lie in [1, number of modes]")
    v0 = wts * np.sinc(d / (2.0 * math.pi))
    g_implied = float(np.linalg.norm(v0))
    if g_implied == 0:
        raise BasisError("fundamental wavepacket vanishes")
    order = np.argsort(np.abs(d), kind="stable")
    gen = [v0 / g_implied]
    for j in order:
        e = np.zeros(K, dtype=complex)
        e[j] = 1.0
        gen.append(e)
    gen = np.array(gen)
    # drop the unit vector most parallel to w_0 to keep K generators
    drop = 1 + int(np.argmax(np.abs(gen[1:] @ gen[0].conj())))
    gen = np.delete(gen, drop, axis=0)[:M]
    cond = np.linalg.cond(gen @ gen.conj().T)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise BasisError(f"generating set nearly dependent (cond {cond:.2e})")
    vecs = _orthonormal_rows(gen)
    basis = SupermodeBasis(kind=kind, M=M, gQ=g_implied if gQ is None else gQ, kappaT=kappaT,
                           vectors=vecs, detuning=d, weights=wts)
    _check_gram(basis)
    return basis


def _orthonormal_rows(gen):
    """Gram-Schmidt of the rows in order (QR), first row keeps its phase."""
    q, r = np.linalg.qr(gen.T)
    d = np.diag(r)
    q = q * (d / np.abs(d))[None, :]
    return q.T


def build_cavity(m, n_modes, gQ, kappaT=0.0, velocity_ratio=None):
    """Cavity-mode basis; Kronecker when 1 - v_g/v_e = 2m (``velocity_ratio`` None).

    Modes are j = -(n_modes // 2) .. n_modes // 2 with detunings j Delta,
    Delta T = 2 pi m. A general ``velocity_ratio`` = v_g / v_e gives the
    Gram-Schmidt basis of the sinc-weighted fundamental instead.
    """
    if n_modes < 1 or n_modes % 2 == 0:
        raise BasisError("n_modes must be a positive odd number")
    j = np.arange(n_modes) - n_modes // 2
    if velocity_ratio is None:
        if m == 0 or int(m) != m:
            raise BasisError("the Kronecker cavity basis needs a nonzero integer m")
        dT = 2.0 * math.pi * m * j
        order = np.argsort(np.abs(j), kind="stable")
        vecs = np.eye(n_modes, dtype=complex)[order]
        return SupermodeBasis(kind="Cavity", M=n_modes, gQ=gQ, kappaT=kappaT, vectors=vecs,
                              detuning=dT, weights=np.full(n_modes, float(gQ)),
                              m_cavity=int(m), meta={"mode_index": j[order]})
    mis = 1.0 - velocity_ratio
    dT = math.pi * mis * j
    basis = build_discrete(dT, np.ones(n_modes), gQ=None, kappaT=kappaT, kind="Cavity")
    scale = gQ / basis.gQ
    basis.weights = basis.weights * scale
    basis.gQ = gQ
    basis.meta["mode_index"] = j
    return basis


def _check_gram(basis):
    G = basis.gram()
    err = float(np.max(np.abs(G - np.eye(G.shape[0]))))
    basis.meta["gram_error"] = err
    if err > GRAM_TOL:
        raise BasisError(f"wavepackets not orthonormal (max Gram deviation {err:.2e})")


def build_supermodes(kind, M=6, gQ=1.0, kappaT=0.0, **params):
    """Dispatch on ``kind``: continuum kinds, ``"Cavity"`` or ``"Discrete"``."""
    if kind in SINC2_NORM:
        return build_continuum(kind, M, gQ, kappaT, params.get("sigma"))
    if kind == "Cavity":
        return build_cavity(params.get("m", 1), params.get("n_modes", M), gQ, kappaT,
                            params.get("velocity_ratio"))
    if kind == "Discrete":
        return build_discrete(params["detuning_T"], params["weights"], M, gQ, kappaT)
    raise BasisError(f"unknown supermode kind {kind!r}")


def driving_terms(basis, tau):
    """Dimensionless drives S_n(tau) = T s_n(t), shape (M,) or (M, len(tau)).

    Continuum kinds use the closed forms combined with the Gram-Schmidt
    coefficients; discrete kinds sum over modes. Zero outside |tau| <= 1/2.
    """
    tau_arr = np.atleast_1d(np.asarray(tau, dtype=float))
    inside = np.abs(tau_arr) <= 0.5 + 1e-15
    tc = np.clip(tau_arr, -0.5, 0.5)
    if basis.vectors is not None:
        # S_n = sum_j w_n(j) Omega_j T e^{i Delta_j t}
        ph = np.exp(1j * np.outer(basis.detuning, tc))
        S = (basis.vectors * basis.weights[None, :]) @ ph
    else:
        gen = [fundamental_drive(basis.kind, tc)]
        gen += [hermite_drive(basis.kind, n, tc, basis.sigma) for n in basis.hermite_orders]
        S = basis.gQ * (basis.coeffs @ np.array(gen))
    S = S * inside[None, :]
    return S[:, 0] if np.ndim(tau) == 0 else S

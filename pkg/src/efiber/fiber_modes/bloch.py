"""Bloch eigenproblems of the periodic shell, solved in a plane-wave basis.

Lengths are scaled by the vacuum wavenumber k0 throughout, so wavenumbers
are dimensionless and eps is the only material input.

TE potential f(z) = exp(iqz) u_TE(z):
    f'' + eps k0^2 f = eta^2 f
TM potential g(z) (E_z = gamma^2 g / eps):
    (g'/eps)' + k0^2 g = gamma^2 g / eps
The TM problem is the generalized Hermitian form of the modified Bloch
equation for sqrt(eps) u_TM; both are Hermitian in the plane-wave basis.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .geometry import FiberGeometry, fourier_coefficients


class BlochError(RuntimeError):
    pass


@dataclass
class BlochModes:
    """Eigenpairs of the shell problem at one (q, omega).

    ``te_vecs[:, j]`` / ``tm_vecs[:, j]`` hold the Fourier coefficients of
    mode j on harmonics m = -N..N; ``beta`` are the scaled harmonic
    wavenumbers (q + 2 pi m / period) / k0. ``inv_eps`` is the Toeplitz
    matrix of 1/eps acting on harmonic coefficients.
    """

    beta: np.ndarray
    eta2: np.ndarray
    te_vecs: np.ndarray
    gamma2: np.ndarray
    tm_vecs: np.ndarray
    inv_eps: np.ndarray
    eps: np.ndarray


def toeplitz_from_coeffs(coeffs, size):
    """Convolution matrix T[m, n] = c_{m-n} for harmonics m, n in -N..N."""
    kmax = (len(coeffs) - 1) // 2
    N = (size - 1) // 2
    idx = np.arange(-N, N + 1)
    diff = idx[:, None] - idx[None, :]
    return coeffs[diff + kmax]


def harmonic_betas(geom: FiberGeometry, q, k0, N):
    m = np.arange(-N, N + 1)
    if geom.is_bragg:
        return (q + 2.0 * np.pi * m / geom.period) / k0
    return np.full(1, q / k0)


def _fix_phase(vecs):
    # largest component real and positive: deterministic, smooth in (q, omega)
    idx = np.argmax(np.abs(vecs), axis=0)
    ph = vecs[idx, np.arange(vecs.shape[1])]
    return vecs * (np.abs(ph) / ph)[None, :]


def bloch_eigen(geom: FiberGeometry, q, omega, N, n_samples=1024):
    """Solve both shell Bloch problems with 2N+1 plane waves.

    Eigenpairs are sorted by descending eigenvalue, so the least evanescent
    Bloch waves come first. TE vectors are orthonormal (unit cell average
    of |u|^2); TM vectors are orthonormal with weight 1/eps.
    """
    from ..constants import C0

    if not geom.is_bragg:
        N = 0
    if n_samples < 256:
        raise BlochError("need at least 256 samples per unit cell")
    k0 = omega / C0
    K = 2 * N + 1
    beta = harmonic_betas(geom, q, k0, N)
    eps_c = fourier_coefficients(geom, 2 * N, n_samples)
    ieps_c = fourier_coefficients(geom, 2 * N, n_samples, func=lambda e: 1.0 / e)
    E = toeplitz_from_coeffs(eps_c, K)
    P = toeplitz_from_coeffs(ieps_c, K)
    E = 0.5 * (E + E.conj().T)
    P = 0.5 * (P + P.conj().T)

    a_te = E - np.diag(beta ** 2)
    a_tm = np.eye(K) - beta[:, None] * P * beta[None, :]
    try:
        eta2, te = linalg.eigh(a_te)
        gamma2, tm = linalg.eigh(a_tm, P)
    except linalg.LinAlgError as exc:
        raise BlochError(f"Bloch eigen-solver failed: {exc}") from exc
    order = np.argsort(-eta2)
    eta2, te = eta2[order], _fix_phase(te[:, order])
    order = np.argsort(-gamma2)
    gamma2, tm = gamma2[order], _fix_phase(tm[:, order])
    res_te = np.linalg.norm(a_te @ te - te * eta2) / max(1.0, np.abs(eta2).max())
    res_tm = np.linalg.norm(a_tm @ tm - (P @ tm) * gamma2) / max(1.0, np.abs(gamma2).max())
    if max(res_te, res_tm) > 1e-8:
        raise BlochError(f"Bloch residual too large: TE {res_te:.2e}, TM {res_tm:.2e}")
    return BlochModes(beta=beta, eta2=eta2, te_vecs=te, gamma2=gamma2, tm_vecs=tm,
                      inv_eps=P, eps=E)

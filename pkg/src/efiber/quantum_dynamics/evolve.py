"""Time evolution of the supermode Kerr system in the truncated Fock space.

The generator in units of 1/T is

    H(tau) = (delta_NL / 2) N (N - 1) + sum_n [S_n(tau) w_n^dag + S_n(tau)^* w_n],

the Schroedinger-picture form whose Heisenberg equations are
dw_n/dt = -2 i kappa N w_n - i s_n(t) (using [w_n, N(N-1)] = 2 N w_n).
Steps use the fourth-order Magnus expansion with two Gauss nodes and a
step-doubling error estimate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .basis import driving_terms
from .fock import FockSpace

LEAKAGE_LIMIT = 1e-4
STEP_TOL = 1e-9
HERMITICITY_TOL = 1e-14
_GAUSS = (0.5 - math.sqrt(3.0) / 6.0, 0.5 + math.sqrt(3.0) / 6.0)


class TruncationError(RuntimeError):
    pass


class IntegrationError(RuntimeError):
    pass


@dataclass
class QuantumTrajectory:
    tau: np.ndarray
    states: np.ndarray
    space: FockSpace
    N: np.ndarray
    populations: np.ndarray
    g2: np.ndarray
    leakage: float
    norm_drift: float
    steps: int
    meta: dict = field(default_factory=dict)

    @property
    def final(self):
        return self.states[-1]


class Generator:
    """H(tau) = H0 + V(tau) assembled from sparse ladder operators."""

    def __init__(self, space, basis, drive=None):
        self.space = space
        self.basis = basis
        N = space.total
        self.diag = 0.5 * basis.delta_nl * N * (N - 1)
        self.lower = [space.lower(k) for k in range(space.M)]
        self.raise_ = [a.T.tocsr() for a in self.lower]
        # stacked ladders: one sparse product per application
        self._L = sparse.vstack(self.lower).tocsr()
        self._R = sparse.vstack(self.raise_).tocsr()
        self.drive = drive if drive is not None else (lambda t: driving_terms(basis, t))

    def matrix(self, tau):
        S = np.atleast_1d(self.drive(tau))
        H = sparse.diags(self.diag).astype(complex)
        for k in range(self.space.M):
            H = H + S[k] * self.raise_[k] + np.conj(S[k]) * self.lower[k]
        return H.tocsr()

    def __call__(self, tau):
        """Return v -> H(tau) v."""
        S = np.atleast_1d(self.drive(tau)).astype(complex)
        Sc = S.conj()
        M, dim, d = self.space.M, self.space.dim, self.diag

        def apply(v):
            r = (self._R @ v).reshape(M, dim)
            l = (self._L @ v).reshape(M, dim)
            return d * v + S @ r + Sc @ l

        return apply


def check_hermitian(H):
    dev = abs(H - H.conj().T)
    err = float(dev.max()) if dev.nnz else 0.0
    if err > HERMITICITY_TOL:
        raise IntegrationError(f"generator not Hermitian (max deviation {err:.2e})")
    return err


def lanczos_expm(K, psi, dt, m_max=40, tol=1e-13):
    """exp(-i dt K) psi for Hermitian K by Lanczos; substeps if the Krylov space is too small.

    ``K`` is a matrix or a callable returning K @ v.
    """
    if not callable(K):
        K = K.__matmul__
    norm = np.linalg.norm(psi)
    if norm == 0.0:
        return psi.copy()
    V = np.empty((m_max + 1, psi.size), dtype=complex)
    V[0] = psi / norm
    alpha, beta = [], []
    for j in range(m_max):
        w = K(V[j])
        a = np.vdot(V[j], w).real
        w = w - a * V[j] - (beta[-1] * V[j - 1] if j else 0.0)
        # full reorthogonalization keeps the small basis accurate
        w -= V[: j + 1].T @ (V[: j + 1].conj() @ w)
        b = np.linalg.norm(w)
        alpha.append(a)
        T = np.diag(alpha) + np.diag(beta, 1) + np.diag(beta, -1)
        ev, U = np.linalg.eigh(T)
        c = U @ (np.exp(-1j * dt * ev) * U[0].conj())
        if b * abs(c[-1]) < tol or b < 1e-14 * max(1.0, abs(a)):
            return norm * (V[: j + 1].T @ c)
        beta.append(b)
        V[j + 1] = w / b
    half = lanczos_expm(K, psi, 0.5 * dt, m_max, tol)
    return lanczos_expm(K, half, 0.5 * dt, m_max, tol)


def magnus4_step(gen, psi, t, h):
    """psi(t + h) with the two-node fourth-order Magnus propagator."""
    H1 = gen(t + _GAUSS[0] * h)
    H2 = gen(t + _GAUSS[1] * h)
    # exp(-i h K) with K = (H1 + H2)/2 + i sqrt(3) h/12 [H2, H1], Hermitian
    c = 1j * math.sqrt(3.0) / 12.0 * h

    def K(v):
        u1, u2 = H1(v), H2(v)
        return 0.5 * (u1 + u2) + c * (H2(u1) - H1(u2))

    return lanczos_expm(K, psi, h)


def _observables(space, psi):
    p = np.abs(psi) ** 2
    N = float(p @ space.total)
    pops = p @ space.occupation
    nn = float(p @ (space.total * (space.total - 1)))
    g2 = nn / N ** 2 if N > 1e-300 else math.nan
    return N, pops, g2


def evolve(basis, N_max, state0=None, n_snapshots=101, tol=STEP_TOL, h0=0.02, h_min=1e-7,
           drive=None, leakage_limit=LEAKAGE_LIMIT):
    """Integrate over tau in [-1/2, 1/2]; snapshots on a uniform tau grid.

    Raises :class:`TruncationError` if the population of the top
    excitation shell exceeds ``leakage_limit`` at any snapshot.
    """
    space = FockSpace(basis.M, N_max)
    gen = Generator(space, basis, drive)
    check_hermitian(gen.matrix(0.0))
    psi = space.vacuum() if state0 is None else np.asarray(state0, dtype=complex).copy()
    if psi.shape != (space.dim,):
        raise ValueError("initial state has the wrong dimension")
    taus = np.linspace(-0.5, 0.5, n_snapshots)
    perm = _mode_permutation(basis) if drive is None else None
    if perm is not None:
        states, steps = _evolve_static(space, basis, perm, psi, taus)
        return _trajectory(space, states, taus, steps, N_max, basis, tol, leakage_limit)
    states = [psi.copy()]
    t, h, steps = -0.5, h0, 0
    for target in taus[1:]:
        while t < target - 1e-15:
            h = min(h, target - t)
            full = magnus4_step(gen, psi, t, h)
            half = magnus4_step(gen, magnus4_step(gen, psi, t, 0.5 * h), t + 0.5 * h, 0.5 * h)
            # Richardson estimate of the error in the two-half-step result (order 4)
            err = float(np.linalg.norm(full - half)) / 15.0
            if err <= tol or h <= h_min:
                if h <= h_min and err > tol:
                    raise IntegrationError(f"step size underflow at tau = {t:.6f}")
                psi = half
                t += h
                steps += 1
                h = h * min(2.0, 0.9 * (tol / max(err, 1e-300)) ** 0.2)
            else:
                h = h * max(0.2, 0.9 * (tol / err) ** 0.2)
        states.append(psi.copy())
    return _trajectory(space, np.array(states), taus, steps, N_max, basis, tol, leakage_limit)


def _trajectory(space, states, taus, steps, N_max, basis, tol, leakage_limit):
    obs = [_observables(space, s) for s in states]
    N = np.array([o[0] for o in obs])
    pops = np.array([o[1] for o in obs])
    g2 = np.array([o[2] for o in obs])
    leak = max(space.shell_population(s, N_max) for s in states) if N_max > 0 else 0.0
    drift = float(np.max(np.abs(1.0 - np.sum(np.abs(states) ** 2, axis=1))))
    traj = QuantumTrajectory(tau=taus, states=states, space=space, N=N, populations=pops, g2=g2,
                             leakage=leak, norm_drift=drift, steps=steps,
                             meta={"N_max": N_max, "M": basis.M, "tol": tol})
    if leak > leakage_limit:
        raise TruncationError(f"top-shell population {leak:.2e} exceeds {leakage_limit:.0e}; "
                              f"increase N_max above {N_max}")
    return traj


def _mode_permutation(basis):
    """Mode index of each wavepacket if a discrete basis is a permutation of its modes."""
    v = basis.vectors
    if v is None or v.shape[0] != v.shape[1]:
        return None
    idx = np.argmax(np.abs(v), axis=1)
    if np.array_equal(v, np.eye(v.shape[1])[idx]):
        return idx
    return None


def _evolve_static(space, basis, perm, psi, taus):
    """Exact propagation when each wavepacket is a single mode.

    In the frame where mode j carries its detuning, the generator
    sum_j Delta_j T n_j + (delta_NL / 2) N (N - 1) + sum_j Omega_j T (a_j + a_j^dag)
    is constant; snapshots are mapped back to the drive frame by the
    diagonal phases exp(i tau sum_j Delta_j T n_j).
    """
    det = basis.detuning[perm]
    w = basis.weights[perm]
    phase = space.occupation @ det
    H = sparse.diags(phase + 0.5 * basis.delta_nl * space.total * (space.total - 1)).astype(complex)
    for k in range(space.M):
        if w[k] != 0:
            a = space.lower(k)
            H = H + w[k] * (a + a.T)
    H = H.tocsr()
    psi = np.exp(-1j * phase * taus[0]) * psi
    states = [np.exp(1j * phase * taus[0]) * psi]
    for t0, t1 in zip(taus[:-1], taus[1:]):
        psi = lanczos_expm(H, psi, t1 - t0)
        states.append(np.exp(1j * phase * t1) * psi)
    return np.array(states), len(taus) - 1


def poisson_cutoff(gQ, tail=1e-10):
    """Smallest N with Poisson(|g_Q|^2) probability of more than N photons below ``tail``."""
    mu = gQ * gQ
    p = math.exp(-mu)
    cdf, n = p, 0
    while 1.0 - cdf > tail:
        n += 1
        p *= mu / n
        cdf += p
        if n > 200:
            break
    return max(n, 1)


def evolve_auto(basis, state0=None, n_snapshots=101, N_start=3, N_cap=None, **kw):
    """Evolve with the smallest N_max (from ``N_start`` in steps of 1) passing the leakage check."""
    N_cap = N_cap or max(poisson_cutoff(basis.gQ), N_start)
    last = None
    for N_max in range(N_start, N_cap + 1):
        try:
            return evolve(basis, N_max, state0, n_snapshots, **kw)
        except TruncationError as exc:
            last = exc
    raise TruncationError(f"leakage still above limit at N_max = {N_cap}: {last}")

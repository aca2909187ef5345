"""Complex eigenvalues of the truncated parabolic trap and the electron mean free path.

Inside x < abar the radial state is exp(-x^2/4) L_p(x^2/2); outside it is an
outgoing H_0^(1)(sqrt(2p+1) x). Matching the logarithmic derivative gives

    1/2 + L_{p-1}^1(abar^2/2) / L_p(abar^2/2)
        = sqrt(2p+1) H_1(sqrt(2p+1) abar) / (abar H_0(sqrt(2p+1) abar)).

The degree p = n + eps is carried as an integer plus a small complex offset
so the Laguerre functions keep full precision when eps is tiny.
"""
from __future__ import annotations

import numpy as np
from ..specfun import hankel, laguerre_offset

NEWTON_MAX_STEPS = 200
NEWTON_DAMPING = 0.5
NEWTON_STEP_CAP = 0.1


class LeakyRootNotFound(RuntimeError):
    def __init__(self, msg, trace):
        super().__init__(msg)
        self.trace = trace


def _mismatch(n, eps, abar):
    """Matching condition with the Laguerre denominator cleared.

    Returns (G, scale): G = L_{p-1}^1 - (rhs - 1/2) L_p vanishes at a root
    and is nearly linear in eps even when L_p varies like exp(abar^2/2).
    """
    s = 0.5 * abar * abar
    lam = (2 * n + 1) + 2.0 * eps
    lp = laguerre_offset(n, eps, 0, s)
    lm = laguerre_offset(n - 1, eps, 1, s)
    kx = np.sqrt(lam) * abar
    rhs = np.sqrt(lam) * hankel(1, 1, kx) / (abar * hankel(1, 0, kx))
    g = lm - (rhs - 0.5) * lp
    return g, abs(lm) + abs(rhs - 0.5) * abs(lp)


def _newton(n, abar, eps):
    g, _ = _mismatch(n, eps, abar)
    trace = [(complex(eps), abs(g))]
    for _ in range(NEWTON_MAX_STEPS):
        h = 1e-8 * max(1.0, abs(eps))
        dg = (_mismatch(n, eps + h, abar)[0] - _mismatch(n, eps - h, abar)[0]) / (2 * h)
        step = -g / dg
        if abs(step) > NEWTON_STEP_CAP:
            step *= NEWTON_STEP_CAP / abs(step)
        for _ in range(60):
            gt, scale = _mismatch(n, eps + step, abar)
            if abs(gt) < abs(g):
                break
            step *= NEWTON_DAMPING
        else:
            # no decrease possible: accept if the residual is at rounding level
            if abs(g) <= 1e-11 * scale:
                return eps, trace
            raise LeakyRootNotFound("Newton stagnated away from a root", trace)
        eps, g = eps + step, gt
        trace.append((complex(eps), abs(g)))
        if abs(step) <= 1e-14 * max(abs(eps), 1e-300) or g == 0:
            return eps, trace
    raise LeakyRootNotFound(f"Newton did not converge in {NEWTON_MAX_STEPS} steps", trace)


CONTINUATION_START = 7.0
CONTINUATION_STEP = 0.25


def leaky_eigenvalue(abar, p_index, U=0.0):
    """Complex (2p+1) of radial mode ``p_index`` for confinement ``abar``.

    Damped complex Newton iteration (steps capped at 0.1 and halved until
    the mismatch decreases) from the real seed 2 p_index + 1. For weak
    confinement, where the root has moved far from its seed, the root is
    continued down from abar = 7 + p_index in steps of 0.25. Only the worst
    case U = 0 outside the trap is implemented.
    """
    if not abar > 1:
        raise ValueError("abar must exceed 1")
    if U != 0.0:
        raise NotImplementedError("only the U = 0 exterior is implemented")
    n = int(p_index)
    if n < 0:
        raise ValueError("p_index must be non-negative")
    start = CONTINUATION_START + n
    path = [abar] if abar >= start else list(np.arange(start, abar, -CONTINUATION_STEP)) + [abar]
    eps = 0.0 + 0.0j
    for ab in path:
        eps, _ = _newton(n, ab, eps)
    lam = complex((2 * n + 1) + 2.0 * eps)
    if lam.imag > 0:
        raise LeakyRootNotFound("root with Im(2p+1) > 0 rejected", [])
    return lam


def mean_free_path(Omega, v, eig):
    """Tunnelling-limited mean free path v / (-2 Omega Im(2p+1)) in metres."""
    im = complex(eig).imag
    if im > 0:
        raise ValueError("Im(2p+1) must be non-positive")
    if im == 0:
        return float("inf")
    return v / (-2.0 * Omega * im)

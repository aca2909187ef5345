"""Complex-argument special functions used throughout the package.

Cylinder functions are delegated to the AMOS routines wrapped by
:mod:`scipy.special`; this module adds the validity windows, the
loud-failure policy and the exponentially scaled ratios the mode solver
needs. The confluent hypergeometric function is summed here directly because
scipy does not accept a complex first parameter.

Validity windows
----------------
========================  ==============================  ==================
function                  window                          relative accuracy
========================  ==============================  ==================
``bessel_j``/``hankel``   ``|z| < 1e4``, integer l >= 0    1e-10
``hypergeometric_1f1``    ``|z| <= 600``                   1e-9
``hermite_poly``          ``n <= 64``                      recurrence exact
========================  ==============================  ==================
"""
from __future__ import annotations

import math

import numpy as np
from scipy import special as _sp

BESSEL_WINDOW = 1.0e4
KUMMER_WINDOW = 600.0
HERMITE_MAX_ORDER = 64
_KUMMER_MAX_TERMS = 4000


class SpecialFunctionError(ValueError):
    """Argument outside a documented validity window, or a singular point."""


def _as_order(l):
    if int(l) != l or l < 0:
        raise SpecialFunctionError(f"order must be a non-negative integer, got {l!r}")
    return int(l)


def _check_z(z, window=BESSEL_WINDOW):
    z = np.asarray(z, dtype=complex)
    if not np.all(np.isfinite(z)):
        raise SpecialFunctionError("non-finite argument")
    if np.any(np.abs(z) >= window):
        raise SpecialFunctionError(f"|z| outside validity window |z| < {window:g}")
    return z


def _out(value):
    value = np.asarray(value)
    if not np.all(np.isfinite(value)):
        raise SpecialFunctionError("non-finite result inside validity window")
    return value[()] if value.ndim == 0 else value


def bessel_j(l, z):
    """Bessel function of the first kind J_l(z) for integer l >= 0."""
    l = _as_order(l)
    return _out(_sp.jv(l, _check_z(z)))


def bessel_y(l, z):
    """Bessel function of the second kind Y_l(z); singular at z = 0."""
    l = _as_order(l)
    z = _check_z(z)
    if np.any(z == 0):
        raise SpecialFunctionError("Y_l is singular at z = 0")
    return _out(_sp.yv(l, z))


def hankel(kind, l, z):
    """Hankel function H_l^(kind)(z) = J_l(z) +/- i Y_l(z)."""
    l = _as_order(l)
    z = _check_z(z)
    if np.any(z == 0):
        raise SpecialFunctionError("Hankel functions are singular at z = 0")
    if kind == 1:
        return _out(_sp.hankel1(l, z))
    if kind == 2:
        return _out(_sp.hankel2(l, z))
    raise SpecialFunctionError(f"kind must be 1 or 2, got {kind!r}")


def bessel_j_derivative(l, z):
    """d/dz J_l(z)."""
    l = _as_order(l)
    z = _check_z(z)
    return _out(0.5 * (_sp.jv(l - 1, z) - _sp.jv(l + 1, z)))


def hankel_derivative(kind, l, z):
    """d/dz H_l^(kind)(z)."""
    l = _as_order(l)
    z = _check_z(z)
    f = _sp.hankel1 if kind == 1 else _sp.hankel2
    return _out(0.5 * (f(l - 1, z) - f(l + 1, z)))


# --- ratios used by the mode solver -------------------------------------
#
# The boundary-matrix entries are ratios R(k rho)/R(k rho0) with rho, rho0 on
# the same side of the growth direction of R. Exponential scaling keeps them
# finite for strongly evanescent Fourier harmonics.

def _jscaled(l, z):
    return _sp.jve(l, z), np.abs(np.imag(z))


def _h1scaled(l, z):
    # H1(z) = h1e(z) * exp(iz)
    return _sp.hankel1e(l, z), 1j * z


def _h2scaled(l, z):
    # H2(z) = h2e(z) * exp(-iz)
    return _sp.hankel2e(l, z), -1j * z


_SCALED = {"J": _jscaled, "H1": _h1scaled, "H2": _h2scaled}


def cylinder_ratio(kind, l, k, rho, rho0):
    """Return (R(k rho)/R(k rho0), k R'(k rho)/R(k rho0)) for R in {J, H1, H2}.

    ``k`` may be complex; ``rho`` may be an array. Both results are computed
    from exponentially scaled functions so that large imaginary arguments do
    not overflow.
    """
    l = _as_order(l)
    scaled = _SCALED[kind]
    k = complex(k)
    z = _check_z(k * np.asarray(rho, dtype=float))
    z0 = complex(_check_z(k * rho0))
    if kind != "J" and (z0 == 0 or np.any(z == 0)):
        raise SpecialFunctionError("Hankel ratio at zero argument")
    f0, e0 = scaled(l, z0)
    f, e = scaled(l, z)
    fm, _ = scaled(abs(l - 1), z)
    fp, _ = scaled(l + 1, z)
    if l == 0:
        # R_{-1} = -R_1 for every integer-order cylinder function
        fm = -fp
    with np.errstate(over="raise"):
        growth = np.exp(e - e0)
    ratio = f / f0 * growth
    dratio = 0.5 * k * (fm - fp) / f0 * growth
    return _out(ratio), _out(dratio)


# --- confluent hypergeometric function -----------------------------------

def _kummer_series(a_int, a_eps, b, z):
    """Sum 1F1(a, b, z) with a = a_int + a_eps.

    The Pochhammer factor (a + j) is formed as (a_int + j) + a_eps so that a
    near-integer first parameter keeps the full relative precision of its
    small offset.
    """
    term = 1.0 + 0.0j
    total = 1.0 + 0.0j
    comp = 0.0 + 0.0j
    biggest = 1.0
    for j in range(_KUMMER_MAX_TERMS):
        factor = (a_int + j) + a_eps
        if factor == 0:
            return total
        term = term * factor / ((b + j) * (j + 1)) * z
        # Kahan-compensated accumulation
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        biggest = max(biggest, abs(term))
        if j > abs(z) and abs(term) <= 1e-17 * abs(total):
            return total
    raise SpecialFunctionError("Kummer series did not converge")


def _check_b(b):
    b = complex(b)
    if b.imag == 0 and b.real <= 0 and b.real == int(b.real):
        raise SpecialFunctionError(f"b = {b.real:g} is a pole of 1F1")
    return b


def hypergeometric_1f1(a, b, z):
    """Kummer's confluent hypergeometric function 1F1(a; b; z).

    Negative real parts of z are handled through Kummer's transformation
    1F1(a; b; z) = e^z 1F1(b - a; b; -z), which turns the alternating series
    into a positive one.
    """
    return hypergeometric_1f1_offset(0, a, b, z)


def hypergeometric_1f1_offset(a_int, a_eps, b, z):
    """1F1(a_int + a_eps; b; z) with the first parameter given in two parts."""
    a_int = int(a_int)
    a_eps = complex(a_eps)
    b = _check_b(b)
    z = complex(z)
    if not (np.isfinite(a_eps) and np.isfinite(b) and np.isfinite(z)):
        raise SpecialFunctionError("non-finite argument")
    if abs(z) > KUMMER_WINDOW:
        raise SpecialFunctionError(f"|z| outside validity window |z| <= {KUMMER_WINDOW:g}")
    terminating = a_eps == 0 and a_int <= 0
    if z.real < 0 and not terminating:
        # b - a = (b - a_int) - a_eps; the transformed parameter is generic
        value = np.exp(z) * _kummer_series(0, (b - a_int) - a_eps, b, -z)
    else:
        value = _kummer_series(a_int, a_eps, b, z)
    return _out(value)


def _binomial_weight(p_int, p_eps, alpha):
    # C(p + alpha, p) = (p + 1)(p + 2)...(p + alpha) / alpha!
    w = 1.0 + 0.0j
    for j in range(1, alpha + 1):
        w *= ((p_int + j) + p_eps) / j
    return w


def laguerre_general(p, alpha, x):
    """Generalized Laguerre function L_p^alpha(x) for complex degree p."""
    return laguerre_offset(0, p, alpha, x)


def laguerre_offset(p_int, p_eps, alpha, x):
    """L_p^alpha(x) with degree p = p_int + p_eps given in two parts.

    Used when p sits within a tiny complex offset of an integer: the Laguerre
    series then has one Pochhammer factor equal to -p_eps, which is kept
    exact.
    """
    alpha = _as_order(alpha)
    p_int = int(p_int)
    p_eps = complex(p_eps)
    x = float(x)
    w = _binomial_weight(p_int, p_eps, alpha)
    return w * hypergeometric_1f1_offset(-p_int, -p_eps, alpha + 1, x)


def laguerre_poly(n, alpha, x):
    """Classical generalized Laguerre polynomial by the three-term recurrence."""
    n = _as_order(n)
    alpha = _as_order(alpha)
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if n == 0:
        return _out(prev)
    cur = 1.0 + alpha - x
    for k in range(1, n):
        prev, cur = cur, ((2 * k + 1 + alpha - x) * cur - (k + alpha) * prev) / (k + 1)
    return _out(cur)


# --- Hermite ---------------------------------------------------------------

def hermite_poly(n, x):
    """Physicists' Hermite polynomial H_n(x) via H_{k+1} = 2x H_k - 2k H_{k-1}."""
    n = _as_order(n)
    if n > HERMITE_MAX_ORDER:
        raise SpecialFunctionError(f"Hermite order {n} above window n <= {HERMITE_MAX_ORDER}")
    x = np.asarray(x, dtype=float)
    h0 = np.ones_like(x)
    if n == 0:
        return _out(h0)
    h1 = 2.0 * x
    for k in range(1, n):
        h0, h1 = h1, 2.0 * x * h1 - 2.0 * k * h0
    return _out(h1)


def hermite_functions(nmax, x):
    """Orthonormal Hermite functions phi_0..phi_nmax on ``x`` (rows = order).

    phi_n(x) = (2^n n! sqrt(pi))^(-1/2) exp(-x^2/2) H_n(x), built with the
    normalized recurrence so that no factorial ever overflows.
    """
    nmax = _as_order(nmax)
    if nmax > HERMITE_MAX_ORDER:
        raise SpecialFunctionError(f"Hermite order {nmax} above window n <= {HERMITE_MAX_ORDER}")
    x = np.asarray(x, dtype=float)
    out = np.empty((nmax + 1,) + x.shape)
    out[0] = math.pi ** -0.25 * np.exp(-0.5 * x * x)
    if nmax >= 1:
        out[1] = math.sqrt(2.0) * x * out[0]
    for n in range(1, nmax):
        out[n + 1] = math.sqrt(2.0 / (n + 1)) * x * out[n] - math.sqrt(n / (n + 1)) * out[n - 1]
    return out

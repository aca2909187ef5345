import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, linalg
from numpy.polynomial import hermite as nph

from conftest import blockade_run, cavity_run
from oracles import dense_magnus_reference, one_photon_wigner
from efiber.quantum_dynamics import (BasisError, FockSpace, Generator, TruncationError,
                                     WignerAccuracyWarning, build_cavity, build_discrete,
                                     build_supermodes, cavity_regime, check_hermitian,
                                     classify_ratio, continuum_grid, driving_terms, evolve,
                                     evolve_auto, g2_zero, hermite_drive, kgrid_oracle,
                                     optimal_scale, poisson_cutoff, read_wigner_csv,
                                     reduce_and_wigner, reduced_density, wigner,
                                     write_wigner_csv)
from efiber.quantum_dynamics.kgrid import OracleScaleError

C_NORM = {"ContinuumIntersection": math.pi, "ContinuumTangency": 4 * math.sqrt(math.pi) / 3}


# --- supermode bases --------------------------------------------------------------

def test_optimal_scales():
    assert optimal_scale("ContinuumIntersection")[0] == pytest.approx(1.40, abs=0.03)
    assert optimal_scale("ContinuumTangency")[0] == pytest.approx(math.sqrt(math.sqrt(3) / 2), abs=0.02)


@pytest.mark.parametrize("kind", ["ContinuumIntersection", "ContinuumTangency"])
def test_gram_identity(kind):
    b = build_supermodes(kind, M=6, gQ=1.0)
    assert np.max(np.abs(b.gram() - np.eye(6))) < 1e-8
    # w_0 is the first generator
    assert b.coeffs[0, 0] > 0 and np.allclose(b.coeffs[0, 1:], 0)


def test_cavity_kronecker():
    b = build_cavity(1, 5, 1.0)
    assert b.vectors[0] == pytest.approx(np.eye(5)[2])
    assert b.meta["mode_index"][0] == 0
    with pytest.raises(BasisError):
        build_cavity(0, 5, 1.0)
    with pytest.raises(BasisError):
        build_cavity(1, 4, 1.0)


# --- drives -----------------------------------------------------------------------

def _hermite_fn(n, y):
    c = np.zeros(n + 1)
    c[n] = 1
    return nph.hermval(y, c) * np.exp(-y * y / 2) / math.sqrt(2 ** n * math.factorial(n) * math.sqrt(math.pi))


def _w0_integral(kind, tau):
    """int dx sinc(D(x)) exp(2 i tau D(x)) by Fourier-weighted quadrature."""
    if kind == "ContinuumIntersection":
        f = lambda x: 1.0 / x
        re = sum(integrate.quad(f, 1.0, np.inf, weight="sin", wvar=w)[0] * 0.5
                 for w in (1 + 2 * tau, 1 - 2 * tau))
        re += integrate.quad(lambda x: math.sin(x) * math.cos(2 * tau * x) / x, 0, 1.0)[0]
        return 2 * re
    # u = x^2: 2 int_0^inf du/(2 sqrt u) sin(u)/u exp(2 i tau u)
    g = lambda u: u ** -1.5
    re = sum(integrate.quad(g, 1.0, np.inf, weight="sin", wvar=w)[0] * 0.5 for w in (1 + 2 * tau, 1 - 2 * tau))
    im = sum(s * integrate.quad(g, 1.0, np.inf, weight="cos", wvar=w)[0] * 0.5
             for s, w in ((1, 1 - 2 * tau), (-1, 1 + 2 * tau)))
    # near zero substitute u = s^2
    re += integrate.quad(lambda s: 2 * math.sin(s * s) * math.cos(2 * tau * s * s) / (s * s), 0, 1,
                         epsabs=1e-13)[0]
    im += integrate.quad(lambda s: 2 * math.sin(s * s) * math.sin(2 * tau * s * s) / (s * s), 0, 1,
                         epsabs=1e-13)[0]
    return re + 1j * im


def _hermite_integral(kind, n, tau, sp):
    X = sp * (math.sqrt(2 * n + 1) + 14)
    D = (lambda x: x) if kind == "ContinuumIntersection" else (lambda x: x * x)
    f = lambda x: _hermite_fn(n, x / sp) / math.sqrt(sp)
    re = integrate.quad(lambda x: f(x) * math.cos(2 * tau * D(x)), -X, X, limit=400, epsabs=1e-13)[0]
    im = integrate.quad(lambda x: f(x) * math.sin(2 * tau * D(x)), -X, X, limit=400, epsabs=1e-13)[0]
    return re + 1j * im


@pytest.mark.parametrize("kind", ["ContinuumIntersection", "ContinuumTangency"])
def test_drives_against_quadrature(kind):
    gQ = 1.3
    b = build_supermodes(kind, M=4, gQ=gQ)
    rng = np.random.default_rng(5)
    C = C_NORM[kind]
    for tau in rng.uniform(-0.45, 0.45, 20):
        gen = [gQ / C * _w0_integral(kind, tau)]
        gen += [gQ / math.sqrt(C) * _hermite_integral(kind, n, tau, b.sigma) for n in b.hermite_orders]
        ref = b.coeffs @ np.array(gen)
        got = driving_terms(b, tau)
        assert np.max(np.abs(got - ref)) < 1e-6 * gQ


@pytest.mark.parametrize("kind", ["ContinuumIntersection", "ContinuumTangency"])
def test_drive_accumulation(kind):
    gQ = 0.8
    b = build_supermodes(kind, M=5, gQ=gQ)
    x, w = np.polynomial.legendre.leggauss(400)
    tau = 0.5 * x
    S = driving_terms(b, tau) @ (0.5 * w)
    assert abs(S[0] - gQ) < 1e-6
    assert np.max(np.abs(S[1:])) < 1e-6


def test_tangency_odd_drives_vanish():
    tau = np.linspace(-0.5, 0.5, 11)
    for n in (1, 3, 5):
        assert np.all(hermite_drive("ContinuumTangency", n, tau, 0.93) == 0)


def test_drives_zero_outside_window():
    b = build_supermodes("ContinuumIntersection", M=3)
    assert np.all(driving_terms(b, [-0.7, 0.51]) == 0)


def test_cavity_drive_closed_form():
    b = build_cavity(3, 5, 0.7)
    tau = 0.21
    S = driving_terms(b, tau)
    j = b.meta["mode_index"]
    assert np.allclose(S, 0.7 * np.exp(1j * 2 * math.pi * 3 * j * tau), atol=1e-14)


# --- generator and evolution --------------------------------------------------------

def test_generator_hermitian():
    b = build_supermodes("ContinuumTangency", M=3, gQ=1.0, kappaT=2.0)
    gen = Generator(FockSpace(3, 4), b)
    for t in (-0.5, -0.1, 0.3):
        H = gen.matrix(t).toarray()
        assert np.max(np.abs(H - H.conj().T)) < 1e-14
        check_hermitian(gen.matrix(t))


@pytest.mark.parametrize("g", [0.5, math.pi / 2])
def test_linear_closure(g):
    b = build_supermodes("ContinuumIntersection", M=3, gQ=g)
    tr = evolve(b, poisson_cutoff(g), n_snapshots=11)
    coh = tr.space.coherent([-1j * g, 0, 0])
    fid = abs(np.vdot(coh, tr.final)) ** 2 / np.vdot(coh, coh).real
    assert fid > 1 - 1e-6
    assert tr.N[-1] == pytest.approx(g * g, abs=1e-6)
    assert tr.g2[-1] == pytest.approx(1.0, abs=1e-6)
    assert tr.norm_drift < 1e-9
    assert np.allclose(tr.N, tr.populations.sum(axis=1), atol=1e-9)


@pytest.mark.parametrize("start", ["vacuum", "mixed"])
def test_dense_propagator_oracle(start):
    b = build_supermodes("ContinuumTangency", M=2, gQ=1.1, kappaT=1.7)
    space = FockSpace(2, 3)
    if start == "vacuum":
        psi0 = space.vacuum()
    else:
        rng = np.random.default_rng(2)
        psi0 = rng.normal(size=space.dim) + 1j * rng.normal(size=space.dim)
        psi0[space.total == 3] = 0
        psi0 /= np.linalg.norm(psi0)
    tr = evolve(b, 3, state0=psi0, n_snapshots=3, leakage_limit=1.0)
    ref = dense_magnus_reference(b, space, psi0)
    assert 1 - abs(np.vdot(ref, tr.final)) ** 2 < 1e-8


def test_custom_drive_against_dense():
    b = build_supermodes("ContinuumIntersection", M=2, gQ=1.0, kappaT=0.9)
    drive = lambda t: np.array([np.cos(3 * t) + 0.5j, 0.4 * np.sin(5 * t)]) * (abs(t) <= 0.5)
    tr = evolve(b, 3, n_snapshots=3, drive=drive, leakage_limit=1.0)
    space = FockSpace(2, 3)
    ref = dense_magnus_reference(b, space, space.vacuum(), drive=drive)
    assert 1 - abs(np.vdot(ref, tr.final)) ** 2 < 1e-8


def test_truncation_error():
    b = build_supermodes("ContinuumIntersection", M=2, gQ=2.0)
    with pytest.raises(TruncationError):
        evolve(b, 2, n_snapshots=3)


def test_evolve_auto_picks_cutoff():
    b = build_supermodes("ContinuumIntersection", M=2, gQ=1.0)
    tr = evolve_auto(b, n_snapshots=3)
    assert tr.leakage < 1e-4
    assert tr.meta["N_max"] >= 3


# --- k-grid oracle ------------------------------------------------------------------

@pytest.mark.parametrize("kappaT", [0.0, 2 * math.pi])
def test_supermodes_match_kgrid(kappaT):
    d, w = continuum_grid("ContinuumTangency", 8, 1.0, 3.0)
    ref = kgrid_oracle(d, w, kappaT, 4, n_snapshots=5)
    b = build_discrete(d, w, kappaT=kappaT)
    # same truncation on both sides; the comparison is of the truncated dynamics
    tr = evolve(b, 4, n_snapshots=5, leakage_limit=1.0)
    assert tr.N[-1] == pytest.approx(ref.N[-1], rel=1e-3)
    assert np.allclose(tr.N, ref.N, rtol=1e-3, atol=1e-9)
    assert tr.g2[-1] == pytest.approx(ref.g2[-1], rel=1e-3)


def test_kgrid_blockade_saturates():
    d, w = continuum_grid("ContinuumTangency", 6, math.pi / 2, 2.5)
    ref = kgrid_oracle(d, w, 8 * math.pi, 4, n_snapshots=5)
    assert ref.N.max() <= 1.1


def test_kgrid_zero_drive_identity():
    ref = kgrid_oracle(np.linspace(-3, 3, 5), np.zeros(5), 1.0, 3, n_snapshots=4)
    assert np.allclose(np.abs(ref.states[:, 0]), 1.0)
    with pytest.raises(OracleScaleError):
        kgrid_oracle(np.zeros(13), np.ones(13), 0.0, 2)


# --- observables ---------------------------------------------------------------------

def test_g2_examples():
    s = FockSpace(2, 4)
    assert g2_zero(s, s.fock((1, 0))) == 0.0
    assert g2_zero(s, s.fock((2, 0))) == 0.5
    assert math.isnan(g2_zero(s, s.vacuum()))
    c = FockSpace(1, 40).coherent([1.2])
    assert g2_zero(FockSpace(1, 40), c) == pytest.approx(1.0, abs=1e-9)


def test_wigner_examples():
    s = FockSpace(2, 4)
    axis = np.linspace(-2, 2, 21)
    with pytest.warns(WignerAccuracyWarning):
        rho, W = reduce_and_wigner(s, s.vacuum(), 0, axis, axis)
    assert W[10, 10] == pytest.approx(2 / math.pi, rel=1e-14)
    rho, W = reduce_and_wigner(s, s.fock((1, 0)), 0, axis[5:16], axis[5:16])
    A = axis[5:16][None, :] + 1j * axis[5:16][:, None]
    assert np.max(np.abs(W - one_photon_wigner(A))) < 1e-6
    assert W[5, 5] == pytest.approx(-2 / math.pi, rel=1e-14)


def test_wigner_normalization():
    rho = np.zeros((4, 4))
    rho[1, 1] = 1.0
    x = np.linspace(-4, 4, 161)
    with pytest.warns(WignerAccuracyWarning):
        W = wigner(rho, x[None, :] + 1j * x[:, None])
    assert integrate.simpson(integrate.simpson(W, x=x), x=x) == pytest.approx(1.0, abs=1e-3)


def test_reduced_density_trace():
    s = FockSpace(3, 3)
    rng = np.random.default_rng(1)
    psi = rng.normal(size=s.dim) + 1j * rng.normal(size=s.dim)
    psi /= np.linalg.norm(psi)
    for m in range(3):
        rho = reduced_density(s, psi, m)
        assert np.trace(rho).real == pytest.approx(1.0, abs=1e-14)
        assert np.allclose(rho, rho.conj().T)


def test_wigner_csv_roundtrip(tmp_path):
    axis = np.linspace(-1, 1, 5)
    W = np.arange(25.0).reshape(5, 5) / 7
    path = tmp_path / "w.csv"
    write_wigner_csv(str(path), axis, axis, W)
    re, im, W2 = read_wigner_csv(str(path))
    assert np.array_equal(W2, W) and np.array_equal(re, axis)


# --- cavity regimes ---------------------------------------------------------------------

def test_cavity_classification():
    v = 1e8
    L = 0.01
    D = math.pi * v / L * (1 - 0.5)
    assert cavity_regime(v, 0.5 * v, L, 0.5 * D).classification == "Cascade"
    assert cavity_regime(v, 0.5 * v, L, 0.75 * D).classification == "MaximalDetuning"
    assert cavity_regime(v, 0.5 * v, L, 0.6 * D).classification == "Intermediate"
    deg = cavity_regime(v, v, L, 1e9)
    assert deg.classification == "Degenerate" and deg.fsr == 0
    assert classify_ratio(2.004) == "Cascade"


def test_jaynes_cummings_rabi_cycle():
    basis, tr = cavity_run(1.5, math.pi)
    peaks = tr.populations.max(axis=0)
    order = np.argsort(-peaks)
    assert peaks[order[1]] < 0.15 * peaks[order[0]]
    assert tr.N.max() > 0.9
    assert tr.N[-1] < 0.1


def test_cascade_populates_consecutive_modes():
    basis, tr = cavity_run(1.0, math.pi / 2)
    j = basis.meta["mode_index"]
    peaks = dict(zip(j.tolist(), tr.populations.max(axis=0)))
    lit = sorted(k for k, v in peaks.items() if v > 0.1)
    runs = [lit[i:i + 3] for i in range(len(lit) - 2)]
    assert any(r[2] - r[0] == 2 for r in runs)


# --- blockade ----------------------------------------------------------------------------

def test_tangency_blockade():
    basis, tr = blockade_run()
    assert tr.g2[-1] < 0.2
    pops = tr.populations[-1]
    assert np.all(pops[0] > pops[1:])
    axis = np.linspace(-1.5, 1.5, 31)
    rho, W = reduce_and_wigner(tr.space, tr.final, 0, axis, axis)
    assert W[15, 15] < 0
    A = axis[None, :] + 1j * axis[:, None]
    assert np.corrcoef(W.ravel(), one_photon_wigner(A).ravel())[0, 1] > 0.9
    assert tr.norm_drift < 1e-9


@settings(max_examples=20, deadline=None)
@given(st.floats(0.05, 1.2), st.floats(0.0, 10.0))
def test_property_trajectory_invariants(g, kT):
    b = build_supermodes("ContinuumIntersection", M=2, gQ=g, kappaT=kT)
    tr = evolve_auto(b, n_snapshots=5)
    assert tr.norm_drift < 1e-9
    assert np.allclose(tr.N, tr.populations.sum(axis=1), atol=1e-9)
    assert np.all(tr.g2[1:] >= 0)

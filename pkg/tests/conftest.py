import functools
import os
import sys
import tempfile
from types import SimpleNamespace

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from efiber.cli_runner import pipeline  # noqa: E402
from efiber.cli_runner.config import load_preset  # noqa: E402

C = 299792458.0

# (criterion, passed, detail) lines filled by test_acceptance and echoed in the summary
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n, ok, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


@functools.lru_cache(maxsize=None)
def scenario(name):
    """Coupling-stage results of a bundled preset, shared across test modules."""
    cfg, defaults = load_preset(name)
    out = tempfile.mkdtemp(prefix=f"efiber_{name}_")
    ctx, result = pipeline.run_scenario(cfg, out, "coupling", defaults)
    photon = pipeline.stage_bands(cfg, ctx)
    trap = pipeline.stage_trap(cfg, ctx)
    te = pipeline._pump_mode(cfg)
    return SimpleNamespace(cfg=cfg, out=out, result=result, trap=trap, te=te, **photon)


@pytest.fixture(scope="session")
def uniform():
    return scenario("uniform_fig2")


@pytest.fixture(scope="session")
def bragg():
    return scenario("bragg_fig3")


@functools.lru_cache(maxsize=None)
def blockade_run(M=6):
    """Tangency supermodes with delta_NL = 16 pi and |g_Q| = pi/2."""
    import math
    from efiber.quantum_dynamics import build_supermodes, evolve_auto
    basis = build_supermodes("ContinuumTangency", M=M, gQ=math.pi / 2, kappaT=8 * math.pi)
    return basis, evolve_auto(basis)


@functools.lru_cache(maxsize=None)
def cavity_run(ratio, gQ, m=-10, n_modes=11):
    """Kronecker cavity run with 2 kappa = ratio * Delta."""
    import math
    from efiber.quantum_dynamics import build_cavity, evolve_auto
    basis = build_cavity(m, n_modes, gQ, ratio * math.pi * abs(m))
    return basis, evolve_auto(basis)

"""Shared fixtures: seeded instances and their expensive pipeline stages, computed once per session."""

from __future__ import annotations

import sys
import time
from importlib import resources
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from pencil_monodromy.cli import load_spec  # noqa: E402
from pencil_monodromy.fiber import build_fiber  # noqa: E402
from pencil_monodromy.genericity import check_genericity  # noqa: E402
from pencil_monodromy.monodromy import choose_base_value, compute_monodromy  # noqa: E402
from pencil_monodromy.numsolve import TrackerConfig  # noqa: E402

CRITERIA: dict[int, tuple[bool, str]] = {}


def data_path(name: str) -> Path:
    return Path(str(resources.files("pencil_monodromy") / "data" / name))


class Timed:
    """Value computed once with its wall-clock duration."""

    def __init__(self, fn):
        t0 = time.perf_counter()
        self.value = fn()
        self.seconds = time.perf_counter() - t0


def run_instance(spec, seed: int = 0, tol_scale: float = 1.0):
    """Genericity, base fiber and monodromy of an instance, each timed."""
    cfg = TrackerConfig().scaled(tol_scale)
    gen = Timed(lambda: check_genericity(spec, seed))
    report, crit = gen.value
    targets = list(crit.values) + ([0.0] if 0 in crit.A else [])
    b = choose_base_value(targets, seed=seed)
    fib = Timed(lambda: build_fiber(spec, b, seed=seed * 7919, base_points=list(crit.base_points), cfg=cfg))
    mono = Timed(lambda: compute_monodromy(spec, crit, seed=seed, cfg=cfg))
    return {"report": report, "crit": crit, "gen_seconds": gen.seconds, "model": fib.value,
            "fiber_seconds": fib.seconds, "rep": mono.value, "mono_seconds": mono.seconds}


@pytest.fixture(scope="session")
def cubic_spec():
    return load_spec(data_path("cubic.json"))


@pytest.fixture(scope="session")
def conic_spec():
    return load_spec(data_path("conic.json"))


@pytest.fixture(scope="session")
def cubic_root_spec():
    return load_spec(data_path("cubic_root.json"))


@pytest.fixture(scope="session")
def cubic_generic(cubic_spec):
    t = Timed(lambda: check_genericity(cubic_spec, 0))
    report, crit = t.value
    return {"report": report, "crit": crit, "seconds": t.seconds}


@pytest.fixture(scope="session")
def cubic_run(cubic_spec):
    return run_instance(cubic_spec, seed=0)


@pytest.fixture(scope="session")
def conic_run(conic_spec):
    return run_instance(conic_spec, seed=0)


@pytest.fixture(scope="session")
def cubic_root_run(cubic_root_spec):
    return run_instance(cubic_root_spec, seed=0)


@pytest.fixture(scope="session")
def criteria():
    return CRITERIA


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(CRITERIA):
        ok, msg = CRITERIA[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {msg}")

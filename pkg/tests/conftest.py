from functools import lru_cache

import pytest
from hypothesis import HealthCheck, settings

from hubbard_quench.lattice import build_lattice, momentum_grid, thermodynamic_grid

settings.register_profile(
    "repo", derandomize=True, deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repo")

ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def report(number: int, ok: bool, detail: str) -> None:
    """Record and print the outcome of an acceptance criterion."""
    ACCEPTANCE[number] = (bool(ok), detail)
    print(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


@lru_cache(maxsize=None)
def thermo(D: int, n: int):
    return thermodynamic_grid(D, n)


@lru_cache(maxsize=None)
def finite(*extents: int):
    return momentum_grid(build_lattice(len(extents), extents), "finite")


@pytest.fixture(scope="session")
def grid3_64():
    return thermo(3, 64)

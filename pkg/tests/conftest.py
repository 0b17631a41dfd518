from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(0x5EED)


def unit_polydisc(rng: np.random.Generator, m: int, n: int) -> np.ndarray:
    """Uniform samples from the unit polydisc in C^n."""
    return np.sqrt(rng.uniform(size=(m, n))) * np.exp(2j * np.pi * rng.uniform(size=(m, n)))


ACCEPTANCE_LINES: list[str] = []


def record_criterion(number: int, title: str, ok: bool, elapsed: float, limit: float | None, detail: str = "") -> None:
    budget = f" (limit {limit:g} s)" if limit is not None else ""
    line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}  {elapsed:.2f} s{budget}  {detail}".rstrip()
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)

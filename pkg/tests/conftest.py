import math

import numpy as np
import pytest
from hypothesis import settings

from rsmoment.modforms import hecke_eigenforms
from rsmoment.specialfn import PrecisionContext

settings.register_profile("default", max_examples=25, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def ctx():
    return PrecisionContext(30)


@pytest.fixture(scope="session")
def delta(ctx):
    return hecke_eigenforms(12, 800, ctx)[0]


@pytest.fixture(scope="session")
def g16(ctx):
    return hecke_eigenforms(16, 800, ctx)[0]


def synthetic_hecke_lambdas(n_max: int, seed: int) -> list[float]:
    """Multiplicative lambda(n) from random Satake angles, lambda(p^e) = sin((e+1)a)/sin(a)."""
    rng = np.random.default_rng(seed)
    lam = [0.0] * (n_max + 1)
    lam[1] = 1.0
    angle = {}
    for n in range(2, n_max + 1):
        p = next(q for q in range(2, n + 1) if n % q == 0)
        m, e = n, 0
        while m % p == 0:
            m //= p
            e += 1
        if m > 1:
            lam[n] = lam[m] * lam[n // m]
            continue
        a = angle.setdefault(p, rng.uniform(0.1, math.pi - 0.1))
        lam[n] = math.sin((e + 1) * a) / math.sin(a)
    return lam[1:]


@pytest.fixture
def maass_csv(tmp_path):
    def write(records, precision="1e-12", name="maass.csv"):
        lines = [f"# precision: {precision}", "# source: synthetic Satake parameters", "t,parity,n_max"]
        for t, parity, lam in records:
            lines.append(f"{t!r},{parity},{len(lam)}")
            lines.append(",".join(repr(x) for x in lam))
        p = tmp_path / name
        p.write_text("\n".join(lines) + "\n")
        return p

    return write


_CRITERIA: dict = {}


@pytest.fixture(scope="session")
def criterion_log():
    """Record one summary line per acceptance criterion; printed at the end of the run."""

    def log(number: int, ok: bool, detail: str) -> None:
        _CRITERIA[number] = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(_CRITERIA[number])

    return log


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_CRITERIA):
            terminalreporter.write_line(_CRITERIA[n])

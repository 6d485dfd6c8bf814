import numpy as np
import pytest

from vrs_sim.model import QedParams


def random_params(rng: np.random.Generator, low=0.1, high=100.0, **overrides) -> QedParams:
    """Random valid parameter set with rates drawn log-uniformly in [low, high]."""

    def rate():
        return float(np.exp(rng.uniform(np.log(low), np.log(high))))

    kw = dict(
        omega_a=float(rng.uniform(-50, 50)),
        omega_c=float(rng.uniform(-50, 50)),
        g_tilde=rate(),
        theta_a=float(rng.uniform(0, 90)),
        phi_qd=float(rng.uniform(0, 180)),
        phi_sign=int(rng.choice([1, -1])),
        beta=float(rng.uniform(-180, 180)),
        gamma=rate(),
        kappa=rate(),
        gamma_ph=rate(),
        p_a=rate(),
        p_c=0.0,
    )
    kw.update(overrides)
    return QedParams(**kw)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line per acceptance criterion.

    Usage: ``with criterion("3", "description") as note: ...; note(detail)``.
    """
    from contextlib import contextmanager

    @contextmanager
    def record(number: str, title: str):
        details: list[str] = []
        try:
            yield details.append
        except BaseException:
            line = f"FAIL criterion {number}: {title} [{'; '.join(details)}]"
            ACCEPTANCE_LINES.append(line)
            print(line)
            raise
        line = f"PASS criterion {number}: {title} [{'; '.join(details)}]"
        ACCEPTANCE_LINES.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)

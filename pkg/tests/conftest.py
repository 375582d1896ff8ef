import json
from pathlib import Path

import pytest

from abelreg.functions import Interval

REFERENCE = json.loads(Path(__file__).with_name("reference_values.json").read_text())

#: one line per acceptance criterion, filled by test_acceptance.py
ACCEPTANCE_LINES: dict[int, str] = {}


def reference(name: str) -> dict[str, float]:
    return {k: float(v) for k, v in REFERENCE[name].items()}


@pytest.fixture(scope="session")
def unit():
    return Interval(0.0, 1.0)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])


def random_manufactured(rng, interval=None, sigma_shift=None):
    """A manufactured problem with random admissible coefficients and exponents.

    With ``sigma_shift`` set, the left exponent is ``mu + sigma_shift + kappa``
    with ``kappa`` large enough that the lower bound ``(1 + mu)/2`` holds for
    every ``sigma_shift >= 0.1``; the vanishing order then tracks the shift.
    """
    from abelreg.oracle import manufacture_solution

    interval = interval or Interval(0.0, 1.0)
    alpha = float(rng.uniform(0.15, 0.85))
    mu = float(rng.uniform(0.15, 0.85))
    low = 0.5 * (1.0 + mu)
    if sigma_shift is None:
        q_a = float(rng.uniform(low + 0.02, low + 0.4))
    else:
        kappa = max(0.1, 0.5 * (1.0 - mu) - 0.08)
        q_a = mu + sigma_shift + kappa
    q_b = float(rng.uniform(low + 0.02, low + 0.4))
    coefficients = [1.0, *rng.uniform(-0.5, 0.5, 2)]
    return manufacture_solution(interval, mu, q_a, q_b, coefficients, alpha=alpha)

"""Endpoint-exponent fits and residual diagnostics.

An endpoint exponent is measured as the least-squares slope of
``log|f|`` against ``log(distance)`` on a geometric ladder of distances
``(b - a) * 10**(-k/4)``. The ladder stops at ``k = 20`` so that no sample
sits closer than ``1e-5 (b - a)`` to the endpoint.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Literal

import numpy as np

from abelreg.functions import EndpointPowerFunction

Endpoint = Literal["left", "right"]
Verdict = Literal["pass", "fail", "inconclusive"]

#: Largest allowed gap between fitted and predicted exponents.
EXPONENT_TOL = 0.05
#: Smallest acceptable coefficient of determination.
MIN_R2 = 0.99
#: Margin above -1 required for the integrability signature.
H_STAR_MARGIN = 0.02

_K_LAST = 20


@dataclass(frozen=True)
class RegularityReport:
    endpoint: Endpoint
    fitted_exponent: float
    predicted_exponent: float
    fit_r2: float
    window: tuple[float, float]
    verdict: Verdict

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"


@dataclass(frozen=True)
class HStarCheck:
    """Left and right reports for the integrable-singularity signature."""

    left: RegularityReport
    right: RegularityReport

    @property
    def passed(self) -> bool:
        return self.left.passed and self.right.passed

    def __iter__(self) -> Iterator[RegularityReport]:
        yield self.left
        yield self.right


def sample_distances(length: float, window_fraction: float = 0.01) -> np.ndarray:
    """Geometric distances ``length * 10**(-k/4)`` not exceeding the window."""
    if not 0.0 < window_fraction <= 0.2:
        raise ValueError(f"window fraction must lie in (0, 0.2], got {window_fraction}")
    k_first = int(np.ceil(-4.0 * np.log10(window_fraction) - 1e-9))
    k = np.arange(k_first, _K_LAST + 1)
    return length * 10.0 ** (-k / 4.0)


def _log_fit(dist: np.ndarray, vals: np.ndarray) -> tuple[float, float]:
    x, y = np.log(dist), np.log(vals)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum(resid**2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0.0 else (1.0 if ss_res == 0.0 else 0.0)
    return float(slope), float(min(1.0, max(0.0, r2)))


def fit_endpoint_exponent(
    f: EndpointPowerFunction,
    endpoint: Endpoint = "left",
    window_fraction: float = 0.01,
    predicted: float | None = None,
) -> RegularityReport:
    """Fit ``|f(x)| ~ C dist**p`` near one endpoint.

    ``predicted`` defaults to the declared exponent of ``f`` at that end.
    """
    if endpoint not in ("left", "right"):
        raise ValueError(f"endpoint must be 'left' or 'right', got {endpoint!r}")
    interval = f.interval
    dist = sample_distances(interval.length, window_fraction)
    if predicted is None:
        predicted = f.p_a if endpoint == "left" else f.p_b
    x = interval.a + dist if endpoint == "left" else interval.b - dist
    window = (float(dist.min()), float(dist.max()))

    vals = np.abs(f(x)) if not f.is_zero else np.zeros_like(x)
    scale = float(np.max(vals)) if vals.size else 0.0
    if not np.all(np.isfinite(vals)) or scale == 0.0 or np.any(vals <= 1e-300):
        return RegularityReport(endpoint, float("nan"), float(predicted), 0.0, window, "inconclusive")

    slope, r2 = _log_fit(dist, vals)
    ok = abs(slope - predicted) <= EXPONENT_TOL and r2 >= MIN_R2
    return RegularityReport(endpoint, slope, float(predicted), r2, window, "pass" if ok else "fail")


def verify_H_star(f: EndpointPowerFunction, window_fraction: float = 0.01) -> HStarCheck:
    """Check that both fitted endpoint exponents exceed ``-1 + 0.02``.

    Each report's verdict is about integrability only; its
    ``predicted_exponent`` holds the threshold.
    """
    threshold = -1.0 + H_STAR_MARGIN
    reports = []
    for endpoint in ("left", "right"):
        rep = fit_endpoint_exponent(f, endpoint, window_fraction, predicted=threshold)
        if rep.verdict != "inconclusive":
            verdict: Verdict = "pass" if rep.fitted_exponent > threshold else "fail"
            rep = RegularityReport(
                rep.endpoint, rep.fitted_exponent, threshold, rep.fit_r2, rep.window, verdict
            )
        reports.append(rep)
    return HStarCheck(*reports)


def fitted_constant(deviations: np.ndarray) -> tuple[float, float]:
    """Mean of ``deviations`` and the largest departure from it."""
    deviations = np.asarray(deviations, dtype=float)
    c_hat = float(np.mean(deviations))
    return c_hat, float(np.max(np.abs(deviations - c_hat)))


def residual_report(bundle) -> tuple[float, float]:
    """Fitted additive constant and the probe deviation around it.

    Recomputes the forward map of ``bundle.psi`` at the probe points and
    compares it with the integrated right-hand side.
    """
    from abelreg.abelcore import forward_deviation

    spec = bundle.spec
    return fitted_constant(forward_deviation(bundle.psi, spec, spec.interval.probes()))

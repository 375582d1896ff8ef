r"""Closed-form solution of the two-sided Abel equation.

The equation, in Riemann-Liouville normalization, reads

.. math::

    \alpha\, {}_aD_x^{-(1-\mu)}\psi + \beta\, {}_xD_b^{-(1-\mu)}\psi
        = {}_aD_x^{-1} f + c,
    \qquad \alpha + \beta = 1,\ 0 < \mu < 1.

With :math:`A = \alpha - \beta\cos\mu\pi`, :math:`B = \beta\sin\mu\pi` and
the angle :math:`\theta` of :math:`(A - iB)/(A + iB)`, the solution is
:math:`\psi = {}_aD_x^{-\mu} J` where

.. math::

    J = \frac{A f - B\, S_{e_a, e_b} f}{A^2 + B^2}

for one of four exponent pairs :math:`(e_a, e_b)`. Writing
:math:`J = {}_aD_x^{-\sigma} K_\sigma` exposes the regularity gain, and the
pair is chosen from :math:`\sigma` so that the weighted operator preserves
the relevant Hölder class.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import gamma

from abelreg.errors import (
    AbelError,
    ConsistencyError,
    DegenerateCoefficientsError,
    DomainError,
    NonIntegrableError,
    RegularityViolation,
    StageError,
    ValidationError,
)
from abelreg.fracops import (
    definite_integral,
    left_frac_derivative,
    left_frac_integral,
    right_frac_derivative,
    right_frac_integral,
)
from abelreg.functions import EndpointPowerFunction, Interval, linear_combination, power
from abelreg.regprobe import fit_endpoint_exponent, fitted_constant
from abelreg.singular import WeightedKernel, singular_transform

#: Admissible range of ``mu``; outside it the quadrature exponents degenerate.
MU_MIN, MU_MAX = 1e-3, 1.0 - 1e-3
#: Slack used for the case-table comparisons, which sit on exact boundaries
#: for symmetric coefficients.
CASE_TOL = 1e-12
#: Relative probe deviation above which ``solve`` warns.
RESIDUAL_WARN = 1e-6


# {{{ data


@dataclass(frozen=True)
class ProblemSpec:
    interval: Interval
    alpha: float
    beta: float
    mu: float
    f: EndpointPowerFunction
    c: float = 0.0

    def __post_init__(self) -> None:
        validate_coefficients(self.alpha, self.beta, self.mu)
        if self.f.interval != self.interval:
            raise ValidationError("right-hand side lives on a different interval")
        if not np.isfinite(self.c):
            raise ValidationError(f"c must be finite, got {self.c}")


@dataclass(frozen=True)
class AngleData:
    A: float
    B: float
    theta: float
    theta_norm: float


@dataclass(frozen=True)
class RepresentationChoice:
    index: int
    exp_a: float
    exp_b: float

    @classmethod
    def from_index(cls, index: int, angle: AngleData, mu: float) -> RepresentationChoice:
        tau = angle.theta_norm
        table = {
            1: (1.0 - tau, tau - mu),
            2: (1.0 - tau, tau - mu - 1.0),
            3: (-tau, tau - mu),
            4: (-tau, tau - mu - 1.0),
        }
        if index not in table:
            raise ValueError(f"representation index must be 1..4, got {index}")
        return cls(index, *table[index])

    @property
    def kernel(self) -> WeightedKernel:
        return WeightedKernel(self.exp_a, self.exp_b)


@dataclass(frozen=True)
class SolutionBundle:
    spec: ProblemSpec
    sigma: float
    angle: AngleData
    choice: RepresentationChoice
    J: EndpointPowerFunction
    K_sigma: EndpointPowerFunction
    psi: EndpointPowerFunction
    residual: float
    c_hat: float = 0.0


# }}}


def validate_coefficients(alpha: float, beta: float, mu: float) -> None:
    for name, val in (("alpha", alpha), ("beta", beta), ("mu", mu)):
        if not np.isfinite(val):
            raise ValidationError(f"{name} must be finite, got {val}")
    if not 0.0 < alpha < 1.0:
        raise ValidationError(f"alpha must lie in (0, 1), got {alpha}")
    if not 0.0 < beta < 1.0:
        raise ValidationError(f"beta must lie in (0, 1), got {beta}")
    if abs(alpha + beta - 1.0) > 1e-12:
        raise ValidationError(f"alpha + beta must equal 1, got {alpha + beta!r}")
    if not MU_MIN <= mu <= MU_MAX:
        raise ValidationError(f"mu must lie in [{MU_MIN}, {MU_MAX}], got {mu}")


def compute_angle(alpha: float, beta: float, mu: float) -> AngleData:
    """Coefficients ``A``, ``B`` and the angle of ``(A - iB)/(A + iB)``."""
    validate_coefficients(alpha, beta, mu)
    big_a = alpha - beta * np.cos(mu * np.pi)
    big_b = beta * np.sin(mu * np.pi)
    # B > 0 puts atan2 in (0, pi), hence theta in (0, 2 pi)
    theta = 2.0 * np.pi - 2.0 * np.arctan2(big_b, big_a)
    tau = theta / (2.0 * np.pi)
    if not mu < tau < 1.0:
        raise ConsistencyError(f"angle {theta} outside (2 pi mu, 2 pi) for mu={mu}")
    return AngleData(float(big_a), float(big_b), float(theta), float(tau))


def _check_sigma(sigma: float) -> float:
    sigma = float(sigma)
    if not 0.0 < sigma < 1.0:
        raise DomainError(f"sigma must lie in (0, 1), got {sigma}")
    return sigma


def select_representation(sigma: float, angle: AngleData, mu: float) -> RepresentationChoice:
    """Pick the representation whose exponents lie in ``(sigma - 1, sigma]``."""
    sigma = _check_sigma(sigma)
    tau = angle.theta_norm
    high_a = sigma + tau >= 1.0 - CASE_TOL
    high_b = sigma + mu >= tau - CASE_TOL
    index = {(True, True): 1, (True, False): 2, (False, True): 3, (False, False): 4}[
        (high_a, high_b)
    ]
    return RepresentationChoice.from_index(index, angle, mu)


def default_representation(angle: AngleData, mu: float) -> RepresentationChoice:
    """Representation used when no ``sigma`` is given.

    Index 1 when it is admissible just above ``sigma = theta/2pi - mu``,
    index 4 otherwise.
    """
    sigma = min(angle.theta_norm - mu + 1e-9, 1.0 - 1e-9)
    choice = select_representation(sigma, angle, mu)
    return choice if choice.index == 1 else RepresentationChoice.from_index(4, angle, mu)


# {{{ operators


def apply_forward(u: EndpointPowerFunction, spec: ProblemSpec) -> EndpointPowerFunction:
    """``alpha aD^{-(1-mu)} u + beta xD^{-(1-mu)} u``."""
    order = 1.0 - spec.mu
    return linear_combination(
        [spec.alpha, spec.beta], [left_frac_integral(u, order), right_frac_integral(u, order)]
    )


def apply_forward_kernel(u: EndpointPowerFunction, spec: ProblemSpec) -> EndpointPowerFunction:
    """Kernel form ``alpha int_a^x u (x-t)^{-mu} + beta int_x^b u (t-x)^{-mu}``."""
    return gamma(1.0 - spec.mu) * apply_forward(u, spec)


def forward_deviation(
    psi: EndpointPowerFunction, spec: ProblemSpec, x: np.ndarray
) -> np.ndarray:
    """``forward(psi) - aD^{-1} f`` at ``x``; constant in ``x`` for a solution."""
    lhs = apply_forward(psi, spec)(x)
    rhs = left_frac_integral(spec.f, 1.0)(x)
    return lhs - rhs


def homogeneous_term(interval: Interval, kernel: WeightedKernel) -> EndpointPowerFunction:
    """``(x - a)**e_a (b - x)**e_b``, the kernel's own fundamental function."""
    return power(interval, kernel.nu_a, kernel.nu_b)


def boundary_constant(
    F: EndpointPowerFunction, c1: float, c2: float, kernel: WeightedKernel
) -> float:
    """Homogeneous coefficient that removes the ``(b - x)**e_b`` endpoint term.

    Adding ``C (x-a)**e_a (b-x)**e_b`` with this ``C`` to the particular
    solution makes it behave like ``(b - x)**(e_b + 1)`` at ``b``, which is
    the condition that singles out the solution vanishing there.
    """
    weighted = F.times_power(-kernel.nu_a, -kernel.nu_b - 1.0)
    moment = definite_integral(weighted)
    return -c2 * moment / (np.pi * (c1 * c1 + c2 * c2))


def solve_dominant(
    F: EndpointPowerFunction,
    c1: float,
    c2: float,
    choice: RepresentationChoice | WeightedKernel,
    homogeneous: float = 0.0,
) -> EndpointPowerFunction:
    r"""Solution of ``c1 psi + (c2/pi) PV int psi(t)/(t-x) dt = F``.

    .. math::

        \psi = \frac{c_1 F - c_2\, S_{e_a,e_b} F}{c_1^2 + c_2^2}
            + C (x-a)^{e_a} (b-x)^{e_b}

    with ``C = homogeneous``. The exponents come from ``choice``.
    """
    c1, c2 = float(c1), float(c2)
    if c1 == 0.0 and c2 == 0.0:
        raise DegenerateCoefficientsError("c1 and c2 both vanish")
    kernel = choice.kernel if isinstance(choice, RepresentationChoice) else choice
    norm = c1 * c1 + c2 * c2
    if c2 == 0.0:
        return F.scale(1.0 / c1)

    terms = [F, singular_transform(F, kernel)]
    coefs = [c1 / norm, -c2 / norm]
    if homogeneous != 0.0:
        terms.append(homogeneous_term(F.interval, kernel))
        coefs.append(float(homogeneous))
    return linear_combination(coefs, terms)


def solve_J(spec: ProblemSpec, choice: RepresentationChoice) -> EndpointPowerFunction:
    """Density ``J`` of the chosen representation, with ``psi = aD^{-mu} J``.

    For index 4 the free homogeneous multiple is fixed by
    :func:`boundary_constant`, so that ``J`` has the same ``b``-endpoint
    order as in representation 3.
    """
    angle = compute_angle(spec.alpha, spec.beta, spec.mu)
    constant = 0.0
    if choice.index == 4 and not spec.f.is_zero:
        constant = boundary_constant(spec.f, angle.A, angle.B, choice.kernel)
    return solve_dominant(spec.f, angle.A, angle.B, choice, homogeneous=constant).freeze()


def solvability_moment(spec: ProblemSpec) -> float:
    """``int (t-a)**(tau-1) (b-t)**(mu-tau) f(t) dt``.

    Representations 1, 2 and 3 coincide exactly when this vanishes, which
    is the condition for a solution vanishing at both endpoints.
    """
    angle = compute_angle(spec.alpha, spec.beta, spec.mu)
    tau = angle.theta_norm
    return definite_integral(spec.f.times_power(tau - 1.0, spec.mu - tau))


def reconstruct_psi(J: EndpointPowerFunction, mu: float) -> EndpointPowerFunction:
    """``psi = aD^{-mu} J``."""
    return left_frac_integral(J, mu)


def extract_K(J: EndpointPowerFunction, sigma: float) -> EndpointPowerFunction:
    """``K_sigma = aD^{sigma} J``, checked for integrable endpoint behaviour."""
    sigma = _check_sigma(sigma)
    try:
        K = left_frac_derivative(J, sigma).freeze()
    except NonIntegrableError as exc:
        raise RegularityViolation(f"K_sigma is not integrable: {exc}") from exc
    if not K.is_zero:
        for endpoint in ("left", "right"):
            rep = fit_endpoint_exponent(K, endpoint)
            if rep.verdict != "inconclusive" and rep.fitted_exponent <= -1.0:
                raise RegularityViolation(
                    f"K_sigma has fitted {endpoint} exponent {rep.fitted_exponent:.3f} <= -1"
                )
    return K


def holder_heuristic(f: EndpointPowerFunction, sigma: float) -> bool:
    """Rough check that ``f`` fits the class required for order ``sigma``.

    The numerator of ``f`` in that class is Hölder with exponent above
    ``sigma`` and vanishes at both endpoints, so ``f`` may grow at most like
    ``dist**(sigma - 1)``. Only endpoint fits are tested.
    """
    if f.is_zero:
        return True
    for endpoint in ("left", "right"):
        rep = fit_endpoint_exponent(f, endpoint)
        if rep.verdict != "inconclusive" and rep.fitted_exponent < sigma - 1.0 - 0.02:
            return False
    return True


# }}}


def _stage(name: str, func, *args):
    try:
        return func(*args)
    except StageError:
        raise
    except AbelError as exc:
        raise StageError(name, exc) from exc


def solve(
    spec: ProblemSpec, sigma: float, choice: RepresentationChoice | None = None
) -> SolutionBundle:
    """Run the full pipeline and report the forward residual.

    The residual is the largest probe deviation of
    ``forward(psi) - aD^{-1} f`` from its mean, the mean being the fitted
    constant ``c_hat``.
    """
    sigma = _check_sigma(sigma)
    angle = _stage("angle", compute_angle, spec.alpha, spec.beta, spec.mu)
    if choice is None:
        choice = _stage("select", select_representation, sigma, angle, spec.mu)
    if not _stage("holder", holder_heuristic, spec.f, sigma):
        warnings.warn(
            f"right-hand side looks too singular at an endpoint for sigma={sigma}",
            stacklevel=2,
        )

    J = _stage("solve_J", solve_J, spec, choice)
    K = _stage("extract_K", extract_K, J, sigma)
    psi = _stage("reconstruct", reconstruct_psi, J, spec.mu).freeze()

    x = spec.interval.probes()
    dev = _stage("residual", forward_deviation, psi, spec, x)
    c_hat, residual = fitted_constant(dev)
    scale = max(1.0, float(np.max(np.abs(dev))))
    if residual > RESIDUAL_WARN * scale:
        moment = solvability_moment(spec)
        warnings.warn(
            f"forward residual {residual:.3e} with representation {choice.index}; "
            f"the solvability moment is {moment:.3e}",
            stacklevel=2,
        )
    return SolutionBundle(spec, sigma, angle, choice, J, K, psi, residual, c_hat)


# {{{ cross-checks


def representation_spread(spec: ProblemSpec, x: np.ndarray | None = None) -> float:
    """Largest pairwise probe difference between the four ``J`` forms."""
    angle = compute_angle(spec.alpha, spec.beta, spec.mu)
    if x is None:
        x = spec.interval.probes()
    vals = [
        solve_J(spec, RepresentationChoice.from_index(i, angle, spec.mu))(x) for i in range(1, 5)
    ]
    return float(max(np.max(np.abs(u - w)) for i, u in enumerate(vals) for w in vals[i + 1 :]))


def forward_consistency(spec: ProblemSpec, choice: RepresentationChoice) -> float:
    """Probe standard deviation of ``forward(psi) - aD^{-1} f`` over its range."""
    psi = reconstruct_psi(solve_J(spec, choice), spec.mu)
    dev = forward_deviation(psi, spec, spec.interval.probes())
    spread = float(np.ptp(dev))
    scale = max(spread, float(np.max(np.abs(dev))), 1e-300)
    return float(np.std(dev)) / scale


def ctilde(angle: AngleData, mu: float) -> float:
    """``cos(mu pi) + sin(mu pi) cot(pi - theta/2)``."""
    return float(np.cos(mu * np.pi) + np.sin(mu * np.pi) / np.tan(np.pi - 0.5 * angle.theta))


def ctilde_check(interval: Interval, alpha: float, beta: float, mu: float) -> float:
    """Relative probe discrepancy of ``aD^{-mu} xD^{mu} w = C~ w``.

    Here ``w = (x-a)**(mu - tau) (b-x)**(tau - 1)`` with ``tau = theta/2pi``.
    """
    angle = compute_angle(alpha, beta, mu)
    tau = angle.theta_norm
    w = power(interval, mu - tau, tau - 1.0)
    lhs = left_frac_integral(right_frac_derivative(w, mu), mu)
    x = interval.probes()
    expected = ctilde(angle, mu) * w(x)
    return float(np.max(np.abs(lhs(x) - expected)) / np.max(np.abs(expected)))


# }}}

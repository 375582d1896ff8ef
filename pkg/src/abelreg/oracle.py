"""Independent reference computations.

* :func:`manufacture_solution` picks a solution and computes the matching
  right-hand side, so solvers can be compared against ground truth.
* :func:`collocation_solve` discretizes the forward operator directly by
  product integration with piecewise-linear elements. It shares no code
  with the closed-form pipeline beyond evaluating the right-hand side.
* :func:`reference_quadrature` wraps QUADPACK's algebraic-weight and
  Cauchy-weight routines.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.integrate
import scipy.linalg
from scipy.special import gamma

from abelreg.abelcore import ProblemSpec, validate_coefficients
from abelreg.errors import AccuracyError, IllPosedDiscretization, ValidationError
from abelreg.fracops import (
    definite_integral,
    left_frac_derivative,
    left_frac_integral,
    right_frac_derivative,
)
from abelreg.functions import EndpointPowerFunction, Interval, linear_combination, power_polynomial

#: Fraction of the interval trimmed at each end before comparing solutions.
WINDOW_FRACTION = 0.05


# {{{ manufactured solutions


@dataclass(frozen=True)
class ManufacturedSolution:
    psi: EndpointPowerFunction
    f: EndpointPowerFunction
    c: float
    alpha: float
    beta: float
    mu: float

    def __iter__(self):
        yield self.psi
        yield self.f

    @property
    def spec(self) -> ProblemSpec:
        return ProblemSpec(self.psi.interval, self.alpha, self.beta, self.mu, self.f, self.c)


def manufacture_solution(
    interval: Interval,
    mu: float,
    q_a: float,
    q_b: float,
    coefficients: Sequence[float] = (1.0,),
    alpha: float = 0.5,
    beta: float | None = None,
) -> ManufacturedSolution:
    """Pick ``psi = (x-a)**q_a (b-x)**q_b P`` and compute its right-hand side.

    ``P`` is a polynomial in ``(x - a)/(b - a)``. The right-hand side is
    ``f = alpha aD^mu psi - beta xD^mu psi`` and the constant is
    ``c = beta (xD^{-(1-mu)} psi)(a)``, which together make ``psi`` solve
    the integrated equation exactly.
    """
    beta = 1.0 - alpha if beta is None else beta
    validate_coefficients(alpha, beta, mu)
    threshold = 0.5 * (1.0 + mu)
    if q_a < threshold or q_b < threshold:
        raise ValidationError(
            f"exponents ({q_a}, {q_b}) must be at least (1 + mu)/2 = {threshold}"
        )
    psi = power_polynomial(interval, q_a, q_b, coefficients)
    if psi.is_zero:
        return ManufacturedSolution(psi, psi, 0.0, alpha, beta, mu)

    f = linear_combination(
        [alpha, -beta], [left_frac_derivative(psi, mu), right_frac_derivative(psi, mu)]
    ).freeze()
    c = beta * definite_integral(psi.times_power(-mu, 0.0)) / gamma(1.0 - mu)
    return ManufacturedSolution(psi, f, c, alpha, beta, mu)


# }}}


# {{{ collocation


@dataclass(frozen=True)
class CollocationSystem:
    n: int
    nodes: np.ndarray
    points: np.ndarray
    matrix: np.ndarray
    rhs: np.ndarray


@dataclass(frozen=True)
class CollocationSolution:
    system: CollocationSystem
    values: np.ndarray
    condition: float

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return np.interp(x, self.system.nodes, self.values)


def graded_mesh(interval: Interval, n: int, grading: float = 2.0) -> np.ndarray:
    """``n`` nodes clustered toward both endpoints like ``s**grading``."""
    s = np.linspace(0.0, 1.0, n)
    g = np.where(s <= 0.5, 0.5 * (2.0 * s) ** grading, 1.0 - 0.5 * (2.0 * (1.0 - s)) ** grading)
    nodes = interval.a + interval.length * g
    nodes[0], nodes[-1] = interval.a, interval.b
    return nodes


def _hat_integrals(nodes: np.ndarray, x: float, order: float) -> tuple[np.ndarray, np.ndarray]:
    """Left and right RL integrals of order ``order`` of every hat function at ``x``.

    On each element ``[t0, t1]`` the linear pieces are integrated exactly
    against ``|x - t|**(order - 1)``.
    """
    nu = order
    t0, t1 = nodes[:-1], nodes[1:]
    h = t1 - t0

    def moments(w0, w1):
        # int w**(nu-1) and int w**nu over [w0, w1]
        return (w1**nu - w0**nu) / nu, (w1 ** (nu + 1) - w0 ** (nu + 1)) / (nu + 1)

    left = np.zeros(nodes.size)
    right = np.zeros(nodes.size)

    # part of each element left of x, with w = x - t
    tl = np.minimum(x, t1)
    m0, m1 = moments(np.maximum(x - tl, 0.0), np.maximum(x - t0, 0.0))
    left[:-1] += ((t1 - x) * m0 + m1) / h
    left[1:] += ((x - t0) * m0 - m1) / h

    # part right of x, with w = t - x
    tr = np.maximum(x, t0)
    m0, m1 = moments(np.maximum(tr - x, 0.0), np.maximum(t1 - x, 0.0))
    right[:-1] += ((t1 - x) * m0 - m1) / h
    right[1:] += ((x - t0) * m0 + m1) / h

    g = gamma(nu)
    return left / g, right / g


def assemble_collocation(spec: ProblemSpec, n: int) -> CollocationSystem:
    """Product-integration matrix of the forward operator on a graded mesh.

    Unknowns are nodal values at all ``n`` mesh nodes. Equations are
    imposed at the interior nodes and at the midpoints of the two end
    elements.
    """
    if n < 16:
        raise ValidationError(f"collocation needs n >= 16, got {n}")
    nodes = graded_mesh(spec.interval, n)
    points = np.concatenate(
        [[0.5 * (nodes[0] + nodes[1])], nodes[1:-1], [0.5 * (nodes[-2] + nodes[-1])]]
    )
    order = 1.0 - spec.mu
    matrix = np.empty((n, n))
    for i, x in enumerate(points):
        left, right = _hat_integrals(nodes, float(x), order)
        matrix[i] = spec.alpha * left + spec.beta * right
    rhs = left_frac_integral(spec.f, 1.0)(points) + spec.c
    return CollocationSystem(n, nodes, points, matrix, rhs)


def collocation_solve(spec: ProblemSpec, n: int) -> CollocationSolution:
    """Dense LU solve of the collocation system."""
    system = assemble_collocation(spec, n)
    lu = scipy.linalg.lu_factor(system.matrix)
    anorm = np.linalg.norm(system.matrix, 1)
    rcond = scipy.linalg.lapack.dgecon(lu[0], anorm, norm="1")[0]
    condition = float(np.inf if rcond == 0.0 else 1.0 / rcond)
    if not np.isfinite(condition) or condition > 1e14:
        raise IllPosedDiscretization(
            f"collocation matrix is numerically singular (condition {condition:.3e})", condition
        )
    values = scipy.linalg.lu_solve(lu, system.rhs)
    return CollocationSolution(system, values, condition)


def relative_l2_error(
    approx: Callable[[np.ndarray], np.ndarray],
    reference: Callable[[np.ndarray], np.ndarray],
    interval: Interval,
    samples: int = 401,
) -> float:
    """Relative L2 difference on the trimmed interior window."""
    lo, hi = interval.window(WINDOW_FRACTION)
    x = np.linspace(lo, hi, samples)
    ref = reference(x)
    diff = approx(x) - ref
    return float(np.sqrt(np.trapezoid(diff**2, x) / np.trapezoid(ref**2, x)))


# }}}


# {{{ reference quadrature


@dataclass(frozen=True)
class IntegrandDescriptor:
    """``int_a^b (t-a)**alpha (b-t)**beta func(t) [/(t - pv_point)] dt``."""

    func: Callable[[float], float]
    a: float
    b: float
    alpha: float = 0.0
    beta: float = 0.0
    pv_point: float | None = None


def _quad(descr: IntegrandDescriptor, tol: float, limit: int) -> tuple[float, float]:
    a, b, al, be = descr.a, descr.b, descr.alpha, descr.beta
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.integrate.IntegrationWarning)
        if descr.pv_point is None:
            val, err = scipy.integrate.quad(
                descr.func, a, b, weight="alg", wvar=(al, be),
                epsabs=tol, epsrel=tol, limit=limit,
            )
            return val, err

        c = float(descr.pv_point)
        if not a < c < b:
            raise ValueError(f"principal-value point {c} must lie inside ({a}, {b})")
        d = 0.5 * min(c - a, b - c)

        def weighted(t):
            return (t - a) ** al * (b - t) ** be * descr.func(t)

        mid, e1 = scipy.integrate.quad(
            weighted, c - d, c + d, weight="cauchy", wvar=c,
            epsabs=tol, epsrel=tol, limit=limit,
        )
        # outer pieces carry the endpoint weights and a regular 1/(t - c)
        lv, e2 = scipy.integrate.quad(
            lambda t: (b - t) ** be * descr.func(t) / (t - c), a, c - d,
            weight="alg", wvar=(al, 0.0), epsabs=tol, epsrel=tol, limit=limit,
        )
        rv, e3 = scipy.integrate.quad(
            lambda t: (t - a) ** al * descr.func(t) / (t - c), c + d, b,
            weight="alg", wvar=(0.0, be), epsabs=tol, epsrel=tol, limit=limit,
        )
        return mid + lv + rv, e1 + e2 + e3


def reference_quadrature(descr: IntegrandDescriptor, tol: float = 1e-10) -> float:
    """Adaptive Gauss-Kronrod value checked by doubling the subdivision limit."""
    if descr.alpha <= -1.0 or descr.beta <= -1.0:
        raise ValueError("endpoint exponents must exceed -1")
    limit = 200
    prev, _ = _quad(descr, tol, limit)
    for _ in range(4):
        limit *= 2
        val, err = _quad(descr, tol, limit)
        if abs(val - prev) <= 10 * tol * max(1.0, abs(val)) and err <= 10 * tol * max(1.0, abs(val)):
            return float(val)
        prev = val
    raise AccuracyError(
        f"quadrature did not reach tolerance {tol} (error estimate {err:.3e})", float(val), float(err)
    )


# }}}

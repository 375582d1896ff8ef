r"""Left and right Riemann-Liouville integrals and derivatives.

For :math:`f(t) = (t-a)^{p}(b-t)^{q} v(t)` the left integral is

.. math::

    ({}_aD_x^{-\sigma} f)(x) = \frac{(x-a)^{\sigma+p}}{\Gamma(\sigma)}
        \int_0^1 s^{p} (1-s)^{\sigma-1} (b-t)^{q} v(t) \,\mathrm{d}s,
    \qquad t = a + (x-a) s,

so the kernel and the endpoint power become the weight of a graded
Gauss-Jacobi rule and only ``(b - t)**q v(t)`` is sampled. The right
operators are the same computation measured from ``b``. Derivatives of
order :math:`0 < \sigma < 1` differentiate the :math:`(1-\sigma)` integral
under the integral sign, which needs ``v'``.
"""

from __future__ import annotations

import numpy as np
from scipy.special import gamma

from abelreg.errors import DomainError, NonIntegrableError, UnsupportedOrderError
from abelreg.functions import EndpointPowerFunction, zero
from abelreg.quadrature import graded_rule

# bound on the size of the (points x nodes) work arrays
_CHUNK = 150_000


def _local_frame(f: EndpointPowerFunction, x: np.ndarray, left: bool):
    """Distances and exponents measured from the near endpoint."""
    a, b = f.interval.a, f.interval.b
    if left:
        return x - a, b - x, f.p_a, f.p_b, (lambda u: a + u), 1.0
    return b - x, x - a, f.p_b, f.p_a, (lambda u: b - u), -1.0


def _chunks(n: int, nodes: int):
    step = max(1, _CHUNK // max(nodes, 1))
    for start in range(0, n, step):
        yield slice(start, min(n, start + step))


def _check_integrable(f: EndpointPowerFunction) -> None:
    if not (f.p_a > -1.0 and f.p_b > -1.0):
        raise NonIntegrableError(f"non-integrable input: p_a={f.p_a}, p_b={f.p_b}")


# {{{ fractional integrals


def _integral_smooth(f: EndpointPowerFunction, sigma: float, left: bool):
    clamp = f.interval.clamp
    v = f.smooth

    def smooth(x):
        x = np.asarray(x, dtype=float)
        shape = x.shape
        x = clamp(x.ravel())
        r, rho, p, q, point, _ = _local_frame(f, x, left)
        rule = graded_rule(p, sigma - 1.0)
        out = np.empty_like(x)
        for sl in _chunks(x.size, rule.nodes.size):
            rr, pp = r[sl, None], rho[sl, None]
            far = pp + rr * rule.comp
            vals = far**q * v(clamp(point(rr * rule.nodes)))
            out[sl] = rule.integrate(vals)
        out *= rho ** (-min(0.0, q + sigma)) / gamma(sigma)
        return out.reshape(shape)

    return smooth


def _frac_integral(f: EndpointPowerFunction, sigma: float, left: bool) -> EndpointPowerFunction:
    sigma = float(sigma)
    if not sigma >= 0.0:
        raise UnsupportedOrderError(
            f"integral order must be non-negative, got {sigma}; use the derivative"
        )
    _check_integrable(f)
    if sigma == 0.0:
        return f

    p_near, p_far = (f.p_a, f.p_b) if left else (f.p_b, f.p_a)
    near_out, far_out = p_near + sigma, min(0.0, p_far + sigma)
    p_a, p_b = (near_out, far_out) if left else (far_out, near_out)
    if f.is_zero:
        return zero(f.interval, p_a, p_b)

    f = f.prepared()
    return EndpointPowerFunction(
        f.interval, p_a, p_b, _integral_smooth(f, sigma, left), lazy=True
    )


def left_frac_integral(f: EndpointPowerFunction, sigma: float) -> EndpointPowerFunction:
    r"""Left integral :math:`{}_aD_x^{-\sigma} f` for :math:`\sigma \ge 0`.

    The output exponent at ``a`` is ``f.p_a + sigma``. At ``b`` it is
    ``min(0, f.p_b + sigma)``.
    """
    return _frac_integral(f, sigma, left=True)


def right_frac_integral(f: EndpointPowerFunction, sigma: float) -> EndpointPowerFunction:
    r"""Right integral :math:`{}_xD_b^{-\sigma} f`, the mirror image of the left one."""
    return _frac_integral(f, sigma, left=False)


# }}}


# {{{ fractional derivatives


def _derivative_smooth(f: EndpointPowerFunction, sigma: float, left: bool):
    clamp = f.interval.clamp
    v, dv = f.smooth, f.smooth_derivative
    nu = 1.0 - sigma

    def smooth(x):
        x = np.asarray(x, dtype=float)
        shape = x.shape
        x = clamp(x.ravel())
        r, rho, p, q, point, sign = _local_frame(f, x, left)
        rule = graded_rule(p, nu - 1.0)
        out = np.empty_like(x)
        for sl in _chunks(x.size, rule.nodes.size):
            rr, pp = r[sl, None], rho[sl, None]
            far = pp + rr * rule.comp
            t = clamp(point(rr * rule.nodes))
            vt = v(t)
            i0 = rule.integrate(far**q * vt)
            # d/du of far**q v(t(u)), with far = L - u
            dg = far ** (q - 1.0) * (-q * vt + sign * far * dv(t))
            i1 = rule.integrate(rule.nodes * dg)
            out[sl] = (nu + p) * i0 + r[sl] * i1
        out *= rho ** (-min(0.0, q - sigma)) / gamma(nu)
        return out.reshape(shape)

    return smooth


def _frac_derivative(f: EndpointPowerFunction, sigma: float, left: bool) -> EndpointPowerFunction:
    sigma = float(sigma)
    if not 0.0 < sigma < 1.0:
        raise UnsupportedOrderError(f"derivative order must lie in (0, 1), got {sigma}")
    _check_integrable(f)

    p_near, p_far = (f.p_a, f.p_b) if left else (f.p_b, f.p_a)
    near_out, far_out = p_near - sigma, min(0.0, p_far - sigma)
    if near_out <= -1.0 or far_out <= -1.0:
        raise NonIntegrableError(
            f"derivative of order {sigma} of a function with exponents "
            f"({f.p_a}, {f.p_b}) is not integrable"
        )
    p_a, p_b = (near_out, far_out) if left else (far_out, near_out)
    if f.is_zero:
        return zero(f.interval, p_a, p_b)

    f = f.prepared()
    if f.smooth_derivative is None:
        f = f.freeze()
    return EndpointPowerFunction(
        f.interval, p_a, p_b, _derivative_smooth(f, sigma, left), lazy=True
    )


def left_frac_derivative(f: EndpointPowerFunction, sigma: float) -> EndpointPowerFunction:
    r"""Left derivative :math:`{}_aD_x^{\sigma} f = \frac{d}{dx}\, {}_aD_x^{-(1-\sigma)} f`."""
    return _frac_derivative(f, sigma, left=True)


def right_frac_derivative(f: EndpointPowerFunction, sigma: float) -> EndpointPowerFunction:
    r"""Right derivative :math:`{}_xD_b^{\sigma} f = -\frac{d}{dx}\, {}_xD_b^{-(1-\sigma)} f`."""
    return _frac_derivative(f, sigma, left=False)


# }}}


def reflect(f: EndpointPowerFunction) -> EndpointPowerFunction:
    """``(Qf)(x) = f(a + b - x)``; swaps the endpoint exponents."""
    a, b = f.interval.a, f.interval.b
    if f.is_zero:
        return zero(f.interval, f.p_b, f.p_a)
    v, dv = f.smooth, f.smooth_derivative

    def smooth(x):
        return v(a + b - np.asarray(x, dtype=float))

    deriv = None
    if dv is not None:

        def deriv(x):
            return -dv(a + b - np.asarray(x, dtype=float))

    return EndpointPowerFunction(
        f.interval, f.p_b, f.p_a, smooth, deriv, degree=f.degree, lazy=f.lazy
    )


def check_order(sigma: float, *, low: float = 0.0, high: float = 1.0) -> float:
    """Validate ``low < sigma < high``."""
    sigma = float(sigma)
    if not low < sigma < high:
        raise DomainError(f"order {sigma} outside ({low}, {high})")
    return sigma


def definite_integral(f: EndpointPowerFunction) -> float:
    """``int_a^b f(t) dt`` with the endpoint powers in the quadrature weight."""
    _check_integrable(f)
    if f.is_zero:
        return 0.0
    f = f.prepared()
    a, length = f.interval.a, f.interval.length
    rule = graded_rule(f.p_a, f.p_b)
    vals = f.smooth(f.interval.clamp(a + length * rule.nodes))
    return float(length ** (f.p_a + f.p_b + 1.0) * rule.integrate(vals))

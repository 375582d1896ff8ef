r"""Cauchy principal-value operators on an interval.

The weighted operator is

.. math::

    (S_{\nu_a,\nu_b} f)(x) = \frac{1}{\pi} \int_a^b
        \Big(\frac{x-a}{t-a}\Big)^{\nu_a} \Big(\frac{b-x}{b-t}\Big)^{\nu_b}
        \frac{f(t)}{t-x} \,\mathrm{d}t,

and ``nu_a = nu_b = 0`` gives the plain operator ``S``. The kernel weights
are folded into the endpoint exponents of ``f`` so the integrand becomes
``phi(t) / (t - x)`` with ``phi = (t-a)**P (b-t)**Q v(t)``. The principal
value is split at ``x -+ d`` with ``d`` half the distance to the nearest
endpoint: on the symmetric middle piece the constant ``phi(x)`` has zero
principal value, so only the difference quotient is integrated, while the
two outer pieces are ordinary weakly singular integrals handled by graded
Gauss-Jacobi rules.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from abelreg.errors import DomainError, NonIntegrableError
from abelreg.fracops import left_frac_integral, right_frac_integral
from abelreg.functions import EndpointPowerFunction, zero
from abelreg.quadrature import gauss_legendre, graded_rule

#: Gauss-Legendre points on the symmetric piece around the singularity.
MIDDLE_ORDER = 40

_CHUNK = 100_000


@dataclass(frozen=True)
class WeightedKernel:
    """Exponents on ``(x-a)/(t-a)`` and ``(b-x)/(b-t)``."""

    nu_a: float = 0.0
    nu_b: float = 0.0

    def admissible(self, sigma: float) -> bool:
        """Whether ``sigma - 1 < nu <= sigma`` holds for both exponents."""
        return all(sigma - 1.0 < nu <= sigma for nu in (self.nu_a, self.nu_b))


def _pv_integral(f: EndpointPowerFunction, big_p: float, big_q: float, x: np.ndarray) -> np.ndarray:
    """``PV int (t-a)**P (b-t)**Q v(t) / (t-x) dt`` for interior ``x``."""
    a, b = f.interval.a, f.interval.b
    clamp = f.interval.clamp
    v = f.smooth
    ra, rb = x - a, b - x
    d = 0.5 * np.minimum(ra, rb)
    left_len, right_len = ra - d, rb - d

    # left piece: t = a + left_len*s
    lrule = graded_rule(big_p, 0.0)
    # right piece: t = b - right_len*s
    rrule = graded_rule(big_q, 0.0)
    g, wg = gauss_legendre(MIDDLE_ORDER)

    out = np.empty_like(x)
    nodes = lrule.nodes.size + rrule.nodes.size + g.size
    step = max(1, _CHUNK // nodes)
    for start in range(0, x.size, step):
        sl = slice(start, min(x.size, start + step))
        xa, xb, dd = ra[sl, None], rb[sl, None], d[sl, None]
        ll, rl = left_len[sl, None], right_len[sl, None]

        # t - x = -(d + ll*(1-s)), b - t = (b - x) + d + ll*(1-s)
        gap = dd + ll * lrule.comp
        vals = (xb + gap) ** big_q * v(clamp(a + ll * lrule.nodes)) / gap
        left = -(ll[:, 0] ** (big_p + 1.0)) * lrule.integrate(vals)

        gap = dd + rl * rrule.comp
        vals = (xa + gap) ** big_p * v(clamp(b - rl * rrule.nodes)) / gap
        right = rl[:, 0] ** (big_q + 1.0) * rrule.integrate(vals)

        xs = x[sl, None]
        ta, tb = xa + dd * g, xb - dd * g
        phi_t = ta**big_p * tb**big_q * v(clamp(xs + dd * g))
        phi_x = xa**big_p * xb**big_q * v(xs)
        middle = ((phi_t - phi_x) / g) @ wg

        out[sl] = left + right + middle
    return out


def _weighted_smooth(f: EndpointPowerFunction, kernel: WeightedKernel, p_a: float, p_b: float):
    big_p, big_q = f.p_a - kernel.nu_a, f.p_b - kernel.nu_b
    clamp = f.interval.clamp
    a, b = f.interval.a, f.interval.b

    def smooth(x):
        x = np.asarray(x, dtype=float)
        shape = x.shape
        x = clamp(x.ravel())
        pv = _pv_integral(f, big_p, big_q, x)
        ra, rb = x - a, b - x
        out = ra ** (kernel.nu_a - p_a) * rb ** (kernel.nu_b - p_b) * pv / np.pi
        return out.reshape(shape)

    return smooth


def singular_transform(
    f: EndpointPowerFunction, kernel: WeightedKernel = WeightedKernel()
) -> EndpointPowerFunction:
    """``S_{nu_a, nu_b} f`` as a function on the interval.

    The result has endpoint exponents ``min(f.p_a, nu_a)`` and
    ``min(f.p_b, nu_b)``.
    """
    big_p, big_q = f.p_a - kernel.nu_a, f.p_b - kernel.nu_b
    if not (big_p > -1.0 and big_q > -1.0):
        raise NonIntegrableError(
            f"weighted integrand has endpoint exponents ({big_p}, {big_q}); both must exceed -1"
        )
    p_a, p_b = min(f.p_a, kernel.nu_a), min(f.p_b, kernel.nu_b)
    if f.is_zero:
        return zero(f.interval, max(p_a, -0.5), max(p_b, -0.5))
    f = f.prepared()
    return EndpointPowerFunction(
        f.interval, p_a, p_b, _weighted_smooth(f, kernel, p_a, p_b), lazy=True
    )


def weighted_singular(
    f: EndpointPowerFunction, k: WeightedKernel, x: float | np.ndarray
) -> float | np.ndarray:
    """Evaluate ``S_{nu_a, nu_b} f`` at interior points ``x``."""
    x_arr = f.interval.check_inside(x)
    out = singular_transform(f, k)(x_arr)
    return float(out) if np.ndim(x) == 0 else out


def cauchy_pv(f: EndpointPowerFunction, x: float | np.ndarray) -> float | np.ndarray:
    """``(1/pi) PV int_a^b f(t) / (t - x) dt`` at interior points ``x``."""
    return weighted_singular(f, WeightedKernel(0.0, 0.0), x)


def commutation_check(psi: EndpointPowerFunction, lam: float) -> float:
    """Largest probe discrepancy of the commutation rule for ``S``.

    Compares ``xD_b^{-lam}(r_b^{-lam} S(r_b^{lam} psi))`` with
    ``r_a^{lam} S(r_a^{-lam} xD_b^{-lam} psi)`` at the 17 probe points.
    """
    lam = float(lam)
    if not 0.0 < lam < 1.0:
        raise DomainError(f"lambda must lie in (0, 1), got {lam}")
    if psi.is_zero:
        return 0.0
    inner = singular_transform(psi.times_power(0.0, lam)).freeze()
    lhs = right_frac_integral(inner.times_power(0.0, -lam), lam)

    moved = right_frac_integral(psi, lam).freeze()
    rhs = singular_transform(moved.times_power(-lam, 0.0)).times_power(lam, 0.0)

    x = psi.interval.probes()
    return float(np.max(np.abs(lhs(x) - rhs(x))))


def left_integral_identity_check(g: EndpointPowerFunction, mu: float) -> float:
    """Largest probe discrepancy of the left/right integral relation.

    ``aD_x^{-mu} g`` is compared with
    ``cos(mu pi) xD_b^{-mu} g - sin(mu pi) xD_b^{-mu}(r_b^{-mu} S(r_b^{mu} g))``.
    """
    mu = float(mu)
    if not 0.0 < mu < 1.0:
        raise DomainError(f"mu must lie in (0, 1), got {mu}")
    x = g.interval.probes()
    lhs = left_frac_integral(g, mu)(x)
    inner = singular_transform(g.times_power(0.0, mu)).freeze().times_power(0.0, -mu)
    rhs = np.cos(mu * np.pi) * right_frac_integral(g, mu)(x) - np.sin(
        mu * np.pi
    ) * right_frac_integral(inner, mu)(x)
    return float(np.max(np.abs(lhs - rhs)))

"""Functions on a bounded interval with explicit endpoint power factors.

A function is stored as ``(x - a)**p_a * (b - x)**p_b * v(x)`` where the
exponents are tracked as numbers and ``v`` is a callable that stays bounded
(up to logarithms) near both endpoints. The exponents are lower bounds on
the true endpoint behaviour, never upper bounds: ``v`` may itself vanish at
an endpoint like a fractional power, which the graded grids resolve.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from abelreg.errors import DomainError, NonIntegrableError, ValidationError
from abelreg.quadrature import GRID_LEVELS, GRID_ORDER, GRID_RATIO, PanelGrid, PanelInterpolant

SmoothPart = Callable[[np.ndarray], np.ndarray]

#: Number of interior probe points used by every diagnostic.
NPROBES = 17


@dataclass(frozen=True)
class Interval:
    """The open interval ``(a, b)``."""

    a: float
    b: float

    def __post_init__(self) -> None:
        a, b = float(self.a), float(self.b)
        if not (np.isfinite(a) and np.isfinite(b)):
            raise ValidationError(f"interval endpoints must be finite: ({a}, {b})")
        if not a < b:
            raise ValidationError(f"interval requires a < b, got ({a}, {b})")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def length(self) -> float:
        return self.b - self.a

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.a + self.b)

    def probes(self, n: int = NPROBES) -> np.ndarray:
        """Chebyshev points of the first kind, all strictly inside."""
        k = np.arange(n)
        return self.midpoint - 0.5 * self.length * np.cos((2 * k + 1) * np.pi / (2 * n))

    def window(self, fraction: float = 0.05) -> tuple[float, float]:
        """Interior window trimmed by ``fraction`` of the length at each end."""
        return self.a + fraction * self.length, self.b - fraction * self.length

    def check_inside(self, x: np.ndarray | float) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if not np.all((x > self.a) & (x < self.b)):
            bad = x[~((x > self.a) & (x < self.b))]
            raise DomainError(
                f"evaluation point {float(bad.ravel()[0])!r} is not inside "
                f"({self.a}, {self.b})"
            )
        return x

    def clamp(self, x: np.ndarray | float) -> np.ndarray:
        """Move points at or beyond an endpoint to the nearest interior float."""
        x = np.asarray(x, dtype=float)
        lo = np.nextafter(self.a, self.b)
        hi = np.nextafter(self.b, self.a)
        return np.clip(x, lo, hi)

    def distances(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return x - self.a, self.b - x

    def grid(self, order: int = GRID_ORDER) -> PanelGrid:
        # the innermost panels must stay resolvable next to |a| and |b|
        scale = max(abs(self.a), abs(self.b))
        smallest = max(1e-15 * self.length, 64 * np.finfo(float).eps * scale)
        levels = int(np.log(smallest / (0.5 * self.length)) / np.log(GRID_RATIO))
        return PanelGrid(self.a, self.b, levels=min(GRID_LEVELS, max(levels, 4)), order=order)


def _zero_smooth(x: np.ndarray) -> np.ndarray:
    return np.zeros_like(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class EndpointPowerFunction:
    """``(x - a)**p_a * (b - x)**p_b * v(x)`` on an interval.

    ``smooth`` evaluates ``v``; ``smooth_derivative`` evaluates ``v'`` when it
    is known, otherwise derivatives go through :meth:`freeze`.
    """

    interval: Interval
    p_a: float
    p_b: float
    smooth: SmoothPart = field(compare=False)
    smooth_derivative: SmoothPart | None = field(default=None, compare=False)
    is_zero: bool = False
    degree: int = GRID_ORDER
    #: True for operator outputs whose smooth part is an expensive quadrature.
    lazy: bool = field(default=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "p_a", float(self.p_a))
        object.__setattr__(self, "p_b", float(self.p_b))
        if not (self.p_a > -1.0 and self.p_b > -1.0):
            raise NonIntegrableError(
                f"endpoint exponents must exceed -1, got p_a={self.p_a}, p_b={self.p_b}"
            )

    # {{{ evaluation

    def evaluate(self, x: np.ndarray | float) -> np.ndarray:
        """Evaluate at interior points; endpoint values are not defined."""
        x = self.interval.check_inside(x)
        return self._values(x)

    __call__ = evaluate

    def _values(self, x: np.ndarray) -> np.ndarray:
        if self.is_zero:
            return np.zeros_like(x)
        ra, rb = self.interval.distances(x)
        return ra**self.p_a * rb**self.p_b * self.smooth(x)

    def derivative_values(self, x: np.ndarray) -> np.ndarray:
        """Pointwise first derivative at interior points."""
        x = self.interval.check_inside(x)
        if self.is_zero:
            return np.zeros_like(x)
        f = self if self.smooth_derivative is not None else self.freeze()
        ra, rb = self.interval.distances(x)
        v = f.smooth(x)
        dv = f.smooth_derivative(x)
        return ra**self.p_a * rb**self.p_b * (
            dv + v * (self.p_a / ra - self.p_b / rb)
        )

    @property
    def nodes(self) -> np.ndarray:
        """Sampling nodes of the smooth part, strictly inside the interval."""
        return self.interval.grid(self.degree).nodes

    @property
    def values(self) -> np.ndarray:
        """Smooth part sampled at :attr:`nodes`."""
        return np.asarray(self.smooth(self.nodes), dtype=float)

    # }}}

    # {{{ transformations

    def freeze(self) -> EndpointPowerFunction:
        """Replace the smooth part by its interpolant on the graded grid.

        Freezing makes later evaluations cheap and supplies a derivative
        for smooth parts that are only known pointwise. The result is
        cached on the instance.
        """
        if self.is_zero or isinstance(self.smooth, PanelInterpolant):
            return self
        return self._frozen

    @cached_property
    def _frozen(self) -> EndpointPowerFunction:
        grid = self.interval.grid(self.degree)
        interp = PanelInterpolant(grid, self.smooth(grid.nodes))
        return replace(self, smooth=interp, smooth_derivative=interp.derivative, lazy=False)

    def prepared(self) -> EndpointPowerFunction:
        """Cheap-to-evaluate version used as operator input."""
        return self.freeze() if self.lazy else self

    def times_power(self, k_a: float, k_b: float) -> EndpointPowerFunction:
        """Multiply by ``(x - a)**k_a * (b - x)**k_b`` exactly."""
        return replace(self, p_a=self.p_a + k_a, p_b=self.p_b + k_b)

    def with_exponents(self, p_a: float, p_b: float) -> EndpointPowerFunction:
        """Same function, rewritten with smaller declared exponents."""
        if p_a > self.p_a or p_b > self.p_b:
            raise ValueError("exponents can only be lowered")
        if self.is_zero:
            return replace(self, p_a=p_a, p_b=p_b)
        da, db = self.p_a - p_a, self.p_b - p_b
        if da == 0.0 and db == 0.0:
            return self
        a, b = self.interval.a, self.interval.b
        v, dv = self.smooth, self.smooth_derivative

        def smooth(x):
            return (x - a) ** da * (b - x) ** db * v(x)

        deriv = None
        if dv is not None:

            def deriv(x):
                ra, rb = x - a, b - x
                return ra**da * rb**db * (dv(x) + v(x) * (da / ra - db / rb))

        return EndpointPowerFunction(
            self.interval, p_a, p_b, smooth, deriv, degree=self.degree, lazy=self.lazy
        )

    def scale(self, c: float) -> EndpointPowerFunction:
        c = float(c)
        if self.is_zero or c == 0.0:
            return zero(self.interval, self.p_a, self.p_b)
        v, dv = self.smooth, self.smooth_derivative
        return replace(
            self,
            smooth=lambda x: c * v(x),
            smooth_derivative=None if dv is None else (lambda x: c * dv(x)),
        )

    def __mul__(self, c: float) -> EndpointPowerFunction:
        return self.scale(c)

    __rmul__ = __mul__

    def __neg__(self) -> EndpointPowerFunction:
        return self.scale(-1.0)

    def __add__(self, other: EndpointPowerFunction) -> EndpointPowerFunction:
        return linear_combination([1.0, 1.0], [self, other])

    def __sub__(self, other: EndpointPowerFunction) -> EndpointPowerFunction:
        return linear_combination([1.0, -1.0], [self, other])

    # }}}


def linear_combination(
    coefficients: Sequence[float], functions: Sequence[EndpointPowerFunction]
) -> EndpointPowerFunction:
    """Sum ``c_i f_i`` with exponents lowered to the common minimum."""
    if len(coefficients) != len(functions) or not functions:
        raise ValueError("need matching non-empty coefficient and function lists")
    interval = functions[0].interval
    if any(f.interval != interval for f in functions):
        raise ValueError("functions live on different intervals")

    p_a = min(f.p_a for f in functions)
    p_b = min(f.p_b for f in functions)
    terms = [
        (float(c), f.with_exponents(p_a, p_b))
        for c, f in zip(coefficients, functions)
        if c != 0.0 and not f.is_zero
    ]
    if not terms:
        return zero(interval, p_a, p_b)
    if len(terms) == 1 and terms[0][0] == 1.0:
        return terms[0][1]

    def smooth(x):
        return sum(c * f.smooth(x) for c, f in terms)

    deriv = None
    if all(f.smooth_derivative is not None for _, f in terms):

        def deriv(x):
            return sum(c * f.smooth_derivative(x) for c, f in terms)

    lazy = any(f.lazy for _, f in terms)
    return EndpointPowerFunction(interval, p_a, p_b, smooth, deriv, lazy=lazy)


# {{{ constructors


def zero(interval: Interval, p_a: float = 0.0, p_b: float = 0.0) -> EndpointPowerFunction:
    return EndpointPowerFunction(
        interval, p_a, p_b, _zero_smooth, _zero_smooth, is_zero=True
    )


def power(
    interval: Interval, p_a: float = 0.0, p_b: float = 0.0, coefficient: float = 1.0
) -> EndpointPowerFunction:
    """``coefficient * (x - a)**p_a * (b - x)**p_b``."""
    if coefficient == 0.0:
        return zero(interval, p_a, p_b)
    c = float(coefficient)

    def smooth(x):
        return np.full_like(np.asarray(x, dtype=float), c)

    return EndpointPowerFunction(interval, p_a, p_b, smooth, _zero_smooth)


def power_polynomial(
    interval: Interval,
    p_a: float,
    p_b: float,
    coefficients: Sequence[float],
) -> EndpointPowerFunction:
    """``(x - a)**p_a * (b - x)**p_b * P(s)`` with ``s = (x - a)/(b - a)``.

    ``coefficients`` are in increasing degree, as for
    :class:`numpy.polynomial.Polynomial`.
    """
    poly = np.polynomial.Polynomial(np.asarray(coefficients, dtype=float))
    if not np.any(poly.coef != 0.0):
        return zero(interval, p_a, p_b)
    dpoly = poly.deriv()
    a, h = interval.a, interval.length

    def smooth(x):
        return poly((np.asarray(x, dtype=float) - a) / h)

    def deriv(x):
        return dpoly((np.asarray(x, dtype=float) - a) / h) / h

    return EndpointPowerFunction(interval, p_a, p_b, smooth, deriv)


def from_callable(
    interval: Interval,
    func: SmoothPart,
    derivative: SmoothPart | None = None,
    p_a: float = 0.0,
    p_b: float = 0.0,
) -> EndpointPowerFunction:
    """Wrap a vectorized callable as the smooth part."""
    return EndpointPowerFunction(interval, p_a, p_b, func, derivative)


# }}}

"""Composite quadrature and interpolation on geometrically graded meshes.

Everything in the package that integrates against a weakly singular kernel
or an endpoint power goes through :func:`graded_rule`: a composite
Gauss-Legendre rule on panels refined geometrically toward both ends of
``[0, 1]``, with Gauss-Jacobi rules on the two innermost panels so that the
end weights ``s**alpha`` and ``(1 - s)**beta`` are integrated exactly there.

:class:`PanelInterpolant` is the matching storage format: values on
Chebyshev nodes of a geometrically graded panel mesh, evaluated by
barycentric interpolation panel by panel.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

#: Geometric ratio between consecutive panels of a quadrature rule.
RULE_RATIO = 0.2
#: Number of graded levels on each half of a quadrature rule.
RULE_LEVELS = 22
#: Gauss points per panel.
RULE_ORDER = 16

#: Geometric ratio between consecutive panels of an interpolation grid.
GRID_RATIO = 0.3
#: Number of graded levels on each half of an interpolation grid.
GRID_LEVELS = 28
#: Chebyshev nodes per interpolation panel.
GRID_ORDER = 20


@dataclass(frozen=True)
class Rule:
    """Quadrature rule on ``[0, 1]`` for ``s**alpha (1 - s)**beta g(s)``.

    ``comp`` holds ``1 - nodes`` computed without cancellation, which
    matters for nodes within a few ulps of 1.
    """

    nodes: np.ndarray
    comp: np.ndarray
    weights: np.ndarray
    alpha: float
    beta: float

    def integrate(self, values: np.ndarray) -> np.ndarray:
        """Apply the rule along the last axis of ``values``."""
        return values @ self.weights


def _half_breakpoints(ratio: float, levels: int) -> np.ndarray:
    # 0 < e_levels < ... < e_1 < e_0 = 1/2
    return 0.5 * ratio ** np.arange(levels, -1, -1, dtype=float)


@lru_cache(maxsize=512)
def graded_rule(
    alpha: float,
    beta: float,
    order: int = RULE_ORDER,
    ratio: float = RULE_RATIO,
    levels: int = RULE_LEVELS,
) -> Rule:
    """Build a composite rule for ``int_0^1 s**alpha (1-s)**beta g(s) ds``.

    The weights returned already contain the end weights, so for a smooth
    ``g`` the integral is ``rule.integrate(g(rule.nodes))``.
    """
    if alpha <= -1.0 or beta <= -1.0:
        raise ValueError(f"non-integrable end weights: alpha={alpha}, beta={beta}")

    xg, wg = roots_legendre(order)
    edges = _half_breakpoints(ratio, levels)

    # left half, measured from s = 0
    left_s, left_w = [], []
    h0 = edges[0]
    xj, wj = roots_jacobi(order, 0.0, alpha)
    left_s.append(0.5 * h0 * (1.0 + xj))
    left_w.append(wj * (0.5 * h0) ** (alpha + 1.0))
    for lo, hi in zip(edges[:-1], edges[1:]):
        s = lo + 0.5 * (hi - lo) * (1.0 + xg)
        left_s.append(s)
        left_w.append(0.5 * (hi - lo) * wg * s**alpha)
    ls = np.concatenate(left_s)
    lw = np.concatenate(left_w) * (1.0 - ls) ** beta

    # right half, measured from s = 1 (so these are the complements)
    right_c, right_w = [], []
    xj, wj = roots_jacobi(order, 0.0, beta)
    right_c.append(0.5 * h0 * (1.0 + xj))
    right_w.append(wj * (0.5 * h0) ** (beta + 1.0))
    for lo, hi in zip(edges[:-1], edges[1:]):
        c = lo + 0.5 * (hi - lo) * (1.0 + xg)
        right_c.append(c)
        right_w.append(0.5 * (hi - lo) * wg * c**beta)
    rc = np.concatenate(right_c)
    rw = np.concatenate(right_w) * (1.0 - rc) ** alpha

    nodes = np.concatenate([ls, 1.0 - rc[::-1]])
    comp = np.concatenate([1.0 - ls, rc[::-1]])
    weights = np.concatenate([lw, rw[::-1]])
    for arr in (nodes, comp, weights):
        arr.setflags(write=False)
    return Rule(nodes, comp, weights, float(alpha), float(beta))


@lru_cache(maxsize=8)
def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on ``[-1, 1]``."""
    x, w = roots_legendre(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


# {{{ graded interpolation grid


def _chebyshev_nodes(m: int) -> tuple[np.ndarray, np.ndarray]:
    # first kind: interior points only, increasing order
    k = np.arange(m)
    theta = (2 * k + 1) * np.pi / (2 * m)
    x = -np.cos(theta)
    w = (-1.0) ** k * np.sin(theta)
    return x, w


def _differentiation_matrix(x: np.ndarray, w: np.ndarray) -> np.ndarray:
    dx = x[:, None] - x[None, :]
    np.fill_diagonal(dx, 1.0)
    d = (w[None, :] / w[:, None]) / dx
    np.fill_diagonal(d, 0.0)
    np.fill_diagonal(d, -d.sum(axis=1))
    return d


@dataclass(frozen=True)
class PanelGrid:
    """Chebyshev nodes on panels graded geometrically toward ``a`` and ``b``."""

    a: float
    b: float
    ratio: float = GRID_RATIO
    levels: int = GRID_LEVELS
    order: int = GRID_ORDER

    @property
    def breakpoints(self) -> np.ndarray:
        return _grid_breakpoints(self.a, self.b, self.ratio, self.levels)

    @property
    def nodes(self) -> np.ndarray:
        return _grid_nodes(self.a, self.b, self.ratio, self.levels, self.order)

    @property
    def npanels(self) -> int:
        return self.breakpoints.size - 1


@lru_cache(maxsize=64)
def _grid_breakpoints(a: float, b: float, ratio: float, levels: int) -> np.ndarray:
    e = _half_breakpoints(ratio, levels)
    half = b - a
    left = a + half * e
    right = b - half * e[::-1]
    bp = np.concatenate([[a], left, right[1:], [b]])
    bp.setflags(write=False)
    return bp


@lru_cache(maxsize=64)
def _grid_nodes(a: float, b: float, ratio: float, levels: int, order: int) -> np.ndarray:
    bp = _grid_breakpoints(a, b, ratio, levels)
    x, _ = _chebyshev_nodes(order)
    lo, hi = bp[:-1, None], bp[1:, None]
    nodes = (lo + 0.5 * (hi - lo) * (1.0 + x[None, :])).ravel()
    # innermost nodes can round onto an endpoint when |a| or |b| is large
    nodes = np.clip(nodes, np.nextafter(a, b), np.nextafter(b, a))
    nodes.setflags(write=False)
    return nodes


class PanelInterpolant:
    """Piecewise barycentric interpolant on a :class:`PanelGrid`.

    Also provides the derivative, obtained by applying the Chebyshev
    differentiation matrix panel by panel and interpolating the result.
    """

    def __init__(self, grid: PanelGrid, values: np.ndarray) -> None:
        values = np.asarray(values, dtype=float)
        npanels, m = grid.npanels, grid.order
        if values.shape != (npanels * m,):
            raise ValueError(f"expected {npanels * m} values, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("interpolation data contains non-finite values")

        self.grid = grid
        self.values = values
        self._x, self._w = _chebyshev_nodes(m)
        self._bp = grid.breakpoints
        self._table = values.reshape(npanels, m)
        self._dtable: np.ndarray | None = None

    def _panel_coords(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        bp = self._bp
        idx = np.clip(np.searchsorted(bp, x, side="right") - 1, 0, bp.size - 2)
        lo, hi = bp[idx], bp[idx + 1]
        xi = 2.0 * (x - lo) / (hi - lo) - 1.0
        return idx, xi

    def _evaluate(self, table: np.ndarray, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        shape = x.shape
        x = x.ravel()
        idx, xi = self._panel_coords(x)

        diff = xi[:, None] - self._x[None, :]
        exact = diff == 0.0
        diff[exact] = 1.0
        c = self._w[None, :] / diff
        vals = table[idx]
        out = (c * vals).sum(axis=1) / c.sum(axis=1)

        hit = exact.any(axis=1)
        if hit.any():
            out[hit] = vals[hit][exact[hit]]
        return out.reshape(shape)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self._evaluate(self._table, x)

    def derivative(self, x: np.ndarray) -> np.ndarray:
        if self._dtable is None:
            d = _differentiation_matrix(self._x, self._w)
            bp = self._bp
            scale = 2.0 / (bp[1:] - bp[:-1])
            self._dtable = (self._table @ d.T) * scale[:, None]
        return self._evaluate(self._dtable, x)


# }}}

import numpy as np
import pytest
from scipy.special import beta as beta_fn

from abelreg.quadrature import PanelGrid, PanelInterpolant, graded_rule


@pytest.mark.parametrize("alpha, beta", [(0.0, 0.0), (-0.5, 0.3), (0.7, -0.9), (2.0, 1.5)])
def test_graded_rule_integrates_beta_weights(alpha, beta):
    rule = graded_rule(alpha, beta)
    assert rule.integrate(np.ones_like(rule.nodes)) == pytest.approx(
        beta_fn(alpha + 1, beta + 1), rel=1e-13
    )
    # smooth factor on top of the weight
    got = rule.integrate(rule.nodes**2)
    assert got == pytest.approx(beta_fn(alpha + 3, beta + 1), rel=1e-13)


def test_graded_rule_complements_are_exact():
    rule = graded_rule(0.2, -0.4)
    assert np.all(rule.comp > 0.0)
    assert np.all(rule.nodes > 0.0)
    np.testing.assert_allclose(rule.nodes + rule.comp, 1.0, rtol=0, atol=2e-16)
    # the last nodes are closer to 1 than double precision can express as 1 - s
    assert rule.comp.min() < 1e-15


def test_graded_rule_resolves_near_singularity():
    # int_0^1 ds / (s + d) for tiny d
    d = 1e-9
    rule = graded_rule(0.0, 0.0)
    got = rule.integrate(1.0 / (rule.nodes + d))
    assert got == pytest.approx(np.log1p(1.0 / d), rel=1e-12)


def test_graded_rule_rejects_nonintegrable():
    with pytest.raises(ValueError):
        graded_rule(-1.0, 0.0)


def test_interpolant_reproduces_endpoint_powers():
    grid = PanelGrid(0.0, 1.0)
    f = lambda x: x**0.3 + np.sqrt(1.0 - x)
    interp = PanelInterpolant(grid, f(grid.nodes))
    x = np.array([1e-12, 1e-6, 0.1, 0.5, 0.9, 1 - 1e-6])
    np.testing.assert_allclose(interp(x), f(x), rtol=1e-12)
    df = lambda x: 0.3 * x**-0.7 - 0.5 / np.sqrt(1.0 - x)
    np.testing.assert_allclose(interp.derivative(x[1:-1]), df(x[1:-1]), rtol=1e-9)


def test_interpolant_rejects_bad_data():
    grid = PanelGrid(0.0, 1.0)
    with pytest.raises(ValueError):
        PanelInterpolant(grid, np.zeros(3))
    vals = np.zeros(grid.nodes.size)
    vals[4] = np.nan
    with pytest.raises(ValueError):
        PanelInterpolant(grid, vals)

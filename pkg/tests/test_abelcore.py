import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from abelreg.abelcore import (
    ProblemSpec,
    RepresentationChoice,
    apply_forward,
    apply_forward_kernel,
    compute_angle,
    ctilde,
    ctilde_check,
    default_representation,
    extract_K,
    forward_consistency,
    forward_deviation,
    reconstruct_psi,
    representation_spread,
    select_representation,
    solvability_moment,
    solve,
    solve_dominant,
    solve_J,
)
from abelreg.errors import (
    DegenerateCoefficientsError,
    DomainError,
    RegularityViolation,
    StageError,
    ValidationError,
)
from abelreg.fracops import left_frac_derivative
from abelreg.functions import Interval, from_callable, power, power_polynomial, zero
from abelreg.oracle import manufacture_solution
from abelreg.singular import WeightedKernel, cauchy_pv

from conftest import random_manufactured, reference


@pytest.fixture(scope="module")
def manufactured():
    return manufacture_solution(Interval(0.0, 1.0), 0.4, 0.8, 0.9, [1.0, 0.5, -0.25], alpha=0.7)


@pytest.fixture(scope="module")
def sqrt_spec(unit):
    return ProblemSpec(unit, 0.5, 0.5, 0.5, power(unit, 0.5, 0.5))


# {{{ angle and case table


def test_angle_matches_reference():
    ref = reference("angle_075_05")
    angle = compute_angle(0.75, 0.25, 0.5)
    assert angle.A == pytest.approx(ref["A"], abs=1e-15)
    assert angle.B == pytest.approx(ref["B"], abs=1e-15)
    assert angle.theta == pytest.approx(ref["theta"], abs=1e-12)
    assert angle.theta_norm == pytest.approx(ref["theta_norm"], abs=1e-12)


@settings(max_examples=300, deadline=None)
@given(st.floats(1e-3, 1 - 1e-3), st.floats(1e-3, 1 - 1e-3))
def test_angle_window(alpha, mu):
    angle = compute_angle(alpha, 1.0 - alpha, mu)
    assert mu < angle.theta_norm < 1.0
    z = complex(angle.A, -angle.B) / complex(angle.A, angle.B)
    assert abs(np.exp(1j * angle.theta) - z) <= 1e-12


@pytest.mark.parametrize("mu", np.round(np.arange(0.1, 1.0, 0.1), 1))
def test_symmetric_angle(mu):
    assert compute_angle(0.5, 0.5, mu).theta == pytest.approx((1 + mu) * np.pi, abs=1e-12)


@settings(max_examples=300, deadline=None)
@given(st.floats(0.01, 0.99), st.floats(0.01, 0.99), st.floats(1e-3, 1 - 1e-3))
def test_case_table_admissible(sigma, alpha, mu):
    angle = compute_angle(alpha, 1.0 - alpha, mu)
    choice = select_representation(sigma, angle, mu)
    for e in (choice.exp_a, choice.exp_b):
        assert sigma - 1.0 < e <= sigma + 1e-12


def test_reference_case_on_boundary():
    # sigma + tau = 1 and sigma + mu = tau exactly; both ties resolve upward
    angle = compute_angle(0.5, 0.5, 0.5)
    choice = select_representation(0.25, angle, 0.5)
    assert choice.index == 1
    assert (choice.exp_a, choice.exp_b) == pytest.approx((0.25, 0.25))


def test_default_representation():
    angle = compute_angle(0.5, 0.5, 0.5)
    assert default_representation(angle, 0.5).index in (1, 4)


@pytest.mark.parametrize(
    "alpha, beta, mu",
    [(0.5, 0.4, 0.5), (0.0, 1.0, 0.5), (0.5, 0.5, 0.0), (0.5, 0.5, 1.0), (np.nan, 0.5, 0.5)],
)
def test_invalid_coefficients(alpha, beta, mu):
    with pytest.raises(ValidationError):
        compute_angle(alpha, beta, mu)


def test_sigma_outside_unit_interval():
    angle = compute_angle(0.5, 0.5, 0.5)
    with pytest.raises(DomainError):
        select_representation(1.0, angle, 0.5)
    with pytest.raises(DomainError):
        select_representation(0.0, angle, 0.5)


# }}}


# {{{ operators


def test_forward_matches_reference(unit):
    ref = reference("forward_power_06")
    spec = ProblemSpec(unit, 0.5, 0.5, 0.5, zero(unit))
    out = apply_forward(power(unit, 0.6, 0.6), spec)
    for xs, val in ref.items():
        assert out(float(xs)) == pytest.approx(val, rel=1e-10)


def test_kernel_form_scales_by_gamma(unit):
    from scipy.special import gamma

    spec = ProblemSpec(unit, 0.3, 0.7, 0.4, zero(unit))
    u = power(unit, 0.6, 0.6)
    x = unit.probes()
    np.testing.assert_allclose(
        apply_forward_kernel(u, spec)(x), gamma(0.6) * apply_forward(u, spec)(x), rtol=1e-14
    )


def test_manufactured_rhs_matches_reference(unit):
    ref = reference("manufactured_f_075")
    m = manufacture_solution(unit, 0.5, 0.75, 0.75, [1.0], alpha=0.5)
    for xs, val in ref.items():
        assert m.f(float(xs)) == pytest.approx(val, rel=1e-9, abs=1e-12)


def test_solve_dominant_solves_airfoil_equation(unit):
    # c1 phi + c2 S phi = F for the solution class picked by the kernel
    F = power_polynomial(unit, 0.5, 0.5, [1.0, 2.0])
    c1, c2 = 0.6, 0.8
    g = np.arctan2(c2, c1) / np.pi
    # the three classes that need no solvability condition
    for kernel in (WeightedKernel(g, -g), WeightedKernel(g - 1, -g), WeightedKernel(g - 1, 1 - g)):
        phi = solve_dominant(F, c1, c2, kernel).freeze()
        x = unit.probes()
        back = c1 * phi(x) + c2 * cauchy_pv(phi, x)
        np.testing.assert_allclose(back, F(x), atol=1e-10)


def test_solve_dominant_degenerate(unit):
    F = power(unit, 0.5, 0.5)
    with pytest.raises(DegenerateCoefficientsError):
        solve_dominant(F, 0.0, 0.0, WeightedKernel())
    x = unit.probes()
    np.testing.assert_allclose(solve_dominant(F, 2.0, 0.0, WeightedKernel())(x), F(x) / 2)


# }}}


# {{{ representations


def test_representations_agree_on_manufactured(manufactured):
    spec = manufactured.spec
    assert abs(solvability_moment(spec)) < 1e-12
    assert representation_spread(spec) < 1e-6


def test_representation_four_equals_three(sqrt_spec):
    angle = compute_angle(0.5, 0.5, 0.5)
    x = sqrt_spec.interval.probes()
    j3 = solve_J(sqrt_spec, RepresentationChoice.from_index(3, angle, 0.5))
    j4 = solve_J(sqrt_spec, RepresentationChoice.from_index(4, angle, 0.5))
    np.testing.assert_allclose(j4(x), j3(x), atol=1e-10)


def test_representation_gap_is_predicted(sqrt_spec):
    # reps 1 and 3 differ by a multiple of the homogeneous solution
    angle = compute_angle(0.5, 0.5, 0.5)
    tau = angle.theta_norm
    x = sqrt_spec.interval.probes()
    j1 = solve_J(sqrt_spec, RepresentationChoice.from_index(1, angle, 0.5))
    j3 = solve_J(sqrt_spec, RepresentationChoice.from_index(3, angle, 0.5))
    moment = solvability_moment(sqrt_spec)
    assert abs(moment) > 0.1
    norm = angle.A**2 + angle.B**2
    predicted = -angle.B * moment / (np.pi * norm) * x ** (-tau) * (1 - x) ** (tau - 0.5)
    np.testing.assert_allclose(j3(x) - j1(x), predicted, rtol=1e-9, atol=1e-11)


@pytest.mark.parametrize("index", [3, 4])
def test_forward_consistency(sqrt_spec, index):
    angle = compute_angle(0.5, 0.5, 0.5)
    choice = RepresentationChoice.from_index(index, angle, 0.5)
    assert forward_consistency(sqrt_spec, choice) <= 1e-5


def test_forward_consistency_flags_unsolvable_class(sqrt_spec):
    angle = compute_angle(0.5, 0.5, 0.5)
    choice = RepresentationChoice.from_index(1, angle, 0.5)
    assert forward_consistency(sqrt_spec, choice) > 1e-3


# }}}


# {{{ full pipeline


def test_solve_recovers_manufactured(manufactured):
    bundle = solve(manufactured.spec, 0.3)
    x = manufactured.spec.interval.probes()
    np.testing.assert_allclose(bundle.psi(x), manufactured.psi(x), atol=1e-9)
    assert bundle.residual < 1e-9
    assert bundle.c_hat == pytest.approx(manufactured.c, abs=1e-9)


def test_K_is_fractional_derivative_of_J(manufactured):
    bundle = solve(manufactured.spec, 0.3)
    x = manufactured.spec.interval.probes()
    np.testing.assert_allclose(
        bundle.K_sigma(x), left_frac_derivative(bundle.J, 0.3)(x), rtol=1e-9
    )


def test_solve_zero_rhs(unit):
    bundle = solve(ProblemSpec(unit, 0.5, 0.5, 0.5, zero(unit)), 0.25)
    x = unit.probes()
    assert np.all(bundle.psi(x) == 0.0)
    assert bundle.residual == 0.0 and bundle.c_hat == 0.0


def test_solve_warns_when_class_has_no_solution(sqrt_spec):
    with pytest.warns(UserWarning, match="solvability moment"):
        bundle = solve(sqrt_spec, 0.25)
    assert bundle.choice.index == 1
    assert bundle.residual > 1e-2


def test_solve_with_solvable_representation(sqrt_spec):
    angle = compute_angle(0.5, 0.5, 0.5)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        # rep 3 has J ~ x**-0.75, so its K is integrable only for sigma < 0.25
        bundle = solve(sqrt_spec, 0.2, RepresentationChoice.from_index(3, angle, 0.5))
    assert bundle.residual <= 1e-5


def test_inadmissible_representation_raises(sqrt_spec):
    angle = compute_angle(0.5, 0.5, 0.5)
    with pytest.raises(StageError) as info:
        solve(sqrt_spec, 0.25, RepresentationChoice.from_index(2, angle, 0.5))
    assert info.value.stage == "extract_K"
    assert isinstance(info.value.cause, RegularityViolation)


def test_extract_K_rejects_nonintegrable(unit):
    with pytest.raises(RegularityViolation):
        extract_K(power(unit, -0.5, 0.0), 0.6)


def test_holder_warning_for_rough_rhs(unit):
    f = power(unit, -0.9, 0.5)
    spec = ProblemSpec(unit, 0.5, 0.5, 0.5, f)
    with pytest.warns(UserWarning, match="too singular"):
        try:
            solve(spec, 0.5)
        except StageError:
            pass


def test_deviation_is_linear_in_perturbation(unit):
    # sigma = 0.5 selects rep 1, which is linear in f with no fitted constant
    spec = manufacture_solution(unit, 0.5, 0.8, 0.8, [1.0, 0.3], alpha=0.5).spec
    noise = from_callable(spec.interval, lambda x: np.cos(7 * x), p_a=0.5, p_b=0.5).freeze()

    def deviation(eps):
        perturbed = ProblemSpec(
            spec.interval, spec.alpha, spec.beta, spec.mu, spec.f + noise.scale(eps), spec.c
        )
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            bundle = solve(perturbed, 0.5)
        assert bundle.choice.index == 1
        return bundle.residual

    assert deviation(0.0) < 1e-12
    small, large = deviation(1e-3), deviation(2e-3)
    assert small > 1e4 * deviation(0.0)
    assert large / small == pytest.approx(2.0, rel=1e-3)


def test_psi_is_left_integral_of_J(manufactured):
    bundle = solve(manufactured.spec, 0.3)
    x = manufactured.spec.interval.probes()
    np.testing.assert_allclose(
        reconstruct_psi(bundle.J, manufactured.mu)(x), bundle.psi(x), rtol=1e-12, atol=1e-14
    )
    dev = forward_deviation(bundle.psi, manufactured.spec, x)
    assert np.ptp(dev) < 1e-9


# }}}


# {{{ C~ identity


@pytest.mark.parametrize(
    "alpha, mu, expected", [(0.5, 0.5, 1.0), (0.75, 0.5, 3.0), (0.3, 0.2, None), (0.9, 0.8, None)]
)
def test_ctilde(unit, alpha, mu, expected):
    angle = compute_angle(alpha, 1 - alpha, mu)
    if expected is not None:
        assert ctilde(angle, mu) == pytest.approx(expected, rel=1e-12)
    assert ctilde_check(unit, alpha, 1 - alpha, mu) <= 1e-5


# }}}

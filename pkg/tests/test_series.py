import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from layeredbvp.errors import (
    CenterMismatch,
    DivisionByZeroConstantTerm,
    InsufficientOrder,
    InvalidCoefficient,
    OrderExhausted,
)
from layeredbvp.series import (
    Affine,
    Constant,
    Cos,
    Exponential,
    Polynomial,
    PowerSeries,
    Rational,
    Sin,
    coefficient_from_dict,
    series_combine,
    series_derive,
    series_eval,
    taylor_at,
)


def ps(coeffs, center=0.0):
    return PowerSeries(center, coeffs)


class TestCombine:
    def test_add_cancellation(self):
        out = series_combine(ps([1, 1]), ps([1, -1]), "add")
        np.testing.assert_array_equal(out.coeffs, [2, 0])

    def test_mul_difference_of_squares(self):
        out = series_combine(ps([1, 1, 0]), ps([1, -1, 0]), "mul")
        np.testing.assert_array_equal(out.coeffs, [1, 0, -1])

    def test_div_geometric(self):
        n = 7
        one = ps([1.0] + [0.0] * n)
        den = ps([1.0, -1.0] + [0.0] * (n - 1))
        out = series_combine(one, den, "div")
        np.testing.assert_allclose(out.coeffs, np.ones(n + 1), rtol=1e-14)

    def test_truncates_to_shorter_operand(self):
        out = ps([1, 2, 3, 4]) * ps([1, 1])
        assert out.order == 1
        np.testing.assert_array_equal(out.coeffs, [1, 3])

    def test_center_mismatch(self):
        with pytest.raises(CenterMismatch):
            series_combine(ps([1.0]), ps([1.0], center=0.5), "add")

    def test_div_by_zero_constant(self):
        with pytest.raises(DivisionByZeroConstantTerm):
            series_combine(ps([1, 0]), ps([0, 1]), "div")


class TestDerive:
    def test_power_rule(self):
        out = series_derive(ps([0, 0, 1]))
        np.testing.assert_array_equal(out.coeffs, [0, 2])

    def test_padded_constant(self):
        out = series_derive(ps([3, 0, 0]))
        np.testing.assert_array_equal(out.coeffs, [0, 0])

    def test_geometric_term_by_term(self):
        # oracle: differentiate 1 + x + x^2 + x^3 by the power rule directly
        out = series_derive(ps([1, 1, 1, 1]))
        np.testing.assert_array_equal(out.coeffs, [1, 2, 3])

    def test_order_exhausted(self):
        with pytest.raises(OrderExhausted):
            series_derive(ps([5.0]))


class TestEval:
    def test_at_center(self):
        assert series_eval(ps([1, 1, 0.5]), 0.0) == 1.0

    def test_linear(self):
        assert series_eval(ps([0, 1]), 2.0) == 2.0

    def test_truncated_exp_vs_math_e(self):
        coeffs = [1.0 / math.factorial(k) for k in range(21)]
        assert abs(series_eval(ps(coeffs), 1.0) - math.e) < 1e-12

    def test_vectorized(self):
        out = series_eval(ps([0, 1], center=1.0), np.array([1.0, 2.0, 3.0]))
        np.testing.assert_allclose(out, [0.0, 1.0, 2.0])


class TestTaylorAt:
    def test_exp_at_zero(self):
        out = taylor_at(Exponential(), 0.0, 2)
        np.testing.assert_allclose(out.coeffs, [1.0, 1.0, 0.5], rtol=1e-15)

    def test_constant(self):
        out = taylor_at(Constant(3.0), 0.7, 4)
        np.testing.assert_array_equal(out.coeffs, [3, 0, 0, 0, 0])

    def test_rational_hand_derivatives(self):
        # g = 1/(1+x); at x0=1: g=1/2, g'=-1/4, g''/2 = 1/8
        out = taylor_at(Rational([1.0], [1.0, 1.0]), 1.0, 2)
        np.testing.assert_allclose(out.coeffs, [0.5, -0.25, 0.125], rtol=1e-14)

    def test_recenter_insufficient_order(self):
        with pytest.raises(InsufficientOrder):
            taylor_at(ps([1, 2, 3]), 0.5, 5)


coeff_arrays = st.lists(
    st.floats(min_value=-10, max_value=10, allow_nan=False), min_size=5, max_size=5
)


class TestProperties:
    @given(coeff_arrays, coeff_arrays, coeff_arrays)
    @settings(max_examples=60, deadline=None)
    def test_ring_axioms(self, a, b, c):
        A, B, C = ps(a), ps(b), ps(c)
        lhs = (A + B) + C
        rhs = A + (B + C)
        np.testing.assert_allclose(lhs.coeffs, rhs.coeffs, rtol=1e-13, atol=1e-13)
        lhs = A * (B + C)
        rhs = A * B + A * C
        scale = 1 + np.max(np.abs(lhs.coeffs)) + np.max(np.abs(rhs.coeffs))
        np.testing.assert_allclose(lhs.coeffs / scale, rhs.coeffs / scale, atol=1e-13)

    @given(
        coeff_arrays,
        st.lists(
            st.floats(min_value=-4, max_value=4, allow_nan=False), min_size=4, max_size=4
        ),
        st.sampled_from([-2.0, -1.0, 1.0, 1.5]),
    )
    @settings(max_examples=60, deadline=None)
    def test_div_mul_roundtrip(self, a, btail, b0):
        A = ps(a)
        B = ps([b0] + btail)
        got = (A / B) * B
        scale = 1 + np.max(np.abs(A.coeffs))
        np.testing.assert_allclose(got.coeffs / scale, A.coeffs / scale, atol=1e-12)

    @given(coeff_arrays)
    @settings(max_examples=40, deadline=None)
    def test_derive_matches_finite_difference(self, a):
        A = ps(a, center=0.3)
        h = 1e-6
        fd = (A(0.3 + h) - A(0.3 - h)) / (2 * h)
        exact = A.derive()(0.3)
        assert abs(fd - exact) <= 1e-6 * (1 + abs(exact))

    @given(
        coeff_arrays,
        st.floats(min_value=-0.5, max_value=0.5, allow_nan=False),
    )
    @settings(max_examples=60, deadline=None)
    def test_recentring_roundtrip(self, a, shift):
        A = ps(a, center=0.25)
        back = A.shift(0.25 + shift).shift(0.25)
        scale = 1 + np.max(np.abs(A.coeffs))
        np.testing.assert_allclose(back.coeffs / scale, A.coeffs / scale, atol=1e-12)


def _mpmath_taylor(f, x0, order):
    with mpmath.workdps(40):
        return [float(t) for t in mpmath.taylor(f, x0, order)]


class TestCatalogue:
    @pytest.mark.parametrize(
        "fn,mp_fn",
        [
            (Exponential(2.0, -1.5), lambda x: 2 * mpmath.exp(-1.5 * x)),
            (Sin(1.2, 3.0, 0.4), lambda x: mpmath.mpf("1.2") * mpmath.sin(3 * x + mpmath.mpf("0.4"))),
            (Cos(0.7, 2.0, -0.1), lambda x: mpmath.mpf("0.7") * mpmath.cos(2 * x - mpmath.mpf("0.1"))),
            (Rational([1.0, 2.0], [2.0, 1.0]), lambda x: (1 + 2 * x) / (2 + x)),
            (Polynomial([1.0, 0.0, -3.0, 0.5]), lambda x: 1 - 3 * x**2 + mpmath.mpf("0.5") * x**3),
        ],
    )
    @pytest.mark.parametrize("x0", [0.0, 0.35, 1.0])
    def test_series_matches_mpmath(self, fn, mp_fn, x0):
        order = 8
        got = fn.series(x0, order).coeffs
        want = _mpmath_taylor(mp_fn, x0, order)
        np.testing.assert_allclose(got, want, rtol=1e-12, atol=1e-12)

    @pytest.mark.parametrize(
        "fn",
        [
            Constant(2.5),
            Affine(1.0, 0.5),
            Polynomial([0.0, 1.0, 2.0]),
            Exponential(1.0, 0.7),
            Sin(1.0, 2.0, 0.1),
            Cos(3.0, 1.0, 0.0),
            Rational([1.0], [1.0, 0.5]),
        ],
    )
    def test_derivative_consistent_with_series(self, fn):
        x0 = 0.4
        d = fn.derivative()
        want = fn.series(x0, 3).coeffs[1]  # g'(x0)/1!
        assert abs(float(d(x0)) - want) < 1e-12 * (1 + abs(want))

    def test_dict_roundtrip(self):
        for fn in [
            Constant(1.0),
            Affine(1.0, 0.5),
            Polynomial([1.0, 2.0]),
            Exponential(2.0, -1.0),
            Sin(1.0, 3.14, 0.2),
            Cos(1.0, 1.0, 0.3),
            Rational([1.0, 1.0], [2.0, 1.0]),
        ]:
            d = fn.to_dict()
            rebuilt = coefficient_from_dict(d)
            assert rebuilt.to_dict() == d
            x = np.linspace(0, 1, 11)
            np.testing.assert_allclose(rebuilt(x), fn(x), rtol=1e-15)

    def test_unknown_kind_rejected(self):
        with pytest.raises(InvalidCoefficient):
            coefficient_from_dict({"kind": "spline"})

    def test_vanishing_denominator_rejected(self):
        with pytest.raises(InvalidCoefficient):
            Rational([1.0], [-0.5, 1.0])  # root at x = 0.5

"""Gamma and Kummer functions against mpmath, plus structural identities."""

import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from abdirac import specfun as sf
from conftest import mp_hyperu


class TestGamma:
    @pytest.mark.parametrize("x", [0.5, 1.0, 1.25, 3.7, 10.0, 25.5, 0.001, -0.5, -1.5, -2.25, -7.9, -30.3])
    def test_matches_mpmath(self, x):
        ref = float(mp.gamma(x))
        got = sf.gamma(x)
        assert abs(got - ref) <= 1e-13 * abs(ref), f"Gamma({x}) = {got}, mpmath says {ref}"

    def test_frozen_values(self):
        # computed with mpmath at 30 digits
        assert sf.gamma(1.25) == pytest.approx(0.906402477055477077982671288967, rel=1e-14)
        assert sf.gamma(0.25) / sf.gamma(0.75) == pytest.approx(2.95867511918863889231082135773, rel=1e-14)

    @pytest.mark.parametrize("n", [0, -1, -2, -10])
    def test_poles_raise(self, n):
        with pytest.raises(sf.PoleError):
            sf.gamma(float(n))

    def test_integers_are_factorials(self):
        for n in range(1, 20):
            assert sf.gamma(float(n)) == pytest.approx(math.factorial(n - 1), rel=1e-14), f"Gamma({n}) != {n - 1}!"

    @given(st.floats(min_value=-40.0, max_value=40.0).filter(lambda x: abs(x - round(x)) > 1e-6 or x > 0.5))
    @settings(max_examples=200, deadline=None)
    def test_recurrence(self, x):
        """Gamma(x + 1) = x Gamma(x) to 1e-12."""
        lhs, rhs = sf.gamma(x + 1.0), x * sf.gamma(x)
        assert abs(lhs - rhs) <= 1e-12 * abs(lhs), f"recurrence broken at x={x}: {lhs} vs {rhs}"

    @given(st.floats(min_value=0.01, max_value=0.99))
    @settings(max_examples=100, deadline=None)
    def test_reflection(self, x):
        """Gamma(x) Gamma(1-x) = pi / sin(pi x)."""
        lhs = sf.gamma(x) * sf.gamma(1.0 - x)
        rhs = math.pi / math.sin(math.pi * x)
        assert lhs == pytest.approx(rhs, rel=1e-13)

    def test_overflow_is_infinite(self):
        assert sf.gamma(200.0) == math.inf

    def test_sinpi_exact_at_integers(self):
        for k in range(-5, 6):
            assert sf.sinpi(float(k)) == 0.0, f"sinpi({k}) should vanish exactly"
        assert sf.sinpi(0.5) == 1.0


class TestLogAndReciprocalGamma:
    @pytest.mark.parametrize("x", [0.3, 2.5, 50.0, 170.5, 500.0, -3.5, -100.25])
    def test_lgamma_matches_mpmath(self, x):
        ref = float(mp.log(abs(mp.gamma(x))))
        assert sf.lgamma(x) == pytest.approx(ref, rel=1e-13, abs=1e-13)

    @pytest.mark.parametrize("x", [-3.5, -0.5, 0.5, 3.5])
    def test_gamma_sign(self, x):
        assert sf.gamma_sign(x) == math.copysign(1.0, float(mp.gamma(x)))

    def test_rgamma_zero_at_poles(self):
        for n in range(0, 6):
            assert sf.rgamma(-float(n)) == 0.0

    def test_rgamma_matches_reciprocal(self):
        assert sf.rgamma(3.3) == pytest.approx(1.0 / float(mp.gamma(3.3)), rel=1e-14)


class TestGammaRatio:
    def test_regular(self):
        assert sf.gamma_ratio(0.25, 0.75) == pytest.approx(2.95867511918863889231, rel=1e-14)

    def test_denominator_pole_gives_zero(self):
        assert sf.gamma_ratio(0.25, 0.0) == 0.0
        assert sf.gamma_ratio(1.5, -3.0) == 0.0

    def test_numerator_pole_gives_signed_infinity(self):
        # sign of Gamma(-n + eps) is (-1)^n
        assert sf.gamma_ratio(0.0, 0.5) == math.inf
        assert sf.gamma_ratio(-1.0, 0.5) == -math.inf
        assert sf.gamma_ratio(-1.0, -0.5) == math.inf  # Gamma(-0.5) < 0

    @pytest.mark.parametrize("n,k", [(0, 0), (2, 1), (1, 3), (5, 2)])
    def test_both_poles_residue_ratio(self, n, k):
        ref = float(mp.limit(lambda e: mp.gamma(-n + e) / mp.gamma(-k + e), 0))
        assert sf.gamma_ratio(-float(n), -float(k)) == pytest.approx(ref, rel=1e-13)

    def test_large_arguments_via_logs(self):
        ref = float(mp.gamma(180.5) / mp.gamma(179.25))
        assert sf.gamma_ratio(180.5, 179.25) == pytest.approx(ref, rel=1e-12)


class TestKummerM:
    @pytest.mark.parametrize(
        "a,b,z,ref",
        [
            # mpmath hyp1f1 at 30 digits
            (0.5, 1.5, 2.0, 2.36445389280520928459715937138),
            (-3.0, 0.25, 7.0, -100.422222222222222222222222222),
            (2.5, 0.75, 30.0, 4121849805559783.71059959964866),
        ],
    )
    def test_frozen_values(self, a, b, z, ref):
        assert sf.kummer_m(a, b, z) == pytest.approx(ref, rel=1e-13)

    def test_vectorised(self):
        z = np.array([0.0, 0.5, 4.0])
        got = sf.kummer_m(0.3, 1.7, z)
        ref = [float(mp.hyp1f1(0.3, 1.7, v)) for v in z]
        np.testing.assert_allclose(got, ref, rtol=1e-14)

    def test_polynomial_when_a_is_nonpositive_integer(self):
        # M(-1, 1.75, z) = 1 - z / 1.75
        z = np.linspace(0, 10, 7)
        np.testing.assert_allclose(sf.kummer_m(-1.0, 1.75, z), 1.0 - z / 1.75, rtol=1e-15, atol=1e-15)

    def test_pole_b_rejected(self):
        with pytest.raises(sf.ParameterError):
            sf.kummer_m(0.5, -2.0, 1.0)

    def test_negative_z_rejected(self):
        with pytest.raises(sf.ParameterError):
            sf.kummer_m(0.5, 1.5, -1.0)

    def test_term_cap_raises(self):
        with pytest.raises(sf.ConvergenceError):
            sf.kummer_m(0.5, 1.5, 50.0, max_terms=5)

    @given(
        st.floats(min_value=-6.0, max_value=6.0),
        st.floats(min_value=0.1, max_value=4.0),
        st.floats(min_value=0.01, max_value=8.0),
    )
    @settings(max_examples=80, deadline=None)
    def test_kummer_equation_residual(self, a, b, z):
        """z M'' + (b - z) M' - a M = 0 with derivatives from the contiguous relations."""
        m0 = sf.kummer_m(a, b, z)
        m1 = sf.kummer_m_deriv(a, b, z)
        m2 = (a / b) * ((a + 1) / (b + 1)) * sf.kummer_m(a + 2, b + 2, z)
        scale = abs(z * m2) + abs((b - z) * m1) + abs(a * m0) + 1e-300
        assert abs(z * m2 + (b - z) * m1 - a * m0) <= 1e-9 * scale


class TestKummerU:
    @pytest.mark.parametrize(
        "a,b,z,ref",
        [
            # mpmath hyperu at 30 digits
            (1.2, 0.4, 0.5, 0.551350546576970172851074282458),
            (-2.3, 0.75, 5.0, 7.51962791597810149217512917911),
            (0.3, 0.6, 60.0, 0.291782402807059110553565563516),
            (-7.7, 0.5, 3.0, -8328.42550149723738400531318533),
            (-20.25, 0.25, 10.0, -69103268379052485911.6579826735),
            (2.0, 1.5, 1e-6, 1768.45916293816338731014593554),
        ],
    )
    def test_frozen_values(self, a, b, z, ref):
        assert sf.kummer_u(a, b, z) == pytest.approx(ref, rel=1e-11)

    @pytest.mark.parametrize("a", [0.0, -1.0, -3.0, -9.0])
    @pytest.mark.parametrize("b", [0.5, 1.5, 2.5])
    def test_terminating_in_a(self, a, b):
        z = np.array([1e-10, 1e-4, 0.5, 3.0, 10.0, 40.0, 100.0])
        got = sf.kummer_u(a, b, z)
        ref = np.array([mp_hyperu(a, b, v) for v in z])
        np.testing.assert_allclose(got, ref, rtol=1e-11, atol=1e-11, err_msg=f"U({a}, {b}, z)")

    @pytest.mark.parametrize("a,b", [(-8.5, 0.5), (-7.5, 1.5), (-6.25, 0.75), (0.25, 1.25)])
    def test_terminating_in_a_minus_b(self, a, b):
        """a - b + 1 a non-positive integer: U = z^(1-b) times a polynomial."""
        z = np.array([1e-8, 0.3, 2.5, 12.0, 80.0])
        got = sf.kummer_u(a, b, z)
        ref = np.array([mp_hyperu(a, b, v) for v in z])
        np.testing.assert_allclose(got, ref, rtol=1e-11, err_msg=f"U({a}, {b}, z)")

    @pytest.mark.parametrize("a,b,z", [(-24.0, 1.5, 5.0), (-25.0, 0.8, 12.0), (-20.5, 0.5, 7.0)])
    def test_high_degree_terminating_no_cancellation(self, a, b, z):
        """The explicit alternating sum loses ~8 digits at degree 25; the result must not."""
        ref = mp_hyperu(a, b, z)
        assert sf.kummer_u(a, b, z) == pytest.approx(ref, rel=1e-12), f"U({a}, {b}, {z})"

    @given(
        st.floats(min_value=-26.0, max_value=3.0),
        st.floats(min_value=0.05, max_value=2.95).filter(lambda b: abs(b - round(b)) > 0.02),
        st.floats(min_value=1e-6, max_value=150.0),
    )
    @settings(max_examples=150, deadline=None)
    def test_random_against_mpmath(self, a, b, z):
        got = sf.kummer_u(a, b, z)
        ref = mp_hyperu(a, b, z)
        scale = max(abs(ref), 1e-300)
        assert abs(got - ref) <= 1e-9 * scale + 1e-300, f"U({a}, {b}, {z}) = {got}, mpmath {ref}"

    def test_value_at_zero_is_limit(self):
        # b < 1: U(a, b, 0) = Gamma(1-b) / Gamma(1+a-b)
        ref = float(mp.gamma(0.5) / mp.gamma(1.2))
        assert sf.kummer_u(0.7, 0.5, 0.0) == pytest.approx(ref, rel=1e-14)

    def test_integer_b_rejected(self):
        with pytest.raises(sf.ParameterError):
            sf.kummer_u(0.5, 1.0, 1.0)

    @pytest.mark.parametrize("a,b", [(-0.3, 0.75), (-4.6, 0.25), (1.7, 1.5)])
    def test_connection_meets_laplace_in_overlap_band(self, a, b):
        z = np.linspace(1.5, 3.0, 7)
        conn = sf._u_connection(a, b, z)
        lap = sf._u_laplace(a, b, z)
        np.testing.assert_allclose(conn, lap, rtol=1e-10, err_msg="connection vs Laplace branch")

    @pytest.mark.parametrize("a,b", [(-0.3, 0.75), (-4.6, 0.25), (1.7, 1.5)])
    def test_laplace_meets_asymptotic_in_overlap_band(self, a, b):
        z = np.linspace(40.0, 60.0, 5)
        asym, err = sf._u_asymptotic(a, b, z)
        assert np.all(err < 1e-12), "asymptotic series should be accurate this far out"
        np.testing.assert_allclose(sf._u_laplace(a, b, z), asym, rtol=1e-10)

    @given(
        st.floats(min_value=-8.0, max_value=3.0),
        st.floats(min_value=0.1, max_value=1.9).filter(lambda b: abs(b - 1.0) > 0.02),
        st.floats(min_value=0.05, max_value=40.0),
    )
    @settings(max_examples=80, deadline=None)
    def test_kummer_equation_residual(self, a, b, z):
        """z U'' + (b - z) U' - a U = 0, with U' = -a U(a+1, b+1) and U'' = a(a+1) U(a+2, b+2)."""
        u0 = sf.kummer_u(a, b, z)
        u1 = sf.kummer_u_deriv(a, b, z)
        u2 = a * (a + 1) * sf.kummer_u(a + 2, b + 2, z)
        scale = abs(z * u2) + abs((b - z) * u1) + abs(a * u0) + 1e-300
        assert abs(z * u2 + (b - z) * u1 - a * u0) <= 1e-9 * scale

    @pytest.mark.parametrize("a,b,z", [(0.4, 0.75, 0.8), (-2.6, 0.25, 5.0), (-0.5, 1.5, 20.0)])
    def test_derivative_matches_finite_difference(self, a, b, z):
        h = 1e-4 * z
        fd = (
            sf.kummer_u(a, b, z - 2 * h)
            - 8 * sf.kummer_u(a, b, z - h)
            + 8 * sf.kummer_u(a, b, z + h)
            - sf.kummer_u(a, b, z + 2 * h)
        ) / (12 * h)
        assert fd == pytest.approx(sf.kummer_u_deriv(a, b, z), rel=1e-7)

    def test_m_derivative_matches_finite_difference(self):
        a, b, z = -2.5, 0.75, 3.0
        h = 1e-4
        fd = (
            sf.kummer_m(a, b, z - 2 * h)
            - 8 * sf.kummer_m(a, b, z - h)
            + 8 * sf.kummer_m(a, b, z + h)
            - sf.kummer_m(a, b, z + 2 * h)
        ) / (12 * h)
        assert fd == pytest.approx(sf.kummer_m_deriv(a, b, z), rel=1e-7)


class TestGaussLaguerre:
    @pytest.mark.parametrize("alpha", [-0.5, 0.0, 0.7])
    def test_integrates_polynomials_exactly(self, alpha):
        x, w = sf.gauss_laguerre(20, alpha)
        for k in range(6):
            ref = math.gamma(alpha + k + 1)
            assert float(w @ x**k) == pytest.approx(ref, rel=1e-12), f"moment {k} for alpha={alpha}"

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from liouvillian_hill.errors import InconsistentFactorization, NotAPole
from liouvillian_hill.pbhe import PBHEParams, to_normal_form
from liouvillian_hill.poly_rational import (
    INFINITY,
    PartialFraction,
    Poly,
    RationalFn,
    laurent_at_infinity,
    laurent_at_pole,
    order_at_infinity,
    partial_fractions,
    poly_arith,
)

coeff = st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False)
small_poly = st.lists(coeff, min_size=1, max_size=5).map(Poly)


class TestPoly:
    def test_trailing_zeros_trimmed(self):
        assert Poly([1, 2, 0, 0]).coeffs == (1, 2)
        assert Poly([0, 0]).is_zero

    def test_zero_degree_is_minus_infinity(self):
        assert Poly([]).degree == -math.inf
        assert Poly([3]).degree == 0

    def test_derive_power_rule(self):
        assert poly_arith(Poly([0, 0, 1]), kind="derive") == Poly([0, 2])

    def test_mul_difference_of_squares(self):
        assert poly_arith(Poly([-1, 1]), Poly([1, 1]), "mul") == Poly([-1, 0, 1])

    def test_eval_at_zero(self):
        K3 = 1.7
        assert poly_arith(Poly([0, -K3, 1]), 0.0, "eval") == 0

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            poly_arith(Poly([1]), Poly([1]), "pow")

    @given(small_poly, st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False))
    def test_horner_matches_power_sum(self, p, x):
        direct = sum(c * x**k for k, c in enumerate(p.coeffs))
        assert abs(p(x) - direct) <= 1e-9 * (1 + p.abs_bound(x))

    @given(small_poly, small_poly)
    def test_divmod_reconstructs(self, a, b):
        if b.trim(1e-6).is_zero or abs(b.lead) < 1e-3:
            return
        q, r = a.divmod(b)
        assert (q * b + r - a).norm() <= 1e-8 * (1 + a.norm()) * (1 + q.norm())
        assert r.degree < b.degree

    @given(small_poly, coeff)
    def test_taylor_shift(self, p, c):
        t = p.taylor(c)
        x = c + 0.3 - 0.1j
        assert abs(sum(v * (x - c) ** k for k, v in enumerate(t)) - p(x)) <= 1e-8 * (1 + p.abs_bound(x)) * (1 + abs(c)) ** 4

    def test_reverse(self):
        assert Poly([1, 2, 3]).reverse() == Poly([3, 2, 1])
        assert Poly([1, 2]).reverse(3) == Poly([0, 0, 2, 1])

    def test_vectorised_eval(self):
        x = np.array([0.0, 1.0, 2.0])
        np.testing.assert_allclose(Poly([1, 0, 1])(x), [1, 2, 5])


class TestRationalFn:
    def test_numerator_vanishing_at_pole_rejected(self):
        with pytest.raises(InconsistentFactorization):
            RationalFn(Poly([0, 1]), ((0, 1),))

    def test_from_factored_checks_denominator(self):
        r = RationalFn.from_factored(Poly([1]), Poly([0, 0, 2]), ((0, 2),))
        assert abs(r(2.0) - 1 / 8) < 1e-15
        with pytest.raises(InconsistentFactorization):
            RationalFn.from_factored(Poly([1]), Poly([1, 0, 1]), ((0, 2),))

    def test_close_poles_rejected(self):
        with pytest.raises(ValueError):
            RationalFn(Poly([1]), ((0, 1), (1e-9, 1)))

    def test_reduced_cancels_common_factor(self):
        r = RationalFn.reduced(Poly([0, 0, 1]), {0j: 3})
        assert r.poles == ((0j, 1),)

    def test_addition_cancels_poles(self):
        a = RationalFn(Poly([1]), ((1, 1),))
        assert (a - a).numerator.is_zero
        s = a + RationalFn(Poly([1]), ((1, 2),))
        assert abs(s(3.0) - (0.5 + 0.25)) < 1e-14

    def test_not_a_pole(self):
        with pytest.raises(NotAPole):
            laurent_at_pole(RationalFn(Poly([1]), ((0, 1),)), 1.0)


class TestOrderAtInfinity:
    def test_pbhe_normal_form(self):
        assert order_at_infinity(to_normal_form(PBHEParams(-1, 0.5, 2, 1))) == -2

    def test_inverse_square(self):
        assert order_at_infinity(RationalFn(Poly([1]), ((0, 2),))) == 2

    def test_quadratic(self):
        assert order_at_infinity(RationalFn(Poly([0, 0, 1]))) == -2

    def test_quartic_polynomial(self):
        # deg(den) - deg(num) for r = x^4
        assert order_at_infinity(RationalFn(Poly([0, 0, 0, 0, 1]))) == -4


def random_rational(rng, n_poles=2):
    poles = tuple((complex(*rng.uniform(-2, 2, 2)), int(rng.integers(1, 3))) for _ in range(n_poles))
    num = Poly(rng.normal(size=int(rng.integers(1, 5))) + 1j * rng.normal(size=1))
    return RationalFn.reduced(num, {c: m for c, m in poles})


class TestLaurent:
    def test_pbhe_inverse_square_coefficient(self):
        K0 = -0.7
        data = laurent_at_pole(to_normal_form(PBHEParams(K0, 0.3, 2, 1)), 0, 2)
        assert abs(data.coefficient(-2) - (-0.25 - K0)) < 1e-14

    def test_simple_pole(self):
        data = laurent_at_pole(RationalFn(Poly([1]), ((0, 1),)), 0, 3)
        assert data.nonzero() == {-1: 1}

    def test_double_pole_expansion(self):
        # 1/(x-1)^2 + 3/(x-1) = (3x - 2)/(x-1)^2
        r = RationalFn(Poly([-2, 3]), ((1, 2),))
        data = laurent_at_pole(r, 1, 3)
        assert abs(data.coefficient(-2) - 1) < 1e-14 and abs(data.coefficient(-1) - 3) < 1e-14
        assert all(abs(data.coefficient(k)) < 1e-14 for k in range(0, 4))

    def test_infinity_pbhe(self):
        K1, K2, K3, K0 = 0.4, 2.0, 1.5, -0.3
        data = laurent_at_infinity(to_normal_form(PBHEParams(K0, K1, K2, K3)), 2)
        assert data.location is INFINITY
        expected = {2: 1, 1: -K3, 0: -K2, -1: -K1, -2: -0.25 - K0}
        for k, v in expected.items():
            assert abs(data.coefficient(k) - v) < 1e-14

    def test_infinity_inverse_square(self):
        assert laurent_at_infinity(RationalFn(Poly([1]), ((0, 2),)), 3).nonzero() == {-2: 1}

    def test_infinity_division(self):
        assert laurent_at_infinity(RationalFn(Poly([1, 0, 0, 1]), ((0, 1),)), 3).nonzero() == {2: 1, -1: 1}

    @given(st.integers(0, 10_000))
    def test_principal_part_removes_singularity(self, seed):
        rng = np.random.default_rng(seed)
        r = random_rational(rng)
        for c, m in r.poles:
            pp = laurent_at_pole(r, c, 0).principal_part()
            vals = []
            for rad in (1e-2, 1e-3, 1e-4):
                x = c + rad * np.exp(1j * np.linspace(0, 2 * np.pi, 8, endpoint=False))
                vals.append(np.max(np.abs(r(x) - sum(v * (x - c) ** k for k, v in pp.items()))))
            scale = 1 + max(abs(v) for v in pp.values())
            # remainder tends to a finite value; roundoff grows like eps * scale / rad^m
            assert vals[-1] <= 2 * vals[1] + 1e-6 * scale


class TestPartialFractions:
    def test_cover_up(self):
        pf = partial_fractions(RationalFn(Poly([1]), ((0, 1), (1, 1))))
        got = {(c, e): v for c, e, v in pf.terms}
        assert abs(got[(0, -1)] + 1) < 1e-14 and abs(got[(1, -1)] - 1) < 1e-14

    def test_pbhe(self):
        K0, K1, K2, K3 = -0.6, 0.8, 1.1, 0.3
        pf = partial_fractions(to_normal_form(PBHEParams(K0, K1, K2, K3)))
        assert (pf.poly - Poly([-K2, -K3, 1])).norm() < 1e-14
        got = {e: v for _, e, v in pf.terms}
        assert abs(got[-1] + K1) < 1e-14 and abs(got[-2] - (-0.25 - K0)) < 1e-14

    def test_two_residues(self):
        pf = partial_fractions(RationalFn(Poly([0, 2]), ((1, 1), (-1, 1))))
        got = {c: v for c, _, v in pf.terms}
        assert abs(got[1] - 1) < 1e-14 and abs(got[-1] - 1) < 1e-14

    @given(st.integers(0, 10_000))
    def test_round_trip(self, seed):
        rng = np.random.default_rng(seed)
        r = random_rational(rng, int(rng.integers(1, 4)))
        pf = partial_fractions(r)
        back = pf.to_rational()
        pts = np.array([complex(*rng.uniform(-3, 3, 2)) for _ in range(10)])
        pts = pts[[all(abs(x - c) > 0.1 for c, _ in r.poles) for x in pts]]
        assert np.all(np.abs(pf(pts) - r(pts)) <= 1e-10 * np.abs(r(pts)) + 1e-12)
        assert np.all(np.abs(back(pts) - r(pts)) <= 1e-10 * np.abs(r(pts)) + 1e-12)

    def test_integral_differentiates_back(self):
        pf = PartialFraction(Poly([1, 2]), ((0.5, -1, 2.0), (0.5, -2, 1.0), (-1, -1, 0.5j)))
        x, h = 1.3 + 0.4j, 1e-5
        fd = (pf.integral(x + h) - pf.integral(x - h)) / (2 * h)
        assert abs(fd - pf(x)) < 1e-8


@given(st.integers(0, 10_000))
def test_order_at_infinity_additive(seed):
    rng = np.random.default_rng(seed)
    a, b = random_rational(rng), random_rational(rng)
    prod = a * b
    assert order_at_infinity(prod) == order_at_infinity(a) + order_at_infinity(b)

import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from liouvillian_hill.errors import ConditionNotMet, PochhammerPole
from liouvillian_hill.pbhe import (
    PBHEParams,
    bessel_transform,
    build_solution,
    build_solutions,
    degenerate_solutions,
    eigenvalues_K1,
    eval_derivative,
    eval_solution,
    k_constants,
    quantization_n,
    recurrence_A,
    to_generalized_bessel,
    to_normal_form,
    trial_function,
)
from liouvillian_hill.poly_rational import partial_fractions
from liouvillian_hill.verify import standard_grid
from oracles import case2_params, determinant_roots, fd_second, pbhe_potential

P046 = PBHEParams(K0=-1, K2=4.0)
P061 = PBHEParams(K0=-1, K2=6.0)


class TestTransforms:
    def test_bessel_quartic_coefficient(self):
        g = to_generalized_bessel(PBHEParams(K0=-0.3, K1=1, K2=2, K3=3))
        assert g.coeffs[4] == -1
        assert g.potential_poly() == type(g.potential_poly())([-0.3, 1, 2, 3, -1])

    def test_bessel_zero_parameters(self):
        g = to_generalized_bessel(PBHEParams(K0=0))
        assert {k: v for k, v in g.coeffs.items() if v != 0} == {4: -1}

    def test_general_h_odd_power(self):
        # f'' + e^z f = 0 with x = e^{z/2}: x^2 Psi'' + x Psi' + 4 x^2 Psi = 0
        g = bessel_transform({1: 1.0})
        assert g.h == 2 and g.coeffs == {2: 4}

    def test_bessel_transform_by_substitution(self):
        # x^2 Psi'' + x Psi' = h^2 f_zz for Psi(x) = f(h log x), here f = exp(sin z)
        h = 2
        z = 0.37
        fzz = fd_second(lambda w: np.exp(np.sin(w)), z, 1e-3)
        x = np.exp(z / h)
        psi = lambda xx: np.exp(np.sin(h * np.log(xx)))
        dx = 1e-5 * x
        d1 = (psi(x + dx) - psi(x - dx)) / (2 * dx)
        d2 = (psi(x + dx) - 2 * psi(x) + psi(x - dx)) / dx**2
        assert abs(x * x * d2 + x * d1 - h**2 * fzz) < 1e-4

    def test_normal_form_example(self):
        r = to_normal_form(PBHEParams(K0=-1, K2=4.0))
        for x in (0.7, 1.3 + 0.2j):
            assert abs(r(x) - (x * x - 4 + 0.75 / x**2)) < 1e-13

    def test_normal_form_zero_parameters(self):
        r = to_normal_form(PBHEParams(K0=0))
        assert abs(r(2.0) - (4 - 0.25 / 4)) < 1e-14

    def test_normal_form_degenerate_drops_double_pole(self):
        r = to_normal_form(PBHEParams(K0=-0.25, K1=0.5, K2=1.0))
        assert r.pole_orders == {0j: 1}
        r0 = to_normal_form(PBHEParams(K0=-0.25, K2=1.0))
        assert r0.poles == ()

    @given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3))
    def test_normal_form_removes_first_derivative(self, K0, K1, K2, K3):
        # u(x) = sqrt(x) Psi(x) turns x^2 Psi'' + x Psi' + V Psi = 0 into u'' = r u
        p = PBHEParams(K0=K0, K1=K1, K2=K2, K3=K3)
        if p.degenerate:
            return
        pf = partial_fractions(to_normal_form(p))
        x = 1.1
        V = -x**4 + K3 * x**3 + K2 * x**2 + K1 * x + K0
        assert abs(pf(x) - (-(V + 0.25) / x**2)) < 1e-12 * (1 + abs(V))


class TestQuantization:
    @pytest.mark.parametrize("K2, n", [(4.0, 0), (6.0, 1), (3.0, None)])
    def test_examples(self, K2, n):
        assert quantization_n(PBHEParams(K0=-1, K2=K2)) == n

    def test_k_constants(self):
        kc = k_constants(P061)
        assert kc.k1(2.5) == 2.5
        assert abs(kc.k2 - 2) < 1e-15

    def test_k1_intercept(self):
        p = PBHEParams(K0=-2.25, K2=1.0, K3=0.8)
        assert abs(k_constants(p).intercept - 0.5 * (1 + 3) * 0.8) < 1e-15

    @given(st.integers(0, 10_000), st.integers(0, 8))
    def test_k2_identity(self, seed, n):
        rng = np.random.default_rng(seed)
        p = PBHEParams(**case2_params(rng, n))
        assert quantization_n(p) == n
        assert abs(k_constants(p).k2 + 2 * p.eps_inf * n) < 1e-10


class TestEigenvalues:
    def test_n0(self):
        e = eigenvalues_K1(P046, 0)
        assert np.allclose(e.K1_values, [0.0])
        np.testing.assert_allclose(e.entries[0].A, [1, 0], atol=1e-15)

    def test_n1(self):
        e = eigenvalues_K1(P061, 1)
        np.testing.assert_allclose(e.K1_values, [-math.sqrt(6), math.sqrt(6)], atol=1e-12)

    def test_recurrence_example(self):
        A = recurrence_A(P061, 1, math.sqrt(6))
        np.testing.assert_allclose(A, [1, -math.sqrt(6), 0], atol=1e-13)

    def test_non_eigenvalue_does_not_terminate(self):
        assert abs(recurrence_A(P061, 1, 1.0)[-1]) > 1

    def test_quantization_mismatch(self):
        with pytest.raises(ConditionNotMet):
            eigenvalues_K1(PBHEParams(K0=-1, K2=3.0))
        with pytest.raises(ConditionNotMet):
            eigenvalues_K1(P061, 2)

    @given(st.floats(-3, 3), st.floats(0.2, 2))
    def test_symmetric_when_K3_zero(self, _, root):
        p = PBHEParams(K0=-root * root, K2=4 + 2 * root)
        K1 = eigenvalues_K1(p, 1).K1_values
        assert abs(K1[0] + K1[1]) < 1e-12 * max(1, abs(K1[0]))

    @given(st.integers(0, 10_000), st.integers(0, 8))
    def test_matches_determinant_oracle(self, seed, n):
        rng = np.random.default_rng(seed)
        kw = case2_params(rng, n)
        got = eigenvalues_K1(PBHEParams(**kw), n).K1_values
        ref = determinant_roots(kw["K0"], kw["K2"], kw["K3"], n)
        assert np.all(np.abs(got.imag) == 0)
        np.testing.assert_allclose(np.sort(got.real), np.sort(ref.real), atol=1e-7 * max(1, np.max(np.abs(ref))))
        gaps = np.diff(np.sort(got.real))
        assert n == 0 or np.min(gaps) > 1e-9 * np.max(np.abs(got))

    @given(st.integers(0, 10_000), st.integers(0, 5))
    def test_complex_parameters(self, seed, n):
        rng = np.random.default_rng(seed)
        K0 = complex(-rng.uniform(0.5, 2), rng.uniform(-1, 1))
        K3 = complex(*rng.uniform(-1, 1, 2))
        p0 = PBHEParams(K0=K0, K3=K3, eps0=1, eps_inf=1)
        # choose K2 so the quantization condition holds for n
        K2 = -2 * (n + 1) - K3**2 / 4 - 2 * p0.eps0 * p0.eps_inf * p0.sqrtK0
        p = PBHEParams(K0=K0, K2=K2, K3=K3, eps0=1, eps_inf=1)
        got = eigenvalues_K1(p, n).K1_values
        ref = determinant_roots(K0, K2, K3, n, eps0=1, eps_inf=1)
        for v in got:
            assert np.min(np.abs(ref - v)) < 1e-6 * max(1, np.max(np.abs(ref)))

    def test_pochhammer_pole(self):
        # 1 + 2d = -1 with n = 2 hits (1+2d)_2 = 0
        K2 = 2 * 3 - 0.5**2 / 4 - 2
        p = PBHEParams(K0=-1, K2=K2, K3=0.5, eps0=-1)
        with pytest.raises(PochhammerPole):
            build_solution(p, 2, 0)


def explicit_n0(z):
    return np.exp(-np.exp(2 * z) / 2 + z)


class TestSolutions:
    def test_explicit_n0(self):
        s = build_solution(P046, 0, 0)
        z = np.array([-2, 0.0, 0.5 + 1j])
        np.testing.assert_allclose(s(z), explicit_n0(z), rtol=1e-14)
        assert abs(eval_solution(s, 0.0) - math.exp(-0.5)) < 1e-15

    def test_n1_polynomial(self):
        s = build_solution(P061, 1, 1)
        np.testing.assert_allclose(s.P.array(2), [1, -math.sqrt(6) / 3], atol=1e-14)

    def test_shared_exponential_part(self):
        sols = build_solutions(PBHEParams(K0=-1.44, K2=3 * 2 + 2.4 - 0.09, K3=0.6), 2)
        assert len({(s.expo_quadratic, s.expo_linear, s.expo_z) for s in sols}) == 1

    def test_derivatives_match_finite_differences(self):
        s = build_solution(PBHEParams(K0=-0.81, K2=2 * 3 + 1.8 - 0.25, K3=1.0), 2, 1)
        for z in (-1.0, 0.2 + 0.7j):
            h = 1e-5
            fd1 = (s(z + h) - s(z - h)) / (2 * h)
            assert abs(s.derivative(z) - fd1) < 1e-7 * (1 + abs(fd1))
            assert abs(eval_derivative(s, z) - s.derivative(z)) < 1e-12 * (1 + abs(fd1))
            assert abs(s.second_derivative(z) - fd_second(s, z)) < 1e-6 * (1 + abs(s.second_derivative(z)))

    def test_y_form_matches(self):
        for s in build_solutions(PBHEParams(K0=-2.0, K2=8 + 2 * math.sqrt(2) - 0.04, K3=-0.4), 3):
            z = np.array([-1.0, 0.3 + 2j])
            np.testing.assert_allclose(s.eval_Y_form(z), s(z), rtol=1e-11)

    @given(st.integers(0, 10_000), st.integers(0, 4))
    def test_residual_on_standard_grid(self, seed, n):
        p = PBHEParams(**case2_params(np.random.default_rng(seed), n))
        grid = standard_grid()
        for s in build_solutions(p, n):
            assert np.max(s.residual(grid)) < 1e-8

    @given(st.integers(0, 10_000), st.integers(0, 4))
    def test_residual_against_independent_potential(self, seed, n):
        kw = case2_params(np.random.default_rng(seed), n)
        for s in build_solutions(PBHEParams(**kw), n):
            z = np.linspace(-3, 1.5, 7) + 0.4j
            f, fpp = s(z), s.second_derivative(z)
            V = pbhe_potential(z, kw["K0"], s.K1, kw["K2"], kw["K3"])
            assert np.all(np.abs(fpp + V * f) < 1e-8 * (1 + np.abs(fpp)))

    @given(st.integers(0, 10_000), st.integers(0, 4))
    def test_boundary_decay(self, seed, n):
        kw = case2_params(np.random.default_rng(seed), n)
        kw["K0"] = -max(1.0, -kw["K0"])       # e^{-30 sqrt(-K0)} below 1e-12 needs sqrt(-K0) >~ 0.93
        kw["K2"] = 2 * (n + 1) - kw["K3"] ** 2 / 4 + 2 * math.sqrt(-kw["K0"])
        for s in build_solutions(PBHEParams(**kw), n):
            for x in (-30.0, 30.0):
                assert abs(s(x)) < 1e-12 and abs(s.derivative(x)) < 1e-12

    @given(st.integers(0, 10_000), st.integers(0, 4))
    def test_left_tail_rate(self, seed, n):
        p = PBHEParams(**case2_params(np.random.default_rng(seed), n))
        for s in build_solutions(p, n):
            x = -30.0
            lead = s.P(0) * math.exp(p.d.real * x)
            assert abs(s(x) - lead) < 1e-6 * abs(lead)
            assert abs(s.derivative(x) - p.d * lead) < 1e-6 * abs(lead)

    def test_no_overflow_far_right(self):
        s = build_solution(P061, 1, 0)
        assert s(10.0) == 0 and np.isfinite(s.log_eval(10.0).real)

    def test_shift_by_2pi_i(self):
        p = PBHEParams(K0=-0.3, K2=4 + 2 * math.sqrt(0.3), K3=0.0)
        s = build_solution(p, 1, 0)
        z = 0.2 - 0.3j
        assert abs(s(z + 2j * math.pi) - cmath.exp(2j * math.pi * p.d) * s(z)) < 1e-12 * abs(s(z))

    def test_perturbed_K1_breaks_residual(self):
        s = build_solution(P061, 1, 1)
        bad = type(s)(s.n, s.nu, s.P, s.Y, s.params.with_K1(s.K1 + 1e-3))
        assert np.max(bad.residual(standard_grid())) > 1e-5

    def test_trial_function_is_not_a_solution(self):
        t = trial_function(P061, 1, math.sqrt(6) + 0.1)
        assert t.n == 2 and np.max(t.residual(standard_grid())) > 1e-3


class TestDegenerate:
    def test_k1_zero_branch(self):
        (s,) = degenerate_solutions(PBHEParams(K0=-0.25, K2=1.0))
        assert s.n == 0 and s.P == type(s.P)([1])
        assert np.max(s.residual(standard_grid())) < 1e-12

    def test_k1_nonzero_branch(self):
        sols = degenerate_solutions(PBHEParams(K0=-0.25, K1=1.0, K2=5.0))
        assert {s.n for s in sols} == {1} and len(sols) == 2
        for s in sols:
            assert abs(s.K1) > 0 and np.max(s.residual(standard_grid())) < 1e-8

    def test_parity_failure(self):
        with pytest.raises(ConditionNotMet):
            degenerate_solutions(PBHEParams(K0=-0.25, K2=4.0))

    def test_requires_degenerate_K0(self):
        with pytest.raises(ValueError):
            degenerate_solutions(P046)

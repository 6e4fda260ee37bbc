import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from fdl import _accel
from fdl.errors import AliasingError, TailNotDecayed
from fdl.trigcore import (
    SampledFunction,
    TrigPoly,
    coefficients_from_samples,
    certified_lp_norm,
    dirichlet_kernel,
    dirichlet_l1_norm,
    fejer_kernel,
    fejer_sum,
    load_poly,
    lp_norm,
    modulate,
    partial_sum_grid,
    partial_sum_profile,
    sample,
    save_poly,
    sup_norm_grid,
)

from conftest import direct_partial_sum, direct_sum


def random_poly(rng, kmin, kmax):
    c = rng.standard_normal(kmax - kmin + 1) + 1j * rng.standard_normal(kmax - kmin + 1)
    return TrigPoly(kmin, kmax, c)


class TestTrigPoly:
    def test_invariants(self):
        with pytest.raises(ValueError):
            TrigPoly(3, 2, [])
        with pytest.raises(ValueError):
            TrigPoly(0, 1, [1.0])
        with pytest.raises(ValueError):
            TrigPoly(0, 0, [np.nan])

    def test_spectrum_inside_window(self):
        P = TrigPoly(-2, 3, [0, 1, 0, 2, 0, 0])
        assert list(P.spectrum()) == [-1, 1]
        assert P.degree() == 1

    def test_immutable(self):
        P = TrigPoly.monomial(2)
        with pytest.raises(ValueError):
            P.coeffs[0] = 5

    def test_json_roundtrip(self, tmp_path, rng):
        P = random_poly(rng, -4, 9).with_label("demo")
        save_poly(P, tmp_path / "p.json")
        Q = load_poly(tmp_path / "p.json")
        assert Q == P and Q.label == "demo"


class TestModulate:
    def test_e0_to_e5(self):
        assert modulate(TrigPoly.monomial(0), 5).spectrum().tolist() == [5]

    def test_zero_shift(self, rng):
        P = random_poly(rng, -3, 3)
        assert modulate(P, 0) == P


class TestPartialSumProfile:
    def test_monomial(self):
        x = 0.3
        v = partial_sum_profile(TrigPoly.monomial(5), x, [3, 5])
        assert v[0] == 0
        assert abs(v[1] - cmath.exp(10j * math.pi * x)) < 1e-14

    def test_dirichlet_at_zero(self):
        assert partial_sum_profile(dirichlet_kernel(8), 0.0, [8])[0] == pytest.approx(17, abs=1e-12)

    def test_matches_term_by_term_oracle(self):
        from fdl.lp_saturator import build_gj

        g3 = build_gj(3, 2.0)
        cps = np.arange(0, g3.kmax + 2)
        got = partial_sum_profile(g3, 1 / 8, cps)
        want = np.array([direct_partial_sum(g3, 1 / 8, n) for n in cps])
        scale = np.abs(want).max()
        assert np.max(np.abs(got - want)) <= 1e-10 * scale

    def test_rejects_bad_checkpoints(self):
        with pytest.raises(ValueError):
            partial_sum_profile(TrigPoly.monomial(1), 0.1, [3, 3])
        with pytest.raises(ValueError):
            partial_sum_profile(TrigPoly.monomial(1), 0.1, [])

    def test_linearity(self, rng):
        P, Q = random_poly(rng, -20, 15), random_poly(rng, -5, 40)
        a, b = 0.7 - 0.2j, -1.3
        cps = np.arange(0, 45)
        lhs = partial_sum_profile(a * P + b * Q, 0.123, cps)
        rhs = a * partial_sum_profile(P, 0.123, cps) + b * partial_sum_profile(Q, 0.123, cps)
        assert np.max(np.abs(lhs - rhs)) <= 1e-12 * max(1.0, np.abs(lhs).max())

    def test_idempotence(self, rng):
        P = random_poly(rng, -7, 7)
        for x in (0.0, 0.31, 0.77):
            assert partial_sum_profile(P, x, [7, 50])[1] == pytest.approx(P(x), abs=1e-12)


class TestPartialSumGrid:
    def test_monomial(self):
        s = partial_sum_grid(TrigPoly.monomial(1), 8, 1).samples
        assert np.allclose(s, np.exp(2j * np.pi * np.arange(8) / 8), atol=1e-15)

    def test_fejer_kernel_peak(self):
        s = partial_sum_grid(fejer_kernel(8), 64, 8)
        assert s.samples[0].real == pytest.approx(8, abs=1e-12)

    def test_aliasing_error(self):
        with pytest.raises(AliasingError):
            partial_sum_grid(TrigPoly(0, 20, np.ones(21)), 16, 20)

    def test_agrees_with_profile_path(self):
        from fdl.lp_saturator import build_gj

        g5 = build_gj(5, 2.0)
        M, n = 1 << 12, 100
        grid = partial_sum_grid(g5, M, n).samples
        idx = np.arange(0, M, 37)
        prof = np.array([partial_sum_profile(g5, m / M, [n])[0] for m in idx])
        assert np.max(np.abs(grid[idx] - prof)) <= 1e-10 * np.abs(grid).max()

    def test_relative_error_vs_direct(self, rng):
        P = random_poly(rng, -30, 50)
        s = partial_sum_grid(P, 256, 25).samples
        for m in (0, 17, 200):
            assert abs(s[m] - direct_partial_sum(P, m / 256, 25)) <= 1e-10 * np.abs(s).max()

    @given(st.integers(0, 10_000), st.integers(-64, 64), st.integers(1, 64))
    @settings(max_examples=50, deadline=None)
    def test_parseval(self, seed, kmin, width):
        rng = np.random.default_rng(seed)
        P = random_poly(rng, kmin, kmin + width - 1)
        M = 1 << int(np.ceil(np.log2(width + 1)))
        s = sample(P, M).samples
        assert np.mean(np.abs(s) ** 2) == pytest.approx(np.sum(np.abs(P.coeffs) ** 2), rel=1e-10)


class TestFejerSum:
    def test_constant_preserved(self):
        for n in (1, 2, 9):
            assert fejer_sum(TrigPoly.monomial(0), n) == TrigPoly(0, 0, [1.0], "")

    def test_high_modes_vanish(self):
        assert np.all(fejer_sum(TrigPoly.monomial(5), 5).coeffs == 0)
        assert np.all(fejer_sum(TrigPoly.monomial(-7), 5).coeffs == 0)

    def test_average_of_partial_sums(self, rng):
        P = random_poly(rng, -12, 18)
        n = 10
        for x in (0.05, 0.5, 0.91):
            avg = sum(direct_partial_sum(P, x, k) for k in range(n)) / n
            assert abs(fejer_sum(P, n)(x) - avg) <= 1e-12 * max(1, abs(avg))

    @given(st.integers(0, 10_000), st.integers(1, 40))
    @settings(max_examples=30, deadline=None)
    def test_contraction(self, seed, n):
        P = random_poly(np.random.default_rng(seed), -16, 16)
        assert sup_norm_grid(fejer_sum(P, n), 1024) <= sup_norm_grid(P, 1024) * (1 + 1e-12)


class TestCoefficientsFromSamples:
    def test_monomial(self):
        f = SampledFunction.from_callable(lambda t: np.exp(6j * np.pi * t), 16)
        P = coefficients_from_samples(f, -7, 7, tail_tol=1e-12, edge=1)
        assert P.coeff(3) == pytest.approx(1, abs=1e-12)
        others = np.delete(np.abs(P.coeffs), 3 + 7)
        assert others.max() <= 1e-12

    def test_tail_not_decayed(self):
        # a jump has slowly decaying coefficients
        f = SampledFunction.from_callable(lambda t: (t < 0.5).astype(float), 64)
        with pytest.raises(TailNotDecayed):
            coefficients_from_samples(f, -8, 8, tail_tol=1e-6)


class TestNorms:
    @pytest.mark.parametrize("k,p", [(0, 1.5), (3, 2.0), (-11, 3.0), (40, 7.5)])
    def test_unimodular(self, k, p):
        assert lp_norm(TrigPoly.monomial(k), p, 16) == pytest.approx(1, abs=1e-14)

    def test_certified_refinement(self, rng):
        P = random_poly(rng, -6, 6)
        v, M, diff = certified_lp_norm(P, 1.5)
        assert diff <= 1e-6
        assert v == pytest.approx(lp_norm(P, 1.5, 4 * M), abs=1e-6)

    def test_dirichlet_n1(self):
        oracle = quad(lambda t: abs(1 + 2 * math.cos(2 * math.pi * t)), 0, 1, points=[1 / 3, 2 / 3],
                      epsabs=1e-13)[0]
        assert oracle == pytest.approx(1.4359, abs=1e-4)
        assert dirichlet_l1_norm(1) == pytest.approx(oracle, abs=1e-9)

    def test_dirichlet_moderate_n_vs_quad(self):
        n = 7
        zeros = [j / (2 * n + 1) for j in range(1, 2 * n + 1)]
        oracle = quad(lambda t: abs(math.sin((2 * n + 1) * math.pi * t) / math.sin(math.pi * t)),
                      1e-300, 1, points=zeros, limit=200, epsabs=1e-13)[0]
        assert dirichlet_l1_norm(n) == pytest.approx(oracle, abs=1e-8)

    def test_dirichlet_log_growth(self):
        v = dirichlet_l1_norm(10_000)
        assert abs(v - 4 / math.pi ** 2 * math.log(10_000)) <= 2

    def test_fejer_unit_mass(self):
        F = fejer_kernel(16)
        assert np.mean(sample(F, 64).samples).real == pytest.approx(1, abs=1e-10)
        assert lp_norm(F, 1.0 + 1e-12, 256) == pytest.approx(1, abs=1e-9)


def test_backends_agree(rng):
    P = random_poly(rng, -50, 300)
    xs = rng.random(40)
    a = _accel.window_eval(P.coeffs, P.kmin, xs)
    b = _accel.window_eval_numpy(P.coeffs, P.kmin, xs)
    assert np.max(np.abs(a - b)) <= 1e-10 * np.abs(b).max()
    for x in xs[:3]:
        assert abs(b[list(xs).index(x)] - direct_sum(P.ks, P.coeffs, x)) <= 1e-10 * np.abs(b).max()

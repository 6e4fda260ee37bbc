import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fdl.dyadic import (
    DyadicRational,
    IntervalFamily,
    blown_up_family,
    covering_check,
    dyadic_exponent_estimate,
    dyadic_family,
    ikbeta_family,
    interval_family_IJj,
    point_with_exponent,
)
from fdl.errors import DepthOverflow, ExactDyadic


class TestDyadicRational:
    def test_reduce(self):
        d = DyadicRational.reduce(12, 5)
        assert (d.K, d.J) == (3, 3)
        assert DyadicRational.reduce(16, 4) is None

    def test_canonical(self):
        with pytest.raises(ValueError):
            DyadicRational(2, 3)
        assert float(DyadicRational(3, 3)) == 0.375


class TestIJj:
    def test_single_arc(self):
        F = interval_family_IJj(1, 3)
        assert F.centers.tolist() == [0.5] and F.radii.tolist() == [0.125]

    def test_primed_measure(self):
        F = interval_family_IJj(2, 4, primed=True)
        assert F.centers.tolist() == [0.25, 0.75]
        assert np.all(F.radii == 0.125)
        assert F.measure() == 2 ** (2 - 1) * 2 ** (2 - 4) == 0.5
        assert F.union_measure() == 0.5

    def test_top_generation_covers(self):
        F = interval_family_IJj(3, 3)
        assert len(F) == 4 and covering_check(F)
        assert F.union_measure() == 1.0

    @pytest.mark.parametrize("j", range(3, 9))
    def test_counts_and_disjointness(self, j):
        for J in range(1, j + 1):
            F = interval_family_IJj(J, j)
            assert len(F) == 2 ** (J - 1)
            if J < j:
                assert interval_family_IJj(J, j, primed=True).pairwise_disjoint()
                assert interval_family_IJj(J, j).pairwise_disjoint(strict=True)
                assert interval_family_IJj(J, j, primed=True).union_measure() == 2 ** (J - 1) * 2.0 ** (2 - j)


class TestIkBeta:
    def test_k2(self):
        F = ikbeta_family(2, 0.5)
        eps = 1 / (2 * math.exp(math.log(2) ** 0.5))
        assert F.centers.tolist() == [0.0, 0.5]
        assert F.radii[0] == pytest.approx(eps / 2, rel=1e-15)

    @pytest.mark.parametrize("k,beta", [(2, 0.5), (100, 0.5), (64, 0.3), (4096, 0.9)])
    def test_measure(self, k, beta):
        F = ikbeta_family(k, beta)
        assert F.pairwise_disjoint(strict=True)
        assert F.union_measure() == pytest.approx(math.exp(-math.log(k) ** beta), rel=1e-12)


class TestPointWithExponent:
    def test_alpha_two(self):
        p = point_with_exponent(2, 4)
        assert p.exponents == (2, 4, 8, 16)
        assert p.exact == Fraction(1, 4) + Fraction(1, 16) + Fraction(1, 256) + Fraction(1, 65536)
        assert p.x == float(p.exact)

    def test_alpha_one_unit_gaps(self):
        assert point_with_exponent(1, 5).exponents == (2, 3, 4, 5, 6)

    def test_approximation_property(self):
        for alpha in (1.5, 2, 3, 4):
            p = point_with_exponent(alpha, 5)
            for (K, a), a_next in zip(p.approximants(), p.exponents[1:]):
                err = abs(p.exact - Fraction(K, 2 ** a))
                assert err <= Fraction(2, 2 ** a_next)
                # |x - K/2^a| <= 2^{-(alpha - eta) a} for eta = 0.05 once a is large enough
                if a >= 8:
                    assert err <= Fraction(2) ** (-(alpha - 0.05) * a) * 2

    def test_overflow(self):
        with pytest.raises(DepthOverflow):
            point_with_exponent(4, 7)


class TestExponentEstimate:
    def test_one_third(self):
        # dist(1/3, 2^-j Z) = 2^-j / 3 for every j, so the scan peaks at jmin
        assert dyadic_exponent_estimate(1 / 3, 20) == pytest.approx((4 + math.log2(3)) / 4, rel=1e-12)
        assert dyadic_exponent_estimate(1 / 3, 40, jmin=30) <= 1.06

    def test_alpha_three(self):
        x = point_with_exponent(3, 4).x
        assert 2.7 <= dyadic_exponent_estimate(x, 30) <= 3.3

    def test_alpha_two(self):
        x = point_with_exponent(2, 4).x
        # x is exactly K/2^16, so the scan stops one generation short
        assert 1.8 <= dyadic_exponent_estimate(x, 15) <= 2.2
        with pytest.raises(ExactDyadic):
            dyadic_exponent_estimate(x, 16)

    def test_exact_dyadic(self):
        with pytest.raises(ExactDyadic):
            dyadic_exponent_estimate(5 / 16, 20)

    def test_against_exhaustive_scan(self, rng):
        # brute force: every k/2^j, exact rationals
        for x in rng.random(5):
            fx = Fraction(float(x))
            best = 1.0
            for j in range(4, 13):
                d = min(abs(fx - Fraction(k, 2 ** j)) for k in range(2 ** j + 1))
                best = max(best, -math.log2(d) / j)
            assert dyadic_exponent_estimate(x, 12) == pytest.approx(best, rel=1e-12)


class TestCovering:
    def test_all_dyadic_intervals(self):
        assert covering_check(dyadic_family(6))

    @pytest.mark.parametrize("J,j", [(1, 3), (3, 5), (5, 7)])
    def test_strict_subfamily(self, J, j):
        assert not covering_check(interval_family_IJj(J, j))

    @pytest.mark.parametrize("alpha", [1.5, 2.0, 3.0])
    @pytest.mark.parametrize("j", [6, 9, 12])
    def test_blown_up(self, j, alpha):
        assert covering_check(blown_up_family(j, alpha))

    def test_agrees_with_grid_oracle(self):
        # centers and radii on the 1/64 lattice: testing the 1/128 half-lattice is exact
        rng = np.random.default_rng(7)
        grid = np.arange(128) / 128
        fams = 100_000
        sizes = rng.integers(1, 9, size=fams)
        mismatches = 0
        for s in sizes:
            c = rng.integers(0, 64, size=s) / 64
            r = rng.integers(1, 17, size=s) / 64
            F = IntervalFamily(c, r)
            d = np.abs(grid[:, None] - F.centers[None, :])
            d = np.minimum(d, 1 - d)
            oracle = bool(np.all(np.any(d <= F.radii[None, :], axis=1)))
            mismatches += oracle != covering_check(F)
        assert mismatches == 0

    @given(st.lists(st.tuples(st.integers(0, 255), st.integers(1, 40)), min_size=1, max_size=12))
    @settings(max_examples=200, deadline=None)
    def test_union_measure_bounds(self, arcs):
        F = IntervalFamily([a / 256 for a, _ in arcs], [r / 256 for _, r in arcs])
        u = F.union_measure()
        assert u <= min(1.0, F.measure()) + 1e-15
        assert (u == 1.0) == covering_check(F)

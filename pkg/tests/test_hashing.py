import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from divext.divergences import DivergenceKind, divergence_to_uniform_rows
from divext.errors import InfeasibleParameters, UnsupportedWidth
from divext.extractor import Strength
from divext.hashing import (
    LeftoverHashProvider,
    almost_universal_block_width,
    almost_universal_family,
    gf2_mul,
    gf2_pow,
    lhl_d2_bound,
    lhl_extractor,
    lhl_tv_bound,
    linear_family,
    pairwise_family,
    reduction_polynomial,
)
from divext.utils import Utils
from divext.verify import worst_flat_error

D2 = DivergenceKind.renyi(2.0)


class TestField:
    def test_hand_reduction(self):
        assert int(gf2_mul(3, 0b010, 0b100)) == 0b011

    @given(st.integers(1, 64), st.data())
    @settings(max_examples=60, deadline=None)
    def test_identity_and_zero(self, n, data):
        a = data.draw(st.integers(0, (1 << n) - 1))
        assert int(gf2_mul(n, a, 1)) == a
        assert int(gf2_mul(n, a, 0)) == 0

    @given(st.integers(1, 64), st.data())
    @settings(max_examples=60, deadline=None)
    def test_commutative_and_distributive(self, n, data):
        a, b, c = (data.draw(st.integers(0, (1 << n) - 1)) for _ in range(3))
        assert int(gf2_mul(n, a, b)) == int(gf2_mul(n, b, a))
        product = int(gf2_mul(n, a, b)) ^ int(gf2_mul(n, a, c))
        assert int(gf2_mul(n, a, b ^ c)) == product

    @pytest.mark.parametrize("n", range(1, 9))
    def test_multiplicative_group_order(self, n):
        # a^(2^n - 1) = 1 для всех ненулевых a только если многочлен неприводим
        elements = np.arange(1, 1 << n, dtype=np.uint64)
        assert np.all(gf2_pow(n, elements, (1 << n) - 1) == 1)

    def test_unsupported_width(self):
        with pytest.raises(UnsupportedWidth):
            reduction_polynomial(65)


class TestFamilies:
    def test_pairwise_exhaustive_collisions(self):
        fam = pairwise_family(4, 2)
        counts = fam.collision_matrix()
        off = counts[~np.eye(16, dtype=bool)]
        assert np.all(off == (1 << fam.seed_width) // 4)
        assert fam.max_collision_probability() == 0.25

    @pytest.mark.parametrize("n,m", [(3, 1), (5, 2), (6, 3)])
    def test_linear_exactly_universal(self, n, m):
        fam = linear_family(n, m)
        assert fam.max_collision_probability() == 2.0**-m
        assert fam.seed_width == n

    def test_pairwise_bijective_for_full_width(self):
        fam = pairwise_family(3, 3)
        xs = np.arange(8, dtype=np.uint64)
        for a in range(1, 8):
            seed = Utils.concat_bits(a, 5, 3)
            assert sorted(fam.evaluate(seed, xs).tolist()) == list(range(8))

    def test_offset_shifts_output(self):
        fam = pairwise_family(4, 2)
        xs = np.arange(16, dtype=np.uint64)
        for a, b in [(3, 9), (7, 2), (15, 15)]:
            shifted = fam.evaluate(Utils.concat_bits(a, b, 4), xs)
            base = fam.evaluate(Utils.concat_bits(a, 0, 4), xs)
            assert np.array_equal(shifted, base ^ np.uint64(b & 3))

    def test_almost_universal_parameters(self):
        fam = almost_universal_family(8, 2, 0.5)
        assert almost_universal_block_width(8, 2, 0.5) == 5
        assert fam.seed_width == 10
        assert fam.epsilon_au == pytest.approx(1 / 8)
        assert fam.max_collision_probability() <= (1 + fam.epsilon_au) / 4 + 1e-12

    def test_almost_universal_single_block(self):
        fam = almost_universal_family(4, 2, 0.5)
        assert fam.epsilon_au == 0.0
        assert fam.max_collision_probability() <= 0.25 + 1e-12

    def test_seed_width_grows_as_eps_shrinks(self):
        widths = [
            almost_universal_family(16, 2, eps).seed_width
            for eps in (0.5, 0.1, 0.01, 0.001)
        ]
        assert widths == sorted(widths)

    @pytest.mark.parametrize("eps", [0.0, 1.0, 2.0])
    def test_almost_universal_rejects_eps(self, eps):
        with pytest.raises(ValueError):
            almost_universal_family(8, 2, eps)


class TestLeftoverHash:
    def test_forms(self):
        forms = lhl_extractor(pairwise_family(4, 2))
        assert (forms.full.d, forms.full.m) == (8, 10)
        assert (forms.strong.d, forms.strong.m) == (8, 2)
        assert all(c.strength is Strength.STRONG_AVG for c in forms.strong.claims)
        assert forms.full.check_injective()
        assert forms.strong.check_injective(strong=True)

    def test_declared_error_at_entropy_loss(self):
        m, eps = 2, 0.125
        assert lhl_d2_bound(m, m + math.log2(1 / eps), 0.0) <= 2.0 / math.log(2.0) * eps

    def test_uniform_source_strong_error(self):
        ext = lhl_extractor(pairwise_family(3, 1)).strong
        measured = worst_flat_error(ext, D2, 3.0, strong=True)
        assert measured.sources == 1
        assert measured.worst <= math.log2(1 + 2.0 ** (1 - 3)) + 1e-9

    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_measured_error_within_declared(self, k):
        ext = lhl_extractor(pairwise_family(4, 1)).strong
        d2 = worst_flat_error(ext, D2, k, strong=True)
        assert d2.worst <= lhl_d2_bound(1, k, 0.0) + 1e-6
        total = worst_flat_error(ext, DivergenceKind.tv(), k, strong=True)
        assert total.worst <= lhl_tv_bound(1, k, 0.0) + 1e-6

    def test_strong_error_below_full_error(self, rng):
        forms = lhl_extractor(pairwise_family(4, 2))
        for _ in range(5):
            support = np.sort(rng.choice(16, size=4, replace=False))[None, :]
            strong_rows = forms.strong.flat_seed_rows(support)[0]
            strong = divergence_to_uniform_rows(D2, strong_rows).mean()
            full_rows = forms.full.flat_output_rows(support)
            full = divergence_to_uniform_rows(D2, full_rows)[0]
            assert strong <= full + 1e-9


class TestProvider:
    def test_required_entropy(self):
        assert LeftoverHashProvider.required_entropy(1, 1.0) == pytest.approx(1.0)
        required = LeftoverHashProvider.required_entropy(2, math.log2(1.5))
        assert required == pytest.approx(3.0)

    def test_provide_adds_exact_claim(self):
        ext = LeftoverHashProvider().provide(3, 1, 1.0)
        claim = ext.find_claim(D2, 1.0, Strength.STRONG_AVG)
        assert claim.eps == pytest.approx(1.0)
        assert ext.find_claim(DivergenceKind.kl(), 1.0, Strength.STRONG_AVG).eps <= 1.0

    def test_provide_rejects_low_entropy(self):
        with pytest.raises(InfeasibleParameters):
            LeftoverHashProvider().provide(3, 2, 0.1)
        with pytest.raises(InfeasibleParameters):
            LeftoverHashProvider(max_seed_width=4).provide(6, 1, 1.0)

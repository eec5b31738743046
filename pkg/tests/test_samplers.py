import math

import numpy as np
import pytest

from divext.constants import PROV_CHEBYSHEV, PROV_SUBGAUSSIAN_SAMPLER
from divext.divergences import DivergenceKind, bounded_norm
from divext.errors import InfeasibleParameters, PreconditionViolated
from divext.expanders import XorCayleyProvider
from divext.hashing import lhl_extractor, linear_family
from divext.samplers import (
    FunctionClass,
    check_sampler_claim,
    estimate_mean,
    expander_sampler,
    extractor_to_sampler,
    failure_rates,
    feasible_scales,
    pairwise_sampler,
    sampler_to_extractor,
    subgaussian_sampler,
)


class TestFunctionClass:
    def test_divergences(self):
        assert FunctionClass.BOUNDED01.divergence == DivergenceKind.tv()
        assert FunctionClass.BOUNDED_VARIANCE.divergence == DivergenceKind.moment(2.0)
        assert FunctionClass.SUBGAUSSIAN.divergence == DivergenceKind.subgaussian()

    def test_max_deviation(self):
        assert FunctionClass.BOUNDED01.max_deviation(3) == 1.0
        bounded = FunctionClass.BOUNDED_VARIANCE.max_deviation(3)
        assert bounded == pytest.approx(math.sqrt(7))
        subgaussian = FunctionClass.SUBGAUSSIAN.max_deviation(2)
        assert subgaussian == pytest.approx(math.sqrt(math.log(2)))

    @pytest.mark.parametrize("fc", list(FunctionClass))
    def test_samples_are_members(self, fc, rng):
        for row in fc.sample(3, 10, rng):
            assert fc.certify(row)

    def test_zero_direction_scale(self):
        scales = feasible_scales(np.zeros((2, 4)), FunctionClass.SUBGAUSSIAN.grid)
        assert np.array_equal(scales, np.zeros(2))


class TestPairwise:
    def test_parameters(self):
        sampler = pairwise_sampler(4, 0.5, 1.0)
        assert sampler.sample_count == 8
        assert sampler.n == 8
        assert sampler.notes["chebyshev_failure"] == pytest.approx(1 / 8)
        (claim,) = sampler.claims
        assert claim.provenance == PROV_CHEBYSHEV and claim.strong and claim.absolute

    def test_points_are_distinct_per_coin_pair(self):
        sampler = pairwise_sampler(4, 0.5, 1.0)
        table = sampler.points_table()
        assert table.shape == (256, 8)
        # При a != 0 точки h(0..7) попарно различны
        assert all(len(set(row)) == 8 for row in table[16:])

    def test_claim_holds(self, rng):
        sampler = pairwise_sampler(4, 0.5, 1.0)
        check = check_sampler_claim(sampler, sampler.claims[0], 200, rng)
        assert check.passed

    def test_infeasible(self):
        with pytest.raises(InfeasibleParameters):
            pairwise_sampler(2, 0.1, 0.5)

    def test_estimate_mean_of_constant(self):
        sampler = pairwise_sampler(4, 0.5, 1.0)
        assert estimate_mean(sampler, np.full(16, 0.3), 77) == pytest.approx(0.3)
        with pytest.raises(ValueError):
            estimate_mean(sampler, np.zeros(8), 0)

    def test_failure_rates_shape(self, rng):
        sampler = pairwise_sampler(4, 0.5, 1.0)
        functions = FunctionClass.BOUNDED01.sample(4, 6, rng)
        rates = failure_rates(sampler, functions, 0.5, absolute=True)
        assert rates.shape == (6,)
        assert np.all((rates >= 0) & (rates <= 1))


class TestConversions:
    def test_extractor_to_sampler(self, rng):
        ext = lhl_extractor(linear_family(4, 1)).strong
        sampler = extractor_to_sampler(ext)
        assert (sampler.n, sampler.m, sampler.sample_count) == (4, 1, 16)
        bounded = [
            c for c in sampler.claims_for(FunctionClass.BOUNDED01) if c.delta == 0.5
        ]
        assert any(not c.absolute for c in bounded)
        for claim in sampler.claims_for(FunctionClass.BOUNDED01):
            assert check_sampler_claim(sampler, claim, 200, rng).passed

    def test_absolute_claims_double_delta(self):
        sampler = extractor_to_sampler(lhl_extractor(linear_family(4, 1)).strong)
        plain = {
            (c.function_class, c.eps, c.strong): c.delta
            for c in sampler.claims
            if not c.absolute
        }
        for claim in sampler.claims:
            key = (claim.function_class, claim.eps, claim.strong)
            if claim.absolute and key in plain:
                assert claim.delta <= 2 * plain[key] + 1e-12

    def test_sampler_to_extractor(self):
        sampler = pairwise_sampler(4, 0.5, 1.0)
        ext = sampler_to_extractor(
            sampler, FunctionClass.BOUNDED_VARIANCE, k=7.0, eta=0.5
        )
        assert (ext.n, ext.d, ext.m) == (8, 3, 4)
        kind = DivergenceKind.moment(2.0)
        expected = 1.0 + 0.5 * 2.0 * math.sqrt(15)
        assert ext.claim_error(kind, 7.0) == pytest.approx(expected)
        average = [c for c in ext.claims if c.strength.average]
        assert average[0].k == pytest.approx(8.0)
        assert average[0].eps == pytest.approx(expected + 0.5 * bounded_norm(kind, 4))

    def test_sampler_to_extractor_needs_power_of_two(self):
        sampler = pairwise_sampler(4, 0.5, 0.8)
        assert sampler.sample_count == 13
        with pytest.raises(PreconditionViolated):
            sampler_to_extractor(sampler, FunctionClass.BOUNDED_VARIANCE, k=7.0)


class TestExpanderSampler:
    def test_claims_hold(self, rng):
        sampler = expander_sampler(4, 0.5, 1.0)
        assert sampler.n == 4 and sampler.m == 4
        assert sampler.sample_count == 16 ** int(sampler.notes["walk_length"])
        assert sampler.claims
        for claim in sampler.claims:
            assert claim.function_class is FunctionClass.BOUNDED_VARIANCE
            assert claim.eps <= 1.0 + 1e-9
            assert check_sampler_claim(sampler, claim, 200, rng).passed

    def test_report(self):
        report = expander_sampler(4, 0.5, 1.0).report()
        assert report.n == 4 and report.claims
        assert "lambda" in report.notes


class TestSubgaussianSampler:
    @pytest.fixture(scope="class")
    def sampler(self):
        return subgaussian_sampler(2, 1.0, 2.0, graphs=XorCayleyProvider())

    def test_shape(self, sampler):
        assert (sampler.n, sampler.m, sampler.sample_count) == (3, 2, 128)
        assert sampler.notes["log2_sample_count"] == 7.0

    def test_claim_classes(self, sampler):
        classes = {c.function_class for c in sampler.claims}
        assert classes <= {FunctionClass.SUBGAUSSIAN, FunctionClass.SUBEXPONENTIAL}
        assert FunctionClass.SUBGAUSSIAN in classes
        for claim in sampler.claims:
            assert claim.provenance == PROV_SUBGAUSSIAN_SAMPLER
            assert claim.eps <= 2.0

    def test_claims_hold(self, sampler, rng):
        for claim in sampler.claims_for(FunctionClass.SUBGAUSSIAN):
            assert check_sampler_claim(sampler, claim, 200, rng).passed

import math

import pytest

from divext.constants import REPORT_EXACT_LABEL, REPORT_LOWER_BOUND_LABEL
from divext.divergences import DivergenceKind
from divext.errors import CountExceedsCap
from divext.expanders import XorCayleyProvider, expander_extractor
from divext.extractor import prepend_seed, random_extractor
from divext.hashing import lhl_extractor, linear_family, pairwise_family
from divext.models.schemas import SourceFamilyModel
from divext.verify import (
    FamilyMode,
    SourceFamily,
    average_case_check,
    bit_side_joints,
    bounded_average_bound,
    disperser_check,
    dpi_counterexample,
    graceful_decay,
    inequality_suite,
    nonflat_cross_check,
    random_function_kl_tail,
    random_function_tv_tail,
    symmetric_average_bound,
    verify_claims,
    worst_flat_error,
)

from .conftest import truncation_extractor

KL = DivergenceKind.kl()
D2 = DivergenceKind.renyi(2.0)


class TestWorstFlat:
    def test_truncation_loses_everything(self):
        # Источник с фиксированными старшими битами: Ext(X, s) - точка
        ext = truncation_extractor(4, 2, 2)
        measured = worst_flat_error(ext, KL, 2.0)
        assert measured.worst == pytest.approx(2.0)
        assert measured.label == REPORT_EXACT_LABEL
        assert measured.sources == math.comb(16, 4)
        assert len({x >> 2 for x in measured.witness.support}) == 1

    def test_strong_at_least_plain(self):
        ext = lhl_extractor(pairwise_family(3, 1)).strong
        plain = worst_flat_error(ext, KL, 2.0)
        strong = worst_flat_error(ext, KL, 2.0, strong=True)
        assert strong.worst >= plain.worst - 1e-12

    def test_threads_give_same_witness(self):
        ext = lhl_extractor(linear_family(4, 1)).strong
        single = worst_flat_error(ext, D2, 2.0, strong=True)
        pooled = worst_flat_error(ext, D2, 2.0, strong=True, threads=3)
        assert pooled.worst == pytest.approx(single.worst)
        assert pooled.witness == single.witness

    def test_cap_without_fallback(self):
        family = SourceFamily(cap=10, fallback=False)
        with pytest.raises(CountExceedsCap):
            worst_flat_error(truncation_extractor(4, 1, 2), KL, 2.0, family)

    def test_cap_with_fallback(self):
        family = SourceFamily(cap=10)
        measured = worst_flat_error(truncation_extractor(4, 1, 2), KL, 2.0, family)
        assert measured.label == REPORT_LOWER_BOUND_LABEL
        # Подкубы со свободными младшими битами находят худший источник
        assert measured.worst == pytest.approx(2.0)

    def test_sampled_family(self):
        model = SourceFamilyModel(mode="sampled", count=7)
        family = SourceFamily.from_model(model, cap=100, count=50, seed=3)
        assert family.mode is FamilyMode.SAMPLED and family.count == 7
        measured = worst_flat_error(truncation_extractor(4, 1, 2), KL, 2.0, family)
        assert measured.sources == 7


class TestVerifyClaims:
    def test_leftover_hash_passes(self):
        ext = lhl_extractor(pairwise_family(4, 1)).strong
        report = verify_claims(ext)
        assert report.entries and report.all_pass
        assert {entry.claim.strength for entry in report.entries} == {"strong_avg"}

    def test_filters(self):
        ext = lhl_extractor(pairwise_family(4, 1)).strong
        report = verify_claims(ext, kind=D2, k=3.0)
        assert len(report.entries) == 1
        assert report.entries[0].claim.kind == "renyi:2"

    def test_expander_instance_passes(self):
        ext = expander_extractor(3, 1.0, 0.5, provider=XorCayleyProvider())
        assert verify_claims(ext).all_pass


class TestSeedPrepend:
    @pytest.mark.parametrize("build", ["linear", "random"])
    def test_plain_error_equals_strong_error(self, build, rng):
        if build == "linear":
            ext = lhl_extractor(linear_family(4, 1)).strong
        else:
            ext = random_extractor(4, 2, 2, rng)
        plain = worst_flat_error(prepend_seed(ext), KL, 2.0)
        strong = worst_flat_error(ext, KL, 2.0, strong=True)
        assert plain.worst == pytest.approx(strong.worst, abs=1e-9)

    def test_transferred_claims_hold(self):
        ext = prepend_seed(lhl_extractor(linear_family(4, 1)).strong)
        report = verify_claims(ext, kind=KL)
        assert report.entries and report.all_pass
        assert {entry.claim.strength for entry in report.entries} <= {"plain", "avg"}


class TestGracefulDecay:
    @pytest.mark.parametrize("strong", [False, True])
    def test_tv_error_at_lower_entropy(self, strong):
        ext = lhl_extractor(linear_family(4, 1)).strong
        rows = graceful_decay(ext, DivergenceKind.tv(), 3.0, strong=strong)
        assert [row.t for row in rows] == [0, 1, 2]
        assert rows[0].error > 0
        assert all(row.passed for row in rows)
        # Ошибка не убывает при снижении энтропии
        assert rows[2].error >= rows[0].error - 1e-12


class TestNonflat:
    def test_mixtures_within_flat_maximum(self):
        ext = lhl_extractor(linear_family(4, 2)).strong
        check = nonflat_cross_check(ext, KL, 2.0, count=40)
        assert check.passed


class TestAverageCase:
    def test_leftover_hash_average_claim(self):
        ext = lhl_extractor(linear_family(3, 1)).full
        worst, used = average_case_check(ext, D2, 1.0, bit_side_joints(3, 4))
        assert used == math.comb(8, 4) * 4
        assert worst <= ext.find_claim(D2, 1.0).eps + 1e-9

    @pytest.mark.parametrize("strong", [False, True])
    def test_symmetric_class_within_three_eps(self, strong):
        ext = lhl_extractor(linear_family(3, 1)).strong
        tv = DivergenceKind.tv()
        plain = worst_flat_error(ext, tv, 1.0, strong=strong).worst
        joints = bit_side_joints(3, 4)
        worst, used = average_case_check(ext, tv, 1.0, joints, strong=strong)
        assert used == math.comb(8, 4) * 4
        assert worst <= symmetric_average_bound(plain) + 1e-9

    def test_bounded_class_with_extra_entropy(self):
        ext = lhl_extractor(linear_family(3, 1)).strong
        tv = DivergenceKind.tv()
        plain = worst_flat_error(ext, tv, 1.0).worst
        # H~_inf(X|Z) >= 1 + log2(1 / eta) при eta = 1/2
        worst, used = average_case_check(ext, tv, 2.0, bit_side_joints(3, 4))
        assert used > 0
        assert worst <= bounded_average_bound(plain, 0.5, tv, ext.m) + 1e-9

    def test_bounds(self):
        assert symmetric_average_bound(0.1) == pytest.approx(0.3)
        tv = DivergenceKind.tv()
        assert bounded_average_bound(0.1, 0.25, tv, 3) == pytest.approx(0.35)


class TestTails:
    def test_kl_tail(self):
        result = random_function_kl_tail(6, 1, 1, 16, 0.5, trials=200)
        assert result.passed
        assert result.bound < 1.0

    def test_kl_tail_vanishes(self):
        result = random_function_kl_tail(6, 1, 1, 64, 0.5, trials=100)
        assert result.rate == 0.0 and result.passed

    def test_tv_tail(self):
        result = random_function_tv_tail(6, 1, 1, 64, 0.4, trials=100)
        assert result.rate == 0.0 and result.passed

    def test_bound_clamped(self):
        assert random_function_tv_tail(3, 1, 1, 4, 0.1, trials=20).bound == 1.0

    def test_rejects_size(self):
        with pytest.raises(ValueError):
            random_function_kl_tail(2, 1, 1, 8, 0.5, trials=10)


def test_inequality_suite_has_no_violations():
    report = inequality_suite(20, widths=(1, 2, 3), solver_samples=3)
    assert report.passed
    assert report.stat("renyi_monotone").checked == 20 * 3 * 4
    assert "subgaussian_pinsker" in report.stats


class TestDpi:
    def test_growth_after_embedding(self):
        rows = dpi_counterexample([4, 9], restarts=1, solver_width_limit=0)
        assert [row.m for row in rows] == [4, 9]
        for row in rows:
            assert row.exact_dpi_ok
            assert row.floor_ok
            assert row.solver_lower is None
        assert rows[0].pre_upper == pytest.approx(2 * math.sqrt(math.log(2) / 2))
        assert rows[1].post_lower > rows[1].pre_upper

    def test_rejects_width(self):
        with pytest.raises(ValueError):
            dpi_counterexample([13], solver_width_limit=0)


class TestDisperser:
    def test_perfect_extractor(self):
        ext = expander_extractor(3, 1.0, 0.5, provider=XorCayleyProvider())
        result = disperser_check(ext, 1.0, 0.5)
        assert result.d0_ok and result.coverage_ok and result.agree
        assert result.min_coverage == 8

    def test_truncation_fails_both(self):
        result = disperser_check(truncation_extractor(3, 1, 2), 1.0, 0.5)
        assert not result.d0_ok and not result.coverage_ok
        assert result.agree and result.min_coverage == 1

import math

import numpy as np
import pytest
from hypothesis import given, settings
from pydantic import ValidationError

from divext.divergences import (
    DivergenceKind,
    DivergenceTag,
    TGrid,
    binary_entropy,
    bounded_norm,
    check_kl_triangle,
    distance,
    divergence_to_uniform_rows,
    exact_divergence,
    kl,
    kl_from_tv_bound,
    lp_distance,
    max_divergence,
    max_feasible_scale,
    mgf_feasible,
    moment_class_distance,
    moment_class_witness,
    pinsker_subgaussian_bound,
    renyi,
    subexponential_distance,
    subgaussian_distance,
    tv,
)
from divext.domain import Distribution
from divext.errors import SpecError, WidthMismatch
from divext.models.schemas import DistanceResult

from .conftest import distribution_pairs, distributions, random_distribution

LN2 = math.log(2.0)


class TestKinds:
    def test_parse(self):
        assert DivergenceKind.parse("tv") == DivergenceKind.tv()
        assert DivergenceKind.parse("LP:2") == DivergenceKind.lp(2)
        assert DivergenceKind.parse("renyi:0.5") == DivergenceKind.renyi(0.5)

    def test_renyi_synonyms(self):
        assert DivergenceKind.parse("renyi:1") == DivergenceKind.kl()
        assert DivergenceKind.parse("renyi:inf") == DivergenceKind.max()

    @pytest.mark.parametrize(
        "text", ["hellinger", "lp:0.5", "renyi:x", "kl:2", "moment"]
    )
    def test_parse_rejects(self, text):
        with pytest.raises(SpecError):
            DivergenceKind.parse(text)

    def test_dominance_follows_renyi_order(self):
        assert DivergenceKind.renyi(2).dominates(DivergenceKind.kl())
        assert DivergenceKind.max().dominates(DivergenceKind.renyi(2))
        assert not DivergenceKind.kl().dominates(DivergenceKind.renyi(2))
        assert not DivergenceKind.tv().dominates(DivergenceKind.kl())

    def test_str_round_trip(self):
        kind = DivergenceKind.moment(2)
        assert DivergenceKind.parse(str(kind)) == kind

    def test_flags(self):
        assert DivergenceKind.tv().symmetric and DivergenceKind.tv().exact
        assert not DivergenceKind.kl().symmetric
        assert not DivergenceKind.subgaussian().exact


class TestExact:
    def test_identical_distributions(self, rng):
        P = random_distribution(3, rng)
        for kind in ("tv", "kl", "max", "renyi:0.5", "renyi:2", "lp:2", "moment:2"):
            value = exact_divergence(DivergenceKind.parse(kind), P, P)
            assert value == pytest.approx(0.0, abs=1e-12)

    def test_point_mass_against_uniform(self):
        P, U = Distribution.point(3, 0), Distribution.uniform(3)
        assert kl(P, U) == pytest.approx(3.0)
        assert max_divergence(P, U) == pytest.approx(3.0)
        assert renyi(2.0, P, U) == pytest.approx(3.0)
        assert tv(P, U) == pytest.approx(7 / 8)

    def test_disjoint_supports(self):
        P, Q = Distribution.point(1, 0), Distribution.point(1, 1)
        assert kl(P, Q) == math.inf
        assert renyi(0.0, P, Q) == math.inf
        assert renyi(0.5, P, Q) == math.inf
        assert tv(P, Q) == 1.0

    def test_renyi_zero_order(self):
        P = Distribution(2, np.array([0.5, 0.5, 0.0, 0.0]))
        U = Distribution.uniform(2)
        assert renyi(0.0, P, U) == pytest.approx(1.0)

    def test_width_mismatch(self):
        with pytest.raises(WidthMismatch):
            tv(Distribution.uniform(1), Distribution.uniform(2))

    def test_moment_class_distance_matches_witness(self, rng):
        P, Q = random_distribution(3, rng), random_distribution(3, rng)
        for q in (1.5, 2.0, 4.0):
            witness = moment_class_witness(q, P, Q)
            assert np.mean(np.abs(witness) ** q) == pytest.approx(1.0)
            assert float((P.probs - Q.probs) @ witness) == pytest.approx(
                moment_class_distance(q, P, Q)
            )

    def test_moment_class_two_is_scaled_l2(self, rng):
        P, U = random_distribution(4, rng), Distribution.uniform(4)
        expected = 4.0 * lp_distance(2.0, P, U)
        assert moment_class_distance(2.0, P, U) == pytest.approx(expected)

    def test_rows_match_exact(self, rng):
        rows = np.stack(
            [random_distribution(3, rng, sparse=True).probs for _ in range(5)]
        )
        U = Distribution.uniform(3)
        for text in ("tv", "kl", "max", "renyi:0.5", "renyi:2", "lp:2", "moment:2"):
            kind = DivergenceKind.parse(text)
            expected = [exact_divergence(kind, Distribution(3, row), U) for row in rows]
            assert divergence_to_uniform_rows(kind, rows) == pytest.approx(expected)

    def test_bounded_norm(self):
        assert bounded_norm(DivergenceKind.tv(), 5) == 1.0
        assert bounded_norm(DivergenceKind.kl(), 5) == 5.0
        assert bounded_norm(DivergenceKind.renyi(2), 3) == 3.0


@settings(max_examples=80, deadline=None)
@given(distribution_pairs())
def test_renyi_monotone_in_order(pair):
    P, Q = pair
    orders = (0.0, 0.5, 1.0, 2.0, math.inf)
    values = [renyi(a, P, Q) for a in orders]
    for lower, higher in zip(values, values[1:]):
        assert lower <= higher + 1e-9 or math.isinf(higher)


@settings(max_examples=80, deadline=None)
@given(distributions())
def test_kl_from_tv(P):
    U = Distribution.uniform(P.width)
    assert kl(P, U) <= kl_from_tv_bound(P.width, tv(P, U)) + 1e-9


@settings(max_examples=60, deadline=None)
@given(distributions())
def test_pinsker(P):
    U = Distribution.uniform(P.width)
    assert tv(P, U) <= math.sqrt(LN2 / 2.0 * kl(P, U)) + 1e-9


def test_kl_triangle(rng):
    for _ in range(50):
        P, Q, R = (random_distribution(3, rng) for _ in range(3))
        for alpha in (0.5, 1.0, 2.0):
            assert check_kl_triangle(P, Q, R, alpha)


def test_binary_entropy():
    assert binary_entropy(0.0) == 0.0
    assert binary_entropy(0.5) == pytest.approx(1.0)
    assert binary_entropy(0.11) == pytest.approx(binary_entropy(0.89))


class TestTestFunctionDistances:
    def test_two_point_scale(self):
        direction = np.array([1.0, -1.0])
        scale = max_feasible_scale(direction, TGrid.default())
        assert scale == pytest.approx(0.5, abs=1e-3)
        assert mgf_feasible(scale * direction, TGrid.default())

    def test_point_masses_on_one_bit(self):
        P, Q = Distribution.point(1, 0), Distribution.point(1, 1)
        result = subgaussian_distance(P, Q, iterations=0, restarts=2)
        assert result.lower >= 1.0 - 1e-6
        assert result.upper == pytest.approx(2.0 * math.sqrt(LN2 / 2.0))

    def test_equal_distributions(self):
        U = Distribution.uniform(2)
        result = subgaussian_distance(U, U, iterations=0)
        assert result.lower == result.upper == 0.0

    def test_sandwich(self, rng):
        for _ in range(5):
            P, Q = random_distribution(3, rng), random_distribution(3, rng)
            result = subgaussian_distance(P, Q, iterations=20, restarts=3, seed=1)
            assert tv(P, Q) - 1e-9 <= result.lower <= result.upper + 1e-12
            assert result.upper <= math.sqrt(2.0 * LN2 * 3) * tv(P, Q) + 1e-9

    def test_pinsker_against_uniform(self, rng):
        P, U = random_distribution(3, rng), Distribution.uniform(3)
        result = subgaussian_distance(P, U, iterations=20, seed=2)
        assert result.lower <= 2.0 * pinsker_subgaussian_bound(kl(P, U)) + 1e-9

    def test_subexponential_dominates_subgaussian(self, rng):
        P, Q = random_distribution(2, rng), random_distribution(2, rng)
        gauss = subgaussian_distance(P, Q, iterations=10, restarts=2, seed=3)
        expo = subexponential_distance(
            P, Q, iterations=10, restarts=2, seed=3, subgaussian=gauss
        )
        assert expo.lower >= min(gauss.lower, expo.upper) - 1e-12
        assert expo.lower <= expo.upper


def test_distance_exact_kinds():
    U = Distribution.uniform(2)
    result = distance(DivergenceKind.kl(), U, U)
    assert (result.lower, result.upper, result.exact) == (0.0, 0.0, True)


def test_distance_result_validation():
    with pytest.raises(ValidationError):
        DistanceResult(lower=2.0, upper=1.0, exact=False)
    with pytest.raises(ValidationError):
        DistanceResult(lower=0.5, upper=1.0, exact=True)


def test_tag_values_are_cli_names():
    assert {tag.value for tag in DivergenceTag} >= {"tv", "kl", "subgaussian"}

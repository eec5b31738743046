import numpy as np
import pytest

from divext.constants import PROV_PERFECT, PROV_SEED_PREPEND
from divext.divergences import DivergenceKind
from divext.domain import Distribution
from divext.errors import MissingClaim, UnsupportedWidth, WidthMismatch
from divext.extractor import (
    Claim,
    Extractor,
    Strength,
    Waste,
    claim_holds,
    empty_extractor,
    identity_seed_extractor,
    prepend_seed,
    random_extractor,
    table_extractor,
)

from .conftest import truncation_extractor

KL = DivergenceKind.kl()


class TestStrength:
    def test_lattice(self):
        assert Strength.STRONG_AVG.implies(Strength.STRONG)
        assert Strength.STRONG_AVG.implies(Strength.AVG)
        assert Strength.STRONG.implies(Strength.PLAIN)
        assert not Strength.STRONG.implies(Strength.AVG)
        assert not Strength.AVG.implies(Strength.STRONG)
        assert not Strength.PLAIN.implies(Strength.STRONG)

    def test_of(self):
        assert Strength.of(strong=True, average=True) is Strength.STRONG_AVG
        assert Strength.of(strong=False, average=True) is Strength.AVG
        assert Strength.of(strong=True, average=False).strong


class TestClaims:
    @pytest.fixture
    def ext(self) -> Extractor:
        claims = (
            Claim(DivergenceKind.renyi(2.0), 2.0, 0.5, Strength.STRONG, "a"),
            Claim(KL, 3.0, 0.1, Strength.PLAIN, "b"),
            Claim(DivergenceKind.tv(), 1.0, 0.3, Strength.AVG, "c"),
        )
        return truncation_extractor(4, 1, 1).with_claims(*claims)

    def test_renyi_claim_covers_kl(self, ext):
        assert ext.find_claim(KL, 2.0).provenance == "a"

    def test_higher_entropy_reuses_claims(self, ext):
        assert ext.claim_error(KL, 3.5) == 0.1
        assert ext.claim_error(KL, 3.5, Strength.STRONG) == 0.5

    def test_missing(self, ext):
        assert not ext.has_claim(KL, 1.5)
        assert not ext.has_claim(DivergenceKind.tv(), 2.0, Strength.STRONG)
        with pytest.raises(MissingClaim):
            ext.find_claim(DivergenceKind.renyi(3.0), 4.0)

    def test_report(self, ext):
        report = ext.report()
        assert (report.n, report.d, report.m) == (4, 1, 1)
        assert [c.kind for c in report.claims] == ["renyi:2", "kl", "tv"]

    def test_claim_holds(self):
        claim = Claim(KL, 1.0, 0.25, Strength.PLAIN, "x")
        assert claim_holds(0.25 + 1e-7, claim)
        assert not claim_holds(0.3, claim)


class TestEvaluation:
    def test_table_and_transition(self):
        ext = truncation_extractor(3, 1, 1)
        assert ext.table().tolist() == [[0, 0]] * 4 + [[1, 1]] * 4
        assert np.allclose(ext.averaged_transition().sum(axis=1), 1.0)

    def test_table_cap(self):
        with pytest.raises(UnsupportedWidth):
            truncation_extractor(20, 10, 1).table()

    def test_output_distribution(self):
        ext = truncation_extractor(2, 1, 1)
        out = ext.output_distribution(Distribution(2, np.array([0.1, 0.2, 0.3, 0.4])))
        assert out.probs == pytest.approx([0.3, 0.7])
        with pytest.raises(WidthMismatch):
            ext.output_distribution(Distribution.uniform(3))

    def test_seed_rows_match_dense(self, rng):
        ext = random_extractor(4, 2, 2, rng)
        support = np.array([[1, 5, 6, 12]])
        dense = ext.seed_distributions(Distribution.flat(4, [1, 5, 6, 12]))
        assert np.allclose(ext.flat_seed_rows(support)[0], dense)
        assert np.allclose(ext.flat_output_rows(support)[0], dense.mean(axis=0))

    def test_table_extractor(self):
        table = np.array([[0, 1], [2, 3]])
        ext = table_extractor(1, 1, 2, table, "t")
        assert ext.table().tolist() == [[0, 1], [2, 3]]


class TestBuildingBlocks:
    def test_identity_seed(self):
        ext = identity_seed_extractor(3)
        assert (ext.n, ext.d, ext.m) == (0, 3, 3)
        assert ext.output_distribution(Distribution.uniform(0)).is_uniform()
        assert ext.claim_error(DivergenceKind.max(), 0.0, Strength.AVG) == 0.0
        assert ext.claims[0].provenance == PROV_PERFECT

    def test_empty(self):
        ext = empty_extractor(3)
        assert ext.m == 0 and ext.waste.width == 3
        assert ext.check_injective(strong=True)

    def test_injectivity(self):
        ext = truncation_extractor(3, 1, 1)
        assert not ext.check_injective()
        keeps_all = ext.with_claims(waste=Waste(3, lambda x, s: x, True, True))
        # (x, s) и (x, s') дают один и тот же (Ext, Waste)
        assert not keeps_all.check_injective()
        assert keeps_all.check_injective(strong=True)


class TestSeedPrepend:
    def test_seed_goes_to_high_bits(self):
        ext = prepend_seed(table_extractor(1, 1, 2, [[0, 1], [2, 3]], "t"))
        assert (ext.n, ext.d, ext.m) == (1, 1, 3)
        assert ext.table().tolist() == [[0, 5], [2, 7]]

    def test_strong_claims_become_plain_kl(self):
        tv = DivergenceKind.tv()
        base = table_extractor(1, 1, 1, [[0, 1], [1, 0]], "t").with_claims(
            Claim(KL, 1.0, 0.0, Strength.STRONG, "manual"),
            Claim(DivergenceKind.renyi(2.0), 0.0, 0.5, Strength.STRONG_AVG, "manual"),
            Claim(KL, 0.0, 1.0, Strength.PLAIN, "manual"),
            Claim(tv, 0.0, 0.5, Strength.STRONG, "manual"),
        )
        ext = prepend_seed(base)
        assert {(c.k, c.eps, c.strength) for c in ext.claims} == {
            (1.0, 0.0, Strength.PLAIN),
            (0.0, 0.5, Strength.AVG),
        }
        assert all(c.kind == KL for c in ext.claims)
        assert all(c.provenance == PROV_SEED_PREPEND for c in ext.claims)

    def test_rejects_wide_output(self):
        wide = Extractor(n=1, d=40, m=30, fn=lambda x, s: s)
        with pytest.raises(UnsupportedWidth):
            prepend_seed(wide)

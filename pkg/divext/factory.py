"""
Модуль для сборки экстракторов и сэмплеров по JSON-спецификациям.
"""

import logging
from typing import Optional

from .compose import (
    compose_block,
    high_entropy_kl,
    reextract,
    rrv_transform,
    tv_to_kl,
    zigzag,
)
from .config import Settings
from .constants import MSG_BAD_PARAMETER
from .errors import SpecError
from .expanders import expander_extractor, graph_provider
from .extractor import Extractor, empty_extractor, identity_seed_extractor
from .hashing import (
    LeftoverHashProvider,
    almost_universal_family,
    lhl_extractor,
    linear_family,
    pairwise_family,
)
from .models.schemas import (
    BlockSpec,
    EmptySpec,
    ExpanderSamplerSpec,
    ExpanderSpec,
    ExtractorSamplerSpec,
    ExtractorSpec,
    HighEntropySpec,
    IdentitySeedSpec,
    LHLSpec,
    PairwiseSamplerSpec,
    ReextractSpec,
    RRVSpec,
    SamplerSpec,
    SubgaussianSamplerSpec,
    TVToKLSpec,
    ZigzagSpec,
)
from .samplers import (
    Sampler,
    expander_sampler,
    extractor_to_sampler,
    pairwise_sampler,
    subgaussian_sampler,
)


class Factory:
    """
    Строит объекты по дереву спецификаций, беря лимиты из настроек.
    """

    def __init__(self, settings: Optional[Settings] = None):
        self.settings = settings or Settings()

    def graphs(self, name: str):
        return graph_provider(name, self.settings.LAMBDA_MEASURE_CAP)

    def build_extractor(self, spec: ExtractorSpec) -> Extractor:
        """
        Рекурсивно собирает экстрактор.

        Args:
            spec: Валидированная спецификация

        Returns:
            Extractor: Экстрактор с реестром утверждений

        Raises:
            SpecError: Если спецификации не хватает параметров
        """
        ext = self._build(spec)
        logging.debug("Собран %s: n=%d d=%d m=%d", ext.name, ext.n, ext.d, ext.m)
        return ext

    def _build(self, spec: ExtractorSpec) -> Extractor:
        cap = self.settings.MAX_SEED_WIDTH
        if isinstance(spec, LHLSpec):
            return self._lhl(spec)
        if isinstance(spec, ExpanderSpec):
            return expander_extractor(
                spec.n, spec.delta_log, spec.eps, self.graphs(spec.graph), cap
            )
        if isinstance(spec, IdentitySeedSpec):
            return identity_seed_extractor(spec.d)
        if isinstance(spec, EmptySpec):
            return empty_extractor(spec.n)
        if isinstance(spec, BlockSpec):
            return compose_block(
                self._build(spec.outer),
                self._build(spec.inner),
                spec.alpha,
                spec.delta_log,
            )
        if isinstance(spec, ReextractSpec):
            return reextract(
                self._build(spec.first), self._build(spec.second), spec.strong
            )
        if isinstance(spec, ZigzagSpec):
            return zigzag(
                self._build(spec.outer),
                self._build(spec.inner),
                self._build(spec.waste),
                spec.alpha,
                spec.delta_log,
            )
        if isinstance(spec, RRVSpec):
            return rrv_transform(
                self._build(spec.base), spec.d_extra, spec.eps, spec.strong
            )
        if isinstance(spec, TVToKLSpec):
            return tv_to_kl(self._build(spec.base))
        if isinstance(spec, HighEntropySpec):
            return high_entropy_kl(
                spec.m,
                spec.delta,
                spec.eps,
                spec.alpha,
                inner=LeftoverHashProvider(cap),
                graphs=self.graphs(spec.graph),
                max_seed_width=cap,
            )
        raise SpecError(
            MSG_BAD_PARAMETER.format(name="kind", value=type(spec).__name__)
        )

    @staticmethod
    def _lhl(spec: LHLSpec) -> Extractor:
        if spec.m > spec.n:
            raise SpecError(MSG_BAD_PARAMETER.format(name="m", value=spec.m))
        if spec.family == "pairwise":
            fam = pairwise_family(spec.n, spec.m)
        elif spec.family == "linear":
            fam = linear_family(spec.n, spec.m)
        else:
            if spec.eps is None:
                raise SpecError(MSG_BAD_PARAMETER.format(name="eps", value=None))
            fam = almost_universal_family(spec.n, spec.m, spec.eps)
        forms = lhl_extractor(fam)
        return forms.strong if spec.form == "strong" else forms.full

    def build_sampler(self, spec: SamplerSpec) -> Sampler:
        """
        Собирает сэмплер.

        Args:
            spec: Валидированная спецификация сэмплера

        Returns:
            Sampler: Сэмплер с реестром утверждений
        """
        cap = self.settings.MAX_SEED_WIDTH
        if isinstance(spec, PairwiseSamplerSpec):
            sampler = pairwise_sampler(spec.m, spec.delta, spec.eps)
        elif isinstance(spec, ExpanderSamplerSpec):
            sampler = expander_sampler(
                spec.m, spec.delta, spec.eps, self.graphs(spec.graph), cap
            )
        elif isinstance(spec, SubgaussianSamplerSpec):
            sampler = subgaussian_sampler(
                spec.m, spec.delta, spec.eps, spec.alpha, self.graphs(spec.graph), cap
            )
        elif isinstance(spec, ExtractorSamplerSpec):
            sampler = extractor_to_sampler(self.build_extractor(spec.extractor))
        else:
            raise SpecError(
                MSG_BAD_PARAMETER.format(name="kind", value=type(spec).__name__)
            )
        logging.info("Собран сэмплер %s: %d точек", sampler.name, sampler.sample_count)
        return sampler

"""
Pydantic-модели для валидации JSON-спецификаций и отчётов.
"""

from typing import Annotated, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator


class DistributionModel(BaseModel):
    """Распределение на {0,1}^width в JSON-представлении."""

    width: int = Field(..., ge=0)
    probs: list[float]


class FlatSourceModel(BaseModel):
    """Плоский источник: равномерное распределение на носителе."""

    width: int = Field(..., ge=0)
    support: list[int]


class FunctionTableModel(BaseModel):
    """Таблица вещественной функции на {0,1}^width."""

    width: int = Field(..., ge=0)
    values: list[float]


class DistanceResult(BaseModel):
    """Результат вычисления расстояния: нижняя и верхняя оценки."""

    lower: float
    upper: float
    exact: bool
    witness: Optional[list[float]] = Field(default=None, exclude=True)

    @model_validator(mode="after")
    def check_bounds(self) -> "DistanceResult":
        """Проверяет lower <= upper и совпадение оценок для точных видов."""
        if self.lower > self.upper + 1e-9:
            raise ValueError(f"lower={self.lower} превышает upper={self.upper}")
        if self.exact and self.lower != self.upper:
            raise ValueError("точный результат должен иметь lower == upper")
        return self


class DistanceReport(BaseModel):
    """Отчёт команды divergence."""

    kind: str
    lower: float
    upper: float
    exact: bool
    seed: int


# Спецификации экстракторов (дерево комбинаторов)


class LHLSpec(BaseModel):
    """Экстрактор по лемме об остаточном хешировании."""

    kind: Literal["lhl"]
    n: int = Field(..., ge=1, le=64)
    m: int = Field(..., ge=0)
    family: Literal["pairwise", "au", "linear"] = "pairwise"
    eps: Optional[float] = Field(default=None, gt=0, lt=1)
    form: Literal["strong", "full"] = "strong"


class ExpanderSpec(BaseModel):
    """Экстрактор на соседях экспандера."""

    kind: Literal["expander"]
    n: int = Field(..., ge=1)
    delta_log: float = Field(..., ge=0)
    eps: float = Field(..., gt=0)
    graph: Literal["mgg", "xor"] = "mgg"


class IdentitySeedSpec(BaseModel):
    """Совершенный экстрактор, возвращающий семя."""

    kind: Literal["identity_seed"]
    d: int = Field(..., ge=0)


class EmptySpec(BaseModel):
    """Пустой экстрактор с нулевым выходом."""

    kind: Literal["empty"]
    n: int = Field(..., ge=0)


class BlockSpec(BaseModel):
    """Блочная композиция: выход внутреннего экстрактора служит семенем внешнего."""

    kind: Literal["block"]
    outer: "ExtractorSpec"
    inner: "ExtractorSpec"
    alpha: float = Field(..., gt=0)
    delta_log: Optional[float] = Field(default=None, ge=0)


class ReextractSpec(BaseModel):
    """Повторное извлечение из отходов первого экстрактора."""

    kind: Literal["reextract"]
    first: "ExtractorSpec"
    second: "ExtractorSpec"
    strong: bool = False


class ZigzagSpec(BaseModel):
    """Зигзаг-произведение экстракторов."""

    kind: Literal["zigzag"]
    outer: "ExtractorSpec"
    inner: "ExtractorSpec"
    waste: "ExtractorSpec"
    alpha: float = Field(..., gt=0)
    delta_log: Optional[float] = Field(default=None, ge=0)


class RRVSpec(BaseModel):
    """Сокращение потерь энтропии повторным извлечением."""

    kind: Literal["rrv"]
    base: "ExtractorSpec"
    d_extra: int = Field(..., ge=0)
    eps: Optional[float] = Field(default=None, gt=0)
    strong: bool = True


class TVToKLSpec(BaseModel):
    """Перевод TV-утверждений в KL-утверждения."""

    kind: Literal["tv_to_kl"]
    base: "ExtractorSpec"


class HighEntropySpec(BaseModel):
    """KL-экстрактор для источников с высокой min-энтропией."""

    kind: Literal["high_entropy"]
    m: int = Field(..., ge=1)
    delta: float = Field(..., gt=0, le=1)
    eps: float = Field(..., gt=0)
    alpha: float = Field(default=1.0, gt=0, le=1)
    graph: Literal["mgg", "xor"] = "xor"


ExtractorSpec = Annotated[
    Union[
        LHLSpec,
        ExpanderSpec,
        IdentitySeedSpec,
        EmptySpec,
        BlockSpec,
        ReextractSpec,
        ZigzagSpec,
        RRVSpec,
        TVToKLSpec,
        HighEntropySpec,
    ],
    Field(discriminator="kind"),
]

for _model in (BlockSpec, ReextractSpec, ZigzagSpec, RRVSpec, TVToKLSpec):
    _model.model_rebuild()


# Спецификации сэмплеров


class PairwiseSamplerSpec(BaseModel):
    """Сэмплер на попарно независимом хешировании."""

    kind: Literal["pairwise_sampler"]
    m: int = Field(..., ge=1)
    delta: float = Field(..., gt=0, le=1)
    eps: float = Field(..., gt=0)


class ExpanderSamplerSpec(BaseModel):
    """Сэмплер на соседях экспандера."""

    kind: Literal["expander_sampler"]
    m: int = Field(..., ge=2)
    delta: float = Field(..., gt=0, le=1)
    eps: float = Field(..., gt=0)
    graph: Literal["mgg", "xor"] = "mgg"


class SubgaussianSamplerSpec(BaseModel):
    """Сэмплер для субгауссовских и субэкспоненциальных функций."""

    kind: Literal["subgaussian_sampler"]
    m: int = Field(..., ge=1)
    delta: float = Field(..., gt=0, le=1)
    eps: float = Field(..., gt=0)
    alpha: float = Field(default=1.0, gt=0, le=1)
    graph: Literal["mgg", "xor"] = "xor"


class ExtractorSamplerSpec(BaseModel):
    """Сэмплер, полученный из экстрактора."""

    kind: Literal["extractor_sampler"]
    extractor: ExtractorSpec


SamplerSpec = Annotated[
    Union[
        PairwiseSamplerSpec,
        ExpanderSamplerSpec,
        SubgaussianSamplerSpec,
        ExtractorSamplerSpec,
    ],
    Field(discriminator="kind"),
]


class SourceFamilyModel(BaseModel):
    """Семейство плоских источников для проверки."""

    mode: Literal["exhaustive", "structured", "sampled"] = "exhaustive"
    cap: Optional[int] = Field(default=None, gt=0)
    count: int = Field(default=1000, gt=0)
    seed: Optional[int] = Field(default=None, ge=0)
    fallback: bool = True


class VerifyRequest(BaseModel):
    """Запрос на проверку утверждений экстрактора."""

    extractor: ExtractorSpec
    kind: Optional[str] = None
    k: Optional[float] = None
    strong: Optional[bool] = None
    family: SourceFamilyModel = Field(default_factory=SourceFamilyModel)


# Отчёты


class ClaimModel(BaseModel):
    """Запись реестра утверждений."""

    kind: str
    k: float
    eps: float
    strength: str
    provenance: str
    slack: float = 0.0


class BuildReport(BaseModel):
    """Отчёт о сборке экстрактора."""

    name: str
    n: int
    d: int
    m: int
    waste_width: Optional[int] = None
    claims: list[ClaimModel]
    notes: dict[str, float] = Field(default_factory=dict)


class VerifyEntry(BaseModel):
    """Результат проверки одного утверждения."""

    model_config = ConfigDict(populate_by_name=True)

    claim: ClaimModel
    worst: float
    witness: FlatSourceModel
    sources: int
    label: str
    passed: bool = Field(..., alias="pass")


class VerifyReport(BaseModel):
    """Отчёт команды verify."""

    extractor: str
    seed: int
    entries: list[VerifyEntry]
    all_pass: bool


class GraphReport(BaseModel):
    """Отчёт команды graph-check."""

    n: int
    degree: int
    regular: bool
    consistently_labelled: bool
    connected: bool
    lambda_measured: Optional[float]
    lambda_bound: float


class SamplerClaimModel(BaseModel):
    """Запись реестра утверждений сэмплера."""

    function_class: str
    delta: float
    eps: float
    strong: bool
    absolute: bool
    provenance: str


class SamplerReport(BaseModel):
    """Отчёт о сборке сэмплера."""

    name: str
    n: int
    m: int
    sample_count: int
    claims: list[SamplerClaimModel]
    notes: dict[str, float] = Field(default_factory=dict)


class SampleReport(BaseModel):
    """Отчёт команды sample: точки, оценка и утверждения, под которыми она дана."""

    points: list[str]
    estimate: float
    true_mean: float
    error: float
    claims: list[SamplerClaimModel]
    seed: int


class SamplerVerifyEntry(BaseModel):
    """Результат эмпирической проверки утверждения сэмплера."""

    model_config = ConfigDict(populate_by_name=True)

    claim: SamplerClaimModel
    worst_rate: float
    functions: int
    passed: bool = Field(..., alias="pass")


class SamplerVerifyReport(BaseModel):
    """Отчёт команды verify для сэмплера."""

    sampler: str
    seed: int
    entries: list[SamplerVerifyEntry]
    all_pass: bool

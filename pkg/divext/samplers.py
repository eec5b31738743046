"""
Модуль для усредняющих сэмплеров: переходы экстрактор <-> сэмплер,
конкретные сэмплеры (попарно независимый, на экспандере, субгауссовский),
классы тестовых функций и эмпирическая доля неудач.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Iterable, Mapping, Optional, Sequence

import numpy as np

from .constants import (
    BISECTION_STEPS,
    CHEBYSHEV_FACTOR,
    DEFAULT_MAX_SEED_WIDTH,
    DOMAIN_WIDTH_CAP,
    MSG_BAD_PARAMETER,
    MSG_INFEASIBLE,
    MSG_MISSING_CLAIM,
    MSG_PRECONDITION,
    MSG_SEED_TOO_LONG,
    MSG_TABLE_TOO_LARGE,
    PROV_CHEBYSHEV,
    PROV_EXPANDER_SAMPLER,
    PROV_EXTRACTOR_FROM_SAMPLER,
    PROV_EXTRACTOR_FROM_SAMPLER_AVG,
    PROV_EXPANDER_MIXING,
    PROV_SAMPLER_FROM_EXTRACTOR,
    PROV_SUBGAUSSIAN_SAMPLER,
    SUBEXPONENTIAL_T_LIMIT,
)
from .compose import high_entropy_kl
from .divergences import (
    DivergenceKind,
    DivergenceTag,
    TGrid,
    bounded_norm,
    mgf_feasible,
    mgf_log,
    pinsker_subgaussian_bound,
    subexponential_kl_bound,
    subexponential_max_deviation,
    subgaussian_max_deviation,
)
from .errors import (
    InfeasibleParameters,
    MissingClaim,
    PreconditionViolated,
    UnsupportedWidth,
)
from .expanders import GraphProvider, MGGProvider, graph_extractor, power_walk
from .extractor import Claim, Extractor, Strength
from .hashing import pairwise_family
from .models.schemas import SamplerClaimModel, SamplerReport
from .utils import Utils

PointFunction = Callable[[np.ndarray, np.ndarray], np.ndarray]

# Предел ширины монет для полного перебора
COIN_WIDTH_CAP = 20


class FunctionClass(str, Enum):
    """Класс тестовых функций f: {0,1}^m -> R."""

    BOUNDED01 = "bounded01"
    BOUNDED_VARIANCE = "bounded_variance"
    SUBGAUSSIAN = "subgaussian"
    SUBEXPONENTIAL = "subexponential"

    @property
    def divergence(self) -> DivergenceKind:
        """Расстояние, порождённое классом."""
        if self is FunctionClass.BOUNDED01:
            return DivergenceKind.tv()
        if self is FunctionClass.BOUNDED_VARIANCE:
            return DivergenceKind.moment(2.0)
        if self is FunctionClass.SUBGAUSSIAN:
            return DivergenceKind.subgaussian()
        return DivergenceKind.subexponential()

    @property
    def symmetric(self) -> bool:
        # Для [0,1]-функций роль -f играет 1 - f
        return True

    @property
    def grid(self) -> Optional[TGrid]:
        if self is FunctionClass.SUBGAUSSIAN:
            return TGrid.default()
        if self is FunctionClass.SUBEXPONENTIAL:
            return TGrid.default().restricted(SUBEXPONENTIAL_T_LIMIT)
        return None

    def max_deviation(self, m: int) -> float:
        """sup |f - E f| по классу на {0,1}^m."""
        if self is FunctionClass.BOUNDED01:
            return 1.0
        if self is FunctionClass.BOUNDED_VARIANCE:
            # Всё отклонение сосредоточено в одной точке
            return math.sqrt((1 << m) - 1)
        if self is FunctionClass.SUBGAUSSIAN:
            return subgaussian_max_deviation(m)
        return subexponential_max_deviation(m)

    def sample(self, m: int, count: int, rng: np.random.Generator) -> np.ndarray:
        """
        Случайные члены класса формы (count, 2^m).

        Субгауссовские и субэкспоненциальные функции: центрированное
        случайное направление, умноженное на наибольший допустимый масштаб.
        """
        size = 1 << m
        if self is FunctionClass.BOUNDED01:
            thresholds = rng.random((count, 1))
            return (rng.random((count, size)) < thresholds).astype(np.float64)
        if self is FunctionClass.BOUNDED_VARIANCE:
            raw = rng.standard_normal((count, size))
            norms = np.sqrt(np.mean(raw * raw, axis=1, keepdims=True))
            return raw / np.where(norms > 0, norms, 1.0)
        if self is FunctionClass.SUBGAUSSIAN:
            raw = rng.uniform(-1.0, 1.0, (count, size))
        else:
            raw = rng.laplace(size=(count, size))
        directions = raw - raw.mean(axis=1, keepdims=True)
        return feasible_scales(directions, self.grid)[:, None] * directions

    def certify(self, values: np.ndarray) -> bool:
        """Проверка принадлежности функции классу по полной таблице."""
        values = np.asarray(values, dtype=np.float64)
        if self is FunctionClass.BOUNDED01:
            return bool(np.all((values >= 0.0) & (values <= 1.0)))
        if self is FunctionClass.BOUNDED_VARIANCE:
            return math.sqrt(float(np.mean(values * values))) <= 1.0 + 1e-9
        return mgf_feasible(values, self.grid)


def feasible_scales(directions: np.ndarray, grid: TGrid) -> np.ndarray:
    """
    Построчно наибольшее c, при котором c * direction проходит сетку
    ограничений: удвоение, затем бисекция.
    """
    directions = np.atleast_2d(directions)
    ts, bounds = grid.array, grid.bounds()[:, None]

    def feasible(scales: np.ndarray) -> np.ndarray:
        logs = mgf_log(scales[:, None] * directions, ts)
        return np.all(logs <= bounds, axis=0)

    lo = np.zeros(directions.shape[0])
    hi = np.ones(directions.shape[0])
    active = np.any(directions != 0.0, axis=1)
    growing = active & feasible(hi)
    while np.any(growing):
        lo = np.where(growing, hi, lo)
        hi = np.where(growing, 2.0 * hi, hi)
        growing = growing & (hi <= 1e12) & feasible(hi)
    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        ok = feasible(mid)
        lo = np.where(ok, mid, lo)
        hi = np.where(ok, hi, mid)
    return np.where(active, lo, 0.0)


@dataclass(frozen=True)
class SamplerClaim:
    """
    Гарантия сэмплера: для любой f из класса доля монет с ошибкой
    среднего > eps (по модулю, если absolute) не превосходит delta.
    """

    function_class: FunctionClass
    delta: float
    eps: float
    strong: bool
    absolute: bool
    provenance: str

    def to_model(self) -> SamplerClaimModel:
        return SamplerClaimModel(
            function_class=self.function_class.value,
            delta=self.delta,
            eps=self.eps,
            strong=self.strong,
            absolute=self.absolute,
            provenance=self.provenance,
        )


@dataclass(frozen=True, eq=False)
class Sampler:
    """
    Сэмплер {0,1}^n -> ({0,1}^m)^D: point_fn(x, i) - i-я точка по монетам x,
    поэлементно над массивами uint64.
    """

    n: int
    m: int
    sample_count: int
    point_fn: PointFunction
    claims: tuple[SamplerClaim, ...] = ()
    name: str = "sampler"
    notes: Mapping[str, float] = field(default_factory=dict)
    _cache: dict = field(default_factory=dict, init=False, repr=False)

    def points(self, x) -> np.ndarray:
        """Точки для монет x: форма (..., D)."""
        x = Utils.as_words(x)[..., None]
        indices = np.arange(self.sample_count, dtype=np.uint64)
        x, indices = np.broadcast_arrays(x, indices)
        return Utils.low_bits(self.point_fn(x, indices), self.m)

    def points_table(self) -> np.ndarray:
        """
        Точки для всех монет: форма (2^n, D).

        Raises:
            UnsupportedWidth: Если монеты нельзя перебрать полностью
        """
        bits = self.n + math.ceil(math.log2(self.sample_count))
        if self.n > COIN_WIDTH_CAP or bits > DOMAIN_WIDTH_CAP:
            raise UnsupportedWidth(
                MSG_TABLE_TOO_LARGE.format(bits=bits, cap=DOMAIN_WIDTH_CAP)
            )
        if "table" not in self._cache:
            coins = np.arange(1 << self.n, dtype=np.uint64)
            table = self.points(coins).astype(np.int64)
            table.setflags(write=False)
            self._cache["table"] = table
        return self._cache["table"]

    def histograms(self) -> np.ndarray:
        """H[x, y] = число точек, равных y, для монет x."""
        if "histograms" not in self._cache:
            table = self.points_table()
            size = 1 << self.m
            offsets = np.arange(table.shape[0])[:, None] * size
            counts = np.bincount(
                (offsets + table).ravel(), minlength=table.shape[0] * size
            )
            histograms = counts.reshape(table.shape[0], size).astype(np.float64)
            self._cache["histograms"] = histograms
        return self._cache["histograms"]

    def with_claims(self, *claims: SamplerClaim, **changes) -> "Sampler":
        return replace(self, claims=self.claims + tuple(claims), **changes)

    def claims_for(self, function_class: FunctionClass) -> list[SamplerClaim]:
        return [c for c in self.claims if c.function_class is function_class]

    def report(self) -> SamplerReport:
        return SamplerReport(
            name=self.name,
            n=self.n,
            m=self.m,
            sample_count=self.sample_count,
            claims=[claim.to_model() for claim in self.claims],
            notes=dict(self.notes),
        )


def estimate_mean(sampler: Sampler, f: np.ndarray, x: int) -> float:
    """(1/D) * sum_i f(Samp(x)_i)."""
    f = np.asarray(f, dtype=np.float64)
    if f.shape[-1] != 1 << sampler.m:
        raise ValueError(MSG_BAD_PARAMETER.format(name="f", value=f.shape))
    return float(f[sampler.points(x).astype(np.int64)].mean())


def _exceeds(errors: np.ndarray, eps: float, absolute: bool) -> np.ndarray:
    return (np.abs(errors) if absolute else errors) > eps


def failure_rates(
    sampler: Sampler, functions: np.ndarray, eps: float, absolute: bool
) -> np.ndarray:
    """
    Доли монет с ошибкой > eps для каждой функции из строк functions (T, 2^m),
    по гистограммам точек на всех монетах.
    """
    functions = np.atleast_2d(np.asarray(functions, dtype=np.float64))
    estimates = sampler.histograms() @ functions.T / sampler.sample_count
    errors = estimates - functions.mean(axis=1)[None, :]
    return _exceeds(errors, eps, absolute).mean(axis=0)


def strong_failure_rate(
    sampler: Sampler, functions: np.ndarray, eps: float, absolute: bool
) -> float:
    """Доля монет с ошибкой > eps для набора f_1..f_D формы (D, 2^m)."""
    table = sampler.points_table()
    values = functions[np.arange(sampler.sample_count)[None, :], table]
    errors = values.mean(axis=1) - functions.mean(axis=1).mean()
    return float(_exceeds(errors, eps, absolute).mean())


@dataclass(frozen=True)
class SamplerCheck:
    """Результат эмпирической проверки утверждения сэмплера."""

    claim: SamplerClaim
    worst_rate: float
    functions: int

    @property
    def passed(self) -> bool:
        return self.worst_rate <= self.claim.delta + 1e-12


def check_sampler_claim(
    sampler: Sampler, claim: SamplerClaim, count: int, rng: np.random.Generator
) -> SamplerCheck:
    """
    Проверяет утверждение на count случайных членах класса при полном
    переборе монет; для сильных утверждений f_1..f_D выбираются независимо.
    """
    fc = claim.function_class
    if claim.strong:
        worst = 0.0
        for _ in range(count):
            functions = fc.sample(sampler.m, sampler.sample_count, rng)
            worst = max(
                worst,
                strong_failure_rate(sampler, functions, claim.eps, claim.absolute),
            )
    else:
        functions = fc.sample(sampler.m, count, rng)
        rates = failure_rates(sampler, functions, claim.eps, claim.absolute)
        worst = float(np.max(rates))
    logging.info(
        "Сэмплер %s, класс %s: доля неудач %.4g при delta=%.4g (eps=%.4g)",
        sampler.name,
        fc.value,
        worst,
        claim.delta,
        claim.eps,
    )
    return SamplerCheck(claim, worst, count)


def _class_errors(
    kind: DivergenceKind, eps: float, m: int
) -> list[tuple[FunctionClass, float]]:
    """Перевод ошибки экстрактора в ошибку по классам функций."""
    tag = kind.tag
    if tag is DivergenceTag.TV:
        return [(FunctionClass.BOUNDED01, eps)]
    if tag is DivergenceTag.LP and kind.param == 2.0:
        return [(FunctionClass.BOUNDED_VARIANCE, 2.0 ** (m / 2.0) * eps)]
    if tag is DivergenceTag.MOMENT and kind.param == 2.0:
        return [(FunctionClass.BOUNDED_VARIANCE, eps)]
    if tag is DivergenceTag.SUBGAUSSIAN:
        return [(FunctionClass.SUBGAUSSIAN, eps), (FunctionClass.BOUNDED01, eps)]
    if tag is DivergenceTag.SUBEXPONENTIAL:
        return [(FunctionClass.SUBEXPONENTIAL, eps), (FunctionClass.BOUNDED01, eps)]
    order = kind.renyi_order
    if order is not None and order >= 1.0:
        # Вогнутые отображения ошибки переносят и сильные (средние по семени) оценки
        subgaussian = pinsker_subgaussian_bound(eps)
        return [
            (FunctionClass.SUBGAUSSIAN, subgaussian),
            (FunctionClass.SUBEXPONENTIAL, subexponential_kl_bound(eps)),
            (FunctionClass.BOUNDED01, subgaussian),
        ]
    return []


def _best_sampler_claims(claims: Iterable[SamplerClaim]) -> tuple[SamplerClaim, ...]:
    best: dict[tuple, SamplerClaim] = {}
    for claim in claims:
        key = (
            claim.function_class,
            round(claim.delta, 15),
            claim.strong,
            claim.absolute,
        )
        if key not in best or claim.eps < best[key].eps:
            best[key] = claim
    return tuple(
        sorted(
            best.values(),
            key=lambda c: (c.function_class.value, c.delta, c.strong, c.absolute),
        )
    )


def extractor_to_sampler(
    ext: Extractor,
    levels: Optional[Sequence[float]] = None,
    provenance: str = PROV_SAMPLER_FROM_EXTRACTOR,
) -> Sampler:
    """
    Сэмплер Samp(x)_i = Ext(x, i), D = 2^d.

    Утверждение экстрактора (k, eps) даёт утверждение сэмплера
    (delta = 2^{k-n}, eps) для соответствующего класса, а для
    симметричного класса - абсолютное с 2 * delta.

    Args:
        ext: Экстрактор
        levels: Уровни k, из которых строятся утверждения (по умолчанию все)
        provenance: Метка происхождения

    Raises:
        MissingClaim: Если ни одно утверждение не переводится в класс функций
    """
    claims = []
    for claim in ext.claims:
        if levels is not None and not any(
            abs(claim.k - level) < 1e-9 for level in levels
        ):
            continue
        delta = 2.0 ** (claim.k - ext.n)
        for fc, eps in _class_errors(claim.kind, claim.eps, ext.m):
            if not math.isfinite(eps) or delta > 1.0:
                continue
            strong = claim.strength.strong
            claims.append(SamplerClaim(fc, delta, eps, strong, False, provenance))
            if fc.symmetric and 2.0 * delta <= 1.0:
                claims.append(
                    SamplerClaim(fc, 2.0 * delta, eps, strong, True, provenance)
                )
    if not claims:
        raise MissingClaim(
            MSG_PRECONDITION.format(
                reason=f"у {ext.name} нет утверждений для классов функций"
            )
        )
    return Sampler(
        n=ext.n,
        m=ext.m,
        sample_count=ext.seed_count,
        point_fn=ext.evaluate,
        claims=_best_sampler_claims(claims),
        name=f"samp[{ext.name}]",
    )


def sampler_to_extractor(
    sampler: Sampler,
    function_class: FunctionClass,
    k: float,
    eta: Optional[float] = None,
) -> Extractor:
    """
    Экстрактор Ext(x, i) = Samp(x)_i с ошибкой eps + delta * 2^{n-k} * maxdev
    в расстоянии класса; при заданном eta добавляется average-case оценка
    (k + log2(1/eta), ... + eta * ||D||).

    Raises:
        PreconditionViolated: Если D не степень двойки
        MissingClaim: Если у сэмплера нет утверждений для класса
    """
    D = sampler.sample_count
    if D & (D - 1):
        raise PreconditionViolated(
            MSG_PRECONDITION.format(reason=f"число точек D={D} не степень двойки")
        )
    usable = sampler.claims_for(function_class)
    if not usable:
        raise MissingClaim(
            MSG_MISSING_CLAIM.format(
                name=sampler.name, kind=function_class.value, strength="any", k=k
            )
        )
    kind = function_class.divergence
    maxdev = function_class.max_deviation(sampler.m)
    claims = []
    for claim in usable:
        eps = claim.eps + claim.delta * 2.0 ** (sampler.n - k) * maxdev
        strength = Strength.of(strong=claim.strong, average=False)
        claims.append(Claim(kind, k, eps, strength, PROV_EXTRACTOR_FROM_SAMPLER))
        if eta is not None:
            if not 0 < eta <= 1:
                raise ValueError(MSG_BAD_PARAMETER.format(name="eta", value=eta))
            claims.append(
                Claim(
                    kind,
                    k + math.log2(1.0 / eta),
                    eps + eta * bounded_norm(kind, sampler.m),
                    Strength.of(strong=claim.strong, average=True),
                    PROV_EXTRACTOR_FROM_SAMPLER_AVG,
                )
            )
    return Extractor(
        n=sampler.n,
        d=D.bit_length() - 1,
        m=sampler.m,
        fn=sampler.point_fn,
        claims=tuple(claims),
        name=f"ext[{sampler.name}]",
    )


def pairwise_sampler(m: int, delta: float, eps: float) -> Sampler:
    """
    Сэмплер для функций с ограниченной дисперсией: D = ceil(4 / (eps^2 delta))
    попарно независимых точек h(0), ..., h(D - 1).

    Raises:
        InfeasibleParameters: Если 1 / (delta eps^2) >= 2^m
    """
    if not 0 < delta <= 1 or eps <= 0:
        raise ValueError(MSG_BAD_PARAMETER.format(name="delta/eps", value=(delta, eps)))
    if 1.0 / (delta * eps * eps) >= 2.0**m:
        raise InfeasibleParameters(
            MSG_INFEASIBLE.format(reason=f"1/(delta eps^2) >= 2^{m}")
        )
    count = math.ceil(CHEBYSHEV_FACTOR / (eps * eps * delta) - 1e-9)
    width = max(m, math.ceil(math.log2(count)))
    family = pairwise_family(width, m)

    def point_fn(h: np.ndarray, i: np.ndarray) -> np.ndarray:
        return family.evaluate(h, i)

    # Чебышёв: Pr[|ошибка| > eps] <= 1 / (D eps^2) <= delta / 4
    claim = SamplerClaim(
        FunctionClass.BOUNDED_VARIANCE, delta, eps, True, True, PROV_CHEBYSHEV
    )
    logging.info("Попарно независимый сэмплер: m=%d, D=%d, n=%d", m, count, 2 * width)
    return Sampler(
        n=family.seed_width,
        m=m,
        sample_count=count,
        point_fn=point_fn,
        claims=(claim,),
        name=f"pairwise_sampler(m={m},delta={delta:g},eps={eps:g})",
        notes={"chebyshev_failure": 1.0 / (count * eps * eps)},
    )


def expander_sampler(
    m: int,
    delta: float,
    eps: float,
    provider: Optional[GraphProvider] = None,
    max_seed_width: int = DEFAULT_MAX_SEED_WIDTH,
) -> Sampler:
    """
    Сэмплер на соседях экспандера: монеты - вершина (n = m), точки - концы
    всех блужданий длины w. Длина подбирается так, что
    lambda^w <= eps / sqrt(1/delta - 1), что даёт l_2-ошибку eps * 2^{-m/2}
    при k = m - log2(1/delta) и M_2-ошибку eps.
    """
    if not 0 < delta <= 1 or eps <= 0:
        raise ValueError(MSG_BAD_PARAMETER.format(name="delta/eps", value=(delta, eps)))
    provider = provider or MGGProvider()
    base = provider.base(m)
    spread = math.sqrt(max(0.0, 1.0 / delta - 1.0))
    target = math.inf if spread == 0.0 else eps / spread
    w = 1
    while base.lambda_bound**w > target:
        if base.lambda_bound >= 1.0:
            raise InfeasibleParameters(
                MSG_INFEASIBLE.format(reason=f"lambda={base.lambda_bound:g} >= 1")
            )
        w += 1
    if w * base.degree_width > max_seed_width:
        raise InfeasibleParameters(
            MSG_SEED_TOO_LONG.format(d=w * base.degree_width, cap=max_seed_width)
        )
    graph = power_walk(base, w)
    k = m - math.log2(1.0 / delta)
    l2_error = graph.lambda_bound * math.sqrt(max(0.0, 2.0**-k - 2.0**-m))
    ext = graph_extractor(graph).with_claims(
        Claim(DivergenceKind.lp(2.0), k, l2_error, Strength.AVG, PROV_EXPANDER_MIXING)
    )
    sampler = extractor_to_sampler(ext, levels=[k], provenance=PROV_EXPANDER_SAMPLER)
    claims = [
        c for c in sampler.claims if c.function_class is FunctionClass.BOUNDED_VARIANCE
    ]
    logging.info(
        "Сэмплер на экспандере: m=%d, w=%d, D=%d, M_2-ошибка %.4g",
        m,
        w,
        graph.degree,
        claims[0].eps if claims else math.nan,
    )
    return replace(
        sampler,
        claims=tuple(claims),
        name=f"expander_sampler(m={m},delta={delta:g},eps={eps:g})",
        notes={"walk_length": float(w), "lambda": graph.lambda_bound},
    )


def subgaussian_sampler(
    m: int,
    delta: float,
    eps: float,
    alpha: float = 1.0,
    graphs: Optional[GraphProvider] = None,
    max_seed_width: int = DEFAULT_MAX_SEED_WIDTH,
) -> Sampler:
    """
    Сэмплер для субгауссовских и субэкспоненциальных функций: KL-экстрактор
    с ошибкой eps^2 при дефиците log2(2/delta), переведённый в
    d_G-ошибку sqrt(ln2/2) * eps <= eps и d_E-ошибку.
    """
    ext = high_entropy_kl(
        m, delta / 2.0, eps * eps, alpha, graphs=graphs, max_seed_width=max_seed_width
    )
    k = ext.n - math.log2(2.0 / delta)
    sampler = extractor_to_sampler(ext, levels=[k], provenance=PROV_SUBGAUSSIAN_SAMPLER)
    claims = [
        c
        for c in sampler.claims
        if c.function_class in (FunctionClass.SUBGAUSSIAN, FunctionClass.SUBEXPONENTIAL)
    ]
    overhead = ext.n - m - (1.0 + alpha) * math.log2(1.0 / delta)
    return replace(
        sampler,
        claims=tuple(claims),
        name=f"subgaussian_sampler(m={m},delta={delta:g},eps={eps:g})",
        notes={"randomness_overhead": overhead, "log2_sample_count": float(ext.d)},
    )

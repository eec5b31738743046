"""
Модуль для экстракторов: вычислимых отображений (x, s) -> Ext(x, s)
с реестром заявленных оценок ошибки и необязательным отображением отходов.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Mapping, Optional

import numpy as np

from .constants import (
    CLAIM_TOLERANCE,
    DOMAIN_WIDTH_CAP,
    MSG_MISSING_CLAIM,
    MSG_TABLE_TOO_LARGE,
    MSG_WIDTH_MISMATCH,
    PROV_PERFECT,
    PROV_SEED_PREPEND,
)
from .divergences import DivergenceKind
from .domain import Distribution
from .errors import MissingClaim, UnsupportedWidth, WidthMismatch
from .models.schemas import BuildReport, ClaimModel
from .utils import Utils

BitFunction = Callable[[np.ndarray, np.ndarray], np.ndarray]


class Strength(str, Enum):
    """
    Сила утверждения об ошибке.

    plain - ошибка Ext(X, U_d); strong - средняя по семени ошибка Ext(X, s);
    avg - то же при побочной информации Z; strong_avg - оба усиления.
    """

    PLAIN = "plain"
    STRONG = "strong"
    AVG = "avg"
    STRONG_AVG = "strong_avg"

    def implies(self, other: "Strength") -> bool:
        """
        Порядок решётки: plain < avg, plain < strong < strong_avg,
        avg < strong_avg.
        """
        if self is other or other is Strength.PLAIN:
            return True
        return self is Strength.STRONG_AVG

    @property
    def strong(self) -> bool:
        return self in (Strength.STRONG, Strength.STRONG_AVG)

    @property
    def average(self) -> bool:
        return self in (Strength.AVG, Strength.STRONG_AVG)

    @classmethod
    def of(cls, strong: bool, average: bool) -> "Strength":
        if strong:
            return cls.STRONG_AVG if average else cls.STRONG
        return cls.AVG if average else cls.PLAIN


@dataclass(frozen=True)
class Claim:
    """Заявленная оценка: для источников min-энтропии >= k ошибка в kind <= eps."""

    kind: DivergenceKind
    k: float
    eps: float
    strength: Strength
    provenance: str
    slack: float = 0.0

    def to_model(self) -> ClaimModel:
        return ClaimModel(
            kind=str(self.kind),
            k=self.k,
            eps=self.eps,
            strength=self.strength.value,
            provenance=self.provenance,
            slack=self.slack,
        )


@dataclass(frozen=True)
class Waste:
    """
    Отображение отходов Waste(x, s).

    injective: (x, s) -> (Ext(x, s), Waste(x, s)) инъективно;
    strong_injective: при каждом фиксированном s инъективно x -> (Ext, Waste).
    """

    width: int
    fn: BitFunction
    injective: bool
    strong_injective: bool

    def evaluate(self, x: np.ndarray, s: np.ndarray) -> np.ndarray:
        x, s = np.broadcast_arrays(Utils.as_words(x), Utils.as_words(s))
        return Utils.low_bits(self.fn(x, s), self.width)


@dataclass(frozen=True, eq=False)
class Extractor:
    """
    Экстрактор {0,1}^n x {0,1}^d -> {0,1}^m.

    fn работает поэлементно над массивами uint64 одинаковой формы.
    push (если задан) по строкам распределений источника возвращает
    распределения выхода при равномерном семени.
    """

    n: int
    d: int
    m: int
    fn: BitFunction
    claims: tuple[Claim, ...] = ()
    waste: Optional[Waste] = None
    name: str = "extractor"
    push: Optional[Callable[[np.ndarray], np.ndarray]] = None
    notes: Mapping[str, float] = field(default_factory=dict)
    _cache: dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self) -> None:
        for width in (self.n, self.d, self.m):
            if width < 0 or width > 64:
                raise UnsupportedWidth(f"Ширина {width} вне [0, 64]")
        object.__setattr__(self, "claims", tuple(self.claims))
        object.__setattr__(self, "notes", dict(self.notes))

    @property
    def seed_count(self) -> int:
        return 1 << self.d

    @property
    def output_size(self) -> int:
        return 1 << self.m

    def evaluate(self, x: np.ndarray, s: np.ndarray) -> np.ndarray:
        """Значения Ext(x, s) с приведением к m младшим битам."""
        x, s = np.broadcast_arrays(Utils.as_words(x), Utils.as_words(s))
        return Utils.low_bits(self.fn(x, s), self.m)

    def with_claims(self, *claims: Claim, **changes) -> "Extractor":
        """Копия с добавленными утверждениями."""
        return replace(self, claims=self.claims + tuple(claims), **changes)

    # Табулирование

    def table(self, cap: int = DOMAIN_WIDTH_CAP) -> np.ndarray:
        """
        Полная таблица значений формы (2^n, 2^d).

        Raises:
            UnsupportedWidth: Если n + d превышает cap
        """
        bits = self.n + self.d
        if bits > cap:
            raise UnsupportedWidth(MSG_TABLE_TOO_LARGE.format(bits=bits, cap=cap))
        if "table" not in self._cache:
            xs = np.repeat(np.arange(1 << self.n, dtype=np.uint64), self.seed_count)
            ss = np.tile(np.arange(self.seed_count, dtype=np.uint64), 1 << self.n)
            values = self.evaluate(xs, ss).astype(np.int64)
            values = values.reshape(1 << self.n, self.seed_count)
            values.setflags(write=False)
            self._cache["table"] = values
            logging.debug("Табулирован экстрактор %s: 2^%d значений", self.name, bits)
        return self._cache["table"]

    def averaged_transition(self, cap: int = DOMAIN_WIDTH_CAP) -> np.ndarray:
        """Матрица A[x, y] = Pr_s[Ext(x, s) = y]."""
        if "transition" not in self._cache:
            table = self.table(cap)
            rows = np.repeat(np.arange(table.shape[0]), table.shape[1])
            transition = np.zeros((table.shape[0], self.output_size))
            np.add.at(transition, (rows, table.ravel()), 1.0 / self.seed_count)
            self._cache["transition"] = transition
        return self._cache["transition"]

    # Распределения выхода

    def output_rows(
        self, sources: np.ndarray, cap: int = DOMAIN_WIDTH_CAP
    ) -> np.ndarray:
        """Распределения Ext(X_b, U_d) для строк X_b формы (B, 2^n)."""
        sources = np.atleast_2d(np.asarray(sources, dtype=np.float64))
        if sources.shape[1] != 1 << self.n:
            raise WidthMismatch(
                MSG_WIDTH_MISMATCH.format(left=sources.shape[1], right=1 << self.n)
            )
        if self.push is not None:
            return self.push(sources)
        return sources @ self.averaged_transition(cap)

    def output_distribution(self, P: Distribution) -> Distribution:
        """Распределение Ext(X, U_d)."""
        if P.width != self.n:
            raise WidthMismatch(MSG_WIDTH_MISMATCH.format(left=P.width, right=self.n))
        return Distribution(self.m, self.output_rows(P.probs)[0])

    def seed_distributions(self, P: Distribution) -> np.ndarray:
        """Распределения Ext(X, s) для каждого s: массив формы (2^d, 2^m)."""
        if P.width != self.n:
            raise WidthMismatch(MSG_WIDTH_MISMATCH.format(left=P.width, right=self.n))
        table = self.table()
        out = np.zeros((self.seed_count, self.output_size))
        seeds = np.broadcast_to(np.arange(self.seed_count), table.shape)
        weights = np.broadcast_to(P.probs[:, None], table.shape)
        np.add.at(out, (seeds.ravel(), table.ravel()), weights.ravel())
        return out

    def flat_seed_rows(self, supports: np.ndarray) -> np.ndarray:
        """
        Для пачки носителей формы (B, K) возвращает распределения Ext(X_b, s)
        формы (B, 2^d, 2^m).
        """
        supports = np.atleast_2d(supports)
        batch, size = supports.shape
        values = self.table()[supports]  # (B, K, D)
        offsets = (
            np.arange(batch)[:, None, None] * self.seed_count
            + np.arange(self.seed_count)[None, None, :]
        ) * self.output_size
        counts = np.bincount(
            (offsets + values).ravel(),
            minlength=batch * self.seed_count * self.output_size,
        )
        return counts.reshape(batch, self.seed_count, self.output_size) / size

    def flat_output_rows(self, supports: np.ndarray) -> np.ndarray:
        """Распределения Ext(X_b, U_d) для пачки плоских источников."""
        supports = np.atleast_2d(supports)
        if self.push is not None:
            dense = np.zeros((supports.shape[0], 1 << self.n))
            np.put_along_axis(dense, supports, 1.0 / supports.shape[1], axis=1)
            return self.push(dense)
        return self.flat_seed_rows(supports).mean(axis=1)

    # Реестр утверждений

    def find_claim(
        self, kind: DivergenceKind, k: float, strength: Strength = Strength.PLAIN
    ) -> Claim:
        """
        Наименьшая заявленная ошибка для (kind, k, strength).

        Подходят утверждения с доминирующим видом (монотонность Реньи),
        не меньшей силой и k_claim <= k (монотонность по энтропии).

        Raises:
            MissingClaim: Если подходящего утверждения нет
        """
        usable = [
            claim
            for claim in self.claims
            if claim.kind.dominates(kind)
            and claim.strength.implies(strength)
            and claim.k <= max(k, 0.0) + 1e-12
        ]
        if not usable:
            raise MissingClaim(
                MSG_MISSING_CLAIM.format(
                    name=self.name, kind=kind, strength=strength.value, k=k
                )
            )
        return min(usable, key=lambda claim: (claim.eps, -claim.k))

    def has_claim(
        self, kind: DivergenceKind, k: float, strength: Strength = Strength.PLAIN
    ) -> bool:
        try:
            self.find_claim(kind, k, strength)
        except MissingClaim:
            return False
        return True

    def claim_error(
        self, kind: DivergenceKind, k: float, strength: Strength = Strength.PLAIN
    ) -> float:
        return self.find_claim(kind, k, strength).eps

    # Отходы

    def check_injective(self, strong: bool = False) -> bool:
        """
        Полным перебором проверяет инъективность (Ext, Waste):
        по всем (x, s) либо при каждом s отдельно.
        """
        if self.waste is None:
            return False
        if self.m + self.waste.width > 63:
            raise UnsupportedWidth(
                MSG_TABLE_TOO_LARGE.format(bits=self.m + self.waste.width, cap=63)
            )
        table = self.table()
        xs = np.repeat(np.arange(1 << self.n, dtype=np.uint64), self.seed_count)
        ss = np.tile(np.arange(self.seed_count, dtype=np.uint64), 1 << self.n)
        wastes = self.waste.evaluate(xs, ss)
        pairs = Utils.concat_bits(
            table.ravel().astype(np.uint64), wastes, self.waste.width
        ).reshape(table.shape)
        if strong:
            return all(
                np.unique(pairs[:, s]).size == pairs.shape[0]
                for s in range(pairs.shape[1])
            )
        return np.unique(pairs).size == pairs.size

    def report(self) -> BuildReport:
        """Отчёт о сборке с реестром утверждений."""
        return BuildReport(
            name=self.name,
            n=self.n,
            d=self.d,
            m=self.m,
            waste_width=None if self.waste is None else self.waste.width,
            claims=[claim.to_model() for claim in self.claims],
            notes=dict(self.notes),
        )


def perfect_claims(k: float, strength: Strength) -> tuple[Claim, ...]:
    """Нулевая ошибка: выход ровно равномерен."""
    return (
        Claim(DivergenceKind.max(), k, 0.0, strength, PROV_PERFECT),
        Claim(DivergenceKind.tv(), k, 0.0, strength, PROV_PERFECT),
    )


def identity_seed_extractor(d: int) -> Extractor:
    """Ext(x, s) = s при n = 0: выход совпадает с семенем и ровно равномерен."""
    return Extractor(
        n=0,
        d=d,
        m=d,
        fn=lambda x, s: s,
        claims=perfect_claims(0.0, Strength.AVG),
        waste=Waste(0, lambda x, s: np.zeros_like(s), True, True),
        name=f"identity_seed(d={d})",
    )


def empty_extractor(n: int) -> Extractor:
    """Экстрактор с нулевым выходом; вся энтропия уходит в отходы Waste(x) = x."""
    return Extractor(
        n=n,
        d=0,
        m=0,
        fn=lambda x, s: np.zeros_like(x),
        claims=perfect_claims(0.0, Strength.STRONG_AVG),
        waste=Waste(n, lambda x, s: x, True, True),
        name=f"empty(n={n})",
    )


def prepend_seed(ext: Extractor) -> Extractor:
    """
    Ext'(x, s) = (s, Ext(x, s)).

    Обычная KL-ошибка Ext' равна средней по семени ошибке Ext, поэтому
    сильные утверждения вида, доминирующего KL, переходят в обычные
    KL-утверждения (strong_avg - в avg).

    Raises:
        UnsupportedWidth: Если d + m > 64
    """
    d, m = ext.d, ext.m
    if d + m > 64:
        raise UnsupportedWidth(f"Ширина выхода {d + m} превышает 64")
    kl = DivergenceKind.kl()
    claims = tuple(
        Claim(
            kl,
            claim.k,
            claim.eps,
            Strength.of(strong=False, average=claim.strength.average),
            PROV_SEED_PREPEND,
            claim.slack,
        )
        for claim in ext.claims
        if claim.strength.strong and claim.kind.dominates(kl)
    )

    def fn(x: np.ndarray, s: np.ndarray) -> np.ndarray:
        return Utils.concat_bits(s, ext.evaluate(x, s), m)

    return Extractor(
        n=ext.n, d=d, m=d + m, fn=fn, claims=claims, name=f"prepend[{ext.name}]"
    )


def table_extractor(n: int, d: int, m: int, table: np.ndarray, name: str) -> Extractor:
    """Экстрактор, заданный таблицей формы (2^n, 2^d)."""
    table = np.asarray(table, dtype=np.uint64).reshape(1 << n, 1 << d)
    flat = table.ravel()

    def fn(x: np.ndarray, s: np.ndarray) -> np.ndarray:
        return flat[(x.astype(np.int64) << d) + s.astype(np.int64)]

    return Extractor(n=n, d=d, m=m, fn=fn, name=name)


def random_extractor(n: int, d: int, m: int, rng: np.random.Generator) -> Extractor:
    """Равномерно случайная функция {0,1}^n x {0,1}^d -> {0,1}^m."""
    table = rng.integers(0, 1 << m, size=(1 << n, 1 << d), dtype=np.uint64)
    return table_extractor(n, d, m, table, name=f"random(n={n},d={d},m={m})")


def claim_holds(measured: float, claim: Claim) -> bool:
    """Измеренная ошибка не превышает заявленную с допуском."""
    return math.isinf(claim.eps) or measured <= claim.eps + CLAIM_TOLERANCE

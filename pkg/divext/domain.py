"""
Модуль для распределений на {0,1}^m, мер энтропии, переноса распределения
функцией и перебора плоских источников.

Все логарифмы двоичные. Битовые строки хранятся как целые числа, старший бит
соответствует первой координате.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence, Union

import numpy as np
from scipy.special import entr, logsumexp

from .constants import (
    DOMAIN_WIDTH_CAP,
    MSG_BAD_PROBS_LENGTH,
    MSG_BAD_PROBS_SUM,
    MSG_BAD_SUPPORT,
    MSG_BAD_TABLE,
    MSG_COUNT_EXCEEDS_CAP,
    MSG_NEGATIVE_PROBS,
    MSG_WIDTH_MISMATCH,
    MSG_WIDTH_TOO_LARGE,
    PROB_SUM_TOLERANCE,
)
from .errors import (
    CountExceedsCap,
    InvalidDistribution,
    UnsupportedWidth,
    WidthMismatch,
)
from .models.schemas import DistributionModel, FlatSourceModel

LN2 = math.log(2.0)


def _check_width(width: int) -> None:
    if not 0 <= width <= DOMAIN_WIDTH_CAP:
        raise UnsupportedWidth(
            MSG_WIDTH_TOO_LARGE.format(width=width, cap=DOMAIN_WIDTH_CAP)
        )


@dataclass(frozen=True, eq=False)
class Distribution:
    """
    Распределение вероятностей на {0,1}^width в виде плотного вектора.

    Вектор нормируется при создании и становится неизменяемым, поэтому объект
    можно разделять между потоками.
    """

    width: int
    probs: np.ndarray

    def __post_init__(self) -> None:
        _check_width(self.width)
        probs = np.array(self.probs, dtype=np.float64)
        if probs.ndim != 1 or probs.shape[0] != 1 << self.width:
            raise InvalidDistribution(
                MSG_BAD_PROBS_LENGTH.format(length=probs.size, width=self.width)
            )
        if not np.all(np.isfinite(probs)) or np.any(probs < 0):
            raise InvalidDistribution(MSG_NEGATIVE_PROBS)
        total = float(probs.sum())
        if abs(total - 1.0) > PROB_SUM_TOLERANCE:
            raise InvalidDistribution(MSG_BAD_PROBS_SUM.format(total=total))
        probs = probs / total
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def uniform(cls, width: int) -> "Distribution":
        """Равномерное распределение U_width."""
        _check_width(width)
        size = 1 << width
        return cls(width, np.full(size, 1.0 / size))

    @classmethod
    def point(cls, width: int, x: int) -> "Distribution":
        """Точечная масса в x."""
        _check_width(width)
        probs = np.zeros(1 << width)
        probs[x] = 1.0
        return cls(width, probs)

    @classmethod
    def flat(cls, width: int, support: Sequence[int]) -> "Distribution":
        """Равномерное распределение на заданном носителе."""
        return FlatSource(width, tuple(support)).to_distribution()

    @classmethod
    def from_model(cls, model: DistributionModel) -> "Distribution":
        return cls(model.width, np.asarray(model.probs, dtype=np.float64))

    def to_model(self) -> DistributionModel:
        return DistributionModel(width=self.width, probs=self.probs.tolist())

    @property
    def size(self) -> int:
        return 1 << self.width

    @property
    def support(self) -> np.ndarray:
        """Индексы точек с ненулевой вероятностью."""
        return np.flatnonzero(self.probs)

    def is_uniform(self) -> bool:
        return bool(np.all(self.probs == self.probs[0]))

    def allclose(self, other: "Distribution", atol: float = 1e-12) -> bool:
        return self.width == other.width and bool(
            np.allclose(self.probs, other.probs, rtol=0.0, atol=atol)
        )


@dataclass(frozen=True)
class FlatSource:
    """Плоский источник: равномерное распределение на носителе размера K."""

    width: int
    support: tuple[int, ...]

    def __post_init__(self) -> None:
        _check_width(self.width)
        support = tuple(sorted(int(x) for x in self.support))
        if not support:
            raise InvalidDistribution(MSG_BAD_SUPPORT.format(reason="пустой носитель"))
        if support[0] < 0 or support[-1] >= 1 << self.width:
            raise InvalidDistribution(
                MSG_BAD_SUPPORT.format(reason="элемент вне {0,1}^n")
            )
        if len(set(support)) != len(support):
            raise InvalidDistribution(MSG_BAD_SUPPORT.format(reason="повторы"))
        object.__setattr__(self, "support", support)

    @classmethod
    def from_model(cls, model: FlatSourceModel) -> "FlatSource":
        return cls(model.width, tuple(model.support))

    def to_model(self) -> FlatSourceModel:
        return FlatSourceModel(width=self.width, support=list(self.support))

    @property
    def size(self) -> int:
        return len(self.support)

    @property
    def min_entropy(self) -> float:
        return math.log2(self.size)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.support, dtype=np.int64)

    def to_distribution(self) -> Distribution:
        probs = np.zeros(1 << self.width)
        probs[self.as_array()] = 1.0 / self.size
        return Distribution(self.width, probs)


@dataclass(frozen=True, eq=False)
class JointSource:
    """
    Совместный источник (Z, X): веса значений побочной информации z и условные
    распределения X при Z = z.
    """

    side_width: int
    weights: np.ndarray
    conditionals: tuple[Distribution, ...]

    def __post_init__(self) -> None:
        weights = Distribution(self.side_width, self.weights).probs
        conditionals = tuple(self.conditionals)
        if len(conditionals) != weights.size:
            raise InvalidDistribution(
                MSG_BAD_PROBS_LENGTH.format(
                    length=len(conditionals), width=self.side_width
                )
            )
        widths = {c.width for c in conditionals}
        if len(widths) != 1:
            raise WidthMismatch(
                MSG_WIDTH_MISMATCH.format(left=min(widths), right=max(widths))
            )
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "conditionals", conditionals)

    @property
    def source_width(self) -> int:
        return self.conditionals[0].width

    @classmethod
    def from_joint_table(cls, side_width: int, table: np.ndarray) -> "JointSource":
        """
        Строит совместный источник по таблице P(Z=z, X=x) формы (2^side, 2^n).
        Условные распределения для z нулевого веса заменяются равномерными.
        """
        table = np.asarray(table, dtype=np.float64)
        weights = table.sum(axis=1)
        source_width = int(table.shape[1]).bit_length() - 1
        conditionals = []
        for z, weight in enumerate(weights):
            if weight > 0:
                conditionals.append(Distribution(source_width, table[z] / weight))
            else:
                conditionals.append(Distribution.uniform(source_width))
        return cls(side_width, weights, tuple(conditionals))

    @classmethod
    def independent(cls, side: Distribution, source: Distribution) -> "JointSource":
        """Z и X независимы."""
        return cls(side.width, side.probs, tuple(source for _ in range(side.size)))

    @classmethod
    def from_side_function(
        cls,
        source: Distribution,
        side_width: int,
        side: Union[np.ndarray, Sequence[int]],
    ) -> "JointSource":
        """Побочная информация Z = g(X), где g задана таблицей на {0,1}^n."""
        side = np.asarray(side, dtype=np.int64)
        if side.size != source.size:
            raise WidthMismatch(
                MSG_BAD_TABLE.format(length=side.size, width=source.width)
            )
        table = np.zeros((1 << side_width, source.size))
        table[side, np.arange(source.size)] = source.probs
        return cls.from_joint_table(side_width, table)

    def marginal(self) -> Distribution:
        """Маргинальное распределение X."""
        stacked = np.stack([c.probs for c in self.conditionals])
        return Distribution(self.source_width, self.weights @ stacked)


def min_entropy(P: Distribution) -> float:
    """H_inf(P) = min по носителю log2(1/P_x)."""
    return float(-math.log2(P.probs.max()))


def shannon_entropy(P: Distribution) -> float:
    """Энтропия Шеннона с соглашением 0*log(1/0) = 0."""
    return float(entr(P.probs).sum() / LN2)


def renyi_entropy(P: Distribution, alpha: float) -> float:
    """
    Энтропия Реньи порядка alpha.

    Args:
        P: Распределение
        alpha: Порядок; 0 даёт log2 |supp P|, 1 - Шеннона, inf - min-энтропию

    Returns:
        float: H_alpha(P) в битах
    """
    if alpha < 0:
        raise ValueError(f"alpha={alpha} < 0")
    if alpha == 0:
        return math.log2(int(np.count_nonzero(P.probs)))
    if alpha == 1:
        return shannon_entropy(P)
    if math.isinf(alpha):
        return min_entropy(P)
    support = P.probs[P.probs > 0]
    return float(logsumexp(alpha * np.log(support)) / ((1.0 - alpha) * LN2))


def collision_probability(P: Distribution) -> float:
    """Вероятность коллизии sum P_x^2."""
    return float(np.dot(P.probs, P.probs))


def conditional_min_entropy(J: JointSource) -> float:
    """Усреднённая условная min-энтропия -log2 E_z[max_x P(X=x|Z=z)]."""
    guess = sum(
        float(w) * float(c.probs.max()) for w, c in zip(J.weights, J.conditionals)
    )
    return float(-math.log2(guess))


def pushforward(
    P: Distribution, table: Union[np.ndarray, Sequence[int]], out_width: int
) -> Distribution:
    """
    Переносит распределение P функцией f: {0,1}^m -> {0,1}^out_width.

    Args:
        P: Исходное распределение
        table: Значения f на всём домене, длина 2^m
        out_width: Ширина выхода

    Returns:
        Distribution: Распределение f(P)
    """
    _check_width(out_width)
    table = np.asarray(table, dtype=np.int64)
    if table.shape != (P.size,):
        raise WidthMismatch(MSG_BAD_TABLE.format(length=table.size, width=P.width))
    if table.size and (table.min() < 0 or table.max() >= 1 << out_width):
        raise WidthMismatch(
            MSG_WIDTH_MISMATCH.format(
                left=int(table.max()).bit_length(), right=out_width
            )
        )
    probs = np.bincount(table, weights=P.probs, minlength=1 << out_width)
    return Distribution(out_width, probs)


def flat_source_count(n: int, size: int) -> int:
    """Число плоских источников размера size на {0,1}^n."""
    return math.comb(1 << n, size)


def check_flat_request(n: int, size: int, cap: Optional[int]) -> int:
    _check_width(n)
    if not 1 <= size <= 1 << n:
        raise InvalidDistribution(
            MSG_BAD_SUPPORT.format(reason=f"K={size} вне [1, 2^{n}]")
        )
    count = flat_source_count(n, size)
    if cap is not None and count > cap:
        raise CountExceedsCap(
            MSG_COUNT_EXCEEDS_CAP.format(n=n, size=size, count=count, cap=cap),
            count=count,
            cap=cap,
        )
    return count


def enumerate_flat_sources(n: int, size: int, cap: int) -> Iterator[FlatSource]:
    """
    Перечисляет все плоские источники размера size на {0,1}^n
    в лексикографическом порядке носителей.

    Raises:
        CountExceedsCap: Если C(2^n, size) > cap
    """
    count = check_flat_request(n, size, cap)
    logging.debug("Перебор %d плоских источников (n=%d, K=%d)", count, n, size)

    def _stream() -> Iterator[FlatSource]:
        for support in itertools.combinations(range(1 << n), size):
            yield FlatSource(n, support)

    return _stream()


def flat_support_batches(
    n: int, size: int, batch: int, cap: Optional[int] = None
) -> Iterator[np.ndarray]:
    """
    Те же носители, что и enumerate_flat_sources, но пачками
    в виде массивов формы (B, size) для векторной обработки.
    """
    check_flat_request(n, size, cap)
    combos = itertools.combinations(range(1 << n), size)

    def _stream() -> Iterator[np.ndarray]:
        while True:
            chunk = list(itertools.islice(combos, batch))
            if not chunk:
                return
            yield np.asarray(chunk, dtype=np.int64).reshape(len(chunk), size)

    return _stream()


def flat_size(k: float) -> int:
    """Размер носителя K = floor(2^k) для источника min-энтропии k."""
    return max(1, int(math.floor(2.0**k + 1e-9)))

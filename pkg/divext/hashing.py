"""
Модуль для арифметики GF(2^n), семейств хеш-функций и экстракторов
по лемме об остаточном хешировании.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np

from .constants import (
    DEFAULT_MAX_SEED_WIDTH,
    MSG_BAD_PARAMETER,
    MSG_INFEASIBLE,
    MSG_SEED_TOO_LONG,
    MSG_UNSUPPORTED_FIELD,
    PROV_LEFTOVER_HASH,
)
from .divergences import DivergenceKind
from .errors import InfeasibleParameters, UnsupportedWidth
from .extractor import Claim, Extractor, Strength, Waste
from .utils import Utils

LN2 = math.log(2.0)

# Неприводимые многочлены x^n + x^a + ... + 1 малого веса: показатели средних членов
_IRREDUCIBLE_TERMS: dict[int, tuple[int, ...]] = {
    1: (), 2: (1,), 3: (1,), 4: (1,), 5: (2,), 6: (1,), 7: (1,), 8: (4, 3, 1),
    9: (1,), 10: (3,), 11: (2,), 12: (3,), 13: (4, 3, 1), 14: (5,), 15: (1,),
    16: (5, 3, 1), 17: (3,), 18: (3,), 19: (5, 2, 1), 20: (3,), 21: (2,),
    22: (1,), 23: (5,), 24: (4, 3, 1), 25: (3,), 26: (4, 3, 1), 27: (5, 2, 1),
    28: (1,), 29: (2,), 30: (1,), 31: (3,), 32: (7, 3, 2), 33: (10,), 34: (7,),
    35: (2,), 36: (9,), 37: (6, 4, 1), 38: (6, 5, 1), 39: (4,), 40: (5, 4, 3),
    41: (3,), 42: (7,), 43: (6, 4, 3), 44: (5,), 45: (4, 3, 1), 46: (1,),
    47: (5,), 48: (5, 3, 2), 49: (9,), 50: (4, 3, 2), 51: (6, 3, 1), 52: (3,),
    53: (6, 2, 1), 54: (9,), 55: (7,), 56: (7, 4, 2), 57: (4,), 58: (19,),
    59: (7, 4, 2), 60: (1,), 61: (5, 2, 1), 62: (29,), 63: (1,), 64: (4, 3, 1),
}  # fmt: skip


def reduction_polynomial(n: int) -> int:
    """Младшая часть неприводимого многочлена степени n (без x^n)."""
    if n not in _IRREDUCIBLE_TERMS:
        raise UnsupportedWidth(MSG_UNSUPPORTED_FIELD.format(n=n))
    low = 1
    for exponent in _IRREDUCIBLE_TERMS[n]:
        low |= 1 << exponent
    return low


def gf2_mul(n: int, a, b) -> np.ndarray:
    """
    Умножение в GF(2^n) сдвигами и XOR, поэлементно по массивам.

    Args:
        n: Степень расширения, 1..64
        a: Первый множитель (n бит)
        b: Второй множитель (n бит)

    Returns:
        np.ndarray: Произведение a * b в виде uint64
    """
    poly = np.uint64(reduction_polynomial(n))
    mask = np.uint64((1 << n) - 1)
    top = np.uint64(n - 1)
    one = np.uint64(1)
    a, b = np.broadcast_arrays(Utils.as_words(a) & mask, Utils.as_words(b) & mask)
    a = a.copy()
    result = np.zeros_like(a)
    for bit in range(n):
        selected = (b >> np.uint64(bit)) & one
        result ^= a * selected
        carry = (a >> top) & one
        a = ((a << one) & mask) ^ (poly * carry)
    return result


def gf2_pow(n: int, a, exponent: int) -> np.ndarray:
    """Возведение в степень в GF(2^n) повторным возведением в квадрат."""
    base = Utils.as_words(a).copy()
    result = np.ones_like(base)
    while exponent:
        if exponent & 1:
            result = gf2_mul(n, result, base)
        base = gf2_mul(n, base, base)
        exponent >>= 1
    return result


@dataclass(frozen=True, eq=False)
class HashFamily:
    """
    Семейство h_seed: {0,1}^in_width -> {0,1}^out_width с параметром
    почти универсальности.
    """

    in_width: int
    out_width: int
    seed_width: int
    epsilon_au: float
    name: str
    fn: Callable[[np.ndarray, np.ndarray], np.ndarray]

    def evaluate(self, seed, x) -> np.ndarray:
        """Значение h_seed(x)."""
        seed, x = np.broadcast_arrays(Utils.as_words(seed), Utils.as_words(x))
        return Utils.low_bits(self.fn(seed, x), self.out_width)

    def table(self) -> np.ndarray:
        """Таблица формы (2^seed_width, 2^in_width)."""
        seeds = np.arange(1 << self.seed_width, dtype=np.uint64)[:, None]
        xs = np.arange(1 << self.in_width, dtype=np.uint64)[None, :]
        return self.evaluate(seeds, xs).astype(np.int64)

    def collision_matrix(self, chunk: int = 64) -> np.ndarray:
        """
        C[x, y] = число семян с h(x) = h(y), полным перебором.
        Диагональ равна числу семян.
        """
        table = self.table()
        size = table.shape[1]
        counts = np.zeros((size, size), dtype=np.int64)
        for start in range(0, table.shape[0], chunk):
            block = table[start : start + chunk]
            counts += (block[:, :, None] == block[:, None, :]).sum(axis=0)
        return counts

    def max_collision_probability(self) -> float:
        """max_{x != y} Pr_h[h(x) = h(y)]."""
        counts = self.collision_matrix().astype(np.float64)
        np.fill_diagonal(counts, 0.0)
        return float(counts.max()) / (1 << self.seed_width)


def _check_widths(n: int, m: int) -> None:
    if not 1 <= n <= 64:
        raise UnsupportedWidth(MSG_UNSUPPORTED_FIELD.format(n=n))
    if not 0 <= m <= n:
        raise ValueError(MSG_BAD_PARAMETER.format(name="m", value=m))


def pairwise_family(n: int, m: int) -> HashFamily:
    """
    Попарно независимое семейство h_{a,b}(x) = low_m(a*x + b) над GF(2^n).
    Семя (a, b): a в старших n битах.
    """
    _check_widths(n, m)
    if 2 * n > 64:
        raise UnsupportedWidth(MSG_UNSUPPORTED_FIELD.format(n=n))

    def fn(seed: np.ndarray, x: np.ndarray) -> np.ndarray:
        a, b = Utils.split_bits(seed, n)
        return gf2_mul(n, a, x) ^ b

    return HashFamily(n, m, 2 * n, 0.0, f"pairwise(n={n},m={m})", fn)


def linear_family(n: int, m: int) -> HashFamily:
    """Универсальное семейство h_a(x) = low_m(a*x), семя n бит."""
    _check_widths(n, m)

    def fn(seed: np.ndarray, x: np.ndarray) -> np.ndarray:
        return gf2_mul(n, seed, x)

    return HashFamily(n, m, n, 0.0, f"linear(n={n},m={m})", fn)


def almost_universal_block_width(n: int, m: int, eps: float) -> int:
    """w = m + ceil(log2((n/m) / eps))."""
    return m + max(0, math.ceil(math.log2((n / m) / eps) - 1e-12))


def almost_universal_family(n: int, m: int, eps: float) -> HashFamily:
    """
    Почти универсальное семейство: x режется на блоки по w бит,
    хеш = low_m(a * sum_i block_i * alpha^i) над GF(2^w).

    Семя (alpha, a) длины 2w, epsilon_au = (L - 1) * 2^{m - w} <= eps,
    где L - число блоков.
    """
    if not 0 < eps < 1:
        raise ValueError(MSG_BAD_PARAMETER.format(name="eps", value=eps))
    if not 1 <= m <= n <= 64:
        raise ValueError(MSG_BAD_PARAMETER.format(name="m", value=m))
    w = almost_universal_block_width(n, m, eps)
    if 2 * w > 64:
        raise UnsupportedWidth(MSG_UNSUPPORTED_FIELD.format(n=w))
    blocks = max(1, math.ceil(n / w))
    epsilon_au = (blocks - 1) * 2.0 ** (m - w)

    def fn(seed: np.ndarray, x: np.ndarray) -> np.ndarray:
        alpha, a = Utils.split_bits(seed, w)
        acc = np.zeros_like(x)
        # Схема Горнера от старшего блока к младшему
        for index in reversed(range(blocks)):
            block = Utils.low_bits(x >> np.uint64(index * w), w)
            acc = gf2_mul(w, acc, alpha) ^ block
        return gf2_mul(w, a, acc)

    logging.debug(
        "Почти универсальное семейство: n=%d, m=%d, w=%d, блоков=%d", n, m, w, blocks
    )
    return HashFamily(n, m, 2 * w, epsilon_au, f"au(n={n},m={m},eps={eps:g})", fn)


def lhl_d2_bound(m: int, k: float, epsilon_au: float) -> float:
    """Оценка ошибки в D_2: log2(2^{m-k} + 1 + epsilon_au)."""
    return math.log2(2.0 ** (m - k) + 1.0 + epsilon_au)


def lhl_tv_bound(m: int, k: float, epsilon_au: float) -> float:
    """Оценка ошибки в TV: (1/2) sqrt(2^{m-k} + epsilon_au)."""
    return 0.5 * math.sqrt(2.0 ** (m - k) + epsilon_au)


def _lhl_claims(fam: HashFamily, strength: Strength) -> list[Claim]:
    claims = []
    for k in range(fam.in_width + 1):
        claims.append(
            Claim(
                DivergenceKind.renyi(2.0),
                float(k),
                lhl_d2_bound(fam.out_width, k, fam.epsilon_au),
                strength,
                PROV_LEFTOVER_HASH,
            )
        )
        claims.append(
            Claim(
                DivergenceKind.tv(),
                float(k),
                lhl_tv_bound(fam.out_width, k, fam.epsilon_au),
                strength,
                PROV_LEFTOVER_HASH,
            )
        )
    return claims


class LHLForms(NamedTuple):
    """Две формы экстрактора: полная (h, h(x)) и сильная h(x)."""

    full: Extractor
    strong: Extractor


def lhl_extractor(fam: HashFamily) -> LHLForms:
    """
    Экстракторы по лемме об остаточном хешировании.

    Args:
        fam: Семейство хеш-функций

    Returns:
        LHLForms: Полная форма Ext(x, h) = (h, h(x)) с выходом d + m
            и сильная форма Ext'(x, h) = h(x)
    """
    n, d, m = fam.in_width, fam.seed_width, fam.out_width
    if d + m > 64:
        raise UnsupportedWidth(MSG_UNSUPPORTED_FIELD.format(n=d + m))

    def full_fn(x: np.ndarray, s: np.ndarray) -> np.ndarray:
        return Utils.concat_bits(s, fam.evaluate(s, x), m)

    def strong_fn(x: np.ndarray, s: np.ndarray) -> np.ndarray:
        return fam.evaluate(s, x)

    def full_waste(x: np.ndarray, s: np.ndarray) -> np.ndarray:
        return x

    def strong_waste(x: np.ndarray, s: np.ndarray) -> np.ndarray:
        return Utils.concat_bits(x, s, d)

    full = Extractor(
        n=n,
        d=d,
        m=d + m,
        fn=full_fn,
        claims=tuple(_lhl_claims(fam, Strength.AVG)),
        waste=Waste(n, full_waste, True, True),
        name=f"lhl_full[{fam.name}]",
    )
    strong = Extractor(
        n=n,
        d=d,
        m=m,
        fn=strong_fn,
        claims=tuple(_lhl_claims(fam, Strength.STRONG_AVG)),
        waste=Waste(n + d, strong_waste, True, True),
        name=f"lhl[{fam.name}]",
    )
    return LHLForms(full, strong)


class LeftoverHashProvider:
    """
    Поставщик внутренних сильных average-case KL-экстракторов по умолчанию:
    сильная форма LHL на линейном универсальном семействе.
    """

    name = "leftover-hash"

    def __init__(self, max_seed_width: int = DEFAULT_MAX_SEED_WIDTH) -> None:
        self.max_seed_width = max_seed_width

    @staticmethod
    def required_entropy(m: int, eps: float) -> float:
        """
        Наименьшее k, при котором log2(1 + 2^{m-k}) <= eps:
        k = m - log2(2^eps - 1).
        """
        if eps <= 0:
            raise ValueError(MSG_BAD_PARAMETER.format(name="eps", value=eps))
        return m - math.log2(2.0**eps - 1.0)

    def provide(
        self, n: int, m: int, eps: float, k: Optional[float] = None
    ) -> Extractor:
        """
        Строит сильный average-case экстрактор {0,1}^n -> {0,1}^m с ошибкой
        eps в D_2 (а значит и в KL) при min-энтропии required_entropy(m, eps).

        Raises:
            InfeasibleParameters: Если n < требуемой энтропии или семя слишком длинное
        """
        needed = self.required_entropy(m, eps)
        if k is not None and k < needed - 1e-12:
            raise InfeasibleParameters(
                MSG_INFEASIBLE.format(reason=f"k={k:g} < {needed:.4g} для m={m}")
            )
        if n < needed - 1e-12 or n < m:
            raise InfeasibleParameters(
                MSG_INFEASIBLE.format(reason=f"n={n} < {needed:.4g} для m={m}")
            )
        if n > self.max_seed_width:
            raise InfeasibleParameters(
                MSG_SEED_TOO_LONG.format(d=n, cap=self.max_seed_width)
            )
        strong = lhl_extractor(linear_family(n, m)).strong
        exact = Claim(
            DivergenceKind.renyi(2.0),
            needed,
            lhl_d2_bound(m, needed, 0.0),
            Strength.STRONG_AVG,
            PROV_LEFTOVER_HASH,
        )
        return strong.with_claims(exact)

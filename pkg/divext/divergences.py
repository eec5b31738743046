"""
Модуль для вычисления дивергенций между распределениями на {0,1}^m:
TV, l_p, Реньи, KL, max-дивергенция, расстояния по классам тестовых функций
(моментный класс, субгауссовские и субэкспоненциальные функции).
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.special import logsumexp, rel_entr

from .constants import (
    BISECTION_STEPS,
    DEFAULT_SOLVER_ITERATIONS,
    DEFAULT_SOLVER_RESTARTS,
    KL_IDENTITY_TOLERANCE,
    MGF_TIGHTENING,
    MSG_BAD_PARAMETER,
    MSG_UNKNOWN_KIND,
    MSG_WIDTH_MISMATCH,
    SUBEXPONENTIAL_T_LIMIT,
    SUBGAUSSIAN_VARIANCE_PROXY,
    T_GRID_EXPONENTS,
)
from .domain import Distribution, shannon_entropy
from .errors import SpecError, WidthMismatch
from .models.schemas import DistanceResult

LN2 = math.log(2.0)

# Порядки Реньи для верхней оценки через l_{1+alpha}
_LP_BOUND_ALPHAS = (0.5, 1.0, 2.0)


class DivergenceTag(str, Enum):
    """Вид дивергенции."""

    TV = "tv"
    LP = "lp"
    RENYI = "renyi"
    KL = "kl"
    MAX = "max"
    MOMENT = "moment"
    SUBGAUSSIAN = "subgaussian"
    SUBEXPONENTIAL = "subexponential"


_PARAMETRIZED = {DivergenceTag.LP, DivergenceTag.RENYI, DivergenceTag.MOMENT}
_TEST_FUNCTION_TAGS = {
    DivergenceTag.TV,
    DivergenceTag.LP,
    DivergenceTag.MOMENT,
    DivergenceTag.SUBGAUSSIAN,
    DivergenceTag.SUBEXPONENTIAL,
}


@dataclass(frozen=True)
class DivergenceKind:
    """
    Селектор дивергенции с параметром.

    Renyi(1) приводится к KL, Renyi(inf) - к MAX, так что синонимы
    сравниваются как равные.
    """

    tag: DivergenceTag
    param: Optional[float] = None

    def __post_init__(self) -> None:
        tag = DivergenceTag(self.tag)
        param = None if self.param is None else float(self.param)
        if tag is DivergenceTag.RENYI and param is not None:
            if param == 1.0:
                tag, param = DivergenceTag.KL, None
            elif math.isinf(param):
                tag, param = DivergenceTag.MAX, None
        if tag in _PARAMETRIZED:
            if param is None or math.isnan(param):
                raise SpecError(MSG_BAD_PARAMETER.format(name=tag.value, value=param))
            lowest = 0.0 if tag is DivergenceTag.RENYI else 1.0
            if param < lowest:
                raise SpecError(MSG_BAD_PARAMETER.format(name=tag.value, value=param))
        elif param is not None:
            raise SpecError(MSG_BAD_PARAMETER.format(name=tag.value, value=param))
        object.__setattr__(self, "tag", tag)
        object.__setattr__(self, "param", param)

    @classmethod
    def tv(cls) -> "DivergenceKind":
        return cls(DivergenceTag.TV)

    @classmethod
    def lp(cls, p: float) -> "DivergenceKind":
        return cls(DivergenceTag.LP, p)

    @classmethod
    def renyi(cls, alpha: float) -> "DivergenceKind":
        return cls(DivergenceTag.RENYI, alpha)

    @classmethod
    def kl(cls) -> "DivergenceKind":
        return cls(DivergenceTag.KL)

    @classmethod
    def max(cls) -> "DivergenceKind":
        return cls(DivergenceTag.MAX)

    @classmethod
    def moment(cls, q: float) -> "DivergenceKind":
        return cls(DivergenceTag.MOMENT, q)

    @classmethod
    def subgaussian(cls) -> "DivergenceKind":
        return cls(DivergenceTag.SUBGAUSSIAN)

    @classmethod
    def subexponential(cls) -> "DivergenceKind":
        return cls(DivergenceTag.SUBEXPONENTIAL)

    @classmethod
    def parse(cls, text: str) -> "DivergenceKind":
        """
        Разбирает строку вида "tv", "lp:2", "renyi:0.5", "kl", "subgaussian".

        Raises:
            SpecError: Если вид или параметр не распознаны
        """
        name, _, raw = text.strip().lower().partition(":")
        try:
            tag = DivergenceTag(name)
        except ValueError as exc:
            raise SpecError(MSG_UNKNOWN_KIND.format(text=text)) from exc
        if not raw:
            return cls(tag)
        try:
            param = float(raw)
        except ValueError as exc:
            raise SpecError(MSG_UNKNOWN_KIND.format(text=text)) from exc
        return cls(tag, param)

    def __str__(self) -> str:
        if self.param is None:
            return self.tag.value
        value = "inf" if math.isinf(self.param) else f"{self.param:g}"
        return f"{self.tag.value}:{value}"

    @property
    def exact(self) -> bool:
        """Вычисляется ли дивергенция точно."""
        return self.tag not in (DivergenceTag.SUBGAUSSIAN, DivergenceTag.SUBEXPONENTIAL)

    @property
    def renyi_order(self) -> Optional[float]:
        """Порядок в семействе Реньи (KL = 1, MAX = inf) или None."""
        if self.tag is DivergenceTag.KL:
            return 1.0
        if self.tag is DivergenceTag.MAX:
            return math.inf
        if self.tag is DivergenceTag.RENYI:
            return self.param
        return None

    @property
    def symmetric(self) -> bool:
        """Порождена ли дивергенция симметричным классом тестовых функций."""
        return self.tag in _TEST_FUNCTION_TAGS

    def dominates(self, other: "DivergenceKind") -> bool:
        """
        Следует ли оценка other <= eps из оценки self <= eps.

        Дивергенция Реньи не убывает по порядку, поэтому D_beta <= eps
        влечёт D_alpha <= eps для alpha <= beta.
        """
        if self == other:
            return True
        mine, theirs = self.renyi_order, other.renyi_order
        return mine is not None and theirs is not None and theirs <= mine


def _check_pair(P: Distribution, Q: Distribution) -> None:
    if P.width != Q.width:
        raise WidthMismatch(MSG_WIDTH_MISMATCH.format(left=P.width, right=Q.width))


def binary_entropy(x: float) -> float:
    """Двоичная энтропия h(x) с h(0) = h(1) = 0."""
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


def conjugate_exponent(q: float) -> float:
    """Сопряжённый показатель p: 1/p + 1/q = 1."""
    if q == 1.0:
        return math.inf
    if math.isinf(q):
        return 1.0
    return q / (q - 1.0)


# Точные дивергенции


def tv(P: Distribution, Q: Distribution) -> float:
    """Расстояние полной вариации (1/2) sum |P_x - Q_x|."""
    _check_pair(P, Q)
    return float(0.5 * np.abs(P.probs - Q.probs).sum())


def lp_distance(p: float, P: Distribution, Q: Distribution) -> float:
    """l_p-норма разности P - Q; p = inf даёт максимум модуля."""
    _check_pair(P, Q)
    if p < 1:
        raise ValueError(MSG_BAD_PARAMETER.format(name="p", value=p))
    return float(np.linalg.norm(P.probs - Q.probs, ord=p))


def kl(P: Distribution, Q: Distribution) -> float:
    """
    Дивергенция Кульбака-Лейблера в битах.

    Для равномерного Q результат сверяется с m - H(P).

    Raises:
        WidthMismatch: Если ширины различаются
        ArithmeticError: Если тождество m - H(P) нарушено численно
    """
    _check_pair(P, Q)
    value = float(rel_entr(P.probs, Q.probs).sum() / LN2)
    if Q.is_uniform():
        reference = P.width - shannon_entropy(P)
        if abs(value - reference) > KL_IDENTITY_TOLERANCE:
            raise ArithmeticError(
                f"KL(P||U) = {value} расходится с m - H(P) = {reference}"
            )
    return value


def max_divergence(P: Distribution, Q: Distribution) -> float:
    """D_inf(P||Q) = max_x log2(P_x / Q_x)."""
    _check_pair(P, Q)
    mask = P.probs > 0
    if np.any(Q.probs[mask] == 0):
        return math.inf
    return float(np.log2(np.max(P.probs[mask] / Q.probs[mask])))


def renyi(alpha: float, P: Distribution, Q: Distribution) -> float:
    """
    Дивергенция Реньи порядка alpha в [0, inf].

    Args:
        alpha: Порядок; 0, 1 и inf обрабатываются как пределы
        P: Первое распределение
        Q: Второе распределение

    Returns:
        float: D_alpha(P||Q), возможно +inf
    """
    _check_pair(P, Q)
    if alpha < 0 or math.isnan(alpha):
        raise ValueError(MSG_BAD_PARAMETER.format(name="alpha", value=alpha))
    if alpha == 0:
        mass = float(Q.probs[P.probs > 0].sum())
        return math.inf if mass == 0 else -math.log2(mass)
    if alpha == 1:
        return kl(P, Q)
    if math.isinf(alpha):
        return max_divergence(P, Q)
    p_mask = P.probs > 0
    if alpha > 1 and np.any(Q.probs[p_mask] == 0):
        return math.inf
    both = p_mask & (Q.probs > 0)
    if not np.any(both):
        return math.inf
    log_terms = alpha * np.log(P.probs[both]) + (1.0 - alpha) * np.log(Q.probs[both])
    return float(logsumexp(log_terms) / ((alpha - 1.0) * LN2))


def moment_class_distance(q: float, P: Distribution, Q: Distribution) -> float:
    """Расстояние по классу M_q: 2^{m/q} * l_p(P, Q), 1/p + 1/q = 1."""
    _check_pair(P, Q)
    if q < 1:
        raise ValueError(MSG_BAD_PARAMETER.format(name="q", value=q))
    scale = 1.0 if math.isinf(q) else 2.0 ** (P.width / q)
    return scale * lp_distance(conjugate_exponent(q), P, Q)


def moment_class_witness(q: float, P: Distribution, Q: Distribution) -> np.ndarray:
    """
    Экстремальная функция Гёльдера f ~ sign(P-Q)|P-Q|^{p-1}
    с нормировкой E_U |f|^q = 1 (для q = inf - sup |f| = 1).
    """
    _check_pair(P, Q)
    diff = P.probs - Q.probs
    size = diff.size
    if not np.any(diff):
        return np.ones(size)
    p = conjugate_exponent(q)
    if math.isinf(p):
        # q = 1: вся масса на точке максимального |P - Q|
        witness = np.zeros(size)
        top = int(np.argmax(np.abs(diff)))
        witness[top] = np.sign(diff[top]) * size
        return witness
    if p == 1.0:
        return np.sign(diff)
    raw = np.sign(diff) * np.abs(diff) ** (p - 1.0)
    norm = np.mean(np.abs(raw) ** q) ** (1.0 / q)
    return raw / norm


# Тестовые функции с ограничением на производящую функцию моментов


@dataclass(frozen=True)
class TGrid:
    """Конечная симметричная сетка значений t для проверки ln E[e^{tf}]."""

    ts: tuple[float, ...] = field(
        default_factory=lambda: tuple(
            sign * 2.0**i for i in T_GRID_EXPONENTS for sign in (1.0, -1.0)
        )
    )

    @classmethod
    def default(cls) -> "TGrid":
        return cls()

    def restricted(self, limit: float) -> "TGrid":
        """Оставляет только |t| <= limit."""
        return TGrid(tuple(t for t in self.ts if abs(t) <= limit))

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.ts, dtype=np.float64)

    def bounds(self) -> np.ndarray:
        """Ужесточённые границы (1 - 1e-3) * sigma^2 t^2 / 2 при sigma = 1/2."""
        t = self.array
        return (1.0 - MGF_TIGHTENING) * SUBGAUSSIAN_VARIANCE_PROXY * t * t / 2.0


def mgf_log(values: np.ndarray, ts: np.ndarray) -> np.ndarray:
    """ln E_U[e^{t f}] для каждого t; values задаёт f на всём домене."""
    values = np.asarray(values, dtype=np.float64)
    exponents = np.multiply.outer(ts, values)
    return logsumexp(exponents, axis=-1) - math.log(values.shape[-1])


def mgf_feasible(values: np.ndarray, grid: TGrid, atol: float = 1e-12) -> bool:
    """Проверяет нулевое среднее и ограничения на сетке."""
    values = np.asarray(values, dtype=np.float64)
    scale = max(1.0, float(np.max(np.abs(values))))
    if abs(float(values.mean())) > 1e-9 * scale:
        return False
    return bool(np.all(mgf_log(values, grid.array) <= grid.bounds() + atol))


def max_feasible_scale(direction: np.ndarray, grid: TGrid) -> float:
    """
    Наибольшее c, при котором c * direction удовлетворяет всем ограничениям
    сетки. Направление должно иметь нулевое среднее.

    Для каждого t функция c -> ln E[e^{t c g}] выпукла, равна нулю в нуле
    и имеет нулевую производную, поэтому допустимые c образуют отрезок [0, c*].
    """
    if not np.any(direction):
        return 0.0
    ts = grid.array
    bounds = grid.bounds()

    def feasible(c: float) -> bool:
        return bool(np.all(mgf_log(c * direction, ts) <= bounds))

    lo, hi = 0.0, 1.0
    while feasible(hi):
        lo, hi = hi, 2.0 * hi
        if hi > 1e12:
            return lo
    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            lo = mid
        else:
            hi = mid
    return lo


def _centered(values: np.ndarray) -> np.ndarray:
    return values - values.mean()


def _ascend(
    diff: np.ndarray,
    grid: TGrid,
    starts: Sequence[np.ndarray],
    iterations: int,
    rng: np.random.Generator,
) -> tuple[float, np.ndarray]:
    """
    Стохастический подъём по направлениям с радиальной проекцией
    на допустимое множество. Значение не убывает по итерациям.
    """
    size = diff.size
    best_value, best_witness = 0.0, np.zeros(size)
    for start in starts:
        direction = _centered(np.asarray(start, dtype=np.float64))
        norm = float(np.linalg.norm(direction))
        if norm == 0.0:
            continue
        direction /= norm
        witness = max_feasible_scale(direction, grid) * direction
        value = float(diff @ witness)
        if value < 0:
            direction, witness, value = -direction, -witness, -value
        step = 0.5
        for _ in range(iterations):
            noise = _centered(rng.standard_normal(size))
            noise_norm = float(np.linalg.norm(noise))
            if noise_norm == 0.0:
                continue
            candidate = direction + step * noise / noise_norm
            candidate /= np.linalg.norm(candidate)
            cand_witness = max_feasible_scale(candidate, grid) * candidate
            cand_value = float(diff @ cand_witness)
            if cand_value < 0:
                candidate, cand_witness, cand_value = (
                    -candidate,
                    -cand_witness,
                    -cand_value,
                )
            if cand_value > value:
                direction, witness, value = candidate, cand_witness, cand_value
                step = min(2.0, step * 1.2)
            else:
                step = max(1e-4, step * 0.7)
        if value > best_value:
            best_value, best_witness = value, witness
    return best_value, best_witness


def subgaussian_max_deviation(m: int) -> float:
    """sup |f| для субгауссовской f на {0,1}^m: sqrt(ln2 * m / 2)."""
    return math.sqrt(LN2 * m / 2.0)


def subexponential_max_deviation(m: int) -> float:
    """sup |f| для субэкспоненциальной f на {0,1}^m: (m ln2 + 1/2) / 2."""
    return (m * LN2 + 0.5) / 2.0


def pinsker_subgaussian_bound(kl_bits: float) -> float:
    """d_G(P, U) <= sqrt((ln2 / 2) * KL(P||U))."""
    return math.sqrt(LN2 / 2.0 * max(0.0, kl_bits))


def subexponential_kl_bound(kl_bits: float) -> float:
    """Кусочная вогнутая оценка d_E(P, U) через KL(P||U)."""
    kl_bits = max(0.0, kl_bits)
    if kl_bits <= 1.0 / (2.0 * LN2):
        return math.sqrt(LN2 / 2.0 * kl_bits)
    return LN2 / 2.0 * kl_bits + 0.25


def kl_from_tv_bound(m: int, tv_value: float) -> float:
    """KL(P||U_m) <= m * d_TV + h(d_TV)."""
    return m * tv_value + binary_entropy(tv_value)


def subgaussian_lp_bound(m: int, alpha: float, lp_value: float) -> float:
    """d_G <= 2^{m alpha/(1+alpha)} * sqrt(1 + 1/alpha) * l_{1+alpha}."""
    return 2.0 ** (m * alpha / (1.0 + alpha)) * math.sqrt(1.0 + 1.0 / alpha) * lp_value


def renyi_kl_triangle_bound(kl_pq: float, renyi_qr: float, alpha: float) -> float:
    """Правая часть KL(P||R) <= (1 + 1/alpha) KL(P||Q) + D_{1+alpha}(Q||R)."""
    return (1.0 + 1.0 / alpha) * kl_pq + renyi_qr


def _subgaussian_upper(P: Distribution, Q: Distribution, tv_value: float) -> float:
    m = P.width
    uniform = Distribution.uniform(m)
    candidates = [
        math.sqrt(2.0 * LN2 * m) * tv_value,
        pinsker_subgaussian_bound(kl(P, uniform))
        + pinsker_subgaussian_bound(kl(Q, uniform)),
        2.0 * subgaussian_max_deviation(m) * tv_value,
    ]
    candidates.extend(
        subgaussian_lp_bound(m, alpha, lp_distance(1.0 + alpha, P, Q))
        for alpha in _LP_BOUND_ALPHAS
    )
    return min(candidates)


def _subexponential_upper(P: Distribution, Q: Distribution, tv_value: float) -> float:
    m = P.width
    uniform = Distribution.uniform(m)
    return min(
        subexponential_kl_bound(kl(P, uniform))
        + subexponential_kl_bound(kl(Q, uniform)),
        2.0 * subexponential_max_deviation(m) * tv_value,
    )


def _indicator_witness(diff: np.ndarray) -> np.ndarray:
    # Центрированный индикатор {P > Q}: субгауссов с параметром 1/2 по Хёфдингу
    indicator = (diff > 0).astype(np.float64)
    return indicator - indicator.mean()


def _test_function_distance(
    P: Distribution,
    Q: Distribution,
    grid: TGrid,
    upper: float,
    iterations: int,
    restarts: int,
    seed: int,
    extra_starts: Iterable[np.ndarray],
    label: str,
) -> DistanceResult:
    _check_pair(P, Q)
    diff = P.probs - Q.probs
    tv_value = float(0.5 * np.abs(diff).sum())
    if P.width == 0 or not np.any(diff):
        return DistanceResult(
            lower=0.0, upper=0.0, exact=False, witness=[0.0] * diff.size
        )
    rng = np.random.default_rng(seed)
    starts = list(extra_starts) + [diff, np.sign(diff)]
    extra = max(0, restarts - 2)
    starts.extend(rng.uniform(-1.0, 1.0, diff.size) for _ in range(extra))
    value, witness = _ascend(diff, grid, starts, iterations, rng)
    if tv_value >= value:
        value, witness = tv_value, _indicator_witness(diff)
    if value > upper:
        logging.warning(
            "Нижняя оценка %s (%.6g) усечена до верхней (%.6g)", label, value, upper
        )
        value = upper
    return DistanceResult(
        lower=value, upper=upper, exact=False, witness=witness.tolist()
    )


def subgaussian_distance(
    P: Distribution,
    Q: Distribution,
    grid: Optional[TGrid] = None,
    *,
    iterations: int = DEFAULT_SOLVER_ITERATIONS,
    restarts: int = DEFAULT_SOLVER_RESTARTS,
    seed: int = 0,
) -> DistanceResult:
    """
    Оценки субгауссовского расстояния d_G(P, Q).

    Нижняя оценка - лучшая найденная допустимая на сетке тестовая функция
    (не меньше d_TV за счёт центрированного индикатора), верхняя - минимум
    доказанных оценок через TV, KL до равномерного и l_{1+alpha}.

    Args:
        P: Первое распределение
        Q: Второе распределение
        grid: Сетка t (по умолчанию +-2^i, i = -6..6)
        iterations: Число шагов подъёма на каждый старт
        restarts: Число стартовых направлений
        seed: Семя генератора решателя

    Returns:
        DistanceResult: Оценки и свидетель
    """
    _check_pair(P, Q)
    grid = grid or TGrid.default()
    upper = _subgaussian_upper(P, Q, tv(P, Q)) if P.width else 0.0
    return _test_function_distance(
        P, Q, grid, upper, iterations, restarts, seed, (), "d_G"
    )


def subexponential_distance(
    P: Distribution,
    Q: Distribution,
    grid: Optional[TGrid] = None,
    *,
    iterations: int = DEFAULT_SOLVER_ITERATIONS,
    restarts: int = DEFAULT_SOLVER_RESTARTS,
    seed: int = 0,
    subgaussian: Optional[DistanceResult] = None,
) -> DistanceResult:
    """
    Оценки субэкспоненциального расстояния d_E(P, Q): ограничения только
    при |t| <= 2. Решатель стартует со свидетеля d_G, поэтому нижняя оценка
    d_E не меньше нижней оценки d_G.
    """
    _check_pair(P, Q)
    grid = (grid or TGrid.default()).restricted(SUBEXPONENTIAL_T_LIMIT)
    if subgaussian is None:
        subgaussian = subgaussian_distance(
            P, Q, iterations=iterations, restarts=restarts, seed=seed
        )
    starts = []
    if subgaussian.witness is not None:
        starts.append(np.asarray(subgaussian.witness, dtype=np.float64))
    upper = _subexponential_upper(P, Q, tv(P, Q)) if P.width else 0.0
    result = _test_function_distance(
        P, Q, grid, upper, iterations, restarts, seed, starts, "d_E"
    )
    if result.lower < subgaussian.lower:
        # Допустимое для d_G допустимо и для d_E
        return DistanceResult(
            lower=min(subgaussian.lower, upper),
            upper=upper,
            exact=False,
            witness=subgaussian.witness,
        )
    return result


def check_kl_triangle(
    P: Distribution, Q: Distribution, R: Distribution, alpha: float
) -> bool:
    """Проверяет KL(P||R) <= (1 + 1/alpha) KL(P||Q) + D_{1+alpha}(Q||R) + 1e-9."""
    if alpha <= 0:
        raise ValueError(MSG_BAD_PARAMETER.format(name="alpha", value=alpha))
    bound = renyi_kl_triangle_bound(kl(P, Q), renyi(1.0 + alpha, Q, R), alpha)
    return kl(P, R) <= bound + 1e-9


def bounded_norm(kind: DivergenceKind, m: int) -> float:
    """
    sup_P D(P || U_m): ограничение дивергенции до равномерного на {0,1}^m.
    """
    tag = kind.tag
    if tag is DivergenceTag.TV:
        return 1.0
    if tag is DivergenceTag.LP:
        return 2.0
    if tag in (DivergenceTag.KL, DivergenceTag.RENYI, DivergenceTag.MAX):
        return float(m)
    if tag is DivergenceTag.MOMENT:
        q = kind.param
        return 2.0 if math.isinf(q) else 2.0 ** (m / q) * 2.0
    if tag is DivergenceTag.SUBGAUSSIAN:
        return 2.0 * subgaussian_max_deviation(m)
    return 2.0 * subexponential_max_deviation(m)


def divergence_to_uniform_rows(kind: DivergenceKind, rows: np.ndarray) -> np.ndarray:
    """
    Векторно вычисляет D(row || U_m) для каждой строки матрицы распределений.

    Для субгауссовского и субэкспоненциального видов возвращаются
    доказанные верхние оценки.
    """
    rows = np.atleast_2d(np.asarray(rows, dtype=np.float64))
    size = rows.shape[1]
    m = size.bit_length() - 1
    diff = rows - 1.0 / size
    tag = kind.tag
    if tag is DivergenceTag.TV:
        return 0.5 * np.abs(diff).sum(axis=1)
    if tag is DivergenceTag.LP:
        return np.linalg.norm(diff, ord=kind.param, axis=1)
    if tag is DivergenceTag.MOMENT:
        q = kind.param
        scale = 1.0 if math.isinf(q) else 2.0 ** (m / q)
        return scale * np.linalg.norm(diff, ord=conjugate_exponent(q), axis=1)
    kl_rows = rel_entr(rows, 1.0 / size).sum(axis=1) / LN2
    if tag is DivergenceTag.KL:
        return kl_rows
    if tag is DivergenceTag.MAX:
        return np.log2(size * rows.max(axis=1))
    if tag is DivergenceTag.RENYI:
        alpha = kind.param
        if alpha == 0:
            return -np.log2(np.count_nonzero(rows, axis=1) / size)
        with np.errstate(divide="ignore"):
            powered = np.log2(np.power(rows, alpha).sum(axis=1))
        return powered / (alpha - 1.0) + m
    tv_rows = 0.5 * np.abs(diff).sum(axis=1)
    if tag is DivergenceTag.SUBGAUSSIAN:
        pinsker = np.sqrt(LN2 / 2.0 * np.maximum(kl_rows, 0.0))
        return np.minimum(math.sqrt(2.0 * LN2 * m) * tv_rows, pinsker)
    piecewise = np.array([subexponential_kl_bound(float(v)) for v in kl_rows])
    return np.minimum(2.0 * subexponential_max_deviation(m) * tv_rows, piecewise)


def exact_divergence(kind: DivergenceKind, P: Distribution, Q: Distribution) -> float:
    """Значение точной дивергенции."""
    tag = kind.tag
    if tag is DivergenceTag.TV:
        return tv(P, Q)
    if tag is DivergenceTag.LP:
        return lp_distance(kind.param, P, Q)
    if tag is DivergenceTag.KL:
        return kl(P, Q)
    if tag is DivergenceTag.MAX:
        return max_divergence(P, Q)
    if tag is DivergenceTag.RENYI:
        return renyi(kind.param, P, Q)
    if tag is DivergenceTag.MOMENT:
        return moment_class_distance(kind.param, P, Q)
    raise SpecError(MSG_UNKNOWN_KIND.format(text=str(kind)))


def distance(
    kind: DivergenceKind,
    P: Distribution,
    Q: Distribution,
    *,
    iterations: int = DEFAULT_SOLVER_ITERATIONS,
    restarts: int = DEFAULT_SOLVER_RESTARTS,
    seed: int = 0,
) -> DistanceResult:
    """Единая точка входа: точные виды дают lower = upper и exact = True."""
    if kind.tag is DivergenceTag.SUBGAUSSIAN:
        return subgaussian_distance(
            P, Q, iterations=iterations, restarts=restarts, seed=seed
        )
    if kind.tag is DivergenceTag.SUBEXPONENTIAL:
        return subexponential_distance(
            P, Q, iterations=iterations, restarts=restarts, seed=seed
        )
    value = exact_divergence(kind, P, Q)
    return DistanceResult(lower=value, upper=value, exact=True)

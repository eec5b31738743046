"""
Модуль для регулярных графов с согласованной разметкой: граф
Маргулиса-Габбера-Галила, склейка для нечётной ширины, степени блуждания,
спектральные измерения и экстракторы на соседях экспандера.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable, Optional, Protocol

import networkx as nx
import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from .constants import (
    DEFAULT_LAMBDA_MEASURE_CAP,
    DEFAULT_MAX_SEED_WIDTH,
    DOMAIN_WIDTH_CAP,
    GABBER_GALIL_LAMBDA,
    MGG_PADDED_DEGREE_WIDTH,
    MSG_BAD_PARAMETER,
    MSG_INFEASIBLE,
    MSG_ODD_WIDTH,
    MSG_SEED_TOO_LONG,
    MSG_TABLE_TOO_LARGE,
    PROV_EXPANDER_AVERAGE,
    PROV_EXPANDER_MIXING,
)
from .divergences import DivergenceKind
from .errors import InfeasibleParameters, UnsupportedWidth
from .extractor import Claim, Extractor, Strength, Waste
from .models.schemas import GraphReport
from .utils import Utils

LN2 = math.log(2.0)

# Размер, начиная с которого спектр считается разреженным методом Ланцоша
_DENSE_EIGEN_LIMIT = 1024
# Граница MGG после дополнения петлями до степени 16
MGG_PADDED_LAMBDA = (1.0 + GABBER_GALIL_LAMBDA) / 2.0

NeighborFunction = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class LabeledGraph:
    """
    D-регулярный граф на {0,1}^n, D = 2^degree_width, с функцией соседей
    neighbor(v, i) и объявленной границей спектрального расширения.
    """

    n: int
    degree_width: int
    neighbor_fn: NeighborFunction
    lambda_bound: float
    name: str
    lambda_measured: Optional[float] = None
    base: Optional["LabeledGraph"] = None
    walk_length: int = 1
    _cache: dict = field(default_factory=dict, init=False, repr=False)

    @property
    def size(self) -> int:
        return 1 << self.n

    @property
    def degree(self) -> int:
        return 1 << self.degree_width

    def neighbor(self, v, i) -> np.ndarray:
        """i-й сосед вершины v."""
        v, i = np.broadcast_arrays(Utils.as_words(v), Utils.as_words(i))
        return Utils.low_bits(self.neighbor_fn(v, i), self.n)

    def neighbor_table(self) -> np.ndarray:
        """Таблица соседей формы (2^n, D)."""
        bits = self.n + self.degree_width
        if bits > DOMAIN_WIDTH_CAP:
            raise UnsupportedWidth(
                MSG_TABLE_TOO_LARGE.format(bits=bits, cap=DOMAIN_WIDTH_CAP)
            )
        if "table" not in self._cache:
            vs = np.arange(self.size, dtype=np.uint64)[:, None]
            labels = np.arange(self.degree, dtype=np.uint64)[None, :]
            self._cache["table"] = self.neighbor(vs, labels).astype(np.int64)
        return self._cache["table"]

    def is_regular(self) -> bool:
        """Каждая вершина имеет ровно D меток с соседями внутри {0,1}^n."""
        table = self.neighbor_table()
        return table.shape == (self.size, self.degree) and bool(
            np.all((table >= 0) & (table < self.size))
        )

    def is_consistently_labelled(self) -> bool:
        """Для каждой метки i отображение v -> neighbor(v, i) - перестановка."""
        table = np.sort(self.neighbor_table(), axis=0)
        return bool(np.all(table == np.arange(self.size)[:, None]))

    def transition_matrix(self) -> scipy.sparse.csr_matrix:
        """
        Матрица перехода случайного блуждания
        M[v, u] = #{i: neighbor(v, i) = u} / D.
        """
        if "transition" not in self._cache:
            if self.base is not None and self.walk_length > 1:
                step = self.base.transition_matrix()
                power = step
                for _ in range(self.walk_length - 1):
                    power = power @ step
                matrix = scipy.sparse.csr_matrix(power)
            else:
                table = self.neighbor_table()
                rows = np.repeat(np.arange(self.size), self.degree)
                data = np.full(rows.size, 1.0 / self.degree)
                matrix = scipy.sparse.csr_matrix(
                    (data, (rows, table.ravel())), shape=(self.size, self.size)
                )
            self._cache["transition"] = matrix
        return self._cache["transition"]

    def measure_lambda(self) -> float:
        """
        Второе по модулю собственное значение матрицы перехода
        (для несимметричной - второе сингулярное число).
        """
        if "lambda" in self._cache:
            return self._cache["lambda"]
        matrix = self.transition_matrix()
        if self.size == 1:
            value = 0.0
        elif abs(matrix - matrix.T).max() > 1e-12:
            singular = scipy.linalg.svdvals(matrix.toarray())
            value = float(singular[1])
        elif self.size <= _DENSE_EIGEN_LIMIT:
            eigen = scipy.linalg.eigvalsh(matrix.toarray())
            value = float(max(eigen[-2], -eigen[0]))
        else:
            top = scipy.sparse.linalg.eigsh(
                matrix, k=2, which="LA", return_eigenvectors=False
            )
            bottom = scipy.sparse.linalg.eigsh(
                matrix, k=1, which="SA", return_eigenvectors=False
            )
            value = float(max(np.min(top), -np.min(bottom)))
        value = min(1.0, max(0.0, value))
        self._cache["lambda"] = value
        logging.info("Спектральное расширение %s: lambda = %.6f", self.name, value)
        return value

    def is_connected(self) -> bool:
        """Связность через обход в ширину networkx."""
        graph = nx.from_scipy_sparse_array(self.transition_matrix())
        return nx.is_connected(graph)

    def with_measured_lambda(
        self, cap: int = DEFAULT_LAMBDA_MEASURE_CAP
    ) -> "LabeledGraph":
        """Копия с измеренным lambda, если n <= cap."""
        if self.n > cap:
            return self
        measured = self.measure_lambda()
        return replace(
            self,
            lambda_measured=measured,
            lambda_bound=min(self.lambda_bound, measured + 1e-12),
        )

    def report(self, cap: int = DEFAULT_LAMBDA_MEASURE_CAP) -> GraphReport:
        """Отчёт о регулярности, разметке, связности и спектре."""
        return GraphReport(
            n=self.n,
            degree=self.degree,
            regular=self.is_regular(),
            consistently_labelled=self.is_consistently_labelled(),
            connected=self.is_connected(),
            lambda_measured=self.measure_lambda() if self.n <= cap else None,
            lambda_bound=self.lambda_bound,
        )


def _mgg_maps(x: np.ndarray, y: np.ndarray, label: np.ndarray, q: int) -> tuple:
    """Восемь взаимно обратных по парам аффинных отображений Z_q^2."""
    two_y, two_x = 2 * y, 2 * x
    new_x = np.select(
        [label == 0, label == 1, label == 2, label == 3],
        [x + two_y, x - two_y, x + two_y + 1, x - two_y - 1],
        default=x,
    )
    new_y = np.select(
        [label == 4, label == 5, label == 6, label == 7],
        [y + two_x, y - two_x, y + two_x + 1, y - two_x - 1],
        default=y,
    )
    return new_x % q, new_y % q


@lru_cache(maxsize=None)
def mgg_graph(n: int, measure_cap: int = DEFAULT_LAMBDA_MEASURE_CAP) -> LabeledGraph:
    """
    Граф Маргулиса-Габбера-Галила на Z_q x Z_q, q = 2^{n/2}.

    Метки 0..7 - аффинные биекции (x +- 2y (+1), y) и (x, y +- 2x (+1)),
    метки 8..15 - петли. Вершина v = (x, y) хранится как x * q + y.

    Raises:
        InfeasibleParameters: Если n нечётно или вне [2, 48]
    """
    if n % 2 or not 2 <= n <= 48:
        raise InfeasibleParameters(MSG_ODD_WIDTH.format(n=n))
    half = n // 2
    q = 1 << half

    def neighbor(v: np.ndarray, i: np.ndarray) -> np.ndarray:
        x, y = (part.astype(np.int64) for part in Utils.split_bits(v, half))
        label = i.astype(np.int64)
        new_x, new_y = _mgg_maps(x, y, label, q)
        return Utils.concat_bits(new_x.astype(np.uint64), new_y.astype(np.uint64), half)

    graph = LabeledGraph(
        n=n,
        degree_width=MGG_PADDED_DEGREE_WIDTH,
        neighbor_fn=neighbor,
        lambda_bound=MGG_PADDED_LAMBDA,
        name=f"mgg(n={n})",
    )
    logging.info("Построен граф MGG: n=%d, степень %d", n, graph.degree)
    return graph.with_measured_lambda(measure_cap)


def patched_lambda_bound(degree: int, lam: float, pad: int) -> float:
    """Точная граница lambda после склейки двух копий и дополнения петлями."""
    total = degree + 1 + pad
    worst = max(
        degree - 1 + pad, degree * lam + 1 + pad, abs(pad - degree * lam - 1)
    )
    return worst / total


def patch_odd(
    G: LabeledGraph, measure_cap: int = DEFAULT_LAMBDA_MEASURE_CAP
) -> LabeledGraph:
    """
    Граф на {0,1}^{n}, n = G.n + 1: две копии G по старшему биту,
    новая метка D переворачивает старший бит, остальные метки - петли
    до следующей степени двойки.
    """
    n = G.n + 1
    flip_label = G.degree
    degree_width = G.degree_width + 1
    pad = (1 << degree_width) - G.degree - 1
    top_bit = np.uint64(1 << G.n)

    def neighbor(v: np.ndarray, i: np.ndarray) -> np.ndarray:
        high = v & top_bit
        low = Utils.low_bits(v, G.n)
        inner = np.minimum(i, np.uint64(G.degree - 1))
        within = high | G.neighbor(low, inner)
        flipped = v ^ top_bit
        return np.where(
            i < np.uint64(flip_label), within, np.where(i == flip_label, flipped, v)
        )

    graph = LabeledGraph(
        n=n,
        degree_width=degree_width,
        neighbor_fn=neighbor,
        lambda_bound=patched_lambda_bound(G.degree, G.lambda_bound, pad),
        name=f"patch[{G.name}]",
    )
    return graph.with_measured_lambda(measure_cap)


def power_walk(G: LabeledGraph, w: int) -> LabeledGraph:
    """
    Граф w-шаговых блужданий: метка (i_1, ..., i_w), i_1 в старших битах,
    шаги применяются по порядку. lambda_bound = G.lambda_bound^w.
    """
    if w < 1:
        raise ValueError(MSG_BAD_PARAMETER.format(name="w", value=w))
    if w == 1:
        return G
    d = G.degree_width

    def neighbor(v: np.ndarray, label: np.ndarray) -> np.ndarray:
        current = v
        for step in reversed(range(w)):
            step_label = Utils.low_bits(label >> np.uint64(step * d), d)
            current = G.neighbor(current, step_label)
        return current

    measured = None if G.lambda_measured is None else G.lambda_measured**w
    return LabeledGraph(
        n=G.n,
        degree_width=w * d,
        neighbor_fn=neighbor,
        lambda_bound=G.lambda_bound**w,
        name=f"{G.name}^{w}",
        lambda_measured=measured,
        base=G,
        walk_length=w,
    )


def xor_cayley_graph(n: int) -> LabeledGraph:
    """
    Граф Кэли группы Z_2^n со всеми образующими: neighbor(v, i) = v xor i,
    lambda = 0.
    """
    return LabeledGraph(
        n=n,
        degree_width=n,
        neighbor_fn=lambda v, i: v ^ i,
        lambda_bound=0.0,
        name=f"xor_cayley(n={n})",
        lambda_measured=0.0,
    )


class GraphProvider(Protocol):
    """Источник базовых графов с согласованной разметкой на {0,1}^n."""

    name: str

    def base(self, n: int) -> LabeledGraph: ...


class MGGProvider:
    """MGG для чётного n и склейка двух копий для нечётного."""

    name = "mgg"

    def __init__(self, measure_cap: int = DEFAULT_LAMBDA_MEASURE_CAP) -> None:
        self.measure_cap = measure_cap

    def base(self, n: int) -> LabeledGraph:
        if n % 2 == 0:
            return mgg_graph(n, self.measure_cap)
        return patch_odd(mgg_graph(n - 1, self.measure_cap), self.measure_cap)


class XorCayleyProvider:
    """Полный граф с петлями как граф Кэли: совершенное перемешивание за шаг."""

    name = "xor"

    def base(self, n: int) -> LabeledGraph:
        return xor_cayley_graph(n)


def graph_provider(
    name: str, measure_cap: int = DEFAULT_LAMBDA_MEASURE_CAP
) -> GraphProvider:
    """Поставщик графов по имени из спецификации."""
    if name == "xor":
        return XorCayleyProvider()
    return MGGProvider(measure_cap)


def expander_d2_bound(lam: float, n: int, k: float) -> float:
    """D_2(Gamma(X, U_d), U_n) <= log2(1 + lambda^2 (2^{n-k} - 1))."""
    return math.log2(1.0 + lam * lam * (2.0 ** (n - k) - 1.0))


def expander_l2_bound(lam: float, n: int, k: float) -> float:
    """l_2(Gamma(X, U_d), U_n) <= lambda * sqrt(2^{-k} - 2^{-n})."""
    return lam * math.sqrt(max(0.0, 2.0**-k - 2.0**-n))


def _graph_push(G: LabeledGraph) -> Callable[[np.ndarray], np.ndarray]:
    def push(rows: np.ndarray) -> np.ndarray:
        return np.asarray(G.transition_matrix().T @ np.asarray(rows).T).T

    return push


def graph_extractor(G: LabeledGraph) -> Extractor:
    """
    Экстрактор Gamma_G(x, s) = neighbor(x, s) с отходами Waste(x, s) = s.

    Утверждения при каждом целом k: D_2 и l_2 оценки через lambda_bound.
    """
    claims = []
    for k in range(G.n + 1):
        claims.append(
            Claim(
                DivergenceKind.renyi(2.0),
                float(k),
                expander_d2_bound(G.lambda_bound, G.n, k),
                Strength.AVG,
                PROV_EXPANDER_MIXING,
            )
        )
        claims.append(
            Claim(
                DivergenceKind.lp(2.0),
                float(k),
                expander_l2_bound(G.lambda_bound, G.n, k),
                Strength.AVG,
                PROV_EXPANDER_MIXING,
            )
        )
    # Согласованная разметка: по (Gamma(x, s), s) восстанавливается x
    waste = Waste(G.degree_width, lambda x, s: s, True, True)
    return Extractor(
        n=G.n,
        d=G.degree_width,
        m=G.n,
        fn=G.neighbor,
        claims=tuple(claims),
        waste=waste,
        name=f"gamma[{G.name}]",
        push=_graph_push(G),
    )


def walk_length_for(lam: float, delta_log: float, eps: float) -> int:
    """Наименьшее w >= 1 с lambda^{2w} <= eps * 2^{-delta}."""
    target = eps * 2.0**-delta_log
    if lam <= 0.0 or target >= 1.0:
        return 1
    if lam >= 1.0:
        raise InfeasibleParameters(MSG_INFEASIBLE.format(reason=f"lambda={lam:g} >= 1"))
    w = max(1, math.ceil(math.log(target) / (2.0 * math.log(lam))))
    while lam ** (2 * w) > target:
        w += 1
    return w


def expander_extractor(
    n: int,
    delta_log: float,
    eps: float,
    provider: Optional[GraphProvider] = None,
    max_seed_width: int = DEFAULT_MAX_SEED_WIDTH,
) -> Extractor:
    """
    Average-case D_2-экстрактор (n - delta, eps / ln 2) на блужданиях по экспандеру.

    Args:
        n: Ширина источника и выхода
        delta_log: Дефицит энтропии log(1/delta)
        eps: Целевая ошибка
        provider: Поставщик базового графа (по умолчанию MGG)
        max_seed_width: Допустимая длина семени

    Returns:
        Extractor: Gamma_{G^w} с отходами s; в notes записана достигнутая
            константа C = d / (delta + log2(1/eps))

    Raises:
        InfeasibleParameters: Если требуемое семя длиннее max_seed_width
    """
    if n < 1:
        raise InfeasibleParameters(MSG_INFEASIBLE.format(reason=f"n={n} < 1"))
    if eps <= 0 or delta_log < 0:
        raise ValueError(
            MSG_BAD_PARAMETER.format(name="eps/delta", value=(eps, delta_log))
        )
    provider = provider or MGGProvider()
    base = provider.base(n)
    w = walk_length_for(base.lambda_bound, delta_log, eps)
    d = w * base.degree_width
    if d > max_seed_width:
        raise InfeasibleParameters(MSG_SEED_TOO_LONG.format(d=d, cap=max_seed_width))
    graph = power_walk(base, w)
    ext = graph_extractor(graph)
    average = Claim(
        DivergenceKind.renyi(2.0),
        n - delta_log,
        eps / LN2,
        Strength.AVG,
        PROV_EXPANDER_AVERAGE,
    )
    notes = {"walk_length": float(w), "lambda": graph.lambda_bound}
    denominator = delta_log + math.log2(1.0 / eps)
    if denominator > 0:
        notes["seed_constant"] = d / denominator
    logging.info(
        "Экстрактор на экспандере: n=%d, delta=%g, eps=%g, w=%d, d=%d (%s)",
        n,
        delta_log,
        eps,
        w,
        d,
        provider.name,
    )
    return ext.with_claims(
        average, name=f"expander(n={n},delta={delta_log:g},eps={eps:g})", notes=notes
    )

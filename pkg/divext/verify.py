"""
Модуль для проверки утверждений полным перебором: худшая ошибка на плоских
источниках, average-case проверки, хвосты для случайных функций, батарея
неравенств между дивергенциями, контрпример к обработке данных для d_G
и проверка диспергеров.
"""

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from .constants import (
    DEFAULT_ENUMERATION_CAP,
    DEFAULT_SEED,
    DEFAULT_STRUCTURED_SAMPLES,
    REPORT_DPI_FLOOR_NOTE,
    REPORT_EXACT_LABEL,
    REPORT_LOWER_BOUND_LABEL,
)
from .divergences import (
    DivergenceKind,
    TGrid,
    binary_entropy,
    bounded_norm,
    divergence_to_uniform_rows,
    exact_divergence,
    kl,
    lp_distance,
    moment_class_distance,
    pinsker_subgaussian_bound,
    renyi,
    renyi_kl_triangle_bound,
    subgaussian_distance,
    subgaussian_lp_bound,
    tv,
)
from .domain import (
    Distribution,
    FlatSource,
    JointSource,
    check_flat_request,
    conditional_min_entropy,
    flat_size,
    flat_support_batches,
    pushforward,
)
from .errors import CountExceedsCap
from .extractor import Extractor, claim_holds
from .models.schemas import SourceFamilyModel, VerifyEntry, VerifyReport

LN2 = math.log(2.0)

# Предел числа вершин, для которых строятся все шары Хэмминга
_BALL_CENTER_LIMIT = 1024
_INTERVAL_LIMIT = 1024


class FamilyMode(str, Enum):
    """Способ порождения плоских источников."""

    EXHAUSTIVE = "exhaustive"
    STRUCTURED = "structured"
    SAMPLED = "sampled"


@dataclass(frozen=True)
class SourceFamily:
    """
    Семейство плоских источников размера K = floor(2^k).

    exhaustive - все носители (при превышении cap и fallback - structured);
    structured - подкубы, шары Хэмминга, интервалы и count случайных носителей;
    sampled - count случайных носителей.
    """

    mode: FamilyMode = FamilyMode.EXHAUSTIVE
    cap: int = DEFAULT_ENUMERATION_CAP
    count: int = DEFAULT_STRUCTURED_SAMPLES
    seed: int = DEFAULT_SEED
    fallback: bool = True

    @classmethod
    def from_model(
        cls, model: SourceFamilyModel, cap: int, count: int, seed: int
    ) -> "SourceFamily":
        return cls(
            mode=FamilyMode(model.mode),
            cap=model.cap or cap,
            count=model.count if model.mode == "sampled" else count,
            seed=seed if model.seed is None else model.seed,
            fallback=model.fallback,
        )

    def resolve(self, n: int, size: int) -> FamilyMode:
        """
        Фактический режим для (n, K).

        Raises:
            CountExceedsCap: Если полный перебор превышает cap, а fallback выключен
        """
        if self.mode is not FamilyMode.EXHAUSTIVE:
            return self.mode
        try:
            check_flat_request(n, size, self.cap)
        except CountExceedsCap:
            if not self.fallback:
                raise
            logging.warning(
                "Перебор C(2^%d, %d) превышает лимит %d: структурированные источники",
                n,
                size,
                self.cap,
            )
            return FamilyMode.STRUCTURED
        return FamilyMode.EXHAUSTIVE

    def batches(
        self, n: int, size: int, batch: int
    ) -> tuple[Iterator[np.ndarray], str]:
        """Пачки носителей (B, K) и метка отчёта."""
        mode = self.resolve(n, size)
        if mode is FamilyMode.EXHAUSTIVE:
            return flat_support_batches(n, size, batch), REPORT_EXACT_LABEL
        rng = np.random.default_rng(self.seed)
        if mode is FamilyMode.SAMPLED:
            stream = _sampled_supports(n, size, self.count, rng)
        else:
            stream = itertools.chain(
                _subcube_supports(n, size, self.count),
                _hamming_ball_supports(n, size),
                _interval_supports(n, size),
                _sampled_supports(n, size, self.count, rng),
            )
        return _rebatch(stream, size, batch), REPORT_LOWER_BOUND_LABEL


def _rebatch(rows: Iterable[np.ndarray], size: int, batch: int) -> Iterator[np.ndarray]:
    chunk: list[np.ndarray] = []
    for row in rows:
        chunk.append(row)
        if len(chunk) == batch:
            yield np.stack(chunk)
            chunk = []
    if chunk:
        yield np.stack(chunk).reshape(len(chunk), size)


def _popcount(values: np.ndarray) -> np.ndarray:
    as_bytes = np.ascontiguousarray(values.astype(np.uint64)).view(np.uint8)
    return np.unpackbits(as_bytes).reshape(values.size, 64).sum(axis=1)


def _spread(values: np.ndarray, positions: Sequence[int]) -> np.ndarray:
    """Раскладывает младшие биты values по заданным позициям."""
    out = np.zeros(values.shape, dtype=np.int64)
    for index, position in enumerate(positions):
        out |= ((values >> index) & 1) << position
    return out


def _subcube_supports(n: int, size: int, limit: int) -> Iterator[np.ndarray]:
    """Подкубы размерности log2 K (только для K - степени двойки)."""
    if size & (size - 1):
        return
    dim = size.bit_length() - 1
    inner = np.arange(size, dtype=np.int64)
    emitted = 0
    for free in itertools.combinations(range(n), dim):
        fixed = [bit for bit in range(n) if bit not in free]
        offsets = _spread(inner, free)
        for assignment in range(1 << len(fixed)):
            if emitted >= limit:
                return
            base = _spread(np.asarray(assignment, dtype=np.int64), fixed)
            yield np.sort(base + offsets)
            emitted += 1


def _hamming_ball_supports(n: int, size: int) -> Iterator[np.ndarray]:
    """K ближайших по Хэммингу точек к центру (ничьи - по значению)."""
    points = np.arange(1 << n, dtype=np.int64)
    centers = max(1, min(_BALL_CENTER_LIMIT, (1 << 22) >> n))
    step = max(1, (1 << n) // centers)
    for center in range(0, 1 << n, step):
        distances = _popcount(points ^ center)
        order = np.lexsort((points, distances))
        yield np.sort(order[:size])


def _interval_supports(n: int, size: int) -> Iterator[np.ndarray]:
    domain = 1 << n
    step = max(1, domain // _INTERVAL_LIMIT)
    for start in range(0, domain, step):
        yield np.sort((start + np.arange(size, dtype=np.int64)) % domain)


def _sampled_supports(
    n: int, size: int, count: int, rng: np.random.Generator
) -> Iterator[np.ndarray]:
    for _ in range(count):
        yield np.sort(rng.choice(1 << n, size=size, replace=False)).astype(np.int64)


@dataclass(frozen=True)
class FlatWorst:
    """Худшая найденная ошибка и источник-свидетель."""

    worst: float
    witness: FlatSource
    sources: int
    label: str


def _batch_size(ext: Extractor, strong: bool, size: int) -> int:
    # Ячеек на источник: таблица (K, D) и строки (D, M) либо плотная строка 2^n
    if strong or ext.push is None:
        per_source = ext.seed_count * max(size, ext.output_size)
    else:
        per_source = max(1 << ext.n, ext.output_size)
    return int(max(1, min(4096, (1 << 18) // per_source)))


def _batch_errors(
    ext: Extractor, kind: DivergenceKind, supports: np.ndarray, strong: bool
) -> np.ndarray:
    if strong:
        rows = ext.flat_seed_rows(supports)
        errors = divergence_to_uniform_rows(kind, rows.reshape(-1, ext.output_size))
        return errors.reshape(supports.shape[0], ext.seed_count).mean(axis=1)
    return divergence_to_uniform_rows(kind, ext.flat_output_rows(supports))


def worst_flat_error(
    ext: Extractor,
    kind: DivergenceKind,
    k: float,
    family: Optional[SourceFamily] = None,
    strong: bool = False,
    threads: int = 1,
) -> FlatWorst:
    """
    Максимум ошибки по плоским источникам размера floor(2^k): при strong -
    E_s D(Ext(X, s) || U_m), иначе D(Ext(X, U_d) || U_m).

    Пачки обрабатываются пулом потоков, результаты сливаются в исходном
    порядке, так что свидетель детерминирован.

    Raises:
        CountExceedsCap: Если перебор превышает лимит и fallback выключен
    """
    family = family or SourceFamily()
    size = flat_size(k)
    batches, label = family.batches(ext.n, size, _batch_size(ext, strong, size))
    if strong or ext.push is None:
        ext.table()
    worst, witness, sources = -math.inf, None, 0

    def evaluate(supports: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return supports, _batch_errors(ext, kind, supports, strong)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        while True:
            window = list(itertools.islice(batches, 4 * max(1, threads)))
            if not window:
                break
            for supports, errors in pool.map(evaluate, window):
                sources += errors.size
                index = int(np.argmax(errors))
                if errors[index] > worst:
                    worst, witness = float(errors[index]), supports[index]
            logging.debug("Проверено %d источников, худшая ошибка %.6g", sources, worst)
    logging.info(
        "Худшая ошибка %s для %s при k=%g (%s): %.6g на %d источниках",
        kind,
        ext.name,
        k,
        label,
        worst,
        sources,
    )
    if witness is None:
        raise ValueError(f"Семейство не содержит источников размера {size}")
    witness_source = FlatSource(ext.n, tuple(int(x) for x in witness))
    return FlatWorst(worst, witness_source, sources, label)


def verify_claims(
    ext: Extractor,
    family: Optional[SourceFamily] = None,
    kind: Optional[DivergenceKind] = None,
    k: Optional[float] = None,
    strong: Optional[bool] = None,
    threads: int = 1,
    seed: int = DEFAULT_SEED,
) -> VerifyReport:
    """
    Сверяет каждое утверждение реестра (или отобранные по kind/k/strong)
    с измеренной худшей ошибкой на плоских источниках.
    """
    entries = []
    for claim in ext.claims:
        if kind is not None and claim.kind != kind:
            continue
        if k is not None and abs(claim.k - k) > 1e-9:
            continue
        claim_strong = claim.strength.strong
        if strong is not None and claim_strong != strong:
            continue
        if claim.k > ext.n:
            continue
        measured = worst_flat_error(
            ext, claim.kind, claim.k, family, claim_strong, threads
        )
        entries.append(
            VerifyEntry(
                claim=claim.to_model(),
                worst=measured.worst,
                witness=measured.witness.to_model(),
                sources=measured.sources,
                label=measured.label,
                passed=claim_holds(measured.worst, claim),
            )
        )
    all_pass = all(entry.passed for entry in entries)
    logging.info(
        "Проверка %s: %d утверждений, %s",
        ext.name,
        len(entries),
        "OK" if all_pass else "FAIL",
    )
    return VerifyReport(
        extractor=ext.name, seed=seed, entries=entries, all_pass=all_pass
    )


@dataclass(frozen=True)
class CrossCheck:
    """Сравнение неплоских источников с плоским максимумом."""

    flat_worst: float
    nonflat_worst: float
    sources: int

    @property
    def passed(self) -> bool:
        return self.nonflat_worst <= self.flat_worst + 1e-9


def nonflat_cross_check(
    ext: Extractor,
    kind: DivergenceKind,
    k: float,
    count: int = 100,
    seed: int = DEFAULT_SEED,
    family: Optional[SourceFamily] = None,
) -> CrossCheck:
    """
    Смеси двух случайных плоских источников размера K не превосходят
    максимума по плоским источникам (выпуклость по первому аргументу).
    Min-энтропия каждой смеси проверяется явно.
    """
    flat = worst_flat_error(ext, kind, k, family)
    size = flat_size(k)
    rng = np.random.default_rng(seed)
    domain = 1 << ext.n
    rows = []
    for _ in range(count):
        weight = rng.random()
        row = np.zeros(domain)
        row[rng.choice(domain, size, replace=False)] += weight / size
        row[rng.choice(domain, size, replace=False)] += (1.0 - weight) / size
        assert row.max() <= 1.0 / size + 1e-12
        rows.append(row)
    errors = divergence_to_uniform_rows(kind, ext.output_rows(np.stack(rows)))
    return CrossCheck(flat.worst, float(errors.max()), count)


def average_case_error(
    ext: Extractor, kind: DivergenceKind, joint: JointSource, strong: bool = False
) -> float:
    """E_z D(Ext(X|Z=z, U_d) || U_m), при strong - ещё и среднее по семени."""
    conditionals = np.stack([c.probs for c in joint.conditionals])
    if strong:
        per_seed = np.stack(
            [ext.seed_distributions(c) for c in joint.conditionals]
        )  # (Z, D, M)
        errors = divergence_to_uniform_rows(kind, per_seed.reshape(-1, ext.output_size))
        errors = errors.reshape(len(joint.conditionals), ext.seed_count).mean(axis=1)
    else:
        errors = divergence_to_uniform_rows(kind, ext.output_rows(conditionals))
    mask = joint.weights > 0
    return float(np.dot(joint.weights[mask], errors[mask]))


def average_case_check(
    ext: Extractor,
    kind: DivergenceKind,
    k: float,
    joints: Iterable[JointSource],
    strong: bool = False,
) -> tuple[float, int]:
    """
    Худшая средняя ошибка по совместным источникам с H~_inf(X|Z) >= k.

    Returns:
        tuple[float, int]: Худшая ошибка и число учтённых источников
    """
    worst, used = 0.0, 0
    for joint in joints:
        if conditional_min_entropy(joint) < k - 1e-12:
            continue
        worst = max(worst, average_case_error(ext, kind, joint, strong))
        used += 1
    logging.info(
        "Average-case %s для %s при k=%g: %.6g (%d источников)",
        kind,
        ext.name,
        k,
        worst,
        used,
    )
    return worst, used


def bit_side_joints(
    n: int, size: int, cap: int = DEFAULT_ENUMERATION_CAP
) -> Iterator[JointSource]:
    """
    Все совместные источники: X плоский размера size, Z - один бит X
    (или константа). H~_inf(X|Z) >= log2(size) - 1.
    """
    check_flat_request(n, size, cap)
    points = np.arange(1 << n, dtype=np.int64)
    sides = [np.zeros(1 << n, dtype=np.int64)]
    sides += [(points >> bit) & 1 for bit in range(n)]
    for support in itertools.combinations(range(1 << n), size):
        source = Distribution.flat(n, support)
        for side in sides:
            yield JointSource.from_side_function(source, 1, side)


def symmetric_average_bound(plain_error: float) -> float:
    """Average-case ошибка для симметричных классов: не больше 3 eps."""
    return 3.0 * plain_error


def bounded_average_bound(
    plain_error: float, eta: float, kind: DivergenceKind, m: int
) -> float:
    """eps + eta * ||D|| для источников с H~_inf >= k + log2(1/eta)."""
    return plain_error + eta * bounded_norm(kind, m)


@dataclass(frozen=True)
class DecayRow:
    """Ошибка на уровне k - t против 2^{t+1} * (ошибка при k)."""

    t: int
    error: float
    bound: float

    @property
    def passed(self) -> bool:
        return self.error <= self.bound + 1e-12


def graceful_decay(
    ext: Extractor,
    kind: DivergenceKind,
    k: float,
    steps: Sequence[int] = (0, 1, 2),
    family: Optional[SourceFamily] = None,
    strong: bool = False,
    threads: int = 1,
) -> list[DecayRow]:
    """
    Измеряет, как ошибка растёт при снижении min-энтропии. Для
    симметричного класса функций и k <= n - 1 ошибка при k - t не
    превосходит (2^{t+1} - 1) * (ошибка при k), откуда average-case оценка 3 eps.
    """
    base = worst_flat_error(ext, kind, k, family, strong, threads).worst
    rows = []
    for t in steps:
        if t == 0:
            error = base
        else:
            error = worst_flat_error(ext, kind, k - t, family, strong, threads).worst
        rows.append(DecayRow(t, error, 2.0 ** (t + 1) * base))
    return rows


@dataclass(frozen=True)
class TailResult:
    """Эмпирическая частота хвоста и аналитическая граница."""

    rate: float
    bound: float
    slack: float
    trials: int

    @property
    def passed(self) -> bool:
        return self.rate <= self.bound + self.slack


def _random_function_errors(
    kind: DivergenceKind,
    d: int,
    m: int,
    size: int,
    trials: int,
    rng: np.random.Generator,
) -> np.ndarray:
    seeds, outputs = 1 << d, 1 << m
    errors = np.empty(trials)
    batch = max(1, (1 << 20) // (size * seeds))
    for start in range(0, trials, batch):
        count = min(batch, trials - start)
        values = rng.integers(0, outputs, size=(count, size, seeds))
        rows = np.arange(count)[:, None] * seeds + np.arange(seeds)[None, :]
        offsets = rows * outputs
        flat = (offsets[:, None, :] + values).ravel()
        counts = np.bincount(flat, minlength=count * seeds * outputs)
        rows = counts.reshape(count * seeds, outputs) / size
        errors[start : start + count] = (
            divergence_to_uniform_rows(kind, rows).reshape(count, seeds).mean(axis=1)
        )
    return errors


def _binomial_slack(bound: float, trials: int) -> float:
    p = min(1.0, max(0.0, bound))
    return 3.0 * math.sqrt(p * (1.0 - p) / trials)


def random_function_kl_tail(
    n: int, d: int, m: int, size: int, eps: float, trials: int, seed: int = DEFAULT_SEED
) -> TailResult:
    """
    Доля случайных таблиц Ext с E_s KL(Ext(X, s) || U_m) > eps
    для фиксированного плоского X размера size; граница 2^{MD - KD eps / 3}.
    """
    if trials < 1 or not 1 <= size <= 1 << n:
        raise ValueError(f"trials={trials}, K={size}")
    rng = np.random.default_rng(seed)
    errors = _random_function_errors(DivergenceKind.kl(), d, m, size, trials, rng)
    rate = float(np.mean(errors > eps))
    M, D = 1 << m, 1 << d
    bound = min(1.0, 2.0 ** (M * D - size * D * eps / 3.0))
    logging.info(
        "Хвост KL: K=%d, eps=%g, частота %.4g, граница %.4g", size, eps, rate, bound
    )
    return TailResult(rate, bound, _binomial_slack(bound, trials), trials)


def random_function_tv_tail(
    n: int, d: int, m: int, size: int, eps: float, trials: int, seed: int = DEFAULT_SEED
) -> TailResult:
    """TV-аналог: граница 2^{MD - 2 K D eps^2 / ln 2}."""
    if trials < 1 or not 1 <= size <= 1 << n:
        raise ValueError(f"trials={trials}, K={size}")
    rng = np.random.default_rng(seed)
    errors = _random_function_errors(DivergenceKind.tv(), d, m, size, trials, rng)
    rate = float(np.mean(errors > eps))
    M, D = 1 << m, 1 << d
    bound = min(1.0, 2.0 ** (M * D - 2.0 * size * D * eps * eps / LN2))
    return TailResult(rate, bound, _binomial_slack(bound, trials), trials)


# Батарея неравенств


@dataclass
class InequalityStat:
    """Нарушения одного неравенства: lhs <= rhs + tol."""

    checked: int = 0
    violations: int = 0
    worst_margin: float = -math.inf

    def record(self, lhs: float, rhs: float, tol: float) -> None:
        self.checked += 1
        if math.isinf(lhs) and math.isinf(rhs) and lhs > 0 and rhs > 0:
            return
        margin = lhs - rhs
        if not math.isnan(margin):
            self.worst_margin = max(self.worst_margin, margin)
        if not lhs <= rhs + tol:
            self.violations += 1


@dataclass
class InequalityReport:
    """Итог батареи неравенств."""

    stats: dict[str, InequalityStat] = field(default_factory=dict)

    def stat(self, name: str) -> InequalityStat:
        return self.stats.setdefault(name, InequalityStat())

    @property
    def passed(self) -> bool:
        return all(stat.violations == 0 for stat in self.stats.values())


def random_pair(m: int, rng: np.random.Generator) -> tuple[Distribution, Distribution]:
    """
    Случайная пара: плотная по Дирихле, разреженная или почти вырожденная
    (масса 1 - 1e-12 в одной точке).
    """
    size = 1 << m

    def draw() -> np.ndarray:
        style = rng.integers(0, 3)
        if style == 0:
            return rng.dirichlet(np.full(size, rng.uniform(0.1, 3.0)))
        if style == 1:
            probs = rng.random(size) * (rng.random(size) < 0.5)
            probs[rng.integers(size)] += 1.0
            return probs / probs.sum()
        probs = np.full(size, 1e-12 / max(1, size - 1))
        probs[rng.integers(size)] = 1.0 - 1e-12 if size > 1 else 1.0
        return probs / probs.sum()

    return Distribution(m, draw()), Distribution(m, draw())


_RENYI_ORDERS = (0.0, 0.5, 1.0, 2.0, math.inf)
_LP_ORDERS = (1.0, 2.0, 4.0, math.inf)
_HOLDER_PAIRS = ((1.0, math.inf), (2.0, 2.0), (4.0, 4.0 / 3.0))
_TRIANGLE_ALPHAS = (0.5, 1.0, 2.0)
_EXACT_TOL = 1e-9
_BOUND_TOL = 1e-6


def _exact_checks(
    report: InequalityReport, P: Distribution, Q: Distribution, rng: np.random.Generator
) -> None:
    m = P.width
    uniform = Distribution.uniform(m)
    values = [renyi(alpha, P, Q) for alpha in _RENYI_ORDERS]
    for low, high in zip(values, values[1:]):
        report.stat("renyi_monotone").record(low, high, _EXACT_TOL)
    norms = [lp_distance(p, P, Q) for p in _LP_ORDERS]
    for high, low in zip(norms, norms[1:]):
        report.stat("lp_monotone").record(low, high, _EXACT_TOL)

    out_width = int(rng.integers(0, m + 1))
    table = rng.integers(0, 1 << out_width, size=P.size)
    fP, fQ = pushforward(P, table, out_width), pushforward(Q, table, out_width)
    report.stat("dpi_tv").record(tv(fP, fQ), tv(P, Q), _EXACT_TOL)
    report.stat("dpi_kl").record(kl(fP, fQ), kl(P, Q), _EXACT_TOL)
    for alpha in (0.5, 2.0):
        report.stat(f"dpi_renyi_{alpha:g}").record(
            renyi(alpha, fP, fQ), renyi(alpha, P, Q), _EXACT_TOL
        )

    distance = tv(P, uniform)
    report.stat("kl_from_tv").record(
        kl(P, uniform), m * distance + binary_entropy(distance), _EXACT_TOL
    )
    for p, q in _HOLDER_PAIRS:
        scaled = 2.0 ** (-m / q) * moment_class_distance(q, P, Q)
        lp = lp_distance(p, P, Q)
        report.stat("moment_class_exact").record(abs(lp - scaled), 0.0, _EXACT_TOL)
    R = random_pair(m, rng)[0]
    for alpha in _TRIANGLE_ALPHAS:
        bound = renyi_kl_triangle_bound(kl(P, Q), renyi(1.0 + alpha, Q, R), alpha)
        report.stat("kl_triangle").record(kl(P, R), bound, _EXACT_TOL)


def _solver_checks(
    report: InequalityReport,
    P: Distribution,
    Q: Distribution,
    iterations: int,
    seed: int,
) -> None:
    m = P.width
    uniform = Distribution.uniform(m)
    versus_uniform = subgaussian_distance(
        P, uniform, TGrid.default(), iterations=iterations, seed=seed
    )
    report.stat("subgaussian_pinsker").record(
        versus_uniform.lower, pinsker_subgaussian_bound(kl(P, uniform)), _BOUND_TOL
    )
    pair = subgaussian_distance(P, Q, TGrid.default(), iterations=iterations, seed=seed)
    report.stat("subgaussian_above_tv").record(tv(P, Q), pair.lower, _BOUND_TOL)
    for alpha in _TRIANGLE_ALPHAS:
        report.stat("subgaussian_lp").record(
            pair.lower,
            subgaussian_lp_bound(m, alpha, lp_distance(1.0 + alpha, P, Q)),
            _BOUND_TOL,
        )


def inequality_suite(
    sample_count: int,
    seed: int = DEFAULT_SEED,
    widths: Sequence[int] = tuple(range(1, 7)),
    solver_iterations: int = 0,
    solver_samples: int = 20,
) -> InequalityReport:
    """
    Прогоняет неравенства между дивергенциями на sample_count случайных парах
    для каждой ширины: монотонность Реньи и l_p, обработка данных для TV, KL
    и Реньи, оценка KL через TV, точность моментного класса, треугольник
    KL-Реньи. Оценки d_G проверяются на solver_samples парах.
    """
    rng = np.random.default_rng(seed)
    report = InequalityReport()
    for m in widths:
        for index in range(sample_count):
            P, Q = random_pair(m, rng)
            _exact_checks(report, P, Q, rng)
            if index < solver_samples:
                _solver_checks(report, P, Q, solver_iterations, seed + index)
    for name, stat in sorted(report.stats.items()):
        logging.info(
            "Неравенство %s: %d проверок, %d нарушений, худший запас %.3g",
            name,
            stat.checked,
            stat.violations,
            stat.worst_margin,
        )
    return report


# Контрпример к обработке данных для d_G


@dataclass(frozen=True)
class DpiRow:
    """Строка таблицы: оценки d_G до и после вложения {0,1} -> {0,1}^m."""

    m: int
    pre_lower: float
    pre_upper: float
    post_lower: float
    solver_lower: Optional[float]
    exact_dpi_ok: bool
    floor_ok: bool
    note: str = REPORT_DPI_FLOOR_NOTE


def two_point_scale(m: int, grid: TGrid) -> float:
    """
    Наибольшее c, при котором f = c в точке a, -c в точке b и 0 иначе
    проходит сетку: ln(1 + 2^{1-m} (cosh(t c) - 1)) <= t^2/8.
    """
    ts, bounds = grid.array, grid.bounds()
    weight = 2.0 ** (1 - m)

    def feasible(c: float) -> bool:
        with np.errstate(over="ignore"):
            logs = np.log1p(weight * (np.cosh(ts * c) - 1.0))
        return bool(np.all(logs <= bounds))

    lo, hi = 0.0, 1.0
    while feasible(hi):
        lo, hi = hi, 2.0 * hi
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if feasible(mid) else (lo, mid)
    return lo


def dpi_counterexample(
    m_list: Sequence[int],
    iterations: int = 0,
    restarts: int = 2,
    seed: int = DEFAULT_SEED,
    solver_width_limit: int = 6,
) -> list[DpiRow]:
    """
    Точечные массы в 0 и 1 на {0,1} вкладываются x -> x << (m - 1).
    После вложения d_G растёт как sqrt(m), а TV, KL и Реньи не меняются.
    """
    grid = TGrid.default()
    P, Q = Distribution.point(1, 0), Distribution.point(1, 1)
    pre = subgaussian_distance(
        P, Q, grid, iterations=iterations, restarts=restarts, seed=seed
    )
    rows = []
    for m in m_list:
        if not 1 <= m <= 12:
            raise ValueError(f"m={m} вне [1, 12]")
        table = np.array([0, 1 << (m - 1)])
        fP, fQ = pushforward(P, table, m), pushforward(Q, table, m)
        post_lower = max(2.0 * two_point_scale(m, grid), tv(fP, fQ))
        solver_lower = None
        if m <= solver_width_limit:
            solver_lower = subgaussian_distance(
                fP, fQ, grid, iterations=iterations, restarts=restarts, seed=seed
            ).lower
        exact_ok = all(
            exact_divergence(kind, fP, fQ) <= exact_divergence(kind, P, Q) + 1e-9
            for kind in (
                DivergenceKind.tv(),
                DivergenceKind.kl(),
                DivergenceKind.renyi(0.5),
                DivergenceKind.renyi(2.0),
            )
        )
        rows.append(
            DpiRow(
                m=m,
                pre_lower=pre.lower,
                pre_upper=pre.upper,
                post_lower=post_lower,
                solver_lower=solver_lower,
                exact_dpi_ok=exact_ok,
                floor_ok=post_lower >= 0.5 * math.sqrt(m),
            )
        )
        logging.info(
            "Вложение в {0,1}^%d: d_G >= %.4f (до вложения <= %.4f)",
            m,
            post_lower,
            pre.upper,
        )
    return rows


# Диспергеры


@dataclass(frozen=True)
class DisperserResult:
    """Оба критерия диспергера на семействе источников."""

    d0_ok: bool
    coverage_ok: bool
    min_coverage: int
    sources: int

    @property
    def agree(self) -> bool:
        return self.d0_ok == self.coverage_ok


def disperser_check(
    ext: Extractor, k: float, eps: float, family: Optional[SourceFamily] = None
) -> DisperserResult:
    """
    Сравнивает на плоских источниках D_0-критерий
    D_0(Ext(X, U_d) || U_m) <= log2(1/(1-eps)) и критерий покрытия
    |supp Ext(X, U_d)| >= (1 - eps) 2^m.
    """
    family = family or SourceFamily()
    size = flat_size(k)
    batches, _ = family.batches(ext.n, size, _batch_size(ext, False, size))
    threshold = math.inf if eps >= 1 else math.log2(1.0 / (1.0 - eps))
    d0 = DivergenceKind.renyi(0.0)
    d0_ok = coverage_ok = True
    min_coverage, sources = ext.output_size, 0
    for supports in batches:
        rows = ext.flat_output_rows(supports)
        coverage = np.count_nonzero(rows > 0, axis=1)
        d0_ok &= bool(np.all(divergence_to_uniform_rows(d0, rows) <= threshold + 1e-12))
        coverage_ok &= bool(np.all(coverage >= (1.0 - eps) * ext.output_size - 1e-9))
        min_coverage = min(min_coverage, int(coverage.min()))
        sources += supports.shape[0]
    return DisperserResult(d0_ok, coverage_ok, min_coverage, sources)

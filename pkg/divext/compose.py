"""
Модуль для комбинаторов экстракторов: блочная композиция, повторное
извлечение из отходов, зигзаг-произведение, сокращение потерь энтропии,
перевод TV-оценок в KL и сборка KL-экстрактора для высокой min-энтропии.
"""

import logging
import math
from typing import Iterable, Optional, Protocol

import numpy as np

from .constants import (
    DEFAULT_MAX_SEED_WIDTH,
    MSG_BAD_PARAMETER,
    MSG_HIGH_ENTROPY_INFEASIBLE,
    MSG_NOT_INJECTIVE,
    MSG_PRECONDITION,
    MSG_WIDTH_MISMATCH,
    PROV_BLOCK,
    PROV_HIGH_ENTROPY,
    PROV_REEXTRACT,
    PROV_REEXTRACT_STRONG,
    PROV_RRV,
    PROV_TV_TO_KL,
    PROV_ZIGZAG,
)
from .divergences import DivergenceKind, DivergenceTag, binary_entropy
from .errors import (
    InfeasibleParameters,
    MissingClaim,
    PreconditionViolated,
    UnsupportedWidth,
    WidthMismatch,
)
from .expanders import GraphProvider, MGGProvider, expander_extractor
from .extractor import (
    Claim,
    Extractor,
    Strength,
    Waste,
    empty_extractor,
)
from .hashing import (
    HashFamily,
    LeftoverHashProvider,
    almost_universal_block_width,
    almost_universal_family,
    lhl_extractor,
    linear_family,
)
from .utils import Utils

LN2 = math.log(2.0)
KL = DivergenceKind.kl()


class ExtractorProvider(Protocol):
    """Поставщик сильных average-case KL-экстракторов по контракту (k, eps, d, m)."""

    name: str

    def required_entropy(self, m: int, eps: float) -> float: ...

    def provide(
        self, n: int, m: int, eps: float, k: Optional[float] = None
    ) -> Extractor: ...


def _check_total_width(bits: int) -> None:
    if bits > 64:
        raise UnsupportedWidth(f"Суммарная ширина {bits} превышает 64 бита")


def _best_claims(claims: Iterable[Claim]) -> tuple[Claim, ...]:
    """Оставляет лучшую ошибку на каждую пару (k, strength), порядок по k."""
    best: dict[tuple, Claim] = {}
    for claim in claims:
        key = (str(claim.kind), round(claim.k, 12), claim.strength)
        if key not in best or claim.eps < best[key].eps:
            best[key] = claim
    return tuple(sorted(best.values(), key=lambda c: (c.k, c.strength.value)))


def _claim_levels(ext: Extractor, kind: DivergenceKind) -> list[float]:
    return sorted({c.k for c in ext.claims if c.kind.dominates(kind)})


def _try_claim(
    ext: Extractor, kind: DivergenceKind, k: float, strength: Strength
) -> Optional[Claim]:
    try:
        return ext.find_claim(kind, k, strength)
    except MissingClaim:
        return None


def block_error(eps_out: float, eps_in: float, alpha: float) -> float:
    """eps_out + (1 + 1/alpha) * eps_in."""
    return eps_out + (1.0 + 1.0 / alpha) * eps_in


def compose_block(
    ext_out: Extractor,
    ext_in: Extractor,
    alpha: float,
    delta_log: Optional[float] = None,
) -> Extractor:
    """
    Блочная композиция Ext((x, y), s) = Ext_out(x, Ext_in(y, s)).

    Args:
        ext_out: Внешний экстрактор с оценкой в D_{1+alpha}
        ext_in: Внутренний average-case KL-экстрактор, ext_in.m == ext_out.d
        alpha: Параметр alpha > 0
        delta_log: Дефицит log(1/delta); по умолчанию перебираются все уровни

    Returns:
        Extractor: KL-утверждения (n + n' - delta, eps_out + (1 + 1/alpha) eps_in)

    Raises:
        WidthMismatch: Если выход внутреннего не совпадает с семенем внешнего
        MissingClaim: Если нужных утверждений нет ни при одном delta
    """
    if alpha <= 0:
        raise ValueError(MSG_BAD_PARAMETER.format(name="alpha", value=alpha))
    if ext_in.m != ext_out.d:
        raise WidthMismatch(MSG_WIDTH_MISMATCH.format(left=ext_in.m, right=ext_out.d))
    n_out, n_in = ext_out.n, ext_in.n
    _check_total_width(n_out + n_in)
    outer_kind = DivergenceKind.renyi(1.0 + alpha)

    def fn(xy: np.ndarray, s: np.ndarray) -> np.ndarray:
        x, y = Utils.split_bits(xy, n_in)
        return ext_out.evaluate(x, ext_in.evaluate(y, s))

    if delta_log is not None:
        deltas = [delta_log]
    else:
        deltas = sorted(
            {n_out - k for k in _claim_levels(ext_out, outer_kind)}
            | {n_in - k for k in _claim_levels(ext_in, KL)}
        )
        deltas = [delta for delta in deltas if delta >= 0]

    claims = []
    for delta in deltas:
        for out_strength in (Strength.AVG, Strength.PLAIN):
            outer = _try_claim(ext_out, outer_kind, n_out - delta, out_strength)
            if outer is None:
                continue
            for in_strength in (Strength.STRONG_AVG, Strength.AVG):
                inner = _try_claim(ext_in, KL, n_in - delta, in_strength)
                if inner is None:
                    continue
                strength = Strength.of(
                    strong=in_strength is Strength.STRONG_AVG,
                    average=out_strength is Strength.AVG,
                )
                claims.append(
                    Claim(
                        KL,
                        n_out + n_in - delta,
                        block_error(outer.eps, inner.eps, alpha),
                        strength,
                        PROV_BLOCK,
                        outer.slack + inner.slack,
                    )
                )
    if not claims:
        raise MissingClaim(
            MSG_PRECONDITION.format(
                reason=(
                    f"нет пары утверждений D_{1 + alpha:g} / KL-avg "
                    "для блочной композиции"
                )
            )
        )
    return Extractor(
        n=n_out + n_in,
        d=ext_in.d,
        m=ext_out.m,
        fn=fn,
        claims=_best_claims(claims),
        name=f"block({ext_out.name}, {ext_in.name})",
    )


def _reextract_claims(
    ext1: Extractor, ext2: Extractor, strong: bool, provenance: str
) -> list[Claim]:
    claims = []
    if strong:
        pairs = (
            (Strength.STRONG_AVG, Strength.STRONG_AVG),
            (Strength.STRONG, Strength.STRONG_AVG),
        )
    else:
        pairs = ((Strength.AVG, Strength.AVG), (Strength.PLAIN, Strength.AVG))
    for k1 in _claim_levels(ext1, KL):
        # Энтропия отходов при известном выходе (и семени в сильном случае)
        k2 = k1 - ext1.m if strong else k1 + ext1.d - ext1.m
        for first_strength, second_strength in pairs:
            first = _try_claim(ext1, KL, k1, first_strength)
            second = _try_claim(ext2, KL, k2, second_strength)
            if first is None or second is None:
                continue
            claims.append(
                Claim(
                    KL,
                    k1,
                    first.eps + second.eps,
                    first_strength,
                    provenance,
                    first.slack + second.slack,
                )
            )
    return claims


def reextract(
    ext1: Extractor,
    ext2: Extractor,
    strong: bool = False,
    provenance: Optional[str] = None,
) -> Extractor:
    """
    Повторное извлечение: Ext(x, (s, t)) = (Ext_1(x, s), Ext_2(Waste_1(x, s), t)).

    Обычный вариант требует инъективности (Ext_1, Waste_1) по (x, s)
    и утверждения Ext_2 при k_2 <= k_1 + d_1 - m_1; сильный - инъективности
    при каждом s и k_2 <= k_1 - m_1.

    Raises:
        PreconditionViolated: Нет флага инъективности или условие на k_2 не выполнено
        WidthMismatch: Вход Ext_2 не совпадает с шириной отходов
    """
    waste = ext1.waste
    if waste is None or not (waste.strong_injective if strong else waste.injective):
        raise PreconditionViolated(MSG_NOT_INJECTIVE.format(name=ext1.name))
    if ext2.n != waste.width:
        raise WidthMismatch(MSG_WIDTH_MISMATCH.format(left=ext2.n, right=waste.width))
    _check_total_width(ext1.d + ext2.d)
    _check_total_width(ext1.m + ext2.m)
    provenance = provenance or (PROV_REEXTRACT_STRONG if strong else PROV_REEXTRACT)
    d2, m2 = ext2.d, ext2.m

    def fn(x: np.ndarray, seed: np.ndarray) -> np.ndarray:
        s, t = Utils.split_bits(seed, d2)
        first = ext1.evaluate(x, s)
        second = ext2.evaluate(waste.evaluate(x, s), t)
        return Utils.concat_bits(first, second, m2)

    claims = _reextract_claims(ext1, ext2, strong, provenance)
    if not claims:
        bound = "k_1 - m_1" if strong else "k_1 + d_1 - m_1"
        raise PreconditionViolated(
            MSG_PRECONDITION.format(
                reason=f"у Ext_2 нет KL-утверждения при k_2 <= {bound}"
            )
        )

    composite_waste = None
    if ext2.waste is not None:
        inner = ext2.waste

        def waste_fn(x: np.ndarray, seed: np.ndarray) -> np.ndarray:
            s, t = Utils.split_bits(seed, d2)
            return inner.evaluate(waste.evaluate(x, s), t)

        composite_waste = Waste(
            inner.width,
            waste_fn,
            injective=waste.injective and inner.injective,
            strong_injective=waste.strong_injective and inner.strong_injective,
        )
    return Extractor(
        n=ext1.n,
        d=ext1.d + d2,
        m=ext1.m + m2,
        fn=fn,
        claims=_best_claims(claims),
        waste=composite_waste,
        name=f"reextract({ext1.name}, {ext2.name})",
    )


def zigzag(
    ext_out: Extractor,
    ext_in: Extractor,
    ext_waste: Extractor,
    alpha: float,
    delta_log: Optional[float] = None,
) -> Extractor:
    """
    Зигзаг-произведение: блочная композиция с отходами
    Waste_comp((x, y), s) = (Waste_out(x, Ext_in(y, s)), Waste_in(y, s)),
    из которых повторно извлекается ext_waste.

    Ошибка: eps_out + (1 + 1/alpha) eps_in + eps_waste.

    Raises:
        PreconditionViolated: Если отходы внешнего или внутреннего не инъективны
    """
    for part in (ext_out, ext_in):
        if part.waste is None or not part.waste.injective:
            raise PreconditionViolated(MSG_NOT_INJECTIVE.format(name=part.name))
    block = compose_block(ext_out, ext_in, alpha, delta_log)
    waste_out, waste_in = ext_out.waste, ext_in.waste
    n_in = ext_in.n
    _check_total_width(waste_out.width + waste_in.width)

    def waste_fn(xy: np.ndarray, s: np.ndarray) -> np.ndarray:
        x, y = Utils.split_bits(xy, n_in)
        outer = waste_out.evaluate(x, ext_in.evaluate(y, s))
        return Utils.concat_bits(outer, waste_in.evaluate(y, s), waste_in.width)

    composite = Waste(
        waste_out.width + waste_in.width,
        waste_fn,
        injective=True,
        strong_injective=waste_in.strong_injective,
    )
    block = Extractor(
        n=block.n,
        d=block.d,
        m=block.m,
        fn=block.fn,
        claims=block.claims,
        waste=composite,
        name=block.name,
    )
    claims = []
    result = None
    for strong in (False, True):
        try:
            candidate = reextract(
                block, ext_waste, strong=strong, provenance=PROV_ZIGZAG
            )
        except PreconditionViolated:
            continue
        result = result or candidate
        claims.extend(candidate.claims)
    if result is None:
        raise PreconditionViolated(
            MSG_PRECONDITION.format(
                reason="экстрактор отходов не покрывает нужную энтропию"
            )
        )
    return Extractor(
        n=result.n,
        d=result.d,
        m=result.m,
        fn=result.fn,
        claims=_best_claims(claims),
        waste=result.waste,
        name=f"zigzag({ext_out.name}, {ext_in.name}, {ext_waste.name})",
    )


def _second_stage_family(n: int, m: int, epsilon_au: float) -> HashFamily:
    # Линейное семейство универсально (epsilon_au = 0), семя n бит против 2w
    if n <= 2 * almost_universal_block_width(n, m, epsilon_au):
        return linear_family(n, m)
    return almost_universal_family(n, m, epsilon_au)


def rrv_transform(
    ext1: Extractor,
    d_extra: int,
    eps: Optional[float] = None,
    strong: bool = True,
    k: Optional[float] = None,
) -> Extractor:
    """
    Сокращение потерь энтропии: из отходов Waste_1(x, s) = x (или (x, s)
    в обычном варианте) извлекается ещё m_2 ~ d_extra - log(1/eps) - O(1) бит
    LHL-экстрактором с ошибкой <= eps / 2 на семействе с более коротким семенем:
    линейном универсальном (n бит) или почти универсальном (2w бит).

    Args:
        ext1: Сильный KL-экстрактор
        d_extra: Дополнительная энтропия для второго шага, 0 <= d_extra <= k - m_1
        eps: Целевая ошибка второго шага (по умолчанию ошибка ext1)
        strong: Сильный вариант повторного извлечения
        k: Уровень энтропии ext1 (по умолчанию наибольший заявленный)

    Returns:
        Extractor: Результат с записанной константой O(1) в поле slack
    """
    strength = Strength.STRONG if strong else Strength.PLAIN
    levels = [
        level
        for level in _claim_levels(ext1, KL)
        if ext1.has_claim(KL, level, strength)
    ]
    if not levels:
        raise MissingClaim(
            MSG_PRECONDITION.format(
                reason=f"у {ext1.name} нет KL-утверждения силы {strength.value}"
            )
        )
    k = max(levels) if k is None else k
    first = ext1.find_claim(KL, k, strength)
    loss = k - ext1.m
    if not 0 <= d_extra <= loss + 1e-12:
        raise ValueError(MSG_BAD_PARAMETER.format(name="d_extra", value=d_extra))
    if eps is None:
        eps = first.eps
    if eps <= 0:
        raise ValueError(MSG_BAD_PARAMETER.format(name="eps", value=eps))

    if strong:
        waste = Waste(ext1.n, lambda x, s: x, injective=False, strong_injective=True)
    else:
        width = ext1.n + ext1.d
        d1 = ext1.d
        waste = Waste(width, lambda x, s: Utils.concat_bits(x, s, d1), True, True)
    ext1 = Extractor(
        n=ext1.n,
        d=ext1.d,
        m=ext1.m,
        fn=ext1.fn,
        claims=ext1.claims,
        waste=waste,
        name=ext1.name,
        push=ext1.push,
    )

    k2 = float(d_extra)
    epsilon_au = min(0.5, eps * LN2 / 4.0)
    m2 = min(waste.width, math.floor(k2 - math.log2(4.0 / (eps * LN2)) + 1e-12))
    if m2 <= 0:
        second = empty_extractor(waste.width)
    else:
        second = lhl_extractor(_second_stage_family(waste.width, m2, epsilon_au)).strong
    result = reextract(ext1, second, strong=strong, provenance=PROV_RRV)

    target_loss = (loss - d_extra) + math.log2(1.0 / eps)
    slack = (k - result.m) - target_loss
    claims = tuple(
        Claim(c.kind, c.k, c.eps, c.strength, c.provenance, c.slack + slack)
        for c in result.claims
    )
    logging.info(
        "Сокращение потерь: d_extra=%d, m_2=%d, потери %.3f (запас O(1) = %.3f)",
        d_extra,
        max(m2, 0),
        k - result.m,
        slack,
    )
    return Extractor(
        n=result.n,
        d=result.d,
        m=result.m,
        fn=result.fn,
        claims=claims,
        waste=result.waste,
        name=f"rrv({ext1.name}, d_extra={d_extra})",
        notes={"entropy_loss": k - result.m, "slack": slack, "m2": float(max(m2, 0))},
    )


def tv_to_kl_error(m: int, eps_tv: float) -> float:
    """m * eps' + h(eps')."""
    return m * eps_tv + binary_entropy(eps_tv)


def average_case_tv_target(eps: float, m: int) -> float:
    """eps' = min(eps, 1/2) / (48 (m + log2(1/eps)))."""
    return min(eps, 0.5) / (48.0 * (m + math.log2(1.0 / eps)))


def tv_to_kl(ext: Extractor) -> Extractor:
    """
    Добавляет KL-утверждение (k, m eps' + h(eps')) к каждому TV-утверждению
    (k, eps') с eps' <= 1/2.

    Raises:
        PreconditionViolated: Если ни одного TV-утверждения с eps' <= 1/2 нет
    """
    added = [
        Claim(
            KL,
            claim.k,
            tv_to_kl_error(ext.m, claim.eps),
            claim.strength,
            PROV_TV_TO_KL,
            claim.slack,
        )
        for claim in ext.claims
        if claim.kind.tag is DivergenceTag.TV and claim.eps <= 0.5
    ]
    if not added:
        raise PreconditionViolated(
            MSG_PRECONDITION.format(
                reason=f"у {ext.name} нет TV-утверждения с eps' <= 1/2"
            )
        )
    return ext.with_claims(*added)


def high_entropy_budget(eps: float, alpha: float) -> tuple[float, float, float]:
    """
    Доли ошибки: внешний eps/4, внутренний alpha eps / (2 (1 + alpha)),
    отходы eps/4.
    """
    return eps / 4.0, alpha * eps / (2.0 * (1.0 + alpha)), eps / 4.0


def high_entropy_kl(
    m: int,
    delta: float,
    eps: float,
    alpha: float = 1.0,
    inner: Optional[ExtractorProvider] = None,
    graphs: Optional[GraphProvider] = None,
    max_seed_width: int = DEFAULT_MAX_SEED_WIDTH,
) -> Extractor:
    """
    KL-экстрактор для источников с min-энтропией n - log(1/delta):
    экспандер снаружи, поставщик внутри, остатки извлекаются зигзагом.

    Ширина выхода ровно m: n_out + m_waste = (m - d_out) + d_out.

    Raises:
        InfeasibleParameters: Если ни одна ширина внешнего источника не подходит
    """
    if not 0 < alpha <= 1:
        raise ValueError(MSG_BAD_PARAMETER.format(name="alpha", value=alpha))
    if not 0 < delta <= 1 or eps <= 0:
        raise ValueError(MSG_BAD_PARAMETER.format(name="delta/eps", value=(delta, eps)))
    inner = inner or LeftoverHashProvider(max_seed_width)
    graphs = graphs or MGGProvider()
    delta_log = math.log2(1.0 / delta)
    eps_out, eps_in, eps_waste = high_entropy_budget(eps, alpha)
    total = block_error(eps_out, eps_in, alpha) + eps_waste
    assert total <= eps + 1e-12, f"бюджет ошибки {total} > {eps}"

    reasons = []
    for n_out in range(1, m):
        try:
            outer = expander_extractor(
                n_out, delta_log, eps_out * LN2, graphs, max_seed_width
            )
        except InfeasibleParameters as exc:
            reasons.append(f"n_out={n_out}: {exc}")
            continue
        d_out = outer.d
        if n_out + d_out != m:
            continue
        k_in = inner.required_entropy(d_out, eps_in)
        k_waste = inner.required_entropy(d_out, eps_waste)
        n_in = max(d_out, math.ceil(k_in + delta_log - 1e-12))
        try:
            while True:
                ext_in = inner.provide(n_in, d_out, eps_in)
                waste_width = outer.waste.width + ext_in.waste.width
                # Обычное повторное извлечение: k_2 <= k_1 + d_1 - m_1
                available = n_out + n_in - delta_log + ext_in.d - outer.m
                if available >= k_waste - 1e-12:
                    break
                n_in += 1
            ext_waste = inner.provide(waste_width, d_out, eps_waste)
            assembled = zigzag(outer, ext_in, ext_waste, alpha, delta_log)
        except (InfeasibleParameters, PreconditionViolated, UnsupportedWidth) as exc:
            reasons.append(f"n_out={n_out}: {exc}")
            continue
        assert assembled.m == m
        n = assembled.n
        derived = assembled.find_claim(KL, n - delta_log, Strength.PLAIN)
        if derived.eps > eps + 1e-12:
            reasons.append(f"n_out={n_out}: ошибка {derived.eps:.4g} > {eps:g}")
            continue
        budget = Claim(
            KL,
            n - delta_log,
            eps,
            derived.strength,
            PROV_HIGH_ENTROPY,
            derived.slack,
        )
        logging.info(
            "Собран KL-экстрактор: m=%d, n=%d, d=%d, n_out=%d, n_in=%d, "
            "ошибка %.4g <= %g",
            m,
            n,
            assembled.d,
            n_out,
            n_in,
            derived.eps,
            eps,
        )
        notes = {
            "n_out": float(n_out),
            "d_out": float(d_out),
            "n_in": float(n_in),
            "eps_out": eps_out,
            "eps_in": eps_in,
            "eps_waste": eps_waste,
            "entropy_overhead": n - m - delta_log,
        }
        return Extractor(
            n=n,
            d=assembled.d,
            m=m,
            fn=assembled.fn,
            claims=assembled.claims + (budget,),
            waste=assembled.waste,
            name=f"high_entropy(m={m},delta={delta:g},eps={eps:g},alpha={alpha:g})",
            notes=notes,
        )
    raise InfeasibleParameters(
        MSG_HIGH_ENTROPY_INFEASIBLE.format(
            reason="; ".join(reasons) or f"нет n_out + d_out = {m}"
        )
    )

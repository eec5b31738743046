"""
Интерфейс командной строки: сборка, сэмплирование, расстояния, проверка,
замеры и проверка графов.
"""

import argparse
import csv
import dataclasses
import io
import json
import logging
import math
import time
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np
from pydantic import BaseModel, TypeAdapter

from .config import Settings, load_settings
from .constants import (
    BENCH_SAMPLER_DELTAS,
    BENCH_SAMPLER_EPS,
    BENCH_SAMPLER_TABLE_BITS,
    BENCH_SAMPLER_WIDTHS,
    BENCH_SUITES,
    BENCH_TAIL_EPS,
    BENCH_TAIL_SIZES,
    CLI_DESCRIPTION,
    MSG_BAD_DISTRIBUTION_TOKEN,
)
from .divergences import DivergenceKind, distance
from .domain import Distribution, FlatSource
from .errors import InfeasibleParameters, SpecError, UnsupportedWidth
from .expanders import power_walk
from .factory import Factory
from .models.schemas import (
    DistanceReport,
    DistributionModel,
    ExtractorSpec,
    FlatSourceModel,
    FunctionTableModel,
    SampleReport,
    SamplerSpec,
    SamplerVerifyEntry,
    SamplerVerifyReport,
    VerifyRequest,
)
from .samplers import FunctionClass, SamplerCheck, check_sampler_claim, estimate_mean
from .utils import Utils, configure_logging
from .verify import (
    SourceFamily,
    dpi_counterexample,
    inequality_suite,
    random_function_kl_tail,
    verify_claims,
    worst_flat_error,
)

_EXTRACTOR_SPEC = TypeAdapter(ExtractorSpec)
_SAMPLER_SPEC = TypeAdapter(SamplerSpec)


def dump_json(payload: Any) -> str:
    """JSON с отсортированными ключами: одинаковый вход даёт одинаковые байты."""
    if isinstance(payload, BaseModel):
        payload = payload.model_dump(mode="json", by_alias=True)
    return json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False)


def read_json(path: Path) -> Any:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def is_sampler_spec(data: Any) -> bool:
    return isinstance(data, dict) and str(data.get("kind", "")).endswith("_sampler")


def sampler_row(base: dict, check: Optional[SamplerCheck], status: str) -> dict:
    """Строка набора samplers; для пропущенных конфигураций поля проверки пусты."""
    claim = None if check is None else check.claim
    return {
        **base,
        "function_class": "" if claim is None else claim.function_class.value,
        "claim_delta": "" if claim is None else claim.delta,
        "claim_eps": "" if claim is None else claim.eps,
        "strong": "" if claim is None else claim.strong,
        "absolute": "" if claim is None else claim.absolute,
        "worst_rate": "" if check is None else check.worst_rate,
        "functions": "" if check is None else check.functions,
        "pass": "" if check is None else check.passed,
        "status": status,
    }


def parse_distribution(token: str) -> Distribution:
    """
    Разбирает распределение из командной строки.

    Args:
        token: "U_m", "point:m:hex" или путь к JSON (распределение или плоский источник)

    Returns:
        Distribution: Распределение

    Raises:
        SpecError: Если строку не удалось разобрать
    """
    if token.startswith("U_"):
        try:
            return Distribution.uniform(int(token[2:]))
        except ValueError as exc:
            raise SpecError(MSG_BAD_DISTRIBUTION_TOKEN.format(token=token)) from exc
    if token.startswith("point:"):
        parts = token.split(":")
        if len(parts) != 3:
            raise SpecError(MSG_BAD_DISTRIBUTION_TOKEN.format(token=token))
        width = int(parts[1])
        return Distribution.point(width, Utils.from_hex(parts[2], width))
    path = Path(token)
    if not path.is_file():
        raise SpecError(MSG_BAD_DISTRIBUTION_TOKEN.format(token=token))
    data = read_json(path)
    if isinstance(data, dict) and "support" in data:
        source = FlatSource.from_model(FlatSourceModel.model_validate(data))
        return source.to_distribution()
    return Distribution.from_model(DistributionModel.model_validate(data))


class DivextCli:
    """
    Разбор аргументов и обработчики подкоманд.
    Каждый обработчик возвращает код выхода: 0 - успех,
    1 - утверждение не подтвердилось.
    """

    def __init__(self):
        self.parser = argparse.ArgumentParser(
            prog="divext", description=CLI_DESCRIPTION
        )
        self.parser.add_argument("--config", type=Path, help="JSON-файл с настройками")
        self.parser.add_argument("--seed", type=int, help="64-битное семя")
        self.parser.add_argument("--cap", type=int, help="лимит перебора источников")
        self.parser.add_argument("--threads", type=int, help="число потоков")
        self.parser.add_argument("--output", type=Path, help="файл для отчёта")
        self.parser.add_argument("--log-path", type=Path)
        self.parser.add_argument("--log-level")
        self.commands = self.parser.add_subparsers(dest="command", required=True)
        self.setup_handlers()

    def setup_handlers(self):
        """Регистрирует подкоманды и их обработчики."""
        build = self.commands.add_parser(
            "build", help="собрать и вывести реестр утверждений"
        )
        build.add_argument("spec", type=Path)
        build.set_defaults(handler=self.on_build)

        sample = self.commands.add_parser(
            "sample", help="оценить среднее функции сэмплером"
        )
        sample.add_argument("spec", type=Path)
        sample.add_argument("--coins", help="монеты в hex (по умолчанию случайные)")
        sample.add_argument("--function", type=Path, help="JSON-таблица функции")
        sample.add_argument(
            "--class",
            dest="function_class",
            choices=[fc.value for fc in FunctionClass],
            default=FunctionClass.BOUNDED01.value,
        )
        sample.set_defaults(handler=self.on_sample)

        divergence = self.commands.add_parser(
            "divergence", help="расстояние между распределениями"
        )
        divergence.add_argument("kind")
        divergence.add_argument("p")
        divergence.add_argument("q")
        divergence.set_defaults(handler=self.on_divergence)

        verify = self.commands.add_parser(
            "verify", help="сверить утверждения с перебором"
        )
        verify.add_argument("spec", type=Path)
        verify.set_defaults(handler=self.on_verify)

        bench = self.commands.add_parser("bench", help="замеры в CSV")
        bench.add_argument("--suite", choices=BENCH_SUITES, default="claims")
        bench.add_argument("--spec", type=Path)
        bench.add_argument("--m", type=int, nargs="+", default=list(range(1, 10)))
        bench.add_argument("--trials", type=int, default=10_000)
        bench.add_argument("--samples", type=int, default=1_000)
        bench.set_defaults(handler=self.on_bench)

        graph = self.commands.add_parser(
            "graph-check", help="проверка графа-экспандера"
        )
        graph.add_argument("--graph", choices=("mgg", "xor"), default="mgg")
        graph.add_argument("--n", type=int, required=True)
        graph.add_argument("--walk", type=int, default=1)
        graph.set_defaults(handler=self.on_graph_check)

    def run(self, argv: Optional[Sequence[str]] = None) -> int:
        """
        Разбирает аргументы, загружает настройки и вызывает обработчик.

        Raises:
            SystemExit: С кодом 2 при ошибке в аргументах
        """
        args = self.parser.parse_args(argv)
        settings = load_settings(
            args.config,
            SEED=args.seed,
            ENUMERATION_CAP=args.cap,
            THREADS=args.threads,
            LOG_PATH=args.log_path,
            LOG_LEVEL=args.log_level,
        )
        configure_logging(log_path=str(settings.LOG_PATH), log_level=settings.LOG_LEVEL)
        logging.info("Команда %s, семя %d", args.command, settings.SEED)
        return args.handler(args, settings)

    def emit(self, args: argparse.Namespace, text: str) -> None:
        if args.output is None:
            print(text)
            return
        Utils.ensure_parent(args.output)
        args.output.write_text(text + "\n", encoding="utf-8")
        logging.info("Отчёт записан в %s", args.output)

    def on_build(self, args: argparse.Namespace, settings: Settings) -> int:
        """Собирает экстрактор или сэмплер и печатает реестр утверждений."""
        factory = Factory(settings)
        data = read_json(args.spec)
        if is_sampler_spec(data):
            report = factory.build_sampler(_SAMPLER_SPEC.validate_python(data)).report()
        else:
            spec = _EXTRACTOR_SPEC.validate_python(data)
            report = factory.build_extractor(spec).report()
        self.emit(args, dump_json(report))
        return 0

    def on_sample(self, args: argparse.Namespace, settings: Settings) -> int:
        """Оценивает среднее функции по точкам сэмплера для одних монет."""
        spec = _SAMPLER_SPEC.validate_python(read_json(args.spec))
        sampler = Factory(settings).build_sampler(spec)
        rng = Utils.rng(settings.SEED)
        if args.coins is None:
            coins = int(rng.integers(0, 1 << sampler.n, dtype=np.uint64))
        else:
            coins = Utils.from_hex(args.coins, sampler.n)
        if args.function is not None:
            table = FunctionTableModel.model_validate(read_json(args.function))
            if table.width != sampler.m or len(table.values) != 1 << table.width:
                raise SpecError(
                    f"Таблица функции должна быть задана на {{0,1}}^{sampler.m}"
                )
            f = np.asarray(table.values, dtype=np.float64)
        else:
            f = FunctionClass(args.function_class).sample(sampler.m, 1, rng)[0]
        estimate = estimate_mean(sampler, f, coins)
        true_mean = float(f.mean())
        report = SampleReport(
            points=[Utils.to_hex(p, sampler.m) for p in sampler.points(coins)],
            estimate=estimate,
            true_mean=true_mean,
            error=estimate - true_mean,
            claims=sampler.report().claims,
            seed=settings.SEED,
        )
        self.emit(args, dump_json(report))
        return 0

    def on_divergence(self, args: argparse.Namespace, settings: Settings) -> int:
        """Печатает нижнюю и верхнюю оценки расстояния."""
        kind = DivergenceKind.parse(args.kind)
        P, Q = parse_distribution(args.p), parse_distribution(args.q)
        result = distance(
            kind,
            P,
            Q,
            iterations=settings.SOLVER_ITERATIONS,
            restarts=settings.SOLVER_RESTARTS,
            seed=settings.SEED,
        )
        report = DistanceReport(
            kind=str(kind),
            lower=result.lower,
            upper=result.upper,
            exact=result.exact,
            seed=settings.SEED,
        )
        self.emit(args, dump_json(report))
        return 0

    def on_verify(self, args: argparse.Namespace, settings: Settings) -> int:
        """Сверяет утверждения с измерениями; код 1, если хоть одно не подтвердилось."""
        data = read_json(args.spec)
        factory = Factory(settings)
        if is_sampler_spec(data):
            sampler = factory.build_sampler(_SAMPLER_SPEC.validate_python(data))
            rng = Utils.rng(settings.SEED)
            checks = [
                check_sampler_claim(sampler, claim, settings.TEST_FUNCTIONS, rng)
                for claim in sampler.claims
            ]
            entries = [
                SamplerVerifyEntry(
                    claim=check.claim.to_model(),
                    worst_rate=check.worst_rate,
                    functions=check.functions,
                    passed=check.passed,
                )
                for check in checks
            ]
            report = SamplerVerifyReport(
                sampler=sampler.name,
                seed=settings.SEED,
                entries=entries,
                all_pass=all(entry.passed for entry in entries),
            )
        else:
            if not (isinstance(data, dict) and "extractor" in data):
                data = {"extractor": data}
            request = VerifyRequest.model_validate(data)
            ext = factory.build_extractor(request.extractor)
            family = SourceFamily.from_model(
                request.family,
                settings.ENUMERATION_CAP,
                settings.STRUCTURED_SAMPLES,
                settings.SEED,
            )
            kind = None if request.kind is None else DivergenceKind.parse(request.kind)
            report = verify_claims(
                ext,
                family,
                kind,
                request.k,
                request.strong,
                settings.THREADS,
                settings.SEED,
            )
        if not report.entries:
            logging.warning("Нет утверждений, подходящих под запрос")
        self.emit(args, dump_json(report))
        return 0 if report.all_pass else 1

    def on_bench(self, args: argparse.Namespace, settings: Settings) -> int:
        """Прогоняет выбранный набор замеров и печатает CSV."""
        rows = getattr(self, f"_bench_{args.suite}")(args, settings)
        rows = [{**row, "seed": settings.SEED} for row in rows]
        buffer = io.StringIO()
        fieldnames = list(rows[0]) if rows else []
        writer = csv.DictWriter(buffer, fieldnames=fieldnames, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        self.emit(args, buffer.getvalue().rstrip("\n"))
        return 0

    def _bench_claims(self, args: argparse.Namespace, settings: Settings) -> list[dict]:
        if args.spec is None:
            raise SpecError("Для набора claims нужен --spec")
        spec = _EXTRACTOR_SPEC.validate_python(read_json(args.spec))
        ext = Factory(settings).build_extractor(spec)
        family = SourceFamily(
            cap=settings.ENUMERATION_CAP,
            count=settings.STRUCTURED_SAMPLES,
            seed=settings.SEED,
        )
        rows = []
        for claim in ext.claims:
            if claim.k > ext.n:
                continue
            started = time.perf_counter()
            measured = worst_flat_error(
                ext,
                claim.kind,
                claim.k,
                family,
                claim.strength.strong,
                settings.THREADS,
            )
            rows.append(
                {
                    "extractor": ext.name,
                    "kind": str(claim.kind),
                    "k": claim.k,
                    "strength": claim.strength.value,
                    "claimed": claim.eps,
                    "measured": measured.worst,
                    "sources": measured.sources,
                    "label": measured.label,
                    "seconds": round(time.perf_counter() - started, 3),
                }
            )
        return rows

    def _bench_dpi(self, args: argparse.Namespace, settings: Settings) -> list[dict]:
        rows = dpi_counterexample(args.m, seed=settings.SEED)
        return [dataclasses.asdict(row) for row in rows]

    def _bench_tail(self, args: argparse.Namespace, settings: Settings) -> list[dict]:
        rows = []
        for size in BENCH_TAIL_SIZES:
            for eps in BENCH_TAIL_EPS:
                tail = random_function_kl_tail(
                    8, 2, 2, size, eps, args.trials, settings.SEED
                )
                row = {
                    "K": size,
                    "eps": eps,
                    **dataclasses.asdict(tail),
                    "pass": tail.passed,
                }
                rows.append(row)
        return rows

    def _bench_inequalities(
        self, args: argparse.Namespace, settings: Settings
    ) -> list[dict]:
        report = inequality_suite(
            args.samples,
            settings.SEED,
            solver_iterations=settings.SUITE_SOLVER_ITERATIONS,
        )
        return [
            {"inequality": name, **dataclasses.asdict(stat)}
            for name, stat in sorted(report.stats.items())
        ]

    def _bench_samplers(
        self, args: argparse.Namespace, settings: Settings
    ) -> list[dict]:
        factory = Factory(settings)
        rng = Utils.rng(settings.SEED)
        rows = []
        for kind, m in BENCH_SAMPLER_WIDTHS:
            for delta in BENCH_SAMPLER_DELTAS:
                for eps in BENCH_SAMPLER_EPS:
                    spec = _SAMPLER_SPEC.validate_python(
                        {"kind": kind, "m": m, "delta": delta, "eps": eps}
                    )
                    base = {"sampler": kind, "m": m, "delta": delta, "eps": eps}
                    try:
                        sampler = factory.build_sampler(spec)
                    except (InfeasibleParameters, UnsupportedWidth) as exc:
                        logging.warning(
                            "%s: delta=%g, eps=%g пропущен: %s", kind, delta, eps, exc
                        )
                        rows.append(sampler_row(base, None, "infeasible"))
                        continue
                    bits = sampler.n + math.ceil(math.log2(sampler.sample_count))
                    if bits > BENCH_SAMPLER_TABLE_BITS:
                        logging.warning(
                            "%s: таблица на %d бит не строится", sampler.name, bits
                        )
                        rows.append(sampler_row(base, None, "too_large"))
                        continue
                    if not sampler.claims:
                        rows.append(sampler_row(base, None, "no_claims"))
                    for claim in sampler.claims:
                        check = check_sampler_claim(
                            sampler, claim, settings.TEST_FUNCTIONS, rng
                        )
                        rows.append(sampler_row(base, check, "ok"))
        return rows

    def on_graph_check(self, args: argparse.Namespace, settings: Settings) -> int:
        """Печатает отчёт о регулярности, разметке, связности и lambda."""
        graph = Factory(settings).graphs(args.graph).base(args.n)
        if args.walk > 1:
            graph = power_walk(graph, args.walk)
        report = graph.report(settings.LAMBDA_MEASURE_CAP)
        self.emit(args, dump_json(report))
        return 0 if report.regular and report.consistently_labelled else 1

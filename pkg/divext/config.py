"""
Загрузка и валидация конфигурации из флагов командной строки и JSON-файла.
"""

import json
import os
from pathlib import Path
from typing import Any, Optional

from pydantic import Field, field_validator
from pydantic_settings import (
    BaseSettings,
    PydanticBaseSettingsSource,
    SettingsConfigDict,
)

from .constants import (
    DEFAULT_ENUMERATION_CAP,
    DEFAULT_LAMBDA_MEASURE_CAP,
    DEFAULT_MAX_SEED_WIDTH,
    DEFAULT_SEED,
    DEFAULT_SOLVER_ITERATIONS,
    DEFAULT_SOLVER_RESTARTS,
    DEFAULT_STRUCTURED_SAMPLES,
    DEFAULT_TEST_FUNCTIONS,
    DOMAIN_WIDTH_CAP,
)

_LOG_LEVELS = {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}


class Settings(BaseSettings):
    """Конфигурация приложения с валидацией полей."""

    # Логирование
    LOG_PATH: Path = Field(default=Path("logs/divext.log"))
    LOG_LEVEL: str = "INFO"

    # Воспроизводимость
    SEED: int = DEFAULT_SEED

    # Лимиты перебора и табулирования
    ENUMERATION_CAP: int = DEFAULT_ENUMERATION_CAP
    STRUCTURED_SAMPLES: int = DEFAULT_STRUCTURED_SAMPLES
    TABLE_WIDTH_CAP: int = DOMAIN_WIDTH_CAP
    MAX_SEED_WIDTH: int = DEFAULT_MAX_SEED_WIDTH
    LAMBDA_MEASURE_CAP: int = DEFAULT_LAMBDA_MEASURE_CAP

    # Решатель для субгауссовского расстояния
    SOLVER_ITERATIONS: int = DEFAULT_SOLVER_ITERATIONS
    SOLVER_RESTARTS: int = DEFAULT_SOLVER_RESTARTS
    SUITE_SOLVER_ITERATIONS: int = 0

    # Проверка сэмплеров
    TEST_FUNCTIONS: int = DEFAULT_TEST_FUNCTIONS

    # Параллелизм
    THREADS: int = Field(default_factory=lambda: os.cpu_count() or 1)

    @field_validator("LOG_LEVEL")
    def validate_log_level(cls, v: str) -> str:
        """Проверяет имя уровня логирования."""
        if v.upper() not in _LOG_LEVELS:
            raise ValueError(f"Неизвестный уровень логирования: {v}")
        return v.upper()

    @field_validator("SEED")
    def validate_seed(cls, v: int) -> int:
        """Семя должно помещаться в 64 бита."""
        if not 0 <= v < 2**64:
            raise ValueError("SEED должен лежать в диапазоне [0, 2^64)")
        return v

    @field_validator(
        "ENUMERATION_CAP",
        "STRUCTURED_SAMPLES",
        "TABLE_WIDTH_CAP",
        "MAX_SEED_WIDTH",
        "TEST_FUNCTIONS",
        "THREADS",
        "SOLVER_RESTARTS",
    )
    def validate_positive(cls, v: int) -> int:
        """Лимиты и счётчики должны быть положительными."""
        if v <= 0:
            raise ValueError("значение должно быть положительным")
        return v

    @field_validator(
        "SOLVER_ITERATIONS", "SUITE_SOLVER_ITERATIONS", "LAMBDA_MEASURE_CAP"
    )
    def validate_non_negative(cls, v: int) -> int:
        """Число итераций не может быть отрицательным."""
        if v < 0:
            raise ValueError("значение не может быть отрицательным")
        return v

    model_config = SettingsConfigDict(case_sensitive=True, extra="forbid")

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> tuple[PydanticBaseSettingsSource, ...]:
        # Только явные значения: переменные окружения не читаются
        return (init_settings,)


def load_settings(config_path: Optional[Path] = None, **overrides: Any) -> Settings:
    """
    Загружает настройки из JSON-файла и явных переопределений.

    Args:
        config_path: Путь к JSON-файлу с полями Settings (необязательно)
        **overrides: Значения, заданные флагами командной строки; None пропускается

    Returns:
        Settings: Объект с валидированными настройками
    """
    values: dict[str, Any] = {}
    if config_path is not None:
        values.update(json.loads(Path(config_path).read_text(encoding="utf-8")))
    values.update({key: value for key, value in overrides.items() if value is not None})
    return Settings(**values)

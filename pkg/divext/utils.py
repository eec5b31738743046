"""
Вспомогательные утилиты для проекта.
"""

import logging
from pathlib import Path
from typing import Union

import numpy as np

from .constants import MSG_BAD_HEX


class Utils:
    """Набор вспомогательных статических методов."""

    @staticmethod
    def ensure_parent(path: Path) -> None:
        """Создает родительскую директорию, если она не существует."""
        path.parent.mkdir(parents=True, exist_ok=True)

    @staticmethod
    def as_words(values: Union[int, np.ndarray]) -> np.ndarray:
        """Приводит целое или массив к массиву uint64."""
        return np.asarray(values, dtype=np.uint64)

    @staticmethod
    def concat_bits(
        high: Union[int, np.ndarray], low: Union[int, np.ndarray], low_width: int
    ) -> np.ndarray:
        """
        Склеивает две битовые строки: high идёт старшими битами.

        Args:
            high: Старшая часть
            low: Младшая часть
            low_width: Ширина младшей части в битах

        Returns:
            np.ndarray: Значения (high, low) в виде uint64
        """
        high = Utils.as_words(high)
        low = Utils.as_words(low)
        if low_width == 0:
            return high
        return (high << np.uint64(low_width)) | low

    @staticmethod
    def split_bits(
        value: Union[int, np.ndarray], low_width: int
    ) -> tuple[np.ndarray, np.ndarray]:
        """Разделяет значение на старшую часть и младшие low_width бит."""
        value = Utils.as_words(value)
        if low_width == 0:
            return value, np.zeros_like(value)
        mask = np.uint64((1 << low_width) - 1)
        return value >> np.uint64(low_width), value & mask

    @staticmethod
    def low_bits(value: Union[int, np.ndarray], width: int) -> np.ndarray:
        """Оставляет младшие width бит."""
        value = Utils.as_words(value)
        if width >= 64:
            return value
        return value & np.uint64((1 << width) - 1)

    @staticmethod
    def to_hex(value: int, width: int) -> str:
        """Кодирует битовую строку ширины width в hex, старшим битом вперёд."""
        digits = max(1, (width + 3) // 4)
        return format(int(value), f"0{digits}x")

    @staticmethod
    def from_hex(text: str, width: int) -> int:
        """Декодирует hex-строку и проверяет, что значение помещается в width бит."""
        cleaned = text.lower().removeprefix("0x")
        try:
            value = int(cleaned, 16)
        except ValueError as exc:
            raise ValueError(MSG_BAD_HEX.format(text=text, width=width)) from exc
        if value >= 1 << width:
            raise ValueError(MSG_BAD_HEX.format(text=text, width=width))
        return value

    @staticmethod
    def rng(seed: int) -> np.random.Generator:
        """Создает детерминированный генератор по 64-битному семени."""
        return np.random.default_rng(int(seed))


def configure_logging(log_path: str, log_level: str = "INFO") -> None:
    """
    Настраивает логирование с указанным путем и уровнем.

    Args:
        log_path: Путь к файлу лога
        log_level: Уровень логирования (DEBUG, INFO, WARNING, ERROR, CRITICAL)
    """
    # Создаем директорию для логов, если она не существует
    Utils.ensure_parent(Path(log_path))

    level = getattr(logging, log_level.upper(), logging.INFO)

    fmt = "%(asctime)s | %(levelname)s | %(name)s | %(message)s"
    logging.basicConfig(
        level=level,
        format=fmt,
        handlers=[
            logging.FileHandler(log_path, encoding="utf-8"),
            logging.StreamHandler(),
        ],
    )

    # Устанавливаем уровень для "шумных" логгеров
    logging.getLogger("hypothesis").setLevel(logging.WARNING)

"""
Иерархия исключений пакета.
"""


class DivextError(Exception):
    """Базовое исключение пакета divext."""


class WidthMismatch(DivextError, ValueError):
    """Аргументы заданы на доменах разной ширины."""


class InvalidDistribution(DivextError, ValueError):
    """Вектор вероятностей или носитель нарушают инварианты."""


class CountExceedsCap(DivextError, RuntimeError):
    """Полный перебор плоских источников превышает лимит."""

    def __init__(self, message: str, count: int, cap: int):
        super().__init__(message)
        self.count = count
        self.cap = cap


class UnsupportedWidth(DivextError, ValueError):
    """Ширина вне поддерживаемого диапазона (поле, граф, таблица)."""


class InfeasibleParameters(DivextError, ValueError):
    """Параметры не реализуемы в настольном масштабе."""


class MissingClaim(DivextError, ValueError):
    """У компонента нет утверждения нужного вида или силы."""


class PreconditionViolated(DivextError, ValueError):
    """Нарушено предусловие комбинатора."""


class SpecError(DivextError, ValueError):
    """Некорректная JSON-спецификация."""

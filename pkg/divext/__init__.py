"""
divext - экстракторы случайности, параметризованные дивергенциями,
сэмплеры и переборная проверка их гарантий на малых доменах.
"""

__version__ = "0.1.0"

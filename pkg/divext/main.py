"""
Точка входа в приложение divext.
"""

import logging
import sys
from typing import Optional, Sequence

from . import __version__
from .cli import DivextCli
from .constants import MSG_USAGE_ERROR
from .errors import DivextError


def main(argv: Optional[Sequence[str]] = None):
    """
    Основная точка входа в приложение.

    1. Разбирает аргументы командной строки
    2. Загружает настройки и настраивает логирование
    3. Выполняет подкоманду и завершает процесс с её кодом

    Коды выхода: 0 - успех, 1 - утверждение не подтвердилось или
    непредвиденная ошибка, 2 - ошибка в аргументах или спецификации.
    """
    try:
        cli = DivextCli()
        code = cli.run(argv)
        logging.info("divext v%s: команда завершена с кодом %d", __version__, code)
        sys.exit(code)

    except KeyboardInterrupt:
        logging.info("Получен сигнал прерывания, завершаем работу")
        sys.exit(0)
    except (DivextError, ValueError, OSError) as e:
        # Ошибки спецификации, валидации pydantic и чтения файлов
        logging.error("Некорректный запуск: %s", e)
        print(MSG_USAGE_ERROR.format(error=e), file=sys.stderr)
        sys.exit(2)
    except Exception as e:
        logging.exception("Критическая ошибка: %s", e)
        sys.exit(1)


if __name__ == "__main__":
    main()

"""
Строковые константы, шаблоны сообщений и числовые параметры по умолчанию.
"""

import math

# Лимит ширины домена для плотных векторов вероятностей
DOMAIN_WIDTH_CAP = 24

# Допуски
PROB_SUM_TOLERANCE = 1e-9
KL_IDENTITY_TOLERANCE = 1e-9
CLAIM_TOLERANCE = 1e-6

# Сетка параметров t для проверки производящей функции моментов
T_GRID_EXPONENTS = tuple(range(-6, 7))
MGF_TIGHTENING = 1e-3
SUBGAUSSIAN_VARIANCE_PROXY = 0.25  # sigma = 1/2
SUBEXPONENTIAL_T_LIMIT = 2.0  # |t| <= 1/sigma

# Граница спектрального расширения 8-регулярного графа Габбера-Галила
GABBER_GALIL_LAMBDA = 5 * math.sqrt(2) / 8
MGG_PADDED_DEGREE_WIDTH = 4

# Константа Чебышёва для попарно независимого сэмплера
CHEBYSHEV_FACTOR = 4

# Метки происхождения утверждений об ошибке
PROV_PERFECT = "perfect"
PROV_SEED_PREPEND = "seed-prepend"
PROV_LEFTOVER_HASH = "leftover-hash"
PROV_RENYI_MONOTONE = "renyi-monotonicity"
PROV_EXPANDER_MIXING = "expander-mixing"
PROV_EXPANDER_AVERAGE = "expander-mixing/average-case"
PROV_BLOCK = "block-composition"
PROV_REEXTRACT = "leftover-reextraction"
PROV_REEXTRACT_STRONG = "leftover-reextraction/strong"
PROV_ZIGZAG = "zigzag"
PROV_RRV = "entropy-loss-reduction"
PROV_TV_TO_KL = "tv-to-kl"
PROV_HIGH_ENTROPY = "high-entropy-assembly"
PROV_SAMPLER_FROM_EXTRACTOR = "sampler-from-extractor"
PROV_EXTRACTOR_FROM_SAMPLER = "extractor-from-sampler"
PROV_EXTRACTOR_FROM_SAMPLER_AVG = "extractor-from-sampler/average-case"
PROV_CHEBYSHEV = "pairwise-chebyshev"
PROV_SUBGAUSSIAN_SAMPLER = "subgaussian-sampler"
PROV_EXPANDER_SAMPLER = "expander-sampler"

# Сообщения об ошибках
MSG_WIDTH_MISMATCH = "Несовпадение ширин: {left} != {right}"
MSG_BAD_PROBS_LENGTH = "Длина вектора вероятностей {length} не равна 2^{width}"
MSG_NEGATIVE_PROBS = "Вектор вероятностей содержит отрицательные элементы"
MSG_BAD_PROBS_SUM = "Сумма вероятностей {total:.12g} отличается от 1"
MSG_WIDTH_TOO_LARGE = "Ширина {width} превышает допустимую {cap}"
MSG_BAD_SUPPORT = "Носитель плоского источника некорректен: {reason}"
MSG_COUNT_EXCEEDS_CAP = (
    "Число плоских источников C(2^{n}, {size}) = {count} превышает лимит {cap}; "
    "используйте структурированные или случайные источники"
)
MSG_BAD_TABLE = "Таблица функции задана не на всём домене: {length} != 2^{width}"
MSG_UNSUPPORTED_FIELD = "Поле GF(2^{n}) не поддерживается (допустимо 1..64)"
MSG_BAD_PARAMETER = "Недопустимое значение параметра {name}: {value}"
MSG_ODD_WIDTH = "Граф MGG строится только для чётного n, получено {n}"
MSG_SEED_TOO_LONG = (
    "Параметры требуют семя длины {d} бит (допустимо не более {cap}); "
    "ослабьте eps или delta"
)
MSG_INFEASIBLE = "Параметры невыполнимы в настольном масштабе: {reason}"
MSG_HIGH_ENTROPY_INFEASIBLE = (
    "KL-экстрактор для высокой min-энтропии не собирается: {reason}. "
    "Задайте \"graph\": \"xor\" или увеличьте MAX_SEED_WIDTH"
)
MSG_MISSING_CLAIM = (
    "У экстрактора {name} нет утверждения {kind} силы {strength} при k={k:g}"
)
MSG_NOT_INJECTIVE = (
    "Отображение (Ext, Waste) экстрактора {name} не помечено инъективным"
)
MSG_PRECONDITION = "Нарушено предусловие: {reason}"
MSG_UNKNOWN_KIND = "Неизвестный вид дивергенции: {text}"
MSG_TABLE_TOO_LARGE = (
    "Таблица экстрактора 2^{bits} значений превышает лимит 2^{cap}"
)
MSG_BAD_HEX = "Некорректная шестнадцатеричная строка {text!r} для ширины {width}"

# Шаблоны отчётов
REPORT_LOWER_BOUND_LABEL = "lower bound on worst case"
REPORT_EXACT_LABEL = "exact worst case"
REPORT_DPI_FLOOR_NOTE = (
    "порог 0.5*sqrt(m) выбран реализацией как регрессионный, а не взят из теории"
)

# Параметры по умолчанию для библиотечных функций (CLI берёт их из Settings)
DEFAULT_SEED = 20240601
DEFAULT_ENUMERATION_CAP = 20_000_000
DEFAULT_STRUCTURED_SAMPLES = 100_000
DEFAULT_MAX_SEED_WIDTH = 30
DEFAULT_LAMBDA_MEASURE_CAP = 12
DEFAULT_SOLVER_ITERATIONS = 500
DEFAULT_SOLVER_RESTARTS = 5
DEFAULT_TEST_FUNCTIONS = 200
BISECTION_STEPS = 50

# Командная строка
CLI_DESCRIPTION = (
    "Экстракторы, параметризованные дивергенциями: сборка, сэмплирование, "
    "вычисление расстояний и переборная проверка утверждений"
)
MSG_BAD_DISTRIBUTION_TOKEN = (
    "Не удалось разобрать распределение {token!r}: "
    "ожидается U_m, point:m:hex или путь к JSON"
)
MSG_USAGE_ERROR = "Ошибка: {error}"
BENCH_SUITES = ("claims", "dpi", "tail", "inequalities", "samplers")
BENCH_TAIL_SIZES = (16, 32, 64)
BENCH_TAIL_EPS = (0.5, 1.0, 1.5)
BENCH_SAMPLER_WIDTHS = (
    ("pairwise_sampler", 6),
    ("expander_sampler", 4),
    ("subgaussian_sampler", 2),
)
BENCH_SAMPLER_DELTAS = (0.25, 0.5, 1.0)
BENCH_SAMPLER_EPS = (0.5, 1.0, 2.0)
BENCH_SAMPLER_TABLE_BITS = 20

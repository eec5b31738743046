"""
Общие фикстуры: детерминированные генераторы и случайные распределения.
"""

import numpy as np
import pytest
from hypothesis import strategies as st

from divext.config import Settings
from divext.domain import Distribution
from divext.extractor import Extractor

TEST_SEED = 20240601


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(TEST_SEED)


@pytest.fixture
def settings(tmp_path) -> Settings:
    return Settings(
        LOG_PATH=tmp_path / "divext.log",
        SOLVER_ITERATIONS=0,
        SOLVER_RESTARTS=1,
        TEST_FUNCTIONS=20,
        THREADS=1,
    )


def truncation_extractor(n: int, d: int, m: int) -> Extractor:
    """Ext(x, s) = старшие m бит x: семя игнорируется."""

    def fn(x, s):
        return x >> np.uint64(n - m)

    return Extractor(n=n, d=d, m=m, fn=fn, name="truncate")


def random_distribution(
    width: int, rng: np.random.Generator, sparse: bool = False
) -> Distribution:
    """Распределение Дирихле; при sparse часть точек получает нулевую массу."""
    probs = rng.dirichlet(np.full(1 << width, 0.7))
    if sparse and width > 0:
        mask = rng.random(1 << width) < 0.5
        mask[int(np.argmax(probs))] = True
        probs = np.where(mask, probs, 0.0)
        probs /= probs.sum()
    return Distribution(width, probs)


@st.composite
def distributions(draw, min_width: int = 1, max_width: int = 4):
    """Стратегия hypothesis: распределение на {0,1}^m из весов без нулевой суммы."""
    width = draw(st.integers(min_width, max_width))
    weights = draw(
        st.lists(
            st.one_of(st.just(0.0), st.floats(1e-6, 1.0)),
            min_size=1 << width,
            max_size=1 << width,
        ).filter(lambda w: sum(w) > 1e-3)
    )
    probs = np.asarray(weights) / np.sum(weights)
    return Distribution(width, probs)


@st.composite
def distribution_pairs(draw, min_width: int = 1, max_width: int = 4):
    """Пара распределений одной ширины."""
    width = draw(st.integers(min_width, max_width))
    P = draw(distributions(width, width))
    Q = draw(distributions(width, width))
    return P, Q

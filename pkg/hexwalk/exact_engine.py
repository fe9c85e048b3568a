"""Точная эволюция распределения состояний по прямым уравнениям Колмогорова.

Модуль служит эталоном (оракулом) для всех аналитических формул: распределение в момент n
хранится разреженным словарём (j, k) -> вероятность, класс вершин определяется чётностью n.
Поддерживаются два режима арифметики: точные дроби ("rational") и float64 ("float").
"""

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from logging import getLogger
from math import fsum, sqrt
from types import MappingProxyType
from typing import Callable, Dict, Iterator, List, Mapping, NamedTuple, Optional, Tuple

import numpy as np

from config import Config
from hexwalk.errors import InvalidParameterError, ResourceLimitError
from hexwalk.lattice import (
    NEIGHBOR_SHIFTS,
    LatticeVertex,
    Mode,
    Number,
    StepProbabilities,
    parity,
    to_cartesian,
)

logger = getLogger(__name__)

State = Tuple[int, int]
MODES = ("rational", "float")


@dataclass(frozen=True)
class Distribution:
    """Распределение состояний p_{j,k}(n) в момент n.

    Хранятся только положительные вероятности; класс вершин равен parity(n).
    """

    n: int
    mass: Mapping[State, Number] = field(repr=False)
    mode: Mode = "rational"

    def __post_init__(self):
        if self.mode not in MODES:
            raise InvalidParameterError(f"unknown arithmetic mode {self.mode!r}")
        if self.n < 0:
            raise InvalidParameterError(f"time n = {self.n} must be nonnegative")
        object.__setattr__(self, "mass", MappingProxyType(dict(self.mass)))

    @property
    def parity(self) -> int:
        return parity(self.n)

    def total(self) -> Number:
        """Суммарная масса (точно в режиме дробей, через fsum в режиме float)."""
        if self.mode == "rational":
            return sum(self.mass.values(), Fraction(0))
        return fsum(self.mass.values())

    def probability(self, j: int, k: int) -> Number:
        """Вероятность состояния (j, k); ноль вне носителя."""
        return self.mass.get((j, k), Fraction(0) if self.mode == "rational" else 0.0)

    def items(self) -> List[Tuple[State, Number]]:
        """Пары ((j, k), p), упорядоченные по (j, k)."""
        return sorted(self.mass.items())

    def vertices(self) -> Iterator[LatticeVertex]:
        for j, k in sorted(self.mass):
            yield LatticeVertex(j, k, self.parity)

    def as_float(self) -> Dict[State, float]:
        return {state: float(p) for state, p in self.mass.items()}

    def __len__(self) -> int:
        return len(self.mass)


class CartesianMoments(NamedTuple):
    """Первые и вторые моменты декартовых координат (X_n, Y_n)."""

    mean: Tuple[float, float]
    variance: Tuple[float, float]
    covariance: float


def _zero(mode: Mode) -> Number:
    return Fraction(0) if mode == "rational" else 0.0


def initial(origin: State = (0, 0), mode: Mode = "rational") -> Distribution:
    """Начальное распределение: частица в вершине origin в момент 0.

    :param origin: начальная вершина (j0, k0), по умолчанию начало координат;
    :param mode: режим арифметики.
    :return: распределение {origin: 1} при n = 0.
    """
    one = Fraction(1) if mode == "rational" else 1.0
    return Distribution(n=0, mass={tuple(origin): one}, mode=mode)


def step(distribution: Distribution, q: StepProbabilities) -> Distribution:
    """Один шаг прямых уравнений Колмогорова.

    Масса каждого состояния переносится в трёх соседей с весами q[i][r], i = parity(n).
    Нулевые вклады отбрасываются.

    :param distribution: распределение в момент n;
    :param q: модель шага.
    :return: распределение в момент n + 1.
    """
    table = q.converted(distribution.mode)
    i = distribution.parity
    weights = table[i]
    targets: Dict[State, Number] = defaultdict(lambda: _zero(distribution.mode))
    for (j, k), p in distribution.mass.items():
        for r, (dj, dk) in enumerate(NEIGHBOR_SHIFTS[i]):
            if weights[r]:
                targets[(j + dj, k + dk)] += p * weights[r]
    mass = {state: p for state, p in targets.items() if p > 0}
    return Distribution(n=distribution.n + 1, mass=mass, mode=distribution.mode)


def check_steps(n: int):
    """Проверка момента времени: 0 <= n <= Config.engine_max_steps."""
    if n < 0:
        raise InvalidParameterError(f"time n = {n} must be nonnegative")
    if n > Config.engine_max_steps:
        raise ResourceLimitError(f"n = {n} exceeds the exact engine cap {Config.engine_max_steps}")


def evolve(
    q: StepProbabilities,
    n: int,
    mode: Optional[Mode] = None,
    origin: State = (0, 0),
) -> Distribution:
    """Распределение в момент n, полученное n-кратным применением step.

    :param q: модель шага;
    :param n: число шагов;
    :param mode: режим арифметики; по умолчанию - режим модели;
    :param origin: начальная вершина.
    :return: распределение p_{j,k}(n).
    """
    check_steps(n)
    mode = mode or q.mode
    distribution = initial(origin=origin, mode=mode)
    for _ in range(n):
        distribution = step(distribution, q)
    logger.debug(f"evolve: n={n} mode={mode} support={len(distribution)}")
    return distribution


@lru_cache(maxsize=64)
def cached_evolve(q: StepProbabilities, n: int, mode: Mode) -> Distribution:
    """Кешированный вариант evolve для повторных запросов оракула."""
    return evolve(q, n, mode=mode)


def evolve_log(q: StepProbabilities, n: int) -> Dict[State, float]:
    """Эволюция в логарифмической шкале: log p_{j,k}(n) без потери исчезающе малых масс.

    Вклады предшественников складываются через logaddexp, поэтому вероятности порядка
    exp(-1000) остаются представимыми.

    :param q: модель шага;
    :param n: число шагов.
    :return: словарь (j, k) -> log p_{j,k}(n).
    """
    check_steps(n)
    table = q.converted("float")
    states = np.zeros((1, 2), dtype=np.int64)
    log_mass = np.zeros(1)
    for t in range(n):
        i = t % 2
        shifted_states = []
        shifted_mass = []
        for r, (dj, dk) in enumerate(NEIGHBOR_SHIFTS[i]):
            if table[i][r] > 0:
                shifted_states.append(states + np.array([dj, dk], dtype=np.int64))
                shifted_mass.append(log_mass + np.log(table[i][r]))
        candidates = np.concatenate(shifted_states)
        states, index = np.unique(candidates, axis=0, return_inverse=True)
        log_mass = np.full(len(states), -np.inf)
        np.logaddexp.at(log_mass, index.reshape(-1), np.concatenate(shifted_mass))
    logger.debug(f"evolve_log: n={n} support={len(states)}")
    return {(int(j), int(k)): float(value) for (j, k), value in zip(states, log_mass)}


def cartesian_moments(distribution: Distribution, a: Number) -> CartesianMoments:
    """Среднее, дисперсии и ковариация декартовых координат по точному распределению.

    Моменты индексов (j, k) считаются в режиме распределения (точно для дробей), затем
    переводятся в декартовы координаты линейным отображением решётки.

    :param distribution: распределение в момент n;
    :param a: длина ребра.
    :return: моменты (X_n, Y_n).
    """
    items = list(distribution.mass.items())
    if distribution.mode == "rational":
        mean_j = sum((p * j for (j, _), p in items), Fraction(0))
        mean_k = sum((p * k for (_, k), p in items), Fraction(0))
        var_j = sum((p * (j - mean_j) ** 2 for (j, _), p in items), Fraction(0))
        var_k = sum((p * (k - mean_k) ** 2 for (_, k), p in items), Fraction(0))
        cov_jk = sum((p * (j - mean_j) * (k - mean_k) for (j, k), p in items), Fraction(0))
    else:
        mean_j = fsum(p * j for (j, _), p in items)
        mean_k = fsum(p * k for (_, k), p in items)
        var_j = fsum(p * (j - mean_j) ** 2 for (j, _), p in items)
        var_k = fsum(p * (k - mean_k) ** 2 for (_, k), p in items)
        cov_jk = fsum(p * (j - mean_j) * (k - mean_k) for (j, k), p in items)
    a = float(a)
    root3 = sqrt(3.0)
    # x = (3/2)a·j + i·a, y = (√3/2)a·(j + 2k)
    mean_x = 1.5 * a * float(mean_j) + distribution.parity * a
    mean_y = 0.5 * root3 * a * float(mean_j + 2 * mean_k)
    var_x = 2.25 * a * a * float(var_j)
    var_y = 0.75 * a * a * float(var_j + 4 * cov_jk + 4 * var_k)
    cov_xy = 0.75 * root3 * a * a * float(var_j + 2 * cov_jk)
    return CartesianMoments(mean=(mean_x, mean_y), variance=(var_x, var_y), covariance=cov_xy)


def expectation(distribution: Distribution, a: Number, func: Callable[[float, float], float]) -> float:
    """Математическое ожидание func(X_n, Y_n) по точному распределению.

    :param distribution: распределение в момент n;
    :param a: длина ребра;
    :param func: функция декартовых координат.
    :return: сумма func(x, y)·p по носителю.
    """
    terms = []
    for vertex in distribution.vertices():
        point = to_cartesian(vertex, a)
        terms.append(func(point.x, point.y) * float(distribution.mass[(vertex.j, vertex.k)]))
    return fsum(terms)

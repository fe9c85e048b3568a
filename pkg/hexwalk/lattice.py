"""Геометрия гексагональной решётки: классы вершин, чётность, соседи и вероятности шага.

Вершина адресуется целыми (j, k) и классом i: декартов образ вершины
((3/2)a·j + i·a, (√3/2)a·j + √3·a·k). Из вершины класса i частица уходит в вершину
противоположного класса по одному из трёх направлений r со смещением
a·(cos(r·2π/3 + iπ), sin(r·2π/3 + iπ)).
"""

from dataclasses import dataclass
from fractions import Fraction
from logging import getLogger
from math import cos, fsum, isfinite, pi, sin, sqrt
from typing import Any, Dict, List, Literal, NamedTuple, Sequence, Tuple, Union

from hexwalk.errors import InvalidParameterError

logger = getLogger(__name__)

Number = Union[int, float, Fraction]
Mode = Literal["rational", "float"]

SQRT3 = sqrt(3.0)
ROW_SUM_TOLERANCE = 1e-15

# Сдвиг индексов (dj, dk) по направлению r = 0, 1, 2 для вершины класса i.
NEIGHBOR_SHIFTS: Dict[int, Tuple[Tuple[int, int], ...]] = {
    0: ((0, 0), (-1, 1), (-1, 0)),
    1: ((0, 0), (1, -1), (1, 0)),
}


class CartesianPoint(NamedTuple):
    """Точка плоскости (x, y) в единицах длины."""

    x: float
    y: float


class LatticeVertex(NamedTuple):
    """Вершина решётки: целые координаты (j, k) и класс i ∈ {0, 1}."""

    j: int
    k: int
    i: int


def _as_number(value: Any) -> Number:
    if isinstance(value, (Fraction, float)):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value) if "/" in value else float(value)
    return float(value)


@dataclass(frozen=True)
class StepProbabilities:
    """Вероятности одного шага q[i][r] и длина ребра a.

    Строка i соответствует классу вершины, столбец r - направлению шага. Если все
    вероятности заданы дробями (Fraction или int), модель точная (режим "rational"),
    иначе все вероятности приводятся к float.
    """

    q: Tuple[Tuple[Number, Number, Number], Tuple[Number, Number, Number]]
    a: Number = 1

    def __post_init__(self):
        if len(self.q) != 2 or any(len(row) != 3 for row in self.q):
            raise InvalidParameterError("q must be a 2x3 table of probabilities")
        values = [_as_number(value) for row in self.q for value in row]
        if any(isinstance(value, float) for value in values):
            values = [float(value) for value in values]
        rows = (tuple(values[:3]), tuple(values[3:]))
        for i, row in enumerate(rows):
            for r, value in enumerate(row):
                if isinstance(value, float) and not isfinite(value):
                    raise InvalidParameterError(f"q[{i}][{r}] is not finite")
                if not 0 <= value <= 1:
                    raise InvalidParameterError(f"q[{i}][{r}] = {value} is outside [0, 1]")
            if isinstance(row[0], Fraction):
                if sum(row) != 1:
                    raise InvalidParameterError(f"row {i} sums to {sum(row)}, expected exactly 1")
            elif abs(fsum(row) - 1.0) > ROW_SUM_TOLERANCE:
                raise InvalidParameterError(f"row {i} sums to {fsum(row)!r}, expected 1")
        a = _as_number(self.a)
        if not (isfinite(float(a)) and a > 0):
            raise InvalidParameterError(f"lattice spacing a = {self.a} must be positive")
        object.__setattr__(self, "q", rows)
        object.__setattr__(self, "a", a)

    @classmethod
    def from_rows(cls, q0: Sequence[Any], q1: Sequence[Any], a: Any = 1) -> "StepProbabilities":
        """Построение модели по двум строкам вероятностей.

        :param q0: вероятности шага из вершины класса 0 (направления 0, 1, 2);
        :param q1: вероятности шага из вершины класса 1;
        :param a: длина ребра решётки.
        :return: модель шага.
        """
        return cls(q=(tuple(q0), tuple(q1)), a=a)

    @classmethod
    def uniform(cls, a: Any = 1, exact: bool = True) -> "StepProbabilities":
        """Симметричная модель q[i][r] = 1/3.

        :param a: длина ребра решётки;
        :param exact: хранить вероятности дробями.
        :return: модель шага.
        """
        third = Fraction(1, 3) if exact else 1.0 / 3.0
        return cls(q=((third,) * 3, (third,) * 3), a=a)

    @property
    def mode(self) -> Mode:
        """Режим арифметики, который модель задаёт по умолчанию."""
        return "rational" if isinstance(self.q[0][0], Fraction) else "float"

    @property
    def exact(self) -> bool:
        return self.mode == "rational"

    def converted(self, mode: Mode) -> Tuple[Tuple[Number, ...], Tuple[Number, ...]]:
        """Таблица вероятностей в нужном режиме арифметики.

        :param mode: "rational" (точное двоичное значение float переводится в дробь) или "float".
        :return: таблица 2x3.
        """
        cast = Fraction if mode == "rational" else float
        return tuple(tuple(cast(value) for value in row) for row in self.q)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "q0": [str(value) for value in self.q[0]],
            "q1": [str(value) for value in self.q[1]],
            "a": str(self.a),
        }


def parity(n: int) -> int:
    """Класс вершин, занимаемых в момент n: (1 - (-1)^n) / 2.

    :param n: неотрицательный момент времени.
    :return: 0 для чётного n, 1 для нечётного.
    """
    if n < 0:
        raise InvalidParameterError(f"time n = {n} must be nonnegative")
    return n % 2


def to_cartesian(vertex: LatticeVertex, a: Number) -> CartesianPoint:
    """Декартовы координаты вершины.

    :param vertex: вершина решётки;
    :param a: длина ребра.
    :return: точка ((3/2)a·j + i·a, (√3/2)a·j + √3·a·k).
    """
    if not a > 0:
        raise InvalidParameterError(f"lattice spacing a = {a} must be positive")
    a = float(a)
    return CartesianPoint(1.5 * a * vertex.j + vertex.i * a, 0.5 * SQRT3 * a * vertex.j + SQRT3 * a * vertex.k)


def neighbors(vertex: LatticeVertex) -> List[Tuple[LatticeVertex, int]]:
    """Три соседа вершины вместе с направлением шага, ведущего к ним.

    :param vertex: вершина решётки.
    :return: список пар (сосед, направление r); соседи принадлежат противоположному классу.
    """
    return [
        (LatticeVertex(vertex.j + dj, vertex.k + dk, 1 - vertex.i), r)
        for r, (dj, dk) in enumerate(NEIGHBOR_SHIFTS[vertex.i])
    ]


def displacement(i: int, r: int, a: Number = 1) -> CartesianPoint:
    """Смещение частицы при шаге направления r из вершины класса i.

    :param i: класс вершины;
    :param r: направление шага;
    :param a: длина ребра.
    :return: вектор a·(cos(r·2π/3 + iπ), sin(r·2π/3 + iπ)).
    """
    angle = r * 2.0 * pi / 3.0 + i * pi
    return CartesianPoint(float(a) * cos(angle), float(a) * sin(angle))


def displacement_table(a: Number = 1) -> Tuple[Tuple[CartesianPoint, ...], Tuple[CartesianPoint, ...]]:
    """Таблица смещений [i][r], вычисленная по индексным сдвигам соседей.

    :param a: длина ребра.
    :return: таблица 2x3 декартовых смещений.
    """
    table = []
    for i in (0, 1):
        origin = to_cartesian(LatticeVertex(0, 0, i), a)
        row = []
        for target, _ in neighbors(LatticeVertex(0, 0, i)):
            point = to_cartesian(target, a)
            row.append(CartesianPoint(point.x - origin.x, point.y - origin.y))
        table.append(tuple(row))
    return table[0], table[1]

"""Вероятности состояний в замкнутой форме через терминирующий гипергеометрический ряд Гаусса.

В чётный момент 2m вероятность p_{j,k}(2m) равна конечной сумме по t произведений
биномиальных коэффициентов, степеней q[i][r] и 2F1(A, B; c; ρ), где
ρ = q01·q11 / (q02·q12). Область (j, k) разбита на четыре непересекающихся квадранта.
Нечётные моменты получаются одним шагом прямого уравнения из чётного момента.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from logging import getLogger
from math import fsum, isclose
from typing import Dict, Iterator, List, Literal, Optional, Tuple

from hexwalk.errors import InvalidParameterError, UnsupportedParametersError
from hexwalk.exact_engine import Distribution, cached_evolve, check_steps
from hexwalk.lattice import NEIGHBOR_SHIFTS, Mode, Number, StepProbabilities

logger = getLogger(__name__)

Source = Literal["closed-form", "oracle"]

# Порядок показателей степеней в слагаемом: q00, q10, q01, q02, q12, q11.
_POWER_INDEX = ((0, 0), (1, 0), (0, 1), (0, 2), (1, 2), (1, 1))


@dataclass(frozen=True)
class HypergeometricArgs:
    """Параметры 2F1(A, B; c; z) с неположительным целым верхним параметром."""

    A: int
    B: int
    c_denom: int
    z: Number

    def __post_init__(self):
        if self.A > 0 and self.B > 0:
            raise UnsupportedParametersError(
                f"2F1({self.A}, {self.B}; {self.c_denom}; z) does not terminate"
            )
        if self.c_denom < 1:
            raise UnsupportedParametersError(f"lower parameter c = {self.c_denom} must be at least 1")

    @property
    def order(self) -> int:
        """Номер последнего ненулевого слагаемого T = min(-A, -B) по неположительным параметрам."""
        return min(-value for value in (self.A, self.B) if value <= 0)


@dataclass(frozen=True)
class RhoParam:
    """Аргумент гипергеометрического ряда ρ = q01·q11 / (q02·q12)."""

    rho: Number


@dataclass(frozen=True)
class ProbabilityValue:
    """Вероятность состояния вместе с источником значения."""

    value: Number
    source: Source = "closed-form"

    def __float__(self) -> float:
        return float(self.value)


@dataclass(frozen=True)
class SymmetryCase:
    """Результат проверки одного случая соотношений симметрии."""

    case: str
    applicable: bool
    parameter: Optional[Number] = None
    rho: Optional[Number] = None
    max_violation: Optional[float] = None


@dataclass(frozen=True)
class SymmetryReport:
    """Отчёт check_symmetry по всем трём случаям."""

    m: int
    mode: Mode
    cases: Tuple[SymmetryCase, ...] = field(default_factory=tuple)
    odd: bool = False

    def to_dict(self) -> Dict:
        return {
            "m": self.m,
            "mode": self.mode,
            "odd": self.odd,
            "cases": [
                {
                    "case": case.case,
                    "applicable": case.applicable,
                    "parameter": None if case.parameter is None else str(case.parameter),
                    "rho": None if case.rho is None else str(case.rho),
                    "max_violation": case.max_violation,
                }
                for case in self.cases
            ],
        }


def gauss_2f1_terminating(args: HypergeometricArgs) -> Number:
    """Терминирующий ряд 2F1(A, B; c; z) = Σ (A)_t (B)_t / ((c)_t t!) z^t, t = 0..T.

    Слагаемые обновляются рекуррентно внутри цикла; для дробного z сумма точная,
    для float суммирование компенсированное (fsum).

    :param args: параметры ряда.
    :return: значение многочлена.
    """
    z = args.z
    exact = isinstance(z, (Fraction, int))
    term = Fraction(1) if exact else 1.0
    terms = [term]
    for t in range(args.order):
        term = term * (args.A + t) * (args.B + t) / ((args.c_denom + t) * (t + 1)) * z
        terms.append(term)
    if exact:
        return sum(terms, Fraction(0))
    return fsum(terms)


def rho(q: StepProbabilities, mode: Optional[Mode] = None) -> Optional[RhoParam]:
    """Параметр ρ модели.

    :param q: модель шага;
    :param mode: режим арифметики.
    :return: RhoParam или None, если q02·q12 = 0.
    """
    table = q.converted(mode or q.mode)
    denominator = table[0][2] * table[1][2]
    if denominator == 0:
        return None
    return RhoParam(rho=table[0][1] * table[1][1] / denominator)


def _binomial(n: int, r: int) -> int:
    """Биномиальный коэффициент произведением r сомножителей (ноль вне 0 <= r <= n)."""
    if r < 0 or n < 0 or r > n:
        return 0
    value = 1
    for s in range(r):
        value = value * (n - s) // (s + 1)
    return value


def _terms(j: int, k: int, m: int) -> Iterator[Tuple[Tuple[int, int, int], Tuple[int, ...], Tuple[int, int, int]]]:
    """Слагаемые суммы для (j, k) в момент 2m.

    Каждое слагаемое: тройка (t, u, C) для коэффициента C(m, t)·C(m, u)·C, показатели
    степеней в порядке _POWER_INDEX и параметры (A, B, c) ряда 2F1. Индексы t и u растут
    вместе с шагом суммы.
    """
    if 0 <= j <= m and -m <= k <= 0:
        for t in range(0, m - j + 1):
            yield (t, j + t, _binomial(j + t, -k)), (m - t, m - j - t, 0, t, j + k + t, -k), (-j - k - t, -t, 1 - k)
    elif 0 <= j <= m and 1 <= k <= m - j:
        for t in range(k, m - j + 1):
            yield (t, j + t, _binomial(t, k)), (m - t, m - j - t, k, t - k, j + t, 0), (-j - t, k - t, 1 + k)
    elif -m <= j <= -1 and -m - j <= k <= -1:
        for t in range(-k, m + j + 1):
            yield (t, -j + t, _binomial(t, -k)), (m + j - t, m - t, 0, -j + t, k + t, -k), (j - t, -k - t, 1 - k)
    elif -m <= j <= -1 and 0 <= k <= m:
        for t in range(0, m + j + 1):
            yield (t, -j + t, _binomial(-j + t, k)), (m - t, m + j - t, k, -j - k + t, t, 0), (j + k - t, -t, 1 + k)


def _closed_form_even(j: int, k: int, m: int, table, z: Number, mode: Mode) -> Number:
    terms = []
    # C(m, t) и C(m, u) ведутся рекуррентно: t и u на каждом шаге увеличиваются на 1
    binomial_t = binomial_u = None
    for (t, upper, third), powers, (A, B, c) in _terms(j, k, m):
        if binomial_t is None:
            binomial_t, binomial_u = _binomial(m, t), _binomial(m, upper)
        else:
            binomial_t = binomial_t * (m - t + 1) // t
            binomial_u = binomial_u * (m - upper + 1) // upper
        coefficient = binomial_t * binomial_u * third
        if coefficient == 0:
            continue
        value = Fraction(coefficient) if mode == "rational" else float(coefficient)
        for (i, r), power in zip(_POWER_INDEX, powers):
            if power:
                value *= table[i][r] ** power
        if value == 0:
            continue
        terms.append(value * gauss_2f1_terminating(HypergeometricArgs(A, B, c, z)))
    if mode == "rational":
        return sum(terms, Fraction(0))
    return fsum(terms)


def state_probability_even(
    j: int,
    k: int,
    m: int,
    q: StepProbabilities,
    mode: Optional[Mode] = None,
) -> ProbabilityValue:
    """Вероятность p_{j,k}(2m) в замкнутой форме.

    Если q02·q12 = 0 (ρ не определён), значение берётся у точного оракула и помечается
    источником "oracle". Состояния вне четырёх областей имеют нулевую вероятность.

    :param j: индекс j;
    :param k: индекс k;
    :param m: половина момента времени, m >= 1;
    :param q: модель шага;
    :param mode: режим арифметики.
    :return: вероятность с указанием источника.
    """
    if m < 1:
        raise InvalidParameterError(f"m = {m} must be at least 1")
    mode = mode or q.mode
    rho_param = rho(q, mode)
    if rho_param is None:
        logger.debug(f"rho undefined for {q.to_dict()}, answering p[{j},{k}]({2 * m}) from the oracle")
        return ProbabilityValue(value=cached_evolve(q, 2 * m, mode).probability(j, k), source="oracle")
    value = _closed_form_even(j, k, m, q.converted(mode), rho_param.rho, mode)
    return ProbabilityValue(value=value)


def state_probability(
    j: int,
    k: int,
    n: int,
    q: StepProbabilities,
    mode: Optional[Mode] = None,
) -> ProbabilityValue:
    """Вероятность p_{j,k}(n) для любого n >= 0.

    Для нечётного n = 2m + 1 значение собирается из не более чем трёх предшественников
    в момент 2m по чётной ветви прямого уравнения.

    :param j: индекс j;
    :param k: индекс k;
    :param n: момент времени;
    :param q: модель шага;
    :param mode: режим арифметики.
    :return: вероятность с указанием источника.
    """
    if n < 0:
        raise InvalidParameterError(f"time n = {n} must be nonnegative")
    mode = mode or q.mode
    one, zero = (Fraction(1), Fraction(0)) if mode == "rational" else (1.0, 0.0)
    if n == 0:
        return ProbabilityValue(value=one if (j, k) == (0, 0) else zero)
    m = n // 2
    if n % 2 == 0:
        return state_probability_even(j, k, m, q, mode)
    table = q.converted(mode)
    terms = []
    source: Source = "closed-form"
    for r, (dj, dk) in enumerate(NEIGHBOR_SHIFTS[0]):
        if table[0][r] == 0:
            continue
        pj, pk = j - dj, k - dk
        if m == 0:
            previous = ProbabilityValue(value=one if (pj, pk) == (0, 0) else zero)
        else:
            previous = state_probability_even(pj, pk, m, q, mode)
        if previous.source == "oracle":
            source = "oracle"
        terms.append(previous.value * table[0][r])
    value = sum(terms, zero) if mode == "rational" else fsum(terms)
    return ProbabilityValue(value=value, source=source)


def odd_time_support_bounds(m: int) -> List[Tuple[int, int, int]]:
    """Диапазоны положительных вероятностей в момент 2m + 1: тройки (j, k_min, k_max)."""
    bounds = [(j, -m, m - j) for j in range(0, m + 1)]
    bounds += [(j, -m - j - 1, m + 1) for j in range(-m - 1, 0)]
    return bounds


def closed_form_distribution(n: int, q: StepProbabilities, mode: Optional[Mode] = None) -> Tuple[Distribution, Source]:
    """Распределение в момент n, вычисленное по замкнутой форме.

    :param n: момент времени;
    :param q: модель шага;
    :param mode: режим арифметики.
    :return: распределение и источник значений ("oracle", если хотя бы одно значение взято у оракула).
    """
    check_steps(n)
    mode = mode or q.mode
    source: Source = "closed-form"
    mass = {}
    reach = n // 2 + 1
    for j in range(-reach, reach + 1):
        for k in range(-reach, reach + 2):
            result = state_probability(j, k, n, q, mode)
            if result.source == "oracle":
                source = "oracle"
            if result.value > 0:
                mass[(j, k)] = result.value
    return Distribution(n=n, mass=mass, mode=mode), source


def _equal(left: Number, right: Number, mode: Mode) -> bool:
    if mode == "rational":
        return left == right
    return isclose(left, right, rel_tol=1e-12, abs_tol=1e-15)


def check_symmetry(
    q: StepProbabilities,
    m: int,
    mode: Optional[Mode] = None,
    odd: bool = False,
) -> SymmetryReport:
    """Проверка соотношений симметрии вероятностей в момент 2m.

    (i) p_{j,k} = ξ^{2k+j} p_{j,-j-k} при q01/q02 = q12/q11 = ξ;
    (ii) p_{j,k} = δ^{2k+j} p_{-j,-k} при q01 = q12, q11 = q02, δ = q01/q11;
    (iii) p_{j,k} = p_{-j,j+k} при тех же условиях, что и (ii).
    Неприменимые случаи помечаются applicable=False. При odd=True те же соотношения
    вычисляются в момент 2m + 1 на квадрате -m-1 <= j, k <= m+1 (только для отчёта).

    :param q: модель шага;
    :param m: половина момента времени, m >= 1;
    :param mode: режим арифметики;
    :param odd: проверять момент 2m + 1 вместо 2m.
    :return: отчёт с максимальным нарушением по -m <= j, k <= m для каждого случая.
    """
    if m < 1:
        raise InvalidParameterError(f"m = {m} must be at least 1")
    mode = mode or q.mode
    table = q.converted(mode)
    q00, q01, q02 = table[0]
    q10, q11, q12 = table[1]
    cache: Dict[Tuple[int, int], Number] = {}
    reach = m + int(odd)

    def p(j: int, k: int) -> Number:
        if (j, k) not in cache:
            cache[(j, k)] = state_probability(j, k, 2 * m + int(odd), q, mode).value
        return cache[(j, k)]

    def violation(left_right) -> float:
        worst = 0.0
        for j in range(-reach, reach + 1):
            for k in range(-reach, reach + 1):
                left, right = left_right(j, k)
                worst = max(worst, abs(float(left - right)))
        return worst

    def scaled(parameter: Number, image):
        # p(j, k) = t^e·p(image) при e = 2k + j >= 0, иначе p(image) = t^{-e}·p(j, k); допускается t = 0.
        def pair(j: int, k: int):
            exponent = 2 * k + j
            if exponent >= 0:
                return p(j, k), parameter ** exponent * p(*image(j, k))
            return p(*image(j, k)), parameter ** (-exponent) * p(j, k)
        return pair

    rho_param = rho(q, mode)
    rho_value = None if rho_param is None else rho_param.rho
    cases = []
    if q02 > 0 and q11 > 0 and _equal(q01 / q02, q12 / q11, mode):
        xi = q01 / q02
        worst = violation(scaled(xi, lambda j, k: (j, -j - k)))
        cases.append(SymmetryCase("i", True, xi, rho_value, worst))
    else:
        cases.append(SymmetryCase("i", False))
    if _equal(q01, q12, mode) and _equal(q11, q02, mode) and q11 > 0:
        delta = q01 / q11
        worst = violation(scaled(delta, lambda j, k: (-j, -k)))
        cases.append(SymmetryCase("ii", True, delta, rho_value, worst))
        worst = violation(lambda j, k: (p(j, k), p(-j, j + k)))
        cases.append(SymmetryCase("iii", True, None, rho_value, worst))
    else:
        cases.append(SymmetryCase("ii", False))
        cases.append(SymmetryCase("iii", False))
    logger.debug(f"symmetry m={m}: {[(case.case, case.applicable, case.max_violation) for case in cases]}")
    return SymmetryReport(m=m, mode=mode, cases=tuple(cases), odd=odd)

"""Большие и умеренные уклонения блуждания.

Предельная логарифмическая производящая функция моментов
Λ(λ) = ½·log(g0(λ)·g1(λ)), g_i(λ) = Σ_r q[i][r]·exp(λ·w_{i,r}), где w_{i,r} - смещение шага r
из вершины класса i относительно шага r = 0. Функция скорости Λ* - её преобразование
Лежандра, вычисляемое методом Ньютона; для умеренных уклонений функция скорости
квадратичная и задаётся матрицей C.
"""

from dataclasses import dataclass, field
from logging import getLogger
from math import fsum, inf, isfinite, log, sqrt
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import logsumexp

from config import Config
from hexwalk.errors import HexWalkError, InvalidParameterError, NumericalFailureError
from hexwalk.exact_engine import evolve, evolve_log
from hexwalk.lattice import LatticeVertex, StepProbabilities, displacement_table, parity, to_cartesian
from hexwalk.pgf_moments import asymptotic_covariance, moments

logger = getLogger(__name__)

DEFAULT_LAMBDA_GRID = tuple((l1, l2) for l1 in (-1.0, 0.0, 1.0) for l2 in (-1.0, 0.0, 1.0))


@dataclass(frozen=True)
class RateResult:
    """Значение функции скорости в точке (x, y)."""

    point: Tuple[float, float]
    value: float
    maximizer: Optional[Tuple[float, float]]
    finite: bool
    iterations: int = 0
    gradient_residual: float = 0.0
    note: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "point": list(self.point),
            "value": self.value if isfinite(self.value) else "inf",
            "maximizer": None if self.maximizer is None else list(self.maximizer),
            "finite": self.finite,
            "iterations": self.iterations,
            "gradient_residual": self.gradient_residual,
            "note": self.note,
        }


@dataclass(frozen=True)
class ModerateScale:
    """Последовательность a_n = n^{-γ}, 0 < γ < 1; при clt_limit=True допускается a_n = 1 (γ = 0)."""

    gamma: float
    clt_limit: bool = False

    def __post_init__(self):
        if self.clt_limit:
            if self.gamma != 0:
                raise InvalidParameterError("the unit scale a_n = 1 requires gamma = 0")
        elif not 0 < self.gamma < 1:
            raise InvalidParameterError(f"gamma = {self.gamma} must lie in (0, 1)")

    def a(self, n: int) -> float:
        return float(n) ** -self.gamma


@dataclass(frozen=True)
class MdRow:
    n: int
    a_n: float
    max_gap: float
    gaps: Tuple[float, ...]
    flagged: bool


@dataclass(frozen=True)
class MdReport:
    """Отчёт сходимости Λ̃_n(λ) к ½·λᵀCλ."""

    scale: ModerateScale
    lambdas: Tuple[Tuple[float, float], ...]
    rows: Tuple[MdRow, ...] = field(default_factory=tuple)

    @property
    def monotone(self) -> bool:
        gaps = [row.max_gap for row in sorted(self.rows, key=lambda row: row.n)]
        return all(later < earlier for earlier, later in zip(gaps, gaps[1:]))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "gamma": self.scale.gamma,
            "clt_limit": self.scale.clt_limit,
            "monotone": self.monotone,
            "rows": [
                {"n": row.n, "a_n": row.a_n, "max_gap": row.max_gap, "flagged": row.flagged}
                for row in self.rows
            ],
        }


@dataclass(frozen=True)
class HalfplaneInfimum:
    """inf Λ* по полуплоскости {z: u·z >= c} и точка, где он достигается."""

    value: float
    multiplier: float
    rate: Optional[RateResult]


@dataclass(frozen=True)
class DecayRow:
    n: int
    probability_log: float
    rate: float
    gap: float
    log_space: bool


@dataclass(frozen=True)
class DecayReport:
    """Эмпирическая скорость убывания -(1/n)·log P(S_n/n ∈ H) против inf Λ* по H."""

    normal: Tuple[float, float]
    offset: float
    infimum: HalfplaneInfimum
    rows: Tuple[DecayRow, ...] = field(default_factory=tuple)

    @property
    def consistent_side(self) -> bool:
        signs = {row.gap >= 0 for row in self.rows if isfinite(row.gap)}
        return len(signs) <= 1

    @property
    def monotone(self) -> bool:
        gaps = [abs(row.gap) for row in sorted(self.rows, key=lambda row: row.n)]
        return all(later < earlier for earlier, later in zip(gaps, gaps[1:]))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "normal": list(self.normal),
            "offset": self.offset,
            "rate_infimum": self.infimum.value,
            "consistent_side": self.consistent_side,
            "monotone": self.monotone,
            "rows": [
                {"n": row.n, "log_probability": row.probability_log, "rate": row.rate,
                 "gap": row.gap, "log_space": row.log_space}
                for row in self.rows
            ],
        }


def _exponent_vectors(q: StepProbabilities) -> np.ndarray:
    """Векторы w[i][r] = d[i][r] - d[i][0] (массив 2x3x2)."""
    table = displacement_table(q.a)
    return np.array([[[point.x - row[0].x, point.y - row[0].y] for point in row] for row in table])


def _class_terms(i: int, lam: np.ndarray, q: StepProbabilities) -> Tuple[float, np.ndarray, np.ndarray]:
    """log g_i(λ), веса q[i][r]·exp(λ·w_{i,r})/g_i(λ) и векторы w_{i,r}."""
    vectors = _exponent_vectors(q)[i]
    probabilities = np.array(q.converted("float")[i])
    exponents = vectors @ lam
    log_g = float(logsumexp(exponents, b=probabilities))
    weights = probabilities * np.exp(exponents - log_g)
    return log_g, weights, vectors


def log_g(i: int, lambda1: float, lambda2: float, q: StepProbabilities) -> float:
    """Логарифм g_i(λ1, λ2) с вычитанием максимума показателя.

    :param i: класс вершины;
    :param lambda1: первая компонента λ;
    :param lambda2: вторая компонента λ;
    :param q: модель шага.
    :return: log g_i.
    """
    return _class_terms(i, np.array([lambda1, lambda2], dtype=float), q)[0]


def g(i: int, lambda1: float, lambda2: float, q: StepProbabilities) -> float:
    """g_i(λ) = q[i][0] + q[i][1]·e^{(-1)^i√3a(-(√3/2)λ1 + λ2/2)} + q[i][2]·e^{(-1)^{i+1}√3a((√3/2)λ1 + λ2/2)}."""
    return float(np.exp(log_g(i, lambda1, lambda2, q)))


def lambda_(lambda1: float, lambda2: float, q: StepProbabilities) -> float:
    """Предельная логарифмическая производящая функция Λ(λ) = ½·log(g0·g1).

    :param lambda1: первая компонента λ;
    :param lambda2: вторая компонента λ;
    :param q: модель шага.
    :return: значение Λ.
    """
    return 0.5 * (log_g(0, lambda1, lambda2, q) + log_g(1, lambda1, lambda2, q))


def lambda_gradient(lambda1: float, lambda2: float, q: StepProbabilities) -> np.ndarray:
    """Аналитический градиент Λ."""
    lam = np.array([lambda1, lambda2], dtype=float)
    gradient = np.zeros(2)
    for i in (0, 1):
        _, weights, vectors = _class_terms(i, lam, q)
        gradient += 0.5 * weights @ vectors
    return gradient


def lambda_hessian(lambda1: float, lambda2: float, q: StepProbabilities) -> np.ndarray:
    """Аналитическая матрица Гессе Λ: полусумма ковариаций векторов w под весами классов."""
    lam = np.array([lambda1, lambda2], dtype=float)
    hessian = np.zeros((2, 2))
    for i in (0, 1):
        _, weights, vectors = _class_terms(i, lam, q)
        center = weights @ vectors
        hessian += 0.5 * ((vectors.T * weights) @ vectors - np.outer(center, center))
    return hessian


def log_generating_function(lambda1: float, lambda2: float, n: int, q: StepProbabilities) -> float:
    """log G(e^{λ1}, e^{λ2}; n) без переполнения: (n - i)/2·log g1 + (n + i)/2·log g0 + i·a·λ1.

    :param lambda1: первая компонента λ;
    :param lambda2: вторая компонента λ;
    :param n: момент времени;
    :param q: модель шага.
    :return: логарифм производящей функции.
    """
    i = parity(n)
    return (
        0.5 * (n - i) * log_g(1, lambda1, lambda2, q)
        + 0.5 * (n + i) * log_g(0, lambda1, lambda2, q)
        + i * float(q.a) * lambda1
    )


def log_mgf_gap(lam: Tuple[float, float], q: StepProbabilities, n_list: Sequence[int]) -> List[float]:
    """|(1/n)·log G(e^{λ1}, e^{λ2}; n) - Λ(λ)| для каждого n из списка."""
    limit = lambda_(lam[0], lam[1], q)
    return [abs(log_generating_function(lam[0], lam[1], n, q) / n - limit) for n in n_list]


def legendre(
    x: float,
    y: float,
    q: StepProbabilities,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
    norm_cap: Optional[float] = None,
) -> RateResult:
    """Функция скорости Λ*(x, y) = sup_λ {λ·(x, y) - Λ(λ)} методом Ньютона с дроблением шага.

    Если норма приближения превышает norm_cap, а целевая функция продолжает расти, точка
    лежит вне множества достижимых скоростей и Λ* = +∞.

    :param x: первая компонента скорости;
    :param y: вторая компонента скорости;
    :param q: модель шага;
    :param tol: допуск невязки градиента;
    :param max_iter: предельное число итераций;
    :param norm_cap: предельная норма λ, по умолчанию 10³/(√3·a).
    :return: результат с максимизатором и числом итераций.
    """
    tol = Config.newton_tol if tol is None else tol
    if not tol > 0:
        raise InvalidParameterError(f"tolerance {tol} must be positive")
    max_iter = max_iter or Config.newton_max_iter
    norm_cap = norm_cap or 1e3 / (sqrt(3.0) * float(q.a))
    target = np.array([x, y], dtype=float)
    point = (float(x), float(y))

    def objective(lam: np.ndarray) -> float:
        return float(lam @ target) - lambda_(lam[0], lam[1], q)

    def residual_at(lam: np.ndarray) -> float:
        return float(np.linalg.norm(target - lambda_gradient(lam[0], lam[1], q)))

    lam = np.zeros(2)
    value = objective(lam)
    for iteration in range(1, max_iter + 1):
        gradient = target - lambda_gradient(lam[0], lam[1], q)
        residual = float(np.linalg.norm(gradient))
        if residual <= tol:
            logger.debug(f"legendre({x}, {y}): converged in {iteration - 1} iterations, value={value}")
            return RateResult(point, value, (float(lam[0]), float(lam[1])), True, iteration - 1, residual)
        hessian = lambda_hessian(lam[0], lam[1], q)
        ridge = 1e-12 * max(1.0, float(np.trace(hessian)))
        direction = np.linalg.solve(hessian + ridge * np.eye(2), gradient)
        step = 1.0
        while step >= 1e-12:
            candidate = lam + step * direction
            candidate_value = objective(candidate)
            if candidate_value > value:
                break
            # у максимума прирост целевой функции теряется в округлении, тогда решает невязка
            if abs(candidate_value - value) <= 1e-14 * (1.0 + abs(value)) and residual_at(candidate) < residual:
                break
            step *= 0.5
        else:
            raise NumericalFailureError(
                f"line search stalled at ({x}, {y}) with residual {residual}", last_iterate=lam.copy()
            )
        lam, value = candidate, candidate_value
        if float(np.linalg.norm(lam)) > norm_cap:
            logger.debug(f"legendre({x}, {y}): iterate left the cap {norm_cap}, rate is infinite")
            return RateResult(point, inf, None, False, iteration, residual, note="unreachable")
    raise NumericalFailureError(
        f"no convergence at ({x}, {y}) within {max_iter} iterations", last_iterate=lam.copy()
    )


def moderate_rate(x: float, y: float, q: StepProbabilities) -> RateResult:
    """Функция скорости умеренных уклонений Λ̃*(x, y) = sup_λ {λ·z - ½·λᵀCλ}.

    Для обратимой C это ½·zᵀC⁻¹z с максимизатором C⁻¹z. Для вырожденной C супремум конечен
    только при z из образа C и равен ½·zᵀC⁺z.

    :param x: первая компонента;
    :param y: вторая компонента;
    :param q: модель шага.
    :return: результат с максимизатором.
    """
    covariance = asymptotic_covariance(q)
    target = np.array([x, y], dtype=float)
    point = (float(x), float(y))
    eigenvalues, eigenvectors = np.linalg.eigh(covariance)
    threshold = 1e-12 * max(1.0, float(np.max(np.abs(eigenvalues))))
    if np.all(eigenvalues > threshold):
        maximizer = np.linalg.solve(covariance, target)
        value = 0.5 * float(target @ maximizer)
        residual = float(np.linalg.norm(covariance @ maximizer - target))
        return RateResult(point, value, (float(maximizer[0]), float(maximizer[1])), True, 0, residual)
    null_space = eigenvectors[:, eigenvalues <= threshold]
    if np.any(np.abs(null_space.T @ target) > 1e-12 * (1.0 + float(np.linalg.norm(target)))):
        return RateResult(point, inf, None, False, 0, 0.0, note="singular-case")
    maximizer = np.linalg.pinv(covariance, hermitian=True) @ target
    value = 0.5 * float(target @ maximizer)
    residual = float(np.linalg.norm(covariance @ maximizer - target))
    return RateResult(point, value, (float(maximizer[0]), float(maximizer[1])), True, 0, residual, note="singular-case")


def md_limit_check(
    gamma: float,
    q: StepProbabilities,
    n_list: Sequence[int],
    lambdas: Sequence[Tuple[float, float]] = DEFAULT_LAMBDA_GRID,
    clt_limit: bool = False,
) -> MdReport:
    """Сходимость Λ̃_n(λ) = a_n·(log G(e^{λ/√(n·a_n)}; n) - λ·E S_n/√(n·a_n)) к ½·λᵀCλ.

    Строка отчёта помечается flagged, если оценка ошибки округления превышает 1e-8.

    :param gamma: показатель a_n = n^{-γ}; 0 при clt_limit=True;
    :param q: модель шага;
    :param n_list: моменты времени;
    :param lambdas: сетка λ;
    :param clt_limit: использовать a_n = 1.
    :return: отчёт с максимальным отклонением по сетке для каждого n.
    """
    scale = ModerateScale(gamma=gamma, clt_limit=clt_limit)
    covariance = asymptotic_covariance(q)
    eps = float(np.finfo(float).eps)
    rows = []
    for n in n_list:
        if n < 1:
            raise InvalidParameterError(f"n = {n} must be positive")
        a_n = scale.a(n)
        root = sqrt(n * a_n)
        mean = moments(n, q).mean
        gaps = []
        flagged = False
        for lambda1, lambda2 in lambdas:
            lam = np.array([lambda1, lambda2], dtype=float)
            log_value = log_generating_function(lambda1 / root, lambda2 / root, n, q)
            centering = (lambda1 * mean[0] + lambda2 * mean[1]) / root
            value = a_n * (log_value - centering)
            gaps.append(abs(value - 0.5 * float(lam @ covariance @ lam)))
            rounding = a_n * eps * (n + abs(log_value) + abs(centering))
            flagged = flagged or rounding > 1e-8
        rows.append(MdRow(n=n, a_n=a_n, max_gap=max(gaps), gaps=tuple(gaps), flagged=flagged))
        logger.debug(f"md_limit_check gamma={gamma} n={n}: max gap {max(gaps)}")
    return MdReport(scale=scale, lambdas=tuple(tuple(lam) for lam in lambdas), rows=tuple(rows))


def _unit(normal: Sequence[float]) -> np.ndarray:
    vector = np.array(normal, dtype=float)
    length = float(np.linalg.norm(vector))
    if not length > 0:
        raise InvalidParameterError("halfplane normal must be nonzero")
    return vector / length


def halfplane_rate_infimum(q: StepProbabilities, normal: Sequence[float], offset: float) -> HalfplaneInfimum:
    """inf Λ*(z) по полуплоскости {z: u·z >= c}.

    По выпуклой двойственности инфимум равен sup_{t >= 0} {t·c - Λ(t·u)}; одномерный поиск
    идёт вдоль нормали, а точка ∇Λ(t*·u) на границе проверяется через legendre.

    :param q: модель шага;
    :param normal: нормаль u (нормируется);
    :param offset: сдвиг c в единицах нормированной нормали.
    :return: значение инфимума, множитель t* и результат legendre в точке инфимума.
    """
    unit = _unit(normal)
    cap = 1e3 / (sqrt(3.0) * float(q.a))

    def objective(t: float) -> float:
        return lambda_(t * unit[0], t * unit[1], q) - t * offset

    result = minimize_scalar(objective, bounds=(0.0, cap), method="bounded", options={"xatol": 1e-12})
    # Метод "bounded" не вычисляет функцию в концах отрезка.
    fun, multiplier = min((float(result.fun), float(result.x)), (objective(0.0), 0.0), (objective(cap), cap))
    if multiplier > 0.99 * cap:
        if objective(cap) - objective(0.5 * cap) < -1e-9:
            logger.warning(f"halfplane {unit.tolist()}·z >= {offset} lies outside the reachable velocity set")
            return HalfplaneInfimum(value=inf, multiplier=inf, rate=None)
        # Граница полуплоскости касается множества достижимых скоростей: супремум конечен,
        # но достигается только при t -> inf.
        logger.info(f"halfplane {unit.tolist()}·z >= {offset} touches the reachable velocity set")
        return HalfplaneInfimum(value=max(0.0, -objective(cap)), multiplier=inf, rate=None)
    value = max(0.0, -fun)
    boundary = lambda_gradient(multiplier * unit[0], multiplier * unit[1], q)
    rate = legendre(float(boundary[0]), float(boundary[1]), q)
    return HalfplaneInfimum(value=value, multiplier=multiplier, rate=rate)


def empirical_decay(
    q: StepProbabilities,
    normal: Sequence[float],
    offset: float,
    n_list: Sequence[int],
) -> DecayReport:
    """Точная скорость убывания -(1/n)·log P(u·S_n/n >= c) рядом с inf Λ* по полуплоскости.

    Вероятности считаются точным движком в режиме float; если хвост исчезает в машинном
    нуле, расчёт повторяется в логарифмической шкале.

    :param q: модель шага;
    :param normal: нормаль полуплоскости;
    :param offset: сдвиг c;
    :param n_list: моменты времени.
    :return: отчёт с разрывом до инфимума для каждого n.
    """
    unit = _unit(normal)
    infimum = halfplane_rate_infimum(q, unit, offset)
    rows = []
    for n in n_list:
        if n < 1:
            raise InvalidParameterError(f"n = {n} must be positive")
        i = parity(n)

        def inside(j: int, k: int) -> bool:
            point = to_cartesian(LatticeVertex(j, k, i), q.a)
            return unit[0] * point.x + unit[1] * point.y >= offset * n - 1e-9 * n

        distribution = evolve(q, n, mode="float")
        tail = fsum(p for (j, k), p in distribution.mass.items() if inside(j, k))
        log_space = tail < 1e-300
        if log_space:
            logger.debug(f"empirical_decay n={n}: tail underflows, switching to log space")
            log_masses = [value for (j, k), value in evolve_log(q, n).items() if inside(j, k)]
            probability_log = float(logsumexp(log_masses)) if log_masses else -inf
        else:
            probability_log = log(tail)
        rate = -probability_log / n
        rows.append(DecayRow(n=n, probability_log=probability_log, rate=rate, gap=rate - infimum.value,
                             log_space=log_space))
    return DecayReport(normal=(float(unit[0]), float(unit[1])), offset=offset, infimum=infimum, rows=tuple(rows))


def rate_surface(
    q: StepProbabilities,
    xs: Sequence[float],
    ys: Sequence[float],
    mode: str = "large",
) -> List[RateResult]:
    """Функция скорости на сетке (x, y); ошибки решателя помечаются в точке, не прерывая расчёт.

    :param q: модель шага;
    :param xs: значения x;
    :param ys: значения y;
    :param mode: "large" (Λ*) или "moderate" (Λ̃*).
    :return: результаты в порядке (x, y) построчно.
    """
    if mode not in ("large", "moderate"):
        raise InvalidParameterError(f"unknown rate mode {mode!r}")
    results = []
    for x in xs:
        for y in ys:
            try:
                results.append(legendre(x, y, q) if mode == "large" else moderate_rate(x, y, q))
            except HexWalkError as error:
                logger.warning(f"rate at ({x}, {y}) failed: {error}")
                results.append(RateResult((float(x), float(y)), inf, None, False, note=f"error: {error}"))
    return results

"""Моделирование траекторий блуждания и диагностика предельных теорем (ЦПТ, принцип Донскера)."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from logging import getLogger
from math import ceil, floor, sqrt
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import cholesky
from scipy.stats import chi2

from config import Config
from hexwalk.errors import InvalidParameterError
from hexwalk.lattice import NEIGHBOR_SHIFTS, SQRT3, CartesianPoint, LatticeVertex, StepProbabilities
from hexwalk.pgf_moments import asymptotic_covariance, moments

logger = getLogger(__name__)

CLT_QUANTILES = (0.5, 0.9, 0.99)
DONSKER_GRID = (0.0, 0.25, 0.5, 0.75, 1.0)
MIN_CLT_REPLICAS = 1000
MIN_DONSKER_STEPS = 100

# Индексные сдвиги [i][r] -> (dj, dk) для векторного моделирования.
_SHIFTS = np.array([NEIGHBOR_SHIFTS[0], NEIGHBOR_SHIFTS[1]], dtype=np.int8)


@dataclass(frozen=True)
class TrajectorySample:
    """Одна реализация блуждания: конечная точка и, по запросу, вся траектория."""

    steps: int
    endpoint: CartesianPoint
    vertex: LatticeVertex
    seed: int
    path: Optional[Tuple[CartesianPoint, ...]] = None


@dataclass(frozen=True)
class NormalizedPathProcess:
    """Значения процесса на сетке времени; в момент 0 процесс равен нулю."""

    time_grid: Tuple[float, ...]
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        if len(self.time_grid) != len(self.values):
            raise InvalidParameterError("time grid and values differ in length")
        if any(later <= earlier for earlier, later in zip(self.time_grid, self.time_grid[1:])):
            raise InvalidParameterError("time grid must be increasing")


@dataclass(frozen=True)
class CltReport:
    """Сравнение n^{-1/2}(S_n - m_n) с центрированным нормальным законом N(0, C)."""

    n: int
    replicas: int
    covariance: np.ndarray
    expected: np.ndarray
    covariance_error: Optional[float]
    coverage: Dict[float, float]
    singular: bool
    max_abs_value: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "replicas": self.replicas,
            "covariance": self.covariance.tolist(),
            "expected": self.expected.tolist(),
            "covariance_error": self.covariance_error,
            "coverage": {str(level): share for level, share in self.coverage.items()},
            "singular": self.singular,
            "max_abs_value": self.max_abs_value,
        }


@dataclass(frozen=True)
class DonskerReport:
    """Статистики приращений процесса S_n(t) на сетке {0, 1/4, 1/2, 3/4, 1}."""

    n: int
    replicas: int
    factor: np.ndarray
    whitened: bool
    increment_covariances: Tuple[np.ndarray, ...]
    increment_errors: Tuple[float, ...]
    cross_covariance: np.ndarray
    cross_standard_error: np.ndarray
    max_abs_initial: float

    @property
    def cross_ratio(self) -> float:
        """Максимум |cross-covariance| в единицах стандартной ошибки."""
        scaled = np.divide(
            np.abs(self.cross_covariance),
            self.cross_standard_error,
            out=np.zeros_like(self.cross_covariance),
            where=self.cross_standard_error > 0,
        )
        return float(np.max(scaled))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "replicas": self.replicas,
            "factor": self.factor.tolist(),
            "whitened": self.whitened,
            "increment_errors": list(self.increment_errors),
            "cross_covariance": self.cross_covariance.tolist(),
            "cross_ratio": self.cross_ratio,
            "max_abs_initial": self.max_abs_initial,
        }


def _replica_rng(seed: int, block: int) -> np.random.Generator:
    """Независимый поток случайных чисел блока реплик, зависящий только от (seed, block)."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(block,)))


def _step_cdf(probabilities: np.ndarray) -> np.ndarray:
    """Функция распределения направления шага по строкам q.

    Столбцы, начиная с последнего направления с ненулевой вероятностью, равны ровно 1.0,
    чтобы ошибки округления суммы не давали шагов с нулевой вероятностью.
    """
    cdf = np.cumsum(probabilities, axis=1)
    columns = probabilities.shape[1]
    last = columns - 1 - np.argmax(probabilities[:, ::-1] > 0, axis=1)
    cdf[np.arange(columns)[None, :] >= last[:, None]] = 1.0
    return cdf


def _simulate_block(
    n: int,
    probabilities: np.ndarray,
    seed: int,
    block: int,
    size: int,
    times: np.ndarray,
) -> np.ndarray:
    """Индексы (j, k) реплик блока в моменты times.

    Направление шага s выбирается обращением функции распределения строки q[s mod 2].

    :return: массив формы (size, len(times), 2).
    """
    rng = _replica_rng(seed, block)
    if n == 0:
        return np.zeros((size, len(times), 2), dtype=np.int64)
    uniforms = rng.random((size, n))
    classes = np.arange(n) % 2
    cdf = _step_cdf(probabilities)[classes]
    directions = (uniforms >= cdf[:, 0]).astype(np.int8) + (uniforms >= cdf[:, 1])
    positions = np.cumsum(_SHIFTS[classes[None, :], directions], axis=1, dtype=np.int64)
    positions = np.concatenate([np.zeros((size, 1, 2), dtype=np.int64), positions], axis=1)
    return positions[:, times, :]


def _run_blocks(n: int, replicas: int, q: StepProbabilities, seed: int, times: Sequence[int]) -> np.ndarray:
    """Моделирование replicas реплик блоками по Config.replica_block в пуле потоков.

    Разбиение на блоки не зависит от числа потоков, а результаты собираются в порядке
    номеров блоков, поэтому выборка определяется только seed.
    """
    if n < 0:
        raise InvalidParameterError(f"time n = {n} must be nonnegative")
    if replicas < 1:
        raise InvalidParameterError(f"replicas = {replicas} must be positive")
    if seed < 0:
        raise InvalidParameterError(f"seed = {seed} must be nonnegative")
    times = np.asarray(times, dtype=np.int64)
    if np.any(times < 0) or np.any(times > n):
        raise InvalidParameterError(f"recorded times must lie in [0, {n}]")
    probabilities = np.array(q.converted("float"), dtype=float)
    block_size = Config.replica_block
    blocks = [(block, min(block_size, replicas - block * block_size)) for block in range(ceil(replicas / block_size))]
    threads = Config.get_threads()
    logger.debug(f"simulating {replicas} replicas of {n} steps in {len(blocks)} blocks on {threads} threads")
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(lambda item: _simulate_block(n, probabilities, seed, item[0], item[1], times), blocks))
    return np.concatenate(parts)


def _to_cartesian(indices: np.ndarray, times: np.ndarray, a: float) -> np.ndarray:
    """Декартовы координаты по индексам (j, k) и классу t mod 2 вершин момента t."""
    classes = (np.asarray(times) % 2)[None, :]
    x = 1.5 * a * indices[..., 0] + classes * a
    y = 0.5 * SQRT3 * a * indices[..., 0] + SQRT3 * a * indices[..., 1]
    return np.stack([x, y], axis=-1)


def sample_states(n: int, replicas: int, q: StepProbabilities, seed: int) -> np.ndarray:
    """Индексы (j, k) конечных вершин реплик; класс вершин равен n mod 2.

    :return: целочисленный массив формы (replicas, 2).
    """
    return _run_blocks(n, replicas, q, seed, [n])[:, 0, :]


def sample_endpoints(n: int, replicas: int, q: StepProbabilities, seed: int) -> np.ndarray:
    """Конечные точки S_n независимых реплик.

    Реплика с номером r одинакова при любом общем числе реплик и любом числе потоков.

    :param n: число шагов;
    :param replicas: число реплик;
    :param q: модель шага;
    :param seed: зерно генератора.
    :return: массив формы (replicas, 2) декартовых координат.
    """
    times = np.array([n])
    return _to_cartesian(_run_blocks(n, replicas, q, seed, times), times, float(q.a))[:, 0, :]


def sample_paths(
    n: int,
    replicas: int,
    q: StepProbabilities,
    seed: int,
    times: Optional[Sequence[int]] = None,
) -> np.ndarray:
    """Значения S_t реплик в моменты times (по умолчанию 0..n).

    :param n: число шагов;
    :param replicas: число реплик;
    :param q: модель шага;
    :param seed: зерно генератора;
    :param times: моменты записи в [0, n].
    :return: массив формы (replicas, len(times), 2).
    """
    times = np.arange(n + 1) if times is None else np.asarray(times, dtype=np.int64)
    return _to_cartesian(_run_blocks(n, replicas, q, seed, times), times, float(q.a))


def sample_endpoint(n: int, q: StepProbabilities, seed: int, with_path: bool = False) -> TrajectorySample:
    """Одна реализация блуждания длины n (совпадает с репликой 0 пакетных функций).

    :param n: число шагов;
    :param q: модель шага;
    :param seed: зерно генератора;
    :param with_path: сохранить всю траекторию.
    :return: реализация с конечной точкой и, при необходимости, траекторией.
    """
    times = np.arange(n + 1)
    indices = _run_blocks(n, 1, q, seed, times)[0]
    points = _to_cartesian(indices[None, ...], times, float(q.a))[0]
    path = tuple(CartesianPoint(float(x), float(y)) for x, y in points) if with_path else None
    j, k = (int(value) for value in indices[-1])
    return TrajectorySample(
        steps=n,
        endpoint=CartesianPoint(float(points[-1][0]), float(points[-1][1])),
        vertex=LatticeVertex(j, k, n % 2),
        seed=seed,
        path=path,
    )


def _centering(times: Sequence[int], q: StepProbabilities) -> np.ndarray:
    return np.array([moments(int(t), q).mean for t in times])


def clt_diagnostic(n: int, replicas: int, q: StepProbabilities, seed: int) -> CltReport:
    """Проверка сходимости n^{-1/2}(S_n - m_n) к N(0, C).

    Сообщает относительную ошибку Фробениуса эмпирической ковариации и доли квадратов
    расстояний Махаланобиса ниже квантилей χ²(2); при вырожденной C обе проверки
    пропускаются.

    :param n: число шагов;
    :param replicas: число реплик, не меньше 1000;
    :param q: модель шага;
    :param seed: зерно генератора.
    :return: отчёт диагностики.
    """
    if n < 1:
        raise InvalidParameterError(f"n = {n} must be positive")
    if replicas < MIN_CLT_REPLICAS:
        raise InvalidParameterError(f"replicas = {replicas} is below {MIN_CLT_REPLICAS}")
    expected = asymptotic_covariance(q)
    values = (sample_endpoints(n, replicas, q, seed) - _centering([n], q)[0]) / sqrt(n)
    covariance = np.cov(values, rowvar=False)
    singular = bool(np.linalg.eigvalsh(expected)[0] <= 1e-12 * max(1.0, float(np.abs(expected).max())))
    covariance_error = None
    coverage: Dict[float, float] = {}
    if singular:
        logger.warning("clt_diagnostic: asymptotic covariance is singular, covariance test skipped")
    else:
        covariance_error = float(np.linalg.norm(covariance - expected) / np.linalg.norm(expected))
        distances = np.einsum("ij,jk,ik->i", values, np.linalg.inv(expected), values)
        coverage = {level: float(np.mean(distances <= chi2.ppf(level, df=2))) for level in CLT_QUANTILES}
    report = CltReport(
        n=n,
        replicas=replicas,
        covariance=covariance,
        expected=expected,
        covariance_error=covariance_error,
        coverage=coverage,
        singular=singular,
        max_abs_value=float(np.max(np.abs(values))),
    )
    logger.debug(f"clt_diagnostic n={n}: covariance error {covariance_error}, coverage {coverage}")
    return report


def scaled_lattice_values(k: int, T: float, replicas: int, q: StepProbabilities, seed: int) -> np.ndarray:
    """Значения S*_k(t) = k^{-1/2}·S_{⌊t⌋k} реплик в целые моменты 0..⌊T⌋.

    :return: массив формы (replicas, ⌊T⌋ + 1, 2).
    """
    if k < 1:
        raise InvalidParameterError(f"k = {k} must be positive")
    if not T > 0:
        raise InvalidParameterError(f"horizon T = {T} must be positive")
    horizon = floor(T)
    return sample_paths(k * horizon, replicas, q, seed, times=k * np.arange(horizon + 1)) / sqrt(k)


def scaled_lattice_process(k: int, T: float, q: StepProbabilities, seed: int) -> NormalizedPathProcess:
    """Траектория процесса на решётке с шагом a/√k: t ↦ k^{-1/2}·S_{⌊t⌋k}, t = 0..⌊T⌋.

    :param k: масштаб;
    :param T: горизонт;
    :param q: модель шага;
    :param seed: зерно генератора.
    :return: процесс на целой сетке времени.
    """
    values = scaled_lattice_values(k, T, 1, q, seed)[0]
    return NormalizedPathProcess(time_grid=tuple(float(t) for t in range(len(values))), values=values)


def normalized_path_process(
    n: int,
    q: StepProbabilities,
    seed: int,
    grid: Sequence[float] = DONSKER_GRID,
) -> NormalizedPathProcess:
    """Траектория S_n(t) = n^{-1/2}(S_{⌊nt⌋} - m_{⌊nt⌋}) на сетке grid ⊂ [0, 1]."""
    times = [int(floor(n * t)) for t in grid]
    values = (sample_paths(n, 1, q, seed, times=times)[0] - _centering(times, q)) / sqrt(n)
    return NormalizedPathProcess(time_grid=tuple(grid), values=values)


def donsker_factor(covariance: np.ndarray) -> Tuple[np.ndarray, bool]:
    """Нижнетреугольная матрица D с DᵀD = C.

    D = J·Lᵀ·J, где L - множитель Холецкого матрицы JCJ, J - антидиагональная перестановка.
    Для вырожденной C возвращается симметричный квадратный корень по собственному разложению.

    :param covariance: матрица C.
    :return: пара (D, D обратима).
    """
    flip = np.fliplr(np.eye(len(covariance)))
    try:
        lower = cholesky(flip @ covariance @ flip, lower=True)
    except np.linalg.LinAlgError:
        eigenvalues, eigenvectors = np.linalg.eigh(covariance)
        root = eigenvectors @ np.diag(np.sqrt(np.clip(eigenvalues, 0.0, None))) @ eigenvectors.T
        return root, False
    factor = flip @ lower.T @ flip
    invertible = bool(np.min(np.abs(np.diag(factor))) > 1e-12 * max(1.0, float(np.abs(factor).max())))
    return factor, invertible


def donsker_diagnostic(n: int, replicas: int, q: StepProbabilities, seed: int) -> DonskerReport:
    """Проверка принципа инвариантности для S_n(t) на сетке {0, 1/4, 1/2, 3/4, 1}.

    Приращения ΔS (строки) отбеливаются умножением на D⁻¹ и сравниваются с Δt·I;
    независимость приращений на [0, 1/4] и [1/2, 3/4] оценивается по их взаимной ковариации.

    :param n: число шагов, не меньше 100;
    :param replicas: число реплик;
    :param q: модель шага;
    :param seed: зерно генератора.
    :return: отчёт диагностики.
    """
    if n < MIN_DONSKER_STEPS:
        raise InvalidParameterError(f"n = {n} is below {MIN_DONSKER_STEPS}")
    if replicas < 2:
        raise InvalidParameterError(f"replicas = {replicas} must be at least 2")
    times = [int(floor(n * t)) for t in DONSKER_GRID]
    values = (sample_paths(n, replicas, q, seed, times=times) - _centering(times, q)) / sqrt(n)
    factor, invertible = donsker_factor(asymptotic_covariance(q))
    increments = np.diff(values, axis=1)
    if invertible:
        increments = increments @ np.linalg.inv(factor)
    else:
        logger.warning("donsker_diagnostic: factor D is singular, whitening skipped")
    covariances = []
    errors = []
    for index, (start, end) in enumerate(zip(DONSKER_GRID, DONSKER_GRID[1:])):
        covariance = np.cov(increments[:, index, :], rowvar=False)
        covariances.append(covariance)
        target = (end - start) * (np.eye(2) if invertible else asymptotic_covariance(q))
        scale = float(np.linalg.norm(target))
        errors.append(float(np.linalg.norm(covariance - target) / scale) if scale > 0 else float(np.linalg.norm(covariance)))
    first = increments[:, 0, :] - increments[:, 0, :].mean(axis=0)
    third = increments[:, 2, :] - increments[:, 2, :].mean(axis=0)
    cross = first.T @ third / (replicas - 1)
    cross_standard_error = np.sqrt(np.outer(first.var(axis=0), third.var(axis=0)) / replicas)
    report = DonskerReport(
        n=n,
        replicas=replicas,
        factor=factor,
        whitened=invertible,
        increment_covariances=tuple(covariances),
        increment_errors=tuple(errors),
        cross_covariance=cross,
        cross_standard_error=cross_standard_error,
        max_abs_initial=float(np.max(np.abs(values[:, 0, :]))),
    )
    logger.debug(f"donsker_diagnostic n={n}: increment errors {errors}, cross ratio {report.cross_ratio}")
    return report

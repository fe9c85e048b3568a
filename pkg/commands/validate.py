"""Команда validate. Перекрёстная проверка аналитических формул по точному оракулу."""

from fractions import Fraction
from logging import getLogger
from typing import Callable, Dict, Tuple

import numpy as np

from commands.common import RunConfig, emit, log_start, message
from hexwalk.closed_form import check_symmetry, closed_form_distribution, odd_time_support_bounds
from hexwalk.deviations import lambda_, lambda_gradient, lambda_hessian, legendre, moderate_rate
from hexwalk.errors import InvalidParameterError
from hexwalk.exact_engine import Distribution, cached_evolve, cartesian_moments, evolve, expectation
from hexwalk.io import report_json
from hexwalk.lattice import StepProbabilities
from hexwalk.pgf_moments import asymptotic_covariance, moments, pgf

logger = getLogger(__name__)


def _model(q0: Tuple[str, str, str], q1: Tuple[str, str, str]) -> StepProbabilities:
    return StepProbabilities.from_rows([Fraction(value) for value in q0], [Fraction(value) for value in q1])


# Закреплённый набор моделей для проверки; ρ = 1 у "rho-one" при неравномерных q.
PARAMETER_BATTERY: Dict[str, StepProbabilities] = {
    "uniform": StepProbabilities.uniform(),
    "asymmetric": _model(("1/2", "1/4", "1/4"), ("1/5", "3/10", "1/2")),
    "equal-rows": _model(("2/5", "3/10", "3/10"), ("2/5", "3/10", "3/10")),
    "rho-one": _model(("1/5", "2/5", "2/5"), ("3/5", "1/5", "1/5")),
    "no-diagonal": _model(("1/2", "0", "1/2"), ("2/5", "0", "3/5")),
    "generic": _model(("1/6", "1/2", "1/3"), ("1/4", "1/8", "5/8")),
}

# Модель с q02·q12 = 0: замкнутая форма не определена, значения берутся у оракула.
RHO_UNDEFINED = _model(("1/2", "1/2", "0"), ("1/3", "1/3", "1/3"))

# Модели, на которых выполнены условия соотношений симметрии с ξ, δ != 1.
SYMMETRY_SETS: Dict[str, StepProbabilities] = {
    "xi-two": _model(("1/2", "1/3", "1/6"), ("1/4", "1/4", "1/2")),
    "delta-two": _model(("1/2", "1/3", "1/6"), ("1/2", "1/6", "1/3")),
}

SUITES = ("closed-form", "odd-time", "normalization", "symmetry", "pgf", "moments", "deviations")
PGF_GRID = (0.8, 1.0, 1.25)


def _max_difference(left: Distribution, right: Distribution) -> float:
    states = set(left.mass) | set(right.mass)
    return max((abs(float(left.probability(*state) - right.probability(*state))) for state in states), default=0.0)


def _relative(value: float, reference: float) -> float:
    return abs(value - reference) / max(1.0, abs(reference))


def suite_closed_form(run_config: RunConfig) -> Tuple[bool, float]:
    """Чётные моменты 2m <= 2·max_m: точное совпадение в дробях и 1e-12 во float."""
    max_m = run_config.m or 8
    rational_worst, float_worst = 0.0, 0.0
    for q in list(PARAMETER_BATTERY.values()) + [RHO_UNDEFINED]:
        for m in range(1, max_m + 1):
            oracle = cached_evolve(q, 2 * m, "rational")
            rational_worst = max(rational_worst, _max_difference(closed_form_distribution(2 * m, q, "rational")[0], oracle))
            float_worst = max(float_worst, _max_difference(closed_form_distribution(2 * m, q, "float")[0], oracle))
    return rational_worst == 0 and float_worst <= 1e-12, max(rational_worst, float_worst)


def suite_odd_time(run_config: RunConfig) -> Tuple[bool, float]:
    """Нечётные моменты 1..2·max_m+1: совпадение с оракулом и носитель внутри расчётных диапазонов."""
    max_m = min(run_config.m or 4, 4)
    worst = 0.0
    support_ok = True
    for q in PARAMETER_BATTERY.values():
        for m in range(0, max_m + 1):
            n = 2 * m + 1
            oracle = cached_evolve(q, n, "rational")
            worst = max(worst, _max_difference(closed_form_distribution(n, q, "rational")[0], oracle))
            allowed = {(j, k) for j, low, high in odd_time_support_bounds(m) for k in range(low, high + 1)}
            support_ok = support_ok and set(oracle.mass) <= allowed
            if all(value > 0 for row in q.q for value in row):
                support_ok = support_ok and set(oracle.mass) == allowed
    return worst == 0 and support_ok, worst


def suite_normalization(run_config: RunConfig) -> Tuple[bool, float]:
    """Сумма вероятностей: ровно 1 в дробях и отклонение не более 1e-12 во float."""
    n = 60 if run_config.n is None else run_config.n
    exact_ok = True
    drift = 0.0
    for q in PARAMETER_BATTERY.values():
        exact_ok = exact_ok and evolve(q, n, mode="rational").total() == 1
        drift = max(drift, abs(evolve(q, n, mode="float").total() - 1.0))
    return exact_ok and drift <= 1e-12, drift


def suite_symmetry(run_config: RunConfig) -> Tuple[bool, float]:
    """Соотношения симметрии в применимых случаях: нулевое нарушение и ρ = 1."""
    m = run_config.m or 6
    worst = 0.0
    passed = True
    for q in list(PARAMETER_BATTERY.values()) + list(SYMMETRY_SETS.values()):
        for case in check_symmetry(q, m, "rational").cases:
            if not case.applicable:
                continue
            worst = max(worst, case.max_violation)
            passed = passed and case.max_violation == 0 and case.rho == 1
    return passed, worst


def suite_pgf(run_config: RunConfig) -> Tuple[bool, float]:
    """G(u, v; n) против E[u^X v^Y] по точному распределению, n <= 12."""
    worst = 0.0
    for q in PARAMETER_BATTERY.values():
        for n in range(0, 13):
            distribution = cached_evolve(q, n, "rational")
            for u in PGF_GRID:
                for v in PGF_GRID:
                    oracle = expectation(distribution, q.a, lambda x, y: u ** x * v ** y)
                    worst = max(worst, abs(pgf(u, v, n, q) - oracle) / oracle)
    return worst <= 1e-10, worst


def suite_moments(run_config: RunConfig) -> Tuple[bool, float]:
    """Формулы моментов против моментов точного распределения, n <= 40."""
    worst = 0.0
    for q in PARAMETER_BATTERY.values():
        for n in range(0, 41):
            summary = moments(n, q)
            oracle = cartesian_moments(cached_evolve(q, n, "rational"), q.a)
            pairs = list(zip(summary.mean, oracle.mean)) + list(zip(summary.variance, oracle.variance))
            pairs.append((summary.covariance, oracle.covariance))
            worst = max([worst] + [_relative(value, reference) for value, reference in pairs])
    return worst <= 1e-10, worst


def suite_deviations(run_config: RunConfig) -> Tuple[bool, float]:
    """Λ(0) = 0, ∇Λ(0) = μ, ∇²Λ(0) = C, Λ*(μ) = 0 и Λ̃*(1, 1) = 2 для равномерной модели."""
    checks = []
    for q in PARAMETER_BATTERY.values():
        drift = np.array(moments(1, q).drift)
        checks.append((abs(lambda_(0.0, 0.0, q)), 1e-15))
        checks.append((float(np.max(np.abs(lambda_gradient(0.0, 0.0, q) - drift))), 1e-6))
        checks.append((float(np.max(np.abs(lambda_hessian(0.0, 0.0, q) - asymptotic_covariance(q)))), 1e-8))
        checks.append((abs(legendre(float(drift[0]), float(drift[1]), q).value), 1e-12))
    checks.append((abs(moderate_rate(1.0, 1.0, PARAMETER_BATTERY["uniform"]).value - 2.0), 1e-12))
    return all(value <= bound for value, bound in checks), max(value for value, _ in checks)


SUITE_RUNNERS: Dict[str, Callable[[RunConfig], Tuple[bool, float]]] = {
    "closed-form": suite_closed_form,
    "odd-time": suite_odd_time,
    "normalization": suite_normalization,
    "symmetry": suite_symmetry,
    "pgf": suite_pgf,
    "moments": suite_moments,
    "deviations": suite_deviations,
}


def start(run_config: RunConfig) -> int:
    """Запуск всех наборов проверок (или одного, --suite) и вывод JSON-отчёта.

    :param run_config: параметры запуска.
    :return: 0, если все наборы пройдены, иначе 1.
    """
    log_start(run_config)
    if run_config.suite is not None and run_config.suite not in SUITE_RUNNERS:
        raise InvalidParameterError(f"unknown suite {run_config.suite!r}")
    names = SUITES if run_config.suite is None else (run_config.suite,)
    suites = {}
    for name in names:
        passed, violation = SUITE_RUNNERS[name](run_config)
        logger.info(f"suite {name}: passed={passed}, max violation {violation}")
        suites[name] = {"passed": passed, "max_violation": violation}
    passed = all(result["passed"] for result in suites.values())
    emit(run_config, report_json({"passed": passed, "suites": suites}))
    message(run_config, "validation_passed" if passed else "validation_failed")
    return 0 if passed else 1

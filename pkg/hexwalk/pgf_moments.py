"""Производящая функция вероятностей и точные моменты блуждания.

G(u, v; n) = E[u^{X_n} v^{Y_n}] факторизуется через
α(u, v) = q10 + q12·u + q11·u/v и β(u, v) = q00 + q01·v/u + q02/u:
G = α(ũ, ṽ)^{(n - i_n)/2} · β(ũ, ṽ)^{(n + i_n)/2} · u^{i_n·a}, ũ = u^{3a/2} v^{√3a/2}, ṽ = v^{√3a}.
"""

from dataclasses import dataclass, field
from logging import getLogger
from math import exp, log, sqrt
from typing import Any, Dict, Tuple

import numpy as np

from hexwalk.errors import InvalidParameterError
from hexwalk.lattice import StepProbabilities, parity

logger = getLogger(__name__)


@dataclass(frozen=True)
class PgfFactors:
    """Значения α(u, v) и β(u, v) в точке (u, v)."""

    alpha: float
    beta: float

    @classmethod
    def build(cls, u: float, v: float, q: StepProbabilities) -> "PgfFactors":
        """Вычисление α и β.

        :param u: первый аргумент, u > 0;
        :param v: второй аргумент, v > 0;
        :param q: модель шага.
        :return: множители производящей функции.
        """
        (q00, q01, q02), (q10, q11, q12) = q.converted("float")
        alpha = q10 + q12 * u + q11 * u / v
        beta = q00 + q01 * v / u + q02 / u
        if not (alpha > 0 and beta > 0):
            raise InvalidParameterError(f"alpha = {alpha}, beta = {beta} must be positive")
        return cls(alpha=alpha, beta=beta)


@dataclass(frozen=True)
class MomentSummary:
    """Точные моменты S_n и параметры их линейного роста по n."""

    n: int
    mean: Tuple[float, float]
    variance: Tuple[float, float]
    covariance: float
    drift: Tuple[float, float]
    parity_shift: Tuple[float, float, float, float, float]
    diffusion: Tuple[float, float, float]
    C: np.ndarray = field(compare=False, repr=False)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "mean": list(self.mean),
            "variance": list(self.variance),
            "covariance": self.covariance,
            "drift": list(self.drift),
            "parity_shift": list(self.parity_shift),
            "diffusion": list(self.diffusion),
            "C": self.C.tolist(),
        }


def log_pgf(u: float, v: float, n: int, q: StepProbabilities) -> float:
    """Логарифм производящей функции log G(u, v; n).

    :param u: первый аргумент, u > 0;
    :param v: второй аргумент, v > 0;
    :param n: момент времени;
    :param q: модель шага.
    :return: log G(u, v; n).
    """
    if not (u > 0 and v > 0):
        raise InvalidParameterError(f"pgf arguments u = {u}, v = {v} must be positive")
    i = parity(n)
    a = float(q.a)
    u_tilde = exp(1.5 * a * log(u) + 0.5 * sqrt(3.0) * a * log(v))
    v_tilde = exp(sqrt(3.0) * a * log(v))
    factors = PgfFactors.build(u_tilde, v_tilde, q)
    return 0.5 * (n - i) * log(factors.alpha) + 0.5 * (n + i) * log(factors.beta) + i * a * log(u)


def pgf(u: float, v: float, n: int, q: StepProbabilities) -> float:
    """Производящая функция G(u, v; n) = E[u^{X_n} v^{Y_n}].

    :param u: первый аргумент, u > 0;
    :param v: второй аргумент, v > 0;
    :param n: момент времени;
    :param q: модель шага.
    :return: значение G.
    """
    return exp(log_pgf(u, v, n, q))


def _parameters(q: StepProbabilities) -> Dict[str, float]:
    """Коэффициенты μ1, μ2, θ1..θ5, σ1², σ2², σ12 линейного роста моментов."""
    (q00, q01, q02), (q10, q11, q12) = q.converted("float")
    a = float(q.a)
    root3 = sqrt(3.0)
    s0, s1 = q01 + q02, q11 + q12
    d0, d1 = q01 - q02, q11 - q12
    cov0 = q01 * (q01 - 1) + q02 * (1 - q02)
    cov1 = q12 * (1 - q12) - q11 * (1 - q11)
    return {
        "mu1": 0.75 * a * (s1 - s0),
        "mu2": 0.25 * root3 * a * (d0 - d1),
        "theta1": a - 0.75 * a * (s1 + s0),
        "theta2": 0.25 * root3 * a * (d0 + d1),
        "sigma1_sq": 9.0 / 8.0 * a * a * (s0 - s0 ** 2 + s1 - s1 ** 2),
        "theta3": 9.0 / 8.0 * a * a * (s0 - s0 ** 2 - s1 + s1 ** 2),
        "sigma2_sq": 3.0 / 8.0 * a * a * (s0 - d0 ** 2 + s1 - d1 ** 2),
        "theta4": 3.0 / 8.0 * a * a * (s0 - d0 ** 2 - s1 + d1 ** 2),
        "sigma12": 3.0 * root3 / 8.0 * a * a * (cov0 + cov1),
        "theta5": 3.0 * root3 / 8.0 * a * a * (cov0 - cov1),
    }


def asymptotic_covariance(q: StepProbabilities) -> np.ndarray:
    """Асимптотическая ковариационная матрица C = [[σ1², σ12], [σ12, σ2²]].

    :param q: модель шага.
    :return: симметричная матрица 2x2.
    """
    values = _parameters(q)
    return np.array([
        [values["sigma1_sq"], values["sigma12"]],
        [values["sigma12"], values["sigma2_sq"]],
    ])


def moments(n: int, q: StepProbabilities) -> MomentSummary:
    """Среднее, дисперсии и ковариация S_n = (X_n, Y_n) по точным формулам.

    :param n: момент времени;
    :param q: модель шага.
    :return: сводка моментов.
    """
    i = parity(n)
    values = _parameters(q)
    summary = MomentSummary(
        n=n,
        mean=(values["mu1"] * n + values["theta1"] * i, values["mu2"] * n + values["theta2"] * i),
        variance=(values["sigma1_sq"] * n + values["theta3"] * i, values["sigma2_sq"] * n + values["theta4"] * i),
        covariance=values["sigma12"] * n + values["theta5"] * i,
        drift=(values["mu1"], values["mu2"]),
        parity_shift=(values["theta1"], values["theta2"], values["theta3"], values["theta4"], values["theta5"]),
        diffusion=(values["sigma1_sq"], values["sigma2_sq"], values["sigma12"]),
        C=asymptotic_covariance(q),
    )
    logger.debug(f"moments n={n}: mean={summary.mean} variance={summary.variance} covariance={summary.covariance}")
    return summary

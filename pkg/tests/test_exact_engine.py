"""Тесты точного движка прямых уравнений Колмогорова."""

from fractions import Fraction
from math import exp, fsum, isclose, log

import numpy as np
import pytest

from config import Config
from hexwalk.errors import InvalidParameterError, ResourceLimitError
from hexwalk.exact_engine import (
    Distribution,
    cartesian_moments,
    evolve,
    evolve_log,
    expectation,
    initial,
    step,
)
from hexwalk.lattice import StepProbabilities, displacement


def test_initial():
    distribution = initial()
    assert distribution.n == 0
    assert dict(distribution.mass) == {(0, 0): Fraction(1)}
    assert distribution.total() == 1
    assert len(distribution) == 1


def test_single_step_from_origin(battery_model):
    q = battery_model
    distribution = step(initial(), q)
    expected = {(0, 0): q.q[0][0], (-1, 0): q.q[0][2], (-1, 1): q.q[0][1]}
    assert dict(distribution.mass) == {state: p for state, p in expected.items() if p > 0}
    assert distribution.n == 1 and distribution.parity == 1


def test_uniform_return_probability(uniform):
    assert evolve(uniform, 2).probability(0, 0) == Fraction(1, 3)


def test_evolve_zero_steps_is_initial(uniform):
    assert evolve(uniform, 0) == initial()


def test_total_mass_is_exact(battery_model):
    for n in range(0, 25):
        assert evolve(battery_model, n).total() == 1


def test_float_mode_drift(battery_model):
    assert abs(evolve(battery_model, 200, mode="float").total() - 1.0) <= 1e-12


@pytest.mark.slow
def test_total_mass_exact_at_two_hundred(battery_model):
    assert evolve(battery_model, 200).total() == 1


def test_uniform_six_steps_pattern(uniform):
    distribution = evolve(uniform, 6)
    assert distribution.total() == 1
    # Картина симметрична относительно отражения x -> -x: (j, k) -> (-j, j + k).
    for (j, k), p in distribution.items():
        assert distribution.probability(-j, j + k) == p
    assert all(p * 3 ** 6 == int(p * 3 ** 6) for _, p in distribution.items())


def test_translation_covariance(battery_model):
    shifted = evolve(battery_model, 5, origin=(2, -3))
    base = evolve(battery_model, 5)
    assert {(j - 2, k + 3): p for (j, k), p in shifted.items()} == dict(base.mass)


def test_translation_covariance_random_shifts(battery_model):
    rng = np.random.default_rng(9)
    for n in (0, 1, 7, 20):
        base = evolve(battery_model, n)
        for j0, k0 in rng.integers(-50, 50, size=(5, 2)).tolist():
            shifted = evolve(battery_model, n, origin=(j0, k0))
            assert {(j - j0, k - k0): p for (j, k), p in shifted.items()} == dict(base.mass)


@pytest.mark.parametrize("n_max", [40, pytest.param(100, marks=pytest.mark.slow)])
def test_float_and_rational_agree_at_every_step(battery_model, n_max):
    exact = initial(mode="rational")
    approximate = initial(mode="float")
    for _ in range(n_max):
        exact = step(exact, battery_model)
        approximate = step(approximate, battery_model)
        assert set(approximate.mass) == set(exact.mass)
        assert all(isclose(approximate.mass[state], float(p), abs_tol=1e-13) for state, p in exact.items())


def test_evolve_log_matches_float(battery_model):
    float_mass = evolve(battery_model, 30, mode="float").mass
    log_mass = evolve_log(battery_model, 30)
    assert set(log_mass) == set(float_mass)
    for state, value in log_mass.items():
        assert isclose(exp(value), float_mass[state], rel_tol=1e-10)


def test_evolve_log_keeps_vanishing_masses(uniform):
    log_mass = evolve_log(uniform, 300)
    # Крайняя по y вершина достигается единственной траекторией: p = 3^{-300}.
    assert min(log_mass.values()) == pytest.approx(-300 * log(3), rel=1e-12)


def test_engine_cap(uniform, monkeypatch):
    monkeypatch.setattr(Config, "engine_max_steps", 10)
    with pytest.raises(ResourceLimitError):
        evolve(uniform, 11)
    with pytest.raises(InvalidParameterError):
        evolve(uniform, -1)


def test_cartesian_moments_one_step_brute_force(battery_model):
    q = battery_model
    table = q.converted("float")
    outcomes = [(table[0][r], displacement(0, r, 1)) for r in range(3)]
    mean_x = fsum(p * d.x for p, d in outcomes)
    mean_y = fsum(p * d.y for p, d in outcomes)
    var_x = fsum(p * (d.x - mean_x) ** 2 for p, d in outcomes)
    var_y = fsum(p * (d.y - mean_y) ** 2 for p, d in outcomes)
    cov = fsum(p * (d.x - mean_x) * (d.y - mean_y) for p, d in outcomes)
    result = cartesian_moments(evolve(q, 1), q.a)
    assert result.mean == pytest.approx((mean_x, mean_y), abs=1e-12)
    assert result.variance == pytest.approx((var_x, var_y), abs=1e-12)
    assert result.covariance == pytest.approx(cov, abs=1e-12)


def test_expectation_of_constant(uniform):
    assert expectation(evolve(uniform, 7), uniform.a, lambda x, y: 1.0) == pytest.approx(1.0, abs=1e-15)


def test_distribution_rejects_unknown_mode():
    with pytest.raises(InvalidParameterError):
        Distribution(n=0, mass={(0, 0): 1.0}, mode="decimal")


def test_deterministic_walk_oscillates():
    q = StepProbabilities.from_rows([1, 0, 0], [1, 0, 0])
    assert dict(evolve(q, 3).mass) == {(0, 0): 1}
    assert evolve(q, 3).parity == 1

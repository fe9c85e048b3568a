"""Тесты замкнутой формы вероятностей и соотношений симметрии."""

from fractions import Fraction

import pytest

from hexwalk.closed_form import (
    HypergeometricArgs,
    check_symmetry,
    closed_form_distribution,
    gauss_2f1_terminating,
    odd_time_support_bounds,
    rho,
    state_probability,
    state_probability_even,
)
from config import Config
from hexwalk.errors import InvalidParameterError, ResourceLimitError, UnsupportedParametersError
from hexwalk.exact_engine import evolve
from hexwalk.lattice import StepProbabilities


@pytest.mark.parametrize("args, expected", [
    (HypergeometricArgs(0, -5, 3, 0.7), 1),
    (HypergeometricArgs(-1, -1, 1, Fraction(2, 7)), 1 + Fraction(2, 7)),
    (HypergeometricArgs(-2, -2, 1, 1), 6),
    (HypergeometricArgs(-3, 4, 2, Fraction(1, 2)), 1 - 3 + Fraction(5, 2) - Fraction(5, 8)),
])
def test_gauss_2f1_terminating(args, expected):
    assert gauss_2f1_terminating(args) == expected


def test_gauss_2f1_rejects_nonterminating():
    with pytest.raises(UnsupportedParametersError):
        HypergeometricArgs(1, 2, 1, 0.5)
    with pytest.raises(UnsupportedParametersError):
        HypergeometricArgs(-1, -1, 0, 0.5)


def test_rho(battery_model, rho_undefined):
    (q00, q01, q02), (q10, q11, q12) = battery_model.q
    assert rho(battery_model).rho == q01 * q11 / (q02 * q12)
    assert rho(rho_undefined) is None


def test_return_probability_uniform(uniform):
    assert state_probability_even(0, 0, 1, uniform).value == Fraction(1, 3)


def test_outside_regions_is_zero(battery_model):
    assert state_probability_even(5, 3, 4, battery_model).value == 0
    assert state_probability_even(-5, 0, 4, battery_model).value == 0
    assert state_probability(0, 7, 9, battery_model).value == 0


def test_even_time_matches_oracle(battery_model):
    for m in range(1, 9):
        oracle = evolve(battery_model, 2 * m)
        distribution, source = closed_form_distribution(2 * m, battery_model)
        assert source == "closed-form"
        assert dict(distribution.mass) == dict(oracle.mass)


def test_even_time_float_mode(battery_model):
    for m in (3, 6):
        oracle = evolve(battery_model, 2 * m)
        distribution, _ = closed_form_distribution(2 * m, battery_model, "float")
        for state in set(distribution.mass) | set(oracle.mass):
            assert abs(distribution.probability(*state) - float(oracle.probability(*state))) <= 1e-12


def test_asymmetric_decimal_model_at_m_five():
    q = StepProbabilities.from_rows(["1/2", "1/4", "1/4"], ["1/5", "3/10", "1/2"])
    oracle = evolve(q, 10)
    for j in range(-5, 6):
        for k in range(-5, 6):
            assert state_probability_even(j, k, 5, q).value == oracle.probability(j, k)


def test_odd_time_first_step(battery_model):
    q00, q01, _ = battery_model.q[0]
    assert state_probability(0, 0, 1, battery_model).value == q00
    assert state_probability(-1, 1, 1, battery_model).value == q01


def test_odd_time_matches_oracle(battery_model):
    for n in (1, 3, 5, 7, 9):
        distribution, _ = closed_form_distribution(n, battery_model)
        assert dict(distribution.mass) == dict(evolve(battery_model, n).mass)


def test_odd_time_support(uniform):
    for m in range(0, 5):
        allowed = {(j, k) for j, low, high in odd_time_support_bounds(m) for k in range(low, high + 1)}
        assert set(evolve(uniform, 2 * m + 1).mass) == allowed


def test_rho_undefined_falls_back_to_oracle(rho_undefined):
    value = state_probability_even(0, 0, 3, rho_undefined)
    assert value.source == "oracle"
    assert value.value == evolve(rho_undefined, 6).probability(0, 0)
    distribution, source = closed_form_distribution(5, rho_undefined)
    assert source == "oracle"
    assert dict(distribution.mass) == dict(evolve(rho_undefined, 5).mass)


def test_state_probability_rejects_bad_time(uniform):
    with pytest.raises(InvalidParameterError):
        state_probability(0, 0, -1, uniform)
    with pytest.raises(InvalidParameterError):
        state_probability_even(0, 0, 0, uniform)


def test_symmetry_uniform(uniform):
    report = check_symmetry(uniform, 3)
    assert [case.applicable for case in report.cases] == [True, True, True]
    assert all(case.max_violation == 0 for case in report.cases)
    assert all(case.rho == 1 for case in report.cases)
    assert report.cases[0].parameter == 1 and report.cases[1].parameter == 1


def test_symmetry_equal_rows():
    q = StepProbabilities.from_rows(["2/5", "3/10", "3/10"], ["2/5", "3/10", "3/10"])
    cases = {case.case: case for case in check_symmetry(q, 4).cases}
    assert cases["ii"].applicable and cases["ii"].parameter == 1 and cases["ii"].max_violation == 0
    assert cases["iii"].applicable and cases["iii"].max_violation == 0


def test_symmetry_rho_one():
    q = StepProbabilities.from_rows(["1/5", "2/5", "2/5"], ["3/5", "1/5", "1/5"])
    cases = {case.case: case for case in check_symmetry(q, 3).cases}
    assert cases["i"].applicable and cases["i"].parameter == 1 and cases["i"].max_violation == 0
    assert not cases["ii"].applicable and not cases["iii"].applicable


def test_symmetry_with_nontrivial_parameters(symmetry_model):
    applicable = [case for case in check_symmetry(symmetry_model, 5).cases if case.applicable]
    assert applicable
    for case in applicable:
        assert case.max_violation == 0
        assert case.rho == 1
    assert any(case.parameter == 2 for case in applicable)


def test_symmetry_not_applicable():
    q = StepProbabilities.from_rows(["1/6", "1/2", "1/3"], ["1/4", "1/8", "5/8"])
    assert not any(case.applicable for case in check_symmetry(q, 2).cases)


def test_symmetry_odd_time_is_reported(uniform):
    report = check_symmetry(uniform, 2, odd=True)
    assert report.odd
    assert report.to_dict()["odd"] is True
    assert all(case.max_violation is not None for case in report.cases)


def test_symmetry_with_zero_parameters():
    # q01 = q12 = 0: координата 2k + j не растёт, ξ = δ = 0.
    q = StepProbabilities.from_rows(["1/2", "0", "1/2"], ["1/2", "1/2", "0"])
    cases = {case.case: case for case in check_symmetry(q, 3).cases}
    assert cases["i"].applicable and cases["i"].parameter == 0
    assert cases["ii"].applicable and cases["ii"].parameter == 0
    assert all(case.max_violation == 0 for case in cases.values())
    assert all(case.rho is None for case in cases.values())


def test_closed_form_respects_engine_cap(uniform, monkeypatch):
    monkeypatch.setattr(Config, "engine_max_steps", 10)
    with pytest.raises(ResourceLimitError):
        closed_form_distribution(12, uniform)
    with pytest.raises(InvalidParameterError):
        closed_form_distribution(-1, uniform)

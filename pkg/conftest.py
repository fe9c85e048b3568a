"""Общие фикстуры тестов: закреплённый набор моделей шага."""

import pytest

from commands.validate import PARAMETER_BATTERY, RHO_UNDEFINED, SYMMETRY_SETS
from hexwalk.lattice import StepProbabilities


@pytest.fixture
def uniform() -> StepProbabilities:
    return StepProbabilities.uniform()


@pytest.fixture(params=sorted(PARAMETER_BATTERY))
def battery_model(request) -> StepProbabilities:
    """Каждая модель набора по очереди."""
    return PARAMETER_BATTERY[request.param]


@pytest.fixture
def rho_undefined() -> StepProbabilities:
    return RHO_UNDEFINED


@pytest.fixture(params=sorted(SYMMETRY_SETS))
def symmetry_model(request) -> StepProbabilities:
    return SYMMETRY_SETS[request.param]

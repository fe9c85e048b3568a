"""Команда dist. Распределение состояний p_{j,k}(n) в формате CSV или JSON."""

from logging import getLogger
import sys

from commands.common import RunConfig, emit, log_start
from hexwalk.closed_form import closed_form_distribution
from hexwalk.exact_engine import evolve
from hexwalk.io import distribution_csv, distribution_json, heatmap

logger = getLogger(__name__)


def start(run_config: RunConfig) -> int:
    """Расчёт распределения точным движком или по замкнутой форме.

    :param run_config: параметры запуска.
    :return: код завершения.
    """
    log_start(run_config)
    n = run_config.require_n()
    mode = run_config.arithmetic or run_config.model.mode
    if run_config.engine == "closed-form":
        distribution, source = closed_form_distribution(n, run_config.model, mode)
        logger.info(f"closed-form distribution n={n}: values from {source}")
    else:
        distribution = evolve(run_config.model, n, mode=mode)
    if run_config.format == "json":
        emit(run_config, distribution_json(distribution))
    else:
        emit(run_config, distribution_csv(distribution, exact=run_config.arithmetic == "rational"))
    if run_config.heatmap:
        sys.stderr.write(heatmap(distribution))
    return 0

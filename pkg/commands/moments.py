"""Команда moments. Точные среднее, дисперсии и ковариация S_n в формате JSON."""

from commands.common import RunConfig, emit, log_start
from hexwalk.io import report_json
from hexwalk.pgf_moments import moments


def start(run_config: RunConfig) -> int:
    """Вывод сводки моментов для момента --n.

    :param run_config: параметры запуска.
    :return: код завершения.
    """
    log_start(run_config)
    emit(run_config, report_json(moments(run_config.require_n(), run_config.model)))
    return 0

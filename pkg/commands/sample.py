"""Команда sample. Конечные точки или траектории независимых реплик блуждания."""

import numpy as np

from commands.common import RunConfig, emit, log_start
from hexwalk.io import paths_csv, points_csv
from hexwalk.montecarlo import sample_endpoints, sample_paths


def start(run_config: RunConfig) -> int:
    """Моделирование --replicas реплик длины --n с зерном --seed.

    :param run_config: параметры запуска.
    :return: код завершения.
    """
    log_start(run_config)
    n = run_config.require_n()
    if run_config.paths:
        times = np.arange(n + 1)
        paths = sample_paths(n, run_config.replicas, run_config.model, run_config.seed, times=times)
        emit(run_config, paths_csv(paths, times.tolist()))
    else:
        points = sample_endpoints(n, run_config.replicas, run_config.model, run_config.seed)
        emit(run_config, points_csv(points))
    return 0

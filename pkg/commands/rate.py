"""Команда rate. Функции скорости больших (Λ*) и умеренных (Λ̃*) уклонений."""

from commands.common import RunConfig, axis_values, emit, log_start
from hexwalk.deviations import legendre, moderate_rate, rate_surface
from hexwalk.errors import InvalidParameterError
from hexwalk.io import rate_csv, report_json


def start(run_config: RunConfig) -> int:
    """Значение в точке --point (JSON) или поверхность на сетке --grid (CSV/JSON).

    :param run_config: параметры запуска.
    :return: код завершения.
    """
    log_start(run_config)
    q = run_config.model
    if run_config.point is not None:
        x, y = run_config.point
        result = legendre(x, y, q) if run_config.mode == "large" else moderate_rate(x, y, q)
        emit(run_config, report_json(result))
        return 0
    if run_config.grid is None:
        raise InvalidParameterError("command rate requires --point or --grid")
    x_axis, y_axis = run_config.grid
    results = rate_surface(q, axis_values(x_axis).tolist(), axis_values(y_axis).tolist(), mode=run_config.mode)
    if run_config.format == "json":
        emit(run_config, report_json([result.to_dict() for result in results]))
    else:
        emit(run_config, rate_csv(results))
    return 0

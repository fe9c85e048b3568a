"""Сериализация результатов: CSV и JSON для распределений, выборок и функций скорости."""

from csv import reader, writer
from fractions import Fraction
from io import StringIO
from json import dumps, loads
from logging import getLogger
from math import isfinite
from pathlib import Path
import sys
from typing import Any, Dict, Iterable, Optional, Sequence, Union

import numpy as np

from hexwalk.errors import InvalidParameterError
from hexwalk.exact_engine import Distribution
from hexwalk.lattice import Mode, Number

logger = getLogger(__name__)

DISTRIBUTION_HEADER = ("j", "k", "p")
POINTS_HEADER = ("replica", "x", "y")
PATHS_HEADER = ("replica", "t", "x", "y")
RATE_HEADER = ("x", "y", "rate", "finite")


def format_number(value: Union[Number, np.floating]) -> str:
    """Текстовое представление числа: дробь как "p/q", float с 17 значащими цифрами.

    :param value: число.
    :return: строка, из которой число восстанавливается без потерь.
    """
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, int):
        return str(value)
    value = float(value)
    if not isfinite(value):
        return "inf" if value > 0 else ("-inf" if value < 0 else "nan")
    return format(value, ".17g")


def parse_number(text: str, mode: Mode) -> Number:
    return Fraction(text) if mode == "rational" else float(text)


def _csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = StringIO()
    csv_writer = writer(buffer, lineterminator="\n")
    csv_writer.writerow(header)
    csv_writer.writerows(rows)
    return buffer.getvalue()


def distribution_csv(distribution: Distribution, exact: bool = False) -> str:
    """CSV `j,k,p` с состояниями в порядке (j, k).

    Вероятности пишутся десятичными числами с 17 значащими цифрами; дробь "p/q" остаётся
    только при exact=True для распределения в точном режиме.

    :param distribution: распределение;
    :param exact: писать точные дроби.
    :return: текст CSV.
    """
    keep = exact and distribution.mode == "rational"
    return _csv_text(
        DISTRIBUTION_HEADER,
        ((j, k, format_number(p if keep else float(p))) for (j, k), p in distribution.items()),
    )


def distribution_json(distribution: Distribution) -> str:
    """JSON {n, mode, entries: [{j, k, p}]}; в точном режиме p записывается дробью.

    :param distribution: распределение.
    :return: текст JSON.
    """
    payload = {
        "n": distribution.n,
        "mode": distribution.mode,
        "entries": [{"j": j, "k": k, "p": format_number(p)} for (j, k), p in distribution.items()],
    }
    return dumps(payload, ensure_ascii=False, indent=2) + "\n"


def _infer_mode(values: Sequence[str]) -> Mode:
    if all("/" in value or value.lstrip("-").isdigit() for value in values):
        return "rational"
    return "float"


def read_distribution_csv(text: str, n: int, mode: Optional[Mode] = None) -> Distribution:
    """Чтение распределения из CSV `j,k,p`.

    :param text: содержимое файла;
    :param n: момент времени (в CSV не хранится);
    :param mode: режим арифметики; по умолчанию определяется по записи чисел.
    :return: распределение.
    """
    rows = list(reader(StringIO(text)))
    if not rows or tuple(rows[0]) != DISTRIBUTION_HEADER:
        raise InvalidParameterError("distribution CSV must start with the header j,k,p")
    body = [row for row in rows[1:] if row]
    mode = mode or _infer_mode([row[2] for row in body])
    mass = {(int(j), int(k)): parse_number(p, mode) for j, k, p in body}
    return Distribution(n=n, mass=mass, mode=mode)


def read_distribution_json(text: str) -> Distribution:
    """Чтение распределения из JSON, записанного distribution_json.

    :param text: содержимое файла.
    :return: распределение.
    """
    payload: Dict[str, Any] = loads(text)
    mode = payload["mode"]
    mass = {(int(entry["j"]), int(entry["k"])): parse_number(str(entry["p"]), mode) for entry in payload["entries"]}
    return Distribution(n=int(payload["n"]), mass=mass, mode=mode)


def points_csv(points: np.ndarray) -> str:
    """CSV `replica,x,y` конечных точек реплик."""
    return _csv_text(
        POINTS_HEADER,
        ((replica, format_number(x), format_number(y)) for replica, (x, y) in enumerate(points)),
    )


def paths_csv(paths: np.ndarray, times: Sequence[int]) -> str:
    """CSV `replica,t,x,y` траекторий реплик в моменты times."""
    return _csv_text(
        PATHS_HEADER,
        (
            (replica, t, format_number(x), format_number(y))
            for replica, path in enumerate(paths)
            for t, (x, y) in zip(times, path)
        ),
    )


def rate_csv(results: Iterable[Any]) -> str:
    """CSV `x,y,rate,finite` по списку RateResult."""
    return _csv_text(
        RATE_HEADER,
        (
            (format_number(result.point[0]), format_number(result.point[1]), format_number(result.value),
             str(result.finite).lower())
            for result in results
        ),
    )


def report_json(report: Any) -> str:
    """JSON отчёта: объекты с методом to_dict сериализуются через него.

    :param report: отчёт или словарь.
    :return: текст JSON.
    """
    payload = report.to_dict() if hasattr(report, "to_dict") else report
    return dumps(payload, ensure_ascii=False, indent=2, default=_default) + "\n"


def _default(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, Fraction):
        return str(value)
    raise TypeError(f"{type(value).__name__} is not JSON serializable")


def heatmap(distribution: Distribution) -> str:
    """Текстовая карта 10²·p_{j,k}(n): строки по k сверху вниз, столбцы по j.

    :param distribution: распределение.
    :return: многострочный текст; "." отмечает нулевую вероятность.
    """
    if not len(distribution):
        return ""
    js = [j for j, _ in distribution.mass]
    ks = [k for _, k in distribution.mass]
    columns = range(min(js), max(js) + 1)
    lines = ["k\\j " + "".join(f"{j:>7}" for j in columns)]
    for k in range(max(ks), min(ks) - 1, -1):
        cells = []
        for j in columns:
            p = distribution.mass.get((j, k))
            cells.append(f"{'.':>7}" if p is None else f"{100 * float(p):>7.2f}")
        lines.append(f"{k:>3} " + "".join(cells))
    return "\n".join(lines) + "\n"


def write_text(text: str, path: Optional[str] = None):
    """Запись результата в файл или, если путь не задан, в стандартный вывод.

    :param text: содержимое;
    :param path: путь к файлу.
    """
    if path is None:
        sys.stdout.write(text)
        return
    with open(Path(path), "w", encoding="utf-8", newline="") as out_file:
        out_file.write(text)
    logger.debug(f"written {len(text)} characters to {path}")

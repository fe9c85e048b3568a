"""Общие инструменты команд: параметры запуска, разбор модели и вывод результата."""

from argparse import Namespace
from dataclasses import asdict, dataclass
from fractions import Fraction
from json import dumps
from logging import getLogger
import sys
from typing import Any, Dict, Literal, Optional, Tuple

import numpy as np

from config import Config
from hexwalk.errors import InvalidParameterError
from hexwalk.io import write_text
from hexwalk.lattice import Mode, StepProbabilities

logger = getLogger(__name__)

# Ключи файла параметров запуска совпадают с именами флагов CLI.
RUN_KEYS = (
    "n", "m", "q0", "q1", "a", "uniform", "seed", "replicas", "engine", "mode", "arithmetic",
    "grid", "point", "out", "format", "heatmap", "paths", "suite", "lang",
)

Axis = Tuple[float, float, int]


@dataclass(frozen=True)
class RunConfig:
    """Полный набор параметров одного запуска команды."""

    command: str
    model: StepProbabilities
    n: Optional[int] = None
    m: Optional[int] = None
    seed: int = 0
    replicas: int = 1
    engine: Literal["exact", "closed-form"] = "exact"
    mode: Literal["large", "moderate"] = "large"
    arithmetic: Optional[Mode] = None
    grid: Optional[Tuple[Axis, Axis]] = None
    point: Optional[Tuple[float, float]] = None
    out: Optional[str] = None
    format: Literal["csv", "json"] = "csv"
    heatmap: bool = False
    paths: bool = False
    suite: Optional[str] = None
    lang: str = "ru"

    def to_dict(self) -> Dict[str, Any]:
        payload = asdict(self)
        payload["model"] = self.model.to_dict()
        return payload

    def require_n(self) -> int:
        if self.n is None:
            raise InvalidParameterError(f"command {self.command} requires --n")
        if self.n < 0:
            raise InvalidParameterError(f"--n {self.n} must be nonnegative")
        return self.n


def parse_row(text: Any) -> Tuple[Any, ...]:
    """Строка вероятностей "p0,p1,p2" (или список из файла параметров) в кортеж из трёх строк."""
    if isinstance(text, str):
        values = text.split(",")
    elif isinstance(text, (list, tuple)):
        values = list(text)
    else:
        raise InvalidParameterError(f"a probability row must be a string or a list, got {text!r}")
    if len(values) != 3:
        raise InvalidParameterError(f"a probability row needs 3 entries, got {text!r}")
    return tuple(str(value).strip() for value in values)


def parse_model(q0: Any, q1: Any, a: Any, uniform: bool) -> StepProbabilities:
    """Модель шага из флагов.

    Если хотя бы одна вероятность записана дробью "p/q", все вероятности читаются как
    точные дроби (режим "rational"); иначе - как float.

    :param q0: строка вероятностей класса 0;
    :param q1: строка вероятностей класса 1;
    :param a: длина ребра (строка или число);
    :param uniform: симметричная модель q = 1/3.
    :return: модель шага.
    """
    spacing = 1 if a is None else str(a)
    if uniform or (q0 is None and q1 is None):
        if q0 is not None or q1 is not None:
            raise InvalidParameterError("--uniform cannot be combined with --q0/--q1")
        return StepProbabilities.uniform(a=spacing)
    if q0 is None or q1 is None:
        raise InvalidParameterError("both --q0 and --q1 are required")
    rows = parse_row(q0), parse_row(q1)
    try:
        if any("/" in value for row in rows for value in row):
            table = tuple(tuple(Fraction(value) for value in row) for row in rows)
        else:
            table = tuple(tuple(float(value) for value in row) for row in rows)
    except (ValueError, ZeroDivisionError) as error:
        raise InvalidParameterError(f"cannot parse probabilities: {error}") from error
    return StepProbabilities(q=table, a=spacing)


def parse_axis(text: str) -> Axis:
    """Ось сетки "min:max:steps"."""
    parts = text.split(":")
    if len(parts) != 3:
        raise InvalidParameterError(f"grid axis {text!r} must look like min:max:steps")
    try:
        low, high, steps = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as error:
        raise InvalidParameterError(f"grid axis {text!r}: {error}") from error
    if not (np.isfinite(low) and np.isfinite(high)) or steps < 1:
        raise InvalidParameterError(f"grid axis {text!r} needs finite bounds and steps >= 1")
    return low, high, steps


def parse_grid(text: Optional[str]) -> Optional[Tuple[Axis, Axis]]:
    """Сетка "xmin:xmax:steps,ymin:ymax:steps"."""
    if text is None:
        return None
    if not isinstance(text, str):
        raise InvalidParameterError(f"grid must be a string min:max:steps,min:max:steps, got {text!r}")
    axes = text.split(",")
    if len(axes) != 2:
        raise InvalidParameterError(f"grid {text!r} must contain two axes")
    return parse_axis(axes[0]), parse_axis(axes[1])


def axis_values(axis: Axis) -> np.ndarray:
    low, high, steps = axis
    return np.linspace(low, high, steps)


def _integer(key: str, value: Any, default: Optional[int] = None) -> Optional[int]:
    if value is None:
        return default
    if isinstance(value, bool) or isinstance(value, float) and not value.is_integer():
        raise InvalidParameterError(f"{key} must be an integer, got {value!r}")
    try:
        return int(value)
    except (TypeError, ValueError) as error:
        raise InvalidParameterError(f"{key} must be an integer, got {value!r}") from error


def _text(key: str, value: Any) -> Optional[str]:
    if value is not None and not isinstance(value, str):
        raise InvalidParameterError(f"{key} must be a string, got {value!r}")
    return value


def _point(value: Any) -> Optional[Tuple[float, float]]:
    if value is None:
        return None
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise InvalidParameterError(f"point must be a pair X Y, got {value!r}")
    try:
        return float(value[0]), float(value[1])
    except (TypeError, ValueError) as error:
        raise InvalidParameterError(f"point must be a pair of numbers, got {value!r}") from error


def build_run_config(args: Namespace) -> RunConfig:
    """Сборка RunConfig из аргументов CLI и, если задан --config, файла параметров.

    Флаги командной строки имеют приоритет над значениями из файла.

    :param args: разобранные аргументы.
    :return: параметры запуска.
    """
    values = {key: getattr(args, key, None) for key in RUN_KEYS}
    if getattr(args, "config", None):
        run_file = Config.load_run_file(args.config)
        if not isinstance(run_file, dict):
            raise InvalidParameterError("run file must contain a JSON object")
        unknown = sorted(set(run_file) - set(RUN_KEYS))
        if unknown:
            raise InvalidParameterError(f"unknown keys in run file: {', '.join(unknown)}")
        for key, value in run_file.items():
            if values.get(key) is None or values.get(key) is False:
                values[key] = value
    model = parse_model(values["q0"], values["q1"], values["a"], bool(values["uniform"]))
    defaults = RunConfig(command=args.command, model=model)
    run_config = RunConfig(
        command=args.command,
        model=model,
        n=_integer("n", values["n"]),
        m=_integer("m", values["m"]),
        seed=_integer("seed", values["seed"], defaults.seed),
        replicas=_integer("replicas", values["replicas"], defaults.replicas),
        engine=_text("engine", values["engine"]) or defaults.engine,
        mode=_text("mode", values["mode"]) or defaults.mode,
        arithmetic=_text("arithmetic", values["arithmetic"]),
        grid=parse_grid(values["grid"]),
        point=_point(values["point"]),
        out=_text("out", values["out"]),
        format=_text("format", values["format"]) or defaults.format,
        heatmap=bool(values["heatmap"]),
        paths=bool(values["paths"]),
        suite=_text("suite", values["suite"]),
        lang=_text("lang", values["lang"]) or Config.default_language,
    )
    if run_config.lang not in Config.LANGUAGE_FILES:
        raise InvalidParameterError(f"unknown language {run_config.lang!r}")
    if run_config.engine not in ("exact", "closed-form"):
        raise InvalidParameterError(f"unknown engine {run_config.engine!r}")
    if run_config.mode not in ("large", "moderate"):
        raise InvalidParameterError(f"unknown rate mode {run_config.mode!r}")
    if run_config.format not in ("csv", "json"):
        raise InvalidParameterError(f"unknown output format {run_config.format!r}")
    if run_config.arithmetic not in (None, "rational", "float"):
        raise InvalidParameterError(f"unknown arithmetic mode {run_config.arithmetic!r}")
    return run_config


def emit(run_config: RunConfig, text: str):
    """Вывод результата команды в файл --out или в стандартный вывод."""
    write_text(text, run_config.out)
    if run_config.out is not None:
        message(run_config, "written", run_config.out)


def message(run_config: RunConfig, key: str, *args: Any):
    """Сообщение пользователю из языкового файла (в stderr, чтобы не смешивать с данными)."""
    text = Config.get_language_obj(run_config.lang)["messages"][key].format(*args)
    print(text, file=sys.stderr)


def log_start(run_config: RunConfig):
    logger.debug(dumps(run_config.to_dict(), ensure_ascii=False, default=str))

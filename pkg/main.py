"""Случайное блуждание по гексагональной решётке.

Точка входа CLI: разбор аргументов, настройка логирования и запуск команд
dist, moments, sample, rate, validate.
"""

from argparse import ArgumentParser
from json import JSONDecodeError
from logging import DEBUG, FileHandler, Formatter, getLogger
import sys
from typing import List, Optional

from config import Config
from commands import dist, moments, rate, sample, validate
from commands.common import build_run_config
from hexwalk.errors import HexWalkError, NumericalFailureError, ResourceLimitError, UnsupportedParametersError

COMMANDS = {
    "dist": dist,
    "moments": moments,
    "sample": sample,
    "rate": rate,
    "validate": validate,
}

EXIT_OK = 0
EXIT_VALIDATION_FAILED = 1
EXIT_BAD_CONFIG = 2
EXIT_NUMERICAL_FAILURE = 3

logger = getLogger()


def setup_logging():
    """Логирование в файл Config.log_file (один раз за процесс)."""
    if any(isinstance(handler, FileHandler) for handler in logger.handlers):
        return
    logger.setLevel(DEBUG)
    handler = FileHandler(Config.log_file, mode="w", encoding="utf-8")
    formatter = Formatter("[%(name)s][%(asctime)s][%(levelname)s] %(message)s")
    handler.setFormatter(formatter)
    logger.addHandler(handler)


def build_parser() -> ArgumentParser:
    """Парсер аргументов: общие флаги модели и вывода для всех команд."""
    parser = ArgumentParser(
        prog="hexwalk",
        description="Случайное блуждание по гексагональной решётке: распределения, моменты, уклонения",
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", type=str, help="JSON-файл с параметрами запуска")
    parser.add_argument("--n", type=int, help="момент времени")
    parser.add_argument("--m", type=int, help="половина чётного момента времени (validate)")
    parser.add_argument("--q0", type=str, help="вероятности шага из вершин класса 0: p0,p1,p2")
    parser.add_argument("--q1", type=str, help="вероятности шага из вершин класса 1: p0,p1,p2")
    parser.add_argument("--a", type=str, help="длина ребра решётки")
    parser.add_argument("--uniform", action="store_true", help="q = 1/3 во всех направлениях, a = 1")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--replicas", type=int)
    parser.add_argument("--engine", choices=["exact", "closed-form"])
    parser.add_argument("--mode", choices=["large", "moderate"])
    parser.add_argument("--arithmetic", choices=["rational", "float"])
    parser.add_argument("--grid", type=str, help="xmin:xmax:steps,ymin:ymax:steps")
    parser.add_argument("--point", type=float, nargs=2, metavar=("X", "Y"))
    parser.add_argument("--out", type=str, help="файл результата; по умолчанию стандартный вывод")
    parser.add_argument("--format", choices=["csv", "json"])
    parser.add_argument("--heatmap", action="store_true", help="текстовая карта 10^2·p в stderr")
    parser.add_argument("--paths", action="store_true", help="записывать траектории целиком")
    parser.add_argument("--suite", type=str, help="запустить один набор проверок")
    parser.add_argument("--lang", choices=sorted(Config.LANGUAGE_FILES))
    return parser


def run(argv: Optional[List[str]] = None) -> int:
    """Запуск команды с преобразованием ошибок в коды завершения.

    :param argv: аргументы командной строки; по умолчанию sys.argv.
    :return: 0 - успех, 1 - проверка не пройдена, 2 - ошибка параметров, 3 - численный сбой.
    """
    args = build_parser().parse_args(argv)
    setup_logging()
    language = args.lang or Config.default_language
    try:
        run_config = build_run_config(args)
        return COMMANDS[run_config.command].start(run_config)
    except (NumericalFailureError, UnsupportedParametersError) as error:
        logger.exception(error)
        print(Config.get_language_obj(language)["messages"]["numerical_failure"].format(error), file=sys.stderr)
        return EXIT_NUMERICAL_FAILURE
    except (HexWalkError, ValueError, OSError, JSONDecodeError) as error:
        if isinstance(error, ResourceLimitError):
            logger.warning(error)
        else:
            logger.exception(error)
        print(Config.get_language_obj(language)["messages"]["bad_config"].format(error), file=sys.stderr)
        return EXIT_BAD_CONFIG


if __name__ == "__main__":
    raise SystemExit(run())

"""Настройки приложения и общие вспомогательные инструменты."""

from json import loads
from os import cpu_count, environ
from pathlib import Path
from typing import Any, Dict, Literal, Optional

BASE_DIR = Path(__file__).resolve().parent


class Config:
    """Статический класс, хранящий в себе настройки приложения и управляющий ими."""

    engine_max_steps: int = 10_000
    replica_block: int = 1024
    newton_max_iter: int = 200
    newton_tol: float = 1e-10
    log_file: str = "hexwalk.log"

    LANGUAGE_FILES: Dict[str, Path] = {
        "ru": BASE_DIR / "lang_files" / "russian.json",
        "en": BASE_DIR / "lang_files" / "english.json",
    }

    default_language: Literal["ru", "en"] = "ru"
    language_objs: Dict[str, Dict[str, Any]] = {}

    @classmethod
    def get_threads(cls) -> int:
        """Число потоков для параллельных вычислений (переменная окружения HEXWALK_THREADS).

        :return: число потоков, не меньше 1.
        """
        value = environ.get("HEXWALK_THREADS")
        if value is None or not value.strip():
            return cpu_count() or 1
        try:
            return max(1, int(value))
        except ValueError:
            return 1

    @classmethod
    def get_language_obj(cls, language: Optional[str] = None) -> Dict[str, Any]:
        """Получение сообщений из языкового файла.

        :param language: языковой код; по умолчанию - язык приложения.
        :return: объект сообщений, спарсеный из языкового файла.
        """
        language = language or cls.default_language
        if language not in cls.language_objs:
            with open(cls.LANGUAGE_FILES[language], "r", encoding="utf-8") as lang_file:
                cls.language_objs[language] = loads(lang_file.read())
        return cls.language_objs[language]

    @classmethod
    def load_run_file(cls, path: str) -> Dict[str, Any]:
        """Чтение JSON-файла с параметрами запуска.

        :param path: путь к файлу.
        :return: словарь параметров (ключи совпадают с именами флагов CLI).
        """
        with open(path, "r", encoding="utf-8") as run_file:
            return loads(run_file.read())

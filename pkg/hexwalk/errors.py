"""Исключения библиотеки."""

from typing import Any, Optional


class HexWalkError(Exception):
    """Базовое исключение библиотеки."""


class InvalidParameterError(HexWalkError, ValueError):
    """Некорректный параметр модели или операции."""


class ResourceLimitError(HexWalkError):
    """Запрошенный объём вычислений превышает настроенный предел."""


class UnsupportedParametersError(HexWalkError):
    """Комбинация параметров, которую библиотека не вычисляет (например, нетерминирующий ряд)."""


class NumericalFailureError(HexWalkError):
    """Численный метод не сошёлся."""

    def __init__(self, message: str, last_iterate: Optional[Any] = None):
        """Численный метод не сошёлся.

        :param message: описание ошибки;
        :param last_iterate: последнее приближение метода.
        """
        super().__init__(message)
        self.last_iterate = last_iterate

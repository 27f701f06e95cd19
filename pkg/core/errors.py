#!/usr/bin/env python3
"""
Errores - Jerarquía de excepciones del identificador de redes ReLU
Cada error lleva un tipo estable que la CLI traduce a un diccionario de resultado
"""

from enum import Enum
from typing import Any, Dict, Optional


class ErrorKind(str, Enum):
    """Tipo de error, usado como clave estable en los informes."""

    SHAPE = "shape"
    DOMAIN = "domain"
    BUDGET = "budget"
    UNSUPPORTED_DEPTH = "unsupported_depth"
    SAMPLING_FAILURE = "sampling_failure"
    CONSTRUCTION_FAILURE = "construction_failure"
    MALFORMED_INPUT = "malformed_input"


class ReluIdentError(Exception):
    """Error base de la biblioteca."""

    kind: ErrorKind = ErrorKind.DOMAIN

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_result(self) -> Dict[str, Any]:
        """Convierte el error en el diccionario de resultado de la CLI."""
        result = {"success": False, "error": self.kind.value, "message": self.message}
        if self.details:
            result["details"] = {k: _plain(v) for k, v in self.details.items()}
        return result


class ShapeError(ReluIdentError):
    kind = ErrorKind.SHAPE


class DomainError(ReluIdentError):
    kind = ErrorKind.DOMAIN


class BudgetExceededError(ReluIdentError):
    """Presupuesto superado (caminos, consultas al oráculo...)."""

    kind = ErrorKind.BUDGET

    def __init__(self, message: str, count: Optional[int] = None, limit: Optional[int] = None):
        super().__init__(message, count=count, limit=limit)
        self.count = count
        self.limit = limit


class UnsupportedDepthError(ReluIdentError):
    kind = ErrorKind.UNSUPPORTED_DEPTH


class SamplingFailureError(ReluIdentError):
    kind = ErrorKind.SAMPLING_FAILURE


class ConstructionFailureError(ReluIdentError):
    kind = ErrorKind.CONSTRUCTION_FAILURE


class MalformedInputError(ReluIdentError):
    kind = ErrorKind.MALFORMED_INPUT


def _plain(value: Any) -> Any:
    if isinstance(value, (int, float, str, bool)) or value is None:
        return value
    return str(value)

# -*- coding: utf-8 -*-
"""
Utilities for handling unicode and number checks
"""
from __future__ import annotations

import math

from .errors import InvalidInputError


def u(text: str | bytes, encoding: str = "utf-8") -> str:
    "Return unicode text with unix newlines, no matter what"

    if isinstance(text, bytes):
        text_str: str = text.decode(encoding)
    else:
        text_str = text

    return text_str.replace("\r\n", "\n")


def finite(value: float, name: str) -> float:
    "Coerce ``value`` to float, rejecting NaN and infinities"
    try:
        number = float(value)
    except (TypeError, ValueError):
        raise InvalidInputError(f"{name} must be a number, got {value!r}") from None

    if not math.isfinite(number):
        raise InvalidInputError(f"{name} must be finite, got {number!r}")
    return number

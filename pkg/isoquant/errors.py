# -*- coding: utf-8 -*-
"""
Exceptions raised by isoquant.

Everything derives from :py:class:`IsoquantError`, so callers (and the
command line) can catch one class. Input problems are also ``ValueError``.
"""
from __future__ import annotations


__all__ = [
    "IsoquantError",
    "InvalidInputError",
    "SampleFormatError",
    "NoDataError",
    "OrderingError",
    "StructureError",
    "TooLargeError",
    "MapFormatError",
]


class IsoquantError(Exception):
    "Base class for every error raised by this package"


class InvalidInputError(IsoquantError, ValueError):
    "A sample, grid, score or argument is not acceptable"


class SampleFormatError(InvalidInputError):
    """
    A row of sample input could not be parsed.
    ``lineno`` is 1-based and counts comment lines too.
    """

    def __init__(self, lineno: int, message: str) -> None:
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}")


class NoDataError(IsoquantError):
    "There is nothing to fit or evaluate"


class OrderingError(IsoquantError, ValueError):
    "A score arrived below the previous one in an ordered stream"

    def __init__(
        self, score: float, last_score: float, lineno: int | None = None
    ) -> None:
        self.score = score
        self.last_score = last_score
        self.lineno = lineno
        where = "" if lineno is None else f"line {lineno}: "
        super().__init__(
            f"{where}score {score!r} arrived after {last_score!r}; "
            "use the unordered calibrator for out-of-order data"
        )


class StructureError(IsoquantError):
    "Merge-tree summaries are inconsistent"


class TooLargeError(IsoquantError):
    "An exhaustive search would visit too many candidates"


class MapFormatError(IsoquantError, ValueError):
    "A serialized calibration map is corrupt, truncated or unknown"

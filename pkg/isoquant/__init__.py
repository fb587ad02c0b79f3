# -*- coding: utf-8 -*-
"""
isoquant: optimal quantized isotonic calibration, in batch or streaming
"""
from __future__ import annotations

import io
import logging
from typing import TYPE_CHECKING, Any, Iterable

from .batch import fit_batch
from .core import (
    Block,
    CalibrationMap,
    ExplicitLevels,
    QuantizationGrid,
    Sample,
    UniformLattice,
    parse_grid,
    total_loss,
)
from .default_handlers import JSONHandler, TOMLHandler, YAMLHandler
from .errors import InvalidInputError, IsoquantError, MapFormatError
from .mergetree import MergeTree, fit_recursive
from .prefix import PrefixState
from .util import finite, u


if TYPE_CHECKING:
    from .default_handlers import BaseHandler


__all__ = [
    "fit",
    "load",
    "loads",
    "dump",
    "dumps",
    "Sample",
    "CalibrationMap",
    "ExplicitLevels",
    "UniformLattice",
    "parse_grid",
    "total_loss",
    "IsoquantError",
]

logger = logging.getLogger(__name__)

MAP_FORMAT_VERSION = 1

BLOCK_FIELDS = ("level", "score_max", "score_min", "sum_w", "sum_wy")

# global handlers
handlers = [
    Handler()
    for Handler in [YAMLHandler, JSONHandler, TOMLHandler]
    if Handler is not None
]


def fit(
    samples: Iterable[Sample], grid: QuantizationGrid, method: str = "batch"
) -> CalibrationMap:
    """
    Fit a calibration map with one of the solvers. They all return the
    same staircase; ``ordered`` needs samples sorted by score.

    .. doctest::

        >>> samples = [Sample(3, 0.5), Sample(1, 0.9), Sample(2, 0.1)]
        >>> grid = ExplicitLevels((0, 0.5, 1))
        >>> isoquant.fit(samples, grid, method="unordered").levels
        [0.5]

    """
    if method == "batch":
        return fit_batch(samples, grid)

    if method == "ordered":
        state = PrefixState(grid)
        for sample in samples:
            state.push(sample)
        return state.snapshot()

    if method == "unordered":
        tree = MergeTree(grid)
        for sample in samples:
            tree.insert(sample)
        return tree.root_map()

    if method == "recursive":
        return fit_recursive(samples, grid)

    raise InvalidInputError(f"unknown method {method!r}")


def detect_format(text: str, handlers: Iterable[BaseHandler]) -> BaseHandler | None:
    """
    Figure out which handler to use for a map document.
    Returns a handler instance or None.
    """
    for handler in handlers:
        if handler.detect(text):
            return handler

    # nothing matched, give nothing back
    return None


def to_document(cmap: CalibrationMap) -> dict[str, Any]:
    "Map as a plain document, ready for any handler"
    document = cmap.to_dict()
    document["version"] = MAP_FORMAT_VERSION
    return document


def _number(record: dict[str, Any], key: str, where: str) -> float:
    value = record[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise MapFormatError(f"{where}: {key} must be a number, got {value!r}")
    try:
        return finite(value, key)
    except InvalidInputError as e:
        raise MapFormatError(f"{where}: {e}") from None


def from_document(document: Any) -> CalibrationMap:
    """
    Rebuild a map from :py:func:`to_document` output, checking every field.
    Raises :py:class:`MapFormatError <isoquant.errors.MapFormatError>`.
    """
    if not isinstance(document, dict):
        raise MapFormatError("a map document must be a mapping")

    version = document.get("version")
    if version != MAP_FORMAT_VERSION:
        raise MapFormatError(f"unsupported or missing map version {version!r}")

    try:
        grid = QuantizationGrid.from_dict(document.get("grid"))
    except InvalidInputError as e:
        raise MapFormatError(f"bad grid: {e}") from None

    records = document.get("blocks")
    if not isinstance(records, list) or not records:
        raise MapFormatError("a map needs a non-empty list of blocks")

    blocks = []
    for i, record in enumerate(records, start=1):
        where = f"block {i}"
        if not isinstance(record, dict) or set(record) != set(BLOCK_FIELDS):
            raise MapFormatError(f"{where}: expected fields {', '.join(BLOCK_FIELDS)}")

        block = Block(**{key: _number(record, key, where) for key in BLOCK_FIELDS})
        if block.sum_w <= 0:
            raise MapFormatError(f"{where}: sum_w must be positive")
        if block.level != grid.project(block.mean):
            raise MapFormatError(f"{where}: level does not match the block mean")
        blocks.append(block)

    try:
        return CalibrationMap(tuple(blocks), grid)
    except InvalidInputError as e:
        raise MapFormatError(str(e)) from None


def load(
    fd: str | io.IOBase, encoding: str = "utf-8", handler: BaseHandler | None = None
) -> CalibrationMap:
    """
    Load a map from a file-like object or filename.

    .. doctest::

        >>> cmap = isoquant.load('tests/maps/two-steps.yaml')
        >>> cmap(1.4), cmap(10)
        (0.0, 1.0)

    """
    if hasattr(fd, "read"):
        text = fd.read()

    else:
        with open(fd, "r", encoding=encoding) as f:
            text = f.read()

    return loads(text, encoding, handler)


def loads(
    text: str | bytes, encoding: str = "utf-8", handler: BaseHandler | None = None
) -> CalibrationMap:
    """
    Parse a map from text (binary or unicode), detecting the format unless
    a handler is given.
    """
    text = u(text, encoding)
    handler = handler or detect_format(text, handlers)
    if handler is None:
        raise MapFormatError("unrecognised map format")

    logger.debug("reading map with %s", type(handler).__name__)
    return from_document(handler.load(text))


def dump(
    cmap: CalibrationMap,
    fd: str | io.IOBase,
    encoding: str = "utf-8",
    handler: BaseHandler | None = None,
) -> None:
    """
    Serialize a map and write it to a file-like object or filename.
    Text will be encoded on the way out (utf-8 by default).
    """
    content = dumps(cmap, handler)
    if hasattr(fd, "write"):
        fd.write(content.encode(encoding))

    else:
        with open(fd, "w", encoding=encoding) as f:
            f.write(content)


def dumps(cmap: CalibrationMap, handler: BaseHandler | None = None) -> str:
    """
    Serialize a map to text, as YAML unless another handler is passed.
    The YAML output is canonical: equal maps give identical text.

    .. doctest::

        >>> cmap = isoquant.fit([Sample(1, 1), Sample(2, 0)], ExplicitLevels((0, 0.5, 1)))
        >>> print(isoquant.dumps(cmap), end="")
        ---
        blocks:
        - level: 0.5
          score_max: 2.0
          score_min: 1.0
          sum_w: 2.0
          sum_wy: 1.0
        grid:
          levels:
          - 0.0
          - 0.5
          - 1.0
        version: 1

    """
    handler = handler or YAMLHandler()
    return handler.export(to_document(cmap))

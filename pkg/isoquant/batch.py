# -*- coding: utf-8 -*-
"""
Linear-time batch fitting: pool adjacent violators over score-sorted
samples, then project each pooled mean onto the grid.

::

    >>> from isoquant.core import ExplicitLevels, Sample, total_loss
    >>> samples = [Sample(1, 1), Sample(2, 0)]
    >>> cmap = fit_batch(samples, ExplicitLevels((0, 0.5, 1)))
    >>> cmap.levels, total_loss(cmap, samples)
    ([0.5], 0.5)

"""
from __future__ import annotations

import logging
from itertools import groupby
from operator import attrgetter
from typing import Iterable

from .core import (
    Block,
    CalibrationMap,
    QuantizationGrid,
    Sample,
    mean_violates,
    merge_blocks,
)
from .errors import NoDataError


__all__ = [
    "sort_and_coalesce",
    "pool_adjacent_violators",
    "coalesce_levels",
    "fit_batch",
]

logger = logging.getLogger(__name__)


def sort_and_coalesce(
    samples: Iterable[Sample], grid: QuantizationGrid
) -> list[Block]:
    """
    One block per distinct score, in increasing score order. Samples
    sharing a score are pooled into a single weighted block.
    """
    ordered = sorted(samples, key=attrgetter("score"))
    blocks = []
    for _, group in groupby(ordered, key=attrgetter("score")):
        first, *rest = group
        block = Block.from_sample(first, grid)
        for sample in rest:
            block = merge_blocks(block, Block.from_sample(sample, grid), grid)
        blocks.append(block)
    return blocks


def pool_adjacent_violators(
    blocks: Iterable[Block], grid: QuantizationGrid
) -> tuple[list[Block], int]:
    """
    Stack-based left to right sweep: every new block is pooled with its
    predecessor for as long as the predecessor's mean is at least its own.
    Returns the pooled blocks and the number of joins made.
    """
    stack: list[Block] = []
    joins = 0
    for block in blocks:
        while stack and mean_violates(stack[-1], block):
            block = merge_blocks(stack.pop(), block, grid)
            joins += 1
        stack.append(block)
    return stack, joins


def coalesce_levels(blocks: Iterable[Block], grid: QuantizationGrid) -> list[Block]:
    "Pool neighbouring blocks that project to the same level"
    merged: list[Block] = []
    for block in blocks:
        while merged and merged[-1].level >= block.level:
            block = merge_blocks(merged.pop(), block, grid)
        merged.append(block)
    return merged


def fit_batch(samples: Iterable[Sample], grid: QuantizationGrid) -> CalibrationMap:
    """
    Optimal monotone map from scores to grid levels under weighted
    squared error.
    """
    blocks = sort_and_coalesce(samples, grid)
    if not blocks:
        raise NoDataError("cannot fit a calibration map without samples")

    pooled, joins = pool_adjacent_violators(blocks, grid)
    staircase = coalesce_levels(pooled, grid)
    logger.debug(
        "batch fit: %d scores, %d joins, %d groups",
        len(blocks),
        joins,
        len(staircase),
    )
    return CalibrationMap(tuple(staircase), grid)

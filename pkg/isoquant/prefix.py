# -*- coding: utf-8 -*-
"""
Streaming calibration for samples that arrive in nondecreasing score order.

Samples sharing the newest score are pooled into a pending block. Once a
larger score arrives the pending block is complete: it goes onto the
stack of settled groups and is pooled backwards. Groups are pooled when
their means violate monotonicity and also when they quantize to the same
level, which keeps the number of groups at most the number of grid levels.

::

    >>> from isoquant.core import ExplicitLevels, Sample
    >>> state = PrefixState(ExplicitLevels((0, 1)))
    >>> state.push(Sample(1, 0.1)).push(Sample(2, 0.2)).snapshot().levels
    [0.0]

"""
from __future__ import annotations

import logging

from .core import (
    Block,
    CalibrationMap,
    QuantizationGrid,
    Sample,
    merge_blocks,
    needs_join,
)
from .errors import NoDataError, OrderingError


__all__ = ["PrefixState", "push_ordered", "snapshot"]

logger = logging.getLogger(__name__)


class PrefixState(object):
    """
    Current groups of an ordered stream.

    ``stack`` holds the settled groups, in score order with strictly
    increasing levels; ``pending`` pools every sample seen so far at the
    newest score. ``join_counter`` counts the poolings made while settling.
    """

    def __init__(self, grid: QuantizationGrid) -> None:
        self.grid = grid
        self.stack: list[Block] = []
        self.pending: Block | None = None
        self.join_counter = 0
        self.count = 0

    def __len__(self) -> int:
        "Number of groups"
        return len(self.groups())

    @property
    def last_score(self) -> float | None:
        return self.pending.score_max if self.pending is not None else None

    def _settle(self, stack: list[Block], block: Block) -> int:
        joins = 0
        while stack and needs_join(stack[-1], block):
            block = merge_blocks(stack.pop(), block, self.grid)
            joins += 1
        stack.append(block)
        return joins

    def push(self, sample: Sample) -> PrefixState:
        "Add the next sample; its score must not be below the previous one"
        last = self.last_score
        if last is not None and sample.score < last:
            logger.debug("rejecting score %r after %r", sample.score, last)
            raise OrderingError(sample.score, last)

        block = Block.from_sample(sample, self.grid)
        if self.pending is not None and last == sample.score:
            block = merge_blocks(self.pending, block, self.grid)
        elif self.pending is not None:
            self.join_counter += self._settle(self.stack, self.pending)

        self.pending = block
        self.count += 1
        return self

    def groups(self) -> list[Block]:
        "The current groups, with the pending block pooled in"
        if self.pending is None:
            return []
        stack = list(self.stack)
        self._settle(stack, self.pending)
        return stack

    def snapshot(self) -> CalibrationMap:
        "The current staircase; later pushes do not change it"
        groups = self.groups()
        if not groups:
            raise NoDataError("no samples have been pushed")
        return CalibrationMap(tuple(groups), self.grid)


def push_ordered(state: PrefixState, sample: Sample) -> PrefixState:
    "Push ``sample`` onto ``state`` and return the state"
    return state.push(sample)


def snapshot(state: PrefixState) -> CalibrationMap:
    "Immutable copy of the staircase held by ``state``"
    return state.snapshot()

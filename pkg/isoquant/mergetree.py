# -*- coding: utf-8 -*-
"""
Streaming calibration for samples that arrive in any score order.

Leaves hold one block per distinct score, in score order. Every level
above is built from the one below: each node either merges two adjacent
nodes or moves a single node up unchanged, and no two neighbouring nodes
are both moved up. That keeps the number of nodes shrinking by about a
third per level, so the tree has logarithmic depth.

A new leaf changes only a couple of nodes per level:

- a leaf landing between two merged siblings takes the right sibling's
  place (the merge is left-biased) and the displaced sibling is
  rescheduled;
- a scheduled node joins a neighbouring moved-up node when there is one,
  otherwise it moves up itself and is scheduled on the next level;
- every changed node is re-merged on the way to the root.

The root summary is the optimal quantized staircase for every sample
inserted so far.

::

    >>> from isoquant.core import ExplicitLevels, Sample
    >>> tree = MergeTree(ExplicitLevels((0, 0.5, 1)))
    >>> for sample in [Sample(3, 0.5), Sample(1, 0.9), Sample(2, 0.1)]:
    ...     _ = tree.insert(sample)
    >>> tree.root_map().levels
    [0.5]

"""
from __future__ import annotations

import logging
from bisect import bisect_left
from dataclasses import dataclass
from typing import Iterable, Iterator

from .batch import sort_and_coalesce
from .core import (
    Block,
    CalibrationMap,
    QuantizationGrid,
    Sample,
    merge_blocks,
    needs_join,
)
from .errors import NoDataError, StructureError


__all__ = [
    "SetSummary",
    "TreeNode",
    "UpdateStats",
    "MergeTree",
    "merge_summaries",
    "fit_recursive",
    "insert",
    "root_map",
    "stats",
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SetSummary:
    """
    Fully pooled groups of a contiguous run of scores: per group the
    smallest and largest score, the pooled mean and the total weight,
    all carried by :py:class:`Block`.
    """

    blocks: tuple[Block, ...]

    @property
    def group_count(self) -> int:
        return len(self.blocks)

    @property
    def score_min(self) -> float:
        return self.blocks[0].score_min

    @property
    def score_max(self) -> float:
        return self.blocks[-1].score_max

    def same_as(self, other: SetSummary) -> bool:
        "Equal groups, down to their exact sums"
        return len(self.blocks) == len(other.blocks) and all(
            a.same_as(b) for a, b in zip(self.blocks, other.blocks)
        )


def merge_summaries(
    left: SetSummary, right: SetSummary, grid: QuantizationGrid
) -> SetSummary:
    """
    Combine two summaries over neighbouring score ranges. Groups are only
    pooled around the seam, so the cost is the number of joins made.
    """
    if not left.blocks:
        return right
    if not right.blocks:
        return left
    if left.score_max >= right.score_min:
        raise StructureError(
            f"summaries overlap: {left.score_max!r} >= {right.score_min!r}"
        )

    stack = list(left.blocks)
    rest = right.blocks
    for i, block in enumerate(rest):
        joined = False
        while stack and needs_join(stack[-1], block):
            block = merge_blocks(stack.pop(), block, grid)
            joined = True
        stack.append(block)
        if not joined:
            # right's remaining groups are already pooled against this one
            stack.extend(rest[i + 1 :])
            break
    return SetSummary(tuple(stack))


def fit_recursive(samples: Iterable[Sample], grid: QuantizationGrid) -> CalibrationMap:
    """
    Batch form of the merge tree: one summary per distinct score, then
    neighbours merged pairwise, level by level, until one summary is left.
    An odd summary at the end of a level moves up unchanged.
    """
    row = [SetSummary((block,)) for block in sort_and_coalesce(samples, grid)]
    if not row:
        raise NoDataError("cannot fit a calibration map without samples")

    height = 1
    while len(row) > 1:
        merged = [
            merge_summaries(row[i], row[i + 1], grid)
            for i in range(0, len(row) - 1, 2)
        ]
        if len(row) % 2:
            merged.append(row[-1])
        row = merged
        height += 1

    logger.debug("recursive fit: %d levels, %d groups", height, row[0].group_count)
    return CalibrationMap(row[0].blocks, grid)


@dataclass(frozen=True)
class UpdateStats:
    """
    Work counters since the tree was created.

    ``nodes_touched`` is the count for the latest insertion,
    ``merge_work`` the total number of group joins made by re-merges.
    """

    inserts: int = 0
    nodes_touched: int = 0
    max_touched: int = 0
    total_touched: int = 0
    depth: int = 0
    merge_work: int = 0


class TreeNode(object):
    """
    A set at height ``level_index`` (leaves are 1). ``prev`` and ``next``
    link the nodes of one level in score order.
    """

    __slots__ = ("level_index", "summary", "children", "parent", "prev", "next")

    def __init__(
        self,
        level_index: int,
        summary: SetSummary | None = None,
        children: list[TreeNode] | None = None,
    ) -> None:
        self.level_index = level_index
        self.summary = summary
        self.children: list[TreeNode] = children or []
        self.parent: TreeNode | None = None
        self.prev: TreeNode | None = None
        self.next: TreeNode | None = None

    @property
    def status(self) -> str:
        "``leaf``, ``moved-up`` or ``merged``"
        if not self.children:
            return "leaf"
        return "moved-up" if len(self.children) == 1 else "merged"

    def __repr__(self) -> str:
        groups = self.summary.group_count if self.summary else 0
        return f"<TreeNode level={self.level_index} {self.status} groups={groups}>"


_Dirty = dict[int, dict[int, TreeNode]]


class MergeTree(object):
    """
    Out-of-order calibrator. Insert samples in any order and read the
    optimal staircase from :py:meth:`root_map` at any time.
    """

    def __init__(self, grid: QuantizationGrid) -> None:
        self.grid = grid
        self.count = 0
        self._root: TreeNode | None = None
        self._scores: list[float] = []
        self._leaves: list[TreeNode] = []
        self._stats = UpdateStats()

    def __len__(self) -> int:
        "Number of distinct scores"
        return len(self._leaves)

    @property
    def root(self) -> TreeNode | None:
        return self._root

    @property
    def depth(self) -> int:
        return self._root.level_index if self._root else 0

    def insert(self, sample: Sample) -> MergeTree:
        "Add one sample at its place in score order"
        dirty: _Dirty = {}
        block = Block.from_sample(sample, self.grid)
        i = bisect_left(self._scores, sample.score)

        if i < len(self._scores) and self._scores[i] == sample.score:
            leaf = self._leaves[i]
            assert leaf.summary is not None
            pooled = merge_blocks(leaf.summary.blocks[0], block, self.grid)
            leaf.summary = SetSummary((pooled,))
            if leaf.parent is not None:
                self._mark(dirty, leaf.parent)
        else:
            leaf = TreeNode(1, SetSummary((block,)))
            left = self._leaves[i - 1] if i > 0 else None
            right = self._leaves[i] if i < len(self._leaves) else None
            self._scores.insert(i, sample.score)
            self._leaves.insert(i, leaf)
            self._place(leaf, left, right, dirty)

        touched, work = self._propagate(dirty)
        self.count += 1
        self._record(touched + 1, work)
        return self

    def root_map(self) -> CalibrationMap:
        "The optimal staircase for everything inserted so far"
        if self._root is None:
            raise NoDataError("the merge tree is empty")
        assert self._root.summary is not None
        return CalibrationMap(self._root.summary.blocks, self.grid)

    def stats(self) -> UpdateStats:
        return self._stats

    def levels(self) -> Iterator[list[TreeNode]]:
        "Nodes level by level, leaves first, each level in score order"
        node = self._leaves[0] if self._leaves else None
        while node is not None:
            row = []
            cur: TreeNode | None = node
            while cur is not None:
                row.append(cur)
                cur = cur.next
            yield row
            node = node.parent

    def audit(self) -> int:
        """
        Check every structural and summary invariant, raising
        :py:class:`StructureError` on the first failure. Returns the
        number of nodes.
        """
        cardinality = self.grid.cardinality
        total = 0
        for height, row in enumerate(self.levels(), start=1):
            for before, node in zip([None, *row], row):
                total += 1
                self._audit_node(node, before, height)

                summary = node.summary
                assert summary is not None
                if cardinality is not None and summary.group_count > cardinality:
                    raise StructureError(f"{node!r} has more groups than grid levels")

            if row[0].parent is None:
                if len(row) != 1 or row[0] is not self._root:
                    raise StructureError(f"level {height} has no single root")
        return total

    def _audit_node(self, node: TreeNode, before: TreeNode | None, height: int) -> None:
        if node.level_index != height or node.prev is not before:
            raise StructureError(f"{node!r} is linked at the wrong place")
        if before is not None:
            assert before.summary is not None and node.summary is not None
            if before.summary.score_max >= node.summary.score_min:
                raise StructureError(f"{node!r} overlaps its left neighbour")
            if (
                before.parent is not None
                and node.parent is not None
                and before.parent.status == "moved-up"
                and node.parent.status == "moved-up"
            ):
                raise StructureError(f"{node!r} and its neighbour both moved up")

        if node.parent is None and node is not self._root:
            raise StructureError(f"{node!r} has no parent")
        if node.parent is not None and node not in node.parent.children:
            raise StructureError(f"{node!r} is missing from its parent")
        if len(node.children) == 2 and node.children[0].next is not node.children[1]:
            raise StructureError(f"{node!r} merges non-adjacent children")
        if node.children:
            expected, _ = self._combine(node)
            if node.summary is None or not expected.same_as(node.summary):
                raise StructureError(f"{node!r} summary is stale")

    def _place(
        self,
        node: TreeNode,
        left: TreeNode | None,
        right: TreeNode | None,
        dirty: _Dirty,
    ) -> None:
        # link a new node between its neighbours on its level, then find it a parent
        node.prev, node.next = left, right
        if left is not None:
            left.next = node
        if right is not None:
            right.prev = node

        root = self._root
        if root is None:
            self._root = node
            return

        if root.level_index == node.level_index:
            pair = [root, node] if left is root else [node, root]
            new_root = TreeNode(node.level_index + 1, children=pair)
            root.parent = node.parent = new_root
            self._root = new_root
            self._mark(dirty, new_root)
            logger.debug("merge tree grew to depth %d", new_root.level_index)
            return

        if left is not None and right is not None and left.parent is right.parent:
            # left-biased: the new node takes over the merge, right is rescheduled
            parent = left.parent
            assert parent is not None
            parent.children = [left, node]
            node.parent = parent
            right.parent = None
            self._mark(dirty, parent)
            self._schedule(right, dirty)
        else:
            self._schedule(node, dirty)

    def _schedule(self, node: TreeNode, dirty: _Dirty) -> None:
        left, right = node.prev, node.next
        host: TreeNode | None = None
        if left is not None and left.parent is not None:
            if len(left.parent.children) == 1:
                host = left.parent
                host.children = [left, node]
        if host is None and right is not None and right.parent is not None:
            if len(right.parent.children) == 1:
                host = right.parent
                host.children = [node, right]

        if host is None:
            host = TreeNode(node.level_index + 1, children=[node])
            node.parent = host
            self._mark(dirty, host)
            self._place(
                host,
                left.parent if left is not None else None,
                right.parent if right is not None else None,
                dirty,
            )
            return

        node.parent = host
        self._mark(dirty, host)

    def _combine(self, node: TreeNode) -> tuple[SetSummary, int]:
        children = node.children
        first = children[0].summary
        assert first is not None
        if len(children) == 1:
            return first, 0

        second = children[1].summary
        assert second is not None
        merged = merge_summaries(first, second, self.grid)
        return merged, first.group_count + second.group_count - merged.group_count

    def _propagate(self, dirty: _Dirty) -> tuple[int, int]:
        touched = work = 0
        while dirty:
            nodes = dirty.pop(min(dirty))
            for node in nodes.values():
                old = node.summary
                node.summary, joins = self._combine(node)
                touched += 1
                work += joins
                # an unchanged summary leaves everything above it as it was
                if node.parent is not None and (
                    old is None
                    or (node.summary is not old and not node.summary.same_as(old))
                ):
                    self._mark(dirty, node.parent)
        return touched, work

    @staticmethod
    def _mark(dirty: _Dirty, node: TreeNode) -> None:
        dirty.setdefault(node.level_index, {})[id(node)] = node

    def _record(self, touched: int, work: int) -> None:
        s = self._stats
        self._stats = UpdateStats(
            inserts=s.inserts + 1,
            nodes_touched=touched,
            max_touched=max(s.max_touched, touched),
            total_touched=s.total_touched + touched,
            depth=self.depth,
            merge_work=s.merge_work + work,
        )


def insert(tree: MergeTree, sample: Sample) -> MergeTree:
    "Insert ``sample`` into ``tree`` and return the tree"
    return tree.insert(sample)


def root_map(tree: MergeTree) -> CalibrationMap:
    "The staircase held at the root of ``tree``"
    return tree.root_map()


def stats(tree: MergeTree) -> UpdateStats:
    "Counters accumulated by ``tree``"
    return tree.stats()

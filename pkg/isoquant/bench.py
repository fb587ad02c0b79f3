# -*- coding: utf-8 -*-
"""
Complexity harness for the merge tree.

For each size N, N random samples with shuffled scores are inserted one
at a time and the tree's counters are recorded. The depth should grow
like log N and so should the number of nodes touched per insertion.
"""
from __future__ import annotations

import csv
import logging
import math
import time
from dataclasses import astuple, dataclass, fields
from typing import Iterable, Sequence, TextIO

import numpy as np

from .core import QuantizationGrid, Sample
from .mergetree import MergeTree


__all__ = [
    "BenchRow",
    "random_samples",
    "run_one",
    "run_bench",
    "fit_slope",
    "write_report",
    "depth_envelope",
    "DEFAULT_BENCH_SIZES",
    "DEFAULT_BENCH_LEVELS",
]

logger = logging.getLogger(__name__)

DEFAULT_BENCH_SIZES = (2**10, 2**12, 2**14, 2**16)
DEFAULT_BENCH_LEVELS = 16

# slack allowed on top of two touched nodes per level
TOUCHED_SLACK = 8


@dataclass(frozen=True)
class BenchRow:
    N: int
    depth: int
    median_touched: float
    max_touched: int
    merge_work: int
    seconds: float
    seed: int

    @property
    def within_bounds(self) -> bool:
        "Depth and traversal both inside their logarithmic envelopes"
        return (
            self.depth <= depth_envelope(self.N)
            and self.max_touched <= 2 * self.depth + TOUCHED_SLACK
        )


def depth_envelope(n: int) -> float:
    "Largest acceptable depth for ``n`` leaves"
    return 3 * math.log2(n) if n > 1 else 1


def random_samples(n: int, rng: np.random.Generator) -> list[Sample]:
    "``n`` samples with a random permutation of scores, uniform targets and weights"
    scores = rng.permutation(n)
    targets = rng.uniform(0.0, 1.0, n)
    # weights in (0, 2]
    weights = 2.0 - rng.uniform(0.0, 2.0, n)
    return [
        Sample(float(x), float(y), float(w))
        for x, y, w in zip(scores, targets, weights)
    ]


def run_one(n: int, grid: QuantizationGrid, seed: int) -> BenchRow:
    rng = np.random.default_rng([seed, n])
    samples = random_samples(n, rng)

    tree = MergeTree(grid)
    touched = np.empty(n, dtype=np.int64)
    start = time.perf_counter()
    for i, sample in enumerate(samples):
        tree.insert(sample)
        touched[i] = tree.stats().nodes_touched
    seconds = time.perf_counter() - start

    stats = tree.stats()
    row = BenchRow(
        N=n,
        depth=stats.depth,
        median_touched=float(np.median(touched)),
        max_touched=int(touched.max()),
        merge_work=stats.merge_work,
        seconds=seconds,
        seed=seed,
    )
    logger.info(
        "N=%d depth=%d max_touched=%d %.2fs", n, row.depth, row.max_touched, seconds
    )
    return row


def run_bench(
    sizes: Iterable[int], grid: QuantizationGrid, seed: int = 0
) -> list[BenchRow]:
    return [run_one(n, grid, seed) for n in sizes]


def fit_slope(rows: Sequence[BenchRow]) -> float | None:
    "Least-squares slope of max_touched against log2 N, or None for one size"
    sizes = {row.N for row in rows}
    if len(sizes) < 2:
        return None
    x = np.log2([row.N for row in rows])
    y = np.array([row.max_touched for row in rows], dtype=float)
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


def write_report(rows: Iterable[BenchRow], fd: TextIO) -> None:
    "CSV report, one row per size after a header"
    writer = csv.writer(fd, lineterminator="\n")
    writer.writerow([f.name for f in fields(BenchRow)] + ["within_bounds"])
    for row in rows:
        writer.writerow([*astuple(row), row.within_bounds])

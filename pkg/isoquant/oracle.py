# -*- coding: utf-8 -*-
"""
Exact solvers used as ground truth in tests: a dynamic program over
(sample, level) states and a brute-force search over every monotone
assignment. Neither shares code with the fitting algorithms.

::

    >>> from isoquant.core import Sample
    >>> dp_exact([Sample(1, 0.25), Sample(2, 0.75)], [0.0, 1.0])
    (0.125, [0.0, 1.0])

"""
from __future__ import annotations

import logging
import math
from itertools import combinations_with_replacement, groupby
from operator import attrgetter
from typing import Iterable, Sequence

import numpy as np

from .core import ExplicitLevels, QuantizationGrid, Sample, total_loss
from .errors import InvalidInputError, TooLargeError


__all__ = ["dp_exact", "enumerate_exact", "exact_minimum", "ENUMERATION_LIMIT"]

logger = logging.getLogger(__name__)

# most monotone assignments enumerate_exact will try
ENUMERATION_LIMIT = 10**6


def _check(samples: Sequence[Sample], levels: Sequence[float]) -> list[float]:
    levels = [float(v) for v in levels]
    if not levels:
        raise InvalidInputError("at least one level is required")
    if any(a >= b for a, b in zip(levels, levels[1:])):
        raise InvalidInputError("levels must be strictly increasing")
    if any(a.score >= b.score for a, b in zip(samples, samples[1:])):
        raise InvalidInputError("samples must have strictly increasing scores")
    return levels


def dp_exact(
    sorted_samples: Sequence[Sample], levels: Sequence[float]
) -> tuple[float, list[float]]:
    """
    Minimum weighted squared error over monotone assignments of ``levels``
    to samples, and one assignment achieving it. Ties go to lower levels.
    Runs in O(samples * levels).
    """
    grid = np.asarray(_check(sorted_samples, levels))
    if not sorted_samples:
        return 0.0, []

    m = len(grid)
    positions = np.arange(m)
    cost = np.zeros(m)
    # choice[n][q]: level index of sample n-1 on the best path ending at q
    choice = []
    for n, sample in enumerate(sorted_samples):
        local = sample.weight * (sample.target - grid) ** 2
        if n == 0:
            cost = local
            continue

        best = np.minimum.accumulate(cost)
        # first index attaining each prefix minimum
        improved = np.concatenate(([True], cost[1:] < best[:-1]))
        choice.append(np.maximum.accumulate(np.where(improved, positions, 0)))
        cost = local + best

    q = int(np.argmin(cost))
    path = [q]
    for back in reversed(choice):
        q = int(back[q])
        path.append(q)
    assignment = [float(grid[i]) for i in reversed(path)]
    return total_loss(assignment, sorted_samples), assignment


def enumerate_exact(
    sorted_samples: Sequence[Sample], levels: Sequence[float]
) -> tuple[float, list[float]]:
    """
    Same answer as :py:func:`dp_exact` by trying every monotone assignment.
    Refuses instances with more than ``ENUMERATION_LIMIT`` candidates.
    """
    grid = _check(sorted_samples, levels)
    n = len(sorted_samples)
    candidates = math.comb(n + len(grid) - 1, n)
    if candidates > ENUMERATION_LIMIT:
        raise TooLargeError(
            f"{candidates} monotone assignments exceed the limit of {ENUMERATION_LIMIT}"
        )

    best_loss = math.inf
    best: list[float] = []
    for indices in combinations_with_replacement(range(len(grid)), n):
        assignment = [grid[i] for i in indices]
        loss = total_loss(assignment, sorted_samples)
        if loss < best_loss:
            best_loss, best = loss, assignment
    return best_loss, best


def _pseudo_samples(samples: Iterable[Sample]) -> tuple[list[Sample], float]:
    # pool equal scores; the within-score residual is the same for every map
    pooled = []
    residual = []
    ordered = sorted(samples, key=attrgetter("score"))
    for score, group in groupby(ordered, key=attrgetter("score")):
        members = list(group)
        weight = math.fsum(s.weight for s in members)
        mean = math.fsum(s.weight * s.target for s in members) / weight
        pooled.append(Sample(score, mean, weight))
        residual.extend(s.weight * (s.target - mean) ** 2 for s in members)
    return pooled, math.fsum(residual)


def exact_minimum(samples: Iterable[Sample], grid: QuantizationGrid) -> float:
    """
    Optimal loss for unsorted ``samples`` on any grid, directly comparable
    with :py:func:`isoquant.core.total_loss` of a fitted map.
    """
    pooled, residual = _pseudo_samples(samples)
    if not pooled:
        return 0.0

    if isinstance(grid, ExplicitLevels):
        levels = list(grid.levels)
    else:
        targets = [s.target for s in pooled]
        levels = grid.levels_between(min(targets), max(targets))
        logger.debug("lattice reduced to %d candidate levels", len(levels))

    loss, _ = dp_exact(pooled, levels)
    return loss + residual

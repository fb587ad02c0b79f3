# -*- coding: utf-8 -*-
"""
Shared data model: samples, quantization grids, blocks and calibration maps.

A calibration map is a monotone staircase. Each step is a :py:class:`Block`
of consecutive samples (in score order) that share one quantized level,
the grid level nearest to the block's weighted target mean.

::

    >>> from isoquant.core import ExplicitLevels, project_to_grid
    >>> grid = ExplicitLevels((0.0, 0.5, 1.0))
    >>> project_to_grid(grid, 0.3)
    0.5
    >>> project_to_grid(grid, 0.25)  # exact tie goes to the lower level
    0.0

"""
from __future__ import annotations

import abc
import logging
import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Sequence

import numpy as np

from .errors import InvalidInputError, NoDataError
from .util import finite


__all__ = [
    "Sample",
    "QuantizationGrid",
    "ExplicitLevels",
    "UniformLattice",
    "Block",
    "CalibrationMap",
    "parse_grid",
    "project_to_grid",
    "merge_blocks",
    "mean_violates",
    "needs_join",
    "total_loss",
    "raw_loss",
    "evaluate_map",
    "RunningLoss",
]

logger = logging.getLogger(__name__)

# lattice indexes past this are no longer exact as floats
MAX_LATTICE_INDEX = 2**53

# relative error bound for comparing products of once-rounded sums
_PRODUCT_SLACK = 1e-15


@dataclass(frozen=True)
class Sample:
    """
    One observation: an uncalibrated ``score``, its ``target`` and a
    positive ``weight``. Fields are coerced to float and checked on creation.
    """

    score: float
    target: float
    weight: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "score", finite(self.score, "score"))
        object.__setattr__(self, "target", finite(self.target, "target"))
        weight = finite(self.weight, "weight")
        if weight <= 0:
            raise InvalidInputError(f"weight must be positive, got {weight!r}")
        object.__setattr__(self, "weight", weight)


class QuantizationGrid(abc.ABC):
    """
    The set of values a calibrated output may take.

    Subclasses only need to know how to find the nearest level below or at
    a value; :py:meth:`project` handles ties and clamping the same way for
    every grid.
    """

    @abc.abstractmethod
    def _bracket(self, value: float) -> tuple[float | None, float | None]:
        """
        Return the greatest level ``<= value`` and the least level ``> value``.
        Either side is None when the grid ends there.
        """

    @property
    @abc.abstractmethod
    def cardinality(self) -> int | None:
        "Number of levels, or None when the grid is unbounded"

    @property
    @abc.abstractmethod
    def spec(self) -> str:
        "The grid in ``--grid`` notation"

    @abc.abstractmethod
    def to_dict(self) -> dict[str, Any]:
        "Grid as a dict, for serializing"

    @abc.abstractmethod
    def levels_between(self, lo: float, hi: float) -> list[float]:
        """
        Levels inside ``[lo, hi]`` plus the nearest level on either side,
        in increasing order. No other level can be an optimal output for
        targets inside ``[lo, hi]``.
        """

    def project(self, value: float) -> float:
        "Nearest level to ``value``; ties go to the lower level"
        below, above = self._bracket(value)
        if below is None:
            assert above is not None
            return above
        if above is None:
            return below
        if value - below <= above - value:
            return below
        return above

    @staticmethod
    def from_dict(data: Any) -> QuantizationGrid:
        "Build a grid from :py:meth:`to_dict` output"
        if not isinstance(data, dict) or len(data) != 1:
            raise InvalidInputError(f"grid must have exactly one kind, got {data!r}")

        (kind, body), = data.items()
        if kind == "levels":
            if not isinstance(body, list):
                raise InvalidInputError("grid levels must be a list")
            return ExplicitLevels(tuple(body))
        if kind == "lattice":
            if not isinstance(body, dict) or not {"offset", "step"} <= set(body):
                raise InvalidInputError("lattice grid needs offset and step")
            extra = set(body) - {"offset", "step", "lower", "upper"}
            if extra:
                names = sorted(extra, key=repr)
                raise InvalidInputError(f"unknown lattice keys: {names}")
            return UniformLattice(
                body["offset"], body["step"], body.get("lower"), body.get("upper")
            )
        raise InvalidInputError(f"unknown grid kind {kind!r}")


@dataclass(frozen=True)
class ExplicitLevels(QuantizationGrid):
    """
    A finite, strictly increasing list of levels.

    >>> ExplicitLevels((0, 1)).project(2.0)
    1.0
    """

    levels: tuple[float, ...]

    def __post_init__(self) -> None:
        levels = tuple(finite(v, "grid level") for v in self.levels)
        if not levels:
            raise InvalidInputError("a grid needs at least one level")
        if any(a >= b for a, b in zip(levels, levels[1:])):
            raise InvalidInputError("grid levels must be strictly increasing")
        object.__setattr__(self, "levels", levels)

    @classmethod
    def evenly_spaced(
        cls, count: int, lo: float = 0.0, hi: float = 1.0
    ) -> ExplicitLevels:
        "``count`` equally spaced levels from ``lo`` to ``hi`` inclusive"
        if count < 1:
            raise InvalidInputError(f"count must be positive, got {count}")
        return cls(tuple(float(v) for v in np.linspace(lo, hi, count)))

    def _bracket(self, value: float) -> tuple[float | None, float | None]:
        i = bisect_right(self.levels, value)
        below = self.levels[i - 1] if i > 0 else None
        above = self.levels[i] if i < len(self.levels) else None
        return below, above

    @property
    def cardinality(self) -> int:
        return len(self.levels)

    @property
    def spec(self) -> str:
        return "levels=" + ",".join(repr(v) for v in self.levels)

    def to_dict(self) -> dict[str, Any]:
        return {"levels": list(self.levels)}

    def levels_between(self, lo: float, hi: float) -> list[float]:
        first = max(bisect_right(self.levels, lo) - 1, 0)
        last = min(bisect_left(self.levels, hi), len(self.levels) - 1)
        return list(self.levels[first : last + 1])


@dataclass(frozen=True)
class UniformLattice(QuantizationGrid):
    """
    Levels ``offset + k * step`` for every integer ``k``, optionally
    limited to ``[lower, upper]``. Without both bounds the grid is unbounded.

    >>> UniformLattice(0.0, 0.5).project(0.8)
    1.0
    >>> UniformLattice(0.0, 0.5, upper=0.5).project(0.8)
    0.5
    """

    offset: float
    step: float
    lower: float | None = None
    upper: float | None = None

    _kmin: int | None = field(default=None, init=False, repr=False, compare=False)
    _kmax: int | None = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "offset", finite(self.offset, "lattice offset"))
        step = finite(self.step, "lattice step")
        if step <= 0:
            raise InvalidInputError(f"lattice step must be positive, got {step!r}")
        object.__setattr__(self, "step", step)

        if self.lower is not None:
            lower = finite(self.lower, "lattice lower bound")
            object.__setattr__(self, "lower", lower)
            object.__setattr__(self, "_kmin", self._first_index_at_or_above(lower))
        if self.upper is not None:
            upper = finite(self.upper, "lattice upper bound")
            object.__setattr__(self, "upper", upper)
            object.__setattr__(self, "_kmax", self._index_at_or_below(upper))

        if self.lower is not None and self.upper is not None:
            if self.lower > self.upper:
                raise InvalidInputError("lattice lower bound exceeds upper bound")
            assert self._kmin is not None and self._kmax is not None
            if self._kmin > self._kmax:
                raise InvalidInputError("no lattice level lies between the bounds")

    def level(self, k: int) -> float:
        "The ``k``-th lattice point"
        return self.offset + k * self.step

    def _index_at_or_below(self, value: float) -> int:
        # greatest k with level(k) <= value, correcting for rounding in the division
        quotient = (value - self.offset) / self.step
        if not math.isfinite(quotient) or abs(quotient) >= MAX_LATTICE_INDEX:
            raise InvalidInputError(
                f"{value!r} is too far from the lattice offset for step {self.step!r}"
            )
        k = math.floor(quotient)
        if self.level(k) > value:
            k -= 1
        elif self.level(k + 1) <= value:
            k += 1
        return k

    def _first_index_at_or_above(self, value: float) -> int:
        k = self._index_at_or_below(value)
        return k if self.level(k) == value else k + 1

    def _clip(self, value: float) -> float:
        if self._kmin is not None:
            value = max(value, self.level(self._kmin))
        if self._kmax is not None:
            value = min(value, self.level(self._kmax))
        return value

    def _bracket(self, value: float) -> tuple[float | None, float | None]:
        if self._kmin is not None and value < self.level(self._kmin):
            return None, self.level(self._kmin)
        if self._kmax is not None and value >= self.level(self._kmax):
            return self.level(self._kmax), None
        k = self._index_at_or_below(value)
        return self.level(k), self.level(k + 1)

    @property
    def cardinality(self) -> int | None:
        if self._kmin is None or self._kmax is None:
            return None
        return self._kmax - self._kmin + 1

    @property
    def spec(self) -> str:
        parts = [repr(self.offset), repr(self.step)]
        if self.lower is not None or self.upper is not None:
            parts.append("" if self.lower is None else repr(self.lower))
            parts.append("" if self.upper is None else repr(self.upper))
        return "lattice=" + ":".join(parts)

    def to_dict(self) -> dict[str, Any]:
        body: dict[str, Any] = {"offset": self.offset, "step": self.step}
        if self.lower is not None:
            body["lower"] = self.lower
        if self.upper is not None:
            body["upper"] = self.upper
        return {"lattice": body}

    def levels_between(self, lo: float, hi: float) -> list[float]:
        first = self._index_at_or_below(self._clip(lo))
        last = self._first_index_at_or_above(self._clip(hi))
        return [self.level(k) for k in range(first, last + 1)]


def parse_grid(spec: str) -> QuantizationGrid:
    """
    Parse ``levels=v1,v2,...`` or ``lattice=offset:step[:lo:hi]``.
    Either bound of a lattice may be left empty.

    >>> parse_grid("levels=0,0.5,1")
    ExplicitLevels(levels=(0.0, 0.5, 1.0))
    >>> parse_grid("lattice=0:0.1::1")
    UniformLattice(offset=0.0, step=0.1, lower=None, upper=1.0)
    """
    kind, sep, body = spec.strip().partition("=")
    if not sep or not body:
        raise InvalidInputError(f"grid spec must look like kind=values, got {spec!r}")

    try:
        if kind == "levels":
            return ExplicitLevels(tuple(float(v) for v in body.split(",")))

        if kind == "lattice":
            parts = body.split(":")
            if len(parts) not in (2, 4):
                raise InvalidInputError(
                    f"lattice spec needs offset:step[:lo:hi], got {body!r}"
                )
            bounds = [float(p) if p.strip() else None for p in parts[2:]]
            return UniformLattice(float(parts[0]), float(parts[1]), *bounds)

    except InvalidInputError:
        raise
    except ValueError as e:
        raise InvalidInputError(f"bad grid spec {spec!r}: {e}") from None

    raise InvalidInputError(f"unknown grid kind {kind!r} (use levels= or lattice=)")


def project_to_grid(grid: QuantizationGrid, value: float) -> float:
    "Nearest grid level to ``value``, ties to the lower level, clamped at the ends"
    return grid.project(finite(value, "value"))


@dataclass(frozen=True)
class Block:
    """
    A pooled group of consecutive samples.

    ``totals`` holds the exact sums of ``w * y`` and ``w`` over the block.
    ``sum_wy`` and ``sum_w`` are those sums rounded once, so they come out
    the same whatever order the samples were pooled in. A block built from
    plain floats takes them as its exact sums.
    """

    sum_wy: float
    sum_w: float
    level: float
    score_min: float
    score_max: float
    totals: tuple[Fraction, Fraction] | None = field(
        default=None, repr=False, compare=False
    )

    def __post_init__(self) -> None:
        if self.totals is None:
            totals = (Fraction(self.sum_wy), Fraction(self.sum_w))
            object.__setattr__(self, "totals", totals)

    @property
    def exact(self) -> tuple[Fraction, Fraction]:
        "Exact ``(sum_wy, sum_w)``"
        assert self.totals is not None
        return self.totals

    @property
    def mean(self) -> float:
        "Weighted target mean of the block"
        return self.sum_wy / self.sum_w

    @classmethod
    def from_totals(
        cls,
        sum_wy: Fraction,
        sum_w: Fraction,
        grid: QuantizationGrid,
        score_min: float,
        score_max: float,
    ) -> Block:
        "Round exact sums once and project their mean"
        wy, w = float(sum_wy), float(sum_w)
        return cls(wy, w, grid.project(wy / w), score_min, score_max, (sum_wy, sum_w))

    @classmethod
    def from_sample(cls, sample: Sample, grid: QuantizationGrid) -> Block:
        weight = Fraction(sample.weight)
        return cls.from_totals(
            weight * Fraction(sample.target),
            weight,
            grid,
            sample.score,
            sample.score,
        )

    def same_as(self, other: Block) -> bool:
        "Equal fields and equal exact sums"
        return self == other and self.exact == other.exact

    def to_dict(self) -> dict[str, float]:
        "Block as a dict, for serializing"
        return {
            "score_min": self.score_min,
            "score_max": self.score_max,
            "level": self.level,
            "sum_w": self.sum_w,
            "sum_wy": self.sum_wy,
        }


def merge_blocks(a: Block, b: Block, grid: QuantizationGrid) -> Block:
    """
    Pool two neighbouring blocks and re-project the pooled mean.

    >>> grid = ExplicitLevels((0, 0.5, 1))
    >>> a = Block(0.9, 1.0, 1.0, 1.0, 1.0)
    >>> b = Block(0.1, 1.0, 0.0, 2.0, 2.0)
    >>> merge_blocks(a, b, grid).level
    0.5
    """
    if a.score_max > b.score_min:
        raise InvalidInputError(
            f"blocks out of score order: {a.score_max!r} > {b.score_min!r}"
        )
    (a_wy, a_w), (b_wy, b_w) = a.exact, b.exact
    return Block.from_totals(a_wy + b_wy, a_w + b_w, grid, a.score_min, b.score_max)


def mean_violates(a: Block, b: Block) -> bool:
    "True when ``a``'s mean is at least ``b``'s, compared by cross-multiplication"
    lhs = a.sum_wy * b.sum_w
    rhs = b.sum_wy * a.sum_w
    # the rounded products decide unless they are too close to call
    if abs(lhs - rhs) > _PRODUCT_SLACK * (abs(lhs) + abs(rhs)) + 1e-300:
        return lhs > rhs

    (a_wy, a_w), (b_wy, b_w) = a.exact, b.exact
    return a_wy * b_w >= b_wy * a_w


def needs_join(a: Block, b: Block) -> bool:
    """
    Both pooling triggers for neighbouring blocks: a monotonicity violation,
    or no strict increase between their quantized levels.
    """
    return mean_violates(a, b) or a.level >= b.level


@dataclass(frozen=True)
class CalibrationMap:
    """
    A monotone staircase over scores. Blocks have strictly increasing
    levels and disjoint, increasing score extents.

    >>> grid = ExplicitLevels((0, 1))
    >>> cmap = CalibrationMap(
    ...     (Block(0.0, 1.0, 0.0, 0.0, 1.0), Block(1.0, 1.0, 1.0, 2.0, 3.0)), grid
    ... )
    >>> cmap(1.4), cmap(1.5), cmap(-5), cmap(10)
    (0.0, 1.0, 0.0, 1.0)
    """

    blocks: tuple[Block, ...]
    grid: QuantizationGrid

    _mins: tuple[float, ...] = field(default=(), init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        blocks = tuple(self.blocks)
        for block in blocks:
            if block.sum_w <= 0:
                raise InvalidInputError("block weight must be positive")
            if block.score_min > block.score_max:
                raise InvalidInputError("block score extent is reversed")
        for a, b in zip(blocks, blocks[1:]):
            if a.level >= b.level:
                raise InvalidInputError("block levels must be strictly increasing")
            if a.score_max >= b.score_min:
                raise InvalidInputError("block score extents must not overlap")
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "_mins", tuple(b.score_min for b in blocks))

    def __len__(self) -> int:
        return len(self.blocks)

    def __call__(self, score: float) -> float:
        return self.evaluate(score)

    @property
    def levels(self) -> list[float]:
        return [b.level for b in self.blocks]

    def thresholds(self) -> list[float]:
        "Scores at which the staircase steps up to the next block"
        return [
            0.5 * (a.score_max + b.score_min)
            for a, b in zip(self.blocks, self.blocks[1:])
        ]

    def evaluate(self, score: float) -> float:
        """
        Calibrated level for ``score``. Scores between two blocks take the
        nearer block, with the midpoint itself going right.
        """
        if not self.blocks:
            raise NoDataError("the calibration map is empty")
        score = finite(score, "score")

        i = bisect_right(self._mins, score) - 1
        if i < 0:
            return self.blocks[0].level

        block = self.blocks[i]
        if score <= block.score_max or i == len(self.blocks) - 1:
            return block.level

        after = self.blocks[i + 1]
        if score < 0.5 * (block.score_max + after.score_min):
            return block.level
        return after.level

    def evaluate_many(self, scores: Iterable[float]) -> list[float]:
        return [self.evaluate(s) for s in scores]

    def covered_level(self, score: float) -> float:
        "Level of the block whose extent holds ``score``"
        i = bisect_right(self._mins, score) - 1
        if i < 0 or score > self.blocks[i].score_max:
            raise InvalidInputError(f"score {score!r} is not covered by the map")
        return self.blocks[i].level

    def to_dict(self) -> dict[str, Any]:
        "Map as a dict, for serializing"
        return {
            "grid": self.grid.to_dict(),
            "blocks": [b.to_dict() for b in self.blocks],
        }


def evaluate_map(cmap: CalibrationMap, score: float) -> float:
    "Calibrated level of ``score`` under ``cmap``"
    return cmap.evaluate(score)


def total_loss(
    assignment: CalibrationMap | Sequence[float], samples: Sequence[Sample]
) -> float:
    """
    Weighted squared error of ``samples`` under a map, or under a list of
    levels given one per sample.

    >>> total_loss([0.5], [Sample(0.0, 1.0, 2.0)])
    0.5
    """
    if isinstance(assignment, CalibrationMap):
        levels = [assignment.covered_level(s.score) for s in samples]
    else:
        levels = list(assignment)
        if len(levels) != len(samples):
            raise InvalidInputError(
                f"{len(levels)} levels given for {len(samples)} samples"
            )
    return math.fsum(s.weight * (s.target - z) ** 2 for s, z in zip(samples, levels))


def raw_loss(samples: Sequence[Sample]) -> float:
    "Weighted squared error of the uncalibrated scores"
    return math.fsum(s.weight * (s.target - s.score) ** 2 for s in samples)


class RunningLoss(object):
    """
    Exact running sums over a stream of samples, enough to score any map
    fitted on exactly those samples without keeping them around.

    >>> running = RunningLoss()
    >>> for sample in [Sample(1, 1.0), Sample(2, 0.0)]:
    ...     running.add(sample)
    >>> cmap = CalibrationMap((Block(1.0, 2.0, 0.5, 1.0, 2.0),), ExplicitLevels((0, 0.5, 1)))
    >>> running.loss(cmap), running.raw_loss()
    (0.5, 4.0)
    """

    def __init__(self) -> None:
        self.count = 0
        self.sum_wyy = Fraction(0)
        self.raw = Fraction(0)

    def add(self, sample: Sample) -> None:
        weight, target = Fraction(sample.weight), Fraction(sample.target)
        self.count += 1
        self.sum_wyy += weight * target * target
        self.raw += weight * (target - Fraction(sample.score)) ** 2

    def loss(self, cmap: CalibrationMap) -> float:
        "Loss of ``cmap``, whose blocks must pool exactly the samples added"
        total = self.sum_wyy
        for block in cmap.blocks:
            wy, w = block.exact
            level = Fraction(block.level)
            total += level * (level * w - 2 * wy)
        return float(total)

    def raw_loss(self) -> float:
        "Loss of the uncalibrated scores"
        return float(self.raw)

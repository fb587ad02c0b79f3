# -*- coding: utf-8 -*-
"""
Command line interface.

::

    isoquant fit --input data.csv --grid levels=0,0.5,1 --output map.yaml
    isoquant stream --mode unordered --grid lattice=0:0.1 < data.csv
    isoquant apply --map map.yaml --input scores.txt
    isoquant bench --sizes 1024,4096 --seed 7 --output report.csv

Sample input is CSV, one ``score,target[,weight]`` row per line. Weight
defaults to 1; blank lines and lines starting with ``#`` are skipped.
"""
from __future__ import annotations

import argparse
import contextlib
import logging
import sys
from typing import IO, Iterable, Iterator, Sequence

from . import dumps, handlers, load
from .batch import fit_batch
from .bench import (
    DEFAULT_BENCH_LEVELS,
    DEFAULT_BENCH_SIZES,
    fit_slope,
    run_bench,
    write_report,
)
from .core import (
    CalibrationMap,
    ExplicitLevels,
    QuantizationGrid,
    RunningLoss,
    Sample,
    parse_grid,
)
from .errors import (
    InvalidInputError,
    IsoquantError,
    NoDataError,
    OrderingError,
    SampleFormatError,
)
from .mergetree import MergeTree
from .prefix import PrefixState
from .util import finite


__all__ = ["main", "build_parser", "read_samples", "read_scores"]

logger = logging.getLogger(__name__)

LOG_FORMAT = "[%(levelname)4s:%(lineno)4s %(asctime)s] %(message)s"

STDIO = "-"


def _rows(lines: Iterable[str]) -> Iterator[tuple[int, list[str]]]:
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        yield lineno, [field.strip() for field in line.split(",")]


def read_samples(lines: Iterable[str]) -> Iterator[tuple[int, Sample]]:
    "Yield ``(line number, sample)`` for every data row"
    names = ("score", "target", "weight")
    for lineno, fields in _rows(lines):
        if len(fields) not in (2, 3):
            raise SampleFormatError(
                lineno, f"expected score,target[,weight], got {len(fields)} fields"
            )
        values = []
        for name, field in zip(names, fields):
            try:
                values.append(float(field))
            except ValueError:
                raise SampleFormatError(
                    lineno, f"could not parse {name} {field!r}"
                ) from None
        try:
            yield lineno, Sample(*values)
        except InvalidInputError as e:
            raise SampleFormatError(lineno, str(e)) from None


def read_scores(lines: Iterable[str]) -> Iterator[float]:
    "Yield one score per data row; only the first field is read"
    for lineno, fields in _rows(lines):
        try:
            score = finite(fields[0], "score")
        except InvalidInputError as e:
            raise SampleFormatError(lineno, str(e)) from None
        yield score


def _grid(spec: str) -> QuantizationGrid:
    try:
        return parse_grid(spec)
    except InvalidInputError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _sizes(spec: str) -> list[int]:
    try:
        sizes = [int(v) for v in spec.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad size list {spec!r}") from None
    if any(n < 1 for n in sizes):
        raise argparse.ArgumentTypeError("sizes must be positive")
    return sizes


def _positive(value: str) -> int:
    try:
        number = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {value!r}") from None
    if number < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return number


def _open_input(path: str) -> contextlib.AbstractContextManager[IO[str]]:
    if path == STDIO:
        return contextlib.nullcontext(sys.stdin)
    return open(path, "r", encoding="utf-8")


def _open_output(path: str) -> contextlib.AbstractContextManager[IO[str]]:
    if path == STDIO:
        return contextlib.nullcontext(sys.stdout)
    return open(path, "w", encoding="utf-8")


def _console(args: argparse.Namespace) -> IO[str]:
    # keep stdout clean when it carries the map itself
    return sys.stderr if args.output == STDIO else sys.stdout


def _write_map(cmap: CalibrationMap, args: argparse.Namespace) -> None:
    handler = next(h for h in handlers if h.NAME == args.format)
    with _open_output(args.output) as fd:
        fd.write(dumps(cmap, handler))


def _summary(cmap: CalibrationMap, running: RunningLoss) -> str:
    return (
        f"N={running.count} groups={len(cmap)} "
        f"loss={running.loss(cmap)!r} raw_loss={running.raw_loss()!r}"
    )


def cmd_fit(args: argparse.Namespace) -> int:
    with _open_input(args.input) as fd:
        samples = [sample for _, sample in read_samples(fd)]
    if not samples:
        raise NoDataError("no samples in input")

    running = RunningLoss()
    for sample in samples:
        running.add(sample)

    cmap = fit_batch(samples, args.grid)
    _write_map(cmap, args)
    print(_summary(cmap, running), file=_console(args))
    return 0


def cmd_stream(args: argparse.Namespace) -> int:
    calibrator: PrefixState | MergeTree
    if args.mode == "ordered":
        calibrator = PrefixState(args.grid)
        current = calibrator.snapshot
    else:
        calibrator = MergeTree(args.grid)
        current = calibrator.root_map

    console = _console(args)
    running = RunningLoss()
    with _open_input(args.input) as fd:
        for lineno, sample in read_samples(fd):
            if isinstance(calibrator, PrefixState):
                try:
                    calibrator.push(sample)
                except OrderingError as e:
                    raise OrderingError(e.score, e.last_score, lineno) from None
            else:
                calibrator.insert(sample)

            running.add(sample)
            if args.snapshot_every and running.count % args.snapshot_every == 0:
                print(f"{running.count},{running.loss(current())!r}", file=console)

    if not running.count:
        raise NoDataError("no samples in input")

    cmap = current()
    _write_map(cmap, args)
    print(_summary(cmap, running), file=console)
    return 0


def cmd_apply(args: argparse.Namespace) -> int:
    cmap = load(args.map)
    with _open_input(args.input) as src, _open_output(args.output) as dst:
        for score in read_scores(src):
            dst.write(f"{cmap.evaluate(score)!r}\n")
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    grid = args.grid or ExplicitLevels.evenly_spaced(DEFAULT_BENCH_LEVELS)
    rows = run_bench(args.sizes, grid, args.seed)
    with _open_output(args.output) as fd:
        write_report(rows, fd)

    console = _console(args)
    slope = fit_slope(rows)
    if slope is not None:
        print(f"slope of max_touched vs log2 N: {slope:.3f}", file=console)

    failed = [row.N for row in rows if not row.within_bounds]
    if failed:
        logger.error("logarithmic bounds exceeded for N in %s", failed)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="isoquant",
        description="Optimal quantized isotonic calibration",
    )
    parser.add_argument(
        "-v", "--verbose", action="count", default=0, help="more logging (repeatable)"
    )
    commands = parser.add_subparsers(dest="command", required=True)

    formats = [h.NAME for h in handlers]

    def io_flags(sub: argparse.ArgumentParser, output_help: str) -> None:
        sub.add_argument("--input", default=STDIO, help="input path, - for stdin")
        sub.add_argument("--output", default=STDIO, help=output_help)

    fit = commands.add_parser("fit", help="fit a map from a CSV file")
    io_flags(fit, "map path, - for stdout")
    fit.add_argument("--grid", type=_grid, required=True, help="levels=... or lattice=...")
    fit.add_argument("--format", choices=formats, default="yaml")
    fit.set_defaults(func=cmd_fit)

    stream = commands.add_parser("stream", help="fit a map one sample at a time")
    io_flags(stream, "map path, - for stdout")
    stream.add_argument("--grid", type=_grid, required=True)
    stream.add_argument("--mode", choices=("ordered", "unordered"), default="unordered")
    stream.add_argument(
        "--snapshot-every",
        type=_positive,
        default=None,
        metavar="K",
        help="print the running loss after every K samples",
    )
    stream.add_argument("--format", choices=formats, default="yaml")
    stream.set_defaults(func=cmd_stream)

    apply = commands.add_parser("apply", help="calibrate scores with a saved map")
    io_flags(apply, "output path, - for stdout")
    apply.add_argument("--map", required=True, help="map file written by fit or stream")
    apply.set_defaults(func=cmd_apply)

    bench = commands.add_parser("bench", help="measure merge tree complexity")
    bench.add_argument("--sizes", type=_sizes, default=list(DEFAULT_BENCH_SIZES))
    bench.add_argument("--grid", type=_grid, default=None)
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--output", default=STDIO, help="report path, - for stdout")
    bench.set_defaults(func=cmd_bench)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    logging.basicConfig(level=level, format=LOG_FORMAT)

    try:
        return int(args.func(args))
    except (IsoquantError, OSError) as e:
        print(f"isoquant: error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

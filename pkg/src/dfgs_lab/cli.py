"""Command-line experiment runner.

Subcommands::

    dfgs-lab gen-db  --n 10 --m 4 --seed 7 --out db.json
    dfgs-lab run     --db db.json --strategy dfgs --p 4 --nu 4 --seed 1
    dfgs-lab sweep   --spec sweep.json [--out results.csv] [--format csv|json-lines]
    dfgs-lab predict --n 12 --p 4 --m 8

Exit codes: 0 success, 2 argument or data error, 3 I/O error.

Output is deterministic for fixed seeds. Wall-clock fields are only filled
in with ``--timing``, because timings would break byte-identical reruns.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .depth_first import STRATEGIES, SearchOutcome, SearchParams
from .grover import partial_query_budget
from .metrics import cost_upper_bound, expected_active_blocks, max_depth, predicted_cost
from .oracle import Database, random_database

EXIT_OK = 0
EXIT_ARGS = 2
EXIT_IO = 3

CSV_HEADER = (
    "n",
    "m",
    "p",
    "nu",
    "strategy",
    "seed",
    "oracle_queries",
    "partial_searches",
    "verifications",
    "success",
    "elapsed_ms",
)
FORMATS = ("csv", "json-lines")


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_ARGS):
        super().__init__(message)
        self.code = code


@dataclass
class SweepSpec:
    cells: list[tuple[int, int]]
    p: list[int] = field(default_factory=lambda: [4])
    nu: list[int] = field(default_factory=lambda: [1])
    strategies: list[str] = field(default_factory=lambda: ["dfgs"])
    trials: int = 1
    base_seed: int = 0
    out: Optional[str] = None
    format: str = "csv"
    timing: bool = False

    def __post_init__(self):
        self.cells = [(int(n), int(m)) for n, m in self.cells]
        if not self.cells:
            raise ValueError("sweep needs at least one (n, m) cell")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        for n, m in self.cells:
            if n < 1 or not 0 <= m <= 1 << n:
                raise ValueError(f"invalid cell n={n}, m={m}: need 0 <= m <= 2**n")
        for name in self.strategies:
            if name not in STRATEGIES:
                raise ValueError(f"unknown strategy {name!r}; choose from {sorted(STRATEGIES)}")
        if self.format not in FORMATS:
            raise ValueError(f"unknown format {self.format!r}")
        for p in self.p:
            for nu in self.nu:
                SearchParams(p=p, nu=nu)
            if any(p > 1 << n for n, _ in self.cells) and "dfgs" in self.strategies:
                raise ValueError(f"p={p} exceeds the database size of some cell")

    @classmethod
    def from_dict(cls, obj: dict) -> "SweepSpec":
        known = set(cls.__dataclass_fields__)
        unknown = set(obj) - known
        if unknown:
            raise ValueError(f"unknown sweep fields: {sorted(unknown)}")
        if "cells" not in obj:
            raise ValueError("sweep spec needs 'cells'")
        return cls(**obj)

    @classmethod
    def load(cls, path) -> "SweepSpec":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def database_for(n: int, m: int, seed: int) -> Database:
    """Instance used by a sweep trial; shared by every strategy on that seed."""
    return random_database(n, m, np.random.default_rng([seed, n, m]))


def run_strategy(db: Database, strategy: str, params: SearchParams) -> SearchOutcome:
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; choose from {sorted(STRATEGIES)}")
    return STRATEGIES[strategy](db, params)


def _sweep_task(task) -> dict:
    n, m, p, nu, strategy, seed, timing = task
    db = database_for(n, m, seed)
    out = run_strategy(db, strategy, SearchParams(p=p, nu=nu, seed=seed))
    return {
        "n": n,
        "m": m,
        "p": p,
        "nu": nu,
        "strategy": strategy,
        "seed": seed,
        "oracle_queries": out.log.total_oracle_queries,
        "partial_searches": out.log.total_partial_searches,
        "verifications": out.log.total_verifications,
        "success": out.success,
        "elapsed_ms": round(out.elapsed * 1000, 3) if timing else None,
    }


def sweep_tasks(spec: SweepSpec) -> list[tuple]:
    return [
        (n, m, p, nu, strategy, spec.base_seed + trial, spec.timing)
        for n, m in spec.cells
        for p in spec.p
        for nu in spec.nu
        for strategy in spec.strategies
        for trial in range(spec.trials)
    ]


def run_sweep(spec: SweepSpec, jobs: int = 1) -> list[dict]:
    """Run every (cell, p, nu, strategy, trial); rows come back in task order."""
    tasks = sweep_tasks(spec)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_sweep_task, tasks, chunksize=4))
    return [_sweep_task(t) for t in tasks]


def format_rows(rows: Sequence[dict], fmt: str) -> str:
    buf = io.StringIO()
    if fmt == "csv":
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for row in rows:
            writer.writerow(
                [
                    ("true" if row[k] else "false")
                    if k == "success"
                    else ("" if row[k] is None else row[k])
                    for k in CSV_HEADER
                ]
            )
    else:
        for row in rows:
            buf.write(json.dumps({k: row[k] for k in CSV_HEADER}, separators=(",", ":")) + "\n")
    return buf.getvalue()


def run_record(db: Database, strategy: str, params: SearchParams, timing: bool = False) -> dict:
    out = run_strategy(db, strategy, params)
    return {
        "strategy": strategy,
        "n": db.n,
        "m": db.m,
        "p": params.p,
        "nu": params.nu,
        "seed": params.seed,
        "found": list(out.found),
        "success": out.success,
        "budget_exhausted": out.budget_exhausted,
        "per_depth": out.log.padded(),
        "totals": out.log.totals(),
        "elapsed": round(out.elapsed, 6) if timing else None,
    }


def predict_record(n: int, p: int, m: int) -> dict:
    N = 1 << n
    if not 0 <= m <= N:
        raise ValueError(f"m={m} outside [0, {N}]")
    lam = max_depth(N, p)
    return {
        "N": N,
        "p": p,
        "m": m,
        "max_depth": lam,
        "expected_active_blocks": [expected_active_blocks(p, k, m) for k in range(lam + 1)],
        "partial_query_budget": [partial_query_budget(N / p**k, p) for k in range(lam)],
        "predicted_cost": predicted_cost(N, p, m),
        "bound_m_sqrt_N": cost_upper_bound(N, p, m),
        "m_sqrt_N": m * math.sqrt(N),
    }


def _write(text: str, out: Optional[str]) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
        return
    try:
        Path(out).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot write {out}: {exc}", EXIT_IO) from exc


def _load_db(path: str) -> Database:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}", EXIT_IO) from exc
    try:
        return Database.from_json(text)
    except (ValueError, TypeError) as exc:
        raise CliError(f"malformed database {path}: {exc}") from exc


def cmd_gen_db(args) -> None:
    if args.n is None or args.m is None:
        raise CliError("gen-db needs --n and --m")
    try:
        db = random_database(args.n, args.m, args.seed)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    _write(db.to_json() + "\n", args.out)


def cmd_run(args) -> None:
    if args.db is None:
        raise CliError("run needs --db")
    db = _load_db(args.db)
    try:
        params = SearchParams(p=args.p, nu=args.nu, seed=args.seed)
        record = run_record(db, args.strategy, params, timing=args.timing)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    _write(json.dumps(record, separators=(",", ":")) + "\n", args.out)


def cmd_sweep(args) -> None:
    if args.spec is None:
        raise CliError("sweep needs --spec")
    try:
        text = Path(args.spec).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read {args.spec}: {exc}", EXIT_IO) from exc
    try:
        spec = SweepSpec.from_dict(json.loads(text))
        if args.format is not None:
            spec.format = args.format
            spec.__post_init__()
        if args.trials is not None:
            spec.trials = args.trials
            spec.__post_init__()
        if args.timing:
            spec.timing = True
    except (ValueError, TypeError) as exc:
        raise CliError(f"invalid sweep spec: {exc}") from exc
    rows = run_sweep(spec, jobs=args.jobs)
    _write(format_rows(rows, spec.format), args.out if args.out is not None else spec.out)


def cmd_predict(args) -> None:
    if args.n is None or args.m is None:
        raise CliError("predict needs --n and --m")
    try:
        record = predict_record(args.n, args.p, args.m)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    _write(json.dumps(record, separators=(",", ":")) + "\n", args.out)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dfgs-lab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *names):
        if "n" in names:
            p.add_argument("--n", type=int, help="qubit count")
        if "m" in names:
            p.add_argument("--m", type=int, help="solution count")
        if "p" in names:
            p.add_argument("--p", type=int, default=4, help="split factor (power of two)")
        if "nu" in names:
            p.add_argument("--nu", type=int, default=1, help="retry parameter, 1 <= nu <= p")
        if "seed" in names:
            p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", help="output path (default: standard output)")

    gen = sub.add_parser("gen-db", help="write a random database")
    common(gen, "n", "m", "seed")
    gen.set_defaults(func=cmd_gen_db)

    run = sub.add_parser("run", help="run one strategy on a database file")
    common(run, "p", "nu", "seed")
    run.add_argument("--db", help="database file")
    run.add_argument("--strategy", default="dfgs", choices=sorted(STRATEGIES))
    run.add_argument("--timing", action="store_true", help="include wall-clock time")
    run.set_defaults(func=cmd_run)

    sweep = sub.add_parser("sweep", help="run a sweep spec and write CSV or JSON lines")
    common(sweep)
    sweep.add_argument("--spec", help="sweep spec (JSON)")
    sweep.add_argument("--format", choices=FORMATS)
    sweep.add_argument("--trials", type=int)
    sweep.add_argument("--jobs", type=int, default=1, help="worker processes")
    sweep.add_argument("--timing", action="store_true", help="fill elapsed_ms")
    sweep.set_defaults(func=cmd_sweep)

    predict = sub.add_parser("predict", help="evaluate the analytic cost model")
    common(predict, "n", "m", "p")
    predict.set_defaults(func=cmd_predict)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except CliError as exc:
        print(f"dfgs-lab: error: {exc}", file=sys.stderr)
        return exc.code
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

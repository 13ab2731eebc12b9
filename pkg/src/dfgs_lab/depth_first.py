"""Depth-first Grover search and the baseline strategies it is compared with.

The driver walks the address tree ``ell = log2(p)`` bits at a time. At each
frame a partial search picks the most likely sub-block, the driver descends
into it, and backtracks once the frame has either explored ``p`` occupied
sub-blocks or hit ``q_k = ceil(nu / (k + 1))`` consecutive empty descents.
Blocks of at most ``p`` addresses are finished with full Grover search.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .encoder import EncoderConfig, extend_prefix, retract_prefix
from .grover import IterationSchedule, block_grover_search, partial_grover_search
from .metrics import QueryLog
from .oracle import Database, FoundSet, classical_verify
from .statevector import bits_to_int


class BudgetExhausted(RuntimeError):
    """The global oracle-query ceiling would be exceeded."""


@dataclass(frozen=True)
class SearchParams:
    p: int = 4
    nu: int = 1
    seed: int = 0
    growth: float = 6 / 5
    # A search round gives up once it has spent this many sqrt(L) queries.
    giveup: float = 4.5
    # Naive baseline stops after nu * coupon_factor consecutive failed rounds.
    coupon_factor: int = 2
    query_ceiling: Optional[int] = None

    def __post_init__(self):
        if self.p < 2 or self.p & (self.p - 1):
            raise ValueError(f"p must be a power of two >= 2, got {self.p}")
        if not 1 <= self.nu <= self.p:
            raise ValueError(f"nu must lie in [1, p={self.p}], got {self.nu}")
        if self.growth < 1:
            raise ValueError("growth must be at least 1")
        if self.giveup <= 0:
            raise ValueError("giveup must be positive")
        if self.coupon_factor < 1:
            raise ValueError("coupon_factor must be at least 1")

    @property
    def ell(self) -> int:
        return self.p.bit_length() - 1

    def ceiling_for(self, N: int) -> int:
        if self.query_ceiling is not None:
            return self.query_ceiling
        root = math.sqrt(N)
        return int(50 * self.p * root * max(1.0, root))


@dataclass
class RecursionFrame:
    depth: int
    config: EncoderConfig
    failures: int = 0

    @property
    def L(self) -> int:
        return self.config.block_size


@dataclass
class SearchOutcome:
    found: tuple[int, ...]
    log: QueryLog
    success: bool
    elapsed: float
    budget_exhausted: bool = False
    final_config: Optional[EncoderConfig] = None

    def to_dict(self) -> dict:
        return {
            "found": list(self.found),
            "log": self.log.to_dict(),
            "success": self.success,
            "budget_exhausted": self.budget_exhausted,
            "elapsed": self.elapsed,
        }


@dataclass
class _Context:
    db: Database
    params: SearchParams
    rng: np.random.Generator
    found: FoundSet = field(default_factory=FoundSet)
    log: QueryLog = field(default_factory=QueryLog)
    ceiling: int = 0
    # Shared c/d arrays: extended before each descent, retracted after it.
    config: Optional[EncoderConfig] = None

    def charge(self, j: int) -> None:
        if self.log.total_oracle_queries + j > self.ceiling:
            raise BudgetExhausted(
                f"{self.log.total_oracle_queries} + {j} queries would pass ceiling {self.ceiling}"
            )

    def accept(self, x: int) -> None:
        # Soundness guard: only verified, new solutions enter the found set.
        assert x in self.db, f"unverified address {x} accepted"
        self.found.add(x)


def failure_budget(nu: int, k: int) -> int:
    """Consecutive failures tolerated at depth ``k``: ``ceil(nu / (k + 1))``."""
    if nu < 1 or k < 0:
        raise ValueError(f"need nu >= 1 and k >= 0, got nu={nu}, k={k}")
    return max(1, -(-nu // (k + 1)))


def partial_iterations(L: int, guess: float) -> int:
    """Rounded optimal iteration count for ``guess`` undiscovered solutions."""
    if guess >= L:
        return 0
    theta = math.asin(math.sqrt(guess / L))
    return max(0, round(math.pi / (4 * theta) - 0.5))


def solution_guess(L: int, p: int, found_here: int, productive: int, failures: int) -> float:
    """Guess the undiscovered solutions left in a block of size ``L``.

    Starts from one solution, the sparse case. When the sub-blocks
    explored so far came back at least 3/4 full, the block is treated as
    dense and their density is extrapolated over the unexplored part.
    Each consecutive miss doubles the guess.
    """
    explored = productive * (L // p)
    estimate = 1.0
    if explored and 4 * found_here >= 3 * explored:
        estimate = max(estimate, found_here / explored * (L - explored))
    return estimate * 2.0**failures


def _search_round(
    ctx: _Context,
    config: EncoderConfig,
    schedule: IterationSchedule,
    depth: int,
    oracle_found: FoundSet,
) -> Optional[int]:
    """Repeat randomised single-shot searches until one yields a new solution.

    Gives up (returns ``None``) once the round has spent ``giveup * sqrt(L)``
    oracle queries. ``oracle_found`` is the set the oracle intercepts; the
    naive baseline passes an empty set so repeats can come back.
    """
    limit = ctx.params.giveup * math.sqrt(config.block_size)
    spent = 0
    while True:
        j = schedule.draw(ctx.rng)
        ctx.charge(j)
        x = block_grover_search(
            ctx.db, oracle_found, config, IterationSchedule.fixed(j), ctx.rng, ctx.log, depth
        )
        spent += j
        if x is not None and x not in ctx.found:
            return x
        schedule.grow()
        if spent >= limit:
            return None


def _base_case(frame: RecursionFrame, ctx: _Context) -> set[int]:
    q = failure_budget(ctx.params.nu, frame.depth)
    schedule = IterationSchedule.bbht(frame.L, ctx.params.growth)
    result: set[int] = set()
    frame.failures = 0
    while frame.failures < q:
        x = _search_round(ctx, frame.config, schedule, frame.depth, ctx.found)
        if x is None:
            frame.failures += 1
        else:
            ctx.accept(x)
            result.add(x)
            frame.failures = 0
    return result


def dfgs_recurse(frame: RecursionFrame, ctx: _Context) -> set[int]:
    """Explore one block; returns the solutions found inside it."""
    n, ell, p = ctx.db.n, ctx.params.ell, ctx.params.p
    if n - frame.config.r <= ell:
        return _base_case(frame, ctx)

    q = failure_budget(ctx.params.nu, frame.depth)
    result: set[int] = set()
    productive: set[int] = set()
    frame.failures = 0
    while len(productive) < p and frame.failures < q:
        guess = solution_guess(frame.L, p, len(result), len(productive), frame.failures)
        j = partial_iterations(frame.L, guess)
        ctx.charge(j)
        bits = partial_grover_search(
            ctx.db, ctx.found, frame.config, ell, IterationSchedule.fixed(j), ctx.rng, ctx.log, frame.depth
        )
        # A sub-block may be drawn again: interception steers the draw towards
        # undiscovered solutions, so revisits only happen while some remain or
        # once the block is exhausted and every draw ends in a miss.
        block = bits_to_int(bits)
        ctx.config = extend_prefix(ctx.config, bits)
        try:
            ret = dfgs_recurse(RecursionFrame(frame.depth + 1, ctx.config), ctx)
        finally:
            ctx.config = retract_prefix(ctx.config, ell)
        if ret:
            # count = distinct sub-blocks that yielded solutions; a productive
            # sub-block may be entered again since it can hold more
            if block not in productive:
                productive.add(block)
                ctx.log.record_active(frame.depth + 1)
            result |= ret
            frame.failures = 0
        else:
            frame.failures += 1
    return result


def _finish(ctx: _Context, start: float, exhausted: bool, config: Optional[EncoderConfig]) -> SearchOutcome:
    found = tuple(ctx.found)
    for x in found:
        assert x in ctx.db, f"unsound result {x}"
    return SearchOutcome(
        found=found,
        log=ctx.log,
        success=found == ctx.db.solutions,
        elapsed=time.perf_counter() - start,
        budget_exhausted=exhausted,
        final_config=config,
    )


def _context(db: Database, params: SearchParams) -> _Context:
    return _Context(db, params, np.random.default_rng(params.seed), ceiling=params.ceiling_for(db.N))


def dfgs(db: Database, params: SearchParams) -> SearchOutcome:
    """Depth-first Grover search for every solution of ``db``."""
    if params.p > db.N:
        raise ValueError(f"p={params.p} exceeds database size {db.N}")
    start = time.perf_counter()
    ctx = _context(db, params)
    ctx.config = EncoderConfig.empty(db.n)
    exhausted = False
    try:
        if dfgs_recurse(RecursionFrame(0, ctx.config), ctx):
            ctx.log.record_active(0)
    except BudgetExhausted:
        exhausted = True
    return _finish(ctx, start, exhausted, ctx.config)


def repeated_grover_intercepted(db: Database, params: SearchParams) -> SearchOutcome:
    """Flat baseline: whole-register intercepted search rounds until ``nu`` misses."""
    start = time.perf_counter()
    ctx = _context(db, params)
    config = EncoderConfig.empty(db.n)
    schedule = IterationSchedule.bbht(db.N, params.growth)
    failures, exhausted = 0, False
    try:
        while failures < params.nu:
            x = _search_round(ctx, config, schedule, 0, ctx.found)
            if x is None:
                failures += 1
            else:
                ctx.accept(x)
                failures = 0
    except BudgetExhausted:
        exhausted = True
    return _finish(ctx, start, exhausted, config)


def repeated_grover_naive(db: Database, params: SearchParams) -> SearchOutcome:
    """Flat baseline without interception: the oracle always marks all of ``M``.

    Already-found results count as misses. Stops after
    ``nu * coupon_factor`` consecutive failed rounds or once every solution
    has been seen.
    """
    start = time.perf_counter()
    ctx = _context(db, params)
    config = EncoderConfig.empty(db.n)
    schedule = IterationSchedule.bbht(db.N, params.growth)
    nothing = FoundSet()
    limit = params.nu * params.coupon_factor
    failures, exhausted = 0, False
    try:
        while failures < limit and not (db.m and len(ctx.found) == db.m):
            x = _search_round(ctx, config, schedule, 0, nothing)
            if x is None:
                failures += 1
            else:
                ctx.accept(x)
                failures = 0
    except BudgetExhausted:
        exhausted = True
    return _finish(ctx, start, exhausted, config)


def classical_scan(db: Database, params: Optional[SearchParams] = None) -> SearchOutcome:
    """Brute force: verify every address once. Always returns ``M`` exactly."""
    start = time.perf_counter()
    log = QueryLog()
    found = FoundSet()
    for x in range(db.N):
        if classical_verify(db, x, log):
            found.add(x)
    result = tuple(found)
    return SearchOutcome(result, log, result == db.solutions, time.perf_counter() - start)


STRATEGIES = {
    "dfgs": dfgs,
    "intercepted": repeated_grover_intercepted,
    "naive": repeated_grover_naive,
    "classical": classical_scan,
}

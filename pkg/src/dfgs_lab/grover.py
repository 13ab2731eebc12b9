"""Grover iterations with amplitude interception, restricted to one block.

Each iteration is ``[intercepted phase flip; block diffusion]``. The phase
flip marks only undiscovered solutions, so anything already in the found
set behaves like an ordinary unmarked element and cannot be returned again.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .encoder import EncoderConfig, encode
from .metrics import QueryLog
from .oracle import Database, FoundSet, classical_verify, intercepted_marking
from .statevector import BitString, State, apply_block_diffusion, apply_phase_flip, measure_qubits

FIXED = "fixed"
BBHT = "bbht"


@dataclass
class IterationSchedule:
    """How many Grover iterations a single search invocation runs.

    In ``fixed`` mode every invocation runs ``fixed_j`` iterations. In
    ``bbht`` mode each invocation draws ``j`` uniformly from
    ``[0, ceil(bbht_scale))``; the caller calls :meth:`grow` after a search
    that produced nothing, multiplying the scale by ``growth`` up to ``cap``.
    """

    mode: str = BBHT
    fixed_j: int = 0
    bbht_scale: float = 1.0
    growth: float = 6 / 5
    cap: int = 1 << 30

    def __post_init__(self):
        if self.mode not in (FIXED, BBHT):
            raise ValueError(f"unknown schedule mode {self.mode!r}")
        if self.fixed_j < 0:
            raise ValueError("fixed_j must be non-negative")
        if self.growth < 1:
            raise ValueError("growth must be at least 1")
        if self.cap < 1:
            raise ValueError("cap must be at least 1")

    @classmethod
    def fixed(cls, j: int) -> "IterationSchedule":
        return cls(mode=FIXED, fixed_j=j)

    @classmethod
    def bbht(cls, block_size: int, growth: float = 6 / 5, scale: float = 1.0) -> "IterationSchedule":
        """Randomised schedule whose bound saturates at ``ceil(pi/4 sqrt(L))``."""
        return cls(mode=BBHT, bbht_scale=scale, growth=growth, cap=bbht_cap(block_size))

    @property
    def at_cap(self) -> bool:
        return self.mode == BBHT and self.bbht_scale >= self.cap

    def draw(self, rng: np.random.Generator) -> int:
        if self.mode == FIXED:
            return min(self.fixed_j, self.cap)
        bound = max(1, math.ceil(min(self.bbht_scale, self.cap)))
        return int(rng.integers(0, bound))

    def grow(self) -> None:
        if self.mode == BBHT:
            self.bbht_scale = min(self.bbht_scale * self.growth, float(self.cap))


def bbht_cap(block_size: int) -> int:
    return max(1, math.ceil(math.pi / 4 * math.sqrt(block_size)))


def grover_iterate(
    state: State,
    db: Database,
    found: FoundSet,
    config: EncoderConfig,
    j: int,
    log: Optional[QueryLog] = None,
    depth: int = 0,
) -> State:
    """Apply ``j`` intercepted Grover iterations inside ``config``'s block."""
    if j <= 0:
        return state
    marking = intercepted_marking(db, found)
    # Undiscovered solutions outside the block carry zero amplitude anyway;
    # dropping them keeps the flip cheap without changing the result.
    lo, hi = config.block_start, config.block_start + config.block_size
    idx = marking.indices
    idx = idx[np.searchsorted(idx, lo) : np.searchsorted(idx, hi)]
    for _ in range(j):
        apply_phase_flip(state, idx)
        apply_block_diffusion(state, config)
    if log is not None:
        log.record_oracle(depth, j)
    return state


def optimal_iterations(L: int, t: int) -> int:
    """``floor(pi/4 sqrt(L/t))``, at least 1 unless every element is marked."""
    if t < 1:
        raise ValueError("marked count must be at least 1; use a randomised schedule when unknown")
    if t > L:
        raise ValueError(f"marked count {t} exceeds block size {L}")
    if t == L:
        return 0
    return max(1, math.floor(math.pi / 4 * math.sqrt(L / t)))


def success_probability(L: int, t: int, j: int) -> float:
    """Probability of measuring a marked element after ``j`` iterations."""
    if not 1 <= t <= L:
        raise ValueError(f"need 1 <= t <= L, got t={t}, L={L}")
    theta = math.asin(math.sqrt(t / L))
    return math.sin((2 * j + 1) * theta) ** 2


def _run_block(db, found, config, schedule, rng, log, depth) -> State:
    j = schedule.draw(rng)
    state = encode(config)
    return grover_iterate(state, db, found, config, j, log, depth)


def block_grover_search(
    db: Database,
    found: FoundSet,
    config: EncoderConfig,
    schedule: IterationSchedule,
    rng: np.random.Generator,
    log: Optional[QueryLog] = None,
    depth: int = 0,
) -> Optional[int]:
    """One shot of intercepted Grover search inside the determined block.

    Measures the free qubits, verifies the assembled address classically and
    returns it only if it is a solution not yet in ``found``. Growing a
    ``bbht`` schedule after a miss is left to the caller.
    """
    state = _run_block(db, found, config, schedule, rng, log, depth)
    if log is not None:
        log.record_base(depth)
    bits, _ = measure_qubits(state, range(config.r, config.n), rng)
    x = config.block_start
    for k, b in enumerate(bits):
        x |= b << (config.n - config.r - 1 - k)
    if classical_verify(db, x, log, depth) and x not in found:
        return x
    return None


def partial_grover_search(
    db: Database,
    found: FoundSet,
    config: EncoderConfig,
    ell: int,
    schedule: IterationSchedule,
    rng: np.random.Generator,
    log: Optional[QueryLog] = None,
    depth: int = 0,
) -> BitString:
    """Intercepted Grover iterations, then measure only the next ``ell`` qubits."""
    if not 1 <= ell <= config.n - config.r:
        raise ValueError(f"cannot determine {ell} bits with {config.n - config.r} free")
    state = _run_block(db, found, config, schedule, rng, log, depth)
    if log is not None:
        log.record_partial(depth)
    bits, _ = measure_qubits(state, range(config.r, config.r + ell), rng)
    return bits


def partial_query_budget(L: float, p: float) -> float:
    """Analytic queries of one partial search: ``sqrt(L) - sqrt(L/p)``."""
    if p < 2 or L < p:
        raise ValueError(f"need L >= p >= 2, got L={L}, p={p}")
    return math.sqrt(L) - math.sqrt(L / p)

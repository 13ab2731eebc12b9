"""Query accounting and the closed-form cost model for depth-first search.

Blocks at layer ``k`` have ``N / p**k`` addresses. The expected number of
solution-occupied blocks assumes ``m`` independently and uniformly placed
solutions (collisions allowed); generated databases draw distinct
solutions, which differs negligibly for ``m << N``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

_FIELDS = ("oracle_queries", "partial_searches", "base_searches", "verifications", "active_blocks")


def _grow(values: list[int], depth: int) -> None:
    if depth < 0:
        raise ValueError(f"depth must be non-negative, got {depth}")
    if len(values) <= depth:
        values.extend([0] * (depth + 1 - len(values)))


@dataclass
class QueryLog:
    """Per-depth tallies of oracle queries, searches and verifications.

    ``partial_searches[k]`` counts every partial search run at layer ``k``,
    including misses; ``active_blocks[k]`` counts the distinct layer-``k``
    blocks that actually produced solutions.
    """

    oracle_queries: list[int] = field(default_factory=list)
    partial_searches: list[int] = field(default_factory=list)
    base_searches: list[int] = field(default_factory=list)
    verifications: list[int] = field(default_factory=list)
    # Distinct blocks per layer whose exploration yielded solutions.
    active_blocks: list[int] = field(default_factory=list)

    def record_oracle(self, depth: int, count: int = 1) -> None:
        if count < 0:
            raise ValueError("query count must be non-negative")
        _grow(self.oracle_queries, depth)
        self.oracle_queries[depth] += count

    def record_partial(self, depth: int) -> None:
        _grow(self.partial_searches, depth)
        self.partial_searches[depth] += 1

    def record_base(self, depth: int) -> None:
        _grow(self.base_searches, depth)
        self.base_searches[depth] += 1

    def record_verification(self, depth: int) -> None:
        _grow(self.verifications, depth)
        self.verifications[depth] += 1

    def record_active(self, depth: int) -> None:
        _grow(self.active_blocks, depth)
        self.active_blocks[depth] += 1

    @property
    def depth(self) -> int:
        """Number of depth slots in use."""
        return max(len(getattr(self, name)) for name in _FIELDS)

    @property
    def total_oracle_queries(self) -> int:
        return sum(self.oracle_queries)

    @property
    def total_partial_searches(self) -> int:
        return sum(self.partial_searches)

    @property
    def total_base_searches(self) -> int:
        return sum(self.base_searches)

    @property
    def total_verifications(self) -> int:
        return sum(self.verifications)

    def totals(self) -> dict[str, int]:
        return {name: sum(getattr(self, name)) for name in _FIELDS}

    def padded(self) -> dict[str, list[int]]:
        """Per-depth arrays padded to a common length."""
        depth = self.depth
        return {
            name: list(getattr(self, name)) + [0] * (depth - len(getattr(self, name)))
            for name in _FIELDS
        }

    def to_dict(self) -> dict:
        return {"per_depth": self.padded(), "totals": self.totals()}


def merge(a: QueryLog, b: QueryLog) -> QueryLog:
    """Entrywise sum of two logs; neither input is modified."""
    out = QueryLog()
    for name in _FIELDS:
        xs, ys = getattr(a, name), getattr(b, name)
        width = max(len(xs), len(ys))
        setattr(
            out,
            name,
            [(xs[i] if i < len(xs) else 0) + (ys[i] if i < len(ys) else 0) for i in range(width)],
        )
    return out


def _log2_exact(value: int, what: str) -> int:
    if value < 1 or value & (value - 1):
        raise ValueError(f"{what} must be a power of two, got {value}")
    return value.bit_length() - 1


def max_depth(N: int, p: int) -> int:
    """Deepest layer whose blocks are still split by a partial search.

    Exact integer arithmetic on exponents: ``ceil(log2 N / log2 p) - 1``.
    """
    n = _log2_exact(N, "N")
    ell = _log2_exact(p, "p")
    if ell < 1:
        raise ValueError(f"p must be at least 2, got {p}")
    if p > N:
        raise ValueError(f"p={p} exceeds N={N}")
    return -(-n // ell) - 1


def expected_active_blocks(p: int, k: int, m):
    """Expected count of layer-``k`` blocks holding at least one solution.

    ``m`` may be a scalar or a numpy array of solution counts.
    """
    if k < 0 or np.any(np.asarray(m) < 0):
        raise ValueError("k and m must be non-negative")
    blocks = float(p) ** k
    value = blocks * (1.0 - (1.0 - 1.0 / blocks) ** np.asarray(m, dtype=float))
    return float(value) if np.ndim(value) == 0 else value


def predicted_cost(N: int, p: int, m):
    """Expected oracle queries of depth-first search under the cost model.

    Each occupied block at layer ``k`` pays one partial search of
    ``sqrt(L) - sqrt(L/p)`` queries; every solution pays a full search over
    a leaf block of size ``N / p**lam``. Vectorises over ``m``.
    """
    lam = max_depth(N, p)
    m_arr = np.asarray(m, dtype=float)
    total = np.zeros_like(m_arr)
    for k in range(lam):
        L = N / p**k
        total = total + expected_active_blocks(p, k, m_arr) * (math.sqrt(L) - math.sqrt(L / p))
    total = total + m_arr * math.sqrt(N / p**lam)
    return float(total) if total.ndim == 0 else total


def cost_upper_bound(N: int, p: int, m: int) -> float:
    """Bernoulli bound on :func:`predicted_cost`; telescopes to ``m * sqrt(N)``."""
    lam = max_depth(N, p)
    total = sum(m * (math.sqrt(N / p**k) - math.sqrt(N / p ** (k + 1))) for k in range(lam))
    return total + m * math.sqrt(N / p**lam)


def occupied_blocks(solutions: Iterable[int], n: int, p: int, k: int) -> int:
    """Exact number of layer-``k`` blocks containing at least one solution."""
    ell = _log2_exact(p, "p")
    shift = max(n - k * ell, 0)
    return len({int(x) >> shift for x in solutions})


def fit_power_law(points: Sequence[tuple[float, float]]) -> tuple[float, float, float]:
    """Least-squares fit of ``log y = a log x + b``.

    Returns ``(a, exp(b), rms)`` where ``rms`` is the root-mean-square
    residual in log space.
    """
    if len(points) < 3:
        raise ValueError(f"need at least 3 points, got {len(points)}")
    xs = np.array([p[0] for p in points], dtype=float)
    ys = np.array([p[1] for p in points], dtype=float)
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise ValueError("power-law fit needs strictly positive x and y")
    lx, ly = np.log(xs), np.log(ys)
    a, b = np.polyfit(lx, ly, 1)
    rms = float(np.sqrt(np.mean((ly - (a * lx + b)) ** 2)))
    return float(a), float(math.exp(b)), rms

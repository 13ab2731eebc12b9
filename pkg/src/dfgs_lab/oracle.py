"""Problem instances, the classical verifier and the intercepted marking.

A database is an explicit solution set ``M``; ``f(x) = 1`` iff ``x`` is in
``M``. One oracle query is one application of the (intercepted) phase flip
to the whole register, however wide the superposition.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Optional, Union

import numpy as np

from .metrics import QueryLog


class InterceptionError(ValueError):
    """Found set is not a subset of the database's solutions."""


@dataclass(frozen=True)
class Database:
    n: int
    solutions: tuple[int, ...] = ()
    _array: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        arr = np.sort(np.asarray(self.solutions, dtype=np.int64).reshape(-1))
        if arr.size > 1 and np.any(arr[1:] == arr[:-1]):
            raise ValueError("duplicate solutions")
        size = 1 << self.n
        if arr.size and (arr[0] < 0 or arr[-1] >= size):
            bad = arr[(arr < 0) | (arr >= size)]
            raise ValueError(f"solutions out of range [0, {size}): {bad[:5].tolist()}")
        arr.setflags(write=False)
        object.__setattr__(self, "solutions", tuple(arr.tolist()))
        object.__setattr__(self, "_array", arr)

    @property
    def N(self) -> int:
        return 1 << self.n

    @property
    def m(self) -> int:
        return len(self.solutions)

    @property
    def solution_array(self) -> np.ndarray:
        return self._array

    def __contains__(self, x: int) -> bool:
        i = np.searchsorted(self._array, x)
        return bool(i < self._array.size and self._array[i] == x)

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "solutions": list(self.solutions)}, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "Database":
        obj = json.loads(text)
        if not isinstance(obj, dict) or set(obj) != {"n", "solutions"}:
            raise ValueError("database must be an object with exactly 'n' and 'solutions'")
        n, sols = obj["n"], obj["solutions"]
        if not isinstance(n, int) or isinstance(n, bool):
            raise ValueError("'n' must be an integer")
        if not isinstance(sols, list) or not all(
            isinstance(x, int) and not isinstance(x, bool) for x in sols
        ):
            raise ValueError("'solutions' must be an array of integers")
        if sols != sorted(sols):
            raise ValueError("'solutions' must be sorted")
        return cls(n, tuple(sols))

    def save(self, path: Union[str, Path]) -> None:
        Path(path).write_text(self.to_json() + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: Union[str, Path]) -> "Database":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


class FoundSet:
    """Classically verified solutions discovered so far. Never shrinks."""

    def __init__(self, items: Iterable[int] = ()):
        if isinstance(items, np.ndarray):
            items = items.astype(np.int64, copy=False).tolist()
        else:
            items = [int(x) for x in items]
        self._items: set[int] = set(items)
        self._array: Optional[np.ndarray] = None
        if len(self._items) != len(items):
            raise AssertionError("solution recorded twice")

    def add(self, x: int) -> None:
        x = int(x)
        if x in self._items:
            raise AssertionError(f"solution {x} recorded twice")
        self._items.add(x)
        self._array = None

    def __contains__(self, x: int) -> bool:
        return int(x) in self._items

    def __len__(self) -> int:
        return len(self._items)

    def __iter__(self) -> Iterator[int]:
        return iter(sorted(self._items))

    def as_array(self) -> np.ndarray:
        if self._array is None:
            self._array = np.array(sorted(self._items), dtype=np.int64)
            self._array.setflags(write=False)
        return self._array

    def __repr__(self) -> str:
        return f"FoundSet({sorted(self._items)})"


class Marking:
    """Phase-flip predicate backed by a sorted index array."""

    __slots__ = ("indices",)

    def __init__(self, indices: np.ndarray):
        self.indices = np.asarray(indices, dtype=np.int64)

    def __call__(self, i: int) -> bool:
        j = np.searchsorted(self.indices, i)
        return bool(j < self.indices.size and self.indices[j] == i)

    def __len__(self) -> int:
        return int(self.indices.size)


def classical_verify(db: Database, x: int, log: Optional[QueryLog] = None, depth: int = 0) -> bool:
    """Evaluate ``f(x)``; counts one verification in ``log``."""
    if not 0 <= x < db.N:
        raise ValueError(f"address {x} out of range [0, {db.N})")
    if log is not None:
        log.record_verification(depth)
    return x in db


def intercepted_marking(db: Database, found: FoundSet) -> Marking:
    """Marks exactly the undiscovered solutions ``M \\ S``.

    Found solutions receive one flip from the interception gate and one from
    the oracle; the two cancel, so only ``M \\ S`` ends up negated.
    """
    s = found.as_array()
    if s.size and not np.all(np.isin(s, db.solution_array)):
        raise InterceptionError("found set contains non-solutions")
    return Marking(np.setdiff1d(db.solution_array, s, assume_unique=True))


def random_database(n: int, m: int, rng: Union[np.random.Generator, int, None]) -> Database:
    """Uniformly random ``m``-subset of ``[0, 2**n)``."""
    size = 1 << n
    if not 0 <= m <= size:
        raise ValueError(f"m={m} outside [0, {size}]")
    rng = np.random.default_rng(rng)
    sols = rng.choice(size, size=m, replace=False) if m else []
    return Database(n, sols)

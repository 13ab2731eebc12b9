"""Classical arrays ``c``/``d`` that fix a prefix of the search address.

``c`` holds bit values, ``d`` flags which bits are determined. Determined
bits always form a prefix (qubits ``0 .. r-1``), which is the only shape a
depth-first walk over address bits ever produces.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .statevector import MAX_QUBITS, State, check_qubit_count


class EncoderError(ValueError):
    """Raised when ``c``/``d`` violate the prefix invariants."""


@dataclass(frozen=True)
class EncoderConfig:
    n: int
    c: tuple[int, ...]
    d: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "c", tuple(int(b) for b in self.c))
        object.__setattr__(self, "d", tuple(int(b) for b in self.d))
        if len(self.c) != self.n or len(self.d) != self.n:
            raise EncoderError(f"c and d must both have length n={self.n}")
        if any(b not in (0, 1) for b in self.c + self.d):
            raise EncoderError("c and d must contain only 0/1")
        r = sum(self.d)
        if any(self.d[i] != (1 if i < r else 0) for i in range(self.n)):
            raise EncoderError(f"determined flags must form a prefix, got d={self.d}")
        if any(self.c[i] for i in range(r, self.n)):
            raise EncoderError("undetermined positions of c must hold 0")

    @classmethod
    def empty(cls, n: int) -> "EncoderConfig":
        return cls(n, (0,) * n, (0,) * n)

    @classmethod
    def from_prefix(cls, n: int, bits: Sequence[int]) -> "EncoderConfig":
        return extend_prefix(cls.empty(n), bits)

    @property
    def r(self) -> int:
        return sum(self.d)

    @property
    def prefix(self) -> int:
        """Determined bits read as an integer (0 when ``r == 0``)."""
        value = 0
        for b in self.c[: self.r]:
            value = (value << 1) | b
        return value

    @property
    def block_size(self) -> int:
        return 1 << (self.n - self.r)

    @property
    def block_start(self) -> int:
        return self.prefix << (self.n - self.r)

    def block_range(self) -> range:
        return range(self.block_start, self.block_start + self.block_size)

    def contains(self, x: int) -> bool:
        return self.block_start <= x < self.block_start + self.block_size


def encode(config: EncoderConfig, max_qubits: int = MAX_QUBITS) -> State:
    """Prepare ``|prefix> (x) uniform`` over the ``n - r`` free qubits."""
    check_qubit_count(config.n, max_qubits)
    amplitudes = np.zeros(1 << config.n, dtype=np.complex128)
    lo = config.block_start
    amplitudes[lo : lo + config.block_size] = 1.0 / np.sqrt(config.block_size)
    return State(config.n, amplitudes, max_qubits)


def extend_prefix(config: EncoderConfig, bits: Sequence[int]) -> EncoderConfig:
    bits = tuple(int(b) for b in bits)
    r = config.r
    if r + len(bits) > config.n:
        raise ValueError(f"cannot determine {len(bits)} more bits: r={r}, n={config.n}")
    c = config.c[:r] + bits + (0,) * (config.n - r - len(bits))
    d = (1,) * (r + len(bits)) + (0,) * (config.n - r - len(bits))
    return EncoderConfig(config.n, c, d)


def retract_prefix(config: EncoderConfig, count: int) -> EncoderConfig:
    r = config.r
    if not 0 <= count <= r:
        raise ValueError(f"cannot retract {count} bits with only r={r} determined")
    keep = r - count
    return EncoderConfig(
        config.n,
        config.c[:keep] + (0,) * (config.n - keep),
        (1,) * keep + (0,) * (config.n - keep),
    )

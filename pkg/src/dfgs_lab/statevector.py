"""Minimal statevector simulator for Grover-family circuits.

Bit convention: qubit 0 is the most significant bit of a basis index, so the
address ``i`` of an ``n``-qubit register reads left to right as qubits
``0 .. n-1``. A "determined prefix" of ``r`` bits is therefore the top ``r``
bits of the index and selects one contiguous slice of the amplitude array.

Oracles act in phase form: marked amplitudes are negated directly and the
``|->`` ancilla used for phase kickback is never materialised.
"""

from __future__ import annotations

from typing import Callable, Iterable, Sequence, Union

import numpy as np

MAX_QUBITS = 20

# Branch probabilities below this are treated as exactly zero on collapse.
PROB_FLOOR = 1e-15

BitString = tuple[int, ...]
Predicate = Union[Callable[[int], bool], Iterable[int]]


class State:
    """An ``n``-qubit register holding ``2**n`` complex amplitudes.

    Operations in this module mutate ``amplitudes`` in place and return the
    same object; use :meth:`copy` when the previous value is still needed.
    """

    __slots__ = ("n", "amplitudes")

    def __init__(self, n: int, amplitudes: np.ndarray, max_qubits: int = MAX_QUBITS):
        check_qubit_count(n, max_qubits)
        amplitudes = np.asarray(amplitudes, dtype=np.complex128)
        if amplitudes.shape != (1 << n,):
            raise ValueError(f"expected {1 << n} amplitudes for n={n}, got shape {amplitudes.shape}")
        self.n = n
        self.amplitudes = amplitudes

    @property
    def size(self) -> int:
        return 1 << self.n

    def copy(self) -> "State":
        return State(self.n, self.amplitudes.copy(), max_qubits=max(self.n, MAX_QUBITS))

    def norm(self) -> float:
        return float(np.sqrt(np.vdot(self.amplitudes, self.amplitudes).real))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def __repr__(self) -> str:
        return f"State(n={self.n}, norm={self.norm():.12f})"


def check_qubit_count(n: int, max_qubits: int = MAX_QUBITS) -> None:
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
        raise TypeError(f"qubit count must be an integer, got {type(n).__name__}")
    if not 1 <= n <= max_qubits:
        raise ValueError(f"qubit count must be in [1, {max_qubits}], got {n}")


def uniform_state(n: int, max_qubits: int = MAX_QUBITS) -> State:
    """Return ``H^n |0...0>``: every amplitude equal to ``2**(-n/2)``."""
    check_qubit_count(n, max_qubits)
    size = 1 << n
    return State(n, np.full(size, 1.0 / np.sqrt(size), dtype=np.complex128), max_qubits)


def basis_state(n: int, index: int, max_qubits: int = MAX_QUBITS) -> State:
    check_qubit_count(n, max_qubits)
    if not 0 <= index < (1 << n):
        raise ValueError(f"basis index {index} out of range for n={n}")
    amplitudes = np.zeros(1 << n, dtype=np.complex128)
    amplitudes[index] = 1.0
    return State(n, amplitudes, max_qubits)


def marked_indices(marked: Predicate, n: int) -> np.ndarray:
    """Resolve a marking predicate to a sorted array of basis indices.

    ``marked`` may be an object exposing an ``indices`` array (see
    :class:`dfgs_lab.oracle.Marking`), a plain iterable of indices, or a
    callable evaluated on every basis index.
    """
    size = 1 << n
    if hasattr(marked, "indices"):
        idx = np.asarray(marked.indices, dtype=np.int64)
    elif isinstance(marked, np.ndarray):
        idx = np.unique(marked.astype(np.int64, copy=False))
    elif callable(marked):
        idx = np.fromiter((i for i in range(size) if marked(i)), dtype=np.int64)
    else:
        idx = np.unique(np.fromiter(marked, dtype=np.int64))
    if idx.size and (idx[0] < 0 or idx[-1] >= size):
        raise ValueError(f"marked index out of range for n={n}")
    return idx


def apply_phase_flip(state: State, marked: Predicate) -> State:
    """Negate the amplitudes of every marked basis state."""
    idx = marked_indices(marked, state.n)
    if idx.size:
        state.amplitudes[idx] *= -1
    return state


def apply_block_diffusion(state: State, config) -> State:
    """Reflect the amplitudes of the determined block about their mean.

    ``config`` needs ``n``, ``r`` and ``prefix`` (the determined top bits as
    an integer); :class:`dfgs_lab.encoder.EncoderConfig` provides them. The
    block is the slice of indices whose top ``r`` bits equal ``prefix``;
    amplitudes outside it are untouched. With ``r == 0`` this is the usual
    Grover diffuser ``2|s><s| - I``.
    """
    if config.n != state.n:
        raise ValueError(f"config has n={config.n} but state has n={state.n}")
    width = state.n - config.r
    lo = config.prefix << width
    block = state.amplitudes[lo : lo + (1 << width)]
    mean = block.mean()
    np.subtract(2 * mean, block, out=block)
    return state


def _outcome_keys(n: int, positions: Sequence[int]) -> np.ndarray:
    idx = np.arange(1 << n, dtype=np.int64)
    keys = np.zeros(1 << n, dtype=np.int64)
    for q in positions:
        keys = (keys << 1) | ((idx >> (n - 1 - q)) & 1)
    return keys


def measure_qubits(
    state: State, positions: Sequence[int], rng: np.random.Generator
) -> tuple[BitString, State]:
    """Measure the given qubits in order and collapse the register.

    Returns the observed bits (one per position, in the order given) and a
    new renormalised state supported only on consistent basis states.
    """
    positions = [int(q) for q in positions]
    if len(set(positions)) != len(positions):
        raise ValueError(f"duplicate qubit positions: {positions}")
    for q in positions:
        if not 0 <= q < state.n:
            raise ValueError(f"qubit position {q} out of range for n={state.n}")

    probs = state.probabilities()
    keys = _outcome_keys(state.n, positions)
    branch = np.bincount(keys, weights=probs, minlength=1 << len(positions))
    branch[branch < PROB_FLOOR] = 0.0
    outcome = int(rng.choice(branch.size, p=branch / branch.sum()))

    collapsed = np.where(keys == outcome, state.amplitudes, 0.0)
    collapsed /= np.sqrt(branch[outcome])
    bits = tuple((outcome >> (len(positions) - 1 - k)) & 1 for k in range(len(positions)))
    return bits, State(state.n, collapsed, max_qubits=max(state.n, MAX_QUBITS))


def bits_to_int(bits: Sequence[int]) -> int:
    value = 0
    for b in bits:
        value = (value << 1) | int(b)
    return value


def int_to_bits(value: int, width: int) -> BitString:
    return tuple((value >> (width - 1 - k)) & 1 for k in range(width))

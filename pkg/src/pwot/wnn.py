"""WiSARD core: input mappings, RAM-node discriminators and the parallel
dual-node-size discriminator.

Node memories are bit-packed, so a discriminator with ``k`` nodes of ``N``
address bits occupies ``k * 2**N`` bits (at least one byte per node).
Patterns are numpy arrays of 0/1 values; batch methods take one pattern per
row so a whole grid of search regions is answered in one call.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DimensionError
from .rng import SplitMix64, derive_seed

MAX_NODE_SIZE = 24


@dataclass(frozen=True, eq=False)
class InputMapping:
    """Fixed assignment of input bits to RAM-node address lines.

    ``assignment[j, n]`` is the input bit driving address line ``n`` of node
    ``j`` (line 0 is the most significant address bit).  The value
    ``total_bits`` is the padding index and reads as a constant 0.
    """

    total_bits: int
    node_size: int
    seed: int
    assignment: np.ndarray

    @property
    def node_count(self) -> int:
        return self.assignment.shape[0]

    @property
    def padding_index(self) -> int:
        return self.total_bits

    @classmethod
    def identity(cls, total_bits: int, node_size: int) -> "InputMapping":
        """Consecutive bits to consecutive nodes, no shuffling."""
        return cls(total_bits, node_size, 0, _group(list(range(total_bits)), total_bits, node_size))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, InputMapping):
            return NotImplemented
        return (
            self.total_bits == other.total_bits
            and self.node_size == other.node_size
            and np.array_equal(self.assignment, other.assignment)
        )

    __hash__ = None


def _group(order: list[int], total_bits: int, node_size: int) -> np.ndarray:
    k = math.ceil(total_bits / node_size)
    padded = order + [total_bits] * (k * node_size - total_bits)
    return np.asarray(padded, dtype=np.intp).reshape(k, node_size)


def footprint_of(total_bits: int, node_size: int, copies: int = 1) -> int:
    """Footprint in bits a discriminator would need, without allocating it."""
    return copies * math.ceil(total_bits / node_size) * (1 << node_size)


def check_node_size(node_size: int, max_node_size: int = MAX_NODE_SIZE) -> None:
    if not 1 <= node_size <= max_node_size:
        raise ConfigurationError(
            f"node_size must be between 1 and {max_node_size} bits, got {node_size}"
        )


def make_input_mapping(
    total_bits: int, node_size: int, seed: int, max_node_size: int = MAX_NODE_SIZE
) -> InputMapping:
    """Shuffle the bit indices with SplitMix64 and cut them into nodes.

    The last node is padded with constant-0 lines when ``total_bits`` is not a
    multiple of ``node_size``.
    """
    if total_bits < 1:
        raise ConfigurationError(f"total_bits must be >= 1, got {total_bits}")
    check_node_size(node_size, max_node_size)
    order = SplitMix64(seed).shuffle(list(range(total_bits)))
    return InputMapping(total_bits, node_size, seed, _group(order, total_bits, node_size))


class Discriminator:
    """A bank of RAM nodes sharing one input mapping.

    ``copies`` > 1 keeps that many physically separate memories, all trained
    identically; batch lookups pick a copy per pattern through ``slots``.
    This mirrors a grid in which every discriminator owns its RAM.
    """

    def __init__(self, mapping: InputMapping, copies: int = 1):
        if copies < 1:
            raise ConfigurationError("copies must be >= 1")
        self.mapping = mapping
        self.copies = copies
        n = mapping.node_size
        self.memory = np.zeros((copies, mapping.node_count, max(1, (1 << n) // 8)), dtype=np.uint8)
        # write 0 to every cell so the whole table is resident, not lazily mapped
        self.memory.fill(0)
        self._weights = (1 << np.arange(n - 1, -1, -1)).astype(np.int64)
        self._rows = np.arange(mapping.node_count)

    @property
    def node_count(self) -> int:
        return self.mapping.node_count

    @property
    def node_size(self) -> int:
        return self.mapping.node_size

    @property
    def footprint_bits(self) -> int:
        return self.copies * self.node_count * (1 << self.node_size)

    def _as_rows(self, patterns: np.ndarray, batch: bool) -> np.ndarray:
        p = np.asarray(patterns)
        p = p.reshape(p.shape[0], -1) if batch else p.reshape(1, -1)
        if p.shape[1] != self.mapping.total_bits:
            raise DimensionError(
                f"pattern has {p.shape[1]} bits, discriminator expects {self.mapping.total_bits}"
            )
        return p

    def addresses(self, patterns: np.ndarray) -> np.ndarray:
        """RAM addresses selected by each row of ``patterns``, shape (rows, k)."""
        p = self._as_rows(patterns, batch=True)
        padded = np.zeros((p.shape[0], p.shape[1] + 1), dtype=np.uint8)
        padded[:, :-1] = p != 0
        return padded[:, self.mapping.assignment] @ self._weights

    def train(self, pattern: np.ndarray) -> "Discriminator":
        addr = self.addresses(self._as_rows(pattern, batch=False))[0]
        self.memory[:, self._rows, addr >> 3] |= (1 << (addr & 7)).astype(np.uint8)
        return self

    def respond_many(self, patterns: np.ndarray, slots: np.ndarray | None = None) -> np.ndarray:
        """Response of every row of ``patterns``; pure."""
        addr = self.addresses(patterns)
        if slots is None:
            mem = self.memory[0][self._rows, addr >> 3]
        else:
            mem = self.memory[np.asarray(slots)[:, None], self._rows, addr >> 3]
        cells = (mem >> (addr & 7).astype(np.uint8)) & 1
        return cells.sum(axis=1, dtype=np.int64)

    def respond(self, pattern: np.ndarray) -> int:
        return int(self.respond_many(self._as_rows(pattern, batch=False))[0])

    def blank(self, copies: int = 1) -> "Discriminator":
        """Untrained discriminator bank with the same input mapping."""
        return Discriminator(self.mapping, copies)

    def cell(self, node: int, address: int, copy: int = 0) -> int:
        return int((self.memory[copy, node, address >> 3] >> (address & 7)) & 1)


def new_discriminator(mapping: InputMapping) -> Discriminator:
    return Discriminator(mapping)


def memory_footprint(d: "Discriminator | ParallelDiscriminator") -> int:
    """Bits of RAM-node storage: ``copies * k * 2**N``, summed over sub-discriminators."""
    return d.footprint_bits


def partition_central_peripheral(shape: tuple[int, int], central_fraction: float) -> tuple[np.ndarray, np.ndarray]:
    """Split the row-major pixel indices of a ``(width, height)`` region.

    The central set is a centred rectangle with the region's aspect ratio,
    each side scaled by ``sqrt(P)`` and rounded down; the rest is peripheral.
    """
    if not 0.0 <= central_fraction <= 1.0:
        raise ConfigurationError(f"central fraction must be in [0, 1], got {central_fraction}")
    width, height = shape
    scale = math.sqrt(central_fraction)
    iw = min(width, math.floor(width * scale + 1e-9))
    ih = min(height, math.floor(height * scale + 1e-9))
    mask = np.zeros((height, width), dtype=bool)
    if iw > 0 and ih > 0:
        x0, y0 = (width - iw) // 2, (height - ih) // 2
        mask[y0:y0 + ih, x0:x0 + iw] = True
    flat = mask.ravel()
    return np.flatnonzero(flat), np.flatnonzero(~flat)


@dataclass(eq=False)
class ParallelDiscriminator:
    """Two discriminators over disjoint central and peripheral pixel sets.

    The response is the plain sum of the two sub-responses.
    """

    region_shape: tuple[int, int]
    central_fraction: float
    inner_node_size: int = 3
    outer_node_size: int = 15
    seed: int = 0
    max_node_size: int = MAX_NODE_SIZE
    copies: int = 1
    inner_index: np.ndarray = field(init=False, repr=False)
    outer_index: np.ndarray = field(init=False, repr=False)
    inner: Discriminator | None = field(init=False, repr=False)
    outer: Discriminator | None = field(init=False, repr=False)

    def __post_init__(self):
        check_node_size(self.inner_node_size, self.max_node_size)
        check_node_size(self.outer_node_size, self.max_node_size)
        self.inner_index, self.outer_index = partition_central_peripheral(
            self.region_shape, self.central_fraction
        )
        self.inner = self._build(self.inner_index, self.inner_node_size, 1)
        self.outer = self._build(self.outer_index, self.outer_node_size, 2)

    def _build(self, index: np.ndarray, node_size: int, salt: int) -> Discriminator | None:
        if index.size == 0:
            return None
        mapping = make_input_mapping(
            int(index.size), node_size, derive_seed(self.seed, salt), self.max_node_size
        )
        return Discriminator(mapping, self.copies)

    @property
    def node_count(self) -> int:
        return sum(d.node_count for d in (self.inner, self.outer) if d is not None)

    @property
    def memories(self) -> list[np.ndarray]:
        return [d.memory for d in (self.inner, self.outer) if d is not None]

    @property
    def footprint_bits(self) -> int:
        return sum(d.footprint_bits for d in (self.inner, self.outer) if d is not None)

    def blank(self, copies: int = 1) -> "ParallelDiscriminator":
        """Untrained copy with the same partition and input mappings."""
        other = copy.copy(self)
        other.copies = copies
        other.inner = None if self.inner is None else self.inner.blank(copies)
        other.outer = None if self.outer is None else self.outer.blank(copies)
        return other

    def _flat(self, patterns: np.ndarray, batch: bool) -> np.ndarray:
        p = np.asarray(patterns)
        width, height = self.region_shape
        expected = (height, width)
        shape = p.shape[1:] if batch else p.shape
        if tuple(shape) != expected:
            raise DimensionError(f"pattern shape {tuple(shape)} does not match region (h, w) {expected}")
        return p.reshape(p.shape[0] if batch else 1, -1)

    def split(self, pattern: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Project a single (h, w) pattern onto its central and peripheral bits."""
        flat = self._flat(pattern, batch=False)[0]
        return flat[self.inner_index], flat[self.outer_index]

    def train(self, pattern: np.ndarray) -> "ParallelDiscriminator":
        inner_bits, outer_bits = self.split(pattern)
        if self.inner is not None:
            self.inner.train(inner_bits)
        if self.outer is not None:
            self.outer.train(outer_bits)
        return self

    def respond_many(self, patterns: np.ndarray, slots: np.ndarray | None = None) -> np.ndarray:
        """Responses for a stack of (h, w) patterns, shape (rows, h, w)."""
        flat = self._flat(patterns, batch=True)
        total = np.zeros(flat.shape[0], dtype=np.int64)
        if self.inner is not None:
            total += self.inner.respond_many(flat[:, self.inner_index], slots)
        if self.outer is not None:
            total += self.outer.respond_many(flat[:, self.outer_index], slots)
        return total

    def respond(self, pattern: np.ndarray) -> int:
        return int(self.respond_many(self._flat(pattern, batch=False).reshape(1, *np.shape(pattern)))[0])


def respond_parallel(pd: ParallelDiscriminator, pattern: np.ndarray) -> int:
    return pd.respond(pattern)

"""Block-structured byte-addressable memory.

A memory maps block ids to blocks; a block has bounds [lo, hi) and one
byte-sized cell per offset. Cells remember which chunk wrote them so that
mismatched reads decode to Vundef ("undefined but not illegal") while bad
addresses (non-pointers, dead blocks, out-of-bounds, misaligned) make load
and store fail outright.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional

from .values import (
    Chunk,
    FLOAT_CHUNKS,
    Value,
    Vfloat,
    Vint,
    Vptr,
    VUNDEF,
    chunk_size,
    narrow_f32,
    sign_ext,
    zero_ext,
)


class Uninit:
    """The single uninitialized cell."""

    __slots__ = ()

    def __repr__(self) -> str:
        return "Uninit"

    def __eq__(self, other) -> bool:
        return isinstance(other, Uninit)

    def __hash__(self) -> int:
        return hash("Uninit")


UNINIT = Uninit()


@dataclass(frozen=True)
class Datum:
    """k-th byte of a value stored with a given chunk (k in 0..size-1)."""

    k: int
    value: Value
    chunk: Chunk


@dataclass(frozen=True)
class Block:
    lo: int
    hi: int
    cells: Mapping[int, object]  # offset -> Uninit | Datum, exactly on [lo, hi)
    live: bool


@dataclass(frozen=True)
class Memory:
    next_block: int
    blocks: Mapping[int, Block]


def empty_memory() -> Memory:
    return Memory(0, {})


def alloc(m: Memory, lo: int, hi: int) -> tuple[Memory, int]:
    """Allocate a fresh live block with Uninit cells on [lo, hi)."""
    if lo > hi:
        raise ValueError(f"bad bounds: lo={lo} > hi={hi}")
    b = m.next_block
    cells = {off: UNINIT for off in range(lo, hi)}
    blocks = dict(m.blocks)
    blocks[b] = Block(lo, hi, cells, True)
    return Memory(b + 1, blocks), b


def free(m: Memory, b: int) -> Memory:
    """Mark a live block dead; its id stays so dangling accesses fail."""
    blk = m.blocks.get(b)
    if blk is None or not blk.live:
        raise ValueError(f"double free: block {b}")
    blocks = dict(m.blocks)
    blocks[b] = Block(blk.lo, blk.hi, blk.cells, False)
    return Memory(m.next_block, blocks)


def _addr_ok(m: Memory, addr: Value, ch: Chunk) -> Optional[tuple[Block, int]]:
    """Valid, live, in-bounds, aligned pointer for a ch access, or None."""
    if not isinstance(addr, Vptr):
        return None
    blk = m.blocks.get(addr.block)
    if blk is None or not blk.live:
        return None
    size = chunk_size(ch)
    off = addr.offset
    if off < blk.lo or off + size > blk.hi:
        return None
    if off % size != 0:
        return None
    return blk, off


def _truncate(ch: Chunk, v: Value) -> Value:
    """Value actually held by cells after storing v with chunk ch.

    Wrong-kind stores (e.g. a float into an int chunk, a pointer into a
    sub-word chunk) hold Vundef, so later matching loads read Vundef.
    """
    if ch is Chunk.I32:
        if isinstance(v, (Vint, Vptr)):
            return v
        return VUNDEF
    if ch in (Chunk.I8S, Chunk.I8U):
        if isinstance(v, Vint):
            return Vint(zero_ext(v.i, 8))
        return VUNDEF
    if ch in (Chunk.I16S, Chunk.I16U):
        if isinstance(v, Vint):
            return Vint(zero_ext(v.i, 16))
        return VUNDEF
    if ch is Chunk.F32:
        if isinstance(v, Vfloat):
            return Vfloat(narrow_f32(v.f))
        return VUNDEF
    # F64
    if isinstance(v, Vfloat):
        return v
    return VUNDEF


def _extend(ch: Chunk, v: Value) -> Value:
    """Decode a stored value on load (8/16-bit sign or zero extension)."""
    if not isinstance(v, Vint):
        return v
    if ch is Chunk.I8S:
        return Vint(sign_ext(v.i, 8))
    if ch is Chunk.I8U:
        return Vint(zero_ext(v.i, 8))
    if ch is Chunk.I16S:
        return Vint(sign_ext(v.i, 16))
    if ch is Chunk.I16U:
        return Vint(zero_ext(v.i, 16))
    return v


def store(ch: Chunk, m: Memory, addr: Value, v: Value) -> Optional[Memory]:
    """Write v at addr with chunk ch; None on any bad address."""
    spot = _addr_ok(m, addr, ch)
    if spot is None:
        return None
    blk, off = spot
    held = _truncate(ch, v)
    cells = dict(blk.cells)
    for k in range(chunk_size(ch)):
        cells[off + k] = Datum(k, held, ch)
    blocks = dict(m.blocks)
    blocks[addr.block] = Block(blk.lo, blk.hi, cells, True)
    return Memory(m.next_block, blocks)


def load(ch: Chunk, m: Memory, addr: Value) -> Optional[Value]:
    """Read a chunk at addr.

    Some(Vundef) for uninitialized or chunk-mismatched contents; None only
    for bad addresses.
    """
    spot = _addr_ok(m, addr, ch)
    if spot is None:
        return None
    blk, off = spot
    size = chunk_size(ch)
    first = blk.cells[off]
    if not isinstance(first, Datum) or first.chunk is not ch or first.k != 0:
        return VUNDEF
    v0 = first.value
    for k in range(1, size):
        cell = blk.cells[off + k]
        if not isinstance(cell, Datum) or cell.chunk is not ch or cell.k != k or cell.value != v0:
            return VUNDEF
    return _extend(ch, v0)


def representable(ch: Chunk, v: Value) -> bool:
    """Does v survive a ch store/load round trip as extend(truncate(v))?"""
    if ch is Chunk.I32:
        return isinstance(v, (Vint, Vptr))
    if ch in FLOAT_CHUNKS:
        return isinstance(v, Vfloat)
    return isinstance(v, Vint)

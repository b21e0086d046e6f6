"""Value domain: undef, 32-bit modular integers, block/offset pointers, floats.

Integers are plain Python ints kept in [0, 2**32); signedness is an
interpretation chosen per operation (two's complement on the same bits).
NULL is not a separate constructor: it is Vint(0).
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass

MODULUS = 1 << 32
INT_MIN_SIGNED = -(1 << 31)
INT_MAX_SIGNED = (1 << 31) - 1


def norm32(x: int) -> int:
    """Reduce an integer to its 32-bit unsigned representative."""
    return x & 0xFFFFFFFF


def to_signed(x: int) -> int:
    """Two's complement signed reading of a 32-bit pattern."""
    x = norm32(x)
    return x - MODULUS if x >= (1 << 31) else x


def to_unsigned(x: int) -> int:
    return norm32(x)


def sign_ext(x: int, bits: int) -> int:
    """Sign-extend the low `bits` of x to a 32-bit pattern."""
    mask = (1 << bits) - 1
    x &= mask
    if x & (1 << (bits - 1)):
        x -= 1 << bits
    return norm32(x)


def zero_ext(x: int, bits: int) -> int:
    return x & ((1 << bits) - 1)


def narrow_f32(f: float) -> float:
    """Round a double to the nearest 32-bit float and back."""
    return struct.unpack("<f", struct.pack("<f", f))[0]


class Value:
    """Base of the four-constructor value domain."""

    __slots__ = ()


@dataclass(frozen=True)
class Vundef(Value):
    def __repr__(self) -> str:
        return "Vundef"


@dataclass(frozen=True)
class Vint(Value):
    i: int

    def __post_init__(self):
        object.__setattr__(self, "i", norm32(self.i))

    def __repr__(self) -> str:
        return f"Vint({self.i})"


@dataclass(frozen=True)
class Vptr(Value):
    block: int
    offset: int

    def __post_init__(self):
        object.__setattr__(self, "offset", norm32(self.offset))

    def __repr__(self) -> str:
        return f"Vptr({self.block},{self.offset})"


@dataclass(frozen=True)
class Vfloat(Value):
    f: float

    def __repr__(self) -> str:
        return f"Vfloat({self.f!r})"


VUNDEF = Vundef()


def is_true(v: Value) -> bool:
    """A pointer or a nonzero integer. Floats and Vundef are never true."""
    if isinstance(v, Vptr):
        return True
    return isinstance(v, Vint) and v.i != 0


def is_false(v: Value) -> bool:
    """Only the integer 0. Not the complement of is_true."""
    return isinstance(v, Vint) and v.i == 0


class Chunk(enum.Enum):
    """Memory access descriptor: width, signedness, int/float."""

    I8S = "i8s"
    I8U = "i8u"
    I16S = "i16s"
    I16U = "i16u"
    I32 = "i32"
    F32 = "f32"
    F64 = "f64"


_CHUNK_SIZE = {
    Chunk.I8S: 1,
    Chunk.I8U: 1,
    Chunk.I16S: 2,
    Chunk.I16U: 2,
    Chunk.I32: 4,
    Chunk.F32: 4,
    Chunk.F64: 8,
}

INT_CHUNKS = (Chunk.I8S, Chunk.I8U, Chunk.I16S, Chunk.I16U, Chunk.I32)
FLOAT_CHUNKS = (Chunk.F32, Chunk.F64)


def chunk_size(ch: Chunk) -> int:
    """Byte width of a chunk (1, 2, 4 or 8)."""
    return _CHUNK_SIZE[ch]


def chunk_of_name(name: str) -> Chunk:
    return Chunk(name)

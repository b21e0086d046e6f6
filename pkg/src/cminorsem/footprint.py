"""Footprints: per-byte permission maps with a partial disjoint join.

Shares are rationals in [0, 1]: 0 no permission, 0 < q < 1 load-only,
1 load+store. The map is kept canonical (no explicit zero entries), so two
footprints are equal iff their dicts are.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional

from .values import Chunk, Value, Vptr, chunk_size

FULL = Fraction(1)

Addr = tuple[int, int]  # (block id, byte offset)


@dataclass(frozen=True)
class Footprint:
    perms: Mapping[Addr, Fraction] = field(default_factory=dict)

    def share_at(self, b: int, off: int) -> Fraction:
        return self.perms.get((b, off), Fraction(0))

    def addresses(self) -> list[Addr]:
        return sorted(self.perms)

    def __repr__(self) -> str:
        items = ", ".join(f"({b},{o})={q}" for (b, o), q in sorted(self.perms.items()))
        return f"Footprint{{{items}}}"


EMPTY_FOOTPRINT = Footprint({})


def fp_empty() -> Footprint:
    return EMPTY_FOOTPRINT


def fp_join(phi0: Footprint, phi1: Footprint) -> Optional[Footprint]:
    """Disjoint sum: per-address share sums, None if any address exceeds 1."""
    merged = dict(phi0.perms)
    for addr, q in phi1.perms.items():
        total = merged.get(addr, Fraction(0)) + q
        if total > FULL:
            return None
        if total == 0:
            merged.pop(addr, None)
        else:
            merged[addr] = total
    return Footprint(merged)


def allows(phi: Footprint, addr: Value, ch: Chunk, mode: str) -> bool:
    """Every byte from addr to addr+|ch|-1 readable (load) or writable (store)."""
    assert mode in ("load", "store")
    if not isinstance(addr, Vptr):
        return False
    need_full = mode == "store"
    for k in range(chunk_size(ch)):
        q = phi.share_at(addr.block, addr.offset + k)
        if need_full:
            if q != FULL:
                return False
        elif q <= 0:
            return False
    return True


def fp_grant(phi: Footprint, b: int, lo: int, hi: int, share: Fraction) -> Optional[Footprint]:
    """Join with the rectangle {(b, k) -> share | lo <= k < hi}."""
    if share == 0 or lo >= hi:
        return Footprint(dict(phi.perms))
    rect = Footprint({(b, k): share for k in range(lo, hi)})
    return fp_join(phi, rect)


def fp_revoke(phi: Footprint, b: int, lo: int, hi: int) -> Footprint:
    """Remove a fully-owned rectangle; raises if any share there is not 1."""
    perms = dict(phi.perms)
    for k in range(lo, hi):
        if perms.get((b, k)) != FULL:
            raise ValueError(f"revoke of non-full share at ({b},{k})")
        del perms[(b, k)]
    return Footprint(perms)


def fp_restrict(phi: Footprint, addrs) -> Footprint:
    """Sub-footprint keeping only the given addresses (with their shares)."""
    keep = set(addrs)
    return Footprint({a: q for a, q in phi.perms.items() if a in keep})


def fp_minus(phi: Footprint, addrs) -> Footprint:
    """Sub-footprint dropping the given addresses entirely."""
    drop = set(addrs)
    return Footprint({a: q for a, q in phi.perms.items() if a not in drop})

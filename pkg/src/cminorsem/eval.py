"""Big-step expression evaluation, in footprint-checked and erased modes.

Evaluation is a partial function: None means "stuck". Reading Vundef from an
uninitialized local or from memory is legal; stuckness arises when Vundef (or
a wrongly-kinded value) is consumed by an operator, branch or address.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Mapping, Optional

from . import memory as mem_ops
from .footprint import Footprint, allows
from .memory import Memory
from .syntax import (
    Eload,
    Eop,
    Eval,
    Evar,
    Expr,
    Ocmp,
    Ocmpf,
    Ocmpu,
    Ofloatconst,
    Ointconst,
    Oaddrstack,
    Oaddrsymbol,
    Op,
    Oprim,
    Program,
    op_arity,
)
from .values import (
    INT_MIN_SIGNED,
    Value,
    Vfloat,
    Vint,
    Vptr,
    Vundef,
    narrow_f32,
    norm32,
    sign_ext,
    to_signed,
    to_unsigned,
    zero_ext,
)

GlobalEnv = Program  # the paper's Psi: symbols plus function definitions


@dataclass(frozen=True)
class State:
    """Interpreter state: stack block, local env, footprint, memory."""

    sp: int
    rho: Mapping[str, Value]
    phi: Footprint
    mem: Memory

    def with_rho(self, rho) -> "State":
        return replace(self, rho=rho)

    def with_phi(self, phi) -> "State":
        return replace(self, phi=phi)

    def with_mem(self, m) -> "State":
        return replace(self, mem=m)


_CMP = {
    "eq": lambda a, b: a == b,
    "ne": lambda a, b: a != b,
    "lt": lambda a, b: a < b,
    "le": lambda a, b: a <= b,
    "gt": lambda a, b: a > b,
    "ge": lambda a, b: a >= b,
}


def _bool(b: bool) -> Value:
    return Vint(1 if b else 0)


def _divs(a: int, b: int) -> Optional[int]:
    # C-style truncation toward zero; the min_int / -1 overflow is stuck.
    sa, sb = to_signed(a), to_signed(b)
    if sb == 0 or (sa == INT_MIN_SIGNED and sb == -1):
        return None
    q = abs(sa) // abs(sb)
    if (sa < 0) != (sb < 0):
        q = -q
    return norm32(q)


def _mods(a: int, b: int) -> Optional[int]:
    sa, sb = to_signed(a), to_signed(b)
    if sb == 0 or (sa == INT_MIN_SIGNED and sb == -1):
        return None
    q = abs(sa) // abs(sb)
    if (sa < 0) != (sb < 0):
        q = -q
    return norm32(sa - sb * q)


def _int_binop(name: str, a: int, b: int) -> Optional[int]:
    if name == "add":
        return norm32(a + b)
    if name == "sub":
        return norm32(a - b)
    if name == "mul":
        return norm32(a * b)
    if name == "divs":
        return _divs(a, b)
    if name == "mods":
        return _mods(a, b)
    if name == "divu":
        if b == 0:
            return None
        return norm32(a // b)
    if name == "modu":
        if b == 0:
            return None
        return norm32(a % b)
    if name == "and":
        return a & b
    if name == "or":
        return a | b
    if name == "xor":
        return a ^ b
    if name in ("shl", "shrs", "shru"):
        if b >= 32:
            return None
        if name == "shl":
            return norm32(a << b)
        if name == "shru":
            return a >> b
        return norm32(to_signed(a) >> b)
    return None


def _prim(name: str, vl: list[Value]) -> Optional[Value]:
    if name in ("add", "sub"):
        # Pointer offset arithmetic: ptr+int, int+ptr, ptr-int.
        a, b = vl
        if isinstance(a, Vptr) and isinstance(b, Vint):
            off = a.offset + b.i if name == "add" else a.offset - b.i
            return Vptr(a.block, norm32(off))
        if name == "add" and isinstance(a, Vint) and isinstance(b, Vptr):
            return Vptr(b.block, norm32(b.offset + a.i))
    if name in ("addf", "subf", "mulf", "divf"):
        a, b = vl
        if not (isinstance(a, Vfloat) and isinstance(b, Vfloat)):
            return None
        if name == "addf":
            return Vfloat(a.f + b.f)
        if name == "subf":
            return Vfloat(a.f - b.f)
        if name == "mulf":
            return Vfloat(a.f * b.f)
        if b.f == 0.0:
            if a.f == 0.0 or math.isnan(a.f):
                return Vfloat(math.nan)
            same = math.copysign(1.0, a.f) == math.copysign(1.0, b.f)
            return Vfloat(math.inf if same else -math.inf)
        return Vfloat(a.f / b.f)
    if name == "neg":
        (a,) = vl
        return Vint(norm32(-a.i)) if isinstance(a, Vint) else None
    if name == "notint":
        (a,) = vl
        return Vint(norm32(~a.i)) if isinstance(a, Vint) else None
    if name == "negf":
        (a,) = vl
        return Vfloat(-a.f) if isinstance(a, Vfloat) else None
    if name in ("cast8s", "cast8u", "cast16s", "cast16u"):
        (a,) = vl
        if not isinstance(a, Vint):
            return None
        bits = 8 if "8" in name else 16
        if name.endswith("s"):
            return Vint(sign_ext(a.i, bits))
        return Vint(zero_ext(a.i, bits))
    if name == "intoffloat":
        (a,) = vl
        if not isinstance(a, Vfloat) or not math.isfinite(a.f):
            return None
        t = math.trunc(a.f)
        if t < INT_MIN_SIGNED or t > (1 << 31) - 1:
            return None
        return Vint(norm32(t))
    if name == "floatofint":
        (a,) = vl
        return Vfloat(float(to_signed(a.i))) if isinstance(a, Vint) else None
    if name == "floatofintu":
        (a,) = vl
        return Vfloat(float(to_unsigned(a.i))) if isinstance(a, Vint) else None
    if name in ("divu", "modu", "shl", "shrs", "shru", "mul", "divs", "mods",
                "and", "or", "xor", "add", "sub"):
        a, b = vl
        if isinstance(a, Vint) and isinstance(b, Vint):
            r = _int_binop(name, a.i, b.i)
            return None if r is None else Vint(r)
        return None
    return None


def _cmp_int(kind: str, a: Value, b: Value) -> Optional[Value]:
    """The paper's ==int family: integers and pointers, signed order on ints."""
    if isinstance(a, Vint) and isinstance(b, Vint):
        return _bool(_CMP[kind](to_signed(a.i), to_signed(b.i)))
    if isinstance(a, Vptr) and isinstance(b, Vptr):
        if a.block == b.block:
            # Offsets are unsigned quantities within one block.
            return _bool(_CMP[kind](a.offset, b.offset))
        if kind == "eq":
            return Vint(0)
        if kind == "ne":
            return Vint(1)
        return None  # cross-block pointer ordering
    if isinstance(a, Vptr) and isinstance(b, Vint) or isinstance(a, Vint) and isinstance(b, Vptr):
        iv = a if isinstance(a, Vint) else b
        if iv.i != 0 or kind not in ("eq", "ne"):
            return None  # nonzero integer vs pointer, or NULL ordering
        return Vint(0) if kind == "eq" else Vint(1)
    return None


def eval_operation(psi: GlobalEnv, sp: int, op: Op, vl: list[Value]) -> Optional[Value]:
    """Operator semantics; None signals "stuck" to the caller."""
    if op_arity(op) != len(vl):
        return None
    if isinstance(op, Ointconst):
        return Vint(op.value)
    if isinstance(op, Ofloatconst):
        return Vfloat(op.value)
    if isinstance(op, Oaddrsymbol):
        b = psi.symbols.get(op.name)
        return None if b is None else Vptr(b, 0)
    if isinstance(op, Oaddrstack):
        return Vptr(sp, op.offset)
    if any(isinstance(v, Vundef) for v in vl):
        return None  # Vundef is contagious through every operator
    if isinstance(op, Ocmp):
        return _cmp_int(op.kind, vl[0], vl[1])
    if isinstance(op, Ocmpu):
        a, b = vl
        if isinstance(a, Vint) and isinstance(b, Vint):
            return _bool(_CMP[op.kind](to_unsigned(a.i), to_unsigned(b.i)))
        return None
    if isinstance(op, Ocmpf):
        a, b = vl
        if isinstance(a, Vfloat) and isinstance(b, Vfloat):
            return _bool(_CMP[op.kind](a.f, b.f))
        return None
    if isinstance(op, Oprim):
        return _prim(op.name, vl)
    return None


def _eval(psi: GlobalEnv, sp: int, rho, phi, m, e: Expr, check_fp: bool) -> Optional[Value]:
    if isinstance(e, Eval):
        return e.v
    if isinstance(e, Evar):
        return rho.get(e.name)  # None when unbound
    if isinstance(e, Eop):
        vl = []
        for a in e.args:
            v = _eval(psi, sp, rho, phi, m, a, check_fp)
            if v is None:
                return None
            vl.append(v)
        return eval_operation(psi, sp, e.op, vl)
    if isinstance(e, Eload):
        v1 = _eval(psi, sp, rho, phi, m, e.addr, check_fp)
        if v1 is None:
            return None
        if check_fp and not allows(phi, v1, e.chunk, "load"):
            return None
        return mem_ops.load(e.chunk, m, v1)
    return None


def eval_expr(psi: GlobalEnv, sigma: State, e: Expr) -> Optional[Value]:
    """Footprint-checked evaluation: loads outside the footprint are stuck."""
    return _eval(psi, sigma.sp, sigma.rho, sigma.phi, sigma.mem, e, True)


def eval_exprlist(psi: GlobalEnv, sigma: State, el) -> Optional[list[Value]]:
    """Element-wise evaluation against one state; None if any element sticks."""
    vl = []
    for e in el:
        v = eval_expr(psi, sigma, e)
        if v is None:
            return None
        vl.append(v)
    return vl


def eval_expr_erased(psi: GlobalEnv, sp: int, rho, m: Memory, e: Expr) -> Optional[Value]:
    """Like eval_expr but ignoring footprints (the compiler's semantics)."""
    return _eval(psi, sp, rho, Footprint({}), m, e, False)

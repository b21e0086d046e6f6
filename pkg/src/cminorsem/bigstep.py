"""Independent big-step statement semantics, used as a differential oracle.

Deliberately written as compositional recursion over statements (no
continuations) so that agreement with the small-step machine is a real
cross-check rather than a shared code path. Outcomes: Normal, ExitOut,
ReturnOut, BigStuck, OutOfFuel. Fuel counts statement-rule applications,
which is a different unit from small steps; only terminating-vs-terminating
runs are comparable.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from . import memory as mem_ops
from .eval import GlobalEnv, State, eval_expr, eval_exprlist
from .footprint import allows, fp_grant, fp_revoke
from .memory import alloc, free
from .smallstep import Finished, OutOfFuel as SmallOutOfFuel, Stuck, entry_continuation, initial_footprint, initial_memory
from .syntax import (
    Sannot,
    Sassign,
    Sblock,
    Scall,
    Sexit,
    Sif,
    Sloop,
    Sreturn,
    Sseq,
    Sskip,
    Sstore,
    Stmt,
)
from .values import VUNDEF, Value, Vptr, is_false, is_true


class BigOutcome:
    __slots__ = ()


@dataclass(frozen=True)
class Normal(BigOutcome):
    state: State


@dataclass(frozen=True)
class ExitOut(BigOutcome):
    n: int
    state: State


@dataclass(frozen=True)
class ReturnOut(BigOutcome):
    values: tuple[Value, ...]
    state: State


@dataclass(frozen=True)
class BigStuck(BigOutcome):
    reason: str


@dataclass(frozen=True)
class BigOutOfFuel(BigOutcome):
    pass


class _Fuel:
    def __init__(self, n: int):
        self.n = n

    def spend(self) -> bool:
        if self.n <= 0:
            return False
        self.n -= 1
        return True


def _exec(psi: GlobalEnv, sigma: State, s: Stmt, fuel: _Fuel) -> BigOutcome:
    if not fuel.spend():
        return BigOutOfFuel()

    if isinstance(s, Sskip):
        return Normal(sigma)

    if isinstance(s, Sannot):
        return _exec(psi, sigma, s.body, fuel)

    if isinstance(s, Sassign):
        v = eval_expr(psi, sigma, s.e)
        if v is None:
            return BigStuck(f"assign: expression stuck ({s.name})")
        rho2 = dict(sigma.rho)
        rho2[s.name] = v
        return Normal(sigma.with_rho(rho2))

    if isinstance(s, Sstore):
        v1 = eval_expr(psi, sigma, s.addr)
        if v1 is None:
            return BigStuck("store: address expression stuck")
        v2 = eval_expr(psi, sigma, s.e)
        if v2 is None:
            return BigStuck("store: value expression stuck")
        if not allows(sigma.phi, v1, s.chunk, "store"):
            return BigStuck("store permission required")
        m2 = mem_ops.store(s.chunk, sigma.mem, v1, v2)
        if m2 is None:
            return BigStuck("store: bad address")
        return Normal(sigma.with_mem(m2))

    if isinstance(s, Sseq):
        out = _exec(psi, sigma, s.s1, fuel)
        if isinstance(out, Normal):
            return _exec(psi, out.state, s.s2, fuel)
        return out

    if isinstance(s, Sif):
        v = eval_expr(psi, sigma, s.cond)
        if v is None:
            return BigStuck("if: condition stuck")
        if is_true(v):
            return _exec(psi, sigma, s.then, fuel)
        if is_false(v):
            return _exec(psi, sigma, s.els, fuel)
        return BigStuck("if: undefined branch condition")

    if isinstance(s, Sloop):
        state = sigma
        while True:
            out = _exec(psi, state, s.body, fuel)
            if isinstance(out, Normal):
                if not fuel.spend():
                    return BigOutOfFuel()
                state = out.state
                continue
            return out

    if isinstance(s, Sblock):
        out = _exec(psi, sigma, s.body, fuel)
        if isinstance(out, Normal):
            return BigStuck("block fell through (body terminated without exit)")
        if isinstance(out, ExitOut):
            if out.n == 0:
                return Normal(out.state)
            return ExitOut(out.n - 1, out.state)
        return out

    if isinstance(s, Sexit):
        return ExitOut(s.n, sigma)

    if isinstance(s, Sreturn):
        vl = eval_exprlist(psi, sigma, s.args)
        if vl is None:
            return BigStuck("return: result expression stuck")
        return ReturnOut(tuple(vl), sigma)

    if isinstance(s, Scall):
        vf = eval_expr(psi, sigma, s.target)
        if vf is None:
            return BigStuck("call: target expression stuck")
        if not isinstance(vf, Vptr) or vf.offset != 0:
            return BigStuck("call: target is not a function address")
        g = psi.fun_by_block.get(vf.block)
        if g is None:
            return BigStuck("call: no function at target block")
        vl = eval_exprlist(psi, sigma, s.args)
        if vl is None:
            return BigStuck("call: argument stuck")
        if len(vl) != len(g.params):
            return BigStuck(f"arity mismatch: {len(vl)} args for {g.name}/{len(g.params)}")
        if len(s.results) != s.sig.results:
            return BigStuck("arity mismatch: call signature disagrees with result variables")
        m2, b = alloc(sigma.mem, 0, g.stackspace)
        phi2 = fp_grant(sigma.phi, b, 0, g.stackspace, Fraction(1))
        rho_callee = {x: v for x, v in zip(g.params, vl)}
        for y in g.locals:
            rho_callee[y] = VUNDEF
        out = _exec(psi, State(b, rho_callee, phi2, m2), g.body, fuel)
        if isinstance(out, ReturnOut):
            returned = out.values
        elif isinstance(out, Normal):
            returned = ()
        elif isinstance(out, ExitOut):
            return BigStuck("exit past outermost block")
        else:
            return out
        end = out.state
        blk = end.mem.blocks[b]
        m3 = free(end.mem, b)
        phi3 = fp_revoke(end.phi, b, blk.lo, blk.hi)
        if len(returned) != len(s.results):
            return BigStuck(
                f"arity mismatch: returning {len(returned)} values into {len(s.results)} variables")
        rho2 = dict(sigma.rho)
        for x, v in zip(s.results, returned):
            rho2[x] = v
        return Normal(State(sigma.sp, rho2, phi3, m3))

    return BigStuck(f"no rule for statement {type(s).__name__}")


def bigstep_exec(psi: GlobalEnv, sigma: State, s: Stmt, fuel: int) -> BigOutcome:
    """Run one statement to an outcome with the given statement-rule fuel."""
    return _exec(psi, sigma, s, _Fuel(fuel))


def bigstep_run(psi: GlobalEnv, entry: str, args: list[Value], fuel: int):
    """Whole-program big-step run, mirroring the small-step runner's
    initialization and producing the same outcome vocabulary."""
    k = entry_continuation(psi, entry, args)  # same initial state construction
    sigma = k.state
    f = psi.fun_by_block[psi.symbols[entry]]
    out = _exec(psi, sigma, f.body, _Fuel(fuel))
    if isinstance(out, BigOutOfFuel):
        return SmallOutOfFuel(k)
    if isinstance(out, BigStuck):
        return Stuck(k, out.reason)
    if isinstance(out, ExitOut):
        return Stuck(k, "exit past outermost block")
    if isinstance(out, ReturnOut):
        vl, end = out.values, out.state
    else:  # Normal: fell off the body, implicit empty return
        vl, end = (), out.state
    blk = end.mem.blocks[end.sp]
    m2 = free(end.mem, end.sp)
    phi2 = fp_revoke(end.phi, end.sp, blk.lo, blk.hi)
    return Finished(tuple(vl), State(end.sp, end.rho, phi2, m2))

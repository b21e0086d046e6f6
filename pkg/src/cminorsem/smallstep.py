"""Continuation-based small-step statement semantics.

A continuation is a state plus a control stack (Kstop / Kseq / Kblock /
Kcall). One rule fires per step; when none applies the continuation is
stuck — that is the semantics' notion of runtime error. Call and return
thread an activation record through Kcall: a call allocates the callee's
stack block and grants full permission over it, a return frees and revokes
it symmetrically.

The runner plants a sentinel Kcall (results field None) under the entry
function; a return reaching it finishes the run instead of stepping.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from . import memory as mem_ops
from .eval import GlobalEnv, State, eval_expr, eval_exprlist
from .footprint import Footprint, allows, fp_grant, fp_revoke
from .memory import Memory, alloc, empty_memory, free
from .syntax import (
    FunDef,
    Program,
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
    seq_list,
)
from .values import VUNDEF, Value, Vptr, is_false, is_true


# ----------------------------------------------------------------- controls

class Control:
    __slots__ = ()


@dataclass(frozen=True)
class Kstop(Control):
    pass


@dataclass(frozen=True)
class Kseq(Control):
    s: Stmt
    k: Control


@dataclass(frozen=True)
class Kblock(Control):
    k: Control


@dataclass(frozen=True)
class Kcall(Control):
    """Pending return point: result vars, the function being returned to,
    its stack block and environment. results None marks the runner's
    sentinel (the host accepts any returned values)."""

    results: Optional[tuple[str, ...]]
    f: Optional[FunDef]
    sp: int
    rho: dict
    k: Control


class Ksentinel(Control):
    """Opaque control used by the absorption checker: no rule matches it,
    so any rule that would inspect the tail fails instead."""

    __slots__ = ("tag",)

    def __init__(self, tag: str = "sentinel"):
        self.tag = tag

    def __repr__(self) -> str:
        return f"Ksentinel({self.tag})"


KSTOP = Kstop()


@dataclass(frozen=True)
class Continuation:
    state: State
    control: Control


def cat(prefix: Control, k: Control) -> Control:
    """Concatenate a control prefix onto k; Kstop is the empty prefix."""
    if isinstance(prefix, Kstop):
        return k
    if isinstance(prefix, Kseq):
        return Kseq(prefix.s, cat(prefix.k, k))
    if isinstance(prefix, Kblock):
        return Kblock(cat(prefix.k, k))
    if isinstance(prefix, Kcall):
        return Kcall(prefix.results, prefix.f, prefix.sp, prefix.rho, cat(prefix.k, k))
    raise TypeError(f"not a control prefix: {prefix!r}")


# ------------------------------------------------------------------ outcomes

@dataclass(frozen=True)
class Finished:
    results: tuple[Value, ...]
    final: State


@dataclass(frozen=True)
class Stuck:
    at: Continuation
    reason: str


@dataclass(frozen=True)
class OutOfFuel:
    at: Continuation


Outcome = object  # Finished | Stuck | OutOfFuel


@dataclass
class StepResult:
    """One step attempt: status "step" (next, rule), "finished" (results,
    final) or "stuck" (reason). callee/returned carry call/return details
    for tracing and the Hoare checker."""

    status: str
    next: Optional[Continuation] = None
    rule: Optional[str] = None
    reason: Optional[str] = None
    results: Optional[tuple[Value, ...]] = None
    final: Optional[State] = None
    callee: Optional[FunDef] = None
    returned: Optional[tuple[Value, ...]] = None


def _stuck(reason: str) -> StepResult:
    return StepResult("stuck", reason=reason)


def _step(k: Continuation, control: Control, rule: str, state: Optional[State] = None,
          **extra) -> StepResult:
    return StepResult("step", next=Continuation(state or k.state, control), rule=rule, **extra)


def _pop_to_block(k: Control):
    """Scan past pending Kseq frames (j >= 0) to the nearest Kblock."""
    while isinstance(k, Kseq):
        k = k.k
    if isinstance(k, Kblock):
        return k.k
    return None


def _pop_to_call(k: Control):
    """Scan past Kseq/Kblock frames to the nearest Kcall."""
    while isinstance(k, (Kseq, Kblock)):
        k = k.k
    if isinstance(k, Kcall):
        return k
    return None


def _do_return(psi: GlobalEnv, k: Continuation, vl: tuple[Value, ...],
               target: Kcall, erased: bool) -> StepResult:
    sigma = k.state
    blk = sigma.mem.blocks.get(sigma.sp)
    if blk is None or not blk.live:
        return _stuck("return: stack block not live")
    m2 = free(sigma.mem, sigma.sp)
    if erased:
        phi2 = sigma.phi
    else:
        try:
            phi2 = fp_revoke(sigma.phi, sigma.sp, blk.lo, blk.hi)
        except ValueError:
            return _stuck("return: stack block permission not intact")
    if target.results is None:
        final = State(sigma.sp, sigma.rho, phi2, m2)
        return StepResult("finished", results=vl, final=final, returned=vl)
    if len(vl) != len(target.results):
        return _stuck(f"arity mismatch: returning {len(vl)} values into {len(target.results)} variables")
    rho2 = dict(target.rho)
    for x, v in zip(target.results, vl):
        rho2[x] = v
    state2 = State(target.sp, rho2, phi2, m2)
    return StepResult("step", next=Continuation(state2, target.k), rule="return", returned=vl)


def step_once(psi: GlobalEnv, k: Continuation, erased: bool = False) -> StepResult:
    """Attempt the one applicable rule; reports stuck reasons by name."""
    sigma, ctl = k.state, k.control

    if isinstance(ctl, Kstop):
        return _stuck("Kstop has no successor (not a stuck state by definition)")

    # Falling off a function body: an implicit `return` of the empty list.
    if isinstance(ctl, Kcall):
        return _do_return(psi, k, (), ctl, erased)

    if isinstance(ctl, Kblock):
        return _stuck("block fell through (body terminated without exit)")

    if not isinstance(ctl, Kseq):
        return _stuck("opaque control")

    s, tail = ctl.s, ctl.k

    if isinstance(s, Sseq):
        return _step(k, Kseq(s.s1, Kseq(s.s2, tail)), "seq")

    if isinstance(s, Sskip):
        return _step(k, tail, "skip")

    if isinstance(s, Sannot):
        return _step(k, Kseq(s.body, tail), "annot")

    if isinstance(s, Sassign):
        v = eval_expr(psi, sigma, s.e)
        if v is None:
            return _stuck(f"assign: expression stuck ({s.name})")
        rho2 = dict(sigma.rho)
        rho2[s.name] = v
        return _step(k, tail, "assign", sigma.with_rho(rho2))

    if isinstance(s, Sstore):
        v1 = eval_expr(psi, sigma, s.addr)
        if v1 is None:
            return _stuck("store: address expression stuck")
        v2 = eval_expr(psi, sigma, s.e)
        if v2 is None:
            return _stuck("store: value expression stuck")
        if not erased and not allows(sigma.phi, v1, s.chunk, "store"):
            return _stuck("store permission required")
        m2 = mem_ops.store(s.chunk, sigma.mem, v1, v2)
        if m2 is None:
            return _stuck("store: bad address")
        return _step(k, tail, "store", sigma.with_mem(m2))

    if isinstance(s, Sif):
        v = eval_expr(psi, sigma, s.cond)
        if v is None:
            return _stuck("if: condition stuck")
        if is_true(v):
            return _step(k, Kseq(s.then, tail), "if-true")
        if is_false(v):
            return _step(k, Kseq(s.els, tail), "if-false")
        return _stuck("if: undefined branch condition")

    if isinstance(s, Sloop):
        return _step(k, Kseq(s.body, Kseq(s, tail)), "loop")

    if isinstance(s, Sblock):
        return _step(k, Kseq(s.body, Kblock(tail)), "block")

    if isinstance(s, Sexit):
        rest = _pop_to_block(tail)
        if rest is None:
            return _stuck("exit past outermost block")
        if s.n == 0:
            return _step(k, rest, "exit0")
        return _step(k, Kseq(Sexit(s.n - 1), rest), "exitS")

    if isinstance(s, Sreturn):
        vl = eval_exprlist(psi, sigma, s.args)
        if vl is None:
            return _stuck("return: result expression stuck")
        target = _pop_to_call(tail)
        if target is None:
            return _stuck("return with no pending call")
        return _do_return(psi, k, tuple(vl), target, erased)

    if isinstance(s, Scall):
        vf = eval_expr(psi, sigma, s.target)
        if vf is None:
            return _stuck("call: target expression stuck")
        if not isinstance(vf, Vptr) or vf.offset != 0:
            return _stuck("call: target is not a function address")
        g = psi.fun_by_block.get(vf.block)
        if g is None:
            return _stuck("call: no function at target block")
        vl = eval_exprlist(psi, sigma, s.args)
        if vl is None:
            return _stuck("call: argument stuck")
        if len(vl) != len(g.params):
            return _stuck(f"arity mismatch: {len(vl)} args for {g.name}/{len(g.params)}")
        if len(s.results) != s.sig.results:
            return _stuck("arity mismatch: call signature disagrees with result variables")
        m2, b = alloc(sigma.mem, 0, g.stackspace)
        if erased:
            phi2 = sigma.phi
        else:
            phi2 = fp_grant(sigma.phi, b, 0, g.stackspace, Fraction(1))
            assert phi2 is not None  # fresh block: nothing to collide with
        rho_callee = {x: v for x, v in zip(g.params, vl)}
        for y in g.locals:
            rho_callee[y] = VUNDEF
        state2 = State(b, rho_callee, phi2, m2)
        ctl2 = Kseq(g.body, Kcall(s.results, g, sigma.sp, dict(sigma.rho), tail))
        return StepResult("step", next=Continuation(state2, ctl2), rule="call", callee=g)

    return _stuck(f"no rule for statement {type(s).__name__}")


def step(psi: GlobalEnv, k: Continuation, erased: bool = False) -> Optional[Continuation]:
    """The small-step function; None when no rule applies."""
    r = step_once(psi, k, erased)
    return r.next if r.status == "step" else None


def is_stuck(psi: GlobalEnv, k: Continuation) -> Optional[str]:
    """Stuck reason, or None for Kstop, steppable and finish configurations."""
    if isinstance(k.control, Kstop):
        return None
    r = step_once(psi, k)
    if r.status == "stuck":
        return r.reason
    return None


# ------------------------------------------------------------------- running

def initial_memory(psi: GlobalEnv) -> Memory:
    """Data globals as Uninit blocks of their declared sizes (ids first, in
    declaration order), then an empty block per function."""
    m = empty_memory()
    for bid, size in psi.data_blocks():
        m, got = alloc(m, 0, size)
        assert got == bid
    for f in psi.functions:
        m, got = alloc(m, 0, 0)
        assert got == psi.symbols[f.name]
    return m


def initial_footprint(psi: GlobalEnv) -> Footprint:
    phi = Footprint({})
    for bid, size in psi.data_blocks():
        phi = fp_grant(phi, bid, 0, size, Fraction(1))
        assert phi is not None
    return phi


def entry_continuation(psi: GlobalEnv, entry: str, args: list[Value]) -> Continuation:
    """Initial continuation: fresh stack block for the entry function, its
    params bound to args, full shares on globals plus the stack block, and
    the sentinel Kcall at the bottom of the control."""
    f = None
    b = psi.symbols.get(entry)
    if b is not None:
        f = psi.fun_by_block.get(b)
    if f is None:
        raise ValueError(f"unknown entry function: {entry!r}")
    if len(args) != len(f.params):
        raise ValueError(f"entry arity: {len(args)} args for {entry}/{len(f.params)}")
    m = initial_memory(psi)
    phi = initial_footprint(psi)
    m, sp = alloc(m, 0, f.stackspace)
    phi = fp_grant(phi, sp, 0, f.stackspace, Fraction(1))
    rho = {x: v for x, v in zip(f.params, args)}
    for y in f.locals:
        rho[y] = VUNDEF
    state = State(sp, rho, phi, m)
    ctl = Kseq(f.body, Kcall(None, f, sp, {}, KSTOP))
    return Continuation(state, ctl)


def _fmt_value(v: Value) -> str:
    from .pretty import show_value

    return show_value(v)


def _trace_line(i: int, r: StepResult, before: Continuation) -> str:
    head = before.control
    if isinstance(head, Kseq):
        head_txt = type(head.s).__name__
    else:
        head_txt = type(head).__name__
    parts = [f"#{i}", r.rule or "-", head_txt]
    if r.status == "step":
        b, a = before.state, r.next.state
        delta = [f"{x}:={_fmt_value(v)}" for x, v in sorted(a.rho.items())
                 if b.rho.get(x) != v]
        if b.sp != a.sp:
            delta.append(f"sp:={a.sp}")
        if delta:
            parts.append("rho[" + ",".join(delta) + "]")
        dphi = len(a.phi.perms) - len(b.phi.perms)
        if dphi:
            parts.append(f"phi[{dphi:+d}]")
        if a.mem is not b.mem and a.mem != b.mem:
            parts.append("mem[written]")
    return " ".join(parts)


def run(psi: GlobalEnv, entry: str, args: list[Value], fuel: int,
        erased: bool = False, trace: bool = False):
    """Iterate the step function up to fuel times from the entry function.

    Returns Finished / Stuck / OutOfFuel; with trace=True returns
    (outcome, list-of-trace-lines).
    """
    k = entry_continuation(psi, entry, args)
    lines: list[str] = []
    for i in range(fuel):
        r = step_once(psi, k, erased)
        if r.status == "finished":
            if trace:
                lines.append(f"#{i} finished [" + ", ".join(_fmt_value(v) for v in r.results) + "]")
                return Finished(tuple(r.results), r.final), lines
            return Finished(tuple(r.results), r.final)
        if r.status == "stuck":
            if trace:
                lines.append(f"#{i} stuck: {r.reason}")
                return Stuck(k, r.reason), lines
            return Stuck(k, r.reason)
        if trace:
            lines.append(_trace_line(i, r, k))
        k = r.next
    if trace:
        lines.append(f"#{fuel} out of fuel")
        return OutOfFuel(k), lines
    return OutOfFuel(k)


# ---------------------------------------------------------------- absorption

def _has_tail(ctl: Control, sentinel: Control) -> bool:
    """Does ctl end, structurally, in the given sentinel object?"""
    while True:
        if ctl is sentinel:
            return True
        if isinstance(ctl, Kseq):
            ctl = ctl.k
        elif isinstance(ctl, Kblock):
            ctl = ctl.k
        elif isinstance(ctl, Kcall):
            ctl = ctl.k
        else:
            return False


def absorbs(psi: GlobalEnv, n: int, s: Stmt, sigma: State) -> bool:
    """Can s absorb n steps in sigma: its first n steps neither inspect nor
    consume the surrounding control.

    Checked by running against an opaque sentinel tail: a rule that would
    pattern-match into the sentinel cannot fire, and the sentinel must
    survive at the tail of the control after every step.
    """
    sentinel = Ksentinel()
    k = Continuation(sigma, Kseq(s, sentinel))
    for _ in range(n):
        r = step_once(psi, k)
        if r.status != "step":
            return False
        k = r.next
        if not _has_tail(k.control, sentinel):
            return False
    return True


@dataclass(frozen=True)
class AtLeastBound:
    bound: int


def max_absorb(psi: GlobalEnv, s: Stmt, sigma: State, bound: int):
    """Least i with absorbs(i) and not absorbs(i+1); AtLeastBound if s still
    absorbs at the bound. Single pass: step determinism makes the absorbed
    prefix unique."""
    sentinel = Ksentinel()
    k = Continuation(sigma, Kseq(s, sentinel))
    for i in range(bound):
        r = step_once(psi, k)
        if r.status != "step" or not _has_tail(r.next.control, sentinel):
            return i
        k = r.next
    return AtLeastBound(bound)


def unfold_loop(s: Stmt, n: int) -> Stmt:
    """(s;)^n followed by the infinite skip-loop."""
    out: Stmt = Sloop(Sskip())
    for _ in range(n):
        out = Sseq(s, out)
    return out

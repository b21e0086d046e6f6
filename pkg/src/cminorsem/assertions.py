"""Deep-embedded separation-logic assertions with a decidable checker.

Assertions are checked against a concrete (program, state) pair and yield
three-valued results: Holds, Fails, or Unknown (only from existential
witness exhaustion or separating-conjunction split-bound overflow).

Embedded expressions reuse the program Expr type and must be pure (no
loads); identifier lookup goes through an overlay in which logic variables
(existential binders, auxiliary variables, ret0..retN) shadow program
variables. Evaluation assertions (e ==> v, [e], defined(e)) include emp, so
they only hold on empty footprints; Aprop is the footprint- and
state-insensitive embedding of a pure formula over logic variables.

The separating conjunction is modelled by the whole-share split space: each
held address goes entirely left or right. The checker forces the split when
one side's footprint discipline is determinate (emp / exact chunk range /
insensitive / upward-closed) and falls back to bounded enumeration
otherwise; answers agree with exhaustive whole-share search.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Union

from . import memory as mem_ops
from .eval import GlobalEnv, State, eval_expr, eval_operation
from .footprint import FULL, Footprint, fp_minus, fp_restrict
from .memory import load
from .syntax import (
    Chunk,
    Eload,
    Eop,
    Eval,
    Evar,
    Expr,
    Ocmp,
    Ocmpf,
    Ofloatconst,
    Ointconst,
    Program,
    Sannot,
    Sassign,
    Scall,
    Sif,
    Sloop,
    Sblock,
    Sreturn,
    Sseq,
    Sstore,
    Stmt,
    chunk_size,
    expr_vars,
    pure,
)
from .values import VUNDEF, Value, Vfloat, Vint, Vptr, Vundef, is_true

SPLIT_BOUND = 24


# ------------------------------------------------------------- check results

@dataclass(frozen=True)
class CheckResult:
    status: str  # "holds" | "fails" | "unknown"
    reason: str = ""

    @property
    def holds(self) -> bool:
        return self.status == "holds"

    @property
    def fails(self) -> bool:
        return self.status == "fails"

    @property
    def unknown(self) -> bool:
        return self.status == "unknown"

    def __repr__(self) -> str:
        return self.status if not self.reason else f"{self.status}({self.reason})"


HOLDS = CheckResult("holds")


def fails(reason: str) -> CheckResult:
    return CheckResult("fails", reason)


def unknown(reason: str) -> CheckResult:
    return CheckResult("unknown", reason)


def kand(a: CheckResult, b: CheckResult) -> CheckResult:
    if a.fails:
        return a
    if b.fails:
        return b
    if a.holds and b.holds:
        return HOLDS
    return a if a.unknown else b


def kor(a: CheckResult, b: CheckResult) -> CheckResult:
    if a.holds or b.holds:
        return HOLDS
    if a.fails and b.fails:
        return fails(f"both disjuncts fail: {a.reason}; {b.reason}")
    return a if a.unknown else b


def knot(a: CheckResult) -> CheckResult:
    if a.holds:
        return fails("negated assertion holds")
    if a.fails:
        return HOLDS
    return a


# ---------------------------------------------------------------- assertions

@dataclass(frozen=True)
class LogicVar:
    name: str


ValueTerm = Union[Value, LogicVar]


class Assertion:
    __slots__ = ()


def _require_pure(e: Expr, where: str):
    if not pure(e):
        raise ValueError(f"impure expression (contains a load) in {where}")


@dataclass(frozen=True)
class Aemp(Assertion):
    pass


@dataclass(frozen=True)
class Astar(Assertion):
    left: Assertion
    right: Assertion


@dataclass(frozen=True)
class Aand(Assertion):
    left: Assertion
    right: Assertion


@dataclass(frozen=True)
class Aor(Assertion):
    left: Assertion
    right: Assertion


@dataclass(frozen=True)
class Aimp(Assertion):
    left: Assertion
    right: Assertion


@dataclass(frozen=True)
class Anot(Assertion):
    body: Assertion


@dataclass(frozen=True)
class Aexists(Assertion):
    var: str
    body: Assertion


@dataclass(frozen=True)
class Aprop(Assertion):
    """Pure formula over logic variables and literals; ignores the state."""

    e: Expr

    def __post_init__(self):
        _require_pure(self.e, "Aprop")


@dataclass(frozen=True)
class Aeval(Assertion):
    """e ==> v: emp, e is pure, and e evaluates to the term's value."""

    e: Expr
    term: ValueTerm

    def __post_init__(self):
        _require_pure(self.e, "Aeval")


@dataclass(frozen=True)
class Aexpr(Assertion):
    """[e]: emp and e evaluates to a true value."""

    e: Expr

    def __post_init__(self):
        _require_pure(self.e, "Aexpr")


@dataclass(frozen=True)
class Adefined(Assertion):
    """defined(e): [e ==int e] or [e ==float e]."""

    e: Expr

    def __post_init__(self):
        _require_pure(self.e, "Adefined")


@dataclass(frozen=True)
class Amapsto(Assertion):
    """e1 |->[ch] e2: footprint is exactly the full-share chunk range at
    e1's address and memory there decodes to e2's (defined) value."""

    addr: Expr
    chunk: Chunk
    e: Expr

    def __post_init__(self):
        _require_pure(self.addr, "Amapsto address")
        _require_pure(self.e, "Amapsto value")


ATRUE = Aprop(Eval(Vint(1)))
AFALSE = Aprop(Eval(Vint(0)))


# ------------------------------------------------------------ free variables

def assertion_free_vars(a: Assertion) -> set[str]:
    """Identifiers occurring in embedded expressions, minus existential
    binders: a syntactic over-approximation of the semantic notion."""

    def go(a: Assertion, bound: frozenset[str]) -> set[str]:
        if isinstance(a, (Aemp,)):
            return set()
        if isinstance(a, (Astar, Aand, Aor, Aimp)):
            return go(a.left, bound) | go(a.right, bound)
        if isinstance(a, Anot):
            return go(a.body, bound)
        if isinstance(a, Aexists):
            return go(a.body, bound | {a.var})
        if isinstance(a, (Aprop, Aexpr, Adefined)):
            return expr_vars(a.e) - bound
        if isinstance(a, Aeval):
            return expr_vars(a.e) - bound
        if isinstance(a, Amapsto):
            return (expr_vars(a.addr) | expr_vars(a.e)) - bound
        raise TypeError(f"not an assertion: {a!r}")

    return go(a, frozenset())


def assertion_exprs(a: Assertion) -> Iterable[Expr]:
    """Every embedded expression, for literal harvesting and linting."""
    if isinstance(a, (Astar, Aand, Aor, Aimp)):
        yield from assertion_exprs(a.left)
        yield from assertion_exprs(a.right)
    elif isinstance(a, Anot):
        yield from assertion_exprs(a.body)
    elif isinstance(a, Aexists):
        yield from assertion_exprs(a.body)
    elif isinstance(a, (Aprop, Aexpr, Adefined)):
        yield a.e
    elif isinstance(a, Aeval):
        yield a.e
    elif isinstance(a, Amapsto):
        yield a.addr
        yield a.e


# -------------------------------------------------------- witness candidates

def _expr_literals(e: Expr) -> Iterable[Value]:
    if isinstance(e, Eval):
        yield e.v
    elif isinstance(e, Eop):
        if isinstance(e.op, Ointconst):
            yield Vint(e.op.value)
        elif isinstance(e.op, Ofloatconst):
            yield Vfloat(e.op.value)
        for arg in e.args:
            yield from _expr_literals(arg)
    elif isinstance(e, Eload):
        yield from _expr_literals(e.addr)


def _stmt_literals(s: Stmt) -> Iterable[Value]:
    if isinstance(s, Sassign):
        yield from _expr_literals(s.e)
    elif isinstance(s, Sstore):
        yield from _expr_literals(s.addr)
        yield from _expr_literals(s.e)
    elif isinstance(s, Sseq):
        yield from _stmt_literals(s.s1)
        yield from _stmt_literals(s.s2)
    elif isinstance(s, Sif):
        yield from _expr_literals(s.cond)
        yield from _stmt_literals(s.then)
        yield from _stmt_literals(s.els)
    elif isinstance(s, (Sloop, Sblock)):
        yield from _stmt_literals(s.body)
    elif isinstance(s, Scall):
        yield from _expr_literals(s.target)
        for e in s.args:
            yield from _expr_literals(e)
    elif isinstance(s, Sreturn):
        for e in s.args:
            yield from _expr_literals(e)
    elif isinstance(s, Sannot):
        for e in assertion_exprs(s.assertion):
            yield from _expr_literals(e)
        yield from _stmt_literals(s.body)


def witness_candidates(psi: GlobalEnv, sigma: State, root: Optional[Assertion]) -> list[Value]:
    """Deterministic candidate pool for existential witnesses: environment
    values, values loadable at aligned word/double offsets inside the
    footprint, literals from the program and the assertion, and the
    defaults Vundef, 0, 1."""
    pool: list[Value] = []
    seen: set = set()

    def add(v: Optional[Value]):
        if v is None:
            return
        try:
            if v in seen:
                return
        except TypeError:
            return
        seen.add(v)
        pool.append(v)

    for name in sorted(sigma.rho):
        add(sigma.rho[name])
    for (b, off) in sorted(sigma.phi.perms):
        if off % 4 == 0:
            add(load(Chunk.I32, sigma.mem, Vptr(b, off)))
        if off % 8 == 0:
            add(load(Chunk.F64, sigma.mem, Vptr(b, off)))
    for f in psi.functions:
        for v in _stmt_literals(f.body):
            add(v)
    if root is not None:
        for e in assertion_exprs(root):
            for v in _expr_literals(e):
                add(v)
        for term in _root_terms(root):
            add(term)
    add(VUNDEF)
    add(Vint(0))
    add(Vint(1))
    return pool


def _root_terms(a: Assertion) -> Iterable[Value]:
    if isinstance(a, Aeval) and isinstance(a.term, Value):
        yield a.term
    elif isinstance(a, (Astar, Aand, Aor, Aimp)):
        yield from _root_terms(a.left)
        yield from _root_terms(a.right)
    elif isinstance(a, (Anot, Aexists)):
        yield from _root_terms(a.body)


# ----------------------------------------------------------------- semantics

def _overlay(sigma: State, env: dict) -> State:
    rho = dict(sigma.rho)
    rho.update(env)
    return sigma.with_rho(rho)


def _eval_pure(psi: GlobalEnv, sigma: State, env: dict, e: Expr) -> Optional[Value]:
    """Evaluate a pure embedded expression under the logic-variable overlay.

    Pure expressions never consult the footprint, so the state's phi is
    irrelevant here."""
    return eval_expr(psi, _overlay(sigma, env), e)


def _value_defined(psi: GlobalEnv, v: Value) -> bool:
    """Int-comparable or float-comparable with itself (Fig-3 definedness)."""
    r = eval_operation(psi, 0, Ocmp("eq"), [v, v])
    if r is not None and is_true(r):
        return True
    r = eval_operation(psi, 0, Ocmpf("eq"), [v, v])
    return r is not None and is_true(r)


def _resolve_term(term: ValueTerm, env: dict) -> Value:
    if isinstance(term, LogicVar):
        if term.name not in env:
            raise LookupError(f"unbound logic variable {term.name!r}")
        return env[term.name]
    return term


def _mapsto_range(psi: GlobalEnv, sigma: State, env: dict, a: Amapsto) -> Optional[list]:
    v1 = _eval_pure(psi, sigma, env, a.addr)
    if not isinstance(v1, Vptr):
        return None
    return [(v1.block, v1.offset + k) for k in range(chunk_size(a.chunk))]


# footprint disciplines: where an assertion can possibly hold
_EMP = ("emp", None)
_ANY = ("any", None)
_UP = ("up", None)
_UNSAT = ("unsat", None)
_OPAQUE = ("opaque", None)


def _exact(addrs) -> tuple:
    fs = frozenset(addrs)
    return _EMP if not fs else ("exact", fs)


def _star_disc(d1: tuple, d2: tuple) -> tuple:
    k1, k2 = d1[0], d2[0]
    if "unsat" in (k1, k2):
        return _UNSAT
    if "opaque" in (k1, k2):
        return _OPAQUE
    if k1 == "emp":
        return d2
    if k2 == "emp":
        return d1
    if k1 == "exact" and k2 == "exact":
        if d1[1] & d2[1]:
            return _UNSAT
        return _exact(d1[1] | d2[1])
    if k1 == "any" and k2 == "any":
        return _ANY
    # remaining combinations of exact/any/up are upward closed
    return _UP


def _and_disc(d1: tuple, d2: tuple) -> tuple:
    k1, k2 = d1[0], d2[0]
    if "unsat" in (k1, k2):
        return _UNSAT
    if "opaque" in (k1, k2):
        return _OPAQUE
    if k1 == "any":
        return d2
    if k2 == "any":
        return d1
    if k1 == "emp":
        return _EMP if k2 in ("emp", "up") else _UNSAT
    if k2 == "emp":
        return _EMP if k1 in ("emp", "up") else _UNSAT
    if k1 == "exact" and k2 == "exact":
        return d1 if d1[1] == d2[1] else _UNSAT
    if k1 == "exact" and k2 == "up":
        return d1
    if k1 == "up" and k2 == "exact":
        return d2
    if k1 == "up" and k2 == "up":
        return _UP
    return _OPAQUE


def _disc(psi: GlobalEnv, sigma: State, env: dict, a: Assertion,
          binders: frozenset) -> tuple:
    if isinstance(a, (Aemp, Aeval, Aexpr, Adefined)):
        return _EMP
    if isinstance(a, Aprop):
        return _ANY
    if isinstance(a, Amapsto):
        if expr_vars(a.addr) & binders:
            return _OPAQUE
        rng = _mapsto_range(psi, sigma, env, a)
        return _UNSAT if rng is None else _exact(rng)
    if isinstance(a, Astar):
        return _star_disc(_disc(psi, sigma, env, a.left, binders),
                          _disc(psi, sigma, env, a.right, binders))
    if isinstance(a, Aand):
        return _and_disc(_disc(psi, sigma, env, a.left, binders),
                         _disc(psi, sigma, env, a.right, binders))
    if isinstance(a, Aor):
        d1 = _disc(psi, sigma, env, a.left, binders)
        d2 = _disc(psi, sigma, env, a.right, binders)
        if d1 == d2:
            return d1
        if d1[0] in ("any", "up") and d2[0] in ("any", "up"):
            return _UP
        if d1[0] == "unsat":
            return d2
        if d2[0] == "unsat":
            return d1
        return _OPAQUE
    if isinstance(a, Anot):
        d = _disc(psi, sigma, env, a.body, binders)
        return _ANY if d[0] == "any" else _OPAQUE
    if isinstance(a, Aimp):
        d1 = _disc(psi, sigma, env, a.left, binders)
        d2 = _disc(psi, sigma, env, a.right, binders)
        return _ANY if d1[0] == "any" and d2[0] == "any" else _OPAQUE
    if isinstance(a, Aexists):
        return _disc(psi, sigma, env, a.body, binders | {a.var})
    raise TypeError(f"not an assertion: {a!r}")


def _sat_star(psi: GlobalEnv, sigma: State, a: Astar, env: dict, pool) -> CheckResult:
    P, Q = a.left, a.right
    dp = _disc(psi, sigma, env, P, frozenset())
    dq = _disc(psi, sigma, env, Q, frozenset())
    if dp[0] == "unsat" or dq[0] == "unsat":
        return fails("separating conjunct cannot hold on any footprint")
    phi = sigma.phi

    def with_phi(p: Footprint) -> State:
        return sigma.with_phi(p)

    if dp[0] == "emp":
        return kand(_sat(psi, with_phi(Footprint({})), P, env, pool),
                    _sat(psi, sigma, Q, env, pool))
    if dq[0] == "emp":
        return kand(_sat(psi, sigma, P, env, pool),
                    _sat(psi, with_phi(Footprint({})), Q, env, pool))
    if dp[0] == "exact":
        phi1 = fp_restrict(phi, dp[1])
        phi2 = fp_minus(phi, dp[1])
        return kand(_sat(psi, with_phi(phi1), P, env, pool),
                    _sat(psi, with_phi(phi2), Q, env, pool))
    if dq[0] == "exact":
        phi1 = fp_minus(phi, dq[1])
        phi2 = fp_restrict(phi, dq[1])
        return kand(_sat(psi, with_phi(phi1), P, env, pool),
                    _sat(psi, with_phi(phi2), Q, env, pool))
    if dp[0] == "any" and dq[0] in ("any", "up"):
        return kand(_sat(psi, with_phi(Footprint({})), P, env, pool),
                    _sat(psi, sigma, Q, env, pool))
    if dq[0] == "any" and dp[0] == "up":
        return kand(_sat(psi, sigma, P, env, pool),
                    _sat(psi, with_phi(Footprint({})), Q, env, pool))

    addrs = sorted(phi.perms)
    n = len(addrs)
    if n > SPLIT_BOUND:
        return unknown(f"split bound exceeded ({n} addresses > {SPLIT_BOUND})")
    saw_unknown = False
    for mask in range(1 << n):
        left = [addrs[i] for i in range(n) if mask >> i & 1]
        phi1 = fp_restrict(phi, left)
        phi2 = fp_minus(phi, left)
        r1 = _sat(psi, with_phi(phi1), P, env, pool)
        if r1.fails:
            continue
        r = kand(r1, _sat(psi, with_phi(phi2), Q, env, pool))
        if r.holds:
            return HOLDS
        if r.unknown:
            saw_unknown = True
    if saw_unknown:
        return unknown("split search inconclusive")
    if any(q != FULL for q in phi.perms.values()):
        return unknown("fractional shares present; fractional subdivision not attempted")
    return fails("no split of the footprint satisfies both conjuncts")


def _sat(psi: GlobalEnv, sigma: State, a: Assertion, env: dict, pool) -> CheckResult:
    if isinstance(a, Aemp):
        return HOLDS if not sigma.phi.perms else fails("footprint not empty")
    if isinstance(a, Aprop):
        v = eval_expr(psi, State(sigma.sp, dict(env), Footprint({}), sigma.mem), a.e)
        if v is None:
            return fails("proposition did not evaluate")
        return HOLDS if is_true(v) else fails("proposition is false")
    if isinstance(a, Aeval):
        if sigma.phi.perms:
            return fails("evaluation assertion requires emp")
        want = _resolve_term(a.term, env)
        v = _eval_pure(psi, sigma, env, a.e)
        if v is None:
            return fails("expression stuck")
        return HOLDS if v == want else fails(f"evaluates to {v!r}, not {want!r}")
    if isinstance(a, Aexpr):
        if sigma.phi.perms:
            return fails("evaluation assertion requires emp")
        v = _eval_pure(psi, sigma, env, a.e)
        if v is None:
            return fails("expression stuck")
        return HOLDS if is_true(v) else fails(f"not a true value: {v!r}")
    if isinstance(a, Adefined):
        if sigma.phi.perms:
            return fails("evaluation assertion requires emp")
        v = _eval_pure(psi, sigma, env, a.e)
        if v is None:
            return fails("expression stuck")
        return HOLDS if _value_defined(psi, v) else fails(f"undefined value {v!r}")
    if isinstance(a, Amapsto):
        v1 = _eval_pure(psi, sigma, env, a.addr)
        if v1 is None:
            return fails("address expression stuck")
        if not isinstance(v1, Vptr):
            return fails(f"address is not a pointer: {v1!r}")
        v2 = _eval_pure(psi, sigma, env, a.e)
        if v2 is None:
            return fails("value expression stuck")
        if not _value_defined(psi, v2):
            return fails(f"stored value must be defined, got {v2!r}")
        rng = [(v1.block, v1.offset + k) for k in range(chunk_size(a.chunk))]
        if set(sigma.phi.perms) != set(rng):
            return fails("footprint is not exactly the chunk range")
        if any(sigma.phi.perms[ad] != FULL for ad in rng):
            return fails("chunk range not fully owned")
        got = load(a.chunk, sigma.mem, v1)
        if got is None:
            return fails("address not loadable")
        return HOLDS if got == v2 else fails(f"memory holds {got!r}, not {v2!r}")
    if isinstance(a, Aand):
        return kand(_sat(psi, sigma, a.left, env, pool),
                    _sat(psi, sigma, a.right, env, pool))
    if isinstance(a, Aor):
        return kor(_sat(psi, sigma, a.left, env, pool),
                   _sat(psi, sigma, a.right, env, pool))
    if isinstance(a, Aimp):
        return kor(knot(_sat(psi, sigma, a.left, env, pool)),
                   _sat(psi, sigma, a.right, env, pool))
    if isinstance(a, Anot):
        return knot(_sat(psi, sigma, a.body, env, pool))
    if isinstance(a, Astar):
        return _sat_star(psi, sigma, a, env, pool)
    if isinstance(a, Aexists):
        for w in pool:
            env2 = dict(env)
            env2[a.var] = w
            r = _sat(psi, sigma, a.body, env2, pool)
            if r.holds:
                return HOLDS
        return unknown(f"no witness found for exists {a.var}")
    raise TypeError(f"not an assertion: {a!r}")


def satisfies(psi: GlobalEnv, sigma: State, a: Assertion,
              env: Optional[dict] = None) -> CheckResult:
    """Three-valued satisfaction of a on the concrete state sigma.

    env binds the free logic variables of a (auxiliaries, ret0..retN).
    """
    env = dict(env or {})
    pool = witness_candidates(psi, sigma, a)
    return _sat(psi, sigma, a, env, pool)

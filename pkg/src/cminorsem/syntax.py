"""Abstract syntax: expressions, operators, statements, functions, programs.

Sequences are tuples so every node is frozen and structurally comparable.
Statement sequences are right-nested Sseq chains (the parser's canonical
form); an empty body is Sskip.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, TYPE_CHECKING

from .values import Chunk, Value, norm32

if TYPE_CHECKING:
    from .assertions import Assertion


# ---------------------------------------------------------------- operators

class Op:
    __slots__ = ()


@dataclass(frozen=True)
class Ointconst(Op):
    value: int

    def __post_init__(self):
        object.__setattr__(self, "value", norm32(self.value))


@dataclass(frozen=True)
class Ofloatconst(Op):
    value: float


@dataclass(frozen=True)
class Oaddrsymbol(Op):
    """Address of a global name (data block or function block)."""

    name: str


@dataclass(frozen=True)
class Oaddrstack(Op):
    """Address inside the current function's stack block."""

    offset: int

    def __post_init__(self):
        object.__setattr__(self, "offset", norm32(self.offset))


@dataclass(frozen=True)
class Oprim(Op):
    """A fixed-arity primitive named by its semantics (add, divu, cast8s...)."""

    name: str


@dataclass(frozen=True)
class Ocmp(Op):
    """Signed integer / pointer comparison; kind in eq ne lt le gt ge."""

    kind: str


@dataclass(frozen=True)
class Ocmpu(Op):
    """Unsigned integer comparison."""

    kind: str


@dataclass(frozen=True)
class Ocmpf(Op):
    """Float comparison."""

    kind: str


CMP_KINDS = ("eq", "ne", "lt", "le", "gt", "ge")

# Binary integer primitives with infix surface syntax.
INFIX_PRIMS = {
    "add": "+", "sub": "-", "mul": "*", "divs": "/", "mods": "%",
    "and": "&", "or": "|", "xor": "^", "shl": "<<", "shrs": ">>",
}

# Function-call surface syntax; arity recorded for parsing and checking.
NAMED_PRIMS = {
    "divu": 2, "modu": 2, "shru": 2,
    "addf": 2, "subf": 2, "mulf": 2, "divf": 2,
    "neg": 1, "notint": 1, "negf": 1,
    "intoffloat": 1, "floatofint": 1, "floatofintu": 1,
    "cast8s": 1, "cast8u": 1, "cast16s": 1, "cast16u": 1,
}

PRIM_ARITY = {name: 2 for name in INFIX_PRIMS}
PRIM_ARITY.update(NAMED_PRIMS)


def op_arity(op: Op) -> int:
    if isinstance(op, (Ointconst, Ofloatconst, Oaddrsymbol, Oaddrstack)):
        return 0
    if isinstance(op, (Ocmp, Ocmpu, Ocmpf)):
        return 2
    if isinstance(op, Oprim):
        return PRIM_ARITY[op.name]
    raise TypeError(f"not an operator: {op!r}")


# -------------------------------------------------------------- expressions

class Expr:
    __slots__ = ()


@dataclass(frozen=True)
class Eval(Expr):
    v: Value


@dataclass(frozen=True)
class Evar(Expr):
    name: str


@dataclass(frozen=True)
class Eop(Expr):
    op: Op
    args: tuple[Expr, ...] = ()


@dataclass(frozen=True)
class Eload(Expr):
    chunk: Chunk
    addr: Expr


def pure(e: Expr) -> bool:
    """No Eload anywhere: the expression cannot read the heap."""
    if isinstance(e, Eload):
        return False
    if isinstance(e, Eop):
        return all(pure(a) for a in e.args)
    return True


def expr_vars(e: Expr) -> set[str]:
    """All Evar names occurring in e."""
    if isinstance(e, Evar):
        return {e.name}
    if isinstance(e, Eop):
        out: set[str] = set()
        for a in e.args:
            out |= expr_vars(a)
        return out
    if isinstance(e, Eload):
        return expr_vars(e.addr)
    return set()


# --------------------------------------------------------------- statements

class Stmt:
    __slots__ = ()


@dataclass(frozen=True)
class Sskip(Stmt):
    pass


@dataclass(frozen=True)
class Sassign(Stmt):
    name: str
    e: Expr


@dataclass(frozen=True)
class Sstore(Stmt):
    chunk: Chunk
    addr: Expr
    e: Expr


@dataclass(frozen=True)
class Sseq(Stmt):
    s1: Stmt
    s2: Stmt


@dataclass(frozen=True)
class Sif(Stmt):
    cond: Expr
    then: Stmt
    els: Stmt


@dataclass(frozen=True)
class Sloop(Stmt):
    body: Stmt


@dataclass(frozen=True)
class Sblock(Stmt):
    body: Stmt


@dataclass(frozen=True)
class Sexit(Stmt):
    n: int


@dataclass(frozen=True)
class Sig:
    """Structural call signature: argument and result counts."""

    args: int
    results: int


@dataclass(frozen=True)
class Scall(Stmt):
    results: tuple[str, ...]
    sig: Sig
    target: Expr
    args: tuple[Expr, ...]


@dataclass(frozen=True)
class Sreturn(Stmt):
    args: tuple[Expr, ...]


@dataclass(frozen=True)
class Sannot(Stmt):
    """Checker-only wrapper, transparent to execution.

    kind is one of "assert" (body Sskip), "invariant" (body Sloop) or
    "exits" (body Sblock). Pure execution modes run stripped programs.
    """

    kind: str
    assertion: "Assertion"
    body: Stmt


def strip_annotations(s: Stmt) -> Stmt:
    """Erase every Sannot wrapper (surface annotations) from a statement."""
    if isinstance(s, Sannot):
        return strip_annotations(s.body)
    if isinstance(s, Sseq):
        return Sseq(strip_annotations(s.s1), strip_annotations(s.s2))
    if isinstance(s, Sif):
        return Sif(s.cond, strip_annotations(s.then), strip_annotations(s.els))
    if isinstance(s, Sloop):
        return Sloop(strip_annotations(s.body))
    if isinstance(s, Sblock):
        return Sblock(strip_annotations(s.body))
    return s


def seq_of(stmts: list[Stmt]) -> Stmt:
    """Right-nested Sseq chain; Sskip when empty."""
    if not stmts:
        return Sskip()
    out = stmts[-1]
    for s in reversed(stmts[:-1]):
        out = Sseq(s, out)
    return out


def seq_list(s: Stmt) -> list[Stmt]:
    """Flatten the right spine of an Sseq chain."""
    out = []
    while isinstance(s, Sseq):
        out.append(s.s1)
        s = s.s2
    out.append(s)
    return out


# ---------------------------------------------------- functions and programs

@dataclass(frozen=True)
class FunDef:
    name: str
    params: tuple[str, ...]
    locals: tuple[str, ...]
    stackspace: int
    results: int
    body: Stmt
    requires: Optional["Assertion"] = None
    ensures: Optional["Assertion"] = None

    def __post_init__(self):
        names = self.params + self.locals
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate parameter/local names in {self.name}")


@dataclass(frozen=True)
class Program:
    """A program is the paper's global environment: names to blocks, blocks
    to function definitions, plus declared data-block sizes.

    Data globals get block ids 0..G-1 in declaration order, then functions
    G..G+F-1; initial-memory construction allocates in the same order.
    """

    globals: tuple[tuple[str, int], ...] = ()  # (name, byte size)
    functions: tuple[FunDef, ...] = ()
    entry: Optional[str] = None
    symbols: dict = field(default_factory=dict, compare=False, repr=False)
    fun_by_block: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        names = [n for n, _ in self.globals] + [f.name for f in self.functions]
        if len(set(names)) != len(names):
            raise ValueError("duplicate global/function names")
        symbols = {}
        fun_by_block = {}
        bid = 0
        for name, _size in self.globals:
            symbols[name] = bid
            bid += 1
        for f in self.functions:
            symbols[f.name] = bid
            fun_by_block[bid] = f
            bid += 1
        object.__setattr__(self, "symbols", symbols)
        object.__setattr__(self, "fun_by_block", fun_by_block)
        if self.entry is not None and self.entry not in symbols:
            raise ValueError(f"entry {self.entry!r} does not resolve")

    def data_blocks(self) -> list[tuple[int, int]]:
        """(block id, size) of every data global, in id order."""
        return [(self.symbols[name], size) for name, size in self.globals]

    def function(self, name: str) -> Optional[FunDef]:
        for f in self.functions:
            if f.name == name:
                return f
        return None

    def stripped(self) -> "Program":
        """The same program with all annotations erased."""
        funs = tuple(
            FunDef(f.name, f.params, f.locals, f.stackspace, f.results,
                   strip_annotations(f.body), None, None)
            for f in self.functions
        )
        return Program(self.globals, funs, self.entry)

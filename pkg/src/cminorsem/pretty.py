"""Pretty-printer for programs and assertions.

parse(pretty_print(p)) is structurally p for every parser-produced program
(statement sequences in canonical right-nested form). Hand-built ASTs using
raw Eval literal nodes print as plain literals, which reparse as constants.
"""

from __future__ import annotations

from .assertions import (
    Adefined,
    Aemp,
    Aeval,
    Aexists,
    Aexpr,
    Aimp,
    Aand,
    Amapsto,
    Anot,
    Aor,
    Aprop,
    Assertion,
    Astar,
    ATRUE,
    AFALSE,
    LogicVar,
)
from .syntax import (
    Eload,
    Eop,
    Eval,
    Evar,
    Expr,
    FunDef,
    INFIX_PRIMS,
    Ocmp,
    Ocmpf,
    Ocmpu,
    Ofloatconst,
    Ointconst,
    Oaddrstack,
    Oaddrsymbol,
    Oprim,
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
from .values import Value, Vfloat, Vint, Vptr, Vundef

_CMP_TOK = {"eq": "==", "ne": "!=", "lt": "<", "le": "<=", "gt": ">", "ge": ">="}

# precedence levels, loosest first
_LEVELS = {
    "|": 1, "^": 2, "&": 3,
    "==": 4, "!=": 4,
    "<": 5, "<=": 5, ">": 5, ">=": 5,
    "<<": 6, ">>": 6,
    "+": 7, "-": 7,
    "*": 8, "/": 8, "%": 8,
}
_ATOM = 9


def show_value(v: Value) -> str:
    if isinstance(v, Vint):
        return str(v.i)
    if isinstance(v, Vfloat):
        return repr(v.f)
    if isinstance(v, Vptr):
        return f"ptr({v.block},{v.offset})"
    if isinstance(v, Vundef):
        return "undef"
    raise TypeError(f"not a value: {v!r}")


def _show_expr(e: Expr, level: int) -> str:
    if isinstance(e, Eval):
        return show_value(e.v)
    if isinstance(e, Evar):
        return e.name
    if isinstance(e, Eload):
        return f"{e.chunk.value}[{_show_expr(e.addr, 0)}]"
    if isinstance(e, Eop):
        op = e.op
        if isinstance(op, Ointconst):
            return str(op.value)
        if isinstance(op, Ofloatconst):
            return repr(op.value)
        if isinstance(op, Oaddrsymbol):
            return f"&{op.name}"
        if isinstance(op, Oaddrstack):
            return f"stack({op.offset})"
        if isinstance(op, Ocmp):
            tok = _CMP_TOK[op.kind]
            return _infix(tok, e.args, level)
        if isinstance(op, Ocmpu):
            return f"{op.kind}u({_show_expr(e.args[0], 0)}, {_show_expr(e.args[1], 0)})"
        if isinstance(op, Ocmpf):
            return f"{op.kind}f({_show_expr(e.args[0], 0)}, {_show_expr(e.args[1], 0)})"
        if isinstance(op, Oprim):
            if op.name in INFIX_PRIMS:
                return _infix(INFIX_PRIMS[op.name], e.args, level)
            args = ", ".join(_show_expr(a, 0) for a in e.args)
            return f"{op.name}({args})"
    raise TypeError(f"not an expression: {e!r}")


def _infix(tok: str, args, level: int) -> str:
    mine = _LEVELS[tok]
    left = _show_expr(args[0], mine)
    right = _show_expr(args[1], mine + 1)  # left associative
    txt = f"{left} {tok} {right}"
    return f"({txt})" if mine < level else txt


def show_expr(e: Expr) -> str:
    return _show_expr(e, 0)


# ------------------------------------------------------------------ assertions

def _show_term(t) -> str:
    if isinstance(t, LogicVar):
        return t.name
    return show_value(t)


# assertion precedence: exists 0 < => 1 < || 2 < && 3 < * 4 < ! 5 < atom
def _show_assertion(a: Assertion, level: int) -> str:
    if a == ATRUE:
        return "true"
    if a == AFALSE:
        return "false"
    if isinstance(a, Aemp):
        return "emp"
    if isinstance(a, Aprop):
        return f"prop({show_expr(a.e)})"
    if isinstance(a, Aexpr):
        return f"[{show_expr(a.e)}]"
    if isinstance(a, Adefined):
        return f"defined({show_expr(a.e)})"
    if isinstance(a, Aeval):
        return f"{_show_expr(a.e, _ATOM)} ==> {_show_term(a.term)}"
    if isinstance(a, Amapsto):
        return f"{_show_expr(a.addr, _ATOM)} |->[{a.chunk.value}] {_show_expr(a.e, _ATOM)}"
    if isinstance(a, Aexists):
        body = _show_assertion(a.body, 0)
        txt = f"exists {a.var}. {body}"
        return f"({txt})" if level > 0 else txt
    if isinstance(a, Aimp):
        txt = f"{_show_assertion(a.left, 2)} => {_show_assertion(a.right, 1)}"
        return f"({txt})" if level > 1 else txt
    if isinstance(a, Aor):
        txt = f"{_show_assertion(a.left, 2)} || {_show_assertion(a.right, 3)}"
        return f"({txt})" if level > 2 else txt
    if isinstance(a, Aand):
        txt = f"{_show_assertion(a.left, 3)} && {_show_assertion(a.right, 4)}"
        return f"({txt})" if level > 3 else txt
    if isinstance(a, Astar):
        txt = f"{_show_assertion(a.left, 4)} * {_show_assertion(a.right, 5)}"
        return f"({txt})" if level > 4 else txt
    if isinstance(a, Anot):
        return f"!{_show_assertion(a.body, 5)}"
    raise TypeError(f"not an assertion: {a!r}")


def show_assertion(a: Assertion) -> str:
    return _show_assertion(a, 0)


# ------------------------------------------------------------------ statements

def _stmt_lines(s: Stmt, indent: int) -> list[str]:
    pad = "  " * indent
    if isinstance(s, Sseq):
        out = []
        for part in seq_list(s):
            out.extend(_stmt_lines(part, indent))
        return out
    if isinstance(s, Sskip):
        return [f"{pad}skip;"]
    if isinstance(s, Sassign):
        return [f"{pad}{s.name} = {show_expr(s.e)};"]
    if isinstance(s, Sstore):
        return [f"{pad}store {s.chunk.value} [{show_expr(s.addr)}] = {show_expr(s.e)};"]
    if isinstance(s, Sif):
        out = [f"{pad}if ({show_expr(s.cond)}) {{"]
        out.extend(_stmt_lines(s.then, indent + 1))
        out.append(f"{pad}}} else {{")
        out.extend(_stmt_lines(s.els, indent + 1))
        out.append(f"{pad}}}")
        return out
    if isinstance(s, Sloop):
        out = [f"{pad}loop {{"]
        out.extend(_stmt_lines(s.body, indent + 1))
        out.append(f"{pad}}}")
        return out
    if isinstance(s, Sblock):
        out = [f"{pad}block {{"]
        out.extend(_stmt_lines(s.body, indent + 1))
        out.append(f"{pad}}}")
        return out
    if isinstance(s, Sexit):
        return [f"{pad}exit {s.n};"]
    if isinstance(s, Scall):
        res = ", ".join(s.results)
        args = ", ".join(show_expr(a) for a in s.args)
        return [f"{pad}({res}) = call {show_expr(s.target)}({args});"]
    if isinstance(s, Sreturn):
        if not s.args:
            return [f"{pad}return;"]
        return [f"{pad}return {', '.join(show_expr(a) for a in s.args)};"]
    if isinstance(s, Sannot):
        if s.kind == "assert":
            return [f"{pad}assert {show_assertion(s.assertion)};"]
        if s.kind == "invariant" and isinstance(s.body, Sloop):
            out = [f"{pad}loop invariant {show_assertion(s.assertion)} {{"]
            out.extend(_stmt_lines(s.body.body, indent + 1))
            out.append(f"{pad}}}")
            return out
        if s.kind == "exits" and isinstance(s.body, Sblock):
            out = [f"{pad}block exits {show_assertion(s.assertion)} {{"]
            out.extend(_stmt_lines(s.body.body, indent + 1))
            out.append(f"{pad}}}")
            return out
        raise ValueError(f"malformed annotation wrapper: {s.kind} on {type(s.body).__name__}")
    raise TypeError(f"not a statement: {s!r}")


def _fundef_lines(f: FunDef) -> list[str]:
    head = f"fn {f.name}({', '.join(f.params)}) : {f.results}"
    out = [head]
    if f.requires is not None:
        out.append(f"  requires {show_assertion(f.requires)}")
    if f.ensures is not None:
        out.append(f"  ensures {show_assertion(f.ensures)}")
    out.append("{")
    if f.locals:
        out.append(f"  locals {', '.join(f.locals)};")
    if f.stackspace:
        out.append(f"  stack {f.stackspace};")
    if not isinstance(f.body, Sskip):
        out.extend(_stmt_lines(f.body, 1))
    out.append("}")
    return out


def pretty_print(p: Program) -> str:
    """Canonical text form of a program."""
    lines: list[str] = []
    for name, size in p.globals:
        lines.append(f"global {name}[{size}];")
    if p.globals and p.functions:
        lines.append("")
    for i, f in enumerate(p.functions):
        if i:
            lines.append("")
        lines.extend(_fundef_lines(f))
    return "\n".join(lines) + ("\n" if lines else "")

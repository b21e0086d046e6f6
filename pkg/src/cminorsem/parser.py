"""Recursive-descent parser for the textual program and assertion grammars.

Whitespace-insensitive, '#' line comments. Errors carry line and column.
See README for the full grammar; the printer in pretty.py emits exactly
this syntax.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

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
    CMP_KINDS,
    Eload,
    Eop,
    Eval,
    Evar,
    Expr,
    FunDef,
    INFIX_PRIMS,
    NAMED_PRIMS,
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
    Sig,
    Sloop,
    Sreturn,
    Sseq,
    Sskip,
    Sstore,
    Stmt,
    pure,
    seq_of,
)
from .values import Chunk, VUNDEF, Vfloat, Vint, norm32


class ParseError(Exception):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {msg}")
        self.msg = msg
        self.line = line
        self.col = col


KEYWORDS = {
    "global", "fn", "requires", "ensures", "locals", "stack", "loop",
    "invariant", "block", "exits", "exit", "if", "else", "skip", "call",
    "return", "assert", "store", "emp", "exists", "defined", "prop",
    "true", "false", "undef",
}
CHUNK_NAMES = {c.value for c in Chunk}

_CMP_BY_TOK = {"==": "eq", "!=": "ne", "<": "lt", "<=": "le", ">": "gt", ">=": "ge"}
_INFIX_BY_TOK = {tok: name for name, tok in INFIX_PRIMS.items()}

_PUNCTS = [
    "|->", "==>", "=>", "==", "!=", "<=", ">=", "<<", ">>", "&&", "||",
    "(", ")", "{", "}", "[", "]", ";", ",", "=", "+", "-", "*", "/", "%",
    "&", "|", "^", "<", ">", "!", "~", ".", ":",
]

_TOKEN_RE = re.compile(
    r"(?P<ws>[ \t\r\n]+)"
    r"|(?P<comment>#[^\n]*)"
    r"|(?P<float>(\d+\.\d*([eE][+-]?\d+)?)|(\d+[eE][+-]?\d+))"
    r"|(?P<int>0[xX][0-9a-fA-F]+|\d+)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<punct>" + "|".join(re.escape(p) for p in sorted(_PUNCTS, key=len, reverse=True)) + r")"
)


@dataclass(frozen=True)
class Token:
    kind: str  # "int" | "float" | "ident" | "punct" | "eof"
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos, line, col = 0, 1, 1
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unsupported character {text[pos]!r}", line, col)
        kind = m.lastgroup
        tok = m.group()
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, tok, line, col))
        newlines = tok.count("\n")
        if newlines:
            line += newlines
            col = len(tok) - tok.rfind("\n")
        else:
            col += len(tok)
        pos = m.end()
    tokens.append(Token("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.i = 0

    # --- token plumbing ---

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.i + ahead, len(self.tokens) - 1)]

    def next(self) -> Token:
        t = self.tokens[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def error(self, msg: str, tok: Optional[Token] = None):
        tok = tok or self.peek()
        raise ParseError(msg, tok.line, tok.col)

    def at_punct(self, p: str) -> bool:
        t = self.peek()
        return t.kind == "punct" and t.text == p

    def at_word(self, w: str) -> bool:
        t = self.peek()
        return t.kind == "ident" and t.text == w

    def eat_punct(self, p: str) -> Token:
        if not self.at_punct(p):
            self.error(f"expected {p!r}")
        return self.next()

    def eat_word(self, w: str) -> Token:
        if not self.at_word(w):
            self.error(f"expected keyword {w!r}")
        return self.next()

    def eat_ident(self) -> str:
        t = self.peek()
        if t.kind != "ident":
            self.error("expected an identifier")
        if t.text in KEYWORDS or t.text in CHUNK_NAMES:
            self.error(f"{t.text!r} is a reserved word")
        return self.next().text

    def eat_nat(self) -> int:
        t = self.peek()
        if t.kind != "int":
            self.error("expected a natural number literal")
        self.next()
        return int(t.text, 0)

    # --- expressions ---

    def parse_expr(self) -> Expr:
        return self._bor()

    def _binary(self, sub, toks):
        e = sub()
        while True:
            t = self.peek()
            if t.kind == "punct" and t.text in toks:
                self.next()
                rhs = sub()
                e = self._mk_binop(t.text, e, rhs)
            else:
                return e

    def _mk_binop(self, tok: str, a: Expr, b: Expr) -> Expr:
        if tok in _CMP_BY_TOK:
            return Eop(Ocmp(_CMP_BY_TOK[tok]), (a, b))
        return Eop(Oprim(_INFIX_BY_TOK[tok]), (a, b))

    def _bor(self):
        return self._binary(self._bxor, ("|",))

    def _bxor(self):
        return self._binary(self._band, ("^",))

    def _band(self):
        return self._binary(self._eq, ("&",))

    def _eq(self):
        return self._binary(self._rel, ("==", "!="))

    def _rel(self):
        return self._binary(self._shift, ("<", "<=", ">", ">="))

    def _shift(self):
        return self._binary(self._add, ("<<", ">>"))

    def _add(self):
        return self._binary(self._mul, ("+", "-"))

    def _mul(self):
        return self._binary(self._unary, ("*", "/", "%"))

    def _unary(self) -> Expr:
        if self.at_punct("-"):
            self.next()
            # fold a negated literal into the constant
            t = self.peek()
            if t.kind == "int":
                self.next()
                return Eop(Ointconst(norm32(-int(t.text, 0))))
            if t.kind == "float":
                self.next()
                return Eop(Ofloatconst(-float(t.text)))
            return Eop(Oprim("neg"), (self._unary(),))
        if self.at_punct("~"):
            self.next()
            return Eop(Oprim("notint"), (self._unary(),))
        return self._primary()

    def _primary(self) -> Expr:
        t = self.peek()
        if t.kind == "int":
            self.next()
            return Eop(Ointconst(int(t.text, 0)))
        if t.kind == "float":
            self.next()
            return Eop(Ofloatconst(float(t.text)))
        if self.at_punct("("):
            self.next()
            e = self.parse_expr()
            self.eat_punct(")")
            return e
        if self.at_punct("&"):
            self.next()
            name = self._any_name()
            return Eop(Oaddrsymbol(name))
        if t.kind == "ident":
            word = t.text
            if word in CHUNK_NAMES:
                self.next()
                self.eat_punct("[")
                addr = self.parse_expr()
                self.eat_punct("]")
                return Eload(Chunk(word), addr)
            if word == "stack":
                self.next()
                self.eat_punct("(")
                n = self.eat_nat()
                self.eat_punct(")")
                return Eop(Oaddrstack(n))
            if word == "undef":
                self.next()
                return Eval(VUNDEF)
            if self.peek(1).kind == "punct" and self.peek(1).text == "(":
                call = self._maybe_prim_call(word)
                if call is not None:
                    return call
            if word in KEYWORDS:
                self.error(f"{word!r} is a reserved word")
            self.next()
            return Evar(word)
        self.error("expected an expression")

    def _any_name(self) -> str:
        t = self.peek()
        if t.kind != "ident":
            self.error("expected a name")
        self.next()
        return t.text

    def _maybe_prim_call(self, word: str) -> Optional[Expr]:
        op = None
        if word in NAMED_PRIMS:
            op = Oprim(word)
            arity = NAMED_PRIMS[word]
        elif len(word) == 3 and word.endswith("u") and word[:2] in CMP_KINDS:
            op = Ocmpu(word[:2])
            arity = 2
        elif len(word) == 3 and word.endswith("f") and word[:2] in CMP_KINDS:
            op = Ocmpf(word[:2])
            arity = 2
        if op is None:
            return None
        self.next()
        self.eat_punct("(")
        args = [self.parse_expr()]
        while self.at_punct(","):
            self.next()
            args.append(self.parse_expr())
        self.eat_punct(")")
        if len(args) != arity:
            self.error(f"{word} takes {arity} argument(s), got {len(args)}")
        return Eop(op, tuple(args))

    # --- assertions ---

    def parse_assertion(self) -> Assertion:
        if self.at_word("exists"):
            self.next()
            var = self.eat_ident()
            self.eat_punct(".")
            return Aexists(var, self.parse_assertion())
        return self._a_imp()

    def _a_imp(self) -> Assertion:
        left = self._a_or()
        if self.at_punct("=>"):
            self.next()
            right = self._a_imp_or_exists()
            return Aimp(left, right)
        return left

    def _a_imp_or_exists(self) -> Assertion:
        if self.at_word("exists"):
            return self.parse_assertion()
        return self._a_imp()

    def _a_or(self) -> Assertion:
        e = self._a_and()
        while self.at_punct("||"):
            self.next()
            e = Aor(e, self._a_and())
        return e

    def _a_and(self) -> Assertion:
        e = self._a_star()
        while self.at_punct("&&"):
            self.next()
            e = Aand(e, self._a_star())
        return e

    def _a_star(self) -> Assertion:
        e = self._a_not()
        while self.at_punct("*"):
            self.next()
            e = Astar(e, self._a_not())
        return e

    def _a_not(self) -> Assertion:
        if self.at_punct("!"):
            self.next()
            return Anot(self._a_not())
        return self._a_atom()

    def _a_atom(self) -> Assertion:
        t = self.peek()
        if self.at_word("emp"):
            self.next()
            return Aemp()
        if self.at_word("true"):
            self.next()
            return ATRUE
        if self.at_word("false"):
            self.next()
            return AFALSE
        if self.at_word("defined"):
            self.next()
            self.eat_punct("(")
            e = self._assert_expr()
            self.eat_punct(")")
            return Adefined(e)
        if self.at_word("prop"):
            self.next()
            self.eat_punct("(")
            e = self._assert_expr()
            self.eat_punct(")")
            return Aprop(e)
        if self.at_punct("["):
            self.next()
            e = self._assert_expr()
            self.eat_punct("]")
            return Aexpr(e)
        if self.at_word("exists"):
            return self.parse_assertion()
        if self.at_punct("("):
            # Could be a parenthesized assertion or an expression heading a
            # maps-to / evaluates-to atom; try the expression reading first.
            mark = self.i
            try:
                e = self._assert_expr()
                if self.at_punct("|->") or self.at_punct("==>"):
                    return self._a_expr_tail(e)
            except ParseError:
                pass
            self.i = mark
            self.next()
            a = self.parse_assertion()
            self.eat_punct(")")
            return a
        # expression-headed atom: e |->[ch] e2  or  e ==> term
        e = self._assert_expr()
        return self._a_expr_tail(e)

    def _a_expr_tail(self, e: Expr) -> Assertion:
        if self.at_punct("|->"):
            self.next()
            self.eat_punct("[")
            t = self.peek()
            if t.kind != "ident" or t.text not in CHUNK_NAMES:
                self.error("expected a chunk name")
            self.next()
            self.eat_punct("]")
            e2 = self._assert_expr()
            return self._checked(lambda: Amapsto(e, Chunk(t.text), e2), t)
        if self.at_punct("==>"):
            self.next()
            term = self._value_term()
            return self._checked(lambda: Aeval(e, term), self.peek())
        self.error("expected '|->' or '==>' after assertion expression")

    def _checked(self, build, tok: Token) -> Assertion:
        try:
            return build()
        except ValueError as exc:
            raise ParseError(str(exc), tok.line, tok.col) from None

    def _assert_expr(self) -> Expr:
        tok = self.peek()
        e = self.parse_expr()
        if not pure(e):
            self.error("impure expression (load) inside an assertion", tok)
        return e

    def _value_term(self):
        t = self.peek()
        if t.kind == "int":
            self.next()
            return Vint(int(t.text, 0))
        if t.kind == "float":
            self.next()
            return Vfloat(float(t.text))
        if self.at_punct("-"):
            self.next()
            t = self.peek()
            if t.kind == "int":
                self.next()
                return Vint(norm32(-int(t.text, 0)))
            if t.kind == "float":
                self.next()
                return Vfloat(-float(t.text))
            self.error("expected a literal after '-'")
        if self.at_word("undef"):
            self.next()
            return VUNDEF
        if t.kind == "ident" and t.text not in KEYWORDS and t.text not in CHUNK_NAMES:
            self.next()
            return LogicVar(t.text)
        self.error("expected a value literal or logic variable")

    # --- statements ---

    def parse_stmt(self, ctx: "_FunCtx") -> Stmt:
        t = self.peek()
        if self.at_word("skip"):
            self.next()
            self.eat_punct(";")
            return Sskip()
        if self.at_word("exit"):
            self.next()
            n = self.eat_nat()
            self.eat_punct(";")
            return Sexit(n)
        if self.at_word("return"):
            self.next()
            args: list[Expr] = []
            if not self.at_punct(";"):
                args.append(self.parse_expr())
                while self.at_punct(","):
                    self.next()
                    args.append(self.parse_expr())
            self.eat_punct(";")
            if len(args) != ctx.results:
                self.error(f"return of {len(args)} value(s) in a function declaring {ctx.results}", t)
            return Sreturn(tuple(args))
        if self.at_word("store"):
            self.next()
            ch = self.peek()
            if ch.kind != "ident" or ch.text not in CHUNK_NAMES:
                self.error("expected a chunk name after 'store'")
            self.next()
            self.eat_punct("[")
            addr = self.parse_expr()
            self.eat_punct("]")
            self.eat_punct("=")
            e = self.parse_expr()
            self.eat_punct(";")
            return Sstore(Chunk(ch.text), addr, e)
        if self.at_word("if"):
            self.next()
            self.eat_punct("(")
            cond = self.parse_expr()
            self.eat_punct(")")
            then = self.parse_block(ctx)
            self.eat_word("else")
            els = self.parse_block(ctx)
            return Sif(cond, then, els)
        if self.at_word("loop"):
            self.next()
            inv = None
            if self.at_word("invariant"):
                self.next()
                inv = self.parse_assertion()
            body = self.parse_block(ctx)
            loop = Sloop(body)
            return loop if inv is None else Sannot("invariant", inv, loop)
        if self.at_word("block"):
            self.next()
            ex = None
            if self.at_word("exits"):
                self.next()
                ex = self.parse_assertion()
            body = self.parse_block(ctx)
            blk = Sblock(body)
            return blk if ex is None else Sannot("exits", ex, blk)
        if self.at_word("assert"):
            self.next()
            a = self.parse_assertion()
            self.eat_punct(";")
            return Sannot("assert", a, Sskip())
        if self.at_punct("("):
            self.next()
            results: list[str] = []
            if not self.at_punct(")"):
                results.append(self._var_ref(ctx))
                while self.at_punct(","):
                    self.next()
                    results.append(self._var_ref(ctx))
            self.eat_punct(")")
            self.eat_punct("=")
            self.eat_word("call")
            target = self.parse_expr()
            self.eat_punct("(")
            args: list[Expr] = []
            if not self.at_punct(")"):
                args.append(self.parse_expr())
                while self.at_punct(","):
                    self.next()
                    args.append(self.parse_expr())
            self.eat_punct(")")
            self.eat_punct(";")
            sig = Sig(len(args), len(results))
            return Scall(tuple(results), sig, target, tuple(args))
        if t.kind == "ident" and t.text not in KEYWORDS and t.text not in CHUNK_NAMES:
            name = self._var_ref(ctx)
            self.eat_punct("=")
            e = self.parse_expr()
            self.eat_punct(";")
            return Sassign(name, e)
        self.error("expected a statement")

    def _var_ref(self, ctx: "_FunCtx") -> str:
        t = self.peek()
        name = self.eat_ident()
        if name not in ctx.names:
            self.error(f"unknown identifier {name!r} (not a parameter or local)", t)
        return name

    def parse_block(self, ctx: "_FunCtx") -> Stmt:
        self.eat_punct("{")
        stmts = []
        while not self.at_punct("}"):
            stmts.append(self.parse_stmt(ctx))
        self.eat_punct("}")
        return seq_of(stmts)

    # --- top level ---

    def parse_program(self) -> Program:
        globals_: list[tuple[str, int]] = []
        fundefs: list[FunDef] = []
        declared: set[str] = set()
        while self.peek().kind != "eof":
            t = self.peek()
            if self.at_word("global"):
                self.next()
                name = self.eat_ident()
                self.eat_punct("[")
                size = self.eat_nat()
                self.eat_punct("]")
                self.eat_punct(";")
                if name in declared:
                    self.error(f"duplicate name {name!r}", t)
                declared.add(name)
                globals_.append((name, size))
            elif self.at_word("fn"):
                fundefs.append(self._parse_fundef(declared))
            else:
                self.error("expected 'global' or 'fn'")
        entry = "main" if any(f.name == "main" for f in fundefs) else None
        try:
            return Program(tuple(globals_), tuple(fundefs), entry)
        except ValueError as exc:
            raise ParseError(str(exc), 1, 1) from None

    def _parse_fundef(self, declared: set[str]) -> FunDef:
        t = self.eat_word("fn")
        name = self.eat_ident()
        if name in declared:
            self.error(f"duplicate name {name!r}", t)
        declared.add(name)
        self.eat_punct("(")
        params: list[str] = []
        if not self.at_punct(")"):
            params.append(self.eat_ident())
            while self.at_punct(","):
                self.next()
                params.append(self.eat_ident())
        self.eat_punct(")")
        self.eat_punct(":")
        results = self.eat_nat()
        requires = ensures = None
        if self.at_word("requires"):
            self.next()
            requires = self.parse_assertion()
        if self.at_word("ensures"):
            self.next()
            ensures = self.parse_assertion()
        self.eat_punct("{")
        locals_: list[str] = []
        if self.at_word("locals"):
            self.next()
            locals_.append(self.eat_ident())
            while self.at_punct(","):
                self.next()
                locals_.append(self.eat_ident())
            self.eat_punct(";")
        stackspace = 0
        if self.at_word("stack"):
            self.next()
            stackspace = self.eat_nat()
            self.eat_punct(";")
        ctx = _FunCtx(frozenset(params + locals_), results)
        stmts = []
        while not self.at_punct("}"):
            stmts.append(self.parse_stmt(ctx))
        self.eat_punct("}")
        body = seq_of(stmts)
        try:
            return FunDef(name, tuple(params), tuple(locals_), stackspace,
                          results, body, requires, ensures)
        except ValueError as exc:
            raise ParseError(str(exc), t.line, t.col) from None


@dataclass(frozen=True)
class _FunCtx:
    names: frozenset[str]
    results: int


def parse_program(text: str) -> Program:
    """Parse a whole program; raises ParseError with line:col on bad input."""
    p = _Parser(text)
    return p.parse_program()


def parse_assertion(text: str) -> Assertion:
    """Parse a standalone assertion (must consume all input)."""
    p = _Parser(text)
    a = p.parse_assertion()
    if p.peek().kind != "eof":
        p.error("trailing input after assertion")
    return a


def parse_expr(text: str) -> Expr:
    p = _Parser(text)
    e = p.parse_expr()
    if p.peek().kind != "eof":
        p.error("trailing input after expression")
    return e

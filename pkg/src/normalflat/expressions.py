"""Tiny closed-form expression language for field input.

Grammar: numbers, named variables, unary minus, binary ``+ - * / ^``
(with ``^`` right-associative and binding tighter than unary minus),
a fixed set of one-argument functions, and parentheses.  Evaluation is
IEEE-754 double (numpy-vectorized, complex allowed); domain errors and
unknown names carry the byte offset of the offending token.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["parse_expr", "eval_expr", "to_string", "compile_expr", "ParseError", "EvalError"]

FUNCTIONS = {
    "sin": np.sin, "cos": np.cos, "tan": np.tan,
    "sinh": np.sinh, "cosh": np.cosh, "tanh": np.tanh,
    "exp": np.exp, "log": np.log, "sqrt": np.sqrt,
    "atan": np.arctan, "abs": np.abs,
}

DEFAULT_VARIABLES = ("u", "v", "s")


class ParseError(ValueError):
    def __init__(self, msg, offset):
        super().__init__(f"{msg} (at offset {offset})")
        self.offset = offset


class EvalError(ValueError):
    def __init__(self, msg, offset):
        super().__init__(f"{msg} (at offset {offset})")
        self.offset = offset


@dataclass(frozen=True)
class Num:
    value: float
    pos: int = 0


@dataclass(frozen=True)
class Var:
    name: str
    pos: int = 0


@dataclass(frozen=True)
class Neg:
    arg: object
    pos: int = 0


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object
    pos: int = 0


@dataclass(frozen=True)
class Call:
    fn: str
    arg: object
    pos: int = 0


def _tokenize(src: str):
    tokens = []
    i, n = 0, len(src)
    while i < n:
        c = src[i]
        if c.isspace():
            i += 1
            continue
        if c.isdigit() or (c == "." and i + 1 < n and src[i + 1].isdigit()):
            j = i
            while j < n and (src[j].isdigit() or src[j] == "."):
                j += 1
            if j < n and src[j] in "eE":
                k = j + 1
                if k < n and src[k] in "+-":
                    k += 1
                if k < n and src[k].isdigit():
                    j = k
                    while j < n and src[j].isdigit():
                        j += 1
            try:
                val = float(src[i:j])
            except ValueError:
                raise ParseError(f"bad number {src[i:j]!r}", i) from None
            tokens.append(("num", val, i))
            i = j
        elif c.isalpha() or c == "_":
            j = i
            while j < n and (src[j].isalnum() or src[j] == "_"):
                j += 1
            tokens.append(("name", src[i:j], i))
            i = j
        elif c in "+-*/^(),":
            tokens.append((c, c, i))
            i += 1
        else:
            raise ParseError(f"unexpected character {c!r}", i)
    tokens.append(("end", None, n))
    return tokens


class _Parser:
    def __init__(self, src, variables):
        self.src = src
        self.tokens = _tokenize(src)
        self.k = 0
        self.variables = set(variables)

    def peek(self):
        return self.tokens[self.k]

    def next(self):
        tok = self.tokens[self.k]
        self.k += 1
        return tok

    def expect(self, kind):
        tok = self.next()
        if tok[0] != kind:
            raise ParseError(f"expected {kind!r}, found {tok[1]!r}", tok[2])
        return tok

    def parse(self):
        e = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ParseError(f"unexpected trailing input {tok[1]!r}", tok[2])
        return e

    def expr(self):
        e = self.term()
        while self.peek()[0] in ("+", "-"):
            op, _, pos = self.next()
            e = BinOp(op, e, self.term(), pos)
        return e

    def term(self):
        e = self.unary()
        while self.peek()[0] in ("*", "/"):
            op, _, pos = self.next()
            e = BinOp(op, e, self.unary(), pos)
        return e

    def unary(self):
        if self.peek()[0] == "-":
            _, _, pos = self.next()
            return Neg(self.unary(), pos)
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "^":
            _, _, pos = self.next()
            return BinOp("^", base, self.unary(), pos)
        return base

    def atom(self):
        kind, val, pos = self.next()
        if kind == "num":
            return Num(val, pos)
        if kind == "name":
            if self.peek()[0] == "(":
                if val not in FUNCTIONS:
                    raise ParseError(f"unknown function {val!r}", pos)
                self.next()
                arg = self.expr()
                self.expect(")")
                return Call(val, arg, pos)
            if val not in self.variables:
                raise ParseError(f"unknown identifier {val!r}", pos)
            return Var(val, pos)
        if kind == "(":
            e = self.expr()
            self.expect(")")
            return e
        raise ParseError(f"unexpected token {val!r}", pos)


def parse_expr(source: str, variables=DEFAULT_VARIABLES):
    """Parse a closed-form expression over the given variable names."""
    return _Parser(source, variables).parse()


def _check_finite(value, node, what):
    if not np.all(np.isfinite(value)):
        raise EvalError(f"{what} produced a non-finite value", node.pos)
    return value


def eval_expr(expr, **bindings):
    """Evaluate a parse tree with numpy semantics (scalars or arrays)."""
    if isinstance(expr, Num):
        return expr.value
    if isinstance(expr, Var):
        if expr.name not in bindings:
            raise EvalError(f"unbound variable {expr.name!r}", expr.pos)
        return bindings[expr.name]
    if isinstance(expr, Neg):
        return -eval_expr(expr.arg, **bindings)
    if isinstance(expr, BinOp):
        a = eval_expr(expr.left, **bindings)
        b = eval_expr(expr.right, **bindings)
        with np.errstate(all="ignore"):
            if expr.op == "+":
                return a + b
            if expr.op == "-":
                return a - b
            if expr.op == "*":
                return a * b
            if expr.op == "/":
                return _check_finite(np.divide(a, b), expr, "division")
            return _check_finite(np.power(a, b), expr, "power")
    if isinstance(expr, Call):
        arg = eval_expr(expr.arg, **bindings)
        if expr.fn == "log" and not np.iscomplexobj(arg) and np.any(np.asarray(arg) <= 0):
            raise EvalError("log of a non-positive value", expr.pos)
        if expr.fn == "sqrt" and not np.iscomplexobj(arg) and np.any(np.asarray(arg) < 0):
            raise EvalError("sqrt of a negative value", expr.pos)
        with np.errstate(all="ignore"):
            return _check_finite(FUNCTIONS[expr.fn](arg), expr, expr.fn)
    raise TypeError(f"not an expression node: {expr!r}")


def compile_expr(source: str, variables=DEFAULT_VARIABLES):
    """Parse once, return a plain callable over keyword bindings."""
    tree = parse_expr(source, variables)

    def fn(**bindings):
        return eval_expr(tree, **bindings)

    fn.tree = tree
    return fn


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


def to_string(expr) -> str:
    """Canonical printer; parse(to_string(parse(s))) is a fixed point."""

    def render(e, parent_prec):
        if isinstance(e, Num):
            return repr(e.value)
        if isinstance(e, Var):
            return e.name
        if isinstance(e, Neg):
            s = f"-{render(e.arg, _PREC['neg'])}"
            return f"({s})" if parent_prec > _PREC["neg"] else s
        if isinstance(e, Call):
            return f"{e.fn}({render(e.arg, 0)})"
        if isinstance(e, BinOp):
            p = _PREC[e.op]
            if e.op == "^":
                s = f"{render(e.left, p + 1)}^{render(e.right, p)}"
            else:
                s = f"{render(e.left, p)} {e.op} {render(e.right, p + 1)}"
            return f"({s})" if parent_prec > p else s
        raise TypeError(f"not an expression node: {e!r}")

    return render(expr, 0)

"""Small mathematical expression language: parsing, evaluation, symbolic
differentiation and code generation.

The grammar covers exactly what the field definitions need: the variables
``x`` and ``y``, named parameters, the constants ``pi`` and ``e``, the
functions sin/cos/exp/ln/sqrt/abs, arithmetic with ``^`` for powers, and a
three-argument conditional ``if(a < b, then, else)``.

Trees are immutable; evaluation is a pure function and safe to share
between threads.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping, Union

__all__ = [
    "Expr", "Const", "Var", "Param", "Neg", "BinOp", "Call", "Cond",
    "ParseError", "EvalError",
    "parse", "to_str", "evaluate", "differentiate", "compile_expr",
    "substitute_var", "free_params",
]

FUNCTIONS = ("sin", "cos", "exp", "ln", "sqrt", "abs")
COMPARISONS = ("<=", ">=", "<", ">", "=")

# exp() underflows to exactly 0 below this threshold instead of erroring;
# needed for e^(-1/x) at tiny positive x.
EXP_UNDERFLOW = -700.0


class ParseError(ValueError):
    """Syntax error with a 1-based character position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class EvalError(ValueError):
    """Domain or binding error, carrying the offending subexpression."""

    def __init__(self, message: str, subexpr: "Expr"):
        super().__init__(f"{message} in '{to_str(subexpr)}'")
        self.subexpr = subexpr


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    name: str  # "x" or "y"


@dataclass(frozen=True)
class Param:
    name: str


@dataclass(frozen=True)
class Neg:
    child: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str  # + - * / ^
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    fn: str
    arg: "Expr"


@dataclass(frozen=True)
class Cond:
    cmp: str  # < <= > >= =
    lhs: "Expr"
    rhs: "Expr"
    then: "Expr"
    other: "Expr"


Expr = Union[Const, Var, Param, Neg, BinOp, Call, Cond]


# ---------------------------------------------------------------------------
# tokenizer / parser

_SINGLE = set("+-*/^(),")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    """Return (kind, lexeme, 1-based position) triples."""
    tokens = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        pos = i + 1
        if c.isdigit() or (c == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            seen_e = False
            while j < n:
                ch = text[j]
                if ch.isdigit() or ch == ".":
                    j += 1
                elif ch in "eE" and not seen_e and j + 1 < n and (
                    text[j + 1].isdigit() or text[j + 1] in "+-"
                ):
                    seen_e = True
                    j += 2 if text[j + 1] in "+-" else 1
                else:
                    break
            lex = text[i:j]
            try:
                float(lex)
            except ValueError:
                raise ParseError(f"malformed number '{lex}'", pos)
            tokens.append(("num", lex, pos))
            i = j
        elif c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(("name", text[i:j], pos))
            i = j
        elif text[i:i + 2] in ("<=", ">="):
            tokens.append(("cmp", text[i:i + 2], pos))
            i += 2
        elif c in "<>=":
            tokens.append(("cmp", c, pos))
            i += 1
        elif c in _SINGLE:
            tokens.append((c, c, pos))
            i += 1
        else:
            raise ParseError(f"unexpected character '{c}'", pos)
    tokens.append(("end", "", n + 1))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.k = 0

    def peek(self):
        return self.tokens[self.k]

    def next(self):
        tok = self.tokens[self.k]
        self.k += 1
        return tok

    def expect(self, kind: str):
        tok = self.next()
        if tok[0] != kind:
            raise ParseError(f"expected '{kind}', found '{tok[1] or 'end of input'}'", tok[2])
        return tok

    def parse(self) -> Expr:
        e = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ParseError(f"unexpected trailing input '{tok[1]}'", tok[2])
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.peek()[0] in ("+", "-"):
            op = self.next()[0]
            e = BinOp(op, e, self.term())
        return e

    def term(self) -> Expr:
        e = self.factor()
        while self.peek()[0] in ("*", "/"):
            op = self.next()[0]
            e = BinOp(op, e, self.factor())
        return e

    def factor(self) -> Expr:
        e = self.unary()
        if self.peek()[0] == "^":
            self.next()
            e = BinOp("^", e, self.factor())  # right associative
        return e

    def unary(self) -> Expr:
        if self.peek()[0] == "-":
            self.next()
            return Neg(self.unary())
        if self.peek()[0] == "+":
            self.next()
            return self.unary()
        return self.primary()

    def primary(self) -> Expr:
        kind, lex, pos = self.next()
        if kind == "num":
            return Const(float(lex))
        if kind == "(":
            e = self.expr()
            self.expect(")")
            return e
        if kind == "name":
            if self.peek()[0] == "(":
                return self.call(lex, pos)
            if lex in ("x", "y"):
                return Var(lex)
            if lex == "pi":
                return Const(math.pi)
            if lex == "e":
                return Const(math.e)
            return Param(lex)
        raise ParseError(f"expected a value, found '{lex or 'end of input'}'", pos)

    def call(self, name: str, pos: int) -> Expr:
        self.expect("(")
        if name == "if":
            lhs = self.expr()
            tok = self.next()
            if tok[0] != "cmp":
                raise ParseError("expected a comparison in if(...)", tok[2])
            rhs = self.expr()
            self.expect(",")
            then = self.expr()
            self.expect(",")
            other = self.expr()
            self.expect(")")
            return Cond(tok[1], lhs, rhs, then, other)
        if name not in FUNCTIONS:
            raise ParseError(f"unknown function '{name}'", pos)
        arg = self.expr()
        self.expect(")")
        return Call(name, arg)


def parse(text: str) -> Expr:
    if not text or not text.strip():
        raise ParseError("empty expression", 1)
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# printing

def to_str(e: Expr) -> str:
    """Canonical fully-parenthesized form; reparses to an identical tree."""
    if isinstance(e, Const):
        return repr(e.value)
    if isinstance(e, (Var, Param)):
        return e.name
    if isinstance(e, Neg):
        return f"(-{to_str(e.child)})"
    if isinstance(e, BinOp):
        return f"({to_str(e.left)} {e.op} {to_str(e.right)})"
    if isinstance(e, Call):
        return f"{e.fn}({to_str(e.arg)})"
    if isinstance(e, Cond):
        return (f"if({to_str(e.lhs)} {e.cmp} {to_str(e.rhs)}, "
                f"{to_str(e.then)}, {to_str(e.other)})")
    raise TypeError(f"not an expression: {e!r}")


# ---------------------------------------------------------------------------
# evaluation

def _compare(op: str, a: float, b: float) -> bool:
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    if op == ">=":
        return a >= b
    return a == b


def _power(base: float, expo: float, node: Expr) -> float:
    if base == 0.0 and expo < 0.0:
        raise EvalError("zero raised to a negative power", node)
    if base < 0.0 and expo != math.floor(expo):
        raise EvalError("negative base with non-integer exponent", node)
    try:
        return math.pow(base, expo)
    except (ValueError, OverflowError) as exc:
        raise EvalError(f"power evaluation failed: {exc}", node)


def evaluate(e: Expr, x: float, y: float, params: Mapping[str, float] | None = None) -> float:
    params = params or {}

    def ev(node: Expr) -> float:
        if isinstance(node, Const):
            return node.value
        if isinstance(node, Var):
            return x if node.name == "x" else y
        if isinstance(node, Param):
            try:
                return params[node.name]
            except KeyError:
                raise EvalError(f"unbound parameter '{node.name}'", node)
        if isinstance(node, Neg):
            return -ev(node.child)
        if isinstance(node, BinOp):
            a = ev(node.left)
            b = ev(node.right)
            if node.op == "+":
                return a + b
            if node.op == "-":
                return a - b
            if node.op == "*":
                return a * b
            if node.op == "/":
                if b == 0.0:
                    raise EvalError("division by zero", node)
                return a / b
            return _power(a, b, node)
        if isinstance(node, Call):
            a = ev(node.arg)
            if node.fn == "sin":
                return math.sin(a)
            if node.fn == "cos":
                return math.cos(a)
            if node.fn == "exp":
                return 0.0 if a < EXP_UNDERFLOW else math.exp(a)
            if node.fn == "ln":
                if a <= 0.0:
                    raise EvalError("ln of non-positive value", node)
                return math.log(a)
            if node.fn == "sqrt":
                if a < 0.0:
                    raise EvalError("sqrt of negative value", node)
                return math.sqrt(a)
            return abs(a)
        if isinstance(node, Cond):
            if _compare(node.cmp, ev(node.lhs), ev(node.rhs)):
                return ev(node.then)
            return ev(node.other)
        raise TypeError(f"not an expression: {node!r}")

    return ev(e)


# ---------------------------------------------------------------------------
# differentiation (with light constant folding)

def _is_const(e: Expr, v: float | None = None) -> bool:
    return isinstance(e, Const) and (v is None or e.value == v)


def _add(a: Expr, b: Expr) -> Expr:
    if _is_const(a, 0.0):
        return b
    if _is_const(b, 0.0):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value + b.value)
    return BinOp("+", a, b)


def _sub(a: Expr, b: Expr) -> Expr:
    if _is_const(b, 0.0):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value - b.value)
    if _is_const(a, 0.0):
        return Neg(b)
    return BinOp("-", a, b)


def _mul(a: Expr, b: Expr) -> Expr:
    if _is_const(a, 0.0) or _is_const(b, 0.0):
        return Const(0.0)
    if _is_const(a, 1.0):
        return b
    if _is_const(b, 1.0):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value * b.value)
    return BinOp("*", a, b)


def _div(a: Expr, b: Expr) -> Expr:
    if _is_const(a, 0.0):
        return Const(0.0)
    if _is_const(b, 1.0):
        return a
    return BinOp("/", a, b)


def differentiate(e: Expr, var: str) -> Expr:
    """Exact partial derivative with respect to ``var`` ("x" or "y").

    Conditionals differentiate branchwise: the comparison is kept and each
    branch is differentiated independently.
    """
    if var not in ("x", "y"):
        raise ValueError(f"variable must be 'x' or 'y', got {var!r}")

    def d(node: Expr) -> Expr:
        if isinstance(node, (Const, Param)):
            return Const(0.0)
        if isinstance(node, Var):
            return Const(1.0 if node.name == var else 0.0)
        if isinstance(node, Neg):
            inner = d(node.child)
            return Const(0.0) if _is_const(inner, 0.0) else Neg(inner)
        if isinstance(node, BinOp):
            u, v = node.left, node.right
            du, dv = d(u), d(v)
            if node.op == "+":
                return _add(du, dv)
            if node.op == "-":
                return _sub(du, dv)
            if node.op == "*":
                return _add(_mul(du, v), _mul(u, dv))
            if node.op == "/":
                return _div(_sub(_mul(du, v), _mul(u, dv)), _mul(v, v))
            # power: use the simple rule for constant exponents, the
            # exp/ln form otherwise (requires u > 0 at evaluation time)
            if isinstance(v, Const):
                return _mul(_mul(v, BinOp("^", u, Const(v.value - 1.0))), du)
            return _mul(
                BinOp("^", u, v),
                _add(_mul(dv, Call("ln", u)), _mul(v, _div(du, u))),
            )
        if isinstance(node, Call):
            u = node.arg
            du = d(u)
            if node.fn == "sin":
                return _mul(Call("cos", u), du)
            if node.fn == "cos":
                return Neg(_mul(Call("sin", u), du))
            if node.fn == "exp":
                return _mul(Call("exp", u), du)
            if node.fn == "ln":
                return _div(du, u)
            if node.fn == "sqrt":
                return _div(du, _mul(Const(2.0), Call("sqrt", u)))
            # abs: sign(u) * du, branchwise at 0
            return Cond(">=", u, Const(0.0), du,
                        Const(0.0) if _is_const(du, 0.0) else Neg(du))
        if isinstance(node, Cond):
            dt, do = d(node.then), d(node.other)
            if dt == do:
                return dt
            return Cond(node.cmp, node.lhs, node.rhs, dt, do)
        raise TypeError(f"not an expression: {node!r}")

    return d(e)


# ---------------------------------------------------------------------------
# substitution / inspection helpers

def substitute_var(e: Expr, var: str, replacement: Expr) -> Expr:
    """Replace every occurrence of variable ``var`` by ``replacement``."""

    def sub(node: Expr) -> Expr:
        if isinstance(node, Var):
            return replacement if node.name == var else node
        if isinstance(node, (Const, Param)):
            return node
        if isinstance(node, Neg):
            return Neg(sub(node.child))
        if isinstance(node, BinOp):
            return BinOp(node.op, sub(node.left), sub(node.right))
        if isinstance(node, Call):
            return Call(node.fn, sub(node.arg))
        if isinstance(node, Cond):
            return Cond(node.cmp, sub(node.lhs), sub(node.rhs),
                        sub(node.then), sub(node.other))
        raise TypeError(f"not an expression: {node!r}")

    return sub(e)


def free_params(e: Expr) -> set[str]:
    out: set[str] = set()

    def walk(node: Expr) -> None:
        if isinstance(node, Param):
            out.add(node.name)
        elif isinstance(node, Neg):
            walk(node.child)
        elif isinstance(node, BinOp):
            walk(node.left)
            walk(node.right)
        elif isinstance(node, Call):
            walk(node.arg)
        elif isinstance(node, Cond):
            for sub in (node.lhs, node.rhs, node.then, node.other):
                walk(sub)

    walk(e)
    return out


# ---------------------------------------------------------------------------
# code generation (hot loops: integrator right-hand sides)

def _c_exp(a: float) -> float:
    return 0.0 if a < EXP_UNDERFLOW else math.exp(a)


def _c_ln(a: float) -> float:
    if a <= 0.0:
        raise EvalError("ln of non-positive value", Call("ln", Const(a)))
    return math.log(a)


def _c_sqrt(a: float) -> float:
    if a < 0.0:
        raise EvalError("sqrt of negative value", Call("sqrt", Const(a)))
    return math.sqrt(a)


def _c_pow(a: float, b: float) -> float:
    return _power(a, b, BinOp("^", Const(a), Const(b)))


_CODEGEN_GLOBALS = {
    "sin": math.sin, "cos": math.cos,
    "_exp": _c_exp, "_ln": _c_ln, "_sqrt": _c_sqrt, "_pow": _c_pow,
    "abs": abs, "__builtins__": {},
}


def _gen(e: Expr, params: Mapping[str, float]) -> str:
    if isinstance(e, Const):
        return repr(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Param):
        if e.name not in params:
            raise EvalError(f"unbound parameter '{e.name}'", e)
        return repr(float(params[e.name]))
    if isinstance(e, Neg):
        return f"(-{_gen(e.child, params)})"
    if isinstance(e, BinOp):
        a, b = _gen(e.left, params), _gen(e.right, params)
        if e.op == "^":
            return f"_pow({a}, {b})"
        return f"({a} {e.op} {b})"
    if isinstance(e, Call):
        fn = {"exp": "_exp", "ln": "_ln", "sqrt": "_sqrt"}.get(e.fn, e.fn)
        return f"{fn}({_gen(e.arg, params)})"
    if isinstance(e, Cond):
        return (f"({_gen(e.then, params)} if {_gen(e.lhs, params)} {'==' if e.cmp == '=' else e.cmp} "
                f"{_gen(e.rhs, params)} else {_gen(e.other, params)})")
    raise TypeError(f"not an expression: {e!r}")


def compile_expr(e: Expr, params: Mapping[str, float] | None = None) -> Callable[[float, float], float]:
    """Compile the tree to a fast (x, y) -> float callable.

    Parameter values are baked in as constants, matching the immutable
    binding model of the field types.
    """
    src = f"lambda x, y: {_gen(e, params or {})}"
    fn = eval(src, dict(_CODEGEN_GLOBALS))  # noqa: S307 - generated from our own AST
    fn.expr = e
    return fn

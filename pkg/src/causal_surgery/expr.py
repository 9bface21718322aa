"""Small arithmetic expression language for scalar metric ingredients.

Grammar (whitespace-insensitive):

    expr    :=  term  (('+' | '-') term)*
    term    :=  unary (('*' | '/') unary)*
    unary   :=  '-' unary | power
    power   :=  atom ('^' unary)?            # right-associative
    atom    :=  NUMBER | IDENT | IDENT '(' expr (',' expr)* ')' | '(' expr ')'

Identifiers are restricted to the variables t, x1, x2, the constants pi and e,
and the functions exp, sin, cos, tanh, sqrt (unary) and min, max (binary).
Evaluation is IEEE double (numpy arrays pass through); division by zero and
domain violations raise instead of propagating NaN.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import ExprEvalError, ExprSyntaxError

VARIABLES = ("t", "x1", "x2")
CONSTANTS = {"pi": math.pi, "e": math.e}
FUNCTIONS = {
    "exp": (1, np.exp),
    "sin": (1, np.sin),
    "cos": (1, np.cos),
    "tanh": (1, np.tanh),
    "sqrt": (1, None),  # domain-checked
    "min": (2, np.minimum),
    "max": (2, np.maximum),
}


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str  # only '-'
    arg: "Expression"


@dataclass(frozen=True)
class Bin:
    op: str  # + - * / ^
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple


Expression = Num | Var | Const | Unary | Bin | Call


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),]))"
)


def _tokenize(text: str):
    pos = 0
    tokens = []
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            stripped = pos + len(text[pos:]) - len(text[pos:].lstrip())
            if stripped >= len(text):
                break
            raise ExprSyntaxError(f"unexpected character {text[stripped]!r}", stripped)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    @property
    def cur(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str):
        kind, val, off = self.cur
        if kind != "op" or val != op:
            raise ExprSyntaxError(f"expected {op!r}", off)
        return self.advance()

    def parse(self) -> Expression:
        node = self.expr()
        kind, val, off = self.cur
        if kind != "end":
            raise ExprSyntaxError(f"unexpected trailing input {val!r}", off)
        return node

    def expr(self) -> Expression:
        node = self.term()
        while self.cur[0] == "op" and self.cur[1] in "+-":
            op = self.advance()[1]
            node = Bin(op, node, self.term())
        return node

    def term(self) -> Expression:
        node = self.unary()
        while self.cur[0] == "op" and self.cur[1] in "*/":
            op = self.advance()[1]
            node = Bin(op, node, self.unary())
        return node

    def unary(self) -> Expression:
        if self.cur[0] == "op" and self.cur[1] == "-":
            self.advance()
            return Unary("-", self.unary())
        return self.power()

    def power(self) -> Expression:
        base = self.atom()
        if self.cur[0] == "op" and self.cur[1] == "^":
            self.advance()
            return Bin("^", base, self.unary())
        return base

    def atom(self) -> Expression:
        kind, val, off = self.cur
        if kind == "num":
            self.advance()
            return Num(float(val))
        if kind == "ident":
            self.advance()
            if self.cur[0] == "op" and self.cur[1] == "(":
                if val not in FUNCTIONS:
                    raise ExprSyntaxError(f"unknown function {val!r}", off)
                arity = FUNCTIONS[val][0]
                self.advance()
                args = [self.expr()]
                while self.cur[0] == "op" and self.cur[1] == ",":
                    self.advance()
                    args.append(self.expr())
                self.expect_op(")")
                if len(args) != arity:
                    raise ExprSyntaxError(
                        f"{val} takes {arity} argument(s), got {len(args)}", off
                    )
                return Call(val, tuple(args))
            if val in VARIABLES:
                return Var(val)
            if val in CONSTANTS:
                return Const(val)
            raise ExprSyntaxError(f"unknown identifier {val!r}", off)
        if kind == "op" and val == "(":
            self.advance()
            node = self.expr()
            self.expect_op(")")
            return node
        raise ExprSyntaxError(
            f"expected a value, got {val!r}" if val else "unexpected end of input", off
        )


def parse_expression(text: str) -> Expression:
    """Parse source text into an expression tree."""
    return _Parser(text).parse()


def free_variables(e: Expression) -> set[str]:
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Unary):
        return free_variables(e.arg)
    if isinstance(e, Bin):
        return free_variables(e.left) | free_variables(e.right)
    if isinstance(e, Call):
        out: set[str] = set()
        for a in e.args:
            out |= free_variables(a)
        return out
    return set()


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}
_UNARY_PREC = 3


def serialize_expression(e: Expression) -> str:
    """Render a tree to text that reparses to an equal tree."""

    def render(node, parent_prec: int) -> str:
        if isinstance(node, Num):
            s = repr(node.value)
            return s
        if isinstance(node, Var):
            return node.name
        if isinstance(node, Const):
            return node.name
        if isinstance(node, Unary):
            inner = render(node.arg, _UNARY_PREC)
            s = f"-{inner}"
            return f"({s})" if parent_prec > _UNARY_PREC else s
        if isinstance(node, Call):
            args = ", ".join(render(a, 0) for a in node.args)
            return f"{node.name}({args})"
        if isinstance(node, Bin):
            prec = _PREC[node.op]
            if node.op == "^":
                # right-associative; base binds atoms only
                left = render(node.left, prec + 1)
                right = render(node.right, _UNARY_PREC)
                s = f"{left}^{right}"
            else:
                left = render(node.left, prec)
                right = render(node.right, prec + 1)
                s = f"{left} {node.op} {right}"
            if parent_prec > prec:
                return f"({s})"
            return s
        raise TypeError(f"not an expression node: {node!r}")

    return render(e, 0)


def _loc(node: Expression) -> str:
    return serialize_expression(node)


def eval_expression(e: Expression, bindings: dict):
    """Evaluate with the given variable bindings (scalars or numpy arrays)."""
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Const):
        return CONSTANTS[e.name]
    if isinstance(e, Var):
        if e.name not in bindings:
            raise ExprEvalError(f"missing binding for variable {e.name!r}")
        return bindings[e.name]
    if isinstance(e, Unary):
        return -eval_expression(e.arg, bindings)
    if isinstance(e, Call):
        args = [eval_expression(a, bindings) for a in e.args]
        if e.name == "sqrt":
            if np.any(np.asarray(args[0]) < 0):
                raise ExprEvalError(f"sqrt of negative value in {_loc(e)!r}")
            return np.sqrt(args[0])
        return FUNCTIONS[e.name][1](*args)
    if isinstance(e, Bin):
        lv = eval_expression(e.left, bindings)
        rv = eval_expression(e.right, bindings)
        if e.op == "+":
            return lv + rv
        if e.op == "-":
            return lv - rv
        if e.op == "*":
            return lv * rv
        if e.op == "/":
            if np.any(np.asarray(rv) == 0):
                raise ExprEvalError(f"division by zero in {_loc(e)!r}")
            return lv / rv
        if e.op == "^":
            lva = np.asarray(lv, dtype=float)
            rva = np.asarray(rv, dtype=float)
            if np.any((lva == 0) & (rva < 0)):
                raise ExprEvalError(f"zero raised to negative power in {_loc(e)!r}")
            if np.any((lva < 0) & (rva != np.floor(rva))):
                raise ExprEvalError(
                    f"negative base with non-integer exponent in {_loc(e)!r}"
                )
            out = np.power(lva, rva)
            return float(out) if out.ndim == 0 else out
    raise TypeError(f"not an expression node: {e!r}")

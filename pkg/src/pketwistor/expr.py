"""A small infix expression language evaluated in jet arithmetic.

Grammar (``^`` binds tighter than unary minus and is right associative)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | '+' unary | power
    power  := atom ('^' unary)?
    atom   := NUMBER | NAME | NAME '(' expr ')' | '(' expr ')'

Recognised functions: ``log``, ``exp``, ``sqrt``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping, Union

from .jetcalc import Jet, JetSpace, SingularEvaluationError, power

Value = Union[float, Jet]

FUNCTIONS = ("log", "exp", "sqrt")


class ExprSyntaxError(ValueError):
    pass


class UnboundVariableError(KeyError):
    def __str__(self) -> str:
        return f"unbound variable {self.args[0]!r}"


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"


Node = Union[Num, Var, Neg, BinOp, Call]

_TOKEN = re.compile(r"\s*(?:(\d+\.\d*(?:[eE][-+]?\d+)?|\.\d+(?:[eE][-+]?\d+)?|\d+(?:[eE][-+]?\d+)?)"
                    r"|([A-Za-z_][A-Za-z_0-9']*)|(\*\*|[-+*/^(),]))")


def _tokenize(text: str) -> list[tuple[str, str]]:
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r} at column {pos} in {text!r}")
        num, name, op = m.groups()
        if num is not None:
            out.append(("num", num))
        elif name is not None:
            out.append(("name", name))
        else:
            out.append(("op", "^" if op == "**" else op))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else ("end", "")

    def take(self, kind=None, val=None):
        tok = self.peek()
        if (kind and tok[0] != kind) or (val and tok[1] != val):
            raise ExprSyntaxError(f"expected {val or kind}, found {tok[1] or 'end of input'!r} in {self.text!r}")
        self.i += 1
        return tok

    def parse(self) -> Node:
        if not self.toks:
            raise ExprSyntaxError("empty expression")
        node = self.expr()
        if self.peek()[0] != "end":
            raise ExprSyntaxError(f"trailing input {self.peek()[1]!r} in {self.text!r}")
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek() in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.peek() in (("op", "*"), ("op", "/")):
            op = self.take()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.peek() == ("op", "-"):
            self.take()
            return Neg(self.unary())
        if self.peek() == ("op", "+"):
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Node:
        kind, val = self.peek()
        if kind == "num":
            self.take()
            return Num(float(val))
        if kind == "name":
            self.take()
            if self.peek() == ("op", "("):
                if val not in FUNCTIONS:
                    raise ExprSyntaxError(f"unknown function {val!r} in {self.text!r}")
                self.take()
                arg = self.expr()
                self.take("op", ")")
                return Call(val, arg)
            return Var(val)
        if (kind, val) == ("op", "("):
            self.take()
            node = self.expr()
            self.take("op", ")")
            return node
        raise ExprSyntaxError(f"unexpected {val or 'end of input'!r} in {self.text!r}")


class Expr:
    """Parsed expression; immutable and hashable by its source text."""

    __slots__ = ("text", "tree")

    def __init__(self, text: str | float | int):
        if isinstance(text, (int, float)):
            text = repr(float(text))
        self.text = str(text)
        self.tree = _Parser(self.text).parse()

    def __repr__(self) -> str:
        return f"Expr({self.text!r})"

    def __eq__(self, other) -> bool:
        return isinstance(other, Expr) and other.text == self.text

    def __hash__(self) -> int:
        return hash(self.text)

    def free_names(self) -> set[str]:
        out: set[str] = set()

        def walk(n):
            if isinstance(n, Var):
                out.add(n.name)
            elif isinstance(n, Neg):
                walk(n.arg)
            elif isinstance(n, BinOp):
                walk(n.left)
                walk(n.right)
            elif isinstance(n, Call):
                walk(n.arg)

        walk(self.tree)
        return out

    def evaluate(self, env: Mapping[str, Value], params: Mapping[str, float] | None = None) -> Value:
        params = params or {}

        def ev(n: Node) -> Value:
            if isinstance(n, Num):
                return n.value
            if isinstance(n, Var):
                if n.name in env:
                    return env[n.name]
                if n.name in params:
                    return float(params[n.name])
                raise UnboundVariableError(n.name)
            if isinstance(n, Neg):
                return -ev(n.arg)
            if isinstance(n, Call):
                return _call(n.func, ev(n.arg))
            left, right = ev(n.left), ev(n.right)
            if n.op == "+":
                return left + right
            if n.op == "-":
                return left - right
            if n.op == "*":
                return left * right
            if n.op == "/":
                if isinstance(right, Jet):
                    return right.reciprocal() * left
                if right == 0:
                    raise SingularEvaluationError("division", 0.0)
                return left / right
            return _pow(left, right)

        return ev(self.tree)


def _call(func: str, x: Value) -> Value:
    if isinstance(x, Jet):
        if func == "log":
            return x.log()
        if func == "exp":
            return x.exp()
        return x.real_power(0.5)
    if func == "log":
        if x <= 0:
            raise SingularEvaluationError("log", float(x))
        return math.log(x)
    if func == "exp":
        return math.exp(x)
    if x < 0:
        raise SingularEvaluationError("power", float(x))
    return math.sqrt(x)


def _pow(base: Value, q: Value) -> Value:
    if isinstance(q, Jet):
        if isinstance(base, Jet):
            return (q * base.log()).exp()
        return (q * math.log(base)).exp()
    if isinstance(base, Jet):
        return power(base, q)
    return float(base) ** q


def parse(text: str | Expr) -> Expr:
    return text if isinstance(text, Expr) else Expr(text)


def eval_expr(e: Expr | str, env: Mapping[str, Jet], params: Mapping[str, float] | None = None,
              jet_space: JetSpace | None = None) -> Jet:
    """Evaluate ``e`` to a jet; constants are lifted into the jet space of ``env``."""
    e = parse(e)
    out = e.evaluate(env, params)
    if isinstance(out, Jet):
        return out
    if jet_space is None:
        jets = [v for v in env.values() if isinstance(v, Jet)]
        if not jets:
            raise ValueError("cannot infer a jet space for a constant expression without jet variables")
        jet_space = jets[0].space
    return Jet.constant(jet_space, out)

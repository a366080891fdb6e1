"""Arithmetic expressions with exact value, gradient and Hessian evaluation.

Grammar (loosest to tightest binding)::

    expr   := expr ('+' | '-') expr
            | expr ('*' | '/') expr
            | '-' expr
            | expr '^' integer          (right associative)
            | number | name | func '(' expr ')' | '(' expr ')'

    func   := sin | cos | exp | log | sqrt | abs

Exponents must fold to an integer constant at parse time; write ``exp(a*log(x))``
for fractional powers. Variables are bound to coordinate indices when parsing.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .core import ScalarField
from .errors import EvaluationDomainError, ParseError

FUNCTIONS = ("sin", "cos", "exp", "log", "sqrt", "abs")
ABS_KINK = 1e-12


# --------------------------------------------------------------------------
# AST
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: float
    offset: int = -1

    def __eq__(self, other):
        return isinstance(other, Num) and self.value == other.value

    def __hash__(self):
        return hash(("num", self.value))


@dataclass(frozen=True)
class Var:
    name: str
    index: int
    offset: int = -1

    def __eq__(self, other):
        return isinstance(other, Var) and (self.name, self.index) == (other.name, other.index)

    def __hash__(self):
        return hash(("var", self.name, self.index))


@dataclass(frozen=True)
class Neg:
    operand: "Node"
    offset: int = -1

    def __eq__(self, other):
        return isinstance(other, Neg) and self.operand == other.operand

    def __hash__(self):
        return hash(("neg", self.operand))


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"
    offset: int = -1

    def __eq__(self, other):
        return (isinstance(other, BinOp) and self.op == other.op
                and self.left == other.left and self.right == other.right)

    def __hash__(self):
        return hash(("bin", self.op, self.left, self.right))


@dataclass(frozen=True)
class Pow:
    base: "Node"
    exponent: int
    offset: int = -1

    def __eq__(self, other):
        return (isinstance(other, Pow) and self.exponent == other.exponent
                and self.base == other.base)

    def __hash__(self):
        return hash(("pow", self.base, self.exponent))


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"
    offset: int = -1

    def __eq__(self, other):
        return isinstance(other, Call) and self.func == other.func and self.arg == other.arg

    def __hash__(self):
        return hash(("call", self.func, self.arg))


Node = Union[Num, Var, Neg, BinOp, Pow, Call]


@dataclass(frozen=True)
class Expression:
    """A parsed expression together with the ordered variable names it was bound to."""

    root: Node
    variables: tuple
    source: str = ""

    @property
    def dim(self) -> int:
        return len(self.variables)

    def __str__(self):
        return to_source(self.root)


# --------------------------------------------------------------------------
# Tokenizer and parser
# --------------------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
""", re.VERBOSE)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    offset: int  # byte offset


def _byte_offset(source: str, char_index: int) -> int:
    return len(source[:char_index].encode("utf-8"))


def tokenize(source: str) -> list:
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN.match(source, pos)
        if m is None:
            raise ParseError(f"unexpected character {source[pos]!r}",
                             _byte_offset(source, pos), source)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(_Token(kind, m.group(), _byte_offset(source, pos)))
        pos = m.end()
    tokens.append(_Token("end", "", _byte_offset(source, len(source))))
    return tokens


# binding powers
_ADD, _MUL, _NEG, _POW = 10, 20, 30, 40
_INFIX = {"+": _ADD, "-": _ADD, "*": _MUL, "/": _MUL, "^": _POW}


class _Parser:
    def __init__(self, source: str, variables: Sequence[str]):
        self.source = source
        self.tokens = tokenize(source)
        self.pos = 0
        self.index = {}
        for i, name in enumerate(variables):
            if name in self.index:
                raise ValueError(f"duplicate variable name {name!r}")
            if name in FUNCTIONS:
                raise ValueError(f"variable name {name!r} shadows a function")
            self.index[name] = i

    def error(self, message: str, token: _Token):
        raise ParseError(message, token.offset, self.source)

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, text: str, opener: _Token):
        tok = self.peek()
        if tok.text != text:
            if tok.kind == "end":
                self.error("unbalanced parentheses: missing ')'", opener)
            self.error(f"expected {text!r}, found {tok.text!r}", tok)
        self.advance()

    def parse(self) -> Node:
        node = self.expression(0)
        tok = self.peek()
        if tok.kind != "end":
            if tok.text == ")":
                self.error("unbalanced parentheses: unexpected ')'", tok)
            self.error(f"unexpected token {tok.text!r}", tok)
        return node

    def expression(self, min_bp: int) -> Node:
        left = self.prefix()
        while True:
            tok = self.peek()
            bp = _INFIX.get(tok.text) if tok.kind == "op" else None
            if bp is None or bp <= min_bp:
                break
            self.advance()
            if tok.text == "^":
                left = Pow(left, self.integer_exponent(tok), tok.offset)
            else:
                left = BinOp(tok.text, left, self.expression(bp), tok.offset)
        return left

    def integer_exponent(self, caret: _Token) -> int:
        start = self.peek()
        # right associative: a ^ b ^ c == a ^ (b ^ c)
        node = self.expression(_POW - 1)
        value = _fold_constant(node)
        if value is None or value != int(value):
            self.error("exponent must be an integer constant", start)
        return int(value)

    def prefix(self) -> Node:
        tok = self.advance()
        if tok.kind == "end":
            self.error("missing operand", tok)
        if tok.kind == "num":
            return Num(float(tok.text), tok.offset)
        if tok.kind == "name":
            if tok.text in FUNCTIONS:
                opener = self.peek()
                if opener.text != "(":
                    self.error(f"function {tok.text!r} must be followed by '('", opener)
                self.advance()
                arg = self.expression(0)
                self.expect(")", opener)
                return Call(tok.text, arg, tok.offset)
            if tok.text not in self.index:
                self.error(f"unknown identifier {tok.text!r}", tok)
            return Var(tok.text, self.index[tok.text], tok.offset)
        if tok.text == "(":
            inner = self.expression(0)
            self.expect(")", tok)
            return inner
        if tok.text == "-":
            return Neg(self.expression(_NEG), tok.offset)
        if tok.text == ")":
            self.error("missing operand before ')'", tok)
        self.error(f"missing operand before {tok.text!r}", tok)


def _fold_constant(node: Node):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Neg):
        v = _fold_constant(node.operand)
        return None if v is None else -v
    if isinstance(node, Pow):
        v = _fold_constant(node.base)
        return None if v is None else v ** node.exponent
    return None


def parse(source: str, variables: Sequence[str]) -> Expression:
    """Parse ``source`` with ``variables[i]`` bound to coordinate ``i``."""
    if not source or not source.strip():
        raise ParseError("empty expression", 0, source)
    root = _Parser(source, variables).parse()
    return Expression(root, tuple(variables), source)


# --------------------------------------------------------------------------
# Printing
# --------------------------------------------------------------------------

def _format_number(value: float) -> str:
    if value == int(value) and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


def to_source(node: Node) -> str:
    """Fully parenthesised source text that re-parses to the same tree."""
    if isinstance(node, Num):
        return _format_number(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        return f"(-{to_source(node.operand)})"
    if isinstance(node, BinOp):
        return f"({to_source(node.left)} {node.op} {to_source(node.right)})"
    if isinstance(node, Pow):
        return f"({to_source(node.base)} ^ {node.exponent})"
    if isinstance(node, Call):
        return f"{node.func}({to_source(node.arg)})"
    raise TypeError(f"not an expression node: {node!r}")


# --------------------------------------------------------------------------
# Second-order forward mode
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Dual2:
    """Value, gradient and Hessian of an intermediate quantity."""

    value: float
    grad: np.ndarray
    hess: np.ndarray

    @classmethod
    def constant(cls, value: float, dim: int) -> "Dual2":
        return cls(float(value), np.zeros(dim), np.zeros((dim, dim)))

    @classmethod
    def variable(cls, value: float, index: int, dim: int) -> "Dual2":
        g = np.zeros(dim)
        g[index] = 1.0
        return cls(float(value), g, np.zeros((dim, dim)))

    def __add__(self, other: "Dual2") -> "Dual2":
        return Dual2(self.value + other.value, self.grad + other.grad, self.hess + other.hess)

    def __sub__(self, other: "Dual2") -> "Dual2":
        return Dual2(self.value - other.value, self.grad - other.grad, self.hess - other.hess)

    def __neg__(self) -> "Dual2":
        return Dual2(-self.value, -self.grad, -self.hess)

    def __mul__(self, other: "Dual2") -> "Dual2":
        a, b = self, other
        cross = np.outer(a.grad, b.grad)
        return Dual2(a.value * b.value,
                     a.value * b.grad + b.value * a.grad,
                     a.value * b.hess + b.value * a.hess + cross + cross.T)

    def chain(self, f0: float, f1: float, f2: float) -> "Dual2":
        """Compose with a scalar function whose value and first two derivatives at ``self.value`` are given."""
        return Dual2(f0, f1 * self.grad, f1 * self.hess + f2 * np.outer(self.grad, self.grad))


def _domain(message: str, node) -> EvaluationDomainError:
    return EvaluationDomainError(f"{message} at offset {node.offset}")


def _intrinsic(name: str, u: Dual2, node: Call) -> Dual2:
    a = u.value
    if name == "sin":
        return u.chain(math.sin(a), math.cos(a), -math.sin(a))
    if name == "cos":
        return u.chain(math.cos(a), -math.sin(a), -math.cos(a))
    if name == "exp":
        try:
            e = math.exp(a)
        except OverflowError:
            raise _domain("exp overflow", node) from None
        return u.chain(e, e, e)
    if name == "log":
        if a <= 0.0:
            raise _domain(f"log of non-positive value {a!r}", node)
        return u.chain(math.log(a), 1.0 / a, -1.0 / (a * a))
    if name == "sqrt":
        if a <= 0.0:
            raise _domain(f"sqrt is not differentiable at {a!r}", node)
        s = math.sqrt(a)
        return u.chain(s, 0.5 / s, -0.25 / (s * a))
    if name == "abs":
        if abs(a) < ABS_KINK:
            raise _domain("abs is not differentiable at 0", node)
        return u.chain(abs(a), math.copysign(1.0, a), 0.0)
    raise _domain(f"unknown function {name!r}", node)


def _power(u: Dual2, n: int, node: Pow) -> Dual2:
    a = u.value
    if n == 0:
        return Dual2.constant(1.0, u.grad.shape[0])
    if a == 0.0 and n < 0:
        raise _domain("division by zero in negative power", node)
    f1 = n * a ** (n - 1)
    f2 = 0.0 if n == 1 else n * (n - 1) * a ** (n - 2)
    return u.chain(a ** n, f1, f2)


def _evaluate(node: Node, x: np.ndarray, dim: int) -> Dual2:
    if isinstance(node, Num):
        return Dual2.constant(node.value, dim)
    if isinstance(node, Var):
        return Dual2.variable(x[node.index], node.index, dim)
    if isinstance(node, Neg):
        return -_evaluate(node.operand, x, dim)
    if isinstance(node, Pow):
        return _power(_evaluate(node.base, x, dim), node.exponent, node)
    if isinstance(node, Call):
        return _intrinsic(node.func, _evaluate(node.arg, x, dim), node)
    left = _evaluate(node.left, x, dim)
    right = _evaluate(node.right, x, dim)
    if node.op == "+":
        return left + right
    if node.op == "-":
        return left - right
    if node.op == "*":
        return left * right
    b = right.value
    if b == 0.0:
        raise _domain("division by zero", node)
    return left * right.chain(1.0 / b, -1.0 / (b * b), 2.0 / (b * b * b))


def eval_dual2(expr: Expression, x) -> Dual2:
    """Value, gradient and Hessian of ``expr`` at ``x`` in one forward pass."""
    x = np.asarray(x, dtype=float)
    if x.shape != (expr.dim,):
        raise ValueError(f"point has shape {x.shape}, expression expects ({expr.dim},)")
    try:
        out = _evaluate(expr.root, x, expr.dim)
    except (OverflowError, ZeroDivisionError) as exc:
        raise EvaluationDomainError(str(exc)) from None
    if not (np.isfinite(out.value) and np.all(np.isfinite(out.grad))
            and np.all(np.isfinite(out.hess))):
        raise EvaluationDomainError(f"non-finite result evaluating {expr.source or expr}")
    return out


def eval_value(expr: Expression, x) -> float:
    return eval_dual2(expr, x).value


class ExpressionField(ScalarField):
    """:class:`ScalarField` backed by a parsed expression; derivatives are exact."""

    def __init__(self, source: str, variables: Sequence[str]):
        self.expression = parse(source, variables)
        self.dim = len(variables)

    @property
    def variables(self) -> tuple:
        return self.expression.variables

    def eval(self, x) -> float:
        return eval_dual2(self.expression, x).value

    def gradient(self, x) -> np.ndarray:
        return eval_dual2(self.expression, x).grad

    def hessian(self, x) -> np.ndarray:
        return eval_dual2(self.expression, x).hess

    def dual(self, x) -> Dual2:
        return eval_dual2(self.expression, x)

"""Coefficient expression language.

Grammar (whitespace insignificant)::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := number | 'q' INT | 'd' INT | '-' factor
            | 'abs' '(' expr ')' | '(' expr ')'

``q1..qn`` are the deterministic parameters and ``d1..dm`` the random ones,
both 1-based.  Evaluation broadcasts, so passing numpy arrays for the
variables evaluates a whole batch at once.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import DimensionMismatch, DivisionByZero, ExprSyntaxError, UnknownVariable


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    kind: str  # "q" or "d"
    index: int  # 0-based


@dataclass(frozen=True)
class Neg:
    arg: "Node"


@dataclass(frozen=True)
class Abs:
    arg: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


Node = Union[Const, Var, Neg, Abs, BinOp]

_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<var>[qd])(?P<idx>\d+)\b"
    r"|(?P<abs>abs)\b"
    r"|(?P<op>[-+*/()])"
    r")"
)


class _Parser:
    def __init__(self, text: str, n: int, m: int):
        self.text = text
        self.n = n
        self.m = m
        self.tokens = self._tokenize()
        self.pos = 0

    def _tokenize(self):
        out = []
        i = 0
        text = self.text
        while i < len(text):
            if text[i].isspace():
                i += 1
                continue
            mt = _TOKEN.match(text, i)
            if mt is None or mt.end() == i:
                raise ExprSyntaxError(f"unexpected character {text[i]!r}", text, i)
            if mt.group("num") is not None:
                out.append(("num", float(mt.group("num")), mt.start("num")))
            elif mt.group("var") is not None:
                out.append(("var", (mt.group("var"), int(mt.group("idx"))), mt.start("var")))
            elif mt.group("abs") is not None:
                out.append(("abs", None, mt.start("abs")))
            else:
                out.append((mt.group("op"), None, mt.start("op")))
            i = mt.end()
        out.append(("end", None, len(text)))
        return out

    def peek(self):
        return self.tokens[self.pos]

    def take(self, kind=None):
        tok = self.tokens[self.pos]
        if kind is not None and tok[0] != kind:
            what = "end of input" if tok[0] == "end" else repr(tok[0])
            raise ExprSyntaxError(f"expected {kind!r}, found {what}", self.text, tok[2])
        self.pos += 1
        return tok

    def parse(self) -> Node:
        node = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ExprSyntaxError(f"unexpected token {tok[0]!r}", self.text, tok[2])
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek()[0] in ("+", "-"):
            op = self.take()[0]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.peek()[0] in ("*", "/"):
            op = self.take()[0]
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> Node:
        kind, val, off = self.peek()
        if kind == "num":
            self.take()
            return Const(val)
        if kind == "var":
            self.take()
            name, idx = val
            limit = self.n if name == "q" else self.m
            if not 1 <= idx <= limit:
                raise UnknownVariable(f"{name}{idx}", self.text, off)
            return Var(name, idx - 1)
        if kind == "-":
            self.take()
            return Neg(self.factor())
        if kind == "abs":
            self.take()
            self.take("(")
            node = self.expr()
            self.take(")")
            return Abs(node)
        if kind == "(":
            self.take()
            node = self.expr()
            self.take(")")
            return node
        what = "end of input" if kind == "end" else repr(kind)
        raise ExprSyntaxError(f"unexpected {what}", self.text, off)


def _fmt_num(v: float) -> str:
    if float(v).is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(float(v))


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def to_text(node: Node) -> str:
    """Render an AST with the minimal parentheses needed to re-parse it."""
    if isinstance(node, Const):
        return _fmt_num(node.value)
    if isinstance(node, Var):
        return f"{node.kind}{node.index + 1}"
    if isinstance(node, Abs):
        return f"abs({to_text(node.arg)})"
    if isinstance(node, Neg):
        inner = to_text(node.arg)
        if isinstance(node.arg, BinOp):
            inner = f"({inner})"
        return f"-{inner}"
    prec = _PREC[node.op]
    left = to_text(node.left)
    if isinstance(node.left, BinOp) and _PREC[node.left.op] < prec:
        left = f"({left})"
    right = to_text(node.right)
    # left-associative: a right operand of equal precedence needs brackets
    if isinstance(node.right, BinOp) and _PREC[node.right.op] <= prec:
        right = f"({right})"
    return f"{left} {node.op} {right}"


def _eval(node: Node, q, d, text: str):
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Var):
        return q[node.index] if node.kind == "q" else d[node.index]
    if isinstance(node, Neg):
        return -_eval(node.arg, q, d, text)
    if isinstance(node, Abs):
        return np.abs(_eval(node.arg, q, d, text))
    a = _eval(node.left, q, d, text)
    b = _eval(node.right, q, d, text)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    if node.op == "*":
        return a * b
    if np.any(np.asarray(b) == 0):
        raise DivisionByZero(to_text(node))
    return a / b


def _has(node: Node, pred) -> bool:
    if pred(node):
        return True
    if isinstance(node, (Neg, Abs)):
        return _has(node.arg, pred)
    if isinstance(node, BinOp):
        return _has(node.left, pred) or _has(node.right, pred)
    return False


@dataclass(frozen=True)
class Expression:
    ast: Node
    source: str
    n: int
    m: int

    def __call__(self, q: Sequence = (), d: Sequence = ()):
        return evaluate(self, q, d)

    def __str__(self) -> str:
        return to_text(self.ast)

    def uses(self, kind: str) -> bool:
        return _has(self.ast, lambda x: isinstance(x, Var) and x.kind == kind)

    @property
    def is_constant(self) -> bool:
        return not (self.uses("q") or self.uses("d"))


def parse(text: str, n: int, m: int) -> Expression:
    if not isinstance(text, str) or not text.strip():
        raise ExprSyntaxError("empty expression", str(text), 0)
    return Expression(_Parser(text, n, m).parse(), text, n, m)


def constant(value: float, n: int = 0, m: int = 0) -> Expression:
    return Expression(Const(float(value)), _fmt_num(value), n, m)


def evaluate(e: Expression, q: Sequence = (), d: Sequence = ()):
    """Evaluate with standard float semantics.

    ``q`` and ``d`` are indexable by parameter number; their entries may be
    scalars or mutually broadcastable arrays.
    """
    if len(q) < e.n or len(d) < e.m:
        raise DimensionMismatch(
            f"expression {e.source!r} needs n={e.n}, m={e.m}; got {len(q)}, {len(d)}"
        )
    return _eval(e.ast, q, d, e.source)


# -- affine structure -------------------------------------------------------

def _add(a: Node, b: Node) -> Node:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value + b.value)
    if isinstance(a, Const) and a.value == 0:
        return b
    if isinstance(b, Const) and b.value == 0:
        return a
    return BinOp("+", a, b)


def _mul(a: Node, b: Node) -> Node:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value * b.value)
    for x, y in ((a, b), (b, a)):
        if isinstance(x, Const) and x.value == 1:
            return y
        if isinstance(x, Const) and x.value == 0:
            return Const(0.0)
    return BinOp("*", a, b)


def _neg(a: Node) -> Node:
    if isinstance(a, Const) and a.value == 0:
        return a
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def _linear_parts(node: Node, kind: str):
    """Split into {None: free part, i: coefficient of var i}, or None."""
    def free(x):
        return not _has(x, lambda v: isinstance(v, Var) and v.kind == kind)

    if free(node):
        return {None: node}
    if isinstance(node, Var):
        return {None: Const(0.0), node.index: Const(1.0)}
    if isinstance(node, Neg):
        inner = _linear_parts(node.arg, kind)
        return None if inner is None else {k: _neg(v) for k, v in inner.items()}
    if isinstance(node, Abs):
        return None
    if node.op in "+-":
        left = _linear_parts(node.left, kind)
        right = _linear_parts(node.right, kind)
        if left is None or right is None:
            return None
        out = dict(left)
        for k, v in right.items():
            v = v if node.op == "+" else _neg(v)
            out[k] = _add(out[k], v) if k in out else v
        return out
    if node.op == "*":
        if free(node.left):
            scale, other = node.left, node.right
        elif free(node.right):
            scale, other = node.right, node.left
        else:
            return None
        inner = _linear_parts(other, kind)
        if inner is None:
            return None
        return {k: _mul(v, scale) if other is node.left else _mul(scale, v)
                for k, v in inner.items()}
    return None  # division of a q-dependent term


@dataclass(frozen=True)
class AffineForm:
    """``constant + sum_i coeffs[i] * var_i`` with coefficients free of that kind."""

    constant: Expression
    coeffs: tuple[Expression, ...]


def affine_in(e: Expression, kind: str = "q"):
    """Structural affinity test; returns an :class:`AffineForm` or None.

    Conservative: any '/' anywhere in the expression disables it, and
    algebraically affine but disguised forms such as ``abs(q1)*0`` are
    rejected.
    """
    if _has(e.ast, lambda x: isinstance(x, BinOp) and x.op == "/"):
        return None
    parts = _linear_parts(e.ast, kind)
    if parts is None:
        return None
    size = e.n if kind == "q" else e.m

    def wrap(node):
        return Expression(node, to_text(node), e.n, e.m)

    return AffineForm(
        wrap(parts.get(None, Const(0.0))),
        tuple(wrap(parts.get(i, Const(0.0))) for i in range(size)),
    )


def is_affine_in_q(e: Expression) -> bool:
    return affine_in(e, "q") is not None


def substitute(e: Expression, mapping, n: int, m: int) -> Expression:
    """Replace variables via ``mapping[(kind, index)] -> Node`` and redeclare dims."""
    def walk(node):
        if isinstance(node, Var):
            return mapping.get((node.kind, node.index), node)
        if isinstance(node, Neg):
            return Neg(walk(node.arg))
        if isinstance(node, Abs):
            return Abs(walk(node.arg))
        if isinstance(node, BinOp):
            return BinOp(node.op, walk(node.left), walk(node.right))
        return node

    ast = walk(e.ast)
    return Expression(ast, to_text(ast), n, m)

"""Arithmetic expressions over named variables with forward-mode derivatives.

Grammar (whitespace insensitive; ``^`` binds tightest and associates to
the right, then unary minus, then ``*`` ``/``, then ``+`` ``-``):

    expression := term (('+' | '-') term)*
    term       := unary (('*' | '/') unary)*
    unary      := '-' unary | power
    power      := atom ('^' unary)?
    atom       := NUMBER | NAME | NAME '(' expression ')' | '(' expression ')'

NAME is either a declared variable or one of sin, cos, exp, log, sqrt.
Evaluation works on plain floats or on :class:`Dual` numbers, which is
how directional derivatives are computed: one forward pass per direction,
exact to the rules of differentiation.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Union

__all__ = [
    "ExprError",
    "ExprSyntaxError",
    "ExprDomainError",
    "Dual",
    "Expr",
    "parse",
    "FUNCTIONS",
]

FUNCTIONS = ("sin", "cos", "exp", "log", "sqrt")


class ExprError(ValueError):
    """Base class for expression parsing and evaluation errors."""


class ExprSyntaxError(ExprError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class ExprDomainError(ExprError):
    def __init__(self, message: str, subexpression: str):
        super().__init__(f"{message} in {subexpression!r}")
        self.subexpression = subexpression


@dataclass(frozen=True)
class Dual:
    """First-order dual number: value plus one directional derivative."""

    value: float
    deriv: float


Number = Union[float, Dual]


def _val(x: Number) -> float:
    return x.value if isinstance(x, Dual) else x


# -- AST ----------------------------------------------------------------


@dataclass(frozen=True)
class _Num:
    value: float


@dataclass(frozen=True)
class _Var:
    name: str


@dataclass(frozen=True)
class _Neg:
    arg: object


@dataclass(frozen=True)
class _BinOp:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class _Call:
    fn: str
    arg: object


# -- tokenizer ----------------------------------------------------------

_NUMBER_RE = re.compile(r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?")
_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")


@dataclass(frozen=True)
class _Token:
    kind: str  # NUM, NAME, OP, LPAREN, RPAREN, EOF
    text: str
    pos: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch in "+-*/^":
            tokens.append(_Token("OP", ch, i))
            i += 1
            continue
        if ch == "(":
            tokens.append(_Token("LPAREN", ch, i))
            i += 1
            continue
        if ch == ")":
            tokens.append(_Token("RPAREN", ch, i))
            i += 1
            continue
        m = _NUMBER_RE.match(text, i)
        if m:
            tokens.append(_Token("NUM", m.group(), i))
            i = m.end()
            continue
        m = _NAME_RE.match(text, i)
        if m:
            tokens.append(_Token("NAME", m.group(), i))
            i = m.end()
            continue
        raise ExprSyntaxError(f"unexpected character {ch!r}", i)
    tokens.append(_Token("EOF", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, variables: tuple[str, ...]):
        self.tokens = _tokenize(text)
        self.variables = variables
        self.i = 0

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind: str, what: str) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            raise ExprSyntaxError(f"expected {what}", tok.pos)
        return self.advance()

    def expression(self):
        node = self.term()
        while self.peek().kind == "OP" and self.peek().text in "+-":
            op = self.advance().text
            node = _BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek().kind == "OP" and self.peek().text in "*/":
            op = self.advance().text
            node = _BinOp(op, node, self.unary())
        return node

    def unary(self):
        tok = self.peek()
        if tok.kind == "OP" and tok.text == "-":
            self.advance()
            return _Neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        tok = self.peek()
        if tok.kind == "OP" and tok.text == "^":
            self.advance()
            return _BinOp("^", base, self.unary())
        return base

    def atom(self):
        tok = self.peek()
        if tok.kind == "NUM":
            self.advance()
            return _Num(float(tok.text))
        if tok.kind == "NAME":
            self.advance()
            name = tok.text
            if self.peek().kind == "LPAREN":
                if name not in FUNCTIONS:
                    raise ExprSyntaxError(f"unknown function {name!r}", tok.pos)
                self.advance()
                arg = self.expression()
                self.expect("RPAREN", "')'")
                return _Call(name, arg)
            if name in FUNCTIONS:
                raise ExprSyntaxError(
                    f"function {name!r} needs an argument list", tok.pos
                )
            if name not in self.variables:
                raise ExprSyntaxError(f"undeclared variable {name!r}", tok.pos)
            return _Var(name)
        if tok.kind == "LPAREN":
            self.advance()
            node = self.expression()
            self.expect("RPAREN", "')'")
            return node
        raise ExprSyntaxError("expected a value", tok.pos)


# -- printing -----------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


def _print(node, parent_prec: int = 0) -> str:
    if isinstance(node, _Num):
        s = repr(node.value)
        return s if node.value >= 0 else f"({s})"
    if isinstance(node, _Var):
        return node.name
    if isinstance(node, _Neg):
        inner = _print(node.arg, _PREC["neg"])
        s = f"-{inner}"
        return f"({s})" if parent_prec > _PREC["neg"] else s
    if isinstance(node, _Call):
        return f"{node.fn}({_print(node.arg)})"
    if isinstance(node, _BinOp):
        prec = _PREC[node.op]
        if node.op == "^":
            # right-associative, and the right side may be a unary chain
            s = f"{_print(node.left, prec + 1)}^{_print(node.right, prec)}"
        else:
            s = f"{_print(node.left, prec)} {node.op} {_print(node.right, prec + 1)}"
        return f"({s})" if parent_prec > prec else s
    raise TypeError(f"unknown node {node!r}")


# -- evaluation ---------------------------------------------------------


def _add(a: Number, b: Number) -> Number:
    if isinstance(a, Dual) or isinstance(b, Dual):
        a = a if isinstance(a, Dual) else Dual(a, 0.0)
        b = b if isinstance(b, Dual) else Dual(b, 0.0)
        return Dual(a.value + b.value, a.deriv + b.deriv)
    return a + b


def _sub(a: Number, b: Number) -> Number:
    if isinstance(a, Dual) or isinstance(b, Dual):
        a = a if isinstance(a, Dual) else Dual(a, 0.0)
        b = b if isinstance(b, Dual) else Dual(b, 0.0)
        return Dual(a.value - b.value, a.deriv - b.deriv)
    return a - b


def _mul(a: Number, b: Number) -> Number:
    if isinstance(a, Dual) or isinstance(b, Dual):
        a = a if isinstance(a, Dual) else Dual(a, 0.0)
        b = b if isinstance(b, Dual) else Dual(b, 0.0)
        return Dual(a.value * b.value, a.deriv * b.value + a.value * b.deriv)
    return a * b


def _neg(a: Number) -> Number:
    if isinstance(a, Dual):
        return Dual(-a.value, -a.deriv)
    return -a


def _div(a: Number, b: Number, where: str) -> Number:
    if _val(b) == 0.0:
        raise ExprDomainError("division by zero", where)
    if isinstance(a, Dual) or isinstance(b, Dual):
        a = a if isinstance(a, Dual) else Dual(a, 0.0)
        b = b if isinstance(b, Dual) else Dual(b, 0.0)
        v = a.value / b.value
        return Dual(v, (a.deriv - v * b.deriv) / b.value)
    return a / b


def _pow(a: Number, b: Number, where: str) -> Number:
    """Power with integer exponents done by repeated multiplication.

    Integer exponents keep negative bases meaningful (even powers of
    negative numbers); everything else goes through exp(b log a).
    """
    bv = _val(b)
    b_is_const = not isinstance(b, Dual) or b.deriv == 0.0
    if b_is_const and float(bv).is_integer():
        k = int(bv)
        av = _val(a)
        if av == 0.0 and k < 0:
            raise ExprDomainError("zero raised to a negative power", where)
        if not isinstance(a, Dual):
            return float(av**k)
        if k == 0:
            return Dual(1.0, 0.0)
        return Dual(float(av**k), k * float(av ** (k - 1)) * a.deriv)
    av = _val(a)
    if av < 0.0 or (av == 0.0 and bv <= 0.0):
        raise ExprDomainError(
            "non-integer power of a non-positive base", where
        )
    if av == 0.0:
        # bv > 0 here; derivative of x^b at 0 is 0 for b > 1, else unbounded
        if isinstance(a, Dual) and a.deriv != 0.0 and bv <= 1.0:
            raise ExprDomainError("non-differentiable power at zero base", where)
        return Dual(0.0, 0.0) if isinstance(a, Dual) or isinstance(b, Dual) else 0.0
    v = math.exp(bv * math.log(av))
    if not (isinstance(a, Dual) or isinstance(b, Dual)):
        return v
    a = a if isinstance(a, Dual) else Dual(a, 0.0)
    b = b if isinstance(b, Dual) else Dual(b, 0.0)
    dv = v * (b.deriv * math.log(a.value) + b.value * a.deriv / a.value)
    return Dual(v, dv)


def _call(fn: str, x: Number, where: str) -> Number:
    xv = _val(x)
    if fn == "sin":
        v, d = math.sin(xv), math.cos(xv)
    elif fn == "cos":
        v, d = math.cos(xv), -math.sin(xv)
    elif fn == "exp":
        v = math.exp(xv)
        d = v
    elif fn == "log":
        if xv <= 0.0:
            raise ExprDomainError("log of a non-positive value", where)
        v, d = math.log(xv), 1.0 / xv
    elif fn == "sqrt":
        if xv < 0.0:
            raise ExprDomainError("sqrt of a negative value", where)
        if xv == 0.0:
            if isinstance(x, Dual) and x.deriv != 0.0:
                raise ExprDomainError("sqrt not differentiable at zero", where)
            v, d = 0.0, 0.0
        else:
            v = math.sqrt(xv)
            d = 0.5 / v
    else:  # pragma: no cover - parser only emits known functions
        raise ExprError(f"unknown function {fn!r}")
    if isinstance(x, Dual):
        return Dual(v, d * x.deriv)
    return v


def _eval(node, env: Mapping[str, Number]) -> Number:
    if isinstance(node, _Num):
        return node.value
    if isinstance(node, _Var):
        return env[node.name]
    if isinstance(node, _Neg):
        return _neg(_eval(node.arg, env))
    if isinstance(node, _Call):
        return _call(node.fn, _eval(node.arg, env), _print(node))
    op = node.op
    a = _eval(node.left, env)
    b = _eval(node.right, env)
    if op == "+":
        return _add(a, b)
    if op == "-":
        return _sub(a, b)
    if op == "*":
        return _mul(a, b)
    if op == "/":
        return _div(a, b, _print(node))
    return _pow(a, b, _print(node))


@dataclass(frozen=True)
class Expr:
    """A parsed expression and the variable names it may reference.

    Immutable; evaluation is a pure function of the environment.
    """

    root: object
    variables: tuple[str, ...]

    def _check_env(self, env: Mapping[str, float]) -> None:
        missing = [v for v in self.variables if v not in env]
        if missing:
            raise ExprError(f"environment is missing variables {missing}")

    def evaluate(self, env: Mapping[str, float]) -> float:
        self._check_env(env)
        return float(_val(_eval(self.root, env)))

    def directional(
        self, env: Mapping[str, float], seed: Mapping[str, float]
    ) -> tuple[float, float]:
        """Value and directional derivative along the given seed vector."""
        self._check_env(env)
        missing = [v for v in self.variables if v not in seed]
        if missing:
            raise ExprError(f"seed is missing variables {missing}")
        dual_env = {
            name: Dual(float(env[name]), float(seed[name]))
            for name in self.variables
        }
        out = _eval(self.root, dual_env)
        if isinstance(out, Dual):
            return out.value, out.deriv
        return float(out), 0.0

    def partial(self, var: str, env: Mapping[str, float]) -> float:
        """Partial derivative with respect to one declared variable."""
        if var not in self.variables:
            raise ExprError(f"{var!r} is not a declared variable")
        seed = {name: (1.0 if name == var else 0.0) for name in self.variables}
        return self.directional(env, seed)[1]

    def __str__(self) -> str:
        return _print(self.root)


def parse(text: str, variables: Iterable[str] = ()) -> Expr:
    """Parse ``text`` against the declared variable names."""
    names = tuple(variables)
    for name in names:
        if name in FUNCTIONS:
            raise ExprError(f"variable name {name!r} collides with a function")
    if not text or not text.strip():
        raise ExprSyntaxError("empty expression", 0)
    parser = _Parser(text, names)
    root = parser.expression()
    tok = parser.peek()
    if tok.kind != "EOF":
        raise ExprSyntaxError(f"unexpected {tok.text!r}", tok.pos)
    return Expr(root, names)

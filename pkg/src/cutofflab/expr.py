"""Tiny arithmetic expressions over the family index n.

Family parameters like c_n = 1/(n*sqrt(ln n)) arrive on the command line
as text. The grammar is deliberately small: integer literals, the variable
n, + - * /, unary minus, ln and sqrt (parentheses optional around a simple
argument, so "ln n" works), pow(x, y), and grouping parentheses.
"""

from __future__ import annotations

import math
import re

from .errors import ParameterOutOfRange

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_]+)|([()+\-*/,]))")

_FUNCTIONS = {"ln": math.log, "sqrt": math.sqrt}


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            bad = text[pos:].strip()
            raise ParameterOutOfRange(f"cannot tokenize expression near {bad!r}")
        pos = m.end()
        if m.group(1):
            tokens.append(("int", int(m.group(1))))
        elif m.group(2):
            tokens.append(("name", m.group(2)))
        elif m.group(3):
            tokens.append(("op", m.group(3)))
    tokens.append(("end", ""))
    return tokens


class _Parser:
    """Recursive descent over: expr > term > factor > primary."""

    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def take(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_op(self, op: str):
        kind, val = self.take()
        if kind != "op" or val != op:
            raise ParameterOutOfRange(
                f"expected {op!r} in expression {self.text!r}, got {val!r}")

    def parse(self):
        node = self.expr()
        if self.peek()[0] != "end":
            raise ParameterOutOfRange(
                f"trailing input in expression {self.text!r}")
        return node

    def expr(self):
        node = self.term()
        while self.peek() == ("op", "+") or self.peek() == ("op", "-"):
            op = self.take()[1]
            rhs = self.term()
            node = (lambda a, b, neg: (lambda n: a(n) - b(n)) if neg
                    else (lambda n: a(n) + b(n)))(node, rhs, op == "-")
        return node

    def term(self):
        node = self.factor()
        while self.peek() == ("op", "*") or self.peek() == ("op", "/"):
            op = self.take()[1]
            rhs = self.factor()
            if op == "*":
                node = (lambda a, b: lambda n: a(n) * b(n))(node, rhs)
            else:
                node = (lambda a, b: lambda n: _safe_div(a(n), b(n)))(node, rhs)
        return node

    def factor(self):
        if self.peek() == ("op", "-"):
            self.take()
            inner = self.factor()
            return lambda n: -inner(n)
        return self.primary()

    def primary(self):
        kind, val = self.take()
        if kind == "int":
            return lambda n, v=float(val): v
        if kind == "name":
            if val == "n":
                return lambda n: float(n)
            if val in _FUNCTIONS:
                fn = _FUNCTIONS[val]
                arg = self.primary()  # binds tightly: "ln n*2" is (ln n)*2
                return lambda n: _safe_call(fn, val, arg(n))
            if val == "pow":
                self.expect_op("(")
                base = self.expr()
                self.expect_op(",")
                expo = self.expr()
                self.expect_op(")")
                return lambda n: float(base(n)) ** float(expo(n))
            raise ParameterOutOfRange(
                f"unknown name {val!r} in expression {self.text!r}; "
                "only n, ln, sqrt, pow are available")
        if (kind, val) == ("op", "("):
            node = self.expr()
            self.expect_op(")")
            return node
        raise ParameterOutOfRange(
            f"unexpected {val!r} in expression {self.text!r}")


def _safe_div(a: float, b: float) -> float:
    if b == 0.0:
        raise ParameterOutOfRange("division by zero while evaluating expression")
    return a / b


def _safe_call(fn, name: str, x: float) -> float:
    try:
        return fn(x)
    except ValueError:
        raise ParameterOutOfRange(f"{name}({x:g}) is outside the domain") from None


def parse_expression(text: str):
    """Compile the expression to a callable n -> float."""
    if not text or not text.strip():
        raise ParameterOutOfRange("empty expression")
    return _Parser(text).parse()

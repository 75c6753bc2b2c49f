"""Expression language for matrix entries.

Grammar::

    expr   := term (('+'|'-') term)*
    term   := ['-'] factor (('*'|'/') factor)*
    factor := atom ('^' INT)?
    atom   := NUMBER | 'i' | IDENT | '(' expr ')' | FUNC '(' expr ')'

Evaluation is vectorised: identifiers bind to numpy arrays that broadcast
against each other, so one call evaluates an entry at many parameter points.
"""

import re
from dataclasses import dataclass

import numpy as np

from .errors import DSLSyntaxError, UnknownIdentifier

FUNCTIONS = {
    "exp": np.exp,
    "sqrt": lambda v: np.sqrt(v + 0j),
    "sin": np.sin,
    "cos": np.cos,
    "conj": np.conj,
    "re": lambda v: np.real(v) + 0j,
    "im": lambda v: np.imag(v) + 0j,
    "abs": lambda v: np.abs(v) + 0j,
}
RESERVED = set(FUNCTIONS) | {"i"}


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Imag:
    pass


@dataclass(frozen=True)
class Name:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: object


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Pow:
    base: object
    exponent: int


@dataclass(frozen=True)
class Call:
    func: str
    arg: object


_TOKEN = re.compile(
    r"(?P<ws>\s+)"
    r"|(?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^()])"
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


def tokenize(text, where=None):
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise DSLSyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1, where)
        kind = m.lastgroup
        if kind == "ws":
            chunk = m.group()
            if "\n" in chunk:
                line += chunk.count("\n")
                line_start = pos + chunk.rfind("\n") + 1
        else:
            tokens.append(Token(kind, m.group(), line, pos - line_start + 1))
        pos = m.end()
    tokens.append(Token("end", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text, where):
        self.where = where
        self.tokens = tokenize(text, where)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def fail(self, msg, tok=None):
        tok = tok or self.peek()
        raise DSLSyntaxError(msg, tok.line, tok.column, self.where)

    def expect(self, text):
        tok = self.peek()
        if tok.text != text or tok.kind == "end":
            self.fail(f"expected {text!r}, found {tok.text or 'end of input'!r}")
        return self.take()

    def parse(self):
        node = self.expr()
        if self.peek().kind != "end":
            self.fail(f"unexpected {self.peek().text!r}")
        return node

    def expr(self):
        node = self.term()
        while self.peek().text in ("+", "-"):
            op = self.take().text
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        if self.peek().text == "-":
            self.take()
            node = Neg(self.factor())
        else:
            node = self.factor()
        while self.peek().text in ("*", "/"):
            op = self.take().text
            node = BinOp(op, node, self.factor())
        return node

    def factor(self):
        node = self.atom()
        if self.peek().text == "^":
            self.take()
            tok = self.peek()
            if tok.kind != "num" or not tok.text.isdigit():
                self.fail("exponent must be a non-negative integer literal")
            self.take()
            node = Pow(node, int(tok.text))
        return node

    def atom(self):
        tok = self.peek()
        if tok.kind == "num":
            self.take()
            return Num(float(tok.text))
        if tok.kind == "ident":
            self.take()
            if self.peek().text == "(":
                if tok.text not in FUNCTIONS:
                    raise UnknownIdentifier(f"unknown function {tok.text!r}")
                self.take()
                arg = self.expr()
                self.expect(")")
                return Call(tok.text, arg)
            if tok.text in FUNCTIONS:
                self.fail(f"function {tok.text!r} needs an argument in parentheses")
            if tok.text == "i":
                return Imag()
            return Name(tok.text)
        if tok.text == "(":
            self.take()
            node = self.expr()
            self.expect(")")
            return node
        self.fail(f"unexpected {tok.text or 'end of input'!r}")


def parse(text, where=None):
    return _Parser(text, where).parse()


def names(node):
    """Identifiers referenced by an expression."""
    if isinstance(node, Name):
        return {node.name}
    if isinstance(node, (Neg,)):
        return names(node.operand)
    if isinstance(node, BinOp):
        return names(node.left) | names(node.right)
    if isinstance(node, Pow):
        return names(node.base)
    if isinstance(node, Call):
        return names(node.arg)
    return set()


def _atomic(node):
    return isinstance(node, (Num, Imag, Name, Call))


def to_text(node):
    """Print an expression so that parsing the result gives back the same tree."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Imag):
        return "i"
    if isinstance(node, Name):
        return node.name
    if isinstance(node, Call):
        return f"{node.func}({to_text(node.arg)})"
    if isinstance(node, Pow):
        base = to_text(node.base) if _atomic(node.base) else f"({to_text(node.base)})"
        return f"{base}^{node.exponent}"
    if isinstance(node, Neg):
        inner = to_text(node.operand)
        if not (_atomic(node.operand) or isinstance(node.operand, Pow)):
            inner = f"({inner})"
        return f"(-{inner})"
    if isinstance(node, BinOp):
        return f"({to_text(node.left)} {node.op} {to_text(node.right)})"
    raise TypeError(f"not an expression node: {node!r}")


def evaluate(node, env):
    if isinstance(node, Num):
        return np.complex128(node.value)
    if isinstance(node, Imag):
        return np.complex128(1j)
    if isinstance(node, Name):
        try:
            return env[node.name]
        except KeyError:
            raise UnknownIdentifier(f"unknown identifier {node.name!r}") from None
    if isinstance(node, Neg):
        # 0 - v rather than -v keeps +0 imaginary parts, so sqrt(-4) stays on the principal branch
        return 0 - evaluate(node.operand, env)
    if isinstance(node, BinOp):
        a = evaluate(node.left, env)
        b = evaluate(node.right, env)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        return a / b
    if isinstance(node, Pow):
        base = evaluate(node.base, env)
        out = np.ones_like(base)
        for _ in range(node.exponent):
            out = out * base
        return out
    if isinstance(node, Call):
        return FUNCTIONS[node.func](evaluate(node.arg, env))
    raise TypeError(f"not an expression node: {node!r}")

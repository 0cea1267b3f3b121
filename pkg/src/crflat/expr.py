"""Graphing-function expressions: parsing, printing and evaluation over jets.

Grammar (precedence climbing, ``^`` right-associative)::

    expr   := term   { ("+" | "-") term }
    term   := factor { ("*" | "/") factor }
    factor := "-" factor | power
    power  := atom [ "^" factor ]
    atom   := number | "i" | "pi" | ident | ident "(" expr ")" | "(" expr ")"

The exponent of ``^`` must be free of variables.  Integer exponents are
always allowed; a non-integer exponent needs a base on the principal branch
(positive for real jets), which is checked when evaluating.
"""

import cmath
import math
import re
from dataclasses import dataclass, field

from . import jet as _jet
from .errors import (BranchCutViolation, DivisionBySingularJet, DomainMix,
                     ExprSyntaxError, JetError, UnknownFunction,
                     UnknownVariable)

DOMAIN_VARIABLES = {
    "tube": ("t1", "t2"),
    "rigid": ("z1", "z1b", "z2", "z2b"),
    "profile": ("v",),
    "ode": ("x",),
}
FUNCTIONS = ("exp", "log", "sin", "cos", "tan", "sqrt")
_CONJUGATE_NAME = {"z1": "z1b", "z1b": "z1", "z2": "z2b", "z2b": "z2"}


# -- AST ----------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: complex
    symbol: str = None  # "pi" or "i" when written symbolically
    pos: int = field(default=None, compare=False)


@dataclass(frozen=True)
class Var:
    name: str
    pos: int = field(default=None, compare=False)


@dataclass(frozen=True)
class Neg:
    child: object
    pos: int = field(default=None, compare=False)


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object
    pos: int = field(default=None, compare=False)


@dataclass(frozen=True)
class Call:
    func: str
    arg: object
    pos: int = field(default=None, compare=False)


def children(node):
    if isinstance(node, Neg):
        return (node.child,)
    if isinstance(node, BinOp):
        return (node.left, node.right)
    if isinstance(node, Call):
        return (node.arg,)
    return ()


def walk(node):
    yield node
    for c in children(node):
        yield from walk(c)


def count_nodes(node):
    return sum(1 for _ in walk(node))


def variables(node):
    return {n.name for n in walk(node) if isinstance(n, Var)}


# -- tokenizer / parser -------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^()])
""", re.VERBOSE)


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, text, pos = self.take()
        if text != value:
            found = "end of input" if kind == "end" else repr(text)
            raise ExprSyntaxError(f"expected {value!r}, found {found}", pos)

    def parse(self):
        node = self.expr()
        kind, text, pos = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected {text!r}", pos)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            _, op, pos = self.take()
            node = BinOp(op, node, self.term(), pos)
        return node

    def term(self):
        node = self.factor()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            _, op, pos = self.take()
            node = BinOp(op, node, self.factor(), pos)
        return node

    def factor(self):
        kind, text, pos = self.peek()
        if kind == "op" and text == "-":
            self.take()
            return Neg(self.factor(), pos)
        return self.power()

    def power(self):
        base = self.atom()
        kind, text, pos = self.peek()
        if kind == "op" and text == "^":
            self.take()
            return BinOp("^", base, self.factor(), pos)
        return base

    def atom(self):
        kind, text, pos = self.take()
        if kind == "num":
            return Num(float(text), None, pos)
        if kind == "ident":
            if text == "i":
                return Num(1j, "i", pos)
            if text == "pi":
                return Num(math.pi, "pi", pos)
            nxt = self.peek()
            if nxt[0] == "op" and nxt[1] == "(":
                if text not in FUNCTIONS:
                    raise UnknownFunction(f"unknown function {text!r}", pos)
                self.take()
                arg = self.expr()
                self.expect(")")
                return Call(text, arg, pos)
            if text in FUNCTIONS:
                raise ExprSyntaxError(f"function {text!r} needs an argument", pos)
            return Var(text, pos)
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else repr(text)
        raise ExprSyntaxError(f"expected a number, name or '(', found {found}", pos)


def _validate(node, kind):
    allowed = DOMAIN_VARIABLES[kind]
    for n in walk(node):
        if isinstance(n, Var) and n.name not in allowed:
            if any(n.name in vs for vs in DOMAIN_VARIABLES.values()):
                raise DomainMix(f"variable {n.name!r} does not belong to the {kind} domain", n.pos)
            raise UnknownVariable(f"unknown variable {n.name!r}", n.pos)
        if isinstance(n, Num) and isinstance(n.value, complex) and kind != "rigid":
            raise DomainMix(f"complex literal not allowed in the {kind} domain", n.pos)
        if isinstance(n, BinOp) and n.op == "^":
            if variables(n.right):
                raise ExprSyntaxError("exponent must not contain variables", n.right.pos)
            e = eval_scalar(n.right, {})
            if isinstance(e, complex):
                raise ExprSyntaxError("exponent must be real", n.right.pos)


def parse(text, kind="tube"):
    """Parse ``text`` into an AST over the variables of domain ``kind``."""
    if kind not in DOMAIN_VARIABLES:
        raise ValueError(f"unknown domain kind {kind!r}")
    if not text or not text.strip():
        raise ExprSyntaxError("empty expression", 0)
    node = _Parser(text).parse()
    _validate(node, kind)
    return node


def to_text(node):
    """Fully parenthesised text that parses back to an equal AST."""
    if isinstance(node, Num):
        if node.symbol:
            return node.symbol
        v = node.value
        if isinstance(v, complex):
            return f"({v.real!r}+{v.imag!r}*i)"
        return repr(float(v)) if v >= 0 else f"(-{-float(v)!r})"
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        return f"(-{to_text(node.child)})"
    if isinstance(node, BinOp):
        return f"({to_text(node.left)}{node.op}{to_text(node.right)})"
    if isinstance(node, Call):
        return f"{node.func}({to_text(node.arg)})"
    raise TypeError(f"not an expression node: {node!r}")


# -- AST transforms -----------------------------------------------------------

def substitute(node, mapping):
    """Replace variables by sub-ASTs (``mapping``: name -> AST)."""
    if isinstance(node, Var):
        return mapping.get(node.name, node)
    if isinstance(node, Neg):
        return Neg(substitute(node.child, mapping), node.pos)
    if isinstance(node, BinOp):
        return BinOp(node.op, substitute(node.left, mapping),
                     substitute(node.right, mapping), node.pos)
    if isinstance(node, Call):
        return Call(node.func, substitute(node.arg, mapping), node.pos)
    return node


def conjugate(node):
    """AST of the complex conjugate: swaps z <-> zb and conjugates literals."""
    if isinstance(node, Var):
        return Var(_CONJUGATE_NAME.get(node.name, node.name), node.pos)
    if isinstance(node, Num):
        if isinstance(node.value, complex):
            if node.symbol == "i":
                return Neg(node, node.pos)
            return Num(node.value.conjugate(), None, node.pos)
        return node
    if isinstance(node, Neg):
        return Neg(conjugate(node.child), node.pos)
    if isinstance(node, BinOp):
        return BinOp(node.op, conjugate(node.left), conjugate(node.right), node.pos)
    if isinstance(node, Call):
        return Call(node.func, conjugate(node.arg), node.pos)
    raise TypeError(f"not an expression node: {node!r}")


def tube_to_rigid(rho):
    """F = rho(z1 + z1b, z2 + z2b) / 2 for a tube graphing function rho."""
    t1 = BinOp("+", Var("z1"), Var("z1b"))
    t2 = BinOp("+", Var("z2"), Var("z2b"))
    return BinOp("/", substitute(rho, {"t1": t1, "t2": t2}), Num(2.0))


# -- evaluation ---------------------------------------------------------------

@dataclass(frozen=True)
class EvalDomain:
    """Where to evaluate: tube (t1, t2), rigid (z1, z2), profile (v,) or ode (x,).

    For rigid points only (z1, z2) is given; z1b and z2b are seeded with the
    conjugates.
    """

    kind: str
    point: tuple

    def seed_values(self):
        if self.kind == "rigid":
            z1, z2 = (complex(z) for z in self.point)
            return (z1, z1.conjugate(), z2, z2.conjugate())
        return tuple(float(x) for x in self.point)

    def jet_kind(self):
        return "complex" if self.kind == "rigid" else "real"


def _is_integral(e):
    return not isinstance(e, complex) and float(e).is_integer()


def _scalar_func(name, x, lib):
    if lib is not None:
        return getattr(lib, name)(x)
    if isinstance(x, complex):
        if name in ("log", "sqrt") and abs(x.imag) <= _jet.BRANCH_CUT_TOL \
                and x.real <= _jet.BRANCH_CUT_TOL:
            raise BranchCutViolation(f"{name} argument {x!r} lies on the branch cut")
        return getattr(cmath, name)(x)
    if name in ("log", "sqrt") and not x > 0:
        raise BranchCutViolation(f"{name} needs a positive argument, got {x!r}")
    return getattr(math, name)(x)


def _scalar_pow(base, e, lib):
    if _is_integral(e):
        n = int(e)
        if n < 0 and base == 0:
            raise DivisionBySingularJet("zero raised to a negative power")
        return base ** n
    if lib is None:
        if isinstance(base, complex):
            if abs(base.imag) <= _jet.BRANCH_CUT_TOL and base.real <= _jet.BRANCH_CUT_TOL:
                raise BranchCutViolation(f"non-integer power of {base!r}")
        elif not base > 0:
            raise BranchCutViolation(f"non-integer power of non-positive {base!r}")
    return base ** e


def _evaluate(node, env, lib):
    try:
        if isinstance(node, Num):
            if lib is not None and node.symbol == "pi":
                return lib.pi
            v = node.value
            return v if isinstance(v, complex) else float(v)
        if isinstance(node, Var):
            return env[node.name]
        if isinstance(node, Neg):
            return -_evaluate(node.child, env, lib)
        if isinstance(node, BinOp):
            a = _evaluate(node.left, env, lib)
            if node.op == "^":
                e = _evaluate(node.right, {}, None)
                if isinstance(a, _jet.Jet):
                    return a.pow_int(int(e)) if _is_integral(e) else a.pow_real(float(e))
                return _scalar_pow(a, e, lib)
            b = _evaluate(node.right, env, lib)
            if node.op == "+":
                return a + b
            if node.op == "-":
                return a - b
            if node.op == "*":
                return a * b
            if not isinstance(b, _jet.Jet) and b == 0:
                raise DivisionBySingularJet("division by zero")
            return a / b
        if isinstance(node, Call):
            x = _evaluate(node.arg, env, lib)
            if isinstance(x, _jet.Jet):
                return getattr(x, node.func)()
            return _scalar_func(node.func, x, lib)
    except JetError as exc:
        if exc.position is None:
            exc.position = node.pos
        raise
    raise TypeError(f"not an expression node: {node!r}")


def eval_scalar(node, values, lib=None):
    """Direct scalar evaluation (``values``: name -> number).

    ``lib`` may supply alternative elementary functions (any object with
    ``exp``, ``log``, ..., ``pi`` attributes, e.g. ``mpmath``).
    """
    return _evaluate(node, values, lib)


def eval_env(node, env, like=None):
    """Evaluate with variables bound to jets (or scalars).

    If the expression does not depend on any bound jet, the scalar result is
    promoted to a constant jet shaped like ``like``.
    """
    out = _evaluate(node, env, None)
    if not isinstance(out, _jet.Jet):
        if like is None:
            return out
        out = _jet.constant(out, like.order, like.nvars, like.point,
                            kind="complex" if (like.kind == "complex" or isinstance(out, complex)) else "real")
    return out


def eval_jet(node, dom, order):
    """Jet of the expression at ``dom.point`` to total order ``order``."""
    vals = dom.seed_values()
    seeds = _jet.seed_all(vals, order, dom.jet_kind())
    env = dict(zip(DOMAIN_VARIABLES[dom.kind], seeds))
    return eval_env(node, env, like=seeds[0])

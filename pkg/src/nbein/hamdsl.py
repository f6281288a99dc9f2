"""Text format for Hamiltonian families and their assembly into matrices.

A family is a sum of terms, each a real coefficient expression in the
parameters times an operator monomial in ``q``, ``p`` and ``id``::

    0.5*q^2 + Y*sym(q*p) + 0.5*Z*p^2 + W*q   # generalised oscillator

Coefficients are differentiated symbolically, so ``dH/dlambda_i`` is built from
the same monomial matrices as ``H`` itself.
"""

import math
import re
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import (
    DimensionTooSmall,
    DomainViolation,
    DSLSyntaxError,
    NotHermitian,
    SymArityError,
    UnknownSymbol,
)
from .fock import Atom, Power, Product, Sym, build_monomial
from .linalg import hermiticity_residual

OPERATOR_NAMES = frozenset({"q", "p", "id"})
RESERVED = OPERATOR_NAMES | {"sym", "sqrt", "hbar"}
HERMITIAN_RTOL = 1e-12

# ---------------------------------------------------------------------------
# coefficient expressions


class CoeffExpr:
    """Base class of the real coefficient AST."""

    precedence = 5

    def __str__(self):
        return self.unparse()

    def wrap(self, min_prec):
        s = self.unparse()
        return f"({s})" if self.precedence < min_prec else s

    def symbols(self):
        return set()


@dataclass(frozen=True)
class Num(CoeffExpr):
    value: float

    @property
    def precedence(self):
        return 3 if self.value < 0 else 5

    def evaluate(self, env):
        return self.value

    def diff(self, name):
        return Num(0.0)

    def unparse(self):
        return format(self.value, ".17g")


@dataclass(frozen=True)
class Symbol(CoeffExpr):
    name: str

    def evaluate(self, env):
        return env[self.name]

    def diff(self, name):
        return Num(1.0 if name == self.name else 0.0)

    def unparse(self):
        return self.name

    def symbols(self):
        return {self.name}


@dataclass(frozen=True)
class Neg(CoeffExpr):
    arg: CoeffExpr
    precedence = 3

    def evaluate(self, env):
        return -self.arg.evaluate(env)

    def diff(self, name):
        return neg(self.arg.diff(name))

    def unparse(self):
        return "-" + self.arg.wrap(4)

    def symbols(self):
        return self.arg.symbols()


@dataclass(frozen=True)
class BinOp(CoeffExpr):
    op: str
    left: CoeffExpr
    right: CoeffExpr

    @property
    def precedence(self):
        return 1 if self.op in "+-" else 2

    def evaluate(self, env):
        a = self.left.evaluate(env)
        b = self.right.evaluate(env)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        if b == 0.0:
            raise DomainViolation(f"division by zero in {self.unparse()}")
        return a / b

    def diff(self, name):
        a, b = self.left, self.right
        da, db = a.diff(name), b.diff(name)
        if self.op == "+":
            return add(da, db)
        if self.op == "-":
            return sub(da, db)
        if self.op == "*":
            return add(mul(da, b), mul(a, db))
        # quotient rule
        return div(sub(mul(da, b), mul(a, db)), power(b, 2))

    def unparse(self):
        p = self.precedence
        # right operand of - and / binds tighter to keep the tree shape
        right_prec = p + 1 if self.op in "-/" else p
        return f"{self.left.wrap(p)}{_pad(self.op)}{self.right.wrap(right_prec)}"

    def symbols(self):
        return self.left.symbols() | self.right.symbols()


def _pad(op):
    return f" {op} " if op in "+-" else op


@dataclass(frozen=True)
class Pow(CoeffExpr):
    base: CoeffExpr
    exponent: int
    precedence = 4

    def evaluate(self, env):
        return self.base.evaluate(env) ** self.exponent

    def diff(self, name):
        db = self.base.diff(name)
        return mul(mul(Num(float(self.exponent)), power(self.base, self.exponent - 1)), db)

    def unparse(self):
        return f"{self.base.wrap(5)}^{self.exponent}"

    def symbols(self):
        return self.base.symbols()


@dataclass(frozen=True)
class Sqrt(CoeffExpr):
    arg: CoeffExpr

    def evaluate(self, env):
        x = self.arg.evaluate(env)
        if x < 0:
            raise DomainViolation(f"sqrt of negative value {x:g} in {self.unparse()}")
        return math.sqrt(x)

    def diff(self, name):
        return div(self.arg.diff(name), mul(Num(2.0), self))

    def unparse(self):
        return f"sqrt({self.arg.unparse()})"

    def symbols(self):
        return self.arg.symbols()


# smart constructors: constant folding plus zero/one elimination only

def _is(x, v):
    return isinstance(x, Num) and x.value == v


def neg(a):
    if isinstance(a, Num):
        return Num(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def add(a, b):
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value + b.value)
    if _is(a, 0.0):
        return b
    if _is(b, 0.0):
        return a
    return BinOp("+", a, b)


def sub(a, b):
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value - b.value)
    if _is(b, 0.0):
        return a
    if _is(a, 0.0):
        return neg(b)
    return BinOp("-", a, b)


def mul(a, b):
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value * b.value)
    if _is(a, 0.0) or _is(b, 0.0):
        return Num(0.0)
    if _is(a, 1.0):
        return b
    if _is(b, 1.0):
        return a
    return BinOp("*", a, b)


def div(a, b):
    if isinstance(a, Num) and isinstance(b, Num) and b.value != 0.0:
        return Num(a.value / b.value)
    if _is(a, 0.0):
        return Num(0.0)
    if _is(b, 1.0):
        return a
    return BinOp("/", a, b)


def power(a, k):
    if k == 0:
        return Num(1.0)
    if k == 1:
        return a
    if isinstance(a, Num):
        return Num(a.value**k)
    return Pow(a, k)


def differentiate_coeff(expr, param, parameter_names=None):
    """Exact symbolic derivative of ``expr`` with respect to ``param``."""
    if parameter_names is not None and param not in parameter_names:
        raise UnknownSymbol(f"cannot differentiate with respect to undeclared parameter {param!r}")
    return expr.diff(param)


# ---------------------------------------------------------------------------
# tokenizer and parser

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # "num", "ident", "op", "eof"
    text: str
    line: int
    col: int


def tokenize(text):
    tokens = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise DSLSyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind in ("num", "ident", "op"):
            tokens.append(Token(kind, m.group(), line, pos - line_start + 1))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text, symbols):
        self.tokens = tokenize(text)
        self.i = 0
        self.symbols = symbols  # allowed coefficient symbols

    @property
    def tok(self):
        return self.tokens[self.i]

    def advance(self):
        t = self.tokens[self.i]
        self.i += 1
        return t

    def error(self, msg, tok=None, cls=DSLSyntaxError):
        tok = tok or self.tok
        return cls(msg, tok.line, tok.col)

    def expect(self, text):
        if self.tok.text != text or self.tok.kind not in ("op",):
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        return self.advance()

    def is_op(self, text):
        return self.tok.kind == "op" and self.tok.text == text

    # family := term (('+'|'-') term)*
    def family(self):
        terms = [self.term(negate=False)]
        while self.is_op("+") or self.is_op("-"):
            negate = self.advance().text == "-"
            terms.append(self.term(negate))
        if self.tok.kind != "eof":
            raise self.error(f"unexpected {self.tok.text!r}")
        return terms

    def term(self, negate):
        while self.is_op("-") or self.is_op("+"):
            if self.advance().text == "-":
                negate = not negate
        coeff = None
        ops = []
        joiner = None
        while True:
            tok = self.tok
            if tok.kind == "ident" and tok.text in OPERATOR_NAMES | {"sym"}:
                if joiner == "/":
                    raise self.error("cannot divide by an operator", tok)
                ops.append(self.opfactor())
            elif tok.kind in ("num", "ident") or self.is_op("("):
                if ops:
                    raise self.error("coefficients must precede operators in a term", tok)
                f = self.scalar_power()
                if coeff is None:
                    coeff = f
                else:
                    coeff = BinOp(joiner, coeff, f)
            else:
                found = tok.text or "end of input"
                raise self.error(f"unexpected {found!r}", tok)
            if self.is_op("*") or self.is_op("/"):
                joiner = self.advance().text
                if joiner == "/" and ops:
                    raise self.error("cannot divide an operator product", self.tokens[self.i - 1])
                continue
            break
        if coeff is None:
            coeff = Num(1.0)
        if negate:
            coeff = neg(coeff) if isinstance(coeff, Num) else Neg(coeff)
        if not ops:
            op = Atom("id")
        elif len(ops) == 1:
            op = ops[0]
        else:
            op = Product(tuple(ops))
        return coeff, op

    # opfactor := q | p | id | sym(opfactor * opfactor) | opfactor ^ INT
    def opfactor(self):
        tok = self.advance()
        if tok.kind != "ident" or tok.text not in OPERATOR_NAMES | {"sym"}:
            raise self.error(f"expected an operator, found {tok.text!r}", tok)
        if tok.text == "sym":
            self.expect("(")
            factors = [self.opfactor()]
            while self.is_op("*"):
                self.advance()
                factors.append(self.opfactor())
            self.expect(")")
            if len(factors) != 2:
                raise self.error(
                    f"sym() takes exactly two factors, got {len(factors)}", tok, SymArityError
                )
            f = Sym(tuple(factors))
        else:
            f = Atom(tok.text)
        while self.is_op("^"):
            self.advance()
            f = Power(f, self.integer())
        return f

    def integer(self):
        tok = self.advance()
        if tok.kind != "num" or not tok.text.isdigit():
            raise self.error(f"expected a non-negative integer exponent, found {tok.text!r}", tok)
        return int(tok.text)

    # scalar grammar used inside coefficients
    def expr(self):
        node = self.mterm()
        while self.is_op("+") or self.is_op("-"):
            op = self.advance().text
            node = BinOp(op, node, self.mterm())
        return node

    def mterm(self):
        node = self.unary()
        while self.is_op("*") or self.is_op("/"):
            op = self.advance().text
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        if self.is_op("-"):
            self.advance()
            return Neg(self.unary())
        return self.scalar_power()

    def scalar_power(self):
        node = self.atom()
        while self.is_op("^"):
            self.advance()
            node = Pow(node, self.integer())
        return node

    def atom(self):
        tok = self.tok
        if tok.kind == "num":
            self.advance()
            return Num(float(tok.text))
        if tok.kind == "ident":
            if tok.text == "sqrt":
                self.advance()
                self.expect("(")
                inner = self.expr()
                self.expect(")")
                return Sqrt(inner)
            if tok.text in OPERATOR_NAMES or tok.text == "sym":
                raise self.error(f"operator {tok.text!r} inside a coefficient expression", tok)
            if tok.text not in self.symbols:
                raise self.error(f"unknown symbol {tok.text!r}", tok, UnknownSymbol)
            self.advance()
            return Symbol(tok.text)
        if self.is_op("("):
            self.advance()
            inner = self.expr()
            self.expect(")")
            return inner
        found = tok.text or "end of input"
        raise self.error(f"unexpected {found!r}", tok)


def _check_names(parameter_names):
    names = tuple(parameter_names)
    for n in names:
        if not re.fullmatch(r"[A-Za-z_][A-Za-z_0-9]*", n):
            raise ValueError(f"invalid parameter name {n!r}")
        if n in RESERVED:
            raise ValueError(f"parameter name {n!r} is reserved")
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate parameter names in {names}")
    return names


def parse_coeff(text, parameter_names):
    """Parse a standalone real expression (constraints, gauge phases)."""
    names = _check_names(parameter_names)
    p = _Parser(text, set(names) | {"hbar"})
    node = p.expr()
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.tok.text!r}")
    return node


# ---------------------------------------------------------------------------
# family spec


@dataclass(frozen=True)
class Term:
    coeff: CoeffExpr
    op: object  # fock descriptor

    def unparse(self):
        c = self.coeff.wrap(2)
        return f"{c}*{self.op}"


@dataclass(frozen=True)
class FamilySpec:
    parameter_names: tuple
    hbar: float
    terms: tuple
    constraints: tuple = ()
    name: str = field(default="custom", compare=False)

    @cached_property
    def derivative_terms(self):
        """Per parameter, the terms whose differentiated coefficient is nonzero."""
        out = []
        for pname in self.parameter_names:
            d = []
            for t in self.terms:
                dc = t.coeff.diff(pname)
                if not _is(dc, 0.0):
                    d.append(Term(dc, t.op))
            out.append(tuple(d))
        return tuple(out)

    @property
    def max_degree(self):
        return max((t.op.degree for t in self.terms), default=0)

    def unparse(self):
        return " + ".join(t.unparse() for t in self.terms)

    def point(self, lam):
        """Normalise a parameter point (mapping or sequence) to a float tuple."""
        if isinstance(lam, dict):
            missing = [n for n in self.parameter_names if n not in lam]
            extra = [k for k in lam if k not in self.parameter_names]
            if missing or extra:
                raise ValueError(f"parameter point mismatch: missing {missing}, unknown {extra}")
            vals = [lam[n] for n in self.parameter_names]
        else:
            vals = list(lam)
            if len(vals) != len(self.parameter_names):
                raise ValueError(
                    f"expected {len(self.parameter_names)} parameter values, got {len(vals)}"
                )
        return tuple(float(v) for v in vals)

    def env(self, lam):
        env = dict(zip(self.parameter_names, self.point(lam)))
        env["hbar"] = self.hbar
        return env

    def check_domain(self, lam):
        env = self.env(lam)
        for c in self.constraints:
            v = c.evaluate(env)
            if not v > 0:
                raise DomainViolation(f"constraint {c.unparse()} > 0 violated ({v:g}) at {self.point(lam)}")

    def with_hbar(self, hbar):
        return FamilySpec(self.parameter_names, float(hbar), self.terms, self.constraints, self.name)


def parse_family(text, parameter_names, hbar=1.0, constraints=(), name="custom"):
    """Parse family text into a :class:`FamilySpec`."""
    if not text or not text.strip():
        raise DSLSyntaxError("empty family text", 1, 1)
    if hbar <= 0:
        raise ValueError(f"hbar must be positive, got {hbar}")
    names = _check_names(parameter_names)
    raw_terms = _Parser(text, set(names) | {"hbar"}).family()
    terms = tuple(Term(c, op) for c, op in raw_terms)
    cons = tuple(parse_coeff(c, names) if isinstance(c, str) else c for c in constraints)
    return FamilySpec(names, float(hbar), terms, cons, name)


BUILTIN_FAMILIES = {
    "example1": {
        "text": "0.5*q^2 + 0.5*Z*p^2 + W*q",
        "params": ("W", "Z"),
        "constraints": ("Z",),
        "dressing": None,
    },
    "example2": {
        "text": "0.5*q^2 + Y*sym(q*p) + 0.5*Z*p^2 + W*q",
        "params": ("W", "Y", "Z"),
        "constraints": ("Z", "Z - Y^2"),
        # the coordinate-representation gauge: exp(-i Y q^2 / (2 Z hbar)) times a real state
        "dressing": ("Y/(2*Z*hbar)", "q^2"),
    },
}


def builtin_family(name, hbar=1.0):
    try:
        b = BUILTIN_FAMILIES[name]
    except KeyError:
        raise ValueError(f"unknown built-in family {name!r}; choose from {sorted(BUILTIN_FAMILIES)}") from None
    return parse_family(b["text"], b["params"], hbar=hbar, constraints=b["constraints"], name=name)


# ---------------------------------------------------------------------------
# assembly


def _coefficient(expr, env):
    try:
        v = float(expr.evaluate(env))
    except (ZeroDivisionError, OverflowError) as exc:
        raise DomainViolation(f"cannot evaluate {expr.unparse()}: {exc}") from None
    if not math.isfinite(v):
        raise DomainViolation(f"coefficient {expr.unparse()} is not finite")
    return v


def _sum_terms(terms, env, trunc_dim, hbar):
    out = np.zeros((trunc_dim, trunc_dim), dtype=complex)
    for t in terms:
        c = _coefficient(t.coeff, env)
        if c != 0.0:
            out += c * build_monomial(t.op, trunc_dim, hbar).matrix
    return out


def assemble(spec, lam, trunc_dim):
    """``H(lambda)`` and ``[dH/dlambda_i]`` on a ``trunc_dim`` Fock basis."""
    if trunc_dim < spec.max_degree + 2:
        raise DimensionTooSmall(
            f"trunc_dim {trunc_dim} too small for monomial degree {spec.max_degree}"
        )
    spec.check_domain(lam)
    env = spec.env(lam)
    h = _sum_terms(spec.terms, env, trunc_dim, spec.hbar)
    dh = [_sum_terms(dt, env, trunc_dim, spec.hbar) for dt in spec.derivative_terms]
    for label, m in [("H", h)] + [(f"dH/d{n}", x) for n, x in zip(spec.parameter_names, dh)]:
        res = hermiticity_residual(m)
        if res > HERMITIAN_RTOL:
            raise NotHermitian(f"{label} has Hermiticity residual {res:.3e}")
    return h, dh

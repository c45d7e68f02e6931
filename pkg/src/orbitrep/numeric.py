"""Exact scalars for linear mod 1 dynamics.

Three kinds of value share one interface:

* :class:`Rational` -- a reduced fraction,
* :class:`QuadSurd` -- ``a + b*sqrt(d)`` with rational ``a``, ``b`` and a
  squarefree ``d >= 2``,
* :class:`Approx` -- a 256-bit binary float with an error radius.

Arithmetic between exact values of one field (Q, or a single Q(sqrt d)) stays
exact.  Mixing two different surd fields, or touching an :class:`Approx`,
degrades the result to :class:`Approx`.  Comparisons between approximate
values report :attr:`Ordering.INDETERMINATE` instead of guessing, and the
boolean operators raise :class:`~orbitrep.errors.ApproxIndeterminate` in that
case.
"""

from __future__ import annotations

import enum
import math
import re
from fractions import Fraction
from typing import Union

import gmpy2
from gmpy2 import mpq, mpz
from mpmath.ctx_mp import MPContext

from orbitrep.errors import (
    ApproxIndeterminate,
    DivisionByZero,
    DomainError,
    IndeterminateFloor,
    ScalarSyntaxError,
)

WORKING_PRECISION = 256
DEFAULT_EPSILON = mpq(1, 10**30)

_MPQ = type(mpq())
_MPZ = type(mpz())

MP = MPContext()
MP.prec = WORKING_PRECISION

# radius attached to exact values when they are forced into approximate mode
_EXACT_RADIUS = MP.mpf(2) ** (8 - WORKING_PRECISION)


class Ordering(enum.Enum):
    LESS = "less"
    EQUAL = "equal"
    GREATER = "greater"
    INDETERMINATE = "indeterminate"


def _squarefree_split(n: int) -> tuple[int, int]:
    """Return ``(s, m)`` with ``n == s*s*m`` and ``m`` squarefree."""
    if n <= 0:
        raise DomainError(f"sqrt argument must be positive, got {n}")
    s, m = 1, n
    p = 2
    while p * p <= m:
        while m % (p * p) == 0:
            m //= p * p
            s *= p
        p += 1
    return s, m


class Scalar:
    """Common base; use :func:`as_scalar` or :func:`parse_scalar` to build one."""

    __slots__ = ()

    is_exact = True
    field = 1  # 1 for Q, d for Q(sqrt d), None for approximate values

    # -- arithmetic --------------------------------------------------------
    def __add__(self, other):
        return _binary("add", self, other)

    def __radd__(self, other):
        return _binary("add", other, self)

    def __sub__(self, other):
        return _binary("sub", self, other)

    def __rsub__(self, other):
        return _binary("sub", other, self)

    def __mul__(self, other):
        return _binary("mul", self, other)

    def __rmul__(self, other):
        return _binary("mul", other, self)

    def __truediv__(self, other):
        return _binary("div", self, other)

    def __rtruediv__(self, other):
        return _binary("div", other, self)

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int):
            return NotImplemented
        if exponent < 0:
            return as_scalar(1) / (self ** (-exponent))
        result: Scalar = Rational(1)
        base: Scalar = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    # -- comparison --------------------------------------------------------
    def _decide(self, other) -> Ordering | None:
        try:
            other = as_scalar(other)
        except TypeError:
            return None
        return scalar_cmp(self, other)

    def __eq__(self, other):
        o = self._decide(other)
        if o is None:
            return NotImplemented
        if o is Ordering.INDETERMINATE:
            raise ApproxIndeterminate(f"cannot decide {self} == {other}")
        return o is Ordering.EQUAL

    def __ne__(self, other):
        eq = self.__eq__(other)
        return eq if eq is NotImplemented else not eq

    def _ordered(self, other, accept: tuple[Ordering, ...]):
        o = self._decide(other)
        if o is None:
            return NotImplemented
        if o is Ordering.INDETERMINATE:
            raise ApproxIndeterminate(f"cannot order {self} and {other}")
        return o in accept

    def __lt__(self, other):
        return self._ordered(other, (Ordering.LESS,))

    def __le__(self, other):
        return self._ordered(other, (Ordering.LESS, Ordering.EQUAL))

    def __gt__(self, other):
        return self._ordered(other, (Ordering.GREATER,))

    def __ge__(self, other):
        return self._ordered(other, (Ordering.GREATER, Ordering.EQUAL))

    # -- conversions -------------------------------------------------------
    def __float__(self) -> float:
        return float(self.to_mpf())

    def __str__(self) -> str:
        return render(self)

    def __floor__(self) -> int:
        return scalar_floor(self)

    def to_mpf(self):
        raise NotImplementedError

    def sign(self) -> int:
        raise NotImplementedError


class Rational(Scalar):
    __slots__ = ("value",)

    def __init__(self, value):
        object.__setattr__(self, "value", mpq(value))

    def __setattr__(self, name, value):
        raise AttributeError("Rational is immutable")

    @property
    def numerator(self) -> int:
        return int(self.value.numerator)

    @property
    def denominator(self) -> int:
        return int(self.value.denominator)

    def __neg__(self):
        return Rational(-self.value)

    def __hash__(self):
        return hash(self.value)

    def __repr__(self):
        return f"Rational({self.value.numerator}, {self.value.denominator})"

    def to_mpf(self):
        return MP.mpf(int(self.value.numerator)) / int(self.value.denominator)

    def sign(self) -> int:
        return (self.value > 0) - (self.value < 0)

    def __reduce__(self):
        return (Rational, (self.value,))


class QuadSurd(Scalar):
    """``a + b*sqrt(d)``; construct through :func:`surd` to get normalisation."""

    __slots__ = ("a", "b", "d")

    def __init__(self, a, b, d: int):
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "d", d)

    def __setattr__(self, name, value):
        raise AttributeError("QuadSurd is immutable")

    @property
    def field(self) -> int:  # type: ignore[override]
        return self.d

    def __neg__(self):
        return QuadSurd(-self.a, -self.b, self.d)

    def __hash__(self):
        return hash((self.a, self.b, self.d))

    def __repr__(self):
        return f"QuadSurd(a={self.a}, b={self.b}, d={self.d})"

    def conjugate(self) -> QuadSurd:
        return QuadSurd(self.a, -self.b, self.d)

    def to_mpf(self):
        return (MP.mpf(int(self.a.numerator)) / int(self.a.denominator)
                + MP.mpf(int(self.b.numerator)) / int(self.b.denominator) * MP.sqrt(self.d))

    def sign(self) -> int:
        return _surd_sign(self.a, self.b, self.d)

    def __reduce__(self):
        return (QuadSurd, (self.a, self.b, self.d))


class Approx(Scalar):
    """A high-precision float ``value`` known only up to ``epsilon``."""

    __slots__ = ("value", "epsilon")
    is_exact = False
    field = None
    __hash__ = None  # equality is tri-state, so no hashing

    def __init__(self, value, epsilon=DEFAULT_EPSILON):
        object.__setattr__(self, "value", MP.mpf(value))
        if isinstance(epsilon, (Fraction, _MPQ)):
            eps = MP.mpf(int(epsilon.numerator)) / int(epsilon.denominator)
        else:
            eps = MP.mpf(epsilon)
        if eps <= 0:
            raise DomainError("epsilon must be positive")
        object.__setattr__(self, "epsilon", eps)

    def __setattr__(self, name, value):
        raise AttributeError("Approx is immutable")

    def __neg__(self):
        return Approx(-self.value, self.epsilon)

    def __repr__(self):
        return f"Approx({MP.nstr(self.value, 20)}, {MP.nstr(self.epsilon, 3)})"

    def to_mpf(self):
        return self.value

    def sign(self) -> int:
        if abs(self.value) <= self.epsilon:
            raise ApproxIndeterminate(f"sign of {self!r} is undecided")
        return 1 if self.value > 0 else -1


ScalarLike = Union[Scalar, int, Fraction]


def as_scalar(x) -> Scalar:
    if isinstance(x, Scalar):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a scalar")
    if isinstance(x, (int, Fraction, _MPQ, _MPZ)):
        return Rational(x)
    raise TypeError(f"cannot interpret {type(x).__name__} as an exact scalar")


def rational(p, q: int = 1) -> Rational:
    if q == 0:
        raise DivisionByZero("zero denominator")
    return Rational(mpq(p) / q)


def surd(a, b, d: int) -> Scalar:
    """Normalised ``a + b*sqrt(d)``; collapses to :class:`Rational` when possible."""
    a, b = mpq(a), mpq(b)
    if b == 0:
        return Rational(a)
    s, m = _squarefree_split(d)
    if m == 1:
        return Rational(a + b * s)
    return QuadSurd(a, b * s, m)


def approx(value, epsilon=DEFAULT_EPSILON) -> Approx:
    return Approx(value, epsilon)


def _surd_sign(a, b, d: int) -> int:
    sa = (a > 0) - (a < 0)
    sb = (b > 0) - (b < 0)
    if sb == 0:
        return sa
    if sa == 0 or sa == sb:
        return sb
    # opposite signs; a^2 == b^2 d is impossible for squarefree d >= 2
    return sa if a * a > b * b * d else sb


_Q0 = mpq(0)


def _parts(x: Scalar):
    if isinstance(x, Rational):
        return x.value, _Q0
    return x.a, x.b  # type: ignore[attr-defined]


def _to_approx(x: Scalar) -> Approx:
    if isinstance(x, Approx):
        return x
    return Approx(x.to_mpf(), _EXACT_RADIUS)


def _approx_binary(op: str, x: Scalar, y: Scalar) -> Approx:
    ax, ay = _to_approx(x), _to_approx(y)
    u, v, eu, ev = ax.value, ay.value, ax.epsilon, ay.epsilon
    if op == "add":
        return Approx(u + v, eu + ev)
    if op == "sub":
        return Approx(u - v, eu + ev)
    if op == "mul":
        return Approx(u * v, abs(u) * ev + abs(v) * eu + eu * ev)
    if abs(v) <= ev:
        raise ApproxIndeterminate("divisor is indistinguishable from zero")
    q = u / v
    return Approx(q, (eu + abs(q) * ev) / (abs(v) - ev))


def _binary(op: str, x, y) -> Scalar:
    if type(x) is QuadSurd:
        ty = type(y)
        if ty is Rational and op in ("add", "sub", "mul"):
            v = y.value
            if op == "add":
                return QuadSurd(x.a + v, x.b, x.d)
            if op == "sub":
                return QuadSurd(x.a - v, x.b, x.d)
            return surd(x.a * v, x.b * v, x.d) if v == 0 else QuadSurd(x.a * v, x.b * v, x.d)
    try:
        x, y = as_scalar(x), as_scalar(y)
    except TypeError:
        return NotImplemented
    if isinstance(x, Rational) and isinstance(y, Rational):
        u, v = x.value, y.value
        if op == "add":
            return Rational(u + v)
        if op == "sub":
            return Rational(u - v)
        if op == "mul":
            return Rational(u * v)
        if v == 0:
            raise DivisionByZero("division by zero")
        return Rational(u / v)
    fx, fy = x.field, y.field
    if fx is None or fy is None or (fx != 1 and fy != 1 and fx != fy):
        if op == "div" and y.is_exact and y.sign() == 0:
            raise DivisionByZero("division by zero")
        return _approx_binary(op, x, y)
    d = fx if fx != 1 else fy
    a1, b1 = _parts(x)
    a2, b2 = _parts(y)
    if op == "add":
        return surd(a1 + a2, b1 + b2, d)
    if op == "sub":
        return surd(a1 - a2, b1 - b2, d)
    if op == "mul":
        return surd(a1 * a2 + b1 * b2 * d, a1 * b2 + a2 * b1, d)
    norm = a2 * a2 - b2 * b2 * d
    if norm == 0:  # only when a2 == b2 == 0
        raise DivisionByZero("division by zero")
    return surd((a1 * a2 - b1 * b2 * d) / norm, (a2 * b1 - a1 * b2) / norm, d)


# -- floor, frac, mod 1 ------------------------------------------------------

def scalar_floor(x: ScalarLike) -> int:
    """Largest integer not above ``x``.

    Surds are bracketed with integer square roots, so no float is involved.
    Raises :class:`IndeterminateFloor` for approximate values within epsilon
    of an integer.
    """
    x = as_scalar(x)
    if isinstance(x, Rational):
        return int(math.floor(x.value))
    if isinstance(x, QuadSurd):
        c = gmpy2.lcm(x.a.denominator, x.b.denominator)
        big_a = x.a.numerator * (c // x.a.denominator)
        big_b = x.b.numerator * (c // x.b.denominator)
        s = gmpy2.isqrt(big_b * big_b * x.d)
        # big_b*sqrt(d) is irrational and lies strictly inside (s, s+1) or (-s-1, -s)
        floor_num = big_a + s if big_b > 0 else big_a - s - 1
        return int(floor_num // c)
    v, eps = x.value, x.epsilon
    fl = MP.floor(v)
    if v - fl <= eps or fl + 1 - v <= eps:
        raise IndeterminateFloor(f"{x!r} is within epsilon of an integer")
    return int(fl)


def frac(x: ScalarLike) -> Scalar:
    x = as_scalar(x)
    return x - scalar_floor(x)


mod1 = frac


# -- comparison ---------------------------------------------------------------

_SIGN_TO_ORDER = {-1: Ordering.LESS, 0: Ordering.EQUAL, 1: Ordering.GREATER}


def scalar_cmp(x: ScalarLike, y: ScalarLike) -> Ordering:
    if type(x) is QuadSurd and type(y) is QuadSurd and x.d == y.d:
        return _SIGN_TO_ORDER[_surd_sign(x.a - y.a, x.b - y.b, x.d)]
    x, y = as_scalar(x), as_scalar(y)
    if isinstance(x, Rational) and isinstance(y, Rational):
        u, v = x.value, y.value
        return Ordering.LESS if u < v else Ordering.GREATER if u > v else Ordering.EQUAL
    fx, fy = x.field, y.field
    if fx is not None and fy is not None and (fx == 1 or fy == 1 or fx == fy):
        a1, b1 = _parts(x)
        a2, b2 = _parts(y)
        s = _surd_sign(a1 - a2, b1 - b2, fx if fx != 1 else fy)
        return Ordering.LESS if s < 0 else Ordering.GREATER if s > 0 else Ordering.EQUAL
    ax, ay = _to_approx(x), _to_approx(y)
    diff = ax.value - ay.value
    if abs(diff) <= ax.epsilon + ay.epsilon:
        return Ordering.INDETERMINATE
    return Ordering.LESS if diff < 0 else Ordering.GREATER


def scalar_arith(op: str, a: ScalarLike, b: ScalarLike | None = None) -> Scalar | int:
    """Functional entry point: ``op`` is one of add, sub, mul, div, floor, frac, mod1."""
    if op in ("floor", "frac", "mod1"):
        if b is not None:
            raise TypeError(f"{op} is unary")
        return scalar_floor(a) if op == "floor" else frac(a)
    if op not in ("add", "sub", "mul", "div"):
        raise ValueError(f"unknown operation {op!r}")
    if b is None:
        raise TypeError(f"{op} needs two operands")
    return _binary(op, as_scalar(a), as_scalar(b))


def same_field(*values: Scalar) -> int | None:
    """The common exact field of ``values`` (1 for Q), or None if there is none."""
    d = 1
    for v in values:
        f = as_scalar(v).field
        if f is None:
            return None
        if f != 1:
            if d != 1 and d != f:
                return None
            d = f
    return d


# -- rendering ------------------------------------------------------------------

def render(x: ScalarLike) -> str:
    """Canonical text: ``p``, ``p/q``, ``(a+b*sqrt(d))/c`` or a decimal string."""
    x = as_scalar(x)
    if isinstance(x, Rational):
        v = x.value
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    if isinstance(x, QuadSurd):
        c = int(gmpy2.lcm(x.a.denominator, x.b.denominator))
        big_a = int(x.a.numerator * (c // x.a.denominator))
        big_b = int(x.b.numerator * (c // x.b.denominator))
        sign = "+" if big_b > 0 else "-"
        return f"({big_a}{sign}{abs(big_b)}*sqrt({x.d}))/{c}"
    return MP.nstr(x.value, 40, min_fixed=-math.inf, max_fixed=math.inf)


# -- parsing ---------------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<dec>\d+\.\d*(?:[eE][-+]?\d+)?|\.\d+(?:[eE][-+]?\d+)?|\d+[eE][-+]?\d+)"
    r"|(?P<int>\d+)|(?P<name>[A-Za-z_]+)|(?P<op>[-+*/()]))"
)


class _Parser:
    def __init__(self, text: str, epsilon):
        self.text = text
        self.epsilon = epsilon
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        stripped_end = len(text.rstrip())
        while pos < stripped_end:
            m = _TOKEN.match(text, pos)
            if m is None or m.end() == pos:
                raise ScalarSyntaxError("unexpected character", pos, "number, sqrt, operator or parenthesis")
            kind = m.lastgroup
            self.tokens.append((kind, m.group(kind), m.start(kind)))
            pos = m.end()
        self.tokens.append(("end", "", len(text)))
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, text, pos = self.take()
        if text != value:
            raise ScalarSyntaxError(f"unexpected {text or 'end of input'!r}", pos, repr(value))

    def parse(self) -> Scalar:
        if self.peek()[0] == "end":
            raise ScalarSyntaxError("empty expression", 0, "number")
        value = self.expr()
        kind, text, pos = self.peek()
        if kind != "end":
            raise ScalarSyntaxError(f"unexpected {text!r}", pos, "operator or end of input")
        return value

    def expr(self) -> Scalar:
        value = self.term()
        while self.peek()[1] in ("+", "-"):
            _, op, _ = self.take()
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self) -> Scalar:
        value = self.unary()
        while self.peek()[1] in ("*", "/"):
            _, op, pos = self.take()
            rhs = self.unary()
            if op == "*":
                value = value * rhs
            else:
                if rhs.is_exact and rhs.sign() == 0:
                    raise DomainError(f"division by zero at position {pos}")
                value = value / rhs
        return value

    def unary(self) -> Scalar:
        if self.peek()[1] == "-":
            self.take()
            return -self.unary()
        if self.peek()[1] == "+":
            self.take()
            return self.unary()
        return self.atom()

    def atom(self) -> Scalar:
        kind, text, pos = self.take()
        if kind == "int":
            return Rational(int(text))
        if kind == "dec":
            return Approx(MP.mpf(text), self.epsilon)
        if text == "(":
            value = self.expr()
            self.expect(")")
            return value
        if kind == "name":
            if text != "sqrt":
                raise ScalarSyntaxError(f"unknown name {text!r}", pos, "sqrt")
            self.expect("(")
            arg = self.expr()
            self.expect(")")
            return _sqrt(arg, pos)
        raise ScalarSyntaxError(f"unexpected {text or 'end of input'!r}", pos, "number, sqrt or '('")


def _sqrt(arg: Scalar, pos: int) -> Scalar:
    if isinstance(arg, Approx):
        if arg.value <= 0:
            raise DomainError(f"sqrt of non-positive value at position {pos}")
        return Approx(MP.sqrt(arg.value), arg.epsilon / MP.sqrt(arg.value))
    if not isinstance(arg, Rational):
        raise DomainError(f"nested radicals are not supported (position {pos})")
    if arg.value <= 0:
        raise DomainError(f"sqrt argument must be positive (position {pos})")
    p, q = arg.value.numerator, arg.value.denominator
    # sqrt(p/q) = sqrt(p*q)/q
    return surd(0, mpq(1, q), int(p * q))


def parse_scalar(text: str, epsilon=None) -> Scalar:
    """Parse an exact-scalar expression.

    Accepts integers, ``p/q``, decimal literals and ``sqrt(n)`` combined with
    ``+ - * /`` and parentheses, so ``"(-1+1*sqrt(2))/1"`` and ``"sqrt(2)-1"``
    both give the same :class:`QuadSurd`.  Decimal literals produce an
    :class:`Approx` with radius ``epsilon`` (default ``1e-30``).
    """
    if not isinstance(text, str):
        raise TypeError("expected a string")
    return _Parser(text, DEFAULT_EPSILON if epsilon is None else epsilon).parse()

"""Exact arithmetic in real multi-quadratic fields Q(sqrt(d1), ..., sqrt(dk)).

A :class:`QuadExt` is a finite sum ``sum(q_d * sqrt(d))`` with rational
coefficients ``q_d`` and distinct squarefree radicands ``d`` (``d = 1`` is
the rational part).  Because square roots of distinct squarefree integers
are linearly independent over Q, the sparse map ``d -> q_d`` is a canonical
form and equality is plain dictionary equality.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from functools import lru_cache

import mpmath

from .errors import (
    FactorizationCapacityError,
    InversionCapacityError,
    QuadFieldError,
    QuadParseError,
)

Rational = Fraction

TRIAL_DIVISION_LIMIT = 10**6
MAX_GENERATORS = 8


@lru_cache(maxsize=1)
def _small_primes(limit=TRIAL_DIVISION_LIMIT):
    sieve = bytearray([1]) * (limit + 1)
    sieve[0:2] = b"\x00\x00"
    for p in range(2, math.isqrt(limit) + 1):
        if sieve[p]:
            sieve[p * p :: p] = bytearray(len(range(p * p, limit + 1, p)))
    return [p for p in range(limit + 1) if sieve[p]]


@lru_cache(maxsize=4096)
def square_decompose(n: int) -> tuple[int, int]:
    """Return ``(s, d)`` with ``n == s*s*d`` and ``d`` squarefree.

    Trial division runs up to 10**6.  A leftover cofactor ``c`` with no prime
    factor below that bound is accepted if it is a perfect square, or if
    ``c < 10**18`` (then it has at most two prime factors, both larger than
    10**6, so it is squarefree unless it is a square).  Anything else raises
    :class:`FactorizationCapacityError`.
    """
    if n <= 0:
        raise ValueError("square_decompose needs a positive integer")
    s, d = 1, 1
    rest = n
    for p in _small_primes():
        if p * p > rest:
            break
        if rest % p:
            continue
        e = 0
        while rest % p == 0:
            rest //= p
            e += 1
        s *= p ** (e // 2)
        if e % 2:
            d *= p
    if rest > 1:
        root = math.isqrt(rest)
        if root * root == rest:
            s *= root
        elif rest < TRIAL_DIVISION_LIMIT**3:
            d *= rest
        else:
            raise FactorizationCapacityError(
                f"cannot certify squarefree part of {n}: cofactor {rest} "
                f"has no prime factor below {TRIAL_DIVISION_LIMIT}"
            )
    return s, d


def squarefree_part(n: int) -> int:
    return square_decompose(n)[1]


def _prime_factors(n: int) -> list[int]:
    """Factors of a squarefree radicand found by trial division.

    A cofactor above the trial bound is returned whole; it is prime or a
    product of two large primes, and :meth:`QuadExt.generators` splits such
    cofactors further by gcd against the other radicands.
    """
    out = []
    rest = n
    for p in _small_primes():
        if p * p > rest:
            break
        if rest % p == 0:
            out.append(p)
            rest //= p
    if rest > 1:
        out.append(rest)
    return out


def _coprime_basis(values):
    basis: set[int] = set()
    pending = list(values)
    while pending:
        x = pending.pop()
        if x == 1 or x in basis:
            continue
        for b in basis:
            g = math.gcd(x, b)
            if g > 1:
                basis.remove(b)
                pending.extend((g, b // g, x // g))
                break
        else:
            basis.add(x)
    return sorted(basis)


class QuadExt:
    """Immutable element of a real multi-quadratic field."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms=None):
        clean = {}
        if terms:
            for d, q in dict(terms).items():
                d = int(d)
                if d <= 0:
                    raise QuadFieldError(f"radicand must be positive, got {d}")
                q = Fraction(q)
                if q == 0:
                    continue
                s, sf = square_decompose(d)
                coeff = clean.get(sf, Fraction(0)) + q * s
                if coeff:
                    clean[sf] = coeff
                else:
                    clean.pop(sf, None)
        self._terms = dict(sorted(clean.items()))
        self._hash = None

    @classmethod
    def _from_clean(cls, terms: dict) -> QuadExt:
        # keys already squarefree: only drop zeros and sort
        obj = object.__new__(cls)
        obj._terms = {d: q for d, q in sorted(terms.items()) if q}
        obj._hash = None
        return obj

    # construction helpers -------------------------------------------------
    @classmethod
    def rational(cls, q) -> QuadExt:
        return cls({1: Fraction(q)})

    @classmethod
    def sqrt(cls, d: int) -> QuadExt:
        return cls({d: 1})

    @classmethod
    def coerce(cls, value) -> QuadExt:
        if isinstance(value, QuadExt):
            return value
        if isinstance(value, (int, Fraction)):
            return cls.rational(value)
        raise TypeError(f"cannot convert {type(value).__name__} to QuadExt exactly")

    # views ----------------------------------------------------------------
    @property
    def terms(self) -> dict[int, Fraction]:
        return dict(self._terms)

    @property
    def radicands(self) -> tuple[int, ...]:
        return tuple(self._terms)

    def coefficient(self, d: int) -> Fraction:
        return self._terms.get(d, Fraction(0))

    def is_rational(self) -> bool:
        return all(d == 1 for d in self._terms)

    def generators(self) -> list[int]:
        """Sorted pairwise-coprime generators (primes in practice) of the radicands."""
        factors = []
        for d in self._terms:
            if d > 1:
                factors.extend(_prime_factors(d))
        return _coprime_basis(factors)

    # arithmetic -----------------------------------------------------------
    def __add__(self, other):
        try:
            other = QuadExt.coerce(other)
        except TypeError:
            return NotImplemented
        out = dict(self._terms)
        for d, q in other._terms.items():
            out[d] = out[d] + q if d in out else q
        return QuadExt._from_clean(out)

    __radd__ = __add__

    def __neg__(self):
        return QuadExt._from_clean({d: -q for d, q in self._terms.items()})

    def __sub__(self, other):
        try:
            other = QuadExt.coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return QuadExt.coerce(other) - self

    def __mul__(self, other):
        try:
            other = QuadExt.coerce(other)
        except TypeError:
            return NotImplemented
        out: dict[int, Fraction] = {}
        for d1, q1 in self._terms.items():
            for d2, q2 in other._terms.items():
                g = math.gcd(d1, d2)
                # sqrt(d1)*sqrt(d2) = g*sqrt(d1*d2/g^2), and d1*d2/g^2 is squarefree
                d = (d1 // g) * (d2 // g)
                q = q1 * q2 * g if g > 1 else q1 * q2
                out[d] = out[d] + q if d in out else q
        return QuadExt._from_clean(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        try:
            other = QuadExt.coerce(other)
        except TypeError:
            return NotImplemented
        return self * other.invert()

    def __rtruediv__(self, other):
        return QuadExt.coerce(other) * self.invert()

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.invert() ** (-k)
        result, base = QuadExt.rational(1), self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def conjugate(self, p: int) -> QuadExt:
        """Apply the automorphism sqrt(p) -> -sqrt(p) for a prime generator p."""
        return QuadExt._from_clean({d: (-q if d % p == 0 else q) for d, q in self._terms.items()})

    def invert(self) -> QuadExt:
        """Multiplicative inverse by iterated conjugation.

        Each step multiplies by the conjugate flipping one prime generator;
        the running denominator loses that generator, so after all generators
        are eliminated it is rational.
        """
        if not self._terms:
            raise ZeroDivisionError("inverse of zero in QuadExt")
        primes = self.generators()
        if len(primes) > MAX_GENERATORS:
            raise InversionCapacityError(
                f"{len(primes)} prime generators exceed the cap of {MAX_GENERATORS}"
            )
        num = QuadExt.rational(1)
        den = self
        for p in primes:
            c = den.conjugate(p)
            num = num * c
            den = den * c
        if not den.is_rational():
            raise QuadFieldError("conjugation did not rationalize the denominator")
        r = den.coefficient(1)
        if r == 0:
            raise ZeroDivisionError("norm vanished; element is zero")
        return num * QuadExt.rational(1 / r)

    # comparisons ----------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = QuadExt.rational(other)
        if not isinstance(other, QuadExt):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(tuple(self._terms.items()))
        return self._hash

    def __bool__(self):
        return bool(self._terms)

    def sign(self) -> int:
        """Exact sign, decided by evaluation at increasing precision."""
        if not self._terms:
            return 0
        dps = 30
        while True:
            with mpmath.workdps(dps):
                v = self.to_mpf(dps)
                bound = mpmath.mpf(10) ** (-(dps - 5)) * (1 + self._magnitude())
                if abs(v) > bound:
                    return 1 if v > 0 else -1
            dps *= 2
            if dps > 10000:
                raise QuadFieldError("sign undecided; value indistinguishable from zero")

    def __lt__(self, other):
        return (self - QuadExt.coerce(other)).sign() < 0

    def __le__(self, other):
        return (self - QuadExt.coerce(other)).sign() <= 0

    def __gt__(self, other):
        return (self - QuadExt.coerce(other)).sign() > 0

    def __ge__(self, other):
        return (self - QuadExt.coerce(other)).sign() >= 0

    def __abs__(self):
        return -self if self.sign() < 0 else self

    # evaluation -----------------------------------------------------------
    def _magnitude(self) -> float:
        return sum(abs(float(q)) * math.sqrt(d) for d, q in self._terms.items())

    def to_mpf(self, dps: int = 50):
        with mpmath.workdps(dps + 10):
            total = mpmath.mpf(0)
            for d, q in self._terms.items():
                total += mpmath.mpf(q.numerator) / q.denominator * mpmath.sqrt(d)
        with mpmath.workdps(dps):
            return +total

    def __float__(self):
        return float(self.to_mpf(30))

    def eval(self, precision: float = 1e-12):
        """Numeric value within ``precision`` absolute error.

        A Python float is returned when double precision is enough for the
        requested error, otherwise an ``mpmath.mpf``.
        """
        if precision <= 0:
            raise ValueError("precision must be positive")
        mag = self._magnitude()
        need = math.ceil(-math.log10(precision)) + math.ceil(math.log10(1 + mag)) + 10
        value = self.to_mpf(max(need, 30))
        if precision >= 4 * 2.0**-52 * max(1.0, mag):
            return float(value)
        return value

    # text -----------------------------------------------------------------
    def __str__(self):
        return format_quad(self)

    def __repr__(self):
        return f"QuadExt({format_quad(self)!r})"


def eval_quad(a: QuadExt, precision: float = 1e-12):
    return a.eval(precision)


def sqrt_rational(q) -> QuadExt:
    """Exact square root of a non-negative rational as ``s*sqrt(d)``."""
    q = Fraction(q)
    if q < 0:
        raise ValueError(f"square root of negative rational {q}")
    if q == 0:
        return QuadExt()
    # sqrt(p/r) = sqrt(p*r)/r; decompose numerator and denominator separately
    sn, dn = square_decompose(q.numerator)
    sd, dd = square_decompose(q.denominator)
    g = math.gcd(dn, dd)
    # sqrt(dn/dd) = sqrt(dn*dd)/dd, and dn*dd/g^2 is squarefree
    d = (dn // g) * (dd // g)
    coeff = Fraction(sn, sd) * Fraction(g, dd)
    return QuadExt({d: coeff})


# ---------------------------------------------------------------------------
# literal grammar:
#   expr   := ('+'|'-')? term (('+'|'-') term)*
#   term   := factor (('*'|'/') factor)*
#   factor := integer | 'sqrt(' positive-integer ')' | '(' expr ')'

_TOKEN = re.compile(r"(?P<num>\d+)|(?P<sqrt>sqrt)|(?P<op>[-+*/()])")


def _tokenize(text):
    pos = 0
    tokens = []
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos == len(text):
            break
        m = _TOKEN.match(text, pos)
        if not m:
            raise QuadParseError("unexpected character", text, pos)
        tokens.append((m.lastgroup, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self, kind, value=None):
        tok = self.tokens[self.i]
        if tok[0] != kind or (value is not None and tok[1] != value):
            want = value or kind
            raise QuadParseError(f"expected {want!r}, found {tok[1] or 'end'!r}", self.text, tok[2])
        self.i += 1
        return tok

    def at_op(self, ops):
        kind, value, _ = self.peek()
        return kind == "op" and value in ops

    def factor(self):
        kind, value, pos = self.peek()
        if kind == "num":
            self.i += 1
            return QuadExt.rational(int(value))
        if kind == "sqrt":
            self.i += 1
            self.take("op", "(")
            tok = self.take("num")
            if int(tok[1]) <= 0:
                raise QuadParseError("expected a positive integer", self.text, tok[2])
            self.take("op", ")")
            return QuadExt.sqrt(int(tok[1]))
        if kind == "op" and value == "(":
            self.i += 1
            inner = self.expr()
            self.take("op", ")")
            return inner
        raise QuadParseError(f"expected a number, sqrt(...) or '(', found {value or 'end'!r}",
                             self.text, pos)

    def term(self):
        value = self.factor()
        while self.at_op("*/"):
            op, pos = self.peek()[1], self.peek()[2]
            self.i += 1
            rhs = self.factor()
            if op == "*":
                value = value * rhs
            elif not rhs:
                raise QuadParseError("division by zero", self.text, pos)
            else:
                value = value / rhs
        return value

    def expr(self):
        sign = 1
        if self.at_op("+-"):
            sign = -1 if self.peek()[1] == "-" else 1
            self.i += 1
        total = self.term() * sign
        while self.at_op("+-"):
            op = self.peek()[1]
            self.i += 1
            t = self.term()
            total = total + t if op == "+" else total - t
        return total

    def parse(self):
        value = self.expr()
        kind, tok, pos = self.peek()
        if kind != "end":
            raise QuadParseError(f"unexpected token {tok!r}", self.text, pos)
        return value


def parse_quad(text: str) -> QuadExt:
    """Parse a literal such as ``"437/6500*sqrt(170) - 121/6500*sqrt(30)"``."""
    if not isinstance(text, str):
        raise TypeError("parse_quad expects a string")
    if not text.strip():
        raise QuadParseError("empty expression", text, 0)
    return _Parser(text).parse()


def _format_rational(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def format_quad(a: QuadExt) -> str:
    if not a._terms:
        return "0"
    parts = []
    for d, q in a._terms.items():
        mag = abs(q)
        if d == 1:
            body = _format_rational(mag)
        elif mag == 1:
            body = f"sqrt({d})"
        else:
            body = f"{_format_rational(mag)}*sqrt({d})"
        if not parts:
            parts.append(("-" if q < 0 else "") + body)
        else:
            parts.append(("- " if q < 0 else "+ ") + body)
    return " ".join(parts)

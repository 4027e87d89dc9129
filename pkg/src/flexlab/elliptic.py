"""Rational points on the real cubic ``y**2 = x*(x - b1)*(x - b)`` with ``0 < b1 < b``.

The point at infinity is the neutral element.  All arithmetic is exact over
``fractions.Fraction``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import CurveError


@dataclass(frozen=True)
class Curve:
    b_prime: Fraction
    b: Fraction

    def __post_init__(self):
        object.__setattr__(self, "b_prime", Fraction(self.b_prime))
        object.__setattr__(self, "b", Fraction(self.b))
        if not 0 < self.b_prime < self.b:
            raise CurveError(f"need 0 < b' < b, got b' = {self.b_prime}, b = {self.b}")

    def rhs(self, x: Fraction) -> Fraction:
        return x * (x - self.b_prime) * (x - self.b)

    # expanded form x^3 + a2 x^2 + a4 x
    @property
    def a2(self) -> Fraction:
        return -(self.b_prime + self.b)

    @property
    def a4(self) -> Fraction:
        return self.b_prime * self.b

    def __str__(self):
        return f"y^2 = x(x - {self.b_prime})(x - {self.b})"


@dataclass(frozen=True)
class CurvePoint:
    """Affine point ``(x, y)``, or the point at infinity when both are ``None``."""

    x: Fraction | None = None
    y: Fraction | None = None

    def __post_init__(self):
        if (self.x is None) != (self.y is None):
            raise CurveError("affine points need both coordinates")
        if self.x is not None:
            object.__setattr__(self, "x", Fraction(self.x))
            object.__setattr__(self, "y", Fraction(self.y))

    @property
    def is_infinity(self) -> bool:
        return self.x is None

    def __neg__(self):
        return neg(self)

    def __str__(self):
        if self.is_infinity:
            return "O"
        return f"({self.x}, {self.y})"


O = CurvePoint()


def on_curve(E: Curve, P: CurvePoint) -> bool:
    if P.is_infinity:
        return True
    return P.y * P.y == E.rhs(P.x)


def require_on_curve(E: Curve, P: CurvePoint, name: str = "point") -> None:
    if not on_curve(E, P):
        raise CurveError(f"{name} = {P} is not on {E}")


def neg(P: CurvePoint) -> CurvePoint:
    if P.is_infinity:
        return P
    return CurvePoint(P.x, -P.y)


def add(E: Curve, P: CurvePoint, Q: CurvePoint) -> CurvePoint:
    """Chord-and-tangent addition."""
    if P.is_infinity:
        return Q
    if Q.is_infinity:
        return P
    if P.x == Q.x:
        if P.y == -Q.y:
            # vertical chord, includes tangent at a 2-torsion point (y = 0)
            return O
        slope = (3 * P.x * P.x + 2 * E.a2 * P.x + E.a4) / (2 * P.y)
    else:
        slope = (Q.y - P.y) / (Q.x - P.x)
    x3 = slope * slope - E.a2 - P.x - Q.x
    y3 = slope * (P.x - x3) - P.y
    return CurvePoint(x3, y3)


def multiply(E: Curve, P: CurvePoint, k: int) -> CurvePoint:
    """``k*P`` by binary double-and-add; negative ``k`` negates first."""
    if k < 0:
        P, k = neg(P), -k
    result, base = O, P
    while k:
        if k & 1:
            result = add(E, result, base)
        base = add(E, base, base)
        k >>= 1
    return result


def combo(E: Curve, word: dict[str, int], basepoints: dict[str, CurvePoint]) -> CurvePoint:
    """Evaluate an integer word such as ``{"A": 1, "B": -1, "C": 1}`` (= A - B + C)."""
    for name, P in basepoints.items():
        require_on_curve(E, P, name)
    total = O
    for name, k in word.items():
        if name not in basepoints:
            raise KeyError(f"word refers to unknown basepoint {name!r}")
        if k:
            total = add(E, total, multiply(E, basepoints[name], int(k)))
    return total


def component(E: Curve, P: CurvePoint) -> str:
    """``"compact"`` for the oval 0 <= x <= b', ``"noncompact"`` for x >= b."""
    if P.is_infinity:
        return "noncompact"
    if 0 <= P.x <= E.b_prime:
        return "compact"
    if P.x >= E.b:
        return "noncompact"
    raise CurveError(f"{P} has x in (b', b) or x < 0; it cannot lie on {E}")

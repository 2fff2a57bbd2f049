"""Bit-vector circuits over BoolExpr, MSB-first, with constant folding.

Unsigned helpers (``ule``/``uge``/``eq``) serve domain constraints and the
formula frontend. ``Int`` carries a two's-complement vector together with the
static value interval, which is what the SMV compiler needs for arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .boolexpr import FALSE, TRUE, And, BoolExpr, Const, Iff, Not, Or, conj


def bnot(a: BoolExpr) -> BoolExpr:
    if isinstance(a, Const):
        return FALSE if a.value else TRUE
    if isinstance(a, Not):
        return a.arg
    return Not(a)


def band(a: BoolExpr, b: BoolExpr) -> BoolExpr:
    if a == FALSE or b == FALSE:
        return FALSE
    if a == TRUE:
        return b
    if b == TRUE:
        return a
    return And(a, b)


def bor(a: BoolExpr, b: BoolExpr) -> BoolExpr:
    if a == TRUE or b == TRUE:
        return TRUE
    if a == FALSE:
        return b
    if b == FALSE:
        return a
    return Or(a, b)


def biff(a: BoolExpr, b: BoolExpr) -> BoolExpr:
    if isinstance(a, Const):
        return b if a.value else bnot(b)
    if isinstance(b, Const):
        return a if b.value else bnot(a)
    return Iff(a, b)


def bxor(a: BoolExpr, b: BoolExpr) -> BoolExpr:
    return bnot(biff(a, b))


def const_vec(value: int, width: int) -> list[BoolExpr]:
    """Two's-complement constant (plain binary for non-negative values)."""
    return [TRUE if (value >> i) & 1 else FALSE for i in reversed(range(width))]


def zero_extend(vec: Sequence[BoolExpr], width: int) -> list[BoolExpr]:
    return [FALSE] * (width - len(vec)) + list(vec)


def sign_extend(vec: Sequence[BoolExpr], width: int) -> list[BoolExpr]:
    return [vec[0]] * (width - len(vec)) + list(vec)


def eq(a: Sequence[BoolExpr], b: Sequence[BoolExpr]) -> BoolExpr:
    """Bitwise equality; the narrower operand is zero-extended."""
    w = max(len(a), len(b))
    a, b = zero_extend(a, w), zero_extend(b, w)
    parts = [biff(x, y) for x, y in zip(a, b)]
    if any(p == FALSE for p in parts):
        return FALSE
    return conj(p for p in parts if p != TRUE)


def _ult_eq(a, b, strict: bool) -> BoolExpr:
    # scan from LSB: res(i) = (!a_i & b_i) | ((a_i <-> b_i) & res(i+1))
    acc = FALSE if strict else TRUE
    for x, y in zip(reversed(a), reversed(b)):
        acc = bor(band(bnot(x), y), band(biff(x, y), acc))
    return acc


def ult(a, b) -> BoolExpr:
    w = max(len(a), len(b))
    return _ult_eq(zero_extend(a, w), zero_extend(b, w), True)


def ule(a, b) -> BoolExpr:
    w = max(len(a), len(b))
    return _ult_eq(zero_extend(a, w), zero_extend(b, w), False)


def uge(a, b) -> BoolExpr:
    return ule(b, a)


def _width_for(lo: int, hi: int) -> int:
    """Two's-complement width able to hold every value in [lo, hi]."""
    w = 1
    while not (-(1 << (w - 1)) <= lo and hi <= (1 << (w - 1)) - 1):
        w += 1
    return w


@dataclass(frozen=True)
class Int:
    """Signed integer term: two's-complement bits plus the static value range."""

    bits: tuple[BoolExpr, ...]
    lo: int
    hi: int

    @classmethod
    def const(cls, value: int) -> "Int":
        w = _width_for(value, value)
        return cls(tuple(const_vec(value, w)), value, value)

    @classmethod
    def unsigned(cls, bits: Sequence[BoolExpr], lo: int, hi: int) -> "Int":
        return cls((FALSE, *bits), lo, hi)

    @property
    def width(self) -> int:
        return len(self.bits)

    def extended(self, width: int) -> list[BoolExpr]:
        return sign_extend(self.bits, width)

    def constant_value(self) -> int | None:
        return self.lo if self.lo == self.hi else None

    def __add__(self, other: "Int") -> "Int":
        lo, hi = self.lo + other.lo, self.hi + other.hi
        w = max(self.width, other.width, _width_for(lo, hi)) + 1
        return _trim(Int(tuple(_adder(self.extended(w), other.extended(w), FALSE)), lo, hi))

    def __neg__(self) -> "Int":
        w = self.width + 1
        inv = [bnot(b) for b in self.extended(w)]
        return _trim(Int(tuple(_adder(inv, const_vec(1, w), FALSE)), -self.hi, -self.lo))

    def __sub__(self, other: "Int") -> "Int":
        lo, hi = self.lo - other.hi, self.hi - other.lo
        w = max(self.width, other.width, _width_for(lo, hi)) + 1
        inv = [bnot(b) for b in other.extended(w)]
        return _trim(Int(tuple(_adder(self.extended(w), inv, TRUE)), lo, hi))


def _trim(term: Int) -> Int:
    w = _width_for(term.lo, term.hi)
    return Int(term.bits[len(term.bits) - w:], term.lo, term.hi)


def _adder(a: Sequence[BoolExpr], b: Sequence[BoolExpr], carry: BoolExpr) -> list[BoolExpr]:
    out = []
    for x, y in zip(reversed(a), reversed(b)):
        s = bxor(bxor(x, y), carry)
        carry = bor(band(x, y), band(carry, bxor(x, y)))
        out.append(s)
    return list(reversed(out))


def int_eq(a: Int, b: Int) -> BoolExpr:
    if a.hi < b.lo or b.hi < a.lo:
        return FALSE
    w = max(a.width, b.width)
    return eq(a.extended(w), b.extended(w))


def int_lt(a: Int, b: Int) -> BoolExpr:
    if a.hi < b.lo:
        return TRUE
    if a.lo >= b.hi:
        return FALSE
    w = max(a.width, b.width)
    # signed compare: flip sign bits, then unsigned
    x = a.extended(w)
    y = b.extended(w)
    x[0], y[0] = bnot(x[0]), bnot(y[0])
    return _ult_eq(x, y, True)


def int_le(a: Int, b: Int) -> BoolExpr:
    return bnot(int_lt(b, a))

"""Ordinal notations below epsilon_0 in Cantor normal form.

An :class:`Ordinal` is a finite tuple of ``(exponent, coefficient)`` pairs with
strictly decreasing exponents and positive coefficients; the empty tuple is 0.
Values are immutable and hashable, so structural equality coincides with
ordinal equality.

Text syntax::

    0 | w | w*2 | w^(w)+w*2+1 | w^(w^(2))*3

``format_ordinal(parse_ordinal(s)) == s`` for every canonical string ``s``.
"""

from __future__ import annotations

import enum
import re
from functools import lru_cache, total_ordering
from typing import Iterable, Tuple

__all__ = [
    "Ordinal",
    "Order",
    "OrdinalError",
    "ZERO",
    "ONE",
    "OMEGA",
    "compare",
    "add",
    "omega_power",
    "is_indecomposable",
    "is_limit",
    "is_successor",
    "fundamental_sequence",
    "interval_length",
    "mul_nat",
    "mul_omega",
    "nat",
    "depth",
    "parse_ordinal",
    "format_ordinal",
]


class OrdinalError(ValueError):
    pass


class Order(enum.IntEnum):
    LT = -1
    EQ = 0
    GT = 1


@total_ordering
class Ordinal:
    __slots__ = ("terms", "_hash")

    def __init__(self, terms: Iterable[Tuple["Ordinal", int]] = ()):
        terms = tuple(terms)
        for i, (e, c) in enumerate(terms):
            if not isinstance(e, Ordinal):
                raise TypeError(f"exponent must be an Ordinal, got {e!r}")
            if not isinstance(c, int) or c < 1:
                raise OrdinalError(f"coefficient must be a positive integer, got {c!r}")
            if i and compare(terms[i - 1][0], e) != Order.GT:
                raise OrdinalError("exponents must be strictly decreasing")
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "_hash", hash(terms))

    def __setattr__(self, name, value):
        raise AttributeError("Ordinal is immutable")

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        if isinstance(other, int) and not isinstance(other, bool):
            other = nat(other)
        if not isinstance(other, Ordinal):
            return NotImplemented
        return self._hash == other._hash and self.terms == other.terms

    def __lt__(self, other) -> bool:
        if isinstance(other, int) and not isinstance(other, bool):
            other = nat(other)
        if not isinstance(other, Ordinal):
            return NotImplemented
        return compare(self, other) == Order.LT

    def __add__(self, other):
        if isinstance(other, int) and not isinstance(other, bool):
            other = nat(other)
        if not isinstance(other, Ordinal):
            return NotImplemented
        return add(self, other)

    def __radd__(self, other):
        if isinstance(other, int) and not isinstance(other, bool):
            return add(nat(other), self)
        return NotImplemented

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __repr__(self) -> str:
        return f"Ordinal({format_ordinal(self)!r})"

    def __str__(self) -> str:
        return format_ordinal(self)

    def __reduce__(self):
        return (Ordinal, (self.terms,))

    @property
    def is_finite(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and not self.terms[0][0].terms)

    def to_int(self) -> int:
        if not self.is_finite:
            raise OrdinalError(f"{self} is not finite")
        return self.terms[0][1] if self.terms else 0

    @property
    def leading_exponent(self) -> "Ordinal":
        if not self.terms:
            raise OrdinalError("0 has no leading exponent")
        return self.terms[0][0]


ZERO = Ordinal()
ONE = Ordinal(((ZERO, 1),))
OMEGA = Ordinal(((ONE, 1),))


def nat(n: int) -> Ordinal:
    if n < 0:
        raise OrdinalError(f"negative ordinal {n}")
    return Ordinal(((ZERO, n),)) if n else ZERO


@lru_cache(maxsize=1 << 16)
def compare(a: Ordinal, b: Ordinal) -> Order:
    """Lexicographic comparison of Cantor normal forms."""
    if a is b:
        return Order.EQ
    for (ea, ca), (eb, cb) in zip(a.terms, b.terms):
        c = compare(ea, eb)
        if c != Order.EQ:
            return c
        if ca != cb:
            return Order.LT if ca < cb else Order.GT
    if len(a.terms) == len(b.terms):
        return Order.EQ
    return Order.LT if len(a.terms) < len(b.terms) else Order.GT


@lru_cache(maxsize=1 << 16)
def add(a: Ordinal, b: Ordinal) -> Ordinal:
    """Ordinal sum ``a + b``: terms of ``a`` below the leading exponent of ``b`` are absorbed."""
    if not b.terms:
        return a
    if not a.terms:
        return b
    e, c = b.terms[0]
    kept = []
    for ea, ca in a.terms:
        cmp = compare(ea, e)
        if cmp == Order.GT:
            kept.append((ea, ca))
        elif cmp == Order.EQ:
            return Ordinal(tuple(kept) + ((e, ca + c),) + b.terms[1:])
        else:
            break
    return Ordinal(tuple(kept) + b.terms)


def omega_power(a: Ordinal) -> Ordinal:
    return Ordinal(((a, 1),))


def is_indecomposable(a: Ordinal) -> bool:
    return len(a.terms) == 1 and a.terms[0][1] == 1


def is_successor(a: Ordinal) -> bool:
    return bool(a.terms) and not a.terms[-1][0].terms


def is_limit(a: Ordinal) -> bool:
    return bool(a.terms) and bool(a.terms[-1][0].terms)


def mul_nat(a: Ordinal, k: int) -> Ordinal:
    """``a * k`` for a natural number ``k``."""
    if k < 0:
        raise OrdinalError("negative multiplier")
    if k == 0 or not a.terms:
        return ZERO
    (e, c), rest = a.terms[0], a.terms[1:]
    return Ordinal(((e, c * k),) + rest)


def mul_omega(a: Ordinal) -> Ordinal:
    """``a * w``; zero stays zero."""
    if not a.terms:
        return ZERO
    return omega_power(add(a.terms[0][0], ONE))


def depth(a: Ordinal) -> int:
    """Exponent nesting depth: 0 for zero, 1 for positive naturals, 2 for w, ..."""
    if not a.terms:
        return 0
    return 1 + max(depth(e) for e, _ in a.terms)


def fundamental_sequence(a: Ordinal, n: int) -> Ordinal:
    """The n-th element of the standard cofinal sequence of the limit ``a``.

    ``(b + w^(g+1))[n] = b + w^g * (n+1)`` and ``(b + w^l)[n] = b + w^(l[n])``
    for limit ``l``.
    """
    if not is_limit(a):
        raise OrdinalError(f"{a} is not a limit ordinal")
    if n < 0:
        raise OrdinalError("index must be a natural number")
    *head, (e, c) = a.terms
    prefix = Ordinal(tuple(head) + (((e, c - 1),) if c > 1 else ()))
    if is_successor(e):
        below = Ordinal(e.terms[:-1] + (((ZERO, e.terms[-1][1] - 1),) if e.terms[-1][1] > 1 else ()))
        step = mul_nat(omega_power(below), n + 1)
    else:
        step = omega_power(fundamental_sequence(e, n))
    return add(prefix, step)


def interval_length(a: Ordinal, b: Ordinal) -> Ordinal:
    """The unique ``g`` with ``a + g == b``; requires ``a < b``."""
    if compare(a, b) != Order.LT:
        raise OrdinalError(f"interval_length needs a < b, got {a} >= {b}")
    for i, ((ea, ca), (eb, cb)) in enumerate(zip(a.terms, b.terms)):
        if ea == eb and ca == cb:
            continue
        if ea == eb:
            # ca < cb since a < b
            return Ordinal(((eb, cb - ca),) + b.terms[i + 1:])
        return Ordinal(b.terms[i:])
    return Ordinal(b.terms[len(a.terms):])


# -- text syntax -------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+)|(w)|(\^)|(\*)|(\+)|(\()|(\)))")


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, msg: str) -> OrdinalError:
        return OrdinalError(f"{msg} at column {self.pos + 1} in {self.text!r}")

    def peek(self) -> str:
        m = _TOKEN.match(self.text, self.pos)
        return m.group(0).strip() if m else ""

    def take(self, expected: str | None = None) -> str:
        m = _TOKEN.match(self.text, self.pos)
        if not m:
            raise self.error("unexpected character")
        tok = m.group(0).strip()
        if expected is not None and tok != expected and not (expected == "nat" and tok.isdigit()):
            raise self.error(f"expected {expected!r}, found {tok!r}")
        self.pos = m.end()
        return tok

    def parse(self) -> Ordinal:
        result = self.sum()
        if self.text[self.pos:].strip():
            raise self.error("trailing input")
        return result

    def sum(self) -> Ordinal:
        total = self.term()
        while self.peek() == "+":
            self.take("+")
            total = add(total, self.term())
        return total

    def term(self) -> Ordinal:
        tok = self.peek()
        if tok.isdigit() and tok:
            return nat(int(self.take()))
        if tok != "w":
            raise self.error("expected a natural number or 'w'")
        self.take("w")
        exponent = ONE
        if self.peek() == "^":
            self.take("^")
            if self.peek() == "(":
                self.take("(")
                exponent = self.sum()
                self.take(")")
            else:
                exponent = nat(int(self.take("nat")))
        coeff = 1
        if self.peek() == "*":
            self.take("*")
            coeff = int(self.take("nat"))
            if coeff == 0:
                raise self.error("coefficient must be positive")
        return mul_nat(omega_power(exponent), coeff)


def parse_ordinal(text: str) -> Ordinal:
    return _Parser(text).parse()


def format_ordinal(a: Ordinal) -> str:
    if not a.terms:
        return "0"
    parts = []
    for e, c in a.terms:
        if not e.terms:
            parts.append(str(c))
            continue
        base = "w" if e == ONE else f"w^({format_ordinal(e)})"
        parts.append(base if c == 1 else f"{base}*{c}")
    return "+".join(parts)

"""Finitely presented countable transfinite sequences.

Three constructors:

* ``Atom(q)`` -- the length-1 sequence ``<q>``;
* ``Concat(parts)`` -- finite concatenation, at least two parts, none a Concat;
* ``OmegaRep(cycle)`` -- the omega-sum ``c0 c1 ... c(m-1) c0 c1 ...`` repeating
  forever; cycle entries are Atoms or OmegaReps.

Build terms with :func:`atom`, :func:`cat` and :func:`rep`, which normalize
(flatten nested concatenations, splice concatenated cycle entries into the
cycle).  ``EMPTY`` is the only zero-part Concat and denotes the empty sequence.

Positions inside a term are ordinals; :func:`drop`, :func:`take` and
:func:`restrict` cut terms at arbitrary positions below their length.
"""

from __future__ import annotations

import re
from typing import Any, Callable, Iterator, List, Optional, Tuple

from .ordinal import (
    ONE,
    ZERO,
    Order,
    Ordinal,
    add,
    compare,
    interval_length,
    mul_nat,
    mul_omega,
)

__all__ = [
    "SeqTerm",
    "Atom",
    "Concat",
    "OmegaRep",
    "EMPTY",
    "TermError",
    "SurgeryError",
    "TermSyntaxError",
    "atom",
    "cat",
    "rep",
    "seq",
    "length",
    "drop",
    "take",
    "restrict",
    "atom_at",
    "first_match",
    "is_finite",
    "atoms",
    "unfold",
    "divmod_ordinal",
    "parse_term",
    "parse_terms",
    "format_term",
    "map_atoms",
]


class TermError(ValueError):
    pass


class SurgeryError(TermError):
    """A cut position that term surgery cannot realize."""


class TermSyntaxError(TermError):
    def __init__(self, msg: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {msg}")
        self.line = line
        self.column = column


class SeqTerm:
    __slots__ = ("_hash", "_length")

    def __setattr__(self, name, value):
        raise AttributeError(f"{type(self).__name__} is immutable")

    def _init(self, payload) -> None:
        object.__setattr__(self, "_hash", hash((type(self).__name__, payload)))
        object.__setattr__(self, "_length", None)

    def __hash__(self) -> int:
        return self._hash

    def __str__(self) -> str:
        return format_term(self)

    def __repr__(self) -> str:
        return f"term({format_term(self)!r})"


class Atom(SeqTerm):
    __slots__ = ("q",)

    def __init__(self, q: Any):
        object.__setattr__(self, "q", q)
        self._init(q)

    def __eq__(self, other) -> bool:
        return isinstance(other, Atom) and self._hash == other._hash and self.q == other.q

    __hash__ = SeqTerm.__hash__

    def __reduce__(self):
        return (Atom, (self.q,))


class Concat(SeqTerm):
    __slots__ = ("parts",)

    def __init__(self, parts):
        parts = tuple(parts)
        if len(parts) == 1:
            raise TermError("Concat needs zero (EMPTY) or at least two parts")
        for p in parts:
            if isinstance(p, Concat):
                raise TermError("nested Concat; build terms with cat()")
            if not isinstance(p, SeqTerm):
                raise TermError(f"not a term: {p!r}")
        object.__setattr__(self, "parts", parts)
        self._init(parts)

    def __eq__(self, other) -> bool:
        return isinstance(other, Concat) and self._hash == other._hash and self.parts == other.parts

    __hash__ = SeqTerm.__hash__

    def __reduce__(self):
        return (Concat, (self.parts,))


class OmegaRep(SeqTerm):
    __slots__ = ("cycle",)

    def __init__(self, cycle):
        cycle = tuple(cycle)
        if not cycle:
            raise TermError("OmegaRep needs a nonempty cycle")
        for c in cycle:
            if not isinstance(c, (Atom, OmegaRep)):
                raise TermError("cycle entries must be Atom or OmegaRep; build terms with rep()")
        object.__setattr__(self, "cycle", cycle)
        self._init(cycle)

    def __eq__(self, other) -> bool:
        return isinstance(other, OmegaRep) and self._hash == other._hash and self.cycle == other.cycle

    __hash__ = SeqTerm.__hash__

    def __reduce__(self):
        return (OmegaRep, (self.cycle,))


EMPTY = Concat(())


def _pieces(t: SeqTerm) -> tuple:
    return t.parts if isinstance(t, Concat) else (t,)


def atom(q: Any) -> Atom:
    return Atom(q)


def cat(*parts: SeqTerm) -> SeqTerm:
    flat = tuple(p for part in parts for p in _pieces(part))
    if len(flat) == 1:
        return flat[0]
    return Concat(flat) if flat else EMPTY


def rep(*cycle: SeqTerm) -> OmegaRep:
    flat = tuple(p for part in cycle for p in _pieces(part))
    if not flat:
        raise TermError("rep() of the empty sequence")
    return OmegaRep(flat)


def seq(items) -> SeqTerm:
    """The finite sequence of the given atoms."""
    return cat(*(Atom(q) for q in items))


def length(t: SeqTerm) -> Ordinal:
    cached = t._length
    if cached is not None:
        return cached
    if isinstance(t, Atom):
        result = ONE
    elif isinstance(t, Concat):
        result = ZERO
        for p in t.parts:
            result = add(result, length(p))
    else:
        total = ZERO
        for c in t.cycle:
            total = add(total, length(c))
        result = mul_omega(total)
    object.__setattr__(t, "_length", result)
    return result


def _cycle_length(t: OmegaRep) -> Ordinal:
    total = ZERO
    for c in t.cycle:
        total = add(total, length(c))
    return total


def divmod_ordinal(a: Ordinal, period: Ordinal) -> Tuple[int, Ordinal]:
    """``(k, r)`` with ``a == period*k + r`` and ``r < period``; needs ``a < period*w``."""
    if not period:
        raise TermError("zero period")
    if compare(a, period) == Order.LT:
        return 0, a
    e, c = period.terms[0]
    if compare(a.terms[0][0], e) != Order.EQ:
        raise TermError(f"{a} is not below {period}*w")
    k = max(a.terms[0][1] // c, 1)
    while k > 1 and compare(mul_nat(period, k), a) == Order.GT:
        k -= 1
    base = mul_nat(period, k)
    r = ZERO if base == a else interval_length(base, a)
    while compare(r, period) != Order.LT:
        k += 1
        r = ZERO if r == period else interval_length(period, r)
    return k, r


def _check_position(t: SeqTerm, a: Ordinal, *, allow_end: bool) -> None:
    cmp = compare(a, length(t))
    if cmp == Order.GT or (cmp == Order.EQ and not allow_end):
        raise TermError(f"position {a} out of range for a term of length {length(t)}")


def drop(t: SeqTerm, a: Ordinal) -> SeqTerm:
    """The suffix of ``t`` starting at position ``a`` (``a <= length(t)``)."""
    _check_position(t, a, allow_end=True)
    return _drop(t, a)


def _drop(t: SeqTerm, a: Ordinal) -> SeqTerm:
    if not a:
        return t
    if a == length(t):
        return EMPTY
    if isinstance(t, Concat):
        for i, p in enumerate(t.parts):
            lp = length(p)
            cmp = compare(a, lp)
            if cmp == Order.LT:
                return cat(_drop(p, a), *t.parts[i + 1:])
            if cmp == Order.EQ:
                return cat(*t.parts[i + 1:])
            a = interval_length(lp, a)
        raise SurgeryError("position beyond the end of a concatenation")
    if isinstance(t, OmegaRep):
        _, r = divmod_ordinal(a, _cycle_length(t))
        if not r:
            return t
        return cat(_drop(cat(*t.cycle), r), t)
    raise SurgeryError(f"cannot cut an atom at {a}")


def take(t: SeqTerm, b: Ordinal) -> SeqTerm:
    """The prefix of ``t`` of length ``b`` (``b <= length(t)``)."""
    _check_position(t, b, allow_end=True)
    return _take(t, b)


def _take(t: SeqTerm, b: Ordinal) -> SeqTerm:
    if not b:
        return EMPTY
    if b == length(t):
        return t
    if isinstance(t, Concat):
        kept = []
        for p in t.parts:
            lp = length(p)
            cmp = compare(b, lp)
            if cmp == Order.LT:
                kept.append(_take(p, b))
                return cat(*kept)
            kept.append(p)
            if cmp == Order.EQ:
                return cat(*kept)
            b = interval_length(lp, b)
        raise SurgeryError("position beyond the end of a concatenation")
    if isinstance(t, OmegaRep):
        k, r = divmod_ordinal(b, _cycle_length(t))
        whole = t.cycle * k
        return cat(*whole, _take(cat(*t.cycle), r)) if r else cat(*whole)
    raise SurgeryError(f"cannot cut an atom at {b}")


def restrict(t: SeqTerm, a: Ordinal, b: Ordinal) -> SeqTerm:
    """The subsequence on positions ``[a, b)``; requires ``a < b <= length(t)``."""
    if compare(a, b) != Order.LT:
        raise TermError(f"restrict needs a < b, got [{a}, {b})")
    _check_position(t, b, allow_end=True)
    return _take(_drop(t, a), interval_length(a, b))


def first_atom(t: SeqTerm) -> Any:
    while not isinstance(t, Atom):
        if t is EMPTY:
            raise TermError("empty sequence has no atoms")
        t = t.parts[0] if isinstance(t, Concat) else t.cycle[0]
    return t.q


def atom_at(t: SeqTerm, pos: Ordinal) -> Any:
    _check_position(t, pos, allow_end=False)
    return first_atom(_drop(t, pos))


def first_match(t: SeqTerm, pred: Callable[[Any], bool],
                memo: Optional[dict] = None) -> Optional[Ordinal]:
    """Offset of the earliest atom of ``t`` satisfying ``pred``, or None."""
    if memo is not None and t in memo:
        return memo[t]
    if isinstance(t, Atom):
        found = ZERO if pred(t.q) else None
    else:
        found = None
        offset = ZERO
        for p in (t.parts if isinstance(t, Concat) else t.cycle):
            m = first_match(p, pred, memo)
            if m is not None:
                found = add(offset, m)
                break
            offset = add(offset, length(p))
    if memo is not None:
        memo[t] = found
    return found


def is_finite(t: SeqTerm) -> bool:
    if isinstance(t, Atom):
        return True
    if isinstance(t, Concat):
        return all(is_finite(p) for p in t.parts)
    return False


def atoms(t: SeqTerm) -> List[Any]:
    """All atoms of a finite term, left to right."""
    if not is_finite(t):
        raise TermError("atoms() needs a finite term")
    return list(unfold(t))


def unfold(t: SeqTerm, limit: int | None = None) -> Iterator[Any]:
    """Atoms in positional order, stopping at the first limit position or ``limit`` atoms.

    For an OmegaRep whose cycle starts with an OmegaRep only the first infinite
    block is ever reached.
    """
    count = 0

    def walk(u):
        nonlocal count
        if limit is not None and count >= limit:
            return
        if isinstance(u, Atom):
            count += 1
            yield u.q
        elif isinstance(u, Concat):
            for p in u.parts:
                yield from walk(p)
                if limit is not None and count >= limit:
                    return
        else:
            while True:
                for c in u.cycle:
                    yield from walk(c)
                    if limit is not None and count >= limit:
                        return

    yield from walk(t)


def map_atoms(t: SeqTerm, fn: Callable[[Any], Any]) -> SeqTerm:
    if isinstance(t, Atom):
        return Atom(fn(t.q))
    if isinstance(t, Concat):
        return cat(*(map_atoms(p, fn) for p in t.parts))
    return rep(*(map_atoms(c, fn) for c in t.cycle))


# -- s-expression syntax -------------------------------------------------------

_SEXPR_TOKEN = re.compile(r"\s*(\(|\)|[^\s()]+)")


def _line_col(text: str, pos: int) -> Tuple[int, int]:
    line = text.count("\n", 0, pos) + 1
    return line, pos - (text.rfind("\n", 0, pos) + 1) + 1


def _parse_one(text: str, pos: int, line_offset: int = 0) -> Tuple[SeqTerm, int]:
    def fail(msg, at):
        line, col = _line_col(text, at)
        raise TermSyntaxError(msg, line + line_offset, col)

    def token(at):
        m = _SEXPR_TOKEN.match(text, at)
        if not m:
            fail("unexpected end of input", len(text))
        return m.group(1), m.start(1), m.end()

    tok, start, pos = token(pos)
    if tok != "(":
        fail(f"expected '(' but found {tok!r}", start)
    head, hstart, pos = token(pos)
    if head == "atom":
        name, nstart, pos = token(pos)
        if name in "()":
            fail("atom needs a name", nstart)
        close, cstart, pos = token(pos)
        if close != ")":
            fail("atom takes exactly one name", cstart)
        return Atom(name), pos
    if head not in ("cat", "rep"):
        fail(f"unknown constructor {head!r}", hstart)
    children = []
    while True:
        m = _SEXPR_TOKEN.match(text, pos)
        if not m:
            fail(f"unterminated ({head}", hstart)
        if m.group(1) == ")":
            pos = m.end()
            break
        child, pos = _parse_one(text, pos, line_offset)
        children.append(child)
    if head == "cat":
        return cat(*children), pos
    if not children:
        fail("(rep) needs at least one part", hstart)
    try:
        return rep(*children), pos
    except TermError as exc:
        fail(str(exc), hstart)


def parse_term(text: str, *, line_offset: int = 0) -> SeqTerm:
    term, pos = _parse_one(text, 0, line_offset)
    if text[pos:].strip():
        line, col = _line_col(text, pos + len(text[pos:]) - len(text[pos:].lstrip()))
        raise TermSyntaxError("trailing input after term", line + line_offset, col)
    return term


def parse_terms(text: str) -> List[SeqTerm]:
    """One term per non-blank, non-comment line."""
    out = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0]
        if line.strip():
            out.append(parse_term(line, line_offset=lineno - 1))
    return out


def format_term(t: SeqTerm) -> str:
    if isinstance(t, Atom):
        return f"(atom {t.q})"
    if isinstance(t, Concat):
        return "(cat" + "".join(" " + format_term(p) for p in t.parts) + ")"
    return "(rep" + "".join(" " + format_term(c) for c in t.cycle) + ")"


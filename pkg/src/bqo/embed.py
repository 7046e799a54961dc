"""Embeddability of presented transfinite sequences.

``decide_embed(s, t, Q)`` runs the canonical leftmost-greedy embedding: every
atom of ``s`` goes to the least admissible position of ``t`` after the images
of all earlier atoms.  The greedy map is pointwise below any embedding, so it
is total exactly when ``s`` embeds in ``t``.

An OmegaRep in ``s`` is handled by iterating its cycle and watching the target
cursor.  Two cursors that agree everywhere except in the repetition count of
one OmegaRep region of ``t`` make the run periodic from then on (the region is
translation invariant), so the supremum is the end of that region and the
witness is a finite prefix plus a translated period.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Any, List, Optional, Sequence, Tuple, Union

from .ordinal import (
    ONE,
    ZERO,
    Order,
    Ordinal,
    add,
    compare,
    format_ordinal,
    interval_length,
    mul_nat,
    mul_omega,
    parse_ordinal,
)
from .qo import QPresentation
from .terms import (
    EMPTY,
    Atom,
    Concat,
    OmegaRep,
    SeqTerm,
    TermError,
    atom_at,
    atoms,
    cat,
    divmod_ordinal,
    drop,
    first_match,
    is_finite,
    length,
    rep,
    restrict,
)

__all__ = [
    "AtomW",
    "ConcatW",
    "RepW",
    "Witness",
    "WitnessError",
    "decide_embed",
    "embeds",
    "greedy_cursor",
    "verify_witness",
    "witness_positions",
    "translate_witness",
    "witness_to_json",
    "witness_from_json",
    "is_quasi_monotonic",
    "OmegaSum",
    "find_blocking_index",
    "atom_set",
]

MAX_PERIOD_SEARCH = 20_000


class WitnessError(ValueError):
    pass


@dataclass(frozen=True)
class AtomW:
    pos: Ordinal


@dataclass(frozen=True)
class ConcatW:
    parts: Tuple["Witness", ...]


@dataclass(frozen=True)
class RepW:
    """Witness for an OmegaRep source.

    ``prefix`` and ``period`` hold one block per cycle iteration (a tuple of
    witnesses, one per cycle entry).  Iteration ``len(prefix) + j + n*len(period)``
    is block ``period[j]`` translated ``n`` times, where one translation maps a
    position ``base + x`` to ``base + shift + x``.  Every image lies below ``sup``.
    """

    prefix: Tuple[Tuple["Witness", ...], ...]
    period: Tuple[Tuple["Witness", ...], ...]
    base: Ordinal
    shift: Ordinal
    sup: Ordinal


Witness = Union[AtomW, ConcatW, RepW]


def atom_set(t: SeqTerm) -> set:
    if isinstance(t, Atom):
        return {t.q}
    children = t.parts if isinstance(t, Concat) else t.cycle
    out = set()
    for c in children:
        out |= atom_set(c)
    return out


def _minus(b: Ordinal, a: Ordinal) -> Ordinal:
    return ZERO if a == b else interval_length(a, b)


# -- locating cursors ----------------------------------------------------------

def _locate(t: SeqTerm, c: Ordinal, base: Ordinal, frames: list) -> None:
    """Append the path of position ``c`` (relative to ``t``) to ``frames``.

    Frames are ``("C", i, None, None)`` for concatenation part ``i`` and
    ``("R", k, i, (region_base, cycle_len))`` for cycle entry ``i`` of
    repetition ``k`` of an OmegaRep starting at absolute position ``region_base``.
    """
    while True:
        if isinstance(t, Atom):
            return
        if isinstance(t, Concat):
            offset = ZERO
            for i, p in enumerate(t.parts):
                end = add(offset, length(p))
                if compare(c, end) == Order.LT:
                    frames.append(("C", i, None, None))
                    c = _minus(c, offset)
                    base = add(base, offset)
                    t = p
                    break
                offset = end
            else:
                raise TermError("cursor beyond concatenation")
            continue
        period = ZERO
        for e in t.cycle:
            period = add(period, length(e))
        k, r = divmod_ordinal(c, period)
        offset = ZERO
        for i, e in enumerate(t.cycle):
            end = add(offset, length(e))
            if compare(r, end) == Order.LT:
                frames.append(("R", k, i, (base, period)))
                start = add(mul_nat(period, k), offset)
                c = _minus(r, offset)
                base = add(base, start)
                t = e
                break
            offset = end
        else:
            raise TermError("cursor beyond cycle")


class _Greedy:
    def __init__(self, target: SeqTerm, Q: QPresentation):
        self.target = target
        self.end = length(target)
        self.leq = Q.leq
        self._memo: dict = {}

    def search(self, q: Any, cursor: Ordinal) -> Optional[Ordinal]:
        if compare(cursor, self.end) != Order.LT:
            return None
        memo = self._memo.setdefault(q, {})
        suffix = drop(self.target, cursor)
        off = first_match(suffix, lambda x: self.leq(q, x), memo)
        return None if off is None else add(cursor, off)

    def run(self, s: SeqTerm, cursor: Ordinal) -> Optional[Tuple[Ordinal, Witness]]:
        if isinstance(s, Atom):
            pos = self.search(s.q, cursor)
            if pos is None:
                return None
            return add(pos, ONE), AtomW(pos)
        if isinstance(s, Concat):
            ws = []
            for p in s.parts:
                got = self.run(p, cursor)
                if got is None:
                    return None
                cursor, w = got
                ws.append(w)
            return cursor, ConcatW(tuple(ws))
        return self.run_rep(s, cursor)

    def run_rep(self, s: OmegaRep, cursor: Ordinal) -> Optional[Tuple[Ordinal, Witness]]:
        blocks: List[Tuple[Witness, ...]] = []
        seen: dict = {}
        for j in itertools.count():
            if j > MAX_PERIOD_SEARCH:
                raise RuntimeError("no period detected while embedding an OmegaRep")
            if compare(cursor, self.end) == Order.EQ:
                return None
            frames: list = []
            _locate(self.target, cursor, ZERO, frames)
            shape = tuple((f[0], f[1], f[2]) for f in frames)
            for level, frame in enumerate(frames):
                if frame[0] != "R":
                    continue
                key = (level, shape[:level], shape[level][2], shape[level + 1:])
                prev = seen.get(key)
                if prev is not None:
                    a, k_a = prev
                    region_base, cycle_len = frame[3]
                    shift = mul_nat(cycle_len, frame[1] - k_a)
                    sup = add(region_base, mul_omega(cycle_len))
                    w = RepW(tuple(blocks[:a]), tuple(blocks[a:]), region_base, shift, sup)
                    return sup, w
                seen[key] = (j, frame[1])
            block = []
            for entry in s.cycle:
                got = self.run(entry, cursor)
                if got is None:
                    return None
                cursor, w = got
                block.append(w)
            blocks.append(tuple(block))
        raise AssertionError("unreachable")


def _finite_greedy(s: SeqTerm, t: SeqTerm, Q: QPresentation) -> Optional[Witness]:
    target = atoms(t)
    leq = Q.leq
    j = 0

    def go(u):
        nonlocal j
        if isinstance(u, Atom):
            while j < len(target) and not leq(u.q, target[j]):
                j += 1
            if j == len(target):
                return None
            w = AtomW(Ordinal(((ZERO, j),)) if j else ZERO)
            j += 1
            return w
        ws = []
        for p in u.parts:
            w = go(p)
            if w is None:
                return None
            ws.append(w)
        return ConcatW(tuple(ws))

    return go(s)


def _check_atoms(s: SeqTerm, t: SeqTerm, Q: QPresentation) -> None:
    for q in atom_set(s) | atom_set(t):
        Q.check(q)


def decide_embed(s: SeqTerm, t: SeqTerm, Q: QPresentation) -> Optional[Witness]:
    """Return a witness of ``s <= t`` (the canonical greedy embedding) or None."""
    if s is EMPTY or s == EMPTY:
        return ConcatW(())
    _check_atoms(s, t, Q)
    if is_finite(s) and is_finite(t):
        return _finite_greedy(s, t, Q)
    got = _Greedy(t, Q).run(s, ZERO)
    return None if got is None else got[1]


def embeds(s: SeqTerm, t: SeqTerm, Q: QPresentation) -> bool:
    return decide_embed(s, t, Q) is not None


def greedy_cursor(s: SeqTerm, t: SeqTerm, Q: QPresentation) -> Optional[Ordinal]:
    """Target position right after the greedy image of ``s`` (None if ``s`` does not embed)."""
    if s == EMPTY:
        return ZERO
    _check_atoms(s, t, Q)
    got = _Greedy(t, Q).run(s, ZERO)
    return None if got is None else got[0]


# -- witnesses -----------------------------------------------------------------

def _shift_pos(pos: Ordinal, base: Ordinal, shift: Ordinal, n: int) -> Ordinal:
    rel = _minus(pos, base)
    return add(add(base, mul_nat(shift, n)), rel)


def translate_witness(w: Witness, base: Ordinal, shift: Ordinal, n: int) -> Witness:
    if n == 0:
        return w
    if isinstance(w, AtomW):
        return AtomW(_shift_pos(w.pos, base, shift, n))
    if isinstance(w, ConcatW):
        return ConcatW(tuple(translate_witness(p, base, shift, n) for p in w.parts))
    blocks = lambda bs: tuple(tuple(translate_witness(x, base, shift, n) for x in b) for b in bs)
    return RepW(blocks(w.prefix), blocks(w.period), _shift_pos(w.base, base, shift, n),
                w.shift, _shift_pos(w.sup, base, shift, n))


def witness_positions(s: SeqTerm, w: Witness, limit: int) -> List[Tuple[Any, Ordinal]]:
    """The first ``limit`` (atom, image) pairs of the embedding, in source order."""
    out: List[Tuple[Any, Ordinal]] = []

    def walk(u, x):
        if len(out) >= limit:
            return
        if isinstance(u, Atom):
            out.append((u.q, x.pos))
        elif isinstance(u, Concat):
            for p, xp in zip(u.parts, x.parts):
                walk(p, xp)
        else:
            for block in x.prefix:
                for e, xe in zip(u.cycle, block):
                    walk(e, xe)
            for n in itertools.count():
                if len(out) >= limit:
                    return
                for block in x.period:
                    moved = [translate_witness(xe, x.base, x.shift, n) for xe in block]
                    for e, xe in zip(u.cycle, moved):
                        walk(e, xe)
                # a limit block: later positions are unreachable by finite counting
                if not _has_finite_block(u):
                    return

    walk(s, w)
    return out


def _has_finite_block(u: OmegaRep) -> bool:
    return all(isinstance(e, Atom) for e in u.cycle)


def verify_witness(s: SeqTerm, t: SeqTerm, w: Witness, Q: QPresentation) -> None:
    """Raise :class:`WitnessError` unless ``w`` is a valid embedding of ``s`` in ``t``.

    Checks that images are strictly increasing in source order, lie below
    ``length(t)`` and satisfy ``leq`` pointwise.  Periodic blocks are checked
    once in place and once translated; the repeated region of ``t`` is checked
    to be an OmegaRep whose cycle length divides the translation.
    """
    end = length(t)

    def expect(cond, msg):
        if not cond:
            raise WitnessError(msg)

    def check(u, x, lo):
        if isinstance(u, Atom):
            expect(isinstance(x, AtomW), "witness shape does not match an atom")
            expect(compare(x.pos, lo) != Order.LT, f"image {x.pos} not increasing (needs >= {lo})")
            expect(compare(x.pos, end) == Order.LT, f"image {x.pos} outside the target")
            expect(Q.leq(u.q, atom_at(t, x.pos)), f"{u.q!r} does not embed at {x.pos}")
            return add(x.pos, ONE)
        if isinstance(u, Concat):
            expect(isinstance(x, ConcatW) and len(x.parts) == len(u.parts),
                   "witness shape does not match a concatenation")
            for p, xp in zip(u.parts, x.parts):
                lo = check(p, xp, lo)
            return lo
        expect(isinstance(x, RepW), "witness shape does not match an OmegaRep")
        expect(len(x.period) >= 1, "empty period")
        for block in x.prefix + x.period:
            expect(len(block) == len(u.cycle), "block size does not match the cycle")
        expect(compare(x.base, x.sup) == Order.LT and compare(x.sup, end) != Order.GT,
               "bad repeated region")
        region = restrict(t, x.base, x.sup)
        expect(isinstance(region, OmegaRep), "repeated region is not an OmegaRep")
        cycle_len = ZERO
        for e in region.cycle:
            cycle_len = add(cycle_len, length(e))
        k, r = divmod_ordinal(x.shift, cycle_len) if x.shift else (0, ZERO)
        expect(k >= 1 and not r, "translation is not a multiple of the region's cycle")
        for block in x.prefix:
            for e, xe in zip(u.cycle, block):
                lo = check(e, xe, lo)
        expect(compare(x.base, lo) != Order.GT, "periodic part starts before its region")
        for n in (0, 1):
            for block in x.period:
                for e, xe in zip(u.cycle, block):
                    lo = check(e, translate_witness(xe, x.base, x.shift, n), lo)
        expect(compare(lo, x.sup) != Order.GT, "periodic part leaves its region")
        return x.sup

    check(s, w, ZERO)


def witness_to_json(w: Witness):
    if isinstance(w, AtomW):
        return format_ordinal(w.pos)
    if isinstance(w, ConcatW):
        return [witness_to_json(p) for p in w.parts]
    blocks = lambda bs: [[witness_to_json(x) for x in b] for b in bs]
    return {
        "prefix": blocks(w.prefix),
        "period": blocks(w.period),
        "base": format_ordinal(w.base),
        "shift": format_ordinal(w.shift),
        "sup": format_ordinal(w.sup),
    }


def witness_from_json(data) -> Witness:
    if isinstance(data, str):
        return AtomW(parse_ordinal(data))
    if isinstance(data, list):
        return ConcatW(tuple(witness_from_json(x) for x in data))
    if isinstance(data, dict):
        blocks = lambda bs: tuple(tuple(witness_from_json(x) for x in b) for b in bs)
        return RepW(blocks(data["prefix"]), blocks(data["period"]), parse_ordinal(data["base"]),
                    parse_ordinal(data["shift"]), parse_ordinal(data["sup"]))
    raise WitnessError(f"malformed witness node {data!r}")


# -- omega-sums ----------------------------------------------------------------

def is_quasi_monotonic(prefix: Sequence[SeqTerm], cycle: Sequence[SeqTerm],
                       Q: QPresentation) -> bool:
    """Whether ``prefix + cycle + cycle + ...`` satisfies: every entry embeds in a later one.

    Cycle entries recur, so only the prefix needs checking.
    """
    if not cycle:
        raise ValueError("cycle must be nonempty")
    prefix = list(prefix)
    for i, p in enumerate(prefix):
        later = prefix[i + 1:] + list(cycle)
        if not any(embeds(p, x, Q) for x in later):
            return False
    return True


@dataclass(frozen=True)
class OmegaSum:
    """The omega-sum of ``prefix[0], ..., prefix[-1], cycle[0], ..., cycle[-1], cycle[0], ...``."""

    prefix: Tuple[SeqTerm, ...]
    cycle: Tuple[SeqTerm, ...]

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(self.prefix))
        object.__setattr__(self, "cycle", tuple(self.cycle))
        if not self.cycle:
            raise ValueError("an omega-sum needs a nonempty cycle")

    def part(self, n: int) -> SeqTerm:
        if n < len(self.prefix):
            return self.prefix[n]
        return self.cycle[(n - len(self.prefix)) % len(self.cycle)]

    def term(self) -> SeqTerm:
        return cat(*self.prefix, rep(*self.cycle))

    def head(self, m: int) -> SeqTerm:
        """Concatenation of parts ``0..m``."""
        return cat(*(self.part(n) for n in range(m + 1)))


def find_blocking_index(s: OmegaSum, t: OmegaSum, Q: QPresentation) -> int:
    """Least ``n0`` such that ``s.part(n0)`` embeds in no finite head of ``t``.

    Preconditions: ``t`` is quasi-monotonic and ``s.term()`` does not embed in
    ``t.term()``.  A part embeds in some finite head iff its greedy run on the
    whole sum ends strictly below the sum's length.
    """
    if not is_quasi_monotonic(t.prefix, t.cycle, Q):
        raise ValueError("target omega-sum is not quasi-monotonic")
    whole_t = t.term()
    if embeds(s.term(), whole_t, Q):
        raise ValueError("source sum embeds in the target sum")
    end = length(whole_t)
    for n in range(len(s.prefix) + len(s.cycle)):
        cursor = greedy_cursor(s.part(n), whole_t, Q)
        if cursor is None or compare(cursor, end) == Order.EQ:
            return n
    raise ValueError("no blocking index; inputs violate the preconditions")


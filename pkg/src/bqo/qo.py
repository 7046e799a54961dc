"""Presented quasi-orders.

A :class:`QPresentation` bundles a decision procedure for the quasi-order
``leq`` with an optional auxiliary strict relation ``lt_aux`` (the relation
along which minimal bad objects are minimized).  Finite presentations are
built from explicit facts; :func:`higman` builds the finite-sequence order
over a base presentation.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Iterable, Optional, Sequence

__all__ = [
    "QPresentation",
    "QOError",
    "from_relation",
    "total_order",
    "higman",
    "subsequence_embeds",
    "parse_qo",
    "load_qo",
]


class QOError(ValueError):
    def __init__(self, msg: str, line: int | None = None, column: int | None = None):
        where = "" if line is None else f"line {line}, column {column or 1}: "
        super().__init__(where + msg)
        self.line = line
        self.column = column


@dataclass(frozen=True, eq=False)
class QPresentation:
    leq: Callable[[Any, Any], bool]
    elements: Optional[tuple] = None
    lt_aux: Optional[Callable[[Any, Any], bool]] = None
    below: Optional[Callable[[Any], Iterable[Any]]] = None
    contains: Optional[Callable[[Any], bool]] = None
    key: Callable[[Any], Any] = repr
    name: str = "Q"
    facts: dict = field(default_factory=dict, compare=False, repr=False)

    def __contains__(self, q) -> bool:
        if self.contains is not None:
            return self.contains(q)
        if self.elements is not None:
            return q in self._element_set
        return True

    @property
    def _element_set(self) -> frozenset:
        cached = self.facts.get("_element_set")
        if cached is None:
            cached = self.facts["_element_set"] = frozenset(self.elements)
        return cached

    def check(self, q) -> None:
        if q not in self:
            raise QOError(f"{q!r} is not an element of {self.name}")

    def lt_aux_or_eq(self, a, b) -> bool:
        return a == b or (self.lt_aux is not None and self.lt_aux(a, b))

    def candidates_below(self, q) -> list:
        """Every ``q2`` with ``lt_aux(q2, q)``, in canonical order."""
        if self.lt_aux is None:
            raise QOError(f"{self.name} has no auxiliary relation")
        if self.below is not None:
            found = list(self.below(q))
        elif self.elements is not None:
            found = [p for p in self.elements if self.lt_aux(p, q)]
        else:
            raise QOError(f"cannot enumerate predecessors in {self.name}")
        return sorted(set(found), key=self.key)

    def sample(self, rng: random.Random, k: int) -> list:
        if self.elements is None:
            raise QOError("cannot sample an open universe")
        return [rng.choice(self.elements) for _ in range(k)]

    def spot_check(self, samples: Sequence, *, rng: random.Random | None = None,
                   triples: int = 2000) -> list[str]:
        """Sampled checks of reflexivity, transitivity and compatibility; returns violations."""
        rng = rng or random.Random(0)
        problems = []
        for q in samples:
            if not self.leq(q, q):
                problems.append(f"leq not reflexive at {q!r}")
            if self.lt_aux is not None and self.lt_aux(q, q):
                problems.append(f"lt_aux has a loop at {q!r}")
        if not samples:
            return problems
        for _ in range(triples):
            a, b, c = (rng.choice(samples) for _ in range(3))
            if self.leq(a, b) and self.leq(b, c) and not self.leq(a, c):
                problems.append(f"leq not transitive on {a!r}, {b!r}, {c!r}")
            if self.lt_aux is not None:
                if self.lt_aux(a, b) and not self.leq(a, b):
                    problems.append(f"lt_aux({a!r}, {b!r}) without leq")
                if self.lt_aux(a, b) and self.lt_aux(b, a):
                    problems.append(f"lt_aux cycle between {a!r} and {b!r}")
        return problems


def _closure(elements: Sequence, pairs: Iterable[tuple], reflexive: bool) -> frozenset:
    succ = {e: set() for e in elements}
    for a, b in pairs:
        succ[a].add(b)
    closed = set()
    for a in elements:
        seen = set()
        stack = list(succ[a])
        while stack:
            x = stack.pop()
            if x in seen:
                continue
            seen.add(x)
            stack.extend(succ[x])
        if reflexive:
            seen.add(a)
        closed.update((a, x) for x in seen)
    return frozenset(closed)


def from_relation(elements: Sequence[Hashable], leq_pairs: Iterable[tuple] = (),
                  lt_pairs: Iterable[tuple] | None = None, *, name: str = "Q") -> QPresentation:
    """Finite presentation: reflexive-transitive closure of ``leq_pairs``,
    transitive closure of ``lt_pairs`` (no auxiliary relation when ``None``)."""
    elements = tuple(dict.fromkeys(elements))
    known = set(elements)
    leq_pairs = list(leq_pairs)
    for a, b in leq_pairs + list(lt_pairs or ()):
        if a not in known or b not in known:
            raise QOError(f"fact mentions unknown element in ({a!r}, {b!r})")
    leq_set = _closure(elements, leq_pairs, reflexive=True)
    lt_set = None if lt_pairs is None else _closure(elements, lt_pairs, reflexive=False)
    if lt_set is not None:
        for a, b in sorted(lt_set, key=repr):
            if a == b:
                raise QOError(f"auxiliary relation has a cycle through {a!r}")
            if (a, b) not in leq_set:
                raise QOError(f"auxiliary fact {a!r} <' {b!r} is not compatible with leq")
    return QPresentation(
        leq=lambda a, b: (a, b) in leq_set,
        elements=elements,
        lt_aux=None if lt_set is None else (lambda a, b: (a, b) in lt_set),
        key=lambda q: (elements.index(q) if q in known else len(elements), repr(q)),
        name=name,
        facts={"leq": leq_set, "lt": lt_set},
    )


def total_order(n: int, *, name: str | None = None) -> QPresentation:
    """``0 <= 1 <= ... <= n-1`` on the integers ``0..n-1``."""
    elements = tuple(range(n))
    return QPresentation(leq=lambda a, b: a <= b, elements=elements, key=lambda q: q,
                         name=name or f"total{n}")


def subsequence_embeds(s: Sequence, t: Sequence, leq: Callable[[Any, Any], bool]) -> bool:
    """Higman embedding of finite sequences, by the greedy scan."""
    j = 0
    for x in s:
        while j < len(t) and not leq(x, t[j]):
            j += 1
        if j == len(t):
            return False
        j += 1
    return True


def higman(base: QPresentation) -> QPresentation:
    """Finite sequences over ``base`` under embedding, with strict prefix as ``lt_aux``.

    Strict prefix is compatible with embedding and every element has finitely
    many predecessors.
    """

    def contains(q) -> bool:
        return isinstance(q, tuple) and all(x in base for x in q)

    return QPresentation(
        leq=lambda s, t: subsequence_embeds(s, t, base.leq),
        lt_aux=lambda s, t: len(s) < len(t) and tuple(t[: len(s)]) == tuple(s),
        below=lambda q: (tuple(q[:i]) for i in range(len(q))),
        contains=contains,
        key=lambda q: (len(q), tuple(base.key(x) for x in q)),
        name=f"{base.name}^<w",
        facts={"base": base},
    )


# -- file format ---------------------------------------------------------------

def parse_qo(text: str, *, name: str = "Q") -> QPresentation:
    """Parse ``elem a b ...`` / ``leq a b`` / ``lt a b`` lines (``#`` comments)."""
    elements: list = []
    leq_pairs: list = []
    lt_pairs: list = []
    saw_lt = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, *args = line.split()
        if head == "elem":
            if not args:
                raise QOError("'elem' needs at least one name", lineno, 1)
            elements.extend(args)
        elif head in ("leq", "lt"):
            if len(args) != 2:
                raise QOError(f"'{head}' takes exactly two names", lineno, 1)
            for x in args:
                if x not in elements:
                    raise QOError(f"undeclared element {x!r}", lineno, raw.index(x) + 1)
            (leq_pairs if head == "leq" else lt_pairs).append(tuple(args))
            saw_lt |= head == "lt"
        else:
            raise QOError(f"unknown directive {head!r}", lineno, raw.index(head) + 1)
    if not elements:
        raise QOError("no elements declared")
    return from_relation(elements, leq_pairs, lt_pairs if saw_lt else None, name=name)


def load_qo(path) -> QPresentation:
    with open(path, encoding="utf-8") as fh:
        return parse_qo(fh.read(), name=str(path))

"""Minimal bad sequences and arrays, and a Higman refuter.

The locally minimal bad array construction picks, step by step, the member
``s_k`` with least ``max`` (ties: lexicographic) that admits some value, then
the ``<'``-least value ``q_k`` for it, subject to the chosen prefix still
extending to a bad array below ``f``.  Extendability is not decidable in
general, so it is replaced by a bounded lookahead: values ``<=' f`` for the
next ``probe_depth`` members that keep every ◁-pair bad.  A candidate is
dropped only when its lookahead is refuted outright; when a lookahead runs out
of fuel the candidate is kept and the step is tagged ``fuel-truncated``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from .barrier import (
    FinSeq,
    SearchExhausted,
    member_key,
    perfect_refine,
    triangle_pairs,
)
from .embed import decide_embed, verify_witness, Witness
from .qo import QOError, QPresentation
from .terms import SeqTerm, atoms, is_finite, seq

__all__ = [
    "SearchBudget",
    "BadStream",
    "EngineError",
    "Step",
    "EngineResult",
    "minimal_bad_sequence",
    "locally_minimal_bad_array",
    "GoodPair",
    "FuelExhausted",
    "higman_refute",
    "bad_pairs",
    "default_budget",
]

CERTIFIED = "certified"
TRUNCATED = "fuel-truncated"


class EngineError(ValueError):
    pass


@dataclass(frozen=True)
class SearchBudget:
    fuel: int = 10_000
    probe_depth: int = 3

    def __post_init__(self):
        if not isinstance(self.fuel, int) or self.fuel <= 0:
            raise EngineError(f"fuel must be a positive integer, got {self.fuel!r}")
        if not isinstance(self.probe_depth, int) or self.probe_depth <= 0:
            raise EngineError(f"probe_depth must be a positive integer, got {self.probe_depth!r}")

    def to_json(self) -> dict:
        return {"fuel": self.fuel, "probe_depth": self.probe_depth}


def default_budget() -> SearchBudget:
    """Budget from ``BQO_FUEL`` / ``BQO_PROBE_DEPTH`` when set."""
    fuel = int(os.environ.get("BQO_FUEL", SearchBudget.fuel))
    depth = int(os.environ.get("BQO_PROBE_DEPTH", SearchBudget.probe_depth))
    return SearchBudget(fuel, depth)


@dataclass(frozen=True)
class BadStream:
    """A finite prefix of a bad array: values indexed by fragment members.

    Sequence mode uses the singleton members ``(n,)``.
    """

    values: Mapping[FinSeq, Any]

    @classmethod
    def sequence(cls, items: Iterable[Any], length: Optional[int] = None) -> "BadStream":
        it = iter(items)
        out = {}
        n = 0
        while length is None or n < length:
            try:
                out[(n,)] = next(it)
            except StopIteration:
                break
            n += 1
        return cls(out)

    @property
    def domain(self) -> List[FinSeq]:
        return sorted(self.values, key=member_key)

    @property
    def is_sequence(self) -> bool:
        return all(len(s) == 1 for s in self.values)


def bad_pairs(values: Mapping[FinSeq, Any], Q: QPresentation) -> List[Tuple[FinSeq, FinSeq]]:
    """◁-pairs whose values ascend (empty iff the array is bad)."""
    return [(s, t) for s, t in triangle_pairs(values.keys()) if Q.leq(values[s], values[t])]


@dataclass
class Step:
    member: FinSeq
    seed: Any
    chosen: Any = None
    provenance: Optional[str] = None
    refuted: List[Any] = field(default_factory=list)
    truncated: List[Any] = field(default_factory=list)
    nodes: int = 0

    @property
    def skipped(self) -> bool:
        return self.provenance is None

    def to_json(self, fmt) -> dict:
        return {
            "member": list(self.member),
            "seed": fmt(self.seed),
            "chosen": None if self.skipped else fmt(self.chosen),
            "provenance": self.provenance or "skipped",
            "refuted": [fmt(q) for q in self.refuted],
            "truncated": [fmt(q) for q in self.truncated],
            "nodes": self.nodes,
        }


@dataclass
class EngineResult:
    values: Dict[FinSeq, Any]
    steps: List[Step]
    budget: SearchBudget

    @property
    def order(self) -> List[FinSeq]:
        return [st.member for st in self.steps if not st.skipped]

    @property
    def sequence(self) -> List[Tuple[int, Any]]:
        return [(s[0], self.values[s]) for s in self.order]

    @property
    def fully_certified(self) -> bool:
        return all(st.provenance in (CERTIFIED, None) for st in self.steps)

    def to_json(self, fmt=repr) -> dict:
        return {
            "budget": self.budget.to_json(),
            "steps": [st.to_json(fmt) for st in self.steps],
            "values": [[list(s), fmt(self.values[s])] for s in self.order],
        }


class _Engine:
    def __init__(self, Q: QPresentation, seed: Mapping[FinSeq, Any], budget: SearchBudget):
        self.Q = Q
        self.seed = dict(seed)
        self.budget = budget
        self.order = sorted(self.seed, key=member_key)
        self.left: Dict[FinSeq, List[FinSeq]] = {s: [] for s in self.order}
        self.right: Dict[FinSeq, List[FinSeq]] = {s: [] for s in self.order}
        for s, t in triangle_pairs(self.order):
            self.right[s].append(t)
            self.left[t].append(s)
        self._cands: Dict[FinSeq, List[Any]] = {}

    def candidates(self, s: FinSeq) -> List[Any]:
        """``q <=' seed(s)``: the seed value first, then its predecessors by key."""
        got = self._cands.get(s)
        if got is None:
            q = self.seed[s]
            got = self._cands[s] = [q] + [p for p in self.Q.candidates_below(q) if p != q]
        return got

    def fits(self, s: FinSeq, q: Any, assign: Mapping[FinSeq, Any]) -> bool:
        leq = self.Q.leq
        for t in self.right[s]:
            if t in assign and leq(q, assign[t]):
                return False
        for t in self.left[s]:
            if t in assign and leq(assign[t], q):
                return False
        return True

    def lookahead(self, pos: int, assign: Dict[FinSeq, Any]) -> Tuple[Optional[bool], int]:
        """Can the next ``probe_depth`` members after ``pos`` get values ``<='`` seed
        keeping every ◁-pair bad?  Returns (answer or None on fuel exhaustion, nodes)."""
        upcoming = self.order[pos + 1: pos + 1 + self.budget.probe_depth]
        fuel = self.budget.fuel
        nodes = 0

        class _Out(Exception):
            pass

        def go(i: int) -> bool:
            nonlocal nodes
            if i == len(upcoming):
                return True
            s = upcoming[i]
            for q in self.candidates(s):
                nodes += 1
                if nodes > fuel:
                    raise _Out
                if self.fits(s, q, assign):
                    assign[s] = q
                    ok = go(i + 1)
                    del assign[s]
                    if ok:
                        return True
            return False

        try:
            return go(0), nodes
        except _Out:
            return None, nodes

    def run(self) -> EngineResult:
        Q = self.Q
        assign: Dict[FinSeq, Any] = {}
        steps = []
        for pos, s in enumerate(self.order):
            step = Step(s, self.seed[s])
            alive = []
            for q in self.candidates(s):
                if not self.fits(s, q, assign):
                    step.refuted.append(q)
                    continue
                assign[s] = q
                verdict, used = self.lookahead(pos, assign)
                del assign[s]
                step.nodes += used
                if verdict is False:
                    step.refuted.append(q)
                else:
                    alive.append((q, verdict is True))
                    if verdict is None:
                        step.truncated.append(q)
            if alive:
                values = [q for q, _ in alive]
                chosen, certified = next(
                    (q, c) for q, c in sorted(alive, key=lambda qc: Q.key(qc[0]))
                    if not any(Q.lt_aux(p, q) for p in values if p != q))
                step.chosen = chosen
                step.provenance = CERTIFIED if certified else TRUNCATED
                assign[s] = chosen
            steps.append(step)
        return EngineResult(assign, steps, self.budget)


def _prepare(Q: QPresentation, seed: Union[BadStream, Mapping], budget: Optional[SearchBudget]):
    if Q.lt_aux is None:
        raise QOError(f"{Q.name} has no auxiliary relation; cannot minimize")
    values = seed.values if isinstance(seed, BadStream) else dict(seed)
    if not values:
        raise EngineError("empty seed")
    for q in values.values():
        Q.check(q)
    ascending = bad_pairs(values, Q)
    if ascending:
        s, t = ascending[0]
        raise EngineError(f"seed is not bad: {s} ◁ {t} with values ascending")
    return values, budget or default_budget()


def locally_minimal_bad_array(Q: QPresentation, f: Union[BadStream, Mapping[FinSeq, Any]],
                              budget: Optional[SearchBudget] = None) -> EngineResult:
    values, budget = _prepare(Q, f, budget)
    return _Engine(Q, values, budget).run()


def minimal_bad_sequence(Q: QPresentation, seed: Union[BadStream, Sequence[Any]],
                         budget: Optional[SearchBudget] = None) -> EngineResult:
    """The array construction on the singleton domain ``(0,), (1,), ...``."""
    if not isinstance(seed, BadStream):
        seed = BadStream.sequence(seed)
    if not seed.is_sequence:
        raise EngineError("minimal_bad_sequence needs a singleton-indexed stream")
    return locally_minimal_bad_array(Q, seed, budget)


# -- Higman refuter --------------------------------------------------------------

@dataclass(frozen=True)
class GoodPair:
    i: int
    j: int
    witness: Witness
    method: str
    examined: int
    fuel_used: int


@dataclass(frozen=True)
class FuelExhausted:
    reason: str
    examined: int
    fuel_used: int


class _Fuel:
    def __init__(self, total: int):
        self.total = total
        self.used = 0

    def spend(self, n: int = 1) -> None:
        self.used += n
        if self.used > self.total:
            raise SearchExhausted("fuel")

    @property
    def left(self) -> int:
        return max(self.total - self.used, 0)


def _as_word(t: Union[SeqTerm, Sequence[Any]]) -> Tuple[Any, ...]:
    if isinstance(t, SeqTerm):
        if not is_finite(t):
            raise EngineError("higman_refute needs finite terms")
        return tuple(atoms(t))
    return tuple(t)


def _letter_order(Q: QPresentation) -> QPresentation:
    base = Q.facts.get("base")
    return base if base is not None else Q


def _decompose(words: Dict[int, Tuple[Any, ...]], Q: QPresentation, fuel: _Fuel,
               min_size: int = 2) -> Optional[Tuple[int, int]]:
    """Last-letter decomposition: on a perfect sub-base of the last letters, a
    pair good for the words without their last letters is good for the words."""
    idx = sorted(words)
    if len(idx) < 2:
        return None
    for a, i in enumerate(idx[:-1]):
        if not words[i]:
            return i, idx[a + 1]
    if not words[idx[-1]]:
        idx = idx[:-1]
        if len(idx) < 2:
            return None
    last = {(i,): words[i][-1] for i in idx}
    stats: dict = {}
    try:
        found = perfect_refine(last, Q, tags=("perfect",), min_size=min_size,
                               budget=fuel.left, stats=stats)
    finally:
        fuel.spend(stats.get("nodes", 0) + len(idx) ** 2)
    if found is None:
        return None
    keep = [s[0] for s in found.fragment.members]
    return _decompose({i: words[i][:-1] for i in keep}, Q, fuel, min_size)


def higman_refute(Q: QPresentation, stream: Iterable[Union[SeqTerm, Sequence[Any]]],
                  budget: Optional[SearchBudget] = None, *,
                  window: int = 10) -> Union[GoodPair, FuelExhausted]:
    """Find ``i < j`` with ``stream[i]`` embedding in ``stream[j]``.

    ``Q`` orders the letters.  Each new element is first tried with the
    decomposition over the last ``window`` elements; a direct scan against all
    earlier elements follows.  The pair is re-verified with ``decide_embed``.
    """
    budget = budget or default_budget()
    letters = _letter_order(Q)
    fuel = _Fuel(budget.fuel)
    terms: List[SeqTerm] = []
    words: List[Tuple[Any, ...]] = []
    try:
        for j, item in enumerate(stream):
            word = _as_word(item)
            for x in word:
                letters.check(x)
            words.append(word)
            terms.append(item if isinstance(item, SeqTerm) else seq(word))
            pair = None
            method = "decomposition"
            recent = {i: words[i] for i in range(max(0, j + 1 - window), j + 1)}
            try:
                pair = _decompose(recent, letters, fuel)
            except SearchExhausted:
                if fuel.left == 0:
                    raise
                pair = None
            if pair is not None and not _embeds_words(words[pair[0]], words[pair[1]], letters, fuel):
                pair = None
            if pair is None:
                method = "scan"
                for i in range(j):
                    if _embeds_words(words[i], word, letters, fuel):
                        pair = (i, j)
                        break
            if pair is not None:
                i, k = pair
                w = decide_embed(terms[i], terms[k], letters)
                if w is None:
                    raise AssertionError("refuter produced a pair that does not embed")
                verify_witness(terms[i], terms[k], w, letters)
                return GoodPair(i, k, w, method, j + 1, fuel.used)
    except SearchExhausted:
        return FuelExhausted("fuel", len(words), fuel.used)
    return FuelExhausted("stream-ended", len(words), fuel.used)


def _embeds_words(s: Sequence[Any], t: Sequence[Any], Q: QPresentation, fuel: _Fuel) -> bool:
    fuel.spend()
    j = 0
    for x in s:
        while j < len(t) and not Q.leq(x, t[j]):
            j += 1
        if j == len(t):
            return False
        j += 1
    return True


"""Blocks, barriers, arrays and the desk-scale Ramsey search.

Finite sequences of naturals are strictly increasing tuples.  An infinite
block or barrier is represented by a :class:`BarrierFragment`: the members
whose entries lie in a finite window ``{0..N}``, together with the intended
base (a subset of the window).  Every check here is a statement about the
fragment, and reports always name the window they were made on.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

from .qo import QPresentation

__all__ = [
    "FinSeq",
    "BarrierError",
    "SearchExhausted",
    "as_finseq",
    "lh",
    "minus",
    "is_prefix",
    "is_proper_prefix",
    "is_subset",
    "is_proper_subset",
    "triangle",
    "BarrierFragment",
    "FragmentReport",
    "uniform",
    "rank_omega",
    "singletons",
    "verify_block_fragment",
    "verify_barrier_fragment",
    "refine_block_to_barrier",
    "b_squared",
    "project",
    "triangle_pairs",
    "ArrayClass",
    "classify_array",
    "is_bad_array",
    "homogeneous_sub_base",
    "perfect_refine",
    "Refinement",
    "parse_fragment",
    "load_fragment",
    "builtin_fragment",
]

FinSeq = Tuple[int, ...]


class BarrierError(ValueError):
    def __init__(self, msg: str, line: int | None = None, column: int | None = None):
        super().__init__(msg if line is None else f"line {line}, column {column}: {msg}")
        self.line = line
        self.column = column


class SearchExhausted(RuntimeError):
    """A bounded search ran out of nodes before deciding."""


def as_finseq(entries: Iterable[int]) -> FinSeq:
    s = tuple(entries)
    for i, x in enumerate(s):
        if not isinstance(x, int) or isinstance(x, bool) or x < 0:
            raise BarrierError(f"entry {x!r} is not a natural number")
        if i and s[i - 1] >= x:
            raise BarrierError(f"{s} is not strictly increasing")
    return s


def lh(s: FinSeq) -> int:
    return len(s)


def minus(s: FinSeq) -> FinSeq:
    """``s`` without its first entry (the empty sequence stays empty)."""
    return s[1:]


def is_prefix(s: FinSeq, t: FinSeq) -> bool:
    return len(s) <= len(t) and t[: len(s)] == s


def is_proper_prefix(s: FinSeq, t: FinSeq) -> bool:
    return len(s) < len(t) and t[: len(s)] == s


def is_subset(s: FinSeq, t: FinSeq) -> bool:
    return set(s) <= set(t)


def is_proper_subset(s: FinSeq, t: FinSeq) -> bool:
    return len(s) < len(t) and set(s) <= set(t)


def triangle(s: FinSeq, t: FinSeq) -> bool:
    """``s ◁ t``: some increasing ``u`` has ``s ⊑ u`` and ``t ⊑ u⁻``.

    Either ``u = s`` works (``t ⊑ s⁻``), or ``u`` extends ``s⁻`` past it, in
    which case ``u = ⟨s(0)⟩ ⌢ t`` and ``t`` must start above ``s(0)``.
    """
    if not s:
        raise BarrierError("triangle needs a nonempty left argument")
    rest = s[1:]
    if is_prefix(t, rest):
        return True
    return is_prefix(rest, t) and (not t or s[0] < t[0])


# -- fragments -------------------------------------------------------------------

@dataclass(frozen=True)
class BarrierFragment:
    members: frozenset
    window: int
    base: Tuple[int, ...] = ()
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "members", frozenset(as_finseq(s) for s in self.members))
        if self.window < 0:
            raise BarrierError("window must be a natural number")
        base = tuple(sorted(set(self.base))) if self.base else tuple(range(self.window + 1))
        if base and (base[0] < 0 or base[-1] > self.window):
            raise BarrierError("intended base must lie inside the window")
        object.__setattr__(self, "base", base)
        for s in self.members:
            if s and s[-1] > self.window:
                raise BarrierError(f"member {s} leaves the window {{0..{self.window}}}")

    def sorted_members(self) -> List[FinSeq]:
        return sorted(self.members, key=member_key)

    def induced(self, sub_base: Iterable[int], label: str = "") -> "BarrierFragment":
        """``{s in B : s ⊆ sub_base}`` with ``sub_base`` as intended base."""
        h = frozenset(sub_base)
        return BarrierFragment(frozenset(s for s in self.members if h.issuperset(s)),
                               self.window, tuple(sorted(h)), label or self.label)

    def to_json(self) -> dict:
        return {
            "window": self.window,
            "base": list(self.base),
            "members": [list(s) for s in self.sorted_members()],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "BarrierFragment":
        return cls(frozenset(tuple(s) for s in data["members"]), int(data["window"]),
                   tuple(data.get("base", ())))


def member_key(s: FinSeq) -> tuple:
    """Canonical order: by largest entry, then lexicographically."""
    return (s[-1] if s else -1, s)


def uniform(k: int, window: int) -> BarrierFragment:
    """``[N]^k`` restricted to the window."""
    return BarrierFragment(frozenset(itertools.combinations(range(window + 1), k)), window,
                           label=f"uniform:{k}:{window}")


def singletons(window: int) -> BarrierFragment:
    return uniform(1, window)


def rank_omega(window: int) -> BarrierFragment:
    """``{s : lh(s) = s(0) + 1}`` restricted to the window."""
    members = set()
    for first in range(window + 1):
        for rest in itertools.combinations(range(first + 1, window + 1), first):
            members.add((first,) + rest)
    return BarrierFragment(frozenset(members), window, label=f"rankomega:{window}")


@dataclass
class FragmentReport:
    kind: str
    window: int
    base: Tuple[int, ...]
    hard: List[str] = field(default_factory=list)
    soft: List[str] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.hard

    def to_json(self) -> dict:
        return {"kind": self.kind, "window": self.window, "base": list(self.base),
                "ok": self.ok, "hard": self.hard, "soft": self.soft, "notes": self.notes}


def _check_base(B: BarrierFragment, report: FragmentReport) -> None:
    used = set()
    for s in B.members:
        used.update(s)
    intended = set(B.base)
    stray = sorted(used - intended)
    missing = sorted(intended - used)
    if stray:
        report.hard.append(f"(1) members use {stray[:8]} outside the intended base")
    if missing:
        report.hard.append(f"(1) intended base elements {missing[:8]} occur in no member")
    report.notes.append("(1) checked as: base(B) equals the intended base on the window "
                        "(finite surrogate for an infinite base)")


def _check_paths(B: BarrierFragment, report: FragmentReport, max_nodes: int) -> None:
    """Every increasing path through the base has a proper prefix in B, or runs
    out of window first (soft)."""
    members = B.members
    base = B.base
    uncovered = []
    nodes = 0
    stack: List[Tuple[FinSeq, int]] = [((), 0)]
    while stack:
        path, start = stack.pop()
        nodes += 1
        if nodes > max_nodes:
            report.soft.append(f"(2) path search stopped after {max_nodes} nodes")
            break
        if path in members:
            continue
        if start == len(base):
            if len(uncovered) < 5:
                uncovered.append(path)
            else:
                uncovered.append(None)
            continue
        for j in range(len(base) - 1, start - 1, -1):
            stack.append((path + (base[j],), j + 1))
    real = [p for p in uncovered if p is not None]
    if uncovered:
        report.soft.append(f"(2) {len(uncovered)} maximal path(s) leave the window without "
                           f"meeting B, e.g. {real[0]} (window too small)")


def _prefix_violations(B: BarrierFragment) -> List[str]:
    out = []
    for t in B.sorted_members():
        for i in range(len(t)):
            if t[:i] in B.members:
                out.append(f"(3) {t[:i]} is a proper initial segment of {t}")
    return out


def _subset_violations(B: BarrierFragment) -> List[str]:
    out = []
    members = B.members
    for t in sorted(members, key=member_key):
        if 2 ** len(t) <= 4 * len(members):
            for k in range(len(t)):
                for s in itertools.combinations(t, k):
                    if s in members:
                        out.append(f"(3') {s} is a proper subset of {t}")
        else:
            st = set(t)
            for s in members:
                if len(s) < len(t) and st.issuperset(s):
                    out.append(f"(3') {s} is a proper subset of {t}")
    return sorted(set(out))


def verify_block_fragment(B: BarrierFragment, *, max_nodes: int = 200_000) -> FragmentReport:
    report = FragmentReport("block", B.window, B.base)
    _check_base(B, report)
    _check_paths(B, report, max_nodes)
    report.hard.extend(_prefix_violations(B))
    return report


def verify_barrier_fragment(B: BarrierFragment, *, max_nodes: int = 200_000) -> FragmentReport:
    report = FragmentReport("barrier", B.window, B.base)
    _check_base(B, report)
    _check_paths(B, report, max_nodes)
    report.hard.extend(_subset_violations(B))
    return report


def refine_block_to_barrier(B: BarrierFragment, *, budget: Optional[int] = None) -> BarrierFragment:
    """A barrier inside the block ``B``.

    Keeps ``B1 = {s in B : no t in B is a proper subset of s}`` and then looks for
    the largest sub-base ``H`` (lexicographically least among equals) whose
    induced block lies inside ``B1``.
    """
    report = verify_block_fragment(B)
    if not report.ok:
        raise BarrierError("input is not a block fragment: " + "; ".join(report.hard[:3]))
    members = B.members
    inner = frozenset(s for s in members
                      if not any(sub in members for k in range(len(s))
                                 for sub in itertools.combinations(s, k)))
    if inner == members:
        return B
    coloring = {s: (1 if s in inner else 2) for s in members}
    for size in range(len(B.base), 0, -1):
        h = homogeneous_sub_base(B, coloring, size, colors=(1,), budget=budget)
        if h is not None:
            return B.induced(h, label=f"{B.label} refined" if B.label else "refined")
    raise BarrierError("no sub-base of the window induces a barrier")


# -- B squared ---------------------------------------------------------------

def _prefix_index(members: Iterable[FinSeq]) -> Dict[FinSeq, List[FinSeq]]:
    index: Dict[FinSeq, List[FinSeq]] = {}
    for t in sorted(members, key=member_key):
        for i in range(len(t) + 1):
            index.setdefault(t[:i], []).append(t)
    return index


def triangle_pairs(members: Iterable[FinSeq]) -> Iterator[Tuple[FinSeq, FinSeq]]:
    """All ``(s, t)`` with ``s ◁ t`` among the members, in canonical order."""
    members = sorted(set(members), key=member_key)
    present = set(members)
    index = _prefix_index(members)
    for s in members:
        if not s:
            continue
        rest = s[1:]
        found = set()
        for i in range(len(rest) + 1):
            if rest[:i] in present:
                found.add(rest[:i])
        for t in index.get(rest, ()):
            if not t or s[0] < t[0]:
                found.add(t)
        for t in sorted(found, key=member_key):
            yield s, t


def b_squared(B: BarrierFragment) -> BarrierFragment:
    """``{s ∪ t : s, t in B, s ◁ t}`` on the same window."""
    out = set()
    for s, t in triangle_pairs(B.members):
        out.add(tuple(sorted(set(s) | set(t))))
    used = sorted({x for u in out for x in u})
    return BarrierFragment(frozenset(out), B.window, tuple(used) or B.base,
                           label=f"({B.label})^2" if B.label else "")


def project(u: FinSeq, B: BarrierFragment) -> Tuple[FinSeq, FinSeq]:
    """The unique ``(p0, p1)`` in ``B`` with ``p0 ∪ p1 = u`` and ``p0 ◁ p1``."""
    u = as_finseq(u)
    members = B.members
    inside = [s for k in range(1, len(u) + 1) for s in itertools.combinations(u, k) if s in members]
    found = [(s, t) for s in inside for t in inside
             if set(s) | set(t) == set(u) and triangle(s, t)]
    if not found:
        raise BarrierError(f"{u} is not the union of a ◁-pair of members")
    if len(found) > 1:
        raise BarrierError(f"{u} decomposes in {len(found)} ways; input is not a barrier")
    return found[0]


# -- arrays --------------------------------------------------------------------

@dataclass(frozen=True)
class ArrayClass:
    """Outcome of scanning every ◁-pair of an array's domain.

    ``kind`` is ``"bad"`` when no pair ascends (this includes a domain with no
    ◁-pairs at all), ``"perfect"`` when every pair ascends, ``"mixed"`` otherwise.
    """

    kind: str
    good: Optional[Tuple[FinSeq, FinSeq]]
    bad: Optional[Tuple[FinSeq, FinSeq]]
    pairs: int

    @property
    def is_good(self) -> bool:
        return self.good is not None

    @property
    def is_bad(self) -> bool:
        return self.good is None

    @property
    def is_perfect(self) -> bool:
        return self.bad is None


def classify_array(f: Mapping[FinSeq, object], Q: QPresentation) -> ArrayClass:
    good = bad = None
    count = 0
    for s, t in triangle_pairs(f.keys()):
        count += 1
        if Q.leq(f[s], f[t]):
            good = good or (s, t)
        else:
            bad = bad or (s, t)
    if good is None:
        kind = "bad"
    elif bad is None:
        kind = "perfect"
    else:
        kind = "mixed"
    return ArrayClass(kind, good, bad, count)


def is_bad_array(f: Mapping[FinSeq, object], Q: QPresentation) -> bool:
    return classify_array(f, Q).is_bad


def homogeneous_sub_base(B: BarrierFragment, coloring: Mapping[FinSeq, int] | Callable[[FinSeq], int],
                         target: int, *, colors: Optional[Sequence[int]] = None,
                         budget: Optional[int] = None,
                         stats: Optional[dict] = None) -> Optional[Tuple[int, ...]]:
    """Lexicographically least ``H`` of size ``target`` inside the intended base
    whose induced fragment is monochromatic and uses every element of ``H``.

    ``colors`` restricts which colour the fragment may have.  ``None`` means no
    subset of the window works (a statement about the window only).  Raises
    :class:`SearchExhausted` when ``budget`` search nodes are not enough.
    ``stats["nodes"]`` is incremented by the number of nodes visited.
    """
    color_of = coloring.get if isinstance(coloring, Mapping) else coloring
    base = B.base
    if target > len(base):
        return None
    if target <= 0:
        return ()
    allowed = None if colors is None else frozenset(colors)
    by_max: Dict[int, List[FinSeq]] = {}
    for s in B.members:
        if s:
            by_max.setdefault(s[-1], []).append(s)
    nodes = 0

    def search(chosen: List[int], chosen_set: set, start: int, colour, covered: set):
        nonlocal nodes
        if len(chosen) == target:
            return tuple(chosen) if covered >= chosen_set else None
        for j in range(start, len(base) - (target - len(chosen)) + 1):
            nodes += 1
            if budget is not None and nodes > budget:
                raise SearchExhausted(f"homogeneous search exceeded {budget} nodes")
            x = base[j]
            chosen_set.add(x)
            c = colour
            new_cover = set()
            ok = True
            for s in by_max.get(x, ()):
                if chosen_set.issuperset(s):
                    k = color_of(s)
                    if (allowed is not None and k not in allowed) or (c is not None and k != c):
                        ok = False
                        break
                    c = k
                    new_cover.update(s)
            if ok:
                chosen.append(x)
                got = search(chosen, chosen_set, j + 1, c, covered | new_cover)
                chosen.pop()
                if got is not None:
                    return got
            chosen_set.discard(x)
        return None

    try:
        return search([], set(), 0, None, set())
    finally:
        if stats is not None:
            stats["nodes"] = stats.get("nodes", 0) + nodes


@dataclass(frozen=True)
class Refinement:
    tag: str
    fragment: BarrierFragment
    square_base: Tuple[int, ...]


def perfect_refine(f: Mapping[FinSeq, object], Q: QPresentation, B: Optional[BarrierFragment] = None, *,
                   tags: Sequence[str] = ("bad", "perfect"), min_size: int = 1,
                   budget: Optional[int] = None,
                   stats: Optional[dict] = None) -> Optional[Refinement]:
    """A sub-fragment on which ``f`` is bad or perfect.

    Colours each member ``u`` of ``B²`` by whether ``f(π0(u)) ≼ f(π1(u))``,
    searches homogeneous sub-bases of ``B²`` from the largest size down, and
    restricts ``f``'s domain to the members inside the sub-base found.
    """
    if B is None:
        window = max((x for s in f for x in s), default=0)
        B = BarrierFragment(frozenset(f.keys()), window)
    square = b_squared(B)
    coloring = {}
    for s, t in triangle_pairs(B.members):
        u = tuple(sorted(set(s) | set(t)))
        coloring[u] = 1 if Q.leq(f[s], f[t]) else 2
    wanted = tuple(c for tag, c in (("perfect", 1), ("bad", 2)) if tag in tags)
    for size in range(len(square.base), min_size - 1, -1):
        h = homogeneous_sub_base(square, coloring, size, colors=wanted, budget=budget, stats=stats)
        if h is None:
            continue
        sub = B.induced(h)
        induced_square = [u for u in square.members if set(u) <= set(h)]
        colour = coloring[induced_square[0]] if induced_square else None
        kind = classify_array({s: f[s] for s in sub.members}, Q)
        if kind.kind == "mixed":
            continue
        if colour is None:
            tag = kind.kind
        else:
            tag = "perfect" if colour == 1 else "bad"
        if tag in tags:
            return Refinement(tag, sub, h)
    return None


# -- file format ---------------------------------------------------------------

def parse_fragment(text: str, *, window: Optional[int] = None) -> BarrierFragment:
    """One member per line as space-separated naturals; ``#`` starts a comment.

    The window defaults to the largest entry.
    """
    members = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        entries = []
        for m in _tokens(line):
            tok, col = m
            if not tok.isdigit():
                raise BarrierError(f"expected a natural number, found {tok!r}", lineno, col)
            entries.append(int(tok))
        for i in range(1, len(entries)):
            if entries[i - 1] >= entries[i]:
                raise BarrierError("entries must be strictly increasing", lineno, 1)
        members.add(tuple(entries))
    top = max((x for s in members for x in s), default=0)
    if window is None:
        window = top
    elif top > window:
        raise BarrierError(f"entry {top} exceeds the window {window}")
    return BarrierFragment(frozenset(members), window)


def _tokens(line: str) -> Iterator[Tuple[str, int]]:
    pos = 0
    for tok in line.split():
        pos = line.index(tok, pos)
        yield tok, pos + 1
        pos += len(tok)


def load_fragment(path, *, window: Optional[int] = None) -> BarrierFragment:
    with open(path, encoding="utf-8") as fh:
        return parse_fragment(fh.read(), window=window)


def builtin_fragment(spec: str) -> BarrierFragment:
    """``uniform:k:window`` or ``rankomega:window``."""
    parts = spec.split(":")
    try:
        if parts[0] == "uniform" and len(parts) == 3:
            return uniform(int(parts[1]), int(parts[2]))
        if parts[0] == "rankomega" and len(parts) == 2:
            return rank_omega(int(parts[1]))
    except ValueError as exc:
        raise BarrierError(f"bad builtin fragment {spec!r}: {exc}") from None
    raise BarrierError(f"unknown builtin fragment {spec!r}")

"""Kleene-Brouwer order, leftmost paths and the well-foundedness decoder.

Trees are :class:`LassoTree` values: a finite prefix-closed node set plus
finitely many *lassos* ``stem ⌢ cycle ⌢ cycle ⌢ ...``.  The tree is the node
set together with every finite prefix of a lasso path, so its infinite paths
are exactly the lasso paths.  That makes well-foundedness and the leftmost
path computable.

Interleaving uses the row-major pairing ``(i, n) -> i*k + n`` for ``k``
trees: column ``n`` of a sequence ``u`` is ``u(n), u(k+n), u(2k+n), ...``.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, List, Optional, Sequence, Tuple

__all__ = [
    "KB",
    "Lasso",
    "LassoTree",
    "InterleavedTree",
    "TreeError",
    "kb_compare",
    "kb_leq",
    "is_well_founded",
    "leftmost_path",
    "guard_transform",
    "interleave",
    "decode_wf",
    "normalize_lasso",
    "lasso_prefix",
    "same_path",
    "compare_paths",
    "kb_presentation",
    "parse_tree",
    "load_tree",
    "format_tree",
]

Seq = Tuple[int, ...]


class TreeError(ValueError):
    def __init__(self, msg: str, line: int | None = None, column: int | None = None):
        super().__init__(msg if line is None else f"line {line}, column {column}: {msg}")
        self.line = line
        self.column = column


class KB(enum.Enum):
    LE = "LE"
    GT = "GT"


def kb_compare(s: Sequence[int], t: Sequence[int]) -> KB:
    """``s <=_KB t`` iff ``t ⊑ s`` or ``s`` branches left of ``t`` at their first difference."""
    s, t = tuple(s), tuple(t)
    if len(t) <= len(s) and s[: len(t)] == t:
        return KB.LE
    for a, b in zip(s, t):
        if a != b:
            return KB.LE if a < b else KB.GT
    return KB.GT


def kb_leq(s: Sequence[int], t: Sequence[int]) -> bool:
    return kb_compare(s, t) is KB.LE


# -- lassos ----------------------------------------------------------------------

@dataclass(frozen=True, order=True)
class Lasso:
    stem: Seq
    cycle: Seq

    def __post_init__(self):
        object.__setattr__(self, "stem", _naturals(self.stem))
        object.__setattr__(self, "cycle", _naturals(self.cycle))
        if not self.cycle:
            raise TreeError("a lasso needs a nonempty cycle")

    def at(self, i: int) -> int:
        if i < len(self.stem):
            return self.stem[i]
        return self.cycle[(i - len(self.stem)) % len(self.cycle)]

    def prefix(self, n: int) -> Seq:
        return tuple(self.at(i) for i in range(n))

    def __str__(self) -> str:
        return " ".join(map(str, self.stem)) + "|" + " ".join(map(str, self.cycle))


def _naturals(xs: Iterable[int]) -> Seq:
    out = tuple(xs)
    for x in out:
        if not isinstance(x, int) or isinstance(x, bool) or x < 0:
            raise TreeError(f"{x!r} is not a natural number")
    return out


def lasso_prefix(lasso: Lasso, n: int) -> Seq:
    return lasso.prefix(n)


def _agreement_horizon(a: Lasso, b: Lasso) -> int:
    """Eventually periodic sequences agreeing this far agree everywhere."""
    cycles = math.lcm(len(a.cycle), len(b.cycle))
    return max(len(a.stem), len(b.stem)) + cycles


def compare_paths(a: Lasso, b: Lasso) -> int:
    """Lexicographic comparison of the infinite paths (-1, 0, 1)."""
    for i in range(_agreement_horizon(a, b)):
        x, y = a.at(i), b.at(i)
        if x != y:
            return -1 if x < y else 1
    return 0


def same_path(a: Lasso, b: Lasso) -> bool:
    return compare_paths(a, b) == 0


def normalize_lasso(lasso: Lasso) -> Lasso:
    """Shortest stem and primitive cycle for the same path."""
    stem, cycle = lasso.stem, lasso.cycle
    n = len(cycle)
    for d in range(1, n + 1):
        if n % d == 0 and cycle == cycle[:d] * (n // d):
            cycle = cycle[:d]
            break
    while stem and stem[-1] == cycle[-1]:
        stem, cycle = stem[:-1], (cycle[-1],) + cycle[:-1]
    return Lasso(stem, cycle)


# -- trees -----------------------------------------------------------------------

@dataclass(frozen=True)
class LassoTree:
    nodes: frozenset = frozenset()
    lassos: Tuple[Lasso, ...] = ()

    def __post_init__(self):
        nodes = frozenset(_naturals(u) for u in self.nodes)
        lassos = tuple(x if isinstance(x, Lasso) else Lasso(*x) for x in self.lassos)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "lassos", lassos)
        self._validate()

    def _validate(self) -> None:
        for u in self.nodes:
            if u and u[:-1] not in self.nodes:
                raise TreeError(f"node set is not prefix-closed: {u} lacks {u[:-1]}")
        for x in self.lassos:
            if x.stem not in self.nodes:
                raise TreeError(f"lasso stem {x.stem} is not a node")

    def contains(self, u: Sequence[int]) -> bool:
        u = tuple(u)
        if u in self.nodes:
            return True
        return any(x.prefix(len(u)) == u for x in self.lassos)

    def __contains__(self, u) -> bool:
        return self.contains(u)

    def depth(self) -> int:
        return max((len(u) for u in self.nodes), default=0)

    def nodes_to_depth(self, d: int) -> List[Seq]:
        """Every tree node of length <= d (finite nodes and lasso prefixes)."""
        out = {u for u in self.nodes if len(u) <= d}
        for x in self.lassos:
            out.update(x.prefix(n) for n in range(d + 1))
        return sorted(out)

    def to_json(self) -> dict:
        return {
            "nodes": [list(u) for u in sorted(self.nodes, key=lambda u: (len(u), u))],
            "lassos": [[list(x.stem), list(x.cycle)] for x in self.lassos],
        }

    @classmethod
    def from_json(cls, data) -> "LassoTree":
        return cls(frozenset(tuple(u) for u in data["nodes"]),
                   tuple(Lasso(tuple(s), tuple(c)) for s, c in data["lassos"]))


class InterleavedTree(LassoTree):
    """Interleaving of ``columns``; membership is decided column by column and the
    finite node set is only built on demand."""

    def __init__(self, columns: Sequence[LassoTree], lassos: Sequence[Lasso],
                 truncated: int, cycle_bound: int):
        object.__setattr__(self, "columns", tuple(columns))
        object.__setattr__(self, "lassos", tuple(lassos))
        object.__setattr__(self, "truncated", truncated)
        object.__setattr__(self, "cycle_bound", cycle_bound)

    def __setattr__(self, name, value):
        raise AttributeError("InterleavedTree is immutable")

    def column(self, u: Sequence[int], n: int) -> Seq:
        return tuple(u[n:: len(self.columns)])

    def contains(self, u: Sequence[int]) -> bool:
        return all(T.contains(self.column(u, n)) for n, T in enumerate(self.columns))

    @cached_property
    def _finite_nodes(self) -> frozenset:
        k = len(self.columns)
        limit = k * (max(T.depth() for T in self.columns) + 1)
        out = {()}
        frontier = [()]
        while frontier:
            nxt = []
            for u in frontier:
                if len(u) >= limit:
                    continue
                T = self.columns[len(u) % k]
                col = self.column(u, len(u) % k)
                for x in _children(T, col):
                    v = u + (x,)
                    if v not in out:
                        out.add(v)
                        nxt.append(v)
            frontier = nxt
        return frozenset(out)

    @property
    def nodes(self) -> frozenset:  # type: ignore[override]
        return self._finite_nodes

    def depth(self) -> int:
        return max((len(u) for u in self.nodes), default=0)

    def __eq__(self, other) -> bool:
        return (isinstance(other, InterleavedTree) and self.columns == other.columns
                and self.lassos == other.lassos)

    def __hash__(self) -> int:
        return hash((self.columns, self.lassos))

    def __repr__(self) -> str:
        return f"InterleavedTree({len(self.columns)} columns, {len(self.lassos)} lassos)"


def _children(T: LassoTree, u: Seq) -> List[int]:
    out = {v[-1] for v in T.nodes if len(v) == len(u) + 1 and v[:-1] == u}
    for x in T.lassos:
        if x.prefix(len(u)) == u:
            out.add(x.at(len(u)))
    return sorted(out)


def is_well_founded(T: LassoTree) -> bool:
    return not T.lassos


@dataclass(frozen=True)
class LeftmostPath:
    path: Lasso
    chain: Tuple[Seq, ...] = field(default=())

    def prefix(self, n: int) -> Seq:
        return self.path.prefix(n)


def leftmost_path(T: LassoTree) -> Optional[LeftmostPath]:
    """The leftmost infinite path, or None when ``T`` is well-founded.

    Descends greedily: at each step take the least next entry among lassos still
    consistent with the prefix, until the survivors all denote one path.
    ``chain`` records the prefixes visited on the way down.
    """
    alive = list(T.lassos)
    if not alive:
        return None
    prefix: Seq = ()
    chain = [prefix]
    while not all(same_path(alive[0], x) for x in alive[1:]):
        i = len(prefix)
        least = min(x.at(i) for x in alive)
        alive = [x for x in alive if x.at(i) == least]
        prefix = prefix + (least,)
        chain.append(prefix)
    return LeftmostPath(normalize_lasso(alive[0]), tuple(chain))


def guard_transform(T: LassoTree) -> LassoTree:
    """``{⟨0⟩ ⌢ s : s in T}`` plus the all-ones branch."""
    nodes = {()} | {(0,) + u for u in T.nodes}
    lassos = [Lasso((0,) + x.stem, x.cycle) for x in T.lassos] + [Lasso((), (1,))]
    return LassoTree(frozenset(nodes), tuple(lassos))


def interleave(trees: Sequence[LassoTree], *, cycle_bound: int = 4096) -> InterleavedTree:
    """The tree of sequences whose every column lies in the matching tree.

    One product lasso per choice of a lasso in each column; choices whose
    interleaved cycle would exceed ``cycle_bound`` entries are dropped and
    counted in ``truncated``.
    """
    trees = list(trees)
    if not trees:
        raise TreeError("interleave needs at least one tree")
    k = len(trees)
    lassos = []
    truncated = 0
    for choice in itertools.product(*(T.lassos for T in trees)):
        rows_stem = max(len(x.stem) for x in choice)
        rows_cycle = math.lcm(*(len(x.cycle) for x in choice))
        if rows_cycle * k > cycle_bound:
            truncated += 1
            continue
        stem = tuple(choice[p % k].at(p // k) for p in range(rows_stem * k))
        cycle = tuple(choice[p % k].at(p // k)
                      for p in range(rows_stem * k, (rows_stem + rows_cycle) * k))
        lassos.append(normalize_lasso(Lasso(stem, cycle)))
    unique = []
    for x in sorted(set(lassos)):
        if not any(same_path(x, y) for y in unique):
            unique.append(x)
    return InterleavedTree(trees, unique, truncated, cycle_bound)


@dataclass(frozen=True)
class Decoding:
    indices: frozenset
    path: Optional[LeftmostPath]
    truncated: int


def decode_wf(trees: Sequence[LassoTree]) -> Decoding:
    """Indices ``n`` with ``f((0, n)) = 1`` for the leftmost path ``f`` of the
    interleaved guarded trees; these are exactly the well-founded trees."""
    trees = list(trees)
    if not trees:
        raise TreeError("decode_wf needs at least one tree")
    T = interleave([guard_transform(t) for t in trees])
    f = leftmost_path(T)
    if f is None:
        raise AssertionError("guarded interleaving has no infinite path")
    z = frozenset(n for n in range(len(trees)) if f.path.at(n) == 1)
    return Decoding(z, f, T.truncated)


def kb_presentation(T: LassoTree, depth: int):
    """Tree nodes up to ``depth`` ordered by ``<=_KB``, with ``s <' t`` iff
    ``s <_KB t`` and ``lh(s) <= lh(t)``."""
    from .qo import QPresentation

    elements = tuple(T.nodes_to_depth(depth))
    present = frozenset(elements)

    def lt(s, t):
        return s != t and kb_leq(s, t) and len(s) <= len(t)

    return QPresentation(
        leq=kb_leq,
        elements=elements,
        lt_aux=lt,
        contains=lambda u: u in present,
        key=lambda u: (len(u), u),
        name="KB",
    )


# -- file format -------------------------------------------------------------------

def parse_tree(text: str) -> LassoTree:
    """``node a b c`` lines and ``lasso <stem>|<cycle>`` lines; ``#`` comments.

    Missing prefixes of listed nodes and lasso stems are added.
    """
    nodes = set()
    lassos = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        head = line.split()[0]
        body = line[line.index(head) + len(head):]
        offset = line.index(head) + len(head)
        if head == "node":
            nodes.add(_parse_nats(body, lineno, offset))
        elif head == "lasso":
            if body.count("|") != 1:
                raise TreeError("lasso needs exactly one '|' between stem and cycle",
                                lineno, offset + 1)
            left, right = body.split("|")
            stem = _parse_nats(left, lineno, offset)
            cycle = _parse_nats(right, lineno, offset + len(left) + 1)
            if not cycle:
                raise TreeError("lasso cycle is empty", lineno, offset + len(left) + 2)
            lassos.append(Lasso(stem, cycle))
            nodes.add(stem)
        else:
            raise TreeError(f"unknown directive {head!r}", lineno, line.index(head) + 1)
    closed = set()
    for u in nodes:
        closed.update(u[:i] for i in range(len(u) + 1))
    return LassoTree(frozenset(closed), tuple(lassos))


def _parse_nats(text: str, lineno: int, offset: int) -> Seq:
    out = []
    pos = 0
    for tok in text.split():
        pos = text.index(tok, pos)
        if not tok.isdigit():
            raise TreeError(f"expected a natural number, found {tok!r}", lineno, offset + pos + 1)
        out.append(int(tok))
        pos += len(tok)
    return tuple(out)


def load_tree(path) -> LassoTree:
    with open(path, encoding="utf-8") as fh:
        return parse_tree(fh.read())


def format_tree(T: LassoTree) -> str:
    lines = []
    for u in sorted(T.nodes, key=lambda u: (len(u), u)):
        lines.append(("node " + " ".join(map(str, u))).rstrip())
    for x in T.lassos:
        lines.append(f"lasso {x}")
    return "\n".join(lines) + "\n"


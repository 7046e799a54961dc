"""Hereditary structure of sequence terms.

A term is *H-shaped* when it is an atom or an OmegaRep, i.e. when its root is
not a concatenation.  Every H-shaped term carries a canonical tree of
intervals: the root covers the whole sequence, an atom is a leaf, and the
``n``-th child of an OmegaRep node is the ``n``-th entry of its unfolded cycle.
:class:`HCertificate` exposes that tree lazily; :func:`check_h_conditions`
expands it to a finite depth and width and checks the defining conditions
literally.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from .ordinal import (
    ONE,
    ZERO,
    Order,
    Ordinal,
    add,
    compare,
    format_ordinal,
    fundamental_sequence,
    mul_nat,
)
from .qo import QPresentation, from_relation
from .terms import (
    Atom,
    Concat,
    OmegaRep,
    SeqTerm,
    format_term,
    length,
    rep,
    restrict,
)

__all__ = [
    "HNode",
    "HCertificate",
    "h_certificate",
    "is_h_shaped",
    "check_h_conditions",
    "verify_h_certificate",
    "hi_decompose",
]


def is_h_shaped(t: SeqTerm) -> bool:
    return isinstance(t, (Atom, OmegaRep))


@dataclass(frozen=True)
class HNode:
    path: Tuple[int, ...]
    alpha: Ordinal
    beta: Ordinal
    term: SeqTerm

    @property
    def is_endnode(self) -> bool:
        return isinstance(self.term, Atom)


def _cycle_offsets(t: OmegaRep) -> Tuple[List[Ordinal], Ordinal]:
    offsets = []
    total = ZERO
    for e in t.cycle:
        offsets.append(total)
        total = add(total, length(e))
    return offsets, total


class HCertificate:
    """The interval tree of an H-shaped term."""

    def __init__(self, term: SeqTerm):
        if not is_h_shaped(term):
            raise ValueError("not an H-shaped term")
        self.term = term
        self.root = HNode((), ZERO, length(term), term)

    def child(self, node: HNode, n: int) -> HNode:
        if not isinstance(node.term, OmegaRep):
            raise KeyError(f"endnode {node.path} has no children")
        if n < 0:
            raise KeyError("child index must be a natural number")
        offsets, period = _cycle_offsets(node.term)
        q, i = divmod(n, len(node.term.cycle))
        entry = node.term.cycle[i]
        alpha = add(node.alpha, add(mul_nat(period, q), offsets[i]))
        return HNode(node.path + (n,), alpha, add(alpha, length(entry)), entry)

    def node(self, path: Sequence[int]) -> HNode:
        cur = self.root
        for n in path:
            cur = self.child(cur, n)
        return cur

    def period(self, node: HNode) -> int:
        """Children ``n`` and ``n + period`` carry the same subterm."""
        if not isinstance(node.term, OmegaRep):
            raise KeyError("endnodes have no children")
        return len(node.term.cycle)

    def expand(self, depth: int, width: Optional[int] = None) -> List[HNode]:
        """Nodes with paths of length <= depth and entries below ``width``
        (default: twice the node's period plus one)."""
        out = [self.root]
        frontier = [self.root]
        for _ in range(depth):
            nxt = []
            for nd in frontier:
                if isinstance(nd.term, OmegaRep):
                    w = width if width is not None else 2 * len(nd.term.cycle) + 1
                    nxt.extend(self.child(nd, n) for n in range(w))
            out.extend(nxt)
            frontier = nxt
        return out

    def to_json(self) -> dict:
        """The finite quotient: one entry per cycle-index path (first repetition)."""
        nodes = []

        def walk(nd: HNode):
            entry = {
                "path": list(nd.path),
                "alpha": format_ordinal(nd.alpha),
                "beta": format_ordinal(nd.beta),
                "term": format_term(nd.term),
            }
            if isinstance(nd.term, OmegaRep):
                entry["period"] = len(nd.term.cycle)
                nodes.append(entry)
                for n in range(len(nd.term.cycle)):
                    walk(self.child(nd, n))
            else:
                nodes.append(entry)

        walk(self.root)
        return {"term": format_term(self.term), "length": format_ordinal(self.root.beta),
                "nodes": nodes}


def h_certificate(t: SeqTerm) -> Optional[HCertificate]:
    """The interval tree of ``t`` when ``t`` is H-shaped, else None."""
    return HCertificate(t) if is_h_shaped(t) else None


_EQUALITY_CACHE: dict = {}


def _equality_order(t: SeqTerm) -> QPresentation:
    """Equality on the atoms of ``t``; the weakest quasi-order, so embeddings
    under it hold under every quasi-order."""
    elements = tuple(dict.fromkeys(_all_atoms(t)))
    got = _EQUALITY_CACHE.get(elements)
    if got is None:
        got = _EQUALITY_CACHE[elements] = from_relation(elements, ())
    return got


def _all_atoms(t: SeqTerm) -> list:
    if isinstance(t, Atom):
        return [t.q]
    children = t.parts if isinstance(t, Concat) else t.cycle
    return [q for c in children for q in _all_atoms(c)]


def check_h_conditions(cert: HCertificate, *, depth: int = 3, width: Optional[int] = None,
                       Q: Optional[QPresentation] = None) -> List[str]:
    """Check the tree conditions on the nodes reachable within ``depth``/``width``.

    For every expanded node: ``alpha < beta``; the restriction to ``[alpha, beta)``
    is the node's subterm; leaves have ``beta = alpha + 1``.  For every inner
    node: children are consecutive and start at ``alpha``, every child is
    below ``beta`` and the children are cofinal in ``beta`` (checked against the
    fundamental sequence), and every child's interval embeds in a later
    sibling's interval.  Returns the list of violations.
    """
    from .embed import embeds

    order = Q or _equality_order(cert.term)
    whole = cert.term
    problems: List[str] = []
    root = cert.root
    if root.alpha != ZERO or root.beta != length(whole):
        problems.append("root does not span the sequence")
    for nd in cert.expand(depth, width):
        where = f"node {list(nd.path)}"
        if compare(nd.alpha, nd.beta) != Order.LT:
            problems.append(f"{where}: empty interval")
            continue
        if compare(nd.beta, root.beta) == Order.GT:
            problems.append(f"{where}: interval leaves the sequence")
            continue
        if restrict(whole, nd.alpha, nd.beta) != nd.term:
            problems.append(f"{where}: interval content differs from the node term")
        if nd.is_endnode:
            if nd.beta != add(nd.alpha, ONE):
                problems.append(f"{where}: endnode interval is not a single position")
            continue
        m = cert.period(nd)
        w = width if width is not None else 2 * m + 1
        kids = [cert.child(nd, n) for n in range(w)]
        cursor = nd.alpha
        for k in kids:
            if k.alpha != cursor:
                problems.append(f"{where}: child {k.path[-1]} is not adjacent to its predecessor")
            if compare(k.beta, nd.beta) != Order.LT:
                problems.append(f"{where}: child {k.path[-1]} reaches the parent's end")
            cursor = k.beta
        for j in range(w // m):
            target = fundamental_sequence(nd.beta, j)
            if compare(kids[(j + 1) * m - 1].beta, target) == Order.LT:
                problems.append(f"{where}: children not cofinal at step {j}")
                break
        for n in range(w - m):
            here = restrict(whole, kids[n].alpha, kids[n].beta)
            if not any(embeds(here, restrict(whole, kids[n2].alpha, kids[n2].beta), order)
                       for n2 in range(n + 1, w)):
                problems.append(f"{where}: child {n} embeds in no later sibling")
    return problems


def verify_h_certificate(term: SeqTerm, data: dict, *, depth: int = 3) -> List[str]:
    """Re-derive the certificate of ``term`` and compare it with ``data``."""
    cert = h_certificate(term)
    if cert is None:
        return ["term is not H-shaped"]
    problems = []
    if cert.to_json() != data:
        problems.append("certificate does not match the term's interval tree")
    return problems + check_h_conditions(cert, depth=depth)


def hi_decompose(t: SeqTerm) -> List[SeqTerm]:
    """Split ``t`` into H-shaped pieces whose concatenation is ``t``.

    Pieces are the top-level parts, with ``x`` followed by ``rep(c0, ..., x)``
    merged into ``rep(x, c0, ...)``.  The empty sequence has no pieces.
    """
    out: List[SeqTerm] = []
    for piece in (t.parts if isinstance(t, Concat) else (t,)):
        out.append(piece)
        while (len(out) >= 2 and isinstance(out[-1], OmegaRep)
               and out[-2] == out[-1].cycle[-1]):
            r = out.pop()
            x = out.pop()
            out.append(rep(x, *r.cycle[:-1]))
    return out

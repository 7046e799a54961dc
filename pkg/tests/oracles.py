"""Independent brute-force oracles and generators shared by the test suite.

Nothing here calls the code under test except for constructing inputs.
"""

from __future__ import annotations

import itertools
import random
from functools import cmp_to_key, lru_cache
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from bqo.engine import CERTIFIED
from bqo.ordinal import Ordinal
from bqo.terms import atom, cat, rep, EMPTY


# -- ordinals --------------------------------------------------------------------
#
# Notations are read only through ``.terms``, the (exponent, coefficient) list.

def ordinal_cmp(a, b) -> int:
    """-1, 0 or 1 by comparing the term lists, highest exponent first."""
    for (ea, ca), (eb, cb) in zip(a.terms, b.terms):
        c = ordinal_cmp(ea, eb)
        if c:
            return c
        if ca != cb:
            return -1 if ca < cb else 1
    return (len(a.terms) > len(b.terms)) - (len(a.terms) < len(b.terms))


def ordinal_add(a, b):
    """Terms of ``a`` below the lead exponent of ``b`` are absorbed."""
    if not b.terms:
        return a
    lead, coeff = b.terms[0]
    keep = [(e, c) for e, c in a.terms if ordinal_cmp(e, lead) > 0]
    same = sum(c for e, c in a.terms if ordinal_cmp(e, lead) == 0)
    return Ordinal(tuple(keep) + ((lead, coeff + same),) + tuple(b.terms[1:]))


def random_ordinal(rng: random.Random, depth: int = 3, max_terms: int = 3, max_coeff: int = 4):
    """A random notation of nesting depth at most ``depth``."""
    if depth <= 1:
        n = rng.randint(0, max_coeff)
        return Ordinal(((Ordinal(), n),)) if n else Ordinal()
    exps = [random_ordinal(rng, depth - 1, max_terms, max_coeff) for _ in range(rng.randint(0, max_terms))]
    distinct = []
    for e in exps:
        if all(ordinal_cmp(e, f) for f in distinct):
            distinct.append(e)
    distinct.sort(key=cmp_to_key(ordinal_cmp), reverse=True)
    return Ordinal(tuple((e, rng.randint(1, max_coeff)) for e in distinct))


# -- finite words ----------------------------------------------------------------

def embeds_backtrack(s: Sequence, t: Sequence, leq: Callable[[Any, Any], bool]) -> bool:
    """Try every strictly increasing index map (no greedy shortcut)."""
    if len(s) > len(t):
        return False
    for idx in itertools.combinations(range(len(t)), len(s)):
        if all(leq(x, t[j]) for x, j in zip(s, idx)):
            return True
    return False


def all_words(alphabet: Sequence, max_len: int) -> List[Tuple]:
    out = []
    for n in range(max_len + 1):
        out.extend(itertools.product(alphabet, repeat=n))
    return out


# -- sequences of length below w^2 ----------------------------------------------
#
# An item list mixes letters ("L", x) and omega-blocks ("R", word) where the
# block repeats ``word`` forever.

def items_to_term(items):
    parts = []
    for kind, x in items:
        parts.append(atom(x) if kind == "L" else rep(*(atom(y) for y in x)))
    if not parts:
        return EMPTY
    return parts[0] if len(parts) == 1 else cat(*parts)


def embeds_items(s, t, leq) -> bool:
    """Embedding for item lists.  A letter may land inside an omega-block of the
    target without using it up; an omega-block of the source must finish inside
    one omega-block of the target, which needs every one of its letters to sit
    below some letter of that block."""
    s, t = tuple(s), tuple(t)

    def fits_letter(x, item):
        kind, y = item
        return leq(x, y) if kind == "L" else any(leq(x, z) for z in y)

    @lru_cache(maxsize=None)
    def go(i: int, j: int) -> bool:
        if i == len(s):
            return True
        if j == len(t):
            return False
        kind, x = s[i]
        if kind == "L":
            if fits_letter(x, t[j]):
                if t[j][0] == "R" and go(i + 1, j):
                    return True
                if t[j][0] == "L" and go(i + 1, j + 1):
                    return True
        elif t[j][0] == "R" and all(fits_letter(c, t[j]) for c in x):
            if go(i + 1, j + 1):
                return True
        return go(i, j + 1)

    return go(0, 0)


def random_items(rng: random.Random, alphabet, max_items=4, max_word=2):
    out = []
    for _ in range(rng.randint(0, max_items)):
        if rng.random() < 0.6:
            out.append(("L", rng.choice(alphabet)))
        else:
            w = tuple(rng.choice(alphabet) for _ in range(rng.randint(1, max_word)))
            out.append(("R", w))
    return out


# -- general random terms ----------------------------------------------------------

def random_term(rng: random.Random, alphabet, depth: int = 3, h_root: bool = False):
    """A random normalized term; ``h_root`` forces an atom or repetition at the root."""
    roll = rng.random()
    if depth <= 0 or roll < 0.35:
        return atom(rng.choice(alphabet))
    if h_root or roll < 0.7:
        return rep(*(random_term(rng, alphabet, depth - 1) for _ in range(rng.randint(1, 3))))
    return cat(*(random_term(rng, alphabet, depth - 1) for _ in range(rng.randint(2, 3))))


# -- barriers ------------------------------------------------------------------------

def triangle_by_search(s: Tuple[int, ...], t: Tuple[int, ...], top: int) -> bool:
    """Search for an increasing ``u`` with ``s`` a prefix of ``u`` and ``t`` a
    prefix of ``u`` minus its first entry; entries of ``u`` beyond ``s`` come
    from ``{max(s)+1, ..., top}``."""
    need = max(0, len(t) + 1 - len(s))
    lo = s[-1] + 1 if s else 0
    pool = range(lo, top + 1)
    for k in range(need + 1):
        for w in itertools.combinations(pool, k):
            u = s + w
            rest = u[1:]
            if rest[: len(t)] == t and len(rest) >= len(t):
                return True
    return False


def all_subsets(n: int, max_size: int) -> List[Tuple[int, ...]]:
    out = []
    for k in range(max_size + 1):
        out.extend(itertools.combinations(range(n), k))
    return out


def monochromatic_sets(points, colour_of_pair, size) -> List[Tuple[int, ...]]:
    """All ``size``-subsets of ``points`` whose pairs share one colour."""
    out = []
    for h in itertools.combinations(points, size):
        cols = {colour_of_pair(a, b) for a, b in itertools.combinations(h, 2)}
        if len(cols) <= 1:
            out.append(h)
    return out


# -- arrays --------------------------------------------------------------------------

def pairs_by_definition(members) -> List[Tuple[tuple, tuple]]:
    top = max((x for s in members for x in s), default=0)
    return [(s, t) for s in members for t in members
            if s and triangle_by_search(s, t, top)]


def is_bad_by_definition(values: Dict[tuple, Any], leq) -> bool:
    return not any(leq(values[s], values[t]) for s, t in pairs_by_definition(list(values)))


def extendable(values: Dict[tuple, Any], upcoming: Sequence[tuple],
               options: Callable[[tuple], List[Any]], leq) -> bool:
    """Is there a choice of values for ``upcoming`` keeping the array bad?"""
    members = list(values) + list(upcoming)
    pairs = pairs_by_definition(members)
    for choice in itertools.product(*(options(s) for s in upcoming)):
        trial = dict(values)
        trial.update(zip(upcoming, choice))
        if not any(leq(trial[a], trial[b]) for a, b in pairs):
            return True
    return False


# -- engine output ---------------------------------------------------------------

def _options(Q, seed):
    """Everything ``<='`` the seed value, computed from the presentation's facts."""
    base = Q.facts.get("base")
    if base is not None:
        return lambda s: [seed[s][:i] for i in range(len(seed[s]) + 1)]
    lt = Q.facts["lt"]
    return lambda s: [p for p in Q.elements if p == seed[s] or (p, seed[s]) in lt]

def check_engine_output(Q, seed, result, budget):
    """Badness, pointwise <=' the seed, and probe minimality per coordinate."""
    options = _options(Q, seed)
    out = result.values
    assert is_bad_by_definition(out, Q.leq)
    for s, q in out.items():
        assert q in options(s)
    order = sorted(seed, key=lambda s: (s[-1], s))
    assigned = {}
    for pos, s in enumerate(order):
        step = next(x for x in result.steps if x.member == s)
        upcoming = order[pos + 1: pos + 1 + budget.probe_depth]
        if step.provenance == CERTIFIED:
            q = out[s]
            for p in options(s):
                if p != q and Q.lt_aux(p, q) and p not in step.truncated:
                    trial = dict(assigned)
                    trial[s] = p
                    assert not extendable(trial, upcoming, options, Q.leq), (s, p, q)
            trial = dict(assigned)
            trial[s] = q
            assert extendable(trial, upcoming, options, Q.leq)
        elif step.provenance is None:
            for p in options(s):
                trial = dict(assigned)
                trial[s] = p
                assert not extendable(trial, upcoming, options, Q.leq)
        if s in out:
            assigned[s] = out[s]


# -- lasso trees ---------------------------------------------------------------------

def unfold(stem, cycle, n) -> Tuple[int, ...]:
    return tuple(stem[i] if i < len(stem) else cycle[(i - len(stem)) % len(cycle)]
                 for i in range(n))


def leftmost_by_enumeration(lassos, horizon: int) -> Optional[Tuple[int, ...]]:
    """Lexicographically least unfolded prefix among the designated branches."""
    if not lassos:
        return None
    return min(unfold(s, c, horizon) for s, c in lassos)


def random_lasso_tree(rng: random.Random, n_nodes: int = 10, branching: int = 3,
                      n_lassos: int = 3, labels: int = 3):
    nodes = {()}
    while len(nodes) < n_nodes:
        parent = rng.choice(sorted(nodes))
        kids = [u for u in nodes if len(u) == len(parent) + 1 and u[:-1] == parent]
        if len(kids) >= branching:
            continue
        nodes.add(parent + (rng.randrange(labels),))
    lassos = []
    for _ in range(rng.randint(0, n_lassos)):
        stem = rng.choice(sorted(nodes))
        cycle = tuple(rng.randrange(labels) for _ in range(rng.randint(1, 3)))
        lassos.append((stem, cycle))
    return nodes, lassos


# -- streams and seeds ---------------------------------------------------------------

def adversarial_stream(rng: random.Random, letters, leq, start_len: int = 6,
                       tries: int = 60) -> List[Tuple]:
    """Words kept bad for as long as random search manages, preferring long words
    first and shrinking; the final word extends an earlier one, so the stream is
    guaranteed to contain a good pair."""
    words: List[Tuple] = []
    n = start_len
    while n > 0:
        for _ in range(tries):
            w = tuple(rng.choice(letters) for _ in range(n))
            if not any(embeds_backtrack(v, w, leq) for v in words):
                words.append(w)
                break
        else:
            n -= 1
    base = rng.choice(words) if words else ()
    words.append(base + (rng.choice(letters),))
    return words


def random_poset(rng: random.Random, n: int, density: float = 0.3):
    """Random partial order on ``range(n)`` as (leq pairs, strict pairs)."""
    strict = set()
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < density:
                strict.add((i, j))
    changed = True
    while changed:
        changed = False
        for (a, b) in list(strict):
            for (c, d) in list(strict):
                if b == c and (a, d) not in strict:
                    strict.add((a, d))
                    changed = True
    return sorted(strict), sorted(strict)


def random_bad_array(rng: random.Random, members, elements, leq, attempts: int = 200):
    """Greedy random values keeping every triangle pair non-ascending."""
    order = sorted(members, key=lambda s: (s[-1], s))
    pairs = pairs_by_definition(order)
    for _ in range(attempts):
        f: Dict[tuple, Any] = {}
        ok = True
        for s in order:
            opts = list(elements)
            rng.shuffle(opts)
            for q in opts:
                f[s] = q
                if all(not leq(f[x], f[y]) for x, y in pairs if x in f and y in f):
                    break
            else:
                ok = False
                break
        if ok:
            return f
    return None

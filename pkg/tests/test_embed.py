import random

import pytest
from hypothesis import given, settings, strategies as st

from bqo.embed import (
    AtomW,
    ConcatW,
    OmegaSum,
    RepW,
    WitnessError,
    decide_embed,
    embeds,
    find_blocking_index,
    is_quasi_monotonic,
    translate_witness,
    verify_witness,
    witness_from_json,
    witness_positions,
    witness_to_json,
)
from bqo.ordinal import ZERO, Order, compare, nat
from bqo.qo import QOError, from_relation
from bqo.terms import EMPTY, atom, atom_at, cat, length, rep, restrict, seq
from oracles import all_words, embeds_backtrack, embeds_items, items_to_term, random_items, random_term

A_LE_B = from_relation("ab", [("a", "b")])
ANTICHAIN = from_relation("ab")
CHAIN3 = from_relation("abc", [("a", "b"), ("b", "c")])
a, b, c = atom("a"), atom("b"), atom("c")


# -- examples ------------------------------------------------------------------------

def test_empty_embeds_everywhere():
    for t in (EMPTY, a, rep(a)):
        w = decide_embed(EMPTY, t, A_LE_B)
        assert w == ConcatW(())


def test_finite_example_matches_backtracking():
    assert embeds_backtrack("ab", "bab", A_LE_B.leq)
    w = decide_embed(seq("ab"), seq("bab"), A_LE_B)
    assert w is not None
    verify_witness(seq("ab"), seq("bab"), w, A_LE_B)


def test_omega_plus_one_does_not_embed_in_omega():
    assert decide_embed(cat(rep(a), a), rep(a), A_LE_B) is None


def test_atoms_outside_universe_rejected():
    with pytest.raises(QOError):
        decide_embed(atom("z"), a, A_LE_B)


def test_nested_repetitions():
    s = rep(rep(a), b)
    t = rep(rep(b))
    w = decide_embed(s, t, A_LE_B)
    assert w is not None
    verify_witness(s, t, w, A_LE_B)
    assert decide_embed(rep(rep(b)), rep(a, rep(a)), A_LE_B) is None


def test_witness_shape():
    w = decide_embed(rep(a), cat(b, rep(b)), A_LE_B)
    assert isinstance(w, RepW)
    pos = [p for _, p in witness_positions(rep(a), w, 6)]
    assert pos == [nat(i) for i in range(6)]


# -- exhaustive finite agreement -------------------------------------------------------

def test_finite_agreement_short_words():
    words = all_words("ab", 4)
    for Q in (A_LE_B, ANTICHAIN):
        for s in words:
            for t in words:
                assert embeds(seq(s), seq(t), Q) == embeds_backtrack(s, t, Q.leq), (s, t)


# -- below w^2 against the item oracle -------------------------------------------------

@pytest.mark.parametrize("Q", [A_LE_B, ANTICHAIN, CHAIN3], ids=["a<=b", "antichain", "chain3"])
def test_agreement_below_omega_squared(Q):
    rng = random.Random(11)
    letters = list(Q.elements)
    for _ in range(1500):
        s, t = random_items(rng, letters), random_items(rng, letters, max_items=5)
        S, T = items_to_term(s), items_to_term(t)
        w = decide_embed(S, T, Q)
        assert (w is not None) == embeds_items(s, t, Q.leq), (s, t)
        if w is not None:
            verify_witness(S, T, w, Q)


# -- properties -------------------------------------------------------------------------

terms = st.randoms(use_true_random=False).map(lambda r: random_term(r, "ab", depth=3))


@settings(max_examples=200, deadline=None)
@given(terms)
def test_reflexive(t):
    w = decide_embed(t, t, A_LE_B)
    assert w is not None
    verify_witness(t, t, w, A_LE_B)


@settings(max_examples=300, deadline=None)
@given(terms, terms, terms)
def test_transitive(s, t, u):
    if embeds(s, t, A_LE_B) and embeds(t, u, A_LE_B):
        assert embeds(s, u, A_LE_B)


@settings(max_examples=150, deadline=None)
@given(terms, terms, terms, terms)
def test_concat_congruence(s, s2, t, t2):
    if embeds(s, s2, A_LE_B) and embeds(t, t2, A_LE_B):
        assert embeds(cat(s, t), cat(s2, t2), A_LE_B)


@settings(max_examples=150, deadline=None)
@given(st.randoms(use_true_random=False))
def test_prefix_embeds(rng):
    t = random_term(rng, "ab", depth=3)
    w = decide_embed(t, t, A_LE_B)
    ends = [p for _, p in witness_positions(t, w, 20)][1:]
    for e in ends + [length(t)]:
        r = restrict(t, ZERO, e)
        assert embeds(r, t, A_LE_B)


@settings(max_examples=300, deadline=None)
@given(terms, terms)
def test_witnesses_are_valid(s, t):
    w = decide_embed(s, t, A_LE_B)
    if w is None:
        return
    verify_witness(s, t, w, A_LE_B)
    pos = witness_positions(s, w, 40)
    for (q, p), (_, p2) in zip(pos, pos[1:]):
        assert compare(p, p2) is Order.LT
    for q, p in pos:
        assert A_LE_B.leq(q, atom_at(t, p))
    assert witness_from_json(witness_to_json(w)) == w


# -- the verifier rejects broken witnesses -----------------------------------------------

def test_verify_rejects_non_increasing():
    with pytest.raises(WitnessError):
        verify_witness(seq("aa"), seq("aa"), ConcatW((AtomW(nat(1)), AtomW(nat(0)))), A_LE_B)


def test_verify_rejects_wrong_letter():
    with pytest.raises(WitnessError):
        verify_witness(b, seq("ab"), AtomW(nat(0)), A_LE_B)


def test_verify_rejects_out_of_range():
    with pytest.raises(WitnessError):
        verify_witness(a, seq("ab"), AtomW(nat(2)), A_LE_B)


def test_verify_rejects_bad_period():
    s, t = rep(a), rep(a, b)
    w = decide_embed(s, t, A_LE_B)
    broken = RepW(w.prefix, w.period, w.base, nat(1), w.sup)
    with pytest.raises(WitnessError):
        verify_witness(s, t, broken, A_LE_B)


def test_translate_identity():
    w = AtomW(nat(3))
    assert translate_witness(w, ZERO, nat(2), 0) == w
    assert translate_witness(w, ZERO, nat(2), 2) == AtomW(nat(7))


# -- quasi-monotonic sums and blocking indices ----------------------------------------------

def test_quasi_monotonic_examples():
    assert is_quasi_monotonic([], [a], ANTICHAIN)
    assert not is_quasi_monotonic([b], [a], ANTICHAIN)
    assert is_quasi_monotonic([a], [b], A_LE_B)
    with pytest.raises(ValueError):
        is_quasi_monotonic([a], [], A_LE_B)


def test_blocking_index_examples():
    assert find_blocking_index(OmegaSum((), (b,)), OmegaSum((), (a,)), A_LE_B) == 0
    assert find_blocking_index(OmegaSum((a,), (b,)), OmegaSum((), (a,)), A_LE_B) == 1


def test_blocking_index_precondition():
    with pytest.raises(ValueError):
        find_blocking_index(OmegaSum((), (a,)), OmegaSum((), (b,)), A_LE_B)


def _probe_blocking(s, t, Q, m_max=30):
    for n in range(len(s.prefix) + len(s.cycle)):
        if not any(embeds(s.part(n), t.head(m), Q) for m in range(m_max + 1)):
            return n
    return None


def _random_part(rng, letters):
    if rng.random() < 0.25:
        return rep(*(atom(rng.choice(letters)) for _ in range(rng.randint(1, 2))))
    return seq(rng.choice(letters) for _ in range(rng.randint(1, 3)))


@pytest.mark.parametrize("Q", [A_LE_B, ANTICHAIN], ids=["a<=b", "antichain"])
def test_blocking_index_against_probe(Q):
    rng = random.Random(5)
    letters = list(Q.elements)
    checked = 0
    while checked < 150:
        s = OmegaSum([_random_part(rng, letters) for _ in range(rng.randint(0, 2))],
                     [_random_part(rng, letters) for _ in range(rng.randint(1, 2))])
        t = OmegaSum([_random_part(rng, letters) for _ in range(rng.randint(0, 2))],
                     [_random_part(rng, letters) for _ in range(rng.randint(1, 2))])
        if not is_quasi_monotonic(t.prefix, t.cycle, Q) or embeds(s.term(), t.term(), Q):
            continue
        assert find_blocking_index(s, t, Q) == _probe_blocking(s, t, Q)
        checked += 1

import random

import pytest

from bqo.barrier import rank_omega, singletons, uniform
from bqo.embed import verify_witness
from bqo.engine import (
    CERTIFIED,
    TRUNCATED,
    BadStream,
    EngineError,
    FuelExhausted,
    GoodPair,
    SearchBudget,
    default_budget,
    higman_refute,
    locally_minimal_bad_array,
    minimal_bad_sequence,
)
from bqo.qo import QOError, from_relation, higman, total_order
from bqo.terms import seq
from oracles import (
    adversarial_stream,
    check_engine_output,
    embeds_backtrack,
    is_bad_by_definition,
    random_bad_array,
    random_poset,
)


# -- examples ----------------------------------------------------------------------

def test_empty_aux_relation_leaves_seed_unchanged():
    Q = from_relation(range(6), [], [])
    seed = [5, 3, 0, 4]
    r = minimal_bad_sequence(Q, seed)
    assert r.sequence == list(enumerate(seed))
    assert r.fully_certified


def test_higman_descends_toward_prefixes():
    Q = higman(from_relation(range(6)))
    seed = [(i, i) for i in range(6)]
    budget = SearchBudget(10_000, 3)
    r = minimal_bad_sequence(Q, seed, budget)
    assert [q for _, q in r.sequence] == [(0,), (1,), (2,), (3,), (4,), ()]
    check_engine_output(Q, BadStream.sequence(seed).values, r, budget)


def test_budget_validation():
    with pytest.raises(EngineError):
        SearchBudget(0, 3)
    with pytest.raises(EngineError):
        SearchBudget(10, 0)


def test_default_budget_reads_environment(monkeypatch):
    monkeypatch.setenv("BQO_FUEL", "77")
    monkeypatch.setenv("BQO_PROBE_DEPTH", "2")
    assert default_budget() == SearchBudget(77, 2)


def test_seed_must_be_bad():
    Q = from_relation(range(3), [(0, 1)], [(0, 1)])
    with pytest.raises(EngineError):
        minimal_bad_sequence(Q, [0, 1])


def test_aux_relation_required():
    with pytest.raises(QOError):
        minimal_bad_sequence(total_order(3), [2, 1, 0])


def test_singleton_barrier_reduces_to_sequence():
    rng = random.Random(1)
    leq, lt = random_poset(rng, 6)
    Q = from_relation(range(6), leq, lt)
    f = random_bad_array(rng, singletons(5).members, range(6), Q.leq)
    seq_result = minimal_bad_sequence(Q, [f[(i,)] for i in range(6)])
    arr_result = locally_minimal_bad_array(Q, f)
    assert seq_result.values == arr_result.values


def test_constant_bad_array_unchanged():
    # a single-element antichain value on a fragment with no triangle pairs
    Q = from_relation(range(2), [], [])
    f = {(0, 1): 1}
    r = locally_minimal_bad_array(Q, f)
    assert r.values == f


# -- randomized probe minimality ---------------------------------------------------

@pytest.mark.parametrize("fragment", [singletons(4), uniform(2, 5), rank_omega(4)],
                         ids=["singletons", "pairs", "rankomega"])
def test_random_arrays_probe_minimal(fragment):
    rng = random.Random(len(fragment.members))
    done = 0
    for _ in range(500):
        if done == 15:
            break
        leq, lt = random_poset(rng, 5, density=0.35)
        Q = from_relation(range(5), leq, lt)
        f = random_bad_array(rng, fragment.members, range(5), Q.leq)
        if f is None:
            continue
        budget = SearchBudget(50_000, 2)
        r = locally_minimal_bad_array(Q, f, budget)
        check_engine_output(Q, f, r, budget)
        done += 1
    assert done == 15


def test_higman_array_probe_minimal():
    rng = random.Random(9)
    Q = higman(from_relation(range(3)))
    for _ in range(10):
        words = [tuple(rng.randrange(3) for _ in range(rng.randint(1, 3))) for _ in range(40)]
        seed = []
        for w in words:
            if not any(embeds_backtrack(v, w, lambda x, y: x == y) for v in seed):
                seed.append(w)
        budget = SearchBudget(20_000, 2)
        r = minimal_bad_sequence(Q, seed, budget)
        check_engine_output(Q, BadStream.sequence(seed).values, r, budget)


def test_deterministic():
    rng = random.Random(3)
    leq, lt = random_poset(rng, 5)
    Q = from_relation(range(5), leq, lt)
    f = random_bad_array(rng, uniform(2, 5).members, range(5), Q.leq)
    runs = [locally_minimal_bad_array(Q, f, SearchBudget(5_000, 2)) for _ in range(5)]
    assert all(r.to_json() == runs[0].to_json() for r in runs)


def test_fuel_truncation_is_reported():
    Q = higman(from_relation(range(4)))
    seed = [(3, 3, 3, 3), (2, 2, 2), (1, 1), (0,)]
    r = minimal_bad_sequence(Q, seed, SearchBudget(1, 3))
    assert any(st.provenance == TRUNCATED for st in r.steps)
    assert not r.fully_certified
    assert is_bad_by_definition(r.values, Q.leq)
    assert r.to_json()["steps"][0]["provenance"] in (CERTIFIED, TRUNCATED, "skipped")


# -- refuter -------------------------------------------------------------------------

A_LE_B = from_relation("ab", [("a", "b")])


def test_refute_repeat():
    got = higman_refute(A_LE_B, [seq("ab"), seq("ab")])
    assert isinstance(got, GoodPair) and (got.i, got.j) == (0, 1)


def test_refute_example():
    got = higman_refute(A_LE_B, [seq("b"), seq("a"), seq("aa")])
    assert (got.i, got.j) == (1, 2)
    verify_witness(seq("a"), seq("aa"), got.witness, A_LE_B)


def test_refute_stream_ends():
    got = higman_refute(A_LE_B, [seq("bb"), seq("a")])
    assert isinstance(got, FuelExhausted) and got.reason == "stream-ended"


def test_refute_fuel():
    rng = random.Random(0)
    stream = adversarial_stream(rng, (0, 1, 2), lambda x, y: x <= y, start_len=7)
    got = higman_refute(total_order(3), [seq(w) for w in stream], SearchBudget(3, 1))
    assert isinstance(got, FuelExhausted) and got.reason == "fuel"


def test_refute_accepts_plain_words_and_higman_presentations():
    got = higman_refute(higman(A_LE_B), [("b",), ("a", "b")])
    assert (got.i, got.j) == (0, 1)


def test_refute_rejects_infinite_terms():
    from bqo.terms import atom, rep

    with pytest.raises(EngineError):
        higman_refute(A_LE_B, [rep(atom("a"))])


@pytest.mark.parametrize("k", [2, 3])
def test_refute_adversarial(k):
    rng = random.Random(k)
    Q = total_order(k)
    for _ in range(20):
        stream = adversarial_stream(rng, tuple(range(k)), lambda x, y: x <= y)
        got = higman_refute(Q, [seq(w) for w in stream], SearchBudget(100_000, 3))
        assert isinstance(got, GoodPair)
        assert got.i < got.j
        assert embeds_backtrack(stream[got.i], stream[got.j], Q.leq)

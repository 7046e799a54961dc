import copy
import json

import pytest

from bqo import barrier as bar
from bqo.certificates import (
    KINDS,
    CertificateError,
    canonical,
    make_certificate,
    ordinal_op,
    pretty,
    qo_from_json,
    qo_to_json,
    verify_bytes,
    verify_certificate,
)
from bqo.embed import decide_embed, witness_to_json
from bqo.hered import h_certificate, hi_decompose
from bqo.ordinal import format_ordinal
from bqo.qo import from_relation, higman
from bqo.reversal import Lasso, LassoTree, decode_wf, kb_compare, leftmost_path
from bqo.terms import atom, cat, format_term, length, rep, seq

A_LE_B = from_relation("ab", [("a", "b")])


def resign(cert):
    """Recompute the digest so only the semantic checks stand in the way."""
    body = {k: v for k, v in cert.items() if k != "digest"}
    return make_certificate(body["kind"], body["payload"], body["inputs"], body["budget"])


def embed_yes():
    s, t = seq("ab"), seq("bab")
    w = decide_embed(s, t, A_LE_B)
    return make_certificate("embed-yes", {"lhs": format_term(s), "rhs": format_term(t),
                                          "qo": qo_to_json(A_LE_B), "witness": witness_to_json(w)})


def lasso_tree():
    return LassoTree(frozenset({(), (0,), (0, 1)}), (Lasso((0,), (1, 2)),))


def sample_certificates():
    s = rep(atom("a"), atom("b"))
    T = lasso_tree()
    f = leftmost_path(T)
    trees = [T, LassoTree(frozenset({(), (3,)}))]
    d = decode_wf(trees)
    parts = hi_decompose(cat(atom("a"), rep(atom("b")), atom("a")))
    B = bar.uniform(2, 4)
    return {
        "embed-yes": embed_yes(),
        "embed-no": make_certificate("embed-no", {"lhs": "(atom b)", "rhs": "(atom a)",
                                                  "qo": qo_to_json(A_LE_B)}),
        "good-pair": make_certificate("good-pair", {
            "qo": qo_to_json(A_LE_B), "mode": "array",
            "values": [[[0], "a"], [[1], "b"]], "s": [0], "t": [1]}),
        "bad-fragment": make_certificate("bad-fragment", {
            "qo": qo_to_json(A_LE_B), "values": [[[0], "b"], [[1], "a"]], "seed": None}),
        "perfect-fragment": make_certificate("perfect-fragment", {
            "qo": qo_to_json(A_LE_B), "values": [[[0], "a"], [[1], "a"]], "parent": None}),
        "homogeneous-base": make_certificate("homogeneous-base", {
            "coloring": [[list(m), 1] for m in B.sorted_members()], "base": [0, 1, 2],
            "target": 3, "window": 4, "colors": None}),
        "h-certificate": make_certificate("h-certificate", {
            "term": format_term(s), "tree": h_certificate(s).to_json(), "depth": 3}),
        "decomposition": make_certificate("decomposition", {
            "term": format_term(cat(*parts)), "parts": [format_term(p) for p in parts],
            "lengths": [format_ordinal(length(p)) for p in parts],
            "length": format_ordinal(length(cat(*parts)))}),
        "leftmost": make_certificate("leftmost", {
            "tree": T.to_json(), "path": [list(f.path.stem), list(f.path.cycle)],
            "chain": [list(u) for u in f.chain]}),
        "decode": make_certificate("decode", {
            "trees": [x.to_json() for x in trees], "z": sorted(d.indices),
            "path": [list(d.path.path.stem), list(d.path.path.cycle)], "truncated": 0}),
        "ordinal": make_certificate("ordinal", {"op": "add", "args": ["w+1", "w"],
                                                "result": ordinal_op("add", ["w+1", "w"])}),
        "fragment-check": make_certificate("fragment-check", {
            "fragment": B.to_json(), "check": "barrier",
            "report": bar.verify_barrier_fragment(B).to_json()}),
        "kb-compare": make_certificate("kb-compare", {"s": [2], "t": [1, 9],
                                                      "result": kb_compare([2], [1, 9]).value}),
    }


CERTS = sample_certificates()


def test_every_kind_has_a_sample():
    assert set(CERTS) == set(KINDS)


@pytest.mark.parametrize("kind", KINDS)
def test_samples_verify(kind):
    assert verify_certificate(CERTS[kind]) == []


@pytest.mark.parametrize("kind", KINDS)
def test_byte_round_trip(kind):
    cert = CERTS[kind]
    for text in (canonical(cert), pretty(cert)):
        data = (text + "\n").encode()
        assert verify_bytes(data) == []
        assert json.loads(data) == cert


@pytest.mark.parametrize("kind", KINDS)
def test_digest_protects_payload(kind):
    cert = copy.deepcopy(CERTS[kind])
    cert["inputs"] = {"extra": "0" * 64}
    assert verify_certificate(cert) == ["digest does not match the certificate body"]


def test_non_canonical_bytes_rejected():
    text = json.dumps(CERTS["kb-compare"], sort_keys=False, indent=1) + "\n"
    assert verify_bytes(text.encode()) == ["certificate bytes are not in canonical form"]
    assert verify_bytes(canonical(CERTS["kb-compare"]).encode()) != []  # newline required
    assert verify_bytes(b"\xff") and verify_bytes(b"{")


def test_structural_rejections():
    assert verify_certificate([]) == ["certificate is not a JSON object"]
    cert = dict(CERTS["ordinal"], version=2)
    assert "unsupported version" in verify_certificate(cert)[0]
    cert = dict(CERTS["ordinal"])
    del cert["budget"]
    assert "fields" in verify_certificate(cert)[0]
    with pytest.raises(CertificateError):
        make_certificate("nonsense", {})


# semantic tampering with the digest recomputed: the checker still says no

def _tamper(kind, fn):
    cert = copy.deepcopy(CERTS[kind])
    fn(cert["payload"])
    return verify_certificate(resign(cert))


@pytest.mark.parametrize("kind, fn", [
    ("embed-yes", lambda p: p.update(lhs="(cat (atom b) (atom b) (atom b))")),
    ("embed-yes", lambda p: p.update(rhs="(cat (atom a) (atom a))")),
    ("embed-no", lambda p: p.update(lhs="(atom a)", rhs="(atom b)")),
    ("good-pair", lambda p: p.update(s=[1], t=[0])),
    ("good-pair", lambda p: p["values"][1].__setitem__(1, "a") or p["values"][0].__setitem__(1, "b")),
    ("bad-fragment", lambda p: p["values"][0].__setitem__(1, "a")),
    ("perfect-fragment", lambda p: p["values"][0].__setitem__(1, "b")),
    ("homogeneous-base", lambda p: p["coloring"][0].__setitem__(1, 2)),
    ("homogeneous-base", lambda p: p.update(target=4)),
    ("h-certificate", lambda p: p.update(term="(cat (atom a) (rep (atom b)))")),
    ("decomposition", lambda p: p["lengths"].__setitem__(0, "2")),
    ("decomposition", lambda p: p["parts"].pop() and p["lengths"].pop()),
    ("leftmost", lambda p: p.update(path=[[0], [2, 1]])),
    ("decode", lambda p: p.update(z=[0, 1])),
    ("ordinal", lambda p: p.update(result="w*2+1")),
    ("fragment-check", lambda p: p["fragment"]["members"].append([0, 2, 3])),
    ("kb-compare", lambda p: p.update(result="LE")),
])
def test_semantic_tampering_rejected(kind, fn):
    assert _tamper(kind, fn) != []


def test_malformed_payload_reported():
    cert = copy.deepcopy(CERTS["good-pair"])
    del cert["payload"]["values"]
    assert verify_certificate(resign(cert))[0].startswith("malformed payload")


def test_bad_fragment_seed_check():
    Q = from_relation("abc", [("a", "b"), ("b", "c")], [("a", "b"), ("b", "c"), ("a", "c")])
    good = make_certificate("bad-fragment", {
        "qo": qo_to_json(Q), "values": [[[0], "b"], [[1], "a"]],
        "seed": [[[0], "c"], [[1], "a"]]})
    assert verify_certificate(good) == []
    bad = copy.deepcopy(good)
    bad["payload"]["seed"][0][1] = "a"
    assert verify_certificate(resign(bad)) != []


def test_qo_json_round_trip():
    Q = from_relation("abc", [("a", "b")], [("a", "b")])
    R = qo_from_json(qo_to_json(Q))
    for x in "abc":
        for y in "abc":
            assert R.leq(x, y) == Q.leq(x, y)
            assert R.lt_aux(x, y) == Q.lt_aux(x, y)
    H = qo_from_json(qo_to_json(higman(Q)))
    assert H.leq(("a",), ("c", "b"))


@pytest.mark.parametrize("op, args, result", [
    ("normalize", ["1+w"], "w"),
    ("compare", ["w^2", "w*5"], "GT"),
    ("add", ["w*2+3", "w^2"], "w^(2)"),
    ("power", ["w+1"], "w^(w+1)"),
    ("interval", ["w+3", "w*2"], "w"),
    ("fs", ["w^2", "3"], "w*4"),
    ("indecomposable", ["w^(w)"], True),
    ("indecomposable", ["w+1"], False),
])
def test_ordinal_op(op, args, result):
    assert ordinal_op(op, args) == result


def test_ordinal_op_errors():
    with pytest.raises(CertificateError):
        ordinal_op("mul", ["1", "2"])
    with pytest.raises(CertificateError):
        ordinal_op("add", ["1"])
    with pytest.raises(CertificateError):
        ordinal_op("fs", ["w", "x"])

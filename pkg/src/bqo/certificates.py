"""JSON certificates and their pure checker.

A certificate is ``{"kind", "payload", "inputs", "budget", "version", "digest"}``.
The payload carries everything the checker needs (terms, quasi-order facts,
fragments, trees); ``inputs`` holds sha256 digests of the files the command
read; ``digest`` is the sha256 of the canonical encoding of the other fields.
:func:`verify_certificate` re-checks the payload semantically and also demands
that the file bytes are the canonical encoding, so every byte matters.
"""

from __future__ import annotations

import hashlib
import json
from typing import Any, Callable, Dict, List, Mapping, Optional

from . import barrier as bar
from .embed import decide_embed, verify_witness, witness_from_json, WitnessError
from .hered import h_certificate, verify_h_certificate, is_h_shaped
from .ordinal import (
    ZERO,
    add,
    compare,
    format_ordinal,
    fundamental_sequence,
    interval_length,
    is_indecomposable,
    omega_power,
    parse_ordinal,
)
from .qo import QPresentation, from_relation, higman
from .reversal import LassoTree, decode_wf, is_well_founded, kb_compare, leftmost_path, same_path, Lasso
from .terms import cat, length, parse_term

__all__ = [
    "KINDS",
    "CertificateError",
    "canonical",
    "pretty",
    "sha256_bytes",
    "make_certificate",
    "verify_certificate",
    "verify_bytes",
    "qo_to_json",
    "qo_from_json",
    "value_to_json",
    "value_from_json",
    "ordinal_op",
]

VERSION = 1
KINDS = (
    "embed-yes",
    "embed-no",
    "good-pair",
    "bad-fragment",
    "perfect-fragment",
    "homogeneous-base",
    "h-certificate",
    "decomposition",
    "leftmost",
    "decode",
    "ordinal",
    "fragment-check",
    "kb-compare",
)


class CertificateError(ValueError):
    pass


def canonical(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def pretty(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False)


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _body_digest(cert: Mapping) -> str:
    body = {k: cert[k] for k in ("kind", "payload", "inputs", "budget", "version")}
    return sha256_bytes(canonical(body).encode("utf-8"))


def make_certificate(kind: str, payload: dict, inputs: Optional[dict] = None,
                     budget: Optional[dict] = None) -> dict:
    if kind not in KINDS:
        raise CertificateError(f"unknown certificate kind {kind!r}")
    cert = {"kind": kind, "payload": payload, "inputs": inputs or {}, "budget": budget,
            "version": VERSION}
    cert["digest"] = _body_digest(cert)
    return cert


# -- quasi-orders and values ---------------------------------------------------

def qo_to_json(Q: QPresentation) -> dict:
    base = Q.facts.get("base")
    if base is not None:
        return {"higman": qo_to_json(base)}
    if Q.elements is None or "leq" not in Q.facts:
        raise CertificateError(f"{Q.name} cannot be serialized")
    leq = sorted([a, b] for a, b in Q.facts["leq"] if a != b)
    lt = Q.facts.get("lt")
    return {
        "elements": list(Q.elements),
        "leq": leq,
        "lt": None if lt is None else sorted([a, b] for a, b in lt),
    }


def qo_from_json(data: Mapping) -> QPresentation:
    if "higman" in data:
        return higman(qo_from_json(data["higman"]))
    lt = data.get("lt")
    return from_relation(data["elements"], [tuple(p) for p in data["leq"]],
                         None if lt is None else [tuple(p) for p in lt])


def _is_higman(Q: QPresentation) -> bool:
    return Q.facts.get("base") is not None


def value_to_json(Q: QPresentation, q: Any) -> Any:
    return list(q) if _is_higman(Q) else q


def value_from_json(Q: QPresentation, v: Any) -> Any:
    return tuple(v) if _is_higman(Q) else v


# -- checkers -------------------------------------------------------------------

def _need(cond: bool, msg: str) -> None:
    if not cond:
        raise CertificateError(msg)


def _array(payload: Mapping, Q: QPresentation, key: str = "values") -> Dict[tuple, Any]:
    out = {}
    for member, v in payload[key]:
        s = bar.as_finseq(member)
        _need(s not in out, f"member {s} listed twice")
        out[s] = value_from_json(Q, v)
        Q.check(out[s])
    return out


def _check_embed_yes(p: Mapping) -> None:
    Q = qo_from_json(p["qo"])
    s, t = parse_term(p["lhs"]), parse_term(p["rhs"])
    verify_witness(s, t, witness_from_json(p["witness"]), Q)


def _check_embed_no(p: Mapping) -> None:
    Q = qo_from_json(p["qo"])
    s, t = parse_term(p["lhs"]), parse_term(p["rhs"])
    _need(decide_embed(s, t, Q) is None, "the left term embeds after all")


def _check_good_pair(p: Mapping) -> None:
    Q = qo_from_json(p["qo"])
    if p["mode"] == "stream":
        terms = [parse_term(x) for x in p["stream"]]
        i, j = p["i"], p["j"]
        _need(0 <= i < j < len(terms), "pair indices out of order or range")
        verify_witness(terms[i], terms[j], witness_from_json(p["witness"]), Q)
    elif p["mode"] == "array":
        f = _array(p, Q)
        s, t = bar.as_finseq(p["s"]), bar.as_finseq(p["t"])
        _need(s in f and t in f, "pair members not in the array")
        _need(bar.triangle(s, t), f"{s} ◁ {t} fails")
        _need(Q.leq(f[s], f[t]), "values do not ascend")
    else:
        raise CertificateError(f"unknown good-pair mode {p['mode']!r}")


def _check_bad_fragment(p: Mapping) -> None:
    Q = qo_from_json(p["qo"])
    f = _array(p, Q)
    for s, t in bar.triangle_pairs(f):
        _need(not Q.leq(f[s], f[t]), f"{s} ◁ {t} ascends")
    if p.get("seed") is not None:
        seed = _array(p, Q, "seed")
        for s, q in f.items():
            _need(s in seed, f"{s} is not in the seed's domain")
            _need(Q.lt_aux_or_eq(q, seed[s]), f"value at {s} is not <=' the seed")


def _check_perfect_fragment(p: Mapping) -> None:
    Q = qo_from_json(p["qo"])
    f = _array(p, Q)
    for s, t in bar.triangle_pairs(f):
        _need(Q.leq(f[s], f[t]), f"{s} ◁ {t} does not ascend")
    if p.get("parent") is not None:
        parent = _array(p, Q, "parent")
        for s, q in f.items():
            _need(parent.get(s) == q, f"{s} disagrees with the parent array")


def _check_homogeneous(p: Mapping) -> None:
    members = [bar.as_finseq(s) for s, _ in p["coloring"]]
    colour = {bar.as_finseq(s): c for s, c in p["coloring"]}
    h = bar.as_finseq(p["base"])
    _need(len(h) == p["target"], "sub-base has the wrong size")
    induced = [s for s in members if set(s) <= set(h)]
    _need(len({colour[s] for s in induced}) <= 1, "induced fragment is not monochromatic")
    covered = {x for s in induced for x in s}
    _need(covered >= set(h), "induced fragment does not cover the sub-base")
    if p.get("colors") is not None and induced:
        _need(colour[induced[0]] in p["colors"], "fragment colour not allowed")


def _check_h(p: Mapping) -> None:
    t = parse_term(p["term"])
    problems = verify_h_certificate(t, p["tree"], depth=p.get("depth", 3))
    _need(not problems, "; ".join(problems[:3]))


def _check_decomposition(p: Mapping) -> None:
    t = parse_term(p["term"])
    parts = [parse_term(x) for x in p["parts"]]
    _need(cat(*parts) == t, "parts do not concatenate to the term")
    total = ZERO
    for x, ln in zip(parts, p["lengths"]):
        _need(is_h_shaped(x), "a part is not H-shaped")
        _need(h_certificate(x) is not None, "a part has no tree certificate")
        _need(format_ordinal(length(x)) == ln, "recorded part length is wrong")
        total = add(total, length(x))
    _need(len(parts) == len(p["lengths"]), "length list does not match the parts")
    _need(format_ordinal(total) == p["length"] and total == length(t), "lengths do not sum")


def _check_leftmost(p: Mapping) -> None:
    T = LassoTree.from_json(p["tree"])
    got = leftmost_path(T)
    _need(got is not None, "tree is well-founded")
    claimed = Lasso(tuple(p["path"][0]), tuple(p["path"][1]))
    _need(same_path(got.path, claimed), "recorded path is not the leftmost path")
    horizon = len(claimed.stem) + len(claimed.cycle) + T.depth() + 1
    for n in range(horizon):
        _need(T.contains(claimed.prefix(n)), f"path prefix of length {n} leaves the tree")


def _check_decode(p: Mapping) -> None:
    trees = [LassoTree.from_json(x) for x in p["trees"]]
    z = set(p["z"])
    _need(z == {n for n, T in enumerate(trees) if is_well_founded(T)},
          "decoded set differs from well-foundedness")
    got = decode_wf(trees)
    _need(set(got.indices) == z, "decoder does not reproduce the set")
    _need(same_path(got.path.path, Lasso(tuple(p["path"][0]), tuple(p["path"][1]))),
          "recorded leftmost path differs")


ORDINAL_OPS = ("normalize", "compare", "add", "power", "interval", "fs", "indecomposable")


def ordinal_op(op: str, args: List[str]) -> Any:
    """Evaluate an ordinal operation on textual arguments; results are JSON values."""
    arity = {"normalize": 1, "power": 1, "indecomposable": 1}.get(op, 2)
    if op not in ORDINAL_OPS:
        raise CertificateError(f"unknown ordinal operation {op!r}")
    if len(args) != arity:
        raise CertificateError(f"{op} takes {arity} argument(s)")
    if op == "fs":
        if not str(args[1]).isdigit():
            raise CertificateError("fs index must be a natural number")
        return format_ordinal(fundamental_sequence(parse_ordinal(args[0]), int(args[1])))
    xs = [parse_ordinal(a) for a in args]
    if op == "normalize":
        return format_ordinal(xs[0])
    if op == "compare":
        return compare(xs[0], xs[1]).name
    if op == "add":
        return format_ordinal(add(xs[0], xs[1]))
    if op == "power":
        return format_ordinal(omega_power(xs[0]))
    if op == "interval":
        return format_ordinal(interval_length(xs[0], xs[1]))
    return is_indecomposable(xs[0])


def _check_ordinal(p: Mapping) -> None:
    _need(ordinal_op(p["op"], p["args"]) == p["result"], "recomputed result differs")


def _check_fragment(p: Mapping) -> None:
    B = bar.BarrierFragment.from_json(p["fragment"])
    check = bar.verify_barrier_fragment if p["check"] == "barrier" else bar.verify_block_fragment
    report = check(B)
    _need(report.to_json() == p["report"], "recomputed report differs")
    _need(report.ok, "fragment has hard violations")


def _check_kb(p: Mapping) -> None:
    _need(kb_compare(p["s"], p["t"]).value == p["result"], "recomputed comparison differs")


_CHECKERS: Dict[str, Callable[[Mapping], None]] = {
    "embed-yes": _check_embed_yes,
    "embed-no": _check_embed_no,
    "good-pair": _check_good_pair,
    "bad-fragment": _check_bad_fragment,
    "perfect-fragment": _check_perfect_fragment,
    "homogeneous-base": _check_homogeneous,
    "h-certificate": _check_h,
    "decomposition": _check_decomposition,
    "leftmost": _check_leftmost,
    "decode": _check_decode,
    "ordinal": _check_ordinal,
    "fragment-check": _check_fragment,
    "kb-compare": _check_kb,
}


def verify_certificate(cert: Any) -> List[str]:
    """Problems found in a parsed certificate (empty when it is valid)."""
    if not isinstance(cert, dict):
        return ["certificate is not a JSON object"]
    expected = {"kind", "payload", "inputs", "budget", "version", "digest"}
    if set(cert) != expected:
        return [f"certificate fields {sorted(cert)} differ from {sorted(expected)}"]
    if cert["version"] != VERSION:
        return [f"unsupported version {cert['version']!r}"]
    if cert["kind"] not in _CHECKERS:
        return [f"unknown kind {cert['kind']!r}"]
    if _body_digest(cert) != cert["digest"]:
        return ["digest does not match the certificate body"]
    try:
        _CHECKERS[cert["kind"]](cert["payload"])
    except (CertificateError, WitnessError) as exc:
        return [str(exc)]
    except (KeyError, TypeError, ValueError, IndexError, AttributeError) as exc:
        return [f"malformed payload: {type(exc).__name__}: {exc}"]
    return []


def verify_bytes(data: bytes) -> List[str]:
    """Parse, require canonical bytes (compact or pretty form), then verify."""
    try:
        text = data.decode("utf-8")
        cert = json.loads(text)
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        return [f"not valid JSON: {exc}"]
    if text not in (canonical(cert) + "\n", pretty(cert) + "\n"):
        return ["certificate bytes are not in canonical form"]
    return verify_certificate(cert)


"""Command line interface: ``bqo <command> ...``.

Exit codes: 0 check passed or witness found, 1 definitive negative, 2 budget
exhausted (inconclusive), 3 input error.  Results are JSON on standard output
(pretty by default, canonical single-line with ``--json``); certificates can
be written with ``--out`` and re-checked with ``bqo verify``.
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import Any, Dict, List, Optional, Sequence, Tuple

from . import barrier as bar
from .certificates import (
    CertificateError,
    canonical,
    make_certificate,
    ordinal_op,
    ORDINAL_OPS,
    pretty,
    qo_to_json,
    sha256_bytes,
    value_to_json,
    verify_bytes,
)
from .embed import decide_embed, witness_to_json, atom_set
from .engine import EngineError, FuelExhausted, SearchBudget, higman_refute, locally_minimal_bad_array
from .hered import h_certificate, hi_decompose
from .ordinal import OrdinalError, format_ordinal
from .qo import QOError, QPresentation, from_relation, higman, parse_qo
from .reversal import TreeError, decode_wf, kb_compare, leftmost_path, parse_tree
from .terms import TermError, format_term, length, parse_terms

__all__ = ["main", "run"]

OK, NEGATIVE, EXHAUSTED, INPUT_ERROR = 0, 1, 2, 3


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


def _read(path: str, inputs: Dict[str, str], name: str) -> str:
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    inputs[name] = sha256_bytes(data)
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise InputError(f"{path}: not UTF-8 ({exc})") from None


def _in_file(path: str, exc: Exception) -> InputError:
    return InputError(f"{path}: {exc}")


def _budget(args) -> SearchBudget:
    try:
        fuel = args.fuel if args.fuel is not None else int(os.environ.get("BQO_FUEL", SearchBudget.fuel))
        depth = (args.probe_depth if args.probe_depth is not None
                 else int(os.environ.get("BQO_PROBE_DEPTH", SearchBudget.probe_depth)))
        return SearchBudget(fuel, depth)
    except (ValueError, EngineError) as exc:
        raise InputError(f"bad budget: {exc}") from None


def _load_qo(args, inputs, atoms_needed=()) -> QPresentation:
    if args.qo is None:
        elements = sorted(set(atoms_needed), key=str)
        if not elements:
            elements = ["_"]
        Q = from_relation(elements, (), name="equality")
    else:
        text = _read(args.qo, inputs, "qo")
        try:
            Q = parse_qo(text, name=os.path.basename(args.qo))
        except QOError as exc:
            raise _in_file(args.qo, exc) from None
    if getattr(args, "higman", False):
        Q = higman(Q)
    return Q


def _load_terms(path: str, inputs, name: str):
    text = _read(path, inputs, name)
    try:
        return parse_terms(text)
    except TermError as exc:
        raise _in_file(path, exc) from None


def _one_term(path: str, inputs, name: str):
    terms = _load_terms(path, inputs, name)
    if len(terms) != 1:
        raise InputError(f"{path}: expected exactly one term, found {len(terms)}")
    return terms[0]


def _fragment(args, inputs) -> bar.BarrierFragment:
    try:
        if args.builtin:
            B = bar.builtin_fragment(args.builtin)
            if args.window is not None and args.window != B.window:
                raise InputError("--window conflicts with the builtin's window")
            return B
        if not args.fragment:
            raise InputError("give --fragment FILE or --builtin SPEC")
        text = _read(args.fragment, inputs, "fragment")
        return bar.parse_fragment(text, window=args.window)
    except bar.BarrierError as exc:
        raise _in_file(args.fragment or args.builtin, exc) from None


def _parse_values(path: str, inputs, Q: QPresentation) -> Dict[tuple, Any]:
    """``entries : element`` lines; with a sequence order the element is a
    space-separated word (possibly empty)."""
    text = _read(path, inputs, "values")
    word_mode = Q.facts.get("base") is not None
    out: Dict[tuple, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        if ":" not in line:
            raise InputError(f"{path}: line {lineno}, column 1: expected 'entries : element'")
        left, right = line.split(":", 1)
        col = len(left) + 2
        try:
            s = bar.as_finseq(int(tok) for tok in left.split())
        except (ValueError, bar.BarrierError) as exc:
            raise InputError(f"{path}: line {lineno}, column 1: bad member ({exc})") from None
        tokens = right.split()
        if word_mode:
            value: Any = tuple(tokens)
        else:
            if len(tokens) != 1:
                raise InputError(f"{path}: line {lineno}, column {col}: expected one element")
            value = tokens[0]
        if value not in Q:
            raise InputError(f"{path}: line {lineno}, column {col}: {value!r} is not an element")
        if s in out:
            raise InputError(f"{path}: line {lineno}, column 1: member {s} repeated")
        out[s] = value
    if not out:
        raise InputError(f"{path}: no values")
    return out


def _array_json(Q, f) -> List:
    return [[list(s), value_to_json(Q, f[s])] for s in sorted(f, key=bar.member_key)]


# -- commands ------------------------------------------------------------------

def cmd_ord(args, inputs) -> Tuple[int, dict]:
    try:
        result = ordinal_op(args.op, args.args)
    except (OrdinalError, CertificateError) as exc:
        raise InputError(str(exc)) from None
    cert = make_certificate("ordinal", {"op": args.op, "args": args.args, "result": result})
    return OK, cert


def cmd_embed(args, inputs) -> Tuple[int, dict]:
    lhs = _one_term(args.lhs, inputs, "lhs")
    if args.hcert or args.decompose:
        Q = None
    else:
        if not args.rhs:
            raise InputError("embed needs --rhs (or --hcert / --decompose)")
        rhs = _one_term(args.rhs, inputs, "rhs")
        Q = _load_qo(args, inputs, atom_set(lhs) | atom_set(rhs))
    if args.hcert:
        cert = h_certificate(lhs)
        if cert is None:
            return NEGATIVE, {"kind": "not-h", "term": format_term(lhs)}
        payload = {"term": format_term(lhs), "tree": cert.to_json(), "depth": args.depth}
        return OK, make_certificate("h-certificate", payload, inputs)
    if args.decompose:
        parts = hi_decompose(lhs)
        payload = {
            "term": format_term(lhs),
            "parts": [format_term(p) for p in parts],
            "lengths": [format_ordinal(length(p)) for p in parts],
            "length": format_ordinal(length(lhs)),
        }
        return OK, make_certificate("decomposition", payload, inputs)
    try:
        w = decide_embed(lhs, rhs, Q)
    except QOError as exc:
        raise InputError(str(exc)) from None
    payload = {"lhs": format_term(lhs), "rhs": format_term(rhs), "qo": qo_to_json(Q)}
    if w is None:
        return NEGATIVE, make_certificate("embed-no", payload, inputs)
    payload["witness"] = witness_to_json(w)
    return OK, make_certificate("embed-yes", payload, inputs)


def cmd_barrier(args, inputs) -> Tuple[int, dict]:
    B = _fragment(args, inputs)
    if args.refine:
        try:
            B = bar.refine_block_to_barrier(B, budget=args.fuel)
        except bar.SearchExhausted as exc:
            return EXHAUSTED, {"kind": "exhausted", "reason": str(exc)}
        except bar.BarrierError as exc:
            return NEGATIVE, {"kind": "not-a-block", "reason": str(exc)}
    if args.square:
        B = bar.b_squared(B)
    if args.homogeneous is not None:
        coloring = _coloring(args, inputs, B)
        try:
            h = bar.homogeneous_sub_base(B, coloring, args.homogeneous, budget=args.fuel)
        except bar.SearchExhausted as exc:
            return EXHAUSTED, {"kind": "exhausted", "reason": str(exc)}
        if h is None:
            return NEGATIVE, {"kind": "not-found", "window": B.window, "target": args.homogeneous}
        payload = {
            "coloring": [[list(s), coloring[s]] for s in B.sorted_members()],
            "base": list(h),
            "target": args.homogeneous,
            "window": B.window,
            "colors": None,
        }
        return OK, make_certificate("homogeneous-base", payload, inputs)
    check = bar.verify_barrier_fragment if args.check == "barrier" else bar.verify_block_fragment
    report = check(B)
    payload = {"fragment": B.to_json(), "check": args.check, "report": report.to_json()}
    if not report.ok:
        return NEGATIVE, {"kind": "fragment-report", **payload}
    return OK, make_certificate("fragment-check", payload, inputs)


def _coloring(args, inputs, B: bar.BarrierFragment) -> Dict[tuple, int]:
    if args.coloring == "parity":
        return {s: sum(s) % 2 + 1 for s in B.members}
    if args.coloring is None:
        raise InputError("--homogeneous needs --coloring (a file or 'parity')")
    text = _read(args.coloring, inputs, "coloring")
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        left, _, right = line.partition(":")
        try:
            s = bar.as_finseq(int(t) for t in left.split())
            c = int(right)
        except (ValueError, bar.BarrierError) as exc:
            raise InputError(f"{args.coloring}: line {lineno}, column 1: {exc}") from None
        out[s] = c
    missing = [s for s in B.members if s not in out]
    if missing:
        raise InputError(f"{args.coloring}: no colour for member {missing[0]}")
    return out


def cmd_array(args, inputs) -> Tuple[int, dict]:
    Q = _load_qo(args, inputs)
    f = _parse_values(args.values, inputs, Q)
    qo = qo_to_json(Q)
    if args.refine:
        B = bar.BarrierFragment(frozenset(f), max(x for s in f for x in s))
        try:
            r = bar.perfect_refine(f, Q, B, budget=args.fuel)
        except bar.SearchExhausted as exc:
            return EXHAUSTED, {"kind": "exhausted", "reason": str(exc)}
        if r is None:
            return NEGATIVE, {"kind": "not-found", "window": B.window}
        sub = {s: f[s] for s in r.fragment.members}
        payload = {"qo": qo, "values": _array_json(Q, sub), "base": list(r.fragment.base)}
        if r.tag == "perfect":
            payload["parent"] = _array_json(Q, f)
        else:
            payload["seed"] = _array_json(Q, f)
        return OK, make_certificate(f"{r.tag}-fragment", payload, inputs)
    cls = bar.classify_array(f, Q)
    if cls.kind == "bad":
        payload = {"qo": qo, "values": _array_json(Q, f), "seed": None}
        return OK, make_certificate("bad-fragment", payload, inputs)
    if cls.kind == "perfect":
        payload = {"qo": qo, "values": _array_json(Q, f), "parent": None}
        return OK, make_certificate("perfect-fragment", payload, inputs)
    s, t = cls.good
    payload = {"qo": qo, "mode": "array", "values": _array_json(Q, f), "s": list(s), "t": list(t)}
    return OK, make_certificate("good-pair", payload, inputs)


def cmd_mbs(args, inputs) -> Tuple[int, dict]:
    Q = _load_qo(args, inputs)
    if Q.lt_aux is None:
        raise InputError("the quasi-order has no 'lt' facts (needed for minimization)")
    f = _parse_values(args.values, inputs, Q)
    budget = _budget(args)
    try:
        result = locally_minimal_bad_array(Q, f, budget)
    except (EngineError, QOError) as exc:
        raise InputError(str(exc)) from None
    report = result.to_json(lambda q: value_to_json(Q, q))
    payload = {
        "qo": qo_to_json(Q),
        "values": report.pop("values"),
        "seed": _array_json(Q, f),
        "steps": report["steps"],
    }
    cert = make_certificate("bad-fragment", payload, inputs, budget.to_json())
    return (OK if result.fully_certified else EXHAUSTED), cert


def cmd_refute(args, inputs) -> Tuple[int, dict]:
    terms = _load_terms(args.stream, inputs, "stream")
    atoms_needed = set()
    for t in terms:
        atoms_needed |= atom_set(t)
    Q = _load_qo(args, inputs, atoms_needed)
    budget = _budget(args)
    try:
        got = higman_refute(Q, terms, budget)
    except (EngineError, QOError) as exc:
        raise InputError(str(exc)) from None
    if isinstance(got, FuelExhausted):
        info = {"kind": "fuel-exhausted", "reason": got.reason, "examined": got.examined,
                "fuel_used": got.fuel_used}
        return (EXHAUSTED if got.reason == "fuel" else NEGATIVE), info
    payload = {
        "qo": qo_to_json(Q),
        "mode": "stream",
        "stream": [format_term(t) for t in terms[: got.j + 1]],
        "i": got.i,
        "j": got.j,
        "witness": witness_to_json(got.witness),
        "method": got.method,
        "fuel_used": got.fuel_used,
    }
    return OK, make_certificate("good-pair", payload, inputs, budget.to_json())


def cmd_kb(args, inputs) -> Tuple[int, dict]:
    if args.tree:
        text = _read(args.tree, inputs, "tree")
        try:
            T = parse_tree(text)
        except TreeError as exc:
            raise _in_file(args.tree, exc) from None
        f = leftmost_path(T)
        if f is None:
            return NEGATIVE, {"kind": "well-founded", "tree": T.to_json()}
        payload = {"tree": T.to_json(), "path": [list(f.path.stem), list(f.path.cycle)],
                   "chain": [list(u) for u in f.chain]}
        return OK, make_certificate("leftmost", payload, inputs)
    if args.compare is None:
        raise InputError("kb needs --tree FILE or --compare S T")
    try:
        s, t = ([int(x) for x in part.split()] for part in args.compare)
    except ValueError as exc:
        raise InputError(f"--compare: {exc}") from None
    payload = {"s": s, "t": t, "result": kb_compare(s, t).value}
    return OK, make_certificate("kb-compare", payload, inputs)


def cmd_decode(args, inputs) -> Tuple[int, dict]:
    trees = []
    for k, path in enumerate(args.trees):
        text = _read(path, inputs, f"tree{k}")
        try:
            trees.append(parse_tree(text))
        except TreeError as exc:
            raise _in_file(path, exc) from None
    got = decode_wf(trees)
    payload = {
        "trees": [T.to_json() for T in trees],
        "z": sorted(got.indices),
        "path": [list(got.path.path.stem), list(got.path.path.cycle)],
        "truncated": got.truncated,
    }
    return OK, make_certificate("decode", payload, inputs)


def cmd_verify(args, inputs) -> Tuple[int, dict]:
    try:
        with open(args.certificate, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {args.certificate}: {exc.strerror}") from None
    problems = verify_bytes(data)
    return (OK if not problems else NEGATIVE), {"valid": not problems, "problems": problems}


# -- entry point ---------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="bqo", description=__doc__.splitlines()[0])
    p.add_argument("--json", action="store_true", help="canonical single-line JSON output")
    p.add_argument("--out", help="also write the certificate to this file")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, qo=True, budget=False, window=False):
        sp.add_argument("--json", action="store_true", default=argparse.SUPPRESS)
        sp.add_argument("--out", default=argparse.SUPPRESS)
        if qo:
            sp.add_argument("--qo", help="quasi-order file (elem/leq/lt lines)")
            sp.add_argument("--higman", action="store_true",
                            help="lift the quasi-order to finite words under embedding")
        if budget:
            sp.add_argument("--fuel", type=int, default=None)
            sp.add_argument("--probe-depth", type=int, default=None)
        if window:
            sp.add_argument("--window", type=int, default=None)

    sp = sub.add_parser("ord", help="ordinal arithmetic in Cantor normal form")
    sp.add_argument("op", choices=ORDINAL_OPS)
    sp.add_argument("args", nargs="+")
    common(sp, qo=False)

    sp = sub.add_parser("embed", help="decide embeddability of sequence terms")
    sp.add_argument("--lhs", required=True)
    sp.add_argument("--rhs")
    sp.add_argument("--hcert", action="store_true", help="tree certificate for --lhs")
    sp.add_argument("--decompose", action="store_true", help="H-decomposition of --lhs")
    sp.add_argument("--depth", type=int, default=3, help="checking depth for --hcert")
    common(sp)

    sp = sub.add_parser("barrier", help="check fragments, B², homogeneous sub-bases")
    sp.add_argument("--fragment")
    sp.add_argument("--builtin", help="uniform:k:window or rankomega:window")
    sp.add_argument("--check", choices=("barrier", "block"), default="barrier")
    sp.add_argument("--square", action="store_true")
    sp.add_argument("--refine", action="store_true", help="refine a block to a barrier first")
    sp.add_argument("--homogeneous", type=int, metavar="TARGET")
    sp.add_argument("--coloring", help="'entries : colour' file, or 'parity'")
    sp.add_argument("--fuel", type=int, default=None)
    common(sp, qo=False, window=True)

    sp = sub.add_parser("array", help="classify or refine a Q-array")
    sp.add_argument("--values", required=True, help="'entries : element' lines")
    sp.add_argument("--refine", action="store_true")
    sp.add_argument("--fuel", type=int, default=None)
    common(sp)

    sp = sub.add_parser("mbs", help="minimal bad sequence / locally minimal bad array")
    sp.add_argument("--values", required=True)
    common(sp, budget=True)

    sp = sub.add_parser("refute", help="find a good pair in a stream of finite terms")
    sp.add_argument("--stream", required=True)
    common(sp, budget=True)

    sp = sub.add_parser("kb", help="Kleene-Brouwer comparison and leftmost paths")
    sp.add_argument("--tree")
    sp.add_argument("--compare", nargs=2, metavar=("S", "T"))
    common(sp, qo=False)

    sp = sub.add_parser("decode", help="decode well-foundedness of a family of trees")
    sp.add_argument("trees", nargs="+")
    common(sp, qo=False)

    sp = sub.add_parser("verify", help="check a certificate")
    sp.add_argument("--certificate", required=True)
    common(sp, qo=False)
    return p


COMMANDS = {
    "ord": cmd_ord,
    "embed": cmd_embed,
    "barrier": cmd_barrier,
    "array": cmd_array,
    "mbs": cmd_mbs,
    "refute": cmd_refute,
    "kb": cmd_kb,
    "decode": cmd_decode,
    "verify": cmd_verify,
}


def run(argv: Optional[Sequence[str]] = None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    compact = False
    try:
        args = parser.parse_args(argv)
        compact = args.json
        code, result = COMMANDS[args.command](args, {})
    except InputError as exc:
        code, result = INPUT_ERROR, {"error": str(exc)}
    except (OrdinalError, QOError, TermError, TreeError, bar.BarrierError) as exc:
        code, result = INPUT_ERROR, {"error": str(exc)}
    text = canonical(result) if compact else pretty(result)
    stdout.write(text + "\n")
    out = getattr(args, "out", None) if code != INPUT_ERROR else None
    if out and "digest" in result:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

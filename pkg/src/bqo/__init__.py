"""Ordinals, transfinite sequence embedding, barriers and minimal bad arrays.

Submodules:

* :mod:`bqo.ordinal` -- Cantor normal form ordinals below epsilon_0
* :mod:`bqo.qo` -- presented quasi-orders and the finite-word lift
* :mod:`bqo.terms` / :mod:`bqo.embed` / :mod:`bqo.hered` -- periodic
  transfinite sequences, embedding witnesses, tree certificates
* :mod:`bqo.barrier` -- fragments of blocks and barriers, Q-arrays
* :mod:`bqo.engine` -- minimal bad arrays and the Higman refuter
* :mod:`bqo.reversal` -- Kleene-Brouwer order, leftmost paths, decoding
* :mod:`bqo.certificates` / :mod:`bqo.cli` -- JSON certificates and the CLI
"""

from .ordinal import Ordinal, parse_ordinal, format_ordinal, compare, add
from .qo import QPresentation, from_relation, total_order, higman, parse_qo
from .terms import SeqTerm, atom, cat, rep, seq, length, parse_term, format_term
from .embed import decide_embed, embeds, verify_witness
from .hered import h_certificate, hi_decompose
from .barrier import BarrierFragment, triangle, classify_array, homogeneous_sub_base
from .engine import SearchBudget, locally_minimal_bad_array, minimal_bad_sequence, higman_refute
from .reversal import LassoTree, leftmost_path, decode_wf, kb_compare
from .certificates import make_certificate, verify_certificate

__version__ = "0.1.0"

__all__ = [
    "Ordinal", "parse_ordinal", "format_ordinal", "compare", "add",
    "QPresentation", "from_relation", "total_order", "higman", "parse_qo",
    "SeqTerm", "atom", "cat", "rep", "seq", "length", "parse_term", "format_term",
    "decide_embed", "embeds", "verify_witness",
    "h_certificate", "hi_decompose",
    "BarrierFragment", "triangle", "classify_array", "homogeneous_sub_base",
    "SearchBudget", "locally_minimal_bad_array", "minimal_bad_sequence", "higman_refute",
    "LassoTree", "leftmost_path", "decode_wf", "kb_compare",
    "make_certificate", "verify_certificate",
]

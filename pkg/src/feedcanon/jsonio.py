"""JSON encodings of matrices, pairs, triples, witnesses, invariants and traces.

Matrix: ``{"rows", "cols", "entries": [[re, im], ...], "field"}`` with
row-major entries.  Exact scalars are rational strings (``"3"``, ``"-1/2"``),
float scalars are JSON numbers.  ``field`` is optional on input and inferred
from the entry types.
"""
from __future__ import annotations

import json
import math
from typing import Any

import numpy as np
from gmpy2 import mpq

from .errors import BudgetError, FormatError
from .exactmat import EXACT, FLOAT, GaussRat, Matrix
from .orbit import OrbitReport
from .pairs import BrunovskyInvariants, MatrixPair, PairWitness
from .polynomials import format_poly, parse_poly
from .reduction import ReductionTrace, TraceStep, collapse_trace
from .triples import FeedbackWitness, MatrixTriple, triple_norm


def _num(x: float) -> float | int:
    x = float(x)
    return int(x) if x.is_integer() and abs(x) < 2 ** 53 else x


def encode_matrix(M: Matrix) -> dict:
    if M.is_exact:
        entries = [[str(z.re), str(z.im)] for z in M.array.flat]
    else:
        entries = [[_num(z.real), _num(z.imag)] for z in np.asarray(M.array, complex).flat]
    return {"rows": M.rows, "cols": M.cols, "field": M.field, "entries": entries}


def _exact_part(v: Any) -> mpq:
    if isinstance(v, bool) or not isinstance(v, (str, int)):
        raise FormatError(f"exact entry parts must be rational strings, got {v!r}")
    try:
        return mpq(v)
    except (ValueError, ZeroDivisionError) as exc:
        raise FormatError(f"malformed rational {v!r}") from exc


def _float_part(v: Any) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise FormatError(f"float entry parts must be numbers, got {v!r}")
    if not math.isfinite(v):
        raise FormatError("non-finite float entry")
    return float(v)


def decode_matrix(obj: Any, field: str | None = None) -> Matrix:
    if not isinstance(obj, dict):
        raise FormatError("a matrix must be a JSON object")
    try:
        rows, cols, entries = obj["rows"], obj["cols"], obj["entries"]
    except KeyError as exc:
        raise FormatError(f"matrix object lacks {exc.args[0]!r}") from exc
    if not (isinstance(rows, int) and isinstance(cols, int)) or rows < 0 or cols < 0:
        raise FormatError("rows and cols must be nonnegative integers")
    if not isinstance(entries, list) or len(entries) != rows * cols:
        raise FormatError(f"expected {rows * cols} entries")
    for e in entries:
        if not isinstance(e, list) or len(e) != 2:
            raise FormatError("each entry must be a [re, im] pair")
    f = obj.get("field", field)
    if f is None:
        f = EXACT if all(isinstance(p, str) for e in entries for p in e) else FLOAT
    if f not in (EXACT, FLOAT):
        raise FormatError(f"unknown field {f!r}")
    if f == EXACT:
        a = np.empty((rows, cols), dtype=object)
        for k, (re_, im_) in enumerate(entries):
            a[divmod(k, cols)] = GaussRat._make(_exact_part(re_), _exact_part(im_))
        return Matrix._wrap(a, EXACT)
    vals = [complex(_float_part(re_), _float_part(im_)) for re_, im_ in entries]
    return Matrix._wrap(np.array(vals, dtype=complex).reshape(rows, cols), FLOAT)


def _get(obj: Any, key: str) -> Any:
    if not isinstance(obj, dict) or key not in obj:
        raise FormatError(f"missing key {key!r}")
    return obj[key]


def encode_pair(p: MatrixPair) -> dict:
    return {"m": p.m, "n": p.n, "B": encode_matrix(p.B), "A": encode_matrix(p.A)}


def decode_pair(obj: Any) -> MatrixPair:
    p = MatrixPair(decode_matrix(_get(obj, "B")), decode_matrix(_get(obj, "A")))
    _check_sizes(obj, p.m, p.n)
    return p


def encode_triple(T: MatrixTriple) -> dict:
    return {"m": T.m, "n": T.n, "C": encode_matrix(T.C), "B": encode_matrix(T.B),
            "A": encode_matrix(T.A)}


def decode_triple(obj: Any) -> MatrixTriple:
    T = MatrixTriple(*(decode_matrix(_get(obj, k)) for k in "CBA"))
    _check_sizes(obj, T.m, T.n)
    return T


def _check_sizes(obj: dict, m: int, n: int) -> None:
    for key, val in (("m", m), ("n", n)):
        if key in obj and obj[key] != val:
            raise FormatError(f"declared {key}={obj[key]} but matrices give {val}")


def encode_witness(w: FeedbackWitness | PairWitness) -> dict:
    out = {"S": encode_matrix(w.S), "P": encode_matrix(w.P), "U": encode_matrix(w.U)}
    if isinstance(w, FeedbackWitness):
        out["V"] = encode_matrix(w.V)
    return out


def decode_witness(obj: Any) -> FeedbackWitness:
    return FeedbackWitness(*(decode_matrix(_get(obj, k)) for k in ("S", "P", "U", "V")))


def decode_pair_witness(obj: Any) -> PairWitness:
    return PairWitness(*(decode_matrix(_get(obj, k)) for k in ("S", "P", "U")))


def encode_invariants(inv: BrunovskyInvariants) -> dict:
    return {"ctrl_indices": list(inv.ctrl_indices), "zero_cols": inv.zero_cols,
            "invariant_factors": [format_poly(f) for f in inv.invariant_factors]}


def decode_invariants(obj: Any) -> BrunovskyInvariants:
    try:
        inv = BrunovskyInvariants(tuple(int(k) for k in _get(obj, "ctrl_indices")),
                                  int(_get(obj, "zero_cols")),
                                  tuple(parse_poly(f) for f in _get(obj, "invariant_factors")))
    except (TypeError, ValueError) as exc:
        raise FormatError(f"malformed invariants: {exc}") from exc
    return inv


def encode_orbit_report(r: OrbitReport) -> dict:
    return r.to_dict()


def decode_orbit_report(obj: Any) -> OrbitReport:
    keys = ("m", "n", "ambient_dim", "group_dim", "orbit_dim", "stabilizer_dim", "rigid")
    return OrbitReport(*(_get(obj, k) for k in keys))


def encode_trace(T: MatrixTriple, tr: ReductionTrace) -> dict:
    """Trace with its collapsed perturbation; ``budget_ok`` reports whether the
    collapse accepted every step and the result stays below epsilon."""
    out: dict = {"epsilon": tr.epsilon,
                 "steps": [{"delta": encode_triple(s.delta), "witness": encode_witness(s.witness)}
                           for s in tr.steps]}
    try:
        nabla, w = collapse_trace(T, tr)
        out.update(nabla=encode_triple(nabla), final_witness=encode_witness(w),
                   budget_ok=triple_norm(nabla) < tr.epsilon)
    except BudgetError:
        out.update(nabla=None, final_witness=None, budget_ok=False)
    return out


def decode_trace(obj: Any) -> ReductionTrace:
    steps = tuple(TraceStep(decode_triple(_get(s, "delta")), decode_witness(_get(s, "witness")))
                  for s in _get(obj, "steps"))
    return ReductionTrace(float(_get(obj, "epsilon")), steps)


def loads(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc}") from exc


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2)

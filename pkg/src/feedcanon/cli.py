"""Command-line front end.

Exit codes: 0 success, 1 witness residual above tolerance, 2 malformed input,
3 violated precondition, 4 internal invariant violation.
"""
from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Sequence

from . import jsonio
from .errors import FormatError, InvariantViolation, PreconditionError
from .exactmat import EXACT, FIELDS, FLOAT, Matrix
from .orbit import orbit_dimension, orbit_rank, pair_orbit_dimension
from .pairs import (brunovsky_assemble, brunovsky_decompose, canonical_pair_F, canonical_pair_H,
                    pairs_feedback_similar, random_pair)
from .reduction import (reduce_alpha_n, reduce_pair_generic, reduce_to_rigid,
                        reduce_triple_to_K)
from .triples import (MatrixTriple, random_triple, rigid_exists, rigid_form, rigid_levels,
                      rigid_margin, verify_witness)

EXIT_OK, EXIT_RESIDUAL, EXIT_PARSE, EXIT_PRECONDITION, EXIT_INVARIANT = 0, 1, 2, 3, 4
SWEEP_CAP = {EXACT: 10, FLOAT: 20}
CSV_HEADER = ["m", "n", "predicted_rigid", "samples", "full_rank_count", "max_orbit_dim",
              "ambient_dim"]


@dataclass(frozen=True)
class SweepCell:
    m: int
    n: int
    predicted_rigid: bool
    samples: int
    full_rank_count: int
    max_orbit_dim: int
    ambient_dim: int

    def consistent(self) -> bool:
        """A size without a rigid triple can never produce a full-dimensional orbit."""
        return self.predicted_rigid or self.full_rank_count == 0

    def row(self) -> list:
        return [self.m, self.n, str(self.predicted_rigid).lower(), self.samples,
                self.full_rank_count, self.max_orbit_dim, self.ambient_dim]


def sweep_cell(m: int, n: int, samples: int, seed: int, field: str = EXACT,
               tol: float = 1e-9) -> SweepCell:
    mode = "exact" if field == EXACT else "float"
    ranks = [orbit_rank(random_triple(m, n, [seed, m, n, k], field), mode,
                        None if field == EXACT else tol)
             for k in range(samples)]
    ambient = m * (n + 2 * m)
    return SweepCell(m, n, rigid_exists(m, n), samples, sum(r == ambient for r in ranks),
                     max(ranks, default=0), ambient)


def run_sweep(max_m: int, max_n: int, samples: int, seed: int, field: str = EXACT,
              jobs: int = 1, tol: float = 1e-9) -> list[SweepCell]:
    """One cell per ``1 <= m <= max_m, 1 <= n <= max_n``; every sample is seeded
    by ``(seed, m, n, index)`` so the result does not depend on ``jobs``."""
    cap = SWEEP_CAP.get(field)
    if cap is None:
        raise PreconditionError(f"unknown field {field!r}")
    if max_m < 1 or max_n < 1 or samples < 0 or jobs < 1:
        raise PreconditionError("sweep needs max_m, max_n, jobs >= 1 and samples >= 0")
    if max_m > cap or max_n > cap:
        raise PreconditionError(f"sweep bounds exceed the {field} cap of {cap}")
    cells = [(m, n) for m in range(1, max_m + 1) for n in range(1, max_n + 1)]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(lambda mn: sweep_cell(*mn, samples, seed, field, tol), cells))


def sweep_csv(cells: Sequence[SweepCell]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for c in cells:
        w.writerow(c.row())
    return buf.getvalue()


# -- helpers ---------------------------------------------------------------------------

def _read_json(path: str) -> Any:
    try:
        text = sys.stdin.read() if path == "-" else open(path, encoding="utf-8").read()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror}") from exc
    return jsonio.loads(text)


def _emit(obj: Any) -> None:
    print(jsonio.dumps(obj))


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer")
    if v < 1:
        raise argparse.ArgumentTypeError(f"{text!r} must be positive")
    return v


def _nonneg(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer")
    if v < 0:
        raise argparse.ArgumentTypeError(f"{text!r} must be nonnegative")
    return v


def _default_seed() -> int:
    raw = os.environ.get("FEEDCANON_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        return 0


def _as_triple(obj: Any) -> MatrixTriple:
    return jsonio.decode_triple(obj)


# -- commands -------------------------------------------------------------------------

def cmd_rigid_check(args) -> int:
    m, n = args.m, args.n
    rigid = rigid_exists(m, n)
    out = {"m": m, "n": n, "rigid": rigid, "margin": rigid_margin(m, n), "sequence": None}
    if rigid:
        out["sequence"] = [list(s) for s in rigid_levels(m, n)]
    _emit(out)
    return EXIT_OK


def cmd_rigid_construct(args) -> int:
    form = rigid_form(args.m, args.n, args.field)
    out = jsonio.encode_triple(form.triple)
    out.update(p=form.p, q=form.q, l=form.l, levels=[list(s) for s in form.levels])
    _emit(out)
    return EXIT_OK


def cmd_canon_pair(args) -> int:
    make = canonical_pair_H if args.variant == "H" else canonical_pair_F
    _emit(jsonio.encode_pair(make(args.m, args.n, args.field)))
    return EXIT_OK


def cmd_brunovsky(args) -> int:
    p = jsonio.decode_pair(_read_json(args.pair))
    inv, w = brunovsky_decompose(p)
    out = {"invariants": jsonio.encode_invariants(inv), "witness": jsonio.encode_witness(w),
           "canonical": jsonio.encode_pair(brunovsky_assemble(inv))}
    if args.compare:
        out["similar"] = pairs_feedback_similar(p, jsonio.decode_pair(_read_json(args.compare)))
    _emit(out)
    return EXIT_OK


def cmd_orbit_dim(args) -> int:
    obj = _read_json(args.input)
    tol = args.tol if args.mode == "float" else None
    if isinstance(obj, dict) and "C" in obj:
        report = orbit_dimension(_as_triple(obj), args.mode, tol)
    else:
        report = pair_orbit_dimension(jsonio.decode_pair(obj), args.mode, tol)
    _emit(report.to_dict())
    return EXIT_OK


def cmd_reduce_pair(args) -> int:
    p = jsonio.decode_pair(_read_json(args.input))
    r = reduce_pair_generic(p, args.eps)
    pf = p if p.field == FLOAT else p.to_float()
    embedded = MatrixTriple(pf.B, pf.A, Matrix.zeros(p.m, p.m, FLOAT))
    _emit({"pair": jsonio.encode_pair(r.pair), "witness": jsonio.encode_witness(r.witness),
           "trace": jsonio.encode_trace(embedded, r.trace)})
    return EXIT_OK


def _reduce_output(T: MatrixTriple, r, **extra) -> dict:
    Tf = T if T.field == FLOAT else T.to_float()
    out = {"triple": jsonio.encode_triple(r.triple), "witness": jsonio.encode_witness(r.witness),
           "trace": jsonio.encode_trace(Tf, r.trace)}
    out.update(extra)
    return out


def cmd_reduce_k(args) -> int:
    T = _as_triple(_read_json(args.input))
    r = reduce_triple_to_K(T, args.eps)
    _emit(_reduce_output(T, r, N=None if r.N is None else jsonio.encode_matrix(r.N)))
    return EXIT_OK


def cmd_reduce_alpha_n(args) -> int:
    T = _as_triple(_read_json(args.input))
    r = reduce_alpha_n(T, args.eps)
    _emit(_reduce_output(T, r, N=jsonio.encode_matrix(r.N)))
    return EXIT_OK


def cmd_reduce_rigid(args) -> int:
    T = _as_triple(_read_json(args.input))
    r = reduce_to_rigid(T, args.eps)
    _emit(_reduce_output(T, r, levels=[list(s) for s in r.levels], p=r.p, q=r.q, l=r.l))
    return EXIT_OK


def cmd_verify_witness(args) -> int:
    T = _as_triple(_read_json(args.triple))
    T2 = _as_triple(_read_json(args.image))
    w = jsonio.decode_witness(_read_json(args.witness))
    fields = {T.field, T2.field, w.field}
    if len(fields) > 1:
        T, T2, w = T.to_float(), T2.to_float(), w.to_float()
    res = verify_witness(T, T2, w)
    ok = res <= args.tol
    _emit({"residual": res, "tol": args.tol, "ok": ok})
    return EXIT_OK if ok else EXIT_RESIDUAL


def cmd_sweep(args) -> int:
    cells = run_sweep(args.max_m, args.max_n, args.samples, args.seed, args.field, args.jobs,
                      args.tol)
    text = sweep_csv(cells)
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    if not all(c.consistent() for c in cells):
        raise InvariantViolation("a size without a rigid triple produced a full-dimensional orbit")
    return EXIT_OK


def cmd_random_triple(args) -> int:
    _emit(jsonio.encode_triple(random_triple(args.m, args.n, args.seed, args.field)))
    return EXIT_OK


def cmd_random_pair(args) -> int:
    _emit(jsonio.encode_pair(random_pair(args.m, args.n, args.seed, args.field)))
    return EXIT_OK


# -- parser ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="feedcanon",
                                 description="Canonical forms of matrix pairs and triples "
                                             "under feedback similarity.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--eps", type=float, default=1e-6, help="perturbation budget")
    common.add_argument("--tol", type=float, default=1e-9, help="residual / rank tolerance")
    common.add_argument("--field", choices=FIELDS, default=EXACT)
    common.add_argument("--seed", type=int, default=_default_seed(),
                        help="RNG seed (default: $FEEDCANON_SEED or 0)")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.set_defaults(func=func)
        return p

    p = add("rigid-check", cmd_rigid_check, "decide whether a rigid m x (n,m,m) triple exists")
    p.add_argument("m", type=_positive)
    p.add_argument("n", type=_positive)
    p = add("rigid-construct", cmd_rigid_construct, "print the rigid canonical triple")
    p.add_argument("m", type=_positive)
    p.add_argument("n", type=_positive)
    p = add("canon-pair", cmd_canon_pair, "print the generic canonical pair")
    p.add_argument("m", type=_nonneg)
    p.add_argument("n", type=_positive)
    p.add_argument("--variant", choices=("H", "F"), default="H")
    p = add("brunovsky", cmd_brunovsky, "canonical decomposition of an exact pair")
    p.add_argument("pair", help="pair JSON file or - for stdin")
    p.add_argument("--compare", help="second pair JSON; report feedback similarity")
    p = add("orbit-dim", cmd_orbit_dim, "orbit and stabilizer dimensions of a pair or triple")
    p.add_argument("input")
    p.add_argument("--mode", choices=("exact", "float"), default="exact")
    for name, func, help_ in (("reduce-pair", cmd_reduce_pair, "reduce a pair to H_mn"),
                              ("reduce-k", cmd_reduce_k, "reduce a triple to the K(N) form"),
                              ("reduce-alpha-n", cmd_reduce_alpha_n,
                               "normal form for m = alpha*n, alpha >= 2"),
                              ("reduce-rigid", cmd_reduce_rigid,
                               "reduce a triple to the rigid canonical triple")):
        p = add(name, func, help_)
        p.add_argument("input")
    p = add("verify-witness", cmd_verify_witness, "check S[T'] = [T]R for a witness")
    p.add_argument("triple")
    p.add_argument("image")
    p.add_argument("witness")
    p = add("sweep", cmd_sweep, "orbit-dimension sweep over a size grid, CSV output")
    p.add_argument("max_m", type=_positive)
    p.add_argument("max_n", type=_positive)
    p.add_argument("--samples", type=_nonneg, default=10)
    p.add_argument("--jobs", type=_positive, default=1)
    p.add_argument("--out", default=None, help="CSV path (default stdout)")
    for name, func in (("random-triple", cmd_random_triple), ("random-pair", cmd_random_pair)):
        p = add(name, func, "seeded random sample as JSON")
        p.add_argument("m", type=_nonneg)
        p.add_argument("n", type=_nonneg)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except PreconditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except InvariantViolation as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())

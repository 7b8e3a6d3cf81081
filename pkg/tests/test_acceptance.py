"""Acceptance criteria 1-9, each at its stated tolerance and time limit.

Run alone with ``pytest tests/test_acceptance.py`` (or execute this file);
a PASS/FAIL line per criterion is printed at the end of the session.
"""
import sys
import time

import mpmath
import numpy as np
import pytest

from feedcanon.cli import run_sweep, sweep_csv
from feedcanon.exactmat import FLOAT, Matrix, exact_rank, hstack, nullspace_basis
from feedcanon.orbit import orbit_dimension
from feedcanon.pairs import (apply_pair_feedback, brunovsky_assemble, brunovsky_decompose,
                            canonical_pair_H, endomorphism_basis, pair_stabilizer_dimension,
                            pair_stabilizer_system, pairs_feedback_similar, random_pair,
                            vec_endomorphism)
from feedcanon.polynomials import deg
from feedcanon.errors import PreconditionError
from feedcanon.reduction import collapse_trace, reduce_alpha_n, reduce_to_rigid
from feedcanon.triples import (apply_feedback, build_strict, make_K, random_triple,
                               random_witness, rigid_canonical, rigid_exists, rigid_margin,
                               strict_equiv_check, triple_norm, verify_witness,
                               witness_from_strict)

from helpers import ACCEPTANCE


def record(k: int, ok: bool, detail: str, started: float, limit: float | None = None) -> None:
    elapsed = time.perf_counter() - started
    within = limit is None or elapsed < limit
    budget = f" (limit {limit:g}s)" if limit is not None else ""
    line = f"{detail}; {elapsed:.2f}s{budget}"
    ACCEPTANCE[k] = (ok and within, line)
    print(f"criterion {k}: {'PASS' if ok and within else 'FAIL'}  {line}")
    assert ok, line
    assert within, f"took {elapsed:.2f}s, limit {limit}s"


def column(values) -> Matrix:
    return Matrix.from_array(np.array(values, dtype=object).reshape(-1, 1))


def test_criterion_1_threshold():
    t0 = time.perf_counter()
    mismatches = 0
    with mpmath.workdps(100):
        phi = (1 + mpmath.sqrt(5)) / 2
        for n in range(1, 201):
            bound = n * phi
            for m in range(1, 201):
                mismatches += rigid_exists(m, n) != (m < bound)
    fib = [1, 1]
    while len(fib) < 14:
        fib.append(fib[-1] + fib[-2])
    pairs = [(fib[k + 1], fib[k]) for k in range(1, 13)]
    flags = [rigid_exists(m, n) for m, n in pairs]
    alternate = all(a != b for a, b in zip(flags, flags[1:]))
    unit_margin = all(abs(rigid_margin(m, n)) == 1 for m, n in pairs)
    record(1, mismatches == 0 and alternate and unit_margin,
           f"40000 sizes, {mismatches} disagreements; Fibonacci alternation {alternate}, "
           f"margins +-1 {unit_margin}", t0, 1.0)


def test_criterion_2_rigid_orbits_full():
    t0 = time.perf_counter()
    cells = [(m, n) for n in range(1, 5) for m in range(1, 2 * n + 1)
             if (m <= n or rigid_exists(m, n))]
    bad = [(m, n) for m, n in cells
           if orbit_dimension(rigid_canonical(m, n)).orbit_dim != m * (n + 2 * m)]
    record(2, not bad, f"{len(cells)} sizes, full orbit failures {bad}", t0, 30.0)


def test_criterion_3_non_rigid_everywhere():
    t0 = time.perf_counter()
    cells = [(m, n) for n in range(1, 4) for m in range(1, 7) if rigid_margin(m, n) > 0]
    exceptions = 0
    for m, n in cells:
        for k in range(20):
            r = orbit_dimension(random_triple(m, n, [3, m, n, k]))
            exceptions += r.orbit_dim >= m * (n + 2 * m)
    record(3, exceptions == 0, f"{len(cells)} sizes x 20 samples, {exceptions} full orbits",
           t0, 60.0)


def test_criterion_4_endomorphism_dimension():
    t0 = time.perf_counter()
    bad = []
    for n in range(1, 6):
        for m in range(1, 9):
            H = canonical_pair_H(m, n)
            system = pair_stabilizer_system(H)
            kernel = nullspace_basis(system)
            params = [column(vec_endomorphism(w)) for w in endomorphism_basis(m, n)]
            ok = (pair_stabilizer_dimension(H) == n * n == len(kernel)
                  and all((system @ v).is_zero() for v in params)
                  and exact_rank(hstack(params)) == n * n
                  and exact_rank(hstack(params + kernel)) == n * n)
            if not ok:
                bad.append((m, n))
    record(4, not bad, f"40 sizes, parametrization = solution space; failures {bad}", t0, 30.0)


def test_criterion_5_brunovsky_round_trip():
    t0 = time.perf_counter()
    failures = 0
    rng = np.random.default_rng(5)
    for k in range(200):
        m, n = int(rng.integers(0, 7)), int(rng.integers(0, 7))
        p = random_pair(m, n, [5, k], low=-2, high=2)
        if k % 4 == 0 and n > 1 and m > 0:
            p = type(p)(p.B[:, :1] @ Matrix.from_array(np.ones((1, n), dtype=object)), p.A)
        inv, w = brunovsky_decompose(p)
        canon = brunovsky_assemble(inv)
        ok = (apply_pair_feedback(p, w) == canon and pairs_feedback_similar(p, canon)
              and sum(inv.ctrl_indices) + sum(deg(f) for f in inv.invariant_factors) == m
              and len(inv.ctrl_indices) + inv.zero_cols == n)
        failures += not ok
    record(5, failures == 0, f"200 pairs, {failures} failures", t0)


def test_criterion_6_reduction_soundness():
    t0 = time.perf_counter()
    eps = 1e-6
    worst_nabla, worst_res, mismatches = 0.0, 0.0, 0
    for m, n in [(1, 1), (3, 2), (4, 3), (8, 5)]:
        target = rigid_canonical(m, n, FLOAT)
        for k in range(50):
            T = random_triple(m, n, [6, m, n, k], FLOAT)
            r = reduce_to_rigid(T, eps)
            mismatches += r.triple != target
            nabla, w = collapse_trace(T, r.trace)
            worst_nabla = max(worst_nabla, triple_norm(nabla))
            worst_res = max(worst_res, verify_witness(T + nabla, r.triple, w))
    ok = mismatches == 0 and worst_nabla < eps and worst_res < 1e-8
    record(6, ok, f"200 runs, {mismatches} structure mismatches, max |nabla| {worst_nabla:.2e} "
                  f"(< 1e-6), max residual {worst_res:.2e} (< 1e-8)", t0)


def test_criterion_7_alpha_n_structure():
    t0 = time.perf_counter()
    failures, worst_res, min_gap = 0, 0.0, np.inf
    for m, n in [(4, 2), (2, 1)]:
        for k in range(20):
            T = random_triple(m, n, [7, m, n, k], FLOAT)
            r = reduce_alpha_n(T, 1e-6)
            N = np.array(r.N.array, dtype=complex)
            lam = np.diag(N[:n, :n])
            diag = np.array_equal(N[:n, :n], np.diag(lam))
            gaps = [abs(a - b) for i, a in enumerate(lam) for b in lam[i + 1:]]
            min_gap = min([min_gap] + gaps)
            ones = n == 1 or bool(np.all(N[0, n + 1:2 * n] == 1))
            blocks = r.triple == make_K(r.N, m, n, FLOAT)
            nabla, w = collapse_trace(T, r.trace)
            res = verify_witness(T + nabla, r.triple, w)
            worst_res = max(worst_res, res)
            failures += not (diag and all(g > 1e-8 for g in gaps) and ones and blocks
                             and res < 1e-8 and triple_norm(nabla) < 1e-6)
    record(7, failures == 0, f"40 runs, {failures} failures, min eigenvalue gap {min_gap:.2e}, "
                             f"max residual {worst_res:.2e}", t0)


def test_criterion_8_strict_equivalence_bridge():
    t0 = time.perf_counter()
    accepted, rejected = 0, 0
    rng = np.random.default_rng(8)
    for k in range(100):
        m, n = int(rng.integers(1, 5)), int(rng.integers(0, 5))
        T, w = random_triple(m, n, [8, k]), random_witness(m, n, [8, k, 1])
        S, R = build_strict(w)
        if strict_equiv_check(T, apply_feedback(T, w), S, R):
            accepted += witness_from_strict(S, R) == w
        a = R.array.copy()
        zero_slots = [(i, j) for i in range(n, n + 2 * m) for j in range(n + 2 * m)
                      if (i < n + m and not n <= j < n + m) or (i >= n + m and j < n + m)]
        for idx in rng.choice(len(zero_slots), size=min(len(zero_slots), int(rng.integers(1, 4))),
                              replace=False):
            i, j = zero_slots[idx]
            a[i, j] = a[i, j] + int(rng.integers(1, 6))
        try:
            witness_from_strict(S, Matrix.from_array(a))
        except PreconditionError:
            rejected += 1
    record(8, accepted == 100 and rejected == 100,
           f"100 cases, {accepted} strict equivalences verified, {rejected} off-pattern R rejected",
           t0)


def test_criterion_9_sweep_reproducible():
    t0 = time.perf_counter()
    first = run_sweep(6, 4, 10, 2024, jobs=1)
    second = run_sweep(6, 4, 10, 2024, jobs=1)
    threaded = run_sweep(6, 4, 10, 2024, jobs=4)
    a, b, c = (sweep_csv(x).encode() for x in (first, second, threaded))
    consistent = all(cell.consistent() for cell in first)
    record(9, a == b == c and consistent,
           f"{len(first)} cells; identical bytes across runs {a == b} and thread counts {a == c}; "
           f"all rows consistent {consistent}", t0)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))

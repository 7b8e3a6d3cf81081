"""Univariate polynomials over the Gaussian rationals.

A polynomial is a tuple of :class:`GaussRat` coefficients in ascending degree
with no trailing zeros; the zero polynomial is ``()``.

Used to decide similarity of the uncontrollable part of a pair: invariant
factors of ``xI - A`` come from a naive Smith-form elimination, and an
independent cyclic decomposition produces the rational canonical form together
with its transforming matrix.
"""
from __future__ import annotations

import random
from typing import Sequence

from .errors import InvariantViolation, PreconditionError
from .exactmat import (ONE, ZERO, GaussRat, Matrix, block_diag, column, hstack,
                       nullspace_basis, parse_gauss, format_gauss, solve, vstack)

Poly = tuple


def poly(coeffs: Sequence) -> Poly:
    c = [GaussRat.coerce(x) for x in coeffs]
    while c and not c[-1]:
        c.pop()
    return tuple(c)


def deg(p: Poly) -> int:
    return len(p) - 1


def padd(p: Poly, q: Poly) -> Poly:
    n = max(len(p), len(q))
    return poly([(p[i] if i < len(p) else ZERO) + (q[i] if i < len(q) else ZERO)
                 for i in range(n)])


def pneg(p: Poly) -> Poly:
    return tuple(-c for c in p)


def psub(p: Poly, q: Poly) -> Poly:
    return padd(p, pneg(q))


def pmul(p: Poly, q: Poly) -> Poly:
    if not p or not q:
        return ()
    out = [ZERO] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if not a:
            continue
        for j, b in enumerate(q):
            out[i + j] = out[i + j] + a * b
    return poly(out)


def pdivmod(p: Poly, q: Poly) -> tuple[Poly, Poly]:
    if not q:
        raise ZeroDivisionError("polynomial division by zero")
    r = list(p)
    dq = deg(q)
    lead = q[-1]
    quo = [ZERO] * max(len(p) - dq, 0)
    while len(r) - 1 >= dq and r:
        shift = len(r) - 1 - dq
        c = r[-1] / lead
        quo[shift] = c
        for i, b in enumerate(q):
            r[shift + i] = r[shift + i] - c * b
        r.pop()
        while r and not r[-1]:
            r.pop()
    return poly(quo), tuple(r)


def monic(p: Poly) -> Poly:
    if not p:
        return p
    lead = p[-1]
    return tuple(c / lead for c in p)


def pgcd(p: Poly, q: Poly) -> Poly:
    while q:
        p, q = q, pdivmod(p, q)[1]
    return monic(p)


def plcm(p: Poly, q: Poly) -> Poly:
    if not p or not q:
        return ()
    return monic(pdivmod(pmul(p, q), pgcd(p, q))[0])


def divides(p: Poly, q: Poly) -> bool:
    return not pdivmod(q, p)[1]


def format_poly(p: Poly) -> list[str]:
    return [format_gauss(c) for c in p]


def parse_poly(coeffs: Sequence[str]) -> Poly:
    return poly([parse_gauss(c) if isinstance(c, str) else c for c in coeffs])


def companion(p: Poly, field: str = "exact") -> Matrix:
    """Companion matrix with ones on the subdiagonal and the negated
    low-order coefficients in the last column; the companion of ``x^k`` is
    the nilpotent Jordan block ``J_k(0)``."""
    p = monic(p)
    d = deg(p)
    if d < 1:
        raise PreconditionError("companion matrices need degree >= 1")
    a = Matrix.zeros(d, d).array.copy()
    for i in range(1, d):
        a[i, i - 1] = ONE
    for i in range(d):
        a[i, d - 1] = -p[i]
    M = Matrix.from_array(a)
    return M if field == "exact" else M.to_float()


def invariant_factors(A: Matrix) -> list[Poly]:
    """Nonconstant invariant factors of ``xI - A``, ascending, each dividing the next.

    Smith form by Euclidean elimination over the polynomial ring; fine for the
    desk-scale sizes used here (up to about 12).
    """
    if not A.is_exact:
        raise PreconditionError("invariant factors need the exact field")
    k = A.rows
    M = [[poly([-A[i, j]] + ([ONE] if i == j else [])) for j in range(k)] for i in range(k)]
    diag: list[Poly] = []
    for t in range(k):
        while True:
            best = None
            for i in range(t, k):
                for j in range(t, k):
                    if M[i][j] and (best is None or deg(M[i][j]) < deg(M[best[0]][best[1]])):
                        best = (i, j)
            if best is None:
                raise InvariantViolation("xI - A became singular")
            i, j = best
            M[t], M[i] = M[i], M[t]
            for row in M:
                row[t], row[j] = row[j], row[t]
            piv = M[t][t]
            dirty = False
            for i in range(t + 1, k):
                if M[i][t]:
                    q, r = pdivmod(M[i][t], piv)
                    M[i] = [psub(a, pmul(q, b)) for a, b in zip(M[i], M[t])]
                    dirty = dirty or bool(r)
            for j in range(t + 1, k):
                if M[t][j]:
                    q, r = pdivmod(M[t][j], piv)
                    for row in M:
                        row[j] = psub(row[j], pmul(q, row[t]))
                    dirty = dirty or bool(r)
            if dirty:
                continue
            bad = next(((i, j) for i in range(t + 1, k) for j in range(t + 1, k)
                        if M[i][j] and not divides(piv, M[i][j])), None)
            if bad is None:
                break
            M[t] = [padd(a, b) for a, b in zip(M[t], M[bad[0]])]
        diag.append(monic(M[t][t]))
    return [d for d in diag if deg(d) > 0]


def _local_minpoly(A: Matrix, v: Matrix) -> tuple[Poly, list[Matrix]]:
    """Minimal polynomial of ``v`` under ``A`` and its Krylov vectors."""
    krylov = [v]
    while True:
        w = A @ krylov[-1]
        K = hstack(krylov)
        c = solve(K, w)
        if c is not None:
            coeffs = [-c[i, 0] for i in range(len(krylov))] + [ONE]
            return poly(coeffs), krylov
        krylov.append(w)


def minimal_polynomial(A: Matrix) -> Poly:
    k = A.rows
    mp: Poly = (ONE,)
    for i in range(k):
        e = column([ONE if j == i else ZERO for j in range(k)])
        mp = plcm(mp, _local_minpoly(A, e)[0])
    return mp


def _maximal_vector(A: Matrix, target_deg: int) -> tuple[Poly, list[Matrix]]:
    k = A.rows
    for i in range(k):
        e = column([ONE if j == i else ZERO for j in range(k)])
        p, kr = _local_minpoly(A, e)
        if deg(p) == target_deg:
            return p, kr
    rng = random.Random(k * 7919 + target_deg)
    spread = 3
    for attempt in range(10_000):
        v = column([rng.randint(-spread, spread) for _ in range(k)])
        if v.is_zero():
            continue
        p, kr = _local_minpoly(A, v)
        if deg(p) == target_deg:
            return p, kr
        if attempt % 20 == 19:
            spread *= 2
    raise InvariantViolation("no vector attains the minimal polynomial")


def frobenius_decomposition(A: Matrix) -> tuple[Matrix, list[Poly]]:
    """Return ``(T, factors)`` with ``T^{-1} A T`` equal to the direct sum of
    companion matrices of ``factors`` (ascending divisibility chain, same order).

    Cyclic decomposition: a vector whose local minimal polynomial is the
    minimal polynomial spans a cyclic subspace; the annihilator of the dual
    cyclic subspace of a matching functional is an invariant complement.
    """
    if not A.is_exact:
        raise PreconditionError("rational canonical form needs the exact field")
    k = A.rows
    if k == 0:
        return Matrix.identity(0), []
    mp = minimal_polynomial(A)
    d = deg(mp)
    p, krylov = _maximal_vector(A, d)
    K = hstack(krylov)
    blocks = []
    if d < k:
        e_last = column([ONE if j == d - 1 else ZERO for j in range(d)])
        f = solve(K.T, e_last)
        if f is None:
            raise InvariantViolation("Krylov basis is rank deficient")
        funcs = [f.T]
        for _ in range(d - 1):
            funcs.append(funcs[-1] @ A)
        W = hstack(nullspace_basis(vstack(funcs)))
        T0 = hstack([K, W])
        A_W = (T0.inv() @ A @ T0)[d:, d:]
        T_W, rest = frobenius_decomposition(A_W)
        sub = W @ T_W
        offset = 0
        for q in rest:
            blocks.append((q, sub[:, offset:offset + deg(q)]))
            offset += deg(q)
    blocks.append((p, K))
    T = hstack([b for _, b in blocks])
    factors = [q for q, _ in blocks]
    if T.inv() @ A @ T != block_diag(*[companion(q) for q in factors], field="exact"):
        raise InvariantViolation("cyclic decomposition does not reproduce A")
    return T, factors

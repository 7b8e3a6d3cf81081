"""Matrix pairs ``(B, A)`` of size m x (n, m) under feedback similarity.

A witness ``(S, P, U)`` acts by ``[B' A'] = S^{-1} [B A] [[P, U], [0, S]]``,
i.e. ``B' = S^{-1} B P`` and ``A' = S^{-1} (A S + B U)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import FieldError, InvariantViolation, PreconditionError, ShapeError
from .exactmat import (EXACT, FLOAT, ONE, ZERO, Matrix, _rref, block, block_diag,
                       exact_rank, hstack, make_F, make_G, make_jordan,
                       nullspace_basis, permutation_matrix, vstack)
from .polynomials import (Poly, companion, deg, divides, format_poly,
                          frobenius_decomposition, invariant_factors, monic)


@dataclass(frozen=True)
class MatrixPair:
    B: Matrix
    A: Matrix

    def __post_init__(self):
        if self.B.field != self.A.field:
            raise FieldError("B and A must share a field")
        if self.A.rows != self.A.cols:
            raise ShapeError("A must be square")
        if self.B.rows != self.A.rows:
            raise ShapeError("B and A need the same number of rows")

    @property
    def m(self) -> int:
        return self.A.rows

    @property
    def n(self) -> int:
        return self.B.cols

    @property
    def field(self) -> str:
        return self.A.field

    def block(self) -> Matrix:
        return hstack([self.B, self.A], rows=self.m)

    def to_float(self) -> "MatrixPair":
        return MatrixPair(self.B.to_float(), self.A.to_float())


@dataclass(frozen=True)
class PairWitness:
    S: Matrix
    P: Matrix
    U: Matrix

    def __post_init__(self):
        m, n = self.S.rows, self.P.rows
        if self.S.shape != (m, m) or self.P.shape != (n, n) or self.U.shape != (n, m):
            raise ShapeError("pair witness needs S m x m, P n x n, U n x m")

    @property
    def m(self) -> int:
        return self.S.rows

    @property
    def n(self) -> int:
        return self.P.rows

    @property
    def field(self) -> str:
        return self.S.field

    @classmethod
    def identity(cls, m: int, n: int, field: str = EXACT) -> "PairWitness":
        return cls(Matrix.identity(m, field), Matrix.identity(n, field), Matrix.zeros(n, m, field))

    def R(self) -> Matrix:
        """The right factor ``[[P, U], [0, S]]``."""
        return block([[self.P, self.U], [Matrix.zeros(self.m, self.n, self.field), self.S]])

    def then(self, other: "PairWitness") -> "PairWitness":
        """Witness of applying ``self`` and then ``other``."""
        return PairWitness(self.S @ other.S, self.P @ other.P,
                           self.P @ other.U + self.U @ other.S)

    def inverse(self) -> "PairWitness":
        Si, Pi = self.S.inv(), self.P.inv()
        return PairWitness(Si, Pi, -(Pi @ self.U @ Si))


def alpha_beta(m: int, n: int) -> tuple[int, int]:
    """``m = alpha*n + beta`` with ``0 < beta <= n`` (so ``beta = n`` when n divides m)."""
    if m < 1 or n < 1:
        raise PreconditionError("alpha_beta needs m >= 1 and n >= 1")
    alpha, beta = divmod(m, n)
    if beta == 0:
        alpha, beta = alpha - 1, n
    return alpha, beta


def apply_pair_feedback(p: MatrixPair, w: PairWitness) -> MatrixPair:
    if (w.m, w.n) != (p.m, p.n):
        raise ShapeError(f"witness for {(w.m, w.n)} applied to pair of size {(p.m, p.n)}")
    if w.field != p.field:
        raise FieldError("pair and witness fields differ")
    Si = w.S.inv()
    w.P.inv()
    return MatrixPair(Si @ p.B @ w.P, Si @ (p.A @ w.S + p.B @ w.U))


# -- Brunovsky decomposition -------------------------------------------------

@dataclass(frozen=True)
class BrunovskyInvariants:
    """Controllability indices (descending), number of zero input columns and
    the invariant factors (ascending chain) of the uncontrollable part."""

    ctrl_indices: tuple[int, ...]
    zero_cols: int
    invariant_factors: tuple[Poly, ...]

    def __post_init__(self):
        object.__setattr__(self, "ctrl_indices", tuple(sorted(self.ctrl_indices, reverse=True)))
        object.__setattr__(self, "invariant_factors", tuple(tuple(f) for f in self.invariant_factors))

    @property
    def m(self) -> int:
        return sum(self.ctrl_indices) + sum(deg(f) for f in self.invariant_factors)

    @property
    def n(self) -> int:
        return len(self.ctrl_indices) + self.zero_cols

    def validate(self) -> None:
        if any(k < 1 for k in self.ctrl_indices) or self.zero_cols < 0:
            raise PreconditionError("indices must be positive and zero_cols nonnegative")
        for f in self.invariant_factors:
            if deg(f) < 1 or f != monic(f):
                raise PreconditionError("invariant factors must be monic and nonconstant")
        for f, g in zip(self.invariant_factors, self.invariant_factors[1:]):
            if not divides(f, g):
                raise PreconditionError("invariant factors must form a divisibility chain")

    def as_dict(self) -> dict:
        return {"ctrl_indices": list(self.ctrl_indices), "zero_cols": self.zero_cols,
                "invariant_factors": [format_poly(f) for f in self.invariant_factors]}


def brunovsky_assemble(inv: BrunovskyInvariants) -> MatrixPair:
    """Canonical pair: controllable blocks by descending index, then companion
    blocks of the invariant factors, then the zero input columns."""
    inv.validate()
    m, n = inv.m, inv.n
    A = block_diag(*[make_jordan(k, 0) for k in inv.ctrl_indices],
                   *[companion(f) for f in inv.invariant_factors], field=EXACT)
    B = Matrix.zeros(m, n).array.copy()
    start = 0
    for j, k in enumerate(inv.ctrl_indices):
        B[start, j] = ONE
        start += k
    return MatrixPair(Matrix.from_array(B), A)


def _require_exact(p: MatrixPair):
    if p.field != EXACT:
        raise FieldError("the decision procedure is exact-only; convert the input to exact")


def _column_echelon_witness(B: Matrix) -> tuple[int, Matrix, Matrix]:
    """Return ``(r, S0, P0)`` with ``S0^{-1} B P0 = [[I_r, 0], [0, 0]]``."""
    m, n = B.shape
    rows = [list(B.array[i]) + [ONE if j == i else ZERO for j in range(m)] for i in range(m)]
    pivots = _rref(rows, ncols=n)
    r = len(pivots)
    E = Matrix.from_array(np.array([row[n:] for row in rows], dtype=object).reshape(m, m))
    R = Matrix.from_array(np.array([row[:n] for row in rows], dtype=object).reshape(m, n))
    order = pivots + [j for j in range(n) if j not in pivots]
    Q = permutation_matrix(order)
    X = (R @ Q)[:r, r:]
    clear = block([[Matrix.identity(r), -X],
                   [Matrix.zeros(n - r, r), Matrix.identity(n - r)]])
    return r, E.inv(), Q @ clear


def _decompose(p: MatrixPair, want_witness: bool):
    m, n = p.m, p.n
    if p.B.is_zero():
        factors = invariant_factors(p.A)
        inv = BrunovskyInvariants((), n, tuple(factors))
        if not want_witness:
            return inv, None
        T, cyc = frobenius_decomposition(p.A)
        if list(cyc) != list(factors):
            raise InvariantViolation("Smith form and cyclic decomposition disagree")
        return inv, PairWitness(T, Matrix.identity(n), Matrix.zeros(n, m))

    r, S0, P0 = _column_echelon_witness(p.B)
    A1 = S0.inv() @ p.A @ S0
    U1 = vstack([-A1[:r, :], Matrix.zeros(n - r, m)], cols=m)
    w1 = PairWitness(S0, P0, P0 @ U1)
    A2 = A1 + vstack([-A1[:r, :], Matrix.zeros(m - r, m)], cols=m)
    sub = MatrixPair(A2[r:, :r], A2[r:, r:])
    inv_sub, w_sub = _decompose(sub, want_witness)

    c = len(inv_sub.ctrl_indices)
    inv = BrunovskyInvariants(tuple(k + 1 for k in inv_sub.ctrl_indices) + (1,) * (r - c),
                              n - r, inv_sub.invariant_factors)
    if not want_witness:
        return inv, None

    canon_sub = brunovsky_assemble(inv_sub)
    Ms, Ns = canon_sub.B, canon_sub.A
    Sp, Pp, Up = w_sub.S, w_sub.P, w_sub.U
    mr = m - r
    w2 = PairWitness(
        block([[Pp, Up], [Matrix.zeros(mr, r), Sp]]),
        block_diag(Pp, Matrix.identity(n - r), field=EXACT),
        vstack([hstack([Up @ Ms, Up @ Ns], rows=r), Matrix.zeros(n - r, m)], cols=m),
    )
    perm: list[int] = []
    offset = 0
    for j, k in enumerate(inv_sub.ctrl_indices):
        perm.append(j)
        perm.extend(r + offset + i for i in range(k))
        offset += k
    perm.extend(range(c, r))
    perm.extend(r + offset + i for i in range(mr - offset))
    w3 = PairWitness(permutation_matrix(perm), Matrix.identity(n), Matrix.zeros(n, m))
    return inv, w1.then(w2).then(w3)


def brunovsky_decompose(p: MatrixPair) -> tuple[BrunovskyInvariants, PairWitness]:
    """Invariants of the canonical direct-sum decomposition and a witness
    carrying ``p`` exactly onto :func:`brunovsky_assemble` of them.

    Recursive: split off the zero input columns, normalize ``B`` to
    ``[I_r; 0]``, clear the top strip of ``A`` with feedback, and recurse on the
    remaining subpair; each controllability index of the subpair grows by one
    and every zero column of the subpair becomes an index-1 block.
    """
    _require_exact(p)
    inv, w = _decompose(p, want_witness=True)
    if apply_pair_feedback(p, w) != brunovsky_assemble(inv):
        raise InvariantViolation("Brunovsky witness does not reach the canonical pair")
    return inv, w


def brunovsky_invariants(p: MatrixPair) -> BrunovskyInvariants:
    _require_exact(p)
    return _decompose(p, want_witness=False)[0]


def pairs_feedback_similar(p1: MatrixPair, p2: MatrixPair) -> bool:
    if (p1.m, p1.n) != (p2.m, p2.n):
        raise ShapeError("pairs of different sizes are never compared")
    return brunovsky_invariants(p1) == brunovsky_invariants(p2)


def controllability_matrix(p: MatrixPair) -> Matrix:
    """``[B, AB, ..., A^{m-1} B]``."""
    blocks, cur = [], p.B
    for _ in range(max(p.m, 1)):
        blocks.append(cur)
        cur = p.A @ cur
    return hstack(blocks, rows=p.m)


# -- generic canonical pairs ---------------------------------------------------

def make_H_block(m: int, n: int, field: str = EXACT) -> Matrix:
    """The (m-n) x m block ``[[I_{(alpha-1)n}, 0, 0], [0, G_{beta,n}, 0_beta]]``."""
    if not m > n >= 1:
        raise PreconditionError("make_H_block needs m > n >= 1")
    alpha, beta = alpha_beta(m, n)
    top = (alpha - 1) * n
    return block([
        [Matrix.identity(top, field), Matrix.zeros(top, n, field), Matrix.zeros(top, beta, field)],
        [Matrix.zeros(beta, top, field), make_G(beta, n, field), Matrix.zeros(beta, beta, field)],
    ])


def _check_n(n: int):
    if n < 1:
        raise PreconditionError("n = 0 has no generic canonical pair (spectral case not supported)")


def canonical_pair_F(m: int, n: int, field: str = EXACT) -> MatrixPair:
    _check_n(n)
    if m <= n:
        return MatrixPair(make_F(m, n, field), Matrix.zeros(m, m, field))
    return MatrixPair(vstack([Matrix.identity(n, field), Matrix.zeros(m - n, n, field)]),
                      vstack([Matrix.zeros(n, m, field), make_F(m - n, m, field)]))


def canonical_pair_H(m: int, n: int, field: str = EXACT) -> MatrixPair:
    _check_n(n)
    if m <= n:
        return MatrixPair(make_G(m, n, field), Matrix.zeros(m, m, field))
    return MatrixPair(vstack([Matrix.identity(n, field), Matrix.zeros(m - n, n, field)]),
                      vstack([Matrix.zeros(n, m, field), make_H_block(m, n, field)]))


def make_R_gamma(gamma: int, S1: Matrix, S2: Matrix, S3: Matrix, S4: Matrix) -> Matrix:
    """Upper block-triangular matrix with ``gamma`` diagonal ``S3`` blocks.

    The first ``gamma - 1`` diagonal blocks are ``[[S1, S2], [0, S3]]`` (size n),
    the coupling between consecutive ones is ``[[0, S4], [0, 0]]``, the coupling
    into the last ``S3`` is ``[[S4], [0]]``.  Size ``(gamma-1)*n + beta``.
    """
    if gamma < 1:
        raise PreconditionError("gamma must be >= 1")
    k, beta = S1.rows, S3.rows
    if (S1.shape != (k, k) or S3.shape != (beta, beta)
            or S2.shape != (k, beta) or S4.shape != (k, beta)):
        raise ShapeError("R_gamma needs S1 (n-b)x(n-b), S3 bxb, S2 and S4 (n-b)xb")
    field = S3.field
    n = k + beta
    size = (gamma - 1) * n + beta
    a = Matrix.zeros(size, size, field).array.copy()
    diag = block([[S1, S2], [Matrix.zeros(beta, k, field), S3]])
    for i in range(gamma - 1):
        o = i * n
        a[o:o + n, o:o + n] = diag.array
        if i + 1 < gamma - 1:
            a[o:o + k, o + n + k:o + 2 * n] = S4.array
        else:
            a[o:o + k, o + n:o + n + beta] = S4.array
    o = (gamma - 1) * n
    a[o:, o:] = S3.array
    return Matrix._wrap(a, field)


def endomorphism_params_shapes(m: int, n: int) -> tuple[tuple[int, int], ...]:
    _, beta = alpha_beta(m, n)
    k = n - beta
    return (k, k), (k, beta), (beta, beta), (k, beta)


def endomorphism_from_params(m: int, n: int, S1: Matrix, S2: Matrix, S3: Matrix,
                             S4: Matrix) -> PairWitness:
    """Endomorphism ``(S, P, U)`` of ``canonical_pair_H(m, n)`` read off from
    ``[[P, U], [0, S]] = R_{alpha+2}`` and ``S = R_{alpha+1}``."""
    alpha, beta = alpha_beta(m, n)
    if tuple(M.shape for M in (S1, S2, S3, S4)) != endomorphism_params_shapes(m, n):
        raise ShapeError("parameter block sizes do not match alpha_beta(m, n)")
    R = make_R_gamma(alpha + 2, S1, S2, S3, S4)
    w = PairWitness(R[n:, n:], R[:n, :n], R[:n, n:])
    if w.S != make_R_gamma(alpha + 1, S1, S2, S3, S4):
        raise InvariantViolation("R_{alpha+2} does not contain R_{alpha+1}")
    return w


def endomorphism_basis(m: int, n: int, field: str = EXACT) -> list[PairWitness]:
    """Endomorphisms from the unit parameter matrices (n^2 of them)."""
    shapes = endomorphism_params_shapes(m, n)
    out = []
    for which, (r, c) in enumerate(shapes):
        for i in range(r):
            for j in range(c):
                params = [Matrix.zeros(*s, field) for s in shapes]
                a = params[which].array.copy()
                a[i, j] = ONE if field == EXACT else 1.0
                params[which] = Matrix._wrap(a, field)
                out.append(endomorphism_from_params(m, n, *params))
    return out


def vec_endomorphism(w: PairWitness) -> list:
    """Unknown ordering of the stabilizer system: P, U, S (each row-major)."""
    return list(w.P.array.flat) + list(w.U.array.flat) + list(w.S.array.flat)


def pair_stabilizer_system(p: MatrixPair) -> Matrix:
    """Linear system whose kernel is ``{(P, U, S): [B A][[P, U], [0, S]] = S [B A]}``.

    Rows: ``BP - SB`` (m x n) then ``BU + AS - SA`` (m x m), row-major.
    Columns: ``P`` (n x n), ``U`` (n x m), ``S`` (m x m), row-major.
    """
    m, n = p.m, p.n
    B, A = p.B.array, p.A.array
    field = p.field
    nP, nU = n * n, n * m
    out = Matrix.zeros(m * n + m * m, nP + nU + m * m, field).array.copy()

    def iP(k, j):
        return k * n + j

    def iU(k, j):
        return nP + k * m + j

    def iS(i, k):
        return nP + nU + i * m + k

    for i in range(m):
        for j in range(n):
            row = i * n + j
            for k in range(n):
                out[row, iP(k, j)] += B[i, k]
            for k in range(m):
                out[row, iS(i, k)] -= B[k, j]
    for i in range(m):
        for j in range(m):
            row = m * n + i * m + j
            for k in range(n):
                out[row, iU(k, j)] += B[i, k]
            for k in range(m):
                out[row, iS(k, j)] += A[i, k]
                out[row, iS(i, k)] -= A[k, j]
    return Matrix._wrap(out, field)


def pair_stabilizer_dimension(p: MatrixPair) -> int:
    _require_exact(p)
    return len(nullspace_basis(pair_stabilizer_system(p)))


# -- random sampling --------------------------------------------------------------

def random_matrix(rows: int, cols: int, rng: np.random.Generator, field: str,
                  low: int = -5, high: int = 5) -> Matrix:
    if field == EXACT:
        ints = rng.integers(low, high + 1, size=(rows, cols))
        return Matrix.from_array(ints.astype(object))
    if field != FLOAT:
        raise FieldError(f"unknown field {field!r}")
    z = (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)
    return Matrix._wrap(z, FLOAT)


def random_invertible(n: int, rng: np.random.Generator, field: str) -> Matrix:
    while True:
        M = random_matrix(n, n, rng, field, -3, 3)
        if field == EXACT:
            if exact_rank(M) == n:
                return M
        elif n == 0 or np.linalg.cond(M.array) < 1e6:
            return M


def random_pair(m: int, n: int, seed, field: str = EXACT, low: int = -5, high: int = 5) -> MatrixPair:
    rng = np.random.default_rng(seed)
    return MatrixPair(random_matrix(m, n, rng, field, low, high),
                      random_matrix(m, m, rng, field, low, high))


def random_pair_witness(m: int, n: int, seed, field: str = EXACT) -> PairWitness:
    rng = np.random.default_rng(seed)
    return PairWitness(random_invertible(m, rng, field), random_invertible(n, rng, field),
                       random_matrix(n, m, rng, field, -3, 3))


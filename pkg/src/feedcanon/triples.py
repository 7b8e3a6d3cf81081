"""Triples ``(C, B, A)`` of size m x (n, m, m) under feedback similarity.

A witness ``(S, P, U, V)`` acts by ``[C' B' A'] = S^{-1} [C B A] R`` with
``R = [[P, V, U], [0, S, 0], [0, 0, S]]``, i.e.

    C' = S^{-1} C P,   B' = S^{-1} (B S + C V),   A' = S^{-1} (A S + C U).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FieldError, PreconditionError, ShapeError
from .exactmat import (EXACT, FLOAT, Matrix, block, frobenius_norm, hstack, make_F,
                       make_G, vstack)
from .pairs import (alpha_beta, make_H_block, make_R_gamma, random_invertible,
                    random_matrix)


@dataclass(frozen=True)
class MatrixTriple:
    C: Matrix
    B: Matrix
    A: Matrix

    def __post_init__(self):
        if not self.C.field == self.B.field == self.A.field:
            raise FieldError("C, B, A must share a field")
        m = self.C.rows
        if self.B.shape != (m, m) or self.A.shape != (m, m):
            raise ShapeError("a triple needs C m x n and square B, A of size m")

    @property
    def m(self) -> int:
        return self.C.rows

    @property
    def n(self) -> int:
        return self.C.cols

    @property
    def field(self) -> str:
        return self.C.field

    @classmethod
    def zeros(cls, m: int, n: int, field: str = EXACT) -> "MatrixTriple":
        return cls(Matrix.zeros(m, n, field), Matrix.zeros(m, m, field), Matrix.zeros(m, m, field))

    @classmethod
    def from_block(cls, M: Matrix, n: int) -> "MatrixTriple":
        m = M.rows
        if M.cols != n + 2 * m:
            raise ShapeError(f"block of width {M.cols} is not [C B A] for m={m}, n={n}")
        return cls(M[:, :n], M[:, n:n + m], M[:, n + m:])

    def block(self) -> Matrix:
        """``[C B A]``."""
        return hstack([self.C, self.B, self.A], rows=self.m)

    def to_float(self) -> "MatrixTriple":
        return MatrixTriple(self.C.to_float(), self.B.to_float(), self.A.to_float())

    def __add__(self, other: "MatrixTriple") -> "MatrixTriple":
        return MatrixTriple(self.C + other.C, self.B + other.B, self.A + other.A)

    def __sub__(self, other: "MatrixTriple") -> "MatrixTriple":
        return MatrixTriple(self.C - other.C, self.B - other.B, self.A - other.A)


@dataclass(frozen=True)
class FeedbackWitness:
    S: Matrix
    P: Matrix
    U: Matrix
    V: Matrix

    def __post_init__(self):
        m, n = self.S.rows, self.P.rows
        if (self.S.shape != (m, m) or self.P.shape != (n, n)
                or self.U.shape != (n, m) or self.V.shape != (n, m)):
            raise ShapeError("witness needs S m x m, P n x n, U and V n x m")

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
    def identity(cls, m: int, n: int, field: str = EXACT) -> "FeedbackWitness":
        z = Matrix.zeros(n, m, field)
        return cls(Matrix.identity(m, field), Matrix.identity(n, field), z, z)

    def R(self) -> Matrix:
        """The right factor ``[[P, V, U], [0, S, 0], [0, 0, S]]``."""
        m, n, f = self.m, self.n, self.field
        z = Matrix.zeros(m, m, f)
        zc = Matrix.zeros(m, n, f)
        return block([[self.P, self.V, self.U], [zc, self.S, z], [zc, z, self.S]])

    def then(self, other: "FeedbackWitness") -> "FeedbackWitness":
        """Witness of applying ``self`` and then ``other``."""
        return FeedbackWitness(self.S @ other.S, self.P @ other.P,
                               self.P @ other.U + self.U @ other.S,
                               self.P @ other.V + self.V @ other.S)

    def inverse(self) -> "FeedbackWitness":
        Si, Pi = self.S.inv(), self.P.inv()
        return FeedbackWitness(Si, Pi, -(Pi @ self.U @ Si), -(Pi @ self.V @ Si))

    def R_inverse(self) -> Matrix:
        return self.inverse().R()

    def to_float(self) -> "FeedbackWitness":
        return FeedbackWitness(self.S.to_float(), self.P.to_float(),
                               self.U.to_float(), self.V.to_float())


def apply_feedback(T: MatrixTriple, w: FeedbackWitness) -> MatrixTriple:
    if (w.m, w.n) != (T.m, T.n):
        raise ShapeError(f"witness for {(w.m, w.n)} applied to triple of size {(T.m, T.n)}")
    if w.field != T.field:
        raise FieldError("triple and witness fields differ")
    Si = w.S.inv()
    w.P.inv()
    return MatrixTriple(Si @ T.C @ w.P, Si @ (T.B @ w.S + T.C @ w.V),
                        Si @ (T.A @ w.S + T.C @ w.U))


def verify_witness(T: MatrixTriple, T2: MatrixTriple, w: FeedbackWitness) -> float:
    """Relative residual ``|S [T2] - [T] R| / (|S||T2| + |T||R|)`` (Frobenius).

    Exactly ``0.0`` for exact inputs satisfying the identity.
    """
    if (T.m, T.n) != (T2.m, T2.n) or (w.m, w.n) != (T.m, T.n):
        raise ShapeError("triples and witness must share (m, n)")
    if not T.field == T2.field == w.field:
        raise FieldError("verify_witness needs a common field")
    R = w.R()
    diff = w.S @ T2.block() - T.block() @ R
    if diff.is_zero():
        return 0.0
    scale = (frobenius_norm(w.S) * frobenius_norm(T2.block())
             + frobenius_norm(T.block()) * frobenius_norm(R))
    return frobenius_norm(diff) / scale if scale > 0 else float("inf")


# Convenience constructors mirroring the three elementary kinds of transformation.

def basis_change(S: Matrix, n: int) -> FeedbackWitness:
    """Simultaneous row transformation of C, B, A with the inverse column
    transformation on B and A."""
    m, f = S.rows, S.field
    z = Matrix.zeros(n, m, f)
    return FeedbackWitness(S, Matrix.identity(n, f), z, z)


def input_change(P: Matrix, m: int) -> FeedbackWitness:
    """Column transformation of C."""
    n, f = P.rows, P.field
    z = Matrix.zeros(n, m, f)
    return FeedbackWitness(Matrix.identity(m, f), P, z, z)


def column_feedback(m: int, n: int, U: Matrix | None = None, V: Matrix | None = None,
                    field: str = EXACT) -> FeedbackWitness:
    """Add combinations of columns of C to columns of A (via U) and B (via V)."""
    z = Matrix.zeros(n, m, field)
    return FeedbackWitness(Matrix.identity(m, field), Matrix.identity(n, field),
                           z if U is None else U, z if V is None else V)


# -- K(N) form -------------------------------------------------------------------

def make_K(N: Matrix | None, m: int, n: int, field: str | None = None) -> MatrixTriple:
    """``([I_n; 0], [0; H_{m-n,m}], [0; N])`` for m > n, ``(G_mn, 0, 0)`` for m <= n."""
    if n < 1 or m < 0:
        raise PreconditionError("make_K needs n >= 1")
    f = field or (N.field if N is not None else EXACT)
    if m <= n:
        return MatrixTriple(make_G(m, n, f), Matrix.zeros(m, m, f), Matrix.zeros(m, m, f))
    if N is None or N.shape != (m - n, m):
        raise ShapeError(f"N must be {(m - n, m)} for m={m}, n={n}")
    C = vstack([Matrix.identity(n, f), Matrix.zeros(m - n, n, f)])
    B = vstack([Matrix.zeros(n, m, f), make_H_block(m, n, f)])
    A = vstack([Matrix.zeros(n, m, f), N])
    return MatrixTriple(C, B, A)


def K_transform(N: Matrix, S1: Matrix, S2: Matrix, S3: Matrix, S4: Matrix) -> Matrix:
    """``R_alpha^{-1} N R_{alpha+1}`` for the parameters' block sizes."""
    m = N.cols
    n = m - N.rows
    alpha, _ = _k_sizes(N, S1, S3)
    Ra = make_R_gamma(alpha, S1, S2, S3, S4)
    Rb = make_R_gamma(alpha + 1, S1, S2, S3, S4)
    if Ra.rows != m - n or Rb.rows != m:
        raise ShapeError("parameter sizes do not match N")
    return Ra.inv() @ N @ Rb


def _k_sizes(N: Matrix, S1: Matrix, S3: Matrix) -> tuple[int, int]:
    m = N.cols
    n = m - N.rows
    if not m > n >= 1:
        raise ShapeError("N must be (m-n) x m with m > n >= 1")
    alpha, beta = alpha_beta(m, n)
    if S3.shape != (beta, beta) or S1.shape != (n - beta, n - beta):
        raise ShapeError(f"S1 must be {n - beta}x{n - beta} and S3 {beta}x{beta}")
    return alpha, beta


def K_lifted_witness(N2: Matrix, S1: Matrix, S2: Matrix, S3: Matrix,
                     S4: Matrix) -> FeedbackWitness:
    """Witness carrying ``make_K(N)`` to ``make_K(N2)`` when ``N2 = K_transform(N, ...)``.

    ``S = R_{alpha+1}``, ``P`` its leading n x n block, and with ``X`` the
    n x (m-n) block right of ``P``: ``U = X N2``, ``V = X H``.
    """
    m = N2.cols
    n = m - N2.rows
    alpha, _ = _k_sizes(N2, S1, S3)
    S = make_R_gamma(alpha + 1, S1, S2, S3, S4)
    X = S[:n, n:]
    return FeedbackWitness(S, S[:n, :n], X @ N2, X @ make_H_block(m, n, S.field))


def K_similar(N: Matrix, N2: Matrix, S1: Matrix, S2: Matrix, S3: Matrix, S4: Matrix,
              tol: float = 1e-9) -> bool:
    """Whether ``N2 = R_alpha^{-1} N R_{alpha+1}`` (exactly, or to relative ``tol`` for float)."""
    if N.shape != N2.shape:
        raise ShapeError("N and N2 differ in size")
    _k_sizes(N, S1, S3)
    S1.inv()
    S3.inv()
    target = K_transform(N, S1, S2, S3, S4)
    if N.is_exact:
        return target == N2
    scale = max(frobenius_norm(target), frobenius_norm(N2), 1.0)
    return frobenius_norm(target - N2) <= tol * scale


# -- lifting and rigidity --------------------------------------------------------

def lift_L(T: MatrixTriple) -> MatrixTriple:
    """The (2p+q) x (p+q, 2p+q, 2p+q) triple
    ``([I_{p+q}; 0], [[0], [0_{pq}, I_p, 0_p]], [[0], [C B A]])``."""
    p, q, f = T.m, T.n, T.field
    size, width = 2 * p + q, p + q
    C = vstack([Matrix.identity(width, f), Matrix.zeros(p, width, f)])
    B = vstack([Matrix.zeros(width, size, f),
                hstack([Matrix.zeros(p, q, f), Matrix.identity(p, f), Matrix.zeros(p, p, f)],
                       rows=p)])
    A = vstack([Matrix.zeros(width, size, f), T.block()])
    return MatrixTriple(C, B, A)


def lift_L_iterated(T: MatrixTriple, times: int) -> MatrixTriple:
    if times < 0:
        raise PreconditionError("iteration count must be nonnegative")
    for _ in range(times):
        T = lift_L(T)
    return T


def rigid_margin(m: int, n: int) -> int:
    return m * m - m * n - n * n


def rigid_exists(m: int, n: int) -> bool:
    """``m < n (1 + sqrt 5) / 2``, decided by the sign of ``m^2 - mn - n^2``."""
    if m < 1 or n < 1:
        raise PreconditionError("rigid_exists needs m >= 1 and n >= 1")
    return rigid_margin(m, n) < 0


def no_rigid_message(m: int, n: int) -> str:
    return (f"no rigid triple exists for (m, n) = ({m}, {n}): m exceeds n(1+sqrt5)/2 "
            f"(m^2 - mn - n^2 = {rigid_margin(m, n)} > 0), so every triple of this size "
            f"has a lower-dimensional orbit")


def rigid_levels(m: int, n: int) -> list[tuple[int, int]]:
    """Size sequence ``(m, n) -> (m-n, 2n-m) -> ...`` ending at the first m <= n."""
    if not rigid_exists(m, n):
        raise PreconditionError(no_rigid_message(m, n))
    seq = [(m, n)]
    while m > n:
        m, n = m - n, 2 * n - m
        seq.append((m, n))
    return seq


@dataclass(frozen=True)
class RigidForm:
    """``lift_L_iterated((F_pq, 0, 0), l)`` together with its parameters."""

    triple: MatrixTriple
    p: int
    q: int
    l: int
    levels: tuple[tuple[int, int], ...]


def rigid_form(m: int, n: int, field: str = EXACT) -> RigidForm:
    levels = rigid_levels(m, n)
    p, q = levels[-1]
    base = MatrixTriple(make_F(p, q, field), Matrix.zeros(p, p, field), Matrix.zeros(p, p, field))
    T = lift_L_iterated(base, len(levels) - 1)
    if (T.m, T.n) != (m, n):
        raise ShapeError("lifted size does not match the request")
    return RigidForm(T, p, q, len(levels) - 1, tuple(levels))


def rigid_canonical(m: int, n: int, field: str = EXACT) -> MatrixTriple:
    return rigid_form(m, n, field).triple


# -- strict equivalence of T(x, y) = [C, xI + B, yI + A] ----------------------------

@dataclass(frozen=True)
class PolyMatrix:
    """``[C, xI_m + B, yI_m + A]`` stored as its constant part plus the column
    offsets where ``xI_m`` and ``yI_m`` enter."""

    constant: Matrix
    m: int
    n: int

    @property
    def x_offset(self) -> int:
        return self.n

    @property
    def y_offset(self) -> int:
        return self.n + self.m

    def coefficient(self, which: str) -> Matrix:
        """Coefficient matrix of ``x`` or ``y`` (``[0 I 0]`` or ``[0 0 I]``)."""
        off = {"x": self.x_offset, "y": self.y_offset}[which]
        a = Matrix.zeros(self.m, self.n + 2 * self.m, self.constant.field).array.copy()
        ident = Matrix.identity(self.m, self.constant.field).array
        a[:, off:off + self.m] = ident
        return Matrix._wrap(a, self.constant.field)

    def evaluate(self, x=0, y=0) -> Matrix:
        return self.constant + self.coefficient("x").scale(x) + self.coefficient("y").scale(y)


def poly_matrix(T: MatrixTriple) -> PolyMatrix:
    return PolyMatrix(T.block(), T.m, T.n)


def build_strict(w: FeedbackWitness) -> tuple[Matrix, Matrix]:
    return w.S, w.R()


def _close(X: Matrix, Y: Matrix, tol: float | None) -> bool:
    if X.is_exact and tol is None:
        return X == Y
    Xf, Yf = X.to_float(), Y.to_float()
    scale = max(frobenius_norm(Xf), frobenius_norm(Yf), 1.0)
    return frobenius_norm(Xf - Yf) <= (1e-9 if tol is None else tol) * scale


def strict_equiv_check(T: MatrixTriple, T2: MatrixTriple, S: Matrix, R: Matrix,
                       tol: float | None = None) -> bool:
    """``S T2(x, y) = T(x, y) R`` checked coefficientwise in 1, x and y."""
    m, n = T.m, T.n
    if (T2.m, T2.n) != (m, n) or S.shape != (m, m) or R.shape != (n + 2 * m, n + 2 * m):
        raise ShapeError("strict equivalence needs S m x m and R (n+2m) x (n+2m)")
    P1, P2 = poly_matrix(T), poly_matrix(T2)
    return all(_close(S @ X2, X1 @ R, tol) for X1, X2 in (
        (P1.constant, P2.constant),
        (P1.coefficient("x"), P2.coefficient("x")),
        (P1.coefficient("y"), P2.coefficient("y"))))


def witness_from_strict(S: Matrix, R: Matrix, tol: float | None = None) -> FeedbackWitness:
    """Read ``(S, P, U, V)`` off ``R = [[P, V, U], [0, S, 0], [0, 0, S]]``.

    Raises :class:`PreconditionError` when ``R`` leaves that pattern.
    """
    m = S.rows
    n = R.rows - 2 * m
    if S.shape != (m, m) or R.shape != (n + 2 * m, n + 2 * m) or n < 0:
        raise ShapeError("S must be m x m and R (n+2m) x (n+2m)")
    f = R.field
    expected_lower = block([[Matrix.zeros(m, n, f), S, Matrix.zeros(m, m, f)],
                            [Matrix.zeros(m, n, f), Matrix.zeros(m, m, f), S]])
    if not _close(R[n:, :], expected_lower, tol):
        raise PreconditionError("R is not of the form [[P, V, U], [0, S, 0], [0, 0, S]]")
    return FeedbackWitness(S, R[:n, :n], R[:n, n + m:], R[:n, n:n + m])


# -- size and sampling -------------------------------------------------------------

def triple_norm(T: MatrixTriple) -> float:
    """``|C| + |B| + |A|`` with Frobenius norms."""
    return frobenius_norm(T.C) + frobenius_norm(T.B) + frobenius_norm(T.A)


def random_triple(m: int, n: int, seed, field: str = EXACT) -> MatrixTriple:
    """Seeded triple: integers in [-5, 5] (exact) or standard complex Gaussians (float)."""
    if m < 0 or n < 0:
        raise PreconditionError("sizes must be nonnegative")
    if field not in (EXACT, FLOAT):
        raise FieldError(f"unknown field {field!r}")
    rng = np.random.default_rng(seed)
    return MatrixTriple(random_matrix(m, n, rng, field), random_matrix(m, m, rng, field),
                        random_matrix(m, m, rng, field))


def random_witness(m: int, n: int, seed, field: str = EXACT) -> FeedbackWitness:
    rng = np.random.default_rng(seed)
    return FeedbackWitness(random_invertible(m, rng, field), random_invertible(n, rng, field),
                           random_matrix(n, m, rng, field, -3, 3),
                           random_matrix(n, m, rng, field, -3, 3))

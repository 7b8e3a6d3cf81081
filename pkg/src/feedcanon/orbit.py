"""Orbit and stabilizer dimensions of the feedback action.

Differentiating ``S^{-1} [C B A] R`` at ``S = I, R = I`` gives

    dC = C dP - dS C
    dB = C dV + B dS - dS B
    dA = C dU + A dS - dS A

Jacobian columns are ordered dS, dP, dU, dV (each row-major); rows are
ordered dC, dB, dA (each row-major).  For pairs the columns are dS, dP, dU and
the rows dB = B dP - dS B, dA = B dU + A dS - dS A.

The stabilizer is computed from a separately assembled Kronecker system for
``S [T'] = [T] R`` so that rank + nullity is a genuine cross-check.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .errors import FieldError, InvariantViolation, PreconditionError
from .exactmat import EXACT, Matrix, exact_rank, hstack, numeric_rank, vstack
from .pairs import MatrixPair, pair_stabilizer_system
from .triples import MatrixTriple

EXACT_MODE = "exact"
FLOAT_MODE = "float"


@dataclass(frozen=True)
class OrbitReport:
    m: int
    n: int
    ambient_dim: int
    group_dim: int
    orbit_dim: int
    stabilizer_dim: int
    rigid: bool

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _jacobian_shell(rows: int, cols: int, field: str) -> np.ndarray:
    return Matrix.zeros(rows, cols, field).array.copy()


def tangent_jacobian(T: MatrixTriple) -> Matrix:
    """``m(n+2m) x (m^2 + n^2 + 2mn)`` differential of the action at ``T``."""
    m, n, f = T.m, T.n, T.field
    C, B, A = T.C.array, T.B.array, T.A.array
    oS, oP = 0, m * m
    oU = oP + n * n
    oV = oU + n * m
    J = _jacobian_shell(m * (n + 2 * m), oV + n * m, f)
    rC, rB = 0, m * n
    rA = rB + m * m
    for i in range(m):
        for j in range(n):
            row = rC + i * n + j
            for k in range(n):
                J[row, oP + k * n + j] += C[i, k]
            for k in range(m):
                J[row, oS + i * m + k] -= C[k, j]
    for X, r0, oX in ((B, rB, oV), (A, rA, oU)):
        for i in range(m):
            for j in range(m):
                row = r0 + i * m + j
                for k in range(n):
                    J[row, oX + k * m + j] += C[i, k]
                for k in range(m):
                    J[row, oS + k * m + j] += X[i, k]
                    J[row, oS + i * m + k] -= X[k, j]
    return Matrix._wrap(J, f)


def pair_tangent_jacobian(p: MatrixPair) -> Matrix:
    """``m(n+m) x (m^2 + n^2 + mn)``; columns dS, dP, dU."""
    m, n, f = p.m, p.n, p.field
    B, A = p.B.array, p.A.array
    oS, oP = 0, m * m
    oU = oP + n * n
    J = _jacobian_shell(m * (n + m), oU + n * m, f)
    for i in range(m):
        for j in range(n):
            row = i * n + j
            for k in range(n):
                J[row, oP + k * n + j] += B[i, k]
            for k in range(m):
                J[row, oS + i * m + k] -= B[k, j]
    for i in range(m):
        for j in range(m):
            row = m * n + i * m + j
            for k in range(n):
                J[row, oU + k * m + j] += B[i, k]
            for k in range(m):
                J[row, oS + k * m + j] += A[i, k]
                J[row, oS + i * m + k] -= A[k, j]
    return Matrix._wrap(J, f)


def _kron(X: Matrix, Y: Matrix) -> Matrix:
    return Matrix._wrap(np.kron(X.array, Y.array), X.field)


def witness_system(T: MatrixTriple, T2: MatrixTriple) -> Matrix:
    """Kernel = ``{(S, P, U, V): S [T2] = [T] R}``, unknowns in the Jacobian's column order.

    Uses ``vec(X Y Z) = (X kron Z^T) vec(Y)`` for row-major ``vec``.
    """
    m, n, f = T.m, T.n, T.field
    Im, In = Matrix.identity(m, f), Matrix.identity(n, f)
    Z = lambda r, c: Matrix.zeros(r, c, f)  # noqa: E731
    mm, nn, nm = m * m, n * n, n * m
    rows_C = hstack([_kron(Im, T2.C.T), -_kron(T.C, In), Z(m * n, nm), Z(m * n, nm)],
                    rows=m * n)
    rows_B = hstack([_kron(Im, T2.B.T) - _kron(T.B, Im), Z(mm, nn), Z(mm, nm), -_kron(T.C, Im)],
                    rows=mm)
    rows_A = hstack([_kron(Im, T2.A.T) - _kron(T.A, Im), Z(mm, nn), -_kron(T.C, Im), Z(mm, nm)],
                    rows=mm)
    return vstack([rows_C, rows_B, rows_A], cols=mm + nn + 2 * nm)


def _rank(M: Matrix, mode: str, tol: float | None) -> int:
    if mode == EXACT_MODE:
        return exact_rank(M)
    return numeric_rank(M.to_float(), tol)


def _check_mode(field: str, mode: str, tol: float | None) -> None:
    if mode == EXACT_MODE:
        if field != EXACT:
            raise FieldError("exact mode needs exact input")
    elif mode == FLOAT_MODE:
        if tol is None:
            raise PreconditionError("float mode needs a tolerance")
    else:
        raise PreconditionError(f"unknown mode {mode!r}")


def orbit_dimension(T: MatrixTriple, mode: str = EXACT_MODE, tol: float | None = None) -> OrbitReport:
    _check_mode(T.field, mode, tol)
    m, n = T.m, T.n
    ambient = m * (n + 2 * m)
    group = m * m + n * n + 2 * m * n
    orbit = _rank(tangent_jacobian(T), mode, tol)
    stab = group - _rank(witness_system(T, T), mode, tol)
    if orbit + stab != group:
        raise InvariantViolation(f"orbit {orbit} + stabilizer {stab} != group {group}")
    return OrbitReport(m, n, ambient, group, orbit, stab, orbit == ambient)


def pair_orbit_dimension(p: MatrixPair, mode: str = EXACT_MODE,
                         tol: float | None = None) -> OrbitReport:
    _check_mode(p.field, mode, tol)
    m, n = p.m, p.n
    ambient = m * (n + m)
    group = m * m + n * n + m * n
    orbit = _rank(pair_tangent_jacobian(p), mode, tol)
    stab = group - _rank(pair_stabilizer_system(p), mode, tol)
    if orbit + stab != group:
        raise InvariantViolation(f"orbit {orbit} + stabilizer {stab} != group {group}")
    return OrbitReport(m, n, ambient, group, orbit, stab, orbit == ambient)


def is_rigid(T: MatrixTriple) -> bool:
    """Exact full-orbit test."""
    return orbit_dimension(T).rigid



def orbit_rank(T: MatrixTriple, mode: str = EXACT_MODE, tol: float | None = None) -> int:
    """Orbit dimension alone (no stabilizer cross-check)."""
    _check_mode(T.field, mode, tol)
    return _rank(tangent_jacobian(T), mode, tol)

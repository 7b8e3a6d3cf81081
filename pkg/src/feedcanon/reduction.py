"""Perturbation-plus-feedback reduction pipelines over floating complex numbers.

Every pipeline drives a triple through a sequence of steps.  A step is a small
perturbation followed by a feedback transformation; consecutive
transformations without a perturbation in between are merged into one step.
The norm of the perturbation opening step ``i+1`` is limited by

    eps / (2^(i+1) * |S_1 ... S_i| * |(R_1 ... R_i)^{-1}|)

(Frobenius norms, ``eps/2`` for the first step), which keeps the single
equivalent perturbation returned by :func:`collapse_trace` below ``eps``.
Pipelines spend at most half of each allowance because the triple norm
``|C| + |B| + |A|`` can exceed the Frobenius norm of ``[C B A]`` by ``sqrt(3)``.

Sub-problems (the pair inside a triple, the subpair of the staircase, the
subtriple hidden in the free strip ``N``) are reduced through *frames* that
translate their perturbations and witnesses to the full triple, so there is a
single trace and a single budget.  After each transformation the state is
replaced by an exactly structured target (identity and zero blocks set, free
entries copied) once the computed result has been checked against it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .errors import BudgetError, InvariantViolation, PreconditionError
from .exactmat import FLOAT, Matrix, make_F, make_G
from .pairs import MatrixPair, PairWitness, alpha_beta, make_H_block
from .triples import (FeedbackWitness, MatrixTriple, make_K, no_rigid_message, rigid_exists,
                      rigid_levels, triple_norm)

RANK_THRESHOLD = 1e-8
GAP_THRESHOLD = 1e-8
SNAP_RTOL = 1e-8

Arr = np.ndarray
Triple = tuple  # (C, B, A) numpy arrays
Witness = tuple  # (S, P, U, V) numpy arrays


# -- budget and trace ---------------------------------------------------------------

@dataclass(frozen=True)
class PerturbationBudget:
    epsilon: float
    step_index: int = 0
    norm_S: float = 1.0
    norm_R_inv: float = 1.0


def budget_allowance(b: PerturbationBudget) -> float:
    if not b.epsilon > 0:
        raise PreconditionError("epsilon must be positive")
    if b.step_index == 0:
        return b.epsilon / 2
    return b.epsilon / (2 ** (b.step_index + 1) * b.norm_S * b.norm_R_inv)


@dataclass(frozen=True)
class TraceStep:
    delta: MatrixTriple
    witness: FeedbackWitness


@dataclass(frozen=True)
class ReductionTrace:
    epsilon: float
    steps: tuple[TraceStep, ...] = field(default_factory=tuple)


def _fro(a: Arr) -> float:
    return float(np.linalg.norm(a)) if a.size else 0.0


def _tnorm(T: Triple) -> float:
    return sum(_fro(x) for x in T)


def _ident(m: int, n: int) -> Witness:
    z = np.zeros((n, m), complex)
    return np.eye(m, dtype=complex), np.eye(n, dtype=complex), z, z.copy()


def _then(w1: Witness, w2: Witness) -> Witness:
    S1, P1, U1, V1 = w1
    S2, P2, U2, V2 = w2
    return S1 @ S2, P1 @ P2, P1 @ U2 + U1 @ S2, P1 @ V2 + V1 @ S2


def _R(w: Witness) -> Arr:
    S, P, U, V = w
    m, n = S.shape[0], P.shape[0]
    R = np.zeros((n + 2 * m, n + 2 * m), complex)
    R[:n, :n], R[:n, n:n + m], R[:n, n + m:] = P, V, U
    R[n:n + m, n:n + m] = S
    R[n + m:, n + m:] = S
    return R


def _R_inv(w: Witness) -> Arr:
    S, P, U, V = w
    Si, Pi = np.linalg.inv(S), np.linalg.inv(P)
    return _R((Si, Pi, -Pi @ U @ Si, -Pi @ V @ Si))


def _act(T: Triple, w: Witness) -> Triple:
    C, B, A = T
    S, P, U, V = w
    if S.shape[0] == 0:
        return C @ P, B.copy(), A.copy()
    return (np.linalg.solve(S, C @ P), np.linalg.solve(S, B @ S + C @ V),
            np.linalg.solve(S, A @ S + C @ U))


def _np_triple(T: MatrixTriple) -> Triple:
    T = T if T.field == FLOAT else T.to_float()
    return tuple(np.array(x.array, dtype=complex) for x in (T.C, T.B, T.A))


def _mx(a: Arr) -> Matrix:
    return Matrix._wrap(np.array(a, dtype=complex), FLOAT)


def _to_triple(T: Triple) -> MatrixTriple:
    return MatrixTriple(*(_mx(x) for x in T))


def _to_witness(w: Witness) -> FeedbackWitness:
    return FeedbackWitness(*(_mx(x) for x in w))


def _from_witness(w: FeedbackWitness) -> Witness:
    return tuple(np.array(x.to_float().array, dtype=complex) for x in (w.S, w.P, w.U, w.V))


def _step_allowance(eps: float, k: int, total: Witness) -> float:
    if k == 0:
        return budget_allowance(PerturbationBudget(eps))
    return budget_allowance(PerturbationBudget(eps, k, _fro(total[0]), _fro(_R_inv(total))))


def collapse_trace(T: MatrixTriple, tr: ReductionTrace) -> tuple[MatrixTriple, FeedbackWitness]:
    """Single perturbation ``nabla`` and witness ``w`` with
    ``apply_feedback(T + nabla, w)`` equal to the trace's final triple.

    ``nabla = sum_i S~_{i-1} [dT_i] R~_{i-1}^{-1}``; raises :class:`BudgetError`
    when a step's perturbation is not below its allowance.
    """
    m, n = T.m, T.n
    total = _ident(m, n)
    nabla = np.zeros((m, n + 2 * m), complex)
    for k, step in enumerate(tr.steps):
        d = _np_triple(step.delta)
        allowed = _step_allowance(tr.epsilon, k, total)
        size = _tnorm(d)
        if size > 0 and not size < allowed:
            raise BudgetError(f"step {k + 1}: perturbation {size:.3e} >= allowance {allowed:.3e}")
        if size > 0:
            nabla += total[0] @ np.hstack(d) @ _R_inv(total)
        total = _then(total, _from_witness(step.witness))
    nab = (nabla[:, :n], nabla[:, n:n + m], nabla[:, n + m:])
    return _to_triple(nab), _to_witness(total)


def replay_trace(T: MatrixTriple, tr: ReductionTrace) -> MatrixTriple:
    """Run the steps one at a time: ``T_{i+1} = S_i^{-1} [T_i + dT_i] R_i``."""
    cur = _np_triple(T)
    for step in tr.steps:
        d = _np_triple(step.delta)
        cur = _act(tuple(a + b for a, b in zip(cur, d)), _from_witness(step.witness))
    return _to_triple(cur)


# -- frames --------------------------------------------------------------------------

class _Root:
    """The full triple being reduced; owns the trace and the budget."""

    def __init__(self, T: Triple, eps: float):
        if not eps > 0:
            raise PreconditionError("epsilon must be positive")
        self.state = tuple(x.copy() for x in T)
        self.eps = eps
        m, n = T[0].shape
        self.m, self.n = m, n
        self.steps: list[list] = []
        self.total = _ident(m, n)

    def get(self) -> Triple:
        return self.state

    def allowance(self) -> float:
        return _step_allowance(self.eps, len(self.steps), self.total)

    def perturb(self, d: Triple) -> None:
        size = _tnorm(d)
        if size == 0:
            return
        allowed = self.allowance()
        if size > allowed / 2 * (1 + 1e-9):
            raise BudgetError(f"perturbation {size:.3e} exceeds half the allowance {allowed:.3e}")
        self.state = tuple(a + b for a, b in zip(self.state, d))
        self.steps.append([d, _ident(self.m, self.n)])

    def apply(self, w: Witness, snap: Callable[[Triple], Triple]) -> None:
        actual = _act(self.state, w)
        target = snap(actual)
        err = math.sqrt(sum(_fro(a - t) ** 2 for a, t in zip(actual, target)))
        scale = max(1.0, _tnorm(actual))
        if err > SNAP_RTOL * scale:
            raise InvariantViolation(f"reduction step missed its target by {err:.3e}")
        self.state = tuple(np.array(t, dtype=complex) for t in target)
        if not self.steps:
            self.steps.append([tuple(np.zeros_like(x) for x in self.state), _ident(self.m, self.n)])
        self.steps[-1][1] = _then(self.steps[-1][1], w)
        self.total = _then(self.total, w)

    def trace(self) -> ReductionTrace:
        return ReductionTrace(self.eps, tuple(TraceStep(_to_triple(d), _to_witness(w))
                                              for d, w in self.steps))


class _PairInTriple:
    """The pair ``(C, B)``; a pair witness ``(S, P, U)`` acts as ``(S, P, 0, U)``."""

    def __init__(self, parent):
        self.parent = parent

    def get(self):
        C, B, _ = self.parent.get()
        return C, B

    def allowance(self) -> float:
        return self.parent.allowance()

    def perturb(self, d) -> None:
        A = self.parent.get()[2]
        self.parent.perturb((d[0], d[1], np.zeros_like(A)))

    def apply(self, w, snap) -> None:
        S, P, U = w
        self.parent.apply((S, P, np.zeros_like(U), U),
                          lambda act: (*snap((act[0], act[1])), act[2]))


class _StaircaseSub:
    """Subpair ``(M, N)`` of a pair ``([I_n; 0], [[0], [M, N]])``."""

    def __init__(self, parent, n: int):
        self.parent, self.n = parent, n

    def get(self):
        A = self.parent.get()[1]
        n = self.n
        return A[n:, :n], A[n:, n:]

    def allowance(self) -> float:
        return self.parent.allowance()

    def perturb(self, d) -> None:
        B, A = self.parent.get()
        n = self.n
        dA = np.zeros_like(A)
        dA[n:, :n], dA[n:, n:] = d
        self.parent.perturb((np.zeros_like(B), dA))

    def apply(self, w, snap) -> None:
        Sp, Pp, Up = w
        n = self.n
        M, N = self.get()
        M2 = np.linalg.solve(Sp, M @ Pp) if Sp.size else M @ Pp
        N2 = np.linalg.solve(Sp, N @ Sp + M @ Up) if Sp.size else N.copy()
        k = Sp.shape[0]
        S = np.zeros((n + k, n + k), complex)
        S[:n, :n], S[:n, n:], S[n:, n:] = Pp, Up, Sp
        U = Up @ np.hstack([M2, N2])

        def parent_snap(act):
            A = act[1]
            sub = snap((A[n:, :n], A[n:, n:]))
            B = np.zeros_like(act[0])
            B[:n, :n] = np.eye(n)
            At = np.zeros_like(A)
            At[n:, :n], At[n:, n:] = sub
            return B, At

        self.parent.apply((S, Pp, U), parent_snap)


def _k_arrays(N: Arr, m: int, n: int) -> Triple:
    return _np_triple(make_K(_mx(N) if m > n else None, m, n, FLOAT))


class _StripSub:
    """Subtriple ``[C' B' A'] = N`` (widths 2n-m, m-n, m-n) of ``make_K(N, m, n)``, n < m < 2n."""

    def __init__(self, parent, m: int, n: int):
        self.parent, self.m, self.n = parent, m, n
        self.p, self.q = m - n, 2 * n - m

    def _split(self, N: Arr) -> Triple:
        p, q = self.p, self.q
        return N[:, :q], N[:, q:q + p], N[:, q + p:]

    def get(self):
        return self._split(self.parent.get()[2][self.n:, :])

    def allowance(self) -> float:
        return self.parent.allowance()

    def perturb(self, d) -> None:
        C, B, A = self.parent.get()
        dA = np.zeros_like(A)
        dA[self.n:, :] = np.hstack(d)
        self.parent.perturb((np.zeros_like(C), np.zeros_like(B), dA))

    def apply(self, w, snap) -> None:
        Sp, Pp, Up, Vp = w
        N2 = np.hstack(_act(self.get(), w))
        full = _k_lift(N2, self.m, self.n, Pp, Vp, Sp, Up)
        m, n = self.m, self.n
        self.parent.apply(full, lambda act: _k_arrays(np.hstack(snap(self._split(act[2][n:, :]))),
                                                      m, n))


def _R_gamma(gamma: int, S1: Arr, S2: Arr, S3: Arr, S4: Arr) -> Arr:
    k, beta = S1.shape[0], S3.shape[0]
    n = k + beta
    size = (gamma - 1) * n + beta
    R = np.zeros((size, size), complex)
    for i in range(gamma - 1):
        o = i * n
        R[o:o + k, o:o + k], R[o:o + k, o + k:o + n], R[o + k:o + n, o + k:o + n] = S1, S2, S3
        if i + 1 < gamma - 1:
            R[o:o + k, o + n + k:o + 2 * n] = S4
        else:
            R[o:o + k, o + n:o + n + beta] = S4
    R[(gamma - 1) * n:, (gamma - 1) * n:] = S3
    return R


def _k_lift(N2: Arr, m: int, n: int, S1: Arr, S2: Arr, S3: Arr, S4: Arr) -> Witness:
    """Full witness carrying ``make_K(N)`` to ``make_K(N2)``; see ``triples.K_lifted_witness``."""
    alpha, _ = alpha_beta(m, n)
    S = _R_gamma(alpha + 1, S1, S2, S3, S4)
    X = S[:n, n:]
    H = np.array(make_H_block(m, n, FLOAT).array, dtype=complex)
    return S, S[:n, :n].copy(), X @ N2, X @ H


def _k_step(frame, m: int, n: int, S1: Arr, S2: Arr, S3: Arr, S4: Arr,
            snapN: Callable[[Arr], Arr]) -> None:
    alpha, _ = alpha_beta(m, n)
    N = frame.get()[2][n:, :]
    Ra = _R_gamma(alpha, S1, S2, S3, S4)
    N2 = np.linalg.solve(Ra, N @ _R_gamma(alpha + 1, S1, S2, S3, S4))
    frame.apply(_k_lift(N2, m, n, S1, S2, S3, S4),
                lambda act: _k_arrays(snapN(act[2][n:, :]), m, n))


# -- pair reduction ----------------------------------------------------------------

def _repair_rank(frame, B: Arr, A: Arr) -> Arr:
    """Lift singular values of B below the threshold, spending at most half
    the allowance; return the (possibly) perturbed B."""
    m, n = B.shape
    k = min(m, n)
    if k == 0:
        return B
    U, s, Vh = np.linalg.svd(B)
    thr = RANK_THRESHOLD * max(1.0, float(s[0]))
    low = s <= thr
    if not low.any():
        return B
    budget = frame.allowance() / 2
    lift = budget / (2 * math.sqrt(int(low.sum())))
    bump = np.where(low, np.maximum(s, lift) - s, 0.0)
    dB = (U[:, :k] * bump) @ Vh[:k, :]
    frame.perturb((dB, np.zeros_like(A)))
    return frame.get()[0]


def _swap_perm(m: int, n: int) -> Arr:
    """``Pi`` with ``G_mn Pi = F_mn`` (and ``F_mn Pi^{-1} = G_mn``)."""
    Pi = np.zeros((n, n), complex)
    Pi[n - m:, :m] = np.eye(m)
    Pi[:n - m, m:] = np.eye(n - m)
    return Pi


def _reduce_pair(frame) -> None:
    """Drive the pair seen through ``frame`` to ``canonical_pair_H(m, n)``."""
    B, A = frame.get()
    m, n = B.shape
    if m == 0:
        return
    if m <= n:
        G = np.array(make_G(m, n, FLOAT).array, dtype=complex)
        F = np.array(make_F(m, n, FLOAT).array, dtype=complex)
        if np.array_equal(B, F) and m < n:
            frame.apply((np.eye(m, dtype=complex), _swap_perm(m, n).T, np.zeros((n, m), complex)),
                        lambda act: (G.copy(), act[1]))
        elif not np.array_equal(B, G):
            B = _repair_rank(frame, B, A)
            U_, s, Vh = np.linalg.svd(B)
            S = U_ * s
            P = Vh.conj().T @ np.linalg.inv(_swap_perm(m, n))
            frame.apply((S, P, np.zeros((n, m), complex)), lambda act: (G.copy(), act[1]))
        A = frame.get()[1]
        if A.any():
            U = np.zeros((n, m), complex)
            U[n - m:, :] = -A
            frame.apply((np.eye(m, dtype=complex), np.eye(n, dtype=complex), U),
                        lambda act: (G.copy(), np.zeros_like(act[1])))
        return

    E = np.zeros((m, n), complex)
    E[:n, :n] = np.eye(n)
    if not np.array_equal(B, E):
        B = _repair_rank(frame, B, A)
        U_, s, Vh = np.linalg.svd(B)
        S = U_.copy()
        S[:, :n] *= s
        frame.apply((S, Vh.conj().T, np.zeros((n, m), complex)), lambda act: (E.copy(), act[1]))
    A = frame.get()[1]
    if A[:n, :].any():
        def snap(act):
            At = act[1].copy()
            At[:n, :] = 0
            return E.copy(), At
        frame.apply((np.eye(m, dtype=complex), np.eye(n, dtype=complex), -A[:n, :].copy()), snap)
    _reduce_pair(_StaircaseSub(frame, n))


def _reduce_to_K(frame) -> None:
    C, B, A = frame.get()
    m, n = C.shape
    if m == 0:
        return
    _reduce_pair(_PairInTriple(frame))
    C, B, A = frame.get()
    I_m, I_n = np.eye(m, dtype=complex), np.eye(n, dtype=complex)
    z = np.zeros((n, m), complex)
    if m <= n:
        if A.any():
            U = z.copy()
            U[n - m:, :] = -A
            frame.apply((I_m, I_n, U, z), lambda act: (act[0], act[1], np.zeros_like(act[2])))
        return
    if A[:n, :].any():
        def snap(act):
            At = act[2].copy()
            At[:n, :] = 0
            return act[0], act[1], At
        frame.apply((I_m, I_n, -A[:n, :].copy(), z), snap)


# -- public pipelines ------------------------------------------------------------------

class PairReduction(NamedTuple):
    pair: MatrixPair
    witness: PairWitness
    trace: ReductionTrace


class KReduction(NamedTuple):
    triple: MatrixTriple
    witness: FeedbackWitness
    trace: ReductionTrace
    N: Matrix | None


class RigidReduction(NamedTuple):
    triple: MatrixTriple
    witness: FeedbackWitness
    trace: ReductionTrace
    levels: tuple[tuple[int, int], ...]
    p: int
    q: int
    l: int


def _require_n(n: int) -> None:
    if n < 1:
        raise PreconditionError("n = 0 (no inputs) is not supported by the reduction pipelines")


def _finish(root: _Root) -> tuple[MatrixTriple, FeedbackWitness, ReductionTrace]:
    return _to_triple(root.state), _to_witness(root.total), root.trace()


def reduce_pair_generic(p: MatrixPair, eps: float = 1e-6) -> PairReduction:
    """Perturb and transform ``p`` to exactly ``canonical_pair_H(m, n)``.

    The trace is recorded on the triple ``(B, A, 0)``; its witnesses have
    ``U = 0`` and carry the pair feedback in ``V``.
    """
    _require_n(p.n)
    p = p if p.field == FLOAT else p.to_float()
    B, A = (np.array(x.array, dtype=complex) for x in (p.B, p.A))
    root = _Root((B, A, np.zeros_like(A)), eps)
    _reduce_pair(_PairInTriple(root))
    T, w, tr = _finish(root)
    return PairReduction(MatrixPair(T.C, T.B), PairWitness(w.S, w.P, w.V), tr)


def reduce_triple_to_K(T: MatrixTriple, eps: float = 1e-6) -> KReduction:
    _require_n(T.n)
    root = _Root(_np_triple(T), eps)
    _reduce_to_K(root)
    out, w, tr = _finish(root)
    m, n = T.m, T.n
    return KReduction(out, w, tr, out.A[n:, :] if m > n else None)


def _min_gap(vals: Arr) -> float:
    if vals.size < 2:
        return math.inf
    d = np.abs(vals[:, None] - vals[None, :])
    d[np.diag_indices_from(d)] = math.inf
    return float(d.min())


def reduce_alpha_n(T: MatrixTriple, eps: float = 1e-6) -> KReduction:
    """Normal form for ``m = alpha n`` (alpha >= 2): K form whose leading n x n
    block of ``N`` is diagonal with distinct eigenvalues and whose next block
    has first row ``(*, 1, ..., 1)``."""
    m, n = T.m, T.n
    _require_n(n)
    if m % n or m // n < 2:
        raise PreconditionError(f"reduce_alpha_n needs m = alpha*n with alpha >= 2 (got m={m}, n={n})")
    root = _Root(_np_triple(T), eps)
    _reduce_to_K(root)
    empty = np.zeros((0, 0), complex)
    emptyc = np.zeros((0, n), complex)

    N = root.get()[2][n:, :]
    N11 = N[:n, :n]
    scale = max(1.0, _fro(N11))
    already_diag = np.array_equal(N11, np.diag(np.diag(N11)))
    vals = np.diag(N11) if already_diag else np.linalg.eigvals(N11)
    if _min_gap(vals) <= GAP_THRESHOLD * scale:
        weights = np.arange(1, n + 1, dtype=float)
        delta = root.allowance() / (2 * float(np.linalg.norm(weights)))
        dA = np.zeros((m, m), complex)
        dA[n:2 * n, :n] = np.diag(delta * weights)
        root.perturb((np.zeros((m, n), complex), np.zeros((m, m), complex), dA))
        N = root.get()[2][n:, :]
        N11 = N[:n, :n]
        already_diag = np.array_equal(N11, np.diag(np.diag(N11)))
        vals = np.diag(N11) if already_diag else np.linalg.eigvals(N11)
        if _min_gap(vals) == 0:
            raise InvariantViolation("eigenvalues still coincide after the separating perturbation")

    if not already_diag:
        lam, X = np.linalg.eig(N11)
        order = np.lexsort((lam.imag, lam.real))
        lam, X = lam[order], X[:, order]

        def snap_diag(N2):
            N2 = N2.copy()
            N2[:n, :n] = np.diag(np.diag(N2[:n, :n]))
            return N2
        _k_step(root, m, n, empty, emptyc, X, emptyc, snap_diag)

    if n > 1:
        N = root.get()[2][n:, :]
        row = N[0, n + 1:2 * n]
        thr = GAP_THRESHOLD * max(1.0, _fro(N))
        small = np.abs(row) <= thr
        if small.any():
            eta = root.allowance() / (2 * math.sqrt(int(small.sum())))
            phase = np.where(row == 0, 1, row / np.where(row == 0, 1, np.abs(row)))
            dA = np.zeros((m, m), complex)
            dA[n, n + 1:2 * n] = np.where(small, eta * phase, 0)
            root.perturb((np.zeros((m, n), complex), np.zeros((m, m), complex), dA))
            N = root.get()[2][n:, :]
            row = N[0, n + 1:2 * n]
        if not np.all(row == 1):
            D = np.diag(np.concatenate([[1.0], 1.0 / row]).astype(complex))

            def snap_ones(N2):
                N2 = N2.copy()
                N2[:n, :n] = np.diag(np.diag(N2[:n, :n]))
                N2[0, n + 1:2 * n] = 1
                return N2
            _k_step(root, m, n, empty, emptyc, D, emptyc, snap_ones)

    out, w, tr = _finish(root)
    return KReduction(out, w, tr, out.A[n:, :])


def _reduce_rigid(frame, m: int, n: int) -> None:
    _reduce_to_K(frame)
    if m <= n:
        if m < n:
            Pi = _swap_perm(m, n)
            F = np.array(make_F(m, n, FLOAT).array, dtype=complex)
            z = np.zeros((n, m), complex)
            frame.apply((np.eye(m, dtype=complex), Pi, z, z),
                        lambda act: (F.copy(), np.zeros((m, m), complex), np.zeros((m, m), complex)))
        return
    _reduce_rigid(_StripSub(frame, m, n), m - n, 2 * n - m)


def reduce_to_rigid(T: MatrixTriple, eps: float = 1e-6) -> RigidReduction:
    """Reduce to ``rigid_canonical(m, n)``: K form, then recursion on the
    subtriple stored in the free strip, ending with ``(F_pq, 0, 0)``."""
    m, n = T.m, T.n
    _require_n(n)
    if m >= 1 and not rigid_exists(m, n):
        raise PreconditionError(no_rigid_message(m, n))
    levels = tuple(rigid_levels(m, n)) if m >= 1 else ((0, n),)
    root = _Root(_np_triple(T), eps)
    _reduce_rigid(root, m, n)
    out, w, tr = _finish(root)
    p, q = levels[-1]
    return RigidReduction(out, w, tr, levels, p, q, len(levels) - 1)


def perturbation_norm(nabla: MatrixTriple) -> float:
    return triple_norm(nabla)


import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from feedcanon.errors import PreconditionError, ShapeError, SingularMatrixError
from feedcanon.exactmat import EXACT, FLOAT, Matrix, make_F, make_G, mat, nullspace_basis
from feedcanon.orbit import witness_system
from feedcanon.pairs import alpha_beta, make_R_gamma, random_invertible, random_matrix
from feedcanon.triples import (FeedbackWitness, MatrixTriple, K_lifted_witness, K_similar,
                               K_transform, apply_feedback, basis_change, build_strict,
                               column_feedback, input_change, lift_L, lift_L_iterated, make_K,
                               no_rigid_message, poly_matrix, random_triple, random_witness,
                               rigid_canonical, rigid_exists, rigid_form, rigid_levels,
                               strict_equiv_check, triple_norm, verify_witness,
                               witness_from_strict)

sizes = st.tuples(st.integers(0, 5), st.integers(0, 5))


def one_by_one(c, b, a) -> MatrixTriple:
    return MatrixTriple(mat([[c]]), mat([[b]]), mat([[a]]))


def random_params(m: int, n: int, seed) -> tuple[Matrix, Matrix, Matrix, Matrix]:
    rng = np.random.default_rng(seed)
    _, beta = alpha_beta(m, n)
    k = n - beta
    return (random_invertible(k, rng, EXACT), random_matrix(k, beta, rng, EXACT, low=-2, high=2),
            random_invertible(beta, rng, EXACT), random_matrix(k, beta, rng, EXACT, low=-2, high=2))


def params_of(S: Matrix, m: int, n: int) -> tuple[Matrix, Matrix, Matrix, Matrix]:
    alpha, beta = alpha_beta(m, n)
    k = n - beta
    S4 = S[:k, n + k:2 * n] if alpha > 1 else S[:k, n:n + beta]
    return S[:k, :k], S[:k, k:n], S[k:n, k:n], S4


class TestAction:
    def test_identity(self):
        T = random_triple(3, 2, 0)
        assert apply_feedback(T, FeedbackWitness.identity(3, 2)) == T

    def test_hand_example(self):
        w = FeedbackWitness(mat([[1]]), mat([[1]]), mat([[1]]), mat([[2]]))
        assert apply_feedback(one_by_one(1, 0, 0), w) == one_by_one(1, 2, 1)

    @given(sizes, st.integers(0, 10_000))
    def test_group_action(self, mn, seed):
        m, n = mn
        T = random_triple(m, n, seed)
        w1, w2 = random_witness(m, n, [seed, 1]), random_witness(m, n, [seed, 2])
        assert apply_feedback(apply_feedback(T, w1), w2) == apply_feedback(T, w1.then(w2))
        assert apply_feedback(apply_feedback(T, w1), w1.inverse()) == T
        assert w1.R_inverse() @ w1.R() == Matrix.identity(n + 2 * m)

    def test_singular_witness(self):
        with pytest.raises(SingularMatrixError):
            apply_feedback(one_by_one(1, 0, 0),
                           FeedbackWitness(mat([[0]]), mat([[1]]), mat([[0]]), mat([[0]])))

    def test_elementary_generators(self):
        T = random_triple(2, 2, 5)
        S, P = mat([[1, 2], [0, 1]]), mat([[0, 1], [1, 0]])
        U, V = mat([[1, 0], [0, 1]]), mat([[2, 0], [0, 0]])
        assert apply_feedback(T, basis_change(S, 2)) == MatrixTriple(S.inv() @ T.C, S.inv() @ T.B @ S,
                                                                    S.inv() @ T.A @ S)
        assert apply_feedback(T, input_change(P, 2)) == MatrixTriple(T.C @ P, T.B, T.A)
        assert apply_feedback(T, column_feedback(2, 2, U, V)) == MatrixTriple(
            T.C, T.B + T.C @ V, T.A + T.C @ U)


class TestVerifyWitness:
    def test_exact_zero(self):
        T, w = random_triple(3, 2, 1), random_witness(3, 2, 2)
        assert verify_witness(T, apply_feedback(T, w), w) == 0.0

    def test_linear_growth(self):
        T, w = random_triple(3, 2, 1, FLOAT), random_witness(3, 2, 2, FLOAT)
        T2 = apply_feedback(T, w)
        D = random_triple(3, 2, 3, FLOAT)
        r1 = verify_witness(T, T2 + MatrixTriple(D.C.scale(1e-6), D.B.scale(1e-6), D.A.scale(1e-6)), w)
        r2 = verify_witness(T, T2 + MatrixTriple(D.C.scale(2e-6), D.B.scale(2e-6), D.A.scale(2e-6)), w)
        assert r1 > 0 and r2 / r1 == pytest.approx(2, rel=1e-3)

    def test_size_mismatch(self):
        with pytest.raises(ShapeError):
            verify_witness(random_triple(2, 1, 0), random_triple(2, 2, 0), random_witness(2, 1, 0))


class TestKForm:
    def test_two_one(self):
        a, b = 3, -4
        K = make_K(mat([[a, b]]), 2, 1)
        assert K.C == mat([[1], [0]])
        assert K.B == mat([[0, 0], [1, 0]])
        assert K.A == mat([[0, 0], [a, b]])

    def test_wide_branch(self):
        K = make_K(None, 2, 3)
        assert K == MatrixTriple(make_G(2, 3), Matrix.zeros(2, 2), Matrix.zeros(2, 2))

    def test_zero_N(self):
        assert make_K(Matrix.zeros(2, 5), 5, 3).A.is_zero()

    def test_size_mismatch(self):
        with pytest.raises(ShapeError):
            make_K(Matrix.zeros(1, 3), 5, 3)

    def test_identity_params(self):
        N = mat([[1, -2, 3, 0, 5]])
        _, beta = alpha_beta(5, 4)
        k = 4 - beta
        I1, I3 = Matrix.identity(k), Matrix.identity(beta)
        Z = Matrix.zeros(k, beta)
        assert K_similar(N, N, I1, Z, I3, Z)

    def test_alpha_one_degenerates(self):
        # (3, 2): alpha = 1, beta = 1, so R_1 = S3 and R_2 = [[S1, S2, S4], [0, S3, 0], [0, 0, S3]]
        S1, S2, S3, S4 = random_params(3, 2, 9)
        N = mat([[1, -2, 3]])
        expected = S3.inv() @ N @ make_R_gamma(2, S1, S2, S3, S4)
        assert K_transform(N, S1, S2, S3, S4) == expected

    @pytest.mark.parametrize("m, n", [(2, 1), (3, 2), (4, 2), (5, 2), (5, 3), (7, 3), (8, 3)])
    @pytest.mark.parametrize("seed", range(3))
    def test_lifted_witness(self, m, n, seed):
        N = random_matrix(m - n, m, np.random.default_rng([seed, m, n]), EXACT, low=-3, high=3)
        params = random_params(m, n, [seed, 1])
        N2 = K_transform(N, *params)
        assert K_similar(N, N2, *params)
        w = K_lifted_witness(N2, *params)
        assert verify_witness(make_K(N, m, n), make_K(N2, m, n), w) == 0.0

    @pytest.mark.parametrize("m, n", [(2, 1), (3, 2), (4, 2), (5, 2), (5, 3)])
    def test_converse_from_solution_space(self, m, n):
        rng = np.random.default_rng([m, n])
        N = random_matrix(m - n, m, rng, EXACT, low=-3, high=3)
        N2 = K_transform(N, *random_params(m, n, [m, n, 7]))
        T, T2 = make_K(N, m, n), make_K(N2, m, n)
        kernel = nullspace_basis(witness_system(T, T2))
        assert kernel
        checked = 0
        for trial in range(5):
            coeffs = rng.integers(-3, 4, size=len(kernel))
            v = Matrix.zeros(kernel[0].rows, 1)
            for c, k in zip(coeffs, kernel):
                v = v + k.scale(int(c))
            x = v.array[:, 0]
            S = Matrix.from_array(x[:m * m].reshape(m, m))
            P = Matrix.from_array(x[m * m:m * m + n * n].reshape(n, n))
            o = m * m + n * n
            U = Matrix.from_array(x[o:o + n * m].reshape(n, m))
            V = Matrix.from_array(x[o + n * m:].reshape(n, m))
            S, P, U, V = (Matrix.from_array(M.array) for M in (S, P, U, V))
            w = FeedbackWitness(S, P, U, V)
            try:
                S.inv()
                P.inv()
            except SingularMatrixError:
                continue
            assert verify_witness(T, T2, w) == 0.0
            params = params_of(S, m, n)
            assert make_R_gamma(alpha_beta(m, n)[0] + 1, *params) == S
            assert K_similar(N, N2, *params)
            checked += 1
        assert checked


class TestLift:
    def test_lift_of_F11(self):
        L = lift_L(MatrixTriple(make_F(1, 1), Matrix.zeros(1, 1), Matrix.zeros(1, 1)))
        assert L.C == mat([[1, 0], [0, 1], [0, 0]])
        assert L.B == mat([[0, 0, 0], [0, 0, 0], [0, 1, 0]])
        assert L.A == mat([[0, 0, 0], [0, 0, 0], [1, 0, 0]])

    @given(sizes)
    def test_shape_law(self, pq):
        p, q = pq
        L = lift_L(MatrixTriple.zeros(p, q))
        assert (L.m, L.n) == (2 * p + q, p + q)

    def test_zero_iterations(self):
        T = random_triple(2, 1, 4)
        assert lift_L_iterated(T, 0) == T
        assert lift_L_iterated(T, 2) == lift_L(lift_L(T))

    def test_negative_iterations(self):
        with pytest.raises(PreconditionError):
            lift_L_iterated(random_triple(1, 1, 0), -1)


class TestRigidity:
    @pytest.mark.parametrize("m, n, expected", [(1, 1, True), (2, 1, False), (8, 5, True),
                                                (5, 3, False), (3, 2, True)])
    def test_examples(self, m, n, expected):
        assert rigid_exists(m, n) is expected

    @pytest.mark.parametrize("m, n", [(0, 1), (1, 0)])
    def test_rejects_zero(self, m, n):
        with pytest.raises(PreconditionError):
            rigid_exists(m, n)

    def test_boundary_against_high_precision(self):
        with mpmath.workdps(100):
            phi = (1 + mpmath.sqrt(5)) / 2
            for m in range(1, 201):
                for n in range(1, 201):
                    assert rigid_exists(m, n) == (mpmath.mpf(m) / n - phi < 0), (m, n)

    def test_fibonacci_alternates(self):
        fib = [1, 1]
        while len(fib) < 30:
            fib.append(fib[-1] + fib[-2])
        flags = [rigid_exists(fib[i + 1], fib[i]) for i in range(1, 29)]
        assert all(a != b for a, b in zip(flags, flags[1:]))

    def test_base_case(self):
        assert rigid_canonical(2, 2) == MatrixTriple(Matrix.identity(2), Matrix.zeros(2, 2),
                                                     Matrix.zeros(2, 2))

    def test_one_step(self):
        form = rigid_form(3, 2)
        assert form.triple == lift_L(MatrixTriple(make_F(1, 1), Matrix.zeros(1, 1), Matrix.zeros(1, 1)))
        assert (form.p, form.q, form.l) == (1, 1, 1)

    def test_refusal(self):
        with pytest.raises(PreconditionError, match="no rigid triple exists"):
            rigid_canonical(2, 1)
        assert "(2, 1)" in no_rigid_message(2, 1)

    @pytest.mark.parametrize("m", range(1, 40))
    @pytest.mark.parametrize("n", range(1, 25))
    def test_size_law(self, m, n):
        if not rigid_exists(m, n):
            return
        form = rigid_form(m, n)
        assert (form.triple.m, form.triple.n) == (m, n)
        p, q = form.p, form.q
        for _ in range(form.l):
            p, q = 2 * p + q, p + q
        assert (p, q) == (m, n)
        assert form.levels == tuple(rigid_levels(m, n))


class TestStrictEquivalence:
    def test_evaluation_at_origin(self):
        T = random_triple(2, 3, 1)
        assert poly_matrix(T).evaluate(0, 0) == T.block()

    def test_evaluation_inserts_identities(self):
        T = random_triple(2, 1, 1)
        E = poly_matrix(T).evaluate(2, 5)
        assert E == MatrixTriple(T.C, T.B + Matrix.identity(2).scale(2),
                                 T.A + Matrix.identity(2).scale(5)).block()

    @given(sizes, st.integers(0, 10_000))
    def test_round_trip(self, mn, seed):
        m, n = mn
        T, w = random_triple(m, n, seed), random_witness(m, n, [seed, 3])
        T2 = apply_feedback(T, w)
        S, R = build_strict(w)
        assert strict_equiv_check(T, T2, S, R)
        w2 = witness_from_strict(S, R)
        assert verify_witness(T, T2, w2) == 0.0
        assert w2 == w

    def test_not_similar_not_strict(self):
        T = one_by_one(1, 0, 0)
        T2 = one_by_one(1, 1, 0)
        S, R = build_strict(FeedbackWitness.identity(1, 1))
        assert not strict_equiv_check(T, T2, S, R)

    def test_off_pattern(self):
        S, R = build_strict(random_witness(2, 1, 3))
        a = R.array.copy()
        a[1, 4] += 1  # (2,3) block
        with pytest.raises(PreconditionError):
            witness_from_strict(S, Matrix.from_array(a))

    @given(st.integers(0, 10_000))
    def test_coefficient_identities_force_pattern(self, seed):
        m, n = 2, 2
        T, w = random_triple(m, n, seed), random_witness(m, n, [seed, 1])
        T2 = apply_feedback(T, w)
        S, R = build_strict(w)
        rng = np.random.default_rng(seed)
        row = int(rng.integers(n, n + 2 * m))
        col = int(rng.integers(0, n + 2 * m))
        a = R.array.copy()
        a[row, col] += 1
        assert not strict_equiv_check(T, T2, S, Matrix.from_array(a))
        with pytest.raises(PreconditionError):
            witness_from_strict(S, Matrix.from_array(a))

    def test_size_mismatch(self):
        with pytest.raises(ShapeError):
            strict_equiv_check(random_triple(2, 1, 0), random_triple(2, 1, 1), Matrix.identity(2),
                               Matrix.identity(4))


class TestNormAndSampling:
    def test_norms(self):
        assert triple_norm(MatrixTriple.zeros(2, 3)) == 0
        assert triple_norm(one_by_one(1, 0, 0)) == 1

    def test_determinism(self):
        assert random_triple(3, 2, 5) == random_triple(3, 2, 5)
        assert random_triple(3, 2, 5) != random_triple(3, 2, 6)
        assert random_triple(3, 2, 5, FLOAT) == random_triple(3, 2, 5, FLOAT)

    def test_exact_range(self):
        T = random_triple(4, 4, 1)
        for M in (T.C, T.B, T.A):
            for z in M.array.flat:
                assert z.im == 0 and -5 <= z.re <= 5 and z.re.denominator == 1

import numpy as np
import sympy

from feedcanon.exactmat import Matrix, mat


def to_sympy(M: Matrix) -> sympy.Matrix:
    return sympy.Matrix(M.rows, M.cols,
                        [sympy.Rational(int(z.re.numerator), int(z.re.denominator))
                         + sympy.I * sympy.Rational(int(z.im.numerator), int(z.im.denominator))
                         for z in M.array.flat])


def int_matrix(rows: int, cols: int, seed, low: int = -5, high: int = 5) -> Matrix:
    rng = np.random.default_rng(seed)
    return mat(rng.integers(low, high + 1, size=(rows, cols)).tolist(), shape=(rows, cols))


def low_rank_matrix(rows: int, cols: int, rank: int, seed) -> Matrix:
    rng = np.random.default_rng(seed)
    a = rng.integers(-3, 4, size=(rows, rank)) @ rng.integers(-3, 4, size=(rank, cols))
    return mat(a.tolist(), shape=(rows, cols))


# criterion number -> (passed, detail); printed by the terminal summary hook
ACCEPTANCE: dict[int, tuple[bool, str]] = {}

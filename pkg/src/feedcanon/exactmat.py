"""Scalar fields and dense matrices.

Two fields are supported and never mixed inside one matrix:

* ``"exact"``: Gaussian rationals ``a + b*i`` with ``a, b`` arbitrary-precision
  rationals (:class:`GaussRat`), stored in numpy ``object`` arrays.
* ``"float"``: double-precision complex numbers, stored in ``complex128`` arrays.

Matrices of size ``0 x n`` and ``n x 0`` are ordinary values.
"""
from __future__ import annotations

import math
import re
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
from gmpy2 import mpq, lcm

from .errors import (FieldError, InvariantViolation, PreconditionError, ShapeError,
                     SingularMatrixError)

EXACT = "exact"
FLOAT = "float"
FIELDS = (EXACT, FLOAT)


def _to_mpq(x) -> mpq:
    if isinstance(x, bool):
        raise TypeError("bool is not a scalar")
    if isinstance(x, (int, Fraction)) or type(x).__name__ in ("mpq", "mpz"):
        return mpq(x)
    if isinstance(x, str):
        return mpq(x.strip())
    raise TypeError(f"cannot convert {type(x).__name__} to an exact rational")


class GaussRat:
    """Exact Gaussian rational ``re + im*i``."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = _to_mpq(re)
        self.im = _to_mpq(im)

    @classmethod
    def _make(cls, re, im) -> "GaussRat":
        z = object.__new__(cls)
        z.re = re
        z.im = im
        return z

    @classmethod
    def coerce(cls, x) -> "GaussRat":
        if isinstance(x, GaussRat):
            return x
        if isinstance(x, complex):
            if x.real != int(x.real) or x.imag != int(x.imag):
                raise TypeError("only integral complex literals convert exactly")
            return cls(int(x.real), int(x.imag))
        if isinstance(x, float):
            raise TypeError("floats do not convert to exact scalars")
        if isinstance(x, str):
            return parse_gauss(x)
        return cls._make(_to_mpq(x), _ZQ)

    def _other(self, o):
        if isinstance(o, GaussRat):
            return o
        if isinstance(o, (int, Fraction)) or type(o).__name__ in ("mpq", "mpz"):
            if isinstance(o, bool):
                return None
            return GaussRat._make(mpq(o), _ZQ)
        return None

    def __add__(self, o):
        o = self._other(o)
        if o is None:
            return NotImplemented
        return GaussRat._make(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, o):
        o = self._other(o)
        if o is None:
            return NotImplemented
        return GaussRat._make(self.re - o.re, self.im - o.im)

    def __rsub__(self, o):
        o = self._other(o)
        if o is None:
            return NotImplemented
        return GaussRat._make(o.re - self.re, o.im - self.im)

    def __mul__(self, o):
        o = self._other(o)
        if o is None:
            return NotImplemented
        if not self.im and not o.im:
            return GaussRat._make(self.re * o.re, _ZQ)
        return GaussRat._make(self.re * o.re - self.im * o.im,
                              self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = self._other(o)
        if o is None:
            return NotImplemented
        if not o:
            raise ZeroDivisionError("division by exact zero")
        if not o.im:
            return GaussRat._make(self.re / o.re, self.im / o.re)
        d = o.re * o.re + o.im * o.im
        return GaussRat._make((self.re * o.re + self.im * o.im) / d,
                              (self.im * o.re - self.re * o.im) / d)

    def __rtruediv__(self, o):
        o = self._other(o)
        if o is None:
            return NotImplemented
        return o / self

    def __neg__(self):
        return GaussRat._make(-self.re, -self.im)

    def __pos__(self):
        return self

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, o):
        o = self._other(o)
        if o is None:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if not self.im:
            return hash(self.re)
        return hash((self.re, self.im))

    def conjugate(self) -> "GaussRat":
        return GaussRat._make(self.re, -self.im)

    def abs2(self) -> mpq:
        return self.re * self.re + self.im * self.im

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"GaussRat({format_gauss(self)!r})"

    def __str__(self):
        return format_gauss(self)


_ZQ = mpq(0)
ZERO = GaussRat._make(_ZQ, _ZQ)
ONE = GaussRat._make(mpq(1), _ZQ)

_GAUSS_RE = re.compile(
    r"^\s*(?P<re>[+-]?\d+(?:/\d+)?)?\s*(?:(?P<sign>[+-])\s*(?P<im>\d+(?:/\d+)?)?\s*i)?\s*$")


_BARE_IM_RE = re.compile(r"^\s*(?P<sign>[+-]?)\s*(?P<im>\d+(?:/\d+)?)?\s*i\s*$")


def format_gauss(z: GaussRat) -> str:
    """Compact text form: ``"3"``, ``"-1/2"``, ``"1/2+3/4i"``, ``"0-1i"``."""
    if not z.im:
        return str(z.re)
    sign = "+" if z.im > 0 else "-"
    return f"{z.re}{sign}{abs(z.im)}i"


def parse_gauss(s: str) -> GaussRat:
    """Inverse of :func:`format_gauss`."""
    bare = _BARE_IM_RE.match(s)
    if bare:
        coef = bare.group("im")
        im_part = mpq(coef) if coef else mpq(1)
        return GaussRat._make(_ZQ, -im_part if bare.group("sign") == "-" else im_part)
    m = _GAUSS_RE.match(s)
    if not m or (m.group("re") is None and m.group("sign") is None):
        raise ValueError(f"malformed exact scalar {s!r}")
    re_part = mpq(m.group("re")) if m.group("re") else _ZQ
    if m.group("sign") is None:
        return GaussRat._make(re_part, _ZQ)
    im_part = mpq(m.group("im")) if m.group("im") else mpq(1)
    if m.group("sign") == "-":
        im_part = -im_part
    return GaussRat._make(re_part, im_part)


def _obj_array(r: int, c: int, fill: GaussRat = ZERO) -> np.ndarray:
    return np.full((r, c), fill, dtype=object)


class Matrix:
    """Immutable dense matrix over one scalar field.

    Use :func:`mat`, :meth:`Matrix.zeros`, :meth:`Matrix.identity` or
    :meth:`Matrix.from_array` to build one.
    """

    __slots__ = ("_a", "_field")
    __hash__ = None

    def __init__(self, array: np.ndarray, field: str):
        if field not in FIELDS:
            raise FieldError(f"unknown field {field!r}")
        if array.ndim != 2:
            raise ShapeError("matrices are two-dimensional")
        if field == EXACT:
            if array.dtype != object:
                raise FieldError("exact matrices hold GaussRat objects")
            a = array.copy()
        else:
            a = np.array(array, dtype=np.complex128)
        a.flags.writeable = False
        self._a = a
        self._field = field

    @classmethod
    def _wrap(cls, a: np.ndarray, field: str) -> "Matrix":
        m = object.__new__(cls)
        a.flags.writeable = False
        m._a = a
        m._field = field
        return m

    @classmethod
    def from_array(cls, a) -> "Matrix":
        """Wrap a numpy array: object dtype means exact, anything else float."""
        a = np.asarray(a)
        if a.dtype == object:
            b = np.empty(a.shape, dtype=object)
            for idx, x in np.ndenumerate(a):
                b[idx] = GaussRat.coerce(x)
            return cls._wrap(b, EXACT)
        return cls._wrap(np.array(a, dtype=np.complex128), FLOAT)

    @classmethod
    def zeros(cls, rows: int, cols: int, field: str = EXACT) -> "Matrix":
        if rows < 0 or cols < 0:
            raise ShapeError("negative size")
        if field == EXACT:
            return cls._wrap(_obj_array(rows, cols), EXACT)
        return cls._wrap(np.zeros((rows, cols), dtype=np.complex128), FLOAT)

    @classmethod
    def identity(cls, n: int, field: str = EXACT) -> "Matrix":
        if field == EXACT:
            a = _obj_array(n, n)
            for i in range(n):
                a[i, i] = ONE
            return cls._wrap(a, EXACT)
        return cls._wrap(np.eye(n, dtype=np.complex128), FLOAT)

    # -- basic properties -------------------------------------------------
    @property
    def field(self) -> str:
        return self._field

    @property
    def is_exact(self) -> bool:
        return self._field == EXACT

    @property
    def rows(self) -> int:
        return self._a.shape[0]

    @property
    def cols(self) -> int:
        return self._a.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self._a.shape

    @property
    def array(self) -> np.ndarray:
        """Read-only view of the underlying numpy array."""
        return self._a

    def tolist(self) -> list[list]:
        return self._a.tolist()

    def __repr__(self):
        if self.is_exact:
            body = [[format_gauss(x) for x in row] for row in self._a]
        else:
            body = self._a.tolist()
        return f"Matrix({self.rows}x{self.cols}, {self._field}, {body})"

    # -- arithmetic -------------------------------------------------------
    def _check(self, other: "Matrix"):
        if not isinstance(other, Matrix):
            raise TypeError("expected a Matrix")
        if other._field != self._field:
            raise FieldError("cannot mix exact and float matrices")

    def __add__(self, other: "Matrix") -> "Matrix":
        self._check(other)
        if self.shape != other.shape:
            raise ShapeError(f"cannot add {self.shape} and {other.shape}")
        return Matrix._wrap(self._a + other._a, self._field)

    def __sub__(self, other: "Matrix") -> "Matrix":
        self._check(other)
        if self.shape != other.shape:
            raise ShapeError(f"cannot subtract {self.shape} and {other.shape}")
        return Matrix._wrap(self._a - other._a, self._field)

    def __neg__(self) -> "Matrix":
        return Matrix._wrap(-self._a, self._field)

    def __matmul__(self, other: "Matrix") -> "Matrix":
        self._check(other)
        if self.cols != other.rows:
            raise ShapeError(f"cannot multiply {self.shape} by {other.shape}")
        if self.cols == 0:
            return Matrix.zeros(self.rows, other.cols, self._field)
        return Matrix._wrap(self._a @ other._a, self._field)

    def scale(self, c) -> "Matrix":
        if self.is_exact:
            c = GaussRat.coerce(c)
            a = _obj_array(*self.shape)
            for idx, x in np.ndenumerate(self._a):
                a[idx] = x * c
            return Matrix._wrap(a, EXACT)
        return Matrix._wrap(self._a * complex(c), FLOAT)

    @property
    def T(self) -> "Matrix":
        return Matrix._wrap(self._a.T.copy(), self._field)

    def __getitem__(self, key):
        out = self._a[key]
        if isinstance(out, np.ndarray):
            if out.ndim != 2:
                raise IndexError("use 2-D slices, e.g. M[i:i+1, :]")
            return Matrix._wrap(out.copy(), self._field)
        return out

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return (self._field == other._field and self.shape == other.shape
                and bool(np.all(self._a == other._a)))

    def is_zero(self) -> bool:
        if self.is_exact:
            return not any(bool(x) for x in self._a.flat)
        return not np.any(self._a)

    def to_float(self) -> "Matrix":
        if not self.is_exact:
            return self
        a = np.empty(self.shape, dtype=np.complex128)
        for idx, x in np.ndenumerate(self._a):
            a[idx] = complex(x)
        return Matrix._wrap(a, FLOAT)

    def to_numpy(self) -> np.ndarray:
        """A writable complex128 copy (exact entries are rounded)."""
        return np.array(self.to_float()._a, dtype=np.complex128)

    def inv(self) -> "Matrix":
        if self.rows != self.cols:
            raise ShapeError("only square matrices are invertible")
        n = self.rows
        if not self.is_exact:
            if n == 0:
                return self
            try:
                out = np.linalg.inv(self._a)
            except np.linalg.LinAlgError as exc:
                raise SingularMatrixError("singular float matrix") from exc
            if not np.all(np.isfinite(out)):
                raise SingularMatrixError("singular float matrix")
            return Matrix._wrap(out, FLOAT)
        rows = [list(self._a[i]) + [ONE if j == i else ZERO for j in range(n)]
                for i in range(n)]
        pivots = _rref(rows, ncols=n)
        if len(pivots) < n:
            raise SingularMatrixError("singular exact matrix")
        a = _obj_array(n, n)
        for i in range(n):
            a[i, :] = rows[i][n:]
        return Matrix._wrap(a, EXACT)


def mat(rows: Sequence[Sequence], field: str = EXACT, shape: tuple[int, int] | None = None) -> Matrix:
    """Build a matrix from nested rows.

    ``shape`` is needed only for empty matrices, e.g. ``mat([], shape=(0, 3))``.
    Exact entries may be ints, rationals, ``"p/q"`` strings or :class:`GaussRat`.
    """
    rows = [list(r) for r in rows]
    if shape is None:
        shape = (len(rows), len(rows[0]) if rows else 0)
    r, c = shape
    if r and (len(rows) != r or any(len(row) != c for row in rows)):
        raise ShapeError("ragged rows or shape mismatch")
    if field == EXACT:
        a = _obj_array(r, c)
        for i in range(r):
            for j in range(c):
                a[i, j] = GaussRat.coerce(rows[i][j])
        return Matrix._wrap(a, EXACT)
    if field != FLOAT:
        raise FieldError(f"unknown field {field!r}")
    if r == 0 or c == 0:
        return Matrix.zeros(r, c, FLOAT)
    return Matrix._wrap(np.array(rows, dtype=np.complex128), FLOAT)


def column(entries: Sequence, field: str = EXACT) -> Matrix:
    return mat([[x] for x in entries], field, shape=(len(entries), 1))


# -- block assembly -----------------------------------------------------------

def _common_field(mats: Iterable[Matrix]) -> str:
    fields = {m.field for m in mats}
    if len(fields) > 1:
        raise FieldError("cannot mix exact and float matrices")
    return fields.pop() if fields else EXACT


def hstack(mats: Sequence[Matrix], rows: int | None = None, field: str | None = None) -> Matrix:
    mats = list(mats)
    f = field or _common_field(mats)
    if not mats:
        return Matrix.zeros(rows or 0, 0, f)
    if len({m.rows for m in mats}) != 1:
        raise ShapeError("hstack needs equal row counts")
    return Matrix._wrap(np.hstack([m.array for m in mats]), f)


def vstack(mats: Sequence[Matrix], cols: int | None = None, field: str | None = None) -> Matrix:
    mats = list(mats)
    f = field or _common_field(mats)
    if not mats:
        return Matrix.zeros(0, cols or 0, f)
    if len({m.cols for m in mats}) != 1:
        raise ShapeError("vstack needs equal column counts")
    return Matrix._wrap(np.vstack([m.array for m in mats]), f)


def block(grid: Sequence[Sequence[Matrix]]) -> Matrix:
    """Assemble a block matrix; every block must carry its true (possibly 0) size."""
    f = _common_field(m for row in grid for m in row)
    heights = [row[0].rows for row in grid]
    widths = [m.cols for m in grid[0]] if grid else []
    for row, h in zip(grid, heights):
        if [m.cols for m in row] != widths or any(m.rows != h for m in row):
            raise ShapeError("inconsistent block sizes")
    out = Matrix.zeros(sum(heights), sum(widths), f)
    a = out.array.copy()
    r0 = 0
    for row, h in zip(grid, heights):
        c0 = 0
        for m, w in zip(row, widths):
            a[r0:r0 + h, c0:c0 + w] = m.array
            c0 += w
        r0 += h
    return Matrix._wrap(a, f)


def block_diag(*mats: Matrix, field: str | None = None) -> Matrix:
    """Direct sum of matrices, honoring ``M + 0_{m0}`` and ``M + 0_{0n}``."""
    f = field or _common_field(mats)
    r = sum(m.rows for m in mats)
    c = sum(m.cols for m in mats)
    a = Matrix.zeros(r, c, f).array.copy()
    i = j = 0
    for m in mats:
        a[i:i + m.rows, j:j + m.cols] = m.array
        i += m.rows
        j += m.cols
    return Matrix._wrap(a, f)


def direct_sum(tuples: Sequence[Sequence[Matrix]]) -> tuple[Matrix, ...]:
    """Componentwise direct sum of matrix t-tuples."""
    tuples = [tuple(t) for t in tuples]
    if not tuples:
        raise PreconditionError("direct sum of nothing")
    arity = len(tuples[0])
    if any(len(t) != arity for t in tuples):
        raise ShapeError("all tuples must have the same arity")
    return tuple(block_diag(*(t[k] for t in tuples)) for k in range(arity))


def set_block(base: Matrix, r0: int, c0: int, blk: Matrix) -> Matrix:
    """Copy of ``base`` with ``blk`` written at offset ``(r0, c0)``."""
    a = base.array.copy()
    a[r0:r0 + blk.rows, c0:c0 + blk.cols] = blk.array
    return Matrix._wrap(a, base.field)


# -- primitive constructors ---------------------------------------------------

def make_jordan(k: int, lam=0, field: str = EXACT) -> Matrix:
    """k-by-k Jordan block with ``lam`` on the diagonal and ones below it."""
    if k < 1:
        raise PreconditionError("Jordan blocks have size >= 1")
    if field == EXACT:
        lam = GaussRat.coerce(lam)
        a = _obj_array(k, k)
        for i in range(k):
            a[i, i] = lam
            if i:
                a[i, i - 1] = ONE
        return Matrix._wrap(a, EXACT)
    a = np.eye(k, k, -1, dtype=np.complex128) + complex(lam) * np.eye(k)
    return Matrix._wrap(a, FLOAT)


def make_F(r: int, l: int, field: str = EXACT) -> Matrix:
    """``[I_r 0]`` of size r-by-l."""
    if not 0 <= r <= l:
        raise ShapeError(f"F_{{r,l}} needs 0 <= r <= l, got r={r}, l={l}")
    return hstack([Matrix.identity(r, field), Matrix.zeros(r, l - r, field)], rows=r, field=field)


def make_G(r: int, l: int, field: str = EXACT) -> Matrix:
    """``[0 I_r]`` of size r-by-l."""
    if not 0 <= r <= l:
        raise ShapeError(f"G_{{r,l}} needs 0 <= r <= l, got r={r}, l={l}")
    return hstack([Matrix.zeros(r, l - r, field), Matrix.identity(r, field)], rows=r, field=field)


def permutation_matrix(perm: Sequence[int], field: str = EXACT) -> Matrix:
    """Matrix whose k-th column is ``e_{perm[k]}``."""
    n = len(perm)
    if sorted(perm) != list(range(n)):
        raise PreconditionError("not a permutation")
    out = Matrix.zeros(n, n, field).array.copy()
    one = ONE if field == EXACT else 1.0
    for k, p in enumerate(perm):
        out[p, k] = one
    return Matrix._wrap(out, field)


# -- norms and ranks ------------------------------------------------------------

def frobenius_norm(M: Matrix) -> float:
    if M.is_exact:
        s = sum((x.abs2() for x in M.array.flat), _ZQ)
        return math.sqrt(float(s))
    return float(np.linalg.norm(M.array)) if M.array.size else 0.0


def _require_exact(M: Matrix):
    if not M.is_exact:
        raise FieldError("operation requires the exact field")


def _integer_rows(M: Matrix) -> list[list[int]]:
    """Rows scaled to integers; complex input is realified as [[A, -B], [B, A]]."""
    a = M.array
    complex_input = any(x.im for x in a.flat)

    def scale(vals):
        den = 1
        for v in vals:
            if v.denominator != 1:
                den = lcm(den, v.denominator)
        if den == 1:
            return [int(v) for v in vals]
        return [int(v * den) for v in vals]

    if not complex_input:
        return [scale([x.re for x in row]) for row in a]
    out = []
    for row in a:
        re_ = [x.re for x in row]
        im_ = [x.im for x in row]
        out.append(scale(re_ + [-v for v in im_]))
        out.append(scale(im_ + re_))
    return out


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


_PRIMES: list[int] = []


def _prime(k: int) -> int:
    """k-th prime below 2**31, descending; products of two fit in int64."""
    while len(_PRIMES) <= k:
        p = _PRIMES[-1] - 2 if _PRIMES else 2**31 - 1
        while not _is_prime(p):
            p -= 2
        _PRIMES.append(p)
    return _PRIMES[k]


def _rank_mod_p(R: np.ndarray, p: int) -> int:
    R = R.copy()
    nrows, ncols = R.shape
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        nz = np.flatnonzero(R[r:, c])
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            R[[r, piv]] = R[[piv, r]]
        inv = pow(int(R[r, c]), -1, p)
        R[r, c:] = (R[r, c:] * inv) % p
        idx = r + 1 + np.flatnonzero(R[r + 1:, c])
        if idx.size:
            R[idx, c:] = (R[idx, c:] - np.outer(R[idx, c], R[r, c:]) % p) % p
        r += 1
    return r


def integer_rank(rows: list[list[int]]) -> int:
    """Exact rank over Q of an integer matrix by multi-modular elimination.

    The rank modulo p never exceeds the rank over Q, and a nonzero r-by-r minor
    survives some prime once the product of the primes used exceeds the
    Hadamard bound on all minors.  So the maximum over enough primes is exact.
    """
    if not rows or not rows[0]:
        return 0
    nrows, ncols = len(rows), len(rows[0])
    full = min(nrows, ncols)
    # any minor has order <= full, so the `full` largest row norms bound it
    logs = sorted((0.5 * math.log2(sq) for sq in (sum(x * x for x in row) for row in rows) if sq),
                  reverse=True)
    bound_bits = 1.0 + sum(logs[:full])
    best, used_bits, k = 0, 0.0, 0
    while used_bits <= bound_bits:
        p = _prime(k)
        R = np.array([[x % p for x in row] for row in rows], dtype=np.int64)
        best = max(best, _rank_mod_p(R, p))
        if best == full:
            break
        used_bits += math.log2(p)
        k += 1
    return best


def bareiss_rank(rows: list[list[int]]) -> int:
    """Exact rank of an integer matrix by fraction-free Bareiss elimination."""
    a = [list(r) for r in rows]
    if not a or not a[0]:
        return 0
    nrows, ncols = len(a), len(a[0])
    prev, r = 1, 0
    for c in range(ncols):
        piv = next((i for i in range(r, nrows) if a[i][c]), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        pr = a[r]
        pk = pr[c]
        for i in range(r + 1, nrows):
            row = a[i]
            f = row[c]
            if f:
                a[i] = [(pk * x - f * y) // prev for x, y in zip(row, pr)]
            else:
                a[i] = [(pk * x) // prev for x in row]
        prev = pk
        r += 1
        if r == nrows:
            break
    return r


def exact_rank(M: Matrix) -> int:
    """Rank over the Gaussian rationals; exact, no tolerance."""
    _require_exact(M)
    if M.rows == 0 or M.cols == 0:
        return 0
    rows = _integer_rows(M)
    realified = len(rows) == 2 * M.rows and any(x.im for x in M.array.flat)
    r = integer_rank(rows)
    return r // 2 if realified else r


def numeric_rank(M: Matrix, tol: float) -> int:
    """Singular values above ``tol`` times the largest one."""
    if M.is_exact:
        raise FieldError("numeric_rank needs a float matrix; use to_float()")
    if not tol > 0:
        raise PreconditionError("tol must be positive")
    a = M.array
    if not np.all(np.isfinite(a)):
        raise PreconditionError("non-finite entries")
    if a.size == 0:
        return 0
    s = np.linalg.svd(a, compute_uv=False)
    if s[0] == 0:
        return 0
    return int(np.count_nonzero(s > tol * s[0]))


# -- exact elimination ----------------------------------------------------------------

def _rref(rows: list[list], ncols: int | None = None) -> list[int]:
    """In-place reduced row echelon form over the exact field.

    Only the first ``ncols`` columns are used for pivots.  Returns pivot columns;
    row i of the result holds pivot ``pivots[i]``.
    """
    if not rows:
        return []
    width = len(rows[0])
    ncols = width if ncols is None else ncols
    pivots: list[int] = []
    r = 0
    nrows = len(rows)
    for c in range(ncols):
        if r == nrows:
            break
        piv = next((i for i in range(r, nrows) if rows[i][c]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        pr = rows[r]
        inv = ONE / pr[c]
        nz = [j for j in range(c, width) if pr[j]]
        for j in nz:
            pr[j] = pr[j] * inv
        for i in range(nrows):
            if i == r:
                continue
            row = rows[i]
            f = row[c]
            if not f:
                continue
            for j in nz:
                row[j] = row[j] - f * pr[j]
        pivots.append(c)
        r += 1
    return pivots


def nullspace_basis(M: Matrix) -> list[Matrix]:
    """Basis of the right kernel as column matrices, verified exactly."""
    _require_exact(M)
    nrows, ncols = M.shape
    rows = [list(M.array[i]) for i in range(nrows)]
    pivots = _rref(rows) if nrows else []
    pivot_set = set(pivots)
    basis = []
    for f in range(ncols):
        if f in pivot_set:
            continue
        v = [ZERO] * ncols
        v[f] = ONE
        for i, pc in enumerate(pivots):
            v[pc] = -rows[i][f]
        basis.append(column(v))
    for v in basis:
        if not (M @ v).is_zero():
            raise InvariantViolation("nullspace vector fails M v = 0")
    return basis


def solve(A: Matrix, b: Matrix) -> Matrix | None:
    """One exact solution X of A X = b, or None when inconsistent."""
    _require_exact(A)
    if A.rows != b.rows:
        raise ShapeError("right-hand side has the wrong height")
    n = A.cols
    rows = [list(A.array[i]) + list(b.array[i]) for i in range(A.rows)]
    pivots = _rref(rows, ncols=n)
    for i in range(len(pivots), A.rows):
        if any(rows[i][n:]):
            return None
    X = Matrix.zeros(n, b.cols).array.copy()
    for i, pc in enumerate(pivots):
        X[pc, :] = rows[i][n:]
    return Matrix._wrap(X, EXACT)


def vec(M: Matrix) -> list:
    """Row-major entries."""
    return list(M.array.flat)


def unvec(values: Sequence, rows: int, cols: int, field: str = EXACT) -> Matrix:
    a = np.array(list(values), dtype=object if field == EXACT else np.complex128)
    return Matrix._wrap(a.reshape(rows, cols), field)

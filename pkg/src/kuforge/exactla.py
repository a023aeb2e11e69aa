"""Exact linear algebra over F2 and over the integers.

F2 matrices are bit-packed into numpy uint64 words, one row per word-block,
so Gaussian elimination runs word-parallel.  Integer matrices use ordinary
Python integers, so there is no overflow anywhere.  Everything downstream
(kernels of derivations, Smith normal forms of group-ring lattices, homology
of chain complexes) reduces to the routines in this module.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import prod
from typing import Iterable, Optional

import numpy as np

_WORD = 64


def _nwords(cols: int) -> int:
    return max(1, (cols + _WORD - 1) // _WORD)


class F2Matrix:
    """Dense matrix over F2, rows bit-packed into uint64 words.

    Acts on column vectors: an (m x n) matrix is a map F2^n -> F2^m.
    """

    __slots__ = ("rows", "cols", "words")

    def __init__(self, rows: int, cols: int, words: Optional[np.ndarray] = None):
        self.rows = rows
        self.cols = cols
        if words is None:
            words = np.zeros((rows, _nwords(cols)), dtype=np.uint64)
        self.words = words

    # -- construction -------------------------------------------------

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "F2Matrix":
        return cls(rows, cols)

    @classmethod
    def identity(cls, n: int) -> "F2Matrix":
        m = cls(n, n)
        for i in range(n):
            m.set(i, i, 1)
        return m

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[int]], cols: Optional[int] = None) -> "F2Matrix":
        rows = [list(r) for r in rows]
        if cols is None:
            cols = len(rows[0]) if rows else 0
        m = cls(len(rows), cols)
        for i, r in enumerate(rows):
            for j, v in enumerate(r):
                if v & 1:
                    m.set(i, j, 1)
        return m

    def copy(self) -> "F2Matrix":
        return F2Matrix(self.rows, self.cols, self.words.copy())

    # -- entry access --------------------------------------------------

    def get(self, i: int, j: int) -> int:
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexError(f"entry ({i},{j}) out of bounds for {self.rows}x{self.cols}")
        return int((self.words[i, j // _WORD] >> np.uint64(j % _WORD)) & np.uint64(1))

    def set(self, i: int, j: int, v: int) -> None:
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexError(f"entry ({i},{j}) out of bounds for {self.rows}x{self.cols}")
        mask = np.uint64(1) << np.uint64(j % _WORD)
        if v & 1:
            self.words[i, j // _WORD] |= mask
        else:
            self.words[i, j // _WORD] &= ~mask

    def to_lists(self) -> list[list[int]]:
        return [[self.get(i, j) for j in range(self.cols)] for i in range(self.rows)]

    def column(self, j: int) -> list[int]:
        return [self.get(i, j) for i in range(self.rows)]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, F2Matrix):
            return NotImplemented
        return (
            self.rows == other.rows
            and self.cols == other.cols
            and bool(np.array_equal(self.words, other.words))
        )

    def __repr__(self) -> str:
        return f"F2Matrix({self.rows}x{self.cols})"

    def is_zero(self) -> bool:
        return not self.words.any()

    # -- algebra -------------------------------------------------------

    def __add__(self, other: "F2Matrix") -> "F2Matrix":
        assert self.rows == other.rows and self.cols == other.cols
        return F2Matrix(self.rows, self.cols, self.words ^ other.words)

    def mul(self, other: "F2Matrix") -> "F2Matrix":
        """Matrix product self @ other over F2."""
        assert self.cols == other.rows, f"shape mismatch {self.cols} vs {other.rows}"
        out = np.zeros((self.rows, other.words.shape[1]), dtype=np.uint64)
        for i in range(self.rows):
            acc = None
            row = self.words[i]
            for w in range(self.words.shape[1]):
                word = int(row[w])
                while word:
                    k = w * _WORD + (word & -word).bit_length() - 1
                    word &= word - 1
                    acc = other.words[k] if acc is None else acc ^ other.words[k]
            if acc is not None:
                out[i] = acc
        return F2Matrix(self.rows, other.cols, out)

    def transpose(self) -> "F2Matrix":
        t = F2Matrix(self.cols, self.rows)
        for i in range(self.rows):
            row = self.words[i]
            for w in range(self.words.shape[1]):
                word = int(row[w])
                while word:
                    j = w * _WORD + (word & -word).bit_length() - 1
                    word &= word - 1
                    t.set(j, i, 1)
        return t

    @staticmethod
    def hstack(mats: list["F2Matrix"]) -> "F2Matrix":
        mats = [m for m in mats]
        assert mats
        rows = mats[0].rows
        assert all(m.rows == rows for m in mats)
        total = sum(m.cols for m in mats)
        out = F2Matrix(rows, total)
        off = 0
        for m in mats:
            for i in range(rows):
                row = m.words[i]
                for w in range(m.words.shape[1]):
                    word = int(row[w])
                    while word:
                        j = w * _WORD + (word & -word).bit_length() - 1
                        word &= word - 1
                        out.set(i, off + j, 1)
            off += m.cols
        return out

    @staticmethod
    def vstack(mats: list["F2Matrix"]) -> "F2Matrix":
        assert mats
        cols = mats[0].cols
        assert all(m.cols == cols for m in mats)
        words = np.concatenate([m.words for m in mats], axis=0)
        return F2Matrix(sum(m.rows for m in mats), cols, words)

    # -- elimination ---------------------------------------------------

    def _row_reduce(self, limit_cols: Optional[int] = None) -> tuple[int, list[int]]:
        """In-place row echelon reduction; returns (rank, pivot column list).

        Only columns < limit_cols are used for pivoting, so augmented blocks
        ride along untouched.
        """
        ncols = self.cols if limit_cols is None else limit_cols
        words = self.words
        rank = 0
        pivots: list[int] = []
        for j in range(ncols):
            w, b = j // _WORD, np.uint64(j % _WORD)
            col = (words[rank:, w] >> b) & np.uint64(1)
            nz = np.nonzero(col)[0]
            if nz.size == 0:
                continue
            piv = rank + int(nz[0])
            if piv != rank:
                words[[rank, piv]] = words[[piv, rank]]
            bits = (words[:, w] >> b) & np.uint64(1)
            bits[rank] = 0
            hit = np.nonzero(bits)[0]
            if hit.size:
                words[hit] ^= words[rank]
            pivots.append(j)
            rank += 1
            if rank == self.rows:
                break
        return rank, pivots

    def rank(self) -> int:
        """Rank by forward elimination; touches only the remaining block."""
        if self.rows == 0 or self.cols == 0:
            return 0
        words = self.words.copy()
        nrows = self.rows
        rank = 0
        for j in range(self.cols):
            w, b = j // _WORD, np.uint64(j % _WORD)
            col = (words[rank:, w] >> b) & np.uint64(1)
            nz = np.nonzero(col)[0]
            if nz.size == 0:
                continue
            piv = rank + int(nz[0])
            if piv != rank:
                words[[rank, piv]] = words[[piv, rank]]
            if nz.size > 1:
                hit = rank + nz[1:]
                words[hit, w:] ^= words[rank, w:]
            rank += 1
            if rank == nrows:
                break
        return rank


def f2_rank(m: F2Matrix) -> int:
    return m.rank()


def f2_decompose(m: F2Matrix) -> tuple[int, F2Matrix, F2Matrix]:
    """Rank, kernel basis and image basis of an F2 matrix.

    Returns (rank, K, B) where the columns of K span ker(m), m.mul(K) = 0,
    K has cols = nullity, and the columns of B are the pivot columns of m
    (a basis of the column space).
    """
    # Row-reduce the transpose augmented by an identity: zero rows of the
    # reduced transpose correspond to kernel vectors recorded in the
    # augmentation.
    n = m.cols
    t = m.transpose()
    aug = F2Matrix.hstack([t, F2Matrix.identity(n)]) if n else F2Matrix(0, 0)
    if n == 0:
        return 0, F2Matrix(0, 0), F2Matrix(m.rows, 0)
    aug._row_reduce(limit_cols=m.rows)
    kernel_rows = []
    rank = 0
    for i in range(n):
        zero_lead = True
        for w in range(_nwords(m.rows) if m.rows else 0):
            word = int(aug.words[i, w])
            if m.rows % _WORD and w == _nwords(m.rows) - 1:
                word &= (1 << (m.rows % _WORD)) - 1
            if word:
                zero_lead = False
                break
        if zero_lead:
            kernel_rows.append([aug.get(i, m.rows + j) for j in range(n)])
        else:
            rank += 1
    kernel = F2Matrix.from_rows(kernel_rows, cols=n).transpose() if kernel_rows else F2Matrix(n, 0)
    # pivot columns of m give an image basis
    probe = m.copy()
    _, pivots = probe._row_reduce()
    image = F2Matrix(m.rows, len(pivots))
    for k, j in enumerate(pivots):
        for i in range(m.rows):
            if m.get(i, j):
                image.set(i, k, 1)
    assert rank == len(pivots)
    return rank, kernel, image


def f2_solve(m: F2Matrix, rhs: F2Matrix) -> Optional[F2Matrix]:
    """Solve m @ X = rhs over F2; returns X or None if inconsistent."""
    aug = F2Matrix.hstack([m, rhs]) if m.cols + rhs.cols else F2Matrix(m.rows, 0)
    if m.cols == 0:
        return None if not rhs.is_zero() else F2Matrix(0, rhs.cols)
    rank, pivots = aug._row_reduce(limit_cols=m.cols)
    # consistency: no leading entry in the rhs block below the pivot rows
    for i in range(rank, m.rows):
        for j in range(rhs.cols):
            if aug.get(i, m.cols + j):
                return None
    x = F2Matrix(m.cols, rhs.cols)
    for r, pc in enumerate(pivots):
        for j in range(rhs.cols):
            if aug.get(r, m.cols + j):
                x.set(pc, j, 1)
    # back substitution is unnecessary: _row_reduce produces reduced echelon
    return x


def f2_left_inverse(m: F2Matrix) -> F2Matrix:
    """Left inverse of a matrix with independent columns (P with P m = I)."""
    x = f2_solve(m.transpose(), F2Matrix.identity(m.cols))
    assert x is not None, "columns are dependent"
    return x.transpose()


# -- integer matrices ------------------------------------------------------


@dataclass
class IntMatrix:
    """Dense integer matrix with arbitrary-precision entries."""

    entries: list[list[int]]

    @property
    def rows(self) -> int:
        return len(self.entries)

    @property
    def cols(self) -> int:
        return len(self.entries[0]) if self.entries else 0

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "IntMatrix":
        return cls([[0] * cols for _ in range(rows)])

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        m = cls.zeros(n, n)
        for i in range(n):
            m.entries[i][i] = 1
        return m

    def copy(self) -> "IntMatrix":
        return IntMatrix([row[:] for row in self.entries])

    def mul(self, other: "IntMatrix") -> "IntMatrix":
        assert self.cols == other.rows
        out = IntMatrix.zeros(self.rows, other.cols)
        for i in range(self.rows):
            row = self.entries[i]
            orow = out.entries[i]
            for k, a in enumerate(row):
                if a:
                    brow = other.entries[k]
                    for j, b in enumerate(brow):
                        if b:
                            orow[j] += a * b
        return out

    def transpose(self) -> "IntMatrix":
        return IntMatrix([[self.entries[i][j] for i in range(self.rows)] for j in range(self.cols)])

    def is_zero(self) -> bool:
        return all(v == 0 for row in self.entries for v in row)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, IntMatrix):
            return NotImplemented
        return self.entries == other.entries

    def det(self) -> int:
        """Determinant by fraction-free (Bareiss) elimination."""
        assert self.rows == self.cols
        n = self.rows
        if n == 0:
            return 1
        a = [row[:] for row in self.entries]
        sign = 1
        prev = 1
        for k in range(n - 1):
            if a[k][k] == 0:
                for i in range(k + 1, n):
                    if a[i][k]:
                        a[k], a[i] = a[i], a[k]
                        sign = -sign
                        break
                else:
                    return 0
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
                a[i][k] = 0
            prev = a[k][k]
        return sign * a[n - 1][n - 1]


def smith_normal_form(m: IntMatrix) -> tuple[IntMatrix, IntMatrix, IntMatrix]:
    """Smith normal form: returns (D, U, V) with U m V = D.

    D is diagonal with a divisibility chain of nonnegative entries, and U, V
    are unimodular.  Pivoting always selects a minimal nonzero |entry|, which
    keeps intermediate growth moderate.
    """
    a = m.copy()
    nr, nc = a.rows, a.cols
    u = IntMatrix.identity(nr)
    v = IntMatrix.identity(nc)
    ae, ue, ve = a.entries, u.entries, v.entries

    def swap_rows(i, j):
        ae[i], ae[j] = ae[j], ae[i]
        ue[i], ue[j] = ue[j], ue[i]

    def swap_cols(i, j):
        for row in ae:
            row[i], row[j] = row[j], row[i]
        for row in ve:
            row[i], row[j] = row[j], row[i]

    def addmul_row(dst, src, c):
        if c:
            ae[dst] = [x + c * y for x, y in zip(ae[dst], ae[src])]
            ue[dst] = [x + c * y for x, y in zip(ue[dst], ue[src])]

    def addmul_col(dst, src, c):
        if c:
            for row in ae:
                row[dst] += c * row[src]
            for row in ve:
                row[dst] += c * row[src]

    def negate_row(i):
        ae[i] = [-x for x in ae[i]]
        ue[i] = [-x for x in ue[i]]

    def diagonalize_from(t0: int) -> None:
        t = t0
        while True:
            best = None
            for i in range(t, nr):
                for j in range(t, nc):
                    e = ae[i][j]
                    if e and (best is None or abs(e) < abs(ae[best[0]][best[1]])):
                        best = (i, j)
            if best is None:
                break
            swap_rows(t, best[0])
            swap_cols(t, best[1])
            if ae[t][t] < 0:
                negate_row(t)
            # clear row and column t, restarting on any remainder (smaller)
            dirty = True
            while dirty:
                dirty = False
                for i in range(t + 1, nr):
                    if ae[i][t]:
                        addmul_row(i, t, -(ae[i][t] // ae[t][t]))
                        if ae[i][t]:
                            swap_rows(t, i)
                            if ae[t][t] < 0:
                                negate_row(t)
                            dirty = True
                for j in range(t + 1, nc):
                    if ae[t][j]:
                        addmul_col(j, t, -(ae[t][j] // ae[t][t]))
                        if ae[t][j]:
                            swap_cols(t, j)
                            dirty = True
            t += 1

    diagonalize_from(0)

    # enforce the divisibility chain: folding a violating column back in and
    # rediagonalizing replaces (d_i, d_{i+1}) by (gcd, lcm)
    n = min(nr, nc)
    while True:
        bad = None
        for i in range(n - 1):
            d1, d2 = ae[i][i], ae[i + 1][i + 1]
            if d1 and d2 and d2 % d1 != 0:
                bad = i
                break
        if bad is None:
            break
        addmul_col(bad, bad + 1, 1)
        diagonalize_from(bad)
    for i in range(n):
        if ae[i][i] < 0:
            negate_row(i)
    return a, u, v


def int_rank(m: IntMatrix) -> int:
    d, _, _ = smith_normal_form(m)
    return sum(1 for i in range(min(d.rows, d.cols)) if d.entries[i][i] != 0)


def hermite_column_basis(m: IntMatrix) -> IntMatrix:
    """Column Hermite-style basis of the lattice spanned by the columns.

    Returns a matrix whose columns are a basis (independent), in column
    echelon form, spanning the same lattice over the integers.
    """
    cols = [[m.entries[i][j] for i in range(m.rows)] for j in range(m.cols)]
    cols = [c for c in cols if any(c)]
    basis: list[list[int]] = []
    for c in cols:
        basis.append(c)
    if not basis:
        return IntMatrix.zeros(m.rows, 0)
    # integer column echelon via repeated gcd elimination per pivot row
    nrows = m.rows
    work = basis
    out: list[list[int]] = []
    row = 0
    while row < nrows and work:
        # reduce all columns so at most one has a nonzero in `row`
        while True:
            nz = [c for c in work if c[row] != 0]
            if len(nz) <= 1:
                break
            nz.sort(key=lambda c: abs(c[row]))
            c0 = nz[0]
            for c in nz[1:]:
                q = c[row] // c0[row]
                for i in range(nrows):
                    c[i] -= q * c0[i]
        pivot = None
        rest = []
        for c in work:
            if c[row] != 0 and pivot is None:
                pivot = c
            else:
                rest.append(c)
        if pivot is not None:
            if next((x for x in pivot if x != 0), 0) < 0:
                pivot = [-x for x in pivot]
            out.append(pivot)
        work = [c for c in rest if any(c)]
        row += 1
    return IntMatrix([[c[i] for c in out] for i in range(nrows)])


def int_solve(m: IntMatrix, b: list[int]) -> Optional[list[int]]:
    """Integer solution x of m x = b, or None."""
    d, u, v = smith_normal_form(m)
    # m = U^-1 D V^-1, solve D y = U b then x = V y
    ub = [sum(u.entries[i][k] * b[k] for k in range(len(b))) for i in range(m.rows)]
    n = min(d.rows, d.cols)
    y = [0] * d.cols
    for i in range(d.rows):
        di = d.entries[i][i] if i < n else 0
        if di == 0:
            if i < len(ub) and ub[i] != 0:
                return None
        else:
            if ub[i] % di != 0:
                return None
            y[i] = ub[i] // di
    for i in range(n, d.rows):
        if ub[i] != 0:
            return None
    return [sum(v.entries[i][k] * y[k] for k in range(d.cols)) for i in range(m.cols)]


def int_kernel(m: IntMatrix) -> IntMatrix:
    """Basis of the integer kernel lattice {x : m x = 0}, as columns."""
    d, u, v = smith_normal_form(m)
    n = min(d.rows, d.cols)
    free = [j for j in range(m.cols) if j >= n or d.entries[j][j] == 0]
    cols = []
    for j in free:
        cols.append([v.entries[i][j] for i in range(m.cols)])
    return IntMatrix([[c[i] for c in cols] for i in range(m.cols)]) if cols else IntMatrix.zeros(m.cols, 0)


# -- finite abelian groups and graded dimensions ---------------------------


@dataclass(frozen=True)
class FinAbGroup:
    """Finitely generated abelian group as invariant factors plus free rank."""

    invariant_factors: tuple[int, ...] = ()
    free_rank: int = 0

    def __post_init__(self):
        for d in self.invariant_factors:
            assert d >= 2, f"invariant factor {d} < 2"
        for a, b in zip(self.invariant_factors, self.invariant_factors[1:]):
            assert b % a == 0, f"divisibility chain violated: {a} does not divide {b}"
        assert self.free_rank >= 0

    @classmethod
    def from_diagonal(cls, diag: Iterable[int], free_rank: int = 0) -> "FinAbGroup":
        return cls(tuple(sorted(abs(d) for d in diag if abs(d) > 1)), free_rank)

    @property
    def order(self) -> Optional[int]:
        if self.free_rank:
            return None
        return prod(self.invariant_factors) if self.invariant_factors else 1

    @property
    def log2_order(self) -> int:
        assert self.free_rank == 0
        o = self.order
        l = o.bit_length() - 1
        assert o == 1 << l, f"order {o} is not a power of two"
        return l

    @property
    def two_torsion_dim(self) -> int:
        return sum(1 for d in self.invariant_factors if d % 2 == 0)

    @property
    def mod2_dim(self) -> int:
        return self.two_torsion_dim + self.free_rank

    def is_trivial(self) -> bool:
        return not self.invariant_factors and self.free_rank == 0

    def is_elementary_2(self) -> bool:
        return self.free_rank == 0 and all(d == 2 for d in self.invariant_factors)

    def __str__(self) -> str:
        parts = [f"Z/{d}" for d in self.invariant_factors]
        if self.free_rank == 1:
            parts.append("Z")
        elif self.free_rank > 1:
            parts.append(f"Z^{self.free_rank}")
        return " + ".join(parts) if parts else "0"


def cokernel_structure(m: IntMatrix) -> FinAbGroup:
    """Structure of Z^rows / (column span of m)."""
    if m.cols == 0:
        return FinAbGroup((), m.rows)
    d, _, _ = smith_normal_form(m)
    n = min(d.rows, d.cols)
    diag = [d.entries[i][i] for i in range(n)]
    rank = sum(1 for x in diag if x != 0)
    return FinAbGroup.from_diagonal(diag, m.rows - rank)


class GradedDim:
    """Finitely supported map degree -> nonnegative dimension."""

    __slots__ = ("_d",)

    def __init__(self, data: Optional[dict[int, int]] = None):
        self._d = {k: v for k, v in (data or {}).items() if v}
        assert all(v >= 0 for v in self._d.values())

    def get(self, deg: int) -> int:
        return self._d.get(deg, 0)

    def degrees(self) -> list[int]:
        return sorted(self._d)

    def items(self) -> list[tuple[int, int]]:
        return sorted(self._d.items())

    def shift(self, k: int) -> "GradedDim":
        return GradedDim({d + k: v for d, v in self._d.items()})

    def total(self) -> int:
        return sum(self._d.values())

    def restrict(self, lo: int, hi: int) -> "GradedDim":
        return GradedDim({d: v for d, v in self._d.items() if lo <= d <= hi})

    def __add__(self, other: "GradedDim") -> "GradedDim":
        out = dict(self._d)
        for d, v in other._d.items():
            out[d] = out.get(d, 0) + v
        return GradedDim(out)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GradedDim):
            return NotImplemented
        return self._d == other._d

    def __bool__(self) -> bool:
        return bool(self._d)

    def __repr__(self) -> str:
        return "GradedDim({" + ", ".join(f"{d}: {v}" for d, v in self.items()) + "})"


def shift_matched(a: GradedDim, b: GradedDim) -> Optional[int]:
    """Shift k with a == b.shift(k), or None.

    Used by table comparators where only relative internal degrees are
    pinned down by the constructions.
    """
    if not a and not b:
        return 0
    if not a or not b:
        return None
    if a.total() != b.total():
        return None
    k = a.degrees()[0] - b.degrees()[0]
    return k if a == b.shift(k) else None


@dataclass
class GradedMap:
    """Degreewise F2 linear map between graded spaces.

    `mats[d]` maps the degree-d slice of the source to the degree
    (d + degree_shift) slice of the target.
    """

    source_dims: dict[int, int]
    target_dims: dict[int, int]
    degree_shift: int
    mats: dict[int, F2Matrix]

    def __post_init__(self):
        for d, m in self.mats.items():
            assert m.cols == self.source_dims.get(d, 0), f"degree {d}: cols mismatch"
            assert m.rows == self.target_dims.get(d + self.degree_shift, 0), f"degree {d}: rows mismatch"

    def mat(self, d: int) -> F2Matrix:
        if d in self.mats:
            return self.mats[d]
        return F2Matrix.zeros(self.target_dims.get(d + self.degree_shift, 0), self.source_dims.get(d, 0))


class CompositionNonzeroError(ValueError):
    def __init__(self, degree: int):
        super().__init__(f"composite map is nonzero in degree {degree}")
        self.degree = degree


def homology_dims(d_in: GradedMap, d_out: GradedMap) -> GradedDim:
    """Degreewise dim ker(d_out) - rank(d_in) for composable maps with zero composite."""
    assert d_in.target_dims == d_out.source_dims
    degs = set(d_out.source_dims)
    for d in d_in.mats:
        degs.add(d + d_in.degree_shift)
    out: dict[int, int] = {}
    for d in sorted(degs):
        mid = d_out.source_dims.get(d, 0)
        m_in = d_in.mat(d - d_in.degree_shift)
        m_out = d_out.mat(d)
        if m_in.cols and m_out.rows:
            comp = m_out.mul(m_in)
            if not comp.is_zero():
                raise CompositionNonzeroError(d)
        h = (mid - m_out.rank()) - m_in.rank()
        assert h >= 0
        if h:
            out[d] = h
    return GradedDim(out)

"""Monomial models for symmetric and exterior powers of F2^r.

A degree-n symmetric-power slice is the span of exponent vectors, an
exterior slice is the span of subsets of {0..r-1}, and mixed slices are
pairs (mask, exponent vector).  All enumeration orders are lexicographic so
matrices and golden tables are reproducible byte for byte.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from math import comb

from .exactla import F2Matrix, GradedMap

ExpVec = tuple[int, ...]
ExtMask = tuple[int, ...]


@dataclass(frozen=True)
class BasisDescriptor:
    """Identifies the ambient graded slice a matrix is written against."""

    kind: str  # "sym" | "ext_sym"
    rank: int
    ext_degree: int = 0


@lru_cache(maxsize=None)
def sym_basis(r: int, n: int) -> tuple[ExpVec, ...]:
    """Lexicographically sorted exponent vectors of total degree n in r variables."""
    assert r >= 0 and isinstance(n, int)
    if n < 0:
        return ()
    if r == 0:
        return ((),) if n == 0 else ()

    def gen(rem_vars: int, rem_deg: int) -> list[ExpVec]:
        if rem_vars == 1:
            return [(rem_deg,)]
        out = []
        for e in range(rem_deg + 1):
            out.extend((e,) + tail for tail in gen(rem_vars - 1, rem_deg - e))
        return out

    basis = tuple(sorted(gen(r, n)))
    assert len(basis) == comb(n + r - 1, r - 1)
    return basis


@lru_cache(maxsize=None)
def sym_index(r: int, n: int) -> dict[ExpVec, int]:
    return {e: i for i, e in enumerate(sym_basis(r, n))}


def sym_dim(r: int, n: int) -> int:
    if n < 0:
        return 0
    if r == 0:
        return 1 if n == 0 else 0
    return comb(n + r - 1, r - 1)


@lru_cache(maxsize=None)
def ext_basis(r: int, a: int) -> tuple[ExtMask, ...]:
    """Size-a subsets of {0..r-1} in lexicographic order."""
    if a < 0 or a > r:
        return ()
    return tuple(combinations(range(r), a))


def ext_dim(r: int, a: int) -> int:
    return comb(r, a) if 0 <= a <= r else 0


@lru_cache(maxsize=None)
def ext_sym_basis(r: int, a: int, b: int) -> tuple[tuple[ExtMask, ExpVec], ...]:
    """Basis of the (exterior a, symmetric b) slice, lexicographic in both factors."""
    if a < 0 or a > r or b < 0:
        return ()
    return tuple((m, e) for m in ext_basis(r, a) for e in sym_basis(r, b))


@lru_cache(maxsize=None)
def ext_sym_index(r: int, a: int, b: int) -> dict[tuple[ExtMask, ExpVec], int]:
    return {v: i for i, v in enumerate(ext_sym_basis(r, a, b))}


def ext_sym_dim(r: int, a: int, b: int) -> int:
    return ext_dim(r, a) * sym_dim(r, b)


def monomial_degree(e: ExpVec) -> int:
    return sum(e)


def odd_support(e: ExpVec) -> tuple[int, ...]:
    return tuple(i for i, v in enumerate(e) if v % 2)


def frobenius(r: int, n: int) -> GradedMap:
    """Squaring map on the degree-n slice: exponent vectors are doubled."""
    src = sym_basis(r, n)
    tgt = sym_index(r, 2 * n)
    m = F2Matrix(sym_dim(r, 2 * n), len(src))
    for j, e in enumerate(src):
        m.set(tgt[tuple(2 * v for v in e)], j, 1)
    return GradedMap({n: len(src)}, {2 * n: m.rows}, n, {n: m})


def filtration_basis(r: int, t: int, n: int) -> tuple[ExpVec, ...]:
    """Monomials of degree n with at most t odd exponents.

    This is the degree-n slice of the t-th stage of the filtration generated
    by products of at most t generators with the subalgebra of squares; the
    two descriptions are checked against each other in the tests.
    """
    assert t >= 0
    return tuple(e for e in sym_basis(r, n) if len(odd_support(e)) <= t)


def trunc_sym_dim(r: int, i: int, n: int) -> int:
    """Dimension of degree n of the quotient by all (2^i)-th powers.

    Counts monomials with every exponent < 2^i.
    """
    assert i >= 0
    if n < 0:
        return 0
    cap = (1 << i) - 1
    if cap == 0:
        return 1 if n == 0 else 0
    if n > cap * r:
        return 0
    # inclusion-exclusion over variables exceeding the cap
    total = 0
    for k in range(r + 1):
        red = n - k * (cap + 1)
        if red < 0:
            break
        total += (-1) ** k * comb(r, k) * sym_dim(r, red)
    assert total >= 0
    return total


def cumulative_binomial(r: int, n: int) -> int:
    """Sum of C(r, j) for 1 <= j <= min(n, r)."""
    if n <= 0:
        return 0
    return sum(comb(r, j) for j in range(1, min(n, r) + 1))

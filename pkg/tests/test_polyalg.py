from math import comb

import pytest

from kuforge.exactla import F2Matrix, f2_decompose, f2_solve
from kuforge.polyalg import (
    cumulative_binomial,
    ext_sym_basis,
    filtration_basis,
    frobenius,
    sym_basis,
    sym_dim,
    sym_index,
    trunc_sym_dim,
)


def test_sym_basis_counts():
    assert sym_basis(1, 5) == ((5,),)
    assert len(sym_basis(2, 3)) == 4
    assert sym_basis(4, 0) == ((0, 0, 0, 0),)
    for r in range(1, 5):
        for n in range(0, 8):
            assert len(sym_basis(r, n)) == comb(n + r - 1, r - 1)
            assert list(sym_basis(r, n)) == sorted(sym_basis(r, n))


def test_ext_sym_counts():
    assert ext_sym_basis(2, 2, 0) == (((0, 1), (0, 0)),)
    assert len(ext_sym_basis(3, 1, 1)) == 9
    assert ext_sym_basis(2, 3, 5) == ()


def test_frobenius_injective():
    for r, n in [(1, 1), (2, 2), (3, 2)]:
        f = frobenius(r, n)
        m = f.mats[n]
        assert m.rank() == sym_dim(r, n)
    # x -> x^2 and xy -> x^2 y^2 explicitly
    f = frobenius(1, 1)
    assert f.mats[1].to_lists() == [[0], [0], [1]][2 * 0 : 1] or f.mats[1].get(sym_index(1, 2)[(2,)], 0) == 1
    f2 = frobenius(2, 2)
    j = sym_index(2, 2)[(1, 1)]
    assert f2.mats[2].get(sym_index(2, 4)[(2, 2)], j) == 1


def test_filtration_examples():
    assert filtration_basis(2, 0, 2) == ((0, 2), (2, 0))
    assert filtration_basis(2, 2, 5) == sym_basis(2, 5)
    # recomputed by the odd-exponent-count oracle: all four degree-3
    # monomials in two variables have exactly one odd exponent
    assert len(filtration_basis(2, 1, 3)) == 4


def filtration_span_oracle(r, t, n):
    """Span of products (degree <= t monomial) * (square), degree n."""
    amb = sym_dim(r, n)
    idx = sym_index(r, n)
    cols = set()
    for j in range(0, t + 1):
        if (n - j) % 2 or n - j < 0:
            continue
        for m in sym_basis(r, j):
            for g in sym_basis(r, (n - j) // 2):
                e = tuple(a + 2 * b for a, b in zip(m, g))
                cols.add(idx[e])
    mat = F2Matrix(amb, len(cols))
    for c, rowi in enumerate(sorted(cols)):
        mat.set(rowi, c, 1)
    return mat


@pytest.mark.parametrize("r", [1, 2, 3])
def test_filtration_matches_product_span(r):
    for n in range(0, 8):
        for t in range(0, r + 2):
            basis = filtration_basis(r, t, n)
            oracle = filtration_span_oracle(r, t, n)
            assert len(basis) == oracle.rank()
            idx = sym_index(r, n)
            sub = F2Matrix(sym_dim(r, n), len(basis))
            for c, e in enumerate(basis):
                sub.set(idx[e], c, 1)
            # same span, not just same dimension
            assert f2_solve(sub, oracle) is not None


@pytest.mark.parametrize("r", [1, 2, 3, 4])
def test_filtration_quotient_dimension(r):
    for n in range(0, 9):
        for t in range(1, r + 1):
            diff = len(filtration_basis(r, t, n)) - len(filtration_basis(r, t - 1, n))
            if (n - t) % 2 == 0 and n >= t:
                assert diff == comb(r, t) * sym_dim(r, (n - t) // 2)
            else:
                assert diff == 0


def test_frobenius_image_equals_stage_zero():
    for r in [1, 2, 3]:
        for n in range(0, 5):
            img = frobenius(r, n).mats[n]
            f0 = filtration_basis(r, 0, 2 * n)
            idx = sym_index(r, 2 * n)
            expected = sorted(idx[e] for e in f0)
            got = sorted(i for i in range(img.rows) if any(img.get(i, j) for j in range(img.cols)))
            assert got == expected


def test_trunc_sym_dims():
    for r in [1, 2, 3, 4]:
        assert trunc_sym_dim(r, 0, 0) == 1
        for n in range(1, 6):
            assert trunc_sym_dim(r, 0, n) == 0
    assert trunc_sym_dim(2, 1, 2) == 1
    for r in [1, 2, 3, 4]:
        for d in range(0, 6):
            assert trunc_sym_dim(r, 1, d) == comb(r, d)
    # brute-force cross-check
    for r in [1, 2, 3]:
        for i in [0, 1, 2]:
            for n in range(0, 9):
                brute = sum(1 for e in sym_basis(r, n) if all(v < (1 << i) for v in e))
                assert trunc_sym_dim(r, i, n) == brute


def test_cumulative_binomial():
    assert cumulative_binomial(2, 1) == 2
    assert cumulative_binomial(2, 2) == 3
    assert cumulative_binomial(3, 2) == 6
    assert cumulative_binomial(1, 9) == 1
    assert cumulative_binomial(4, 0) == 0

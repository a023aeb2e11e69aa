from math import comb

import pytest

from kuforge.exactla import FinAbGroup, IntMatrix, int_solve
from kuforge.groupring import (
    aug_power_lattice,
    completion_inclusion_check,
    difference_element,
    expected_quotient_log2_order,
    filtration_subquotient,
    from_difference_coords,
    head_dim,
    mod2_power_dim,
    mod2_reduction_dim,
    ring_multiply,
    rn_group,
    to_difference_coords,
    two_torsion_dim,
)
from kuforge.polyalg import cumulative_binomial


def test_rank_one_square():
    # ([1] - [0])^2 = -2([1] - [0]) in Z[Z/2]
    d = difference_element(1)
    sq = ring_multiply(1, d, d)
    assert to_difference_coords(1, sq) == [-2]
    lat = aug_power_lattice(1, 2)
    assert lat.basis.entries == [[2]]


def test_power_one_is_everything():
    for r in [1, 2, 3]:
        lat = aug_power_lattice(r, 1)
        assert lat.basis.cols == (1 << r) - 1


def test_rank_two_second_power_index():
    lat1 = aug_power_lattice(2, 1)
    lat2 = aug_power_lattice(2, 2)
    # index = order of the first filtration layer = 2^dim of the layer
    d = lat2.basis
    assert abs(IntMatrix(d.entries).det()) == 4


def test_chain_inclusions():
    for r in [1, 2, 3]:
        for n in range(1, 5):
            ln = aug_power_lattice(r, n)
            ln1 = aug_power_lattice(r, n + 1)
            amb = ln.ambient_dim
            for j in range(ln1.basis.cols):
                col = [ln1.basis.entries[i][j] for i in range(amb)]
                assert ln.contains(col)
            for j in range(ln.basis.cols):
                col = [2 * ln.basis.entries[i][j] for i in range(amb)]
                assert ln1.contains(col)


def test_rn_rank_one():
    for n in range(1, 11):
        assert rn_group(1, n) == FinAbGroup((1 << n,))


def test_rn_small_ranks():
    assert rn_group(2, 1) == FinAbGroup((2, 2))
    g = rn_group(2, 2)
    assert g.free_rank == 0
    assert g.log2_order == 5
    assert g.two_torsion_dim == 3
    for r in [2, 3]:
        for n in range(1, 5 if r == 3 else 7):
            g = rn_group(r, n)
            assert g.free_rank == 0
            assert g.log2_order == expected_quotient_log2_order(r, n)
            assert g.two_torsion_dim == cumulative_binomial(r, n)
            assert head_dim(r, n) == cumulative_binomial(r, n)
            # annihilated by 2^(n+1)
            assert all((1 << (n + 1)) % d == 0 for d in g.invariant_factors)


def test_filtration_subquotients_elementary():
    assert filtration_subquotient(2, 1) == FinAbGroup((2, 2))
    assert filtration_subquotient(3, 2) == FinAbGroup((2,) * 6)
    for n in range(1, 7):
        assert filtration_subquotient(1, n) == FinAbGroup((2,))
    for r in [2, 3]:
        for n in range(1, 5):
            g = filtration_subquotient(r, n)
            assert g.is_elementary_2()
            assert len(g.invariant_factors) == cumulative_binomial(r, n)


def test_two_torsion():
    for n in range(1, 6):
        assert two_torsion_dim(1, n) == 1
    assert two_torsion_dim(2, 2) == 3
    for r in [2, 3]:
        assert two_torsion_dim(r, 1) == r


def test_completion_inclusions():
    for k in range(1, 5):
        assert completion_inclusion_check(1, k)
    assert completion_inclusion_check(2, 1)
    assert completion_inclusion_check(3, 2)
    for n in [2, 3]:
        for k in [1, 2, 3]:
            assert completion_inclusion_check(n, k)


def test_mod2_reduction():
    # image of the integral power in F2[V] has the dimension of the
    # mod-2 power ideal
    for r in [1, 2, 3]:
        for n in range(1, r + 3):
            expected = sum(comb(r, j) for j in range(n, r + 1))
            assert mod2_power_dim(r, n) == expected
            assert mod2_reduction_dim(r, n) == expected

import pytest

from kuforge.exactla import FinAbGroup
from kuforge.groupring import rn_group
from kuforge.kumod import (
    hz_cohom_table,
    hz_hom_table,
    kernel_products_stay_in_kernel,
    ku_cohom_table,
    ku_hom_free_rank,
    ku_hom_log2_order,
    ku_hom_table,
    qfrak_tables,
)
from kuforge.milnor import k_dim, l_dim
from kuforge.polyalg import cumulative_binomial, sym_dim


def test_hz_cohom_values():
    t = hz_cohom_table(2, 6)
    assert t.get(1) == 0
    assert t.get(2) == 2
    assert hz_cohom_table(3, 4).get(3) == 3
    assert hz_cohom_table(1, 8) == hz_cohom_table(1, 8)


def test_hz_hom_values():
    assert hz_hom_table(1, 4).get(1) == 1
    for r in [2, 3]:
        assert hz_hom_table(r, 4).get(2) == k_dim(r, 3)


def test_qfrak_rank_one_vanishes():
    q = qfrak_tables(1, 12)
    assert not q.cohom_im
    assert not q.hom_im


@pytest.mark.parametrize("r", [1, 2, 3])
def test_qfrak_homology_layers(r):
    q = qfrak_tables(r, 10)
    for d in range(1, 5):
        n = 2 * d
        assert q.cohom_ker.get(n) - q.cohom_im.get(n) == cumulative_binomial(r, d)
        m = 2 * d - 1
        assert q.hom_ker.get(m) - q.hom_im.get(m) == cumulative_binomial(r, d)


@pytest.mark.parametrize("r", [1, 2, 3])
def test_ku_cohom_table(r):
    t = ku_cohom_table(r, 12)
    for n in range(1, 13):
        row = t.row(n)
        if n % 2 == 0:
            assert row.modv_dim == row.torsion_dim + row.cotorsion_modv_dim
            assert row.z2_free_rank == (1 << r) - 1
        else:
            assert row.cotorsion_modv_dim == 0
            assert row.torsion_dim == row.modv_dim
    if r == 1:
        assert all(row.torsion_dim == 0 for row in t.rows)


def test_ku_hom_rank_one():
    t = ku_hom_table(1, 16)
    for d in range(1, 9):
        assert t.row(2 * d - 1).cotorsion == FinAbGroup(((1 << d),))
    assert all(row.torsion_dim == 0 for row in t.rows)


@pytest.mark.parametrize("r", [1, 2, 3])
def test_ku_hom_table(r):
    t = ku_hom_table(r, 12)
    for n in range(1, 13):
        row = t.row(n)
        assert row.torsion_dim == l_dim(r, n + 4)
        if n % 2:
            d = (n + 1) // 2
            assert row.cotorsion == rn_group(r, d)
            assert row.cotorsion_modv_dim == cumulative_binomial(r, d)
        else:
            assert row.cotorsion.is_trivial()
    assert ku_hom_free_rank(r, 0) == 1
    assert ku_hom_free_rank(r, 3) == 0
    assert ku_hom_log2_order(r, 1) == rn_group(r, 1).log2_order + l_dim(r, 5)


def test_homology_cohomology_torsion_shadow():
    for r in [1, 2, 3]:
        hom = ku_hom_table(r, 10)
        coh = ku_cohom_table(r, 14)
        for n in range(1, 11):
            assert hom.row(n).torsion_dim == coh.row(n + 4).torsion_dim


@pytest.mark.parametrize("r", [1, 2, 3])
def test_kernel_multiplicative_closure(r):
    assert kernel_products_stay_in_kernel(r, max_degree=6)

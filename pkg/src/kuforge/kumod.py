"""Graded tables for the connective-K and integral-cohomology invariants of
B(Z/2)^r, assembled from the derivation functors and the group-ring
filtration.

Table conventions: degree 0 carries the unreduced unit summand and is
reported symbolically; positive degrees report exact F2 dimensions or
finite abelian groups.  Homology torsion in degree n matches cohomology
torsion in degree n + 4, which the tables expose directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .exactla import F2Matrix, FinAbGroup, GradedDim, f2_solve
from .groupring import rn_group
from .milnor import k_dim, l_dim, l_functors, ltilde_dim
from .polyalg import cumulative_binomial, sym_basis, sym_index, sym_dim


def hz_cohom_table(r: int, nmax: int) -> GradedDim:
    """F2-dimensions of integral cohomology in degrees 1..nmax (degree 0 is Z)."""
    return GradedDim({n: k_dim(r, n) for n in range(1, nmax + 1)})


def hz_hom_table(r: int, nmax: int) -> GradedDim:
    """F2-dimensions of reduced integral homology in degrees 1..nmax (degree 0 is Z)."""
    return GradedDim({n: k_dim(r, n + 1) for n in range(1, nmax + 1)})


@dataclass
class QfrakTables:
    """Image and kernel dimensions of the degree-3 k-invariant action."""

    rank: int
    cohom_im: GradedDim
    cohom_ker: GradedDim
    hom_im: GradedDim
    hom_ker: GradedDim


def qfrak_tables(r: int, nmax: int) -> QfrakTables:
    cim = {n: l_dim(r, n) for n in range(1, nmax + 1)}
    cker = {n: ltilde_dim(r, n) for n in range(1, nmax + 1)}
    him = {n: l_dim(r, n + 4) for n in range(1, nmax + 1)}
    hker = {n: k_dim(r, n + 1) - l_dim(r, n + 1) for n in range(1, nmax + 1)}
    return QfrakTables(r, GradedDim(cim), GradedDim(cker), GradedDim(him), GradedDim(hker))


@dataclass
class KuCohomRow:
    degree: int
    torsion_dim: int
    modv_dim: int
    cotorsion_modv_dim: int
    z2_free_rank: int


@dataclass
class KuCohomTable:
    rank: int
    nmax: int
    rows: list[KuCohomRow] = field(default_factory=list)
    unit_note: str = "degree 0 carries an extra polynomial unit summand Z[v]"

    def row(self, n: int) -> KuCohomRow:
        return self.rows[n - 1]


def ku_cohom_table(r: int, nmax: int) -> KuCohomTable:
    """Cohomological table: v-torsion, mod-v, cotorsion mod v, 2-adic ranks."""
    table = KuCohomTable(r, nmax)
    for n in range(1, nmax + 1):
        tors = l_dim(r, n)
        modv = ltilde_dim(r, n)
        if n % 2 == 0:
            cot = cumulative_binomial(r, n // 2)
            zr = (1 << r) - 1
        else:
            cot = 0
            zr = 0
        assert modv == tors + cot, f"mod-v layer mismatch in degree {n}"
        table.rows.append(KuCohomRow(n, tors, modv, cot, zr))
    return table


@dataclass
class KuHomRow:
    degree: int
    torsion_dim: int
    cotorsion: FinAbGroup
    cotorsion_modv_dim: int


@dataclass
class KuHomTable:
    rank: int
    nmax: int
    rows: list[KuHomRow] = field(default_factory=list)
    degree_zero: str = "Z"

    def row(self, n: int) -> KuHomRow:
        return self.rows[n - 1]


def ku_hom_table(r: int, nmax: int) -> KuHomTable:
    """Homological table: v-torsion dims and the odd-degree cotorsion groups."""
    table = KuHomTable(r, nmax)
    for n in range(1, nmax + 1):
        tors = l_dim(r, n + 4)
        if n % 2:
            d = (n + 1) // 2
            cot = rn_group(r, d)
            cmodv = cumulative_binomial(r, d)
        else:
            cot = FinAbGroup()
            cmodv = 0
        table.rows.append(KuHomRow(n, tors, cot, cmodv))
    return table


def ku_hom_log2_order(r: int, n: int) -> int:
    """log2 of the order of the finite part of degree-n homology."""
    if n < 0:
        return 0
    if n == 0:
        return 0  # free part only
    tors = l_dim(r, n + 4)
    if n % 2:
        return tors + rn_group(r, (n + 1) // 2).log2_order
    return tors


def ku_hom_free_rank(r: int, n: int) -> int:
    return 1 if n >= 0 and n % 2 == 0 else 0


def kernel_products_stay_in_kernel(r: int, max_degree: int = 6) -> bool:
    """Products of mod-v survivors stay mod-v survivors.

    Multiplies every pair of kernel basis elements in complementary degrees
    and checks membership of the product in the kernel subspace.
    """
    for a in range(1, max_degree):
        for b in range(1, max_degree - a + 1):
            _, lta = l_functors(r, a)
            _, ltb = l_functors(r, b)
            if lta.dim == 0 or ltb.dim == 0:
                continue
            _, ltab = l_functors(r, a + b)
            prods = []
            for ja in range(lta.dim):
                pa = _column_monomials(lta.include, sym_basis(r, a), ja)
                for jb in range(ltb.dim):
                    pb = _column_monomials(ltb.include, sym_basis(r, b), jb)
                    prods.append(_multiply(pa, pb))
            idx = sym_index(r, a + b)
            m = F2Matrix(sym_dim(r, a + b), len(prods))
            for c, poly in enumerate(prods):
                for e in poly:
                    m.set(idx[e], c, 1)
            if f2_solve(ltab.sub, m) is None:
                return False
    return True


def _column_monomials(mat: F2Matrix, basis, j: int) -> set:
    return {basis[i] for i in range(mat.rows) if mat.get(i, j)}


def _multiply(pa: set, pb: set) -> set:
    out: set = set()
    for ea in pa:
        for eb in pb:
            prod = tuple(x + y for x, y in zip(ea, eb))
            out ^= {prod}
    return out

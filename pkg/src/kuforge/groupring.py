"""The integral group ring of F2^r and its augmentation filtration.

The augmentation ideal of Z[V] is the free lattice on the differences
[g] - [0] over nonzero g, so it sits inside Z^(2^r - 1).  Powers of the
ideal are the lattices spanned by n-fold products of those differences;
their quotients are finite 2-groups whose structure is read off from Smith
normal forms.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .exactla import (
    F2Matrix,
    FinAbGroup,
    IntMatrix,
    cokernel_structure,
    f2_decompose,
    hermite_column_basis,
    int_solve,
)
from .polyalg import cumulative_binomial


def _nonzero_elements(r: int) -> list[int]:
    return list(range(1, 1 << r))


def ring_multiply(r: int, a: dict[int, int], b: dict[int, int]) -> dict[int, int]:
    """Product in Z[F2^r]; elements are dicts group-element -> coefficient."""
    out: dict[int, int] = {}
    for g, ca in a.items():
        if not ca:
            continue
        for h, cb in b.items():
            if cb:
                k = g ^ h
                out[k] = out.get(k, 0) + ca * cb
    return {k: v for k, v in out.items() if v}


def difference_element(g: int) -> dict[int, int]:
    """The ring element [g] - [0]."""
    assert g != 0
    return {g: 1, 0: -1}


def to_difference_coords(r: int, elt: dict[int, int]) -> list[int]:
    """Coordinates of an augmentation-zero element in the [g]-[0] basis."""
    total = sum(elt.values())
    assert total == 0, "element has nonzero augmentation"
    return [elt.get(g, 0) for g in _nonzero_elements(r)]


def from_difference_coords(r: int, coords: list[int]) -> dict[int, int]:
    elt: dict[int, int] = {0: -sum(coords)}
    for g, c in zip(_nonzero_elements(r), coords):
        if c:
            elt[g] = c
    return {k: v for k, v in elt.items() if v}


@dataclass
class GroupRingLattice:
    """A sublattice of the augmentation ideal, columns = basis vectors."""

    rank: int
    basis: IntMatrix  # (2^rank - 1) x k, column basis in echelon form

    @property
    def ambient_dim(self) -> int:
        return (1 << self.rank) - 1

    def contains(self, coords: list[int]) -> bool:
        return int_solve(self.basis, coords) is not None

    def index_is_finite(self) -> bool:
        return self.basis.cols == self.ambient_dim


@lru_cache(maxsize=None)
def aug_power_lattice(r: int, n: int) -> GroupRingLattice:
    """The lattice spanned by all n-fold products of differences [g] - [0]."""
    assert n >= 1 and r >= 0
    amb = (1 << r) - 1
    if amb == 0:
        return GroupRingLattice(r, IntMatrix.zeros(0, 0))
    if n == 1:
        return GroupRingLattice(r, IntMatrix.identity(amb))
    prev = aug_power_lattice(r, n - 1)
    gens = _nonzero_elements(r)
    cols: list[list[int]] = []
    for j in range(prev.basis.cols):
        x = from_difference_coords(r, [prev.basis.entries[i][j] for i in range(amb)])
        for g in gens:
            prod = ring_multiply(r, x, difference_element(g))
            cols.append(to_difference_coords(r, prod))
    stacked = IntMatrix([[c[i] for c in cols] for i in range(amb)])
    return GroupRingLattice(r, hermite_column_basis(stacked))


def express_in_lattice(lat: GroupRingLattice, cols: IntMatrix) -> IntMatrix:
    """Coordinates of the given columns with respect to the lattice basis."""
    out_cols = []
    for j in range(cols.cols):
        v = [cols.entries[i][j] for i in range(cols.rows)]
        x = int_solve(lat.basis, v)
        assert x is not None, "vector is not in the lattice"
        out_cols.append(x)
    return IntMatrix([[c[i] for c in out_cols] for i in range(lat.basis.cols)])


def rn_group(r: int, n: int) -> FinAbGroup:
    """The quotient of the augmentation ideal by its (n+1)-st power."""
    assert n >= 1
    lat = aug_power_lattice(r, n + 1)
    return cokernel_structure(lat.basis)


def filtration_subquotient(r: int, n: int) -> FinAbGroup:
    """The n-th filtration layer: n-th power modulo (n+1)-st power."""
    assert n >= 1
    top = aug_power_lattice(r, n)
    bottom = aug_power_lattice(r, n + 1)
    coords = express_in_lattice(top, bottom.basis)
    return cokernel_structure(coords)


def two_torsion_dim(r: int, n: int) -> int:
    """F2-dimension of the 2-torsion subgroup of the level-n quotient."""
    return rn_group(r, n).two_torsion_dim


def head_dim(r: int, n: int) -> int:
    """F2-dimension of the mod-2 quotient of the level-n quotient group."""
    g = rn_group(r, n)
    return g.two_torsion_dim + g.free_rank


def completion_inclusion_check(n: int, k: int) -> bool:
    """Whether the (n+k)-th power lattice of rank n lies inside 2^k times the ideal."""
    assert n >= 1 and k >= 1
    lat = aug_power_lattice(n, n + k)
    scale = 1 << k
    return all(v % scale == 0 for row in lat.basis.entries for v in row)


@dataclass
class FiltrationReport:
    level: int
    quotient: FinAbGroup
    subquotient: FinAbGroup
    two_torsion: int


def filtration_report(r: int, n: int) -> FiltrationReport:
    return FiltrationReport(n, rn_group(r, n), filtration_subquotient(r, n), two_torsion_dim(r, n))


def expected_quotient_log2_order(r: int, n: int) -> int:
    """Product formula for the order of the level-n quotient group."""
    return sum(cumulative_binomial(r, m) for m in range(1, n + 1))


# -- mod-2 reduction --------------------------------------------------------


@lru_cache(maxsize=None)
def mod2_power_dim(r: int, n: int) -> int:
    """Dimension of the n-th power of the augmentation ideal of F2[V]."""
    amb = (1 << r) - 1
    if n == 1:
        return amb
    # iterate products over F2 in the difference basis
    prev_cols = _mod2_power_basis(r, n)
    return prev_cols.rank()


@lru_cache(maxsize=None)
def _mod2_power_basis(r: int, n: int) -> F2Matrix:
    amb = (1 << r) - 1
    if n == 1:
        return F2Matrix.identity(amb)
    prev = _mod2_power_basis(r, n - 1)
    gens = _nonzero_elements(r)
    cols = []
    for j in range(prev.cols):
        x = from_difference_coords(r, [prev.get(i, j) for i in range(amb)])
        for g in gens:
            prod = ring_multiply(r, x, difference_element(g))
            cols.append([c % 2 for c in to_difference_coords(r, prod)])
    m = F2Matrix(amb, len(cols))
    for c, col in enumerate(cols):
        for i, v in enumerate(col):
            if v:
                m.set(i, c, 1)
    _, _, image = f2_decompose(m)
    return image


def mod2_reduction_dim(r: int, n: int) -> int:
    """Dimension of the image of the integral power lattice in F2[V]."""
    lat = aug_power_lattice(r, n)
    m = F2Matrix(lat.ambient_dim, lat.basis.cols)
    for j in range(lat.basis.cols):
        for i in range(lat.ambient_dim):
            if lat.basis.entries[i][j] % 2:
                m.set(i, j, 1)
    return m.rank()

"""Derivations Q_i on symmetric powers, Koszul differentials, and the
derived subquotient functors.

Conventions fixed here and used everywhere downstream:

* Q_i sends a monomial x^e to the sum over positions j with e_j odd of
  x^(e + (2^(i+1)-1) e_j); this is the derivation determined by
  x -> x^(2^(i+1)) and is validated in the tests against the
  coproduct/product composite definition.
* tau_i sends (mask, f) to the sum over j in mask of (mask - j, x_j^(2^i) f).
* K_n is the kernel of Q_0 on degree n, L_n the image of Q_1 : K_(n-3) -> K_n
  and Ltilde_n its kernel on K_n.
* kfrak(a, b) is the image of tau_0 on the (a, b) slice, sitting inside the
  (a-1, b+1) slice; lfrak(a, b) is its quotient by tau_1(kfrak(a+1, b-2)).
* The bicomplexes live in the (s, t) plane with tau_0 decreasing s and tau_1
  decreasing t.  A window-"B" bicomplex with parameter i keeps s >= 0,
  t >= i, with corner cell at (0, i); its (s, t) cell holds the exterior
  degree s+t and, in internal degree u, the symmetric slice
  u - s - 2(t - i).  A window-"D" bicomplex keeps s <= 0, t <= i, corner
  (0, i), symmetric slice u - s + 2(i - t).  Total homological degree is
  s + t, interior degrees are sliced independently.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .exactla import F2Matrix, GradedDim, f2_decompose, f2_solve, f2_left_inverse
from . import polyalg
from .polyalg import (
    cumulative_binomial,
    ext_basis,
    ext_sym_basis,
    ext_sym_dim,
    ext_sym_index,
    sym_basis,
    sym_dim,
    sym_index,
)


@lru_cache(maxsize=None)
def milnor_derivation(i: int, r: int, n: int) -> F2Matrix:
    """Matrix of Q_i from the degree-n slice to degree n + 2^(i+1) - 1."""
    assert i >= 0 and n >= 0
    jump = (1 << (i + 1)) - 1
    src = sym_basis(r, n)
    tgt = sym_index(r, n + jump)
    m = F2Matrix(sym_dim(r, n + jump), len(src))
    for j, e in enumerate(src):
        for pos in polyalg.odd_support(e):
            f = list(e)
            f[pos] += jump
            m.set(tgt[tuple(f)], j, 1)
    return m


def milnor_derivation_via_coproduct(i: int, r: int, n: int) -> F2Matrix:
    """Q_i computed as (multiply) o (1 x Frobenius-power) o (split off one variable).

    Independent of the closed monomial formula; used to validate it.
    """
    jump = 1 << (i + 1)
    src = sym_basis(r, n)
    tgt = sym_index(r, n + jump - 1)
    m = F2Matrix(sym_dim(r, n + jump - 1), len(src))
    for j, e in enumerate(src):
        for pos in range(r):
            if e[pos] == 0:
                continue
            # coproduct component S^n -> S^(n-1) x S^1 has coefficient e_pos
            if e[pos] % 2 == 0:
                continue
            f = list(e)
            f[pos] += jump - 1
            idx = tgt[tuple(f)]
            m.set(idx, j, m.get(idx, j) ^ 1)
    return m


@lru_cache(maxsize=None)
def koszul_tau_sparse(i: int, r: int, a: int, b: int) -> tuple[tuple[int, ...], ...]:
    """Columns of tau_i on the (a, b) slice as tuples of target row indices."""
    assert a >= 1 and i >= 0
    power = 1 << i
    src = ext_sym_basis(r, a, b)
    tgt = ext_sym_index(r, a - 1, b + power)
    cols = []
    for mask, e in src:
        rows = []
        for pos in mask:
            new_mask = tuple(x for x in mask if x != pos)
            f = list(e)
            f[pos] += power
            rows.append(tgt[(new_mask, tuple(f))])
        cols.append(tuple(rows))
    return tuple(cols)


@lru_cache(maxsize=None)
def koszul_tau(i: int, r: int, a: int, b: int) -> F2Matrix:
    """Matrix of tau_i from the (a, b) slice to the (a-1, b + 2^i) slice."""
    power = 1 << i
    cols = koszul_tau_sparse(i, r, a, b)
    m = F2Matrix(ext_sym_dim(r, a - 1, b + power), len(cols))
    for j, rows in enumerate(cols):
        for idx in rows:
            m.set(idx, j, 1)
    return m


# -- subquotients ----------------------------------------------------------


@dataclass
class SubquotientSpace:
    """A subspace-modulo-subspace of an ambient slice, with explicit bases.

    ``sub`` spans the subspace A, ``kill`` spans B <= A; the subquotient has
    dimension sub.cols - kill.cols.  ``include`` lifts subquotient
    coordinates to ambient coset representatives and ``project`` retracts
    (project o include = identity).  project is only meaningful on A.
    """

    ambient_dim: int
    sub: F2Matrix
    kill: F2Matrix
    include: F2Matrix
    project: F2Matrix

    @property
    def dim(self) -> int:
        return self.include.cols


def _column_space_basis(m: F2Matrix) -> F2Matrix:
    _, _, image = f2_decompose(m)
    return image


def _quotient_data(a_dim: int, w: F2Matrix) -> tuple[F2Matrix, F2Matrix]:
    """Projection and section for F2^a_dim / span(w columns)."""
    _, _, ech = f2_decompose(w)
    # column echelon pivot rows
    pivot_rows = []
    used = set()
    cols = ech.to_lists()
    basis_cols = [[cols[i][j] for i in range(a_dim)] for j in range(ech.cols)]
    reduced: list[list[int]] = []
    for c in basis_cols:
        c = c[:]
        for p, bc in zip(pivot_rows, reduced):
            if c[p]:
                c = [x ^ y for x, y in zip(c, bc)]
        lead = next((k for k, x in enumerate(c) if x), None)
        assert lead is not None
        pivot_rows.append(lead)
        reduced.append(c)
    free_rows = [k for k in range(a_dim) if k not in pivot_rows]
    q = len(free_rows)
    # projection: reduce each unit vector by the echelon basis, read free rows
    proj = F2Matrix(q, a_dim)
    for j in range(a_dim):
        v = [0] * a_dim
        v[j] = 1
        for p, bc in zip(pivot_rows, reduced):
            if v[p]:
                v = [x ^ y for x, y in zip(v, bc)]
        for qi, fr in enumerate(free_rows):
            if v[fr]:
                proj.set(qi, j, 1)
    sec = F2Matrix(a_dim, q)
    for qi, fr in enumerate(free_rows):
        sec.set(fr, qi, 1)
    return proj, sec


def make_subquotient(ambient_dim: int, sub_cols: F2Matrix, kill_cols: F2Matrix) -> SubquotientSpace:
    sub = _column_space_basis(sub_cols)
    kill = _column_space_basis(kill_cols)
    assert sub.rows == ambient_dim and kill.rows == ambient_dim
    if kill.cols:
        inside = f2_solve(sub, kill)
        assert inside is not None, "kill space is not inside the subspace"
        y = inside
    else:
        y = F2Matrix(sub.cols, 0)
    proj, sec = _quotient_data(sub.cols, y)
    if sub.cols:
        pinv = f2_left_inverse(sub)
    else:
        pinv = F2Matrix(0, ambient_dim)
    include = sub.mul(sec)
    project = proj.mul(pinv)
    assert project.mul(include) == F2Matrix.identity(include.cols)
    return SubquotientSpace(ambient_dim, sub, kill, include, project)


def induced_map(src: SubquotientSpace, tgt: SubquotientSpace, ambient_map: F2Matrix) -> F2Matrix:
    """Map of subquotients induced by an ambient map; checked well-defined."""
    fs = ambient_map.mul(src.sub)
    assert f2_solve(tgt.sub, fs) is not None, "map does not preserve the subspaces"
    if src.kill.cols:
        fk = ambient_map.mul(src.kill)
        assert f2_solve(tgt.kill, fk) is not None or fk.is_zero(), "map does not preserve the killed subspaces"
    return tgt.project.mul(ambient_map.mul(src.include))


def _zero_subquotient(ambient_dim: int) -> SubquotientSpace:
    z = F2Matrix(ambient_dim, 0)
    return SubquotientSpace(ambient_dim, z, z, z, F2Matrix(0, ambient_dim))


# -- the Q_0 kernel tower --------------------------------------------------


@lru_cache(maxsize=None)
def kernel_functor_K(r: int, n: int) -> SubquotientSpace:
    """K_n as a subspace of the degree-n symmetric slice."""
    assert n >= 0
    q0 = milnor_derivation(0, r, n)
    _, kernel, _ = f2_decompose(q0)
    return make_subquotient(sym_dim(r, n), kernel, F2Matrix(sym_dim(r, n), 0))


def k_dim(r: int, n: int) -> int:
    if n < 0:
        return 0
    return kernel_functor_K(r, n).dim


@lru_cache(maxsize=None)
def q1_on_K(r: int, n: int) -> F2Matrix:
    """Q_1 restricted to K_n, written in K-coordinates (K_n -> K_(n+3))."""
    kn = kernel_functor_K(r, n)
    kn3 = kernel_functor_K(r, n + 3)
    amb = milnor_derivation(1, r, n).mul(kn.include)
    x = f2_solve(kn3.include, amb)
    assert x is not None, "Q_1 does not preserve the Q_0 kernels"
    return x


@lru_cache(maxsize=None)
def l_functors(r: int, n: int) -> tuple[SubquotientSpace, SubquotientSpace]:
    """(L_n, Ltilde_n) as subspaces of the degree-n symmetric slice."""
    amb_dim = sym_dim(r, n)
    kn = kernel_functor_K(r, n)
    if n >= 3:
        km3 = kernel_functor_K(r, n - 3)
        image_in_k = q1_on_K(r, n - 3)
        l_cols = kn.include.mul(image_in_k)
    else:
        l_cols = F2Matrix(amb_dim, 0)
    _, ker_in_k, _ = f2_decompose(q1_on_K(r, n))
    lt_cols = kn.include.mul(ker_in_k)
    zero = F2Matrix(amb_dim, 0)
    l = make_subquotient(amb_dim, l_cols, zero)
    lt = make_subquotient(amb_dim, lt_cols, zero)
    return l, lt


def l_dim(r: int, n: int) -> int:
    if n < 0:
        return 0
    return l_functors(r, n)[0].dim


def ltilde_dim(r: int, n: int) -> int:
    if n < 0:
        return 0
    return l_functors(r, n)[1].dim


def q1_homology_on_K(r: int, n: int) -> int:
    """dim of the homology Ltilde_n / L_n."""
    l, lt = l_functors(r, n)
    return lt.dim - l.dim


# -- image/cokernel functors on the Koszul grid ----------------------------


def kfrak_ambient_dim(r: int, a: int, b: int) -> int:
    return ext_sym_dim(r, a - 1, b + 1)


@lru_cache(maxsize=None)
def kfrak(r: int, a: int, b: int) -> SubquotientSpace:
    """Image of tau_0 on the (a, b) slice, inside the (a-1, b+1) slice.

    By convention the (0, 0) value is the one-dimensional constant space and
    (0, b>0) vanishes.
    """
    assert a >= 0
    if a == 0:
        if b == 0:
            one = F2Matrix.identity(1)
            return SubquotientSpace(1, one, F2Matrix(1, 0), one, one)
        return _zero_subquotient(max(sym_dim(r, b), 0))
    amb = kfrak_ambient_dim(r, a, b)
    if b < 0 or a > r:
        return _zero_subquotient(amb)
    _, _, image = f2_decompose(koszul_tau(0, r, a, b))
    return make_subquotient(amb, image, F2Matrix(amb, 0))


def kfrak_dim(r: int, a: int, b: int) -> int:
    return kfrak(r, a, b).dim


@lru_cache(maxsize=None)
def tau1_on_kfrak(r: int, a: int, b: int) -> F2Matrix:
    """tau_1 as a map kfrak(a+1, b-2) -> kfrak(a, b) in subquotient coordinates."""
    src = kfrak(r, a + 1, b - 2)
    tgt = kfrak(r, a, b)
    if src.dim == 0 or tgt.dim == 0:
        return F2Matrix(tgt.dim, src.dim)
    # ambient map: (a, b-1) slice -> (a-1, b+1) slice
    return induced_map(src, tgt, koszul_tau(1, r, a, b - 1))


@lru_cache(maxsize=None)
def kfrak_lfrak(r: int, a: int, b: int) -> tuple[SubquotientSpace, SubquotientSpace]:
    """(kfrak(a,b), lfrak(a,b)) with lfrak the cokernel of tau_1 on kfrak."""
    kf = kfrak(r, a, b)
    assert a >= 1, "the cokernel functor is defined for positive exterior degree"
    amb = kf.ambient_dim
    if kf.dim == 0:
        return kf, _zero_subquotient(amb)
    src = kfrak(r, a + 1, b - 2)
    if src.dim:
        kill_cols = koszul_tau(1, r, a, b - 1).mul(src.sub)
    else:
        kill_cols = F2Matrix(amb, 0)
    lf = make_subquotient(amb, kf.sub, kill_cols)
    return kf, lf


def lfrak_dim(r: int, a: int, b: int) -> int:
    if a > r or b < 0:
        return 0
    return kfrak_lfrak(r, a, b)[1].dim


def lfrak_image_dim(r: int, a: int, b: int) -> int:
    """dim im(tau_1 : kfrak(a,b) -> kfrak(a-1,b+2)).

    For a >= 2 the quotient description of lfrak agrees with this image:
    tau_1 itself embeds the cokernel into the next slice.
    """
    assert a >= 2
    return tau1_on_kfrak(r, a - 1, b + 2).rank()


# -- bicomplexes -----------------------------------------------------------


@dataclass(frozen=True)
class Bicomplex:
    """Window into the (exterior x symmetric) bicomplex with tau_0 and tau_1."""

    kind: str  # "B" (quotient window) or "D" (sub window)
    index: int
    rank: int

    def __post_init__(self):
        assert self.kind in ("B", "D")
        assert self.index >= 0

    def cells(self) -> list[tuple[int, int]]:
        i, r = self.index, self.rank
        out = []
        if self.kind == "B":
            for t in range(i, r + 1):
                for s in range(0, r - t + 1):
                    out.append((s, t))
        else:
            for t in range(0, i + 1):
                for s in range(-t, 1):
                    if s + t <= r:
                        out.append((s, t))
        return out

    def cell_sym_degree(self, s: int, t: int, u: int) -> int:
        if self.kind == "B":
            return u - s - 2 * (t - self.index)
        return u - s + 2 * (self.index - t)

    def cell_dim(self, s: int, t: int, u: int) -> int:
        b = self.cell_sym_degree(s, t, u)
        return ext_sym_dim(self.rank, s + t, b)

    def total_degrees(self) -> list[int]:
        ms = sorted({s + t for (s, t) in self.cells()})
        return ms

    def min_internal_degree(self) -> int:
        return 0 if self.kind == "B" else -2 * self.index

    def tot_dim(self, m: int, u: int) -> int:
        return sum(self.cell_dim(s, t, u) for (s, t) in self.cells() if s + t == m)

    def differential(self, m: int, u: int) -> F2Matrix:
        """Total differential from total degree m to m - 1 in internal degree u."""
        r = self.rank
        cells = self.cells()
        srcs = [(s, t) for (s, t) in cells if s + t == m]
        tgts = [(s, t) for (s, t) in cells if s + t == m - 1]
        src_off, off = {}, 0
        for c in srcs:
            src_off[c] = off
            off += self.cell_dim(*c, u)
        tgt_off, toff = {}, 0
        for c in tgts:
            tgt_off[c] = toff
            toff += self.cell_dim(*c, u)
        mat = F2Matrix(toff, off)
        for (s, t) in srcs:
            a = s + t
            b = self.cell_sym_degree(s, t, u)
            if ext_sym_dim(r, a, b) == 0 or a == 0:
                continue
            for (flavor, tgt) in ((0, (s - 1, t)), (1, (s, t - 1))):
                if tgt not in tgt_off:
                    continue
                cols = koszul_tau_sparse(flavor, r, a, b)
                c0, r0 = src_off[(s, t)], tgt_off[tgt]
                for j, rows in enumerate(cols):
                    for idx in rows:
                        mat.set(r0 + idx, c0 + j, 1)
        return mat


def bicomplex(kind: str, i: int, r: int) -> Bicomplex:
    return Bicomplex(kind, i, r)


@dataclass
class TotalHomology:
    """Homology of the totalization, sliced by internal degree."""

    by_degree: dict[int, GradedDim]
    degree_bound: int
    truncated_above: int


def total_homology(bi: Bicomplex, degree_bound: int) -> TotalHomology:
    """Homology of Tot in each total degree, internal degrees <= degree_bound."""
    ms = bi.total_degrees()
    out: dict[int, dict[int, int]] = {m: {} for m in ms}
    if not ms:
        return TotalHomology({}, degree_bound, degree_bound)
    for u in range(bi.min_internal_degree(), degree_bound + 1):
        ranks: dict[int, int] = {}
        for m in ms + [max(ms) + 1]:
            d = bi.differential(m, u)
            if m <= max(ms):
                assert d.rows == bi.tot_dim(m - 1, u)
            ranks[m] = d.rank()
        for m in ms:
            h = bi.tot_dim(m, u) - ranks.get(m, 0) - ranks.get(m + 1, 0)
            assert h >= 0, f"negative homology at m={m}, u={u}"
            if h:
                out[m][u] = h
    return TotalHomology({m: GradedDim(v) for m, v in out.items()}, degree_bound, degree_bound)


# -- the tau_1 complexes on kfrak ------------------------------------------


def j_complex_homology(r: int, b: int) -> dict[int, int]:
    """Homology of ... -> kfrak(h+1, b-2h) -> ... -> kfrak(1, b) by homological degree h."""
    length = b // 2 + 1
    mats = {}
    for h in range(0, length + 1):
        # differential from degree h+1-term into degree h-term
        mats[h] = tau1_on_kfrak(r, h + 1, b - 2 * h)
    dims = {h: kfrak_dim(r, h + 1, b - 2 * h) for h in range(0, length + 1)}
    out = {}
    for h in range(0, length + 1):
        rank_in = mats[h].rank() if h in mats else 0
        rank_out = mats[h - 1].rank() if h - 1 in mats else 0
        val = dims[h] - rank_in - rank_out
        assert val >= 0
        if val:
            out[h] = val
    return out

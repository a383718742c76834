"""Group (co)homology with trivial coefficients in admissible modules.

Cohomology is read off an adapted basis of the integral chain complex
Z (x)_G P. For each degree k the basis change B_k splits C_k into three
blocks, and a cocycle phi has coordinates theta = phi B_k with

* ext slots   (one per invariant factor e of d_k):      M / eM
* tors slots  (one per torsion factor d of H_k):        M[d]
* free slots  (one per free generator of H_k):          M

Each (slot, atom) pair is a *cell*: a subquotient of Q. Maps between
cohomology groups are rational multiplier matrices between cells.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, product
from math import comb, gcd
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .abgroup import (AdmissibleModule, Atom, FgAbelianGroup, ModuleMap, QSub, Subquotient, complex_homology,
                      ext_into, hom_into, map_image, map_kernel, quotient_group, relation_vectors,
                      split_part, tensor_and_tor)
from .exactlin import IntMatrix, smith_normal_form
from .groupcat import (ChainMap, ConeResolution, FreeAb, FreeResolution, GroupDescriptor, GroupHom, SemidirectZ,
                       abelian_orders, add_into, bar_truncation, comparison_chain_map, group_model, group_order,
                       is_abelian, phi_inverse, resolution_for)

MAX_DEGREE = 5

# -- resolutions and adapted bases ------------------------------------------------

_RESOLUTIONS: dict = {}


def resolution(G: GroupDescriptor, top: int) -> FreeResolution:
    """Cached resolution of G reaching at least degree ``top``."""
    res = _RESOLUTIONS.get(G)
    if res is None or res.max_degree < top:
        res = resolution_for(G, max(top, 4))
        _RESOLUTIONS[G] = res
    return res


@dataclass
class AdaptedDegree:
    """Adapted basis of C_k: positions [0, n_ext) ext, then tors, then free."""

    r: int
    ext: tuple          # invariant factors of d_k
    tors: tuple         # invariant factors of d_{k+1} restricted to cycles (may include 1s)
    B: list             # r x r integer matrix, columns = new basis in old coordinates
    B_inv: list

    @property
    def n_ext(self) -> int:
        return len(self.ext)

    @property
    def cycle_start(self) -> int:
        return len(self.ext)

    def slot(self, pos: int) -> tuple[str, int]:
        if pos < len(self.ext):
            return "ext", self.ext[pos]
        j = pos - len(self.ext)
        if j < len(self.tors):
            return "tors", self.tors[j]
        return "free", 0

    def homology_orders(self) -> list[int]:
        """Orders of the homology generators at the cycle positions."""
        return [self.slot(p)[1] for p in range(self.cycle_start, self.r)]


def _materialize(mat: IntMatrix) -> list[list[int]]:
    return [row[:] for row in mat.data]


def _blockdiag_identity(n_id: int, block: list[list[int]]) -> list[list[int]]:
    size = n_id + len(block)
    out = [[int(i == j) if i < n_id or j < n_id else 0 for j in range(size)] for i in range(size)]
    for i, row in enumerate(block):
        for j, v in enumerate(row):
            out[n_id + i][n_id + j] = v
    return out


def _matmul(a: list[list[int]], b: list[list[int]]) -> list[list[int]]:
    if not a:
        return []
    n, m = len(b), len(b[0]) if b else 0
    out = []
    for row in a:
        out.append([sum(row[k] * b[k][j] for k in range(n) if row[k]) for j in range(m)])
    return out


class ComplexData:
    """Integral reduction of a resolution with cached SNF-adapted bases."""

    def __init__(self, res: FreeResolution):
        self.res = res
        self._eps: dict[int, IntMatrix] = {}
        self._adapted: dict[int, AdaptedDegree] = {}

    def eps(self, k: int) -> IntMatrix:
        if k not in self._eps:
            self._eps[k] = self.res.epsilon_matrix(k)
        return self._eps[k]

    def adapted(self, k: int) -> AdaptedDegree:
        if k in self._adapted:
            return self._adapted[k]
        if k + 1 > self.res.max_degree:
            raise ValueError(f"degree {k} needs a resolution through degree {k + 1}")
        r = self.res.rank(k)
        if k >= 1:
            snf = smith_normal_form(self.eps(k))
            ext = snf.invariant_factors
            V, V_inv = _materialize(snf.V), _materialize(snf.V_inv)
        else:
            ext = ()
            V = [[int(i == j) for j in range(r)] for i in range(r)]
            V_inv = [row[:] for row in V]
        rank = len(ext)
        d_next = self.eps(k + 1)
        full = _matmul(V_inv, d_next.data) if r else []
        E_rows = full[rank:]
        E = IntMatrix(E_rows, r - rank, d_next.cols)
        snf_e = smith_normal_form(E)
        tors = snf_e.invariant_factors
        U, U_inv = _materialize(snf_e.U), _materialize(snf_e.U_inv)
        B = _matmul(V, _blockdiag_identity(rank, U_inv)) if r else []
        B_inv = _matmul(_blockdiag_identity(rank, U), V_inv) if r else []
        ad = AdaptedDegree(r, tuple(ext), tuple(tors), B, B_inv)
        self._adapted[k] = ad
        return ad


_COMPLEXES: dict = {}


def complex_data(G: GroupDescriptor, k: int) -> ComplexData:
    res = resolution(G, k + 1)
    cd = _COMPLEXES.get(G)
    if cd is None or cd.res is not res:
        cd = ComplexData(res)
        _COMPLEXES[G] = cd
    return cd


# -- integral homology, Kunneth, UCT ------------------------------------------------

def integral_homology(G: GroupDescriptor, k: int) -> FgAbelianGroup:
    if k < 0:
        return FgAbelianGroup()
    if k > MAX_DEGREE:
        raise ValueError(f"degree {k} beyond the resolution cap")
    ad = complex_data(G, k).adapted(k)
    orders = [o for o in ad.homology_orders() if o != 1]
    return FgAbelianGroup.from_orders(orders)


@dataclass(frozen=True)
class KunnethSummand:
    kind: str                   # "tensor" or "tor"
    degrees: tuple              # per-factor homology degrees (tor terms: nested description)
    group: FgAbelianGroup
    label: str


def kunneth_decomposition(factors: Sequence[GroupDescriptor], k: int) -> list[KunnethSummand]:
    """Kunneth summands of H_k of a product, listed with their degree positions."""
    factors = list(factors)
    if not factors:
        raise ValueError("need at least one factor")
    if any(not is_abelian(f) for f in factors):
        raise ValueError("Kunneth decomposition needs abelian factors")
    homs = [[integral_homology(f, i) for i in range(k + 1)] for f in factors]
    # current[d] = list of summands in degree d for the product of the factors so far
    current: list[list[KunnethSummand]] = [[] for _ in range(k + 1)]
    for d in range(k + 1):
        if not homs[0][d].is_zero():
            current[d].append(KunnethSummand("tensor", (d,), homs[0][d], f"H{d}"))
    for pos in range(1, len(factors)):
        nxt: list[list[KunnethSummand]] = [[] for _ in range(k + 1)]
        for d1 in range(k + 1):
            for s in current[d1]:
                for d2 in range(k + 1 - d1):
                    t, tor = tensor_and_tor(s.group, homs[pos][d2])
                    if not t.is_zero():
                        nxt[d1 + d2].append(KunnethSummand(
                            s.kind, s.degrees + (d2,), t, f"{s.label} (x) H{d2}"))
                    if d1 + d2 + 1 <= k and not tor.is_zero():
                        nxt[d1 + d2 + 1].append(KunnethSummand(
                            "tor", s.degrees + (d2,), tor, f"Tor({s.label}, H{d2})"))
        current = nxt
    return current[k]


def kunneth_total(summands: Iterable[KunnethSummand]) -> FgAbelianGroup:
    out = FgAbelianGroup()
    for s in summands:
        out = out + s.group
    return out


def uct_decompose(G: GroupDescriptor, M: AdmissibleModule, k: int) -> tuple[AdmissibleModule, AdmissibleModule]:
    """(Hom(H_k G, M), Ext(H_{k-1} G, M))."""
    return hom_into(integral_homology(G, k), M), ext_into(integral_homology(G, k - 1), M)


# -- cells and cohomology groups --------------------------------------------------------

def slot_subquotient(kind: str, factor: int, atom: Atom) -> Subquotient:
    sq = atom.sq
    if kind == "ext":
        return sq.quotient_by_multiple(factor)
    if kind == "tors":
        return sq.torsion_part(factor)
    return sq


@dataclass(frozen=True)
class Cell:
    pos: int
    atom_index: int
    kind: str
    factor: int
    sq: Subquotient

    def atoms(self) -> tuple[Atom, ...]:
        return self.sq.atoms()


class CohomologyGroup:
    """H^k(G, M) with explicit cell coordinates for its classes."""

    def __init__(self, G: GroupDescriptor, M: AdmissibleModule, k: int):
        if k < 0 or k > MAX_DEGREE:
            raise ValueError(f"unsupported degree {k}")
        self.group = G
        self.module = M if isinstance(M, AdmissibleModule) else AdmissibleModule(M)
        self.degree = k
        self.data = complex_data(G, k)
        self.adapted = self.data.adapted(k)
        self.cells: list[Cell] = []
        self._cell_at: dict[tuple[int, int], int] = {}
        for pos in range(self.adapted.r):
            kind, factor = self.adapted.slot(pos)
            for a, atom in enumerate(self.module.atoms):
                sq = slot_subquotient(kind, factor, atom)
                if not sq.is_zero():
                    self._cell_at[(pos, a)] = len(self.cells)
                    self.cells.append(Cell(pos, a, kind, factor, sq))
        self.value = AdmissibleModule([x for c in self.cells for x in c.atoms()])

    def __repr__(self) -> str:
        return f"H^{self.degree}({self.group}; {self.module}) = {self.value}"

    def cell_index(self, pos: int, atom_index: int) -> Optional[int]:
        return self._cell_at.get((pos, atom_index))

    # elements
    def zero(self) -> list[Fraction]:
        return [Fraction(0)] * len(self.cells)

    def reduce(self, x: Sequence) -> list[Fraction]:
        return [c.sq.reduce(v) for c, v in zip(self.cells, x)]

    def is_zero_class(self, x: Sequence) -> bool:
        return all(c.sq.is_zero_element(v) for c, v in zip(self.cells, x))

    def equal(self, x: Sequence, y: Sequence) -> bool:
        return all(c.sq.equal(u, v) for c, u, v in zip(self.cells, x, y))

    def class_basis(self) -> list[dict]:
        """Per cell: slot kind, factor, atom and (for cyclic cells) a generator."""
        out = []
        for c in self.cells:
            entry = {"slot": c.pos, "kind": c.kind, "factor": c.factor,
                     "atom": str(self.module.atoms[c.atom_index]),
                     "value": str(AdmissibleModule(c.atoms()))}
            if c.sq.is_cyclic_fg():
                entry["generator"] = str(c.sq.generator())
            out.append(entry)
        return out

    def is_fg_cells(self) -> bool:
        return all(c.sq.is_cyclic_fg() for c in self.cells)

    # cocycles <-> classes
    def cocycle(self, x: Sequence) -> list[tuple[Fraction, ...]]:
        """Cochain values on the resolution basis representing the class x."""
        r = self.adapted.r
        n_atoms = len(self.module.atoms)
        theta = [[Fraction(0)] * n_atoms for _ in range(r)]
        for c, v in zip(self.cells, x):
            theta[c.pos][c.atom_index] = Fraction(v)
        Binv = self.adapted.B_inv
        out = []
        for b in range(r):
            out.append(tuple(sum((theta[p][a] * Binv[p][b] for p in range(r) if Binv[p][b]), Fraction(0))
                             for a in range(n_atoms)))
        return out

    def class_of(self, phi: Sequence[Sequence]) -> list[Fraction]:
        """Class of a cocycle given by its values on the resolution basis."""
        r = self.adapted.r
        if len(phi) != r:
            raise ValueError(f"cochain needs {r} values")
        M = self.module
        for b in range(r):
            if not M.contains(phi[b]):
                raise ValueError("cochain value outside the module")
        if not self.is_cocycle(phi):
            raise ValueError("cochain is not a cocycle")
        B = self.adapted.B
        n_atoms = len(M.atoms)
        theta = [[sum((Fraction(phi[b][a]) * B[b][p] for b in range(r) if B[b][p]), Fraction(0))
                  for a in range(n_atoms)] for p in range(r)]
        out = self.zero()
        for c in self.cells:
            out[self._cell_at[(c.pos, c.atom_index)]] = c.sq.reduce(theta[c.pos][c.atom_index])
        return out

    def is_cocycle(self, phi: Sequence[Sequence]) -> bool:
        D = self.data.eps(self.degree + 1)
        M = self.module
        for j in range(D.cols):
            val = [Fraction(0)] * len(M.atoms)
            for i in range(D.rows):
                c = D.data[i][j]
                if c:
                    for a in range(len(val)):
                        val[a] += c * Fraction(phi[i][a])
            if not all(atom.sq.is_zero_element(v) for atom, v in zip(M.atoms, val)):
                return False
        return True

    def random_class(self, rng: random.Random) -> list[Fraction]:
        """A pseudo-random class (small representatives) for property checks."""
        out = []
        for c in self.cells:
            if c.sq.is_cyclic_fg():
                g = c.sq.generator()
                out.append(c.sq.reduce(g * rng.randint(-6, 6)))
            else:
                den = rng.choice([1, 2, 3, 4, 6, 8, 9])
                cand = Fraction(rng.randint(-20, 20), den)
                while not c.sq.contains(cand):
                    cand = Fraction(rng.randint(-20, 20))
                    if not c.sq.contains(cand):
                        cand = c.sq.num.scale * rng.randint(-5, 5) if c.sq.num.kind == "loc" else cand
                out.append(c.sq.reduce(cand))
        return out

    def generators_fg(self) -> list[list[Fraction]]:
        """Cell generators when every cell is cyclic."""
        out = []
        for i, c in enumerate(self.cells):
            x = self.zero()
            x[i] = c.sq.generator()
            out.append(x)
        return out


def cohomology_group(G: GroupDescriptor, M, k: int) -> CohomologyGroup:
    if isinstance(M, str):
        from .abgroup import parse_module
        M = parse_module(M)
    return CohomologyGroup(G, M, k)


# -- maps ---------------------------------------------------------------------------------

class CohomologyMap:
    """A homomorphism between cohomology groups given by cell-to-cell rational multipliers.

    ``entries[(t, s)]`` multiplies source cell s into target cell t. Maps
    induced along chain maps also keep the integer matrix ``T`` on adapted
    positions so kernels and images can be computed atom by atom.
    """

    def __init__(self, source: CohomologyGroup, target: CohomologyGroup, entries: dict, name: str = "",
                 T: Optional[list] = None, check: bool = True):
        self.source = source
        self.target = target
        self.entries = {k: Fraction(v) for k, v in entries.items() if v}
        self.name = name
        self.T = T
        if check:
            for (t, s), q in self.entries.items():
                cs, ct = source.cells[s], target.cells[t]
                if not (cs.sq.num.times(q) <= ct.sq.num and cs.sq.den.times(q) <= ct.sq.den):
                    raise ValueError(f"{name}: multiplier {q} is not well defined between {cs.sq} and {ct.sq}")

    def __call__(self, x: Sequence) -> list[Fraction]:
        out = [Fraction(0)] * len(self.target.cells)
        for (t, s), q in self.entries.items():
            out[t] += q * Fraction(x[s])
        return self.target.reduce(out)

    def compose(self, inner: "CohomologyMap") -> "CohomologyMap":
        """self after inner."""
        by_mid: dict[int, list] = {}
        for (m, s), q in inner.entries.items():
            by_mid.setdefault(m, []).append((s, q))
        out: dict = {}
        for (t, m), q in self.entries.items():
            for s, q2 in by_mid.get(m, []):
                out[(t, s)] = out.get((t, s), Fraction(0)) + q * q2
        T = None
        if self.T is not None and inner.T is not None:
            T = _matmul(inner.T, self.T)
        return CohomologyMap(inner.source, self.target, out, f"{self.name}*{inner.name}", T, check=False)

    def scaled_difference(self, other: "CohomologyMap", a: int = 1, b: int = -1) -> "CohomologyMap":
        out: dict = {}
        for key, q in self.entries.items():
            out[key] = out.get(key, Fraction(0)) + a * q
        for key, q in other.entries.items():
            out[key] = out.get(key, Fraction(0)) + b * q
        T = None
        if self.T is not None and other.T is not None:
            T = [[a * x + b * y for x, y in zip(r1, r2)] for r1, r2 in zip(self.T, other.T)]
        return CohomologyMap(self.source, self.target, out, f"({self.name}-{other.name})", T, check=False)

    def is_zero(self) -> bool:
        for (t, s), q in self.entries.items():
            if not self.source.cells[s].sq.num.times(q) <= self.target.cells[t].sq.den:
                return False
        return True

    def __eq__(self, other) -> bool:
        return isinstance(other, CohomologyMap) and self.scaled_difference(other).is_zero()

    def __hash__(self) -> int:
        return id(self)

    def integer_matrix(self) -> IntMatrix:
        """Matrix in cyclic coordinates (requires every cell to be cyclic)."""
        if not (self.source.is_fg_cells() and self.target.is_fg_cells()):
            raise ValueError("cells are not all cyclic")
        rows, cols = len(self.target.cells), len(self.source.cells)
        data = [[0] * cols for _ in range(rows)]
        for (t, s), q in self.entries.items():
            ct, cs = self.target.cells[t], self.source.cells[s]
            data[t][s] = ct.sq.cyclic_coordinate(q * cs.sq.generator())
        return IntMatrix(data, rows, cols)

    def is_atom_diagonal(self) -> bool:
        return self.T is not None and self.source.module.atoms == self.target.module.atoms

    # structure of kernel / image / cokernel
    def kernel(self) -> AdmissibleModule:
        return _structure(self, "kernel")

    def image(self) -> AdmissibleModule:
        return _structure(self, "image")

    def cokernel(self) -> AdmissibleModule:
        return _structure(self, "cokernel")

    def is_injective(self) -> bool:
        return self.kernel().is_zero()

    def is_surjective(self) -> bool:
        return self.cokernel().is_zero()

    def is_isomorphism(self) -> bool:
        return self.is_injective() and self.is_surjective()

    def describe(self) -> dict:
        return {"name": self.name, "source": str(self.source.value), "target": str(self.target.value),
                "multipliers": [{"from": s, "to": t, "q": str(q)} for (t, s), q in sorted(self.entries.items())]}


def _cell_orders(H: CohomologyGroup) -> list[int]:
    out = []
    for c in H.cells:
        a = c.atoms()
        out.append(0 if a[0].kind == "Z" else a[0].m)
    return out


def _lattice_structure(f: CohomologyMap, what: str) -> AdmissibleModule:
    M = f.integer_matrix()
    so, to = _cell_orders(f.source), _cell_orders(f.target)
    if what == "kernel":
        ker = map_kernel(M, so, to)
        return quotient_group(ker + relation_vectors(so), relation_vectors(so), len(so)).as_module()
    im = map_image(M, to)
    if what == "image":
        return quotient_group(im, relation_vectors(to), len(to)).as_module()
    full = [[int(i == j) for i in range(len(to))] for j in range(len(to))]
    return quotient_group(full, im, len(to)).as_module()


def _homology_side(f: CohomologyMap, atom_index: int):
    """Dual fg data for one atom: homology map z_src = T z_tgt on cycle positions."""
    src, tgt = f.source.adapted, f.target.adapted
    rs = list(range(src.cycle_start, src.r))
    ct = list(range(tgt.cycle_start, tgt.r))
    data = [[f.T[i][j] for j in ct] for i in rs]
    return IntMatrix(data, len(rs), len(ct)), tgt.homology_orders(), src.homology_orders()


def _per_atom(f: CohomologyMap, atom_index: int) -> CohomologyMap:
    """Restriction of an atom-diagonal map to a single atom."""
    atom = f.source.module.atoms[atom_index]
    S = CohomologyGroup(f.source.group, AdmissibleModule.raw([atom]), f.source.degree)
    Tg = CohomologyGroup(f.target.group, AdmissibleModule.raw([atom]), f.target.degree)
    return induced_from_matrix(S, Tg, f.T, f.name)


def localize(A: FgAbelianGroup, primes: Sequence[int]) -> AdmissibleModule:
    atoms = [Atom.loc(primes)] * A.rank
    for t in A.torsion:
        t2 = split_part(t, primes)[1]
        if t2 > 1:
            atoms.append(Atom.zmod(t2))
    return AdmissibleModule(atoms)


def _structure(f: CohomologyMap, what: str) -> AdmissibleModule:
    if f.is_zero():
        return {"kernel": f.source.value, "image": AdmissibleModule(), "cokernel": f.target.value}[what]
    if f.source.is_fg_cells() and f.target.is_fg_cells():
        return _lattice_structure(f, what)
    if not f.is_atom_diagonal():
        raise NotImplementedError("kernel/image of this map needs cyclic cells or an atom-diagonal map")
    atoms = f.source.module.atoms
    if len(atoms) > 1:
        out = AdmissibleModule()
        for a in range(len(atoms)):
            out = out + _structure(_per_atom(f, a), what)
        return out
    atom = atoms[0]
    if atom.kind == "Loc":
        Zs = CohomologyGroup(f.source.group, AdmissibleModule.raw([Atom.z()]), f.source.degree)
        Zt = CohomologyGroup(f.target.group, AdmissibleModule.raw([Atom.z()]), f.target.degree)
        zpart = _lattice_structure(induced_from_matrix(Zs, Zt, f.T, f.name), what)
        grp = FgAbelianGroup.from_orders(0 if a.kind == "Z" else a.m for a in zpart.atoms)
        return localize(grp, atom.primes)
    if not atom.divisible:
        raise NotImplementedError(f"unsupported atom {atom}")
    Mh, tgt_orders, src_orders = _homology_side(f, 0)
    # f* = Hom(f_*, X) for the homology map f_*: H(tgt) -> H(src); X is injective
    if what == "kernel":
        coker = quotient_group([[int(i == j) for i in range(len(src_orders))] for j in range(len(src_orders))],
                               map_image(Mh, src_orders), len(src_orders))
        return hom_into(coker, AdmissibleModule([atom]))
    if what == "cokernel":
        ker = map_kernel(Mh, tgt_orders, src_orders)
        kgrp = quotient_group(ker + relation_vectors(tgt_orders), relation_vectors(tgt_orders), len(tgt_orders))
        return hom_into(kgrp, AdmissibleModule([atom]))
    im = quotient_group(map_image(Mh, src_orders), relation_vectors(src_orders), len(src_orders))
    return hom_into(im, AdmissibleModule([atom]))


def induced_from_matrix(source: CohomologyGroup, target: CohomologyGroup, T: list, name: str) -> CohomologyMap:
    """Map with theta_tgt[j] = sum_i theta_src[i] T[i][j], atom by atom."""
    entries = {}
    n_atoms = len(source.module.atoms)
    for i in range(source.adapted.r):
        row = T[i]
        for j, v in enumerate(row):
            if not v:
                continue
            for a in range(n_atoms):
                s = source.cell_index(i, a)
                t = target.cell_index(j, a)
                if s is not None and t is not None:
                    entries[(t, s)] = v
    return CohomologyMap(source, target, entries, name, T=T)


def cochain_map(source: CohomologyGroup, target: CohomologyGroup, L: list, name: str) -> CohomologyMap:
    """The map induced by phi_tgt = phi_src L on cochains (L is r_src x r_tgt)."""
    T = _matmul(_matmul(source.adapted.B_inv, L), target.adapted.B)
    return induced_from_matrix(source, target, T, name)


def _chain_epsilon(cm: ChainMap, k: int) -> list[list[int]]:
    """phi_tgt = phi_src (eps F_k): rows index the target resolution of the chain map."""
    return _materialize(cm.epsilon_matrix(k))


_CHAIN_MAPS: dict = {}


def chain_map_for(f: GroupHom, top: int) -> ChainMap:
    key = (f, top)
    if key not in _CHAIN_MAPS:
        P = resolution(f.source, top)
        Q = resolution(f.target, top)
        _CHAIN_MAPS[key] = comparison_chain_map(P, Q, f, max_degree=top)
    return _CHAIN_MAPS[key]


def induced_map_group_hom(f: GroupHom, M, k: int) -> CohomologyMap:
    """f^*: H^k(target(f), M) -> H^k(source(f), M)."""
    if isinstance(M, str):
        from .abgroup import parse_module
        M = parse_module(M)
    src = CohomologyGroup(f.target, M, k)
    tgt = CohomologyGroup(f.source, M, k)
    cm = chain_map_for(f, k + 1)
    L = _chain_epsilon(cm, k)  # rows: target-group basis, cols: source-group basis
    return cochain_map(src, tgt, L, "f*")


def induced_map_coefficient(phi: ModuleMap, G: GroupDescriptor, k: int,
                            source: Optional[CohomologyGroup] = None,
                            target: Optional[CohomologyGroup] = None) -> CohomologyMap:
    """phi_*: H^k(G, source(phi)) -> H^k(G, target(phi))."""
    src = source or CohomologyGroup(G, phi.source, k)
    tgt = target or CohomologyGroup(G, phi.target, k)
    entries = {}
    for s, cs in enumerate(src.cells):
        for ta in range(len(tgt.module.atoms)):
            q = phi.matrix[ta][cs.atom_index]
            t = tgt.cell_index(cs.pos, ta)
            if q and t is not None:
                entries[(t, s)] = q
    return CohomologyMap(src, tgt, entries, phi.name or "phi*")


def identity_map(H: CohomologyGroup) -> CohomologyMap:
    r = H.adapted.r
    return induced_from_matrix(H, H, [[int(i == j) for j in range(r)] for i in range(r)], "id")


# -- short exact sequences and connecting maps -------------------------------------------

@dataclass
class ShortExactSequence:
    """0 -> A --i--> B --p--> C -> 0 with single-atom C and A of at most one atom."""

    inc: ModuleMap
    proj: ModuleMap
    name: str = ""

    def __post_init__(self):
        certify_ses(self.inc, self.proj)

    @property
    def A(self) -> AdmissibleModule:
        return self.inc.source

    @property
    def B(self) -> AdmissibleModule:
        return self.inc.target

    @property
    def C(self) -> AdmissibleModule:
        return self.proj.target


def _pre(q: Fraction, sub: QSub) -> QSub:
    """{x in Q : q x in sub}."""
    if q == 0:
        return QSub.all()
    return sub.times(1 / Fraction(q))


def certify_ses(inc: ModuleMap, proj: ModuleMap) -> None:
    """Raise ValueError unless 0 -> A -> B -> C -> 0 is exact."""
    if not inc.source.atoms:
        _certify_iso(proj)
        return
    if len(inc.source.atoms) != 1 or len(proj.target.atoms) != 1:
        raise ValueError("exactness certification needs single-atom end terms")
    if inc.target.atoms != proj.source.atoms:
        raise ValueError("middle terms do not match")
    A, C = inc.source.atoms[0].sq, proj.target.atoms[0].sq
    Bs = [a.sq for a in inc.target.atoms]
    alpha = [row[0] for row in inc.matrix]
    beta = proj.matrix[0]
    if not proj.compose(inc).is_zero_map():
        raise ValueError("p after i is not zero")
    # i injective
    kernel = A.num
    for al, b in zip(alpha, Bs):
        kernel = kernel & _pre(al, b.den)
    if not kernel <= A.den:
        raise ValueError("the first map is not injective")
    # p surjective
    reach = C.den
    for be, b in zip(beta, Bs):
        reach = reach + b.num.times(be)
    if not C.num <= reach:
        raise ValueError("the second map is not surjective")
    # ker p in im i, eliminating coordinates where i is onto
    sub_num = A.num
    remaining = list(range(len(Bs)))
    while len(remaining) > 1:
        for j in remaining:
            if Bs[j].num <= sub_num.times(alpha[j]) + Bs[j].den:
                sub_num = sub_num & _pre(alpha[j], Bs[j].den)
                remaining.remove(j)
                break
        else:
            raise ValueError("cannot certify exactness in the middle")
    j = remaining[0]
    ker_p = _pre(beta[j], C.den) & Bs[j].num
    if not ker_p <= sub_num.times(alpha[j]) + Bs[j].den:
        raise ValueError("sequence is not exact in the middle")


def _certify_iso(proj: ModuleMap) -> None:
    """Exactness of 0 -> 0 -> B -> C -> 0 for single atoms B and C."""
    if len(proj.source.atoms) != 1 or len(proj.target.atoms) != 1:
        raise ValueError("with a zero left term both other terms must be single atoms")
    B, C = proj.source.atoms[0].sq, proj.target.atoms[0].sq
    beta = proj.matrix[0][0]
    if not C.num <= B.num.times(beta) + C.den:
        raise ValueError("the second map is not surjective")
    if not _pre(beta, C.den) & B.num <= B.den:
        raise ValueError("the second map is not injective")


def connecting_map(ses: ShortExactSequence, G: GroupDescriptor, k: int) -> CohomologyMap:
    """The connecting homomorphism H^k(G, C) -> H^{k+1}(G, A), computed on cochains."""
    src = CohomologyGroup(G, ses.C, k)
    tgt = CohomologyGroup(G, ses.A, k + 1)
    D = src.data.eps(k + 1)
    entries = {}
    for s, cell in enumerate(src.cells):
        if cell.kind != "tors":
            continue  # ext and free classes lift to cocycles with values in B
        g = cell.sq.generator()
        x = src.zero()
        x[s] = g
        phi_c = src.cocycle(x)
        lifted = []
        for v in phi_c:
            pre = ses.proj.preimage(v)
            if pre is None:
                raise ValueError("could not lift a cochain value")
            lifted.append(pre)
        nB = len(ses.B.atoms)
        phi_a = []
        for j in range(D.cols):
            val = [Fraction(0)] * nB
            for i in range(D.rows):
                c = D.data[i][j]
                if c:
                    for a in range(nB):
                        val[a] += c * lifted[i][a]
            pre = ses.inc.preimage(ses.B.reduce(val))
            if pre is None:
                raise ValueError("coboundary of the lift does not come from A")
            phi_a.append(pre)
        y = tgt.class_of(phi_a)
        for t, v in enumerate(y):
            if not tgt.cells[t].sq.is_zero_element(v):
                entries[(t, s)] = _fit_multiplier(cell.sq, tgt.cells[t].sq, g, v)
    return CohomologyMap(src, tgt, entries, "connecting")


def _fit_multiplier(src: Subquotient, tgt: Subquotient, g: Fraction, v: Fraction) -> Fraction:
    """A rational q with q*g = v in tgt that is well defined on the cyclic cell src."""
    step = tgt.den.scale if tgt.den.kind == "loc" else Fraction(0)
    n = src.order()
    for k in range(0, max(n, 1) * 4 + 1):
        for sign in (1, -1):
            q = (v + sign * k * step) / g
            if src.num.times(q) <= tgt.num and src.den.times(q) <= tgt.den:
                return q
            if step == 0:
                break
    raise ValueError("connecting map is not representable by a multiplier")


# -- exactness certificates ------------------------------------------------------------------

@dataclass
class SpotCertificate:
    spot: str
    method: str
    composite_zero: bool
    exact: bool
    detail: str = ""

    def as_dict(self) -> dict:
        return {"spot": self.spot, "method": self.method, "compositeZero": self.composite_zero,
                "exact": self.exact, "detail": self.detail}


def certify_exact_at(f: CohomologyMap, g: CohomologyMap, spot: str) -> list[SpotCertificate]:
    """Exactness of A --f--> B --g--> C at B (one certificate per atom when split by atoms)."""
    comp = g.compose(f).is_zero()
    cyclic = all(H.is_fg_cells() for H in (f.source, f.target, g.target))
    if cyclic:
        Mf, Mg = f.integer_matrix(), g.integer_matrix()
        oa, ob, oc = _cell_orders(f.source), _cell_orders(f.target), _cell_orders(g.target)
        if not comp:
            return [SpotCertificate(spot, "lattice", False, False, "composite nonzero")]
        H = complex_homology(Mf, Mg, oa, ob, oc)
        return [SpotCertificate(spot, "lattice", True, H.is_zero(), f"defect {H}")]
    if f.is_atom_diagonal() and g.is_atom_diagonal():
        atoms = f.source.module.atoms
        if len(atoms) > 1:
            out = []
            for a in range(len(atoms)):
                out += certify_exact_at(_per_atom(f, a), _per_atom(g, a), f"{spot}[{atoms[a]}]")
            return out
        atom = atoms[0]
        if atom.kind == "Loc":
            z = AdmissibleModule.raw([Atom.z()])
            groups = [CohomologyGroup(H.group, z, H.degree) for H in (f.source, f.target, g.target)]
            fz = induced_from_matrix(groups[0], groups[1], f.T, f.name)
            gz = induced_from_matrix(groups[1], groups[2], g.T, g.name)
            sub = certify_exact_at(fz, gz, spot)
            return [SpotCertificate(spot, "lattice over Z, localized", comp and c.composite_zero, c.exact,
                                    c.detail) for c in sub]
        if atom.divisible:
            # homology side: H(C) --g_*--> H(B) --f_*--> H(A); need Hom(defect, X) = 0
            Mg, oc, ob = _homology_side(g, 0)
            Mf, ob2, oa = _homology_side(f, 0)
            try:
                defect = complex_homology(Mg, Mf, oc, ob, oa)
            except ValueError:
                return [SpotCertificate(spot, "dual homology", comp, False, "homology composite nonzero")]
            ok = hom_into(defect, AdmissibleModule([atom])).is_zero()
            return [SpotCertificate(spot, "dual homology", comp, comp and ok, f"defect {defect}")]
    return [SpotCertificate(spot, "rank", comp, comp and _rank_check(f, g), "rational rank count only")]


def _rank_check(f: CohomologyMap, g: CohomologyMap) -> bool:
    """Rational ranks: dim ker(g) = dim im(f) on torsion-free cells."""
    def tf(H):
        return [i for i, c in enumerate(H.cells) if c.atoms() and c.atoms()[0].torsion_free]

    def rank_of(m: CohomologyMap) -> int:
        rows, cols = tf(m.target), tf(m.source)
        mat = [[m.entries.get((t, s), Fraction(0)) for s in cols] for t in rows]
        return _rational_rank(mat)

    b = len(tf(f.target))
    return b - rank_of(g) == rank_of(f)


def _rational_rank(mat: list[list[Fraction]]) -> int:
    m = [row[:] for row in mat]
    rank = 0
    cols = len(m[0]) if m else 0
    for c in range(cols):
        piv = next((r for r in range(rank, len(m)) if m[r][c] != 0), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        for r in range(len(m)):
            if r != rank and m[r][c] != 0:
                t = m[r][c] / m[rank][c]
                m[r] = [x - t * y for x, y in zip(m[r], m[rank])]
        rank += 1
    return rank


def long_exact_sequence_check(ses: ShortExactSequence, G: GroupDescriptor, k: int) -> list[SpotCertificate]:
    """Certificates for H^k(A) -> H^k(B) -> H^k(C) -> H^{k+1}(A) -> H^{k+1}(B)."""
    HkA, HkB, HkC = (CohomologyGroup(G, M, k) for M in (ses.A, ses.B, ses.C))
    Hk1A, Hk1B = CohomologyGroup(G, ses.A, k + 1), CohomologyGroup(G, ses.B, k + 1)
    i_k = induced_map_coefficient(ses.inc, G, k, HkA, HkB)
    p_k = induced_map_coefficient(ses.proj, G, k, HkB, HkC)
    delta = connecting_map(ses, G, k)
    i_k1 = induced_map_coefficient(ses.inc, G, k + 1, Hk1A, Hk1B)
    out = certify_exact_at(i_k, p_k, f"H^{k}(B)")
    out += certify_exact_at(p_k, delta, f"H^{k}(C)")
    out += certify_exact_at(delta, i_k1, f"H^{k + 1}(A)")
    return out


# -- Wang sequence --------------------------------------------------------------------------

@dataclass
class WangResult:
    term1: AdmissibleModule
    term2: AdmissibleModule
    term3: AdmissibleModule
    maps: dict
    certificate: list

    @property
    def exact(self) -> bool:
        return all(c.exact for c in self.certificate)

    def as_tuple(self):
        return self.term1, self.term2, self.term3, self.maps, self.certificate


def wang_maps(G: SemidirectZ, M: AdmissibleModule, k: int = 3) -> dict:
    """Maps of the Wang sequence around H^k(G, M)."""
    if not isinstance(G, SemidirectZ):
        raise ValueError("the Wang sequence needs a semidirect product N x| Z")
    N = G.normal
    cone = resolution(G, k + 1)
    assert isinstance(cone, ConeResolution)
    Hn_prev = CohomologyGroup(N, M, k - 1)
    Hg = CohomologyGroup(G, M, k)
    Hn = CohomologyGroup(N, M, k)
    # the inner resolution of the cone and the cached resolution of N agree as complexes
    _assert_same_complex(cone.inner, complex_data(N, k).res, k + 1)
    rN_prev, rG, rN = cone.inner.rank(k - 1), cone.rank(k), cone.inner.rank(k)
    off = cone.offset(k)
    iota_L = [[int(c == off + b) for c in range(rG)] for b in range(rN_prev)]
    res_L = [[int(a == b) for b in range(rN)] for a in range(rG)]
    maps = {"iota": cochain_map(Hn_prev, Hg, iota_L, "iota"),
            "res": cochain_map(Hg, Hn, res_L, "res")}
    for deg, H in ((k - 1, Hn_prev), (k, Hn)):
        X = _materialize(cone.twist_epsilon(deg))
        xi = cochain_map(H, H, X, f"xi*{deg}")
        ident = identity_map(H)
        maps[f"xi{deg}"] = xi
        maps[f"1-xi{deg}"] = ident.scaled_difference(xi)
    return maps


def _assert_same_complex(a: FreeResolution, b: FreeResolution, top: int) -> None:
    for k in range(1, top + 1):
        if a.epsilon_matrix(k) != b.epsilon_matrix(k):
            raise AssertionError("resolution mismatch")


def wang_sequence(G: SemidirectZ, M, k: int = 3) -> WangResult:
    if isinstance(M, str):
        from .abgroup import parse_module
        M = parse_module(M)
    maps = wang_maps(G, M, k)
    a = maps[f"1-xi{k - 1}"]
    b = maps[f"1-xi{k}"]
    term1 = a.cokernel()
    term3 = b.kernel()
    term2 = maps["iota"].target.value
    cert = certify_exact_at(a, maps["iota"], "coker(1-xi*) -> H(G)")
    cert += certify_exact_at(maps["iota"], maps["res"], "H(G)")
    cert += certify_exact_at(maps["res"], b, "H(G) -> ker(1-xi*)")
    return WangResult(term1, term2, term3, maps, cert)


# -- cochains on groups ------------------------------------------------------------------------

@dataclass
class CochainWindow:
    """A normalized M-valued k-cochain on G given by an evaluator on k-tuples of elements."""

    group: GroupDescriptor
    module: AdmissibleModule
    degree: int
    evaluate: Callable
    label: str = ""
    bilinear: Optional[tuple] = None      # (matrix over the normal coordinates, scale) for fast paths
    iota_data: Optional[dict] = None

    def __call__(self, *args):
        return self.evaluate(*args)


def element_window(G: GroupDescriptor, radius: int = 3, mode: str = "box") -> list[tuple]:
    """Group elements with exponents in [-radius, radius]: all combinations or generator powers."""
    model = group_model(G)
    if isinstance(G, SemidirectZ):
        ngen = len(abelian_orders(G.normal)) + 1
        orders = list(abelian_orders(G.normal)) + [0]
    else:
        orders = abelian_orders(G)
        ngen = len(orders)

    def rng(o):
        return range(o) if o and o <= 2 * radius + 1 else range(-radius, radius + 1)

    if mode == "box":
        out = []
        for exps in product(*(rng(o) for o in orders)):
            out.append(_normal_form(model, G, exps))
        return sorted(set(out))
    out = {_normal_form(model, G, [0] * ngen)}
    for i in range(ngen):
        for e in range(-radius, radius + 1):
            exps = [0] * ngen
            exps[i] = e
            out.add(_normal_form(model, G, exps))
    return sorted(out)


def _normal_form(model, G, exps) -> tuple:
    if isinstance(G, SemidirectZ):
        return model.normal.reduce(exps[:-1]) + (exps[-1],)
    return model.reduce(exps)


@dataclass
class VerifyReport:
    checked: int
    violations: list
    status: str

    @property
    def ok(self) -> bool:
        return not self.violations


def cocycle_verify(c: CochainWindow, window: Optional[Sequence] = None, max_report: int = 20) -> VerifyReport:
    """Check the 3-cocycle identity (trivial action) on all 4-tuples from the window."""
    if c.degree != 3:
        raise ValueError("cocycle_verify handles 3-cochains")
    G = c.group
    finite = group_order(G) > 0
    if window is None:
        window = group_model(G).elements() if finite else element_window(G, 3, "axes")
    window = list(window)
    fast = _fast_verify(c, window)
    if fast is not None:
        checked, bad = fast
    else:
        checked, bad = _slow_verify(c, window, max_report)
    full = finite and len(window) == group_order(G)
    status = ("verified" if full else "verified on window") if not bad else "violated"
    return VerifyReport(checked, bad[:max_report], status)


def _slow_verify(c: CochainWindow, window: list, max_report: int):
    model = group_model(c.group)
    M = c.module
    n_atoms = len(M.atoms)
    bad = []
    checked = 0
    prod_table = {(a, b): model.mul(a, b) for a in window for b in window}
    memo: dict = {}

    def ev(*args):
        v = memo.get(args)
        if v is None:
            v = memo[args] = c(*args)
        return v

    for g, h, k, l in product(window, repeat=4):
        gh, hk, kl = prod_table[(g, h)], prod_table[(h, k)], prod_table[(k, l)]
        v0, v1, v2, v3, v4 = ev(h, k, l), ev(gh, k, l), ev(g, hk, l), ev(g, h, kl), ev(g, h, k)
        checked += 1
        for a in range(n_atoms):
            if not M.atoms[a].sq.is_zero_element(v0[a] - v1[a] + v2[a] - v3[a] + v4[a]):
                bad.append((g, h, k, l))
                break
        if len(bad) >= max_report:
            break
    return checked, bad


def _modulus_for(M: AdmissibleModule, scale: int) -> Optional[int]:
    """Integer modulus L such that values v/scale vanish in M iff v = 0 mod L."""
    if len(M.atoms) != 1:
        return None
    a = M.atoms[0]
    if a.kind == "ZMod":
        return a.m * scale
    if a.kind == "QZ":
        return scale
    if a.kind == "Pr" and split_part(scale, a.primes)[1] == 1:
        return scale
    return None


def _window_products(G: GroupDescriptor, W: list):
    model = group_model(G)
    products = [[model.mul(a, b) for b in W] for a in W]
    P = sorted(set(W).union(*products))
    index_p = {g: i for i, g in enumerate(P)}
    prod_idx = np.array([[index_p[x] for x in row] for row in products], dtype=np.int64)
    w_in_p = np.array([index_p[g] for g in W], dtype=np.int64)
    return P, prod_idx, w_in_p


def _fast_verify(c: CochainWindow, window: list):
    """Table-driven check: omega on P x W x W, W x P x W and W x W x P as integers mod L.

    Bilinear iota cochains fill the tables with numpy; other single-atom
    cochains are evaluated once per needed triple.
    """
    W = window
    if len(c.module.atoms) != 1:
        return None
    if c.iota_data is None and len(W) > 40:
        return None  # dense tables would cost more than the direct scan
    P, prod_idx, w_in_p = _window_products(c.group, W)
    if c.iota_data is not None:
        info = c.iota_data
        L = _modulus_for(c.module, info["scale"])
        if L is None:
            return None
        evaluator = info["vector"]
        P_arr, W_arr = np.array(P, dtype=np.int64), np.array(W, dtype=np.int64)
        raw = [evaluator(P_arr, W_arr, W_arr), evaluator(W_arr, P_arr, W_arr), evaluator(W_arr, W_arr, P_arr)]
    else:
        memo: dict = {}
        shapes = [(P, W, W), (W, P, W), (W, W, P)]
        for A, B, C in shapes:
            for x in A:
                for y in B:
                    for z in C:
                        if (x, y, z) not in memo:
                            memo[(x, y, z)] = Fraction(c(x, y, z)[0])
        scale = 1
        for v in memo.values():
            scale = scale * v.denominator // gcd(scale, v.denominator)
        L = _modulus_for(c.module, scale)
        if L is None:
            return None
        raw = []
        for A, B, C in shapes:
            raw.append(np.array([[[int(memo[(x, y, z)] * scale) for z in C] for y in B] for x in A], dtype=np.int64))
    t_pww, t_wpw, t_wwp = ((t % L).astype(np.int32) for t in raw)
    www = np.ascontiguousarray(t_pww[w_in_p])  # omega(W, W, W)
    kernel = _window_kernel()
    if kernel is not None:
        found_at = np.zeros((20, 4), dtype=np.int64)
        found = kernel(www, t_pww, t_wpw, t_wwp, prod_idx, L, found_at, 20)
        bad = [tuple(W[i] for i in row) for row in found_at[:min(found, 20)]]
        return len(W) ** 4, bad
    return _numpy_scan(W, www, t_pww, t_wpw, t_wwp, prod_idx, L)


def _numpy_scan(W, www, t_pww, t_wpw, t_wwp, prod_idx, L):
    nW = len(W)
    bad = []
    checked = 0
    for gi in range(nW):
        tot = (www - t_pww[prod_idx[gi]] + t_wpw[gi][prod_idx] - t_wwp[gi][:, prod_idx]
               + www[gi][:, :, None]) % L
        checked += nW ** 3
        if tot.any():
            for h, k, l in zip(*np.nonzero(tot)):
                bad.append((W[gi], W[h], W[k], W[l]))
                if len(bad) >= 20:
                    return checked, bad
    return checked, bad


@lru_cache(maxsize=1)
def _window_kernel():
    """Compiled 4-tuple scan; None when numba is unavailable."""
    try:
        from numba import njit
    except ImportError:  # pragma: no cover
        return None

    @njit(cache=True)
    def scan(www, t_pww, t_wpw, t_wwp, prod, L, out, max_out):
        n = www.shape[0]
        found = 0
        for g in range(n):
            for h in range(n):
                gh = prod[g, h]
                for k in range(n):
                    hk = prod[h, k]
                    base = www[g, h, k]
                    for l in range(n):
                        v = www[h, k, l] - t_pww[gh, k, l] + t_wpw[g, hk, l] - t_wwp[g, h, prod[k, l]] + base
                        if v % L != 0:
                            if found < max_out:
                                out[found, 0] = g
                                out[found, 1] = h
                                out[found, 2] = k
                                out[found, 3] = l
                            found += 1
        return found

    return scan


def coboundary_of(b: Callable, G: GroupDescriptor, M: AdmissibleModule, degree: int = 2) -> CochainWindow:
    """The coboundary of a normalized 2-cochain (trivial action)."""
    model = group_model(G)
    mul = model.mul

    def ev(g, h, k):
        v1, v2, v3, v4 = b(h, k), b(mul(g, h), k), b(g, mul(h, k)), b(g, h)
        return M.reduce([v1[a] - v2[a] + v3[a] - v4[a] for a in range(len(M.atoms))])

    return CochainWindow(G, M, 3, ev, "coboundary")


# -- iota formula -----------------------------------------------------------------------------

def bilinear_rho(N: GroupDescriptor, M: AdmissibleModule, matrix: Sequence[Sequence], label: str = "rho1") -> CochainWindow:
    """rho(a, b) = a^T R b, a bilinear (hence cocycle) 2-cochain on an abelian N."""
    R = [[Fraction(x) for x in row] for row in matrix]
    if len(M.atoms) != 1:
        raise ValueError("bilinear cochains take single-atom coefficients")

    def ev(a, b):
        v = sum((a[i] * R[i][j] * b[j] for i in range(len(a)) for j in range(len(b))), Fraction(0))
        return M.reduce([v])

    scale = 1
    for row in R:
        for x in row:
            scale = scale * x.denominator // gcd(scale, x.denominator)
    return CochainWindow(N, M, 2, ev, label, bilinear=(R, scale))


def two_cocycle_check(rho: CochainWindow, window: Sequence) -> list:
    fast = _bilinear_two_cocycle_check(rho, window)
    if fast is not None:
        return fast
    model = group_model(rho.group)
    M = rho.module
    bad = []
    for a, b, c in product(window, repeat=3):
        v = [rho(b, c)[i] - rho(model.mul(a, b), c)[i] + rho(a, model.mul(b, c))[i] - rho(a, b)[i]
             for i in range(len(M.atoms))]
        if not all(atom.sq.is_zero_element(x) for atom, x in zip(M.atoms, v)):
            bad.append((a, b, c))
    ident = model.identity()
    for a in window:
        if not all(atom.sq.is_zero_element(x) for atom, x in zip(M.atoms, rho(ident, a))) or \
                not all(atom.sq.is_zero_element(x) for atom, x in zip(M.atoms, rho(a, ident))):
            bad.append((ident, a))
    return bad


def _bilinear_two_cocycle_check(rho: CochainWindow, window: Sequence) -> Optional[list]:
    """Integer version of the 2-cocycle test for bilinear rho (values scaled by the common denominator)."""
    if rho.bilinear is None:
        return None
    R, scale = rho.bilinear
    L = _modulus_for(rho.module, scale)
    if L is None:
        return None
    Ri = np.array([[int(x * scale) for x in row] for row in R], dtype=np.int64)
    orders = np.array(abelian_orders(rho.group), dtype=np.int64)
    A = np.array(window, dtype=np.int64)

    def red(x):
        return np.where(orders > 0, np.mod(x, np.where(orders > 0, orders, 1)), x)

    AB = red(A[:, None, :] + A[None, :, :])                          # [a, b, r]
    rho_ab_c = np.einsum("abi,ij,cj->abc", AB, Ri, A)               # rho(ab, c)
    rho_a_bc = np.einsum("ai,ij,bcj->abc", A, Ri, AB)               # rho(a, bc)
    rho_w = A @ Ri @ A.T                                              # rho(x, y)
    tot = (rho_w[None, :, :] - rho_ab_c + rho_a_bc - rho_w[:, :, None]) % L
    return [(window[a], window[b], window[c]) for a, b, c in zip(*np.nonzero(tot))][:20]


def _mat_pow(mat, inv, l: int):
    r = len(mat)
    out = [[Fraction(int(i == j)) for j in range(r)] for i in range(r)]
    base = mat if l >= 0 else inv
    for _ in range(abs(l)):
        out = [[sum(base[i][k] * out[k][j] for k in range(r)) for j in range(r)] for i in range(r)]
    return out


def iota_cocycle_evaluate(rho1: CochainWindow, G: SemidirectZ, window: Optional[Sequence] = None) -> CochainWindow:
    """omega(n1 xi^l1, n2 xi^l2, n3 xi^l3) = -rho_{l1}(xi^l1(n2), xi^(l1+l2)(n3)).

    rho_l is the 1-cocycle extension rho_{m+n} = rho_m + xi^m_* rho_n of rho_1,
    with (xi^j_* mu)(a, b) = mu(phi^-j a, phi^-j b).
    """
    if not isinstance(G, SemidirectZ):
        raise ValueError("iota needs a semidirect product")
    N = G.normal
    model = group_model(G)
    n_window = window if window is not None else element_window(N, 2, "box")
    bad = two_cocycle_check(rho1, n_window)
    if bad:
        raise ValueError(f"rho1 fails the 2-cocycle test at {bad[0]}")
    M = rho1.module
    na = len(M.atoms)

    def rho_l(l: int, a, b):
        out = [Fraction(0)] * na
        if l >= 0:
            js = [(-j, 1) for j in range(l)]
        else:
            js = [(i, -1) for i in range(1, -l + 1)]
        for power, sign in js:
            v = rho1(model.act(power, a), model.act(power, b))
            for i in range(na):
                out[i] += sign * v[i]
        return out

    def ev(g1, g2, g3):
        l1, l2 = g1[-1], g2[-1]
        v = rho_l(l1, model.act(l1, g2[:-1]), model.act(l1 + l2, g3[:-1]))
        return M.reduce([-x for x in v])

    iota_data = None
    if rho1.bilinear is not None:
        iota_data = _vector_iota(G, model, rho1.bilinear)
    return CochainWindow(G, M, 3, ev, "iota", iota_data=iota_data)


def _vector_iota(G: SemidirectZ, model, bilinear) -> dict:
    """Integer-valued vectorised evaluator: omega * scale as int64 arrays."""
    R, scale = bilinear
    Ri = np.array([[int(x * scale) for x in row] for row in R], dtype=np.int64)
    phi = [[Fraction(x) for x in row] for row in G.phi]
    phinv = [[Fraction(x) for x in row] for row in phi_inverse(G)]
    cache_phi: dict = {}
    cache_R: dict = {}

    def P(l):
        if l not in cache_phi:
            cache_phi[l] = np.array([[int(x) for x in row] for row in _mat_pow(phi, phinv, l)], dtype=np.int64)
        return cache_phi[l]

    def R_l(l):
        # rho_l(a, b) = a^T R_l b
        if l not in cache_R:
            acc = np.zeros_like(Ri)
            if l >= 0:
                for j in range(l):
                    Pm = P(-j)
                    acc = acc + Pm.T @ Ri @ Pm
            else:
                for i in range(1, -l + 1):
                    Pm = P(i)
                    acc = acc - Pm.T @ Ri @ Pm
            cache_R[l] = acc
        return cache_R[l]

    def vector(A, B, C):
        """omega(a, b, c) * scale for all triples of rows; returns array [len A, len B, len C]."""
        lA, lB = A[:, -1], B[:, -1]
        nB, nC = B[:, :-1], C[:, :-1]
        out = np.zeros((len(A), len(B), len(C)), dtype=np.int64)
        for l1 in np.unique(lA):
            rows = np.nonzero(lA == l1)[0]
            for l2 in np.unique(lB):
                cols = np.nonzero(lB == l2)[0]
                Q = P(int(l1)).T @ R_l(int(l1)) @ P(int(l1 + l2))
                vals = -(nB[cols] @ Q @ nC.T)          # [cols, C]
                out[np.ix_(rows, cols, np.arange(len(C)))] = vals[None, :, :]
        return out

    return {"vector": vector, "scale": scale}


# -- class extraction ------------------------------------------------------------------------

class AbstractBar(FreeResolution):
    """Normalized bar resolution of any group, with cell tuples as basis labels."""

    has_contraction = True

    def __init__(self, G: GroupDescriptor, max_degree: int):
        super().__init__(G, group_model(G), max_degree)
        self.kind = "bar"

    def index(self, k, label):
        return label

    def _boundary(self, k, cells):
        ident = self.model.identity()
        out: dict = {}
        add_into(out, {(cells[1:], cells[0]): 1})
        for i in range(k - 1):
            merged = self.model.mul(cells[i], cells[i + 1])
            if merged != ident:
                add_into(out, {(cells[:i] + (merged,) + cells[i + 2:], ident): (-1) ** (i + 1)})
        add_into(out, {(cells[:-1], ident): (-1) ** k})
        return out

    def _contract(self, k, cells, g):
        if g == self.model.identity():
            return {}
        return {((g,) + cells, self.model.identity()): 1}

    def contract(self, k, x):
        if k == -1:
            return {((), self.model.identity()): x} if x else {}
        out: dict = {}
        for (cells, g), c in x.items():
            add_into(out, self._contract(k, cells, g), c)
        return out


def _class_via_bar(c: CochainWindow, G: GroupDescriptor, M: AdmissibleModule) -> tuple[CohomologyGroup, list]:
    H = CohomologyGroup(G, M, 3)
    P = H.data.res
    bar = AbstractBar(G, 4)
    ident = GroupHom.identity(G)
    cm = ChainMap(P, bar, ident, 3)
    phi = []
    na = len(M.atoms)
    for j in range(P.rank(3)):
        val = [Fraction(0)] * na
        for (cells, _), coeff in cm.component(3, j).items():
            v = c(*cells)
            for a in range(na):
                val[a] += coeff * v[a]
        phi.append(tuple(M.reduce(val)))
    return H, H.class_of(phi)


def class_of_finite_cocycle(c: CochainWindow) -> tuple[CohomologyGroup, list]:
    """Class of a 3-cocycle on a finite abelian group (checked on the whole group first)."""
    G = c.group
    if not is_abelian(G) or group_order(G) == 0:
        raise ValueError("finite abelian group required")
    rep = cocycle_verify(c)
    if not rep.ok:
        raise ValueError("cochain is not a cocycle")
    return _class_via_bar(c, G, c.module)


def class_of_zn_cocycle(c: CochainWindow, M: Optional[AdmissibleModule] = None,
                        window_radius: int = 3) -> dict:
    """Coordinates of a 3-cocycle on Z^n in H^3(Z^n, M) = M^C(n,3), keyed by index triples."""
    M = M or c.module
    G = c.group
    if isinstance(G, SemidirectZ):
        if any(any(int(i == j) != v for j, v in enumerate(row)) for i, row in enumerate(G.phi)) or \
                any(o != 0 for o in abelian_orders(G.normal)):
            raise ValueError("class extraction is available for Z^n and finite groups only (evaluation only here)")
        n = len(G.phi) + 1
        flat = FreeAb(n)
        cc = CochainWindow(flat, M, 3, c.evaluate, c.label, iota_data=c.iota_data)
    else:
        if not all(o == 0 for o in abelian_orders(G)):
            raise ValueError("class_of_zn_cocycle needs a free abelian group")
        flat = G
        cc = c
    rep = cocycle_verify(CochainWindow(flat, M, 3, cc.evaluate, iota_data=cc.iota_data),
                         element_window(flat, window_radius, "axes"))
    if not rep.ok:
        raise ValueError("cochain fails the cocycle identity on the window")
    H, cls = _class_via_bar(cc, flat, M)
    res = H.data.res
    out = {}
    for cell, v in zip(H.cells, cls):
        label = res.basis(3)[cell.pos]
        triple = tuple(i + 1 for i, (d, _) in enumerate(label) if d == 1)
        out[triple] = out.get(triple, ()) + (v,)
    for label in res.basis(3):
        triple = tuple(i + 1 for i, (d, _) in enumerate(label) if d == 1)
        out.setdefault(triple, tuple(Fraction(0) for _ in M.atoms))
    return dict(sorted(out.items()))


# -- coboundary reduction --------------------------------------------------------------------

@lru_cache(maxsize=32)
def _bar_d3(G: GroupDescriptor):
    bar = bar_truncation(G, 3)
    D = bar.epsilon_matrix(3)
    return bar, D, smith_normal_form(D)


def _divide_in(sq: Subquotient, v: Fraction, e: int) -> Optional[Fraction]:
    """Some x in N with e x = v modulo D, or None."""
    step = sq.den.scale if sq.den.kind == "loc" else Fraction(0)
    if sq.den.kind == "all":
        return Fraction(0)
    tries = range(e) if step else range(1)
    for t in tries:
        x = (v + t * step) / e
        if sq.contains(x):
            return x
    return None


def coboundary_reduce(c: CochainWindow, G: Optional[GroupDescriptor] = None) -> Optional[Callable]:
    """A normalized 2-cochain b with db = c on a finite abelian group, or None if [c] != 0."""
    G = G or c.group
    if not is_abelian(G) or group_order(G) == 0:
        raise ValueError("coboundary reduction needs a finite abelian group")
    M = c.module
    bar, D, snf = _bar_d3(G)
    r2, r3 = D.rows, D.cols
    na = len(M.atoms)
    cvec = [c(*bar.label(3, j)) for j in range(r3)]
    cV = [snf.row_apply_V([cv[a] for cv in cvec]) for a in range(na)]  # per atom, length r3
    beta = [[Fraction(0)] * r2 for _ in range(na)]
    for a, atom in enumerate(M.atoms):
        sq = atom.sq
        for i in range(r3):
            if i < snf.rank:
                x = _divide_in(sq, Fraction(cV[a][i]), snf.invariant_factors[i])
                if x is None:
                    return None
                beta[a][i] = x
            elif not sq.is_zero_element(cV[a][i]):
                return None
    b_vals = [snf.row_apply_U(beta[a]) for a in range(na)]
    table = {bar.label(2, i): M.reduce([b_vals[a][i] for a in range(na)]) for i in range(r2)}
    ident = bar.model.identity()
    zero = M.zero_element()

    def b(g, h):
        if g == ident or h == ident:
            return zero
        return table[(g, h)]

    check = coboundary_of(b, G, M)
    for j in range(r3):
        cells = bar.label(3, j)
        if not M.equal(check(*cells), c(*cells)):
            raise AssertionError("primitive does not reproduce the cocycle")
    return b


def table_cochain(G: GroupDescriptor, M: AdmissibleModule, degree: int, values: dict, label: str = "") -> CochainWindow:
    """A cochain from a finite table; missing tuples evaluate to zero."""
    zero = M.zero_element()

    def ev(*args):
        return M.reduce(values.get(tuple(args), zero))

    return CochainWindow(G, M, degree, ev, label)

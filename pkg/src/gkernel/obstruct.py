"""Obstruction value groups, ev1-image constraints and the Z^n realization checks.

Maps induced by coefficient homomorphisms act slot by slot on the adapted
cell decomposition of H^k(G, M). When the target (or the source) has a
single atom, images and kernels therefore split cell by cell and can be
written as subquotients of Q without any lattice work.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import NamedTuple, Optional

from .abgroup import (AdmissibleModule, Atom, FgAbelianGroup, ModuleMap, Subquotient, ext_into, is_pure_subgroup,
                      lattice_eq, prime_factors, quotient_group, relation_vectors, split_part)
from .cohom import (CohomologyGroup, CohomologyMap, chain_map_for, complex_data, induced_map_coefficient,
                    induced_map_group_hom, integral_homology, kunneth_decomposition, kunneth_total)
from .exactlin import IntMatrix, hstack, kernel_basis
from .groupcat import (FinAb, FreeAb, GroupDescriptor, GroupHom, SemidirectZ, abelian_orders, group_order,
                       hirsch_length, is_free_abelian)
from .ksharp import AlgebraModel, k_sharp, reduced_k0, trace_sequence

DEGREE = 3
CONJECTURAL = "conjectural per Conjecture C3/C4"


class UnsupportedGroup(ValueError):
    pass


# -- cellwise subgroups ------------------------------------------------------------------------

@dataclass
class CellSubgroup:
    """A subgroup of H given by one numerator per cell (each containing the cell's denominator)."""

    group: CohomologyGroup
    nums: list

    @property
    def module(self) -> AdmissibleModule:
        atoms = []
        for cell, num in zip(self.group.cells, self.nums):
            atoms += Subquotient(num, cell.sq.den).atoms()
        return AdmissibleModule(atoms)

    def __eq__(self, other) -> bool:
        return (isinstance(other, CellSubgroup) and len(self.nums) == len(other.nums)
                and all(a == b for a, b in zip(self.nums, other.nums)))

    def __le__(self, other: "CellSubgroup") -> bool:
        return all(a <= b for a, b in zip(self.nums, other.nums))

    def is_zero(self) -> bool:
        return all(num <= cell.sq.den for cell, num in zip(self.group.cells, self.nums))

    def is_everything(self) -> bool:
        return all(cell.sq.num <= num for cell, num in zip(self.group.cells, self.nums))

    def contains(self, x) -> bool:
        return all(num.contains(v) for num, v in zip(self.nums, x))

    def generators(self) -> list[str]:
        out = []
        for cell, num in zip(self.group.cells, self.nums):
            sq = Subquotient(num, cell.sq.den)
            if sq.is_zero():
                continue
            out.append(f"slot {cell.pos}: " + (str(sq.generator()) if sq.is_cyclic_fg() else str(sq)))
        return out

    def describe(self) -> dict:
        return {"structure": str(self.module), "generators": self.generators()}


def full_subgroup(H: CohomologyGroup) -> CellSubgroup:
    return CellSubgroup(H, [c.sq.num for c in H.cells])


def multiple_subgroup(H: CohomologyGroup, n: int) -> CellSubgroup:
    """n * H."""
    return CellSubgroup(H, [c.sq.num.times(n) + c.sq.den for c in H.cells])


def primary_subgroup(H: CohomologyGroup, primes) -> CellSubgroup:
    """The P-primary part of a group whose cells are all finite."""
    nums = []
    for c in H.cells:
        if not c.sq.is_finite():
            raise ValueError("primary parts are computed for finite cells only")
        d = c.sq.order()
        inside, outside = split_part(d, primes)
        nums.append(c.sq.num.times(outside) + c.sq.den)
    return CellSubgroup(H, nums)


def coefficient_image(f: CohomologyMap) -> CellSubgroup:
    """Image of a coefficient-induced map whose target has a single atom."""
    if len(f.target.module.atoms) != 1:
        raise ValueError("cellwise images need a single-atom target")
    nums = [c.sq.den for c in f.target.cells]
    for (t, s), q in f.entries.items():
        nums[t] = nums[t] + f.source.cells[s].sq.num.times(q)
    return CellSubgroup(f.target, nums)


def coefficient_kernel(f: CohomologyMap) -> CellSubgroup:
    """Kernel of a coefficient-induced map whose source has a single atom."""
    if len(f.source.module.atoms) != 1:
        raise ValueError("cellwise kernels need a single-atom source")
    nums = [c.sq.num for c in f.source.cells]
    for (t, s), q in f.entries.items():
        nums[s] = nums[s] & f.target.cells[t].sq.den.times(1 / q)
    return CellSubgroup(f.source, [n + c.sq.den for n, c in zip(nums, f.source.cells)])


# -- ev1 image -------------------------------------------------------------------------------------

def ev1_map(G: GroupDescriptor, A: AlgebraModel, k: int = DEGREE) -> CohomologyMap:
    return induced_map_coefficient(k_sharp(A).ev1, G, k)


def ev1_image_h3(G: GroupDescriptor, A: AlgebraModel) -> CellSubgroup:
    """Image of ev1_*: H^3(G, K0#(A)) -> H^3(G, Q/Z)."""
    return coefficient_image(ev1_map(G, A))


# -- report --------------------------------------------------------------------------------------

def is_poly_z(G: GroupDescriptor) -> bool:
    if isinstance(G, SemidirectZ):
        return isinstance(G.normal, FreeAb) or all(o == 0 for o in abelian_orders(G.normal))
    return is_free_abelian(G)


@dataclass
class Citation:
    theorem: str
    statement: str
    hypotheses: dict
    applies: bool
    verified: Optional[bool] = None

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class ObstructionReport:
    group: str
    algebra: str
    valueGroup: AdmissibleModule
    obGroup: AdmissibleModule
    reducedGroup: AdmissibleModule
    ev1Image: CellSubgroup
    deltaOneTarget: AdmissibleModule
    jAEmbedding: dict
    sequenceStatement: dict
    theoremCitations: list
    conjectureFlags: list
    notes: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    checks: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "group": self.group, "algebra": self.algebra,
            "valueGroup": str(self.valueGroup), "obGroup": str(self.obGroup),
            "reducedGroup": str(self.reducedGroup), "ev1Image": self.ev1Image.describe(),
            "deltaOneTarget": str(self.deltaOneTarget), "jAEmbedding": self.jAEmbedding,
            "sequenceStatement": self.sequenceStatement,
            "theoremCitations": [c.as_dict() for c in self.theoremCitations],
            "conjectureFlags": list(self.conjectureFlags), "notes": list(self.notes),
            "warnings": list(self.warnings), "checks": dict(self.checks),
        }


def main_theorem_citation(G: GroupDescriptor, A: AlgebraModel) -> Citation:
    alg_ok = A.kind in ("OInfty", "UHFxOInfty")
    zn = is_free_abelian(G) or (isinstance(G, SemidirectZ) and isinstance(G.normal, FreeAb)
                                and all(v == int(i == j) for i, r in enumerate(G.phi) for j, v in enumerate(r)))
    poly = is_poly_z(G) and hirsch_length(G) <= 5
    return Citation("main", "the classification sequence 0 -> ker d1 -> F_A(G) -> H^3(G, K0#(A)) -> 0 is exact "
                    "and F_A(G) is a group",
                    {"A = M_P (x) O_oo with P possibly empty": alg_ok, "G = Z^n": zn,
                     "G poly-Z with Hirsch length <= 5": poly},
                    alg_ok and (zn or poly))


def obstruction_report(G: GroupDescriptor, A: AlgebraModel) -> ObstructionReport:
    try:
        return _report(G, A)
    except (NotImplementedError, ValueError) as exc:
        raise UnsupportedGroup(f"cannot assemble a report for {G} and {A.name}: {exc}") from exc


def _report(G: GroupDescriptor, A: AlgebraModel) -> ObstructionReport:
    K = k_sharp(A)
    H_sharp = CohomologyGroup(G, K.module, DEGREE)
    H_t = CohomologyGroup(G, AdmissibleModule([Atom.qmodz()]), DEGREE)
    H_k0 = CohomologyGroup(G, A.k0, DEGREE)
    ev1 = induced_map_coefficient(K.ev1, G, DEGREE, H_sharp, H_t)
    jA = induced_map_coefficient(K.jA, G, DEGREE, H_k0, H_sharp)
    image = coefficient_image(ev1)
    checks = {"ev1*jA = 0": ev1.compose(jA).is_zero()}
    if not checks["ev1*jA = 0"]:
        raise AssertionError("ev1_* after jA_* is not zero")
    if A.k0_atom is not None:
        ker = coefficient_kernel(jA)
        injective = ker.is_zero()
    else:
        injective = True
    embedding = {"map": "jA_*: H^3(G, K0) -> H^3(G, K0#)", "injective": injective,
                 "source": str(H_k0.value), "target": str(H_sharp.value),
                 "multipliers": jA.describe()["multipliers"]}
    notes, warnings = [], []
    if K.psi is not None:
        reduced_mod = K.psi.reduced
        if reduced_mod.atoms:
            # tob^r = -(pr_1 psi)_* tob; in the K0# coordinates pr_1 psi drops the Q coordinate
            proj = ModuleMap(K.module.atoms, reduced_mod.atoms, [[0, -1]], "-pr1*psi")
            H_red = CohomologyGroup(G, reduced_mod, DEGREE)
            red_map = induced_map_coefficient(proj, G, DEGREE, H_sharp, H_red)
            checks["reduced projection onto"] = coefficient_image(red_map).is_everything()
        else:
            H_red = CohomologyGroup(G, reduced_mod, DEGREE)
    else:
        H_red = CohomologyGroup(G, reduced_k0(A), DEGREE)
    if H_sharp.value.rank():
        notes.append(f"value group has rank {H_sharp.value.rank()} over Q; R is modelled by Q, so this is a rank "
                     "statement and not a cardinality")
    if A.k0_atom is None:
        notes.append("tob = ob: K0 = 0 so ev1 identifies K0# with Q/Z")
        checks["ev1 iso"] = image.is_everything() and coefficient_kernel(ev1).is_zero()
    citations = [main_theorem_citation(G, A)]
    if A.kind == "Cuntz":
        target = multiple_subgroup(H_t, A.n)
        citations.append(Citation("finite Cuntz", f"ob lies in {A.n} H^3(G, T)", {"A = O_(n+1)": True}, True,
                                  image <= target))
        if group_order(G):
            warnings.append("the range of tob for finite groups and Cuntz algebras is undecided; "
                            "no realizability is claimed")
    if A.kind == "OInfty":
        finite = group_order(G) > 0
        citations.append(Citation("infinite Cuntz", "ob lies in the image of H^3(G, R) -> H^3(G, T); "
                                  "trivial for finite G", {"A = O_oo": True, "G finite": finite}, True,
                                  image.is_zero() if finite else True))
    flags = [] if citations[0].applies else [CONJECTURAL]
    if A.is_formal:
        warnings.append("formal: the custom entry cannot confirm pi_1(U(A)) = K0(A)")
    sequence = {"text": "0 -> ker delta_1 -> F_A(G) -> H^3(G, K0#(A)) -> 0",
                "H3(G, K0#)": str(H_sharp.value), "delta_1 target": str(H_k0.value),
                "ker delta_1": "reported by position only"}
    return ObstructionReport(str(G), A.name, H_sharp.value, H_t.value, H_red.value, image, H_k0.value,
                             embedding, sequence, citations, flags, notes, warnings, checks)


# -- Ext criteria ---------------------------------------------------------------------------------

class ExtCriteria(NamedTuple):
    injectivity_criterion: bool
    stably_finite_range: AdmissibleModule


def trace_image_module(A: AlgebraModel) -> AdmissibleModule:
    """tau_* K0(A) as an abstract group."""
    T = A.trace_image()
    return AdmissibleModule([Atom.loc(T.primes)])


def ext_obstruction_criteria(G: GroupDescriptor, A: AlgebraModel) -> ExtCriteria:
    """(Ext(H_2 G, tau K0 / Z) = 0, Ext(H_2 G, tau K0))."""
    if not A.has_trace:
        raise ValueError(f"{A.name} has no trace")
    H2 = integral_homology(G, 2)
    tau_mod_z = trace_sequence(A).A
    return ExtCriteria(ext_into(H2, tau_mod_z).is_zero(), ext_into(H2, trace_image_module(A)))


def trace_injectivity_direct(G: GroupDescriptor, A: AlgebraModel) -> bool:
    """Injectivity of H^3(G, tau K0 / Z) -> H^3(G, Q/Z), read off the induced map."""
    inc = trace_sequence(A).inc
    if not inc.source.atoms:
        return True
    return coefficient_kernel(induced_map_coefficient(inc, G, DEGREE)).is_zero()


# -- the Z^n realization machinery ------------------------------------------------------------------

@dataclass
class MachineryCheck:
    n: int
    p: int
    m: int
    checks: dict
    details: dict

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def as_dict(self) -> dict:
        return {"n": self.n, "p": self.p, "m": self.m, "checks": dict(self.checks), "details": dict(self.details),
                "passed": self.passed}


def _homology_coordinates(G: GroupDescriptor, k: int, vectors: list[list[int]]) -> tuple[list, list[int]]:
    """Coordinates of cycles in the adapted homology basis, with the generator orders."""
    ad = complex_data(G, k).adapted(k)
    out = []
    for v in vectors:
        coords = [sum(ad.B_inv[i][j] * v[j] for j in range(ad.r)) for i in range(ad.r)]
        if any(coords[:ad.cycle_start]):
            raise AssertionError("image vector is not a cycle")
        out.append(coords[ad.cycle_start:])
    return out, ad.homology_orders()


def c2_machinery_verify(n: int, p: int, m: int) -> MachineryCheck:
    """Check the reduction q: Z^n -> (Z/p^m)^n on H_3 and H^3."""
    if not 1 <= n <= 4 or m < 1 or prime_factors(p) != frozenset({p}) or p ** m > 8:
        raise ValueError("need 1 <= n <= 4, p prime and p^m <= 8")
    c = p ** m
    N = comb(n, 3)
    Zn, Cn = FreeAb(n), FinAb((c,) * n)
    q = GroupHom(Zn, Cn, tuple(tuple(int(i == j) for j in range(n)) for i in range(n)))
    checks, details = {}, {}

    H3 = integral_homology(Zn, 3)
    checks["(a) rank"] = H3 == FgAbelianGroup(N)
    details["H3(Z^n)"] = str(H3)

    # q_* on H_3: images of the free cycle basis of the Koszul complex
    src = complex_data(Zn, 3).adapted(3)
    cycles = [[src.B[i][pos] for i in range(src.r)] for pos in range(src.cycle_start, src.r)]
    F = chain_map_for(q, DEGREE + 1).epsilon_matrix(3)
    images = [F.apply(z) for z in cycles]
    coords, orders = _homology_coordinates(Cn, 3, images)
    h = len(orders)
    rels = relation_vectors(orders)
    image_group = quotient_group(coords + rels, rels, h)
    details["H3(C^n)"] = str(integral_homology(Cn, 3))
    details["image of q_*"] = str(image_group)
    # ker q_* = {w : M w in relations}
    if coords:
        M = IntMatrix([[coords[j][i] for j in range(len(coords))] for i in range(h)], h, len(coords))
        R = IntMatrix([[r[i] for r in rels] for i in range(h)], h, len(rels)) if rels else IntMatrix.zeros(h, 0)
        ker = [v[:len(coords)] for v in kernel_basis(hstack(M, R))]
        ker = [v for v in ker if any(v)]
    else:
        ker = []
    expected_ker = [[c * int(i == j) for i in range(N)] for j in range(N)]
    checks["(b) image of q_*"] = image_group == FgAbelianGroup.from_orders([c] * N)
    checks["(b) ker q_* = p^m H3"] = lattice_eq(ker, expected_ker, N) if N else not ker

    qstar = induced_map_group_hom(q, AdmissibleModule([Atom.zmod(c)]), 3)
    checks["(c) q* surjective"] = qstar.is_surjective()
    details["q*"] = f"{qstar.source.value} -> {qstar.target.value}"

    kun = kunneth_decomposition([FinAb((c,))] * n, 3)
    L = kunneth_total(s for s in kun if s.kind == "tensor" and sorted(s.degrees) == [0] * (n - 3) + [1, 1, 1])
    details["Kunneth summand L"] = str(L)
    pure = is_pure_subgroup(coords, orders) if coords else True
    checks["(d) L is a direct summand"] = pure and L == image_group
    return MachineryCheck(n, p, m, checks, details)

"""Named verification suites run by ``gkernel verify-suite``.

Each check returns ``(ok, detail)``; the runner times it and never lets an
exception escape (a raising check counts as a failure).
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, permutations
from math import comb
from typing import Callable

from .abgroup import AdmissibleModule, Atom, FgAbelianGroup
from .cohom import (CochainWindow, CohomologyGroup, bilinear_rho, class_of_finite_cocycle, class_of_zn_cocycle, coboundary_of,
                    coboundary_reduce, cocycle_verify, cohomology_group, element_window, induced_map_group_hom,
                    integral_homology, iota_cocycle_evaluate, uct_decompose, wang_sequence)
from .groupcat import FinAb, FreeAb, GroupHom, SemidirectZ, group_model
from .ksharp import AlgebraModel, coefficient_sequences, k_sharp, parse_algebra, partial_a_identity_check, reduced_k0
from .obstruct import (c2_machinery_verify, ev1_image_h3, ext_obstruction_criteria, multiple_subgroup,
                       obstruction_report, primary_subgroup)


@dataclass
class CheckResult:
    index: int
    name: str
    ok: bool
    detail: str
    seconds: float


QZ = AdmissibleModule([Atom.qmodz()])
HEIS = SemidirectZ(FreeAb(2), ((1, 1), (0, 1)))
KLEIN = SemidirectZ(FreeAb(1), ((-1,),))
Z3_SD = SemidirectZ(FreeAb(2), ((1, 0), (0, 1)))


def finite_abelian_groups(max_order: int) -> list[FinAb]:
    """Every nontrivial finite abelian group of order <= max_order, by invariant factors."""
    out = []

    def extend(chain, prod):
        if chain:
            out.append(FinAb(tuple(chain)))
        lo = chain[-1] if chain else 2
        for d in range(lo, max_order // prod + 1):
            if not chain or d % chain[-1] == 0:
                extend(chain + [d], prod * d)

    extend([], 1)
    return out


def small_atoms(bound: int = 8) -> list[Atom]:
    primes = [p for p in range(2, bound + 1) if all(p % q for q in range(2, p))]
    sets = [s for r in range(1, len(primes) + 1) for s in combinations(primes, r)]
    atoms = [Atom.z(), Atom.q(), Atom.qmodz()] + [Atom.zmod(m) for m in range(2, bound + 1)]
    for s in sets:
        atoms += [Atom.loc(s), Atom.pruefer(s), Atom.qmodloc(s)]
    return atoms


# -- acceptance grid ---------------------------------------------------------------------------------

def check_kunneth_rank() -> tuple[bool, str]:
    got = {n: integral_homology(FreeAb(n), 3) for n in range(3, 7)}
    ok = all(g == FgAbelianGroup(comb(n, 3)) for n, g in got.items())
    return ok, ", ".join(f"H3(Z^{n}) = {g}" for n, g in got.items())


def check_machinery() -> tuple[bool, str]:
    runs = [c2_machinery_verify(*a) for a in ((3, 2, 1), (3, 3, 1), (4, 2, 1), (3, 2, 2))]
    return all(r.passed for r in runs), "; ".join(f"({r.n},{r.p},{r.m}) {'ok' if r.passed else r.checks}"
                                                  for r in runs)


def check_finite_cuntz() -> tuple[bool, str]:
    groups = finite_abelian_groups(16)
    bad = []
    for G in groups:
        H = CohomologyGroup(G, QZ, 3)
        for n in (1, 2, 3, 4):
            if ev1_image_h3(G, AlgebraModel.cuntz(n + 1)) != multiple_subgroup(H, n):
                bad.append(f"{G}, O({n + 1})")
    for p in (2, 3):
        for n in (1, 2):
            if not ev1_image_h3(FinAb((p,)), AlgebraModel.cuntz(n * p + 1)).is_zero():
                bad.append(f"Z/{p}, O({n * p + 1}) nonzero")
    return not bad, f"{len(groups)} groups x 4 algebras" + (f"; failures: {bad}" if bad else "")


def check_infinite_cuntz() -> tuple[bool, str]:
    groups = finite_abelian_groups(16)
    bad = [str(G) for G in groups if not ev1_image_h3(G, AlgebraModel.o_infty()).is_zero()]
    return not bad, f"{len(groups)} groups" + (f"; failures: {bad}" if bad else "")


def check_presentations() -> tuple[bool, str]:
    out = []
    for n in (1, 2, 3, 5):
        K = k_sharp(AlgebraModel.cuntz(n + 1)) if n > 1 else None
        if K is not None:
            out.append(K.module == QZ and K.ev1.matrix == [[n]] and K.jA((1,)) == (Fraction(1, n),))
    K = k_sharp(AlgebraModel.o_infty())
    out.append(K.module == AdmissibleModule([Atom.q()]) and K.ev1.matrix == [[1]] and K.jA((1,)) == (1,))
    rng = random.Random(20)
    for primes in ((2,), (3,), (2, 3), (5, 7)):
        K = k_sharp(AlgebraModel.uhf_o_infty(primes))
        out.append(K.module == AdmissibleModule([Atom.pruefer(primes), Atom.q()]))
        out.append(K.psi is not None and K.psi.verify(rng, samples=20))
    for A in (AlgebraModel.o_infty(), AlgebraModel.uhf([2]), AlgebraModel.jiang_su()):
        out.append(k_sharp(A).psi.verify(rng, samples=20))
    return all(out), f"{sum(out)}/{len(out)} presentation checks"


def check_connecting_identity() -> tuple[bool, str]:
    groups = [FinAb((2,)), FinAb((4,)), FinAb((2, 2)), FreeAb(3)]
    algebras = [AlgebraModel.o_infty(), AlgebraModel.uhf([2]), AlgebraModel.cuntz(4), AlgebraModel.o2()]
    bad = []
    for G in groups:
        for A in algebras:
            for k in (1, 2, 3):
                if not partial_a_identity_check(A, G, k).holds:
                    bad.append(f"{G}, {A.name}, degree {k}")
    return not bad, f"{len(groups) * len(algebras)} pairs in degrees 1-3" + (f"; failures: {bad}" if bad else "")


def check_wang() -> tuple[bool, str]:
    bad = []
    for G in (Z3_SD, KLEIN, HEIS):
        for mod in (Atom.zmod(2), Atom.zmod(4), Atom.qmodz(), Atom.pruefer([2])):
            if not wang_sequence(G, AdmissibleModule([mod])).exact:
                bad.append(f"{G}, {mod}")
    heis = cohomology_group(HEIS, "Z/2", 3).value
    ok = not bad and heis == AdmissibleModule([Atom.zmod(2)])
    return ok, f"12 sequences exact; H^3(Heisenberg, Z/2) = {heis}" + (f"; failures: {bad}" if bad else "")


def check_iota() -> tuple[bool, str]:
    details, ok = [], True
    for G, name in ((Z3_SD, "Z^3"), (HEIS, "Heisenberg")):
        window = element_window(G, 2, "box")
        for m in (2, 4):
            rho = bilinear_rho(G.normal, AdmissibleModule([Atom.zmod(m)]), [[0, 1], [0, 0]])
            rep = cocycle_verify(iota_cocycle_evaluate(rho, G), window)
            ok = ok and rep.ok
            details.append(f"{name} Z/{m}: {rep.checked} 4-tuples {rep.status}")
    return ok, "; ".join(details)


def _pullback_cases():
    for k in (2, 3):
        for perm in permutations(range(3)):
            yield k, perm


def check_uct_and_classes() -> tuple[bool, str]:
    groups = [FinAb(())] + finite_abelian_groups(16) + [FreeAb(n) for n in range(1, 5)]
    atoms = small_atoms(8)
    bad, count = [], 0
    for G in groups:
        for k in range(0, 5):
            for a in atoms:
                M = AdmissibleModule([a])
                hom, ext = uct_decompose(G, M, k)
                count += 1
                if cohomology_group(G, M, k).value != hom + ext:
                    bad.append(f"H^{k}({G}, {a})")
    # pullbacks of trilinear cocycles along Z^3 -> (Z/k)^3
    for k, perm in _pullback_cases():
        G = FinAb((k, k, k))
        c = CochainWindow(G, QZ, 3, lambda g, h, l, p=perm, k=k: (Fraction(g[p[0]] * h[p[1]] * l[p[2]], k),))
        H, x = class_of_finite_cocycle(c)
        pulled = induced_map_group_hom(GroupHom.coordinatewise(FreeAb(3), G), QZ, 3)(x)
        lifted = CochainWindow(FreeAb(3), QZ, 3, lambda g, h, l, p=perm, k=k:
                               (Fraction((g[p[0]] % k) * (h[p[1]] % k) * (l[p[2]] % k), k),))
        if not QZ.equal(class_of_zn_cocycle(lifted)[(1, 2, 3)], (pulled[0],)):
            bad.append(f"pullback {k} {perm}")
    # primitives for coboundaries on groups of order <= 9
    rng = random.Random(9)
    small = finite_abelian_groups(9)
    for G in small:
        model = group_model(G)
        els, e = model.elements(), model.identity()
        tab = {(g, h): (Fraction(rng.randrange(12), 12),) for g in els for h in els if e not in (g, h)}
        c = coboundary_of(lambda g, h, t=tab: t.get((g, h), (Fraction(0),)), G, QZ)
        b = coboundary_reduce(c)
        if b is None:
            bad.append(f"no primitive on {G}")
    detail = f"{count} UCT comparisons, 12 pullbacks, {len(small)} coboundary reductions"
    return not bad, detail + (f"; failures: {bad[:5]}" if bad else "")


def check_example_diagram() -> tuple[bool, str]:
    r = obstruction_report(FreeAb(3), AlgebraModel.o_infty())
    ok = (r.deltaOneTarget == AdmissibleModule([Atom.z()]) and r.valueGroup == AdmissibleModule([Atom.q()])
          and r.jAEmbedding["injective"] and r.jAEmbedding["multipliers"] == [{"from": 0, "to": 0, "q": "1"}])
    return ok, f"deltaOneTarget = {r.deltaOneTarget} -> valueGroup = {r.valueGroup}"


ACCEPTANCE_GRID = [
    ("Kunneth rank law", check_kunneth_rank),
    ("realization machinery", check_machinery),
    ("finite Cuntz constraint", check_finite_cuntz),
    ("infinite Cuntz constraint", check_infinite_cuntz),
    ("K0# presentations", check_presentations),
    ("connecting-map identity", check_connecting_identity),
    ("Wang sequence", check_wang),
    ("iota cocycle identity", check_iota),
    ("UCT and class oracles", check_uct_and_classes),
    ("example diagram", check_example_diagram),
]


# -- property suite --------------------------------------------------------------------------------

CATALOG = ["O2", "O(3)", "O(4)", "O(5)", "Oinf", "UHF{2}", "UHF{2,3}", "UHFoo{2}", "UHFoo{3}", "JS"]


def prop_exse_certified() -> tuple[bool, str]:
    for t in CATALOG:
        coefficient_sequences(parse_algebra(t))
    return True, f"{len(CATALOG)} algebras"


def prop_reduced_k0() -> tuple[bool, str]:
    got = {t: str(reduced_k0(parse_algebra(t))) for t in ("O(3)", "O(4)", "O2", "UHF{2}", "UHF{2,3}")}
    ok = got == {"O(3)": "0", "O(4)": "0", "O2": "0", "UHF{2}": "Pr{2}", "UHF{2,3}": "Pr{2,3}"}
    return ok, str(got)


def prop_identity_grid() -> tuple[bool, str]:
    groups = [FinAb((2,)), FinAb((3,)), FinAb((4,)), FinAb((2, 2)), FinAb((6,)), FreeAb(2), FreeAb(3)]
    bad = [f"{G} {t}" for t in CATALOG for G in groups
           if not partial_a_identity_check(parse_algebra(t), G).holds]
    return not bad, f"{len(groups) * len(CATALOG)} pairs" + (f"; failures: {bad}" if bad else "")


def prop_primary_parts() -> tuple[bool, str]:
    bad = []
    for G in finite_abelian_groups(16):
        H = CohomologyGroup(G, QZ, 3)
        for P in ((2,), (3,), (2, 3)):
            if ev1_image_h3(G, AlgebraModel.uhf_o_infty(P)) != primary_subgroup(H, P):
                bad.append(f"{G} {P}")
    return not bad, "UHFoo images are primary parts" + (f"; failures: {bad}" if bad else "")


def prop_tracial_injectivity() -> tuple[bool, str]:
    groups = [FreeAb(2), FreeAb(3), FreeAb(4), FinAb((5,)), FinAb((12,)), HEIS]
    bad = [f"{G} {t}" for t in ("UHF{2}", "UHF{3}", "JS") for G in groups
           if not ext_obstruction_criteria(G, parse_algebra(t)).injectivity_criterion]
    return not bad, f"{len(groups) * 3} pairs" + (f"; failures: {bad}" if bad else "")


def prop_composite_zero() -> tuple[bool, str]:
    bad = []
    for G in (FreeAb(3), FinAb((2, 2)), HEIS):
        for t in CATALOG:
            if not obstruction_report(G, parse_algebra(t)).checks["ev1*jA = 0"]:
                bad.append(f"{G} {t}")
    return not bad, "ev1_* jA_* = 0" + (f"; failures: {bad}" if bad else "")


def prop_wang_wide() -> tuple[bool, str]:
    groups = [Z3_SD, KLEIN, HEIS, SemidirectZ(FreeAb(2), ((0, -1), (1, 0))), SemidirectZ(FinAb((5,)), ((2,),))]
    mods = [Atom.z(), Atom.q(), Atom.zmod(3), Atom.qmodz(), Atom.pruefer([3])]
    bad = [f"{G} {m}" for G in groups for m in mods if not wang_sequence(G, AdmissibleModule([m])).exact]
    return not bad, f"{len(groups) * len(mods)} sequences" + (f"; failures: {bad}" if bad else "")


PROPERTIES = [
    ("exse certified across the catalog", prop_exse_certified),
    ("reduced K0 values", prop_reduced_k0),
    ("connecting identity grid", prop_identity_grid),
    ("UHFoo ev1 images are primary parts", prop_primary_parts),
    ("tracial injectivity for free H2", prop_tracial_injectivity),
    ("ev1 after jA vanishes", prop_composite_zero),
    ("Wang exactness, wider grid", prop_wang_wide),
]

SUITES: dict[str, list[tuple[str, Callable]]] = {"paper": ACCEPTANCE_GRID, "properties": PROPERTIES}


def run_suite(name: str, progress: Callable[[CheckResult], None] = None) -> list[CheckResult]:
    if name not in SUITES:
        raise KeyError(name)
    out = []
    for i, (label, fn) in enumerate(SUITES[name], start=1):
        t0 = time.perf_counter()
        try:
            ok, detail = fn()
        except Exception as exc:  # a crashing check is a failing check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        res = CheckResult(i, label, bool(ok), detail, time.perf_counter() - t0)
        out.append(res)
        if progress:
            progress(res)
    return out

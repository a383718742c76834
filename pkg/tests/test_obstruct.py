from itertools import product
from math import gcd

import pytest

from gkernel.abgroup import AdmissibleModule, Atom, FgAbelianGroup
from gkernel.cohom import CohomologyGroup, integral_homology
from gkernel.groupcat import FinAb, FreeAb, Product, SemidirectZ
from gkernel.ksharp import parse_algebra
from gkernel.obstruct import (CONJECTURAL, c2_machinery_verify, ev1_image_h3, ev1_map, ext_obstruction_criteria,
                              main_theorem_citation, multiple_subgroup, obstruction_report, primary_subgroup,
                              trace_injectivity_direct)

QZ = AdmissibleModule([Atom.qmodz()])


def abelian_groups_up_to(order):
    """Invariant-factor chains d1 | d2 | ... with product <= order (trivial group excluded)."""
    out = []

    def extend(chain, prod):
        if chain:
            out.append(tuple(chain))
        start = chain[-1] if chain else 2
        for d in range(start, order // prod + 1):
            if chain and d % chain[-1]:
                continue
            extend(chain + [d], prod * d)

    extend([], 1)
    return [FinAb(c) for c in out]


FINITE = abelian_groups_up_to(16)


def test_group_enumeration_counts():
    # number of abelian groups of order m, for m = 2..16
    counts = {}
    for G in FINITE:
        n = 1
        for d in G.moduli:
            n *= d
        counts[n] = counts.get(n, 0) + 1
    assert [counts.get(m, 0) for m in range(2, 17)] == [1, 1, 2, 1, 1, 1, 3, 2, 1, 1, 2, 1, 1, 1, 5]


def h3_orders_oracle(G):
    """H^3(G, Q/Z) = Hom(H_3 G, Q/Z), isomorphic to H_3 G for finite G."""
    return list(integral_homology(G, 3).torsion)


def multiple_orders(orders, n):
    return sorted(d // gcd(d, n) for d in orders if d // gcd(d, n) > 1)


def module_orders(M):
    assert all(a.kind == "ZMod" for a in M.atoms)
    return sorted(a.m for a in M.atoms)


def as_orders(M):
    """Elementary-divisor multiset, so two presentations of one group compare equal."""
    out = []
    for m in module_orders(M):
        x = m
        p = 2
        while x > 1:
            if x % p == 0:
                e = 1
                while x % p == 0:
                    x //= p
                    e *= p
                out.append(e)
            p += 1
    return sorted(out)


# -- ev1 image ------------------------------------------------------------------------------------

@pytest.mark.parametrize("G", FINITE, ids=str)
def test_finite_cuntz_constraint(G):
    H = CohomologyGroup(G, QZ, 3)
    for n in (1, 2, 3, 4):
        A = parse_algebra(f"O({n + 1})")
        img = ev1_image_h3(G, A)
        assert img == multiple_subgroup(H, n)
        # independent routes: lattice image of the induced map, and n * H_3 from the homology
        lattice = ev1_map(G, A).image()
        assert as_orders(lattice) == as_orders(img.module)
        expected = AdmissibleModule([Atom.zmod(d) for d in multiple_orders(h3_orders_oracle(G), n)])
        assert as_orders(img.module) == as_orders(expected)


@pytest.mark.parametrize("G", FINITE, ids=str)
def test_infinite_cuntz_constraint(G):
    assert ev1_image_h3(G, parse_algebra("Oinf")).is_zero()


@pytest.mark.parametrize("G", FINITE, ids=str)
@pytest.mark.parametrize("P", [(2,), (3,), (2, 3)])
def test_uhf_o_infty_image_is_primary_part(G, P):
    A = parse_algebra("UHFoo{" + ",".join(map(str, P)) + "}")
    H = CohomologyGroup(G, QZ, 3)
    img = ev1_image_h3(G, A)
    assert img == primary_subgroup(H, P)
    # splitting view: H^3(G, Q) = 0, so the image is that of -incl: Pr(P) -> Q/Z, the P-part of H_3 G
    expected = [d for d in h3_orders_oracle(G)]
    p_parts = []
    for d in expected:
        part = 1
        for p in P:
            while d % p == 0:
                d //= p
                part *= p
        if part > 1:
            p_parts.append(part)
    assert as_orders(img.module) == as_orders(AdmissibleModule([Atom.zmod(x) for x in p_parts]))


def test_ev1_image_examples():
    assert ev1_image_h3(FinAb((2,)), parse_algebra("O(3)")).is_zero()
    for p, n in product((2, 3), (1, 2)):
        assert ev1_image_h3(FinAb((p,)), parse_algebra(f"O({n * p + 1})")).is_zero()
    full = ev1_image_h3(FinAb((2,)), parse_algebra("O(4)"))
    assert full.is_everything() and full.module == AdmissibleModule([Atom.zmod(2)])
    z3 = ev1_image_h3(FreeAb(3), parse_algebra("Oinf"))
    assert z3.is_everything() and z3.module == QZ


@pytest.mark.parametrize("G", [FreeAb(3), FreeAb(4), Product((FreeAb(3), FinAb((2,)))),
                               SemidirectZ(FreeAb(2), ((1, 1), (0, 1)))], ids=str)
@pytest.mark.parametrize("text", ["Oinf", "O(3)", "O(4)", "O2", "UHF{2}", "UHFoo{3}", "JS"])
def test_ev1_after_ja_vanishes(G, text):
    r = obstruction_report(G, parse_algebra(text))
    assert r.checks["ev1*jA = 0"]


# -- reports -----------------------------------------------------------------------------------

def test_report_z3_o_infty():
    r = obstruction_report(FreeAb(3), parse_algebra("Oinf"))
    assert r.deltaOneTarget == AdmissibleModule([Atom.z()])
    assert r.valueGroup == AdmissibleModule([Atom.q()])
    assert r.obGroup == QZ
    assert r.jAEmbedding["injective"]
    assert r.jAEmbedding["multipliers"] == [{"from": 0, "to": 0, "q": "1"}]
    assert r.theoremCitations[0].theorem == "main" and r.theoremCitations[0].applies
    assert r.conjectureFlags == []
    assert any("rank 1 over Q" in n for n in r.notes)


def test_report_z2_o2():
    r = obstruction_report(FinAb((2,)), parse_algebra("O2"))
    assert r.valueGroup == r.obGroup == AdmissibleModule([Atom.zmod(2)])
    assert any("tob = ob" in n for n in r.notes)
    assert r.checks["ev1 iso"]
    assert r.conjectureFlags == [CONJECTURAL]


def test_report_z3_uhf2():
    r = obstruction_report(FreeAb(3), parse_algebra("UHF{2}"))
    assert r.reducedGroup == AdmissibleModule([Atom.pruefer([2])])
    assert r.checks["reduced projection onto"]
    assert r.conjectureFlags == [CONJECTURAL]


def test_report_cuntz_warns_about_open_range():
    r = obstruction_report(FinAb((4,)), parse_algebra("O(3)"))
    cite = [c for c in r.theoremCitations if c.theorem == "finite Cuntz"]
    assert cite and cite[0].verified
    assert r.warnings
    assert r.reducedGroup.is_zero()


def test_report_custom_is_formal():
    r = obstruction_report(FreeAb(3), parse_algebra("Custom(Z,3,trace)"))
    assert any(w.startswith("formal") for w in r.warnings)
    assert r.reducedGroup == AdmissibleModule([Atom.zmod(3)])


def test_report_json_round_trips():
    import json
    from gkernel.abgroup import parse_module
    r = obstruction_report(FreeAb(3), parse_algebra("UHFoo{2}")).as_dict()
    again = json.loads(json.dumps(r))
    for key in ("valueGroup", "obGroup", "reducedGroup", "deltaOneTarget"):
        assert str(parse_module(again[key])) == again[key]


def test_main_theorem_hypotheses():
    heis = SemidirectZ(FreeAb(2), ((1, 1), (0, 1)))
    oinf, uhfoo, o2, o4 = (parse_algebra(t) for t in ("Oinf", "UHFoo{2}", "O2", "O(4)"))
    assert main_theorem_citation(FreeAb(6), oinf).applies
    assert main_theorem_citation(heis, uhfoo).applies
    assert not main_theorem_citation(heis, o2).applies
    assert not main_theorem_citation(FreeAb(3), o4).applies
    assert not main_theorem_citation(FinAb((2,)), oinf).applies
    unip5 = tuple(tuple(int(j in (i, i + 1)) for j in range(5)) for i in range(5))
    assert not main_theorem_citation(SemidirectZ(FreeAb(5), unip5), oinf).applies
    assert main_theorem_citation(SemidirectZ(FreeAb(4), tuple(r[:4] for r in unip5[:4])), oinf).applies
    assert main_theorem_citation(SemidirectZ(FreeAb(5), tuple(tuple(int(i == j) for j in range(5))
                                                              for i in range(5))), oinf).applies


# -- Ext criteria ----------------------------------------------------------------------------------

def test_ext_criteria_examples():
    for n in (1, 2, 3, 4):
        inj, rng = ext_obstruction_criteria(FreeAb(n), parse_algebra("UHF{2}"))
        assert inj and rng.is_zero()
    V4 = FinAb((2, 2))
    inj, rng = ext_obstruction_criteria(V4, parse_algebra("UHF{3}"))
    assert inj
    assert ext_obstruction_criteria(V4, parse_algebra("Custom(Z,1,trace)")).stably_finite_range == \
        AdmissibleModule([Atom.zmod(2)])
    with pytest.raises(ValueError):
        ext_obstruction_criteria(V4, parse_algebra("O(4)"))


TRACED = ["UHF{2}", "UHF{3}", "UHF{2,3}", "JS", "Custom(Z,3,trace)", "Custom(Z,2,trace)"]


@pytest.mark.parametrize("text", TRACED)
@pytest.mark.parametrize("G", [FinAb((2, 2)), FinAb((2, 4)), FinAb((3, 3)), FinAb((6,)), FreeAb(3),
                               Product((FreeAb(2), FinAb((2,)))), FinAb((2, 2, 2))], ids=str)
def test_injectivity_criterion_matches_the_induced_map(text, G):
    A = parse_algebra(text)
    inj, _ = ext_obstruction_criteria(G, A)
    assert inj == trace_injectivity_direct(G, A)


@pytest.mark.parametrize("text", TRACED)
def test_free_second_homology_gives_injectivity(text):
    A = parse_algebra(text)
    for G in (FreeAb(2), FreeAb(3), FinAb((5,)), FinAb((12,)),
              SemidirectZ(FreeAb(2), ((1, 1), (0, 1)))):
        H2 = integral_homology(G, 2)
        assert not H2.torsion
        assert ext_obstruction_criteria(G, A).injectivity_criterion


def test_custom_two_fails_injectivity_on_klein_four():
    A = parse_algebra("Custom(Z,2,trace)")
    assert not ext_obstruction_criteria(FinAb((2, 2)), A).injectivity_criterion
    assert not trace_injectivity_direct(FinAb((2, 2)), A)


# -- the realization machinery -------------------------------------------------------------------

@pytest.mark.parametrize("n,p,m", [(3, 2, 1), (3, 3, 1), (4, 2, 1), (3, 2, 2), (3, 7, 1), (4, 2, 2)])
def test_machinery(n, p, m):
    r = c2_machinery_verify(n, p, m)
    assert r.passed, r.checks
    N = n * (n - 1) * (n - 2) // 6
    assert integral_homology(FreeAb(n), 3) == FgAbelianGroup(N)
    assert r.details["image of q_*"] == str(FgAbelianGroup.from_orders([p ** m] * N))


def test_machinery_small_n_is_vacuous():
    assert c2_machinery_verify(2, 2, 1).passed


@pytest.mark.parametrize("args", [(5, 2, 1), (3, 3, 2), (3, 4, 1), (0, 2, 1)])
def test_machinery_guards(args):
    with pytest.raises(ValueError):
        c2_machinery_verify(*args)

import random
from fractions import Fraction

import pytest

from gkernel.abgroup import AdmissibleModule, Atom, ParseError
from gkernel.cohom import CohomologyGroup, connecting_map, long_exact_sequence_check
from gkernel.groupcat import FinAb, FreeAb
from gkernel.ksharp import (AlgebraModel, SplittingUnavailable, coefficient_sequences, k_sharp, parse_algebra,
                            partial_a_identity_check, psi_splitting, reduced_k0)

CATALOG = ["O2", "O(3)", "O(4)", "O(5)", "Oinf", "UHF{2}", "UHF{2,3}", "UHFoo{2}", "UHFoo{3,5}", "JS",
           "Custom(Z/5,2)", "Custom(Z,3,trace)", "Custom(Z[2],1/4,trace)", "Custom(Z,0)", "Custom(Z/4,0)"]


def same_in_presentation(A, p1, p2):
    """Oracle: (x, r) ~ (x', r') in (K0 + Q)/Z(u, -1) straight from the definition."""
    (x1, r1), (x2, r2) = p1, p2
    k = r2 - r1
    if k.denominator != 1:
        return False
    diff = x1 - x2 - k * A.unit
    return A.k0_atom is None or A.k0_atom.sq.is_zero_element(diff)


def sample_pair(A, rng):
    a = A.k0_atom
    if a is None:
        x = Fraction(0)
    elif a.kind == "Loc":
        x = Fraction(rng.randint(-9, 9), rng.choice(a.primes) ** rng.randint(0, 3))
    else:
        x = Fraction(rng.randint(-9, 9))
    r = Fraction(rng.randint(-9, 9), rng.randint(1, 6))
    return x, r


# -- presentations --------------------------------------------------------------------------

@pytest.mark.parametrize("text", CATALOG)
def test_coordinates_match_the_presentation(text):
    A = parse_algebra(text)
    K = k_sharp(A)
    rng = random.Random(5)
    pairs = [sample_pair(A, rng) for _ in range(40)]
    # nudge some pairs onto the same class
    for i in range(0, 40, 4):
        x, r = pairs[i]
        k = rng.randint(-3, 3)
        pairs.append((x + k * A.unit, r - k))
    for p1 in pairs:
        for p2 in pairs[::3]:
            coords_equal = K.module.equal(K.from_pair(*p1), K.from_pair(*p2))
            assert coords_equal == same_in_presentation(A, p1, p2)
        x, r = p1
        # ev1 reads off r mod Z; jA is the class of (x, 0)
        assert Atom.qmodz().sq.equal(K.ev1(K.from_pair(x, r))[0], r)
        if A.k0_atom is not None:
            assert K.module.equal(K.jA((x,)), K.from_pair(x, 0))


@pytest.mark.parametrize("n", [2, 3, 4, 6])
def test_cuntz_presentation(n):
    K = k_sharp(AlgebraModel.cuntz(n + 1))
    assert K.module == AdmissibleModule([Atom.qmodz()])
    assert K.ev1.matrix == [[n]]
    assert K.jA((1,)) == (Fraction(1, n),)


def test_o_infty_and_o2_presentations():
    K = k_sharp(parse_algebra("Oinf"))
    assert K.module == AdmissibleModule([Atom.q()])
    assert K.jA((1,)) == (1,)
    assert K.ev1((Fraction(7, 3),)) == (Fraction(1, 3),)
    K2 = k_sharp(parse_algebra("O2"))
    assert K2.module == AdmissibleModule([Atom.qmodz()])
    assert K2.ev1.matrix == [[1]]


def test_uhf_o_infty_presentation():
    K = k_sharp(parse_algebra("UHFoo{2}"))
    assert K.module == AdmissibleModule([Atom.pruefer([2]), Atom.q()])


@pytest.mark.parametrize("text,expected", [("O(4)", "0"), ("O(3)", "0"), ("O2", "0"), ("Oinf", "0"),
                                           ("UHF{2}", "Pr{2}"), ("UHF{2,3}", "Pr{2,3}"), ("JS", "0"),
                                           ("Custom(Z,6)", "Z/6"), ("Custom(Z/12,3)", "Z/3")])
def test_reduced_k0(text, expected):
    assert str(reduced_k0(parse_algebra(text))) == expected


def test_catalog_invariants():
    assert [parse_algebra(t).has_trace for t in ("UHF{2}", "JS", "Oinf", "O(4)", "O2", "UHFoo{2}")] == \
        [True, True, False, False, False, False]
    assert parse_algebra("O(2)") == AlgebraModel.o2()
    assert AlgebraModel.uhf_o_infty([]) == AlgebraModel.o_infty()
    with pytest.raises(ValueError):
        AlgebraModel.custom(Atom.z(), Fraction(1, 3))
    with pytest.raises(ValueError):
        AlgebraModel.custom(Atom.zmod(3), 1, has_trace=True)
    with pytest.raises(NotImplementedError):
        k_sharp(AlgebraModel.custom(Atom.zmod(6), 2))


@pytest.mark.parametrize("text", CATALOG)
def test_descriptor_round_trip(text):
    A = parse_algebra(text)
    assert parse_algebra(A.name) == A


@pytest.mark.parametrize("text,pos", [("O(1)", 2), ("UHF{4}", 4), ("Foo", 0), ("UHF{2", 5),
                                      ("Custom(Z,1/3)", 9), ("Custom(Z/q,1)", 9), ("  JSX", 4)])
def test_parse_errors(text, pos):
    with pytest.raises(ParseError) as err:
        parse_algebra(text)
    assert err.value.pos == pos


# -- splitting ------------------------------------------------------------------------------

@pytest.mark.parametrize("text", ["Oinf", "JS", "UHF{2}", "UHF{2,3}", "UHFoo{2}", "UHFoo{3,5}",
                                  "Custom(Z,3,trace)", "Custom(Z[2],1/4,trace)"])
def test_splitting_formula(text):
    psi = psi_splitting(parse_algebra(text))
    assert psi.verify(random.Random(17), samples=20)
    assert psi.verify(random.Random(18), samples=50)


def test_splitting_examples():
    psi = psi_splitting(parse_algebra("UHF{2}"))
    assert psi.reduced == AdmissibleModule([Atom.pruefer([2])])
    K = k_sharp(parse_algebra("UHF{2}"))
    for u, y in [(Fraction(1, 2), Fraction(3)), (Fraction(3, 8), Fraction(1, 5)), (Fraction(-5, 4), Fraction(0))]:
        for lift in (u, u + 1, u - 3):
            got = K.ev1(psi.psi_inv((u,), y))[0]
            assert Atom.qmodz().sq.equal(got, y - lift)
    psi_inf = psi_splitting(parse_algebra("Oinf"))
    assert psi_inf.reduced.is_zero()
    assert psi_inf.psi((Fraction(5, 3),)) == ((), Fraction(5, 3))


@pytest.mark.parametrize("text", ["O(4)", "O(3)", "O2", "Custom(Z,0)", "Custom(Z/5,2)"])
def test_splitting_unavailable(text):
    with pytest.raises(SplittingUnavailable):
        psi_splitting(parse_algebra(text))


# -- coefficient sequences -------------------------------------------------------------------

@pytest.mark.parametrize("text", CATALOG)
def test_exse_is_certified(text):
    seqs = coefficient_sequences(parse_algebra(text))
    assert {"exse", "ZTR"} <= set(seqs)


def test_trace_sequences():
    cs = coefficient_sequences(parse_algebra("UHF{2}"))["CSES"]
    assert cs.A == AdmissibleModule([Atom.pruefer([2])])
    assert cs.B == AdmissibleModule([Atom.qmodz()])
    assert cs.C == AdmissibleModule([Atom.qmodloc([2])])
    js = coefficient_sequences(parse_algebra("JS"))["CSES"]
    assert js.A.is_zero() and js.C == AdmissibleModule([Atom.qmodz()])
    z3 = coefficient_sequences(parse_algebra("Custom(Z,3,trace)"))["CSES"]
    assert z3.A == AdmissibleModule([Atom.zmod(3)])
    with pytest.raises(ValueError):
        coefficient_sequences(parse_algebra("O(4)"), include_trace=True)
    assert "CSES" not in coefficient_sequences(parse_algebra("Oinf"))


def test_trace_sequence_long_exact_sequence_on_finite_group():
    cs = coefficient_sequences(parse_algebra("UHF{2}"))["CSES"]
    G = FinAb((6,))
    # H^3(Z/6, -) = Hom(Z/6, -) on divisible atoms: the 2-part, everything, the 3-part
    assert CohomologyGroup(G, cs.A, 3).value == AdmissibleModule([Atom.zmod(2)])
    assert CohomologyGroup(G, cs.C, 3).value == AdmissibleModule([Atom.zmod(3)])
    for k in (1, 2, 3):
        assert all(c.exact for c in long_exact_sequence_check(cs, G, k))
    assert connecting_map(cs, G, 3).is_zero()


# -- connecting-map identity ----------------------------------------------------------------------

GROUPS = [FinAb((2,)), FinAb((4,)), FinAb((2, 2)), FreeAb(3), FinAb((3, 6))]


@pytest.mark.parametrize("text", ["Oinf", "UHF{2}", "O(4)", "O2", "O(3)", "UHFoo{3}", "JS", "Custom(Z,3,trace)"])
@pytest.mark.parametrize("G", GROUPS, ids=str)
def test_identity_holds_across_grid(text, G):
    A = parse_algebra(text)
    for k in (1, 2, 3):
        assert partial_a_identity_check(A, G, k).holds


def test_identity_for_o_infty_on_z2_is_an_iso():
    A = parse_algebra("Oinf")
    seqs = coefficient_sequences(A)
    for k in (1, 3):
        dA = connecting_map(seqs["exse"], FinAb((2,)), k)
        d = connecting_map(seqs["ZTR"], FinAb((2,)), k)
        assert dA.source.value == dA.target.value == AdmissibleModule([Atom.zmod(2)])
        assert dA.is_isomorphism() and d.is_isomorphism()
    # H^2(Z/2, Q/Z) vanishes, so the degree-two instance is an identity of zero maps
    assert CohomologyGroup(FinAb((2,)), AdmissibleModule([Atom.qmodz()]), 2).value.is_zero()


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("text", ["Oinf", "UHF{2}", "O(4)", "O2"])
def test_connecting_maps_vanish_on_free_groups(n, text):
    seqs = coefficient_sequences(parse_algebra(text))
    for k in (1, 2):
        assert connecting_map(seqs["exse"], FreeAb(n), k).is_zero()
        assert connecting_map(seqs["ZTR"], FreeAb(n), k).is_zero()


def test_identity_on_z4_with_uhf2_is_nontrivial_in_degree_three():
    A = parse_algebra("UHF{2}")
    cert = partial_a_identity_check(A, FinAb((4,)), 3)
    assert cert.holds and cert.elements_checked >= 1
    dA = connecting_map(coefficient_sequences(A)["exse"], FinAb((4,)), 3)
    # H^3(Z/4, Q/Z) = Z/4 -> H^4(Z/4, Z[1/2]) = 0
    assert dA.target.value.is_zero()
    # while Cuntz O(3) sees the Z/2 quotient: H^4(Z/4, Z/2) = Z/2
    dC = connecting_map(coefficient_sequences(parse_algebra("O(3)"))["exse"], FinAb((4,)), 3)
    assert dC.target.value == AdmissibleModule([Atom.zmod(2)])
    assert not dC.is_zero() and dC.is_surjective()

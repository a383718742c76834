"""K-theory data of strongly self-absorbing algebras and the group K0#(A).

K0#(A) is presented as (K0 + Q) / Z([1]0, -1). Every supported algebra has
K0 a single atom (or zero), and the quotient is written in explicit
coordinates together with the structure maps

    jA : K0 -> K0#,    x |-> class of (x, 0)
    ev1: K0# -> Q/Z,   class of (x, r) |-> r mod Z
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Callable, Optional

from .abgroup import AdmissibleModule, Atom, ModuleMap, ParseError, QSub, Subquotient, parse_module, prime_factors
from .cohom import CohomologyGroup, CohomologyMap, ShortExactSequence, connecting_map, induced_map_coefficient
from .groupcat import GroupDescriptor

KINDS = ("O2", "Cuntz", "OInfty", "UHF", "UHFxOInfty", "JiangSu", "Custom")


class SplittingUnavailable(ValueError):
    """No rho with rho([1]0) = 1 exists, so K0# has no (K0~, Q) splitting."""


@dataclass(frozen=True)
class AlgebraModel:
    kind: str
    n: int = 0                      # Cuntz(n+1)
    primes: tuple = ()
    k0_atom: Optional[Atom] = None  # None means K0 = 0
    unit: Fraction = Fraction(0)
    has_trace: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown algebra kind {self.kind}")
        object.__setattr__(self, "unit", Fraction(self.unit))
        a = self.k0_atom
        if a is not None and a.kind not in ("Z", "ZMod", "Loc"):
            raise ValueError("K0 must be Z, Z/m or Z[1/P]")
        if a is None and self.unit:
            raise ValueError("the order unit is not in K0 = 0")
        if a is not None and not a.sq.contains(self.unit):
            raise ValueError(f"the order unit {self.unit} is not in K0 = {a}")
        if self.has_trace and a is not None and a.kind == "ZMod":
            raise ValueError("a torsion K0 carries no trace")

    # catalog ------------------------------------------------------------------------
    @staticmethod
    def o2() -> "AlgebraModel":
        return AlgebraModel("O2")

    @staticmethod
    def cuntz(n_plus_1: int) -> "AlgebraModel":
        if n_plus_1 < 2:
            raise ValueError("Cuntz algebras start at O2")
        if n_plus_1 == 2:
            return AlgebraModel.o2()
        n = n_plus_1 - 1
        return AlgebraModel("Cuntz", n=n, k0_atom=Atom.zmod(n), unit=Fraction(1))

    @staticmethod
    def o_infty() -> "AlgebraModel":
        return AlgebraModel("OInfty", k0_atom=Atom.z(), unit=Fraction(1))

    @staticmethod
    def uhf(primes) -> "AlgebraModel":
        primes = tuple(sorted(set(primes)))
        if not primes:
            raise ValueError("a UHF algebra needs a nonempty prime set")
        return AlgebraModel("UHF", primes=primes, k0_atom=Atom.loc(primes), unit=Fraction(1), has_trace=True)

    @staticmethod
    def uhf_o_infty(primes) -> "AlgebraModel":
        primes = tuple(sorted(set(primes)))
        if not primes:
            return AlgebraModel.o_infty()
        return AlgebraModel("UHFxOInfty", primes=primes, k0_atom=Atom.loc(primes), unit=Fraction(1))

    @staticmethod
    def jiang_su() -> "AlgebraModel":
        return AlgebraModel("JiangSu", k0_atom=Atom.z(), unit=Fraction(1), has_trace=True)

    @staticmethod
    def custom(k0_atom: Optional[Atom], unit, has_trace: bool = False) -> "AlgebraModel":
        primes = k0_atom.primes if k0_atom is not None else ()
        return AlgebraModel("Custom", primes=primes, k0_atom=k0_atom, unit=Fraction(unit), has_trace=has_trace)

    # derived data -----------------------------------------------------------------------
    @property
    def k0(self) -> AdmissibleModule:
        return AdmissibleModule.raw([self.k0_atom] if self.k0_atom else [])

    @property
    def name(self) -> str:
        ps = ",".join(map(str, self.primes))
        if self.kind == "Cuntz":
            return f"O({self.n + 1})"
        if self.kind == "Custom":
            k0 = str(self.k0_atom) if self.k0_atom else "0"
            return f"Custom({k0},{self.unit}{',trace' if self.has_trace else ''})"
        return {"O2": "O2", "OInfty": "Oinf", "UHF": f"UHF{{{ps}}}", "UHFxOInfty": f"UHFoo{{{ps}}}",
                "JiangSu": "JS"}[self.kind]

    def __str__(self) -> str:
        return self.name

    @property
    def strongly_self_absorbing_kirchberg(self) -> bool:
        """O2 or M_{P^oo} (x) O_oo with P possibly empty."""
        return self.kind in ("O2", "OInfty", "UHFxOInfty")

    @property
    def is_formal(self) -> bool:
        # a custom entry cannot check that pi_1 of the unitary group matches K0
        return self.kind == "Custom"

    @property
    def trace_map(self) -> Optional[ModuleMap]:
        """tau_*: K0 -> Q normalised by tau([1]0) = 1."""
        if not self.has_trace:
            return None
        return ModuleMap([self.k0_atom], [Atom.q()], [[1 / self.unit]], "tau")

    def trace_image(self) -> QSub:
        if not self.has_trace:
            raise ValueError(f"{self.name} has no trace")
        return self.k0_atom.sq.num.times(1 / self.unit)


def reduced_k0(A: AlgebraModel) -> AdmissibleModule:
    """K0(A) / <[1]0>."""
    if A.k0_atom is None:
        return AdmissibleModule()
    sq = A.k0_atom.sq
    unit_span = QSub.loc(A.unit) if A.unit else QSub.zero()
    return AdmissibleModule(Subquotient(sq.num, sq.den + unit_span).atoms())


# -- parsing ---------------------------------------------------------------------------------

_INT = re.compile(r"\s*(-?\d+)(?:\s*/\s*(\d+))?")


def parse_algebra(text: str) -> AlgebraModel:
    """Grammar: O2 | O(k) | Oinf | UHF{p,..} | UHFoo{p,..} | JS | Custom(<atom>, <unit>[, trace])."""
    s = text.strip()
    lead = len(text) - len(text.lstrip())
    simple = {"O2": AlgebraModel.o2, "Oinf": AlgebraModel.o_infty, "JS": AlgebraModel.jiang_su}
    if s in simple:
        return simple[s]()
    m = re.fullmatch(r"O\(\s*(\d+)\s*\)", s)
    if m:
        k = int(m.group(1))
        if k < 2:
            raise ParseError(text, lead + m.start(1), "an index >= 2")
        return AlgebraModel.cuntz(k)
    m = re.match(r"(UHFoo|UHF)\{", s)
    if m:
        close = s.find("}", m.end())
        if close < 0:
            raise ParseError(text, lead + len(s), "'}'")
        if s[close + 1:].strip():
            raise ParseError(text, lead + close + 1, "end of input")
        try:
            primes = tuple(int(x) for x in s[m.end():close].replace(" ", "").split(","))
            for p in primes:
                Atom.pruefer((p,))
        except ValueError:
            raise ParseError(text, lead + m.end(), "a comma-separated list of primes") from None
        return AlgebraModel.uhf(primes) if m.group(1) == "UHF" else AlgebraModel.uhf_o_infty(primes)
    if s.startswith("Custom("):
        return _parse_custom(text, lead)
    m = re.match(r"O\(|O|UHF|JS|Custom", s)
    pos = lead + (m.end() if m else 0)
    raise ParseError(text, pos, "one of O2, O(k), Oinf, UHF{..}, UHFoo{..}, JS, Custom(..)")


def _parse_custom(text: str, lead: int) -> AlgebraModel:
    start = lead + len("Custom(")
    depth, comma = 0, -1
    for i in range(start, len(text)):
        ch = text[i]
        depth += ch in "[{("
        depth -= ch in "]})"
        if ch == "," and depth == 0:
            comma = i
            break
    if comma < 0:
        raise ParseError(text, len(text.rstrip()), "',' after the K0 atom")
    try:
        k0 = parse_module(text[start:comma])
    except ParseError as exc:
        raise ParseError(text, start + exc.pos, exc.expected) from None
    if len(k0.atoms) > 1:
        raise ParseError(text, start, "a single K0 atom")
    atom = k0.atoms[0] if k0.atoms else None
    m = _INT.match(text, comma + 1)
    if not m:
        raise ParseError(text, comma + 1, "an integer or fraction order unit")
    unit = Fraction(int(m.group(1)), int(m.group(2) or 1))
    pos = m.end()
    trace = False
    t = re.compile(r"\s*,\s*trace").match(text, pos)
    if t:
        trace, pos = True, t.end()
    close = re.compile(r"\s*\)\s*$").match(text, pos)
    if not close:
        raise ParseError(text, pos, "')' or ', trace'")
    try:
        return AlgebraModel.custom(atom, unit, trace)
    except ValueError as exc:
        raise ParseError(text, m.start(1), f"a valid order unit ({exc})") from None


# -- K0# ---------------------------------------------------------------------------------------

@dataclass
class PsiSplitting:
    """K0# = K0~ x Q for a homomorphism rho: K0 -> Q with rho([1]0) = 1.

    ``scale`` turns a K0 element x into its K0~ coordinate (x * scale), and
    ``rho(x) = x / unit``. In the chosen K0# coordinates (y, c) the splitting
    is psi(y, c) = (c, y).
    """

    reduced: AdmissibleModule
    unit: Fraction
    scale: Fraction
    model: "KSharpModel" = field(repr=False)

    def rho(self, x) -> Fraction:
        return Fraction(x) / self.unit

    def psi(self, v) -> tuple[tuple, Fraction]:
        v = tuple(v)
        return self.reduced.reduce(v[1:]), v[0]

    def psi_inv(self, kt, y) -> tuple:
        return self.model.module.reduce((Fraction(y),) + tuple(kt))

    def lift(self, kt) -> Fraction:
        """A K0 element with reduced coordinate kt."""
        return Fraction(kt[0]) / self.scale if kt else Fraction(0)

    def ev1_formula(self, kt, y) -> Fraction:
        return Fraction(y) - self.rho(self.lift(kt))

    def verify(self, rng: random.Random, samples: int = 20) -> bool:
        qz = Atom.qmodz().sq
        ev1 = self.model.ev1
        for _ in range(samples):
            kt = tuple(_sample(a, rng) for a in self.reduced.atoms)
            y = _sample(Atom.q(), rng)
            if not qz.equal(ev1(self.psi_inv(kt, y))[0], self.ev1_formula(kt, y)):
                return False
        k0 = self.model.algebra.k0_atom
        for _ in range(samples):
            x = _sample(k0, rng)
            kt, y = self.psi(self.model.jA((x,)))
            if y != self.rho(x) or not self.reduced.equal(kt, self.reduced.reduce((x * self.scale,) if kt else ())):
                return False
        return True


def _sample(atom: Atom, rng: random.Random) -> Fraction:
    if atom.kind in ("Z", "ZMod"):
        return Fraction(rng.randint(-30, 30))
    if atom.kind in ("Loc", "Pr"):
        p = rng.choice(atom.primes)
        return Fraction(rng.randint(-30, 30), p ** rng.randint(0, 4))
    return Fraction(rng.randint(-60, 60), rng.randint(1, 24))


@dataclass
class KSharpModel:
    algebra: AlgebraModel
    module: AdmissibleModule      # coordinates of K0#, in canonical atom order
    jA: ModuleMap
    ev1: ModuleMap
    from_pair: Callable           # (x in K0, r in Q) -> coordinates
    psi: Optional[PsiSplitting] = None

    @property
    def exse(self) -> ShortExactSequence:
        return ShortExactSequence(self.jA, self.ev1, "exse")

    def describe(self) -> dict:
        return {"algebra": self.algebra.name, "K0": str(self.algebra.k0), "unit": str(self.algebra.unit),
                "K0#": str(self.module),
                "jA": [[str(q) for q in row] for row in self.jA.matrix],
                "ev1": [[str(q) for q in row] for row in self.ev1.matrix],
                "reducedK0": str(reduced_k0(self.algebra)),
                "splitting": self.psi is not None}


def k_sharp_module(A: AlgebraModel) -> KSharpModel:
    """Coordinates for (K0 + Q)/Z(u, -1) with u = [1]0."""
    a, u = A.k0_atom, A.unit
    QZ, Q = Atom.qmodz(), Atom.q()
    if a is None:
        # (0 + Q)/Z(0, -1) = Q/Z with ev1 the identity
        jA = ModuleMap([], [QZ], [[]], "jA")
        ev1 = ModuleMap([QZ], [QZ], [[1]], "ev1")
        return _finish(A, [QZ], jA, ev1, lambda x, r: (Fraction(r),))
    if a.kind == "ZMod":
        m = a.m
        if u % m == 0:
            jA = ModuleMap([a], [a, QZ], [[1], [0]], "jA")
            ev1 = ModuleMap([a, QZ], [QZ], [[0, 1]], "ev1")
            return _finish(A, [a, QZ], jA, ev1, lambda x, r: (Fraction(x), Fraction(r)))
        if gcd(int(u), m) != 1:
            raise NotImplementedError(f"order unit {u} is a zero divisor in Z/{m}")
        v = pow(int(u), -1, m)
        # t = (v x + r)/m is well defined because v u = 1 mod m; ev1(t) = m t mod Z
        jA = ModuleMap([a], [QZ], [[Fraction(v, m)]], "jA")
        ev1 = ModuleMap([QZ], [QZ], [[m]], "ev1")
        return _finish(A, [QZ], jA, ev1, lambda x, r: ((v * Fraction(x) + Fraction(r)) / m,))
    if u == 0:
        jA = ModuleMap([a], [a, QZ], [[1], [0]], "jA")
        ev1 = ModuleMap([a, QZ], [QZ], [[0, 1]], "ev1")
        return _finish(A, [a, QZ], jA, ev1, lambda x, r: (Fraction(x), Fraction(r)))
    reduced, scale = _reduced_coordinate(a, u)
    # coordinates (y, c) with y = rho(x) + r, c = reduced coordinate of x
    atoms = [Q] + ([reduced] if reduced else [])
    jA = ModuleMap([a], atoms, [[1 / u]] + ([[scale]] if reduced else []), "jA")
    ev1 = ModuleMap(atoms, [QZ], [[1] + ([-1 / (scale * u)] if reduced else [])], "ev1")

    def from_pair(x, r):
        x = Fraction(x)
        return (x / u + Fraction(r),) + ((x * scale,) if reduced else ())

    model = _finish(A, atoms, jA, ev1, from_pair)
    model.psi = PsiSplitting(AdmissibleModule.raw([reduced] if reduced else []), u, scale, model)
    return model


def _reduced_coordinate(a: Atom, u: Fraction) -> tuple[Optional[Atom], Fraction]:
    """An atom for K0/uZ and the multiplier taking x in K0 to its coordinate."""
    if a.kind == "Z":
        n = abs(int(u))
        return (Atom.zmod(n) if n > 1 else None), Fraction(1)
    outside = [p for p in prime_factors(abs(u.numerator) * u.denominator) if p not in a.primes]
    if outside:
        raise NotImplementedError(f"order unit {u} is not a unit of {a}")
    return Atom.pruefer(a.primes), 1 / u


def _finish(A: AlgebraModel, atoms, jA: ModuleMap, ev1: ModuleMap, from_pair) -> KSharpModel:
    module = AdmissibleModule.raw(atoms)
    if module.atoms != AdmissibleModule(atoms).atoms:
        raise AssertionError("K0# coordinates are not in canonical order")
    model = KSharpModel(A, module, jA, ev1, from_pair)
    # presentation sanity: (u, -1) is zero and jA(x) is the class of (x, 0)
    if A.k0_atom is not None:
        if not module.equal(from_pair(A.unit, -1), module.zero_element()):
            raise AssertionError("presentation relation does not vanish")
    return model


_MODELS: dict = {}


def k_sharp(A: AlgebraModel) -> KSharpModel:
    if A not in _MODELS:
        _MODELS[A] = k_sharp_module(A)
    return _MODELS[A]


def psi_splitting(A: AlgebraModel) -> PsiSplitting:
    model = k_sharp(A)
    if model.psi is None:
        raise SplittingUnavailable(f"splitting unavailable for {A.name}, use the phi_A form")
    return model.psi


# -- coefficient sequences ------------------------------------------------------------------------

def ztr_sequence() -> ShortExactSequence:
    Z, Q, QZ = Atom.z(), Atom.q(), Atom.qmodz()
    return ShortExactSequence(ModuleMap([Z], [Q], [[1]], "incl"), ModuleMap([Q], [QZ], [[1]], "q"), "ZTR")


def trace_sequence(A: AlgebraModel) -> ShortExactSequence:
    """0 -> tau K0 / Z -> Q/Z -> Q / tau K0 -> 0."""
    T = A.trace_image()
    QZ = Atom.qmodz()
    d = (1 / T.scale)
    if d.denominator != 1:
        raise NotImplementedError("trace image does not contain Z")
    d = int(d)
    if T.kind != "loc":
        raise NotImplementedError("trace image must be a localisation")
    # T = (1/d) Z[1/P]; x |-> d x identifies T/Z with Z/d' + Pr(P)
    primes = tuple(T.primes)
    d_out = d
    for p in primes:
        while d_out % p == 0:
            d_out //= p
    if primes and d_out > 1:
        raise NotImplementedError("trace image splits into two atoms")
    if primes:
        sub = [Atom.pruefer(primes)]
        quo = Atom.qmodloc(primes)
        inc = ModuleMap(sub, [QZ], [[Fraction(1, d)]], "incl")
        proj = ModuleMap([QZ], [quo], [[d]], "q")
    else:
        sub = [Atom.zmod(d)] if d > 1 else []
        inc = ModuleMap(sub, [QZ], [[Fraction(1, d)]] if sub else [[]], "incl")
        proj = ModuleMap([QZ], [QZ], [[d]], "q")
    return ShortExactSequence(inc, proj, "CSES")


def coefficient_sequences(A: AlgebraModel, include_trace: Optional[bool] = None) -> dict:
    """Certified short exact coefficient sequences attached to A."""
    if include_trace and not A.has_trace:
        raise ValueError(f"{A.name} has no trace")
    out = {"exse": k_sharp(A).exse, "ZTR": ztr_sequence()}
    if include_trace or (include_trace is None and A.has_trace):
        out["CSES"] = trace_sequence(A)
    return out


# -- connecting-map identity ----------------------------------------------------------------------

@dataclass
class ConnectingCertificate:
    algebra: str
    group: str
    holds: bool
    elements_checked: int
    exse_map: dict
    composite_map: dict
    detail: str = ""

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def unit_map(A: AlgebraModel) -> ModuleMap:
    """j: Z -> K0, 1 |-> [1]0."""
    if A.k0_atom is None:
        return ModuleMap([Atom.z()], [], [], "j")
    return ModuleMap([Atom.z()], [A.k0_atom], [[A.unit]], "j")


def _test_elements(H: CohomologyGroup) -> list[list[Fraction]]:
    out = []
    for s, cell in enumerate(H.cells):
        vals = [cell.sq.generator()] if cell.sq.is_cyclic_fg() else [Fraction(1, 2), Fraction(1, 3), Fraction(2, 5)]
        for v in vals:
            x = H.zero()
            x[s] = v
            out.append(x)
    if len(H.cells) > 1:
        out.append([c.sq.generator() if c.sq.is_cyclic_fg() else Fraction(1, 7) for c in H.cells])
    return out


def partial_a_identity_check(A: AlgebraModel, G: GroupDescriptor, degree: int = 2) -> ConnectingCertificate:
    """Compare the exse connecting map H^k(G, Q/Z) -> H^{k+1}(G, K0) with j_* after the ZTR one."""
    seqs = coefficient_sequences(A, include_trace=False)
    dA: CohomologyMap = connecting_map(seqs["exse"], G, degree)
    d: CohomologyMap = connecting_map(seqs["ZTR"], G, degree)
    jstar = induced_map_coefficient(unit_map(A), G, degree + 1, source=d.target, target=dA.target)
    composite = jstar.compose(d)
    same = composite == dA
    elements = _test_elements(dA.source)
    agree = all(dA.target.equal(dA(x), composite(x)) for x in elements)
    return ConnectingCertificate(A.name, str(G), same and agree, len(elements), dA.describe(), composite.describe(),
                                 "" if same == agree else "map comparison and elementwise check disagree")

"""Abelian groups and the coefficient-module catalog.

Every coefficient atom is a subquotient N/D of the rationals, where N and D
are subgroups of the form c*Z[1/S], Q or 0. Elements are plain Fractions
taken modulo D, so the same arithmetic serves Z/m, Z[1/S], Q, the Pruefer
groups, Q/Z and Q/Z[1/S].

>>> parse_module("Z/6 + Q/Z")
AdmissibleModule('Z/6 + Q/Z')
>>> hom_into(FgAbelianGroup(0, (6,)), parse_module("Q/Z"))
AdmissibleModule('Z/6')
>>> mult_kernel_cokernel(6, Atom.loc((2,)))
(AdmissibleModule('0'), AdmissibleModule('Z/3'))
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from math import gcd
from typing import Iterable, Optional, Sequence

from sympy import factorint

from .exactlin import IntMatrix, hstack, smith_normal_form, solve_linear_diophantine


@lru_cache(maxsize=4096)
def _factor(n: int) -> tuple[tuple[int, int], ...]:
    return tuple(sorted(factorint(n).items())) if n > 1 else ()


def prime_factors(n: int) -> frozenset[int]:
    return frozenset(p for p, _ in _factor(abs(n)))


def _valuations(x: Fraction) -> dict[int, int]:
    out = {p: e for p, e in _factor(x.numerator if x > 0 else -x.numerator)}
    for p, e in _factor(x.denominator):
        out[p] = out.get(p, 0) - e
    return out


def split_part(d: int, primes: Iterable[int]) -> tuple[int, int]:
    """Split |d| into (part supported on ``primes``, part prime to them)."""
    primes = set(primes)
    inside = 1
    for p, e in _factor(abs(d)):
        if p in primes:
            inside *= p ** e
    return inside, abs(d) // inside


# -- subgroups of Q ---------------------------------------------------------

class QSub:
    """A subgroup of Q: zero, all of Q, or scale * Z[1/primes]."""

    __slots__ = ("kind", "scale", "primes")

    def __init__(self, kind: str, scale: Fraction = Fraction(1), primes: Iterable[int] = ()):
        self.kind = kind
        primes = frozenset(primes)
        if kind == "loc":
            scale = abs(Fraction(scale))
            if scale == 0:
                self.kind, scale, primes = "zero", Fraction(1), frozenset()
            elif primes:
                kept = Fraction(1)
                for p, e in _valuations(scale).items():
                    if p not in primes:
                        kept *= Fraction(p) ** e
                scale = kept
        else:
            scale, primes = Fraction(1), frozenset()
        self.scale = scale
        self.primes = primes

    @classmethod
    def zero(cls) -> "QSub":
        return cls("zero")

    @classmethod
    def all(cls) -> "QSub":
        return cls("all")

    @classmethod
    def loc(cls, scale=1, primes: Iterable[int] = ()) -> "QSub":
        return cls("loc", Fraction(scale), primes)

    def _key(self):
        return (self.kind, self.scale, tuple(sorted(self.primes)))

    def __eq__(self, other) -> bool:
        return isinstance(other, QSub) and self._key() == other._key()

    def __hash__(self) -> int:
        return hash(self._key())

    def __repr__(self) -> str:
        if self.kind != "loc":
            return "0" if self.kind == "zero" else "Q"
        core = "Z" if not self.primes else "Z[1/" + ",".join(map(str, sorted(self.primes))) + "]"
        return core if self.scale == 1 else f"{self.scale}*{core}"

    def contains(self, x) -> bool:
        x = Fraction(x)
        if self.kind == "zero":
            return x == 0
        if self.kind == "all" or x == 0:
            return True
        den = (x / self.scale).denominator
        return all(p in self.primes for p, _ in _factor(den))

    def times(self, q) -> "QSub":
        q = Fraction(q)
        if q == 0 or self.kind == "zero":
            return QSub.zero()
        if self.kind == "all":
            return self
        return QSub.loc(self.scale * abs(q), self.primes)

    def __le__(self, other: "QSub") -> bool:
        if self.kind == "zero" or other.kind == "all":
            return True
        if other.kind == "zero" or self.kind == "all":
            return self.kind == "zero"
        return self.primes <= other.primes and other.contains(self.scale)

    def __add__(self, other: "QSub") -> "QSub":
        if self.kind == "zero":
            return other
        if other.kind == "zero":
            return self
        if "all" in (self.kind, other.kind):
            return QSub.all()
        primes = self.primes | other.primes
        v1, v2 = _valuations(self.scale), _valuations(other.scale)
        scale = Fraction(1)
        for p in set(v1) | set(v2):
            if p not in primes:
                scale *= Fraction(p) ** min(v1.get(p, 0), v2.get(p, 0))
        return QSub.loc(scale, primes)

    def __and__(self, other: "QSub") -> "QSub":
        if self.kind == "zero" or other.kind == "zero":
            return QSub.zero()
        if self.kind == "all":
            return other
        if other.kind == "all":
            return self
        primes = self.primes & other.primes
        v1, v2 = _valuations(self.scale), _valuations(other.scale)
        scale = Fraction(1)
        for p in set(v1) | set(v2) | (self.primes ^ other.primes):
            if p in primes:
                continue
            e1 = None if p in self.primes else v1.get(p, 0)
            e2 = None if p in other.primes else v2.get(p, 0)
            scale *= Fraction(p) ** max(e for e in (e1, e2) if e is not None)
        return QSub.loc(scale, primes)

    def divided(self, d: int) -> "QSub":
        return self.times(Fraction(1, d))


# -- subquotients and atoms ---------------------------------------------------

class Subquotient:
    """The group N/D for subgroups D <= N of Q."""

    __slots__ = ("num", "den")

    def __init__(self, num: QSub, den: QSub):
        if not den <= num:
            raise ValueError(f"{den!r} is not contained in {num!r}")
        self.num = num
        self.den = den

    def __repr__(self) -> str:
        return f"({self.num!r})/({self.den!r})"

    def __eq__(self, other) -> bool:
        return isinstance(other, Subquotient) and (self.num, self.den) == (other.num, other.den)

    def __hash__(self) -> int:
        return hash((self.num, self.den))

    def is_zero(self) -> bool:
        return self.num <= self.den

    def contains(self, x) -> bool:
        return self.num.contains(x)

    def is_zero_element(self, x) -> bool:
        return self.den.contains(x)

    def equal(self, x, y) -> bool:
        return self.den.contains(Fraction(x) - Fraction(y))

    def reduce(self, x) -> Fraction:
        """Canonical representative of x modulo the denominator subgroup."""
        x = Fraction(x)
        den = self.den
        if den.kind == "zero":
            return x
        if den.kind == "all":
            return Fraction(0)
        y = x / den.scale
        b_in, b_out = split_part(y.denominator, den.primes)
        # y = a/(b_in*b_out); pick the residue a'' with a'' * b_in = a mod b_out
        a = y.numerator
        if b_out == 1:
            return Fraction(0)
        r = (a * pow(b_in, -1, b_out)) % b_out
        return den.scale * Fraction(r, b_out)

    def torsion_part(self, d: int) -> "Subquotient":
        """Elements killed by d."""
        return Subquotient(self.den.divided(d) & self.num, self.den)

    def quotient_by_multiple(self, d: int) -> "Subquotient":
        """The group N / (dN + D)."""
        return Subquotient(self.num, self.num.times(d) + self.den)

    def atoms(self) -> tuple["Atom", ...]:
        """Canonical atom decomposition of N/D as an abstract group."""
        N, D = self.num, self.den
        if N <= D:
            return ()
        if D.kind == "zero":
            if N.kind == "all":
                return (Atom.q(),)
            return (Atom.loc(tuple(sorted(N.primes))),)
        if N.kind == "all":
            return (Atom.qmodloc(tuple(sorted(D.primes))),)
        f = Fraction(D.scale / N.scale)
        f_int = 1
        for p, e in _valuations(f).items():
            if p not in N.primes:
                f_int *= p ** e
        out = []
        if f_int > 1:
            out.append(Atom.zmod(f_int))
        extra = tuple(sorted(N.primes - D.primes))
        if extra:
            out.append(Atom.pruefer(extra))
        return tuple(out)

    def is_finite(self) -> bool:
        return all(a.kind == "ZMod" for a in self.atoms())

    def order(self) -> int:
        """Order of a finite subquotient (which is then cyclic)."""
        atoms = self.atoms()
        if not atoms:
            return 1
        if len(atoms) != 1 or atoms[0].kind != "ZMod":
            raise ValueError("subquotient is not finite")
        return atoms[0].m

    def is_cyclic_fg(self) -> bool:
        """True for a finite cyclic or an infinite cyclic subquotient."""
        atoms = self.atoms()
        return len(atoms) <= 1 and all(a.kind in ("ZMod", "Z") for a in atoms)

    def generator(self) -> Fraction:
        """A generator of a cyclic subquotient."""
        if self.is_zero():
            return Fraction(0)
        if not self.is_cyclic_fg():
            raise ValueError("subquotient is not cyclic")
        return self.num.scale

    def cyclic_coordinate(self, x) -> int:
        """Integer k with x = k * generator (mod D); reduced mod the order."""
        if self.is_zero():
            return 0
        g = self.generator()
        y = Fraction(x) / g
        atoms = self.atoms()
        if atoms[0].kind == "Z":
            if y.denominator != 1:
                raise ValueError("element outside the subquotient")
            return int(y)
        n = atoms[0].m
        b_in, b_out = split_part(y.denominator, self.num.primes)
        if b_out != 1:
            raise ValueError("element outside the subquotient")
        return (y.numerator * pow(b_in, -1, n)) % n


_ATOM_KINDS = ("Z", "Loc", "Q", "ZMod", "Pr", "QZ", "QLoc")


@dataclass(frozen=True)
class Atom:
    """One coefficient atom: Z, Z/m, Z[1/S], Q, Pr{P}, Q/Z or Q/Z[1/S]."""

    kind: str
    m: int = 0
    primes: tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind not in _ATOM_KINDS:
            raise ValueError(f"unknown atom kind {self.kind}")
        if self.kind == "ZMod" and self.m < 2:
            raise ValueError("Z/m needs m >= 2")
        if self.kind in ("Loc", "Pr", "QLoc") and not self.primes:
            raise ValueError(f"{self.kind} needs a nonempty prime set")
        for p in self.primes:
            if len(_factor(p)) != 1 or _factor(p)[0][1] != 1:
                raise ValueError(f"{p} is not a prime")

    @staticmethod
    def z() -> "Atom":
        return Atom("Z")

    @staticmethod
    def zmod(m: int) -> "Atom":
        return Atom("ZMod", m=m)

    @staticmethod
    def loc(primes: Iterable[int]) -> "Atom":
        primes = tuple(sorted(set(primes)))
        return Atom("Loc", primes=primes) if primes else Atom("Z")

    @staticmethod
    def q() -> "Atom":
        return Atom("Q")

    @staticmethod
    def pruefer(primes: Iterable[int]) -> "Atom":
        return Atom("Pr", primes=tuple(sorted(set(primes))))

    @staticmethod
    def qmodz() -> "Atom":
        return Atom("QZ")

    @staticmethod
    def qmodloc(primes: Iterable[int]) -> "Atom":
        primes = tuple(sorted(set(primes)))
        return Atom("QLoc", primes=primes) if primes else Atom("QZ")

    @property
    def sq(self) -> Subquotient:
        return _atom_sq(self)

    @property
    def torsion_free(self) -> bool:
        return self.kind in ("Z", "Loc", "Q")

    @property
    def divisible(self) -> bool:
        return self.kind in ("Q", "Pr", "QZ", "QLoc")

    @property
    def finite(self) -> bool:
        return self.kind == "ZMod"

    def sort_key(self):
        order = _ATOM_KINDS.index(self.kind)
        if self.kind == "QLoc":
            order = _ATOM_KINDS.index("QZ")
        return (order, self.m, len(self.primes), self.primes)

    def __str__(self) -> str:
        ps = ",".join(map(str, self.primes))
        return {
            "Z": "Z", "Q": "Q", "QZ": "Q/Z",
            "ZMod": f"Z/{self.m}", "Loc": f"Z[{ps}]", "Pr": f"Pr{{{ps}}}", "QLoc": f"Q/Z[{ps}]",
        }[self.kind]


@lru_cache(maxsize=None)
def _atom_sq(a: Atom) -> Subquotient:
    Z = QSub.loc(1)
    return {
        "Z": lambda: Subquotient(Z, QSub.zero()),
        "ZMod": lambda: Subquotient(Z, QSub.loc(a.m)),
        "Loc": lambda: Subquotient(QSub.loc(1, a.primes), QSub.zero()),
        "Q": lambda: Subquotient(QSub.all(), QSub.zero()),
        "Pr": lambda: Subquotient(QSub.loc(1, a.primes), Z),
        "QZ": lambda: Subquotient(QSub.all(), Z),
        "QLoc": lambda: Subquotient(QSub.all(), QSub.loc(1, a.primes)),
    }[a.kind]()


def _canonical_atoms(atoms: Iterable[Atom]) -> tuple[Atom, ...]:
    atoms = list(atoms)
    free = sorted((a for a in atoms if a.torsion_free), key=Atom.sort_key)
    # finite part as an invariant-factor chain
    by_prime: dict[int, list[int]] = {}
    for a in atoms:
        if a.kind == "ZMod":
            for p, e in _factor(a.m):
                by_prime.setdefault(p, []).append(p ** e)
    chain: list[int] = []
    if by_prime:
        longest = max(len(v) for v in by_prime.values())
        for v in by_prime.values():
            v.sort(reverse=True)
        for i in range(longest):
            d = 1
            for v in by_prime.values():
                if i < len(v):
                    d *= v[i]
            chain.append(d)
        chain.reverse()
    finite = [Atom.zmod(d) for d in chain]
    # divisible torsion by p-multiplicities
    cof = [a for a in atoms if a.kind in ("QZ", "QLoc")]
    prf = [a for a in atoms if a.kind == "Pr"]
    mentioned = sorted({p for a in cof + prf for p in a.primes})
    mult = {p: sum(p in a.primes for a in prf) + sum(p not in a.primes for a in cof)
            for p in mentioned}
    c = len(cof)
    divisible = [Atom.qmodloc(tuple(p for p in mentioned if mult[p] < k)) for k in range(1, c + 1)]
    top = max(mult.values(), default=0)
    divisible += [Atom.pruefer(tuple(p for p in mentioned if mult[p] >= k))
                  for k in range(c + 1, top + 1)]
    return tuple(free + finite + divisible)


class AdmissibleModule:
    """A finite direct sum of atoms, kept in canonical order.

    Two modules compare equal exactly when they are isomorphic.
    """

    __slots__ = ("atoms",)

    def __init__(self, atoms: Iterable[Atom] = ()):
        self.atoms = _canonical_atoms(atoms)

    @classmethod
    def raw(cls, atoms: Iterable[Atom]) -> "AdmissibleModule":
        """A module whose atom order is kept as given (used for coordinates)."""
        obj = cls.__new__(cls)
        obj.atoms = tuple(atoms)
        return obj

    def canonical(self) -> "AdmissibleModule":
        return AdmissibleModule(self.atoms)

    def __eq__(self, other) -> bool:
        if isinstance(other, str):
            other = parse_module(other)
        return isinstance(other, AdmissibleModule) and _canonical_atoms(self.atoms) == _canonical_atoms(other.atoms)

    def __hash__(self) -> int:
        return hash(_canonical_atoms(self.atoms))

    def __add__(self, other: "AdmissibleModule") -> "AdmissibleModule":
        return AdmissibleModule(self.atoms + other.atoms)

    def __len__(self) -> int:
        return len(self.atoms)

    def is_zero(self) -> bool:
        return not self.atoms

    def is_finite(self) -> bool:
        return all(a.finite for a in self.atoms)

    def order(self) -> int:
        if not self.is_finite():
            raise ValueError("module is infinite")
        out = 1
        for a in self.atoms:
            out *= a.m
        return out

    def rank(self) -> int:
        """Rank over Q (the dimension of M tensor Q)."""
        return sum(a.torsion_free for a in self.atoms)

    def __str__(self) -> str:
        if not self.atoms:
            return "0"
        parts = []
        i = 0
        atoms = self.atoms
        while i < len(atoms):
            j = i
            while j < len(atoms) and atoms[j] == atoms[i]:
                j += 1
            s = str(atoms[i])
            if j - i > 1:
                s = (s if s in ("Z", "Q") else f"({s})") + f"^{j - i}"
            parts.append(s)
            i = j
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"AdmissibleModule('{self}')"

    def zero_element(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(0) for _ in self.atoms)

    def reduce(self, x: Sequence) -> tuple[Fraction, ...]:
        return tuple(a.sq.reduce(v) for a, v in zip(self.atoms, x))

    def contains(self, x: Sequence) -> bool:
        return len(x) == len(self.atoms) and all(a.sq.contains(v) for a, v in zip(self.atoms, x))

    def equal(self, x: Sequence, y: Sequence) -> bool:
        return all(a.sq.equal(u, v) for a, u, v in zip(self.atoms, x, y))


# -- descriptor grammar -------------------------------------------------------

class ParseError(ValueError):
    """Descriptor parse failure carrying the offending position."""

    def __init__(self, text: str, pos: int, expected: str):
        self.text = text
        self.pos = pos
        self.expected = expected
        super().__init__(f"parse error at position {pos} in {text!r}: expected {expected}")


_ATOM_HELP = "an atom (Z, Z/m, Z[p,..], Q, Q/Z, Pr{p,..}, Q/Z[p,..], 0)"
_WS = re.compile(r"\s*")
_INT = re.compile(r"\d+")


def _prime_list(text: str, pos: int, close: str) -> tuple[tuple[int, ...], int]:
    """Read 'p, q, ...' followed by `close`; errors point at the offending entry."""
    primes = []
    while True:
        pos = _WS.match(text, pos).end()
        m = _INT.match(text, pos)
        if not m:
            raise ParseError(text, pos, "a prime")
        p = int(m.group())
        try:
            Atom.pruefer((p,))
        except ValueError:
            raise ParseError(text, pos, "a prime") from None
        if p in primes:
            raise ParseError(text, pos, "distinct primes")
        primes.append(p)
        pos = _WS.match(text, m.end()).end()
        if text.startswith(",", pos):
            pos += 1
            continue
        if text.startswith(close, pos):
            return tuple(primes), pos + 1
        raise ParseError(text, pos, f"',' or '{close}'")


def _parse_atom_at(text: str, pos: int) -> tuple[list[Atom], int]:
    pos = _WS.match(text, pos).end()
    if text.startswith("(", pos):
        atoms, end = _parse_atom_at(text, pos + 1)
        end = _WS.match(text, end).end()
        if not text.startswith(")", end):
            raise ParseError(text, end, "')'")
        end += 1
    elif text.startswith("Q/Z[", pos):
        primes, end = _prime_list(text, pos + 4, "]")
        atoms = [Atom.qmodloc(primes)]
    elif text.startswith("Q/Z", pos):
        atoms, end = [Atom.qmodz()], pos + 3
    elif text.startswith("Pr{", pos):
        primes, end = _prime_list(text, pos + 3, "}")
        atoms = [Atom.pruefer(primes)]
    elif text.startswith("Z[", pos):
        primes, end = _prime_list(text, pos + 2, "]")
        atoms = [Atom.loc(primes)]
    elif text.startswith("Z/", pos):
        m = _INT.match(text, pos + 2)
        if not m or int(m.group()) < 1:
            raise ParseError(text, pos + 2, "a modulus >= 1")
        mod = int(m.group())
        atoms, end = ([Atom.zmod(mod)] if mod > 1 else []), m.end()
    elif text.startswith("Z", pos):
        atoms, end = [Atom.z()], pos + 1
    elif text.startswith("Q", pos):
        atoms, end = [Atom.q()], pos + 1
    elif text.startswith("0", pos):
        atoms, end = [], pos + 1
    else:
        raise ParseError(text, pos, _ATOM_HELP)
    power = re.compile(r"\s*\^\s*").match(text, end)
    if power:
        m = _INT.match(text, power.end())
        if not m:
            raise ParseError(text, power.end(), "an exponent")
        atoms = atoms * int(m.group())
        end = m.end()
    return atoms, end


def parse_module(text: str) -> AdmissibleModule:
    """Parse the module grammar: atoms joined by '+', e.g. 'Z/6 + Pr{2,3}'."""
    atoms: list[Atom] = []
    pos = 0
    while True:
        got, pos = _parse_atom_at(text, pos)
        atoms += got
        m = re.compile(r"\s*\+").match(text, pos)
        if not m:
            break
        pos = m.end()
    if text[pos:].strip():
        raise ParseError(text, pos, "'+' or end of input")
    return AdmissibleModule(atoms)


# -- module maps ----------------------------------------------------------------

class ModuleMap:
    """A homomorphism between direct sums of atoms given by rational multipliers.

    ``matrix[t][s]`` multiplies the s-th source coordinate into the t-th
    target coordinate. Atom orders are taken as given, not canonicalized.
    """

    def __init__(self, source: Sequence[Atom], target: Sequence[Atom],
                 matrix: Sequence[Sequence], name: str = ""):
        self.source = AdmissibleModule.raw(source)
        self.target = AdmissibleModule.raw(target)
        self.matrix = [[Fraction(x) for x in row] for row in matrix]
        self.name = name
        if len(self.matrix) != len(self.target.atoms) or any(
                len(r) != len(self.source.atoms) for r in self.matrix):
            raise ValueError("multiplier matrix has the wrong shape")
        for t, ta in enumerate(self.target.atoms):
            for s, sa in enumerate(self.source.atoms):
                q = self.matrix[t][s]
                if q and not (sa.sq.num.times(q) <= ta.sq.num and sa.sq.den.times(q) <= ta.sq.den):
                    raise ValueError(f"multiplier {q} from {sa} to {ta} is not a homomorphism")

    @classmethod
    def identity(cls, atoms: Sequence[Atom], name: str = "id") -> "ModuleMap":
        n = len(atoms)
        return cls(atoms, atoms, [[int(i == j) for j in range(n)] for i in range(n)], name)

    def __call__(self, x: Sequence) -> tuple[Fraction, ...]:
        raw = [sum((q * v for q, v in zip(row, x)), Fraction(0)) for row in self.matrix]
        return self.target.reduce(raw)

    def compose(self, inner: "ModuleMap") -> "ModuleMap":
        """self after inner."""
        rows = [[sum((self.matrix[t][k] * inner.matrix[k][s] for k in range(len(inner.matrix))), Fraction(0))
                 for s in range(len(inner.source.atoms))] for t in range(len(self.matrix))]
        return ModuleMap(inner.source.atoms, self.target.atoms, rows,
                         f"{self.name}*{inner.name}")

    def is_zero_map(self) -> bool:
        for t, ta in enumerate(self.target.atoms):
            for s, sa in enumerate(self.source.atoms):
                if not sa.sq.num.times(self.matrix[t][s]) <= ta.sq.den:
                    return False
        return True

    def preimage(self, y: Sequence, extra_candidates: int = 0) -> Optional[tuple[Fraction, ...]]:
        """Some x with self(x) == y, found by a small structured search."""
        cands: list[list[Fraction]] = []
        for s, sa in enumerate(self.source.atoms):
            if sa.finite:
                opts = [Fraction(k) for k in range(sa.m)]
            else:
                opts = {Fraction(0)}
                for t in range(len(self.target.atoms)):
                    q = self.matrix[t][s]
                    if q:
                        opts.add(Fraction(y[t]) / q)
                opts = sorted(x for x in opts if sa.sq.contains(x))
            cands.append(opts)
        for x in product(*cands):
            if self.target.equal(self(x), y):
                return self.source.reduce(x)
        return None


# -- finitely generated abelian groups ------------------------------------------

@dataclass(frozen=True)
class FgAbelianGroup:
    """Z^rank + Z/t1 + ... with t1 | t2 | ..., every ti >= 2."""

    rank: int = 0
    torsion: tuple[int, ...] = ()

    def __post_init__(self):
        t = tuple(self.torsion)
        if any(x < 2 for x in t) or any(t[i + 1] % t[i] for i in range(len(t) - 1)):
            raise ValueError(f"torsion {t} is not an invariant-factor chain")
        object.__setattr__(self, "torsion", t)

    @classmethod
    def from_orders(cls, orders: Iterable[int]) -> "FgAbelianGroup":
        """Canonical form of a direct sum of cyclic groups (order 0 means Z)."""
        orders = list(orders)
        rank = sum(1 for o in orders if o == 0)
        mod = AdmissibleModule(Atom.zmod(o) for o in orders if o > 1)
        return cls(rank, tuple(a.m for a in mod.atoms))

    @property
    def orders(self) -> tuple[int, ...]:
        return (0,) * self.rank + self.torsion

    def is_zero(self) -> bool:
        return self.rank == 0 and not self.torsion

    def order(self) -> int:
        if self.rank:
            raise ValueError("group is infinite")
        out = 1
        for t in self.torsion:
            out *= t
        return out

    def as_module(self) -> AdmissibleModule:
        return AdmissibleModule([Atom.z()] * self.rank + [Atom.zmod(t) for t in self.torsion])

    def __str__(self) -> str:
        return str(self.as_module())

    def __add__(self, other: "FgAbelianGroup") -> "FgAbelianGroup":
        return FgAbelianGroup.from_orders(self.orders + other.orders)


def parse_fg_group(text: str) -> FgAbelianGroup:
    mod = parse_module(text)
    if any(a.kind not in ("Z", "ZMod") for a in mod.atoms):
        raise ParseError(text, 0, "a finitely generated group (Z and Z/m atoms only)")
    return FgAbelianGroup.from_orders(0 if a.kind == "Z" else a.m for a in mod.atoms)


# -- closed-form Hom / Ext / Tor ---------------------------------------------------

def mult_kernel_cokernel(d: int, a: Atom) -> tuple[AdmissibleModule, AdmissibleModule]:
    """Kernel and cokernel of multiplication by d on one atom, by table."""
    if d == 0:
        raise ValueError("multiplication by zero is not covered by the table")
    d = abs(d)

    def cyc(n):
        return AdmissibleModule([Atom.zmod(n)] if n > 1 else [])

    zero = AdmissibleModule()
    if a.kind == "Z":
        return zero, cyc(d)
    if a.kind == "ZMod":
        g = gcd(d, a.m)
        return cyc(g), cyc(g)
    if a.kind == "Loc":
        return zero, cyc(split_part(d, a.primes)[1])
    if a.kind == "Q":
        return zero, zero
    if a.kind == "Pr":
        return cyc(split_part(d, a.primes)[0]), zero
    if a.kind == "QZ":
        return cyc(d), zero
    return cyc(split_part(d, a.primes)[1]), zero


def hom_into(F: FgAbelianGroup, M: AdmissibleModule) -> AdmissibleModule:
    atoms: list[Atom] = list(M.atoms) * F.rank
    for t in F.torsion:
        for a in M.atoms:
            atoms += mult_kernel_cokernel(t, a)[0].atoms
    return AdmissibleModule(atoms)


def ext_into(F: FgAbelianGroup, M: AdmissibleModule) -> AdmissibleModule:
    atoms: list[Atom] = []
    for t in F.torsion:
        for a in M.atoms:
            atoms += mult_kernel_cokernel(t, a)[1].atoms
    return AdmissibleModule(atoms)


def tensor_and_tor(F: FgAbelianGroup, G: FgAbelianGroup) -> tuple[FgAbelianGroup, FgAbelianGroup]:
    tensor = [0] * (F.rank * G.rank) + list(G.torsion) * F.rank + list(F.torsion) * G.rank
    tor = []
    for a in F.torsion:
        for b in G.torsion:
            g = gcd(a, b)
            tensor.append(g)
            tor.append(g)
    return FgAbelianGroup.from_orders(o for o in tensor if o != 1), FgAbelianGroup.from_orders(o for o in tor if o != 1)


# -- lattice computations for presented groups ------------------------------------
#
# A presented group is Z^k modulo the diagonal relations given by ``orders``
# (0 = no relation). Subgroups are described by generator lists of vectors
# in Z^k; every helper below returns lattices that contain the relations.

def relation_vectors(orders: Sequence[int]) -> list[list[int]]:
    k = len(orders)
    return [[o if i == j else 0 for i in range(k)] for j, o in enumerate(orders) if o]


def _as_matrix(vectors: Sequence[Sequence[int]], k: int) -> IntMatrix:
    return IntMatrix.from_columns([list(v) for v in vectors], k) if vectors else IntMatrix.zeros(k, 0)


def lattice_basis(vectors: Sequence[Sequence[int]], k: int) -> list[list[int]]:
    """A basis of the Z-span of the given vectors in Z^k."""
    if not vectors:
        return []
    snf = smith_normal_form(_as_matrix(vectors, k))
    out = []
    for i, d in enumerate(snf.invariant_factors):
        col = snf.apply_U_inv([int(r == i) for r in range(k)])
        out.append([d * x for x in col])
    return out


def quotient_group(ambient: Sequence[Sequence[int]], sub: Sequence[Sequence[int]], k: int) -> FgAbelianGroup:
    """The group span(ambient) / span(sub), assuming span(sub) <= span(ambient)."""
    basis = lattice_basis(ambient, k)
    if not basis:
        return FgAbelianGroup()
    B = _as_matrix(basis, k)
    coords = []
    for v in sub:
        sol = solve_linear_diophantine(B, list(v))
        if sol is None:
            raise ValueError("sub-lattice is not contained in the ambient lattice")
        coords.append(sol[0])
    if not coords:
        return FgAbelianGroup(len(basis))
    snf = smith_normal_form(_as_matrix(coords, len(basis)))
    return FgAbelianGroup.from_orders([d for d in snf.invariant_factors if d != 1]
                                      + [0] * (len(basis) - snf.rank))


def presented_group(orders: Sequence[int]) -> FgAbelianGroup:
    return FgAbelianGroup.from_orders(o for o in orders if o != 1)


def map_kernel(M: IntMatrix, src_orders: Sequence[int], tgt_orders: Sequence[int]) -> list[list[int]]:
    """Generators of ker(M) in Z^s (source relations included)."""
    s = len(src_orders)
    rels = relation_vectors(tgt_orders)
    big = hstack(M, _as_matrix(rels, len(tgt_orders))) if rels else M
    if big.cols == 0:
        return []
    snf = smith_normal_form(big)
    gens = []
    for j in range(snf.rank, big.cols):
        col = snf.V_column(j)
        gens.append(col[:s])
    gens += relation_vectors(src_orders)
    return [g for g in gens if any(g)]


def map_image(M: IntMatrix, tgt_orders: Sequence[int]) -> list[list[int]]:
    """Generators of im(M) + relations in Z^t."""
    cols = [M.column(j) for j in range(M.cols)] + relation_vectors(tgt_orders)
    return [c for c in cols if any(c)]


def lattice_le(a: Sequence[Sequence[int]], b: Sequence[Sequence[int]], k: int) -> bool:
    if not a:
        return True
    B = _as_matrix(b, k)
    return all(solve_linear_diophantine(B, list(v)) is not None for v in a if any(v))


def lattice_eq(a, b, k: int) -> bool:
    return lattice_le(a, b, k) and lattice_le(b, a, k)


def complex_homology(f: IntMatrix, g: IntMatrix, a_orders, b_orders, c_orders) -> FgAbelianGroup:
    """Homology at B of A --f--> B --g--> C for presented groups."""
    k = len(b_orders)
    ker = map_kernel(g, b_orders, c_orders)
    im = map_image(f, b_orders)
    if not lattice_le(im, ker, k):
        raise ValueError("g after f is not zero")
    return quotient_group(ker + relation_vectors(b_orders), im, k)


def is_pure_subgroup(sub: Sequence[Sequence[int]], orders: Sequence[int]) -> bool:
    """Purity of a subgroup of a finite presented group.

    For bounded groups a subgroup is pure exactly when it is a direct
    summand; purity is tested as L & p^j H == p^j L for every prime power.
    """
    k = len(orders)
    if any(o == 0 for o in orders):
        raise ValueError("purity test implemented for finite groups only")
    rels = relation_vectors(orders)
    L = list(sub) + rels
    exponent = 1
    for o in orders:
        exponent = exponent * o // gcd(exponent, o)
    for p, e in _factor(exponent):
        for j in range(1, e + 1):
            q = p ** j
            pH = [[q * int(i == r) for i in range(k)] for r in range(k)] + rels
            pL = [[q * x for x in v] for v in sub] + rels
            inter = lattice_intersection(L, pH, k)
            if not lattice_eq(inter, pL, k):
                return False
    return True


def lattice_intersection(a: Sequence[Sequence[int]], b: Sequence[Sequence[int]], k: int) -> list[list[int]]:
    if not a or not b:
        return []
    A = _as_matrix(a, k)
    B = _as_matrix(b, k)
    big = hstack(A, IntMatrix([[-x for x in r] for r in B.data], k, B.cols))
    snf = smith_normal_form(big)
    out = []
    for j in range(snf.rank, big.cols):
        col = snf.V_column(j)
        out.append(A.apply(col[:A.cols]))
    return [v for v in out if any(v)]

"""Group descriptors and free resolutions of Z over integral group rings.

A resolution is a graded free Z[G]-module with an explicit basis per degree.
Elements of a degree-k module are sparse dicts ``{(basis_index, g): coeff}``
meaning sum coeff * g . e_basis_index. Most resolutions here also carry a
Z-linear contracting homotopy ``s`` with ds + sd = 1 (and d s_0 + s_{-1} eps = 1
in degree 0), which is what makes comparison maps cheap: a chain map over
f: G -> H is F_k(e) = s(F_{k-1}(d e)).

Koszul sign convention: d(e_I) = sum_j (-1)^(j+1) (t_{i_j} - 1) e_{I - i_j}.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Callable, Iterable, Optional, Sequence, Union

from .abgroup import ParseError
from .exactlin import IntMatrix, determinant, smith_normal_form, solve_linear_diophantine, unimodular_inverse

MAX_RESOLUTION_DEGREE = 6
MAX_BAR_ORDER = 64
MAX_BAR_DEGREE = 4

Elem = dict  # {(basis_index, group_element): int}


def add_into(dst: Elem, src: Elem, scale: int = 1) -> Elem:
    for key, c in src.items():
        v = dst.get(key, 0) + scale * c
        if v:
            dst[key] = v
        else:
            dst.pop(key, None)
    return dst


# -- group models -------------------------------------------------------------

class AbelianModel:
    """Z^a + Z/m... with elements as integer tuples (order 0 means Z)."""

    def __init__(self, orders: Sequence[int]):
        self.orders = tuple(orders)

    def reduce(self, x: Sequence[int]) -> tuple:
        return tuple(v % o if o else v for v, o in zip(x, self.orders))

    def identity(self) -> tuple:
        return (0,) * len(self.orders)

    def mul(self, a, b) -> tuple:
        return self.reduce([x + y for x, y in zip(a, b)])

    def inv(self, a) -> tuple:
        return self.reduce([-x for x in a])

    def power(self, a, k: int) -> tuple:
        return self.reduce([k * x for x in a])

    @property
    def is_finite(self) -> bool:
        return all(self.orders)

    @property
    def order(self) -> int:
        out = 1
        for o in self.orders:
            out *= o
        return out

    def elements(self) -> list[tuple]:
        if not self.is_finite:
            raise ValueError("group is infinite")
        return [tuple(x) for x in product(*(range(o) for o in self.orders))]

    def generators(self) -> list[tuple]:
        n = len(self.orders)
        return [tuple(int(i == j) for i in range(n)) for j in range(n)]


class SemidirectModel:
    """N x| Z with elements (n_1, ..., n_r, l) and (n, l)(n', l') = (n + phi^l n', l + l')."""

    def __init__(self, n_orders: Sequence[int], phi: Sequence[Sequence[int]], phi_inv: Sequence[Sequence[int]]):
        self.normal = AbelianModel(n_orders)
        self.r = len(n_orders)
        self.phi = tuple(tuple(r) for r in phi)
        self.phi_inv = tuple(tuple(r) for r in phi_inv)
        self._powers: dict[int, tuple] = {}

    def act(self, l: int, n: Sequence[int]) -> tuple:
        """phi^l applied to an element of N."""
        mat = self._power_matrix(l)
        return self.normal.reduce([sum(mat[i][j] * n[j] for j in range(self.r)) for i in range(self.r)])

    def _power_matrix(self, l: int):
        if l in self._powers:
            return self._powers[l]
        r = self.r
        if l == 0:
            mat = tuple(tuple(int(i == j) for j in range(r)) for i in range(r))
        else:
            base = self.phi if l > 0 else self.phi_inv
            prev = self._power_matrix(l - 1 if l > 0 else l + 1)
            mat = tuple(tuple(sum(base[i][k] * prev[k][j] for k in range(r)) for j in range(r)) for i in range(r))
            mat = tuple(tuple(v % o if o else v for v in row) for row, o in zip(mat, self.normal.orders))
        self._powers[l] = mat
        return mat

    def identity(self) -> tuple:
        return (0,) * (self.r + 1)

    def mul(self, a, b) -> tuple:
        l1 = a[-1]
        moved = self.act(l1, b[:-1])
        return self.normal.mul(a[:-1], moved) + (l1 + b[-1],)

    def inv(self, a) -> tuple:
        l = a[-1]
        return self.act(-l, self.normal.inv(a[:-1])) + (-l,)

    @property
    def is_finite(self) -> bool:
        return False

    def from_normal(self, n: Sequence[int]) -> tuple:
        return tuple(n) + (0,)

    def xi(self, l: int = 1) -> tuple:
        return (0,) * self.r + (l,)


# -- descriptors --------------------------------------------------------------

@dataclass(frozen=True)
class FreeAb:
    n: int

    def __str__(self) -> str:
        return "1" if self.n == 0 else ("Z" if self.n == 1 else f"Z^{self.n}")


@dataclass(frozen=True)
class FinAb:
    moduli: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "moduli", tuple(int(m) for m in self.moduli))
        if any(m < 1 for m in self.moduli):
            raise ValueError("moduli must be positive")

    def __str__(self) -> str:
        ms = [m for m in self.moduli if m > 1]
        return " x ".join(f"Z/{m}" for m in ms) if ms else "1"


@dataclass(frozen=True)
class Product:
    factors: tuple

    def __post_init__(self):
        flat = []
        for f in self.factors:
            if isinstance(f, Product):
                flat.extend(f.factors)
            elif isinstance(f, SemidirectZ):
                raise ValueError("products with semidirect factors are not supported")
            else:
                flat.append(f)
        object.__setattr__(self, "factors", tuple(flat))

    def __str__(self) -> str:
        return " x ".join(str(f) for f in self.factors) or "1"


@dataclass(frozen=True)
class SemidirectZ:
    normal: Union[FreeAb, FinAb]
    phi: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if not isinstance(self.normal, (FreeAb, FinAb)):
            raise ValueError("the normal subgroup must be FreeAb or FinAb")
        phi = tuple(tuple(int(x) for x in r) for r in self.phi)
        object.__setattr__(self, "phi", phi)
        r = len(abelian_orders(self.normal))
        if len(phi) != r or any(len(row) != r for row in phi):
            raise ValueError(f"phi must be a {r}x{r} matrix")
        phi_inverse(self)  # raises when phi is not an automorphism

    def __str__(self) -> str:
        mat = "[" + ",".join("[" + ",".join(map(str, r)) + "]" for r in self.phi) + "]"
        return f"sd({self.normal},{mat})"


GroupDescriptor = Union[FreeAb, FinAb, Product, SemidirectZ]


def abelian_orders(G: GroupDescriptor) -> list[int]:
    """Cyclic factor orders of an abelian descriptor (0 = Z, trivial factors dropped)."""
    if isinstance(G, FreeAb):
        return [0] * G.n
    if isinstance(G, FinAb):
        return [m for m in G.moduli if m > 1]
    if isinstance(G, Product):
        return [o for f in G.factors for o in abelian_orders(f)]
    raise ValueError("not an abelian descriptor")


def is_abelian(G: GroupDescriptor) -> bool:
    return not isinstance(G, SemidirectZ)


def group_model(G: GroupDescriptor):
    if isinstance(G, SemidirectZ):
        return SemidirectModel(abelian_orders(G.normal), G.phi, phi_inverse(G))
    return AbelianModel(abelian_orders(G))


def group_order(G: GroupDescriptor) -> int:
    """Order of a finite group, 0 for an infinite one."""
    if isinstance(G, SemidirectZ):
        return 0
    out = 1
    for o in abelian_orders(G):
        out *= o
    return out


def hirsch_length(G: GroupDescriptor) -> int:
    if isinstance(G, SemidirectZ):
        return hirsch_length(G.normal) + 1
    return sum(1 for o in abelian_orders(G) if o == 0)


def is_free_abelian(G: GroupDescriptor) -> bool:
    return is_abelian(G) and all(o == 0 for o in abelian_orders(G))


@lru_cache(maxsize=None)
def phi_inverse(G: SemidirectZ) -> tuple[tuple[int, ...], ...]:
    orders = abelian_orders(G.normal)
    r = len(orders)
    if r == 0:
        return ()
    if all(o == 0 for o in orders):
        mat = IntMatrix(G.phi)
        if abs(determinant(mat)) != 1:
            raise ValueError("phi is not invertible over Z")
        return tuple(tuple(row) for row in unimodular_inverse(mat).data)
    if any(o == 0 for o in orders):
        raise ValueError("mixed finite and free normal subgroups are not supported")
    model = AbelianModel(orders)
    for j in range(r):
        for i in range(r):
            if (G.phi[i][j] * orders[j]) % orders[i]:
                raise ValueError("phi is not a homomorphism of the finite group")
    elements = model.elements()

    def apply(mat, x):
        return model.reduce([sum(mat[i][j] * x[j] for j in range(r)) for i in range(r)])

    if len({apply(G.phi, x) for x in elements}) != len(elements):
        raise ValueError("phi is not invertible on the finite group")
    # phi has finite order k on the group; its inverse is phi^(k-1)
    ident = tuple(tuple(int(i == j) for j in range(r)) for i in range(r))
    power = G.phi
    prev = ident
    for _ in range(len(elements) ** 2 + 1):
        if all(apply(power, g) == g for g in model.generators()):
            return prev
        prev = power
        power = tuple(tuple(sum(G.phi[i][k] * power[k][j] for k in range(r)) % orders[i] for j in range(r))
                      for i in range(r))
    raise ValueError("could not invert phi")


_FACTOR = re.compile(r"\s*(?:\(\s*Z/(?P<pm>\d+)\s*\)\s*\^\s*(?P<pe>\d+)|Z/(?P<m>\d+)|Z\s*\^\s*(?P<n>\d+)|(?P<z>Z)|(?P<one>1))")


def _parse_product(text: str, pos: int) -> tuple[list, int]:
    factors = []
    while True:
        m = _FACTOR.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(text, pos, "a group factor (Z, Z^n, Z/m, (Z/m)^n)")
        for key in ("pm", "m"):
            if m.group(key) and int(m.group(key)) < 1:
                raise ParseError(text, m.start(key), "a modulus >= 1")
        if m.group("pm"):
            mod, e = int(m.group("pm")), int(m.group("pe"))
            factors.append(FinAb((mod,) * e))
        elif m.group("m"):
            factors.append(FinAb((int(m.group("m")),)))
        elif m.group("n"):
            factors.append(FreeAb(int(m.group("n"))))
        elif m.group("z"):
            factors.append(FreeAb(1))
        pos = m.end()
        caret = re.compile(r"\s*\^\s*").match(text, pos)
        if caret and caret.end() > pos:
            raise ParseError(text, caret.end(), "an exponent")
        sep = re.compile(r"\s*x\s*").match(text, pos)
        if not sep:
            return factors, pos
        pos = sep.end()


def _simplify(factors: list) -> GroupDescriptor:
    if len(factors) == 1:
        return factors[0]
    if all(isinstance(f, FreeAb) for f in factors):
        return FreeAb(sum(f.n for f in factors))
    if all(isinstance(f, FinAb) for f in factors):
        return FinAb(tuple(m for f in factors for m in f.moduli))
    return Product(tuple(factors))


def parse_group(text: str) -> GroupDescriptor:
    """Parse 'Z^3', 'Z/4', 'Z/2 x Z/2 x Z' or 'sd(Z^2,[[1,1],[0,1]])'."""
    sd = re.compile(r"\s*sd\s*\(").match(text)
    if sd:
        factors, pos = _parse_product(text, sd.end())
        normal = _simplify(factors)
        if not isinstance(normal, (FreeAb, FinAb)):
            raise ParseError(text, sd.end(), "a free or finite abelian normal subgroup")
        comma = re.compile(r"\s*,\s*").match(text, pos)
        if not comma:
            raise ParseError(text, pos, "','")
        pos = comma.end()
        mat_m = re.compile(r"\[\s*(\[[-\d,\s]*\]\s*(?:,\s*\[[-\d,\s]*\]\s*)*)?\]").match(text, pos)
        if not mat_m:
            raise ParseError(text, pos, "an integer matrix like [[1,1],[0,1]]")
        rows = re.findall(r"\[([-\d,\s]*)\]", mat_m.group(0)[1:-1]) if mat_m.group(1) else []
        try:
            phi = tuple(tuple(int(x) for x in r.split(",") if x.strip()) for r in rows)
        except ValueError:
            raise ParseError(text, pos, "integer matrix entries") from None
        pos = mat_m.end()
        close = re.compile(r"\s*\)\s*$").match(text, pos)
        if not close:
            raise ParseError(text, pos, "')' and end of input")
        try:
            return SemidirectZ(normal, phi)
        except ValueError as e:
            raise ParseError(text, mat_m.start(), f"an automorphism matrix ({e})") from None
    factors, pos = _parse_product(text, 0)
    if text[pos:].strip():
        pos += len(text[pos:]) - len(text[pos:].lstrip())
        raise ParseError(text, pos, "'x' or end of input")
    return _simplify(factors)


# -- group homomorphisms --------------------------------------------------------

@dataclass(frozen=True)
class GroupHom:
    """A homomorphism of abelian descriptors given by generator images (columns)."""

    source: GroupDescriptor
    target: GroupDescriptor
    matrix: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        mat = tuple(tuple(int(x) for x in r) for r in self.matrix)
        object.__setattr__(self, "matrix", mat)
        so, to = abelian_orders(self.source), abelian_orders(self.target)
        if len(mat) != len(to) or any(len(r) != len(so) for r in mat):
            raise ValueError("homomorphism matrix has the wrong shape")
        for j, o in enumerate(so):
            for i, t in enumerate(to):
                if t == 0 and o != 0 and mat[i][j]:
                    raise ValueError("a torsion generator cannot map to a free coordinate")
                if t and (o * mat[i][j]) % t:
                    raise ValueError("generator relations are not respected")

    @classmethod
    def identity(cls, G: GroupDescriptor) -> "GroupHom":
        r = len(abelian_orders(G))
        return cls(G, G, tuple(tuple(int(i == j) for j in range(r)) for i in range(r)))

    @classmethod
    def coordinatewise(cls, G: GroupDescriptor, H: GroupDescriptor) -> "GroupHom":
        """The map sending the i-th generator of G to the i-th generator of H (e.g. Z^n -> (Z/m)^n)."""
        r = len(abelian_orders(G))
        return cls(G, H, tuple(tuple(int(i == j) for j in range(r)) for i in range(r)))

    def __call__(self, x: Sequence[int]) -> tuple:
        to = abelian_orders(self.target)
        return tuple((sum(r[j] * x[j] for j in range(len(x))) % t) if t else sum(r[j] * x[j] for j in range(len(x)))
                     for r, t in zip(self.matrix, to))

    def compose(self, inner: "GroupHom") -> "GroupHom":
        """self after inner."""
        a, b = self.matrix, inner.matrix
        rows = tuple(tuple(sum(a[i][k] * b[k][j] for k in range(len(b))) for j in range(len(b[0]) if b else 0))
                     for i in range(len(a)))
        return GroupHom(inner.source, self.target, rows)


# -- resolutions -----------------------------------------------------------------

class FreeResolution:
    """Base class: subclasses provide ``_basis``, ``_boundary`` and optionally ``_contract``."""

    kind = "resolution"
    has_contraction = False

    def __init__(self, group: Optional[GroupDescriptor], model, max_degree: int):
        self.group = group
        self.model = model
        self.max_degree = max_degree
        self._bases: dict[int, list] = {}
        self._index: dict[int, dict] = {}
        self._bd: dict[tuple[int, int], Elem] = {}

    # basis
    def basis(self, k: int) -> list:
        if k < 0 or k > self.max_degree:
            return []
        if k not in self._bases:
            self._bases[k] = list(self._basis(k))
        return self._bases[k]

    def rank(self, k: int) -> int:
        return len(self.basis(k))

    @property
    def ranks(self) -> tuple[int, ...]:
        return tuple(self.rank(k) for k in range(self.max_degree + 1))

    def index(self, k: int, label) -> int:
        if k not in self._index:
            self._index[k] = {lab: i for i, lab in enumerate(self.basis(k))}
        return self._index[k][label]

    # differential
    def boundary(self, k: int, j: int) -> Elem:
        """d of the j-th basis element in degree k (k >= 1)."""
        key = (k, j)
        if key not in self._bd:
            self._bd[key] = self._boundary(k, j)
        return self._bd[key]

    def act(self, g, x: Elem) -> Elem:
        mul = self.model.mul
        return {(i, mul(g, h)): c for (i, h), c in x.items()}

    def d(self, k: int, x: Elem) -> Elem:
        out: Elem = {}
        if k <= 0:
            return out
        mul = self.model.mul
        for (j, g), c in x.items():
            for (i, h), e in self.boundary(k, j).items():
                key = (i, mul(g, h))
                v = out.get(key, 0) + c * e
                if v:
                    out[key] = v
                else:
                    del out[key]
        return out

    def augment(self, x: Elem) -> int:
        return sum(x.values())

    def contract(self, k: int, x: Elem) -> Elem:
        """Contracting homotopy s_k; k = -1 takes an integer."""
        if not self.has_contraction:
            raise NotImplementedError(f"{self.kind} has no contracting homotopy")
        if k == -1:
            return {(0, self.model.identity()): x} if x else {}
        if k >= self.max_degree:
            raise ValueError(f"contraction out of range (degree {k} of {self.max_degree})")
        out: Elem = {}
        for (i, g), c in x.items():
            add_into(out, self._contract(k, i, g), c)
        return out

    # integral reduction Z (x)_G P
    def epsilon_matrix(self, k: int) -> IntMatrix:
        """Matrix of 1 (x) d_k with rows indexed by degree k-1 and columns by degree k."""
        rows, cols = self.rank(k - 1), self.rank(k)
        data = [[0] * cols for _ in range(rows)]
        if k >= 1:
            for j in range(cols):
                for (i, _), c in self.boundary(k, j).items():
                    data[i][j] += c
        return IntMatrix(data, rows, cols)

    def verify_d_squared(self, k: int, sample: Optional[Iterable[int]] = None) -> bool:
        if k < 2:
            return True
        js = range(self.rank(k)) if sample is None else sample
        return all(not self.d(k - 1, self.boundary(k, j)) for j in js)

    def verify_contraction(self, k: int, elems: Iterable[Elem]) -> bool:
        """Check d s + s d = 1 on the given degree-k elements."""
        for x in elems:
            lhs = dict(self.d(k + 1, self.contract(k, x)))
            if k == 0:
                add_into(lhs, self.contract(-1, self.augment(x)))
            else:
                add_into(lhs, self.contract(k - 1, self.d(k, x)))
            if lhs != {key: c for key, c in x.items() if c}:
                return False
        return True

    def _check(self):
        for k in range(2, self.max_degree + 1):
            r = self.rank(k)
            sample = None if r <= 600 else range(0, r, max(1, r // 300))
            if not self.verify_d_squared(k, sample):
                raise AssertionError(f"d o d != 0 in degree {k}")


class CyclicResolution(FreeResolution):
    """Resolution of Z over Z[C] for C = <t> infinite (m = 0) or of order m."""

    has_contraction = True

    def __init__(self, m: int, max_degree: int):
        self.m = m
        super().__init__(FreeAb(1) if m == 0 else FinAb((m,)), AbelianModel([m]), max_degree)
        self.kind = "cyclic" if m else "Koszul(Z)"

    def _basis(self, k):
        if self.m == 0 and k > 1:
            return []
        return [k]

    def _boundary(self, k, j):
        if k % 2 == 1:
            return {(0, (1,)): 1, (0, (0,)): -1}
        return {(0, (i,)): 1 for i in range(self.m)}

    def _contract(self, k, i, g):
        e = g[0]
        if self.m == 0:
            if k != 0:
                return {}
            if e > 0:
                return {(0, (j,)): 1 for j in range(e)}
            return {(0, (j,)): -1 for j in range(e, 0)}
        if k % 2 == 0:
            return {(0, (j,)): 1 for j in range(e)}
        return {(0, (0,)): 1} if e == self.m - 1 else {}


class TensorResolution(FreeResolution):
    """Tensor product of resolutions of the factors of a direct product."""

    has_contraction = True

    def __init__(self, factors: Sequence[FreeResolution], max_degree: int, group=None):
        self.factors = list(factors)
        orders = []
        for f in self.factors:
            orders.extend(f.model.orders)
        super().__init__(group, AbelianModel(orders), max_degree)
        self.kind = "tensor"
        self._slices = []
        pos = 0
        for f in self.factors:
            n = len(f.model.orders)
            self._slices.append((pos, pos + n))
            pos += n

    def _basis(self, k):
        tops = [f.max_degree for f in self.factors]
        degs = []
        for combo in product(*(range(t + 1) for t in tops)):
            if sum(combo) == k:
                degs.append(combo)
        degs.sort(reverse=True)
        out = []
        for combo in degs:
            for idx in product(*(range(f.rank(dk)) for f, dk in zip(self.factors, combo))):
                out.append(tuple(zip(combo, idx)))
        return out

    def _split(self, g):
        return [g[a:b] for a, b in self._slices]

    def _join(self, parts):
        out = ()
        for p in parts:
            out += tuple(p)
        return out

    def _boundary(self, k, j):
        label = self.basis(k)[j]
        ident = [f.model.identity() for f in self.factors]
        out: Elem = {}
        sign = 1
        for pos, (dk, ik) in enumerate(label):
            if dk > 0:
                for (i2, h), c in self.factors[pos].boundary(dk, ik).items():
                    new_label = label[:pos] + ((dk - 1, i2),) + label[pos + 1:]
                    g = ident[:pos] + [h] + ident[pos + 1:]
                    key = (self.index(k - 1, new_label), self._join(g))
                    add_into(out, {key: sign * c})
            if dk % 2:
                sign = -sign
        return out

    def _contract(self, k, i, g):
        label = self.basis(k)[i]
        parts = self._split(g)
        pieces = self._contract_pieces(list(zip(label, parts)))
        out: Elem = {}
        for lab, grp, c in pieces:
            add_into(out, {(self.index(k + 1, tuple(lab)), self._join(grp)): c})
        return out

    def _contract_pieces(self, items, offset: int = 0):
        """h = s (x) 1 + (eta eps) (x) h_rest, on a pure tensor of Z-basis elements."""
        if offset == len(items):
            return []
        (dk, ik), g = items[offset]
        f = self.factors[offset]
        out = []
        if dk < f.max_degree:
            for (i2, h), c in f.contract(dk, {(ik, g): 1}).items():
                lab = [it[0] for it in items]
                grp = [it[1] for it in items]
                lab[offset] = (dk + 1, i2)
                grp[offset] = h
                out.append((lab, grp, c))
        if dk == 0:
            rest = self._contract_pieces(items, offset + 1)
            for lab, grp, c in rest:
                lab = list(lab)
                grp = list(grp)
                lab[offset] = (0, 0)
                grp[offset] = f.model.identity()
                out.append((lab, grp, c))
        return out


class BarResolution(FreeResolution):
    """Normalized bar resolution of a finite group, basis [g1|...|gk] with gi != 1."""

    has_contraction = True

    def __init__(self, group, model, max_degree: int):
        super().__init__(group, model, max_degree)
        self.kind = "bar"
        self.elements = model.elements()
        self.nonidentity = [g for g in self.elements if g != model.identity()]

    def rank(self, k: int) -> int:
        if k < 0 or k > self.max_degree:
            return 0
        return len(self.nonidentity) ** k

    def _basis(self, k):
        return [tuple(t) for t in product(self.nonidentity, repeat=k)]

    def index(self, k: int, label) -> int:
        n = len(self.nonidentity)
        if k not in self._index:
            self._index[k] = {g: i for i, g in enumerate(self.nonidentity)}
        pos = self._index[k]
        out = 0
        for g in label:
            out = out * n + pos[g]
        return out

    def label(self, k: int, j: int) -> tuple:
        n = len(self.nonidentity)
        out = []
        for _ in range(k):
            j, r = divmod(j, n)
            out.append(self.nonidentity[r])
        return tuple(reversed(out))

    def _boundary(self, k, j):
        cells = self.label(k, j)
        ident = self.model.identity()
        out: Elem = {}
        add_into(out, {(self.index(k - 1, cells[1:]), cells[0]): 1})
        for i in range(k - 1):
            merged = self.model.mul(cells[i], cells[i + 1])
            if merged != ident:
                lab = cells[:i] + (merged,) + cells[i + 2:]
                add_into(out, {(self.index(k - 1, lab), ident): (-1) ** (i + 1)})
        add_into(out, {(self.index(k - 1, cells[:-1]), ident): (-1) ** k})
        return out

    def _contract(self, k, i, g):
        if g == self.model.identity():
            return {}
        return {(self.index(k + 1, (g,) + self.label(k, i)), self.model.identity()): 1}

    def cells_boundary(self, cells: tuple) -> Elem:
        return self.boundary(len(cells), self.index(len(cells), cells))


class ConeResolution(FreeResolution):
    """Resolution of Z over Z[N x|_phi Z] as the cone of (T - 1) on the induced resolution.

    Degree k basis: ('a', i) for i in P_k(N) and ('b', j) for j in P_{k-1}(N).
    d(a x) = a(dx) and d(b y) = a(T y - y) - b(dy), where T(g e) = g xi Phi'(e)
    and Phi' is a chain self-map of P(N) over phi^{-1}.
    """

    def __init__(self, group: SemidirectZ, inner: FreeResolution, max_degree: int):
        super().__init__(group, group_model(group), max_degree)
        self.kind = "cone"
        self.inner = inner
        nm = inner.model
        inv = GroupHom(group.normal, group.normal, phi_inverse(group))
        self.twist = comparison_chain_map(inner, inner, inv, max_degree=max_degree - 1)

    def _basis(self, k):
        return [("a", i) for i in range(self.inner.rank(k))] + [("b", j) for j in range(self.inner.rank(k - 1))]

    def offset(self, k: int) -> int:
        """Position of the first b-basis element in degree k."""
        return self.inner.rank(k)

    def _lift(self, x: Elem, part: str, k: int) -> Elem:
        off = 0 if part == "a" else self.offset(k)
        return {(i + off, self.model.from_normal(n)): c for (i, n), c in x.items()}

    def _boundary(self, k, j):
        part, i = self.basis(k)[j]
        if part == "a":
            return self._lift(self.inner.boundary(k, i), "a", k - 1)
        out: Elem = {}
        twisted = self.twist.component(k - 1, i)  # Phi'(e_i) inside P_{k-1}(N)
        xi = self.model.xi(1)
        lifted = self.act(xi, self._lift(twisted, "a", k - 1))
        add_into(out, lifted)
        add_into(out, {(i, self.model.identity()): -1})
        if k - 1 >= 1:
            add_into(out, self._lift(self.inner.boundary(k - 1, i), "b", k - 1), -1)
        return out

    def twist_epsilon(self, k: int) -> IntMatrix:
        """Integral reduction of Phi' in degree k."""
        return self.twist.epsilon_matrix(k)


# -- constructors -----------------------------------------------------------------

def free_resolution(G: GroupDescriptor, max_degree: int) -> FreeResolution:
    if isinstance(G, SemidirectZ):
        raise ValueError("semidirect products need mapping_cone_resolution")
    if max_degree > MAX_RESOLUTION_DEGREE:
        raise ValueError(f"max degree {max_degree} exceeds {MAX_RESOLUTION_DEGREE}")
    if max_degree < 0:
        raise ValueError("max degree must be non-negative")
    orders = abelian_orders(G)
    factors = [CyclicResolution(o, min(max_degree, 1) if o == 0 else max_degree) for o in orders]
    res = TensorResolution(factors, max_degree, group=G)
    res.kind = "Koszul" if all(o == 0 for o in orders) else "tensor"
    res._check()
    return res


def mapping_cone_resolution(G: SemidirectZ, max_degree: int) -> ConeResolution:
    if not isinstance(G, SemidirectZ):
        raise ValueError("mapping cone resolutions are for semidirect products")
    if max_degree > MAX_RESOLUTION_DEGREE:
        raise ValueError(f"max degree {max_degree} exceeds {MAX_RESOLUTION_DEGREE}")
    inner = free_resolution(G.normal, max_degree)
    res = ConeResolution(G, inner, max_degree)
    res._check()
    return res


def resolution_for(G: GroupDescriptor, max_degree: int) -> FreeResolution:
    if isinstance(G, SemidirectZ):
        return mapping_cone_resolution(G, max_degree)
    return free_resolution(G, max_degree)


def bar_truncation(G: GroupDescriptor, max_degree: int) -> BarResolution:
    if isinstance(G, SemidirectZ) or any(o == 0 for o in abelian_orders(G)):
        raise ValueError("bar truncation needs a finite abelian group")
    if max_degree > MAX_BAR_DEGREE:
        raise ValueError(f"bar truncation is limited to degree {MAX_BAR_DEGREE}")
    n = group_order(G)
    if n > MAX_BAR_ORDER:
        raise ValueError(f"group of order {n} exceeds the bar limit {MAX_BAR_ORDER}")
    res = BarResolution(G, group_model(G), max_degree)
    res._check()
    return res


# -- chain maps -----------------------------------------------------------------------

class ChainMap:
    """G-equivariant chain map P -> Q over a group homomorphism, built lazily per basis element."""

    def __init__(self, source: FreeResolution, target: FreeResolution, along: Callable, max_degree: int,
                 method: str = "contraction"):
        self.source = source
        self.target = target
        self.along = along
        self.max_degree = max_degree
        self.method = method
        self._cache: dict[tuple[int, int], Elem] = {}

    def component(self, k: int, j: int) -> Elem:
        key = (k, j)
        if key not in self._cache:
            self._cache[key] = self._compute(k, j)
        return self._cache[key]

    def apply(self, k: int, x: Elem) -> Elem:
        out: Elem = {}
        for (j, g), c in x.items():
            add_into(out, self.target.act(self.along(g), self.component(k, j)), c)
        return out

    def _compute(self, k: int, j: int) -> Elem:
        if self.method == "diophantine":
            return _diophantine_component(self, k, j)
        if k == 0:
            return self.target.contract(-1, 1)
        return self.target.contract(k - 1, self.apply(k - 1, self.source.boundary(k, j)))

    def epsilon_matrix(self, k: int) -> IntMatrix:
        rows, cols = self.target.rank(k), self.source.rank(k)
        data = [[0] * cols for _ in range(rows)]
        for j in range(cols):
            for (i, _), c in self.component(k, j).items():
                data[i][j] += c
        return IntMatrix(data, rows, cols)

    def verify(self, max_degree: Optional[int] = None) -> bool:
        top = self.max_degree if max_degree is None else max_degree
        for j in range(self.source.rank(0)):
            if self.target.augment(self.component(0, j)) != self.source.augment({(j, self.source.model.identity()): 1}):
                return False
        for k in range(1, top + 1):
            for j in range(self.source.rank(k)):
                lhs = self.target.d(k, self.component(k, j))
                rhs = self.apply(k - 1, self.source.boundary(k, j))
                if lhs != rhs:
                    return False
        return True


def comparison_chain_map(P: FreeResolution, Q: FreeResolution, f, max_degree: Optional[int] = None,
                         method: str = "contraction") -> ChainMap:
    """A chain map P -> Q lifting the homomorphism f (a GroupHom or a callable on elements)."""
    top = min(P.max_degree, Q.max_degree) if max_degree is None else max_degree
    along = f if callable(f) else None
    if along is None:
        raise ValueError("f must be a group homomorphism")
    if method == "contraction" and not Q.has_contraction:
        raise ValueError(f"target {Q.kind} resolution has no contraction; use method='diophantine'")
    cm = ChainMap(P, Q, along, top, method)
    if not cm.verify(top):
        raise AssertionError("comparison map does not commute with the differentials")
    return cm


def _full_matrix(Q: FreeResolution, k: int, elements: list) -> IntMatrix:
    """Z-matrix of d_k on the Z-basis g e_i of Q_k (finite groups only)."""
    pos_lo = {(i, g): n for n, (i, g) in enumerate(product(range(Q.rank(k - 1)), elements))}
    cols = []
    for i, g in product(range(Q.rank(k)), elements):
        col = [0] * len(pos_lo)
        for key, c in Q.d(k, {(i, g): 1}).items():
            col[pos_lo[key]] += c
        cols.append(col)
    return IntMatrix.from_columns(cols, len(pos_lo))


def _diophantine_component(cm: ChainMap, k: int, j: int) -> Elem:
    """Solve d F_k(e_j) = F_{k-1}(d e_j) over Z on the full Z-basis of the target."""
    Q = cm.target
    if not Q.model.is_finite:
        raise ValueError("Diophantine lifting needs a finite target group")
    elements = Q.model.elements()
    keys = list(product(range(Q.rank(k)), elements))
    if k == 0:
        rhs_elem = None
        A = IntMatrix([[1] * len(keys)], 1, len(keys))
        b = [1]
    else:
        rhs_elem = cm.apply(k - 1, cm.source.boundary(k, j))
        A = _full_matrix(Q, k, elements)
        lo = {key: n for n, key in enumerate(product(range(Q.rank(k - 1)), elements))}
        b = [0] * A.rows
        for key, c in rhs_elem.items():
            b[lo[key]] += c
    sol = solve_linear_diophantine(A, b)
    if sol is None:
        raise AssertionError("lifting system unsolvable; the resolution is not exact")
    x = sol[0]
    return {keys[n]: v for n, v in enumerate(x) if v}


def resolution_homology_check(P: FreeResolution, k: int) -> bool:
    """Exactness of the augmented Z-complex at degree k, for finite groups, by SNF ranks."""
    elements = P.model.elements()
    n = len(elements)
    if k == 0:
        dk = IntMatrix([[1] * (n * P.rank(0))], 1, n * P.rank(0))
    else:
        dk = _full_matrix(P, k, elements)
    dk1 = _full_matrix(P, k + 1, elements)
    s_k = smith_normal_form(dk)
    s_k1 = smith_normal_form(dk1)
    dim = n * P.rank(k)
    return s_k.rank + s_k1.rank == dim and all(f == 1 for f in s_k1.invariant_factors)

"""Exact integer linear algebra: Smith normal form and Diophantine solving.

All entries are Python ints, so nothing ever overflows or rounds.

>>> snf = smith_normal_form(IntMatrix([[2, 4], [6, 8]]))
>>> snf.invariant_factors
(2, 4)
>>> solve_linear_diophantine(IntMatrix([[1, 2], [2, 4]]), [1, 2])
([1, 0], [[-2, 1]])
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Optional, Sequence


class IntMatrix:
    """A dense integer matrix stored row-major.

    The explicit shape survives degenerate cases such as 0 x 5 matrices,
    which a bare list of lists cannot represent.
    """

    __slots__ = ("rows", "cols", "data")

    def __init__(self, data: Iterable[Sequence[int]] = (), rows: int | None = None,
                 cols: int | None = None):
        body = [list(map(int, r)) for r in data]
        if rows is None:
            rows = len(body)
        if cols is None:
            cols = len(body[0]) if body else 0
        if len(body) != rows or any(len(r) != cols for r in body):
            raise ValueError("ragged or mis-sized matrix data")
        self.rows = rows
        self.cols = cols
        self.data = body

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "IntMatrix":
        return cls([[0] * cols for _ in range(rows)], rows, cols)

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls([[int(i == j) for j in range(n)] for i in range(n)], n, n)

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence[int]], rows: int) -> "IntMatrix":
        return cls([[c[i] for c in columns] for i in range(rows)], rows, len(columns))

    def copy(self) -> "IntMatrix":
        return IntMatrix([r[:] for r in self.data], self.rows, self.cols)

    def __getitem__(self, ij):
        i, j = ij
        return self.data[i][j]

    def __eq__(self, other) -> bool:
        if not isinstance(other, IntMatrix):
            return NotImplemented
        return (self.rows, self.cols, self.data) == (other.rows, other.cols, other.data)

    def __repr__(self) -> str:
        return f"IntMatrix({self.data!r}, rows={self.rows}, cols={self.cols})"

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        cols_of_other = list(zip(*other.data)) if other.rows else [()] * other.cols
        out = []
        for row in self.data:
            nz = [(k, a) for k, a in enumerate(row) if a]
            out.append([sum(a * col[k] for k, a in nz) for col in cols_of_other])
        return IntMatrix(out, self.rows, other.cols)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def transpose(self) -> "IntMatrix":
        return IntMatrix([list(c) for c in zip(*self.data)] if self.rows else [],
                         self.cols, self.rows)

    def column(self, j: int) -> list[int]:
        return [r[j] for r in self.data]

    def columns(self, start: int = 0, stop: int | None = None) -> "IntMatrix":
        stop = self.cols if stop is None else stop
        return IntMatrix([r[start:stop] for r in self.data], self.rows, stop - start)

    def submatrix_rows(self, start: int = 0, stop: int | None = None) -> "IntMatrix":
        stop = self.rows if stop is None else stop
        return IntMatrix([r[:] for r in self.data[start:stop]], stop - start, self.cols)

    def apply(self, vec: Sequence) -> list:
        """Matrix times column vector; works for ints, Fractions or any ring."""
        if len(vec) != self.cols:
            raise ValueError("vector length does not match column count")
        return [sum((a * v for a, v in zip(row, vec) if a), 0) for row in self.data]

    def is_zero(self) -> bool:
        return all(not a for r in self.data for a in r)


def hstack(*mats: IntMatrix) -> IntMatrix:
    rows = mats[0].rows
    if any(m.rows != rows for m in mats):
        raise ValueError("hstack row mismatch")
    return IntMatrix([sum((m.data[i] for m in mats), []) for i in range(rows)], rows,
                     sum(m.cols for m in mats))


def vstack(*mats: IntMatrix) -> IntMatrix:
    cols = mats[0].cols
    if any(m.cols != cols for m in mats):
        raise ValueError("vstack column mismatch")
    return IntMatrix([r[:] for m in mats for r in m.data], sum(m.rows for m in mats), cols)


def diagonal(entries: Sequence[int]) -> IntMatrix:
    n = len(entries)
    return IntMatrix([[entries[i] if i == j else 0 for j in range(n)] for i in range(n)], n, n)


class SnfResult:
    """U * A * V == D with U, V unimodular and D diagonal.

    The transforms are stored as logs of elementary operations; the matrices
    are only materialized on request, and single vectors can be pushed
    through them cheaply with the ``apply_*`` helpers.
    """

    def __init__(self, rows: int, cols: int, D: list[list[int]], factors: tuple[int, ...],
                 row_ops: list, col_ops: list):
        self.rows = rows
        self.cols = cols
        self.D = IntMatrix(D, rows, cols)
        self.invariant_factors = factors
        self.rank = len(factors)
        self._row_ops = row_ops
        self._col_ops = col_ops
        self._cache: dict[str, IntMatrix] = {}

    @property
    def nontrivial_factors(self) -> tuple[int, ...]:
        return tuple(d for d in self.invariant_factors if d != 1)

    # Row operations: ("s", a, b) swaps rows, ("a", dst, src, q) adds q*src to
    # dst, ("n", t) negates. U is their product in order of application.
    def apply_U(self, vec: Sequence) -> list:
        v = list(vec)
        for op in self._row_ops:
            if op[0] == "a":
                _, d, s, q = op
                v[d] = v[d] + q * v[s]
            elif op[0] == "s":
                v[op[1]], v[op[2]] = v[op[2]], v[op[1]]
            else:
                v[op[1]] = -v[op[1]]
        return v

    def apply_U_inv(self, vec: Sequence) -> list:
        v = list(vec)
        for op in reversed(self._row_ops):
            if op[0] == "a":
                _, d, s, q = op
                v[d] = v[d] - q * v[s]
            elif op[0] == "s":
                v[op[1]], v[op[2]] = v[op[2]], v[op[1]]
            else:
                v[op[1]] = -v[op[1]]
        return v

    def row_apply_U(self, vec: Sequence) -> list:
        """Row vector times U."""
        v = list(vec)
        for op in reversed(self._row_ops):
            if op[0] == "a":
                _, d, s, q = op
                v[s] = v[s] + q * v[d]
            elif op[0] == "s":
                v[op[1]], v[op[2]] = v[op[2]], v[op[1]]
            else:
                v[op[1]] = -v[op[1]]
        return v

    # Column operations: ("s", a, b) swaps columns, ("a", dst, src, q) adds
    # q*col_src to col_dst. V is their product in order of application.
    def apply_V(self, vec: Sequence) -> list:
        v = list(vec)
        for op in reversed(self._col_ops):
            if op[0] == "a":
                _, d, s, q = op
                v[s] = v[s] + q * v[d]
            else:
                v[op[1]], v[op[2]] = v[op[2]], v[op[1]]
        return v

    def apply_V_inv(self, vec: Sequence) -> list:
        v = list(vec)
        for op in self._col_ops:
            if op[0] == "a":
                _, d, s, q = op
                v[s] = v[s] - q * v[d]
            else:
                v[op[1]], v[op[2]] = v[op[2]], v[op[1]]
        return v

    def row_apply_V(self, vec: Sequence) -> list:
        """Row vector times V."""
        v = list(vec)
        for op in self._col_ops:
            if op[0] == "a":
                _, d, s, q = op
                v[d] = v[d] + q * v[s]
            else:
                v[op[1]], v[op[2]] = v[op[2]], v[op[1]]
        return v

    def _materialize(self, key: str, n: int, fn) -> IntMatrix:
        if key not in self._cache:
            cols = [fn([int(i == j) for i in range(n)]) for j in range(n)]
            self._cache[key] = IntMatrix.from_columns(cols, n)
        return self._cache[key]

    @property
    def U(self) -> IntMatrix:
        return self._materialize("U", self.rows, self.apply_U)

    @property
    def U_inv(self) -> IntMatrix:
        return self._materialize("Ui", self.rows, self.apply_U_inv)

    @property
    def V(self) -> IntMatrix:
        return self._materialize("V", self.cols, self.apply_V)

    @property
    def V_inv(self) -> IntMatrix:
        return self._materialize("Vi", self.cols, self.apply_V_inv)

    def V_column(self, j: int) -> list[int]:
        return self.apply_V([int(i == j) for i in range(self.cols)])


def _pick_pivot(D: list[list[int]], rows: Iterable[int], cols: Sequence[int]):
    best = None
    for i in rows:
        r = D[i]
        for j in cols:
            a = r[j]
            if a and (best is None or abs(a) < best[0]):
                best = (abs(a), i, j)
                if best[0] == 1:
                    return best
    return best


def smith_normal_form(A: IntMatrix) -> SnfResult:
    """Smith normal form with deterministic pivoting.

    The pivot is the nonzero entry of least absolute value in the active
    submatrix, ties going to the lowest (row, col).
    """
    m, n = A.rows, A.cols
    D = [r[:] for r in A.data]
    row_ops: list = []
    col_ops: list = []

    def swap_rows(a, b):
        if a != b:
            D[a], D[b] = D[b], D[a]
            row_ops.append(("s", a, b))

    def swap_cols(a, b):
        if a != b:
            for r in D:
                r[a], r[b] = r[b], r[a]
            col_ops.append(("s", a, b))

    def add_row(dst, src, q):
        D[dst] = [x + q * y for x, y in zip(D[dst], D[src])]
        row_ops.append(("a", dst, src, q))

    def add_col(dst, src, q):
        for r in D:
            if r[src]:
                r[dst] += q * r[src]
        col_ops.append(("a", dst, src, q))

    t = 0
    while t < min(m, n):
        best = _pick_pivot(D, range(t, m), range(t, n))
        if best is None:
            break
        _, pi, pj = best
        swap_rows(t, pi)
        swap_cols(t, pj)
        while True:
            p = D[t][t]
            dirty = False
            for i in range(t + 1, m):
                a = D[i][t]
                if a:
                    add_row(i, t, -(a // p))
                    if D[i][t]:
                        dirty = True
            row = D[t]
            for j in range(t + 1, n):
                a = row[j]
                if a:
                    add_col(j, t, -(a // p))
                    if row[j]:
                        dirty = True
            if dirty:
                in_col = _pick_pivot(D, range(t, m), [t])
                in_row = _pick_pivot(D, [t], range(t, n))
                if in_row is not None and (in_col is None or in_row[0] < in_col[0]):
                    swap_cols(t, in_row[2])
                elif in_col is not None:
                    swap_rows(t, in_col[1])
                continue
            # enforce divisibility of the remaining block by the pivot
            bad = None
            if abs(p) != 1:
                for i in range(t + 1, m):
                    r = D[i]
                    if any(r[j] % p for j in range(t + 1, n)):
                        bad = i
                        break
            if bad is None:
                break
            add_row(t, bad, 1)
        if D[t][t] < 0:
            D[t] = [-a for a in D[t]]
            row_ops.append(("n", t))
        t += 1
    factors = tuple(D[i][i] for i in range(t))
    return SnfResult(m, n, D, factors, row_ops, col_ops)


def solve_linear_diophantine(A: IntMatrix, b: Sequence[int]) -> Optional[tuple[list[int], list[list[int]]]]:
    """Solve A x = b over the integers.

    Returns ``(particular, kernel_basis)`` or ``None`` when no integer
    solution exists.
    """
    if len(b) != A.rows:
        raise ValueError(f"right-hand side has length {len(b)}, expected {A.rows}")
    snf = smith_normal_form(A)
    c = snf.apply_U(b)
    y = [0] * A.cols
    for i, d in enumerate(snf.invariant_factors):
        if c[i] % d:
            return None
        y[i] = c[i] // d
    if any(c[i] for i in range(snf.rank, A.rows)):
        return None
    x = snf.apply_V(y)
    kernel = [snf.V_column(j) for j in range(snf.rank, A.cols)]
    return x, kernel


def kernel_basis(A: IntMatrix) -> list[list[int]]:
    """A Z-basis of {x : A x = 0}; it spans a saturated sublattice."""
    snf = smith_normal_form(A)
    return [snf.V_column(j) for j in range(snf.rank, A.cols)]


def rational_inverse(A: IntMatrix) -> list[list[Fraction]]:
    n = A.rows
    if A.cols != n:
        raise ValueError("inverse of a non-square matrix")
    M = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
         for i, row in enumerate(A.data)]
    for c in range(n):
        piv = next((r for r in range(c, n) if M[r][c] != 0), None)
        if piv is None:
            raise ValueError("singular matrix")
        M[c], M[piv] = M[piv], M[c]
        inv = 1 / M[c][c]
        M[c] = [x * inv for x in M[c]]
        for r in range(n):
            if r != c and M[r][c] != 0:
                f = M[r][c]
                M[r] = [x - f * y for x, y in zip(M[r], M[c])]
    return [row[n:] for row in M]


def unimodular_inverse(A: IntMatrix) -> IntMatrix:
    inv = rational_inverse(A)
    if any(x.denominator != 1 for row in inv for x in row):
        raise ValueError("matrix is not invertible over the integers")
    return IntMatrix([[int(x) for x in row] for row in inv], A.rows, A.rows)


def determinant(A: IntMatrix) -> int:
    n = A.rows
    if A.cols != n:
        raise ValueError("determinant of a non-square matrix")
    M = [[Fraction(x) for x in row] for row in A.data]
    det = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if M[r][c] != 0), None)
        if piv is None:
            return 0
        if piv != c:
            M[c], M[piv] = M[piv], M[c]
            det = -det
        det *= M[c][c]
        for r in range(c + 1, n):
            if M[r][c] != 0:
                f = M[r][c] / M[c][c]
                M[r] = [x - f * y for x, y in zip(M[r], M[c])]
    return int(det)


def lattice_contains(gens: IntMatrix, vec: Sequence[int]) -> bool:
    """Is ``vec`` in the Z-span of the columns of ``gens``?"""
    return solve_linear_diophantine(gens, vec) is not None


def lattice_equal(a: IntMatrix, b: IntMatrix) -> bool:
    """Equality of the column lattices of two matrices with equal row count."""
    return (all(lattice_contains(a, b.column(j)) for j in range(b.cols))
            and all(lattice_contains(b, a.column(j)) for j in range(a.cols)))

# Copyright 2025 Google LLC
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Exact linear algebra over Z/p^n and over the unramified quadratic ring W/p^n.

Row modules are kept in Howell form, which makes membership and kernels decidable
even though Z/p^n has zero divisors. Abelian group types come from a separate local
Smith reduction. Dense rank and nullspace computations over F_p go through numpy.
"""

from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from sympy import Matrix, isprime, legendre_symbol

from galrep.errors import InvalidModulus, InvalidParams
from galrep.utils.typing import AbelianPGroupType

Vector = tuple[int, ...]

MAX_MODULUS = 1 << 62
_INT64_SAFE_PRIME = 1 << 31


@dataclass(frozen=True)
class Modulus:
    """The ring Z/p^n, p an odd prime."""

    p: int
    n: int = 1

    def __post_init__(self) -> None:
        if self.p < 3 or not isprime(self.p):
            raise InvalidModulus(f"p={self.p} must be an odd prime")
        if self.n < 1:
            raise InvalidModulus(f"level n={self.n} must be positive")
        if self.p**self.n >= MAX_MODULUS:
            raise InvalidModulus(f"p^n = {self.p}^{self.n} does not fit below 2^62")

    @property
    def value(self) -> int:
        return self.p**self.n

    def reduce(self, x: int) -> int:
        return x % self.value

    def valuation(self, x: int) -> int:
        """p-adic valuation of a residue, with 0 given valuation n."""
        x %= self.value
        if x == 0:
            return self.n
        v = 0
        while x % self.p == 0:
            x //= self.p
            v += 1
        return v

    def is_unit(self, x: int) -> bool:
        return x % self.p != 0

    def inverse(self, x: int) -> int:
        if not self.is_unit(x):
            raise InvalidParams(f"{x} is not a unit modulo {self.value}")
        return pow(x, -1, self.value)

    def at_level(self, n: int) -> "Modulus":
        return Modulus(self.p, n)

    def __str__(self) -> str:
        return f"Z/{self.p}^{self.n}"


@dataclass(frozen=True)
class ModularMatrix:
    """Immutable matrix over Z/p^n; entries are stored reduced into [0, p^n)."""

    modulus: Modulus
    entries: tuple[tuple[int, ...], ...]
    cols: int = -1

    def __post_init__(self) -> None:
        n_cols = self.cols
        if n_cols < 0:
            n_cols = len(self.entries[0]) if self.entries else 0
        mod = self.modulus.value
        reduced = tuple(tuple(int(x) % mod for x in row) for row in self.entries)
        for row in reduced:
            if len(row) != n_cols:
                raise InvalidParams(
                    f"ragged matrix: expected {n_cols} columns, found {len(row)}"
                )
        object.__setattr__(self, "entries", reduced)
        object.__setattr__(self, "cols", n_cols)

    @classmethod
    def from_rows(
        cls, modulus: Modulus, rows: Iterable[Iterable[int]], cols: int = -1
    ) -> "ModularMatrix":
        return cls(modulus, tuple(tuple(row) for row in rows), cols)

    @classmethod
    def identity(cls, modulus: Modulus, size: int) -> "ModularMatrix":
        return cls.scalar(modulus, size, 1)

    @classmethod
    def scalar(cls, modulus: Modulus, size: int, c: int) -> "ModularMatrix":
        rows = [[c if i == k else 0 for k in range(size)] for i in range(size)]
        return cls.from_rows(modulus, rows, size)

    @classmethod
    def zero(cls, modulus: Modulus, rows: int, cols: int) -> "ModularMatrix":
        return cls.from_rows(modulus, [[0] * cols for _ in range(rows)], cols)

    @classmethod
    def diagonal(cls, modulus: Modulus, values: Sequence[int]) -> "ModularMatrix":
        size = len(values)
        rows = [[values[i] if i == k else 0 for k in range(size)] for i in range(size)]
        return cls.from_rows(modulus, rows, size)

    @property
    def rows(self) -> int:
        return len(self.entries)

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def __getitem__(self, index: tuple[int, int]) -> int:
        i, k = index
        return self.entries[i][k]

    def _check_same_ring(self, other: "ModularMatrix") -> None:
        if other.modulus != self.modulus:
            raise InvalidParams(f"modulus mismatch: {self.modulus} vs {other.modulus}")

    def __matmul__(self, other: "ModularMatrix") -> "ModularMatrix":
        self._check_same_ring(other)
        if self.cols != other.rows:
            raise InvalidParams(
                f"cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}"
            )
        mod = self.modulus.value
        columns = list(zip(*other.entries, strict=True)) if other.rows else []
        product = [
            [sum(a * b for a, b in zip(row, col, strict=True)) % mod for col in columns]
            if columns
            else [0] * other.cols
            for row in self.entries
        ]
        return ModularMatrix.from_rows(self.modulus, product, other.cols)

    def __add__(self, other: "ModularMatrix") -> "ModularMatrix":
        self._check_same_ring(other)
        rows = [
            [a + b for a, b in zip(r, s, strict=True)]
            for r, s in zip(self.entries, other.entries, strict=True)
        ]
        return ModularMatrix.from_rows(self.modulus, rows, self.cols)

    def __sub__(self, other: "ModularMatrix") -> "ModularMatrix":
        self._check_same_ring(other)
        rows = [
            [a - b for a, b in zip(r, s, strict=True)]
            for r, s in zip(self.entries, other.entries, strict=True)
        ]
        return ModularMatrix.from_rows(self.modulus, rows, self.cols)

    def scale(self, c: int) -> "ModularMatrix":
        return ModularMatrix.from_rows(
            self.modulus, [[c * x for x in row] for row in self.entries], self.cols
        )

    def apply(self, vector: Sequence[int]) -> Vector:
        """Matrix times column vector."""
        if len(vector) != self.cols:
            raise InvalidParams(f"vector of length {len(vector)} for {self.cols} columns")
        mod = self.modulus.value
        return tuple(
            sum(a * x for a, x in zip(row, vector, strict=True)) % mod
            for row in self.entries
        )

    def transpose(self) -> "ModularMatrix":
        if not self.rows:
            return ModularMatrix.zero(self.modulus, self.cols, 0)
        return ModularMatrix.from_rows(self.modulus, zip(*self.entries), self.rows)

    def det(self) -> int:
        if not self.is_square:
            raise InvalidParams("determinant of a non-square matrix")
        if self.rows == 0:
            return 1
        if self.rows == 2:
            (a, b), (c, d) = self.entries
            return (a * d - b * c) % self.modulus.value
        return int(Matrix(self.entries).det()) % self.modulus.value

    def is_invertible(self) -> bool:
        return self.is_square and self.modulus.is_unit(self.det())

    def inverse(self) -> "ModularMatrix":
        if not self.is_invertible():
            raise InvalidParams("matrix is not invertible")
        inv = Matrix(self.entries).inv_mod(self.modulus.value)
        return ModularMatrix.from_rows(self.modulus, inv.tolist(), self.cols)

    def power(self, k: int) -> "ModularMatrix":
        if k < 0:
            return self.inverse().power(-k)
        result = ModularMatrix.identity(self.modulus, self.rows)
        base = self
        while k:
            if k & 1:
                result = result @ base
            base = base @ base
            k >>= 1
        return result

    def stack(self, other: "ModularMatrix") -> "ModularMatrix":
        """Vertical concatenation."""
        self._check_same_ring(other)
        if other.cols != self.cols:
            raise InvalidParams("cannot stack matrices with different column counts")
        return ModularMatrix(self.modulus, self.entries + other.entries, self.cols)

    def is_identity(self) -> bool:
        return self == ModularMatrix.identity(self.modulus, self.rows)

    def reduced_to(self, modulus: Modulus) -> "ModularMatrix":
        """Image under Z/p^n -> Z/p^k for k ≤ n."""
        if modulus.p != self.modulus.p or modulus.n > self.modulus.n:
            raise InvalidParams(f"cannot reduce {self.modulus} to {modulus}")
        return ModularMatrix.from_rows(modulus, self.entries, self.cols)

    def to_array(self) -> np.ndarray:
        return np.array(self.entries, dtype=object).reshape(self.rows, self.cols)

    def as_lists(self) -> list[list[int]]:
        return [list(row) for row in self.entries]


# =============================================================================
# Howell form and derived solvers
# =============================================================================


def _howell_rows(
    rows: Iterable[Sequence[int]], modulus: Modulus, cols: int
) -> list[list[int]]:
    p, n, mod = modulus.p, modulus.n, modulus.value
    work = [[x % mod for x in row] for row in rows]
    work = [row for row in work if any(row)]
    result: list[list[int]] = []
    for col in range(cols):
        candidates = [
            (modulus.valuation(row[col]), i) for i, row in enumerate(work) if row[col]
        ]
        if not candidates:
            continue
        v, idx = min(candidates)
        pivot_row = work.pop(idx)
        pv = p**v
        unit_inv = pow(pivot_row[col] // pv, -1, mod)
        pivot_row = [(x * unit_inv) % mod for x in pivot_row]

        remaining = []
        for row in work:
            if row[col]:
                factor = row[col] // pv
                row = [(x - factor * y) % mod for x, y in zip(row, pivot_row, strict=True)]
            if any(row):
                remaining.append(row)
        if v > 0:
            annihilated = [(x * p ** (n - v)) % mod for x in pivot_row]
            if any(annihilated):
                remaining.append(annihilated)
        work = remaining

        for prev in result:
            if prev[col] >= pv:
                q = prev[col] // pv
                prev[:] = [(x - q * y) % mod for x, y in zip(prev, pivot_row, strict=True)]
        result.append(pivot_row)
    return result


def canonical_form(m: ModularMatrix) -> ModularMatrix:
    """Howell form of the row module of ``m``.

    Pivots are powers p^v, entries above a pivot lie in [0, p^v), and the rows with
    zeros in the first k columns generate every row-module element with that
    property. The zero module is returned as the zero matrix of the input shape.
    """
    rows = _howell_rows(m.entries, m.modulus, m.cols)
    if not rows:
        return ModularMatrix.zero(m.modulus, m.rows, m.cols)
    return ModularMatrix.from_rows(m.modulus, rows, m.cols)


def reduce_vector(howell: ModularMatrix, vector: Sequence[int]) -> Vector:
    """Remainder of ``vector`` after subtracting multiples of the Howell rows."""
    mod = howell.modulus.value
    residue = [x % mod for x in vector]
    for row in howell.entries:
        lead = next((k for k, x in enumerate(row) if x), None)
        if lead is None:
            continue
        pivot = row[lead]
        if residue[lead] % pivot == 0 and residue[lead]:
            q = residue[lead] // pivot
            residue = [(x - q * y) % mod for x, y in zip(residue, row, strict=True)]
    return tuple(residue)


def contains(m: ModularMatrix, vector: Sequence[int]) -> bool:
    """Whether ``vector`` lies in the row module of ``m`` (i.e. x·m = vector is solvable)."""
    return not any(reduce_vector(canonical_form(m), vector))


def same_row_module(a: ModularMatrix, b: ModularMatrix) -> bool:
    return canonical_form(a) == canonical_form(b)


def kernel(m: ModularMatrix) -> list[Vector]:
    """Generators of {v : m·v = 0}.

    Computed from the Howell form of the augmented matrix [m^T | I]: its rows with
    zero left block span exactly the pairs (0, v) with m·v = 0.
    """
    r, c = m.rows, m.cols
    augmented = [
        [m.entries[k][i] for k in range(r)] + [1 if i == e else 0 for e in range(c)]
        for i in range(c)
    ]
    howell = _howell_rows(augmented, m.modulus, r + c)
    return [tuple(row[r:]) for row in howell if not any(row[:r])]


def _smith_valuations(rows: Iterable[Sequence[int]], modulus: Modulus) -> list[int]:
    p, mod = modulus.p, modulus.value
    work = [[x % mod for x in row] for row in rows]
    work = [row for row in work if any(row)]
    valuations = []
    while work:
        v, i, col = min(
            (modulus.valuation(x), i, k)
            for i, row in enumerate(work)
            for k, x in enumerate(row)
            if x
        )
        pivot_row = work.pop(i)
        pv = p**v
        unit_inv = pow(pivot_row[col] // pv, -1, mod)
        pivot_row = [(x * unit_inv) % mod for x in pivot_row]
        remaining = []
        for row in work:
            if row[col]:
                factor = row[col] // pv
                row = [(x - factor * y) % mod for x, y in zip(row, pivot_row, strict=True)]
            # the pivot divides every entry of its row, so column operations clear
            # the rest of the pivot row without touching rows that are zero at col
            if any(row):
                remaining.append(row)
        work = remaining
        valuations.append(v)
    return valuations


def structure(generators: Iterable[Sequence[int]], modulus: Modulus) -> AbelianPGroupType:
    """Abelian p-group type of the submodule of (Z/p^n)^d spanned by ``generators``."""
    gens = [tuple(g) for g in generators]
    if gens and len({len(g) for g in gens}) != 1:
        raise InvalidParams("generators must share one length")
    exponents = tuple(modulus.n - v for v in _smith_valuations(gens, modulus))
    return AbelianPGroupType(p=modulus.p, exponents=exponents)


def span_elements(generators: Sequence[Sequence[int]], modulus: Modulus) -> Iterator[Vector]:
    """All elements of the submodule spanned by ``generators``, without repetition."""
    howell = _howell_rows(generators, modulus, len(generators[0]) if generators else 0)
    if not howell:
        yield tuple(0 for _ in (generators[0] if generators else ()))
        return
    mod = modulus.value
    # a Howell row with pivot p^v has additive order p^(n-v) modulo the later rows
    orders = []
    for row in howell:
        lead = next(x for x in row if x)
        orders.append(mod // lead)
    seen: set[Vector] = set()
    for coeffs in np.ndindex(*orders):
        vec = tuple(
            sum(int(a) * row[k] for a, row in zip(coeffs, howell, strict=True)) % mod
            for k in range(len(howell[0]))
        )
        if vec not in seen:
            seen.add(vec)
            yield vec


# =============================================================================
# Dense F_p elimination
# =============================================================================


def _as_field_array(matrix: np.ndarray | Sequence[Sequence[int]], p: int, cols: int) -> np.ndarray:
    dtype: type = np.int64 if p < _INT64_SAFE_PRIME else object
    a = np.array(matrix, dtype=dtype)
    if a.size == 0:
        return np.zeros((0, cols), dtype=dtype)
    return a.reshape(-1, cols) % p


def rref_mod_p(
    matrix: np.ndarray | Sequence[Sequence[int]], p: int, cols: int | None = None
) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over F_p; returns the nonzero rows and pivot columns."""
    if cols is None:
        cols = int(np.shape(matrix)[1])
    a = _as_field_array(matrix, p, cols)
    n_rows = a.shape[0]
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == n_rows:
            break
        nonzero = np.flatnonzero(a[r:, c])
        if nonzero.size == 0:
            continue
        k = r + int(nonzero[0])
        if k != r:
            a[[r, k]] = a[[k, r]]
        a[r] = (a[r] * pow(int(a[r, c]), -1, p)) % p
        others = np.flatnonzero(a[:, c])
        others = others[others != r]
        if others.size:
            a[others] = (a[others] - np.outer(a[others, c], a[r])) % p
        pivots.append(c)
        r += 1
    return a[:r], pivots


def rank_mod_p(matrix: np.ndarray | Sequence[Sequence[int]], p: int, cols: int | None = None) -> int:
    return len(rref_mod_p(matrix, p, cols)[1])


def nullspace_mod_p(
    matrix: np.ndarray | Sequence[Sequence[int]], p: int, cols: int | None = None
) -> np.ndarray:
    """Basis (as rows) of {x : matrix·x = 0} over F_p."""
    if cols is None:
        cols = int(np.shape(matrix)[1])
    reduced, pivots = rref_mod_p(matrix, p, cols)
    pivot_set = set(pivots)
    free = [c for c in range(cols) if c not in pivot_set]
    basis = np.zeros((len(free), cols), dtype=reduced.dtype)
    for i, f in enumerate(free):
        basis[i, f] = 1
        for row, c in enumerate(pivots):
            basis[i, c] = (-reduced[row, f]) % p
    return basis


# =============================================================================
# Unramified quadratic ring
# =============================================================================

QuadElement = tuple[int, int]


@dataclass(frozen=True)
class UnramifiedQuadraticRing:
    """W/p^n = (Z/p^n)[t]/(t^2 - r), r the least quadratic non-residue mod p."""

    modulus: Modulus

    @cached_property
    def r(self) -> int:
        return next(a for a in range(2, self.modulus.p) if legendre_symbol(a, self.modulus.p) == -1)

    @property
    def one(self) -> QuadElement:
        return (1, 0)

    @property
    def zero(self) -> QuadElement:
        return (0, 0)

    def element(self, x: int, y: int = 0) -> QuadElement:
        mod = self.modulus.value
        return (x % mod, y % mod)

    def add(self, a: QuadElement, b: QuadElement) -> QuadElement:
        return self.element(a[0] + b[0], a[1] + b[1])

    def sub(self, a: QuadElement, b: QuadElement) -> QuadElement:
        return self.element(a[0] - b[0], a[1] - b[1])

    def mul(self, a: QuadElement, b: QuadElement) -> QuadElement:
        return self.element(a[0] * b[0] + self.r * a[1] * b[1], a[0] * b[1] + a[1] * b[0])

    def power(self, a: QuadElement, k: int) -> QuadElement:
        result, base = self.one, a
        while k:
            if k & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            k >>= 1
        return result

    def norm(self, a: QuadElement) -> int:
        return (a[0] * a[0] - self.r * a[1] * a[1]) % self.modulus.value

    def is_unit(self, a: QuadElement) -> bool:
        return self.norm(a) % self.modulus.p != 0

    def elements(self) -> Iterator[QuadElement]:
        mod = self.modulus.value
        for x in range(mod):
            for y in range(mod):
                yield (x, y)

    def units(self) -> Iterator[QuadElement]:
        return (a for a in self.elements() if self.is_unit(a))

    @property
    def unit_group_order(self) -> int:
        p, n = self.modulus.p, self.modulus.n
        return p ** (2 * (n - 1)) * (p * p - 1)

    def multiplication_matrix(self, a: QuadElement) -> ModularMatrix:
        """Matrix of b -> a·b in the basis (1, t)."""
        x, y = a
        return ModularMatrix.from_rows(self.modulus, [[x, self.r * y], [y, x]])

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

"""Finite matrix groups, G-modules over Z/p^n and the symmetric-power functor."""

import logging
import threading
from collections import deque
from collections.abc import Sequence
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from sympy.ntheory import primitive_root

from galrep import config as config_module
from galrep.errors import CapExceeded, InconsistentAction, InvalidJ, InvalidParams
from galrep.utils.typing import AbelianPGroupType
from galrep.zring import (
    ModularMatrix,
    Modulus,
    Vector,
    kernel,
    rank_mod_p,
    structure,
)


@dataclass(frozen=True)
class GroupClosure:
    """Elements of a finite group in breadth-first order from the identity.

    ``parent[k]`` and ``via[k]`` record the spanning tree: element k equals
    element ``parent[k]`` times generator ``via[k]``. The identity has parent -1.
    """

    elements: tuple[ModularMatrix, ...]
    parent: tuple[int, ...]
    via: tuple[int, ...]
    index: dict[ModularMatrix, int] = field(repr=False)

    @property
    def order(self) -> int:
        return len(self.elements)

    def __contains__(self, element: object) -> bool:
        return element in self.index

    def non_tree_edges(self, n_generators: int) -> list[tuple[int, int]]:
        """Pairs (k, s) whose product element_k · gen_s is not a tree edge."""
        tree = {(self.parent[k], self.via[k]) for k in range(1, self.order)}
        return [
            (k, s)
            for k in range(self.order)
            for s in range(n_generators)
            if (k, s) not in tree
        ]


class MatrixGroup:
    """A finite group of invertible matrices over Z/p^n, given by generators.

    The closure is computed lazily, once, under a lock.
    """

    def __init__(
        self, modulus: Modulus, generators: Sequence[ModularMatrix], name: str = ""
    ) -> None:
        if not generators:
            raise InvalidParams("a matrix group needs at least one generator")
        size = generators[0].rows
        for g in generators:
            if g.modulus != modulus:
                raise InvalidParams(f"generator over {g.modulus}, group over {modulus}")
            if g.rows != size or not g.is_invertible():
                raise InvalidParams(f"generator {g.as_lists()} is not invertible of size {size}")
        self.modulus = modulus
        self.generators = tuple(generators)
        self.name = name or f"<{len(generators)} generators over {modulus}>"
        self._lock = threading.Lock()
        self._closure: GroupClosure | None = None

    @property
    def dimension(self) -> int:
        return self.generators[0].rows

    @property
    def identity(self) -> ModularMatrix:
        return ModularMatrix.identity(self.modulus, self.dimension)

    def closure(self, cap: int | None = None) -> GroupClosure:
        """Breadth-first closure of the generators under right multiplication.

        Raises:
            CapExceeded: if the group has more than ``cap`` elements
        """
        cap = config_module.config.closure_cap if cap is None else cap
        if cap < 1:
            raise InvalidParams(f"closure cap must be positive, got {cap}")
        with self._lock:
            if self._closure is None:
                self._closure = self._enumerate(cap)
            closure = self._closure
        if closure.order > cap:
            logging.warning(f"Group {self.name} has order {closure.order} > cap {cap}")
            raise CapExceeded(f"group {self.name} has order {closure.order} > cap {cap}")
        return closure

    def _enumerate(self, cap: int) -> GroupClosure:
        identity = self.identity
        elements = [identity]
        parent = [-1]
        via = [-1]
        index = {identity: 0}
        queue = deque([0])
        while queue:
            k = queue.popleft()
            for s, gen in enumerate(self.generators):
                product = elements[k] @ gen
                if product in index:
                    continue
                if len(elements) >= cap:
                    logging.warning(f"Closure of {self.name} passed cap {cap}")
                    raise CapExceeded(f"closure of {self.name} exceeds cap {cap}")
                index[product] = len(elements)
                elements.append(product)
                parent.append(k)
                via.append(s)
                queue.append(len(elements) - 1)
        logging.info(f"Closure of {self.name}: order {len(elements)}")
        return GroupClosure(tuple(elements), tuple(parent), tuple(via), index)

    def order(self, cap: int | None = None) -> int:
        return self.closure(cap).order

    def contains(self, element: ModularMatrix, cap: int | None = None) -> bool:
        return element in self.closure(cap)

    def element_order(self, element: ModularMatrix) -> int:
        power, k = element, 1
        while not power.is_identity():
            power = power @ element
            k += 1
        return k

    def is_normal_subgroup(self, subgroup_gens: Sequence[ModularMatrix]) -> bool:
        """Whether ⟨subgroup_gens⟩ is normalized by every generator of this group."""
        sub = MatrixGroup(self.modulus, subgroup_gens, name="H").closure()
        for g in self.generators:
            g_inv = g.inverse()
            for h in subgroup_gens:
                if g_inv @ h @ g not in sub:
                    return False
        return True

    def __repr__(self) -> str:
        return f"MatrixGroup({self.name})"


def gl2_standard_generators(p: int) -> list[ModularMatrix]:
    """diag(g, 1) for the least primitive root g, and the two elementary unipotents.

    The unipotents generate SL_2(F_p); the torus element reaches every determinant.
    """
    modulus = Modulus(p, 1)
    g = int(primitive_root(p))
    return [
        ModularMatrix.from_rows(modulus, [[g, 0], [0, 1]]),
        ModularMatrix.from_rows(modulus, [[1, 1], [0, 1]]),
        ModularMatrix.from_rows(modulus, [[1, 0], [1, 1]]),
    ]


def gl2(p: int) -> MatrixGroup:
    return MatrixGroup(Modulus(p, 1), gl2_standard_generators(p), name=f"GL2(F_{p})")


def borel(p: int) -> MatrixGroup:
    """Upper-triangular subgroup of GL_2(F_p)."""
    modulus = Modulus(p, 1)
    g = int(primitive_root(p))
    gens = [
        ModularMatrix.from_rows(modulus, [[g, 0], [0, 1]]),
        ModularMatrix.from_rows(modulus, [[1, 0], [0, g]]),
        ModularMatrix.from_rows(modulus, [[1, 1], [0, 1]]),
    ]
    return MatrixGroup(modulus, gens, name=f"B(F_{p})")


def _poly_mul(a: list[int], b: list[int]) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for k, y in enumerate(b):
                out[i + k] += x * y
    return out


def _poly_pow(a: list[int], e: int) -> list[int]:
    result = [1]
    for _ in range(e):
        result = _poly_mul(result, a)
    return result


def sym_power(m: ModularMatrix, j: int) -> ModularMatrix:
    """Action of a 2x2 matrix on Sym^j in the basis u_i = v1^(j-i) v2^i.

    Column i holds the coefficients of (a + cX)^(j-i) (b + dX)^i, where
    m = [[a, b], [c, d]] and X^k stands for u_k.
    """
    if m.rows != 2 or m.cols != 2:
        raise InvalidParams("sym_power needs a 2x2 matrix")
    if j < 0:
        raise InvalidJ(f"j must be non-negative, got {j}")
    (a, b), (c, d) = m.entries
    columns = []
    for i in range(j + 1):
        coeffs = _poly_mul(_poly_pow([a, c], j - i), _poly_pow([b, d], i))
        columns.append(coeffs[: j + 1] + [0] * (j + 1 - len(coeffs)))
    rows = [[columns[i][k] for i in range(j + 1)] for k in range(j + 1)]
    return ModularMatrix.from_rows(m.modulus, rows, j + 1)


def sym_power_twist(m: ModularMatrix, j: int, twist: int) -> ModularMatrix:
    """Sym^j ⊗ det^twist."""
    det = m.det()
    scale = pow(det, twist, m.modulus.value) if twist >= 0 else pow(
        m.modulus.inverse(det), -twist, m.modulus.value
    )
    return sym_power(m, j).scale(scale)


@dataclass(frozen=True)
class GModule:
    """A free Z/p^n-module of finite rank with the group acting through ``action``.

    ``action[s]`` is the image of ``group.generators[s]``. Symmetric powers record
    ``(j, twist)`` so the image of any element can be computed directly.
    """

    group: MatrixGroup
    action: tuple[ModularMatrix, ...]
    label: str = ""
    functor: tuple[int, int] | None = None

    def __post_init__(self) -> None:
        if len(self.action) != len(self.group.generators):
            raise InvalidParams(
                f"{len(self.action)} action matrices for {len(self.group.generators)} generators"
            )
        rank = self.action[0].rows
        for mat in self.action:
            if mat.rows != rank or not mat.is_invertible():
                raise InvalidParams(f"action matrix {mat.as_lists()} is not invertible of rank {rank}")
            if mat.modulus.p != self.group.modulus.p:
                raise InvalidParams("module and group live over different primes")
        if len({mat.modulus for mat in self.action}) != 1:
            raise InvalidParams("action matrices over different moduli")

    @classmethod
    def symmetric_power(cls, group: MatrixGroup, j: int, twist: int = 0) -> "GModule":
        if group.dimension != 2:
            raise InvalidParams("symmetric powers need a group of 2x2 matrices")
        action = tuple(sym_power_twist(g, j, twist) for g in group.generators)
        label = f"Sym^{j}" + (f" ⊗ det^{twist}" if twist else "")
        return cls(group, action, label=label, functor=(j, twist))

    @classmethod
    def trivial(cls, group: MatrixGroup, rank: int = 1, modulus: Modulus | None = None) -> "GModule":
        modulus = modulus or group.modulus
        action = tuple(ModularMatrix.identity(modulus, rank) for _ in group.generators)
        return cls(group, action, label=f"trivial^{rank}")

    @classmethod
    def from_matrices(
        cls, group: MatrixGroup, matrices: Sequence[ModularMatrix], label: str = ""
    ) -> "GModule":
        return cls(group, tuple(matrices), label=label)

    @property
    def modulus(self) -> Modulus:
        return self.action[0].modulus

    @property
    def rank(self) -> int:
        return self.action[0].rows

    @cached_property
    def _images(self) -> dict[ModularMatrix, ModularMatrix]:
        closure = self.group.closure()
        images = [ModularMatrix.identity(self.modulus, self.rank)]
        for k in range(1, closure.order):
            images.append(images[closure.parent[k]] @ self.action[closure.via[k]])
        for k, s in closure.non_tree_edges(len(self.action)):
            target = closure.index[closure.elements[k] @ self.group.generators[s]]
            if images[target] != images[k] @ self.action[s]:
                raise InconsistentAction(
                    f"action of {self.label or 'module'} is not a homomorphism on {self.group.name}"
                )
        return dict(zip(closure.elements, images, strict=True))

    def check_consistency(self) -> None:
        """Verify the generator images define a homomorphism on the closure.

        Raises:
            InconsistentAction: if some relation among the generators is violated
        """
        _ = self._images

    def matrix_of(self, element: ModularMatrix) -> ModularMatrix:
        if self.functor is not None:
            j, twist = self.functor
            return sym_power_twist(element, j, twist)
        try:
            return self._images[element]
        except KeyError as exc:
            raise InvalidParams(f"{element.as_lists()} is not in {self.group.name}") from exc


@dataclass(frozen=True)
class Invariants:
    """A fixed submodule: its group type and a generating set."""

    structure: AbelianPGroupType
    generators: tuple[Vector, ...]


def invariants(module: GModule, subgroup_gens: Sequence[ModularMatrix]) -> Invariants:
    """Simultaneous fixed module of the listed group elements (kernel of stacked ρ(g) − I)."""
    identity = ModularMatrix.identity(module.modulus, module.rank)
    if not subgroup_gens:
        basis = tuple(identity.entries)
        return Invariants(structure(basis, module.modulus), basis)
    stacked = None
    for g in subgroup_gens:
        block = module.matrix_of(g) - identity
        stacked = block if stacked is None else stacked.stack(block)
    gens = tuple(kernel(stacked))
    return Invariants(structure(gens, module.modulus), gens)


def _spin_dimension(start: np.ndarray, matrices: list[np.ndarray], p: int) -> int:
    """Dimension of the smallest subspace containing ``start`` stable under ``matrices``."""
    basis = np.zeros((0, start.size), dtype=np.int64)
    queue = [start % p]
    rank = 0
    while queue:
        vec = queue.pop()
        candidate = np.vstack([basis, vec])
        new_rank = rank_mod_p(candidate, p)
        if new_rank == rank:
            continue
        basis, rank = candidate, new_rank
        if rank == start.size:
            break
        queue.extend((mat @ vec) % p for mat in matrices)
    return rank


def is_irreducible(
    module: GModule, seed: int | None = None, vectors: int | None = None
) -> bool:
    """Spinning test over F_p: look for a proper stable subspace.

    Spins every standard basis vector and ``vectors`` seeded random vectors, for the
    action and for its transpose (whose stable subspaces are the annihilators of
    stable subspaces of the action).
    """
    cfg = config_module.config
    if module.modulus.n != 1:
        raise InvalidParams("irreducibility is tested over F_p (level n = 1) only")
    p, d = module.modulus.p, module.rank
    if d == 1:
        return True
    rng = np.random.default_rng(cfg.seed if seed is None else seed)
    starts = [np.eye(d, dtype=np.int64)[i] for i in range(d)]
    starts += list(rng.integers(0, p, size=(cfg.spin_vectors if vectors is None else vectors, d)))
    forward = [np.array(m.entries, dtype=np.int64) for m in module.action]
    for matrices in (forward, [m.T.copy() for m in forward]):
        for start in starts:
            if not start.any():
                continue
            dim = _spin_dimension(start, matrices, p)
            if dim < d:
                logging.info(f"{module.label} has a stable subspace of dimension {dim}")
                return False
    return True

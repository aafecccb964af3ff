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

"""Group cohomology over F_p by direct linear solving.

H^1 is computed from the values of a cocycle on the generators: a breadth-first
spanning tree of the closure extends those values to every element, and each
non-tree edge contributes one block of the cocycle identity. The literal all-pairs
system and H^2 are available for small groups.
"""

import logging
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass
from typing import Literal

import numpy as np
from pydantic import BaseModel, model_validator

from galrep import config as config_module
from galrep.errors import BudgetExceeded, CapExceeded, InconsistentAction, InvalidParams, NotNormal
from galrep.grpmod import GModule, GroupClosure, MatrixGroup, invariants
from galrep.zring import ModularMatrix, nullspace_mod_p, rank_mod_p, rref_mod_p

H1Method = Literal["tree", "pairs"]


class VanishingWitness(BaseModel):
    """A normal subgroup H with p ∤ |H| and V^H = 0, so H^i(G, V) = 0 for all i."""

    kind: Literal["central", "supplied"]
    description: str
    generators: list[list[list[int]]]
    order: int


class CohomologyReport(BaseModel):
    group: str
    module: str
    order: int
    method: str = "tree"
    z1: int
    b1: int
    h1: int
    z2: int | None = None
    b2: int | None = None
    h2: int | None = None
    witness: VanishingWitness | None = None

    @model_validator(mode="after")
    def _consistent(self) -> "CohomologyReport":
        if self.h1 != self.z1 - self.b1 or self.h1 < 0:
            raise ValueError(f"h1={self.h1} does not equal z1-b1={self.z1 - self.b1}")
        if self.h2 is not None and self.z2 is not None and self.b2 is not None:
            if self.h2 != self.z2 - self.b2 or self.h2 < 0:
                raise ValueError(f"h2={self.h2} does not equal z2-b2")
        if self.witness is not None and (self.h1 != 0 or self.h2 not in (None, 0)):
            raise ValueError("a vanishing witness forces h1 = h2 = 0")
        return self


class InflationRestrictionReport(BaseModel):
    """Dimensions entering the five-term inflation-restriction sequence."""

    h1_quotient: int
    h1_group: int
    h1_normal_invariant: int
    inflation_kernel_dim: int
    normal_order: int
    quotient_order: int

    @property
    def holds(self) -> bool:
        return (
            self.inflation_kernel_dim == 0
            and self.h1_quotient <= self.h1_group
            and self.h1_group <= self.h1_quotient + self.h1_normal_invariant
        )


# =============================================================================
# Shared linear algebra
# =============================================================================


def _check_level_one(module: GModule) -> int:
    if module.modulus.n != 1:
        raise InvalidParams("cohomology is computed over F_p (level n = 1) only")
    return module.modulus.p


def _check_dense(rows: int, cols: int, what: str) -> None:
    cap = config_module.config.dense_entry_cap
    if rows * cols > cap:
        logging.warning(f"{what}: {rows}x{cols} system exceeds dense budget {cap}")
        raise BudgetExceeded(f"{what} needs a {rows}x{cols} system, budget is {cap} entries")


def _rank_of_blocks(blocks: Iterable[np.ndarray], p: int, cols: int) -> int:
    """Rank of the vertical stack of ``blocks``, keeping only an echelon basis in memory."""
    basis = np.zeros((0, cols), dtype=np.int64)
    for block in blocks:
        if block.shape[0] == 0:
            continue
        basis, _ = rref_mod_p(np.vstack([basis, block]), p, cols)
        if basis.shape[0] == cols:
            break
    return int(basis.shape[0])


def _fixed_dim(module: GModule, elements: Sequence[ModularMatrix]) -> int:
    """dim over F_p of the vectors fixed by every listed element."""
    return invariants(module, elements).structure.rank


@dataclass
class _CocycleSystem:
    """Cocycles written in the coordinates X = (f(s_1), ..., f(s_S)).

    ``values[k]`` is the d x Sd matrix sending X to f(element k); ``images[k]`` is
    ρ(element k); ``constraints`` collects one d-row block per non-tree edge.
    """

    closure: GroupClosure
    images: np.ndarray
    values: np.ndarray
    constraints: np.ndarray
    p: int

    @property
    def unknowns(self) -> int:
        return int(self.values.shape[2])

    def cocycle_basis(self) -> np.ndarray:
        return nullspace_mod_p(self.constraints, self.p, self.unknowns)


def _cocycle_system(group: MatrixGroup, action: Sequence[ModularMatrix], p: int, cap: int) -> _CocycleSystem:
    closure = group.closure(cap)
    n_gens = len(group.generators)
    d = action[0].rows
    unknowns = n_gens * d
    gens = [np.array(m.entries, dtype=np.int64) for m in action]
    images = np.zeros((closure.order, d, d), dtype=np.int64)
    values = np.zeros((closure.order, d, unknowns), dtype=np.int64)
    images[0] = np.eye(d, dtype=np.int64)
    for k in range(1, closure.order):
        parent, s = closure.parent[k], closure.via[k]
        images[k] = (images[parent] @ gens[s]) % p
        values[k] = values[parent]
        values[k][:, s * d : (s + 1) * d] = (values[k][:, s * d : (s + 1) * d] + images[parent]) % p

    edges = closure.non_tree_edges(n_gens)
    _check_dense(len(edges) * d, unknowns, f"cocycle system for {group.name}")
    constraints = np.zeros((len(edges) * d, unknowns), dtype=np.int64)
    for row, (k, s) in enumerate(edges):
        target = closure.index[closure.elements[k] @ group.generators[s]]
        if not np.array_equal(images[target], (images[k] @ gens[s]) % p):
            raise InconsistentAction(f"action is not a homomorphism on {group.name}")
        block = values[target] - values[k]
        block[:, s * d : (s + 1) * d] -= images[k]
        constraints[row * d : (row + 1) * d] = block % p
    return _CocycleSystem(closure, images, values, constraints, p)


def _coboundary_rows(action: Sequence[ModularMatrix], p: int) -> np.ndarray:
    """Rows spanning B^1 in generator coordinates: v -> ((ρ(s) - I)v)_s, as a d x Sd matrix."""
    d = action[0].rows
    blocks = [(np.array(m.entries, dtype=np.int64) - np.eye(d, dtype=np.int64)) % p for m in action]
    # row i is the coboundary of the basis vector e_i
    return np.hstack([block.T for block in blocks]) % p


# =============================================================================
# H^1 and H^2
# =============================================================================


def _pairs_blocks(images: np.ndarray, table: np.ndarray, p: int) -> Iterator[np.ndarray]:
    """δ1-style blocks f(gh) - f(g) - ρ(g) f(h), one block per g."""
    order, d = images.shape[0], images.shape[1]
    eye = np.eye(d, dtype=np.int64)
    for g in range(order):
        block = np.zeros((order * d, order * d), dtype=np.int64)
        for h in range(order):
            r = h * d
            gh = table[g, h]
            block[r : r + d, gh * d : gh * d + d] += eye
            block[r : r + d, g * d : g * d + d] -= eye
            block[r : r + d, h * d : h * d + d] -= images[g]
        yield block % p


def _multiplication_table(closure: GroupClosure) -> np.ndarray:
    order = closure.order
    table = np.zeros((order, order), dtype=np.int64)
    for g, x in enumerate(closure.elements):
        for h, y in enumerate(closure.elements):
            table[g, h] = closure.index[x @ y]
    return table


def h1_bruteforce(
    group: MatrixGroup,
    module: GModule,
    method: H1Method = "tree",
    cap: int | None = None,
) -> CohomologyReport:
    """Exact dimensions of Z^1, B^1 and H^1(G, V) over F_p.

    Raises:
        CapExceeded: if |G| is larger than ``cap`` (default: the cohomology cap)
        BudgetExceeded: if the linear system is larger than the dense budget
    """
    p = _check_level_one(module)
    cap = config_module.config.cohomology_cap if cap is None else cap
    d = module.rank
    b1 = d - _fixed_dim(module, list(group.generators))

    if method == "tree":
        system = _cocycle_system(group, module.action, p, cap)
        order = system.closure.order
        z1 = system.unknowns - _rank_of_blocks([system.constraints], p, system.unknowns)
    elif method == "pairs":
        closure = group.closure(cap)
        order = closure.order
        cols = order * d
        _check_dense(order * order * d, cols, f"all-pairs cocycle system for {group.name}")
        images = _cocycle_system(group, module.action, p, cap).images
        table = _multiplication_table(closure)
        z1 = cols - _rank_of_blocks(_pairs_blocks(images, table, p), p, cols)
    else:
        raise InvalidParams(f"unknown H^1 method {method!r}")

    logging.info(f"H^1({group.name}, {module.label}): order {order}, z1={z1}, b1={b1}")
    return CohomologyReport(
        group=group.name,
        module=module.label,
        order=order,
        method=method,
        z1=z1,
        b1=b1,
        h1=z1 - b1,
    )


def h2_bruteforce(
    group: MatrixGroup, module: GModule, cap: int | None = None
) -> CohomologyReport:
    """H^1 and H^2 by dense inhomogeneous cochains; only for |G| ≤ ``cap`` (default h2_cap)."""
    p = _check_level_one(module)
    cap = config_module.config.h2_cap if cap is None else cap
    closure = group.closure(cap)
    order, d = closure.order, module.rank
    c2 = order * order * d
    _check_dense(order * c2, c2, f"H^2 cochain system for {group.name}")
    h1 = h1_bruteforce(group, module, method="pairs", cap=cap)

    images = _cocycle_system(group, module.action, p, cap).images
    table = _multiplication_table(closure)
    eye = np.eye(d, dtype=np.int64)

    def col(a: int, b: int) -> int:
        return (a * order + b) * d

    def delta2_blocks() -> Iterator[np.ndarray]:
        # (δf)(g,h,k) = g·f(h,k) - f(gh,k) + f(g,hk) - f(g,h)
        for g in range(order):
            block = np.zeros((order * order * d, c2), dtype=np.int64)
            for h in range(order):
                for k in range(order):
                    r = (h * order + k) * d
                    block[r : r + d, col(h, k) : col(h, k) + d] += images[g]
                    block[r : r + d, col(table[g, h], k) : col(table[g, h], k) + d] -= eye
                    block[r : r + d, col(g, table[h, k]) : col(g, table[h, k]) + d] += eye
                    block[r : r + d, col(g, h) : col(g, h) + d] -= eye
            yield block % p

    z2 = c2 - _rank_of_blocks(delta2_blocks(), p, c2)
    # B^2 is the image of δ1, whose rank is |G|·d - dim Z^1
    b2 = order * d - h1.z1
    logging.info(f"H^2({group.name}, {module.label}): z2={z2}, b2={b2}")
    return h1.model_copy(update={"z2": z2, "b2": b2, "h2": z2 - b2, "method": "pairs"})


# =============================================================================
# Vanishing criterion
# =============================================================================


def _multiplicative_order(c: int, modulus: int) -> int:
    k, x = 1, c % modulus
    while x != 1:
        x = (x * c) % modulus
        k += 1
    return k


def vanishing_criterion(
    group: MatrixGroup,
    module: GModule,
    candidates: Sequence[Sequence[ModularMatrix]] = (),
    cap: int | None = None,
) -> VanishingWitness | None:
    """Look for a normal subgroup H with p ∤ |H| and V^H = 0.

    Central subgroups ⟨cI⟩ are tried first, c running over the Teichmüller lifts of
    2, ..., p-1; then each supplied candidate (a list of generators), which must be
    normal. A returned witness certifies H^i(G, V) = 0 for every i ≥ 0.

    Raises:
        NotNormal: if a supplied candidate is not normal in ``group``
    """
    modulus = group.modulus
    p, mod = modulus.p, modulus.value
    size = group.dimension
    try:
        closure = group.closure(cap)
    except CapExceeded:
        logging.warning(f"Closure of {group.name} unavailable; central search skipped")
        closure = None

    if closure is not None:
        for c in range(2, p):
            lift = pow(c, p ** (modulus.n - 1), mod)
            scalar = ModularMatrix.scalar(modulus, size, lift)
            if scalar not in closure:
                continue
            order = _multiplicative_order(lift, mod)
            if order % p == 0:
                continue
            if invariants(module, [scalar]).structure.is_trivial:
                logging.info(f"Vanishing witness for {module.label}: <{c}I> of order {order}")
                return VanishingWitness(
                    kind="central",
                    description=f"<{c}I>",
                    generators=[scalar.as_lists()],
                    order=order,
                )

    for gens in candidates:
        if not group.is_normal_subgroup(gens):
            raise NotNormal(f"supplied subgroup is not normal in {group.name}")
        sub_order = MatrixGroup(modulus, gens, name="H").order(cap)
        if sub_order % p == 0:
            continue
        if invariants(module, gens).structure.is_trivial:
            return VanishingWitness(
                kind="supplied",
                description=f"<{len(gens)} supplied generators>",
                generators=[g.as_lists() for g in gens],
                order=sub_order,
            )
    return None


# =============================================================================
# Inflation-restriction
# =============================================================================


def _subspace_rank(rows: np.ndarray, p: int, cols: int) -> int:
    return rank_mod_p(rows, p, cols) if rows.shape[0] else 0


def inflation_restriction_dims(
    group: MatrixGroup,
    normal_gens: Sequence[ModularMatrix],
    module: GModule,
    cap: int | None = None,
) -> InflationRestrictionReport:
    """Dimensions of H^1(G/H, V^H), H^1(G, V) and H^1(H, V)^{G/H}, and of ker(inf).

    Inflated cocycles are the cocycles of G vanishing on H with values in V^H; the
    G-action on H^1(H, V) is (g·f)(t) = ρ(g) f(g^-1 t g).

    Raises:
        NotNormal: if ⟨normal_gens⟩ is not normal in ``group``
    """
    p = _check_level_one(module)
    cap = config_module.config.cohomology_cap if cap is None else cap
    if not normal_gens:
        raise InvalidParams("the normal subgroup needs at least one generator")
    if not group.is_normal_subgroup(normal_gens):
        raise NotNormal(f"subgroup is not normal in {group.name}")
    d = module.rank
    n_gens = len(group.generators)

    system = _cocycle_system(group, module.action, p, cap)
    cols = system.unknowns
    cocycles = system.cocycle_basis()
    coboundaries = _coboundary_rows(module.action, p)
    b1_group = _subspace_rank(coboundaries, p, cols)
    h1_group = cocycles.shape[0] - b1_group

    # inflation: values on generators in V^H, and f(h_i) = 0
    if any(h not in system.closure for h in normal_gens):
        raise InvalidParams(f"normal subgroup generators must lie in {group.name}")
    restricted = [module.matrix_of(h) for h in normal_gens]
    normal_action = [np.array(m.entries, dtype=np.int64) for m in restricted]
    extra = []
    for s in range(n_gens):
        for act in normal_action:
            block = np.zeros((d, cols), dtype=np.int64)
            block[:, s * d : (s + 1) * d] = (act - np.eye(d, dtype=np.int64)) % p
            extra.append(block)
    for h in normal_gens:
        extra.append(system.values[system.closure.index[h]])
    inflated = nullspace_mod_p(np.vstack([system.constraints, *extra]), p, cols)

    fixed_by_normal = _fixed_dim(module, list(normal_gens))
    fixed_by_group = _fixed_dim(module, list(group.generators))
    b1_quotient = fixed_by_normal - fixed_by_group
    h1_quotient = inflated.shape[0] - b1_quotient

    meet = (
        inflated.shape[0]
        + b1_group
        - _subspace_rank(np.vstack([inflated, coboundaries]), p, cols)
    )
    inflation_kernel_dim = meet - b1_quotient

    normal = MatrixGroup(group.modulus, normal_gens, name=f"H<{group.name}")
    normal_system = _cocycle_system(normal, restricted, p, cap)
    h_cols = normal_system.unknowns
    h_cocycles = normal_system.cocycle_basis()
    h_coboundaries, _ = rref_mod_p(_coboundary_rows(restricted, p), p, h_cols)
    h1_normal_invariant = _invariant_classes(
        group, module, normal_gens, normal_system, h_cocycles, h_coboundaries, p
    ) - h_coboundaries.shape[0]

    report = InflationRestrictionReport(
        h1_quotient=h1_quotient,
        h1_group=h1_group,
        h1_normal_invariant=h1_normal_invariant,
        inflation_kernel_dim=inflation_kernel_dim,
        normal_order=normal_system.closure.order,
        quotient_order=system.closure.order // normal_system.closure.order,
    )
    logging.info(f"Inflation-restriction for {group.name}: {report.model_dump()}")
    return report


def _invariant_classes(
    group: MatrixGroup,
    module: GModule,
    normal_gens: Sequence[ModularMatrix],
    normal_system: _CocycleSystem,
    h_cocycles: np.ndarray,
    h_coboundaries: np.ndarray,
    p: int,
) -> int:
    """dim {f ∈ Z^1(H, V) : g·f - f ∈ B^1(H, V) for every generator g of G}."""
    z, m = h_cocycles.shape
    b = h_coboundaries.shape[0]
    if z == 0:
        return 0
    d = module.rank
    blocks = []
    for s, g in enumerate(group.generators):
        g_inv = g.inverse()
        rho_g = np.array(module.matrix_of(g).entries, dtype=np.int64)
        # (g·f)(h_i) - f(h_i) in the coordinates of f's values on the generators of H
        phi = np.zeros((m, m), dtype=np.int64)
        for i, h in enumerate(normal_gens):
            conj = normal_system.closure.index[g_inv @ h @ g]
            phi[i * d : (i + 1) * d] = rho_g @ normal_system.values[conj]
            phi[i * d : (i + 1) * d, i * d : (i + 1) * d] -= np.eye(d, dtype=np.int64)
        phi %= p
        row = np.zeros((m, z + len(group.generators) * b), dtype=np.int64)
        row[:, :z] = phi @ h_cocycles.T
        row[:, z + s * b : z + (s + 1) * b] = -h_coboundaries.T
        blocks.append(row % p)
    solution = nullspace_mod_p(np.vstack(blocks), p, z + len(group.generators) * b)
    return _subspace_rank(solution[:, :z], p, z)


def inflation_restriction_check(
    group: MatrixGroup,
    normal_gens: Sequence[ModularMatrix],
    module: GModule,
    cap: int | None = None,
) -> bool:
    """Whether inf is injective and dim H^1(G/H, V^H) ≤ dim H^1(G, V) ≤ that + dim H^1(H, V)^{G/H}."""
    return inflation_restriction_dims(group, normal_gens, module, cap).holds

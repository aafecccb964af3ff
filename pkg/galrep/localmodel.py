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

"""Local Galois actions on Sym^j E[p^n] and their invariants.

Each model stands for the image of a decomposition or inertia group as an explicit
finite set of matrices at level n. Method "closed" evaluates the known invariant
structure; method "brute" takes the kernel of the stacked (S(g) - I) over the
generating matrices. Data about the limit module A = Sym^j(Q_p/Z_p)^2 always comes
from the closed forms and is checked against the finite levels only.
"""

import itertools
import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Literal

from pydantic import BaseModel, Field, model_validator
from sympy.ntheory import primitive_root

from galrep import config as config_module
from galrep.errors import (
    BudgetExceeded,
    CapExceeded,
    InvalidCase,
    InvalidJ,
    InvalidParams,
    ModelInvariantError,
    NotPrimeToP,
)
from galrep.grpmod import GModule, MatrixGroup, invariants, sym_power
from galrep.utils.typing import AbelianPGroupType, TraceStep
from galrep.zring import ModularMatrix, Modulus, UnramifiedQuadraticRing, Vector, kernel, structure

Method = Literal["closed", "brute"]
TateVariant = Literal["Split", "NonSplit", "AdditiveRamifiedTwist"]
OrdinaryCase = Literal["A", "B", "C", "D"]
BoundCase = Literal["A", "B", "C", "D", "supersingular"]

# (limit quotient dim, h0_v dim) for each row of the ordinary case table
ORDINARY_TABLE: dict[str, tuple[int, int]] = {
    "A": (0, 0),
    "B": (1, 0),
    "C": (0, 0),
    "D": (1, 0),
}

_EXPECTED_LOCAL_DIMS: dict[str, tuple[int, int]] = {
    **ORDINARY_TABLE,
    "supersingular": (0, 0),
}


def check_weight(p: int, j: int) -> None:
    """Raise InvalidJ unless 1 ≤ j ≤ p - 2."""
    if not 1 <= j <= p - 2:
        raise InvalidJ(f"j={j} must satisfy 1 <= j <= p-2 = {p - 2}")


class LocalH0Report(BaseModel):
    """Invariants of one local model at level n and of its limit."""

    model: str
    params: dict[str, int | str | None]
    method: Method
    level_structure: AbelianPGroupType
    limit_quotient_dim: int
    h0_v_dim: int
    limit_divisible_rank: int
    limit_finite: AbelianPGroupType
    case: BoundCase | None = None
    reconstructed: bool = False
    notes: list[str] = Field(default_factory=list)
    trace: list[TraceStep] = Field(default_factory=list)

    @model_validator(mode="after")
    def _limit_consistent(self) -> "LocalH0Report":
        if self.limit_quotient_dim != self.limit_finite.rank:
            raise ValueError(
                f"limit quotient dim {self.limit_quotient_dim} differs from the number "
                f"of finite summands of {self.limit_finite}"
            )
        if self.h0_v_dim != self.limit_divisible_rank:
            raise ValueError("h0_v_dim must equal the divisible rank of the limit")
        return self

    def agrees_with(self, other: "LocalH0Report") -> bool:
        return (
            self.level_structure == other.level_structure
            and self.limit_quotient_dim == other.limit_quotient_dim
            and self.h0_v_dim == other.h0_v_dim
        )


def _kernel_invariants(
    modulus: Modulus, generators: Sequence[ModularMatrix], j: int
) -> AbelianPGroupType:
    group = MatrixGroup(modulus, generators, name="local image")
    module = GModule.symmetric_power(group, j)
    return invariants(module, generators).structure


def fixed_vectors_by_enumeration(
    module: GModule, elements: Sequence[ModularMatrix], budget: int | None = None
) -> list[Vector]:
    """Every vector of the module fixed by all ``elements``, by plain enumeration.

    Raises:
        BudgetExceeded: if the module has more than ``budget`` vectors
    """
    budget = config_module.config.budget if budget is None else budget
    size = module.modulus.value**module.rank
    if size > budget:
        logging.warning(f"Enumeration of {size} vectors exceeds budget {budget}")
        raise BudgetExceeded(f"{size} vectors exceed the enumeration budget {budget}")
    matrices = [module.matrix_of(g) for g in elements]
    return [
        vec
        for vec in itertools.product(range(module.modulus.value), repeat=module.rank)
        if all(m.apply(vec) == vec for m in matrices)
    ]


# =============================================================================
# Tate curves at l ≠ p
# =============================================================================


@dataclass(frozen=True)
class TateModel:
    """Inertia at a potentially multiplicative prime l ≠ p.

    ``t`` is the valuation of the image p^t·Z/p^n of the Kummer character of the
    Tate period; t = 0 exactly when the period is not a p-th power.
    NonSplit shares the Split inertia generators: the unramified quadratic twist
    is trivial on inertia.
    """

    p: int
    n: int
    j: int
    t: int = 0
    variant: TateVariant = "Split"

    def __post_init__(self) -> None:
        Modulus(self.p, self.n)
        check_weight(self.p, self.j)
        if not 0 <= self.t <= self.n:
            raise InvalidParams(f"t={self.t} must satisfy 0 <= t <= n = {self.n}")
        if self.variant not in ("Split", "NonSplit", "AdditiveRamifiedTwist"):
            raise InvalidParams(f"unknown Tate variant {self.variant!r}")

    @property
    def modulus(self) -> Modulus:
        return Modulus(self.p, self.n)

    def generators(self) -> list[ModularMatrix]:
        unipotent = ModularMatrix.from_rows(self.modulus, [[1, self.p**self.t], [0, 1]])
        if self.variant == "AdditiveRamifiedTwist":
            return [unipotent, ModularMatrix.scalar(self.modulus, 2, -1)]
        return [unipotent]

    def params(self) -> dict[str, int | str | None]:
        return {"p": self.p, "n": self.n, "j": self.j, "t": self.t, "variant": self.variant}


def _tate_closed_form(model: TateModel) -> tuple[AbelianPGroupType, int, AbelianPGroupType]:
    """(level structure, divisible rank of the limit, finite part of the limit)."""
    p, n, j, t = model.p, model.n, model.j, model.t
    if model.variant == "AdditiveRamifiedTwist" and j % 2 == 1:
        trivial = AbelianPGroupType.trivial(p)
        return trivial, 0, trivial
    finite = AbelianPGroupType(p=p, exponents=(t,) * j if t else ())
    return AbelianPGroupType.cyclic(p, n) + finite, 1, finite


def tate_h0(model: TateModel, method: Method = "closed") -> LocalH0Report:
    j, t = model.j, model.t
    closed_level, divisible, finite = _tate_closed_form(model)
    if method == "closed":
        level = closed_level
    elif method == "brute":
        level = _kernel_invariants(model.modulus, model.generators(), j)
    else:
        raise InvalidParams(f"unknown method {method!r}")

    trace = [
        TraceStep(
            key="tate-inertia-invariants",
            statement="inertia fixes a_0 u_0 freely; a_1, ..., a_j are killed by the Kummer image p^t",
            values={"t": t, "structure": str(level)},
        )
    ]
    notes = ["limit data from the closed form"]
    if model.variant == "AdditiveRamifiedTwist":
        trace.append(
            TraceStep(
                key="ramified-twist-parity",
                statement="-1 acts on Sym^j by (-1)^j, so odd j has no invariants",
                values={"j": j, "parity": "odd" if j % 2 else "even"},
            )
        )
    if model.variant == "NonSplit":
        notes.append(
            "nonsplit reduction: the unramified quadratic twist is trivial on inertia; "
            "derived here rather than taken from a closed form"
        )
    if t == 0 and divisible:
        trace.append(
            TraceStep(
                key="unramified-outside-p",
                statement="t = 0 leaves a divisible H^0, so the quotient by p vanishes",
                values={"limit_quotient_dim": 0},
            )
        )
    logging.info(f"Tate model {model.params()} ({method}): {level}")
    return LocalH0Report(
        model="tate",
        params=model.params(),
        method=method,
        level_structure=level,
        limit_quotient_dim=finite.rank,
        h0_v_dim=divisible,
        limit_divisible_rank=divisible,
        limit_finite=finite,
        reconstructed=model.variant == "NonSplit",
        notes=notes,
        trace=trace,
    )


# =============================================================================
# Supersingular reduction at p
# =============================================================================


@dataclass(frozen=True)
class SupersingularModel:
    """E[p^n] as a rank-one module over W/p^n, inertia acting through all its units."""

    p: int
    n: int
    j: int

    def __post_init__(self) -> None:
        Modulus(self.p, self.n)
        check_weight(self.p, self.j)

    @property
    def ring(self) -> UnramifiedQuadraticRing:
        return UnramifiedQuadraticRing(Modulus(self.p, self.n))

    def params(self) -> dict[str, int | str | None]:
        return {"p": self.p, "n": self.n, "j": self.j}


def supersingular_fixed_generators(model: SupersingularModel) -> list[Vector]:
    """Generators of {a ∈ W/p^n : a·(u^j - 1) = 0 for every unit u}."""
    ring = model.ring
    blocks = []
    for u in ring.units():
        shift = ring.sub(ring.power(u, model.j), ring.one)
        if ring.is_unit(shift):
            return []
        blocks.append(ring.multiplication_matrix(shift))
    stacked = blocks[0]
    for block in blocks[1:]:
        stacked = stacked.stack(block)
    return kernel(stacked)


def supersingular_h0(model: SupersingularModel, method: Method = "closed") -> LocalH0Report:
    trivial = AbelianPGroupType.trivial(model.p)
    if method == "closed":
        level = trivial
    elif method == "brute":
        level = structure(supersingular_fixed_generators(model), Modulus(model.p, model.n))
    else:
        raise InvalidParams(f"unknown method {method!r}")
    return LocalH0Report(
        model="supersingular",
        params=model.params(),
        method=method,
        level_structure=level,
        limit_quotient_dim=0,
        h0_v_dim=0,
        limit_divisible_rank=0,
        limit_finite=trivial,
        case="supersingular",
        trace=[
            TraceStep(
                key="supersingular-invariants",
                statement="a(χ^j(g) - 1) = 0 for all g forces a = 0 when 1 ≤ j ≤ p-2",
                values={"unit_group_order": model.ring.unit_group_order, "structure": str(level)},
            )
        ],
    )


# =============================================================================
# Ordinary reduction at p
# =============================================================================


@dataclass(frozen=True)
class OrdinaryModel:
    """Upper-triangular image [[χψ^-1, u], [0, ψ]] at level n.

    ``m`` is the level up to which the image is diagonalizable (None for the CM
    case, where u vanishes); ``s`` the largest level with ψ(Frob)^j ≡ 1 mod p^s.
    The image of u at level n is p^m·Z/p^n and the cyclotomic part is surjective.
    """

    p: int
    n: int
    j: int
    m: int | None
    s: int

    def __post_init__(self) -> None:
        Modulus(self.p, self.n)
        check_weight(self.p, self.j)
        if self.m is not None and self.m < 0:
            raise InvalidParams(f"m={self.m} must be non-negative or infinite")
        if self.s < 0:
            raise InvalidParams(f"s={self.s} must be non-negative")

    @property
    def modulus(self) -> Modulus:
        return Modulus(self.p, self.n)

    @property
    def case(self) -> OrdinaryCase:
        if self.s == 0:
            return "A"
        if self.m is None:
            return "B"
        if self.m == 0:
            return "C"
        return "D"

    def generators(self) -> list[ModularMatrix]:
        """Cyclotomic generator, u-generator p^m (if nonzero mod p^n) and a Frobenius realizing s."""
        p, mod = self.p, self.modulus
        gamma = int(primitive_root(p**self.n))
        gens = [ModularMatrix.diagonal(mod, [gamma, 1])]
        if self.m is not None and self.m < self.n:
            gens.append(ModularMatrix.from_rows(mod, [[1, p**self.m], [0, 1]]))
        beta = gamma if self.s == 0 else 1 + p**self.s
        gens.append(ModularMatrix.diagonal(mod, [mod.inverse(beta), beta]))
        return gens

    def params(self) -> dict[str, int | str | None]:
        return {
            "p": self.p,
            "n": self.n,
            "j": self.j,
            "m": "inf" if self.m is None else self.m,
            "s": self.s,
        }


def ordinary_h0(model: OrdinaryModel, method: Method = "closed") -> LocalH0Report:
    p, n, m, s = model.p, model.n, model.m, model.s
    cap = s if m is None else min(m, s)
    if method == "closed":
        level = AbelianPGroupType.cyclic(p, min(n, cap))
    elif method == "brute":
        level = _kernel_invariants(model.modulus, model.generators(), model.j)
    else:
        raise InvalidParams(f"unknown method {method!r}")
    finite = AbelianPGroupType.cyclic(p, cap)
    quotient, h0_v = ORDINARY_TABLE[model.case]
    if finite.rank != quotient:
        raise ModelInvariantError(
            f"limit {finite} does not match table row {model.case}"
        )
    logging.info(f"Ordinary model {model.params()} ({method}): case {model.case}, {level}")
    return LocalH0Report(
        model="ordinary",
        params=model.params(),
        method=method,
        level_structure=level,
        limit_quotient_dim=quotient,
        h0_v_dim=h0_v,
        limit_divisible_rank=h0_v,
        limit_finite=finite,
        case=model.case,
        notes=["h0_v_dim is taken from the case table; torsion levels never carry a free part"],
        trace=[
            TraceStep(
                key="ordinary-invariants",
                statement="invariants lie in Z/p^n·u_j, cut down to p^(n-m) by u and to p^(n-s) by Frobenius",
                values={"m": "inf" if m is None else m, "s": s, "structure": str(level)},
            ),
            TraceStep(
                key="ordinary-case-table",
                statement=f"case {model.case}: (dim H^0(A)/p, dim H^0(V)) = ({quotient}, {h0_v})",
                values={"case": model.case, "limit": str(finite)},
            ),
        ],
    )


# =============================================================================
# Potentially good reduction at l ≠ p
# =============================================================================


@dataclass(frozen=True)
class PotentiallyGoodModel:
    """Inertia acting through a finite group Φ of order prime to p."""

    p: int
    n: int
    j: int
    image: tuple[ModularMatrix, ...] = field(default=())

    def __post_init__(self) -> None:
        modulus = Modulus(self.p, self.n)
        check_weight(self.p, self.j)
        for g in self.image:
            if g.modulus != modulus or g.rows != 2 or g.cols != 2:
                raise InvalidParams(f"image generator must be 2x2 over {modulus}")

    @property
    def modulus(self) -> Modulus:
        return Modulus(self.p, self.n)

    def generators(self) -> list[ModularMatrix]:
        return list(self.image) or [ModularMatrix.identity(self.modulus, 2)]

    def params(self) -> dict[str, int | str | None]:
        return {"p": self.p, "n": self.n, "j": self.j, "image": str([g.as_lists() for g in self.image])}


def _teichmuller_lift(g: ModularMatrix, target: Modulus) -> ModularMatrix:
    """The power of an integral lift of ``g`` that has the same prime-to-p order as ``g``."""
    m = MatrixGroup(g.modulus, [g], name="g").element_order(g)
    if m == 1:
        return ModularMatrix.identity(target, g.rows)
    naive = ModularMatrix.from_rows(target, g.as_lists())
    k = MatrixGroup(target, [naive], name="lift").element_order(naive) // m
    return naive.power(k * pow(k, -1, m))


def _reduction_kernel(target: Modulus) -> list[ModularMatrix]:
    """I + p^(n-1)·A for every A over F_p: the kernel of reduction to the level below."""
    step = target.p ** (target.n - 1)
    return [
        ModularMatrix.from_rows(target, [[1 + step * a, step * b], [step * c, 1 + step * d]])
        for a, b, c, d in itertools.product(range(target.p), repeat=4)
    ]


def _closes_up(modulus: Modulus, gens: Sequence[ModularMatrix], order: int) -> bool:
    try:
        return MatrixGroup(modulus, gens, name="lift").order(cap=order) == order
    except CapExceeded:
        return False


def lift_prime_to_p_image(gens: Sequence[ModularMatrix], target: Modulus) -> list[ModularMatrix]:
    """Generators one level up that generate a group isomorphic to ⟨gens⟩.

    Each generator is first lifted to its element of prime-to-p order. When those
    lifts generate something larger, later generators are conjugated by the
    reduction kernel until every prefix closes up to the order of its image; such
    a choice exists because complements of the kernel are conjugate.

    Raises:
        ModelInvariantError: if no conjugate choice closes up
    """
    base = gens[0].modulus
    lifted = [_teichmuller_lift(g, target) for g in gens]
    orders = [MatrixGroup(base, gens[: i + 1], name="Φ").order() for i in range(len(gens))]
    if _closes_up(target, lifted, orders[-1]):
        return lifted
    kernel_elements = _reduction_kernel(target)

    def search(chosen: list[ModularMatrix]) -> list[ModularMatrix] | None:
        i = len(chosen)
        if i == len(lifted):
            return chosen
        seen: set[ModularMatrix] = set()
        for k in kernel_elements:
            candidate = k @ lifted[i] @ k.inverse()
            if candidate in seen:
                continue
            seen.add(candidate)
            trial = [*chosen, candidate]
            if _closes_up(target, trial, orders[i]):
                found = search(trial)
                if found is not None:
                    return found
        return None

    found = search(lifted[:1])
    if found is None:
        raise ModelInvariantError(f"no prime-to-p lift of the image to {target}")
    return found


def _averaged_rank(gens: Sequence[ModularMatrix], p: int, j: int) -> int:
    """Rank of the averaging projector on Sym^j F_p^2.

    The projector is idempotent, so its rank is its trace; j + 1 < p makes the
    trace mod p determine the rank.
    """
    residue = Modulus(p, 1)
    group = MatrixGroup(residue, [g.reduced_to(residue) for g in gens], name="Φ mod p")
    elements = group.closure().elements
    total = sum(sum(sym_power(g, j)[i, i] for i in range(j + 1)) for g in elements)
    return total * pow(len(elements), -1, p) % p


def potentially_good_h0(model: PotentiallyGoodModel, method: Method = "closed") -> LocalH0Report:
    """Invariants of a prime-to-p image; they are free of one rank at every level.

    "closed" reads the rank off the averaging projector mod p. "brute" takes kernels
    at levels n and n + 1, lifting Φ one level up, and checks that both are free of
    the same rank.

    Raises:
        NotPrimeToP: if p divides the order of Φ
        ModelInvariantError: if the invariants are not free of constant rank
    """
    gens = model.generators()
    order = MatrixGroup(model.modulus, gens, name="Φ").order()
    if order % model.p == 0:
        raise NotPrimeToP(f"|Φ| = {order} is divisible by p = {model.p}")

    if method == "closed":
        rank = _averaged_rank(gens, model.p, model.j)
        levels = [model.n]
    elif method == "brute":
        upper = model.modulus.at_level(model.n + 1)
        images = {model.n: gens, model.n + 1: lift_prime_to_p_image(gens, upper)}
        levels = sorted(images)
        ranks: set[int] = set()
        for level, level_gens in images.items():
            found = _kernel_invariants(model.modulus.at_level(level), level_gens, model.j)
            if any(e != level for e in found.exponents):
                raise ModelInvariantError(f"invariants {found} at level {level} are not free")
            ranks.add(found.rank)
        if len(ranks) != 1:
            raise ModelInvariantError(f"invariant rank changes between levels {levels}: {sorted(ranks)}")
        rank = ranks.pop()
    else:
        raise InvalidParams(f"unknown method {method!r}")

    return LocalH0Report(
        model="potgood",
        params=model.params(),
        method=method,
        level_structure=AbelianPGroupType(p=model.p, exponents=(model.n,) * rank),
        limit_quotient_dim=0,
        h0_v_dim=rank,
        limit_divisible_rank=rank,
        limit_finite=AbelianPGroupType.trivial(model.p),
        trace=[
            TraceStep(
                key="potentially-good-divisible",
                statement="invariants of a prime-to-p group are free, so H^0 of the limit is divisible",
                values={"order": order, "rank": rank, "levels": levels},
            )
        ],
    )


# =============================================================================
# Bound on the image of unramified restriction
# =============================================================================


class BoundTrace(BaseModel):
    case: BoundCase
    j: int
    raw: int
    bound: int | None
    excluded: bool = False
    flag: str | None = None
    trace: list[TraceStep] = Field(default_factory=list)


def bound_dim_image(
    case: BoundCase, j: int, h0_quotient_dim: int, h0_v_dim: int
) -> BoundTrace:
    """dim Im(Res^ur_p) ≤ dim H^0(A)/p + j + dim H^0(V), refined by one in case B.

    Raises:
        InvalidCase: if the case is unknown or the dimensions do not fit it
    """
    if case not in _EXPECTED_LOCAL_DIMS:
        raise InvalidCase(f"unknown case {case!r}")
    if j < 1:
        raise InvalidJ(f"j={j} must be positive")
    if (h0_quotient_dim, h0_v_dim) != _EXPECTED_LOCAL_DIMS[case]:
        raise InvalidCase(
            f"case {case} has local dims {_EXPECTED_LOCAL_DIMS[case]}, "
            f"got ({h0_quotient_dim}, {h0_v_dim})"
        )
    raw = h0_quotient_dim + j + h0_v_dim
    trace = [
        TraceStep(
            key="local-exact-sequence",
            statement="dim Im(Loc_p) ≤ dim H^0(A)/p + dim H^1_f[p]",
            values={"h0_quotient_dim": h0_quotient_dim},
        ),
        TraceStep(
            key="hodge-constant",
            statement="dim H^1_f(Q_p, V) - dim H^0(Q_p, V) = (j+1) - 1 = j",
            values={"j": j, "h0_v_dim": h0_v_dim, "raw": raw},
        ),
    ]
    if case == "D":
        return BoundTrace(
            case=case,
            j=j,
            raw=raw,
            bound=None,
            excluded=True,
            flag="excluded by hypothesis (b′)",
            trace=trace,
        )
    bound = raw
    if case == "B":
        bound = raw - 1
        trace.append(
            TraceStep(
                key="restriction-not-injective",
                statement="in case B the restriction to Q_p^ur has a kernel of dimension ≥ 1",
                values={"raw": raw, "refined": bound},
            )
        )
    trace.append(
        TraceStep(key="unramified-image-bound", statement="dim Im(Res^ur_p) ≤ j", values={"bound": bound})
    )
    if bound > j:
        raise ModelInvariantError(f"bound {bound} exceeds j = {j} in case {case}")
    return BoundTrace(case=case, j=j, raw=raw, bound=bound, trace=trace)

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

"""Elliptic curves over Q: invariants, reduction at l ≥ 5, a_p, a mod-p image sieve
and the hypothesis checker for class-group quotients of Q(E[p])."""

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Literal

import numpy as np
from pydantic import BaseModel, Field, model_validator
from sympy import factorint, isprime, legendre_symbol, multiplicity, primerange

from galrep import config as config_module
from galrep.errors import (
    EXIT_OK,
    EXIT_UNDETERMINED,
    EXIT_VIOLATED,
    BadReduction,
    BudgetExceeded,
    InvalidParams,
    ModelInvariantError,
    SingularCurve,
    SmallPrimeUnsupported,
)
from galrep.localmodel import (
    BoundCase,
    BoundTrace,
    TateModel,
    TateVariant,
    bound_dim_image,
    check_weight,
    tate_h0,
)
from galrep.utils.params import parse_curve
from galrep.utils.typing import Status, TraceStep

ReductionTag = Literal[
    "Good",
    "MultiplicativeSplit",
    "MultiplicativeNonSplit",
    "AdditivePotentiallyMultiplicative",
    "AdditivePotentiallyGood",
]
Family = Literal["Borel", "split Cartan normalizer", "nonsplit Cartan normalizer", "exceptional"]
FAMILIES: tuple[Family, ...] = (
    "Borel",
    "split Cartan normalizer",
    "nonsplit Cartan normalizer",
    "exceptional",
)

MAX_POINT_COUNT_PRIME = 10**5

# The rational j-invariants of CM curves: one per imaginary quadratic order of class
# number one (discriminants -3, -4, -7, -8, -11, -12, -16, -19, -27, -28, -43, -67, -163).
CM_J_INVARIANTS: frozenset[int] = frozenset(
    {
        0,
        1728,
        -3375,
        8000,
        -32768,
        54000,
        287496,
        -884736,
        -12288000,
        16581375,
        -884736000,
        -147197952000,
        -262537412640768000,
    }
)


@dataclass(frozen=True)
class StandardInvariants:
    b2: int
    b4: int
    b6: int
    b8: int
    c4: int
    c6: int
    disc: int
    j: Fraction

    def __post_init__(self) -> None:
        if self.c4**3 - self.c6**2 != 1728 * self.disc:
            raise ModelInvariantError("c4^3 - c6^2 != 1728 Δ")
        if 4 * self.b8 != self.b2 * self.b6 - self.b4**2:
            raise ModelInvariantError("4 b8 != b2 b6 - b4^2")

    def j_valuation(self, ell: int) -> int | None:
        """v_l(j), or None when j = 0."""
        if self.j == 0:
            return None
        return multiplicity(ell, abs(self.j.numerator)) - multiplicity(ell, self.j.denominator)


@dataclass(frozen=True)
class Curve:
    """y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6 with integral coefficients."""

    a1: int
    a2: int
    a3: int
    a4: int
    a6: int

    def __post_init__(self) -> None:
        if self.invariants.disc == 0:
            raise SingularCurve(f"curve {self.coefficients} has Δ = 0")

    @classmethod
    def parse(cls, text: str) -> "Curve":
        return cls(*parse_curve(text))

    @classmethod
    def short(cls, a: int, b: int) -> "Curve":
        """y^2 = x^3 + a x + b."""
        return cls(0, 0, 0, a, b)

    @property
    def coefficients(self) -> tuple[int, int, int, int, int]:
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    def scaled(self, u: int) -> "Curve":
        """The model with a_i multiplied by u^i, so c4 -> u^4 c4 and Δ -> u^12 Δ."""
        if u == 0:
            raise InvalidParams("scaling factor must be nonzero")
        return Curve(u * self.a1, u**2 * self.a2, u**3 * self.a3, u**4 * self.a4, u**6 * self.a6)

    @cached_property
    def invariants(self) -> StandardInvariants:
        a1, a2, a3, a4, a6 = self.coefficients
        b2 = a1 * a1 + 4 * a2
        b4 = 2 * a4 + a1 * a3
        b6 = a3 * a3 + 4 * a6
        b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
        c4 = b2 * b2 - 24 * b4
        c6 = -(b2**3) + 36 * b2 * b4 - 216 * b6
        disc = -b2 * b2 * b8 - 8 * b4**3 - 27 * b6 * b6 + 9 * b2 * b4 * b6
        j = Fraction(c4**3, disc) if disc else Fraction(0)
        return StandardInvariants(b2, b4, b6, b8, c4, c6, disc, j)

    def __str__(self) -> str:
        return "[" + ",".join(str(a) for a in self.coefficients) + "]"


def invariants(curve: Curve) -> StandardInvariants:
    return curve.invariants


# =============================================================================
# Reduction at l ≥ 5
# =============================================================================


class LocalReduction(BaseModel):
    ell: int
    tag: ReductionTag
    c4: int
    c6: int
    disc: int
    scalings: int
    v_disc: int
    v_c4: int | None
    v_j: int | None

    @property
    def potentially_multiplicative(self) -> bool:
        return self.v_j is not None and self.v_j < 0


def _check_prime(ell: int) -> None:
    if not isprime(ell):
        raise InvalidParams(f"{ell} is not prime")


def reduction_at(curve: Curve, ell: int) -> LocalReduction:
    """Reduction type at a prime l ≥ 5 from a model minimal at l.

    Raises:
        SmallPrimeUnsupported: for l = 2, 3
    """
    _check_prime(ell)
    if ell in (2, 3):
        raise SmallPrimeUnsupported(f"reduction type at l={ell} needs Tate's algorithm")
    inv = curve.invariants
    c4, c6, disc = inv.c4, inv.c6, inv.disc
    scalings = 0
    while c4 % ell**4 == 0 and c6 % ell**6 == 0 and disc % ell**12 == 0:
        c4, c6, disc = c4 // ell**4, c6 // ell**6, disc // ell**12
        scalings += 1
    v_disc = multiplicity(ell, abs(disc))
    v_c4 = multiplicity(ell, abs(c4)) if c4 else None
    v_j = inv.j_valuation(ell)

    tag: ReductionTag
    if v_disc == 0:
        tag = "Good"
    elif v_j is not None and v_j < 0:
        if v_c4 == 0:
            split = legendre_symbol(-c6 % ell, ell) == 1
            tag = "MultiplicativeSplit" if split else "MultiplicativeNonSplit"
        else:
            tag = "AdditivePotentiallyMultiplicative"
    else:
        tag = "AdditivePotentiallyGood"
    return LocalReduction(
        ell=ell, tag=tag, c4=c4, c6=c6, disc=disc, scalings=scalings, v_disc=v_disc, v_c4=v_c4, v_j=v_j
    )


# =============================================================================
# Point counting
# =============================================================================


def _good_model_at(curve: Curve, p: int) -> Curve:
    if curve.invariants.disc % p:
        return curve
    if p < 5:
        raise BadReduction(f"model {curve} is singular at p={p}")
    local = reduction_at(curve, p)
    if local.tag != "Good":
        raise BadReduction(f"{curve} has {local.tag} reduction at p={p}")
    return Curve.short(-27 * local.c4, -54 * local.c6)


def _count_naive(curve: Curve, p: int) -> int:
    a1, a2, a3, a4, a6 = (a % p for a in curve.coefficients)
    ys = np.arange(p, dtype=np.int64)
    count = 1
    for x in range(p):
        linear = (a1 * x + a3) % p
        rhs = (x * x * x + a2 * x * x + a4 * x + a6) % p
        count += int(np.count_nonzero((ys * ys + linear * ys - rhs) % p == 0))
    return count


def _count_charsum(curve: Curve, p: int) -> int:
    if p == 2:
        raise InvalidParams("the character sum needs an odd prime")
    inv = curve.invariants
    b2, b4, b6 = inv.b2 % p, inv.b4 % p, inv.b6 % p
    xs = np.arange(p, dtype=np.int64)
    sq = (xs * xs) % p
    f = (4 * sq * xs + b2 * sq + 2 * b4 * xs + b6) % p
    is_square = np.zeros(p, dtype=bool)
    is_square[sq] = True
    chi = np.where(f == 0, 0, np.where(is_square[f], 1, -1))
    return p + 1 + int(chi.sum())


def a_p(curve: Curve, p: int, method: Literal["charsum", "naive"] = "charsum") -> int:
    """a_p = p + 1 - #E(F_p) at a prime of good reduction.

    Raises:
        BadReduction: if E has bad reduction at p
        BudgetExceeded: if p is above the point-counting limit
    """
    _check_prime(p)
    if p > MAX_POINT_COUNT_PRIME:
        raise BudgetExceeded(f"point counting is limited to p ≤ {MAX_POINT_COUNT_PRIME}")
    model = _good_model_at(curve, p)
    if method == "charsum":
        count = _count_charsum(model, p)
    elif method == "naive":
        count = _count_naive(model, p)
    else:
        raise InvalidParams(f"unknown point-counting method {method!r}")
    trace = p + 1 - count
    if trace * trace > 4 * p:
        raise ModelInvariantError(f"a_{p} = {trace} violates the Hasse bound")
    return trace


def is_supersingular(curve: Curve, p: int) -> bool:
    return a_p(curve, p) % p == 0


def has_good_reduction(curve: Curve, q: int) -> bool:
    """Good reduction at q; at q = 2, 3 only the given model is examined."""
    if q < 5:
        return curve.invariants.disc % q != 0
    return reduction_at(curve, q).tag == "Good"


# =============================================================================
# Surjectivity sieve
# =============================================================================


class SurjectivityVerdict(BaseModel):
    tag: Literal["Surjective", "NonSurjectiveSuspected", "Undetermined"]
    p: int
    aux_bound: int
    signatures: int
    witnesses: dict[str, list[int]] = Field(default_factory=dict)
    surviving: list[str] = Field(default_factory=list)
    suspected: str | None = None
    evidence: str = ""


def _is_square(x: int, p: int) -> bool:
    return x % p == 0 or legendre_symbol(x % p, p) == 1


def _excluded_families(t: int, d: int, p: int) -> list[Family]:
    """Families of maximal subgroups a Frobenius with trace t and determinant d cannot lie in."""
    disc = (t * t - 4 * d) % p
    square = _is_square(disc, p)
    excluded: list[Family] = []
    if not square:
        excluded.append("Borel")
    if t % p and not square:
        excluded.append("split Cartan normalizer")
    if t % p and square and disc:
        excluded.append("nonsplit Cartan normalizer")
    # projective orders 1, 2, 3, 4, 5 force t^2/d into this set
    u = (t * t * pow(d, -1, p)) % p
    allowed = {0, 1, 2, 4}
    if p % 5 in (1, 4):
        allowed |= {r for r in range(p) if (r * r - 3 * r + 1) % p == 0}
    if u not in allowed:
        excluded.append("exceptional")
    return excluded


def surjectivity_test(
    curve: Curve, p: int, aux_bound: int | None = None, min_signatures: int | None = None
) -> SurjectivityVerdict:
    """Sieve the mod-p image by Frobenius signatures (a_q mod p, q mod p) for q ≤ aux_bound.

    Reports Surjective only when every family of maximal subgroups is excluded by some
    witness; otherwise names the surviving families as a suspicion, never a proof.
    """
    cfg = config_module.config
    aux_bound = cfg.default_aux_bound if aux_bound is None else aux_bound
    min_signatures = cfg.min_signatures if min_signatures is None else min_signatures
    _check_prime(p)
    if p < 5:
        raise SmallPrimeUnsupported("the surjectivity sieve needs p ≥ 5")
    if aux_bound < 50:
        raise InvalidParams(f"aux_bound={aux_bound} must be at least 50")
    if aux_bound > MAX_POINT_COUNT_PRIME:
        raise BudgetExceeded(f"aux_bound={aux_bound} exceeds {MAX_POINT_COUNT_PRIME}")

    witnesses: dict[str, list[int]] = {family: [] for family in FAMILIES}
    signatures = 0
    for q in primerange(2, aux_bound + 1):
        if q == p or not has_good_reduction(curve, q):
            continue
        trace = a_p(curve, q, method="naive" if q == 2 else "charsum")
        signatures += 1
        for family in _excluded_families(trace, q, p):
            witnesses[family].append(int(q))
    surviving = [family for family in FAMILIES if not witnesses[family]]
    logging.info(f"Sieve for {curve} mod {p}: {signatures} signatures, surviving {surviving}")

    if signatures < min_signatures:
        return SurjectivityVerdict(
            tag="Undetermined",
            p=p,
            aux_bound=aux_bound,
            signatures=signatures,
            witnesses=witnesses,
            surviving=surviving,
            evidence=f"only {signatures} good primes q ≤ {aux_bound}, need {min_signatures}",
        )
    if not surviving:
        return SurjectivityVerdict(
            tag="Surjective",
            p=p,
            aux_bound=aux_bound,
            signatures=signatures,
            witnesses={family: qs[:3] for family, qs in witnesses.items()},
            evidence="every maximal-subgroup family is excluded by a Frobenius signature",
        )
    return SurjectivityVerdict(
        tag="NonSurjectiveSuspected",
        p=p,
        aux_bound=aux_bound,
        signatures=signatures,
        witnesses={family: qs[:3] for family, qs in witnesses.items()},
        surviving=surviving,
        suspected=surviving[0],
        evidence=(
            f"all {signatures} signatures are consistent with {', '.join(surviving)}; "
            "an isogeny or an exceptional image is possible but not proved"
        ),
    )


# =============================================================================
# Hypothesis checker
# =============================================================================

Hypothesis = Literal["a′", "b′", "c′", "d′"]


class Verdict(BaseModel):
    hypothesis: Hypothesis
    status: Status
    evidence: str
    data: dict[str, int | str | list[int] | None] = Field(default_factory=dict)


class HypothesisReport(BaseModel):
    curve: list[int]
    p: int
    j: int
    sha_dim: int | None
    aux_bound: int
    verdicts: list[Verdict]
    case: BoundCase | None = None
    a_p: int | None = None
    surjectivity: SurjectivityVerdict | None = None
    bound: BoundTrace | None = None
    conclusion: str | None = None
    message: str | None = None
    trace: list[TraceStep] = Field(default_factory=list)

    @model_validator(mode="after")
    def _conclusion_only_when_earned(self) -> "HypothesisReport":
        if self.conclusion is not None:
            if not self.all_satisfied or self.sha_dim is None or self.sha_dim < self.j + 1:
                raise ValueError("the conclusion needs four satisfied hypotheses and sha_dim ≥ j+1")
        return self

    @property
    def all_satisfied(self) -> bool:
        return all(v.status == "Satisfied" for v in self.verdicts)

    @property
    def exit_status(self) -> int:
        statuses = {v.status for v in self.verdicts}
        if "Violated" in statuses:
            return EXIT_VIOLATED
        if "Undetermined" in statuses:
            return EXIT_UNDETERMINED
        return EXIT_OK

    def verdict(self, hypothesis: Hypothesis) -> Verdict:
        return next(v for v in self.verdicts if v.hypothesis == hypothesis)


def _check_good_reduction(curve: Curve, p: int) -> tuple[Verdict, LocalReduction]:
    local = reduction_at(curve, p)
    if local.tag == "Good":
        verdict = Verdict(
            hypothesis="a′",
            status="Satisfied",
            evidence=f"good reduction at p={p}",
            data={"v_disc": 0, "scalings": local.scalings},
        )
    else:
        verdict = Verdict(
            hypothesis="a′",
            status="Violated",
            evidence=f"(a′) violated: {local.tag} reduction at p={p}",
            data={"v_disc": local.v_disc, "tag": local.tag},
        )
    return verdict, local


def _check_wild_ramification(
    curve: Curve, p: int, j: int, good: bool
) -> tuple[Verdict, BoundCase | None, int | None]:
    if not good:
        return (
            Verdict(
                hypothesis="b′",
                status="Satisfied",
                evidence="vacuous: (b′) concerns good reduction at p, which fails",
            ),
            None,
            None,
        )
    trace = a_p(curve, p)
    if trace % p == 0:
        return (
            Verdict(
                hypothesis="b′",
                status="Satisfied",
                evidence=f"supersingular at p={p} (a_p = {trace})",
                data={"a_p": trace},
            ),
            "supersingular",
            trace,
        )
    power = pow(trace, j, p)
    if power != 1:
        return (
            Verdict(
                hypothesis="b′",
                status="Satisfied",
                evidence=f"ordinary with a_p^j = {trace}^{j} ≡ {power} ≢ 1 mod {p}",
                data={"a_p": trace, "a_p^j mod p": power},
            ),
            "A",
            trace,
        )
    j_inv = curve.invariants.j
    if j_inv.denominator == 1 and j_inv.numerator in CM_J_INVARIANTS:
        return (
            Verdict(
                hypothesis="b′",
                status="Satisfied",
                evidence=f"ordinary with a_p^j ≡ 1, but E has CM (j = {j_inv})",
                data={"a_p": trace, "j": str(j_inv)},
            ),
            "B",
            trace,
        )
    return (
        Verdict(
            hypothesis="b′",
            status="Undetermined",
            evidence=(
                f"ordinary, non-CM, a_p^j ≡ 1 mod {p}: wild ramification at p is not "
                "computed, so hypothesis (b′) is undetermined"
            ),
            data={"a_p": trace},
        ),
        None,
        trace,
    )


def _tate_variant(curve: Curve, ell: int) -> tuple[TateVariant, str | None]:
    if ell < 5:
        return "Split", f"split/nonsplit labelling is unsupported at l={ell}"
    tag = reduction_at(curve, ell).tag
    if tag == "MultiplicativeSplit":
        return "Split", None
    if tag == "MultiplicativeNonSplit":
        return "NonSplit", None
    return "AdditiveRamifiedTwist", None


def _check_tate_valuations(curve: Curve, p: int, j: int) -> tuple[Verdict, list[TraceStep]]:
    j_inv = curve.invariants.j
    trace: list[TraceStep] = []
    offending: list[int] = []
    primes = sorted(factorint(j_inv.denominator)) if j_inv != 0 else []
    for ell in primes:
        v = curve.invariants.j_valuation(ell)
        assert v is not None and v < 0
        if ell == p:
            continue
        if v % p == 0:
            offending.append(ell)
        variant, note = _tate_variant(curve, ell)
        t = 1 if v % p == 0 else 0
        local = tate_h0(TateModel(p=p, n=1, j=j, t=t, variant=variant))
        values: dict[str, int | str | None] = {
            "l": ell,
            "v_l(j)": v,
            "t": t,
            "variant": variant,
            "limit_quotient_dim": local.limit_quotient_dim,
        }
        if note:
            values["note"] = note
        if variant == "Split" and ell >= 5:
            values["tamagawa"] = f"c_l = -v_l(j) = {-v}"
        trace.append(
            TraceStep(
                key="tate-unramified-at-l",
                statement=f"H^0(Q_{ell}^ur, A)/p has dimension {local.limit_quotient_dim}",
                values=values,
            )
        )

    for ell in sorted(factorint(abs(curve.invariants.disc))):
        if ell >= 5 and ell != p and reduction_at(curve, ell).tag == "AdditivePotentiallyGood":
            trace.append(
                TraceStep(
                    key="potentially-good-divisible",
                    statement=f"inertia at l={ell} acts through a group of order prime to p",
                    values={"l": ell},
                )
            )

    if offending:
        ell = offending[0]
        v = curve.invariants.j_valuation(ell)
        verdict = Verdict(
            hypothesis="c′",
            status="Violated",
            evidence=f"(c′) violated at l={ell}: v_{ell}(j) = {v} is divisible by p={p}",
            data={"offending": offending},
        )
    else:
        verdict = Verdict(
            hypothesis="c′",
            status="Satisfied",
            evidence=(
                f"v_l(j) prime to p at every l ≠ p with v_l(j) < 0: {primes}"
                if primes
                else "j is integral, no prime with v_l(j) < 0"
            ),
            data={"primes": [int(ell) for ell in primes]},
        )
    return verdict, trace


def check_hypotheses(
    curve: Curve,
    p: int,
    j: int,
    sha_dim: int | None = None,
    aux_bound: int | None = None,
) -> HypothesisReport:
    """Three-valued verdicts on (a′)-(d′) and, when earned, the class-group conclusion."""
    _check_prime(p)
    if p < 5:
        raise SmallPrimeUnsupported("the hypotheses need p ≥ 5")
    check_weight(p, j)
    aux_bound = config_module.config.default_aux_bound if aux_bound is None else aux_bound

    good_verdict, local = _check_good_reduction(curve, p)
    wild_verdict, case, trace_p = _check_wild_ramification(curve, p, j, local.tag == "Good")
    tate_verdict, trace = _check_tate_valuations(curve, p, j)
    sieve = surjectivity_test(curve, p, aux_bound)
    if sieve.tag == "Surjective":
        surj_verdict = Verdict(
            hypothesis="d′",
            status="Satisfied",
            evidence=f"surjective: every maximal subgroup excluded using q ≤ {aux_bound}",
            data={"signatures": sieve.signatures},
        )
    else:
        surj_verdict = Verdict(
            hypothesis="d′",
            status="Undetermined",
            evidence=f"{sieve.tag}: {sieve.evidence}",
            data={"signatures": sieve.signatures, "surviving": ", ".join(sieve.surviving)},
        )
    verdicts = [good_verdict, wild_verdict, tate_verdict, surj_verdict]

    bound = None
    if case is not None:
        quotient_dim, h0_v = (1, 0) if case == "B" else (0, 0)
        bound = bound_dim_image(case, j, quotient_dim, h0_v)

    conclusion = None
    message = None
    if all(v.status == "Satisfied" for v in verdicts):
        if sha_dim is not None and sha_dim >= j + 1:
            conclusion = (
                "Cl_K ⊗ F_p admits Sym^j E[p] as a quotient Galois module, "
                "conditional on the supplied Sha dimension"
            )
        else:
            message = f"supply --sha-dim ≥ {j + 1}"
    logging.info(f"Hypotheses for {curve} at p={p}, j={j}: {[v.status for v in verdicts]}")
    return HypothesisReport(
        curve=list(curve.coefficients),
        p=p,
        j=j,
        sha_dim=sha_dim,
        aux_bound=aux_bound,
        verdicts=verdicts,
        case=case,
        a_p=trace_p,
        surjectivity=sieve,
        bound=bound,
        conclusion=conclusion,
        message=message,
        trace=trace + (bound.trace if bound else []),
    )

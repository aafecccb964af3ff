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

"""Verification suites run by ``galrep verify``.

Every check compares two independent computations (a closed form against a kernel
computation, a solver against an enumeration, two point counts) or reproduces a
fixed example end to end.
"""

import logging
import time
from collections.abc import Callable, Iterator
from typing import Literal

from pydantic import BaseModel, Field
from sympy import primerange

from galrep.cohom import h1_bruteforce, vanishing_criterion
from galrep.ecq import Curve, a_p, check_hypotheses, has_good_reduction
from galrep.errors import GalrepError
from galrep.grpmod import GModule, MatrixGroup, borel, gl2
from galrep.localmodel import (
    ORDINARY_TABLE,
    OrdinaryModel,
    SupersingularModel,
    TateModel,
    bound_dim_image,
    ordinary_h0,
    supersingular_h0,
    tate_h0,
)
from galrep.zring import ModularMatrix, Modulus

SuiteName = Literal["lemmas", "local", "ecq"]
SUITES: tuple[SuiteName, ...] = ("lemmas", "local", "ecq")

CheckFunction = Callable[[], tuple[bool, str]]

_REGISTRY: dict[str, list[tuple[str, CheckFunction]]] = {name: [] for name in SUITES}

CURVE_CORPUS: tuple[tuple[int, int, int, int, int], ...] = (
    (0, -1, 1, -10, -20),
    (0, -1, 1, 0, 0),
    (1, 0, 1, 4, -6),
    (1, 1, 1, -10, -10),
    (1, -1, 1, -1, -14),
    (0, 1, 1, -9, -15),
    (0, 1, 0, 4, 4),
    (1, 0, 0, -4, -1),
    (0, -1, 0, -4, 4),
    (1, 0, 1, -5, -8),
    (0, 0, 1, 0, -7),
    (1, 0, 1, 1, 2),
    (0, 0, 0, 4, 0),
    (0, 0, 1, -1, 0),
    (0, 1, 1, -23, -50),
    (0, 1, 1, 0, 0),
    (0, 1, 1, -2, 0),
    (0, 0, 1, -7, 6),
    (0, 0, 0, 1, 0),
    (0, 0, 0, 0, 1),
)


class CheckResult(BaseModel):
    name: str
    passed: bool
    detail: str = ""
    seconds: float = 0.0


class SuiteReport(BaseModel):
    suite: str
    passed: int = 0
    failed: int = 0
    checks: list[CheckResult] = Field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.failed == 0


def check(suite: SuiteName, name: str) -> Callable[[CheckFunction], CheckFunction]:
    def register(func: CheckFunction) -> CheckFunction:
        _REGISTRY[suite].append((name, func))
        return func

    return register


def registered_checks(suite: SuiteName) -> list[str]:
    return [name for name, _ in _REGISTRY[suite]]


def run_suite(suite: SuiteName | Literal["all"]) -> SuiteReport:
    """Run one suite (or all of them) and count passes and failures."""
    names = SUITES if suite == "all" else (suite,)
    report = SuiteReport(suite=suite)
    for name in names:
        for label, func in _REGISTRY[name]:
            start = time.perf_counter()
            try:
                passed, detail = func()
            except GalrepError as exc:
                passed, detail = False, f"{type(exc).__name__}: {exc}"
            elapsed = time.perf_counter() - start
            logging.info(f"[{name}] {label}: {'pass' if passed else 'FAIL'} in {elapsed:.2f}s")
            report.checks.append(
                CheckResult(name=f"{name}: {label}", passed=passed, detail=detail, seconds=round(elapsed, 3))
            )
            if passed:
                report.passed += 1
            else:
                report.failed += 1
    return report


# =============================================================================
# lemmas: cohomology vanishing
# =============================================================================


def cohomology_pairs() -> Iterator[tuple[MatrixGroup, GModule]]:
    """(G, V) pairs over F_3 and F_5 with |G| ≤ 480 and dim V ≤ 4."""
    for p, weights in ((3, range(0, 4)), (5, range(1, 4))):
        for group in (gl2(p), borel(p)):
            for j in weights:
                for twist in (0, 1):
                    yield group, GModule.symmetric_power(group, j, twist=twist)


@check("lemmas", "vanishing witness forces h1 = 0 on the (G, V) corpus")
def _witness_forces_vanishing() -> tuple[bool, str]:
    pairs = witnessed = 0
    for group, module in cohomology_pairs():
        pairs += 1
        if vanishing_criterion(group, module) is None:
            continue
        witnessed += 1
        report = h1_bruteforce(group, module)
        if report.h1 != 0:
            return False, f"{group.name} on {module.label}: witness but h1 = {report.h1}"
    return pairs >= 20 and witnessed > 0, f"{witnessed} of {pairs} pairs witnessed"


@check("lemmas", "H^1(GL2(F_3), Sym^1) = 0 by criterion and by both cocycle solves")
def _gl2_f3_standard() -> tuple[bool, str]:
    group = gl2(3)
    module = GModule.symmetric_power(group, 1)
    witness = vanishing_criterion(group, module)
    tree = h1_bruteforce(group, module, method="tree")
    pairs = h1_bruteforce(group, module, method="pairs")
    ok = witness is not None and tree.h1 == 0 and pairs.h1 == 0 and tree.z1 == pairs.z1
    return ok, f"witness={witness.description if witness else None}, h1={tree.h1}/{pairs.h1}"


@check("lemmas", "H^1(GL2(F_5), Sym^j) = 0 for j = 1, 2, 3 by criterion, j = 1 by cocycle solve")
def _gl2_f5_symmetric_powers() -> tuple[bool, str]:
    group = gl2(5)
    found = []
    for j in (1, 2, 3):
        witness = vanishing_criterion(group, GModule.symmetric_power(group, j))
        if witness is None:
            return False, f"no witness for Sym^{j}"
        found.append(witness.description)
    report = h1_bruteforce(group, GModule.symmetric_power(group, 1))
    return report.order == 480 and report.h1 == 0, f"witnesses {found}, h1(Sym^1) = {report.h1}"


@check("lemmas", "cyclic group acting trivially: h1 = 1 exactly when p divides the order")
def _cyclic_trivial() -> tuple[bool, str]:
    for p in (3, 5):
        modulus = Modulus(p, 1)
        for c in range(2, p):
            group = MatrixGroup(modulus, [ModularMatrix.scalar(modulus, 1, c)], name=f"<{c}>")
            h1 = h1_bruteforce(group, GModule.trivial(group)).h1
            if h1 != 0:
                return False, f"order {group.order()} prime to {p} but h1 = {h1}"
    modulus = Modulus(3, 1)
    unipotent = MatrixGroup(modulus, [ModularMatrix.from_rows(modulus, [[1, 1], [0, 1]])], name="Z/3")
    h1 = h1_bruteforce(unipotent, GModule.trivial(unipotent)).h1
    return h1 == 1, f"Z/3 on F_3: h1 = {h1}"


# =============================================================================
# local: invariants of the local models
# =============================================================================


def _sweep_primes() -> Iterator[tuple[int, int, int]]:
    for p in (3, 5, 7):
        for n in (1, 2):
            for j in range(1, p - 1):
                yield p, n, j


@check("local", "Tate models: closed form equals kernel computation for every p, n, j, t, variant")
def _tate_sweep() -> tuple[bool, str]:
    count = 0
    for p, n, j in _sweep_primes():
        for t in range(n + 1):
            for variant in ("Split", "NonSplit", "AdditiveRamifiedTwist"):
                model = TateModel(p=p, n=n, j=j, t=t, variant=variant)
                closed, brute = tate_h0(model, "closed"), tate_h0(model, "brute")
                if not closed.agrees_with(brute):
                    return False, f"{model}: {closed.level_structure} vs {brute.level_structure}"
                if t == 0 and closed.limit_quotient_dim != 0:
                    return False, f"{model}: t = 0 but quotient dim {closed.limit_quotient_dim}"
                count += 1
    return True, f"{count} models agree"


@check("local", "ramified quadratic twist: no invariants for odd j, Z/p^n·u_0 for even j")
def _parity_law() -> tuple[bool, str]:
    for p, n, j in _sweep_primes():
        report = tate_h0(TateModel(p=p, n=n, j=j, t=0, variant="AdditiveRamifiedTwist"), "brute")
        expected = () if j % 2 else (n,)
        if report.level_structure.exponents != expected:
            return False, f"p={p} n={n} j={j}: {report.level_structure}"
    return True, "parity law holds"


@check("local", "supersingular invariants vanish, confirmed over all units")
def _supersingular() -> tuple[bool, str]:
    for p in (5, 7):
        for n in (1, 2):
            for j in range(1, p - 1):
                model = SupersingularModel(p=p, n=n, j=j)
                brute = supersingular_h0(model, "brute")
                if not brute.level_structure.is_trivial or (brute.limit_quotient_dim, brute.h0_v_dim) != (0, 0):
                    return False, f"{model}: {brute.level_structure}"
    return True, "trivial for p in {5, 7}, n ≤ 2"


def _ordinary_models() -> Iterator[OrdinaryModel]:
    for p in (5, 7):
        for n in (1, 2):
            for j in range(1, p - 1):
                for m in (0, 1, 2, None):
                    for s in (0, 1, 2):
                        yield OrdinaryModel(p=p, n=n, j=j, m=m, s=s)


@check("local", "ordinary case table rows and level-n structure Z/p^min(n,m,s)")
def _ordinary_table() -> tuple[bool, str]:
    count = 0
    for model in _ordinary_models():
        closed, brute = ordinary_h0(model, "closed"), ordinary_h0(model, "brute")
        if not closed.agrees_with(brute):
            return False, f"{model}: {closed.level_structure} vs {brute.level_structure}"
        if (closed.limit_quotient_dim, closed.h0_v_dim) != ORDINARY_TABLE[model.case]:
            return False, f"{model}: dims disagree with row {model.case}"
        count += 1
    return True, f"{count} ordinary models agree"


@check("local", "unramified image bound ≤ j in cases A, B, C; case D excluded")
def _bound_sweep() -> tuple[bool, str]:
    for model in _ordinary_models():
        report = ordinary_h0(model)
        bound = bound_dim_image(model.case, model.j, report.limit_quotient_dim, report.h0_v_dim)
        if model.case == "D":
            if not bound.excluded:
                return False, f"{model}: case D not excluded"
            continue
        if bound.bound is None or bound.bound > model.j:
            return False, f"{model}: bound {bound.bound} > j"
        if model.case == "B" and bound.raw != model.j + 1:
            return False, f"{model}: case B raw bound {bound.raw}"
    return True, "bound holds across the sweep"


# =============================================================================
# ecq: curves
# =============================================================================


@check("ecq", "c4^3 - c6^2 = 1728Δ on the curve corpus")
def _discriminant_identity() -> tuple[bool, str]:
    for coeffs in CURVE_CORPUS:
        inv = Curve(*coeffs).invariants
        if inv.c4**3 - inv.c6**2 != 1728 * inv.disc:
            return False, f"identity fails for {coeffs}"
    return True, f"{len(CURVE_CORPUS)} curves"


@check("ecq", "point counts agree and satisfy the Hasse bound for good p ≤ 97")
def _point_counts() -> tuple[bool, str]:
    counted = 0
    for coeffs in CURVE_CORPUS:
        curve = Curve(*coeffs)
        for p in primerange(2, 98):
            if not has_good_reduction(curve, p):
                continue
            naive = a_p(curve, p, method="naive")
            if p > 2 and naive != a_p(curve, p, method="charsum"):
                return False, f"{coeffs} at p={p}: methods disagree"
            if naive * naive > 4 * p:
                return False, f"{coeffs} at p={p}: Hasse bound fails"
            counted += 1
    return True, f"{counted} counts"


@check("ecq", "37a1 at p=5, j=2 with sha-dim 3: all satisfied, conclusion emitted")
def _fixture_37a1() -> tuple[bool, str]:
    report = check_hypotheses(Curve(0, 0, 1, -1, 0), 5, 2, sha_dim=3)
    ok = report.exit_status == 0 and report.conclusion is not None and report.case == "A"
    return ok, f"statuses {[v.status for v in report.verdicts]}"


@check("ecq", "11a1 at p=5, j=1: (c′) violated at l=11")
def _fixture_11a1() -> tuple[bool, str]:
    report = check_hypotheses(Curve(0, -1, 1, -10, -20), 5, 1)
    verdict = report.verdict("c′")
    ok = report.exit_status == 1 and verdict.status == "Violated" and "l=11" in verdict.evidence
    return ok, verdict.evidence

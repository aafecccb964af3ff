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

"""Curve invariants, local reduction, point counts, the image sieve and the hypothesis checker."""

from fractions import Fraction

import pytest
from sympy import factorint

from galrep.ecq import (
    FAMILIES,
    Curve,
    StandardInvariants,
    a_p,
    check_hypotheses,
    has_good_reduction,
    invariants,
    is_supersingular,
    reduction_at,
    surjectivity_test,
)
from galrep.errors import (
    BadReduction,
    InvalidJ,
    InvalidParams,
    ModelInvariantError,
    SingularCurve,
    SmallPrimeUnsupported,
)
from galrep.suites import CURVE_CORPUS

CURVE_37A1 = Curve(0, 0, 1, -1, 0)
CURVE_11A1 = Curve(0, -1, 1, -10, -20)


def _count_points(curve: Curve, p: int) -> int:
    """Projective points over F_p by listing every affine pair."""
    a1, a2, a3, a4, a6 = curve.coefficients
    affine = sum(
        1
        for x in range(p)
        for y in range(p)
        if (y * y + a1 * x * y + a3 * y - x**3 - a2 * x * x - a4 * x - a6) % p == 0
    )
    return affine + 1


def test_invariants_of_37a1() -> None:
    inv = invariants(CURVE_37A1)
    assert inv.disc == 37
    assert inv.c4 == 48
    assert inv.j == Fraction(110592, 37)


def test_invariants_of_11a1() -> None:
    inv = CURVE_11A1.invariants
    assert inv.disc == -161051 == -(11**5)
    assert (inv.c4, inv.c6) == (496, 20008)
    assert inv.j_valuation(11) == -5


@pytest.mark.parametrize("coefficients", [(0, 0, 1, -1, 0), (1, -1, 1, -1, -14), (0, 0, 0, 1, 0), (1, 0, 1, 4, -6)])
def test_discriminant_identity(coefficients: tuple[int, int, int, int, int]) -> None:
    inv = Curve(*coefficients).invariants
    assert inv.c4**3 - inv.c6**2 == 1728 * inv.disc


def test_inconsistent_invariants_are_rejected() -> None:
    with pytest.raises(ModelInvariantError):
        StandardInvariants(b2=0, b4=0, b6=0, b8=0, c4=1, c6=0, disc=0, j=Fraction(0))


def test_singular_curve() -> None:
    with pytest.raises(SingularCurve):
        Curve(0, 0, 0, 0, 0)
    with pytest.raises(SingularCurve):
        Curve.parse("0,0,0,-3,2")


def test_parse_rejects_malformed_curves() -> None:
    with pytest.raises(InvalidParams):
        Curve.parse("0,0,1,-1")
    with pytest.raises(InvalidParams):
        Curve.parse("0,0,1,-1,x")
    assert Curve.parse(" 0, 0, 1, -1, 0 ") == CURVE_37A1


def test_reduction_types() -> None:
    local = reduction_at(CURVE_11A1, 11)
    assert local.tag == "MultiplicativeSplit"
    assert (local.v_disc, local.v_c4) == (5, 0)
    assert local.potentially_multiplicative

    assert reduction_at(CURVE_37A1, 5).tag == "Good"
    assert reduction_at(CURVE_37A1, 37).tag in ("MultiplicativeSplit", "MultiplicativeNonSplit")


def test_minimalization_undoes_scaling() -> None:
    """Scaling by u = l multiplies Δ by l^12; the reduction type is unchanged."""
    scaled = CURVE_37A1.scaled(5)
    assert scaled.invariants.disc == 5**12 * 37
    local = reduction_at(scaled, 5)
    assert local.tag == "Good"
    assert local.scalings == 1
    assert local.disc == 37


def test_additive_reduction() -> None:
    """y^2 = x^3 + 5 has additive, potentially good reduction at 5 (j = 0)."""
    assert reduction_at(Curve.short(0, 5), 5).tag == "AdditivePotentiallyGood"


def test_small_primes_are_unsupported() -> None:
    with pytest.raises(SmallPrimeUnsupported):
        reduction_at(CURVE_37A1, 3)
    with pytest.raises(InvalidParams):
        reduction_at(CURVE_37A1, 15)


@pytest.mark.parametrize(
    "curve, p, expected",
    [
        (Curve.short(1, 0), 5, 2),
        (Curve.short(0, 1), 5, 0),
        (CURVE_37A1, 5, -2),
        (CURVE_37A1, 2, -2),
        (CURVE_37A1, 3, -3),
        (CURVE_11A1, 5, 1),
    ],
)
def test_a_p_examples(curve: Curve, p: int, expected: int) -> None:
    assert a_p(curve, p, method="naive") == expected
    assert p + 1 - _count_points(curve, p) == expected


@pytest.mark.parametrize("p", [3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 41, 43])
def test_point_counting_methods_agree(p: int) -> None:
    assert a_p(CURVE_37A1, p, method="charsum") == a_p(CURVE_37A1, p, method="naive")
    assert a_p(CURVE_37A1, p) == p + 1 - _count_points(CURVE_37A1, p)


def test_a_p_at_bad_prime() -> None:
    with pytest.raises(BadReduction):
        a_p(CURVE_11A1, 11)


def test_a_p_through_a_nonminimal_model() -> None:
    """A model singular mod 5 only because of scaling still has a_5 from its minimal model."""
    assert a_p(CURVE_37A1.scaled(5), 5) == -2


def test_supersingular_detection() -> None:
    assert is_supersingular(Curve.short(0, 1), 5)
    assert not is_supersingular(CURVE_37A1, 5)


def test_good_reduction_at_small_primes() -> None:
    assert has_good_reduction(CURVE_37A1, 2)
    assert not has_good_reduction(CURVE_11A1, 11)


def test_surjectivity_of_37a1() -> None:
    verdict = surjectivity_test(CURVE_37A1, 5, aux_bound=1000)
    assert verdict.tag == "Surjective"
    assert verdict.surviving == []
    assert all(verdict.witnesses[family] for family in FAMILIES)


def test_11a1_looks_reducible() -> None:
    verdict = surjectivity_test(CURVE_11A1, 5, aux_bound=1000)
    assert verdict.tag == "NonSurjectiveSuspected"
    assert verdict.suspected == "Borel"
    assert "Borel" in verdict.surviving


def test_cm_curve_lies_in_a_cartan_normalizer() -> None:
    verdict = surjectivity_test(Curve.short(0, 1), 7, aux_bound=1000)
    assert verdict.tag == "NonSurjectiveSuspected"
    assert "Borel" not in verdict.surviving
    assert "split Cartan normalizer" in verdict.surviving


def test_too_few_signatures_is_undetermined() -> None:
    verdict = surjectivity_test(CURVE_37A1, 5, aux_bound=100, min_signatures=50)
    assert verdict.tag == "Undetermined"


def test_sieve_parameter_checks() -> None:
    with pytest.raises(InvalidParams):
        surjectivity_test(CURVE_37A1, 5, aux_bound=10)
    with pytest.raises(SmallPrimeUnsupported):
        surjectivity_test(CURVE_37A1, 3)


def test_hypotheses_for_37a1() -> None:
    report = check_hypotheses(CURVE_37A1, 5, 2, sha_dim=3)
    assert [v.status for v in report.verdicts] == ["Satisfied"] * 4
    assert report.case == "A"
    assert report.a_p == -2
    assert report.bound is not None and report.bound.bound == 2
    assert report.conclusion is not None
    assert "conditional on the supplied Sha dimension" in report.conclusion
    assert report.exit_status == 0


def test_conclusion_withheld_without_sha_dimension() -> None:
    report = check_hypotheses(CURVE_37A1, 5, 2)
    assert report.all_satisfied
    assert report.conclusion is None
    assert report.message == "supply --sha-dim ≥ 3"


def test_hypotheses_for_11a1() -> None:
    report = check_hypotheses(CURVE_11A1, 5, 1)
    verdict = report.verdict("c′")
    assert verdict.status == "Violated"
    assert "(c′) violated at l=11" in verdict.evidence
    assert report.exit_status == 1
    assert report.conclusion is None


def test_bad_reduction_at_p_makes_wild_check_vacuous() -> None:
    report = check_hypotheses(CURVE_11A1, 11, 1, aux_bound=200)
    assert report.verdict("a′").status == "Violated"
    assert report.verdict("b′").status == "Satisfied"
    assert report.case is None


def test_hypotheses_need_weight_in_range() -> None:
    with pytest.raises(InvalidJ):
        check_hypotheses(CURVE_37A1, 5, 4)


def test_valuation_at_p_is_left_to_good_reduction_check() -> None:
    """y^2 + xy = x^3 + 5^5 has v_5(j) = -5, which (a′) reports and (c′) does not."""
    curve = Curve(1, 0, 0, 0, 5**5)
    assert curve.invariants.j_valuation(5) == -5
    report = check_hypotheses(curve, 5, 1, aux_bound=200)
    assert report.verdict("a′").status == "Violated"
    tate = report.verdict("c′")
    assert tate.status == "Satisfied"
    assert "l=5" not in tate.evidence
    assert all(step.values.get("l") != 5 for step in report.trace if step.key == "tate-unramified-at-l")


POTENTIALLY_MULTIPLICATIVE = ("MultiplicativeSplit", "MultiplicativeNonSplit", "AdditivePotentiallyMultiplicative")


def _valuation(x: int, ell: int) -> int:
    x, v = abs(x), 0
    while x % ell == 0:
        x //= ell
        v += 1
    return v


@pytest.mark.parametrize("coefficients", CURVE_CORPUS)
def test_reduction_type_tracks_j_valuation(coefficients: tuple[int, int, int, int, int]) -> None:
    """At l ≥ 5 the reduction is potentially multiplicative exactly when v_l(j) < 0."""
    inv = Curve(*coefficients).invariants
    for ell in (q for q in factorint(abs(inv.disc)) if q >= 5):
        local = reduction_at(Curve(*coefficients), ell)
        negative = inv.c4 != 0 and 3 * _valuation(inv.c4, ell) < _valuation(inv.disc, ell)
        assert (local.tag in POTENTIALLY_MULTIPLICATIVE) == negative, f"l={ell}"
        if local.tag.startswith("Multiplicative"):
            assert 3 * _valuation(inv.c4, ell) - _valuation(inv.disc, ell) == -local.v_disc

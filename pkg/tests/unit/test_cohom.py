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

"""H^1 and H^2 by cocycle solving, the vanishing criterion and inflation-restriction."""

import itertools

import pytest

from galrep.cohom import (
    CohomologyReport,
    VanishingWitness,
    h1_bruteforce,
    h2_bruteforce,
    inflation_restriction_check,
    inflation_restriction_dims,
    vanishing_criterion,
)
from galrep.errors import InvalidParams, NotNormal
from galrep.grpmod import GModule, MatrixGroup, borel, gl2
from galrep.zring import ModularMatrix, Modulus

F3 = Modulus(3, 1)


def _cyclic_of_order_three() -> MatrixGroup:
    return MatrixGroup(F3, [ModularMatrix.from_rows(F3, [[1, 1], [0, 1]])], name="C3")


def _s3_shaped() -> MatrixGroup:
    return MatrixGroup(
        F3,
        [
            ModularMatrix.from_rows(F3, [[1, 1], [0, 1]]),
            ModularMatrix.from_rows(F3, [[1, 0], [0, 2]]),
        ],
        name="S3",
    )


def _cocycles_by_enumeration(group: MatrixGroup, module: GModule) -> int:
    """Number of maps f: G -> V with f(gh) = f(g) + g·f(h), by listing every map."""
    p, d = module.modulus.p, module.rank
    elements = group.closure().elements
    index = {g: k for k, g in enumerate(elements)}
    rho = [module.matrix_of(g) for g in elements]
    vectors = list(itertools.product(range(p), repeat=d))
    count = 0
    for values in itertools.product(vectors, repeat=len(elements)):
        ok = True
        for a, g in enumerate(elements):
            for b, h in enumerate(elements):
                lhs = values[index[g @ h]]
                moved = rho[a].apply(values[b])
                rhs = tuple((x + y) % p for x, y in zip(values[a], moved, strict=True))
                if lhs != rhs:
                    ok = False
                    break
            if not ok:
                break
        count += ok
    return count


def test_cyclic_group_acting_trivially() -> None:
    """Z/3 on F_3 trivially: H^1 = Hom(Z/3, F_3) is one-dimensional."""
    group = _cyclic_of_order_three()
    module = GModule.trivial(group)
    report = h1_bruteforce(group, module)
    assert (report.z1, report.b1, report.h1) == (1, 0, 1)
    assert _cocycles_by_enumeration(group, module) == 3**report.z1


def test_sign_action_has_no_h1() -> None:
    """Z/2 acting by -1 on F_3."""
    group = MatrixGroup(F3, [ModularMatrix.scalar(F3, 2, 2)], name="C2")
    module = GModule.from_matrices(group, [ModularMatrix.scalar(F3, 1, 2)], label="sign")
    report = h1_bruteforce(group, module)
    assert report.h1 == 0
    assert report.b1 == 1
    assert _cocycles_by_enumeration(group, module) == 3**report.z1


CYCLIC_CASES = [
    (Modulus(5), [[4]], 2),
    (Modulus(5), [[2]], 4),
    (Modulus(5), [[1, 1], [0, 1]], 5),
    (Modulus(3), [[1, 1], [0, 1]], 3),
    (Modulus(7), [[2]], 3),
]


@pytest.mark.parametrize("modulus, rows, order", CYCLIC_CASES)
def test_cyclic_trivial_h1_depends_on_divisibility(modulus: Modulus, rows: list[list[int]], order: int) -> None:
    """A cyclic group of order k acting trivially on F_p has h1 = 1 iff p | k."""
    group = MatrixGroup(modulus, [ModularMatrix.from_rows(modulus, rows)])
    assert group.order() == order
    report = h1_bruteforce(group, GModule.trivial(group))
    assert report.h1 == (1 if order % modulus.p == 0 else 0)


def test_gl2_f3_standard_module() -> None:
    group = gl2(3)
    module = GModule.symmetric_power(group, 1)
    assert h1_bruteforce(group, module).h1 == 0
    assert vanishing_criterion(group, module) is not None


def test_tree_and_pairs_methods_agree() -> None:
    group = _s3_shaped()
    for j in range(3):
        module = GModule.symmetric_power(group, j)
        tree = h1_bruteforce(group, module, method="tree")
        pairs = h1_bruteforce(group, module, method="pairs")
        assert (tree.z1, tree.b1, tree.h1) == (pairs.z1, pairs.b1, pairs.h1)


def test_unknown_method_is_rejected() -> None:
    group = _cyclic_of_order_three()
    with pytest.raises(InvalidParams):
        h1_bruteforce(group, GModule.trivial(group), method="cayley")  # type: ignore[arg-type]


def test_level_one_only() -> None:
    modulus = Modulus(3, 2)
    group = MatrixGroup(modulus, [ModularMatrix.scalar(modulus, 2, 8)])
    with pytest.raises(InvalidParams):
        h1_bruteforce(group, GModule.trivial(group))


def test_h2_of_small_cyclic_groups() -> None:
    """H^2(Z/3, F_3) = F_3 and H^2(Z/2, F_3(-1)) = 0."""
    group = _cyclic_of_order_three()
    report = h2_bruteforce(group, GModule.trivial(group))
    assert (report.h1, report.h2) == (1, 1)

    sign_group = MatrixGroup(F3, [ModularMatrix.scalar(F3, 2, 2)])
    sign = GModule.from_matrices(sign_group, [ModularMatrix.scalar(F3, 1, 2)])
    assert h2_bruteforce(sign_group, sign).h2 == 0


def test_vanishing_criterion_examples() -> None:
    group = gl2(5)
    witness = vanishing_criterion(group, GModule.symmetric_power(group, 2))
    assert witness is not None
    assert witness.kind == "central"
    assert witness.description == "<2I>"
    assert witness.order == 4

    assert vanishing_criterion(group, GModule.symmetric_power(group, 4)) is None
    assert vanishing_criterion(group, GModule.trivial(group)) is None


def test_witness_agrees_with_full_solve() -> None:
    """Wherever a witness exists the solved H^1 is zero."""
    group = gl2(3)
    for j in range(3):
        for twist in range(2):
            module = GModule.symmetric_power(group, j, twist=twist)
            if vanishing_criterion(group, module) is not None:
                assert h1_bruteforce(group, module).h1 == 0


def _conjugated(group: MatrixGroup, x: ModularMatrix) -> MatrixGroup:
    x_inv = x.inverse()
    return MatrixGroup(group.modulus, [x @ g @ x_inv for g in group.generators], name=f"{group.name}^x")


@pytest.mark.parametrize("p, j, twist", [(3, 0, 1), (3, 1, 0), (3, 2, 0), (5, 0, 0), (5, 1, 0), (5, 2, 1), (5, 3, 0)])
def test_h1_survives_conjugating_the_generators(p: int, j: int, twist: int) -> None:
    mod = Modulus(p, 1)
    x = ModularMatrix.from_rows(mod, [[1, 0], [1, 1]]) @ ModularMatrix.from_rows(mod, [[2, 1], [1, 1]])
    group = borel(p)
    moved = _conjugated(group, x)
    expected = h1_bruteforce(group, GModule.symmetric_power(group, j, twist=twist))
    report = h1_bruteforce(moved, GModule.symmetric_power(moved, j, twist=twist))
    assert (report.order, report.z1, report.b1, report.h1) == (
        expected.order,
        expected.z1,
        expected.b1,
        expected.h1,
    )


def _groups_up_to_order_twenty() -> list[tuple[MatrixGroup, tuple[int, ...]]]:
    """Small matrix groups with the weights whose H^2 systems stay desk-sized."""
    f5 = Modulus(5, 1)
    unipotent = ModularMatrix.from_rows(f5, [[1, 1], [0, 1]])
    return [
        (MatrixGroup(F3, [ModularMatrix.from_rows(F3, [[0, 2], [1, 0]])], name="C4"), (0, 1, 2)),
        (borel(3), (0, 1, 2)),
        (MatrixGroup(f5, [ModularMatrix.scalar(f5, 2, 2)], name="<2I>"), (0, 1, 2, 3)),
        (MatrixGroup(f5, [ModularMatrix.diagonal(f5, [2, 3])], name="<diag(2,3)>"), (0, 1, 2, 3)),
        (MatrixGroup(f5, [unipotent, ModularMatrix.scalar(f5, 2, 4)], name="C10"), (0, 1, 2)),
        (MatrixGroup(f5, [unipotent, ModularMatrix.scalar(f5, 2, 2)], name="C20"), (1,)),
    ]


@pytest.mark.slow
def test_witness_forces_vanishing_h2() -> None:
    """Every vanishing witness found on small groups comes with H^1 = H^2 = 0."""
    witnessed = 0
    for group, weights in _groups_up_to_order_twenty():
        assert group.order() <= 32
        for j in weights:
            for twist in (0, 1):
                module = GModule.symmetric_power(group, j, twist=twist)
                if vanishing_criterion(group, module) is None:
                    continue
                witnessed += 1
                report = h2_bruteforce(group, module)
                assert (report.h1, report.h2) == (0, 0), f"{group.name}, {module.label}"
    assert witnessed >= 10


def test_supplied_candidate_must_be_normal() -> None:
    group = gl2(3)
    module = GModule.trivial(group)
    with pytest.raises(NotNormal):
        vanishing_criterion(group, module, candidates=[[ModularMatrix.from_rows(F3, [[1, 1], [0, 1]])]])


def test_report_rejects_witness_with_nonzero_h1() -> None:
    witness = VanishingWitness(kind="central", description="<2I>", generators=[], order=2)
    with pytest.raises(ValueError):
        CohomologyReport(group="G", module="V", order=2, z1=1, b1=0, h1=1, witness=witness)


def test_inflation_restriction_with_prime_to_p_kernel() -> None:
    """H = ⟨-I⟩ has order 2, so every term vanishes for F_3^2."""
    group = gl2(3)
    module = GModule.symmetric_power(group, 1)
    report = inflation_restriction_dims(group, [ModularMatrix.scalar(F3, 2, 2)], module)
    assert (report.h1_quotient, report.h1_group, report.h1_normal_invariant) == (0, 0, 0)
    assert report.holds
    assert report.normal_order * report.quotient_order == 48


def test_inflation_restriction_for_whole_group() -> None:
    group = _s3_shaped()
    module = GModule.symmetric_power(group, 1)
    report = inflation_restriction_dims(group, list(group.generators), module)
    assert report.h1_quotient == 0
    assert report.h1_group == report.h1_normal_invariant
    assert report.quotient_order == 1


def test_inflation_restriction_chain_for_s3() -> None:
    group = _s3_shaped()
    unipotent = [ModularMatrix.from_rows(F3, [[1, 1], [0, 1]])]
    for j in range(3):
        module = GModule.symmetric_power(group, j)
        assert inflation_restriction_check(group, unipotent, module)
        report = inflation_restriction_dims(group, unipotent, module)
        assert report.normal_order == 3
        assert report.h1_group == h1_bruteforce(group, module).h1


def test_inflation_restriction_needs_normal_subgroup() -> None:
    group = gl2(3)
    with pytest.raises(NotNormal):
        inflation_restriction_dims(
            group, [ModularMatrix.from_rows(F3, [[1, 1], [0, 1]])], GModule.symmetric_power(group, 1)
        )


"""BDE engine: case split, smoothness determinant, lift, cubic analysis."""

import math

import numpy as np
import pytest
from edgefol.bde import (
    BdeField,
    CHART_P,
    CHART_Q,
    Case,
    CubicAnalysis,
    RootData,
    TopClass,
    classify_type2,
    cubic_analysis,
    cubic_analysis_to_json,
    delta_and_case,
    discriminant_poly,
    hessian_det_origin,
    lift,
    lifted_field,
    mmfd_determinant,
    mmfd_matrix,
    restricted_jacobian,
    solve_cubic_real,
    unique_direction_at_origin,
)
from edgefol.errors import (
    CommonRoot,
    DegenerateDiscriminant,
    DiscriminantNearZero,
    HessianNonNegative,
    InvariantViolation,
)
from edgefol.foliations import FoliationKind, build_geometric_bde
from edgefol.invariants import cubic_discriminant
from edgefol.jets import EdgeJet, sample_generic_jet
from edgefol.poly import Poly2

U = Poly2.monomial(1, 0)
V = Poly2.monomial(0, 1)
ONE = Poly2.const(1.0)


def bde(a, b, c):
    return BdeField(a, b, c)


# --- delta_and_case ---

def test_case1_regular():
    _, case = delta_and_case(bde(ONE, Poly2(), Poly2.const(-1.0)))
    assert case is Case.CASE1_REGULAR


def test_case1_discriminant_empty_directions():
    _, case = delta_and_case(bde(ONE, Poly2(), ONE))
    assert case is Case.CASE1_DISCRIMINANT


def test_case2_transverse():
    _, case = delta_and_case(bde(ONE, Poly2(), U))
    assert case is Case.CASE2_TRANSVERSE


def test_case2_tangent():
    # delta = -v, unique direction (1, 0) runs along {delta = 0}
    _, case = delta_and_case(bde(ONE, Poly2(), V))
    assert case is Case.CASE2_TANGENT


def test_case3_with_delta():
    delta, case = delta_and_case(bde(V, U, V))
    assert case is Case.CASE3
    assert delta == U * U - V * V


def test_degenerate_discriminant_raises():
    with pytest.raises(DegenerateDiscriminant):
        delta_and_case(bde(ONE, Poly2(), U * U))


def test_zero_bde_rejected():
    with pytest.raises(ValueError):
        delta_and_case(bde(Poly2(), Poly2(), Poly2()))


# --- mmfd determinant ---

def test_mmfd_synthetic_against_numpy():
    field = bde(V, U, V)
    mat = np.array(mmfd_matrix(field), dtype=float)
    assert math.isclose(mmfd_determinant(field), float(np.linalg.det(mat)),
                        rel_tol=1e-12)
    assert mmfd_determinant(field) == 4.0


def test_mmfd_asymptotic_closed_form():
    jet = sample_generic_jet(7, "edge_degenerate")
    det = mmfd_determinant(build_geometric_bde(jet, FoliationKind.ASYMPTOTIC))
    expect = (jet.b30 - jet.a20 * jet.b12) ** 2 * jet.b03**2 / 4
    assert math.isclose(det, expect, rel_tol=1e-10)


def test_mmfd_characteristic_closed_form():
    jet = sample_generic_jet(7, "edge_degenerate")
    det = mmfd_determinant(build_geometric_bde(jet, FoliationKind.CHARACTERISTIC))
    expect = jet.b03**6 * (jet.a20 * jet.b12 - jet.b30) ** 2 / 64
    assert math.isclose(det, expect, rel_tol=1e-10)


# --- lifted field ---

def test_lifted_field_vanishing_fp_kills_base_motion():
    eq = lift(bde(ONE, Poly2(), U), CHART_P)
    xi = lifted_field(eq, 0.0, 0.0, 0.0)   # F = p^2 + u, F_p = 2p = 0
    assert xi[0] == 0.0 and xi[1] == 0.0
    assert xi[2] == -1.0


def test_lifted_field_tangency_identity():
    rng = np.random.default_rng(3)
    for _ in range(30):
        polys = [Poly2({(i, j): rng.normal() for i in range(3)
                        for j in range(3)}) for _ in range(3)]
        field = BdeField(*polys)
        for chart in (CHART_P, CHART_Q):
            eq = lift(field, chart)
            u, v, p = rng.normal(size=3)
            grad = eq.gradient(u, v, p)
            xi = eq.field(u, v, p)
            dot = grad[0] * xi[0] + grad[1] * xi[1] + grad[2] * xi[2]
            scale = 1.0 + np.linalg.norm(grad) * np.linalg.norm(xi)
            assert abs(dot) / scale < 1e-13


def test_unique_direction_for_fold_is_dv():
    field = bde(Poly2.monomial(0, 1, 0.5), U, Poly2.const(2.0) + V)
    # origin values (0, 0, 2): direction (-b, c) = (0, 2) ~ dv
    d = unique_direction_at_origin(field)
    assert d[0] == 0.0 and d[1] != 0.0


# --- cubic solver ---

def test_cubic_solver_against_numpy_roots():
    rng = np.random.default_rng(0)
    for _ in range(500):
        coeffs = rng.uniform(-2, 2, size=4)
        if abs(coeffs[0]) < 1e-2:
            continue
        d = cubic_discriminant(*coeffs)
        if abs(d) / np.max(np.abs(coeffs)) ** 4 < 1e-8:
            continue
        mine = solve_cubic_real(*coeffs)
        ref = sorted(r.real for r in np.roots(coeffs) if abs(r.imag) < 1e-9)
        assert len(mine) == len(ref)
        for a, b in zip(mine, ref):
            assert math.isclose(a, b, rel_tol=1e-9, abs_tol=1e-9)


def test_sign_of_discriminant_predicts_root_count():
    rng = np.random.default_rng(123)
    checked = 0
    while checked < 10_000:
        coeffs = rng.uniform(-2, 2, size=4)
        if abs(coeffs[0]) < 1e-3:
            continue
        d = cubic_discriminant(*coeffs)
        if abs(d) / np.max(np.abs(coeffs)) ** 4 < 1e-9:
            continue
        roots = solve_cubic_real(*coeffs)
        assert len(roots) == (3 if d > 0 else 1)
        checked += 1


# --- cubic analysis ---

def asymptotic_eq(jet):
    return lift(build_geometric_bde(jet, FoliationKind.ASYMPTOTIC), CHART_Q)


def test_cubic_analysis_one_saddle_worked_value():
    jet = EdgeJet(0.0, 0.0, 0.0, 1.0, 0.0, 1.0)
    analysis = cubic_analysis(asymptotic_eq(jet))
    assert analysis.phi == (1.0, 0.0, 0.0, 0.5)          # p^3 + 1/2
    assert analysis.D < 0
    root = analysis.roots[0]
    assert math.isclose(root, -2.0 ** (-1.0 / 3.0), rel_tol=1e-12)
    data = analysis.per_root[0]
    assert data.alpha > 0 and data.minus_phi_prime < 0
    assert data.lifted_type == "saddle"


def test_cubic_analysis_three_saddles_worked_values():
    jet = EdgeJet(0.0, 0.0, 0.0, 0.1, -1.0, 1.0)
    analysis = cubic_analysis(asymptotic_eq(jet))
    assert analysis.phi == (0.1, 0.0, -2.0, 0.5)
    assert analysis.D > 0
    # frozen from the numpy companion-matrix oracle
    expected = (-4.592253272822073, 0.25078866710346487, 4.341464605718608)
    oracle = sorted(np.roots(analysis.phi).real)
    for mine, frozen, ref in zip(analysis.roots, expected, oracle):
        assert math.isclose(mine, frozen, rel_tol=1e-12)
        assert math.isclose(mine, ref, rel_tol=1e-10)
    assert [d.lifted_type for d in analysis.per_root] == ["saddle"] * 3


def test_cubic_analysis_triple_root_rejected():
    # phi = p^3 exactly: C = u gives phi = (1, 0, 0, 0)
    field = bde(Poly2(), Poly2(), U)
    with pytest.raises(DiscriminantNearZero):
        cubic_analysis(lift(field, CHART_Q))


def test_cubic_analysis_common_root_rejected():
    # phi = p(p+1)(p+2), alpha = 2p(p+1): shared roots
    field = bde(Poly2.monomial(1, 0, 2.0), U, U + V)
    with pytest.raises(CommonRoot):
        cubic_analysis(lift(field, CHART_Q))


def test_cubic_analysis_dual_chart_fallback():
    # chart-q leading coefficient C_u = 0 (a direction at infinity): the
    # analysis switches to chart p, where the cubic is (1, 1, 2, 0)
    field = bde(U + V, Poly2.monomial(1, 0, 0.5), V)
    eq = lift(field, CHART_Q)
    assert eq.phi_coefficients()[0] == 0.0
    analysis = cubic_analysis(eq)
    assert analysis.chart == CHART_P
    assert analysis.phi == (1.0, 1.0, 2.0, 0.0)
    assert analysis.roots == (0.0,)
    assert analysis.per_root[0].alpha != 0.0


def test_restricted_jacobian_eigenvalues_random_case3():
    rng = np.random.default_rng(7)
    done = 0
    while done < 25:
        polys = []
        for _ in range(3):
            terms = {(i, j): float(rng.uniform(-2, 2))
                     for i in range(3) for j in range(3)}
            terms.pop((0, 0), None)   # all coefficients vanish at the origin
            polys.append(Poly2(terms))
        eq = lift(BdeField(*polys), CHART_Q)
        try:
            analysis = cubic_analysis(eq)
        except (DiscriminantNearZero, CommonRoot):
            continue
        for data in analysis.per_root:
            if abs(data.alpha + data.minus_phi_prime) < 1e-3:
                continue   # nearly resonant: eigensolver ordering unstable
            jac = restricted_jacobian(eq, data.root)
            eigs = sorted(np.linalg.eigvals(jac).real)
            expected = sorted([data.alpha, data.minus_phi_prime])
            for e, x in zip(eigs, expected):
                assert abs(e - x) <= 1e-6 * max(1.0, abs(x))
        done += 1


# --- classifier ---

def _fake_analysis(products, d_sign):
    per_root = tuple(
        RootData(root=float(k), alpha=1.0, minus_phi_prime=p, eigen_product=p,
                 lifted_type="saddle" if p < 0 else "node")
        for k, p in enumerate(products)
    )
    return CubicAnalysis(chart=CHART_Q, phi=(1, 0, 0, 0), alpha=(1, 0, 0),
                         D=d_sign, D_normalized=d_sign,
                         roots=tuple(float(k) for k in range(len(products))),
                         per_root=per_root)


def test_classify_type2_mapping():
    assert classify_type2(_fake_analysis([-1, -1, -1], 1.0), -1.0) \
        is TopClass.THREE_SADDLES
    assert classify_type2(_fake_analysis([-1, -1, 1], 1.0), -1.0) \
        is TopClass.TWO_SADDLES_ONE_NODE
    assert classify_type2(_fake_analysis([-1, 1, 1], 1.0), -1.0) \
        is TopClass.ONE_SADDLE_TWO_NODES
    assert classify_type2(_fake_analysis([-1], -1.0), -1.0) is TopClass.ONE_SADDLE
    assert classify_type2(_fake_analysis([1], -1.0), -1.0) is TopClass.ONE_NODE


def test_classify_type2_all_positive_impossible():
    with pytest.raises(InvariantViolation):
        classify_type2(_fake_analysis([1, 1, 1], 1.0), -1.0)


def test_classify_type2_requires_negative_hessian():
    with pytest.raises(HessianNonNegative):
        classify_type2(_fake_analysis([-1], -1.0), 0.5)


def test_saddle_count_always_matches_negative_products():
    rng = np.random.default_rng(21)
    for seed in range(200):
        jet = sample_generic_jet(seed, "edge_degenerate")
        for kind in (FoliationKind.ASYMPTOTIC, FoliationKind.CHARACTERISTIC):
            eq = lift(build_geometric_bde(jet, kind), CHART_Q)
            analysis = cubic_analysis(eq)
            delta = discriminant_poly(eq.bde)
            top = classify_type2(analysis, hessian_det_origin(delta))
            negatives = sum(1 for d in analysis.per_root if d.eigen_product < 0)
            saddle_count = {
                TopClass.THREE_SADDLES: 3,
                TopClass.TWO_SADDLES_ONE_NODE: 2,
                TopClass.ONE_SADDLE_TWO_NODES: 1,
                TopClass.ONE_SADDLE: 1,
                TopClass.ONE_NODE: 0,
            }[top]
            assert saddle_count == negatives


def test_analysis_serialization():
    import json
    jet = EdgeJet(0.0, 0.0, 0.0, 0.1, -1.0, 1.0)
    analysis = cubic_analysis(asymptotic_eq(jet))
    data = json.loads(cubic_analysis_to_json(analysis))
    assert data["chart"] == "q"
    assert len(data["roots"]) == 3
    assert all(r["lifted_type"] == "saddle" for r in data["per_root"])
    assert "convention_note" in data

"""Curve tracing, portraits, sector counts, cusp detection."""

import math

import numpy as np
import pytest

from edgefol.bde import BdeField, CHART_Q, Case, cubic_analysis, lift
from edgefol.errors import ChartBreakdown, SeedOffSurface, WindowTooSmall
from edgefol.foliations import FoliationKind, build_geometric_bde
from edgefol.geometry import surface_polynomials
from edgefol.jets import EdgeJet, sample_generic_jet
from edgefol.poly import CompiledPolySet, Poly2
from edgefol.tracer import (
    CuspClass,
    TraceConfig,
    detect_cusp_order,
    direction_roots,
    integrate_lifted,
    local_sector_count,
    project_to_surface,
    trace_portrait,
)

U = Poly2.monomial(1, 0)
V = Poly2.monomial(0, 1)
ONE = Poly2.const(1.0)

THREE_SADDLES_JET = EdgeJet(0.0, 0.0, 0.0, 0.1, -1.0, 1.0)
ONE_SADDLE_JET = EdgeJet(0.0, 0.0, 0.0, 1.0, 0.0, 1.0)


def test_constant_bde_traces_diagonal_line():
    eq = lift(BdeField(ONE, Poly2(), Poly2.const(-1.0)), "p")
    curve = integrate_lifted(eq, (0.0, 0.0, 1.0), 1e-3, 4000, 0.5)
    assert np.max(np.abs(curve.samples[:, 0] - curve.samples[:, 1])) < 1e-12
    assert np.max(np.abs(curve.samples[:, 2] - 1.0)) < 1e-12
    assert curve.termination == "box_exit"
    assert curve.termination_backward == "box_exit"
    # clipped endpoints land on the box boundary
    assert math.isclose(max(abs(curve.samples[0, 0]), abs(curve.samples[0, 1])),
                        0.5, rel_tol=1e-9)


def test_on_surface_residual_bound():
    jet = sample_generic_jet(12, "edge_degenerate")
    for kind in (FoliationKind.ASYMPTOTIC, FoliationKind.CHARACTERISTIC,
                 FoliationKind.LINES_OF_CURVATURE):
        portrait = trace_portrait(build_geometric_bde(jet, kind),
                                  TraceConfig(max_steps=3000))
        assert portrait.curves
        assert max(c.max_residual for c in portrait.curves) <= 1e-8


def test_seed_off_surface_rejected():
    eq = lift(BdeField(ONE, Poly2(), Poly2.const(-1.0)), "p")
    with pytest.raises(SeedOffSurface):
        integrate_lifted(eq, (0.0, 0.0, 0.5), 1e-3, 100, 0.5)


def test_termination_at_singular_point():
    # fiber seed between two roots: both directions converge to a zero of
    # the lifted field and stop within the singular radius
    eq = lift(build_geometric_bde(THREE_SADDLES_JET, FoliationKind.ASYMPTOTIC),
              CHART_Q)
    analysis = cubic_analysis(eq)
    curve = integrate_lifted(eq, (0.0, 0.0, 0.0), 1e-3, 40000, 0.5,
                             singular_points=analysis.roots)
    assert curve.termination == "singular_point"
    assert curve.termination_backward == "singular_point"
    ends = sorted([curve.samples[0, 2], curve.samples[-1, 2]])
    assert math.isclose(ends[0], analysis.roots[0], abs_tol=2e-5)
    assert math.isclose(ends[1], analysis.roots[1], abs_tol=2e-5)


def test_termination_near_single_saddle_despite_fiber_escape():
    # seeded near the unique zero: the inward direction terminates at it;
    # the outward fiber direction escapes the chart, reported as breakdown
    eq = lift(build_geometric_bde(ONE_SADDLE_JET, FoliationKind.ASYMPTOTIC),
              CHART_Q)
    root = -2.0 ** (-1.0 / 3.0)
    with pytest.raises(ChartBreakdown) as info:
        integrate_lifted(eq, (0.0, 0.0, -0.7), 1e-3, 400000, 0.5,
                         singular_points=(root,))
    partial = info.value.partial
    assert "singular_point" in (partial.termination,
                                partial.termination_backward)
    end = partial.samples[-1] if partial.termination == "singular_point" \
        else partial.samples[0]
    assert math.isclose(end[2], root, abs_tol=2e-5)


def test_chart_breakdown_raises_with_partial():
    # on the exceptional fiber the chart variable escapes to infinity
    eq = lift(build_geometric_bde(THREE_SADDLES_JET, FoliationKind.ASYMPTOTIC),
              CHART_Q)
    with pytest.raises(ChartBreakdown) as info:
        integrate_lifted(eq, (0.0, 0.0, 5.0), 1e-2, 200000, 0.5)
    assert info.value.partial is not None
    assert info.value.state is not None


def test_step_halving_convergence():
    field = BdeField(ONE, Poly2.monomial(1, 0, 0.3),
                     Poly2.const(-1.0) + Poly2.monomial(0, 1, 0.4))
    eq = lift(field, "p")
    coarse = integrate_lifted(eq, (0.0, 0.0, 1.0), 1e-3, 8000, 0.5)
    fine = integrate_lifted(eq, (0.0, 0.0, 1.0), 5e-4, 16000, 0.5)
    assert np.max(np.abs(coarse.samples[-1] - fine.samples[-1])) <= 1e-6
    assert np.max(np.abs(coarse.samples[0] - fine.samples[0])) <= 1e-6


def test_direction_roots_cover_both_branches():
    field = BdeField(ONE, Poly2(), Poly2.const(-1.0))
    seeds = direction_roots(field, 0.1, 0.2)
    assert len(seeds) == 2
    values = sorted(v for _, v in seeds)
    assert np.allclose(values, [-1.0, 1.0])
    assert direction_roots(BdeField(ONE, Poly2(), ONE), 0.0, 0.0) == []


def test_portrait_three_saddles_structure():
    portrait = trace_portrait(
        build_geometric_bde(THREE_SADDLES_JET, FoliationKind.ASYMPTOTIC),
        TraceConfig(max_steps=4000))
    assert portrait.case is Case.CASE3
    assert len(portrait.singular_points) == 3
    assert all(t == "saddle" for _, t in portrait.singular_points)
    assert len(portrait.separatrices) == 12
    assert portrait.discriminant_locus


def test_portrait_cusp_family_structure():
    portrait = trace_portrait(BdeField(ONE, Poly2(), U),
                              TraceConfig(max_steps=2500))
    assert portrait.case is Case.CASE2_TRANSVERSE
    assert portrait.singular_points == ()
    assert portrait.separatrices == []
    assert portrait.curves
    # discriminant locus is the line u = 0
    for line in portrait.discriminant_locus:
        assert np.max(np.abs(line[:, 0])) < 1e-9


def test_portrait_regular_pair_empty_locus():
    portrait = trace_portrait(BdeField(ONE, Poly2(), Poly2.const(-1.0)),
                              TraceConfig(max_steps=2500, seeds_per_side=8))
    assert portrait.case is Case.CASE1_REGULAR
    assert portrait.discriminant_locus == []
    assert portrait.curves


def test_sector_counts_match_types_on_worked_jets():
    for jet in (THREE_SADDLES_JET, ONE_SADDLE_JET):
        for kind in (FoliationKind.ASYMPTOTIC, FoliationKind.CHARACTERISTIC):
            field = build_geometric_bde(jet, kind)
            analysis = cubic_analysis(lift(field, CHART_Q))
            for i, data in enumerate(analysis.per_root):
                count = local_sector_count(field, analysis, i)
                assert count.matches(data.lifted_type), (jet, kind, i)
                assert count.sectors == (4 if data.lifted_type == "saddle" else 2)


def test_sector_counts_find_nodes():
    """Hunt a jet with a node among the sampled ones and check its fans."""
    found = False
    for seed in range(60):
        jet = sample_generic_jet(seed, "edge_degenerate")
        field = build_geometric_bde(jet, FoliationKind.CHARACTERISTIC)
        analysis = cubic_analysis(lift(field, CHART_Q))
        for i, data in enumerate(analysis.per_root):
            if data.lifted_type == "node":
                count = local_sector_count(field, analysis, i)
                assert count.sectors == 2 and count.pattern == "node"
                found = True
                break
        if found:
            break
    assert found


# --- projection ---

def test_projection_first_coordinate_is_u():
    portrait = trace_portrait(
        build_geometric_bde(THREE_SADDLES_JET, FoliationKind.ASYMPTOTIC),
        TraceConfig(max_steps=1500, seeds_per_side=6))
    curves3d = project_to_surface(THREE_SADDLES_JET, portrait)
    for sc in curves3d:
        if sc.domain is not None and sc.kind != "edge":
            assert np.allclose(sc.points[:, 0], sc.domain[:, 0], atol=1e-12)


def test_projection_edge_curve_of_minimal_jet_is_axis():
    jet = EdgeJet(0.0, 0.0, 0.0, 0.0, 0.0, 1.0)
    portrait = trace_portrait(
        build_geometric_bde(jet, FoliationKind.LINES_OF_CURVATURE),
        TraceConfig(max_steps=600, seeds_per_side=4))
    curves3d = project_to_surface(jet, portrait)
    edge = [sc for sc in curves3d if sc.kind == "edge"]
    assert len(edge) == 1
    pts = edge[0].points
    assert np.allclose(pts[:, 1], 0.0) and np.allclose(pts[:, 2], 0.0)
    assert np.allclose(pts[:, 0], edge[0].domain[:, 0])


# --- cusp detection ---

def _curve(fn, n=121, half=0.02):
    t = np.linspace(-half, half, n)
    return np.stack([np.asarray(c, dtype=float) for c in fn(t)], axis=1), t


def test_detect_cusp_34():
    pts, t = _curve(lambda t: (t**3, t**4, 0 * t))
    assert detect_cusp_order(pts, t, 0.0) is CuspClass.CUSP_34


def test_detect_cusp_23():
    pts, t = _curve(lambda t: (t**2, t**3))
    assert detect_cusp_order(pts, t, 0.0) is CuspClass.CUSP_23


def test_detect_cusp_345():
    pts, t = _curve(lambda t: (t**3, t**4, t**5), half=0.05)
    assert detect_cusp_order(pts, t, 0.0) is CuspClass.CUSP_345


def test_detect_regular_point():
    pts, t = _curve(lambda t: (t, 2 * t, 0 * t))
    assert detect_cusp_order(pts, t, 0.0) is CuspClass.NO_CUSP


def test_detect_window_too_small():
    pts, t = _curve(lambda t: (t**2, t**3), n=30)
    with pytest.raises(WindowTooSmall):
        detect_cusp_order(pts, t, 0.0)


def test_composition_through_null_cusp_is_34():
    """f composed with an ordinary cusp whose second derivative spans the
    null direction is a (3,4)-cusp on the image."""
    jet = EdgeJet(0.7, -0.4, 0.9, 1.2, 0.3, 1.4)
    cset = CompiledPolySet(list(surface_polynomials(jet)))
    t = np.linspace(-0.06, 0.06, 201)
    gamma_u, gamma_v = t**3, t**2
    image = np.stack(cset.values(gamma_u, gamma_v), axis=1)
    assert detect_cusp_order(image, t, 0.0) is CuspClass.CUSP_34


def _edge_crossing_curve(jet, kind, u0=0.12, step=2e-4, max_steps=3000):
    eq = lift(build_geometric_bde(jet, kind), CHART_Q)
    return integrate_lifted(eq, (u0, 0.0, 0.0), step, max_steps, 0.5)


def _image_of(jet, curve):
    cset = CompiledPolySet(list(surface_polynomials(jet)))
    return np.stack(cset.values(curve.samples[:, 0], curve.samples[:, 1]),
                    axis=1)


def test_lc_curves_cross_edge_as_23_cusps_on_image():
    jet = sample_generic_jet(4)
    curve = _edge_crossing_curve(jet, FoliationKind.LINES_OF_CURVATURE)
    # the domain curve crosses v = 0 transversally
    assert curve.samples[:, 1].min() < 0 < curve.samples[:, 1].max()
    image = _image_of(jet, curve)
    got = detect_cusp_order(image, t0=float(curve.seed_sample), window=60)
    assert got is CuspClass.CUSP_23


def test_asymptotic_cusps_on_edge_are_34_on_image():
    jet = sample_generic_jet(4)     # b20 > 0.1 for this seed
    assert jet.b20 > 0.1
    for kind in (FoliationKind.ASYMPTOTIC, FoliationKind.CHARACTERISTIC):
        curve = _edge_crossing_curve(jet, kind)
        image = _image_of(jet, curve)
        got = detect_cusp_order(image, t0=float(curve.seed_sample), window=60)
        assert got is CuspClass.CUSP_34
        # while the domain projection shows the ordinary cusp of a fold
        domain = detect_cusp_order(curve.projected, t0=float(curve.seed_sample),
                                   window=60)
        assert domain is CuspClass.CUSP_23


def test_detect_cusp_ill_conditioned_window():
    from edgefol.errors import FitIllConditioned
    # two clumps of duplicated parameters: enough samples each side but a
    # rank-deficient Vandermonde
    t = np.concatenate([np.full(30, -1e-6), np.full(30, 1e-6)])
    pts = np.zeros((60, 2))
    with pytest.raises(FitIllConditioned):
        detect_cusp_order(pts, t, 0.0)

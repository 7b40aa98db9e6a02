"""The three geometric BDEs of a cuspidal edge and their classification.

All three tensors are assembled from the exact form polynomials with the
scaled normal nu2, cleared of positive functional factors (powers of |nu2|)
and of the structural factor v where one exists:

  lines of curvature:  A = (F*N2 - G*M2)/v,  2B = (E*N2 - G*L2)/v,
                       C = (E*M2 - F*L2)/v
  asymptotic:          (A, B, C) = (N2, M2, L2)
  characteristic:      the harmonic-mean-curvature tensor, quadratic in the
                       second-form data, divided by its overall factor v.

For the asymptotic and characteristic equations the limiting normal
curvature b20 decides everything at the origin: b20 != 0 gives a fold point
whose solutions are a family of cusps, b20 = 0 gives an all-coefficients-
vanish point governed by a cubic with closed-form coefficients in the jet.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

from . import invariants
from .bde import (
    BdeField,
    Case,
    CubicAnalysis,
    LiftedEquation,
    SIGN_CONVENTION_NOTE,
    TopClass,
    classify_type2,
    cubic_analysis,
    delta_and_case,
    hessian_det_origin,
    lift,
    per_root_to_dict,
)
from .errors import EdgefolError, PropositionHypothesisViolated
from .geometry import form_polynomials
from .jets import EdgeJet

DEFAULT_DEGREE_CAP = 6
HYPOTHESIS_TOL = 1e-9


class FoliationKind(str, Enum):
    LINES_OF_CURVATURE = "lc"
    ASYMPTOTIC = "asymptotic"
    CHARACTERISTIC = "characteristic"


def parse_kind(name: str) -> FoliationKind:
    aliases = {
        "lc": FoliationKind.LINES_OF_CURVATURE,
        "lines_of_curvature": FoliationKind.LINES_OF_CURVATURE,
        "curvature": FoliationKind.LINES_OF_CURVATURE,
        "asymptotic": FoliationKind.ASYMPTOTIC,
        "as": FoliationKind.ASYMPTOTIC,
        "characteristic": FoliationKind.CHARACTERISTIC,
        "ch": FoliationKind.CHARACTERISTIC,
    }
    try:
        return aliases[name.lower()]
    except KeyError:
        raise ValueError(f"unknown foliation kind {name!r}") from None


@lru_cache(maxsize=512)
def build_geometric_bde(jet: EdgeJet, kind: FoliationKind,
                        degree_cap: int = DEFAULT_DEGREE_CAP) -> BdeField:
    """Assemble the v-factored BDE of the requested foliation.

    Coefficients are exact polynomials truncated at total degree
    `degree_cap`; truncation happens after the structural division by v, so
    every retained coefficient is exact.
    """
    kind = FoliationKind(kind)
    fp = form_polynomials(jet)
    pre = degree_cap + 1
    E, F, G = fp.E.truncated(pre), fp.F.truncated(pre), fp.G.truncated(pre)
    L2, M2, N2 = fp.L2.truncated(pre), fp.M2.truncated(pre), fp.N2.truncated(pre)

    if kind is FoliationKind.ASYMPTOTIC:
        return BdeField(N2.truncated(degree_cap), M2.truncated(degree_cap),
                        L2.truncated(degree_cap), provenance="asymptotic")

    if kind is FoliationKind.LINES_OF_CURVATURE:
        A = (F * N2 - G * M2).truncated(pre + 1).divide_v()
        twoB = (E * N2 - G * L2).truncated(pre).divide_v()
        C = (E * M2 - F * L2).truncated(pre).divide_v()
        return BdeField(
            A.truncated(degree_cap),
            (twoB * _half_like(jet)).truncated(degree_cap),
            C.truncated(degree_cap),
            provenance="lc",
        )

    A = (2 * M2 * (G * M2 - F * N2) - N2 * (G * L2 - E * N2)).truncated(pre).divide_v()
    B = (M2 * (G * L2 + E * N2) - 2 * F * L2 * N2).truncated(pre).divide_v()
    C = (L2 * (G * L2 - E * N2) - 2 * M2 * (F * L2 - E * M2)).truncated(pre).divide_v()
    return BdeField(A.truncated(degree_cap), B.truncated(degree_cap),
                    C.truncated(degree_cap), provenance="characteristic")


def _half_like(jet):
    one = jet.b03 / jet.b03
    return one / 2


# --- closed-form analysis ---

def closed_form_cubic(jet: EdgeJet, kind: FoliationKind):
    kind = FoliationKind(kind)
    if kind is FoliationKind.ASYMPTOTIC:
        return invariants.asymptotic_cubic(jet.a20, jet.b30, jet.b12, jet.b03)
    if kind is FoliationKind.CHARACTERISTIC:
        return invariants.characteristic_cubic(jet.a20, jet.b30, jet.b12, jet.b03)
    raise ValueError("lines of curvature have no Type-2 cubic")


def closed_form_alpha(jet: EdgeJet, kind: FoliationKind):
    kind = FoliationKind(kind)
    if kind is FoliationKind.ASYMPTOTIC:
        return invariants.asymptotic_alpha(jet.a20, jet.b30, jet.b12, jet.b03)
    if kind is FoliationKind.CHARACTERISTIC:
        return invariants.characteristic_alpha(jet.a20, jet.b30, jet.b12, jet.b03)
    raise ValueError("lines of curvature have no Type-2 cubic")


def closed_form_discriminant(jet: EdgeJet, kind: FoliationKind):
    kind = FoliationKind(kind)
    if kind is FoliationKind.ASYMPTOTIC:
        return invariants.asymptotic_discriminant(jet.a20, jet.b30, jet.b12, jet.b03)
    if kind is FoliationKind.CHARACTERISTIC:
        return invariants.characteristic_discriminant(jet.a20, jet.b30, jet.b12, jet.b03)
    raise ValueError("lines of curvature have no Type-2 cubic")


def hypothesis_failures(jet: EdgeJet, kind: FoliationKind,
                        tol: float = HYPOTHESIS_TOL) -> list[str]:
    """Which of the Type-2 classification hypotheses fail for this jet.

    b20 is compared against the largest coefficient magnitude; the derived
    quantities use tol directly (the default lines up with the sampler's
    rejection margins, and the normalized discriminant is re-tested inside
    the cubic analysis itself).
    """
    scale = max(1.0, *(abs(getattr(jet, k))
                       for k in ("a20", "b20", "b30", "b12", "b03")))
    failed = []
    if abs(jet.b20) > tol * scale:
        failed.append("b20 = 0")
    deriv = invariants.normal_curvature_derivative(jet.a20, jet.b30, jet.b12)
    if abs(deriv) <= tol:
        failed.append("b30 - a20*b12 != 0")
    d = closed_form_discriminant(jet, kind)
    if abs(d) <= tol:
        failed.append("D != 0")
    guard = invariants.common_root_guard(jet.b30, jet.b12, jet.b03)
    if abs(guard) <= tol:
        failed.append("4*b12^3 + b03^2*b30 != 0")
    return failed


def closed_form_analysis(jet: EdgeJet, kind: FoliationKind,
                         tol: float = HYPOTHESIS_TOL) -> CubicAnalysis:
    """CubicAnalysis from the closed-form cubic/eigenvalue coefficients.

    Requires b20 = 0 (within tolerance) and the remaining genericity
    hypotheses; otherwise raises PropositionHypothesisViolated listing the
    offenders.  Root and eigen data are produced by the same machinery as the
    derivative-based path, but starting from the closed forms.
    """
    from .errors import CommonRoot, DiscriminantNearZero

    failed = hypothesis_failures(jet, kind, tol)
    if failed:
        raise PropositionHypothesisViolated(failed)
    phi = tuple(float(c) for c in closed_form_cubic(jet, kind))
    alpha = tuple(float(c) for c in closed_form_alpha(jet, kind))
    try:
        return _analysis_from_coefficients(phi, alpha)
    except DiscriminantNearZero:
        raise PropositionHypothesisViolated(["D != 0"]) from None
    except CommonRoot:
        raise PropositionHypothesisViolated(["4*b12^3 + b03^2*b30 != 0"]) from None


def _analysis_from_coefficients(phi, alpha) -> CubicAnalysis:
    from .bde import (COMMON_ROOT_TOL, DISCRIMINANT_TOL, NODE, RootData, SADDLE,
                      solve_cubic_real)
    from .errors import CommonRoot, DiscriminantNearZero
    from .invariants import cubic_discriminant

    phi_scale = max(abs(c) for c in phi)
    d_value = float(cubic_discriminant(*phi))
    d_normalized = float(cubic_discriminant(*(c / phi_scale for c in phi)))
    if abs(d_normalized) < DISCRIMINANT_TOL:
        raise DiscriminantNearZero(
            f"normalized discriminant {d_normalized:.3e} too small"
        )
    roots = solve_cubic_real(*phi)
    alpha_scale = max(abs(c) for c in alpha)
    dphi = (3 * phi[0], 2 * phi[1], phi[2])
    per_root = []
    for r in roots:
        a_val = alpha[0] * r * r + alpha[1] * r + alpha[2]
        if abs(a_val) / alpha_scale < COMMON_ROOT_TOL:
            raise CommonRoot(f"alpha({r:.6g}) vanishes")
        mpp = -(dphi[0] * r * r + dphi[1] * r + dphi[2])
        prod = a_val * mpp
        per_root.append(RootData(r, a_val, mpp, prod,
                                 SADDLE if prod < 0 else NODE))
    return CubicAnalysis(chart="q", phi=phi, alpha=alpha, D=d_value,
                         D_normalized=d_normalized, roots=tuple(roots),
                         per_root=tuple(per_root))


# --- classification ---

@dataclass(frozen=True)
class EdgeClassification:
    kind: FoliationKind
    top_class: TopClass
    case: Case | None
    invariants: dict
    convention_note: str = SIGN_CONVENTION_NOTE
    degenerate_reason: str | None = None
    analysis: CubicAnalysis | None = None

    def to_dict(self) -> dict:
        out = {
            "kind": self.kind.value,
            "top_class": self.top_class.value,
            "case": self.case.value if self.case else None,
            "invariants": self.invariants,
            "convention_note": self.convention_note,
        }
        if self.degenerate_reason is not None:
            out["degenerate_reason"] = self.degenerate_reason
        if self.analysis is not None:
            out["roots"] = list(self.analysis.roots)
            out["per_root"] = [per_root_to_dict(r) for r in self.analysis.per_root]
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _jet_invariants(jet: EdgeJet) -> dict:
    return {
        "b20": jet.b20,
        "b30_minus_a20_b12": float(
            invariants.normal_curvature_derivative(jet.a20, jet.b30, jet.b12)),
        "common_root_guard": float(
            invariants.common_root_guard(jet.b30, jet.b12, jet.b03)),
    }


def classify_edge_foliation(jet: EdgeJet, kind: FoliationKind,
                            degree_cap: int = DEFAULT_DEGREE_CAP) -> EdgeClassification:
    """Topological class of one geometric foliation of the edge.

    Lines of curvature always form a transverse regular pair.  Asymptotic and
    characteristic equations give a cusp family when b20 != 0 and one of the
    five Type-2 portraits when b20 = 0 under the genericity hypotheses;
    hypothesis failures are reported as Degenerate, never raised.
    """
    kind = FoliationKind(kind)
    bde = build_geometric_bde(jet, kind, degree_cap)
    delta, case = delta_and_case(bde)
    inv = _jet_invariants(jet)

    if kind is FoliationKind.LINES_OF_CURVATURE:
        inv["b_origin"] = float(bde.B.coeff(0, 0))
        inv["delta_origin"] = float(delta.coeff(0, 0))
        if case is not Case.CASE1_REGULAR:  # pragma: no cover - b03 != 0 forbids it
            return EdgeClassification(kind, TopClass.DEGENERATE, case, inv,
                                      degenerate_reason=f"unexpected case {case.value}")
        return EdgeClassification(kind, TopClass.REGULAR_PAIR, case, inv)

    if case in (Case.CASE2_TRANSVERSE, Case.CASE2_TANGENT):
        if case is Case.CASE2_TANGENT:
            return EdgeClassification(
                kind, TopClass.DEGENERATE, case, inv,
                degenerate_reason="unique direction tangent to the discriminant",
            )
        return EdgeClassification(kind, TopClass.CUSP_FAMILY, case, inv)

    if case is not Case.CASE3:
        return EdgeClassification(kind, TopClass.DEGENERATE, case, inv,
                                  degenerate_reason=f"unexpected case {case.value}")

    try:
        analysis = closed_form_analysis(jet, kind)
        inv["D"] = analysis.D
        inv["phi"] = list(analysis.phi)
        inv["alpha"] = list(analysis.alpha)
        inv["alpha_at_roots"] = [r.alpha for r in analysis.per_root]
        hess = hessian_det_origin(delta)
        inv["hessian_det"] = hess
        top = classify_type2(analysis, hess)
    except EdgefolError as exc:
        inv.setdefault("D", float(closed_form_discriminant(jet, kind)))
        return EdgeClassification(kind, TopClass.DEGENERATE, case, inv,
                                  degenerate_reason=f"{type(exc).__name__}: {exc}")
    return EdgeClassification(kind, top, case, inv, analysis=analysis)


def lifted_equation(jet: EdgeJet, kind: FoliationKind,
                    degree_cap: int = DEFAULT_DEGREE_CAP) -> LiftedEquation:
    """The geometric BDE lifted in the chart matching the closed forms."""
    return lift(build_geometric_bde(jet, kind, degree_cap), "q")


# --- genericity strata report ---

def genericity_membership(jet: EdgeJet, tol: float = 1e-9) -> dict:
    """Values and near-zero flags of the degenerate-stratum indicators.

    The bad set requires b20 = 0; when b20 != 0 only that value is reported
    and the jet is generic outright.
    """
    out = {"b20": jet.b20, "generic": True, "near_strata": []}
    if abs(jet.b20) > tol:
        return out
    values = {
        "b30_minus_a20_b12": float(
            invariants.normal_curvature_derivative(jet.a20, jet.b30, jet.b12)),
        "D_asymptotic": float(
            invariants.asymptotic_discriminant(jet.a20, jet.b30, jet.b12, jet.b03)),
        "D_characteristic": float(
            invariants.characteristic_discriminant(jet.a20, jet.b30, jet.b12, jet.b03)),
        "common_root_guard": float(
            invariants.common_root_guard(jet.b30, jet.b12, jet.b03)),
    }
    out.update(values)
    out["near_strata"] = sorted(k for k, x in values.items() if abs(x) <= tol)
    out["generic"] = not out["near_strata"]
    return out

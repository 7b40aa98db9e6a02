"""Generic binary-differential-equation engine.

A BDE is the tensor A dv^2 + 2B dudv + C du^2 with polynomial coefficients.
Directions are tracked in two affine charts of the projective direction line:

    chart "p": p = dv/du,  F(u, v, p) = A p^2 + 2B p + C
    chart "q": q = du/dv,  F(u, v, q) = A + 2B q + C q^2

The lifted field on the surface M = {F = 0} is, per chart,

    chart "p": xi = (F_p, p F_p, -(F_u + p F_v))
    chart "q": xi = (q F_q, F_q, -(q F_u + F_v))

both of which satisfy grad F . xi == 0 identically, so integral curves stay on
every level set of F exactly.

Over an all-coefficients-vanish point the fiber {(0,0)} x R lies in M and the
zeros of xi on it are the roots of a cubic phi; the linearization at a zero
has eigenvalues alpha(p_i) and -phi'(p_i).  The sign of their product decides
saddle (negative) versus node (positive); this is the convention used by the
topological classifier and confirmed by the sector-count oracle in the
tracer module.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import (
    CommonRoot,
    DegenerateDiscriminant,
    DiscriminantNearZero,
    HessianNonNegative,
    InvariantViolation,
)
from .invariants import cubic_discriminant
from .poly import Poly2

CASE_TOL = 1e-10
DISCRIMINANT_TOL = 1e-9
COMMON_ROOT_TOL = 1e-9

SADDLE = "saddle"
NODE = "node"

SIGN_CONVENTION_NOTE = (
    "a lifted zero is a saddle iff alpha(p_i) * (-phi'(p_i)) < 0 "
    "(eigenvalues of opposite sign); confirmed by sector counting"
)


class Case(str, Enum):
    CASE1_REGULAR = "Case1Regular"
    CASE1_DISCRIMINANT = "Case1Discriminant"
    CASE2_TRANSVERSE = "Case2Transverse"
    CASE2_TANGENT = "Case2Tangent"
    CASE3 = "Case3"


class TopClass(str, Enum):
    REGULAR_PAIR = "RegularPair"
    CUSP_FAMILY = "CuspFamily"
    THREE_SADDLES = "ThreeSaddles"
    TWO_SADDLES_ONE_NODE = "TwoSaddlesOneNode"
    ONE_SADDLE_TWO_NODES = "OneSaddleTwoNodes"
    ONE_SADDLE = "OneSaddle"
    ONE_NODE = "OneNode"
    DEGENERATE = "Degenerate"


@dataclass(frozen=True)
class BdeField:
    """Coefficients of omega = A dv^2 + 2B dudv + C du^2."""

    A: Poly2
    B: Poly2
    C: Poly2
    provenance: str = "synthetic"

    def coefficient_scale(self) -> float:
        return max(
            float(self.A.max_abs()), float(self.B.max_abs()),
            float(self.C.max_abs()),
        )

    def origin_values(self):
        return (
            float(self.A.coeff(0, 0)),
            float(self.B.coeff(0, 0)),
            float(self.C.coeff(0, 0)),
        )

    def swapped(self) -> "BdeField":
        """The same direction field written with u and v exchanged."""
        swap = lambda p: Poly2({(j, i): c for (i, j), c in p.terms.items()})
        return BdeField(swap(self.C), swap(self.B), swap(self.A), self.provenance)


def discriminant_poly(bde: BdeField) -> Poly2:
    """delta = B^2 - A*C, exact."""
    return bde.B * bde.B - bde.A * bde.C


def unique_direction_at_origin(bde: BdeField):
    """The single direction (du, dv) of a Type-1 point with delta(0) = 0."""
    a0, b0, c0 = bde.origin_values()
    d1 = (a0, -b0)   # annihilates the form when delta(0) = 0
    d2 = (-b0, c0)
    return d1 if math.hypot(*d1) >= math.hypot(*d2) else d2


def delta_and_case(bde: BdeField, tol: float = CASE_TOL):
    """Discriminant polynomial and origin case of a BDE.

    Zero tests are scale-free: coefficients are normalized by the largest
    coefficient magnitude before comparing against tol.
    """
    scale = bde.coefficient_scale()
    if scale == 0.0:
        raise ValueError("zero BDE")
    delta = discriminant_poly(bde)
    a0, b0, c0 = bde.origin_values()
    if max(abs(a0), abs(b0), abs(c0)) <= scale * tol:
        return delta, Case.CASE3

    d0 = float(delta.coeff(0, 0))
    dscale = scale * scale
    if d0 > dscale * tol:
        return delta, Case.CASE1_REGULAR
    if d0 < -dscale * tol:
        return delta, Case.CASE1_DISCRIMINANT

    grad = (float(delta.coeff(1, 0)), float(delta.coeff(0, 1)))
    gnorm = math.hypot(*grad)
    if gnorm <= dscale * tol:
        raise DegenerateDiscriminant(
            "delta and its differential both vanish at the origin "
            "while the coefficients do not"
        )
    direction = unique_direction_at_origin(bde)
    dnorm = math.hypot(*direction)
    alignment = (grad[0] * direction[0] + grad[1] * direction[1]) / (gnorm * dnorm)
    if abs(alignment) > tol:
        return delta, Case.CASE2_TRANSVERSE
    return delta, Case.CASE2_TANGENT


def _det4(m):
    """Cofactor-expansion 4x4 determinant, exact for exact entries."""

    def det3(a):
        return (
            a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
            - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
        )

    total = 0
    sign = 1
    for col in range(4):
        minor = [[m[r][c] for c in range(4) if c != col] for r in range(1, 4)]
        total = total + sign * m[0][col] * det3(minor)
        sign = -sign
    return total


def mmfd_matrix(bde: BdeField):
    au, bu, cu = (p.diff("u").coeff(0, 0) for p in (bde.A, bde.B, bde.C))
    av, bv, cv = (p.diff("v").coeff(0, 0) for p in (bde.A, bde.B, bde.C))
    zero = 0 * au
    return [
        [au, 2 * bu, cu, zero],
        [zero, au, 2 * bu, cu],
        [av, 2 * bv, cv, zero],
        [zero, av, 2 * bv, cv],
    ]


def mmfd_determinant(bde: BdeField):
    """Resultant-style smoothness certificate for the lifted surface M.

    Nonzero guarantees that the first-order direction quadratics in u and v
    have no common root, hence M is a smooth surface over the origin.
    """
    return _det4(mmfd_matrix(bde))


# --- lifted equation and field ---

CHART_P = "p"
CHART_Q = "q"


@dataclass(frozen=True)
class LiftedEquation:
    """A BDE lifted to one affine chart of the direction line."""

    bde: BdeField
    chart: str = CHART_Q

    def __post_init__(self):
        if self.chart not in (CHART_P, CHART_Q):
            raise ValueError(f"unknown chart {self.chart!r}")

    def dual(self) -> "LiftedEquation":
        return LiftedEquation(self.bde, CHART_P if self.chart == CHART_Q else CHART_Q)

    def F(self, u, v, p):
        a, b, c = self.bde.A(u, v), self.bde.B(u, v), self.bde.C(u, v)
        if self.chart == CHART_P:
            return a * p * p + 2 * b * p + c
        return a + 2 * b * p + c * p * p

    def gradient(self, u, v, p):
        """(F_u, F_v, F_p) at a point."""
        au, bu, cu = (q.diff("u")(u, v) for q in (self.bde.A, self.bde.B, self.bde.C))
        av, bv, cv = (q.diff("v")(u, v) for q in (self.bde.A, self.bde.B, self.bde.C))
        a, b, c = self.bde.A(u, v), self.bde.B(u, v), self.bde.C(u, v)
        if self.chart == CHART_P:
            return (
                au * p * p + 2 * bu * p + cu,
                av * p * p + 2 * bv * p + cv,
                2 * a * p + 2 * b,
            )
        return (
            au + 2 * bu * p + cu * p * p,
            av + 2 * bv * p + cv * p * p,
            2 * b + 2 * c * p,
        )

    def field(self, u, v, p) -> np.ndarray:
        fu, fv, fp = self.gradient(u, v, p)
        if self.chart == CHART_P:
            return np.array([fp, p * fp, -(fu + p * fv)], dtype=float)
        return np.array([p * fp, fp, -(p * fu + fv)], dtype=float)

    def origin_jet(self):
        """First-order data (au, bu, cu, av, bv, cv) at the origin."""
        au, bu, cu = (float(q.diff("u").coeff(0, 0))
                      for q in (self.bde.A, self.bde.B, self.bde.C))
        av, bv, cv = (float(q.diff("v").coeff(0, 0))
                      for q in (self.bde.A, self.bde.B, self.bde.C))
        return au, bu, cu, av, bv, cv

    def phi_coefficients(self):
        """(c3, c2, c1, c0) of the singularity cubic in this chart."""
        au, bu, cu, av, bv, cv = self.origin_jet()
        if self.chart == CHART_Q:
            return (cu, cv + 2 * bu, 2 * bv + au, av)
        return (av, au + 2 * bv, 2 * bu + cv, cu)

    def alpha_coefficients(self):
        """(a2, a1, a0) of the transverse-eigenvalue quadratic."""
        au, bu, cu, av, bv, cv = self.origin_jet()
        if self.chart == CHART_Q:
            return (2 * cu, 2 * (bu + cv), 2 * bv)
        return (2 * av, 2 * (au + bv), 2 * bu)


def lift(bde: BdeField, chart: str = CHART_Q) -> LiftedEquation:
    return LiftedEquation(bde, chart)


def lifted_field(eq: LiftedEquation, u, v, p) -> np.ndarray:
    """The chart-consistent lifted vector field at one point."""
    return eq.field(u, v, p)


# --- cubic root solving ---

def polyval(coeffs, x):
    """Horner evaluation, highest-degree coefficient first."""
    total = 0.0
    for c in coeffs:
        total = total * x + c
    return total


def solve_quadratic(a, b, c):
    """Real roots of a x^2 + b x + c, stable form, ascending."""
    if a == 0.0:
        return [] if b == 0.0 else [-c / b]
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        return []
    s = math.sqrt(disc)
    q = -(b + math.copysign(s, b)) / 2.0 if b != 0.0 else s / 2.0
    roots = []
    if q != 0.0:
        roots = [q / a, c / q]
    else:
        roots = [0.0, -b / a]
    return sorted(roots)


def solve_cubic_real(c3, c2, c1, c0, polish: int = 2):
    """Real roots of a cubic with c3 != 0, ascending.

    Trigonometric branch for three real roots, Cardano for one, followed by
    Newton polish against the original coefficients.
    """
    if c3 == 0.0:
        return solve_quadratic(c2, c1, c0)
    b, c, d = c2 / c3, c1 / c3, c0 / c3
    shift = b / 3.0
    p = c - b * b / 3.0
    q = 2.0 * b**3 / 27.0 - b * c / 3.0 + d
    disc = -4.0 * p**3 - 27.0 * q * q
    if disc > 0.0:
        m = 2.0 * math.sqrt(-p / 3.0)
        arg = 3.0 * q / (p * m)
        arg = min(1.0, max(-1.0, arg))
        theta = math.acos(arg) / 3.0
        roots = [m * math.cos(theta - 2.0 * math.pi * k / 3.0) - shift
                 for k in range(3)]
    else:
        if p == 0.0 and q == 0.0:
            roots = [-shift]
        else:
            half_q = q / 2.0
            s = math.sqrt(max(0.0, q * q / 4.0 + p**3 / 27.0))
            t1 = math.copysign(abs(-half_q + s) ** (1.0 / 3.0), -half_q + s)
            t2 = math.copysign(abs(-half_q - s) ** (1.0 / 3.0), -half_q - s)
            roots = [t1 + t2 - shift]

    coeffs = (c3, c2, c1, c0)
    deriv = (3.0 * c3, 2.0 * c2, c1)
    polished = []
    for x in roots:
        for _ in range(polish):
            fx = polyval(coeffs, x)
            dfx = polyval(deriv, x)
            if dfx != 0.0:
                x = x - fx / dfx
        polished.append(x)
    return sorted(polished)


# --- cubic analysis at a Type-2 point ---

@dataclass(frozen=True)
class RootData:
    root: float
    alpha: float
    minus_phi_prime: float
    eigen_product: float
    lifted_type: str


@dataclass(frozen=True)
class CubicAnalysis:
    chart: str
    phi: tuple
    alpha: tuple
    D: float
    D_normalized: float
    roots: tuple
    per_root: tuple
    convention_note: str = SIGN_CONVENTION_NOTE

    def saddle_count(self) -> int:
        return sum(1 for r in self.per_root if r.lifted_type == SADDLE)


def _alpha_value(alpha, x):
    return polyval(alpha, x)


def cubic_analysis(eq: LiftedEquation,
                   d_tol: float = DISCRIMINANT_TOL,
                   common_root_tol: float = COMMON_ROOT_TOL) -> CubicAnalysis:
    """Roots and eigen data of the singularity cubic of a Type-2 BDE.

    If the cubic's leading coefficient vanishes in the requested chart (a
    direction at infinity), the dual chart is analyzed instead and the result
    reported there; the two charts cover the projective direction line.
    """
    phi = tuple(float(x) for x in eq.phi_coefficients())
    phi_scale = max(abs(x) for x in phi) if any(phi) else 0.0
    if phi_scale == 0.0:
        raise DiscriminantNearZero("singularity cubic vanishes identically")
    if abs(phi[0]) <= 1e-12 * phi_scale:
        dual = eq.dual()
        dual_phi = tuple(float(x) for x in dual.phi_coefficients())
        if abs(dual_phi[0]) <= 1e-12 * max(abs(x) for x in dual_phi):
            raise DiscriminantNearZero(
                "cubic leading coefficient vanishes in both charts"
            )
        eq, phi = dual, dual_phi
        phi_scale = max(abs(x) for x in phi)

    norm = tuple(c / phi_scale for c in phi)
    d_normalized = float(cubic_discriminant(*norm))
    d_value = float(cubic_discriminant(*phi))
    if abs(d_normalized) < d_tol:
        raise DiscriminantNearZero(
            f"normalized cubic discriminant {d_normalized:.3e} below {d_tol:.1e}"
        )

    roots = solve_cubic_real(*phi)
    expected = 3 if d_normalized > 0 else 1
    if len(roots) != expected:  # pragma: no cover - solver/sign mismatch guard
        raise InvariantViolation(
            f"discriminant sign predicts {expected} real roots, solver found {len(roots)}"
        )

    alpha = tuple(float(x) for x in eq.alpha_coefficients())
    alpha_scale = max(abs(x) for x in alpha) if any(alpha) else 1.0
    dphi = (3.0 * phi[0], 2.0 * phi[1], phi[2])

    per_root = []
    for r in roots:
        a_val = _alpha_value(alpha, r)
        if abs(a_val) / alpha_scale < common_root_tol:
            raise CommonRoot(
                f"alpha({r:.6g}) = {a_val:.3e} vanishes; cubic and eigenvalue "
                "quadratic share a root"
            )
        mpp = -polyval(dphi, r)
        prod = a_val * mpp
        per_root.append(RootData(
            root=r, alpha=a_val, minus_phi_prime=mpp, eigen_product=prod,
            lifted_type=SADDLE if prod < 0 else NODE,
        ))
    return CubicAnalysis(
        chart=eq.chart, phi=phi, alpha=alpha, D=d_value,
        D_normalized=d_normalized, roots=tuple(roots), per_root=tuple(per_root),
    )


def hessian_det_origin(delta: Poly2) -> float:
    """det Hess delta(0,0) from the quadratic part of delta."""
    duu = 2.0 * float(delta.coeff(2, 0))
    dvv = 2.0 * float(delta.coeff(0, 2))
    duv = float(delta.coeff(1, 1))
    return duu * dvv - duv * duv


def classify_type2(analysis: CubicAnalysis, hess: float) -> TopClass:
    """Topological class of a Type-2 BDE from eigen-product signs.

    Requires det Hess delta(0,0) < 0 and a clean discriminant sign.  With
    three roots the saddle count 3/2/1 picks the class; zero saddles is
    impossible and raises.  With one root the eigen-product sign decides
    saddle versus node.
    """
    if hess >= 0:
        raise HessianNonNegative(f"det Hess delta(0,0) = {hess:.3e} >= 0")
    if analysis.D_normalized > 0:
        saddles = analysis.saddle_count()
        if saddles == 3:
            return TopClass.THREE_SADDLES
        if saddles == 2:
            return TopClass.TWO_SADDLES_ONE_NODE
        if saddles == 1:
            return TopClass.ONE_SADDLE_TWO_NODES
        raise InvariantViolation(
            "three real roots with all eigen products positive cannot occur"
        )
    root = analysis.per_root[0]
    return TopClass.ONE_SADDLE if root.lifted_type == SADDLE else TopClass.ONE_NODE


# --- restricted-field oracle helpers ---

def solve_fiber_coordinate(eq: LiftedEquation, v, p, start, tol=1e-13, iters=30):
    """Solve F(., v, p) = 0 for the remaining coordinate by Newton.

    In chart q the surface M is a graph u = u(v, q) near a singular point
    with F_u != 0; in chart p it is a graph v = v(u, p).  `start` seeds the
    iteration; returns the solved coordinate.
    """
    x = float(start)
    for _ in range(iters):
        if eq.chart == CHART_Q:
            f = eq.F(x, v, p)
            df = eq.gradient(x, v, p)[0]
        else:
            f = eq.F(v, x, p)
            df = eq.gradient(v, x, p)[1]
        if df == 0.0:
            break
        step = f / df
        x -= step
        if abs(step) < tol:
            break
    return x


def restricted_jacobian(eq: LiftedEquation, root: float, h: float = 1e-4) -> np.ndarray:
    """Numerically differenced Jacobian of the lifted field restricted to M.

    The surface is parameterized by the base fiber coordinate and the chart
    variable near (0, 0, root); Richardson-extrapolated central differences
    around the singular point give the 2x2 linearization whose eigenvalues
    are alpha(root) and -phi'(root).
    """

    def restricted_field(w, p):
        if eq.chart == CHART_Q:
            u = solve_fiber_coordinate(eq, w, p, start=root * w)
            fu, fv, fp = eq.gradient(u, w, p)
            return np.array([fp, -(p * fu + fv)])
        v = solve_fiber_coordinate(eq, w, p, start=root * w)
        fu, fv, fp = eq.gradient(w, v, p)
        return np.array([fp, -(fu + p * fv)])

    # Derivatives of the graph u(v, p) grow like powers of |root|, so the
    # base-direction step must shrink accordingly to keep the difference
    # quotient in the linear regime.
    scale = 1.0 + abs(root)
    h_base = h / scale**1.5
    h_chart = h * scale

    def central(k):
        jac = np.empty((2, 2))
        hb, hc = h_base / k, h_chart / k
        jac[:, 0] = (restricted_field(hb, root)
                     - restricted_field(-hb, root)) / (2 * hb)
        jac[:, 1] = (restricted_field(0.0, root + hc)
                     - restricted_field(0.0, root - hc)) / (2 * hc)
        return jac

    return (4.0 * central(2) - central(1)) / 3.0


# --- serialization ---

def per_root_to_dict(r: RootData) -> dict:
    return {
        "root": r.root,
        "alpha": r.alpha,
        "minus_phi_prime": r.minus_phi_prime,
        "eigen_product": r.eigen_product,
        "lifted_type": r.lifted_type,
    }


def cubic_analysis_to_dict(analysis: CubicAnalysis) -> dict:
    return {
        "chart": analysis.chart,
        "phi": list(analysis.phi),
        "alpha": list(analysis.alpha),
        "D": analysis.D,
        "D_normalized": analysis.D_normalized,
        "roots": list(analysis.roots),
        "per_root": [per_root_to_dict(r) for r in analysis.per_root],
        "convention_note": analysis.convention_note,
    }


def cubic_analysis_to_json(analysis: CubicAnalysis) -> str:
    return json.dumps(cubic_analysis_to_dict(analysis), indent=2)

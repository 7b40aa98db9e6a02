"""Surface evaluation and fundamental forms for a cuspidal-edge jet.

The parametrization and every derived tensor live as exact polynomials in
(u, v).  On the singular set v = 0 the metric degenerates; the scaled normal
nu2 = f_u x (f_v / v) and the v-factored form coefficients stay polynomial,
so quotients like G/v^2 are computed structurally, never as float limits.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .errors import HigherTermsPresent
from .jets import EdgeJet
from .poly import Poly2

MAX_EVAL_ORDER = 6

_U = Poly2.monomial(1, 0)
_V = Poly2.monomial(0, 1)


@lru_cache(maxsize=512)
def surface_polynomials(jet: EdgeJet) -> tuple[Poly2, Poly2, Poly2]:
    """The three coordinate polynomials of the normal-form parametrization."""
    h = jet.higher
    f1 = Poly2.monomial(1, 0)
    f2 = (
        Poly2.monomial(2, 0, jet.a20 / 2)
        + Poly2.monomial(3, 0, jet.a30 / 6)
        + Poly2.monomial(0, 2, _half(jet))
        + Poly2.monomial(4, 0) * Poly2.from_univariate(h.h1, "u")
    )
    f3 = (
        Poly2.monomial(2, 0, jet.b20 / 2)
        + Poly2.monomial(3, 0, jet.b30 / 6)
        + Poly2.monomial(1, 2, jet.b12 / 2)
        + Poly2.monomial(0, 3, jet.b03 / 6)
        + Poly2.monomial(4, 0) * Poly2.from_univariate(h.h2, "u")
        + Poly2.monomial(2, 2) * Poly2.from_univariate(h.h3, "u")
        + Poly2.monomial(1, 3) * Poly2.from_univariate(h.h4, "u")
        + Poly2.monomial(0, 4) * Poly2({(i, j): c for i, j, c in h.h5})
    )
    return f1, f2, f3


def _half(jet):
    # v^2/2 written in the jet's own coefficient type (Fraction-safe)
    one = jet.b03 / jet.b03
    return one / 2


@dataclass(frozen=True)
class SurfaceEval:
    """Point and partial derivatives of f at one (u, v)."""

    point: tuple
    partials: dict


def eval_surface(jet: EdgeJet, u, v, order: int = 1) -> SurfaceEval:
    """Evaluate f and all partials d^{i+j} f / du^i dv^j with i+j <= order.

    Exact polynomial differentiation; order is capped at 6.
    """
    if order > MAX_EVAL_ORDER:
        raise ValueError(f"order {order} exceeds the cap {MAX_EVAL_ORDER}")
    polys = surface_polynomials(jet)
    partials = {}
    layer = {(0, 0): polys}
    partials[(0, 0)] = tuple(p(u, v) for p in polys)
    for total in range(1, order + 1):
        new_layer = {}
        for (i, j), ps in layer.items():
            for di, dj, var in ((1, 0, "u"), (0, 1, "v")):
                key = (i + di, j + dj)
                if key in new_layer:
                    continue
                new_layer[key] = tuple(p.diff(var) for p in ps)
        for key, ps in new_layer.items():
            partials[key] = tuple(p(u, v) for p in ps)
        layer = new_layer
    return SurfaceEval(point=partials[(0, 0)], partials=partials)


class FormPolynomials(NamedTuple):
    """Fundamental-form coefficient polynomials and their v-factored versions."""

    E: Poly2
    F: Poly2
    G: Poly2
    L2: Poly2
    M2: Poly2
    N2: Poly2
    Ft: Poly2   # F / v
    Gt: Poly2   # G / v^2
    Mt: Poly2   # M2 / v
    Nt: Poly2   # N2 / v
    nu2: tuple  # scaled normal f_u x (f_v / v), three Poly2


def _dot(a, b):
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def _cross(a, b):
    return (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )


@lru_cache(maxsize=512)
def form_polynomials(jet: EdgeJet) -> FormPolynomials:
    f = surface_polynomials(jet)
    fu = tuple(p.diff("u") for p in f)
    fv = tuple(p.diff("v") for p in f)
    fuu = tuple(p.diff("u") for p in fu)
    fuv = tuple(p.diff("v") for p in fu)
    fvv = tuple(p.diff("v") for p in fv)

    E = _dot(fu, fu)
    F = _dot(fu, fv)
    G = _dot(fv, fv)

    fv_over_v = tuple(p.divide_v() for p in fv)
    nu2 = _cross(fu, fv_over_v)

    L2 = _dot(fuu, nu2)
    M2 = _dot(fuv, nu2)
    N2 = _dot(fvv, nu2)

    return FormPolynomials(
        E=E, F=F, G=G, L2=L2, M2=M2, N2=N2,
        Ft=F.divide_v(), Gt=G.divide_v(2), Mt=M2.divide_v(), Nt=N2.divide_v(),
        nu2=nu2,
    )


@dataclass(frozen=True)
class FormCoefficients:
    """First and second fundamental-form data at one point.

    L2, M2, N2 are second-form numerators against the scaled normal nu2; the
    t-suffixed fields are the v-factored quantities (Et = E, Lt = L2,
    Ft = F/v, Gt = G/v^2, Mt = M2/v, Nt = N2/v), evaluated structurally so
    they are defined on v = 0 as well.
    """

    E: float
    F: float
    G: float
    L2: float
    M2: float
    N2: float
    Et: float
    Ft: float
    Gt: float
    Lt: float
    Mt: float
    Nt: float


def fundamental_forms(jet: EdgeJet, u, v) -> FormCoefficients:
    fp = form_polynomials(jet)
    return FormCoefficients(
        E=fp.E(u, v), F=fp.F(u, v), G=fp.G(u, v),
        L2=fp.L2(u, v), M2=fp.M2(u, v), N2=fp.N2(u, v),
        Et=fp.E(u, v), Ft=fp.Ft(u, v), Gt=fp.Gt(u, v),
        Lt=fp.L2(u, v), Mt=fp.Mt(u, v), Nt=fp.Nt(u, v),
    )


def scaled_normal(jet: EdgeJet, u, v) -> np.ndarray:
    nu2 = form_polynomials(jet).nu2
    return np.array([float(p(u, v)) for p in nu2])


# --- cross-check report against the reference Taylor expansions ---

@dataclass(frozen=True)
class ReportRow:
    quantity: str
    monomial: str
    reference: float
    computed: float
    agree: bool


def _reference_rows(jet: EdgeJet):
    a20, a30, b20, b30 = jet.a20, jet.a30, jet.b20, jet.b30
    b12, b03 = jet.b12, jet.b03
    return [
        ("E", (0, 0), 1.0),
        ("E", (2, 0), a20**2 + b20**2),
        ("E", (3, 0), a20 * a30 + b20 * b30),
        ("E", (1, 2), b12 * b20),
        ("E", (4, 0), (a30**2 + b30**2) / 4),
        ("E", (2, 2), b12 * b30 / 2),
        ("E", (1, 3), 0.0),
        ("E", (0, 4), b12**2 / 4),
        ("F", (1, 1), a20),
        ("F", (2, 1), a30 / 2 + b12 * b20),
        ("F", (1, 2), b03 * b20 / 2),
        ("F", (0, 4), b03 * b12 / 4),
        ("F", (1, 3), b12**2 / 2),
        ("F", (2, 2), b03 * b30 / 4),
        ("F", (3, 1), b12 * b30 / 2),
        ("G", (0, 2), 1.0),
        ("G", (0, 4), b03**2 / 4),
        ("G", (1, 3), b03 * b12),
        ("G", (2, 2), b12**2),
        ("L2", (0, 0), b20),
        ("L2", (1, 0), b30 - a20 * b12),
        ("L2", (0, 1), -a20 * b03 / 2),
        ("L2", (2, 0), -a30 * b12),
        # Reference prints -(a30*b03); direct differentiation gives half that.
        ("L2", (1, 1), -a30 * b03),
        ("L2", (0, 2), 0.0),
        ("M2", (0, 1), b12),
        ("M2", (1, 1), 0.0),
        ("M2", (0, 2), 0.0),
        ("N2", (0, 1), b03 / 2),
        ("N2", (1, 1), 0.0),
        ("N2", (0, 2), 0.0),
    ]


def series_expansion_report(jet: EdgeJet, rel_tol: float = 1e-9) -> list[ReportRow]:
    """Compare computed Taylor coefficients of E, F, G, L2, M2, N2 against the
    reference expansions (valid for h == 0 only).

    Never raises on disagreement: each row carries an agree flag.  Raises
    HigherTermsPresent when the jet has a nonzero remainder.
    """
    if not jet.higher.is_zero():
        raise HigherTermsPresent("series report requires h == 0")
    fp = form_polynomials(jet)
    polys = {"E": fp.E, "F": fp.F, "G": fp.G, "L2": fp.L2, "M2": fp.M2, "N2": fp.N2}
    rows = []
    for name, (i, j), ref in _reference_rows(jet):
        comp = float(polys[name].coeff(i, j))
        scale = max(abs(ref), abs(comp), 1.0)
        rows.append(ReportRow(
            quantity=name,
            monomial=f"u^{i} v^{j}",
            reference=float(ref),
            computed=comp,
            agree=abs(comp - ref) <= rel_tol * scale,
        ))
    return rows


def report_to_csv(rows: list[ReportRow]) -> str:
    lines = ["quantity,monomial,reference,computed,agree"]
    for r in rows:
        lines.append(
            f"{r.quantity},{r.monomial},{r.reference!r},{r.computed!r},"
            f"{'agree' if r.agree else 'disagree'}"
        )
    return "\n".join(lines) + "\n"

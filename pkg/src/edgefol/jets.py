"""Cuspidal-edge normal-form jets: data model, validation, files, sampling.

A jet is the coefficient record of the local normal form

    f(u, v) = (u,
               a20/2 u^2 + a30/6 u^3 + v^2/2,
               b20/2 u^2 + b30/6 u^3 + b12/2 u v^2 + b03/6 v^3) + h(u, v)

with b03 != 0 and b20 >= 0, where the remainder h collects the optional
higher-order terms h1..h5.  The six named coefficients are geometric
invariants of the edge (singular curvature, limiting normal curvature,
cuspidal curvature, cusp-directional torsion and their companions).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import invariants
from .errors import (
    JetFormatError,
    NegativeLimitingNormalCurvature,
    NonFinite,
    SamplingExhausted,
    ZeroCuspidalCurvature,
)

COEFF_KEYS = ("a20", "a30", "b20", "b30", "b12", "b03")
HIGHER_KEYS = ("h1", "h2", "h3", "h4", "h5")
DEFAULT_ZERO_TOL = 1e-12
DEFAULT_HIGHER_DEGREE_CAP = 3
_SAMPLER_CAP = 10_000


@dataclass(frozen=True)
class HigherTerms:
    """Truncated-polynomial remainder h of the normal form.

    h1, h2, h3, h4 are univariate in u (coefficients ascending in degree,
    capped); h5 is bivariate in (u, v) as (i, j, c) monomial triples.  Empty
    tuples mean h == 0.
    """

    h1: tuple = ()
    h2: tuple = ()
    h3: tuple = ()
    h4: tuple = ()
    h5: tuple = ()

    def is_zero(self) -> bool:
        return not (self.h1 or self.h2 or self.h3 or self.h4 or self.h5)


@dataclass(frozen=True)
class EdgeJet:
    """Validated normal-form coefficients of a cuspidal edge."""

    a20: float
    a30: float
    b20: float
    b30: float
    b12: float
    b03: float
    higher: HigherTerms = field(default_factory=HigherTerms)

    def coefficients(self) -> dict:
        return {k: getattr(self, k) for k in COEFF_KEYS}

    def with_higher_zero(self) -> "EdgeJet":
        return EdgeJet(self.a20, self.a30, self.b20, self.b30, self.b12, self.b03)


def _check_finite(name, value):
    try:
        ok = math.isfinite(float(value))
    except (TypeError, ValueError):
        ok = False
    if not ok:
        raise NonFinite(f"coefficient {name} is not a finite number: {value!r}")


def _parse_univariate(name, raw, degree_cap):
    if not isinstance(raw, (list, tuple)):
        raise JetFormatError(f"{name} must be an array of ascending coefficients")
    if len(raw) > degree_cap + 1:
        raise JetFormatError(
            f"{name} exceeds the degree cap {degree_cap} (got {len(raw)} coefficients)"
        )
    for k, c in enumerate(raw):
        _check_finite(f"{name}[{k}]", c)
    coeffs = tuple(float(c) for c in raw)
    while coeffs and coeffs[-1] == 0.0:
        coeffs = coeffs[:-1]
    return coeffs


def _parse_bivariate(name, raw, degree_cap):
    if not isinstance(raw, (list, tuple)):
        raise JetFormatError(f"{name} must be an array of [i, j, c] monomial triples")
    out = []
    for entry in raw:
        if not isinstance(entry, (list, tuple)) or len(entry) != 3:
            raise JetFormatError(f"{name} entries must be [i, j, c] triples")
        i, j, c = entry
        if int(i) != i or int(j) != j or int(i) < 0 or int(j) < 0:
            raise JetFormatError(f"{name} exponents must be nonnegative integers")
        if int(i) + int(j) > degree_cap:
            raise JetFormatError(f"{name} exceeds the total degree cap {degree_cap}")
        _check_finite(f"{name}[{i},{j}]", c)
        if float(c) != 0.0:
            out.append((int(i), int(j), float(c)))
    out.sort()
    return tuple(out)


def validate_jet(raw, *, zero_tol: float = DEFAULT_ZERO_TOL,
                 higher_degree_cap: int = DEFAULT_HIGHER_DEGREE_CAP) -> EdgeJet:
    """Validate a raw coefficient record and return an EdgeJet.

    Raises ZeroCuspidalCurvature when |b03| <= zero_tol,
    NegativeLimitingNormalCurvature when b20 < 0, NonFinite on NaN/inf input,
    and JetFormatError on unknown keys or malformed higher-term arrays.
    """
    if not isinstance(raw, dict):
        raise JetFormatError("jet record must be a mapping")
    unknown = sorted(set(raw) - set(COEFF_KEYS) - set(HIGHER_KEYS))
    if unknown:
        raise JetFormatError(f"unknown keys in jet record: {unknown}")
    missing = [k for k in COEFF_KEYS if k not in raw]
    if missing:
        raise JetFormatError(f"missing coefficients: {missing}")

    vals = {}
    for k in COEFF_KEYS:
        _check_finite(k, raw[k])
        vals[k] = float(raw[k])

    if abs(vals["b03"]) <= zero_tol:
        raise ZeroCuspidalCurvature(
            f"|b03| = {abs(vals['b03'])!r} is within the zero tolerance {zero_tol}"
        )
    if vals["b20"] < 0:
        raise NegativeLimitingNormalCurvature(f"b20 = {vals['b20']!r} < 0")

    higher = HigherTerms(
        h1=_parse_univariate("h1", raw.get("h1", ()), higher_degree_cap),
        h2=_parse_univariate("h2", raw.get("h2", ()), higher_degree_cap),
        h3=_parse_univariate("h3", raw.get("h3", ()), higher_degree_cap),
        h4=_parse_univariate("h4", raw.get("h4", ()), higher_degree_cap),
        h5=_parse_bivariate("h5", raw.get("h5", ()), higher_degree_cap),
    )
    return EdgeJet(vals["a20"], vals["a30"], vals["b20"], vals["b30"],
                   vals["b12"], vals["b03"], higher)


# --- file format ---

def jet_to_dict(jet: EdgeJet) -> dict:
    out = {k: getattr(jet, k) for k in COEFF_KEYS}
    h = jet.higher
    if h.h1:
        out["h1"] = list(h.h1)
    if h.h2:
        out["h2"] = list(h.h2)
    if h.h3:
        out["h3"] = list(h.h3)
    if h.h4:
        out["h4"] = list(h.h4)
    if h.h5:
        out["h5"] = [list(t) for t in h.h5]
    return out


def dump_jet(jet: EdgeJet) -> str:
    return json.dumps(jet_to_dict(jet), indent=2, sort_keys=True)


def load_jet(text_or_path, **kwargs) -> EdgeJet:
    """Parse a jet from JSON text or from a file path."""
    text = text_or_path
    if hasattr(text_or_path, "read_text"):
        text = text_or_path.read_text()
    elif isinstance(text_or_path, str) and not text_or_path.lstrip().startswith("{"):
        with open(text_or_path, "r", encoding="utf-8") as fh:
            text = fh.read()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise JetFormatError(f"invalid JSON: {exc}") from exc
    return validate_jet(raw, **kwargs)


# --- sampling ---

def _stratum_values(a20, b30, b12, b03):
    return (
        invariants.normal_curvature_derivative(a20, b30, b12),
        invariants.asymptotic_discriminant(a20, b30, b12, b03),
        invariants.characteristic_discriminant(a20, b30, b12, b03),
        invariants.common_root_guard(b30, b12, b03),
    )


def sample_generic_jet(rng_seed: int, scenario: str = "generic") -> EdgeJet:
    """Draw a random jet, rejecting degenerate configurations.

    Coefficients are uniform on [-2, 2] (b20 on [0, 2]).  Scenario
    "edge_degenerate" pins b20 = 0 and additionally enforces margins
    |b30 - a20*b12| >= 1e-3, |D_as| >= 1e-6, |D_ch| >= 1e-6 and
    |4*b12^3 + b03^2*b30| >= 1e-3, keeping the sample clear of every
    codimension-two stratum where the classification degenerates.
    Deterministic in rng_seed.
    """
    if scenario not in ("generic", "edge_degenerate"):
        raise ValueError(f"unknown scenario: {scenario!r}")
    rng = np.random.default_rng(np.random.SeedSequence([abs(int(rng_seed)), 0xED6EF01]))
    for _ in range(_SAMPLER_CAP):
        a20, a30, b30, b12, b03 = rng.uniform(-2.0, 2.0, size=5)
        if abs(b03) < 0.1:
            continue
        if scenario == "generic":
            b20 = rng.uniform(0.0, 2.0)
        else:
            b20 = 0.0
            deriv, d_as, d_ch, guard = _stratum_values(a20, b30, b12, b03)
            if abs(deriv) < 1e-3 or abs(d_as) < 1e-6 or abs(d_ch) < 1e-6 \
                    or abs(guard) < 1e-3:
                continue
        return EdgeJet(float(a20), float(a30), float(b20), float(b30),
                       float(b12), float(b03))
    raise SamplingExhausted(
        f"no admissible jet after {_SAMPLER_CAP} rejections (scenario {scenario})"
    )

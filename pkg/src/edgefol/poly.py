"""Exact bivariate polynomial arithmetic in (u, v).

All surface geometry and BDE coefficients are small polynomials.  Keeping them
as sparse coefficient maps makes every quotient and Taylor coefficient exact
(ints and Fractions pass through untouched) and sidesteps finite differencing
entirely.  A compiled dense form backs fast vectorised evaluation for the
curve tracer.
"""

from __future__ import annotations

import math
from numbers import Number

import numpy as np


class Poly2:
    """Sparse polynomial sum c_ij * u^i * v^j, coefficient-type agnostic."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {}
        if terms:
            for (i, j), c in terms.items():
                if c != 0:
                    self.terms[(i, j)] = c

    # --- constructors ---

    @classmethod
    def const(cls, c):
        return cls({(0, 0): c})

    @classmethod
    def monomial(cls, i, j, c=1):
        return cls({(i, j): c})

    @classmethod
    def from_univariate(cls, coeffs, var="u"):
        """Polynomial in a single variable, coefficients in ascending degree."""
        if var == "u":
            return cls({(k, 0): c for k, c in enumerate(coeffs)})
        return cls({(0, k): c for k, c in enumerate(coeffs)})

    # --- algebra ---

    def __add__(self, other):
        if isinstance(other, Number):
            other = Poly2.const(other)
        out = dict(self.terms)
        for key, c in other.terms.items():
            s = out.get(key, 0) + c
            if s == 0:
                out.pop(key, None)
            else:
                out[key] = s
        res = Poly2.__new__(Poly2)
        res.terms = out
        return res

    __radd__ = __add__

    def __neg__(self):
        res = Poly2.__new__(Poly2)
        res.terms = {k: -c for k, c in self.terms.items()}
        return res

    def __sub__(self, other):
        if isinstance(other, Number):
            other = Poly2.const(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Number):
            if other == 0:
                return Poly2()
            res = Poly2.__new__(Poly2)
            res.terms = {k: c * other for k, c in self.terms.items()}
            return res
        out = {}
        for (i1, j1), c1 in self.terms.items():
            for (i2, j2), c2 in other.terms.items():
                key = (i1 + i2, j1 + j2)
                s = out.get(key, 0) + c1 * c2
                if s == 0:
                    out.pop(key, None)
                else:
                    out[key] = s
        res = Poly2.__new__(Poly2)
        res.terms = out
        return res

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, Number):
            other = Poly2.const(other)
        if not isinstance(other, Poly2):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    # --- calculus and structure ---

    def diff(self, var):
        out = {}
        for (i, j), c in self.terms.items():
            if var == "u" and i > 0:
                out[(i - 1, j)] = c * i
            elif var == "v" and j > 0:
                out[(i, j - 1)] = c * j
        res = Poly2.__new__(Poly2)
        res.terms = out
        return res

    def divide_v(self, k=1):
        """Exact quotient by v^k; raises if any term has v-degree below k."""
        out = {}
        for (i, j), c in self.terms.items():
            if j < k:
                raise ValueError(f"not divisible by v^{k}: term u^{i} v^{j}")
            out[(i, j - k)] = c
        res = Poly2.__new__(Poly2)
        res.terms = out
        return res

    def truncated(self, max_total_degree):
        res = Poly2.__new__(Poly2)
        res.terms = {
            (i, j): c for (i, j), c in self.terms.items() if i + j <= max_total_degree
        }
        return res

    def coeff(self, i, j):
        return self.terms.get((i, j), 0)

    def degree(self):
        return max((i + j for (i, j) in self.terms), default=0)

    def max_abs(self):
        return max((abs(c) for c in self.terms.values()), default=0)

    def is_zero(self):
        return not self.terms

    def map_coeffs(self, fn):
        res = Poly2.__new__(Poly2)
        res.terms = {k: fn(c) for k, c in self.terms.items() if fn(c) != 0}
        return res

    # --- evaluation ---

    def __call__(self, u, v):
        total = 0
        for (i, j), c in self.terms.items():
            total = total + c * u**i * v**j
        return total

    def grad(self, u, v):
        return (self.diff("u")(u, v), self.diff("v")(u, v))

    def compiled(self):
        return CompiledPoly2(self)

    def __repr__(self):
        if not self.terms:
            return "Poly2(0)"
        parts = [
            f"{c}*u^{i}*v^{j}"
            for (i, j), c in sorted(self.terms.items())
        ]
        return "Poly2(" + " + ".join(parts) + ")"


class CompiledPoly2:
    """Dense float64 coefficient matrix for vectorised evaluation."""

    __slots__ = ("mat", "du", "dv")

    def __init__(self, poly: Poly2):
        du = max((i for (i, _) in poly.terms), default=0)
        dv = max((j for (_, j) in poly.terms), default=0)
        mat = np.zeros((du + 1, dv + 1))
        for (i, j), c in poly.terms.items():
            mat[i, j] = float(c)
        self.mat = mat
        self.du = du
        self.dv = dv

    def __call__(self, u, v):
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        U = power_table(u, self.du)
        V = power_table(v, self.dv)
        return np.einsum("...i,ij,...j->...", U, self.mat, V)


def power_table(x: np.ndarray, n: int) -> np.ndarray:
    """Stack [1, x, x^2, ..., x^n] along a trailing axis."""
    x = np.asarray(x, dtype=float)
    out = np.empty(x.shape + (n + 1,))
    out[..., 0] = 1.0
    for k in range(1, n + 1):
        out[..., k] = out[..., k - 1] * x
    return out


class CompiledPolySet:
    """Several polynomials evaluated in one einsum against shared power tables."""

    __slots__ = ("mats", "du", "dv")

    def __init__(self, polys):
        du = max(max((i for (i, _) in p.terms), default=0) for p in polys)
        dv = max(max((j for (_, j) in p.terms), default=0) for p in polys)
        mats = np.zeros((len(polys), du + 1, dv + 1))
        for k, p in enumerate(polys):
            for (i, j), c in p.terms.items():
                mats[k, i, j] = float(c)
        self.mats = mats
        self.du = du
        self.dv = dv

    def values(self, u, v):
        """Evaluate every polynomial; returns array of shape (npolys, *shape)."""
        U = power_table(u, self.du)
        V = power_table(v, self.dv)
        return np.einsum("...i,kij,...j->k...", U, self.mats, V)


def poly_is_finite(p: Poly2) -> bool:
    return all(math.isfinite(float(c)) for c in p.terms.values())

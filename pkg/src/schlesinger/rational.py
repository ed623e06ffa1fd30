"""Exact partial-fraction algebra for rational gauge matrices.

A gauge used by this package is always a finite sum of terms
``m(z) * C`` where ``C`` is a constant 2x2 matrix and ``m`` is a monomial
``prod_a (z - a) ** e_a`` with integer exponents.  Products, derivatives and
partial-fraction expansions of such sums are closed-form, so gauge
transformations can be carried out without any quadrature.
"""
from __future__ import annotations

from collections import defaultdict

import numpy as np


def _key(factors):
    return tuple(sorted(((complex(a), int(e)) for a, e in factors if e != 0),
                        key=lambda item: (item[0].real, item[0].imag)))


def _binomial_series(e, scale, order):
    """Coefficients of (1 + scale * t) ** e up to t**order."""
    out = np.zeros(order + 1, dtype=complex)
    coef = 1.0 + 0j
    for j in range(order + 1):
        out[j] = coef
        coef = coef * (e - j) / (j + 1) * scale
    return out


def _series_mul(u, v):
    n = len(u)
    return np.convolve(u, v)[:n]


def monomial_value(key, z):
    val = 1.0 + 0j
    for a, e in key:
        val *= (z - a) ** e
    return val


def laurent_at(key, point, order):
    """Laurent coefficients of the monomial at ``point``.

    Returns a dict ``{k: c_k}`` with ``k`` from the pole order up to ``order``
    (inclusive), where the monomial equals ``sum c_k (z - point)**k``.
    """
    e0 = 0
    others = []
    for a, e in key:
        if a == point:
            e0 = e
        else:
            others.append((a, e))
    n_terms = order - e0 + 1
    if n_terms <= 0:
        return {}
    h = np.zeros(n_terms, dtype=complex)
    h[0] = 1.0
    for a, e in others:
        d = point - a
        h = _series_mul(h, d ** e * _binomial_series(e, 1.0 / d, n_terms - 1))
    return {e0 + j: h[j] for j in range(n_terms)}


def polynomial_part(key):
    """Coefficients (ascending powers of z) of the polynomial part at infinity."""
    total = sum(e for _, e in key)
    if total < 0:
        return np.zeros(0, dtype=complex)
    g = np.zeros(total + 1, dtype=complex)
    g[0] = 1.0
    for a, e in key:
        g = _series_mul(g, _binomial_series(e, -a, total))
    # z**total * sum g_j z**-j  ->  coefficient of z**m is g[total - m]
    return g[::-1].copy()


class RationalMatrix:
    """Sum of monomial-times-constant-matrix terms.

    Terms are stored in a dict keyed by the monomial's (point, exponent)
    tuple; the empty key is the constant term.
    """

    def __init__(self, terms=None):
        self.terms = {}
        for key, mat in (terms or {}).items():
            self._add(key, mat)

    def _add(self, key, mat):
        mat = np.asarray(mat, dtype=complex)
        if key in self.terms:
            self.terms[key] = self.terms[key] + mat
        else:
            self.terms[key] = mat.copy()

    @classmethod
    def constant(cls, mat):
        return cls({(): mat})

    @classmethod
    def from_terms(cls, pairs):
        """Build from ``[(factors, matrix), ...]`` with factors ``[(a, e), ...]``."""
        out = cls()
        for factors, mat in pairs:
            out._add(_key(factors), mat)
        return out

    @classmethod
    def fuchsian(cls, points, residues):
        return cls.from_terms([([(x, -1)], B) for x, B in zip(points, residues)])

    def __call__(self, z):
        out = np.zeros((2, 2), dtype=complex)
        for key, mat in self.terms.items():
            out += monomial_value(key, z) * mat
        return out

    def __add__(self, other):
        out = RationalMatrix(self.terms)
        for key, mat in other.terms.items():
            out._add(key, mat)
        return out

    def __neg__(self):
        return RationalMatrix({k: -m for k, m in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        return RationalMatrix({k: c * m for k, m in self.terms.items()})

    def __matmul__(self, other):
        out = RationalMatrix()
        for k1, m1 in self.terms.items():
            for k2, m2 in other.terms.items():
                merged = defaultdict(int)
                for a, e in k1 + k2:
                    merged[a] += e
                out._add(_key(merged.items()), m1 @ m2)
        return out

    def derivative(self):
        out = RationalMatrix()
        for key, mat in self.terms.items():
            for idx, (a, e) in enumerate(key):
                factors = list(key)
                factors[idx] = (a, e - 1)
                out._add(_key(factors), e * mat)
        return out

    def points(self):
        return sorted({a for key in self.terms for a, _ in key},
                      key=lambda c: (c.real, c.imag))

    def partial_fractions(self):
        """Split into principal parts at finite points and a polynomial part.

        Returns ``(principal, poly)`` where ``principal[a][k]`` is the matrix
        coefficient of ``(z - a)**-k`` (k >= 1) and ``poly[m]`` the
        coefficient of ``z**m``.
        """
        principal = defaultdict(lambda: defaultdict(lambda: np.zeros((2, 2), complex)))
        poly = defaultdict(lambda: np.zeros((2, 2), complex))
        for key, mat in self.terms.items():
            for a, e in key:
                if e < 0:
                    for k, c in laurent_at(key, a, -1).items():
                        principal[a][-k] = principal[a][-k] + c * mat
            for m, c in enumerate(polynomial_part(key)):
                poly[m] = poly[m] + c * mat
        return ({a: dict(v) for a, v in principal.items()}, dict(poly))

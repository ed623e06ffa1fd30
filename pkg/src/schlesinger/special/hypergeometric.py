"""Gauss hypergeometric series and the Gauss contiguous relation."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import NonconvergentParams, OutOfDisk

MARGIN = 0.2
MAX_TERMS = 20000


@dataclass(frozen=True)
class HypergeomParams:
    a: complex
    b: complex
    c: complex

    def __post_init__(self):
        c = complex(self.c)
        if abs(c.imag) < 1e-14 and c.real <= 0 and abs(c.real - round(c.real)) < 1e-14:
            raise NonconvergentParams(f"c = {self.c} is a non-positive integer")


def pochhammer(x, n):
    """``(x)_n`` by the product recurrence."""
    out = 1.0 + 0j
    for k in range(n):
        out *= x + k
    return out


def sum_series(coef_ratio, z, tol, nderiv=2, max_terms=MAX_TERMS, nterms=None):
    """Sum ``sum c_n z**n`` and its first ``nderiv`` derivatives.

    ``coef_ratio(n)`` returns ``c_{n+1} / c_n`` with ``c_0 = 1``.  Summation
    stops once the geometric tail bound of the next terms drops below
    ``tol`` relative to the partial sum, or after ``nterms`` terms when given.
    """
    z = complex(z)
    sums = np.zeros(nderiv + 1, dtype=complex)
    c = 1.0 + 0j
    n = 0
    limit = nterms if nterms is not None else max_terms
    while n < limit:
        # k-th derivative of c z**n
        for k in range(nderiv + 1):
            if n >= k:
                fall = 1.0
                for m in range(k):
                    fall *= n - m
                sums[k] += c * fall * (z ** (n - k) if n > k else 1.0)
        ratio = coef_ratio(n)
        c_next = c * ratio
        if nterms is None and n > 2:
            r = abs(ratio * z)
            term = abs(c_next * z ** (n + 1)) * (n + 1) ** nderiv
            scale = max(abs(sums[0]), 1e-300)
            if r < 0.999 and term / (1 - r) < tol * scale:
                n += 1
                break
        c = c_next
        n += 1
        if c == 0:
            break
    else:
        if nterms is None:
            raise NonconvergentParams("series did not converge")
    return sums


def gauss_2f1(p, z, tol=1e-15, nderiv=0, margin=MARGIN):
    """``F(a, b; c | z)`` (and derivatives when ``nderiv > 0``) for ``|z| < 1 - margin``."""
    if not isinstance(p, HypergeomParams):
        p = HypergeomParams(*p)
    if abs(z) > 1 - margin:
        raise OutOfDisk(f"|z| = {abs(z):.3f} exceeds {1 - margin}")
    a, b, c = complex(p.a), complex(p.b), complex(p.c)

    def ratio(n):
        return (a + n) * (b + n) / ((c + n) * (n + 1))

    out = sum_series(ratio, z, tol, nderiv=nderiv)
    return out[0] if nderiv == 0 else out


def coefficients_2f1(p, n):
    """First ``n`` Taylor coefficients ``(a)_k (b)_k / ((c)_k k!)``."""
    if not isinstance(p, HypergeomParams):
        p = HypergeomParams(*p)
    out = np.empty(n, dtype=complex)
    c = 1.0 + 0j
    for k in range(n):
        out[k] = c
        c *= (p.a + k) * (p.b + k) / ((p.c + k) * (k + 1))
    return out


def second_solution_params(p):
    """Parameters of ``z**(1-c) F(a+1-c, b+1-c; 2-c | z)``."""
    return HypergeomParams(p.a + 1 - p.c, p.b + 1 - p.c, 2 - p.c)


def verify_gauss_relation(p, z, tol=1e-16):
    """Residuals of the two rows of the Gauss relation at ``z``.

    Row 1: ``F(a+1, b, c) = F + (z/a) F'``.
    Row 2: with ``a' = a + 1 - c`` and ``F_2 = z**(1-c) F(a', b+1-c, 2-c)``,
    ``z**(1-c) F(a'+1, b+1-c, 2-c) = (a/a') F_2 + (z/a') F_2'``.
    Derivatives come from the term-wise differentiated series.
    """
    if not isinstance(p, HypergeomParams):
        p = HypergeomParams(*p)
    a, b, c = complex(p.a), complex(p.b), complex(p.c)
    if a == 0 or a + 1 - c == 0:
        raise NonconvergentParams("relation needs a != 0 and a + 1 - c != 0")
    z = complex(z)
    F, dF = gauss_2f1(p, z, tol, nderiv=1)
    lhs1 = gauss_2f1(HypergeomParams(a + 1, b, c), z, tol)
    rhs1 = F + z / a * dF
    row1 = abs(lhs1 - rhs1) / max(1.0, abs(lhs1))
    if z == 0:
        return {"row1": row1, "row2": 0.0, "max": row1}
    ap = a + 1 - c
    G, dG = gauss_2f1(HypergeomParams(ap, b + 1 - c, 2 - c), z, tol, nderiv=1)
    pref = z ** (1 - c)
    F2 = pref * G
    dF2 = (1 - c) * z ** (-c) * G + pref * dG
    lhs2 = pref * gauss_2f1(HypergeomParams(ap + 1, b + 1 - c, 2 - c), z, tol)
    rhs2 = a / ap * F2 + z / ap * dF2
    row2 = abs(lhs2 - rhs2) / max(1.0, abs(lhs2))
    return {"row1": row1, "row2": row2, "max": max(row1, row2)}

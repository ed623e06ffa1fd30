"""Local Frobenius solutions of Heun's equation.

Convention::

    y'' + (gamma/z + delta/(z-1) + eps/(z-a)) y'
        + alpha beta (z - q) / (z (z-1) (z-a)) y = 0,
    eps = alpha + beta - gamma - delta + 1.

Substituting ``sum c_n z**n`` gives ``a gamma c_1 = alpha beta q c_0`` and

    a (n+1)(n+gamma) c_{n+1}
        = [n((n-1+gamma)(1+a) + a delta + eps) + alpha beta q] c_n
          - (n-1+alpha)(n-1+beta) c_{n-1}.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import NonconvergentParams, OutOfDisk

MARGIN = 0.2
MAX_TERMS = 20000


def _is_nonpositive_int(x, tol=1e-14):
    x = complex(x)
    return abs(x.imag) < tol and x.real < 0.5 and abs(x.real - round(x.real)) < tol


@dataclass(frozen=True)
class HeunParams:
    a: complex
    q: complex
    alpha: complex
    beta: complex
    gamma: complex
    delta: complex

    def __post_init__(self):
        if abs(self.a) < 1e-12 or abs(self.a - 1) < 1e-12:
            raise ValueError("a must differ from 0 and 1")

    @property
    def eps(self):
        return self.alpha + self.beta - self.gamma - self.delta + 1

    def replace(self, **kw):
        data = dict(a=self.a, q=self.q, alpha=self.alpha, beta=self.beta,
                    gamma=self.gamma, delta=self.delta)
        data.update(kw)
        return HeunParams(**data)


def heun_coefficients(p, n):
    """First ``n`` Taylor coefficients of the holomorphic solution at 0 (``c_0 = 1``)."""
    if _is_nonpositive_int(p.gamma):
        raise NonconvergentParams(f"gamma = {p.gamma} is a non-positive integer")
    a, g, d, e = complex(p.a), complex(p.gamma), complex(p.delta), complex(p.eps)
    ab, q = complex(p.alpha) * complex(p.beta), complex(p.q)
    c = np.zeros(max(n, 2), dtype=complex)
    c[0] = 1.0
    c[1] = ab * q / (a * g)
    for k in range(1, n - 1):
        lhs = a * (k + 1) * (k + g)
        c[k + 1] = ((k * ((k - 1 + g) * (1 + a) + a * d + e) + ab * q) * c[k]
                    - (k - 1 + p.alpha) * (k - 1 + p.beta) * c[k - 1]) / lhs
    return c[:n]


def _eval_poly(c, z, nderiv):
    n = np.arange(len(c))
    out = []
    for k in range(nderiv + 1):
        fall = np.ones(len(c))
        for m in range(k):
            fall = fall * (n - m)
        powers = np.array([z ** (j - k) if j >= k else 0.0 for j in n], dtype=complex)
        out.append(np.sum(c * fall * powers))
    return np.array(out)


def heun_series(p, z, tol=1e-15, nderiv=0, nterms=None, margin=MARGIN):
    """Holomorphic Heun solution at 0 (and derivatives) for ``|z| < min(1, |a|) - margin``.

    With ``nterms`` the series is truncated there; otherwise terms are added
    in blocks until the last block is below ``tol`` relative to the sum.
    """
    z = complex(z)
    radius = min(1.0, abs(p.a))
    if abs(z) > radius - margin * radius:
        raise OutOfDisk(f"|z| = {abs(z):.3f} too close to the radius {radius:.3f}")
    if nterms is not None:
        out = _eval_poly(heun_coefficients(p, nterms), z, nderiv)
        return out[0] if nderiv == 0 else out
    n = 32
    while n <= MAX_TERMS:
        c = heun_coefficients(p, n)
        tail = np.abs(c[-8:]) * abs(z) ** np.arange(n - 8, n) * n ** nderiv
        total = _eval_poly(c, z, nderiv)
        rho = abs(z) / radius
        if tail.max() / (1 - rho) < tol * max(abs(total[0]), 1e-300):
            return total[0] if nderiv == 0 else total
        n *= 2
    raise NonconvergentParams("Heun series did not converge")


# contiguous relation ----------------------------------------------------------------

def printed_shifted_accessory(p):
    """``q + a (gamma + delta) / (alpha beta) - gamma / (alpha beta)``."""
    ab = p.alpha * p.beta
    return p.q + p.a * (p.gamma + p.delta) / ab - p.gamma / ab


def _relation_prefactor(p):
    eps = p.eps
    if abs(p.gamma) < 1e-14 or abs(eps - 1) < 1e-14:
        raise NonconvergentParams("relation needs gamma != 0 and eps != 1")
    return eps - 1 - p.alpha * p.beta / p.gamma * p.q


def _combination_coefficients(p, n):
    """Taylor coefficients of ``g = (eps-1) F + (z-a) F'``."""
    c = heun_coefficients(p, n + 1)
    k = np.arange(n)
    return (p.eps - 1 + k) * c[:n] - p.a * (k + 1) * c[1:n + 1]


def _poly_times_series(poly, s, n):
    """First ``n`` coefficients of ``poly(z) * s(z)``; ``poly`` lowest degree first."""
    return np.convolve(poly, s)[:n]


def _deriv(s):
    return s[1:] * np.arange(1, len(s))


def fit_shifted_operator(p, nterms=40):
    """Fit ``L = z(z-1)(z-a) d2 + [(gamma+1)(z-1)(z-a) + (delta+1) z(z-a) + e z(z-1)] d
    + (A z - B)`` to annihilate ``g = (eps-1) F + (z-a) F'``.

    The three unknowns ``(e, A, B)`` enter linearly; they are solved from the
    Taylor coefficients of ``L g`` by least squares.  Returns a dict with
    ``eps``, ``A``, ``B``, ``q`` (``= B / A``) and the least-squares residual.
    """
    a, g1, d1 = complex(p.a), complex(p.gamma) + 1, complex(p.delta) + 1
    s = _combination_coefficients(p, nterms)
    ds, d2s = _deriv(s), _deriv(_deriv(s))
    m = nterms - 3
    cubic = [0, a, -(1 + a), 1]
    known = (_poly_times_series(cubic, d2s, m)
             + _poly_times_series([g1 * a, -g1 * (1 + a), g1], ds, m)
             + _poly_times_series([0, -d1 * a, d1], ds, m))
    col_e = _poly_times_series([0, -1, 1], ds, m)
    col_A = _poly_times_series([0, 1], s, m)
    col_B = -s[:m]
    K = np.column_stack([col_e, col_A, col_B])
    scale = np.abs(K).max(axis=0)
    sol, *_ = np.linalg.lstsq(K / scale, -known, rcond=None)
    e, A, B = sol / scale
    fit_res = np.linalg.norm(K @ np.array([e, A, B]) + known) / max(np.linalg.norm(known), 1e-300)
    return {"eps": e, "A": A, "B": B, "q": B / A if abs(A) > 1e-300 else np.inf,
            "lstsq_residual": fit_res, "gamma": g1, "delta": d1}


def _apply_fitted(op, a, y, dy, d2y, z):
    terms = (z * (z - 1) * (z - a) * d2y,
             (op["gamma"] * (z - 1) * (z - a) + op["delta"] * z * (z - a)
              + op["eps"] * z * (z - 1)) * dy,
             (op["A"] * z - op["B"]) * y)
    return abs(sum(terms)) / max(max(abs(t) for t in terms), 1e-300)


def _combination_at(p, z, F, dF, d2F, d3F):
    e = p.eps
    return ((e - 1) * F + (z - p.a) * dF,
            e * dF + (z - p.a) * d2F,
            (e + 1) * d2F + (z - p.a) * d3F)


def verify_heun_relation(p, z, nterms=40):
    """Check ``[(eps-1) - (alpha beta/gamma) q] F(q'| alpha, beta, gamma+1, delta+1 | z)
    = (eps-1) F + (z-a) F'``.

    Returns ``residual_as_stated`` (with the printed ``q'``), the fitted
    shifted operator (``fitted``), its residual on the combination at ``z``
    (``fitted_residual``) and ``|q_hat - q'|`` (``accessory_gap``).
    """
    z = complex(z)
    pref = _relation_prefactor(p)
    q_printed = printed_shifted_accessory(p)
    F, dF, d2F, d3F = heun_series(p, z, nderiv=3)
    g, dg, d2g = _combination_at(p, z, F, dF, d2F, d3F)
    shifted = p.replace(q=q_printed, gamma=p.gamma + 1, delta=p.delta + 1)
    lhs = pref * heun_series(shifted, z)
    stated = abs(lhs - g) / max(1.0, abs(lhs))
    op = fit_shifted_operator(p, nterms)
    return {"residual_as_stated": stated, "q_printed": q_printed, "q_hat": op["q"],
            "accessory_gap": abs(op["q"] - q_printed), "fitted": op,
            "fitted_residual": _apply_fitted(op, p.a, g, dg, d2g, z)}


def second_solution_params(p, q2):
    """Parameters of the exponent ``1 - gamma`` solution at 0 (accessory ``q2``)."""
    return p.replace(q=q2, alpha=p.alpha + 1 - p.gamma, beta=p.beta + 1 - p.gamma,
                     gamma=2 - p.gamma)


def second_solution_accessory(p):
    """Accessory parameter of ``z**(gamma-1) y`` for ``y`` the exponent ``1-gamma`` solution.

    Substituting ``y = z**(1-gamma) G`` into the equation gives a Heun
    equation for ``G`` whose potential numerator is
    ``alpha beta (z - q) + (1-gamma)(delta (z-a) + eps (z-1))``.
    """
    a1 = p.alpha + 1 - p.gamma
    b1 = p.beta + 1 - p.gamma
    num0 = -p.alpha * p.beta * p.q - (1 - p.gamma) * (p.delta * p.a + p.eps)
    return -num0 / (a1 * b1)


def verify_heun_second_row(p, z, nterms=40):
    """Second row of the reparametrised pair at ``z = 0``.

    ``residual_as_stated`` evaluates the printed row with
    ``F_2 = z**(1-gamma) F(q | alpha+1-gamma, beta+1-gamma, gamma, delta)``.
    ``fitted_residual`` applies the operator fitted on the first row to
    ``(eps-1) y_2 + (z-a) y_2'`` with ``y_2`` the true exponent ``1-gamma``
    solution.
    """
    if abs(p.gamma - round(p.gamma.real if isinstance(p.gamma, complex) else p.gamma)) < 1e-12:
        raise_resonant(p)
    z = complex(z)
    pref = _relation_prefactor(p)
    q_printed = printed_shifted_accessory(p)
    pw = z ** (1 - p.gamma)
    dpw = (1 - p.gamma) * z ** (-p.gamma)
    printed_f2 = p.replace(alpha=p.alpha + 1 - p.gamma, beta=p.beta + 1 - p.gamma)
    G, dG = heun_series(printed_f2, z, nderiv=1)
    F2, dF2 = pw * G, dpw * G + pw * dG
    rhs = ((p.eps - 1 - (1 - p.a / z) * (1 - p.gamma)) * F2 + (z - p.a) * dF2) / pref
    lhs_p = p.replace(q=q_printed, alpha=p.alpha - p.gamma, beta=p.beta - p.gamma,
                      gamma=p.gamma + 1, delta=p.delta + 1)
    lhs = pw * heun_series(lhs_p, z)
    stated = abs(lhs - rhs) / max(1.0, abs(lhs))

    true2 = second_solution_params(p, second_solution_accessory(p))
    G, dG, d2G, d3G = heun_series(true2, z, nderiv=3)
    s = 1 - p.gamma
    y = [pw * G,
         pw * (s / z * G + dG),
         pw * (s * (s - 1) / z ** 2 * G + 2 * s / z * dG + d2G),
         pw * (s * (s - 1) * (s - 2) / z ** 3 * G + 3 * s * (s - 1) / z ** 2 * dG
               + 3 * s / z * d2G + d3G)]
    g, dg, d2g = _combination_at(p, z, *y)
    op = fit_shifted_operator(p, nterms)
    return {"residual_as_stated": stated,
            "fitted_residual": _apply_fitted(op, p.a, g, dg, d2g, z)}


def raise_resonant(p):
    from ..errors import ResonantParameters
    raise ResonantParameters(f"gamma = {p.gamma} is an integer: the two branches at 0 collide")

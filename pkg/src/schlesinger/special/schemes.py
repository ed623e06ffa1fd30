"""Riemann schemes and the second-order equations they determine."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import FuchsViolation
from ..fuchsian import INF, as_point, is_inf

TOL_ALG = 1e-12


@dataclass(frozen=True)
class RiemannScheme:
    """Singular points with exponent pairs ``(sigma_i, tau_i)``.

    The exponent at infinity refers to behaviour ``y ~ (1/z)**e``.  The Fuchs
    relation ``sum (sigma_i + tau_i) = m - 2`` (``m`` singular points) is
    enforced on construction.  ``q`` is the accessory parameter of a
    four-point scheme.
    """
    points: tuple
    exponents: tuple
    q: complex = None

    def __post_init__(self):
        points = tuple(as_point(p) for p in self.points)
        exps = tuple((complex(s), complex(t)) for s, t in self.exponents)
        if len(points) != len(exps):
            raise ValueError("one exponent pair per point")
        if len(points) < 3:
            raise ValueError("a scheme needs at least three points")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "exponents", exps)
        excess = fuchs_excess(self)
        if abs(excess) > TOL_ALG * max(1.0, max(abs(v) for e in exps for v in e)):
            raise FuchsViolation(f"Fuchs relation violated by {excess}")

    @property
    def finite(self):
        return [(p, e) for p, e in zip(self.points, self.exponents) if not is_inf(p)]

    @property
    def infinity(self):
        for p, e in zip(self.points, self.exponents):
            if is_inf(p):
                return e
        return None


def fuchs_excess(scheme):
    """``sum (sigma + tau) - (m - 2)``; zero for a Fuchsian scheme."""
    m = len(scheme.points)
    return sum(s + t for s, t in scheme.exponents) - (m - 2)


def scheme3(x, sigma, tau):
    return RiemannScheme(tuple(x), tuple(zip(sigma, tau)))


def hypergeometric_scheme(a, b, c):
    """Scheme of the hypergeometric equation at ``0, 1, inf``."""
    return RiemannScheme((0, 1, INF), ((0, 1 - c), (0, c - a - b), (a, b)))


def heun_scheme(a, q, alpha, beta, gamma, delta):
    eps = alpha + beta - gamma - delta + 1
    return RiemannScheme((0, 1, a, INF),
                         ((0, 1 - gamma), (0, 1 - delta), (0, 1 - eps), (alpha, beta)), q)


class SecondOrderODE:
    """``y'' + p(z) y' + r(z) y = 0`` with rational ``p`` and ``r``."""

    def __init__(self, p, r, singular_points):
        self.p = p
        self.r = r
        self.singular_points = tuple(singular_points)

    def residual(self, y, dy, d2y, z, relative=True):
        pz, rz = self.p(z), self.r(z)
        res = d2y + pz * dy + rz * y
        if not relative:
            return abs(res)
        return abs(res) / max(abs(d2y), abs(pz * dy), abs(rz * y), 1e-300)


def scheme_to_ode3(scheme):
    """Papperitz equation of a three-point scheme.

    Finite points use the symmetric form; when one point is infinity the
    limiting form with two finite points is used.
    """
    if len(scheme.points) != 3:
        raise ValueError("three-point scheme expected")
    fin = scheme.finite
    if len(fin) == 3:
        xs = [p for p, _ in fin]
        st = [s * t for _, (s, t) in fin]
        a = [1 - s - t for _, (s, t) in fin]

        def p(z):
            return sum(ai / (z - xi) for ai, xi in zip(a, xs))

        def r(z):
            tot = 0j
            for k in range(3):
                x0, x1, x2 = xs[k], xs[(k + 1) % 3], xs[(k + 2) % 3]
                tot += st[k] * (x0 - x1) * (x0 - x2) / (z - x0)
            return tot / ((z - xs[0]) * (z - xs[1]) * (z - xs[2]))

        return SecondOrderODE(p, r, xs)
    (x1, (s1, t1)), (x2, (s2, t2)) = fin
    s3, t3 = scheme.infinity

    def p(z):
        return (1 - s1 - t1) / (z - x1) + (1 - s2 - t2) / (z - x2)

    def r(z):
        return ((s1 * t1 * (x1 - x2) / (z - x1) + s2 * t2 * (x2 - x1) / (z - x2) + s3 * t3)
                / ((z - x1) * (z - x2)))

    return SecondOrderODE(p, r, [x1, x2, INF])


def hypergeometric_ode(a, b, c):
    return SecondOrderODE(lambda z: (c - (a + b + 1) * z) / (z * (1 - z)),
                          lambda z: -a * b / (z * (1 - z)), [0, 1, INF])


def heun_ode(a, q, alpha, beta, gamma, delta):
    """Heun's equation with potential ``alpha beta (z - q) / (z (z-1) (z-a))``."""
    eps = alpha + beta - gamma - delta + 1
    return SecondOrderODE(
        lambda z: gamma / z + delta / (z - 1) + eps / (z - a),
        lambda z: alpha * beta * (z - q) / (z * (z - 1) * (z - a)),
        [0, 1, a, INF])


def indicial_roots(ode, point, h=1e-4, samples=16):
    """Indicial roots at ``point`` from the leading Laurent coefficients of p, r.

    ``p_{-1}`` and ``r_{-2}`` are extracted by averaging over a small circle
    (the trapezoidal rule is exact for the principal part up to
    ``O(h**samples)``).
    """
    th = 2 * np.pi * np.arange(samples) / samples
    if is_inf(point):
        w = h * np.exp(1j * th)
        z = 1 / w
        # y = w**e: p_inf = lim z p(z), r_inf = lim z**2 r(z)
        pinf = np.mean([zz * ode.p(zz) for zz in z])
        rinf = np.mean([zz ** 2 * ode.r(zz) for zz in z])
        return np.roots([1, 1 - pinf, rinf])
    u = h * np.exp(1j * th)
    p1 = np.mean([uu * ode.p(point + uu) for uu in u])
    r2 = np.mean([uu ** 2 * ode.r(point + uu) for uu in u])
    return np.roots([1, p1 - 1, r2])


def normalize_scheme(scheme):
    """Factor out ``prod (z - x_i)**sigma_i`` over the finite points.

    Returns ``(prefactor, normalized)`` where ``prefactor`` maps each finite
    point to its exponent.  Finite columns become ``(0, tau - sigma)`` and the
    infinity column gains ``sum sigma_i`` in both rows.
    """
    if scheme.infinity is None:
        raise ValueError("normalization needs infinity among the singular points")
    shift = sum(s for _, (s, _) in scheme.finite)
    pref = {p: s for p, (s, _) in scheme.finite}
    exps = []
    for p, (s, t) in zip(scheme.points, scheme.exponents):
        exps.append((s + shift, t + shift) if is_inf(p) else (0, t - s))
    return pref, RiemannScheme(scheme.points, tuple(exps), scheme.q)


def normalize_table(rows):
    """The same column arithmetic on a bare table ``[(sigma, tau), ...]``.

    The last column is taken to be infinity.  No Fuchs check is made, so
    this also applies to eigenvalue tables ``(lambda_i, -lambda_i)``.
    """
    rows = [tuple(r) for r in rows]
    shift = sum(s for s, _ in rows[:-1])
    out = [(0, t - s) for s, t in rows[:-1]]
    s, t = rows[-1]
    out.append((s + shift, t + shift))
    return out

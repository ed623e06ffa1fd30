"""Rank-2 Fuchsian systems ``dY/dz = sum_i B_i / (z - x_i) Y`` on the sphere.

Poles are finite complex numbers or the singleton :data:`INF`.  When
``INF`` is listed among the poles its residue is stored explicitly and the
residues of a system always sum to zero.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import (DegenerateResidue, EvaluationAtPole, HigherOrderPole,
                     InvalidSystem)
from .rational import RationalMatrix

log = logging.getLogger(__name__)

TOL_ALG = 1e-12
POLE_SEPARATION = 1e-9
DEGENERACY_GAP = 1e-9


class _Infinity:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()


def is_inf(point):
    return point is INF


def as_point(value):
    """Coerce ``value`` to a sphere point (``INF`` or a Python complex)."""
    if value is INF or (isinstance(value, str) and value.lower() in ("inf", "infinity", "oo")):
        return INF
    return complex(value)


@dataclass(frozen=True)
class EigenData:
    """Marked eigenvalue with its two eigenlines (projective directions)."""
    value: complex
    other: complex
    plus: np.ndarray
    minus: np.ndarray


@dataclass(frozen=True)
class PoleInfo:
    point: object
    order: int
    leading: np.ndarray
    laurent: dict = field(default_factory=dict)


@dataclass(frozen=True)
class PoleReport:
    """Result of a gauge transformation that left the Fuchsian class.

    ``poles`` is sorted by decreasing order; ``laurent`` holds, for every
    finite point, the principal-part coefficients ``{k: matrix of (z-a)**-k}``.
    For ``INF`` the entry holds polynomial coefficients ``{m: matrix of z**m}``.
    """
    poles: tuple
    laurent: dict


def normalize_direction(v):
    """Scale a 2-vector so its larger-modulus component equals one."""
    v = np.asarray(v, dtype=complex)
    k = int(np.argmax(np.abs(v)))
    if abs(v[k]) == 0:
        raise DegenerateResidue("zero vector has no direction")
    return v / v[k]


def projective_distance(u, v):
    """Chordal distance between the lines spanned by ``u`` and ``v``."""
    u = np.asarray(u, complex)
    v = np.asarray(v, complex)
    cross = abs(u[0] * v[1] - u[1] * v[0])
    return cross / (np.linalg.norm(u) * np.linalg.norm(v))


def kernel_line(M):
    """Direction spanning ker M for a rank-1 2x2 matrix."""
    rows = [M[0], M[1]]
    row = max(rows, key=lambda r: np.linalg.norm(r))
    if np.linalg.norm(row) == 0:
        raise DegenerateResidue("matrix is zero; kernel is the whole plane")
    return normalize_direction(np.array([row[1], -row[0]]))


def eigenvalues_2x2(B):
    tr = B[0, 0] + B[1, 1]
    det = B[0, 0] * B[1, 1] - B[0, 1] * B[1, 0]
    disc = np.sqrt(complex(tr * tr / 4 - det))
    return tr / 2 + disc, tr / 2 - disc


def default_marking(B):
    """Deterministic choice of marked eigenvalue: the one with larger real part."""
    e1, e2 = eigenvalues_2x2(B)
    if abs(e1.real - e2.real) > 1e-14:
        return e1 if e1.real > e2.real else e2
    return e1 if e1.imag >= e2.imag else e2


def marked_eigenvalue(B, hint):
    """Eigenvalue of ``B`` closest to ``hint``."""
    e1, e2 = eigenvalues_2x2(B)
    return e1 if abs(e1 - hint) <= abs(e2 - hint) else e2


@dataclass(frozen=True, eq=False)
class FuchsianSystem:
    """Poles, residues, gauge tag and eigenvalue marking of one system.

    Instances are immutable; all operations return new systems.
    """
    poles: tuple
    residues: tuple
    gauge: str = "sl2"
    marking: tuple = None

    def __post_init__(self):
        poles = tuple(as_point(p) for p in self.poles)
        residues = tuple(np.array(B, dtype=complex).reshape(2, 2) for B in self.residues)
        for B in residues:
            B.setflags(write=False)
        object.__setattr__(self, "poles", poles)
        object.__setattr__(self, "residues", residues)
        if self.gauge not in ("sl2", "gl2"):
            raise InvalidSystem(f"unknown gauge tag {self.gauge!r}")
        if len(poles) != len(residues):
            raise InvalidSystem("pole and residue lists differ in length")
        if len(poles) < 2:
            raise InvalidSystem("a system needs at least two poles")
        finite = [p for p in poles if not is_inf(p)]
        if len(finite) < len(poles) - 1:
            raise InvalidSystem("infinity listed twice")
        for a, b in itertools.combinations(finite, 2):
            if abs(a - b) < POLE_SEPARATION:
                raise InvalidSystem(f"poles {a} and {b} coincide")
        scale = max(1.0, max(np.abs(B).max() for B in residues))
        total = sum(residues)
        if np.abs(total).max() > TOL_ALG * scale * len(residues):
            raise InvalidSystem(
                f"residues do not sum to zero (|sum| = {np.abs(total).max():.3e})")
        if self.gauge == "sl2":
            for p, B in zip(poles, residues):
                if abs(np.trace(B)) > TOL_ALG * scale:
                    raise InvalidSystem(f"sl2 residue at {p!r} has trace {np.trace(B)}")
        if self.marking is None:
            marking = tuple(default_marking(B) for B in residues)
        else:
            marking = tuple(complex(m) for m in self.marking)
            if len(marking) != len(poles):
                raise InvalidSystem("marking length differs from pole count")
        object.__setattr__(self, "marking", marking)

    # construction helpers -------------------------------------------------
    @classmethod
    def from_finite(cls, poles, residues, gauge="sl2", marking=None, infinity=None):
        """Build from finite poles, appending ``INF`` with residue ``-sum B_i``.

        ``infinity=None`` appends the point at infinity only when the finite
        residues do not already sum to zero.
        """
        poles = [complex(p) for p in poles]
        residues = [np.asarray(B, dtype=complex) for B in residues]
        B_inf = -sum(residues)
        scale = max(1.0, max(np.abs(B).max() for B in residues))
        if infinity is None:
            infinity = np.abs(B_inf).max() > TOL_ALG * scale
        if infinity:
            poles.append(INF)
            residues.append(B_inf)
            if marking is not None and len(marking) == len(poles) - 1:
                marking = list(marking) + [default_marking(B_inf)]
        return cls(tuple(poles), tuple(residues), gauge, None if marking is None else tuple(marking))

    def replace(self, **changes):
        data = dict(poles=self.poles, residues=self.residues, gauge=self.gauge,
                    marking=self.marking)
        data.update(changes)
        return FuchsianSystem(**data)

    # accessors ------------------------------------------------------------
    @property
    def n(self):
        return len(self.poles)

    @property
    def has_infinity(self):
        return any(is_inf(p) for p in self.poles)

    def finite_items(self):
        return [(p, B) for p, B in zip(self.poles, self.residues) if not is_inf(p)]

    def other_eigenvalue(self, i):
        return np.trace(self.residues[i]) - self.marking[i]

    def eigenvalue_pairs(self):
        return [(m, self.other_eigenvalue(i)) for i, m in enumerate(self.marking)]

    def index(self, point):
        point = as_point(point)
        for i, p in enumerate(self.poles):
            if (is_inf(p) and is_inf(point)) or (not is_inf(p) and not is_inf(point)
                                                  and abs(p - point) < POLE_SEPARATION):
                return i
        raise KeyError(point)

    def __repr__(self):
        return (f"FuchsianSystem(poles={list(self.poles)}, gauge={self.gauge!r}, "
                f"marking={[complex(np.round(m, 12)) for m in self.marking]})")


def evaluate(system, z):
    """Connection matrix ``sum_i B_i / (z - x_i)`` over the finite poles."""
    z = complex(z)
    out = np.zeros((2, 2), dtype=complex)
    for p, B in system.finite_items():
        if abs(z - p) < POLE_SEPARATION:
            raise EvaluationAtPole(f"z = {z} coincides with pole {p}")
        out += B / (z - p)
    return out


def eigen_data(system, i):
    """Marked eigenvalue at pole ``i`` and its eigenlines ``ell_plus``, ``ell_minus``.

    ``ell_plus = ker(B_i - lambda_i)`` and ``ell_minus`` is the kernel for the
    complementary eigenvalue ``tr B_i - lambda_i`` (that is ``-lambda_i`` for
    sl2 residues).
    """
    B = system.residues[i]
    lam = system.marking[i]
    other = np.trace(B) - lam
    scale = max(1.0, np.abs(B).max())
    if abs(lam - other) < DEGENERACY_GAP * scale:
        raise DegenerateResidue(f"residue at pole {i} has a repeated eigenvalue {lam}")
    I = np.eye(2)
    plus = kernel_line(B - lam * I)
    minus = kernel_line(B - other * I)
    return EigenData(lam, other, plus, minus)


def eigenvalue_condition(lambdas, tol=TOL_ALG):
    """True iff no signed sum ``sum eps_i lambda_i`` is an integer."""
    lambdas = [complex(v) for v in lambdas]
    for signs in itertools.product((1, -1), repeat=len(lambdas)):
        s = sum(e * v for e, v in zip(signs, lambdas))
        if abs(s.imag) <= tol and abs(s.real - round(s.real)) <= tol:
            return False
    return True


# Moebius chart --------------------------------------------------------------

def _chart_center(points):
    finite = [p for p in points if not is_inf(p)]
    spread = max([abs(p) for p in finite] + [1.0])
    for k in range(64):
        c = complex(0.5 + 0.37 * k, -0.29 - 0.41 * k) * spread * 0.73 + 0.11j
        if all(abs(c - p) > 0.25 * spread for p in finite):
            return c
    raise InvalidSystem("no chart centre found")


def to_finite_chart(points, center):
    """Map sphere points by ``w = 1 / (z - center)``; the centre goes to ``INF``."""
    out = []
    for p in points:
        if is_inf(p):
            out.append(0j)
        elif abs(p - center) < POLE_SEPARATION:
            out.append(INF)
        else:
            out.append(1.0 / (p - center))
    return out


def from_finite_chart(w, center):
    w = complex(w)
    if abs(w) < 1e-300:
        return INF
    return center + 1.0 / w


# gauge transformations ------------------------------------------------------

def _prune(mat, scale, tol):
    return np.abs(mat).max() > tol * scale


def apply_gauge(system, G, G_inv=None, *, operator_form=False, marking=None,
                gauge=None, tol=1e-10, chart_center=None):
    """Transform by ``Y -> G Y``: ``B' = G B G^-1 + G' G^-1`` in partial fractions.

    Parameters
    ----------
    system : FuchsianSystem
    G : RationalMatrix or array_like
        Rational gauge matrix; a plain 2x2 array is treated as a constant.
    G_inv : RationalMatrix, optional
        Inverse of ``G``.  Required unless ``det G`` is a single monomial.
    operator_form : bool
        Interpret the residues as the matrix ``A`` of an operator ``d + A``,
        so that ``A' = G A G^-1 - G' G^-1``.
    marking : sequence, optional
        Hints for the new marked eigenvalues, one per original pole; the new
        marking picks the eigenvalue nearest to each hint.  Defaults to the
        old marking.
    chart_center : complex, optional
        When given, ``G`` is expressed in the coordinate ``w = 1/(z - c)``
        and the computation is carried out in that chart.

    Raises
    ------
    HigherOrderPole
        If the result has a pole of order two or more anywhere on the sphere.
    """
    if not isinstance(G, RationalMatrix):
        G = RationalMatrix.constant(np.asarray(G, dtype=complex))
        if G_inv is None:
            G_inv = RationalMatrix.constant(np.linalg.inv(G.terms[()]))
    if G_inv is None:
        G_inv = _invert(G)
    if chart_center is None:
        points = list(system.poles)
    else:
        points = to_finite_chart(system.poles, chart_center)
    finite = [(k, p, B) for k, (p, B) in enumerate(zip(points, system.residues))
              if not is_inf(p)]
    conn = RationalMatrix.fuchsian([p for _, p, _ in finite], [B for _, _, B in finite])
    sign = -1.0 if operator_form else 1.0
    new = G @ conn @ G_inv + (G.derivative() @ G_inv).scale(sign)
    principal, poly = new.partial_fractions()

    scale = max(1.0, max(np.abs(B).max() for B in system.residues))
    bad = []
    for a, coeffs in principal.items():
        orders = [k for k, m in coeffs.items() if k >= 2 and _prune(m, scale, tol)]
        if orders:
            top = max(orders)
            bad.append(PoleInfo(_back(a, chart_center), top, coeffs[top], coeffs))
    live = [m for m, c in poly.items() if _prune(c, scale, tol)]
    if live:
        top = max(live)
        bad.append(PoleInfo(INF if chart_center is None else _back(0j, chart_center),
                            top + 2, poly[top], poly))
    if bad:
        bad.sort(key=lambda info: -info.order)
        laurent = {info.point: info.laurent for info in bad}
        raise HigherOrderPole(PoleReport(tuple(bad), laurent))

    residue_at = {a: coeffs.get(1, np.zeros((2, 2), complex)) for a, coeffs in principal.items()}
    new_points, new_res, hints = [], [], []
    old_hints = list(system.marking if marking is None else marking)
    used = set()
    for k, p in enumerate(points):
        if is_inf(p):
            new_points.append(system.poles[k])
            new_res.append(None)
        else:
            match = _lookup(residue_at, p)
            used.add(match)
            new_points.append(system.poles[k])
            new_res.append(residue_at[match] if match is not None else np.zeros((2, 2), complex))
        hints.append(old_hints[k])
    for a, R in residue_at.items():
        if a in used or not _prune(R, scale, tol):
            continue
        new_points.append(_back(a, chart_center))
        new_res.append(R)
        hints.append(None)
    finite_sum = sum(R for R in new_res if R is not None)
    if any(R is None for R in new_res):
        idx = next(i for i, R in enumerate(new_res) if R is None)
        new_res[idx] = -finite_sum
    elif _prune(finite_sum, scale, tol) and chart_center is None:
        new_points.append(INF)
        new_res.append(-finite_sum)
        hints.append(None)
    elif _prune(finite_sum, scale, tol):
        new_points.append(_back(np.inf, chart_center))
        new_res.append(-finite_sum)
        hints.append(None)

    new_marking = [default_marking(R) if h is None else marked_eigenvalue(R, h)
                   for R, h in zip(new_res, hints)]
    if gauge is None:
        traces_vanish = all(abs(np.trace(R)) <= TOL_ALG * scale * 10 for R in new_res)
        gauge = system.gauge if traces_vanish else "gl2"
    if gauge == "sl2":
        new_res = [R - np.trace(R) / 2 * np.eye(2) for R in new_res]
    return FuchsianSystem(tuple(new_points), tuple(new_res), gauge, tuple(new_marking))


def _lookup(table, point):
    for a in table:
        if abs(a - point) < POLE_SEPARATION * 10:
            return a
    return None


def _back(w, center):
    if center is None:
        return w
    if w == np.inf:
        return complex(center)
    return from_finite_chart(w, center)


def _invert(G):
    """Inverse of a 2x2 rational matrix whose determinant is one monomial."""
    swap = np.array([[0, 1], [-1, 0]], dtype=complex)
    adj = RationalMatrix({k: swap @ m.T @ swap.T for k, m in G.terms.items()})
    prod = G @ adj
    terms = {k: m[0, 0] for k, m in prod.terms.items()
             if abs(m[0, 0]) > 1e-13 * max(abs(v[0, 0]) for v in prod.terms.values())}
    if len(terms) != 1:
        raise ValueError("det G is not a monomial; pass G_inv explicitly")
    (key, value), = terms.items()
    inv_key = tuple((a, -e) for a, e in key)
    return RationalMatrix({inv_key: np.eye(2)}).scale(1.0 / value) @ adj


def add_scalar_form(system, coefficients, gauge=None, marking=None):
    """Add ``sum_k c_k dz / (z - x_k) * Id`` for pole indices ``k``.

    The coefficients must sum to zero over the sphere so no new pole appears;
    the residue at infinity is adjusted when it is a listed pole.
    """
    residues = [B.copy() for B in system.residues]
    shift = dict(coefficients)
    if abs(sum(shift.values())) > TOL_ALG:
        raise InvalidSystem("scalar form coefficients must sum to zero")
    for k, c in shift.items():
        residues[k] = residues[k] + c * np.eye(2)
    if marking is None:
        marking = [m + shift.get(k, 0.0) for k, m in enumerate(system.marking)]
    return FuchsianSystem(system.poles, tuple(residues), gauge or system.gauge, tuple(marking))


# random systems ---------------------------------------------------------------

def random_invertible(rng, scale=1.0):
    while True:
        g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        g = g * scale
        if abs(np.linalg.det(g)) > 0.2 * scale ** 2:
            return g


def _conjugate_diag(lam, g):
    return g @ np.diag([lam, -lam]) @ np.linalg.inv(g)


def _close_two(S, lam_a, lam_b, rng):
    """Find traceless B with spectrum +-lam_a so that -(S + B) has spectrum +-lam_b."""
    detS = S[0, 0] * S[1, 1] - S[0, 1] * S[1, 0]
    target = detS - lam_a ** 2 + lam_b ** 2
    for _ in range(100):
        x = complex(rng.normal() + 1j * rng.normal()) * 0.5
        rhs = target - 2 * S[0, 0] * x
        # s12 * w + s21 * y = rhs ; y * w = lam_a**2 - x**2
        s12, s21 = S[0, 1], S[1, 0]
        prod = lam_a ** 2 - x ** 2
        if abs(s21) < 1e-8:
            continue
        # y = (rhs - s12 w) / s21  ->  s12 w^2 - rhs w + s21 prod = 0
        roots = np.roots([s12, -rhs, s21 * prod]) if abs(s12) > 1e-12 else [s21 * prod / rhs]
        if len(roots) == 0:
            continue
        w = complex(roots[rng.integers(len(roots))])
        y = (rhs - s12 * w) / s21
        B = np.array([[x, y], [w, -x]], dtype=complex)
        if np.isfinite(B).all() and np.abs(B).max() < 50:
            return B
    raise InvalidSystem("could not close the system with the requested spectra")


def random_sl2_system(rng, lambdas=None, n=None, poles=None, with_infinity=False):
    """Random sl2 system with prescribed residue eigenvalues ``+-lambdas``.

    The marking is set to ``lambdas``.  With ``with_infinity`` the last
    eigenvalue is assigned to the point at infinity.
    """
    if lambdas is None:
        lambdas = [complex(rng.uniform(0.05, 0.45) + 1j * rng.uniform(-0.2, 0.2))
                   for _ in range(n)]
    lambdas = [complex(v) for v in lambdas]
    n = len(lambdas)
    if poles is None:
        m = n - 1 if with_infinity else n
        while True:
            cand = [complex(rng.normal(), rng.normal()) * 1.5 for _ in range(m)]
            if min(abs(a - b) for a, b in itertools.combinations(cand, 2)) > 0.6:
                break
        poles = cand + ([INF] if with_infinity else [])
    poles = [as_point(p) for p in poles]
    for _ in range(50):
        residues = [_conjugate_diag(lam, random_invertible(rng)) for lam in lambdas[:-2]]
        S = sum(residues) if residues else np.zeros((2, 2), complex)
        try:
            B = _close_two(S, lambdas[-2], lambdas[-1], rng)
        except InvalidSystem:
            continue
        residues += [B, -(S + B)]
        scale = max(np.abs(R).max() for R in residues)
        if scale < 20:
            break
    residues = [R - np.trace(R) / 2 * np.eye(2) for R in residues]
    return FuchsianSystem(tuple(poles), tuple(residues), "sl2", tuple(lambdas))

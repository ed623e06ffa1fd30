"""Numerical monodromy of ``dY/dz = B(z) Y`` along keyhole loops.

Loop convention: every loop starts at the common base point, runs along a
straight segment to a small circle around its pole, goes once around it
counterclockwise (clockwise in ``z`` for the point at infinity, which is
counterclockwise in ``w = 1/z``) and returns.  With ``Y(base) = Id`` the
monodromy matrix is ``M_k = Y(end of loop)``, so continuing a solution
along ``gamma_a`` then ``gamma_b`` multiplies by ``M_b M_a``.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import PathTooClose, ReducibleRepresentation, StepUnderflow
from .fuchsian import evaluate, is_inf

log = logging.getLogger(__name__)

TOL_INT = 1e-12


# paths ------------------------------------------------------------------------

@dataclass(frozen=True)
class Line:
    a: complex
    b: complex

    def point(self, s):
        return self.a + (self.b - self.a) * s

    def velocity(self, s):
        return self.b - self.a

    def reverse(self):
        return Line(self.b, self.a)


@dataclass(frozen=True)
class Arc:
    center: complex
    radius: float
    theta0: float
    theta1: float

    def point(self, s):
        th = self.theta0 + (self.theta1 - self.theta0) * s
        return self.center + self.radius * np.exp(1j * th)

    def velocity(self, s):
        th = self.theta0 + (self.theta1 - self.theta0) * s
        return 1j * self.radius * (self.theta1 - self.theta0) * np.exp(1j * th)

    def reverse(self):
        return Arc(self.center, self.radius, self.theta1, self.theta0)


def reverse_path(path):
    return [seg.reverse() for seg in reversed(path)]


def _segment_distance(seg, p, samples=64):
    if isinstance(seg, Line):
        d = seg.b - seg.a
        s = np.clip(((p - seg.a) * np.conj(d)).real / max(abs(d) ** 2, 1e-300), 0, 1)
        return abs(seg.a + s * d - p)
    s = np.linspace(0, 1, samples)
    return float(np.min(np.abs(seg.point(s) - p)))


def path_clearance(system, path):
    """Smallest distance from the path to a finite pole."""
    return min(_segment_distance(seg, p) for seg in path for p, _ in system.finite_items())


def integrate_along(system, path, Y0=None, tol=TOL_INT, min_clearance=None):
    """Solve ``dY = B(z) Y dz`` along ``path`` (a list of segments) from ``Y0``.

    ``det Y`` is integrated alongside as a scalar ODE and compared with the
    matrix result as a sanity check.
    """
    Y = np.eye(2, dtype=complex) if Y0 is None else np.array(Y0, dtype=complex)
    if min_clearance is not None and path_clearance(system, path) < min_clearance:
        raise PathTooClose(f"path passes within {path_clearance(system, path):.3e} of a pole")
    d = np.linalg.det(Y)
    for seg in path:
        def rhs(s, y, seg=seg):
            z = seg.point(s)
            Bz = evaluate(system, z) * seg.velocity(s)
            M = y[:4].reshape(2, 2)
            return np.concatenate([(Bz @ M).ravel(), [np.trace(Bz) * y[4]]])

        y0 = np.concatenate([Y.ravel(), [d]])
        sol = solve_ivp(rhs, (0.0, 1.0), y0, method="DOP853", rtol=tol, atol=tol * 1e-2)
        if not sol.success:
            raise StepUnderflow(sol.message)
        Y = sol.y[:4, -1].reshape(2, 2)
        d = sol.y[4, -1]
    drift = abs(np.linalg.det(Y) - d) / max(1.0, abs(d))
    if drift > 1e-6:
        log.warning("det Y deviates from exp(int tr B) by %.2e", drift)
    return Y


# loop plans ---------------------------------------------------------------------

@dataclass
class LoopPlan:
    """Base point, loop order (pole indices) and circle radii."""
    base: complex
    order: list
    radii: dict = field(default_factory=dict)
    outer_radius: float = None


def _finite(system):
    return [p for p in system.poles if not is_inf(p)]


def default_radius(system, k, base):
    p = system.poles[k]
    others = [abs(p - q) for q in _finite(system) if q != p] + [abs(p - base)]
    return min(others) / 3.0


def _ray_ok(system, plan, k):
    p = system.poles[k]
    r = plan.radii.get(k) or default_radius(system, k, plan.base)
    for q in _finite(system):
        if q == p:
            continue
        if _segment_distance(Line(plan.base, p), q) < 0.5 * default_radius(system, system.poles.index(q), plan.base):
            return False
    return True


def default_plan(system, base=None):
    """Base point outside the convex hull, loops ordered by ray angle."""
    pts = np.array(_finite(system))
    center = pts.mean()
    spread = max(np.abs(pts - center).max(), 0.5)
    candidates = [base] if base is not None else [
        center + 1.5 * spread * np.exp(1j * (-np.pi / 2 + 0.37 + 0.61 * m)) for m in range(24)]
    for b in candidates:
        if min(abs(b - p) for p in pts) < 0.2 * spread:
            continue
        order = [k for k, p in enumerate(system.poles) if not is_inf(p)]
        plan = LoopPlan(complex(b), order)
        if all(_ray_ok(system, plan, k) for k in order):
            # counterclockwise as seen from the base
            ang = {k: np.angle((system.poles[k] - b) / (center - b)) for k in order}
            order.sort(key=lambda k: ang[k])
            inf = [k for k, p in enumerate(system.poles) if is_inf(p)]
            plan.order = order + inf
            plan.outer_radius = float(abs(b - center) + 2 * spread)
            return plan
    raise PathTooClose("no admissible base point found")


def loop_path(system, plan, k):
    p = system.poles[k]
    b = plan.base
    if is_inf(p):
        center = np.mean(_finite(system))
        R = plan.outer_radius or (abs(b - center) + 2 * max(abs(q - center) for q in _finite(system)))
        u = (b - center) / abs(b - center)
        start = center + R * u
        th = np.angle(u)
        return [Line(b, start), Arc(center, R, th, th - 2 * np.pi), Line(start, b)]
    r = plan.radii.get(k) or default_radius(system, k, b)
    u = (b - p) / abs(b - p)
    start = p + r * u
    th = np.angle(u)
    return [Line(b, start), Arc(p, r, th, th + 2 * np.pi), Line(start, b)]


@dataclass
class MonodromyRep:
    """Monodromy matrices in plan order (``matrices[m]`` belongs to ``plan.order[m]``)."""
    matrices: list
    plan: LoopPlan
    tol: float

    def by_pole(self):
        return dict(zip(self.plan.order, self.matrices))

    def product(self):
        """``M_last ... M_first``: the loops composed in plan order."""
        out = np.eye(2, dtype=complex)
        for M in self.matrices:
            out = M @ out
        return out


def loop_matrix(system, plan, k, tol=TOL_INT):
    """Monodromy of loop ``k``: ``P^-1 C P`` with ``P`` the outgoing segment.

    The return segment is the reverse of the outgoing one, so it is
    replaced by the exact inverse instead of a second integration.
    """
    out, circle, _ = loop_path(system, plan, k)
    P = integrate_along(system, [out], tol=tol)
    C = integrate_along(system, [circle], tol=tol)
    return np.linalg.solve(P, C @ P)


def monodromy(system, plan=None, tol=TOL_INT):
    plan = default_plan(system) if plan is None else plan
    mats = [loop_matrix(system, plan, k, tol) for k in plan.order]
    return MonodromyRep(mats, plan, tol)


def product_error(rep):
    """Distance of the loop product from ``+-Id``, relative to the product of norms."""
    prod = rep.product()
    scale = np.prod([np.linalg.norm(M, 2) for M in rep.matrices])
    return min(np.abs(prod - np.eye(2)).max(), np.abs(prod + np.eye(2)).max()) / scale


def local_exponent_error(rep, system):
    """``max_k |tr M_k - 2 cos(2 pi lambda_k)|`` over non-resonant poles (sl2)."""
    err = 0.0
    for k, M in rep.by_pole().items():
        lam = system.marking[k]
        mu = system.other_eigenvalue(k)
        if abs((lam - mu) - round((lam - mu).real)) < 1e-9:
            continue
        expected = np.exp(2j * np.pi * lam) + np.exp(2j * np.pi * mu)
        err = max(err, abs(np.trace(M) - expected))
    return err


# projective comparison ------------------------------------------------------------

def _conjugator(m1, m2, signs):
    rows = []
    I = np.eye(2)
    for A, B, s in zip(m1, m2, signs):
        rows.append(np.kron(A.T, I) - s * np.kron(I, B))
    K = np.vstack(rows)
    _, sv, vh = np.linalg.svd(K)
    scale = max(1.0, max(np.abs(A).max() for A in list(m1) + list(m2)))
    return vh[-1].conj().reshape(2, 2, order="F"), sv[-1] / scale, sv[-2] / scale


def compare_projective(rep1, rep2, flip=()):
    """Find ``C`` and signs with ``M2_k = s_k C M1_k C^-1``.

    Sign ``-1`` is tried only at the plan positions listed in ``flip`` (pole
    indices); all subsets of ``flip`` are tried, including the empty one.
    """
    m1 = rep1.matrices if isinstance(rep1, MonodromyRep) else list(rep1)
    m2 = rep2.matrices if isinstance(rep2, MonodromyRep) else list(rep2)
    order = rep1.plan.order if isinstance(rep1, MonodromyRep) else list(range(len(m1)))
    best = None
    for r in range(len(flip) + 1):
        for subset in itertools.combinations(flip, r):
            signs = [-1 if k in subset else 1 for k in order]
            C, res, gap = _conjugator(m1, m2, signs)
            if best is None or res < best["residual"]:
                best = {"conjugator": C, "signs": dict(zip(order, signs)),
                        "residual": res, "gap": gap}
    if best["gap"] < 1e3 * max(best["residual"], 1e-14) and best["gap"] < 1e-6:
        raise ReducibleRepresentation("conjugator is not unique up to scale")
    return best


def isomonodromy_drift(snapshots, tol=TOL_INT):
    """Largest projective residual between consecutive snapshots (all signs +1)."""
    reps = [monodromy(s, p, tol=tol) for s, p in snapshots]
    drift = 0.0
    for a, b in zip(reps, reps[1:]):
        drift = max(drift, compare_projective(a, b)["residual"])
    return drift

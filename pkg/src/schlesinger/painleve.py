"""Painleve VI: Hamiltonian form, Schlesinger flow and the (0,1) Backlund shift.

Parameters ``lam = (l0, l1, lt, linf)`` enter the Hamiltonian

    t(t-1) H = x(x-1)(x-t) p**2 - S(x) p + kappa (x - t),
    S(x) = l0 (x-1)(x-t) + l1 x (x-t) + (lt - 1) x (x-1),
    kappa = ((l0 + l1 + lt - 1)**2 - linf**2) / 4,

and the second-order equation through ``alpha = linf**2/2, beta = l0**2/2,
gamma = l1**2/2, delta = lt**2/2``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import minimize_scalar

from .errors import BlowUpDetected, PoleCollision, SingularState
from .fuchsian import INF, FuchsianSystem, is_inf

STATE_MARGIN = 1e-6
BLOWUP = 1e8


@dataclass(frozen=True)
class PviParams:
    l0: complex
    l1: complex
    lt: complex
    linf: complex

    @property
    def alpha(self):
        return self.linf ** 2 / 2

    @property
    def beta(self):
        return self.l0 ** 2 / 2

    @property
    def gamma(self):
        return self.l1 ** 2 / 2

    @property
    def delta(self):
        return self.lt ** 2 / 2

    @property
    def kappa(self):
        return ((self.l0 + self.l1 + self.lt - 1) ** 2 - self.linf ** 2) / 4

    def shifted(self, d0=0, d1=0, dt=0, dinf=0):
        return PviParams(self.l0 + d0, self.l1 + d1, self.lt + dt, self.linf + dinf)

    def as_tuple(self):
        return (self.l0, self.l1, self.lt, self.linf)


@dataclass(frozen=True)
class HamiltonianState:
    x: complex
    p: complex
    t: complex


def _check_time(t):
    if abs(t) < STATE_MARGIN or abs(t - 1) < STATE_MARGIN:
        raise SingularState(f"t = {t} is at a fixed singular point")


def _check_x(x, t):
    for c in (0, 1, t):
        if abs(x - c) < STATE_MARGIN:
            raise SingularState(f"x = {x} collides with {c}")


def _pieces(x, t, P):
    f = x * (x - 1) * (x - t)
    fx = 3 * x ** 2 - 2 * (1 + t) * x + t
    S = P.l0 * (x - 1) * (x - t) + P.l1 * x * (x - t) + (P.lt - 1) * x * (x - 1)
    Sx = P.l0 * (2 * x - 1 - t) + P.l1 * (2 * x - t) + (P.lt - 1) * (2 * x - 1)
    return f, fx, S, Sx


def hamiltonian(x, p, t, P):
    _check_time(t)
    f, _, S, _ = _pieces(x, t, P)
    return (f * p ** 2 - S * p + P.kappa * (x - t)) / (t * (t - 1))


def dH_dp(x, p, t, P):
    _check_time(t)
    f, _, S, _ = _pieces(x, t, P)
    return (2 * f * p - S) / (t * (t - 1))


def dH_dx(x, p, t, P):
    _check_time(t)
    _, fx, _, Sx = _pieces(x, t, P)
    return (fx * p ** 2 - Sx * p + P.kappa) / (t * (t - 1))


def hamilton_rhs(t, x, p, P):
    return dH_dp(x, p, t, P), -dH_dx(x, p, t, P)


def second_derivative(x, p, t, P):
    """``d2x/dt2`` along a solution of Hamilton's equations, by the chain rule."""
    T = t * (t - 1)
    f, fx, S, Sx = _pieces(x, t, P)
    xd = (2 * f * p - S) / T
    pd = -(fx * p ** 2 - Sx * p + P.kappa) / T
    ft = -x * (x - 1)
    St = -P.l0 * (x - 1) - P.l1 * x
    num = 2 * fx * xd * p + 2 * ft * p + 2 * f * pd - Sx * xd - St
    return num / T - xd * (2 * t - 1) / T


def pvi_rhs(x, dx, t, P):
    """Right-hand side of the second-order equation for ``x(t)``."""
    _check_time(t)
    _check_x(x, t)
    return (0.5 * (1 / x + 1 / (x - 1) + 1 / (x - t)) * dx ** 2
            - (1 / t + 1 / (t - 1) + 1 / (x - t)) * dx
            + x * (x - 1) * (x - t) / (t ** 2 * (t - 1) ** 2)
            * (P.alpha - P.beta * t / x ** 2 + P.gamma * (t - 1) / (x - 1) ** 2
               + (0.5 - P.delta) * t * (t - 1) / (x - t) ** 2))


def pvi_residual(x, dx, d2x, t, P):
    """Relative residual of the second-order equation."""
    rhs = pvi_rhs(x, dx, t, P)
    return abs(d2x - rhs) / max(abs(d2x), abs(rhs), 1.0)


@dataclass
class Trajectory:
    t: np.ndarray
    x: np.ndarray
    p: np.ndarray
    params: PviParams
    dense: object = None

    def at(self, t):
        y = self.dense(t)
        return y[0], y[1]


def _blowup_event(t, y, *args):
    return BLOWUP - max(abs(y[0]), abs(y[1]))


_blowup_event.terminal = True


def hamilton_flow(state, P, t1, tol=1e-12, t_eval=None):
    """Integrate Hamilton's equations from ``state`` (at ``state.t``) to ``t1``.

    The path in ``t`` is the straight segment ``state.t -> t1``, so complex
    endpoints are allowed.  Raises ``BlowUpDetected`` with the ``t`` estimate
    when ``|x|`` or ``|p|`` exceeds ``1e8`` or the step size collapses.
    """
    t0 = complex(state.t)
    t1 = complex(t1)
    _check_time(t0)
    _check_time(t1)
    d = t1 - t0

    def rhs(s, y):
        t = t0 + s * d
        xd, pd = hamilton_rhs(t, y[0], y[1], P)
        return [xd * d, pd * d]

    s_eval = None if t_eval is None else [((complex(t) - t0) / d).real for t in t_eval]
    y0 = np.array([state.x, state.p], dtype=complex)
    sol = solve_ivp(rhs, (0.0, 1.0), y0, method="DOP853", rtol=tol, atol=tol * 1e-2,
                    t_eval=s_eval, dense_output=True, events=_blowup_event)
    if sol.status != 0:
        s_stop = sol.t[-1] if len(sol.t) else 0.0
        raise BlowUpDetected(f"trajectory left the chart near t = {t0 + s_stop * d}",
                             t_estimate=t0 + s_stop * d,
                             trajectory=(t0 + sol.t * d, sol.y[0], sol.y[1]))
    ts = t0 + sol.t * d
    ts = ts.real if abs(d.imag) == 0 and t0.imag == 0 else ts
    dense = sol.sol

    def at(t):
        return dense(((complex(t) - t0) / d).real)

    return Trajectory(ts, sol.y[0], sol.y[1], P, at)


def trajectory_pvi_residual(traj):
    """Largest second-order residual of ``x(t)`` along a Hamiltonian trajectory."""
    P = traj.params
    worst = 0.0
    for t, x, p in zip(traj.t, traj.x, traj.p):
        xd = dH_dp(x, p, t, P)
        worst = max(worst, pvi_residual(x, xd, second_derivative(x, p, t, P), t, P))
    return worst


# Backlund shift at the pair (0, 1) ------------------------------------------------

def backlund_delta(x, c=1.0):
    return c * (1 / (x - 1) - 1 / x)


def backlund_pair01(state, P, c=1.0):
    """``p -> p + c (1/(x-1) - 1/x)``, ``l0 -> l0 + 1/2``, ``l1 -> l1 - 1/2``, ``x`` fixed."""
    if abs(state.x) < STATE_MARGIN or abs(state.x - 1) < STATE_MARGIN:
        raise SingularState(f"x = {state.x} is at 0 or 1")
    return (HamiltonianState(state.x, state.p + backlund_delta(state.x, c), state.t),
            P.shifted(d0=0.5, d1=-0.5))


def hamilton_defect(x, xd, p, pd, t, P):
    """Relative defect of Hamilton's equations for given ``(x, p)`` and derivatives."""
    a = dH_dp(x, p, t, P)
    b = -dH_dx(x, p, t, P)
    return max(abs(xd - a) / max(abs(xd), abs(a), 1.0), abs(pd - b) / max(abs(pd), abs(b), 1.0))


def mapped_defect(traj, P_new, shift):
    """Defect of ``(x, p + shift(x))`` for ``P_new`` along ``traj``.

    ``shift`` returns ``(value, d value / dx)``.
    """
    P = traj.params
    worst = 0.0
    for t, x, p in zip(traj.t, traj.x, traj.p):
        xd, pd = hamilton_rhs(t, x, p, P)
        s, ds = shift(x)
        worst = max(worst, hamilton_defect(x, xd, p + s, pd + ds * xd, t, P_new))
    return worst


def backlund_property(traj, c=1.0, P_new=None):
    """Defect of the printed shift (coefficient ``c``) along a trajectory."""
    P_new = traj.params.shifted(d0=0.5, d1=-0.5) if P_new is None else P_new

    def shift(x):
        return c * (1 / (x - 1) - 1 / x), c * (-1 / (x - 1) ** 2 + 1 / x ** 2)

    return mapped_defect(traj, P_new, shift)


def fit_backlund_coefficient(traj, P_new=None, bounds=(-4.0, 4.0)):
    """Real ``c`` minimising the defect of ``p -> p + c (1/(x-1) - 1/x)``."""
    res = minimize_scalar(lambda c: backlund_property(traj, c, P_new), bounds=bounds,
                          method="bounded", options={"xatol": 1e-10})
    return res.x, res.fun


# Schlesinger flow ------------------------------------------------------------------

def schlesinger_system(t, B0, B1, Bt, marking=None):
    """System with poles ``0, 1, t, inf``."""
    res = [np.asarray(B, dtype=complex) for B in (B0, B1, Bt)]
    return FuchsianSystem((0.0, 1.0, complex(t), INF), tuple(res + [-sum(res)]), "sl2", marking)


def _moving_index(S):
    fixed = {0.0, 1.0}
    movable = [k for k, p in enumerate(S.poles) if not is_inf(p) and complex(p) not in fixed]
    if len(movable) != 1 or S.n != 4:
        raise ValueError("expected poles 0, 1, t, inf")
    return movable[0]


def schlesinger_rhs(S):
    """``dB_k/dt`` for all poles (moving pole ``t``; ``0``, ``1``, ``inf`` fixed)."""
    kt = _moving_index(S)
    t = S.poles[kt]
    Bt = S.residues[kt]
    out = [np.zeros((2, 2), complex) for _ in S.poles]
    for k, (p, B) in enumerate(zip(S.poles, S.residues)):
        if k == kt or is_inf(p):
            continue
        comm = Bt @ B - B @ Bt
        out[k] = comm / (t - p)
        out[kt] = out[kt] - comm / (t - p)
    return out


def schlesinger_flow(S, t1, tol=1e-12, t_eval=None):
    """Integrate the Schlesinger equations from ``S`` to the moving-pole position ``t1``.

    Returns the list of systems at ``t_eval`` (default: the endpoint only).
    """
    kt = _moving_index(S)
    t0 = complex(S.poles[kt])
    t1 = complex(t1)
    for c in (0, 1):
        if min(abs(t0 - c), abs(t1 - c)) < STATE_MARGIN:
            raise PoleCollision(f"moving pole approaches {c}")
    d = t1 - t0
    fin = [k for k, p in enumerate(S.poles) if not is_inf(p)]

    def rhs(s, y):
        res = y.reshape(len(fin), 2, 2)
        poles = list(S.poles)
        poles[kt] = t0 + s * d
        full = list(S.residues)
        for m, k in enumerate(fin):
            full[k] = res[m]
        inf = [k for k, p in enumerate(S.poles) if is_inf(p)]
        for k in inf:
            full[k] = -res.sum(axis=0)
        cur = _raw(poles, full, S)
        dr = schlesinger_rhs(cur)
        return np.concatenate([dr[k].ravel() for k in fin]) * d

    y0 = np.concatenate([S.residues[k].ravel() for k in fin])
    times = [t1] if t_eval is None else [complex(t) for t in t_eval]
    s_eval = [((t - t0) / d).real for t in times]
    sol = solve_ivp(rhs, (0.0, 1.0), y0, method="DOP853", rtol=tol, atol=tol * 1e-2,
                    t_eval=s_eval)
    if not sol.success:
        raise PoleCollision(sol.message)
    out = []
    for m, s in enumerate(sol.t):
        res = sol.y[:, m].reshape(len(fin), 2, 2)
        poles = list(S.poles)
        poles[kt] = t0 + s * d
        full = list(S.residues)
        for j, k in enumerate(fin):
            full[k] = res[j]
        for k, p in enumerate(S.poles):
            if is_inf(p):
                full[k] = -res.sum(axis=0)
        out.append(FuchsianSystem(tuple(poles), tuple(full), S.gauge, S.marking))
    return out


class _raw:
    """Lightweight pole/residue holder used inside the integrator."""

    def __init__(self, poles, residues, ref):
        self.poles = poles
        self.residues = residues
        self.n = ref.n


# (x, p) chart ------------------------------------------------------------------------

def normalize_infinity(S):
    """Conjugate by a constant matrix so that ``B_inf = diag(m_inf, -m_inf)``."""
    kinf = [k for k, p in enumerate(S.poles) if is_inf(p)][0]
    w, V = np.linalg.eig(S.residues[kinf])
    i = int(np.argmin(np.abs(w - S.marking[kinf])))
    V = V[:, [i, 1 - i]]
    if abs(np.linalg.det(V)) < 1e-10:
        raise SingularState("residue at infinity is not diagonalisable")
    Vi = np.linalg.inv(V)
    return S.replace(residues=tuple(Vi @ B @ V for B in S.residues))


def chart_params(S):
    """``PviParams`` of a normalised system: ``2 m_k`` at ``0, 1, t`` and ``2 m_inf - 1``."""
    m = S.marking
    kt = _moving_index(S)
    order = [S.index(0.0), S.index(1.0), kt, S.index(INF)]
    return PviParams(2 * m[order[0]], 2 * m[order[1]], 2 * m[order[2]], 2 * m[order[3]] - 1)


def off_diagonal_numerator(S):
    """Coefficients (highest degree first) of ``B_12(z) * prod (z - x_k)``."""
    fin = S.finite_items()
    poly = np.zeros(len(fin), dtype=complex)
    for k, (p, B) in enumerate(fin):
        q = np.array([1.0 + 0j])
        for j, (pp, _) in enumerate(fin):
            if j != k:
                q = np.convolve(q, [1.0, -pp])
        poly = poly + B[0, 1] * q
    return poly


def xp_coordinates(S, normalize=True):
    """``(x, p, t)`` of an ``n = 4`` sl2 system with poles ``0, 1, t, inf``.

    After conjugating ``B_inf`` to ``diag(m_inf, -m_inf)``, ``x`` is the zero
    of the numerator of ``B_12`` (degree one because ``(B_inf)_12 = 0``) and
    ``p = B_11(x) + sum_k m_k / (x - x_k)``, the ``(1,1)`` entry at ``x`` of
    the connection with residues ``B_k + m_k Id``.
    """
    from .fuchsian import evaluate
    if S.gauge != "sl2":
        raise ValueError("xp_coordinates expects an sl2 system")
    kt = _moving_index(S)
    S = normalize_infinity(S) if normalize else S
    poly = off_diagonal_numerator(S)
    scale = max(np.abs(B).max() for B in S.residues)
    lead = poly[0] if len(poly) == 3 else 0.0
    if abs(lead) > 1e-9 * scale:
        raise ValueError("numerator of B_12 is not of degree one")
    if abs(poly[-2]) < 1e-12 * scale:
        from .errors import DegenerateOffDiagonal
        raise DegenerateOffDiagonal("B_12 vanishes identically or has no finite zero")
    x = -poly[-1] / poly[-2]
    t = S.poles[kt]
    p = evaluate(S, x)[0, 0] + sum(m / (x - q) for q, m in zip(S.poles, S.marking)
                                   if not is_inf(q))
    return HamiltonianState(complex(x), complex(p), complex(t))


def matrix_backlund(S):
    """The pair modification at poles ``0`` and ``1``: ``m_0 + 1/2``, ``m_1 - 1/2``."""
    from .modification import PairSpec, pair_modify
    return pair_modify(S, PairSpec(S.index(0.0), S.index(1.0)))


def commuting_defect(S):
    """Distance between ``xp(matrix_backlund(S))`` and ``backlund_pair01(xp(S))``.

    Returns ``{"dx", "dp", "matrix": state, "printed": state}``.
    """
    S = normalize_infinity(S)
    st = xp_coordinates(S)
    printed, _ = backlund_pair01(st, chart_params(S))
    mat = xp_coordinates(matrix_backlund(S))
    return {"dx": abs(mat.x - printed.x), "dp": abs(mat.p - printed.p),
            "matrix": mat, "printed": printed}


def flow_derivative(S, fn, eps=1e-6):
    """``d fn(S(t)) / dt`` by a central difference along the Schlesinger vector field."""
    kt = _moving_index(S)

    def moved(e):
        d = schlesinger_rhs(S)
        poles = list(S.poles)
        poles[kt] = S.poles[kt] + e
        return S.replace(poles=tuple(poles),
                         residues=tuple(B + e * dB for B, dB in zip(S.residues, d)))

    return (np.asarray(fn(moved(eps))) - np.asarray(fn(moved(-eps)))) / (2 * eps)


def chart_hamilton_defect(S, transform=None):
    """Defect of Hamilton's equations for the ``(x, p)`` image of the flow at ``S``.

    With ``transform`` (a map on systems, e.g. ``matrix_backlund``) the image
    of the transformed flow is tested against the transformed parameters.
    """
    S = normalize_infinity(S)
    transform = transform or (lambda s: s)

    def xp(s):
        st = xp_coordinates(transform(s))
        return np.array([st.x, st.p])

    xd, pd = flow_derivative(S, xp)
    target = transform(S)
    st = xp_coordinates(target)
    return hamilton_defect(st.x, xd, st.p, pd, st.t, chart_params(target))


def state_from_system(S):
    """``(HamiltonianState, PviParams)`` read from a system."""
    S = normalize_infinity(S)
    return xp_coordinates(S), chart_params(S)

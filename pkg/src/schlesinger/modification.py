"""Lower/upper modifications and the Schlesinger pair transformations.

Conventions (for ``dY/dz = B(z) Y`` and gauges ``Y -> G Y``):

* lower at ``U`` with complement ``V``: ``G = Pi_U + (z - x) Pi_V``; the
  eigenvalue carried by ``V`` grows by one.
* upper at ``U`` with complement ``V``: ``G = (z - x)**-1 Pi_U + Pi_V``; the
  eigenvalue carried by ``U`` drops by one.

In both cases ``V`` has to be an eigenline of the residue, otherwise the
pole order rises.  With the default selectors this reproduces the shift
table ``(x_i, l_i^-)^low : lambda_i -> lambda_i + 1`` and
``(x_j, l_j^+)^up : lambda_j -> lambda_j - 1``.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateResidue, GaugeTagMismatch, HigherOrderPole, InvalidSystem
from .fuchsian import (TOL_ALG, FuchsianSystem, _chart_center, add_scalar_form,
                       apply_gauge, eigen_data, eigenvalue_condition, is_inf,
                       normalize_direction, projective_distance, to_finite_chart)
from .rational import RationalMatrix

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ModificationStep:
    """One elementary modification at pole ``pole``.

    ``subspace`` and ``complement`` are ``"plus"``, ``"minus"`` or an explicit
    2-vector.  A missing complement means the other eigenline.
    """
    pole: int
    direction: str = "lower"
    subspace: object = "minus"
    complement: object = None

    def __post_init__(self):
        if self.direction not in ("lower", "upper"):
            raise ValueError(f"direction must be 'lower' or 'upper', got {self.direction!r}")


@dataclass(frozen=True)
class PairSpec:
    i: int
    j: int


def projectors(u, v):
    """Projectors onto ``u`` along ``v`` and onto ``v`` along ``u``."""
    P = np.column_stack([u, v]).astype(complex)
    if abs(np.linalg.det(P)) < 1e-12 * np.linalg.norm(u) * np.linalg.norm(v):
        raise InvalidSystem("subspace and complement coincide")
    Pinv = np.linalg.inv(P)
    pu = np.outer(P[:, 0], Pinv[0])
    pv = np.outer(P[:, 1], Pinv[1])
    return pu, pv


def _resolve(system, i, sel, eig=None):
    if isinstance(sel, str):
        eig = eig if eig is not None else eigen_data(system, i)
        return {"plus": eig.plus, "minus": eig.minus}[sel]
    return normalize_direction(sel)


def _step_lines(system, step):
    try:
        eig = eigen_data(system, step.pole)
    except DegenerateResidue:
        eig = None
    U = _resolve(system, step.pole, step.subspace, eig)
    if step.complement is None:
        if isinstance(step.subspace, str):
            comp = "plus" if step.subspace == "minus" else "minus"
            V = _resolve(system, step.pole, comp, eig)
        elif eig is None:
            raise DegenerateResidue("complement must be given at a resonant pole")
        else:
            # the eigenline that is not U
            V = eig.minus if _is_line(U, eig.plus) else eig.plus
    else:
        V = _resolve(system, step.pole, step.complement, eig)
    return U, V, eig


def _is_line(u, v, tol=1e-9):
    return abs(u[0] * v[1] - u[1] * v[0]) < tol * np.linalg.norm(u) * np.linalg.norm(v)


def glueing_matrix(step, U, V, x):
    """Glueing matrix of ``step`` at the finite point ``x``, with its inverse."""
    pu, pv = projectors(U, V)
    if step.direction == "lower":
        G = RationalMatrix.from_terms([([], pu), ([(x, 1)], pv)])
        Ginv = RationalMatrix.from_terms([([], pu), ([(x, -1)], pv)])
    else:
        G = RationalMatrix.from_terms([([(x, -1)], pu), ([], pv)])
        Ginv = RationalMatrix.from_terms([([(x, 1)], pu), ([], pv)])
    return G, Ginv


def _predicted_marking(system, step, V, eig):
    # the complement is an eigenline; the shifted eigenvalue is read off from it
    marking = list(system.marking)
    if eig is None:
        return marking
    lam = system.marking[step.pole]
    if step.direction == "lower" and _is_line(V, eig.plus):
        marking[step.pole] = lam + 1
    elif step.direction == "upper" and _is_line(V, eig.minus):
        marking[step.pole] = lam - 1
    return marking


def drop_trivial(system, tol=TOL_ALG):
    """Remove poles whose residue vanishes (keeping at least two poles)."""
    scale = max(1.0, max(np.abs(B).max() for B in system.residues))
    keep = [k for k, B in enumerate(system.residues) if np.abs(B).max() > tol * scale * 10]
    if len(keep) == system.n or len(keep) < 2:
        return system
    return FuchsianSystem(tuple(system.poles[k] for k in keep),
                          tuple(system.residues[k] for k in keep), system.gauge,
                          tuple(system.marking[k] for k in keep))


def is_invariant(B, v, tol=1e-9):
    w = B @ v
    return abs(w[0] * v[1] - w[1] * v[0]) <= tol * max(1.0, np.abs(B).max()) * np.linalg.norm(v) ** 2


def apply_step(system, step, allow_noninvariant=False):
    """Apply one lower/upper modification.

    The result is a ``gl2`` system.  In the sphere chart the glueing matrix
    also acts at infinity (or at an auxiliary regular point when infinity
    is already a pole), which shows up as an extra pole with a rank-one
    residue of integer eigenvalues; it disappears again after the inverse
    step.

    With ``allow_noninvariant`` a complement that is not an eigenline is
    accepted and the resulting :class:`~schlesinger.fuchsian.PoleReport`
    is returned in place of a system.
    """
    i = step.pole
    if is_inf(system.poles[i]):
        raise InvalidSystem("modify at a finite pole; move infinity with a Moebius chart first")
    x = system.poles[i]
    B = system.residues[i]
    if allow_noninvariant:
        U = _resolve(system, i, step.subspace)
        V = _resolve(system, i, step.complement) if step.complement is not None else None
        if V is None:
            V = np.array([-np.conj(U[1]), np.conj(U[0])])
        eig = None
    else:
        U, V, eig = _step_lines(system, step)
        if not is_invariant(B, V):
            raise InvalidSystem(
                "complement line is not residue-invariant; pass allow_noninvariant=True "
                "to inspect the resulting higher-order pole")
    marking = _predicted_marking(system, step, V, eig)
    G, Ginv = glueing_matrix(step, U, V, x)
    try:
        return drop_trivial(apply_gauge(system, G, Ginv, marking=marking, gauge="gl2"))
    except HigherOrderPole as exc:
        if allow_noninvariant:
            return exc.report
        if not system.has_infinity:
            raise
        last = exc
    # The glueing matrix also acts at the chart's infinity.  Try the existing
    # poles as that point (an inverse step must land on the compensation pole
    # of the forward step), then a fresh regular point.
    centers = [p for k, p in enumerate(system.poles) if k != i and not is_inf(p)]
    centers.append(_chart_center(system.poles))
    for c in centers:
        xw = to_finite_chart([x], c)[0]
        G, Ginv = glueing_matrix(step, U, V, xw)
        try:
            return drop_trivial(apply_gauge(system, G, Ginv, marking=marking, gauge="gl2",
                                            chart_center=c))
        except HigherOrderPole as exc:
            last = exc
    raise last


def inverse_step(system, step):
    """Step undoing ``step``, expressed with explicit lines of ``system``.

    Lower at ``U`` (complement ``V``) is undone by upper at ``V`` with
    complement ``U``, and vice versa.
    """
    U, V, _ = _step_lines(system, step)
    return ModificationStep(step.pole, "upper" if step.direction == "lower" else "lower",
                            subspace=V, complement=U)


# Schlesinger pairs ------------------------------------------------------------

def _elementary(system, i, j, line_i, line_j, marking):
    """Gauge ``G = Q + (z - x_i)/(z - x_j) P`` with ``im P = line_i``, ``ker P = line_j``."""
    pu, pv = projectors(line_j, line_i)  # pv: onto line_i along line_j
    xi, xj = system.poles[i], system.poles[j]
    center = None
    if is_inf(xi) or is_inf(xj):
        center = _chart_center(system.poles)
        xi, xj = to_finite_chart([xi, xj], center)
    G = RationalMatrix.from_terms([([], pu), ([(xi, 1), (xj, -1)], pv)])
    Ginv = RationalMatrix.from_terms([([], pu), ([(xi, -1), (xj, 1)], pv)])
    out = apply_gauge(system, G, Ginv, marking=marking, gauge="gl2", chart_center=center)
    if out.n != system.n:
        raise InvalidSystem("elementary transformation changed the pole set")
    return out


def _check_pair(system, i, j):
    if i == j:
        raise ValueError("pair_modify needs two distinct poles; use long_shift")
    for k in (i, j):
        if not 0 <= k < system.n:
            raise IndexError(f"pole index {k} out of range")


def pair_modify(system, spec, check_condition=True):
    """The sl2 Schlesinger pair ``(low at l_i^-) o (up at l_j^+) + omega_ij``.

    Marked eigenvalues move ``lambda_i -> lambda_i + 1/2`` and
    ``lambda_j -> lambda_j - 1/2``; every other residue keeps its spectrum.
    """
    if system.gauge != "sl2":
        raise GaugeTagMismatch("pair_modify acts on sl2 systems; use gl2_pair_modify")
    i, j = (spec.i, spec.j) if isinstance(spec, PairSpec) else spec
    _check_pair(system, i, j)
    if check_condition and not eigenvalue_condition(system.marking):
        warnings.warn("eigenvalue condition fails; the system may be reducible", stacklevel=2)
    ei, ej = eigen_data(system, i), eigen_data(system, j)
    marking = list(system.marking)
    marking[i] += 1
    marking[j] -= 1
    mid = _elementary(system, i, j, ei.plus, ej.minus, marking)
    out = add_scalar_form(mid, {i: -0.5, j: 0.5}, gauge="gl2")
    return out.replace(residues=_strip_trace(out.residues), gauge="sl2")


def _strip_trace(residues):
    """Remove round-off traces; the exact result is trace-free."""
    scale = max(1.0, max(np.abs(B).max() for B in residues))
    out = []
    for B in residues:
        tr = np.trace(B)
        if abs(tr) > 1e3 * TOL_ALG * scale:
            raise InvalidSystem(f"residue trace {tr:.3e} exceeds round-off")
        out.append(B - 0.5 * tr * np.eye(2))
    return tuple(out)


def flip_marking(system, i):
    """Local Weyl flip at pole ``i``: the other eigenvalue becomes the marked one."""
    marking = list(system.marking)
    marking[i] = system.other_eigenvalue(i)
    return system.replace(marking=tuple(marking))


def _best_aux(system, k):
    """Auxiliary pole whose minus line is farthest from the plus line at ``k``.

    Nearly parallel lines make the intermediate residues large and cost
    digits, so the best-conditioned partner is chosen.
    """
    finite_only = not is_inf(system.poles[k])
    cands = [m for m in range(system.n)
             if m != k and not (finite_only and is_inf(system.poles[m]))]
    u = eigen_data(system, k).plus
    return max(cands, key=lambda m: projective_distance(u, eigen_data(system, m).minus))


def long_shift(system, k, aux=None):
    """Long translation ``lambda_k -> lambda_k + 1`` (no scalar form needed).

    Realized as ``pair(k, aux), flip(aux), pair(k, aux), flip(aux)``; the two
    scalar forms cancel and the residue at ``aux`` keeps its spectrum.  By
    default ``aux`` is the best-conditioned partner pole.
    """
    if system.gauge != "sl2":
        raise GaugeTagMismatch("long_shift acts on sl2 systems")
    if aux is None:
        aux = _best_aux(system, k)
    out = pair_modify(system, (k, aux), check_condition=False)
    out = flip_marking(out, aux)
    out = pair_modify(out, (k, aux), check_condition=False)
    return flip_marking(out, aux)


def gl2_pair_modify(system, spec, signs=(1, -1)):
    """gl2 Schlesinger pair: integer shifts of the marked eigenvalues, no scalar form.

    ``signs=(+1, -1)`` sends ``mu_i -> mu_i + 1`` and ``mu_j -> mu_j - 1``;
    ``(-1, +1)`` does the opposite.  The unmarked eigenvalues are untouched.
    """
    if system.gauge != "gl2":
        raise GaugeTagMismatch("gl2_pair_modify acts on gl2 systems")
    i, j = (spec.i, spec.j) if isinstance(spec, PairSpec) else spec
    _check_pair(system, i, j)
    if tuple(signs) == (-1, 1):
        i, j = j, i
    elif tuple(signs) != (1, -1):
        raise ValueError("signs must be (1, -1) or (-1, 1)")
    ei, ej = eigen_data(system, i), eigen_data(system, j)
    marking = list(system.marking)
    marking[i] += 1
    marking[j] -= 1
    return _elementary(system, i, j, ei.plus, ej.minus, marking)


def to_gl2(system):
    return system.replace(gauge="gl2")


def traces(system):
    return np.array([np.trace(B) for B in system.residues])


def spectra_match(a, b, tol=TOL_ALG):
    """Max deviation between marked/other eigenvalues of two systems."""
    dev = 0.0
    for k in range(a.n):
        dev = max(dev, abs(a.marking[k] - b.marking[k]),
                  abs(a.other_eigenvalue(k) - b.other_eigenvalue(k)))
    return dev

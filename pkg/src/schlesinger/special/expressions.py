"""Kummer's 24 and Heun's 192 solution expressions.

Every expression has the form

    y(z) = w**r0 (1 - w)**r1 [(1 - w/a')**ra] F(params | w),   w = m(z),

where ``m`` is a Moebius map sending three singular points to ``0, 1, inf``
and ``r0, r1, ra`` are local exponents at the preimages of ``0, 1, a'``.
Exponents are tracked as exact linear forms in the equation parameters;
Heun's accessory parameter of each transformed equation is read off the
transformed operator.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ..errors import ResonantParameters
from .heun import HeunParams, heun_series
from .hypergeometric import HypergeomParams, gauss_2f1
from .schemes import heun_ode, hypergeometric_ode

HYP_BASIS = ("alpha", "beta", "gamma")
HEUN_BASIS = ("alpha", "beta", "gamma", "delta")
SYMBOLS = {"alpha": "α", "beta": "β", "gamma": "γ", "delta": "δ"}


class Form:
    """Affine form ``c0 + sum c_k p_k`` with rational coefficients."""

    def __init__(self, basis, coeffs):
        self.basis = basis
        self.coeffs = tuple(Fraction(c) for c in coeffs)

    @classmethod
    def const(cls, basis, c):
        return cls(basis, (c,) + (0,) * len(basis))

    @classmethod
    def var(cls, basis, name):
        co = [0] * (len(basis) + 1)
        co[1 + basis.index(name)] = 1
        return cls(basis, co)

    def __add__(self, other):
        if not isinstance(other, Form):
            other = Form.const(self.basis, other)
        return Form(self.basis, [a + b for a, b in zip(self.coeffs, other.coeffs)])

    __radd__ = __add__

    def __neg__(self):
        return Form(self.basis, [-a for a in self.coeffs])

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __eq__(self, other):
        return isinstance(other, Form) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __call__(self, values):
        return complex(self.coeffs[0]) + sum(
            complex(c) * complex(values[name]) for c, name in zip(self.coeffs[1:], self.basis))

    def __repr__(self):
        parts = []
        for c, name in zip(self.coeffs[1:], self.basis):
            if c == 0:
                continue
            sym = SYMBOLS[name]
            mag = "" if abs(c) == 1 else f"{abs(c)}"
            parts.append(("-" if c < 0 else "+") + mag + sym)
        c0 = self.coeffs[0]
        if c0 != 0 or not parts:
            parts.append(("-" if c0 < 0 else "+") + f"{abs(c0)}")
        text = "".join(parts)
        return text[1:] if text.startswith("+") else text


def _hom(z):
    return np.array([1.0, 0.0], complex) if z is None else np.array([z, 1.0], complex)


def moebius_matrix(p0, p1, pinf):
    """Matrix of the map sending ``p0, p1, pinf`` to ``0, 1, inf`` (``None`` = infinity)."""
    def row(p):
        # linear form vanishing at p: (z - p) or 1 when p is infinity
        return np.array([0.0, 1.0], complex) if p is None else np.array([1.0, -p], complex)
    top, bottom = row(p0), row(pinf)
    h1 = _hom(p1)
    scale = (bottom @ h1) / (top @ h1)
    return np.vstack([top * scale, bottom])


def apply_moebius(M, z):
    h = M @ _hom(z)
    return None if abs(h[1]) < 1e-300 else h[0] / h[1]


@dataclass
class SolutionExpression:
    """One local solution written through a Moebius map and a prefactor.

    ``sources`` names the original points sent to ``w = 0, 1, inf`` (and the
    one landing at ``a'`` for Heun); ``prefactor`` holds the exponent forms
    ``r0, r1[, ra]``; ``param_forms`` the forms of the new exponent
    parameters; ``params`` their numeric values (plus ``a`` and ``q`` for
    Heun).
    """
    kind: str
    sources: tuple
    matrix: np.ndarray
    prefactor: tuple
    param_forms: tuple
    params: dict
    prefactor_values: tuple
    ode: object = field(repr=False, default=None)

    def key(self):
        return (self.kind, self.sources, self.prefactor)

    def label(self):
        names = {"hyp": "F", "heun": "H"}
        args = ", ".join(repr(f) for f in self.param_forms)
        pref = f"w^({self.prefactor[0]!r}) (1-w)^({self.prefactor[1]!r})"
        if self.kind == "heun":
            pref += f" (1-w/a')^({self.prefactor[2]!r})"
            return f"{pref} H(a'={self.params['a']:.6g}, q'={self.params['q']:.6g} | {args} | w)"
        return f"{pref} {names[self.kind]}({args} | w)"

    @property
    def argument(self):
        return "w = m(z), m sends " + "->".join(str(s) for s in self.sources[:3]) + " to 0,1,inf"

    # evaluation -------------------------------------------------------------
    def _series(self, w):
        if self.kind == "hyp":
            p = self.params
            return gauss_2f1(HypergeomParams(p["alpha"], p["beta"], p["gamma"]), w, nderiv=2)
        return heun_series(HeunParams(**self.params), w, nderiv=2)

    def _log_derivs(self, w):
        r = self.prefactor_values
        L = r[0] / w - r[1] / (1 - w)
        dL = -r[0] / w ** 2 - r[1] / (1 - w) ** 2
        phi = w ** r[0] * (1 - w) ** r[1]
        if self.kind == "heun":
            ap = self.params["a"]
            L += -r[2] / ap / (1 - w / ap)
            dL += -r[2] / ap ** 2 / (1 - w / ap) ** 2
            phi *= (1 - w / ap) ** r[2]
        return phi, L, dL

    def evaluate_w(self, w):
        """``(u, u', u'')`` of ``u(w) = prefactor * F(w)``."""
        F, dF, d2F = self._series(w)
        phi, L, dL = self._log_derivs(w)
        return (phi * F, phi * (L * F + dF), phi * ((dL + L * L) * F + 2 * L * dF + d2F))

    def evaluate(self, z):
        """``(y, y', y'')`` at ``z`` in the original coordinate."""
        A, B = self.matrix[0]
        C, D = self.matrix[1]
        den = C * z + D
        w = (A * z + B) / den
        det = A * D - B * C
        dw = det / den ** 2
        d2w = -2 * C * det / den ** 3
        u, du, d2u = self.evaluate_w(w)
        return u, du * dw, d2u * dw ** 2 + du * d2w

    def sample_point(self, fraction=0.3, angle=0.7):
        """A point ``z`` with ``|w|`` well inside the convergence disk."""
        radius = 1.0 if self.kind == "hyp" else min(1.0, abs(self.params["a"]))
        w = fraction * radius * np.exp(1j * angle)
        Minv = np.linalg.inv(self.matrix)
        return apply_moebius(Minv, w)

    def ode_residual(self, z=None):
        z = self.sample_point() if z is None else z
        return self.ode.residual(*self.evaluate(z), z)


def _check_generic(values, exps):
    for name, (e1, e2) in exps.items():
        d = e1(values) - e2(values)
        if abs(d.imag) < 1e-12 and abs(d.real - round(d.real)) < 1e-12:
            raise ResonantParameters(f"exponent difference at {name} is an integer")


# hypergeometric ---------------------------------------------------------------

def _hyp_exponents():
    a, b, c = (Form.var(HYP_BASIS, n) for n in HYP_BASIS)
    zero = Form.const(HYP_BASIS, 0)
    return {"0": (zero, 1 - c), "1": (zero, c - a - b), "inf": (a, b)}


POINTS3 = {"0": 0.0, "1": 1.0, "inf": None}


def kummer_solutions(p):
    """All 24 Kummer expressions for ``F(a, b; c | z)``."""
    if not isinstance(p, HypergeomParams):
        p = HypergeomParams(*p)
    values = {"alpha": p.a, "beta": p.b, "gamma": p.c}
    exps = _hyp_exponents()
    _check_generic(values, exps)
    ode = hypergeometric_ode(p.a, p.b, p.c)
    out = []
    for src in itertools.permutations(("0", "1", "inf")):
        M = moebius_matrix(*(POINTS3[s] for s in src))
        for r0, r1 in itertools.product(exps[src[0]], exps[src[1]]):
            o0 = _other(exps[src[0]], r0)
            o1 = _other(exps[src[1]], r1)
            einf = exps[src[2]]
            forms = (einf[0] + r0 + r1, einf[1] + r0 + r1, 1 - (o0 - r0))
            nums = {k: f(values) for k, f in zip(HYP_BASIS, forms)}
            out.append(SolutionExpression("hyp", src, M, (r0, r1), forms, nums,
                                          (r0(values), r1(values)), ode))
    return _dedup(out, 24)


def _other(pair, chosen):
    return pair[1] if pair[0] == chosen and pair[1] != chosen else pair[0]


def _dedup(exprs, expected):
    seen = {}
    for e in exprs:
        seen.setdefault(e.key(), e)
    if len(seen) != expected:
        raise ResonantParameters(f"{len(seen)} distinct expressions, expected {expected}")
    return list(seen.values())


# Heun -------------------------------------------------------------------------

def _heun_exponents():
    a, b, c, d = (Form.var(HEUN_BASIS, n) for n in HEUN_BASIS)
    zero = Form.const(HEUN_BASIS, 0)
    return {"0": (zero, 1 - c), "1": (zero, 1 - d), "a": (zero, c + d - a - b), "inf": (a, b)}


def transformed_accessory(ode, M, prefactor, a_new, alpha, beta, w0=(0.137 + 0.071j)):
    """Accessory parameter of the equation for ``F = y / prefactor`` in ``w = m(z)``.

    With ``z = g(w)`` and ``y = phi(w) F(w)`` the potential of the new
    equation is ``phi''/phi + (phi'/phi)(P(g) g' - g''/g') + Q(g) g'**2``;
    the accessory parameter follows from its value at one point.  The
    first-derivative coefficient is returned as well for a consistency check.
    """
    Minv = np.linalg.inv(M)
    (A, B), (C, D) = Minv
    det = A * D - B * C

    def pieces(w):
        den = C * w + D
        g = (A * w + B) / den
        dg = det / den ** 2
        d2g = -2 * C * det / den ** 3
        r0, r1, ra = prefactor
        L = r0 / w - r1 / (1 - w) - ra / a_new / (1 - w / a_new)
        dL = -r0 / w ** 2 - r1 / (1 - w) ** 2 - ra / a_new ** 2 / (1 - w / a_new) ** 2
        Pt = 2 * L - d2g / dg + ode.p(g) * dg
        Qt = dL + L * L + L * (ode.p(g) * dg - d2g / dg) + ode.r(g) * dg ** 2
        return Pt, Qt

    _, Qt = pieces(w0)
    ab = alpha * beta
    if abs(ab) < 1e-14:
        raise ResonantParameters("alpha * beta vanishes; the accessory parameter is undefined")
    q = w0 - Qt * w0 * (w0 - 1) * (w0 - a_new) / ab
    return q, pieces


def heun_expressions(p):
    """All 192 expressions: 24 point permutations times 8 prefactor choices."""
    values = {"alpha": p.alpha, "beta": p.beta, "gamma": p.gamma, "delta": p.delta}
    exps = _heun_exponents()
    _check_generic(values, exps)
    ode = heun_ode(p.a, p.q, p.alpha, p.beta, p.gamma, p.delta)
    pts = {"0": 0.0, "1": 1.0, "a": complex(p.a), "inf": None}
    out = []
    for src in itertools.permutations(("0", "1", "a", "inf")):
        M = moebius_matrix(*(pts[s] for s in src[:3]))
        a_new = apply_moebius(M, pts[src[3]])
        for r0, r1, ra in itertools.product(exps[src[0]], exps[src[1]], exps[src[3]]):
            o0 = _other(exps[src[0]], r0)
            o1 = _other(exps[src[1]], r1)
            shift = r0 + r1 + ra
            einf = exps[src[2]]
            forms = (einf[0] + shift, einf[1] + shift, 1 - (o0 - r0), 1 - (o1 - r1))
            nums = {k: f(values) for k, f in zip(HEUN_BASIS, forms)}
            rv = (r0(values), r1(values), ra(values))
            q, _ = transformed_accessory(ode, M, rv, a_new, nums["alpha"], nums["beta"])
            params = dict(a=a_new, q=q, **nums)
            out.append(SolutionExpression("heun", src, M, (r0, r1, ra), forms, params, rv, ode))
    return _dedup(out, 192)


def moduli_values(a):
    """The six values taken by ``a'`` over the point permutations."""
    return {a, 1 - a, 1 / a, 1 / (1 - a), a / (a - 1), (a - 1) / a}


def find_expression(exprs, sources, prefactor_names):
    """Pick the expression with given source points and prefactor exponent forms."""
    for e in exprs:
        if e.sources[: len(sources)] == tuple(sources) and \
                tuple(repr(f) for f in e.prefactor) == tuple(prefactor_names):
            return e
    raise KeyError((sources, prefactor_names))


# displayed local solutions ------------------------------------------------------

def _parse(text, basis):
    env = {name: Form.var(basis, name) for name in basis}
    return Form.const(basis, 0) + eval(text, {"__builtins__": {}}, env)


def _matrix_from(entries, a):
    return np.array([[entries[0](a), entries[1](a)], [entries[2](a), entries[3](a)]], complex)


IDENTITY = (lambda a: 1, lambda a: 0, lambda a: 0, lambda a: 1)
ONE_MINUS = (lambda a: -1, lambda a: 1, lambda a: 0, lambda a: 1)
INVERSE = (lambda a: 0, lambda a: 1, lambda a: 1, lambda a: 0)

# name: (prefactor {point: exponent}, argument matrix, params)
PRINTED_KUMMER = {
    "y_hol_0": ({}, IDENTITY, ("alpha", "beta", "gamma")),
    "y_0^(1-gamma)": ({"0": "1-gamma"}, IDENTITY,
                      ("alpha+1-gamma", "beta+1-gamma", "2-gamma")),
    "y_hol_1": ({}, ONE_MINUS, ("alpha", "beta", "alpha+beta+1-gamma")),
    "y_1^(gamma-alpha-beta)": ({"1": "gamma-alpha-beta"}, ONE_MINUS,
                               ("gamma-alpha", "gamma-beta", "gamma-alpha-beta+1")),
    "y_inf^alpha": ({"0": "-alpha"}, INVERSE, ("alpha", "alpha+1-gamma", "alpha+1-beta")),
    "y_inf^-beta": ({"0": "-beta"}, INVERSE, ("beta", "beta+1-gamma", "beta+1-alpha")),
}

# name: (prefactor, argument matrix, modulus a', params); the variable x in two
# arguments is read as z
PRINTED_HEUN = {
    "y_hol_0": ({}, IDENTITY, lambda a: a, ("alpha", "beta", "gamma", "delta")),
    "y_0^(1-gamma)": ({"0": "1-gamma"}, IDENTITY, lambda a: a,
                      ("alpha+1-gamma", "beta+1-gamma", "gamma", "delta")),
    "y_hol_1": ({}, ONE_MINUS, lambda a: 1 - a, ("alpha", "beta", "gamma", "delta")),
    "y_1^(1-delta)": ({"1": "1-delta", "a": "alpha"},
                      (lambda a: a, lambda a: -a, lambda a: 1, lambda a: -a), lambda a: a,
                      ("alpha+1-delta", "gamma+1-beta", "delta", "2-gamma")),
    "y_hol_a": ({}, (lambda a: -1, lambda a: a, lambda a: 0, lambda a: a),
                lambda a: (1 - a) / a,
                ("alpha", "beta", "alpha+beta-gamma-delta+1", "delta", "2-gamma")),
    "y_a^(1-eps)": ({"1": "gamma+delta-alpha-beta"},
                    (lambda a: 1, lambda a: -1, lambda a: 1, lambda a: -a),
                    lambda a: 1 / (1 - a),
                    ("gamma+delta-beta", "gamma+delta-alpha", "delta",
                     "gamma+delta-alpha-beta+1")),
    "y_inf^alpha": ({"0": "alpha"}, INVERSE, lambda a: 1 / a,
                    ("alpha", "alpha+1-gamma", "beta+1-alpha", "delta")),
    "y_inf^beta": ({"0": "beta"}, INVERSE, lambda a: 1 / a,
                   ("beta", "beta+1-gamma", "beta+1-alpha", "delta")),
}

# sources (to 0, 1, inf) and prefactor exponents of the engine expression
# representing each named local solution
HEUN_LOCAL = {
    "y_hol_0": (("0", "1", "inf"), ("0", "0", "0")),
    "y_0^(1-gamma)": (("0", "1", "inf"), ("1-gamma", "0", "0")),
    "y_hol_1": (("1", "0", "inf"), ("0", "0", "0")),
    "y_1^(1-delta)": (("1", "0", "a"), ("1-delta", "0", "alpha")),
    "y_hol_a": (("a", "0", "inf"), ("0", "0", "0")),
    "y_a^(1-eps)": (("a", "0", "inf"), ("gamma+delta-alpha-beta", "0", "0")),
    "y_inf^alpha": (("inf", "1", "0"), ("alpha", "0", "0")),
    "y_inf^beta": (("inf", "1", "0"), ("beta", "0", "0")),
}


def _local_exponents_of_printed(prefactor, matrix, a_new, forms, points, values):
    """Exponents of a printed expression at each original point.

    Returns ``None`` for a malformed entry (wrong parameter count).
    """
    if len(forms) not in (3, 4):
        return None
    nums = [f(values) for f in forms]
    if len(forms) == 3:
        al, be, ga = nums
        target = {0: (0, 1 - ga), 1: (0, ga - al - be), None: (al, be)}
    else:
        al, be, ga, de = nums
        ep = al + be - ga - de + 1
        target = {0: (0, 1 - ga), 1: (0, 1 - de), a_new: (0, 1 - ep), None: (al, be)}
    pref = {k: v(values) for k, v in prefactor.items()}
    out = {}
    for name, z in points.items():
        w = apply_moebius(matrix, z)
        hit = None
        for key, exps in target.items():
            if (key is None and w is None) or (key is not None and w is not None and abs(w - key) < 1e-9):
                hit = exps
        if hit is None:
            out[name] = None
            continue
        shift = -sum(pref.values()) if z is None else pref.get(name, 0)
        out[name] = tuple(e + shift for e in hit)
    return out


def _same_pair(p1, p2, tol=1e-9):
    return p1 is not None and (
        (abs(p1[0] - p2[0]) < tol and abs(p1[1] - p2[1]) < tol)
        or (abs(p1[0] - p2[1]) < tol and abs(p1[1] - p2[0]) < tol))


def check_printed(kind, p):
    """Local-exponent consistency of each printed solution with the equation.

    For each named entry returns ``{"consistent": bool, "exponents": ...}``;
    an entry is consistent when its exponents at every singular point match
    the equation's Riemann scheme and its modulus matches the argument map.
    """
    if kind == "hyp":
        basis, table = HYP_BASIS, PRINTED_KUMMER
        values = {"alpha": p.a, "beta": p.b, "gamma": p.c}
        exps, points = _hyp_exponents(), POINTS3
        a = None
    else:
        basis, table = HEUN_BASIS, PRINTED_HEUN
        values = {"alpha": p.alpha, "beta": p.beta, "gamma": p.gamma, "delta": p.delta}
        exps = _heun_exponents()
        a = complex(p.a)
        points = {"0": 0.0, "1": 1.0, "a": a, "inf": None}
    true = {k: (e1(values), e2(values)) for k, (e1, e2) in exps.items()}
    report = {}
    for name, entry in table.items():
        if kind == "hyp":
            pref, mat, params = entry
            a_new = None
        else:
            pref, mat, modulus, params = entry
            a_new = modulus(a)
        matrix = _matrix_from(mat, a)
        forms = [_parse(t, basis) for t in params]
        pforms = {k: _parse(v, basis) for k, v in pref.items()}
        got = _local_exponents_of_printed(pforms, matrix, a_new, forms, points, values)
        if got is None:
            report[name] = {"consistent": False, "reason": f"{len(forms)} parameters"}
            continue
        bad = [k for k in points if not _same_pair(got[k], true[k])]
        report[name] = {"consistent": not bad, "exponents": got,
                        "reason": "" if not bad else "exponents differ at " + ",".join(bad)}
    return report


def heun_local_solutions(p):
    """The eight named local solutions, as engine expressions, with the printed check.

    Returns ``{name: {"expression": SolutionExpression, "printed": report}}``.
    """
    exprs = heun_expressions(p)
    printed = check_printed("heun", p)
    out = {}
    for name, (sources, pref) in HEUN_LOCAL.items():
        want = tuple(_parse(t, HEUN_BASIS) for t in pref)
        match = [e for e in exprs if e.sources[:3] == sources
                 and e.prefactor == want]
        out[name] = {"expression": match[0], "printed": printed[name]}
    return out


def kummer_displayed(p):
    """Check that each displayed Kummer solution occurs in the 24-list.

    Returns ``{name: bool}``.  An entry occurs when some expression has the
    same argument map, the same prefactor (compared numerically at a test
    point) and the same parameters, the first two up to order.
    """
    exprs = kummer_solutions(p)
    values = {"alpha": p.a, "beta": p.b, "gamma": p.c}
    probes = [0.3 + 0.1j, -0.7 + 0.4j, 2.1 - 0.5j]
    zt = 0.37 + 0.21j
    out = {}
    for name, (pref, mat, params) in PRINTED_KUMMER.items():
        matrix = _matrix_from(mat, None)
        forms = [_parse(t, HYP_BASIS) for t in params]
        factor = {"0": zt, "1": 1 - zt}
        printed_pref = np.prod([factor[k] ** _parse(v, HYP_BASIS)(values) for k, v in pref.items()])
        found = False
        for e in exprs:
            if any(abs(apply_moebius(e.matrix, z) - apply_moebius(matrix, z)) > 1e-9 for z in probes):
                continue
            if {frozenset(forms[:2]), forms[2]} != {frozenset(e.param_forms[:2]), e.param_forms[2]}:
                continue
            w = apply_moebius(e.matrix, zt)
            mine = w ** e.prefactor_values[0] * (1 - w) ** e.prefactor_values[1]
            found = found or abs(mine - printed_pref) < 1e-9 * max(1.0, abs(mine))
        out[name] = found
    return out

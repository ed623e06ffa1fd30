"""The affine Weyl group W(C_n^) acting on eigenvalue vectors and on systems.

Generators (0-based indices internally, 1-based in word strings):

* ``Sigma(i)``: lambda_i -> -lambda_i
* ``Perm(i, j)``: swap lambda_i and lambda_j
* ``Pair(i, j)``: lambda_i + 1/2, lambda_j - 1/2
* ``Long(k)``: lambda_k + 1

Words are applied left to right.  Exact arithmetic is used whenever the
input vector holds :class:`fractions.Fraction` entries.
"""
from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .fuchsian import INF, FuchsianSystem, as_point, is_inf
from .modification import flip_marking, long_shift, pair_modify

HALF = Fraction(1, 2)
INFINITE = math.inf


@dataclass(frozen=True)
class Sigma:
    i: int

    def token(self):
        return f"s{self.i + 1}"


@dataclass(frozen=True)
class Perm:
    i: int
    j: int

    def token(self):
        return f"p{self.i + 1}{self.j + 1}"


@dataclass(frozen=True)
class Pair:
    i: int
    j: int

    def token(self):
        return f"t{self.i + 1}{self.j + 1}"


@dataclass(frozen=True)
class Long:
    k: int

    def token(self):
        return f"l{self.k + 1}"


def _indices(gen):
    if isinstance(gen, Sigma):
        return (gen.i,)
    if isinstance(gen, Long):
        return (gen.k,)
    return (gen.i, gen.j)


_TOKEN = re.compile(r"^([sptl])(?:(\d)(\d)?|\((\d+)(?:,(\d+))?\))$")


def parse_word(text):
    """Parse ``"t12.s1.p23"`` (or ``"t(1,12)"`` for indices above 9) into generators."""
    word = []
    for tok in filter(None, (t.strip() for t in text.split("."))):
        m = _TOKEN.match(tok)
        if not m:
            raise ValueError(f"bad generator token {tok!r}")
        kind = m.group(1)
        if m.group(2) is not None:
            a, b = m.group(2), m.group(3)
        else:
            a, b = m.group(4), m.group(5)
        a = int(a) - 1
        b = None if b is None else int(b) - 1
        if a < 0 or (b is not None and b < 0):
            raise ValueError(f"indices in {tok!r} start at 1")
        if kind in "sl":
            if b is not None:
                raise ValueError(f"{tok!r} takes one index")
            word.append(Sigma(a) if kind == "s" else Long(a))
        else:
            if b is None:
                raise ValueError(f"{tok!r} takes two indices")
            if kind == "p":
                word.append(Perm(a, b))
            else:
                word.append(Long(a) if a == b else Pair(a, b))
    return word


def format_word(word):
    return ".".join(g.token() for g in word)


def _check_range(word, n):
    for g in word:
        if any(not 0 <= k < n for k in _indices(g)):
            raise IndexError(f"generator {g.token()} out of range for n={n}")


def act_on_lambda(word, v):
    """Fold the generator actions over ``v`` from left to right."""
    v = list(v)
    _check_range(word, len(v))
    for g in word:
        if isinstance(g, Sigma):
            v[g.i] = -v[g.i]
        elif isinstance(g, Perm):
            v[g.i], v[g.j] = v[g.j], v[g.i]
        elif isinstance(g, Pair):
            if g.i == g.j:
                v[g.i] = v[g.i] + 1
            else:
                v[g.i] = v[g.i] + HALF
                v[g.j] = v[g.j] - HALF
        else:
            v[g.k] = v[g.k] + 1
    return v


def permute_poles(system, i, j):
    order = list(range(system.n))
    order[i], order[j] = order[j], order[i]
    return FuchsianSystem(tuple(system.poles[k] for k in order),
                          tuple(system.residues[k] for k in order), system.gauge,
                          tuple(system.marking[k] for k in order))


def act_on_system(word, system):
    """Apply a word to a system: flips relabel, permutations reorder, translations modify."""
    _check_range(word, system.n)
    for g in word:
        if isinstance(g, Sigma):
            system = flip_marking(system, g.i)
        elif isinstance(g, Perm):
            system = permute_poles(system, g.i, g.j)
        elif isinstance(g, Pair) and g.i != g.j:
            system = pair_modify(system, (g.i, g.j), check_condition=False)
        else:
            system = long_shift(system, g.k if isinstance(g, Long) else g.i)
    return system


# affine maps ------------------------------------------------------------------

@dataclass(frozen=True)
class AffineMap:
    """``v -> signs * v[perm] + shift`` with exact shift entries."""
    perm: tuple
    signs: tuple
    shift: tuple

    @classmethod
    def identity(cls, n):
        return cls(tuple(range(n)), (1,) * n, (Fraction(0),) * n)

    def __call__(self, v):
        return [s * v[p] + c for p, s, c in zip(self.perm, self.signs, self.shift)]

    def then(self, other):
        """Apply ``self`` first, then ``other``."""
        perm = tuple(self.perm[p] for p in other.perm)
        signs = tuple(s * self.signs[p] for p, s in zip(other.perm, other.signs))
        shift = tuple(s * self.shift[p] + c
                      for p, s, c in zip(other.perm, other.signs, other.shift))
        return AffineMap(perm, signs, shift)

    @property
    def is_translation(self):
        return self.perm == tuple(range(len(self.perm))) and all(s == 1 for s in self.signs)

    @property
    def linear_key(self):
        return self.perm, self.signs


def generator_map(g, n):
    return word_map([g], n)


def word_map(word, n):
    """Affine map of a word, obtained by acting on unit vectors and zero."""
    _check_range(word, n)
    zero = act_on_lambda(word, [Fraction(0)] * n)
    perm, signs = [], []
    images = []
    for k in range(n):
        e = [Fraction(0)] * n
        e[k] = Fraction(1)
        images.append(act_on_lambda(word, e))
    # each output coordinate depends on exactly one input coordinate
    for m in range(n):
        k = next(k for k in range(n) if images[k][m] != zero[m])
        perm.append(k)
        signs.append(int(images[k][m] - zero[m]))
    return AffineMap(tuple(perm), tuple(signs), tuple(zero))


def word_order(word, n=None):
    """Order of the affine map of ``word``; ``math.inf`` for infinite order."""
    if n is None:
        n = 1 + max((k for g in word for k in _indices(g)), default=0)
    g = word_map(word, n)
    ident = AffineMap.identity(n)
    power = g
    for k in range(1, 2 * n * math.factorial(n) + 1):
        if power.linear_key == ident.linear_key:
            return k if all(c == 0 for c in power.shift) else INFINITE
        power = power.then(g)
    raise RuntimeError("linear part exceeds the hyperoctahedral group order")


def finite_generators(n):
    return [Sigma(i) for i in range(n)] + [Perm(i, j) for i, j in itertools.combinations(range(n), 2)]


def translation_generators(n):
    return ([Pair(i, j) for i in range(n) for j in range(n) if i != j]
            + [Long(k) for k in range(n)])


def finite_orbit(v, n=None):
    """Orbit of ``v`` under sign flips and permutations (breadth-first)."""
    v = tuple(v)
    gens = finite_generators(len(v))
    seen = {v}
    frontier = [v]
    while frontier:
        nxt = []
        for w in frontier:
            for g in gens:
                u = tuple(act_on_lambda([g], w))
                if u not in seen:
                    seen.add(u)
                    nxt.append(u)
        frontier = nxt
    return seen


def _random_vector(rng, n):
    return [Fraction(int(rng.integers(-997, 998)), int(rng.integers(1001, 4001))) for _ in range(n)]


def _relations(n):
    """(name, word, expected order) triples for the Coxeter presentation."""
    rel = []
    for i in range(n):
        rel.append((f"s{i + 1}^2", [Sigma(i)] * 2, 1))
    for i, j in itertools.combinations(range(n), 2):
        rel.append((f"p{i + 1}{j + 1}^2", [Perm(i, j)] * 2, 1))
    for i in range(n - 2):
        w = [Perm(i, i + 1), Perm(i + 1, i + 2)]
        rel.append((f"(p{i + 1}{i + 2} p{i + 2}{i + 3})^3", w * 3, 1))
    for i, j in ((0, 1), (n - 1, n - 2)):
        w = [Sigma(i), Perm(i, j)]
        rel.append((f"(s{i + 1} p{min(i, j) + 1}{max(i, j) + 1})^4", w * 4, 1))
    # affine node: the reflection lambda_1 -> 1 - lambda_1
    s0 = [Sigma(0), Long(0)]
    rel.append(("s0^2", s0 * 2, 1))
    rel.append(("(s0 p12)^4", (s0 + [Perm(0, 1)]) * 4, 1))
    for i, j in itertools.combinations(range(n), 2):
        rel.append((f"[s{i + 1}, s{j + 1}]", [Sigma(i), Sigma(j), Sigma(i), Sigma(j)], 1))
    for i in range(n):
        for j in range(i + 2, n - 1):
            w = [Perm(i, i + 1), Perm(j, j + 1)]
            rel.append((f"[p{i + 1}{i + 2}, p{j + 1}{j + 2}]", w * 2, 1))
    for i in range(n - 1):
        # sigma_n commutes with permutations not touching n
        if i + 1 < n - 1:
            w = [Sigma(n - 1), Perm(i, i + 1)]
            rel.append((f"[s{n}, p{i + 1}{i + 2}]", w * 2, 1))
    return rel


def coxeter_check(n, trials=20, rng=None):
    """Check the Coxeter relations of W(C_n^) on random exact vectors.

    Returns a dict with per-relation results, the finite-part orbit size,
    translation checks and ``first_violation`` (``None`` when all pass).
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    rng = np.random.default_rng(0) if rng is None else rng
    vectors = [_random_vector(rng, n) for _ in range(trials)]
    results = {}
    first = None
    for name, word, _ in _relations(n):
        ok = all(act_on_lambda(word, v) == v for v in vectors)
        results[name] = ok
        if not ok and first is None:
            first = name
    orbit = len(finite_orbit(vectors[0]))
    expected_orbit = 2 ** n * math.factorial(n)
    results["finite orbit size"] = orbit == expected_orbit
    if orbit != expected_orbit and first is None:
        first = "finite orbit size"
    trans = translation_generators(n)
    commute = all(act_on_lambda([a, b], v) == act_on_lambda([b, a], v)
                  for a, b in itertools.combinations(trans, 2) for v in vectors[:3])
    results["translations commute"] = commute
    infinite = all(word_order([t], n) == INFINITE for t in trans)
    results["translations infinite order"] = infinite
    rank = free_rank(n)
    results["translation rank"] = rank == n
    for key in ("translations commute", "translations infinite order", "translation rank"):
        if not results[key] and first is None:
            first = key
    return {"n": n, "relations": results, "orbit_size": orbit,
            "expected_orbit_size": expected_orbit, "first_violation": first,
            "orders": {name: word_order(word[: len(word) // _repeat_count(name)], n)
                       for name, word, _ in _relations(n) if "^" in name}}


def _repeat_count(name):
    return int(name.rsplit("^", 1)[1]) if "^" in name else 1


def shift_vector(t, n):
    return word_map([t], n).shift


def free_rank(n):
    """Rank of the lattice spanned by the translation shift vectors."""
    mat = np.array([[float(c) for c in shift_vector(t, n)] for t in translation_generators(n)])
    return int(np.linalg.matrix_rank(mat))


def translation_lattice(n, max_length=4):
    """Shift vectors of translation words of length at most ``max_length``.

    Returns the generator shift vectors, the doubled shift set and whether
    it contains the C_n roots ``+-2 e_i`` and ``+-e_i +- e_j``, plus a
    closure check that finite-group conjugates of translations are
    translations.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    gens = finite_generators(n) + translation_generators(n)
    maps = {(): AffineMap.identity(n)}
    layer = {AffineMap.identity(n)}
    seen = set(layer)
    for _ in range(max_length):
        nxt = set()
        for f in layer:
            for g in gens:
                h = f.then(generator_map(g, n))
                if h not in seen:
                    seen.add(h)
                    nxt.add(h)
        layer = nxt
    shifts = {f.shift for f in seen if f.is_translation}
    doubled = {tuple(2 * c for c in s) for s in shifts}
    roots = set()
    for i in range(n):
        for sgn in (1, -1):
            e = [0] * n
            e[i] = 2 * sgn
            roots.add(tuple(Fraction(c) for c in e))
    for i, j in itertools.combinations(range(n), 2):
        for a, b in itertools.product((1, -1), repeat=2):
            e = [0] * n
            e[i], e[j] = a, b
            roots.add(tuple(Fraction(c) for c in e))
    closure = True
    for w in finite_generators(n):
        wm = generator_map(w, n)
        for t in translation_generators(n):
            conj = wm.then(generator_map(t, n)).then(wm)
            closure &= conj.is_translation
    return {
        "generators": {t.token(): shift_vector(t, n) for t in translation_generators(n)},
        "doubled_shifts": doubled,
        "roots": roots,
        "contains_roots": roots <= doubled,
        "conjugation_closed": closure,
    }


def _homogeneous(z):
    return (1.0 + 0j, 0j) if is_inf(z) else (complex(z), 1.0 + 0j)


def _det(u, v):
    return u[0] * v[1] - u[1] * v[0]


def moebius_normalize(system, a, b, c):
    """Move the poles with indices ``a, b, c`` to ``0, 1, inf`` by a Moebius map.

    Residues are unchanged; only the pole positions move.
    """
    pa, pb, pc = (_homogeneous(system.poles[k]) for k in (a, b, c))
    scale = _det(pb, pc) / _det(pb, pa)

    def image(z):
        h = _homogeneous(z)
        den = _det(h, pc)
        if abs(den) < 1e-300:
            return INF
        return as_point(_det(h, pa) / den * scale)

    poles = []
    for k, p in enumerate(system.poles):
        poles.append({a: 0j, b: 1 + 0j, c: INF}.get(k, None) if k in (a, b, c) else image(p))
    return FuchsianSystem(tuple(poles), system.residues, system.gauge, system.marking)

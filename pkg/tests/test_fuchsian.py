import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from schlesinger.errors import DegenerateResidue, EvaluationAtPole, HigherOrderPole, InvalidSystem
from schlesinger.fuchsian import (INF, FuchsianSystem, add_scalar_form, apply_gauge, eigen_data,
                                  eigenvalue_condition, evaluate, from_finite_chart, is_inf,
                                  random_sl2_system, to_finite_chart)
from schlesinger.rational import RationalMatrix

B0 = np.diag([0.3, -0.3])
B1 = np.array([[0.1, 0.2], [0.0, -0.1]])


def diag_one_z(x=0j):
    G = RationalMatrix.from_terms([([], np.diag([1, 0])), ([(x, 1)], np.diag([0, 1]))])
    G_inv = RationalMatrix.from_terms([([], np.diag([1, 0])), ([(x, -1)], np.diag([0, 1]))])
    return G, G_inv


def test_from_finite_appends_infinity():
    S = FuchsianSystem.from_finite([0, 1], [B0, B1])
    assert S.n == 3 and is_inf(S.poles[2])
    assert np.allclose(S.residues[2], -(B0 + B1), atol=0)


def test_from_finite_without_infinity_when_sum_vanishes():
    S = FuchsianSystem.from_finite([0, 1], [B0, -B0])
    assert S.n == 2 and not S.has_infinity


@pytest.mark.parametrize("poles, residues, message", [
    ((0, 1), (B0, B1), "sum to zero"),
    ((0, 1), (np.eye(2), -np.eye(2)), "trace"),
    ((0, 1e-12, INF), (B0, B1, -(B0 + B1)), "coincide"),
    ((INF, INF), (B0, -B0), "infinity listed twice"),
    ((0,), (np.zeros((2, 2)),), "at least two"),
])
def test_invalid_systems(poles, residues, message):
    with pytest.raises(InvalidSystem, match=message):
        FuchsianSystem(poles, residues)


def test_gl2_allows_trace():
    S = FuchsianSystem((0, 1), (np.eye(2), -np.eye(2)), "gl2")
    assert S.gauge == "gl2"


def test_evaluate_and_pole_error():
    S = FuchsianSystem.from_finite([0, 1], [B0, B1])
    z = 0.4 + 0.2j
    assert np.allclose(evaluate(S, z), B0 / z + B1 / (z - 1), rtol=1e-15)
    with pytest.raises(EvaluationAtPole):
        evaluate(S, 1.0)


def test_eigen_data_lines():
    S = FuchsianSystem.from_finite([0, 1], [B0, B1], marking=[0.3, -0.1])
    e = eigen_data(S, 1)
    assert e.value == -0.1 and abs(e.other - 0.1) < 1e-15
    assert np.allclose(B1 @ e.plus, -0.1 * e.plus, atol=1e-15)
    assert np.allclose(B1 @ e.minus, 0.1 * e.minus, atol=1e-15)


def test_degenerate_residue():
    N = np.array([[0.0, 1.0], [0.0, 0.0]])
    S = FuchsianSystem.from_finite([0, 1], [N, B1])
    with pytest.raises(DegenerateResidue):
        eigen_data(S, 0)


@pytest.mark.parametrize("lambdas, expected", [
    ((0.1, 0.2, 0.33), True),
    ((0.25, 0.25), False),
    ((0.3, 0.2, 0.5), False),
    ((0.1 + 0.1j, 0.2), True),
])
def test_eigenvalue_condition(lambdas, expected):
    assert eigenvalue_condition(lambdas) is expected


def test_apply_gauge_by_hand():
    # G = diag(1, z): residues worked out from B(z) = B0/z + B1/(z-1) by
    # partial fractions of 0.2 / (z (z - 1)).
    S = FuchsianSystem.from_finite([0, 1], [B0, B1])
    T = apply_gauge(S, *diag_one_z(), gauge="gl2")
    assert np.allclose(T.residues[0], [[0.3, -0.2], [0, 0.7]], atol=1e-14)
    assert np.allclose(T.residues[1], B1, atol=1e-14)
    assert np.allclose(T.residues[2], np.diag([-0.4, -0.6]), atol=1e-14)


def test_noninvariant_display_both_conventions():
    lam, eps = 0.3, 0.7
    S = FuchsianSystem.from_finite([0, 1], [[[lam, eps], [0, -lam]], np.diag([0.2, -0.2])])
    for operator_form, d11 in ((True, -(lam + 1)), (False, -lam + 1)):
        with pytest.raises(HigherOrderPole) as info:
            apply_gauge(S, *diag_one_z(), operator_form=operator_form)
        (pole,) = info.value.report.poles
        assert pole.order == 2
        assert np.allclose(pole.leading, [[0, eps], [0, 0]], atol=1e-15)
        assert np.allclose(pole.laurent[1], np.diag([lam, d11]), atol=1e-15)


def test_constant_gauge_is_conjugation(rng):
    S = random_sl2_system(rng, n=4, with_infinity=True)
    g = np.array([[1.0, 2.0], [0.5, 3.0]])
    T = apply_gauge(S, g)
    gi = np.linalg.inv(g)
    for A, B in zip(S.residues, T.residues):
        assert np.allclose(B, g @ A @ gi, atol=1e-13)
    assert np.allclose(T.marking, S.marking, atol=1e-13)


def test_add_scalar_form():
    S = FuchsianSystem.from_finite([0, 1], [B0, B1])
    T = add_scalar_form(S, {0: 0.5, 2: -0.5}, gauge="gl2")
    assert np.allclose(T.residues[0], B0 + 0.5 * np.eye(2))
    assert np.isclose(T.marking[0], S.marking[0] + 0.5)
    with pytest.raises(InvalidSystem):
        add_scalar_form(S, {0: 0.5})


def test_chart_round_trip():
    pts = [0.0, 1.0, 2 + 1j, INF]
    c = 0.5 - 0.7j
    w = to_finite_chart(pts, c)
    assert w[3] == 0
    back = [from_finite_chart(v, c) for v in w]
    assert all(abs(a - b) < 1e-15 for a, b in zip(back[:3], pts[:3]))
    assert is_inf(back[3])


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), n=st.integers(3, 5), inf=st.booleans())
def test_random_system_properties(seed, n, inf):
    rng = np.random.default_rng(seed)
    S = random_sl2_system(rng, n=n, with_infinity=inf)
    assert np.abs(sum(S.residues)).max() < 1e-12 * max(1, max(np.abs(B).max() for B in S.residues))
    for k, B in enumerate(S.residues):
        assert abs(np.trace(B)) < 1e-12
        assert abs(np.linalg.det(B) + S.marking[k] ** 2) < 1e-11 * max(1, np.abs(B).max()) ** 2

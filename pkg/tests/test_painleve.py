import numpy as np
import pytest
import sympy as sp

from conftest import chart_system, spectrum_distance
from schlesinger.errors import BlowUpDetected, DegenerateOffDiagonal, PoleCollision, SingularState
from schlesinger.fuchsian import INF
from schlesinger.painleve import (HamiltonianState, PviParams, backlund_pair01, backlund_property,
                                  chart_hamilton_defect, chart_params, commuting_defect, dH_dp,
                                  dH_dx, fit_backlund_coefficient, hamilton_flow, hamiltonian,
                                  matrix_backlund, normalize_infinity, pvi_residual, pvi_rhs,
                                  schlesinger_flow, schlesinger_rhs, schlesinger_system,
                                  second_derivative, state_from_system, trajectory_pvi_residual,
                                  xp_coordinates)

P = PviParams(0.3 + 0.1j, -0.2, 0.45, 0.7 - 0.05j)


def test_parameter_dictionary():
    Q = PviParams(0.2, 0.4, 0.6, 1.0)
    assert (Q.alpha, Q.beta, Q.gamma, Q.delta) == pytest.approx((0.5, 0.02, 0.08, 0.18))
    assert Q.kappa == pytest.approx(((0.2 + 0.4 + 0.6 - 1) ** 2 - 1) / 4)
    assert Q.shifted(d0=0.5, d1=-0.5).as_tuple() == pytest.approx((0.7, -0.1, 0.6, 1.0))


@pytest.mark.parametrize("linf", [1, -1])
def test_hamiltonian_hand_value(linf):
    # kappa = -1/4, H = kappa (x - t) / (t (t - 1)) = (-1/4)(-1)/6
    Q = PviParams(0, 0, 1, linf)
    assert Q.kappa == -0.25
    assert hamiltonian(2, 0, 3, Q) == pytest.approx(1 / 24, abs=1e-15)


def test_hamiltonian_vanishes_without_p_and_kappa():
    Q = PviParams(0.5, 0.5, 0.0, 0.0)
    assert Q.kappa == 0
    assert hamiltonian(0.4, 0.0, 0.3, Q) == 0


def test_pvi_rhs_hand_values():
    # x(x-1)(x-t)/(t^2(t-1)^2) = -1/18 at x=2, t=3; alpha = 1/2
    # with lambda_t = 1 the (1/2 - delta) term drops: -1/36
    assert pvi_rhs(2, 0, 3, PviParams(0, 0, 1, 1)) == pytest.approx(-1 / 36, abs=1e-15)
    # with lambda_t = 0 it contributes (1/2) t (t-1)/(x-t)^2 = 3: -(1/2 + 3)/18
    assert pvi_rhs(2, 0, 3, PviParams(0, 0, 0, 1)) == pytest.approx(-7 / 36, abs=1e-15)


def test_partial_derivatives_match_finite_differences():
    x, p, t, h = 0.4 + 0.2j, 0.7 - 0.3j, 0.35, 1e-6
    dp = (hamiltonian(x, p + h, t, P) - hamiltonian(x, p - h, t, P)) / (2 * h)
    dx = (hamiltonian(x + h, p, t, P) - hamiltonian(x - h, p, t, P)) / (2 * h)
    assert abs(dp - dH_dp(x, p, t, P)) < 1e-8
    assert abs(dx - dH_dx(x, p, t, P)) < 1e-8


def test_hamiltonian_implies_pvi_symbolically():
    x, p, t, l0, l1, lt, li = sp.symbols("x p t l0 l1 lt linf")
    f = x * (x - 1) * (x - t)
    S = l0 * (x - 1) * (x - t) + l1 * x * (x - t) + (lt - 1) * x * (x - 1)
    H = (f * p ** 2 - S * p + ((l0 + l1 + lt - 1) ** 2 - li ** 2) / 4 * (x - t)) / (t * (t - 1))
    xd, pd = sp.diff(H, p), -sp.diff(H, x)
    xdd = sp.diff(xd, t) + sp.diff(xd, x) * xd + sp.diff(xd, p) * pd
    half = sp.Rational(1, 2)
    rhs = (half * (1 / x + 1 / (x - 1) + 1 / (x - t)) * xd ** 2
           - (1 / t + 1 / (t - 1) + 1 / (x - t)) * xd
           + f / (t ** 2 * (t - 1) ** 2) * (li ** 2 / 2 - l0 ** 2 / 2 * t / x ** 2
                                            + l1 ** 2 / 2 * (t - 1) / (x - 1) ** 2
                                            + (half - lt ** 2 / 2) * t * (t - 1) / (x - t) ** 2))
    assert sp.simplify(sp.together(xdd - rhs)) == 0
    # the numeric chain rule agrees with the same identity
    vals = (0.4 + 0.2j, 0.7 - 0.3j, 0.35)
    xd_num = dH_dp(*vals, P)
    assert pvi_residual(vals[0], xd_num, second_derivative(*vals, P), vals[2], P) < 1e-13


def test_flow_satisfies_pvi_and_is_reversible():
    start = HamiltonianState(0.4 + 0.1j, 0.3 - 0.2j, 0.3)
    traj = hamilton_flow(start, P, 0.6, t_eval=np.linspace(0.3, 0.6, 11))
    assert trajectory_pvi_residual(traj) < 1e-10
    end = HamiltonianState(traj.x[-1], traj.p[-1], 0.6)
    back = hamilton_flow(end, P, 0.3)
    assert abs(back.x[-1] - start.x) < 1e-10 and abs(back.p[-1] - start.p) < 1e-10


# lambda = (0, 0, 0, 1) gives kappa = 0; on p = 0 the flow reduces to
# x' = x (x - 1) / (t (t - 1)), solved by (x - 1) / x = K (t - 1) / t.
# From x(0.3) = -0.4, K = -3/2 and x blows up at t = 0.6.
RICCATI = PviParams(0, 0, 0, 1)


def _riccati_x(t):
    return 1 / (1 + 1.5 * (t - 1) / t)


def test_kappa_zero_line_is_invariant():
    ts = np.linspace(0.3, 0.55, 6)
    traj = hamilton_flow(HamiltonianState(-0.4, 0.0, 0.3), RICCATI, 0.55, t_eval=ts)
    assert np.abs(traj.p).max() == 0
    assert np.allclose(traj.x, _riccati_x(ts), rtol=1e-10)


def test_blow_up_detected():
    with pytest.raises(BlowUpDetected) as info:
        hamilton_flow(HamiltonianState(-0.4, 0.0, 0.3), RICCATI, 0.9)
    assert abs(info.value.t_estimate - 0.6) < 1e-6


def test_singular_states():
    with pytest.raises(SingularState):
        hamiltonian(0.3, 0.1, 1.0, P)
    with pytest.raises(SingularState):
        pvi_rhs(0.0, 0.1, 0.3, P)
    with pytest.raises(SingularState):
        backlund_pair01(HamiltonianState(1.0, 0.1, 0.3), P)


def test_backlund_pair01_map():
    st, Q = backlund_pair01(HamiltonianState(0.4, 0.2, 0.3), P, c=2.0)
    assert st.x == 0.4 and st.p == pytest.approx(0.2 + 2.0 * (1 / (0.4 - 1) - 1 / 0.4))
    assert Q.as_tuple() == pytest.approx((P.l0 + 0.5, P.l1 - 0.5, P.lt, P.linf))


def test_printed_backlund_defect_reported():
    state, Q = state_from_system(chart_system())
    traj = hamilton_flow(state, Q, 0.6, t_eval=np.linspace(0.3, 0.6, 21))
    defect = backlund_property(traj)
    c_hat, c_defect = fit_backlund_coefficient(traj)
    assert c_defect <= defect
    assert -4 <= c_hat <= 4


# Schlesinger flow and the (x, p) chart ----------------------------------------------

def test_schlesinger_rhs_preserves_sum():
    S = chart_system()
    d = schlesinger_rhs(S)
    assert np.abs(sum(d)).max() < 1e-14
    assert np.abs(d[3]).max() == 0


def test_schlesinger_flow_conserves_spectra():
    S = chart_system()
    (T,) = schlesinger_flow(S, 0.5)
    assert T.poles[2] == 0.5
    for B, m in zip(T.residues, S.marking):
        assert spectrum_distance(B, m) < 1e-10
    with pytest.raises(PoleCollision):
        schlesinger_flow(S, 1.0)


def test_chart_matches_hamilton_flow():
    S = chart_system()
    state, Q = state_from_system(S)
    traj = hamilton_flow(state, Q, 0.6)
    end = xp_coordinates(schlesinger_flow(S, 0.6)[0])
    assert abs(end.x - traj.x[-1]) < 1e-9 and abs(end.p - traj.p[-1]) < 1e-9


def test_chart_hamilton_defects():
    S = chart_system()
    assert chart_hamilton_defect(S) < 1e-7
    # the matrix-level pair modification maps flows to flows with shifted parameters
    assert chart_hamilton_defect(S, matrix_backlund) < 1e-7
    T = matrix_backlund(normalize_infinity(S))
    shift = np.array(chart_params(T).as_tuple()) - np.array(chart_params(S).as_tuple())
    assert np.allclose(shift, [1, -1, 0, 0], atol=1e-12)


def test_commuting_defect_report():
    rep = commuting_defect(chart_system())
    assert set(rep) == {"dx", "dp", "matrix", "printed"}
    assert rep["printed"].x == xp_coordinates(normalize_infinity(chart_system())).x


def test_normalize_infinity_diagonalises():
    S = normalize_infinity(chart_system())
    B = S.residues[3]
    assert abs(B[0, 1]) < 1e-12 and abs(B[1, 0]) < 1e-12
    assert abs(B[0, 0] - S.marking[3]) < 1e-12


def test_degenerate_off_diagonal():
    B0 = np.array([[0.2, 0.0], [0.3, -0.2]])
    B1 = np.array([[0.1, 0.0], [-0.5, -0.1]])
    Bt = np.array([[0.15, 0.0], [0.2, -0.15]])
    S = schlesinger_system(0.3, B0, B1, Bt, marking=(0.2, 0.1, 0.15, -0.45))
    assert S.poles[3] is INF
    with pytest.raises(DegenerateOffDiagonal):
        xp_coordinates(S)

import numpy as np
import pytest

from pend3d import conservation as C
from pend3d.dynamics import FullState, LPState, LRState
from pend3d.geometry import E3, exp_so3
from pend3d.integrate import IntegratorConfig, build_initial, integrate_trajectory
from pend3d.linearization import tangent_basis

from conftest import random_tangent, random_unit


def test_energy_examples(body):
    assert C.energy_full(body, FullState(np.eye(3), np.zeros(3))) == pytest.approx(-2.943)
    assert C.momentum_h(body, FullState(np.eye(3), np.zeros(3))) == 0.0
    s = FullState(np.eye(3), [0, 0, 2])
    assert C.energy_full(body, s) == pytest.approx(0.34 - 2.943)
    assert C.momentum_h(body, s) == pytest.approx(0.34)


def test_lyapunov_zero_at_hanging(body):
    G = body.rho_hat
    E = C.energy_lp(body, LPState(G, np.zeros(3)))
    assert C.lyapunov_v(body, E) == pytest.approx(0.0, abs=1e-15)
    assert body.min_energy == pytest.approx(E)


def test_momentum_map_rotation_invariance(body, rng):
    R = exp_so3(rng.standard_normal(3))
    w = rng.standard_normal(3)
    s = FullState(R, w)
    for ang in (0.3, -1.2, 2.9):
        Rz = exp_so3(ang * E3)
        s2 = FullState(Rz @ R, w)
        assert C.momentum_map(body, s2) == pytest.approx(C.momentum_map(body, s), abs=1e-14)
        assert C.energy_full(body, s2) == pytest.approx(C.energy_full(body, s), abs=1e-14)


def test_lr_energy_matches_full(body, rng):
    for _ in range(20):
        R = exp_so3(rng.standard_normal(3))
        w = rng.standard_normal(3)
        full, lp, lr = build_initial(body, R, w)
        assert C.energy_lr(body, lr) == pytest.approx(C.energy_full(body, full), abs=1e-12)
        np.testing.assert_allclose(C.omega_from_lr(body, lr), w, atol=1e-12)
        assert C.momentum_lp(body, lp) == pytest.approx(lr.mu, abs=1e-14)


def test_connection_vanishes_on_horizontal(body, rng):
    from pend3d.reduction import omega_hor
    R = exp_so3(rng.standard_normal(3))
    G = R.T @ E3
    wh = omega_hor(body, G, random_tangent(rng, G))
    assert abs(C.mechanical_connection(body, FullState(R, wh))) < 1e-14
    assert C.locked_inertia(body, R) == pytest.approx(G @ body.J @ G)


def test_magnetic_form_properties(body, rng):
    G = random_unit(rng)
    a, b = rng.standard_normal((2, 3))
    assert C.magnetic_form(body, G, a, b, 0.0) == 0.0
    assert C.magnetic_form(body, G, a, b, 1.3) == pytest.approx(
        -C.magnetic_form(body, G, b, a, 1.3))
    assert C.magnetic_form(body, G, a, a, 1.3) == 0.0
    # isotropic inertia: the coefficient reduces to mu
    iso = type(body)(J=[0.2, 0.2, 0.2], rho=[0, 0, 0.3])
    assert C.magnetic_form(iso, G, a, b, 0.7) == pytest.approx(
        0.7 * (G @ np.cross(a, b)))


def test_routhian_euler_lagrange_residual(body):
    """The Routh equations with the magnetic term hold along LR solutions."""
    R0 = exp_so3([0.4, -0.3, 0.2])
    _, _, lr = build_initial(body, R0, [0.7, -0.4, 1.1])
    mu = lr.mu
    h = 1e-4
    tr = integrate_trajectory(body, "lr", lr, IntegratorConfig(h=h, T=0.02))
    eps = 1e-5

    def grads(G, Gd):
        dG = np.empty(3)
        dV = np.empty(3)
        for i in range(3):
            e = np.zeros(3)
            e[i] = eps
            dG[i] = (C.routhian_value(body, G + e, Gd, mu)
                     - C.routhian_value(body, G - e, Gd, mu)) / (2 * eps)
            dV[i] = (C.routhian_value(body, G, Gd + e, mu)
                     - C.routhian_value(body, G, Gd - e, mu)) / (2 * eps)
        return dG, dV

    worst = 0.0
    for k in range(10, len(tr) - 10, 20):
        G, Gd = tr.Gamma[k], tr.Gammadot[k]
        dG, _ = grads(G, Gd)
        _, dVp = grads(tr.Gamma[k + 1], tr.Gammadot[k + 1])
        _, dVm = grads(tr.Gamma[k - 1], tr.Gammadot[k - 1])
        ddt = (dVp - dVm) / (2 * h)
        EL = dG - ddt
        for dg in tangent_basis(G):
            lhs = EL @ dg
            rhs = C.magnetic_form(body, G, np.cross(Gd, G), np.cross(dg, G), mu)
            worst = max(worst, abs(lhs - rhs))
    assert worst <= 1e-5


def test_report(body):
    full, lp, lr = build_initial(body, np.eye(3), [1.0, 1.0, 1.0])
    r = [C.report(body, s) for s in (full, lp, lr)]
    assert [x.model for x in r] == ["full", "lp", "lr"]
    for x in r[1:]:
        assert x.E == pytest.approx(r[0].E, abs=1e-12)
        assert x.h == pytest.approx(r[0].h, abs=1e-12)
    with pytest.raises(TypeError):
        C.report(body, "nope")

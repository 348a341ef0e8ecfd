import numpy as np
import pytest

from pend3d.dynamics import BodyParams
from pend3d.equilibria import (default_alpha_grid, enumerate_lp, enumerate_lr,
                               interval_of, lr_mu, lr_residual, n_alpha,
                               residual, sort_principal_axes, to_user_frame)
from pend3d.errors import (BalancedBody, NonDiagonalInertia, SingularAlpha,
                           UnsortedInertia)


@pytest.fixture
def sorted_body():
    return BodyParams(J=[0.28, 0.17, 0.13], rho=[0.0, 0.0, 0.3])


def test_hanging_and_inverted(elliptic):
    eqs = enumerate_lp(elliptic)
    h, i = eqs[0], eqs[1]
    assert h.name == "Hanging" and i.name == "Inverted"
    np.testing.assert_allclose(h.Gamma, elliptic.rho_hat, atol=1e-15)
    np.testing.assert_allclose(i.Gamma, -elliptic.rho_hat, atol=1e-15)
    assert h.residual <= 1e-15 and i.residual <= 1e-15


def test_hanging_example(sorted_body):
    e = enumerate_lp(sorted_body)[0]
    np.testing.assert_array_equal(e.Gamma, [0, 0, 1])
    np.testing.assert_array_equal(e.omega, [0, 0, 0])


def test_elliptic_body_rows(elliptic):
    eqs = enumerate_lp(elliptic)
    # 2 rest + 2 axis + 100 samples x 4 intervals x 2 signs
    assert len(eqs) == 804
    assert not any(e.family.startswith("Degenerate") for e in eqs)
    assert max(e.residual for e in eqs) <= 1e-10
    # recomputed independently
    assert max(residual(elliptic, e.Gamma, e.omega) for e in eqs) <= 1e-10
    fam = [e.family for e in eqs]
    assert fam.count("AlphaFamily") == 800


def test_alpha_family_geometry(elliptic, rng):
    for a in (-3.0, 0.5, 2.3, 5.0, 20.0):
        if interval_of(elliptic, a) is None:
            continue
        n = n_alpha(elliptic, a)
        # oracle: direct solve of (J - I / alpha) n = rho
        np.testing.assert_allclose(
            n, np.linalg.solve(elliptic.J - np.eye(3) / a, elliptic.rho), rtol=1e-12)
    for e in enumerate_lp(elliptic)[4:20]:
        n = n_alpha(elliptic, e.alpha)
        np.testing.assert_allclose(e.Gamma, -n / np.linalg.norm(n), atol=1e-12)
        np.testing.assert_allclose(np.cross(e.Gamma, e.omega), 0, atol=1e-12)
        assert abs(e.k) == pytest.approx(np.sqrt(elliptic.m * elliptic.g * np.linalg.norm(n)))


def test_inv_inertia_axis(elliptic):
    eqs = [e for e in enumerate_lp(elliptic) if e.family == "InvInertiaAxis"]
    assert [e.sign for e in eqs] == [1, -1]
    n = np.linalg.solve(elliptic.J, elliptic.rho)
    for e in eqs:
        np.testing.assert_allclose(np.abs(e.Gamma @ n) / np.linalg.norm(n), 1, atol=1e-12)
        assert e.residual <= 1e-10


def test_family_limits(elliptic):
    rh = elliptic.rho_hat
    n_inf = np.linalg.solve(elliptic.J, elliptic.rho)
    n_inf /= np.linalg.norm(n_inf)
    eq = lambda a: enumerate_lp(elliptic, alpha_grid=[a], gamma_grid=[])[4]
    assert np.linalg.norm(eq(1e-6).Gamma - rh) <= 1e-3
    assert np.linalg.norm(eq(-1e-6).Gamma + rh) <= 1e-3
    assert np.linalg.norm(eq(1e-6).omega) <= 1e-2
    for a in (1e6, -1e6):
        assert np.linalg.norm(eq(a).Gamma + n_inf) <= 1e-3


def test_alpha_grid_covers_intervals(elliptic):
    g = default_alpha_grid(elliptic, 100)
    for name in ("L1", "L2", "L3", "L4"):
        assert len(g[name]) == 100
        assert all(interval_of(elliptic, a) == name for a in g[name])


def test_singular_alpha(elliptic):
    with pytest.raises(SingularAlpha):
        n_alpha(elliptic, 0.0)
    with pytest.raises(SingularAlpha):
        n_alpha(elliptic, 1.0 / 0.3943)


def test_preconditions():
    with pytest.raises(UnsortedInertia):
        enumerate_lp(BodyParams(J=[0.13, 0.28, 0.17]))
    with pytest.raises(NonDiagonalInertia):
        enumerate_lp(BodyParams(J=[[0.3, 0.01, 0], [0.01, 0.2, 0], [0, 0, 0.1]]))
    with pytest.raises(BalancedBody):
        enumerate_lp(BodyParams(J=[0.3, 0.2, 0.1], rho=[0, 0, 0], balanced=True))


def test_degenerate_families_for_axis_aligned_rho(sorted_body):
    eqs = enumerate_lp(sorted_body, gamma_grid=np.linspace(-1, 1, 5))
    deg = [e for e in eqs if e.family.startswith("Degenerate")]
    assert deg, "rho on an axis leaves two eigen-directions free"
    assert {e.label for e in deg} == {"1", "2"}
    assert max(e.residual for e in eqs) <= 1e-10


def test_axisymmetric_degenerate_labels():
    p = BodyParams(J=[0.2, 0.2, 0.05], rho=[0, 0, 0.3])
    eqs = enumerate_lp(p, gamma_grid=np.linspace(-1, 1, 3))
    deg = [e for e in eqs if e.family == "DegenerateAxisym"]
    assert deg and all(e.label in ("a", "b") for e in deg)
    assert max(e.residual for e in eqs) <= 1e-10


def test_lr_equilibria(elliptic):
    for e in enumerate_lr(elliptic)[::37]:
        mu = lr_mu(elliptic, e)
        assert mu == pytest.approx(e.mu)
        assert lr_residual(elliptic, e) <= 1e-9


def test_sort_principal_axes_round_trip(body, rng):
    ps, P = sort_principal_axes(body)
    assert np.linalg.det(P) == pytest.approx(1.0)
    d = np.diag(ps.J)
    assert d[0] >= d[1] >= d[2]
    for e in enumerate_lp(ps)[::25]:
        u = to_user_frame(e, P)
        assert residual(body, u.Gamma, u.omega) <= 1e-10


def test_n_alpha_diagonal_example(body):
    np.testing.assert_allclose(n_alpha(body, 10.0), [0, 0, 0.3 / (0.17 - 0.1)], rtol=1e-14)
    assert n_alpha(body, 10.0)[2] == pytest.approx(4.28571, abs=1e-5)


def test_perturbed_hanging_residual(body):
    from pend3d.geometry import exp_so3
    G = exp_so3([1e-3, 0, 0]) @ body.rho_hat
    r = residual(body, G, np.zeros(3))
    assert r == pytest.approx(body.m * body.g * body.rho_norm * 1e-3, rel=1e-6)


def test_alpha_sign_is_forced(elliptic):
    # Gamma = +n/|n| would violate the equilibrium condition
    for a in (-2.0, 0.5, 30.0):
        n = n_alpha(elliptic, a)
        k = np.sqrt(elliptic.m * elliptic.g * np.linalg.norm(n))
        G = -n / np.linalg.norm(n)
        assert residual(elliptic, G, k * G) <= 1e-12
        assert residual(elliptic, -G, -k * G) > 1e-3


def test_axis_aligned_rho_collapses(sorted_body):
    eqs = [e for e in enumerate_lp(sorted_body) if e.family == "AlphaFamily"]
    for e in eqs:
        np.testing.assert_allclose(np.abs(e.Gamma), [0, 0, 1], atol=1e-15)


def test_sign_symmetry_and_mu(elliptic):
    eqs = [e for e in enumerate_lp(elliptic) if e.family == "AlphaFamily"]
    for a, b in zip(eqs[::2], eqs[1::2]):
        np.testing.assert_array_equal(a.Gamma, b.Gamma)
        np.testing.assert_allclose(a.omega, -b.omega, atol=1e-15)
        assert a.alpha == b.alpha
    for e in eqs:
        assert e.mu == pytest.approx(e.k * e.Gamma @ elliptic.J @ e.Gamma, abs=1e-12)


def test_family_continuity(elliptic):
    g = default_alpha_grid(elliptic, 100)
    for name in ("L2", "L3"):
        al = np.linspace(min(g[name]), max(g[name]), 2001)[200:-200]
        G = np.array([-n_alpha(elliptic, a) / np.linalg.norm(n_alpha(elliptic, a))
                      for a in al])
        steps = np.linalg.norm(np.diff(G, axis=0), axis=1)
        # no jumps: neighbouring steps change smoothly
        assert np.max(steps[1:] / steps[:-1]) < 1.5

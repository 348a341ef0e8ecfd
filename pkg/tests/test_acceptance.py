"""End-to-end acceptance criteria.

Each test records a ``PASS``/``FAIL`` line (shown in the terminal summary)
and then asserts, so a failure is both visible and counted.
"""

import os
import subprocess
import sys
import time

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from pend3d import conservation as C
from pend3d.dynamics import BodyParams, FullState, LPState
from pend3d.equilibria import enumerate_lp
from pend3d.geometry import exp_so3
from pend3d.integrate import (IntegratorConfig, build_initial, integrate_special,
                              integrate_trajectory, poincare_sweep)
from pend3d.linearization import (eig_agreement, equilibrium_state, fd_jacobian,
                                  linearize)
from pend3d.reduction import (circle_loop, geometric_phase_reconstruct,
                              geometric_phase_surface, reconstruct)

from conftest import ACCEPTANCE

SCEN = os.path.join(os.path.dirname(__file__), "..", "scenarios")

BODY = BodyParams(J=[0.13, 0.28, 0.17], m=1.0, g=9.81, rho=[0.0, 0.0, 0.3])
ELLIPTIC = BodyParams(J=[0.4486, 0.3943, 0.0772], m=1.0, g=9.81,
                      rho=[-0.0140, 0.1044, 0.4989])


def record(n, ok, detail):
    line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE[n] = line
    print(line)
    assert ok, line


def test_01_conservation():
    full, _, _ = build_initial(BODY, np.eye(3), [1.0, 1.0, 1.0])
    cfg = IntegratorConfig("liegroup-rk4", h=1e-3, T=10.0)
    integrate_trajectory(BODY, "full", full, IntegratorConfig(h=1e-3, T=1e-3))  # JIT
    t0 = time.perf_counter()
    tr = integrate_trajectory(BODY, "full", full, cfg)
    dt = time.perf_counter() - t0
    dE, dh = tr.drift("E"), tr.drift("h_momentum")
    record(1, dE <= 1e-8 and dh <= 1e-8 and dt < 5.0,
           f"dE={dE:.2e} dh={dh:.2e} runtime={dt:.3f}s")


def test_02_equilibria_residuals():
    enumerate_lp(ELLIPTIC)
    t0 = time.perf_counter()
    eqs = enumerate_lp(ELLIPTIC)
    dt = time.perf_counter() - t0
    worst = max(e.residual for e in eqs)
    n_alpha = sum(e.family == "AlphaFamily" for e in eqs)
    n_deg = sum(e.family.startswith("Degenerate") for e in eqs)
    record(2, worst <= 1e-10 and n_alpha == 800 and n_deg == 0 and dt < 1.0,
           f"rows={len(eqs)} alpha_rows={n_alpha} degenerate={n_deg} "
           f"max_residual={worst:.2e} runtime={dt:.3f}s")


def test_03_family_limits():
    def eq(a):
        return enumerate_lp(ELLIPTIC, alpha_grid=[a], gamma_grid=[])[4]

    rh = ELLIPTIC.rho_hat
    ninf = np.linalg.solve(ELLIPTIC.J, ELLIPTIC.rho)
    ninf /= np.linalg.norm(ninf)
    errs = {
        "+1e-6": np.linalg.norm(eq(1e-6).Gamma - rh),
        "-1e-6": np.linalg.norm(eq(-1e-6).Gamma + rh),
        "+1e6": np.linalg.norm(eq(1e6).Gamma + ninf),
        "-1e6": np.linalg.norm(eq(-1e6).Gamma + ninf),
    }
    w0 = max(np.linalg.norm(eq(a).omega) for a in (1e-6, -1e-6))
    ok = max(errs.values()) <= 1e-3 and w0 <= 1e-2
    record(3, ok, " ".join(f"a={k}:{v:.1e}" for k, v in errs.items())
           + f" |w|(a->0)={w0:.1e}")


def test_04_linearization():
    ev = linearize(BODY, "hanging", "lr").eigenvalues
    freqs = np.sort(np.abs(ev.imag))[::-1][::2]
    target = np.array([4.75800, 3.24202])
    e_h = np.max(np.abs(freqs - target)) if np.all(np.abs(ev.real) < 1e-12) else np.inf
    ev_i = linearize(BODY, "inverted", "lr").eigenvalues
    rates = np.sort(np.abs(ev_i.real))[::-1][::2]
    e_i = np.max(np.abs(rates - target)) if np.all(np.abs(ev_i.imag) < 1e-12) else np.inf
    worst = 0.0
    for which in ("hanging", "inverted"):
        for model in ("full", "lp", "lr"):
            lin = linearize(BODY, which, model)
            A = fd_jacobian(BODY, model, equilibrium_state(BODY, which, model))
            worst = max(worst, eig_agreement(lin, A))
    record(4, e_h <= 1e-4 and e_i <= 1e-4 and worst <= 1e-5,
           f"hanging freqs={freqs.round(6).tolist()} err={e_h:.1e} "
           f"inverted err={e_i:.1e} fd_rel={worst:.1e}")


def test_05_model_tower():
    full, lp, lr = build_initial(BODY, np.eye(3), [1.0, 1.0, 1.0])
    cfg = IntegratorConfig(h=1e-3, T=10.0)
    tf = integrate_trajectory(BODY, "full", full, cfg)
    tp = integrate_trajectory(BODY, "lp", lp, cfg)
    tr = integrate_trajectory(BODY, "lr", lr, cfg)
    d = max(np.max(np.linalg.norm(a - b, axis=1)) for a, b in
            ((tf.Gamma, tp.Gamma), (tf.Gamma, tr.Gamma), (tp.Gamma, tr.Gamma)))
    dE = np.max(np.abs(tr.E - tf.E))
    record(5, d <= 1e-6 and dE <= 1e-10, f"max |dGamma|={d:.2e} |E_lr - E_full|={dE:.2e}")


def test_06_reconstruction():
    worst = np.zeros(4)
    for R0, w0 in ((np.eye(3), [1.0, 1.0, 1.0]),
                   (exp_so3([0.3, -0.2, 0.5]), [0.8, -0.5, 1.2])):
        full, _, _ = build_initial(BODY, R0, w0)
        tr = integrate_trajectory(BODY, "full", full, IntegratorConfig(h=1e-3, T=5.0))
        mu = C.momentum_map(BODY, full)
        Gd = np.cross(tr.Gamma, tr.omega)
        rec = reconstruct(BODY, tr.t, tr.Gamma, Gd, mu, R0)
        eR = np.max(np.linalg.norm(rec.R - tr.R, axis=(1, 2)))
        ew = np.max(np.linalg.norm(rec.omega - tr.omega, axis=1))
        emu = max(abs(C.momentum_map(BODY, FullState(R, w)) - mu)
                  for R, w in zip(rec.R, rec.omega))
        econ = max(abs(C.mechanical_connection(BODY, FullState(R, w)))
                   for R, w in zip(rec.R_hor, rec.omega_hor))
        worst = np.maximum(worst, [eR, ew, emu, econ])
    eR, ew, emu, econ = worst
    record(6, eR <= 1e-5 and ew <= 1e-5 and emu <= 1e-8 and econ <= 1e-9,
           f"R={eR:.1e} omega={ew:.1e} mu={emu:.1e} connection={econ:.1e}")


def test_07_geometric_phase():
    analytic = -2.0 * np.pi * (1.0 - np.cos(0.5))
    iso = BodyParams(J=[0.2, 0.2, 0.2], rho=[0.0, 0.0, 0.3])
    t, G, Gd, Gdd = circle_loop(0.5)
    s_iso = geometric_phase_surface(iso, G)
    r_iso = geometric_phase_reconstruct(iso, t, G, Gd, Gdd).total
    e_iso = max(abs(s_iso - analytic), abs(r_iso - analytic))
    e_an = 0.0
    for axis in ((0, 0, 1), (1, 0, 0), (0.3, -0.5, 0.8)):
        t, G, Gd, Gdd = circle_loop(0.5, axis=np.array(axis, float))
        s = geometric_phase_surface(BODY, G)
        r = geometric_phase_reconstruct(BODY, t, G, Gd, Gdd).total
        e_an = max(e_an, abs(s - r))
    record(7, e_iso <= 1e-4 and e_an <= 1e-3,
           f"analytic={analytic:.7f} surface={s_iso:.7f} reconstruct={r_iso:.7f} "
           f"anisotropic |surface - reconstruct|={e_an:.1e}")


def _occupancy(u, v):
    H, _, _ = np.histogram2d(u, v, bins=50, range=[[-1, 1], [-1, 1]])
    return int(np.count_nonzero(H))


def _curve_residual(P, k=10):
    # median thickness/length ratio of local neighbourhoods
    d = np.linalg.norm(P[:, None, :] - P[None, :, :], axis=2)
    idx = np.argsort(d, axis=1)[:, 1:k + 1]
    r = []
    for i in range(len(P)):
        Q = P[idx[i]] - P[idx[i]].mean(axis=0)
        s = np.linalg.svd(Q, compute_uv=False)
        r.append(s[1] / max(s[0], 1e-300))
    return float(np.median(r))


def test_08_poincare_regimes():
    energies = [-2.65, 0.0, 2.03, 8.83, 11.95]
    cfg = IntegratorConfig(h=1e-3, T=3000.0)
    poincare_sweep(BODY, [0.0], IntegratorConfig(h=1e-3, T=20.0), 1, threads=1)  # JIT
    t0 = time.perf_counter()
    res = poincare_sweep(BODY, energies, cfg, max_crossings=2000)
    dt = time.perf_counter() - t0
    sec_ok = all(abs(q.g_residual) <= 1e-10 and q.direction > 0 and abs(q.E_err) <= 1e-8
                 for pts in res for q in pts)
    occ, curve = {}, {}
    for E, pts in zip(energies, res):
        P = np.array([[q.u, q.v] for q in pts])
        occ[E] = _occupancy(P[:, 0], P[:, 1])
        curve[E] = _curve_residual(P)
    one_d = curve[-2.65] <= 0.25
    two_d = occ[0.0] > 5 * occ[-2.65] and occ[2.03] > 5 * occ[-2.65]
    record(8, sec_ok and one_d and two_d and dt < 60.0,
           f"section_ok={sec_ok} curve_res(-2.65)={curve[-2.65]:.3f} "
           f"occupancy={ {k: occ[k] for k in energies} } runtime={dt:.1f}s")


def test_09_special_cases():
    p = BodyParams(J=[0.2, 0.2, 0.05], rho=[0.0, 0.0, 0.3])
    _, lp, _ = build_initial(p, exp_so3([0.4, 0.3, 0.0]), [0.5, -0.7, 2.0])
    tr = integrate_trajectory(p, "lp", lp, IntegratorConfig(h=1e-3, T=10.0))
    dwz = np.max(np.abs(tr.omega[:, 2] - tr.omega[0, 2]))

    # planar: independent scalar pendulum theta'' = -(m g l / J) sin theta
    k = p.m * p.g * 0.3 / 0.2
    t, X = integrate_special(p, "planar", [1.0, 0.0], 1e-3, 10.0)
    ref = solve_ivp(lambda _, y: [y[1], -k * np.sin(y[0])], (0, 10.0), [1.0, 0.0],
                    t_eval=t, method="DOP853", rtol=1e-13, atol=1e-13)
    dpl = np.max(np.abs(X[:, 0] - ref.y[0]))

    # spherical: start with omega_x = Gamma_y = 0
    G0 = np.array([np.sin(0.8), 0.0, np.cos(0.8)])
    _, S = integrate_special(p, "spherical", [0.0, 1.3, *G0], 1e-3, 10.0)
    _, lp2, _ = build_initial(p, exp_so3([0.0, -0.8, 0.0]), [0.0, 1.3, 0.0])
    tr2 = integrate_trajectory(p, "lp", lp2, IntegratorConfig(h=1e-3, T=10.0))
    dsp = max(np.max(np.abs(S[:, 0])), np.max(np.abs(S[:, 3])),
              np.max(np.abs(tr2.omega[:, 0])), np.max(np.abs(tr2.Gamma[:, 1])))
    record(9, dwz <= 1e-12 and dpl <= 1e-8 and dsp <= 1e-10,
           f"omega_z drift={dwz:.1e} planar err={dpl:.1e} spherical leak={dsp:.1e}")


def test_10_determinism(tmp_path):
    names = sorted(f[:-4] for f in os.listdir(SCEN) if f.endswith(".cfg"))
    bad = []
    for name in names:
        outs = []
        for rep in ("a", "b"):
            d = tmp_path / f"{name}_{rep}"
            r = subprocess.run([sys.executable, "-m", "pend3d.cli", name, "--config",
                                os.path.join(SCEN, f"{name}.cfg"), "--out-dir", str(d),
                                "--seed", "11"], capture_output=True)
            assert r.returncode == 0, r.stderr.decode()
            outs.append({f: (d / f).read_bytes() for f in sorted(os.listdir(d))
                         if f.endswith(".csv")})
        if not outs[0] or outs[0] != outs[1]:
            bad.append(name)
    record(10, not bad, f"scenarios={names} differing={bad}")

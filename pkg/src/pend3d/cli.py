"""``pend3d`` command line front-end.

Exit codes: 0 success, 1 numerical failure, 2 configuration or I/O failure.
"""

import argparse
import csv
import logging
import os
import sys

import numpy as np

from . import conservation as C
from .config import TASKS, parse_config
from .dynamics import FullState
from .equilibria import (default_alpha_grid, enumerate_lp, residual,
                         sort_principal_axes, to_user_frame)
from .errors import ConfigError, IoError, NumericalError, Pend3dError
from .geometry import exp_so3
from .integrate import (build_initial, integrate_trajectory, lr_accelerations,
                        poincare_sweep, threads_from_env)
from .linearization import (equilibrium_state, fd_jacobian, linearize)
from .output import (EQUILIBRIA_COLUMNS, LINEARIZE_COLUMNS, PHASE_COLUMNS,
                     POINCARE_COLUMNS, TRAJECTORY_COLUMNS, emit_csv, emit_svg)
from .reduction import (circle_loop, geometric_phase_reconstruct,
                        geometric_phase_surface, reconstruct)

log = logging.getLogger("pend3d")


def _initial(s, seed):
    R0 = np.array(s["initial.R"]).reshape(3, 3)
    w0 = np.array(s["initial.omega"])
    eps = s["initial.perturb"]
    if eps > 0:
        rng = np.random.default_rng(seed)
        R0 = R0 @ exp_so3(eps * rng.standard_normal(3))
        w0 = w0 + eps * rng.standard_normal(3)
    return R0, w0


def _traj_rows(traj, stride=1, theta=None):
    n = len(traj)
    rows = []
    for k in range(0, n, stride):
        R = traj.R[k].reshape(-1) if traj.R is not None else [None] * 9
        w = traj.omega[k] if traj.omega is not None else [None] * 3
        Gd = traj.Gammadot[k] if traj.Gammadot is not None else [None] * 3
        th = theta[k] if theta is not None else None
        rows.append([traj.t[k], *R, *w, *traj.Gamma[k], traj.E[k],
                     traj.h_momentum[k], *Gd, th])
    return rows


def task_simulate(s, out, seed):
    model = s["model"]
    R0, w0 = _initial(s, seed)
    full, lp, lr = build_initial(s.body, R0, w0)
    state = {"full": full, "lp": lp, "lr": lr}[model]
    traj = integrate_trajectory(s.body, model, state, s.integrator)
    emit_csv(TRAJECTORY_COLUMNS, _traj_rows(traj, s["output.sample_every"]),
             os.path.join(out, "trajectory.csv"))
    dE = traj.E - traj.E[0]
    emit_svg([{"x": traj.t, "y": dE, "kind": "line"}],
             os.path.join(out, "energy_drift.svg"),
             title=f"energy drift ({model})", xlabel="t [s]", ylabel="E(t) - E(0)")
    log.info("energy drift %.3e, momentum drift %.3e", traj.drift("E"),
             np.max(np.abs(traj.h_momentum - traj.h_momentum[0])))


def task_equilibria(s, out, seed):
    body = s.body
    P = np.eye(3)
    if s.permutation is not None or not body.is_diagonal:
        body, P = sort_principal_axes(body)
    grid = default_alpha_grid(body, s["equilibria.alpha_samples"],
                              s["equilibria.alpha_clamp"])
    gam = np.linspace(s["equilibria.gamma_min"], s["equilibria.gamma_max"],
                      s["equilibria.gamma_samples"])
    eqs = enumerate_lp(body, grid, gam,
                       degeneracy_tol=s["equilibria.degeneracy_tol"])
    rows = []
    pts_x, pts_y = [], []
    for e in eqs:
        if not np.array_equal(P, np.eye(3)):
            e = to_user_frame(e, P)
            res = residual(s.body, e.Gamma, e.omega)
        else:
            res = e.residual
        rows.append([e.name, e.alpha, *e.Gamma, *e.omega, e.mu, res,
                     e.param[0], e.param[1]])
        pts_x.append(e.Gamma[0])
        pts_y.append(e.Gamma[1])
    emit_csv(EQUILIBRIA_COLUMNS, rows, os.path.join(out, "equilibria.csv"))
    emit_svg([{"x": pts_x, "y": pts_y}], os.path.join(out, "equilibria.svg"),
             title="equilibrium attitudes", xlabel="Gamma1", ylabel="Gamma2",
             xlim=(-1.0, 1.0), ylim=(-1.0, 1.0))
    worst = max(r[9] for r in rows)
    log.info("%d equilibria, worst residual %.3e", len(rows), worst)


def task_linearize(s, out, seed):
    from scipy.optimize import linear_sum_assignment

    rows = []
    for which in s["linearize.which"]:
        for model in s["linearize.models"]:
            lin = linearize(s.body, which, model, certify=s["linearize.certify"])
            A = fd_jacobian(s.body, model, equilibrium_state(s.body, which, model),
                            s["linearize.fd_step"])
            fd = np.linalg.eigvals(A)
            cost = np.abs(lin.eigenvalues[:, None] - fd[None, :])
            r, c = linear_sum_assignment(cost)
            scale = max(np.max(np.abs(lin.eigenvalues)), 1e-300)
            for i, j in zip(r, c):
                ev, fe = lin.eigenvalues[i], fd[j]
                rows.append([which, model, int(i), ev.real, ev.imag, lin.verdict,
                             fe.real, fe.imag, abs(ev - fe) / scale])
    emit_csv(LINEARIZE_COLUMNS, rows, os.path.join(out, "linearize.csv"))


def _energy_tag(E):
    return format(float(E), "g").replace("+", "")


def task_poincare(s, out, seed):
    energies = list(s["poincare.energies"])
    res = poincare_sweep(s.body, energies, s.integrator,
                         max_crossings=s["poincare.max_crossings"],
                         threads=threads_from_env(),
                         energy_projection=s["poincare.energy_projection"])
    for E, pts in zip(energies, res):
        tag = _energy_tag(E)
        rows = [[q.t, q.u, q.v, q.sign, q.E_err, q.g_residual] for q in pts]
        emit_csv(POINCARE_COLUMNS, rows, os.path.join(out, f"poincare_E{tag}.csv"))
        series = []
        for sg, color in ((1, "black"), (-1, "red")):
            sel = [q for q in pts if q.sign == sg]
            series.append({"x": [q.u for q in sel], "y": [q.v for q in sel],
                           "color": color})
        emit_svg(series, os.path.join(out, f"poincare_E{tag}.svg"),
                 title=f"Poincare section E = {tag}", xlabel="u = Gamma1",
                 ylabel="v = Gamma2", xlim=(-1.0, 1.0), ylim=(-1.0, 1.0))
        log.info("E=%s: %d points", tag, len(pts))


def _read_reduced(path):
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rd = csv.DictReader(fh)
            t, G, Gd = [], [], []
            for row in rd:
                t.append(float(row["t"]))
                G.append([float(row[f"Gamma{i}"]) for i in (1, 2, 3)])
                Gd.append([float(row[f"Gammadot{i}"]) for i in (1, 2, 3)])
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"{path}: bad reduced trajectory ({exc})") from exc
    return np.array(t), np.array(G), np.array(Gd)


def task_reconstruct(s, out, seed):
    p = s.body
    R0, w0 = _initial(s, seed)
    src = s["reconstruct.input"]
    Gdd = None
    if src:
        path = src if os.path.isabs(src) else os.path.join(s.base_dir, src)
        t, G, Gd = _read_reduced(path)
        mu = s["reconstruct.mu"]
    else:
        full, _, lr = build_initial(p, R0, w0)
        tr = integrate_trajectory(p, "lr", lr, s.integrator)
        t, G, Gd, mu = tr.t, tr.Gamma, tr.Gammadot, lr.mu
        Gdd = lr_accelerations(p, tr)
    rec = reconstruct(p, t, G, Gd, mu, R0, Gdd, s["reconstruct.quadrature"])
    E = np.array([C.energy_full(p, FullState(R, w))
                  for R, w in zip(rec.R, rec.omega)])
    hm = np.einsum("ni,ij,nj->n", rec.omega, p.J, rec.R[:, 2, :])
    rows = []
    for k in range(0, t.size, s["output.sample_every"]):
        rows.append([t[k], *rec.R[k].reshape(-1), *rec.omega[k], *G[k], E[k],
                     hm[k], *Gd[k], rec.theta_dyn[k]])
    emit_csv(TRAJECTORY_COLUMNS, rows, os.path.join(out, "reconstruct.csv"))
    log.info("momentum error %.3e", np.max(np.abs(hm - mu)))


def task_phase(s, out, seed):
    p = s.body
    t, G, Gd, Gdd = circle_loop(s["phase.colatitude"], s["phase.samples"],
                                np.array(s["phase.axis"]))
    surf = geometric_phase_surface(p, G, s["phase.n_sub"])
    rec = geometric_phase_reconstruct(p, t, G, Gd, Gdd)
    ws = int(np.round((surf - np.angle(np.exp(1j * surf))) / (2 * np.pi)))
    rows = [["surface", float(np.angle(np.exp(1j * surf))), ws, surf],
            ["reconstruct", rec.theta, rec.winding, rec.total]]
    emit_csv(PHASE_COLUMNS, rows, os.path.join(out, "phase.csv"))
    emit_svg([{"x": G[:, 0], "y": G[:, 1], "kind": "line"}],
             os.path.join(out, "phase_loop.svg"), title="phase loop",
             xlabel="Gamma1", ylabel="Gamma2", xlim=(-1.0, 1.0), ylim=(-1.0, 1.0))


TASK_FUNCS = {
    "simulate": task_simulate,
    "equilibria": task_equilibria,
    "linearize": task_linearize,
    "poincare": task_poincare,
    "reconstruct": task_reconstruct,
    "phase": task_phase,
}


def run(s, out_dir=".", seed=0):
    """Run a scenario and return the exit code."""
    try:
        TASK_FUNCS[s.task](s, out_dir, seed)
    except NumericalError as exc:
        log.error("numerical failure: %s", exc)
        return 1
    except (ConfigError, IoError, OSError) as exc:
        log.error("%s", exc)
        return 2
    except Pend3dError as exc:
        # library preconditions violated by the scenario
        log.error("invalid scenario: %s", exc)
        return 2
    return 0


def _seed(text):
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def build_parser():
    ap = argparse.ArgumentParser(
        prog="pend3d", description="3D pendulum simulation and analysis")
    ap.add_argument("task", choices=TASKS)
    ap.add_argument("--config", required=True, help="scenario file")
    ap.add_argument("--out-dir", default=".", help="directory for outputs")
    ap.add_argument("--seed", type=_seed, default=0,
                    help="seed for random initial perturbations")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="pend3d: %(levelname)s: %(message)s")
    try:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
    except (OSError, UnicodeDecodeError) as exc:
        log.error("cannot read config %s: %s", args.config, exc)
        return 2
    try:
        s = parse_config(text, task=args.task,
                         base_dir=os.path.dirname(os.path.abspath(args.config)))
    except ConfigError as exc:
        log.error("%s: %s", args.config, exc)
        return 2
    return run(s, args.out_dir, args.seed)


if __name__ == "__main__":
    sys.exit(main())

"""Fixed-step integration, trajectories and Poincare sections.

Full and LP states are advanced with explicit Lie-group Runge-Kutta
(Munthe-Kaas) steps, so attitudes stay on SO(3) without projection.  The
``rk4-projected`` method applies classical RK4 to the matrix entries and
renormalizes periodically.  LR states use classical RK4 on the embedded
sphere followed by renormalization of Gamma and re-tangentialization of
Gammadot.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import math
import os

import numpy as np

from . import _kernels as K
from .conservation import energy_full, energy_lp, energy_lr, momentum_map
from .constants import TOL
from .dynamics import FullState, LPState, LRState, check_axisymmetric, rhs_special
from .errors import EmptySection, InitialMismatch, NoCrossings, StepBlowup, TooFarFromSO3
from .geometry import E3

METHODS = {"rk4-projected": 0, "liegroup-rk2": 1, "liegroup-rk4": 2}
MODELS = ("full", "lp", "lr")


@dataclass(frozen=True)
class IntegratorConfig:
    method: str = "liegroup-rk4"
    h: float = 1e-3
    T: float = 10.0
    renormalize_every: int = 1

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if not (self.h > 0 and math.isfinite(self.h)):
            raise ValueError("h must be positive")
        if not (self.T >= self.h and math.isfinite(self.T)):
            raise ValueError("T must be at least h")
        if int(self.renormalize_every) < 1:
            raise ValueError("renormalize_every must be >= 1")

    @property
    def n_steps(self):
        return max(1, int(math.ceil(self.T / self.h - 1e-9)))

    @property
    def h_eff(self):
        """Step actually used: ``T / n_steps`` (equals ``h`` when ``T/h`` is
        an integer)."""
        return self.T / self.n_steps

    @property
    def lr_order(self):
        return 2 if self.method == "liegroup-rk2" else 4


@dataclass
class Trajectory:
    """Sampled trajectory of one model with per-sample invariants."""

    model: str
    t: np.ndarray
    R: np.ndarray = None         # (n, 3, 3), full model
    omega: np.ndarray = None     # (n, 3), full and LP
    Gamma: np.ndarray = None     # (n, 3)
    Gammadot: np.ndarray = None  # (n, 3)
    E: np.ndarray = None
    h_momentum: np.ndarray = None
    mu: float = float("nan")

    def __len__(self):
        return self.t.size

    def state(self, k):
        if self.model == "full":
            return FullState(self.R[k], self.omega[k])
        if self.model == "lp":
            return LPState(self.Gamma[k], self.omega[k])
        return LRState(self.Gamma[k], self.Gammadot[k], self.mu)

    def drift(self, name="E"):
        """Largest relative deviation of an invariant from its start value."""
        x = getattr(self, name)
        return float(np.max(np.abs(x - x[0])) / max(abs(x[0]), 1e-300))


def _raise_status(status, k, h):
    if status == K.BLOWUP:
        raise StepBlowup(f"state norm exceeded 1e6 at t={(k + 1) * h:.6g}")
    if status == K.NOT_SO3:
        raise TooFarFromSO3(f"attitude left SO(3) at t={(k + 1) * h:.6g}")


def _run(p, model, state, cfg, n, h):
    m = METHODS[cfg.method]
    J, Jinv, mgr = p.kernel_args()
    if model == "full":
        Rs = np.empty((n + 1, 3, 3))
        ws = np.empty((n + 1, 3))
        st, k = K.run_full(J, Jinv, mgr, np.ascontiguousarray(state.R),
                           state.omega.copy(), h, n, m,
                           int(cfg.renormalize_every), Rs, ws)
        _raise_status(st, k, h)
        return dict(R=Rs, omega=ws, Gamma=np.ascontiguousarray(Rs[:, 2, :]))
    if model == "lp":
        Gs = np.empty((n + 1, 3))
        ws = np.empty((n + 1, 3))
        st, k = K.run_lp(J, Jinv, mgr, state.Gamma.copy(), state.omega.copy(),
                         h, n, m, Gs, ws)
        _raise_status(st, k, h)
        return dict(omega=ws, Gamma=Gs)
    if model == "lr":
        Gs = np.empty((n + 1, 3))
        Gds = np.empty((n + 1, 3))
        st, k = K.run_lr(J, Jinv, p.trJ, mgr, state.mu, state.Gamma.copy(),
                         state.Gammadot.copy(), h, n, cfg.lr_order, False, 0.0,
                         Gs, Gds)
        _raise_status(st, k, h)
        return dict(Gamma=Gs, Gammadot=Gds)
    raise ValueError(f"unknown model {model!r}")


def _check_state(model, state):
    kinds = {"full": FullState, "lp": LPState, "lr": LRState}
    if model not in kinds:
        raise ValueError(f"unknown model {model!r}")
    if not isinstance(state, kinds[model]):
        raise TypeError(f"model {model!r} needs a {kinds[model].__name__}")


def step(p, model, state, cfg):
    """Advance ``state`` by one step of size ``cfg.h``."""
    _check_state(model, state)
    out = _run(p, model, state, cfg, 1, cfg.h)
    if model == "full":
        R = out["R"][1]
        if cfg.method == "rk4-projected" and cfg.renormalize_every > 1:
            # a lone step has no renormalization slot; project here
            R = R.copy()
            K.polar_newton(R)
        return FullState(R, out["omega"][1])
    if model == "lp":
        return LPState(out["Gamma"][1], out["omega"][1])
    return LRState(out["Gamma"][1], out["Gammadot"][1], state.mu)


def _invariants(p, model, data, mu):
    mg = p.m * p.g
    G = data["Gamma"]
    if model in ("full", "lp"):
        w = data["omega"]
        Jw = w @ p.J.T
        E = 0.5 * np.sum(w * Jw, axis=1) - mg * (G @ p.rho)
        hm = np.sum(Jw * G, axis=1)
        return E, hm
    Gd = data["Gammadot"]
    JG = G @ p.J.T
    gJg = np.sum(G * JG, axis=1)
    X = np.cross(Gd, G)
    b = np.sum(JG * X, axis=1) / gJg
    nu = mu / gJg
    w = X + (nu - b)[:, None] * G
    E = 0.5 * np.sum(w * (w @ p.J.T), axis=1) - mg * (G @ p.rho)
    return E, np.full(G.shape[0], mu)


def integrate_trajectory(p, model, state0, cfg, observers=()):
    """Integrate ``model`` from ``state0`` and sample every step.

    Parameters
    ----------
    observers : iterable of callables
        Each is called as ``obs(t, trajectory, k)`` for every sample after
        the run, in time order.

    Returns
    -------
    Trajectory
    """
    _check_state(model, state0)
    n, h = cfg.n_steps, cfg.h_eff
    data = _run(p, model, state0, cfg, n, h)
    t = h * np.arange(n + 1)
    mu = state0.mu if model == "lr" else float("nan")
    E, hm = _invariants(p, model, data, mu)
    traj = Trajectory(model=model, t=t, E=E, h_momentum=hm, mu=mu, **data)
    for obs in observers:
        for k in range(n + 1):
            obs(t[k], traj, k)
    return traj


def lr_accelerations(p, traj):
    """``Gamma_ddot`` at every sample of an LR trajectory."""
    J, Jinv, mgr = p.kernel_args()
    out = np.empty_like(traj.Gamma)
    for k in range(len(traj)):
        out[k] = K.gddot(J, Jinv, p.trJ, mgr, traj.mu, tuple(traj.Gamma[k]),
                         tuple(traj.Gammadot[k]))
    return out


def build_initial(p, R0, omega0):
    """Matched full, LP and LR initial states from ``(R0, omega0)``."""
    full = FullState(R0, omega0)
    G = full.R.T @ E3
    lp = LPState(G, full.omega)
    lr = LRState(G, np.cross(G, full.omega), momentum_map(p, full))
    return full, lp, lr


# ---------------------------------------------------------------- special
def integrate_special(p, mode, state0, h, T, c=0.0):
    """Classical RK4 for the axisymmetric special cases.

    Returns ``(t, X)`` with one state row per sample.
    """
    check_axisymmetric(p)
    n = max(1, int(math.ceil(T / h - 1e-9)))
    h = T / n
    x = np.array(state0, dtype=float)
    X = np.empty((n + 1, x.size))
    X[0] = x
    f = lambda y: rhs_special(p, mode, y, c)
    for k in range(n):
        k1 = f(x)
        k2 = f(x + 0.5 * h * k1)
        k3 = f(x + 0.5 * h * k2)
        k4 = f(x + h * k3)
        x = x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if mode != "planar":
            x[2:5] /= np.linalg.norm(x[2:5])
        if not np.all(np.abs(x) < TOL.blowup):
            raise StepBlowup(f"state norm exceeded 1e6 at t={(k + 1) * h:.6g}")
        X[k + 1] = x
    return h * np.arange(n + 1), X


# --------------------------------------------------------------- Poincare
@dataclass(frozen=True)
class PoincareSection:
    E: float
    mu: float = 0.0
    tol: float = TOL.crossing
    max_crossings: int = 2000


@dataclass(frozen=True)
class PoincarePoint:
    t: float
    Gamma: np.ndarray
    Gammadot: np.ndarray
    E_err: float

    @property
    def u(self):
        return float(self.Gamma[0])

    @property
    def v(self):
        return float(self.Gamma[1])

    @property
    def sign(self):
        return 1 if self.Gamma[2] >= 0 else -1

    @property
    def g_residual(self):
        return float(self.Gammadot[2])

    @property
    def direction(self):
        G, V = self.Gamma, self.Gammadot
        return float(G[0] * V[1] - G[1] * V[0])


def poincare_map(p, state0, section, cfg, energy_projection=True):
    """Crossings of ``e3 . Gammadot = 0`` with ``e3 . (Gamma x Gammadot) > 0``.

    The LR model is integrated from ``state0`` for ``cfg.T``.  With
    ``energy_projection`` the speed is rescaled after every step so the
    state stays on the energy shell.
    """
    if section.E < p.min_energy:
        raise EmptySection(f"E={section.E} is below the minimum {p.min_energy}")
    if abs(state0.mu - section.mu) > 1e-12 * max(1.0, abs(section.mu)):
        raise InitialMismatch("state momentum differs from the section momentum")
    E0 = energy_lr(p, state0)
    if abs(E0 - section.E) > 1e-8:
        raise InitialMismatch(f"state energy {E0} is not on the shell {section.E}")
    J, Jinv, mgr = p.kernel_args()
    n, h = cfg.n_steps, cfg.h_eff
    out = np.empty((section.max_crossings, 7))
    st, npts = K.poincare_run(J, Jinv, p.trJ, mgr, state0.mu,
                              state0.Gamma.copy(), state0.Gammadot.copy(),
                              h, n, cfg.lr_order, bool(energy_projection),
                              float(section.E), float(section.tol),
                              TOL.bisection_iterations, TOL.pole_exclusion,
                              section.max_crossings, out)
    _raise_status(st, npts, h)
    if npts == 0:
        raise NoCrossings(f"no section crossings within T={cfg.T}")
    pts = []
    for row in out[:npts]:
        G, V = row[1:4].copy(), row[4:7].copy()
        e = float(K.energy_lr(J, mgr, state0.mu, tuple(G), tuple(V)))
        pts.append(PoincarePoint(float(row[0]), G, V, e - section.E))
    return pts


def spin_initial(p, E):
    """``R0 = I``, ``omega0 = c (1, 1, 1)`` with energy ``E`` (c >= 0)."""
    one = np.ones(3)
    kin = 0.5 * one @ p.J @ one
    pot = -p.m * p.g * p.rho @ E3
    if E < pot:
        raise EmptySection(f"E={E} is below the energy of the start attitude")
    c = math.sqrt((E - pot) / kin)
    return build_initial(p, np.eye(3), c * one)


def threads_from_env(default=None):
    v = os.environ.get("PEND3D_THREADS")
    if v:
        try:
            return max(1, int(v))
        except ValueError:
            pass
    return default or (os.cpu_count() or 1)


def poincare_sweep(p, energies, cfg, max_crossings=2000, threads=None,
                   energy_projection=True):
    """Poincare maps for several energies from the ``c (1, 1, 1)`` start.

    Runs concurrently; results come back in the order of ``energies``.
    """
    def one(E):
        _, _, lr = spin_initial(p, E)
        sec = PoincareSection(E=float(E), mu=lr.mu, max_crossings=max_crossings)
        # the start energy carries rounding error; put it on the shell
        V = np.array(K.energy_project(p.J, tuple(p.mgr), lr.mu,
                                      tuple(lr.Gamma), tuple(lr.Gammadot),
                                      float(E)))
        lr = LRState(lr.Gamma, V, lr.mu)
        return poincare_map(p, lr, sec, cfg, energy_projection)

    n = threads or threads_from_env()
    if n <= 1 or len(energies) <= 1:
        return [one(E) for E in energies]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(one, energies))

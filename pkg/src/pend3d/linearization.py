"""Linearization at the hanging and inverted equilibria.

Small attitude perturbations ``R = R_e exp(hat(x))`` obey
``J x'' + s K x = 0`` with the stiffness ``K = -(m g / |rho|) hat(rho)^2``
and ``s = +1`` at the hanging and ``s = -1`` at the inverted equilibrium.
Writing ``J = M M^T`` and ``K = M Lambda M^T`` decouples the modes.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import _kernels as Kn
from .constants import TOL
from .dynamics import FullState, LPState, LRState
from .equilibria import residual as eq_residual
from .errors import BalancedBody, NotAnEquilibrium
from .geometry import E3, attitude_from_gamma, hat

MODEL_DIMS = {"full": 6, "lp": 5, "lr": 4}


@dataclass(frozen=True)
class Diagonalization:
    M: np.ndarray
    Lambda: np.ndarray  # (mgl1, mgl2, 0), descending


@dataclass(frozen=True)
class LinearModel:
    model: str
    which: str
    A: np.ndarray
    eigenvalues: np.ndarray
    verdict: str


def stiffness(p):
    if p.rho_norm < TOL.balanced_rho:
        raise BalancedBody("stiffness is undefined for a balanced body")
    r = hat(p.rho)
    return -(p.m * p.g / p.rho_norm) * (r @ r)


def _fix_basis(Q, lam):
    """Deterministic eigenvectors: canonical bases inside repeated
    eigenspaces, then the largest entry of each column made positive."""
    Q = Q.copy()
    scale = max(np.max(np.abs(lam)), 1e-300)
    i = 0
    while i < 3:
        j = i + 1
        while j < 3 and abs(lam[j] - lam[i]) <= 1e-10 * scale:
            j += 1
        if j - i > 1:
            V = Q[:, i:j]
            basis = []
            for e in np.eye(3):
                v = V @ (V.T @ e)
                for b in basis:
                    v = v - (b @ v) * b
                if np.linalg.norm(v) > 1e-6:
                    basis.append(v / np.linalg.norm(v))
                if len(basis) == j - i:
                    break
            Q[:, i:j] = np.array(basis).T
        i = j
    for c in range(3):
        k = np.argmax(np.abs(Q[:, c]))
        if Q[k, c] < 0:
            Q[:, c] = -Q[:, c]
    return Q


def simultaneous_diagonalize(p):
    """Return ``M`` and ``Lambda`` with ``J = M M^T`` and ``K = M Lambda M^T``.

    ``M`` is the Cholesky factor of ``J`` times the orthogonal matrix that
    diagonalizes the congruence-transformed stiffness.
    """
    K = stiffness(p)
    L = np.linalg.cholesky(p.J)
    Li = np.linalg.inv(L)
    S = Li @ K @ Li.T
    S = 0.5 * (S + S.T)
    lam, Q = np.linalg.eigh(S)
    order = np.argsort(-lam, kind="stable")
    lam, Q = lam[order], Q[:, order]
    Q = _fix_basis(Q, lam)
    return Diagonalization(M=L @ Q, Lambda=lam)


def _sort_eigs(ev):
    ev = np.asarray(ev, dtype=complex)
    # clean rounding noise so the ordering is stable
    sc = max(np.max(np.abs(ev)), 1.0)
    re = np.where(np.abs(ev.real) < 1e-12 * sc, 0.0, ev.real)
    im = np.where(np.abs(ev.imag) < 1e-12 * sc, 0.0, ev.imag)
    ev = re + 1j * im
    idx = np.lexsort((-ev.imag, -ev.real, -np.round(np.abs(ev), 10)))
    return ev[idx]


def energy_hessian(p, Gamma_e):
    """Hessian of the LP energy at ``(Gamma_e, 0)`` in a gnomonic chart
    for the attitude and linear coordinates for ``omega``."""
    H = np.zeros((5, 5))
    H[:2, :2] = p.m * p.g * float(p.rho @ Gamma_e) * np.eye(2)
    H[2:, 2:] = p.J
    return H


def classify(eigenvalues, hessian=None):
    ev = np.asarray(eigenvalues)
    sc = max(np.max(np.abs(ev)), 1e-300)
    if np.any(ev.real > 1e-9 * sc):
        return "Unstable"
    if hessian is not None and np.min(np.linalg.eigvalsh(hessian)) > 0.0:
        return "LyapunovStableCandidate"
    return "Inconclusive"


def linearize(p, which="hanging", model="lr", certify=True):
    """Linear model in modal coordinates ``x = M^T delta_theta``.

    Coordinates: full ``(x1, x2, x3, x1', x2', x3')``, LP
    ``(x1, x2, x1', x2', x3')`` and LR ``(x1, x2, x1', x2')``.
    """
    if which not in ("hanging", "inverted"):
        raise ValueError("which must be 'hanging' or 'inverted'")
    if model not in MODEL_DIMS:
        raise ValueError(f"unknown model {model!r}")
    D = simultaneous_diagonalize(p)
    s = 1.0 if which == "hanging" else -1.0
    lam = D.Lambda
    if model == "full":
        A = np.zeros((6, 6))
        A[:3, 3:] = np.eye(3)
        A[3:, :3] = -s * np.diag(lam)
    elif model == "lp":
        A = np.zeros((5, 5))
        A[0, 2] = A[1, 3] = 1.0
        A[2, 0] = -s * lam[0]
        A[3, 1] = -s * lam[1]
    else:
        A = np.zeros((4, 4))
        A[:2, 2:] = np.eye(2)
        A[2:, :2] = -s * np.diag(lam[:2])
    ev = _sort_eigs(np.linalg.eigvals(A))
    Ge = s * p.rho_hat
    H = energy_hessian(p, Ge) if certify else None
    verdict = classify(ev, H)
    return LinearModel(model, which, A, ev, verdict)


# ------------------------------------------------------------- FD oracle
def tangent_basis(G):
    G = np.asarray(G, dtype=float)
    k = int(np.argmin(np.abs(G)))
    e = np.eye(3)[k]
    t1 = e - (e @ G) * G
    t1 /= np.linalg.norm(t1)
    return t1, np.cross(G, t1)


def _chart(Ge, T, a, ad=None):
    P = Ge + a[0] * T[0] + a[1] * T[1]
    n = np.linalg.norm(P)
    G = P / n
    if ad is None:
        return G
    Pd = ad[0] * T[0] + ad[1] * T[1]
    Gd = Pd / n - P * (P @ Pd) / n**3
    return G, Gd


def _chart_rates(Ge, T, G, Gd, Gdd=None):
    D = Ge @ G
    Dd = Ge @ Gd
    ad = np.array([(t @ Gd) * D - (t @ G) * Dd for t in T]) / D**2
    if Gdd is None:
        return ad
    N = np.array([(t @ Gd) * D - (t @ G) * Dd for t in T])
    Nd = np.array([(t @ Gdd) * D - (t @ G) * (Ge @ Gdd) for t in T])
    add = Nd / D**2 - 2.0 * N * Dd / D**3
    return ad, add


def _full_field(p, Re, x):
    xi, w = x[:3], x[3:]
    G = Kn.rodrigues_apply(tuple(-xi), tuple(Re.T @ E3))
    wd = Kn.wdot(p.J, p.Jinv, tuple(p.mgr), G, tuple(w))
    xid = Kn.dexpinv(tuple(xi), tuple(w))
    return np.concatenate([xid, wd])


def _lp_field(p, Ge, T, x):
    G = _chart(Ge, T, x[:2])
    w = x[2:]
    Gd = np.cross(G, w)
    wd = Kn.wdot(p.J, p.Jinv, tuple(p.mgr), tuple(G), tuple(w))
    return np.concatenate([_chart_rates(Ge, T, G, Gd), wd])


def _lr_field(p, Ge, T, mu, x):
    G, Gd = _chart(Ge, T, x[:2], x[2:])
    Gdd = np.array(Kn.gddot(p.J, p.Jinv, p.trJ, tuple(p.mgr), mu,
                            tuple(G), tuple(Gd)))
    ad, add = _chart_rates(Ge, T, G, Gd, Gdd)
    return np.concatenate([ad, add])


def fd_jacobian(p, model, state, h=1e-5):
    """Central-difference Jacobian of a vector field at an equilibrium.

    The attitude uses the exponential chart on SO(3) (full model) or a
    gnomonic chart centred at the equilibrium on S^2 (reduced models);
    velocities use linear coordinates.
    """
    if not (1e-7 <= h <= 1e-4):
        raise ValueError("h must lie in [1e-7, 1e-4]")
    if model == "full":
        if not isinstance(state, FullState):
            raise TypeError("full model needs a FullState")
        Ge = state.R.T @ E3
        res = eq_residual(p, Ge, state.omega) + np.linalg.norm(state.omega)
        Re = state.R
        f = lambda x: _full_field(p, Re, x)
        x0 = np.concatenate([np.zeros(3), state.omega])
    elif model == "lp":
        if not isinstance(state, LPState):
            raise TypeError("lp model needs an LPState")
        Ge = state.Gamma
        res = eq_residual(p, Ge, state.omega)
        T = tangent_basis(Ge)
        f = lambda x: _lp_field(p, Ge, T, x)
        x0 = np.concatenate([np.zeros(2), state.omega])
    elif model == "lr":
        if not isinstance(state, LRState):
            raise TypeError("lr model needs an LRState")
        Ge = state.Gamma
        a = Kn.gddot(p.J, p.Jinv, p.trJ, tuple(p.mgr), state.mu, tuple(Ge),
                     tuple(state.Gammadot))
        res = np.linalg.norm(a) + np.linalg.norm(state.Gammadot)
        T = tangent_basis(Ge)
        f = lambda x: _lr_field(p, Ge, T, state.mu, x)
        x0 = np.zeros(4)
    else:
        raise ValueError(f"unknown model {model!r}")
    if res > TOL.equilibrium_residual:
        raise NotAnEquilibrium(f"state residual {res:.3e} exceeds tolerance")
    n = x0.size
    A = np.empty((n, n))
    for j in range(n):
        d = np.zeros(n)
        d[j] = h
        A[:, j] = (f(x0 + d) - f(x0 - d)) / (2.0 * h)
    return A


def equilibrium_state(p, which, model):
    """The hanging or inverted equilibrium as a state of ``model``."""
    s = 1.0 if which == "hanging" else -1.0
    G = s * p.rho_hat
    if model == "full":
        return FullState(attitude_from_gamma(G), np.zeros(3))
    if model == "lp":
        return LPState(G, np.zeros(3))
    return LRState(G, np.zeros(3), 0.0)


def match_eigenvalues(a, b):
    """Largest distance between optimally paired eigenvalues."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    C = np.abs(a[:, None] - b[None, :])
    r, c = linear_sum_assignment(C)
    return float(np.max(C[r, c]))


def eig_agreement(lin, A_fd):
    """Relative eigenvalue mismatch between a linear model and an FD
    Jacobian, scaled by the spectral radius of the linear model."""
    ev_fd = np.linalg.eigvals(A_fd)
    scale = max(np.max(np.abs(lin.eigenvalues)), 1e-300)
    return match_eigenvalues(lin.eigenvalues, ev_fd) / scale

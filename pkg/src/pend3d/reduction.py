"""Projection, reconstruction and geometric phase.

A reduced curve ``Gamma(t)`` on the momentum level ``mu`` is lifted to SO(3)
in three steps: the horizontal lift ``R_hor`` (zero mechanical connection),
the dynamic phase ``theta_dyn = int mu / (Gamma . J Gamma)``, and
``R = exp(theta_dyn hat(e3)) R_hor``.
"""

from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_simpson, cumulative_trapezoid

from . import _kernels as K
from .constants import TOL
from .dynamics import LPState
from .errors import InitialMismatch, NotClosed, NotVerticalRotation
from .geometry import E3, rotation_between


def project(s):
    """``(R, omega) -> (R^T e3, omega)``."""
    return LPState(s.R.T @ E3, s.omega)


def omega_hor(p, Gamma, Gammadot):
    """Horizontal angular velocity ``Gammadot x Gamma - b Gamma``."""
    return np.array(K.omega_hor(p.J, tuple(np.asarray(Gamma, float)),
                                tuple(np.asarray(Gammadot, float))))


@dataclass(frozen=True)
class Reconstruction:
    t: np.ndarray
    R: np.ndarray          # (n, 3, 3)
    omega: np.ndarray      # (n, 3)
    R_hor: np.ndarray      # (n, 3, 3)
    omega_hor: np.ndarray  # (n, 3)
    theta_dyn: np.ndarray  # (n,)


def _uniform_step(t):
    t = np.asarray(t, dtype=float)
    if t.ndim != 1 or t.size < 2:
        raise ValueError("need at least two samples")
    dt = np.diff(t)
    h = (t[-1] - t[0]) / (t.size - 1)
    if h <= 0 or np.max(np.abs(dt - h)) > 1e-9 * max(abs(h), abs(t[-1])):
        raise ValueError("samples must lie on a uniform time grid")
    return h


def _midpoints(G, Gd, Gdd, h):
    # cubic Hermite values at the interval midpoints
    Gm = 0.5 * (G[:-1] + G[1:]) + (h / 8.0) * (Gd[:-1] - Gd[1:])
    Gdm = 0.5 * (Gd[:-1] + Gd[1:]) + (h / 8.0) * (Gdd[:-1] - Gdd[1:])
    Gm /= np.linalg.norm(Gm, axis=1)[:, None]
    Gdm -= np.sum(Gm * Gdm, axis=1)[:, None] * Gm
    return Gm, Gdm


def horizontal_lift(p, t, Gamma, Gammadot, R0, Gammaddot=None):
    """Integrate ``R_hor' = R_hor hat(omega_hor)`` from ``R0``."""
    G = np.ascontiguousarray(Gamma, dtype=float)
    Gd = np.ascontiguousarray(Gammadot, dtype=float)
    h = _uniform_step(t)
    if Gammaddot is None:
        Gdd = np.gradient(Gd, h, axis=0, edge_order=2)
    else:
        Gdd = np.asarray(Gammaddot, dtype=float)
    Gm, Gdm = _midpoints(G, Gd, Gdd, h)
    Rs = np.empty((G.shape[0], 3, 3))
    K.lift(p.J, G, Gd, np.ascontiguousarray(Gm), np.ascontiguousarray(Gdm),
           h, np.ascontiguousarray(R0, dtype=float), Rs)
    return Rs


def reconstruct(p, t, Gamma, Gammadot, mu, R0, Gammaddot=None,
                quadrature="trapezoid"):
    """Rebuild a full trajectory from a reduced one.

    Parameters
    ----------
    p : BodyParams
    t : array_like, shape (n,)
        Uniform time grid.
    Gamma, Gammadot : array_like, shape (n, 3)
    mu : float
        Momentum value of the reduced trajectory.
    R0 : array_like, shape (3, 3)
        Initial attitude; must satisfy ``R0.T @ e3 == Gamma[0]``.
    Gammaddot : array_like, optional
        Second derivative at the samples, used for midpoint interpolation.
        Estimated by finite differences when omitted.
    quadrature : {"trapezoid", "simpson"}
        Rule for the dynamic phase.

    Returns
    -------
    Reconstruction
    """
    t = np.asarray(t, dtype=float)
    G = np.asarray(Gamma, dtype=float)
    Gd = np.asarray(Gammadot, dtype=float)
    R0 = np.asarray(R0, dtype=float)
    if np.linalg.norm(R0.T @ E3 - G[0]) > TOL.initial_mismatch:
        raise InitialMismatch("R0^T e3 does not match Gamma(0)")
    R_hor = horizontal_lift(p, t, G, Gd, R0, Gammaddot)
    JG = G @ p.J.T
    gJg = np.sum(G * JG, axis=1)
    X = np.cross(Gd, G)
    b = np.sum(JG * X, axis=1) / gJg
    w_hor = X - b[:, None] * G
    nu = mu / gJg
    if quadrature == "trapezoid":
        th = cumulative_trapezoid(nu, t, initial=0.0)
    elif quadrature == "simpson":
        th = cumulative_simpson(nu, x=t, initial=0.0)
    else:
        raise ValueError(f"unknown quadrature {quadrature!r}")
    c, s = np.cos(th), np.sin(th)
    Rz = np.zeros((t.size, 3, 3))
    Rz[:, 0, 0] = c
    Rz[:, 0, 1] = -s
    Rz[:, 1, 0] = s
    Rz[:, 1, 1] = c
    Rz[:, 2, 2] = 1.0
    R = Rz @ R_hor
    w = w_hor + nu[:, None] * G
    return Reconstruction(t, R, w, R_hor, w_hor, th)


def _check_closed(G):
    if np.linalg.norm(G[0] - G[-1]) > TOL.loop_closure:
        raise NotClosed("loop end points differ")


def _phase_integrand(p, X):
    JX = X @ p.J.T
    q = np.sum(X * JX, axis=-1)
    return (2.0 * np.sum(JX * JX, axis=-1) - p.trJ * q) / q**2


def _subdivision(n):
    """Barycentric vertex indices of the n^2 sub-triangles."""
    tris = []
    for i in range(n):
        for j in range(n - i):
            tris.append(((i, j), (i + 1, j), (i, j + 1)))
            if i + j < n - 1:
                tris.append(((i + 1, j), (i + 1, j + 1), (i, j + 1)))
    W = np.zeros((len(tris), 3, 3))
    for k, tri in enumerate(tris):
        for v, (i, j) in enumerate(tri):
            W[k, v] = (1.0 - (i + j) / n, i / n, j / n)
    return W


def geometric_phase_surface(p, loop, n_sub=16):
    """Surface integral of the phase density over the region bounded by
    ``loop`` on the side of its centroid.

    The region is fanned from the normalized centroid, each fan triangle is
    split into ``n_sub**2`` spherical sub-triangles and each sub-triangle
    contributes (density at its centroid) x (signed solid angle).  A loop
    running counter-clockwise seen from outside the sphere encloses positive
    area.
    """
    L = np.asarray(loop, dtype=float)
    _check_closed(L)
    P = L[:-1]
    if P.shape[0] < 3:
        return 0.0
    c = P.mean(axis=0)
    nc = np.linalg.norm(c)
    if nc < 1e-12:
        raise NotClosed("loop centroid is at the origin; split the loop")
    c /= nc
    A = np.repeat(c[None, :], P.shape[0], axis=0)
    B = P
    C = np.roll(P, -1, axis=0)
    W = _subdivision(n_sub)
    # vertices: (ntri, nsub, 3 corners, 3 coords)
    V = (W[None, :, :, 0, None] * A[:, None, None, :]
         + W[None, :, :, 1, None] * B[:, None, None, :]
         + W[None, :, :, 2, None] * C[:, None, None, :])
    V /= np.linalg.norm(V, axis=-1, keepdims=True)
    a, b, cc = V[..., 0, :], V[..., 1, :], V[..., 2, :]
    num = np.sum(a * np.cross(b, cc), axis=-1)
    den = 1.0 + np.sum(a * b, axis=-1) + np.sum(b * cc, axis=-1) + np.sum(cc * a, axis=-1)
    omega = 2.0 * np.arctan2(num, den)
    mid = a + b + cc
    nm = np.linalg.norm(mid, axis=-1, keepdims=True)
    mid = np.where(nm > 0, mid / np.where(nm > 0, nm, 1.0), a)
    return float(np.sum(_phase_integrand(p, mid) * omega))


@dataclass(frozen=True)
class PhaseResult:
    theta: float     # principal value in (-pi, pi]
    winding: int
    total: float     # theta + 2 pi winding


def _section(c):
    """Smooth map Gamma -> R with R Gamma = e3, singular only at -c."""
    Qc = rotation_between(c, E3)

    def sigma(G):
        return Qc @ rotation_between(G, c)
    return sigma


def geometric_phase_reconstruct(p, t, loop, loop_dot, Gammaddot=None):
    """Phase of the horizontal lift of a closed loop (momentum zero).

    The accumulated angle is tracked continuously against a reference
    section so the winding count is not lost to the 2 pi periodicity.
    """
    G = np.asarray(loop, dtype=float)
    Gd = np.asarray(loop_dot, dtype=float)
    _check_closed(G)
    c = G[:-1].mean(axis=0)
    c = c / np.linalg.norm(c) if np.linalg.norm(c) > 1e-12 else G[0]
    sigma = _section(c)
    R0 = sigma(G[0])
    Rh = horizontal_lift(p, t, G, Gd, R0, Gammaddot)
    M = Rh[-1] @ Rh[0].T
    if np.linalg.norm(M @ E3 - E3) > TOL.vertical_rotation:
        raise NotVerticalRotation("end point map is not a rotation about e3")
    theta = float(np.arctan2(M[1, 0], M[0, 0]))
    phi = np.empty(G.shape[0])
    for k in range(G.shape[0]):
        A = Rh[k] @ sigma(G[k]).T
        phi[k] = np.arctan2(A[1, 0], A[0, 0])
    phi = np.unwrap(phi)
    total = float(phi[-1] - phi[0])
    winding = int(np.round((total - theta) / (2.0 * np.pi)))
    if theta == -np.pi:
        theta = np.pi
    return PhaseResult(theta, winding, theta + 2.0 * np.pi * winding)


def circle_loop(theta0, n=2001, axis=E3, T=1.0):
    """Counter-clockwise circle at colatitude ``theta0`` about ``axis``.

    Returns ``(t, Gamma, Gammadot, Gammaddot)`` over one period ``T``.
    """
    axis = np.asarray(axis, dtype=float)
    axis /= np.linalg.norm(axis)
    Q = rotation_between(E3, axis)
    t = np.linspace(0.0, T, n)
    ph = 2.0 * np.pi * t / T
    w = 2.0 * np.pi / T
    s0, c0 = np.sin(theta0), np.cos(theta0)
    G = np.stack([s0 * np.cos(ph), s0 * np.sin(ph), np.full_like(ph, c0)], 1)
    Gd = np.stack([-s0 * w * np.sin(ph), s0 * w * np.cos(ph), 0 * ph], 1)
    Gdd = np.stack([-s0 * w * w * np.cos(ph), -s0 * w * w * np.sin(ph), 0 * ph], 1)
    G[-1] = G[0]
    return t, G @ Q.T, Gd @ Q.T, Gdd @ Q.T

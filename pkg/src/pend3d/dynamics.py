"""Body parameters, states and vector fields of the 3D pendulum.

Gravity points along ``+e3``, so the hanging attitude satisfies
``R.T @ e3 == rho / |rho|``.
"""

from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .constants import TOL
from .errors import InvalidBody, NotAxisymmetric, NotUnit, TooFarFromSO3
from .geometry import E3, hat, orthogonality_residual


def _vec3(x, name):
    a = np.array(x, dtype=float).reshape(-1)
    if a.shape != (3,) or not np.all(np.isfinite(a)):
        raise InvalidBody(f"{name} must be a finite 3-vector")
    return a


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class BodyParams:
    """Inertia ``J`` (3x3 or its diagonal), mass ``m``, gravity ``g`` and the
    pivot-to-mass-centre vector ``rho``.

    Any symmetric positive definite ``J`` is accepted.  Operations that need
    the principal-axis convention check it themselves.
    """

    J: np.ndarray
    m: float = 1.0
    g: float = 9.81
    rho: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 0.3]))
    balanced: bool = False

    def __post_init__(self):
        J = np.array(self.J, dtype=float)
        if J.shape == (3,):
            J = np.diag(J)
        if J.shape != (3, 3) or not np.all(np.isfinite(J)):
            raise InvalidBody("J must be a finite 3x3 matrix or 3 diagonal entries")
        if np.max(np.abs(J - J.T)) > 1e-12 * max(1.0, np.max(np.abs(J))):
            raise InvalidBody("J must be symmetric")
        J = 0.5 * (J + J.T)
        if np.min(np.linalg.eigvalsh(J)) <= 0.0:
            raise InvalidBody("J must be positive definite")
        m, g = float(self.m), float(self.g)
        if not (np.isfinite(m) and m > 0.0):
            raise InvalidBody("m must be positive")
        if not (np.isfinite(g) and g > 0.0):
            raise InvalidBody("g must be positive")
        rho = _vec3(self.rho, "rho")
        if np.linalg.norm(rho) <= TOL.balanced_rho and not self.balanced:
            raise InvalidBody("rho is zero; set balanced=True for a balanced body")
        diagonal = bool(np.all(J == np.diag(np.diag(J))))
        Jinv = np.diag(1.0 / np.diag(J)) if diagonal else np.linalg.inv(J)
        Jinv = 0.5 * (Jinv + Jinv.T)
        object.__setattr__(self, "J", _frozen(J))
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "rho", _frozen(rho))
        object.__setattr__(self, "balanced", bool(self.balanced))
        object.__setattr__(self, "Jinv", _frozen(Jinv))
        object.__setattr__(self, "is_diagonal", diagonal)
        object.__setattr__(self, "trJ", float(np.trace(J)))
        object.__setattr__(self, "mgr", _frozen(m * g * rho))

    def __eq__(self, other):
        if not isinstance(other, BodyParams):
            return NotImplemented
        return (np.array_equal(self.J, other.J) and self.m == other.m
                and self.g == other.g and np.array_equal(self.rho, other.rho)
                and self.balanced == other.balanced)

    def __hash__(self):
        return hash((self.J.tobytes(), self.m, self.g, self.rho.tobytes(),
                     self.balanced))

    @property
    def rho_norm(self):
        return float(np.linalg.norm(self.rho))

    @property
    def rho_hat(self):
        return self.rho / self.rho_norm

    @property
    def min_energy(self):
        """Energy of the hanging equilibrium, ``-m g |rho|``."""
        return -self.m * self.g * self.rho_norm

    def kernel_args(self):
        return self.J, self.Jinv, tuple(self.mgr)


@dataclass(frozen=True, eq=False)
class FullState:
    """Point ``(R, omega)`` of TSO(3)."""

    R: np.ndarray
    omega: np.ndarray

    def __post_init__(self):
        R = np.array(self.R, dtype=float)
        if R.shape != (3, 3) or not np.all(np.isfinite(R)):
            raise TooFarFromSO3("R must be a finite 3x3 matrix")
        if (orthogonality_residual(R) > TOL.so3_orthogonality
                or abs(np.linalg.det(R) - 1.0) > TOL.so3_det):
            raise TooFarFromSO3("R is not a rotation; call renormalize first")
        object.__setattr__(self, "R", _frozen(R))
        object.__setattr__(self, "omega", _frozen(_vec3(self.omega, "omega")))

    @property
    def Gamma(self):
        return self.R.T @ E3


@dataclass(frozen=True, eq=False)
class LPState:
    """Point ``(Gamma, omega)`` of TSO(3)/S^1."""

    Gamma: np.ndarray
    omega: np.ndarray

    def __post_init__(self):
        G = np.array(self.Gamma, dtype=float).reshape(-1)
        if G.shape != (3,) or abs(np.linalg.norm(G) - 1.0) > TOL.unit:
            raise NotUnit("Gamma must be a unit 3-vector")
        object.__setattr__(self, "Gamma", _frozen(G))
        object.__setattr__(self, "omega", _frozen(_vec3(self.omega, "omega")))


@dataclass(frozen=True, eq=False)
class LRState:
    """Point ``(Gamma, Gammadot)`` of TS^2 on the momentum level ``mu``.

    A normal component of ``Gammadot`` is projected out on construction.
    """

    Gamma: np.ndarray
    Gammadot: np.ndarray
    mu: float = 0.0

    def __post_init__(self):
        G = np.array(self.Gamma, dtype=float).reshape(-1)
        if G.shape != (3,) or abs(np.linalg.norm(G) - 1.0) > TOL.unit:
            raise NotUnit("Gamma must be a unit 3-vector")
        V = _vec3(self.Gammadot, "Gammadot")
        V = V - np.dot(G, V) * G
        object.__setattr__(self, "Gamma", _frozen(G))
        object.__setattr__(self, "Gammadot", _frozen(V))
        object.__setattr__(self, "mu", float(self.mu))


@dataclass(frozen=True)
class LRAux:
    b: float
    nu: float
    c: float
    Sigma: np.ndarray


def rhs_full(p, s):
    """Return ``(omega_dot, R_dot)`` for the full model."""
    G = s.R.T @ E3
    wd = K.wdot(p.J, p.Jinv, tuple(p.mgr), tuple(G), tuple(s.omega))
    return np.array(wd), s.R @ hat(s.omega)


def rhs_lp(p, s):
    """Return ``(omega_dot, Gamma_dot)`` for the Lagrange-Poincare model."""
    wd = K.wdot(p.J, p.Jinv, tuple(p.mgr), tuple(s.Gamma), tuple(s.omega))
    return np.array(wd), np.cross(s.Gamma, s.omega)


def lr_aux(p, s):
    """Auxiliary scalars ``b, nu, c`` and the vector ``Sigma``."""
    b, nu, c, Sig = K.lr_aux(p.J, p.Jinv, p.trJ, tuple(p.mgr), s.mu,
                             tuple(s.Gamma), tuple(s.Gammadot))
    return LRAux(b, nu, c, np.array(Sig))


def rhs_lr(p, s):
    """Return ``(Gamma_dot, Gamma_ddot)`` for the Lagrange-Routh model."""
    a = K.gddot(p.J, p.Jinv, p.trJ, tuple(p.mgr), s.mu,
                tuple(s.Gamma), tuple(s.Gammadot))
    return s.Gammadot.copy(), np.array(a)


def check_axisymmetric(p):
    """Return ``(J_t, J_a, rho_s)`` or raise :class:`NotAxisymmetric`."""
    J = p.J
    scale = np.max(np.abs(J))
    tol = TOL.axisymmetry
    off = J - np.diag(np.diag(J))
    if np.max(np.abs(off)) > tol * scale or abs(J[0, 0] - J[1, 1]) > tol * scale:
        raise NotAxisymmetric("J must equal diag(J_t, J_t, J_a)")
    r = p.rho
    if (max(abs(r[0]), abs(r[1])) > tol * max(p.rho_norm, 1e-300)
            or r[2] <= 0.0):
        raise NotAxisymmetric("rho must be rho_s * e3 with rho_s > 0")
    return float(J[0, 0]), float(J[2, 2]), float(r[2])


def rhs_special(p, mode, state, c=0.0):
    """Vector field of an axisymmetric special case.

    Parameters
    ----------
    p : BodyParams
        Must satisfy ``J = diag(J_t, J_t, J_a)`` and ``rho = rho_s e3``.
    mode : {"top", "spherical", "planar"}
    state : array_like
        ``(omega_x, omega_y, G1, G2, G3)`` for top and spherical,
        ``(theta, omega_y)`` for planar.
    c : float
        Spin rate, used by ``"top"`` only.

    Returns
    -------
    ndarray
        Time derivative of ``state``.
    """
    Jt, Ja, rs = check_axisymmetric(p)
    k = p.m * p.g * rs
    x = np.asarray(state, dtype=float)
    if mode == "planar":
        th, wy = x
        return np.array([wy, -k * np.sin(th) / Jt])
    if mode not in ("top", "spherical"):
        raise ValueError(f"unknown special mode {mode!r}")
    spin = float(c) if mode == "top" else 0.0
    wx, wy = x[0], x[1]
    G = x[2:5]
    dwx = (spin * (Jt - Ja) * wy - k * G[1]) / Jt
    dwy = (spin * (Ja - Jt) * wx + k * G[0]) / Jt
    dG = np.cross(G, [wx, wy, spin])
    return np.array([dwx, dwy, dG[0], dG[1], dG[2]])

"""Energies, momentum map, connection, Routhian and magnetic two-form."""

from dataclasses import dataclass

import numpy as np

from .geometry import E3


@dataclass(frozen=True)
class InvariantReport:
    E: float
    h: float
    model: str


def energy_full(p, s):
    """Total energy of a full state."""
    w = s.omega
    return float(0.5 * w @ p.J @ w - p.m * p.g * p.rho @ (s.R.T @ E3))


def energy_lp(p, s):
    w = s.omega
    return float(0.5 * w @ p.J @ w - p.m * p.g * p.rho @ s.Gamma)


def momentum_h(p, s):
    """Vertical angular-momentum component ``omega^T J R^T e3``."""
    return float(s.omega @ p.J @ (s.R.T @ E3))


def momentum_lp(p, s):
    return float(s.omega @ p.J @ s.Gamma)


def momentum_map(p, s):
    """``e3^T R J omega``; identical to :func:`momentum_h`."""
    return momentum_h(p, s)


def locked_inertia(p, R):
    G = np.asarray(R, dtype=float).T @ E3
    return float(G @ p.J @ G)


def mechanical_connection(p, s):
    return momentum_map(p, s) / locked_inertia(p, s.R)


def _b_nu(p, G, Gd, mu):
    JG = p.J @ G
    gJg = float(G @ JG)
    b = float(JG @ np.cross(Gd, G)) / gJg
    return b, mu / gJg, gJg


def routhian_value(p, Gamma, Gammadot, mu):
    """Routhian as a function on R^3 x R^3 (no constraint checks)."""
    G = np.asarray(Gamma, dtype=float)
    Gd = np.asarray(Gammadot, dtype=float)
    b, nu, gJg = _b_nu(p, G, Gd, mu)
    X = np.cross(Gd, G)
    return float(0.5 * X @ p.J @ X - 0.5 * (b * b + nu * nu) * gJg
                 + p.m * p.g * G @ p.rho)


def routhian(p, s):
    """Routhian on the momentum level ``s.mu``."""
    return routhian_value(p, s.Gamma, s.Gammadot, s.mu)


def magnetic_form(p, Gamma, eta, zeta, mu):
    """Magnetic two-form evaluated on ``(Gamma x eta, Gamma x zeta)``."""
    G = np.asarray(Gamma, dtype=float)
    JG = p.J @ G
    gJg = float(G @ JG)
    bracket = -gJg * p.trJ + 2.0 * float(JG @ JG)
    return float(-mu / gJg**2 * bracket * (G @ np.cross(eta, zeta)))


def omega_from_lr(p, s):
    """Body angular velocity ``Gammadot x Gamma + (nu - b) Gamma``."""
    G, Gd = s.Gamma, s.Gammadot
    b, nu, _ = _b_nu(p, G, Gd, s.mu)
    return np.cross(Gd, G) + (nu - b) * G


def energy_lr(p, s):
    w = omega_from_lr(p, s)
    return float(0.5 * w @ p.J @ w - p.m * p.g * p.rho @ s.Gamma)


def lyapunov_v(p, E):
    """Energy shifted so the hanging equilibrium has value 0."""
    return E + p.m * p.g * p.rho_norm


def report(p, s):
    """Energy and vertical momentum of a state of any model."""
    from .dynamics import FullState, LPState, LRState

    if isinstance(s, FullState):
        return InvariantReport(energy_full(p, s), momentum_h(p, s), "full")
    if isinstance(s, LPState):
        return InvariantReport(energy_lp(p, s), momentum_lp(p, s), "lp")
    if isinstance(s, LRState):
        return InvariantReport(energy_lr(p, s), s.mu, "lr")
    raise TypeError(f"not a state: {type(s).__name__}")

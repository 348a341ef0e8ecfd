"""Equilibria of the reduced models.

Every equilibrium of the Lagrange-Poincare model is a steady spin
``omega = k Gamma`` about the vertical.  Besides hanging, inverted and the
two spins along ``J^-1 rho``, the spins form one-parameter families indexed
by ``alpha``; for each family member ``Gamma = -n / |n|`` with
``n = (J - I / alpha)^-1 rho`` and ``omega = +/- sqrt(m g / |n|) n``.
Extra families appear at ``alpha = 1 / J_i`` when the matching components
of ``rho`` vanish.
"""

from dataclasses import dataclass, field
import itertools

import numpy as np

from .constants import TOL
from .dynamics import BodyParams
from .errors import BalancedBody, NonDiagonalInertia, SingularAlpha, UnsortedInertia

FAMILY_ORDER = ("Hanging", "Inverted", "InvInertiaAxis", "AlphaFamily",
                "DegenerateDistinct", "DegenerateAxisym")


@dataclass(frozen=True, eq=False)
class Equilibrium:
    """A reduced equilibrium ``(Gamma, omega)`` with its momentum value.

    ``family`` is one of :data:`FAMILY_ORDER`; ``label`` refines it (the
    interval ``"L1"``..``"L4"`` for alpha families, the axis index or
    ``"a"``/``"b"`` for degenerate families).  ``sign`` is the sign in front
    of the square root in the angular velocity.
    """

    Gamma: np.ndarray
    omega: np.ndarray
    mu: float
    family: str
    label: str = ""
    alpha: float = float("nan")
    sign: int = 0
    param: tuple = (float("nan"), float("nan"))
    residual: float = float("nan")

    @property
    def name(self):
        return f"{self.family}({self.label})" if self.label else self.family

    @property
    def k(self):
        """Spin rate with ``omega = k Gamma``."""
        return float(self.omega @ self.Gamma)


def residual(p, Gamma, omega):
    """``|J w x w + m g rho x Gamma| + |Gamma x w|``."""
    G = np.asarray(Gamma, dtype=float)
    w = np.asarray(omega, dtype=float)
    r1 = np.cross(p.J @ w, w) + p.m * p.g * np.cross(p.rho, G)
    return float(np.linalg.norm(r1) + np.linalg.norm(np.cross(G, w)))


def check_equilibrium(p, e):
    return residual(p, e.Gamma, e.omega)


def _residuals(p, G, W):
    # row-wise version of residual()
    JW = W @ p.J.T
    r1 = np.cross(JW, W) + p.m * p.g * np.cross(p.rho, G)
    return np.linalg.norm(r1, axis=1) + np.linalg.norm(np.cross(G, W), axis=1)


def poles(p):
    return 1.0 / np.diag(p.J)


def n_alpha(p, alpha):
    """``(J - I / alpha)^-1 rho``.

    Raises
    ------
    SingularAlpha
        When ``alpha`` is within a relative 1e-9 of 0 or of a pole ``1/J_i``.
    """
    a = float(alpha)
    if not np.isfinite(a) or a == 0.0:
        raise SingularAlpha("alpha must be finite and nonzero")
    ev = np.linalg.eigvalsh(p.J)
    for lam in ev:
        if abs(a * lam - 1.0) <= TOL.alpha_guard:
            raise SingularAlpha(f"alpha={a!r} is a pole 1/J_i")
    if abs(a) * np.max(ev) <= TOL.alpha_guard:
        raise SingularAlpha(f"alpha={a!r} is too close to 0")
    # (J - I/a)^-1 = a (a J - I)^-1
    return a * np.linalg.solve(a * p.J - np.eye(3), p.rho)


def _require_principal(p):
    J = p.J
    if not np.all(J == np.diag(np.diag(J))):
        raise NonDiagonalInertia("J must be diagonal; see sort_principal_axes")
    d = np.diag(J)
    if not (d[0] >= d[1] >= d[2]):
        raise UnsortedInertia("J must satisfy J1 >= J2 >= J3; see sort_principal_axes")
    if p.rho_norm <= TOL.balanced_rho:
        raise BalancedBody("equilibria of a balanced body are not enumerated")
    return d


def sort_principal_axes(p):
    """Express ``p`` in principal axes with ``J1 >= J2 >= J3``.

    Returns
    -------
    p_sorted : BodyParams
    P : ndarray, shape (3, 3)
        Proper rotation with ``J_sorted = P J P^T`` and ``rho_sorted = P rho``.
        Body vectors map back with ``x_user = P.T @ x_sorted``.
    """
    J = p.J
    if np.all(J == np.diag(np.diag(J))):
        order = np.argsort(-np.diag(J), kind="stable")
        P = np.eye(3)[order]
    else:
        w, Q = np.linalg.eigh(J)
        P = Q[:, ::-1].T
    if np.linalg.det(P) < 0:
        P[2] = -P[2]
    # drop rounding-level off-diagonal terms
    Js = np.diag(np.diag(P @ J @ P.T))
    ps = BodyParams(J=Js, m=p.m, g=p.g, rho=P @ p.rho, balanced=p.balanced)
    return ps, P


def default_alpha_grid(p, n=100, clamp=1e-6):
    """Log-spaced alpha samples for each non-empty interval L1..L4.

    Bounded intervals get half of the samples log-spaced from each end,
    starting ``clamp`` (relative) away from the end points.  L1 gets half of
    its samples on each of its two rays.
    """
    d = np.sort(np.diag(p.J))[::-1]
    a1, a2, a3 = 1.0 / d
    n1 = n // 2
    n2 = n - n1
    span = np.logspace(np.log10(clamp), np.log10(1.0 / clamp), n1)
    neg = -a1 * span[::-1]
    pos = a3 * (1.0 + np.logspace(np.log10(clamp), np.log10(1.0 / clamp), n2))
    grid = {"L1": np.concatenate([neg, pos])}

    def bounded(lo, hi):
        w = hi - lo
        if w <= TOL.degeneracy * hi:
            return np.empty(0)
        # clamp relative to the end point, or to hi for the end point 0
        lo_ref = lo if lo > 0 else hi
        dl = clamp * lo_ref / w
        dh = clamp * hi / w
        left = lo + w * np.logspace(np.log10(dl), np.log10(0.5), n1)
        right = hi - w * np.logspace(np.log10(dh), np.log10(0.5), n2,
                                     endpoint=False)
        return np.sort(np.concatenate([left, right]))

    grid["L2"] = bounded(0.0, a1)
    grid["L3"] = bounded(a1, a2)
    grid["L4"] = bounded(a2, a3)
    return grid


def interval_of(p, alpha):
    d = np.sort(np.diag(p.J))[::-1]
    a1, a2, a3 = 1.0 / d
    if alpha < 0 or alpha > a3:
        return "L1"
    if alpha < a1:
        return "L2"
    if alpha < a2:
        return "L3"
    return "L4"


def _spin_pair(p, N):
    """Both spins over rows of ``N``: Gamma = -N/|N|, omega = k Gamma."""
    nn = np.linalg.norm(N, axis=1)
    G = -N / nn[:, None]
    k = np.sqrt(p.m * p.g * nn)
    # omega = +sqrt(mg/|n|) n = -sqrt(mg |n|) Gamma for sign +1
    return G, -k, k


def _make(p, G, W, family, label="", alpha=np.nan, sign=0, param=(np.nan, np.nan)):
    G = np.array(G, dtype=float)
    W = np.array(W, dtype=float)
    mu = float(W @ G) * float(G @ p.J @ G)
    return Equilibrium(G, W, mu, family, label, float(alpha), int(sign),
                       (float(param[0]), float(param[1])), residual(p, G, W))


def _rows(p, G, Wp, Wm, family, labels, alphas, params):
    out = []
    res_p = _residuals(p, G, Wp)
    res_m = _residuals(p, G, Wm)
    gJg = np.einsum("ij,jk,ik->i", G, p.J, G)
    for i in range(len(G)):
        for sign, W, res in ((1, Wp, res_p), (-1, Wm, res_m)):
            w = W[i].copy()
            mu = float(w @ G[i]) * float(gJg[i])
            out.append(Equilibrium(G[i].copy(), w, mu, family, labels[i],
                                   float(alphas[i]), sign,
                                   (float(params[i][0]), float(params[i][1])),
                                   float(res[i])))
    return out


def degenerate_eigenspaces(p, tol=TOL.degeneracy):
    """Eigenvalue clusters of diagonal ``J`` whose ``rho`` components vanish.

    Returns a list of ``(lam, index_list, label)``.
    """
    d = np.diag(p.J)
    clusters = []
    for i in range(3):
        for c in clusters:
            if abs(d[i] - d[c[0]]) <= tol * max(d[i], d[c[0]]):
                c.append(i)
                break
        else:
            clusters.append([i])
    if len(clusters) == 1:
        # isotropic: only the balanced body would qualify
        return []
    axisym = any(len(c) == 2 for c in clusters)
    out = []
    rn = p.rho_norm
    for c in clusters:
        if all(abs(p.rho[j]) <= tol * rn for j in c):
            if axisym:
                label = "a" if len(c) == 2 else "b"
                fam = "DegenerateAxisym"
            else:
                label = str(c[0] + 1)
                fam = "DegenerateDistinct"
            out.append((float(np.mean(d[c])), c, fam, label))
    return out


def enumerate_lp(p, alpha_grid=None, gamma_grid=None, n_alpha_samples=100,
                 degeneracy_tol=TOL.degeneracy):
    """All equilibria of the Lagrange-Poincare model.

    Parameters
    ----------
    p : BodyParams
        Diagonal inertia with ``J1 >= J2 >= J3``.
    alpha_grid : dict or sequence, optional
        Either a mapping interval name -> samples or a flat list of alphas.
        Defaults to :func:`default_alpha_grid`.
    gamma_grid : sequence, optional
        Samples of the free parameter(s) of degenerate families; defaults to
        21 points on [-5, 5].

    Returns
    -------
    list of Equilibrium
        Ordered by family, then alpha or parameter, then sign.
    """
    d = _require_principal(p)
    mg = p.m * p.g
    rhat = p.rho_hat
    out = [_make(p, rhat, np.zeros(3), "Hanging"),
           _make(p, -rhat, np.zeros(3), "Inverted")]

    Jr = p.rho / d
    G, kp, km = _spin_pair(p, Jr[None, :])
    for s, k in ((1, kp), (-1, km)):
        out.append(_make(p, G[0], k[0] * G[0], "InvInertiaAxis", sign=s))

    if alpha_grid is None:
        alpha_grid = default_alpha_grid(p, n_alpha_samples)
    if not isinstance(alpha_grid, dict):
        grouped = {}
        for a in np.asarray(alpha_grid, dtype=float).reshape(-1):
            grouped.setdefault(interval_of(p, a), []).append(a)
        alpha_grid = grouped
    for name in ("L1", "L2", "L3", "L4"):
        al = np.sort(np.asarray(alpha_grid.get(name, []), dtype=float))
        if al.size == 0:
            continue
        for a in al:
            n_alpha(p, a)  # guard against poles
        # diagonal solve of (J - I/alpha) n = rho
        N = p.rho[None, :] / (d[None, :] - 1.0 / al[:, None])
        G, kp, km = _spin_pair(p, N)
        out += _rows(p, G, kp[:, None] * G, km[:, None] * G, "AlphaFamily",
                     [name] * len(al), al, [(np.nan, np.nan)] * len(al))

    if gamma_grid is None:
        gamma_grid = np.linspace(-5.0, 5.0, 21)
    gamma_grid = np.asarray(gamma_grid, dtype=float)
    for lam, idx, fam, label in degenerate_eigenspaces(p, degeneracy_tol):
        base = np.zeros(3)
        for j in range(3):
            if j not in idx:
                base[j] = p.rho[j] / (d[j] - lam)
        combos = list(itertools.product(gamma_grid, repeat=len(idx)))
        N = np.repeat(base[None, :], len(combos), axis=0)
        for r, vals in enumerate(combos):
            for j, v in zip(idx, vals):
                N[r, j] = v
        keep = np.linalg.norm(N, axis=1) > 1e-300
        N = N[keep]
        params = [tuple(v) + (np.nan,) * (2 - len(v))
                  for v, kk in zip(combos, keep) if kk]
        G, kp, km = _spin_pair(p, N)
        out += _rows(p, G, kp[:, None] * G, km[:, None] * G, fam,
                     [label] * len(N), [1.0 / lam] * len(N), params)
    return out


def lr_mu(p, e):
    """Momentum value of an LP equilibrium, ``k Gamma^T J Gamma``."""
    return e.k * float(e.Gamma @ p.J @ e.Gamma)


def enumerate_lr(p, alpha_grid=None, gamma_grid=None, n_alpha_samples=100,
                 degeneracy_tol=TOL.degeneracy):
    """Equilibria of the Lagrange-Routh model.

    The attitudes are those of :func:`enumerate_lp`; the velocity part is
    ``Gammadot = 0`` and the momentum value is carried in ``mu``.
    """
    return enumerate_lp(p, alpha_grid, gamma_grid, n_alpha_samples,
                        degeneracy_tol)


def lr_residual(p, e):
    """Norm of the LR acceleration at ``(Gamma_e, 0, mu)``."""
    from .dynamics import LRState, rhs_lr

    _, a = rhs_lr(p, LRState(e.Gamma, np.zeros(3), e.mu))
    return float(np.linalg.norm(a))


def to_user_frame(e, P):
    """Map an equilibrium computed in sorted axes back with ``P.T``."""
    return Equilibrium(P.T @ e.Gamma, P.T @ e.omega, e.mu, e.family, e.label,
                       e.alpha, e.sign, e.param, e.residual)

"""Primitives on SO(3) and S².

All functions are pure and accept anything ``np.asarray`` understands.
"""

import numpy as np

from .constants import TOL
from .errors import NonSkewInput, NotUnit, TooFarFromSO3

E1 = np.array([1.0, 0.0, 0.0])
E2 = np.array([0.0, 1.0, 0.0])
E3 = np.array([0.0, 0.0, 1.0])


def hat(a):
    """Skew-symmetric matrix with ``hat(a) @ b == np.cross(a, b)``.

    Parameters
    ----------
    a : array_like, shape (3,)

    Returns
    -------
    ndarray, shape (3, 3)
    """
    x, y, z = np.asarray(a, dtype=float)
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def vee(S):
    """Inverse of :func:`hat`.

    Raises
    ------
    NonSkewInput
        If ``S + S.T`` has an entry larger than the skew tolerance.
    """
    S = np.asarray(S, dtype=float)
    if S.shape != (3, 3):
        raise NonSkewInput(f"expected a 3x3 matrix, got shape {S.shape}")
    if np.max(np.abs(S + S.T)) > TOL.skew:
        raise NonSkewInput("matrix is not skew-symmetric")
    A = 0.5 * (S - S.T)
    return np.array([A[2, 1], A[0, 2], A[1, 0]])


def exp_so3(a):
    """Rodrigues formula for the exponential of ``hat(a)``."""
    a = np.asarray(a, dtype=float)
    th = np.linalg.norm(a)
    K = hat(a)
    if th < TOL.exp_series:
        # second-order series
        return np.eye(3) + K + 0.5 * K @ K
    return (np.eye(3) + (np.sin(th) / th) * K
            + ((1.0 - np.cos(th)) / th**2) * K @ K)


def orthogonality_residual(R):
    """Return ``max|R^T R - I|``."""
    R = np.asarray(R, dtype=float)
    return float(np.max(np.abs(R.T @ R - np.eye(3))))


def is_rotation(R, tol=TOL.so3_orthogonality):
    R = np.asarray(R, dtype=float)
    return (R.shape == (3, 3) and orthogonality_residual(R) <= tol
            and abs(np.linalg.det(R) - 1.0) <= TOL.so3_det)


def renormalize(R):
    """Project a near-rotation onto SO(3) via its polar factor.

    Raises
    ------
    TooFarFromSO3
        When ``R`` lies outside the 0.1 orthogonality ball or has negative
        determinant.
    """
    R = np.asarray(R, dtype=float)
    if not np.all(np.isfinite(R)):
        raise TooFarFromSO3("matrix has non-finite entries")
    if orthogonality_residual(R) > TOL.renormalize_ball:
        raise TooFarFromSO3("matrix is too far from orthogonal")
    if np.linalg.det(R) <= 0.0:
        raise TooFarFromSO3("matrix has non-positive determinant")
    U, _, Vt = np.linalg.svd(R)
    return U @ Vt


def check_unit(G, name="Gamma"):
    G = np.asarray(G, dtype=float)
    if G.shape != (3,) or not np.all(np.isfinite(G)):
        raise NotUnit(f"{name} must be a finite 3-vector")
    if abs(np.linalg.norm(G) - 1.0) > TOL.unit:
        raise NotUnit(f"{name} has norm {np.linalg.norm(G):.3e}, expected 1")
    return G


def project_tangent_s2(G, v):
    """Remove the component of ``v`` along the unit vector ``G``."""
    G = check_unit(G)
    v = np.asarray(v, dtype=float)
    return v - np.dot(G, v) * G


def rotation_between(a, b):
    """Smallest rotation taking unit vector ``a`` to unit vector ``b``."""
    a = np.asarray(a, dtype=float) / np.linalg.norm(a)
    b = np.asarray(b, dtype=float) / np.linalg.norm(b)
    c = np.cross(a, b)
    s = np.linalg.norm(c)
    d = np.dot(a, b)
    if s < 1e-15:
        if d > 0:
            return np.eye(3)
        # half turn about any axis normal to a
        k = np.argmin(np.abs(a))
        ax = np.cross(a, np.eye(3)[k])
        ax /= np.linalg.norm(ax)
        return exp_so3(np.pi * ax)
    return exp_so3(np.arctan2(s, d) * c / s)


def attitude_from_gamma(G):
    """A rotation ``R`` with ``R.T @ e3 == G``."""
    # R^T e3 = G  <=>  R G = e3
    return rotation_between(G, E3)


def rotz(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def dexpinv_right(a):
    """Inverse right Jacobian of SO(3) at ``a``.

    If ``R(t) = R0 exp(hat(a(t)))`` and ``R' = R hat(w)`` then
    ``a' = dexpinv_right(a) @ w``.
    """
    a = np.asarray(a, dtype=float)
    th = np.linalg.norm(a)
    K = hat(a)
    if th < 1e-4:
        coef = 1.0 / 12.0 + th**2 / 720.0
    else:
        coef = 1.0 / th**2 - (1.0 + np.cos(th)) / (2.0 * th * np.sin(th))
    return np.eye(3) + 0.5 * K + coef * K @ K

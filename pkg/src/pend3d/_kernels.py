"""Compiled hot loops.

Three-vectors are passed around as tuples so that the inner loops do not
allocate.  ``J`` and ``Jinv`` are 3x3 float arrays, ``mgr`` is the tuple
``m * g * rho``.  Loops return an integer status instead of raising:
0 ok, 1 blow-up, 2 renormalization failure.
"""

import math

import numpy as np
from numba import njit

OK = 0
BLOWUP = 1
NOT_SO3 = 2

_JIT = dict(cache=True, nogil=True, fastmath=False)


# ----------------------------------------------------------------- vectors
@njit(**_JIT)
def cross(a, b):
    return (a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0])


@njit(**_JIT)
def dot(a, b):
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


@njit(**_JIT)
def add(a, b):
    return (a[0] + b[0], a[1] + b[1], a[2] + b[2])


@njit(**_JIT)
def sub(a, b):
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2])


@njit(**_JIT)
def scale(s, a):
    return (s * a[0], s * a[1], s * a[2])


@njit(**_JIT)
def axpy(s, a, b):
    # s*a + b
    return (s * a[0] + b[0], s * a[1] + b[1], s * a[2] + b[2])


@njit(**_JIT)
def comb4(a, b, c, d):
    # (a + 2b + 2c + d) / 6
    return ((a[0] + 2.0 * b[0] + 2.0 * c[0] + d[0]) / 6.0,
            (a[1] + 2.0 * b[1] + 2.0 * c[1] + d[1]) / 6.0,
            (a[2] + 2.0 * b[2] + 2.0 * c[2] + d[2]) / 6.0)


@njit(**_JIT)
def matvec(A, x):
    return (A[0, 0] * x[0] + A[0, 1] * x[1] + A[0, 2] * x[2],
            A[1, 0] * x[0] + A[1, 1] * x[1] + A[1, 2] * x[2],
            A[2, 0] * x[0] + A[2, 1] * x[1] + A[2, 2] * x[2])


@njit(**_JIT)
def norm(a):
    return math.sqrt(dot(a, a))


@njit(**_JIT)
def rodrigues_apply(a, v):
    """exp(hat(a)) @ v without forming the matrix."""
    th2 = dot(a, a)
    if th2 < 1e-16:
        s1 = 1.0
        s2 = 0.5
    else:
        th = math.sqrt(th2)
        s1 = math.sin(th) / th
        s2 = (1.0 - math.cos(th)) / th2
    axv = cross(a, v)
    return add(v, add(scale(s1, axv), scale(s2, cross(a, axv))))


@njit(**_JIT)
def rodrigues(a):
    th2 = dot(a, a)
    if th2 < 1e-16:
        s1 = 1.0
        s2 = 0.5
    else:
        th = math.sqrt(th2)
        s1 = math.sin(th) / th
        s2 = (1.0 - math.cos(th)) / th2
    x, y, z = a
    E = np.empty((3, 3))
    E[0, 0] = 1.0 - s2 * (y * y + z * z)
    E[1, 1] = 1.0 - s2 * (x * x + z * z)
    E[2, 2] = 1.0 - s2 * (x * x + y * y)
    E[0, 1] = -s1 * z + s2 * x * y
    E[1, 0] = s1 * z + s2 * x * y
    E[0, 2] = s1 * y + s2 * x * z
    E[2, 0] = -s1 * y + s2 * x * z
    E[1, 2] = -s1 * x + s2 * y * z
    E[2, 1] = s1 * x + s2 * y * z
    return E


@njit(**_JIT)
def dexpinv(a, w):
    """Inverse right Jacobian of exp at ``a`` applied to ``w``."""
    th2 = dot(a, a)
    if th2 < 1e-8:
        coef = 1.0 / 12.0 + th2 / 720.0
    else:
        th = math.sqrt(th2)
        coef = 1.0 / th2 - (1.0 + math.cos(th)) / (2.0 * th * math.sin(th))
    aw = cross(a, w)
    return add(w, add(scale(0.5, aw), scale(coef, cross(a, aw))))


# ---------------------------------------------------------------- models
@njit(**_JIT)
def wdot(J, Jinv, mgr, G, w):
    """Angular acceleration for both the full and the LP model."""
    Jw = matvec(J, w)
    return matvec(Jinv, add(cross(Jw, w), cross(mgr, G)))


@njit(**_JIT)
def lr_aux(J, Jinv, trJ, mgr, mu, G, Gd):
    Jg = matvec(J, G)
    gJg = dot(G, Jg)
    X = cross(Gd, G)
    b = dot(Jg, X) / gJg
    nu = mu / gJg
    c = nu * (trJ - 2.0 * dot(Jg, Jg) / gJg)
    A = sub(matvec(J, X), scale(b, Jg))
    B = sub(X, scale(b, G))
    inner = add(cross(A, B), scale(nu * nu, cross(Jg, G)))
    inner = sub(inner, cross(G, mgr))
    inner = sub(inner, scale(c, Gd))
    Sig = add(scale(b, Gd), matvec(Jinv, inner))
    return b, nu, c, Sig


@njit(**_JIT)
def gddot(J, Jinv, trJ, mgr, mu, G, Gd):
    _, _, _, Sig = lr_aux(J, Jinv, trJ, mgr, mu, G, Gd)
    return add(scale(-dot(Gd, Gd), G), cross(G, Sig))


@njit(**_JIT)
def energy_lr(J, mgr, mu, G, Gd):
    Jg = matvec(J, G)
    gJg = dot(G, Jg)
    X = cross(Gd, G)
    b = dot(Jg, X) / gJg
    nu = mu / gJg
    w = axpy(nu - b, G, X)
    return 0.5 * dot(w, matvec(J, w)) - dot(mgr, G)


@njit(**_JIT)
def energy_project(J, mgr, mu, G, Gd, target):
    """Rescale Gd so the LR energy equals ``target``.

    The horizontal velocity is orthogonal to J @ G in the J inner product, so
    the energy is quadratic in the scale with no linear term.
    """
    Jg = matvec(J, G)
    gJg = dot(G, Jg)
    X = cross(Gd, G)
    b = dot(Jg, X) / gJg
    nu = mu / gJg
    wh = axpy(-b, G, X)
    kin = 0.5 * dot(wh, matvec(J, wh))
    rest = target - 0.5 * nu * nu * gJg + dot(mgr, G)
    if kin <= 1e-300 or rest < 0.0:
        return Gd
    return scale(math.sqrt(rest / kin), Gd)


# --------------------------------------------------------- group steppers
@njit(**_JIT)
def rkmk4_increment(J, Jinv, mgr, G, w, h):
    """Lie-algebra increment and new velocity for one RKMK4 step.

    Stage attitudes only enter through the gravity direction, which for
    R_i = R exp(hat(a_i)) is exp(-hat(a_i)) G.
    """
    a1 = w
    k1 = wdot(J, Jinv, mgr, G, w)
    th2 = scale(0.5 * h, a1)
    w2 = axpy(0.5 * h, k1, w)
    G2 = rodrigues_apply(scale(-1.0, th2), G)
    a2 = dexpinv(th2, w2)
    k2 = wdot(J, Jinv, mgr, G2, w2)
    th3 = scale(0.5 * h, a2)
    w3 = axpy(0.5 * h, k2, w)
    G3 = rodrigues_apply(scale(-1.0, th3), G)
    a3 = dexpinv(th3, w3)
    k3 = wdot(J, Jinv, mgr, G3, w3)
    th4 = scale(h, a3)
    w4 = axpy(h, k3, w)
    G4 = rodrigues_apply(scale(-1.0, th4), G)
    a4 = dexpinv(th4, w4)
    k4 = wdot(J, Jinv, mgr, G4, w4)
    theta = scale(h, comb4(a1, a2, a3, a4))
    wn = axpy(h, comb4(k1, k2, k3, k4), w)
    return theta, wn


@njit(**_JIT)
def rkmk2_increment(J, Jinv, mgr, G, w, h):
    k1 = wdot(J, Jinv, mgr, G, w)
    th2 = scale(0.5 * h, w)
    w2 = axpy(0.5 * h, k1, w)
    G2 = rodrigues_apply(scale(-1.0, th2), G)
    a2 = dexpinv(th2, w2)
    k2 = wdot(J, Jinv, mgr, G2, w2)
    return scale(h, a2), axpy(h, k2, w)


@njit(**_JIT)
def group_increment(method, J, Jinv, mgr, G, w, h):
    if method == 2:
        return rkmk4_increment(J, Jinv, mgr, G, w, h)
    return rkmk2_increment(J, Jinv, mgr, G, w, h)


@njit(**_JIT)
def gamma_of(R):
    return (R[2, 0], R[2, 1], R[2, 2])


@njit(**_JIT)
def matmul3(A, B, out):
    for i in range(3):
        for j in range(3):
            out[i, j] = A[i, 0] * B[0, j] + A[i, 1] * B[1, j] + A[i, 2] * B[2, j]


@njit(**_JIT)
def rdot(R, w, out):
    # R hat(w)
    for i in range(3):
        out[i, 0] = R[i, 1] * w[2] - R[i, 2] * w[1]
        out[i, 1] = R[i, 2] * w[0] - R[i, 0] * w[2]
        out[i, 2] = R[i, 0] * w[1] - R[i, 1] * w[0]


@njit(**_JIT)
def polar_newton(R):
    """Polar factor by Newton iteration X <- (X + X^-T) / 2.

    Returns False when the input is outside the 0.1 orthogonality ball or
    has non-positive determinant.
    """
    res = 0.0
    for i in range(3):
        for j in range(3):
            s = 0.0
            for k in range(3):
                s += R[k, i] * R[k, j]
            if i == j:
                s -= 1.0
            res = max(res, abs(s))
    if not res <= 0.1 or np.linalg.det(R) <= 0.0:
        return False
    X = R.copy()
    for _ in range(30):
        Xn = 0.5 * (X + np.linalg.inv(X).T)
        d = np.max(np.abs(Xn - X))
        X = Xn
        if d < 1e-16:
            break
    R[:, :] = X
    return True


@njit(**_JIT)
def full_step_rk4(J, Jinv, mgr, R, w, h):
    """Classical RK4 on the nine entries of R; R is updated in place."""
    K1 = np.empty((3, 3))
    K2 = np.empty((3, 3))
    K3 = np.empty((3, 3))
    K4 = np.empty((3, 3))
    Rs = np.empty((3, 3))
    rdot(R, w, K1)
    k1 = wdot(J, Jinv, mgr, gamma_of(R), w)
    w2 = axpy(0.5 * h, k1, w)
    Rs[:, :] = R + 0.5 * h * K1
    rdot(Rs, w2, K2)
    k2 = wdot(J, Jinv, mgr, gamma_of(Rs), w2)
    w3 = axpy(0.5 * h, k2, w)
    Rs[:, :] = R + 0.5 * h * K2
    rdot(Rs, w3, K3)
    k3 = wdot(J, Jinv, mgr, gamma_of(Rs), w3)
    w4 = axpy(h, k3, w)
    Rs[:, :] = R + h * K3
    rdot(Rs, w4, K4)
    k4 = wdot(J, Jinv, mgr, gamma_of(Rs), w4)
    R[:, :] = R + (h / 6.0) * (K1 + 2.0 * K2 + 2.0 * K3 + K4)
    return axpy(h, comb4(k1, k2, k3, k4), w)


@njit(**_JIT)
def run_full(J, Jinv, mgr, R0, w0, h, n, method, renorm_every, Rs, ws):
    """Integrate the full model for ``n`` steps.

    method: 0 rk4-projected, 1 liegroup-rk2, 2 liegroup-rk4.
    Rs has shape (n+1, 3, 3) and ws (n+1, 3).  Returns (status, last index).
    """
    R = R0.copy()
    w = (w0[0], w0[1], w0[2])
    Rn = np.empty((3, 3))
    Rs[0] = R
    ws[0, 0], ws[0, 1], ws[0, 2] = w
    for k in range(n):
        if method == 0:
            w = full_step_rk4(J, Jinv, mgr, R, w, h)
            if (k + 1) % renorm_every == 0:
                if not polar_newton(R):
                    return NOT_SO3, k
        else:
            theta, w = group_increment(method, J, Jinv, mgr, gamma_of(R), w, h)
            matmul3(R, rodrigues(theta), Rn)
            R[:, :] = Rn
        if not (abs(w[0]) + abs(w[1]) + abs(w[2]) < 1e6):
            return BLOWUP, k
        Rs[k + 1] = R
        ws[k + 1, 0], ws[k + 1, 1], ws[k + 1, 2] = w
    return OK, n


@njit(**_JIT)
def lp_step_rk4(J, Jinv, mgr, G, w, h):
    # classical RK4 on (G, w) with G' = G x w
    k1 = wdot(J, Jinv, mgr, G, w)
    l1 = cross(G, w)
    G2 = axpy(0.5 * h, l1, G)
    w2 = axpy(0.5 * h, k1, w)
    k2 = wdot(J, Jinv, mgr, G2, w2)
    l2 = cross(G2, w2)
    G3 = axpy(0.5 * h, l2, G)
    w3 = axpy(0.5 * h, k2, w)
    k3 = wdot(J, Jinv, mgr, G3, w3)
    l3 = cross(G3, w3)
    G4 = axpy(h, l3, G)
    w4 = axpy(h, k3, w)
    k4 = wdot(J, Jinv, mgr, G4, w4)
    l4 = cross(G4, w4)
    Gn = axpy(h, comb4(l1, l2, l3, l4), G)
    return scale(1.0 / norm(Gn), Gn), axpy(h, comb4(k1, k2, k3, k4), w)


@njit(**_JIT)
def run_lp(J, Jinv, mgr, G0, w0, h, n, method, Gs, ws):
    G = (G0[0], G0[1], G0[2])
    w = (w0[0], w0[1], w0[2])
    Gs[0, 0], Gs[0, 1], Gs[0, 2] = G
    ws[0, 0], ws[0, 1], ws[0, 2] = w
    for k in range(n):
        if method == 0:
            G, w = lp_step_rk4(J, Jinv, mgr, G, w, h)
        else:
            theta, w = group_increment(method, J, Jinv, mgr, G, w, h)
            G = rodrigues_apply(scale(-1.0, theta), G)
        if not (abs(w[0]) + abs(w[1]) + abs(w[2]) < 1e6):
            return BLOWUP, k
        Gs[k + 1, 0], Gs[k + 1, 1], Gs[k + 1, 2] = G
        ws[k + 1, 0], ws[k + 1, 1], ws[k + 1, 2] = w
    return OK, n


# ------------------------------------------------------------- LR stepper
@njit(**_JIT)
def lr_step(J, Jinv, trJ, mgr, mu, G, Gd, h, order):
    """One RK4 (order 4) or midpoint (order 2) step on TS^2, then
    renormalize G and re-tangentialize Gd."""
    a1 = gddot(J, Jinv, trJ, mgr, mu, G, Gd)
    if order == 4:
        G2 = axpy(0.5 * h, Gd, G)
        V2 = axpy(0.5 * h, a1, Gd)
        a2 = gddot(J, Jinv, trJ, mgr, mu, G2, V2)
        G3 = axpy(0.5 * h, V2, G)
        V3 = axpy(0.5 * h, a2, Gd)
        a3 = gddot(J, Jinv, trJ, mgr, mu, G3, V3)
        G4 = axpy(h, V3, G)
        V4 = axpy(h, a3, Gd)
        a4 = gddot(J, Jinv, trJ, mgr, mu, G4, V4)
        Gn = axpy(h, comb4(Gd, V2, V3, V4), G)
        Vn = axpy(h, comb4(a1, a2, a3, a4), Gd)
    else:
        G2 = axpy(0.5 * h, Gd, G)
        V2 = axpy(0.5 * h, a1, Gd)
        a2 = gddot(J, Jinv, trJ, mgr, mu, G2, V2)
        Gn = axpy(h, V2, G)
        Vn = axpy(h, a2, Gd)
    Gn = scale(1.0 / norm(Gn), Gn)
    Vn = axpy(-dot(Gn, Vn), Gn, Vn)
    return Gn, Vn


@njit(**_JIT)
def run_lr(J, Jinv, trJ, mgr, mu, G0, Gd0, h, n, order, project, target,
           Gs, Gds):
    G = (G0[0], G0[1], G0[2])
    Gd = (Gd0[0], Gd0[1], Gd0[2])
    Gs[0, 0], Gs[0, 1], Gs[0, 2] = G
    Gds[0, 0], Gds[0, 1], Gds[0, 2] = Gd
    for k in range(n):
        G, Gd = lr_step(J, Jinv, trJ, mgr, mu, G, Gd, h, order)
        if project:
            Gd = energy_project(J, mgr, mu, G, Gd, target)
        if not (abs(Gd[0]) + abs(Gd[1]) + abs(Gd[2]) < 1e6):
            return BLOWUP, k
        Gs[k + 1, 0], Gs[k + 1, 1], Gs[k + 1, 2] = G
        Gds[k + 1, 0], Gds[k + 1, 1], Gds[k + 1, 2] = Gd
    return OK, n


@njit(**_JIT)
def poincare_run(J, Jinv, trJ, mgr, mu, G0, Gd0, h, n, order, project,
                 target, tol, max_iter, pole_tol, max_pts, out):
    """Integrate the LR model and record section crossings.

    A crossing is a sign change of Gd[2] across a step, refined by bisection
    on the length of a single substep from the step start.  ``out`` rows are
    (t, G1, G2, G3, Gd1, Gd2, Gd3).  Returns (status, number of points).
    """
    G = (G0[0], G0[1], G0[2])
    Gd = (Gd0[0], Gd0[1], Gd0[2])
    npts = 0
    for k in range(n):
        Gn, Gdn = lr_step(J, Jinv, trJ, mgr, mu, G, Gd, h, order)
        if project:
            Gdn = energy_project(J, mgr, mu, Gn, Gdn, target)
        if not (abs(Gdn[0]) + abs(Gdn[1]) + abs(Gdn[2]) < 1e6):
            return BLOWUP, npts
        g0 = Gd[2]
        g1 = Gdn[2]
        if g0 != 0.0 and (g0 < 0.0) != (g1 < 0.0) or g1 == 0.0:
            lo = 0.0
            hi = h
            tau = h
            Gc = Gn
            Gdc = Gdn
            gc = g1
            for _ in range(max_iter):
                if abs(gc) <= tol:
                    break
                tau = 0.5 * (lo + hi)
                Gc, Gdc = lr_step(J, Jinv, trJ, mgr, mu, G, Gd, tau, order)
                if project:
                    Gdc = energy_project(J, mgr, mu, Gc, Gdc, target)
                gc = Gdc[2]
                if (gc < 0.0) == (g0 < 0.0):
                    lo = tau
                else:
                    hi = tau
            direction = Gc[0] * Gdc[1] - Gc[1] * Gdc[0]
            pole = min(norm(sub(Gc, (0.0, 0.0, 1.0))),
                       norm(add(Gc, (0.0, 0.0, 1.0))))
            if direction > 0.0 and pole >= pole_tol:
                out[npts, 0] = k * h + tau
                out[npts, 1] = Gc[0]
                out[npts, 2] = Gc[1]
                out[npts, 3] = Gc[2]
                out[npts, 4] = Gdc[0]
                out[npts, 5] = Gdc[1]
                out[npts, 6] = Gdc[2]
                npts += 1
                if npts >= max_pts:
                    return OK, npts
        G = Gn
        Gd = Gdn
    return OK, npts


# ------------------------------------------------------------ reconstruction
@njit(**_JIT)
def omega_hor(J, G, Gd):
    Jg = matvec(J, G)
    X = cross(Gd, G)
    b = dot(Jg, X) / dot(G, Jg)
    return axpy(-b, G, X)


@njit(**_JIT)
def lift(J, Gs, Gds, Gm, Gdm, h, R0, Rs):
    """RKMK4 for R' = R hat(w_hor(t)) on a uniform grid.

    ``Gm``/``Gdm`` hold interpolated midpoint values of Gamma and Gammadot.
    ``Rs`` has shape (n, 3, 3) and receives the lifted attitudes.
    """
    n = Gs.shape[0]
    R = R0.copy()
    Rn = np.empty((3, 3))
    Rs[0] = R
    for k in range(n - 1):
        w0 = omega_hor(J, (Gs[k, 0], Gs[k, 1], Gs[k, 2]),
                       (Gds[k, 0], Gds[k, 1], Gds[k, 2]))
        wm = omega_hor(J, (Gm[k, 0], Gm[k, 1], Gm[k, 2]),
                       (Gdm[k, 0], Gdm[k, 1], Gdm[k, 2]))
        w1 = omega_hor(J, (Gs[k + 1, 0], Gs[k + 1, 1], Gs[k + 1, 2]),
                       (Gds[k + 1, 0], Gds[k + 1, 1], Gds[k + 1, 2]))
        a1 = w0
        a2 = dexpinv(scale(0.5 * h, a1), wm)
        a3 = dexpinv(scale(0.5 * h, a2), wm)
        a4 = dexpinv(scale(h, a3), w1)
        theta = scale(h, comb4(a1, a2, a3, a4))
        matmul3(R, rodrigues(theta), Rn)
        R[:, :] = Rn
        Rs[k + 1] = R

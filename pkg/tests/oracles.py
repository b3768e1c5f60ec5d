"""Independent reference computations used by the tests.

Nothing here imports the package's integrator or quadrature: the RK4
integrator works in the original variables ``(r, U, V, U', V')`` from
``r = 0`` with a fixed step, the series check runs the double-integral
Picard map through ``scipy.integrate.quad``, and the Laplacians are plain
finite differences.
"""

import math

import numpy as np
from numba import njit
from scipy.integrate import quad


@njit(cache=True)
def _accel(n, p, sp, r, U, V, dU, dV):
    Up = max(U, 0.0)
    fu = sp * Up ** (p - 1.0) * V
    fv = sp * Up**p
    if r == 0.0:
        # U''(0) = -√p f / n from the limit of (n-1)U'/r
        return -fu / n, -fv / n
    return -(n - 1) * dU / r - fu, -(n - 1) * dV / r - fv


@njit(cache=True)
def _step(n, p, sp, h, r, y):
    k = np.empty((4, 4))
    stage = y.copy()
    offsets = (0.0, 0.5, 0.5, 1.0)
    for i in range(4):
        if i > 0:
            for j in range(4):
                stage[j] = y[j] + offsets[i] * h * k[i - 1, j]
        ri = r + offsets[i] * h
        a_u, a_v = _accel(n, p, sp, ri, stage[0], stage[1], stage[2], stage[3])
        k[i, 0] = stage[2]
        k[i, 1] = stage[3]
        k[i, 2] = a_u
        k[i, 3] = a_v
    out = np.empty(4)
    for j in range(4):
        out[j] = y[j] + h / 6.0 * (k[0, j] + 2 * k[1, j] + 2 * k[2, j] + k[3, j])
    return out


@njit(cache=True)
def _hermite_root(r0, h, f0, d0, f1, d1):
    lo, hi = 0.0, 1.0
    for _ in range(80):
        t = 0.5 * (lo + hi)
        h00 = 2 * t**3 - 3 * t**2 + 1
        h10 = t**3 - 2 * t**2 + t
        h01 = -2 * t**3 + 3 * t**2
        h11 = t**3 - t**2
        val = h00 * f0 + h10 * h * d0 + h01 * f1 + h11 * h * d1
        if (val > 0) == (f0 > 0):
            lo = t
        else:
            hi = t
    return r0 + 0.5 * (lo + hi) * h


@njit(cache=True)
def rk4_trajectory(n, p, a, h, n_steps, record_every):
    """Fixed-step RK4 from r = 0.

    Returns ``(code, R_u, R_v, samples)`` where ``code`` is 0 if both stay
    positive over ``n_steps`` steps, 1 if ``U`` crossed zero first, 2 if
    ``V`` did, 3 if both crossed in the same step; ``samples`` holds rows
    ``(r, U, V, U', V')`` every ``record_every`` steps.
    """
    sp = math.sqrt(p)
    y = np.array([1.0, a, 0.0, 0.0])
    rows = n_steps // record_every + 1
    samples = np.full((rows, 5), np.nan)
    samples[0, 0] = 0.0
    samples[0, 1:] = y
    r = 0.0
    for i in range(1, n_steps + 1):
        y_new = _step(n, p, sp, h, r, y)
        r_new = i * h
        u_cross = y_new[0] <= 0.0
        v_cross = y_new[1] <= 0.0
        if u_cross or v_cross:
            R_u = np.nan
            R_v = np.nan
            if u_cross:
                R_u = _hermite_root(r, h, y[0], y[2], y_new[0], y_new[2])
            if v_cross:
                R_v = _hermite_root(r, h, y[1], y[3], y_new[1], y_new[3])
            if u_cross and v_cross:
                code = 3
            elif u_cross:
                code = 1
            else:
                code = 2
            return code, R_u, R_v, samples
        y = y_new
        r = r_new
        if i % record_every == 0:
            row = i // record_every
            samples[row, 0] = r
            samples[row, 1:] = y
    return 0, np.nan, np.nan, samples


def picard_series(n, p, a, r0, iterations=2):
    """Iterate the double-integral map from the constant state ``(1, a)``.

    ``U(r) = 1 - √p ∫_0^r s^(1-n) ∫_0^s t^(n-1) U^(p-1) V dt ds`` and the same
    with ``U^p`` for ``V``.  Returns ``(U, V, U', V')`` at ``r0``.
    """
    sp = math.sqrt(p)
    opts = dict(epsabs=0, epsrel=1e-13, limit=200)

    # swapping the order of integration leaves one quadrature per iterate:
    # ∫_0^r s^(1-n) ∫_0^s t^(n-1) F dt ds = ∫_0^r t^(n-1) F (t^(2-n) - r^(2-n))/(n-2) dt
    def make(U, V, start, forcing):
        def value(r):
            if r == 0:
                return start
            kernel = lambda t: t ** (n - 1) * forcing(U(t), V(t)) * (t ** (2 - n) - r ** (2 - n)) / (n - 2)
            return start - sp * quad(kernel, 0, r, **opts)[0]

        def slope(r):
            mass = quad(lambda t: t ** (n - 1) * forcing(U(t), V(t)), 0, r, **opts)[0]
            return -sp * r ** (1 - n) * mass

        return value, slope

    U = lambda r: 1.0
    V = lambda r: a
    fu = lambda u, v: u ** (p - 1) * v
    fv = lambda u, v: u**p
    for _ in range(iterations):
        U_new, dU_new = make(U, V, 1.0, fu)
        V_new, dV_new = make(U, V, a, fv)
        U, V = U_new, V_new
    return U(r0), V(r0), dU_new(r0), dV_new(r0)


def cartesian_laplacian(fun, x, h=1e-3):
    """Sum of second differences along each axis, with one Richardson level."""
    x = np.asarray(x, dtype=float)

    def lap(step):
        total = 0.0
        f0 = fun(x)
        for i in range(x.size):
            e = np.zeros_like(x)
            e[i] = step
            total += (fun(x + e) - 2 * f0 + fun(x - e)) / step**2
        return total

    return (4 * lap(h / 2) - lap(h)) / 3


def log_radial_laplacian(g, r, n):
    """Radial Laplacian of samples on a uniform grid in ``s = ln r``.

    ``Δg = r^-2 (g_ss + (n-2) g_s)`` with fourth-order central differences;
    the two nodes at each end are returned as NaN.
    """
    s = np.log(r)
    ds = s[1] - s[0]
    out = np.full_like(g, np.nan)
    gs = (-g[4:] + 8 * g[3:-1] - 8 * g[1:-3] + g[:-4]) / (12 * ds)
    gss = (-g[4:] + 16 * g[3:-1] - 30 * g[2:-2] + 16 * g[1:-3] - g[:-4]) / (12 * ds**2)
    out[2:-2] = (gss + (n - 2) * gs) / r[2:-2] ** 2
    return out

"""Per-pair hot loops: classical-path shooting and line-integral sums.

Every public function dispatches on :func:`pathlab._accel.backend` between a
numba-compiled scalar loop and a vectorized numpy implementation of the
same arithmetic.
"""

import numpy as np

from . import _accel
from ._accel import njit
from .potentials import potential_derivative, potential_derivative_jit

__all__ = ["gauss_legendre_unit", "shoot_pairs", "line_integrals"]

OK, NO_CONVERGENCE, CAUSTIC = 0, 1, 2

# converged dq(t)/dv0 below this fraction of the free value flags a caustic
CAUSTIC_FRACTION = 0.05


def gauss_legendre_unit(n=32):
    """Gauss-Legendre nodes and weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


# shooting: numba path


@njit(cache=True)
def _endpoint_jit(y, v0, tau, terms, m):
    h = tau / m
    q_prev = y
    q = y + h * v0 - 0.5 * h * h * potential_derivative_jit(y, terms, 1)
    for _ in range(m - 1):
        q_next = 2.0 * q - q_prev - h * h * potential_derivative_jit(q, terms, 1)
        q_prev = q
        q = q_next
    return q


@njit(cache=True)
def _remainder_jit(x, y, v0, tau, terms, m):
    h = tau / m
    du = (x - y) / m
    q_prev = y
    q = y + h * v0 - 0.5 * h * h * potential_derivative_jit(y, terms, 1)
    v_prev = potential_derivative_jit(q_prev, terms, 0)
    v_cur = potential_derivative_jit(q, terms, 0)
    d = (q - q_prev) - du
    acc = d * d / (2.0 * h) - 0.5 * h * (v_prev + v_cur)
    for _ in range(m - 1):
        q_next = 2.0 * q - q_prev - h * h * potential_derivative_jit(q, terms, 1)
        v_next = potential_derivative_jit(q_next, terms, 0)
        d = (q_next - q) - du
        acc += d * d / (2.0 * h) - 0.5 * h * (v_cur + v_next)
        q_prev = q
        q = q_next
        v_cur = v_next
    return acc


@njit(cache=True)
def _shoot_one_jit(x, y, tau, terms, m, tol, maxiter):
    va = (x - y) / tau
    fa = _endpoint_jit(y, va, tau, terms, m) - x
    if abs(fa) <= tol:
        return va, OK
    vb = va + 1e-3 * (1.0 + abs(va))
    fb = _endpoint_jit(y, vb, tau, terms, m) - x
    for _ in range(maxiter):
        denom = fb - fa
        if denom == 0.0:
            return vb, NO_CONVERGENCE
        slope = denom / (vb - va)
        if slope < CAUSTIC_FRACTION * tau:
            return vb, CAUSTIC
        vc = vb - fb / slope
        va, fa = vb, fb
        vb = vc
        fb = _endpoint_jit(y, vb, tau, terms, m) - x
        if abs(fb) <= tol:
            return vb, OK
    return vb, NO_CONVERGENCE


@njit(cache=True)
def _shoot_pairs_jit(xs, ys, tau, terms, m, maxiter, out, status):
    for i in range(xs.size):
        x = xs[i]
        y = ys[i]
        tol = 1e-13 * (1.0 + abs(x) + abs(y))
        v1, s1 = _shoot_one_jit(x, y, tau, terms, m, tol, maxiter)
        v2, s2 = _shoot_one_jit(x, y, tau, terms, 2 * m, tol, maxiter)
        if s1 != OK or s2 != OK:
            status[i] = max(s1, s2)
            out[i] = np.nan
            continue
        r1 = _remainder_jit(x, y, v1, tau, terms, m)
        r2 = _remainder_jit(x, y, v2, tau, terms, 2 * m)
        out[i] = (4.0 * r2 - r1) / 3.0
        status[i] = OK


# shooting: numpy path


def _endpoint_np(y, v0, tau, terms, m):
    h = tau / m
    q_prev = y
    q = y + h * v0 - 0.5 * h * h * potential_derivative(y, terms, 1)
    for _ in range(m - 1):
        q_next = 2.0 * q - q_prev - h * h * potential_derivative(q, terms, 1)
        q_prev, q = q, q_next
    return q


def _remainder_np(x, y, v0, tau, terms, m):
    h = tau / m
    du = (x - y) / m
    q_prev = y
    q = y + h * v0 - 0.5 * h * h * potential_derivative(y, terms, 1)
    v_prev = potential_derivative(q_prev, terms, 0)
    v_cur = potential_derivative(q, terms, 0)
    d = (q - q_prev) - du
    acc = d * d / (2.0 * h) - 0.5 * h * (v_prev + v_cur)
    for _ in range(m - 1):
        q_next = 2.0 * q - q_prev - h * h * potential_derivative(q, terms, 1)
        v_next = potential_derivative(q_next, terms, 0)
        d = (q_next - q) - du
        acc = acc + d * d / (2.0 * h) - 0.5 * h * (v_cur + v_next)
        q_prev, q, v_cur = q, q_next, v_next
    return acc


def _shoot_np(xs, ys, tau, terms, m, maxiter):
    tol = 1e-13 * (1.0 + np.abs(xs) + np.abs(ys))
    status = np.full(xs.shape, OK, dtype=np.int64)
    va = (xs - ys) / tau
    fa = _endpoint_np(ys, va, tau, terms, m) - xs
    done = np.abs(fa) <= tol
    v = va.copy()
    vb = va + 1e-3 * (1.0 + np.abs(va))
    fb = _endpoint_np(ys, vb, tau, terms, m) - xs
    active = ~done
    for _ in range(maxiter):
        if not active.any():
            break
        denom = fb - fa
        bad = active & (denom == 0.0)
        status[bad] = NO_CONVERGENCE
        active &= ~bad
        with np.errstate(divide="ignore", invalid="ignore"):
            slope = denom / (vb - va)
        caustic = active & (slope < CAUSTIC_FRACTION * tau)
        status[caustic] = CAUSTIC
        active &= ~caustic
        with np.errstate(divide="ignore", invalid="ignore"):
            vc = np.where(active, vb - fb / slope, vb)
        va, fa = vb, fb
        vb = vc
        fb = np.where(active, _endpoint_np(ys, vb, tau, terms, m) - xs, fb)
        hit = active & (np.abs(fb) <= tol)
        v[hit] = vb[hit]
        done |= hit
        active &= ~hit
    status[active] = NO_CONVERGENCE
    return v, status


def _shoot_pairs_np(xs, ys, tau, terms, m, maxiter):
    v1, s1 = _shoot_np(xs, ys, tau, terms, m, maxiter)
    v2, s2 = _shoot_np(xs, ys, tau, terms, 2 * m, maxiter)
    status = np.maximum(s1, s2)
    r1 = _remainder_np(xs, ys, v1, tau, terms, m)
    r2 = _remainder_np(xs, ys, v2, tau, terms, 2 * m)
    out = (4.0 * r2 - r1) / 3.0
    out[status != OK] = np.nan
    return out, status


def shoot_pairs(xs, ys, tau, terms, steps=32, maxiter=50):
    """Action remainder ``S - |x-y|^2/(2 tau)`` of the classical path for each pair.

    The path solves ``q'' = -V'(q)``, ``q(0) = y``, ``q(tau) = x`` by secant
    shooting on the initial velocity with a Stormer-Verlet integrator. The
    remainder is accumulated along the deviation from the straight segment
    (``int eta'^2/2 - V``), computed with ``steps`` and ``2*steps`` substeps
    and Richardson-extrapolated.

    Returns
    -------
    remainder : ndarray
        NaN where shooting failed.
    status : ndarray of int
        0 converged, 1 no convergence, 2 caustic (vanishing dq/dv0).
    """
    xs = np.ascontiguousarray(xs, dtype=float).ravel()
    ys = np.ascontiguousarray(ys, dtype=float).ravel()
    if _accel.backend() == "numba":
        out = np.empty(xs.size)
        status = np.empty(xs.size, dtype=np.int64)
        _shoot_pairs_jit(xs, ys, float(tau), terms, int(steps), int(maxiter), out, status)
        return out, status
    return _shoot_pairs_np(xs, ys, float(tau), terms, int(steps), int(maxiter))


# line integrals along the segment from y to x


@njit(cache=True)
def _line_integrals_jit(xs, ys, terms, nodes, weights, order, out):
    n = nodes.size
    for i in range(xs.size):
        y = ys[i]
        u = xs[i] - y
        j1 = 0.0
        j2 = 0.0
        j3a = 0.0
        j3b = 0.0
        for a in range(n):
            s = nodes[a]
            w = weights[a]
            q = y + s * u
            j1 += w * potential_derivative_jit(q, terms, 0)
            if order >= 2:
                j2 += w * (s - s * s) * potential_derivative_jit(q, terms, 2)
            if order >= 3:
                j3b += w * s * s * (1.0 - s) * (1.0 - s) * potential_derivative_jit(q, terms, 4)
                inner = 0.0
                for b in range(n):
                    r = nodes[b]
                    inner += weights[b] * r * potential_derivative_jit(y + r * s * u, terms, 1)
                j3a += w * s * s * inner * inner
        out[0, i] = j1
        out[1, i] = j2
        out[2, i] = j3a
        out[3, i] = j3b


def _line_integrals_np(xs, ys, terms, nodes, weights, order):
    u = xs - ys
    out = np.zeros((4, xs.size))
    for s, w in zip(nodes, weights):
        q = ys + s * u
        out[0] += w * potential_derivative(q, terms, 0)
        if order >= 2:
            out[1] += w * (s - s * s) * potential_derivative(q, terms, 2)
        if order >= 3:
            out[3] += w * s * s * (1.0 - s) ** 2 * potential_derivative(q, terms, 4)
            inner = np.zeros(xs.size)
            for r, wr in zip(nodes, weights):
                inner += wr * r * potential_derivative(ys + r * s * u, terms, 1)
            out[2] += w * s * s * inner * inner
    return out


def line_integrals(xs, ys, terms, order, n_nodes=32):
    """Gauss-Legendre sums feeding the W_k coefficients.

    Rows of the result (length of ``xs`` each):

    0. ``int_0^1 V(y + s u) ds``
    1. ``int_0^1 (s - s^2) V''(y + s u) ds``
    2. ``int_0^1 s^2 [int_0^1 r V'(y + r s u) dr]^2 ds``
    3. ``int_0^1 s^2 (1-s)^2 V''''(y + s u) ds``

    with ``u = x - y``; rows beyond ``order`` are left at zero.
    """
    xs = np.ascontiguousarray(xs, dtype=float).ravel()
    ys = np.ascontiguousarray(ys, dtype=float).ravel()
    nodes, weights = gauss_legendre_unit(n_nodes)
    if _accel.backend() == "numba":
        out = np.zeros((4, xs.size))
        _line_integrals_jit(xs, ys, terms, nodes, weights, int(order), out)
        return out
    return _line_integrals_np(xs, ys, terms, nodes, weights, int(order))

"""Short-time action models and the Taylor-type action series.

Every model is evaluated through its *remainder*
``R(tau, x, y) = S(tau, x, y) - |x - y|^2/(2 tau)``, which stays small and
smooth where the kinetic term is large; kernels are then built from the
remainder (see :mod:`pathlab.slicing`).
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ._kernels import CAUSTIC, line_integrals, shoot_pairs
from .errors import InvalidInput, NoClassicalPath
from .potentials import PotentialSpec

__all__ = [
    "MODEL_NAMES",
    "ActionModel",
    "WSeries",
    "broken_line_action",
    "classical_action",
    "classical_remainder",
    "midpoint_action",
    "midpoint_remainder",
    "hj_coefficients",
    "approx_action",
    "harmonic_action",
    "harmonic_quantum_action",
]

MODEL_NAMES = (
    "exact_free",
    "exact_harmonic",
    "broken_line",
    "classical_bvp",
    "midpoint_v1",
    "midpoint_v2",
    "midpoint_avg",
    "taylor1",
    "taylor2",
    "taylor3",
)

MIDPOINT_RULES = ("V1", "V2", "avg")

# short-time guard for the Taylor models, in units of hbar
TAYLOR_GUARD = 0.5


def _kinetic(tau, x, y):
    return (x - y) ** 2 / (2.0 * tau)


def _check_gap(tau):
    if not (np.isfinite(tau) and tau > 0):
        raise InvalidInput(f"time step must be positive, got {tau!r}")


def broken_line_action(V, t, n, points):
    """Action of the polygon through ``points = (x_0, ..., x_n)`` with ``t/n`` per leg.

    ``sum_k (t/n) [ |x_k - x_{k-1}|^2 / (2 (t/n)^2) - V(x_k) ]``; the
    potential is sampled at the later vertex of each leg.
    """
    pts = np.asarray(points, dtype=float)
    if n < 1 or pts.shape[0] != n + 1:
        raise InvalidInput("broken_line_action needs n >= 1 and n + 1 points")
    _check_gap(t)
    h = t / n
    legs = np.diff(pts, axis=0)
    return float(np.sum(legs**2) / (2.0 * h) - h * np.sum(V(pts[1:])))


def classical_remainder(V, tau, x, y, steps=32):
    """``S_cl - |x-y|^2/(2 tau)`` for arrays of endpoints (broadcast together).

    Raises
    ------
    NoClassicalPath
        If shooting fails for any pair.
    """
    _check_gap(tau)
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    r, status = shoot_pairs(x, y, tau, V.packed, steps=steps)
    if np.any(status != 0):
        bad = int(np.count_nonzero(status))
        kind = "caustic" if np.any(status == CAUSTIC) else "no convergence in 50 iterations"
        raise NoClassicalPath(
            f"shooting failed for {bad} endpoint pairs at t - s = {tau:.6g} ({kind})"
        )
    return r.reshape(x.shape)


def classical_action(V, t, s, x, y, steps=32):
    """Action of the classical path from ``(s, y)`` to ``(t, x)``.

    Solves ``q'' = -V'(q)`` by shooting (secant on the initial velocity with a
    symplectic integrator) and integrates the Lagrangian.
    """
    tau = t - s
    r = classical_remainder(V, tau, x, y, steps)
    out = _kinetic(tau, np.asarray(x, dtype=float), np.asarray(y, dtype=float)) + r
    return float(out) if np.ndim(out) == 0 else out


def harmonic_action(omega, tau, x, y):
    """Closed-form oscillator action ``omega [(x^2+y^2) cos - 2 x y] / (2 sin)``."""
    wt = omega * tau
    return omega * ((x**2 + y**2) * np.cos(wt) - 2.0 * x * y) / (2.0 * np.sin(wt))


def _harmonic_remainder(omega, tau, x, y):
    wt = omega * tau
    alpha = (wt * np.cos(wt) / np.sin(wt) - 1.0) / (2.0 * tau)
    beta = (1.0 - wt / np.sin(wt)) / tau
    return alpha * (x**2 + y**2) + beta * x * y


def harmonic_quantum_action(omega, tau, x, y, hbar=1.0):
    """Complex action whose kernel ``(2 pi i hbar tau)^{-1/2} e^{iS/hbar}`` is exact.

    ``S = S_cl - (i hbar/2) log(omega tau / sin(omega tau))``; this is the solution
    of the modified Hamilton-Jacobi equation for the oscillator, the object
    the Taylor coefficients expand.
    """
    wt = omega * tau
    return harmonic_action(omega, tau, x, y) - 0.5j * hbar * np.log(wt / np.sin(wt))


def _segment_average(V, x, y):
    j = line_integrals(*np.broadcast_arrays(x, y), V.packed, 1)
    return j[0].reshape(np.broadcast(x, y).shape)


def midpoint_remainder(V, rule, tau, x, y):
    """``-tau * Vrule(x, y)`` for the rules V1, V2 and avg."""
    _check_gap(tau)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if rule == "V1":
        return -tau * 0.5 * (V(x) + V(y))
    if rule == "V2":
        return -tau * V(0.5 * (x + y))
    if rule == "avg":
        return -tau * _segment_average(V, x, y)
    raise InvalidInput(f"unknown midpoint rule {rule!r}")


def midpoint_action(V, rule, t, s, x, y):
    """Kinetic term minus the midpoint-rule approximation of ``int V``.

    The ``avg`` rule integrates ``V`` along the segment with 32-point
    Gauss-Legendre quadrature.
    """
    tau = t - s
    out = _kinetic(tau, np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    out = out + midpoint_remainder(V, rule, tau, x, y)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class WSeries:
    """Coefficients ``W_1..W_N`` of the Taylor-type action series.

    ``S^(N) = |x-y|^2/(2(t-s)) + sum_k W_k(x, y) (t-s)^k`` solves the modified
    Hamilton-Jacobi equation order by order. For static potentials
    (closed forms below, ``u = x - y``, ``q(s) = y + s u``)::

        W_1 = -int V(q)
        W_2 = -(i hbar/2) int (s - s^2) V''(q)
        W_3 = -1/2 int s^2 [int r V'(y + r s u) dr]^2 ds + (hbar^2/8) int s^2 (1-s)^2 V''''(q)

    all integrals over [0, 1] by 32-point Gauss-Legendre. The base time
    ``s`` is carried for bookkeeping only.
    """

    potential: PotentialSpec
    order: int
    hbar: float = 1.0
    s: float = 0.0

    def __post_init__(self):
        if self.order not in (1, 2, 3):
            raise InvalidInput(f"W-series order must be 1, 2 or 3, got {self.order!r}")

    def coefficients(self, x, y):
        """List ``[W_1, ..., W_N]`` evaluated at the broadcast pairs."""
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        shape = x.shape
        if self.potential.is_zero:
            return [np.zeros(shape, dtype=complex) for _ in range(self.order)]
        j = line_integrals(x, y, self.potential.packed, self.order)
        out = [(-j[0]).astype(complex)]
        if self.order >= 2:
            out.append(-0.5j * self.hbar * j[1])
        if self.order >= 3:
            out.append((-0.5 * j[2] + self.hbar**2 / 8.0 * j[3]).astype(complex))
        return [w.reshape(shape) for w in out]

    def coefficient(self, k, x, y):
        if not 1 <= k <= self.order:
            raise InvalidInput(f"coefficient index {k} outside 1..{self.order}")
        return self.coefficients(x, y)[k - 1]

    def remainder(self, tau, x, y):
        """``sum_k W_k tau^k``."""
        return _series_sum(self.coefficients(x, y), tau)


def _series_sum(coeffs, tau):
    out = np.zeros_like(coeffs[0])
    for k, w in enumerate(coeffs, start=1):
        out = out + w * tau**k
    return out


def hj_coefficients(V, N, hbar=1.0, s=0.0):
    """Build the :class:`WSeries` of order ``N`` (1, 2 or 3) for a static potential."""
    return WSeries(V, int(N), float(hbar), float(s))


def approx_action(w, t, s, x, y):
    """Truncated series ``|x-y|^2/(2(t-s)) + sum_k W_k (t-s)^k`` (complex)."""
    tau = t - s
    _check_gap(tau)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    out = _kinetic(tau, x, y) + w.remainder(tau, x, y)
    return complex(out) if np.ndim(out) == 0 else out


@lru_cache(maxsize=4)
def _pair_coefficients(potential, order, hbar, grid):
    x = grid.points
    return tuple(WSeries(potential, order, hbar).coefficients(x[:, None], x[None, :]))


@lru_cache(maxsize=4)
def _pair_segment_average(potential, grid):
    x = grid.points
    return _segment_average(potential, x[:, None], x[None, :])


@dataclass(frozen=True)
class ActionModel:
    """Named rule producing the short-time action of one slice.

    Parameters
    ----------
    kind : str
        One of :data:`MODEL_NAMES`.
    potential : PotentialSpec
    """

    kind: str
    potential: PotentialSpec = PotentialSpec()

    def __post_init__(self):
        if self.kind not in MODEL_NAMES:
            raise InvalidInput(
                f"unknown action model {self.kind!r}; choose from {', '.join(MODEL_NAMES)}"
            )
        if self.kind == "exact_harmonic" and not (
            self.potential.bounded_part().is_zero and not self.potential.is_zero
        ):
            raise InvalidInput("exact_harmonic needs a purely harmonic potential")

    @property
    def taylor_order(self):
        return int(self.kind[-1]) if self.kind.startswith("taylor") else None

    def guard(self, hbar):
        """Largest admissible gap (inf when the guard is operational only)."""
        if self.taylor_order is not None:
            return TAYLOR_GUARD * hbar
        return np.inf

    def remainder(self, tau, x, y, hbar=1.0):
        """``S_model - |x-y|^2/(2 tau)`` at broadcast pairs (complex for Taylor models)."""
        _check_gap(tau)
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        V = self.potential
        k = self.kind
        if k == "exact_free":
            return np.zeros(np.broadcast(x, y).shape)
        if k == "exact_harmonic":
            return _harmonic_remainder(np.sqrt(V.quadratic_coefficient), tau, x, y)
        if k == "broken_line":
            return -tau * V(x) + 0.0 * y
        if k == "classical_bvp":
            return classical_remainder(V, tau, x, y)
        if k.startswith("midpoint"):
            return midpoint_remainder(V, {"v1": "V1", "v2": "V2", "avg": "avg"}[k.split("_")[1]], tau, x, y)
        return hj_coefficients(V, self.taylor_order, hbar).remainder(tau, x, y)

    def remainder_on_grid(self, tau, grid, hbar=1.0):
        """Remainder on all grid pairs ``(x_i, x_j)``, caching tau-independent parts."""
        x = grid.points
        if self.taylor_order is not None:
            coeffs = _pair_coefficients(self.potential, self.taylor_order, float(hbar), grid)
            return _series_sum(list(coeffs), tau)
        if self.kind == "midpoint_avg":
            return -tau * _pair_segment_average(self.potential, grid)
        return self.remainder(tau, x[:, None], x[None, :], hbar)

    def action(self, tau, x, y, hbar=1.0):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return _kinetic(tau, x, y) + self.remainder(tau, x, y, hbar)

"""Subdivisions, short-time parametrices and their compositions.

A slice kernel is realized as the band-limited free kernel of the gap times
``exp(i R / hbar)`` where ``R = S_model - |x-y|^2/(2 tau)``. For the free
model this is exactly the free propagator; for every other model the
smooth factor carries the model's action correction (and, for the Taylor
series, the amplitude coming from its imaginary part).
"""

import logging
from dataclasses import dataclass

import numpy as np

from .actions import ActionModel
from .core import KernelMatrix, identity_kernel
from .errors import ExceptionalTime, GuardViolation, InvalidInput
from .oracles import (
    EXCEPTIONAL_THRESHOLD,
    is_exceptional_block,
    QuadraticHamiltonian,
    classical_flow,
    free_kernel,
    quadratic_kernel,
)

__all__ = [
    "Subdivision",
    "mesh",
    "parametrix_kernel",
    "compose_over_subdivision",
    "trotter_step",
    "trotter_approx",
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Subdivision:
    """Strictly increasing times ``t_0 < t_1 < ... < t_L`` with ``L >= 1``."""

    times: tuple

    def __post_init__(self):
        t = tuple(float(v) for v in self.times)
        if len(t) < 2:
            raise InvalidInput("a subdivision needs at least two times")
        if not all(np.isfinite(t)) or any(b <= a for a, b in zip(t, t[1:])):
            raise InvalidInput("subdivision times must be finite and strictly increasing")
        object.__setattr__(self, "times", t)

    @classmethod
    def uniform(cls, s, t, L):
        if L < 1:
            raise InvalidInput("uniform subdivision needs L >= 1")
        return cls(tuple(np.linspace(s, t, int(L) + 1)))

    @property
    def gaps(self):
        return np.diff(np.asarray(self.times))

    @property
    def start(self):
        return self.times[0]

    @property
    def end(self):
        return self.times[-1]

    def __len__(self):
        return len(self.times) - 1


def mesh(omega):
    """Largest gap of the subdivision."""
    return float(np.max(omega.gaps))


def _hbar(cfg):
    return 1.0 if cfg is None else cfg.hbar


def parametrix_kernel(model, t, s, grid, cfg=None):
    """Short-time kernel ``(2 pi i hbar tau)^{-1/2} exp(i S_model / hbar)``, ``tau = t - s``.

    Raises
    ------
    GuardViolation
        If the gap exceeds the model's short-time guard.
    NoClassicalPath
        Propagated from ``classical_bvp`` models.
    """
    tau = t - s
    if not tau > 0:
        raise InvalidInput("parametrix_kernel needs t > s")
    hbar = _hbar(cfg)
    if tau > model.guard(hbar) * (1.0 + 1e-12):
        raise GuardViolation(0, tau, model.guard(hbar), model.kind)
    free = free_kernel(tau, grid, cfg)
    if model.kind == "exact_free":
        return free
    r = model.remainder_on_grid(tau, grid, hbar)
    return KernelMatrix(grid, free.entries * np.exp(1j * r / hbar))


def _runs(gaps, rtol=1e-12):
    """Group consecutive (numerically) equal gaps: list of (first index, gap, count)."""
    runs = []
    for j, g in enumerate(gaps):
        if runs and abs(g - runs[-1][1]) <= rtol * runs[-1][1]:
            runs[-1][2] += 1
        else:
            runs.append([j, g, 1])
    return runs


def compose_over_subdivision(model, omega, grid, cfg=None):
    """Right-to-left composition of the slice kernels over ``omega``.

    Consecutive equal gaps share one slice kernel and are composed by
    repeated squaring, which is the same product by associativity.
    """
    hbar = _hbar(cfg)
    bound = model.guard(hbar)
    gaps = omega.gaps
    for j, g in enumerate(gaps):
        if g > bound * (1.0 + 1e-12):
            raise GuardViolation(j, g, bound, model.kind)
    total = None
    for _, g, count in _runs(gaps):
        piece = parametrix_kernel(model, g, 0.0, grid, cfg).power(count)
        total = piece if total is None else piece @ total
    return total


def _split_potential(V, h0):
    if not V.is_bounded:
        raise InvalidInput("harmonic terms cannot be used as a Trotter perturbation")
    return V


def trotter_step(V, h0, tau, grid, cfg=None):
    """One factor ``e^{-i tau H_0/hbar} e^{-i tau V/hbar}`` as a kernel."""
    hbar = _hbar(cfg)
    blocks = classical_flow(h0, tau, cfg)
    if is_exceptional_block(blocks.B):
        omega = h0.frequency
        k = int(np.rint(tau * omega / np.pi)) if omega > 0 else 0
        raise ExceptionalTime(tau, k, blocks.B, EXCEPTIONAL_THRESHOLD, "Trotter step")
    if h0 == QuadraticHamiltonian.free():
        quad = free_kernel(tau, grid, cfg)
    else:
        quad = quadratic_kernel(blocks, grid, cfg)
    phase = np.exp(-1j * tau * V(grid.points) / hbar)
    return KernelMatrix(grid, quad.entries * phase[None, :])


def trotter_approx(V, h0, t, n, grid, cfg=None):
    """Sequential product ``(e^{-i(t/n)H_0} e^{-i(t/n)V})^n`` as a kernel.

    ``V`` must be bounded; the quadratic part belongs in ``h0``.

    Raises
    ------
    ExceptionalTime
        If the quadratic step time makes the flow block singular.
    """
    if n < 1:
        raise InvalidInput("Trotter products need n >= 1")
    V = _split_potential(V, h0)
    if t == 0:
        return identity_kernel(grid)
    return trotter_step(V, h0, t / n, grid, cfg).power(n)

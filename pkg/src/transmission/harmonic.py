"""Neumann solutions in the upper and lower half-planes.

For a datum ``f`` on the line,

    u_f(x, y) = (1/pi) int log( sqrt((x-t)^2 + y^2) / (1 + |t|) ) f(t) dt

is harmonic for ``y > 0`` with ``d_y u_f -> f`` at the boundary.  Its
gradient is the Poisson and conjugate Poisson smoothing of ``f``.  The
lower half-plane solution is ``u(x, y) = -u_f(x, -y)``.

All evaluations are midpoint sums over the datum's nodes, done in row
blocks to bound memory.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from .grid import SampledFunction, TailDivergence

__all__ = [
    "DomainError",
    "BoxOutsideDomain",
    "HarmonicField",
    "neumann_solution",
    "boundary_potential",
    "harmonicity_residual",
    "poisson_smooth",
]

_BLOCK = 2_000_000  # max kernel entries materialised at once


class DomainError(ValueError):
    pass


class BoxOutsideDomain(DomainError):
    pass


def _check_tail(f: SampledFunction):
    if f.decay is not None and f.decay <= 1:
        cl, cr = f.tail_coefficients()
        if max(abs(cl), abs(cr)) > 1e-12:
            raise TailDivergence(
                f"Neumann datum with tail exponent {f.decay} is not integrable against the log kernel"
            )


def _blocked(kernel, x, y, t, weights):
    """``sum_j kernel(x_i - t_j, y_i) weights_j`` for flat arrays ``x, y``."""
    out = np.empty(x.shape, dtype=np.result_type(weights, float))
    step = max(1, _BLOCK // max(1, t.size))
    for i in range(0, x.size, step):
        xs = x[i : i + step, None]
        ys = y[i : i + step, None]
        out[i : i + step] = kernel(xs - t[None, :], ys) @ weights
    return out


def _log_kernel(d, y):
    return 0.5 * np.log(d * d + y * y)


def _poisson(d, y):
    return y / (d * d + y * y)


def _conjugate(d, y):
    return d / (d * d + y * y)


@dataclass(frozen=True, eq=False)
class HarmonicField:
    """Harmonic function built from a Neumann datum.

    ``offset`` is an additive constant (the matching constant of a
    transmission solution); it does not affect the gradient.
    """

    datum: SampledFunction
    half_plane: str = "upper"
    offset: float = 0.0

    def __post_init__(self):
        if self.half_plane not in ("upper", "lower"):
            raise DomainError(f"half_plane must be 'upper' or 'lower', got {self.half_plane!r}")

    @property
    def sign(self) -> float:
        return 1.0 if self.half_plane == "upper" else -1.0

    def _prep(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        if np.any(self.sign * y <= 0):
            raise DomainError(f"points must lie strictly inside the {self.half_plane} half-plane")
        return x, y

    def _sum(self, kernel, x, y):
        t = self.datum.grid.nodes
        wts = self.datum.grid.spacing * self.datum.values
        shape = x.shape
        return _blocked(kernel, x.ravel(), np.abs(y).ravel(), t, wts).reshape(shape) / np.pi

    def u(self, x, y):
        x, y = self._prep(x, y)
        t = self.datum.grid.nodes
        base = self._sum(_log_kernel, x, y)
        norm = np.sum(np.log1p(np.abs(t)) * self.datum.grid.spacing * self.datum.values) / np.pi
        return self.sign * (base - norm) + self.offset

    def du_dx(self, x, y):
        x, y = self._prep(x, y)
        return self.sign * self._sum(_conjugate, x, y)

    def du_dy(self, x, y):
        x, y = self._prep(x, y)
        return self._sum(_poisson, x, y)


def neumann_solution(f: SampledFunction, half_plane: str = "upper") -> HarmonicField:
    """Harmonic field with Neumann datum ``f`` in the given half-plane."""
    _check_tail(f)
    return HarmonicField(f, half_plane)


def poisson_smooth(f: SampledFunction, x, y: float):
    """``(P_y * f)(x)``, the Poisson smoothing at height ``y > 0``."""
    return neumann_solution(f, "upper").du_dy(x, np.full(np.shape(x), float(y)))


def boundary_potential(f: SampledFunction) -> SampledFunction:
    """Boundary values ``Bf(x) = (1/pi) int log(|x-t| / (1+|t|)) f(t) dt`` at the nodes.

    Product midpoint rule: ``f`` is taken constant on each cell and
    ``log|x_i - t|`` is integrated exactly over the cell.  A plain midpoint
    sum would leave an ``O(h)`` error from the curvature of the log near
    ``t = x_i``.
    """
    _check_tail(f)
    g = f.grid
    x = g.nodes
    h = g.spacing
    n = g.count
    # (1/h) int over cell k of log|s| ds, with |x_i - x_j| = h |i - j| (Toeplitz)
    k = np.arange(1, n, dtype=float)
    tail = (np.log(k) + (k + 0.5) * np.log1p(0.5 / k) - (k - 0.5) * np.log1p(-0.5 / k) - 1.0)
    lag = np.log(h) + np.concatenate([[np.log(0.5) - 1.0], tail])
    k = np.concatenate([lag[:0:-1], lag])
    conv = fftconvolve(f.values, k)[n - 1 : 2 * n - 1]
    norm = np.sum(np.log1p(np.abs(x)) * f.values)
    return f.with_values(h * (conv - norm) / np.pi, decay=None)


def harmonicity_residual(field: HarmonicField, box, probe_spacing: float) -> float:
    """Largest five-point Laplacian of ``u`` over a probe lattice in ``box``.

    ``box = (x0, x1, y0, y1)``.  The stencil value is divided by the square
    of the spacing, so for a harmonic ``u`` it shrinks like ``spacing^2``.
    """
    x0, x1, y0, y1 = map(float, box)
    s = float(probe_spacing)
    lo, hi = (y0 - s, y1 + s)
    if field.sign * lo <= 0 or field.sign * hi <= 0:
        raise BoxOutsideDomain("probe box (with stencil arms) must lie inside the half-plane")
    xs = np.arange(x0, x1 + 0.5 * s, s)
    ys = np.arange(y0, y1 + 0.5 * s, s)
    X, Y = np.meshgrid(xs, ys)
    c = field.u(X, Y)
    lap = (field.u(X + s, Y) + field.u(X - s, Y) + field.u(X, Y + s) + field.u(X, Y - s) - 4 * c)
    return float(np.max(np.abs(lap))) / s ** 2

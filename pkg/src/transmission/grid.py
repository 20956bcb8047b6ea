"""Uniform offset grids on a truncated line and functions sampled on them.

Every integral over the real line in this package is realised on a grid
``x_j = -L + (j + 1/2) h`` with ``h = 2L/N``.  The half-cell offset keeps 0
(and other points where the gallery functions blow up) off the node set.

Behaviour beyond ``[-L, L]`` is declared, not guessed: a sampled function
either vanishes outside the window or decays like ``C |x|^(-p)`` with ``C``
fitted separately on each side from the four outermost nodes.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicSpline

__all__ = [
    "GridError",
    "OddCount",
    "SampleError",
    "TailDivergence",
    "GridMismatch",
    "GridSpec",
    "SampledFunction",
    "make_grid",
    "sample",
    "interpolate",
    "integrate",
    "fit_tail",
]

TAIL_NODES = 4
# a node value this many times larger than both neighbours is treated as a pole
_SPIKE_RATIO = 1e10


class GridError(ValueError):
    """Base class for grid and sampling errors."""


class OddCount(GridError):
    pass


class SampleError(GridError):
    """Raised when a function cannot be evaluated at some node."""

    def __init__(self, message: str, node: float | None = None):
        super().__init__(message)
        self.node = node


class TailDivergence(GridError):
    """Raised when a declared tail makes an integral diverge."""


class GridMismatch(GridError):
    pass


@dataclass(frozen=True)
class GridSpec:
    """Offset uniform grid on ``[-half_width, half_width]`` with ``count`` cells."""

    half_width: float
    count: int

    def __post_init__(self):
        if not np.isfinite(self.half_width) or self.half_width <= 0:
            raise GridError(f"half_width must be positive, got {self.half_width}")
        if int(self.count) != self.count or self.count < 2:
            raise GridError(f"count must be a positive integer, got {self.count}")
        if self.count % 2:
            raise OddCount(f"count must be even, got {self.count}")

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / self.count

    @cached_property
    def nodes(self) -> np.ndarray:
        x = -self.half_width + (np.arange(self.count) + 0.5) * self.spacing
        x.flags.writeable = False
        return x

    def inner_mask(self, fraction: float = 0.5) -> np.ndarray:
        """Boolean mask of nodes with ``|x| <= fraction * L``."""
        return np.abs(self.nodes) <= fraction * self.half_width

    def refined(self, factor: int = 2) -> "GridSpec":
        return GridSpec(self.half_width, self.count * factor)


def make_grid(half_width: float, count: int) -> GridSpec:
    """Build an offset grid.

    Parameters
    ----------
    half_width : float
        Truncation half-width L, must be positive.
    count : int
        Number of nodes N, even and at least 16.
    """
    if count % 2:
        raise OddCount(f"count must be even, got {count}")
    if count < 16:
        raise GridError(f"count must be at least 16, got {count}")
    return GridSpec(float(half_width), int(count))


def fit_tail(x: np.ndarray, values: np.ndarray, exponent: float) -> complex | float:
    """Least-squares coefficient ``C`` of ``C |x|^(-exponent)`` through the given nodes."""
    basis = np.abs(x) ** (-exponent)
    return np.dot(basis, values) / np.dot(basis, basis)


@dataclass(frozen=True, eq=False)
class SampledFunction:
    """Values of a function on a :class:`GridSpec`.

    Parameters
    ----------
    grid : GridSpec
    values : array_like
        One value per node.  Real input stays real.
    decay : float or None
        ``None`` means the function vanishes outside ``[-L, L]``.  A number
        ``p`` declares algebraic behaviour ``C |x|^(-p)`` there (negative
        ``p`` is allowed for growing weights).
    source : callable, optional
        Closed form the samples came from; used for exact off-grid
        evaluation when available.
    """

    grid: GridSpec
    values: np.ndarray
    decay: Optional[float] = None
    source: Optional[Callable] = field(default=None, repr=False)

    def __post_init__(self):
        v = np.asarray(self.values)
        if not np.iscomplexobj(v):
            v = v.astype(float)
        v = v.copy()
        if v.shape != (self.grid.count,):
            raise GridMismatch(
                f"expected {self.grid.count} values, got shape {v.shape}"
            )
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    # ---------------------------------------------------------------- basics
    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.values)

    @property
    def real(self) -> "SampledFunction":
        src = self.source
        return SampledFunction(
            self.grid,
            np.real(self.values),
            self.decay,
            (lambda x: np.real(src(x))) if src is not None else None,
        )

    def with_values(self, values, decay="keep") -> "SampledFunction":
        """Same grid, new values; the closed form is dropped."""
        return SampledFunction(
            self.grid, values, self.decay if decay == "keep" else decay
        )

    def tail_coefficients(self) -> tuple:
        """Fitted ``(C_left, C_right)``; zeros when the tail model is zero."""
        if self.decay is None:
            return 0.0, 0.0
        x = self.grid.nodes
        k = TAIL_NODES
        return (
            fit_tail(x[:k], self.values[:k], self.decay),
            fit_tail(x[-k:], self.values[-k:], self.decay),
        )

    def _check(self, other: "SampledFunction"):
        if other.grid != self.grid:
            raise GridMismatch(f"{other.grid} differs from {self.grid}")

    # ------------------------------------------------------------ arithmetic
    def __add__(self, other):
        if isinstance(other, SampledFunction):
            self._check(other)
            if self.decay is None:
                decay = other.decay
            elif other.decay is None:
                decay = self.decay
            else:
                decay = min(self.decay, other.decay)
            return SampledFunction(self.grid, self.values + other.values, decay)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, SampledFunction):
            return self + (-1.0) * other
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, SampledFunction):
            self._check(other)
            if self.decay is None or other.decay is None:
                decay = None
            else:
                decay = self.decay + other.decay
            return SampledFunction(self.grid, self.values * other.values, decay)
        if np.isscalar(other):
            src = self.source
            return SampledFunction(
                self.grid,
                other * self.values,
                self.decay,
                (lambda x: other * src(x)) if src is not None else None,
            )
        return NotImplemented

    __rmul__ = __mul__

    def __neg__(self):
        return (-1.0) * self

    def __truediv__(self, other):
        if np.isscalar(other):
            return self * (1.0 / other)
        return NotImplemented

    def abs_power(self, p: float) -> "SampledFunction":
        """``|f|^p`` with the tail exponent scaled by ``p``."""
        decay = None if self.decay is None else self.decay * p
        return SampledFunction(self.grid, np.abs(self.values) ** p, decay)

    @cached_property
    def _spline(self):
        x = self.grid.nodes
        if self.is_real:
            return CubicSpline(x, self.values, bc_type="natural")
        re = CubicSpline(x, self.values.real, bc_type="natural")
        im = CubicSpline(x, self.values.imag, bc_type="natural")
        return lambda t: re(t) + 1j * im(t)


def sample(
    f: Callable,
    grid: GridSpec,
    decay: Optional[float] = None,
    keep_source: bool = True,
) -> SampledFunction:
    """Evaluate ``f`` at every node of ``grid``.

    ``f`` is tried vectorised first, then node by node.  Non-finite values,
    exceptions, and isolated spikes (a float pole landing on a node) raise
    :class:`SampleError` naming the offending node.
    """
    x = grid.nodes
    with np.errstate(all="ignore"):
        try:
            v = np.asarray(f(x))
            if v.shape != x.shape:
                v = np.broadcast_to(v, x.shape).copy() if v.ndim == 0 else None
        except Exception:
            v = None
        if v is None:
            out = []
            for xj in x:
                try:
                    out.append(complex(f(float(xj))))
                except Exception as exc:
                    raise SampleError(
                        f"evaluation failed at x={xj!r}: {exc}", node=float(xj)
                    ) from exc
            v = np.array(out)
            if np.all(v.imag == 0):
                v = v.real
    bad = ~np.isfinite(v)
    mag = np.abs(v)
    left = np.concatenate([[0.0], mag[:-1]])
    right = np.concatenate([mag[1:], [0.0]])
    neighbour = np.maximum(np.maximum(left, right), np.finfo(float).tiny)
    bad |= (mag > _SPIKE_RATIO * neighbour) & (mag > 1e8)
    if bad.any():
        j = int(np.flatnonzero(bad)[0])
        raise SampleError(
            f"function is singular at node x={x[j]!r} (value {v[j]!r})", node=float(x[j])
        )
    return SampledFunction(grid, v, decay, f if keep_source else None)


def interpolate(f: SampledFunction, x):
    """Evaluate ``f`` off-grid.

    Natural cubic spline inside ``[-L, L]`` (the half cells at each end use
    the spline's linear continuation), the declared tail model outside.
    Stored values are returned exactly at nodes.
    """
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    L = f.grid.half_width
    out = np.zeros(x.shape, dtype=f.values.dtype)
    inside = np.abs(x) <= L
    if inside.any():
        out[inside] = f._spline(x[inside])
        # exact node hits
        pos = (x[inside] + L) / f.grid.spacing - 0.5
        j = np.rint(pos).astype(int)
        ok = (j >= 0) & (j < f.grid.count)
        hit = np.zeros(pos.shape, dtype=bool)
        hit[ok] = f.grid.nodes[j[ok]] == x[inside][ok]
        vals = out[inside]
        vals[hit] = f.values[j[hit]]
        out[inside] = vals
    if f.decay is not None:
        cl, cr = f.tail_coefficients()
        r = x > L
        l = x < -L
        out[r] = cr * np.abs(x[r]) ** (-f.decay)
        out[l] = cl * np.abs(x[l]) ** (-f.decay)
    return out[0] if scalar else out


def _tail_integral(f: SampledFunction):
    if f.decay is None:
        return 0.0
    cl, cr = f.tail_coefficients()
    p = f.decay
    if p <= 1:
        if max(abs(cl), abs(cr)) > 1e-12:
            raise TailDivergence(
                f"tail |x|^-{p} with coefficients ({cl:.3g}, {cr:.3g}) is not integrable"
            )
        return 0.0
    L = f.grid.half_width
    return (cl + cr) * L ** (1.0 - p) / (p - 1.0)


def integrate(f: SampledFunction):
    """Midpoint rule over the window plus the analytic integral of the tail."""
    total = f.grid.spacing * np.sum(f.values) + _tail_integral(f)
    return total

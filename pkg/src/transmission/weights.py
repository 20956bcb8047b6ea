"""Weights, weighted norms, pushforward weights and A2 diagnostics."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .grid import GridMismatch, GridSpec, SampledFunction, integrate, sample
from .maps import Homeomorphism

__all__ = [
    "WeightError",
    "CompositionUnavailable",
    "Weight",
    "unit_weight",
    "weight_from",
    "weighted_norm",
    "pushforward_weight",
    "a2_constant",
    "reverse_holder_ratio",
    "dyadic_blocks",
]


class WeightError(ValueError):
    pass


class CompositionUnavailable(WeightError):
    pass


@dataclass(frozen=True, eq=False)
class Weight:
    """Positive sampled weight, optionally with a closed form."""

    w: SampledFunction
    closed_form: Optional[Callable] = field(default=None, repr=False)

    def __post_init__(self):
        v = self.w.values
        if not self.w.is_real:
            raise WeightError("weights must be real")
        if not np.all(np.isfinite(v)) or np.any(v <= 0):
            raise WeightError("weights must be finite and strictly positive at every node")

    @property
    def grid(self) -> GridSpec:
        return self.w.grid

    def __call__(self, x):
        if self.closed_form is None:
            raise CompositionUnavailable("weight has no closed form for off-grid evaluation")
        return self.closed_form(x)


def weight_from(fn: Callable, grid: GridSpec, decay: float | None = None) -> Weight:
    """Sample a closed-form weight on ``grid``."""
    return Weight(sample(fn, grid, decay), fn)


def unit_weight(grid: GridSpec) -> Weight:
    return weight_from(lambda x: np.ones_like(np.asarray(x, dtype=float)), grid, 0.0)


def weighted_norm(f: SampledFunction, w: Weight, p: float = 2.0) -> float:
    """``(int |f|^p w)^(1/p)`` by midpoint quadrature plus the declared tails."""
    if p < 1:
        raise WeightError(f"p must be at least 1, got {p}")
    if f.grid != w.grid:
        raise GridMismatch(f"{f.grid} differs from {w.grid}")
    val = integrate(f.abs_power(p) * w.w)
    return float(np.real(val)) ** (1.0 / p)


def pushforward_weight(w: Weight, psi: Homeomorphism, p: float,
                       grid: GridSpec | None = None) -> Weight:
    """``|(Psi^-1)'|^(1-p) (w o Psi^-1)`` sampled on ``grid`` (default: ``w``'s grid).

    Needs the closed form of ``w`` because the composition is evaluated at
    the points ``Psi^-1(y)``, which are not nodes.
    """
    if w.closed_form is None:
        raise CompositionUnavailable("pushforward needs a weight with a closed form")
    grid = grid or w.grid
    wf = w.closed_form

    def wt(y):
        y = np.asarray(y, dtype=float)
        return np.abs(psi.inverse_derivative(y)) ** (1.0 - p) * wf(psi.inverse(y))

    decay = None
    if w.w.decay is not None:
        # w ~ |x|^-q, Psi^-1 ~ |y|^(1/g), (Psi^-1)' ~ |y|^(1/g - 1)
        g = psi.growth
        decay = w.w.decay / g + (1.0 / g - 1.0) * (p - 1.0)
    return Weight(sample(wt, grid, decay), wt)


def dyadic_blocks(n: int, min_len: int = 4):
    """Index ranges of the dyadic subdivisions of ``range(n)`` down to ``min_len`` nodes."""
    level = 0
    while True:
        parts = 2 ** level
        if n // parts < min_len:
            break
        edges = np.linspace(0, n, parts + 1).round().astype(int)
        yield edges
        level += 1


def _block_means(v: np.ndarray, edges: np.ndarray) -> np.ndarray:
    c = np.concatenate([[0.0], np.cumsum(v)])
    return (c[edges[1:]] - c[edges[:-1]]) / np.diff(edges)


def a2_constant(w: Weight) -> float:
    """Dyadic estimate of the A2 characteristic ``sup (avg w)(avg 1/w)``.

    The sup runs over the dyadic subintervals of ``[-L, L]`` containing at
    least four nodes.  It under-estimates the full characteristic.
    """
    v = w.w.values
    best = 0.0
    for edges in dyadic_blocks(len(v)):
        best = max(best, float(np.max(_block_means(v, edges) * _block_means(1.0 / v, edges))))
    return best


def reverse_holder_ratio(psi: Homeomorphism, p: float, grid: GridSpec) -> float:
    """``sup_I (avg_I Psi'^p)^(1/p) / avg_I Psi'`` over dyadic intervals."""
    d = np.asarray(psi.derivative(grid.nodes), dtype=float)
    best = 0.0
    for edges in dyadic_blocks(len(d)):
        r = _block_means(d ** p, edges) ** (1.0 / p) / _block_means(d, edges)
        best = max(best, float(np.max(r)))
    return best

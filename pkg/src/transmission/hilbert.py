"""Discrete Hilbert transform on offset grids.

Convention: ``Hf(x) = (1/pi) p.v. int f(t) / (x - t) dt``, so that
``H[1/(1+x^2)] = x/(1+x^2)`` and ``H(Hf) = -f``.

The kernel ``k[m] = (1 - (-1)^m) / (pi m)`` is the Hilbert transform of the
sinc interpolant sampled at integer offsets.  It is exact for band-limited
samples, odd in ``m``, and couples only nodes of opposite index parity.

When the input declares an algebraic tail ``|x|^-p``, a two-term model
``a |x|^-p + b |x|^-(p+1)`` is fitted on the outer quarter of each side,
the window is padded with it out to ``3L`` and the rest of the tail is
added in closed form (a Gauss hypergeometric series).  This removes the
``O(1/L)`` truncation floor a zero-padded convolution would leave; the
second term captures the first-moment part of transforms of off-centre
bumps.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.linalg import toeplitz
from scipy.signal import fftconvolve
from scipy.special import hyp2f1

from .grid import GridMismatch, GridSpec, SampledFunction, TailDivergence

__all__ = [
    "TooLarge",
    "HilbertOperator",
    "hilbert_kernel",
    "apply_hilbert",
    "hilbert_matrix",
    "involution_defect",
]

MATRIX_LIMIT = 8192


class TooLarge(ValueError):
    """Dense materialisation refused by the memory guard."""


def hilbert_kernel(n: int) -> np.ndarray:
    """Kernel values for offsets ``m = -(n-1) .. n-1`` (length ``2n-1``)."""
    m = np.arange(-(n - 1), n)
    k = np.zeros(2 * n - 1)
    odd = m % 2 != 0
    k[odd] = 2.0 / (np.pi * m[odd])
    return k


@dataclass(frozen=True)
class HilbertOperator:
    grid: GridSpec

    @cached_property
    def kernel(self) -> np.ndarray:
        k = hilbert_kernel(self.grid.count)
        k.flags.writeable = False
        return k

    def __call__(self, f: SampledFunction) -> SampledFunction:
        return apply_hilbert(self, f)

    def matrix(self) -> np.ndarray:
        return hilbert_matrix(self)


def _convolve(values: np.ndarray, n_out_offset: int, n_out: int) -> np.ndarray:
    """``sum_j k[i-j] v[j]`` for output rows ``n_out_offset .. +n_out``."""
    m = len(values)
    k = hilbert_kernel(m)
    full = fftconvolve(values, k)
    # full[i + m - 1] = sum_j k[i - j] v[j]
    return full[m - 1 + n_out_offset : m - 1 + n_out_offset + n_out]


def _remainder(s: np.ndarray, lc: float, p: float) -> np.ndarray:
    """``int_lc^inf t^-p / (t - x) dt`` at ``x = s * lc``, ``|s| < 1``."""
    return lc ** (-p) / p * hyp2f1(1.0, p, p + 1.0, s)


def _two_term_tail(x: np.ndarray, values: np.ndarray, p: float, half_width: float):
    """Least-squares ``(a, b)`` per side for ``a |x|^-p + b |x|^-(p+1)``."""
    out = []
    for side in (x < -0.75 * half_width, x > 0.75 * half_width):
        ax = np.abs(x[side])
        basis = np.stack([ax ** (-p), ax ** (-p - 1.0)], axis=1)
        coef, *_ = np.linalg.lstsq(basis, values[side], rcond=None)
        out.append(coef)
    return out


def apply_hilbert(H: HilbertOperator, f: SampledFunction) -> SampledFunction:
    """Discrete Hilbert transform of ``f``.

    The output declares tail exponent 1 (or ``p`` when the input decays
    more slowly than ``1/|x|``), which is the decay of ``Hf`` for integrable
    ``f``.

    Raises
    ------
    GridMismatch
        If ``f`` lives on another grid.
    TailDivergence
        If the declared tail does not decay.
    """
    if f.grid != H.grid:
        raise GridMismatch(f"{f.grid} differs from {H.grid}")
    n = H.grid.count
    h = H.grid.spacing
    x = H.grid.nodes
    p = f.decay
    if p is None:
        out = _convolve(f.values, 0, n)
        return SampledFunction(H.grid, out, 1.0)
    if p <= 0:
        raise TailDivergence(f"Hilbert transform needs a decaying tail, got exponent {p}")
    (al, bl), (ar, br) = _two_term_tail(x, f.values, p, H.grid.half_width)
    pad = n
    xr = x[-1] + h * np.arange(1, pad + 1)
    xl = np.abs(x[0] - h * np.arange(pad, 0, -1))
    ext = np.concatenate([al * xl ** (-p) + bl * xl ** (-p - 1), f.values,
                          ar * xr ** (-p) + br * xr ** (-p - 1)])
    out = _convolve(ext, pad, n)
    lc = H.grid.half_width + pad * h
    s = x / lc
    right = ar * _remainder(s, lc, p) + br * _remainder(s, lc, p + 1)
    left = al * _remainder(-s, lc, p) + bl * _remainder(-s, lc, p + 1)
    out = out + (left - right) / np.pi
    return SampledFunction(H.grid, out, 1.0 if p > 1 else p)


def hilbert_matrix(H: HilbertOperator) -> np.ndarray:
    """Dense matrix ``M[i, j] = k[i - j]`` (zero tail), skew-symmetric."""
    n = H.grid.count
    if n > MATRIX_LIMIT:
        raise TooLarge(f"N={n} exceeds the dense limit {MATRIX_LIMIT}")
    col = H.kernel[n - 1 :]
    return toeplitz(col, -col)


def involution_defect(H: HilbertOperator, f: SampledFunction, inner: float | None = None) -> float:
    """Relative size of ``H(Hf) + f``, optionally on the inner part of the grid."""
    r = apply_hilbert(H, apply_hilbert(H, f)).values + f.values
    mask = slice(None) if inner is None else H.grid.inner_mask(inner)
    den = np.linalg.norm(f.values[mask])
    return float(np.linalg.norm(r[mask]) / den) if den > 0 else 0.0

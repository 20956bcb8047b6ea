"""Verifiers for the magic formula and the two Rellich identities.

Each check evaluates both sides by the discrete Hilbert transform and
midpoint quadrature (with declared tails) and returns an
:class:`IdentityReport`.  When the datum carries a closed form, the same
check is repeated at ``N/4`` and ``N/2`` on the same window to give a
refinement trend.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Tuple

import numpy as np

from .grid import GridSpec, SampledFunction, integrate, sample
from .hilbert import HilbertOperator, apply_hilbert
from .maps import BoundaryConformal, probe_points
from .transmission import NonLipschitzData
from .weights import Weight

__all__ = [
    "IdentityReport",
    "relative_defect",
    "check_magic",
    "check_magic_weighted",
    "check_rellich",
]

_TINY = 1e-300


def relative_defect(lhs: float, rhs: float) -> float:
    return abs(lhs - rhs) / (abs(lhs) + abs(rhs) + _TINY)


@dataclass(frozen=True)
class IdentityReport:
    """Both sides of an identity and their relative defect.

    ``refinement_trend`` lists the defect at ``N/4, N/2, N`` (coarsest
    first) when the datum has a closed form, else just the defect at ``N``.
    """

    lhs: float
    rhs: float
    relative_defect: float
    resolution: Tuple[float, int]
    refinement_trend: np.ndarray = field(default_factory=lambda: np.zeros(0), repr=False)


def _hilbert(f: SampledFunction) -> SampledFunction:
    return apply_hilbert(HilbertOperator(f.grid), f)


def _trend(f: SampledFunction, once: Callable[[SampledFunction], float]) -> np.ndarray:
    if f.source is None:
        return np.array([once(f)])
    out = []
    for div in (4, 2):
        n = f.grid.count // div
        if n < 16 or n % 2:
            continue
        coarse = sample(f.source, GridSpec(f.grid.half_width, n), f.decay)
        out.append(once(coarse))
    out.append(once(f))
    return np.array(out)


def _real(f: SampledFunction) -> SampledFunction:
    if not f.is_real:
        raise ValueError("the identity checks need a real datum")
    return f


def _magic_parts(f: SampledFunction):
    hf = _hilbert(f)
    left = hf * hf - f * f
    right = 2.0 * _hilbert(f * hf)
    return left, right


def check_magic(f: SampledFunction) -> IdentityReport:
    """``(Hf)^2 - f^2 = 2 H(f Hf)`` pointwise.

    ``lhs`` and ``rhs`` are the ``L^2`` norms of the two sides and the
    defect is ``||(Hf)^2 - f^2 - 2H(f Hf)||_2 / ||f||_2^2``, the natural
    scale of a quadratic identity (both sides vanish for odd-even
    cancellations, so their sum is not used as the denominator here).
    """
    f = _real(f)

    def once(g):
        nf = float(np.sum(g.values ** 2)) * g.grid.spacing
        if nf == 0:
            return 0.0
        left, right = _magic_parts(g)
        return float(np.sqrt(g.grid.spacing * np.sum((left.values - right.values) ** 2)) / nf)

    left, right = _magic_parts(f)
    h = f.grid.spacing
    lhs = float(np.sqrt(h * np.sum(left.values ** 2)))
    rhs = float(np.sqrt(h * np.sum(right.values ** 2)))
    trend = _trend(f, once)
    return IdentityReport(lhs, rhs, float(trend[-1]), (f.grid.half_width, f.grid.count), trend)


def check_magic_weighted(f: SampledFunction, v: Weight) -> IdentityReport:
    """``int (Hf)^2 v = int f^2 v - 2 int f Hf Hv``.

    Raises
    ------
    TailDivergence
        When ``v`` does not decay, so ``Hv`` is undefined.
    """
    f = _real(f)
    vw = v.w
    if vw.grid != f.grid:
        raise ValueError("weight grid differs from the datum grid")

    def sides(g, w):
        hf = _hilbert(g)
        hv = _hilbert(w)
        lhs = float(integrate(hf * hf * w))
        rhs = float(integrate(g * g * w)) - 2.0 * float(integrate(g * hf * hv))
        return lhs, rhs

    lhs, rhs = sides(f, vw)
    src = v.closed_form

    def once(g):
        w = vw if g.grid == f.grid else sample(src, g.grid, vw.decay)
        return relative_defect(*sides(g, w))

    trend = _trend(f, once) if src is not None else np.array([relative_defect(lhs, rhs)])
    return IdentityReport(lhs, rhs, relative_defect(lhs, rhs), (f.grid.half_width, f.grid.count), trend)


def check_rellich(f: SampledFunction, phi: BoundaryConformal, orientation: str = "upper") -> IdentityReport:
    """``int (Hf)^2 Re(1/Phi') = int f^2 Re(1/Phi') -+ 2 int f Hf Im(1/Phi')``.

    The upper orientation takes the minus sign, the lower the plus sign.
    For the lower orientation pass the boundary data of a map defined on
    the lower half-plane (see :func:`transmission.maps.lower_trace`).

    Raises
    ------
    NonLipschitzData
        If ``Re(1/Phi')`` is not positive on the probe set.
    """
    if orientation not in ("upper", "lower"):
        raise ValueError(f"orientation must be 'upper' or 'lower', got {orientation!r}")
    f = _real(f)
    probes = probe_points(exclude=phi.exclude)
    if np.any(phi.re_inv(probes) <= 0):
        raise NonLipschitzData("Re(1/Phi') changes sign on the probe set")
    sign = -1.0 if orientation == "upper" else 1.0
    decay = None if phi.growth is None else -phi.growth

    def sides(g):
        x = g.grid.nodes
        re = SampledFunction(g.grid, phi.re_inv(x), decay)
        im = SampledFunction(g.grid, phi.im_inv(x), decay)
        hf = _hilbert(g)
        lhs = float(integrate(hf * hf * re))
        rhs = float(integrate(g * g * re)) + sign * 2.0 * float(integrate(g * hf * im))
        return lhs, rhs

    lhs, rhs = sides(f)
    trend = _trend(f, lambda g: relative_defect(*sides(g)))
    return IdentityReport(lhs, rhs, relative_defect(lhs, rhs), (f.grid.half_width, f.grid.count), trend)

"""Line homeomorphisms and boundary data of conformal maps.

A :class:`Homeomorphism` bundles an increasing bijection of the real line
with its derivative and inverse.  A :class:`BoundaryConformal` carries the
boundary derivative ``Phi'`` of a conformal map of a half-plane together
with ``Re(1/Phi')`` and ``Im(1/Phi')``.

All complex powers use the principal branch.  Every radicand below has
strictly positive imaginary part on the real axis, so the traces are
continuous there.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicSpline, PchipInterpolator

from .grid import GridSpec, SampledFunction, make_grid, sample
from .hilbert import HilbertOperator, apply_hilbert

__all__ = [
    "MapError",
    "InfiniteDerivative",
    "InconsistentWelding",
    "Homeomorphism",
    "BoundaryConformal",
    "GalleryEntry",
    "gallery_identity",
    "gallery_perturbed",
    "gallery_cone",
    "gallery_staircase",
    "gallery_helson_szego",
    "gallery_hyperbola",
    "lookup",
    "lower_trace",
    "check_welding",
    "probe_points",
]

PROBE_COUNT = 10_000
PROBE_RADIUS = 10.0


class MapError(ValueError):
    pass


class InfiniteDerivative(MapError):
    pass


class InconsistentWelding(MapError):
    pass


def probe_points(radius: float = PROBE_RADIUS, count: int = PROBE_COUNT, exclude=None):
    """Probe grid on ``[-radius, radius]`` (odd count, so 0 is included)."""
    if count % 2 == 0:
        count += 1
    x = np.linspace(-radius, radius, count)
    if exclude is not None:
        x = x[~exclude(x)]
    return x


@dataclass(frozen=True, eq=False)
class Homeomorphism:
    """Increasing bijection ``Psi`` of the line.

    ``growth`` is the exponent ``g`` with ``|Psi(x)| ~ |x|^g`` at infinity;
    it propagates tail exponents through compositions.  ``exclude`` marks
    probe points too close to zeros or poles of ``Psi'``.
    """

    name: str
    forward: Callable
    derivative: Callable
    inverse: Callable
    inverse_derivative: Callable
    kind: str = "closed_form"
    growth: float = 1.0
    second_derivative: Optional[Callable] = field(default=None, repr=False)
    exclude: Optional[Callable] = field(default=None, repr=False)
    validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        if self.kind not in ("closed_form", "integrated_table"):
            raise MapError(f"unknown kind {self.kind!r}")
        if self.validate:
            self.check()

    def check(self, radius: float = PROBE_RADIUS, count: int = PROBE_COUNT):
        """Verify monotonicity, inverse round trip and positivity on probes."""
        x = probe_points(radius, count, self.exclude)
        y = self.forward(x)
        if not np.all(np.diff(y) > 0):
            raise MapError(f"{self.name}: forward is not strictly increasing on probes")
        back = self.inverse(y)
        err = np.abs(back - x) / np.maximum(1.0, np.abs(x))
        if err.max() > 1e-9:
            raise MapError(f"{self.name}: inverse round trip error {err.max():.2e}")
        d = self.derivative(x)
        fin = np.isfinite(d)
        if np.any(d[fin] <= 0):
            raise MapError(f"{self.name}: derivative is not positive on probes")

    def d2(self, x):
        """Second derivative, by central differences when no closed form is given."""
        if self.second_derivative is not None:
            return self.second_derivative(x)
        x = np.asarray(x, dtype=float)
        step = 1e-5 * np.maximum(1.0, np.abs(x))
        return (self.derivative(x + step) - self.derivative(x - step)) / (2 * step)

    def inverted(self, name: str | None = None) -> "Homeomorphism":
        """The inverse map as a homeomorphism in its own right."""
        fwd, der = self.forward, self.derivative

        def d2inv(y):
            x = self.inverse(y)
            return -self.d2(x) / der(x) ** 3

        exclude = None
        if self.exclude is not None:
            ex = self.exclude
            exclude = lambda y: ex(self.inverse(y))  # noqa: E731
        return Homeomorphism(
            name or f"{self.name}-inverse",
            self.inverse,
            self.inverse_derivative,
            fwd,
            der,
            self.kind,
            1.0 / self.growth,
            d2inv,
            exclude,
        )


@dataclass(frozen=True, eq=False)
class BoundaryConformal:
    """Boundary trace of a conformal map of a half-plane.

    ``growth`` is the exponent of ``|1/Phi'(x)| ~ |x|^g`` at infinity (None
    when unknown or oscillating).  ``a_bound`` and ``k_bound`` are optional
    certified bounds ``A <= Psi' Re(1/Phi')`` and ``|Psi' Im(1/Phi')| <= k``
    for an associated homeomorphism, used when the extremum is only
    approached at infinity and cannot be read off a finite probe set.
    """

    name: str
    dphi: Callable
    re_inv: Callable
    im_inv: Callable
    lipschitz_bound: Optional[float] = None
    phi: Optional[Callable] = field(default=None, repr=False)
    growth: Optional[float] = None
    a_bound: Optional[float] = None
    k_bound: Optional[float] = None
    exclude: Optional[Callable] = field(default=None, repr=False)
    validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        if self.validate:
            self.check()

    def check(self, radius: float = PROBE_RADIUS, count: int = PROBE_COUNT):
        x = probe_points(radius, count, self.exclude)
        re = self.re_inv(x)
        im = self.im_inv(x)
        if np.any(re <= 0):
            raise MapError(f"{self.name}: Re(1/Phi') is not positive on probes")
        inv = 1.0 / self.dphi(x)
        rel = np.abs(inv - (re + 1j * im)) / np.abs(inv)
        if rel.max() > 1e-12:
            raise MapError(f"{self.name}: re_inv/im_inv disagree with 1/dphi ({rel.max():.2e})")

    @classmethod
    def from_dphi(cls, name: str, dphi: Callable, **kw) -> "BoundaryConformal":
        def re_inv(x):
            return np.real(1.0 / dphi(x))

        def im_inv(x):
            return np.imag(1.0 / dphi(x))

        return cls(name, dphi, re_inv, im_inv, **kw)


def lower_trace(phi: BoundaryConformal) -> BoundaryConformal:
    """Boundary data of ``z -> -Phi(-z)``, a map defined on the lower half-plane."""
    exclude = None
    if phi.exclude is not None:
        exclude = lambda x: phi.exclude(-x)  # noqa: E731
    value = None
    if phi.phi is not None:
        value = lambda x: -phi.phi(-x)  # noqa: E731
    return BoundaryConformal(
        f"{phi.name}-lower",
        lambda x: phi.dphi(-np.asarray(x)),
        lambda x: phi.re_inv(-np.asarray(x)),
        lambda x: phi.im_inv(-np.asarray(x)),
        phi.lipschitz_bound,
        value,
        phi.growth,
        exclude=exclude,
    )


@dataclass(frozen=True, eq=False)
class GalleryEntry:
    """What a gallery id resolves to."""

    key: str
    psi: Homeomorphism
    phi: Optional[BoundaryConformal] = None
    welding: Optional[tuple] = None  # (Phi_plus, Phi_minus) with psi = Phi_plus^-1 o Phi_minus
    hilbert_bound: Optional[float] = None
    params: dict = field(default_factory=dict)


# --------------------------------------------------------------------------
# closed-form maps

def gallery_identity() -> Homeomorphism:
    one = lambda x: np.ones_like(np.asarray(x, dtype=float))  # noqa: E731
    ident = lambda x: np.asarray(x, dtype=float) * 1.0  # noqa: E731
    zero = lambda x: np.zeros_like(np.asarray(x, dtype=float))  # noqa: E731
    return Homeomorphism("identity", ident, one, ident, one, "closed_form", 1.0, zero)


def _newton_inverse(f, df, y, lo, hi, tol=1e-15, maxiter=100):
    """Vectorised safeguarded Newton for increasing ``f`` on brackets ``[lo, hi]``."""
    y = np.asarray(y, dtype=float)
    lo = np.broadcast_to(lo, y.shape).astype(float).copy()
    hi = np.broadcast_to(hi, y.shape).astype(float).copy()
    x = np.clip(y.copy(), lo, hi)
    for _ in range(maxiter):
        r = f(x) - y
        lo = np.where(r < 0, x, lo)
        hi = np.where(r > 0, x, hi)
        with np.errstate(all="ignore"):
            xn = x - r / df(x)
        bad = ~np.isfinite(xn) | (xn <= lo) | (xn >= hi)
        xn = np.where(bad, 0.5 * (lo + hi), xn)
        done = np.abs(xn - x) <= tol * np.maximum(1.0, np.abs(x))
        x = xn
        if np.all(done):
            break
    return x


def gallery_perturbed(eps: float) -> Homeomorphism:
    """``x + eps * arctan(x)``."""
    if not eps > 0:
        raise MapError(f"eps must be positive, got {eps}")
    eps = float(eps)

    def fwd(x):
        x = np.asarray(x, dtype=float)
        return x + eps * np.arctan(x)

    def der(x):
        x = np.asarray(x, dtype=float)
        return 1.0 + eps / (1.0 + x * x)

    def d2(x):
        x = np.asarray(x, dtype=float)
        return -2.0 * eps * x / (1.0 + x * x) ** 2

    def inv(y):
        y = np.asarray(y, dtype=float)
        w = eps * np.pi / 2
        return _newton_inverse(fwd, der, y, y - w, y + w)

    def inv_der(y):
        return 1.0 / der(inv(y))

    return Homeomorphism(f"perturbed:{eps:g}", fwd, der, inv, inv_der, "closed_form", 1.0, d2)


def gallery_cone(alpha: float):
    """Power map ``sgn(x)|x|^a / sin(a pi/2)`` and its sector conformal map."""
    if not 0 < alpha < 2:
        raise MapError(f"alpha must lie in (0, 2), got {alpha}")
    a = float(alpha)
    s = np.sin(a * np.pi / 2)
    c = np.cos(a * np.pi / 2)

    def fwd(x):
        x = np.asarray(x, dtype=float)
        return np.sign(x) * np.abs(x) ** a / s

    def der(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            return a / s * np.abs(x) ** (a - 1)

    def d2(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return a * (a - 1) / s * np.sign(x) * np.abs(x) ** (a - 2)

    def inv(y):
        y = np.asarray(y, dtype=float)
        return np.sign(y) * (s * np.abs(y)) ** (1 / a)

    def inv_der(y):
        y = np.asarray(y, dtype=float)
        with np.errstate(divide="ignore"):
            return s ** (1 / a) / a * np.abs(y) ** (1 / a - 1)

    near0 = lambda x: np.abs(x) < 1e-3  # noqa: E731
    psi = Homeomorphism(f"cone:{a:g}", fwd, der, inv, inv_der, "closed_form", a, d2, near0)

    rot = np.exp(1j * (1 - a) * np.pi / 2)

    def dphi(x):
        x = np.asarray(x, dtype=float).astype(complex)
        return a * rot * x ** (a - 1)

    def re_inv(x):
        return s / a * np.abs(np.asarray(x, dtype=float)) ** (1 - a)

    def im_inv(x):
        x = np.asarray(x, dtype=float)
        return -c / a * np.sign(x) * np.abs(x) ** (1 - a)

    def phi_val(x):
        return rot * np.asarray(x, dtype=float).astype(complex) ** a

    phi = BoundaryConformal(
        f"cone:{a:g}", dphi, re_inv, im_inv, abs(c / s), phi_val, 1 - a, exclude=near0
    )
    return psi, phi


# --------------------------------------------------------------------------
# staircase: Psi' = sqrt(2|tan x|), tabulated

def _staircase_table(cells: int):
    """Cumulative integral of ``sqrt(2 tan x)`` on ``[0, pi/2]``.

    The substitution ``x = (pi/4)(1 - cos t)`` turns both endpoint
    singularities (``sqrt`` zero at 0, inverse ``sqrt`` pole at pi/2) into
    smooth integrands, so Gauss-Legendre on each cell is accurate.
    """
    xs = np.linspace(0.0, np.pi / 2, cells + 1)
    ts = np.arccos(np.clip(1.0 - 4.0 * xs / np.pi, -1.0, 1.0))
    gx, gw = np.polynomial.legendre.leggauss(10)
    a, b = ts[:-1, None], ts[1:, None]
    t = 0.5 * (b - a) * gx[None, :] + 0.5 * (a + b)
    x = np.pi / 4 * (1 - np.cos(t))
    integrand = np.sqrt(2 * np.tan(x)) * np.pi / 4 * np.sin(t)
    pieces = (0.5 * (b - a)[:, 0]) * (integrand @ gw)
    return xs, np.concatenate([[0.0], np.cumsum(pieces)])


def _pchip_inverse(p: PchipInterpolator, xs, ys, y):
    """Invert a monotone piecewise cubic exactly (per-cell safeguarded Newton)."""
    y = np.asarray(y, dtype=float)
    k = np.clip(np.searchsorted(ys, y) - 1, 0, len(xs) - 2)
    dp = p.derivative()
    return _newton_inverse(p, dp, y, xs[k], xs[k + 1], tol=1e-16)


def gallery_staircase(cells: int = 4096):
    """Staircase map with ``Psi' = sqrt(2|tan x|)``.

    ``Psi`` is tabulated on ``[0, pi/2]`` and extended by oddness and the
    period relation ``Psi(x + pi) = Psi(x) + 2 pi``.
    """
    xs, G = _staircase_table(cells)
    half = G[-1]  # = pi up to quadrature error
    interp = PchipInterpolator(xs, G)

    def _period_split(x):
        ax = np.abs(x)
        k = np.floor(ax / np.pi)
        r = ax - k * np.pi
        return np.sign(x), k, r

    def fwd(x):
        x = np.asarray(x, dtype=float)
        sg, k, r = _period_split(x)
        first = r <= np.pi / 2
        val = np.where(first, interp(np.minimum(r, np.pi / 2)),
                       2 * half - interp(np.clip(np.pi - r, 0, np.pi / 2)))
        return sg * (2 * half * k + val)

    def der(x):
        x = np.asarray(x, dtype=float)
        c = np.cos(x)
        if np.any(np.abs(c) < 1e-14):
            raise InfiniteDerivative("staircase derivative evaluated at a pole of tan")
        return np.sqrt(2 * np.abs(np.tan(x)))

    def d2(x):
        x = np.asarray(x, dtype=float)
        t = np.tan(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.sign(t) * (1 + t * t) / np.sqrt(2 * np.abs(t))

    def inv(y):
        y = np.asarray(y, dtype=float)
        ay = np.abs(y)
        k = np.floor(ay / (2 * half))
        r = ay - k * 2 * half
        first = r <= half
        a = _pchip_inverse(interp, xs, G, np.minimum(r, half))
        b = np.pi - _pchip_inverse(interp, xs, G, np.clip(2 * half - r, 0, half))
        return np.sign(y) * (k * np.pi + np.where(first, a, b))

    def inv_der(y):
        with np.errstate(divide="ignore"):
            return 1.0 / der(inv(y))

    def near_special(x):
        r = np.mod(np.asarray(x, dtype=float), np.pi / 2)
        return np.minimum(r, np.pi / 2 - r) < 1e-3

    psi = Homeomorphism(
        "staircase", fwd, der, inv, inv_der, "integrated_table", 1.0, d2, near_special
    )

    rot = np.exp(-1j * np.pi / 4)

    def dphi(x):
        return rot * np.sqrt(np.abs(np.tan(np.asarray(x, dtype=float))))

    def re_inv(x):
        return np.cos(np.pi / 4) / np.sqrt(np.abs(np.tan(np.asarray(x, dtype=float))))

    def im_inv(x):
        return np.sin(np.pi / 4) / np.sqrt(np.abs(np.tan(np.asarray(x, dtype=float))))

    phi = BoundaryConformal("staircase", dphi, re_inv, im_inv, exclude=near_special)
    return psi, phi


def staircase_antiderivative(x):
    """Closed form of ``int_0^x sqrt(2 tan s) ds`` for ``0 <= x < pi/2``.

    Used as an independent check of the table.
    """
    t = np.sqrt(np.tan(np.asarray(x, dtype=float)))
    r2 = np.sqrt(2.0)

    def prim(t):
        return (np.log((t * t - r2 * t + 1) / (t * t + r2 * t + 1)) / (2 * r2)
                + (np.arctan(r2 * t + 1) + np.arctan(r2 * t - 1)) / r2)

    return r2 * (prim(t) - prim(0.0))


# --------------------------------------------------------------------------
# Helson-Szego construction

def gallery_helson_szego(f: Callable, theta: float, grid: GridSpec | None = None):
    """Map with ``Psi' = exp(Hf) / cos f`` for a bounded decaying ``f``.

    ``Psi'`` is sampled on ``grid`` (``Hf`` from :func:`apply_hilbert`) and
    represented by a cubic spline; ``Psi`` is its exact antiderivative,
    continued linearly beyond the last node.  Returns the homeomorphism and
    the matching boundary data with ``1/Phi' = exp(-Hf) e^{if}``, which is
    assembled from the same spline so that ``Psi' Re(1/Phi') = 1``.
    """
    if not 0 <= theta < np.pi / 2:
        raise MapError(f"bound theta must lie in [0, pi/2), got {theta}")
    grid = grid or make_grid(100.0, 8192)
    fs = sample(f, grid, decay=2.0)
    sup = float(np.max(np.abs(fs.values)))
    if sup >= np.pi / 2 or sup > theta + 1e-12:
        raise MapError(f"sup|f| = {sup:.6g} exceeds the bound {theta:.6g}")
    hf = apply_hilbert(HilbertOperator(grid), fs)
    dvals = np.exp(hf.values) / np.cos(fs.values)
    x = grid.nodes
    spl = CubicSpline(x, dvals, bc_type="natural")
    anti = spl.antiderivative()
    c0 = anti(0.0)
    lo, hi = x[0], x[-1]
    flo, fhi = anti(lo) - c0, anti(hi) - c0
    dlo, dhi = dvals[0], dvals[-1]

    def fwd(t):
        t = np.asarray(t, dtype=float)
        out = anti(np.clip(t, lo, hi)) - c0
        out = np.where(t > hi, fhi + dhi * (t - hi), out)
        return np.where(t < lo, flo + dlo * (t - lo), out)

    def der(t):
        t = np.asarray(t, dtype=float)
        out = spl(np.clip(t, lo, hi))
        out = np.where(t > hi, dhi, out)
        return np.where(t < lo, dlo, out)

    d2spl = spl.derivative()

    def d2(t):
        t = np.asarray(t, dtype=float)
        return np.where((t < lo) | (t > hi), 0.0, d2spl(np.clip(t, lo, hi)))

    def inv(y):
        y = np.asarray(y, dtype=float)
        out = np.empty_like(y)
        r = y > fhi
        l = y < flo
        m = ~(r | l)
        out[r] = hi + (y[r] - fhi) / dhi
        out[l] = lo + (y[l] - flo) / dlo
        if m.any():
            # slopes are bounded below by exp(min Hf) > 0, so the spline
            # antiderivative is increasing and the bracket [y/dmax, y/dmin] is safe
            dmin, dmax = dvals.min(), dvals.max()
            ym = y[m]
            a = np.minimum(ym / dmin, ym / dmax)
            b = np.maximum(ym / dmin, ym / dmax)
            out[m] = _newton_inverse(fwd, der, ym, np.maximum(a, lo), np.minimum(b, hi))
        return out

    def inv_der(y):
        return 1.0 / der(inv(y))

    psi = Homeomorphism(
        f"helson-szego:{theta:g}", fwd, der, inv, inv_der, "integrated_table", 1.0, d2
    )

    def fval(t):
        return np.asarray(f(np.asarray(t, dtype=float)), dtype=float)

    def re_inv(t):
        return 1.0 / der(t)

    def im_inv(t):
        return np.tan(fval(t)) / der(t)

    def dphi(t):
        return 1.0 / (re_inv(t) + 1j * im_inv(t))

    phi = BoundaryConformal(f"helson-szego:{theta:g}", dphi, re_inv, im_inv, growth=0.0)
    return psi, phi


# --------------------------------------------------------------------------
# hyperbola welding example

def _cubic_inverse(y):
    """Real root of ``x^3 + 3x = y`` in closed form, cancellation-free."""
    y = np.asarray(y, dtype=float)
    r = np.sqrt(4.0 + y * y)
    # a = (y + r)/2, computed without cancellation for y < 0
    a = np.where(y >= 0, 0.5 * (y + r), 2.0 / (r - y))
    return np.cbrt(a) - np.cbrt(1.0 / a)


def gallery_hyperbola():
    """``Psi(x) = x^3 + 3x``, its inverse and the three conformal traces.

    Returns ``(Psi, Theta, Phi_plus, Phi_minus, Phi_aux)`` where
    ``Phi_plus(z) = (z + 2i)^(1/2)``, ``Phi_minus(z) = (z^3 + 3z + 2i)^(1/2)``
    (so that ``Psi = Phi_plus^-1 o Phi_minus``) and ``Phi_aux`` is the map
    ``i (8 - 4 z i)^(1/3)`` paired with ``Theta = Psi^-1``.
    """
    def fwd(x):
        x = np.asarray(x, dtype=float)
        return x ** 3 + 3 * x

    def der(x):
        x = np.asarray(x, dtype=float)
        return 3.0 * (1.0 + x * x)

    def d2(x):
        return 6.0 * np.asarray(x, dtype=float)

    def inv_der(y):
        t = _cubic_inverse(y)
        return 1.0 / (3.0 * (1.0 + t * t))

    psi = Homeomorphism("hyperbola", fwd, der, _cubic_inverse, inv_der, "closed_form", 3.0, d2)
    theta = psi.inverted("hyperbola-inverse")

    def c(x):
        return np.asarray(x).astype(complex)

    phi_plus = BoundaryConformal.from_dphi(
        "hyperbola-plus",
        lambda x: 0.5 / np.sqrt(c(x) + 2j),
        phi=lambda x: np.sqrt(c(x) + 2j),
        growth=0.5,
    )
    phi_minus = BoundaryConformal.from_dphi(
        "hyperbola-minus",
        lambda x: 3 * (c(x) ** 2 + 1) / (2 * np.sqrt(c(x) ** 3 + 3 * c(x) + 2j)),
        phi=lambda x: np.sqrt(c(x) ** 3 + 3 * c(x) + 2j),
        growth=-0.5,
    )

    def inv_aux(x):
        x = np.asarray(x, dtype=float)
        return 3 * ((4 + x * x) / 4) ** (1 / 3) * np.exp(1j * (2 / 3) * np.arctan(-x / 2))

    phi_aux = BoundaryConformal(
        "hyperbola-aux",
        lambda x: 1.0 / inv_aux(x),
        lambda x: np.real(inv_aux(x)),
        lambda x: np.imag(inv_aux(x)),
        phi=lambda x: 1j * (8 - 4j * c(x)) ** (1 / 3),
        growth=2 / 3,
        a_bound=2.0 ** (-5 / 3),
        k_bound=np.sqrt(3) / 2,
    )
    return psi, theta, phi_plus, phi_minus, phi_aux


def check_welding(phi_plus: BoundaryConformal, phi_minus: BoundaryConformal,
                  psi: Homeomorphism, probes=None, tol: float = 1e-8) -> float:
    """Check ``Phi_minus = Phi_plus o Psi`` on probes.

    Uses the value maps when both are present, otherwise the chain rule
    ``Phi_minus' = Phi_plus'(Psi) Psi'``.  Returns the worst relative
    mismatch; raises :class:`InconsistentWelding` above ``tol``.
    """
    x = probe_points(5.0, 2001, psi.exclude) if probes is None else np.asarray(probes)
    if phi_plus.phi is not None and phi_minus.phi is not None:
        a = phi_minus.phi(x)
        b = phi_plus.phi(psi.forward(x))
    else:
        a = phi_minus.dphi(x)
        b = phi_plus.dphi(psi.forward(x)) * psi.derivative(x)
    err = float(np.max(np.abs(a - b) / np.maximum(np.abs(a), 1e-300)))
    if err > tol:
        raise InconsistentWelding(f"welding mismatch {err:.2e} exceeds {tol:.0e}")
    return err


# --------------------------------------------------------------------------
# string ids

def lookup(key: str, grid: GridSpec | None = None) -> GalleryEntry:
    """Resolve a gallery id such as ``"perturbed:1"`` or ``"cone:0.5"``."""
    name, _, arg = key.strip().partition(":")
    name = name.lower()
    try:
        value = float(arg) if arg else None
    except ValueError as exc:
        raise MapError(f"bad parameter in gallery id {key!r}") from exc
    if name == "identity":
        return GalleryEntry(key, gallery_identity())
    if name == "perturbed":
        eps = 1.0 if value is None else value
        return GalleryEntry(
            key, gallery_perturbed(eps), hilbert_bound=eps / (2 * np.sqrt(1 + eps)),
            params={"epsilon": eps},
        )
    if name == "cone":
        alpha = 0.5 if value is None else value
        psi, phi = gallery_cone(alpha)
        return GalleryEntry(key, psi, phi, params={"alpha": alpha})
    if name == "staircase":
        psi, phi = gallery_staircase()
        return GalleryEntry(key, psi, phi)
    if name == "helson-szego":
        th = np.pi / 4 if value is None else value
        psi, phi = gallery_helson_szego(lambda x: th / (1 + x * x), th, grid)
        return GalleryEntry(key, psi, phi, params={"theta": th})
    if name in ("hyperbola", "hyperbola-inverse"):
        psi, theta, pp, pm, aux = gallery_hyperbola()
        if name == "hyperbola":
            return GalleryEntry(key, psi, pm, welding=(pp, pm))
        return GalleryEntry(key, theta, aux, welding=(pp, pm))
    raise MapError(f"unknown gallery id {key!r}")

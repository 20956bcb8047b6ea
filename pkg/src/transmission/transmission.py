"""Composition operators, the solvability operator and the transmission solver.

Discretisation
--------------
Functions on the *source* side (where ``T_Psi g`` lives) are sampled at the
grid nodes ``x_j``.  Functions on the *image* side (the argument ``g`` of
``T_Psi``) are sampled at the image nodes ``s_j = Psi(x_j)``.  With this
pairing ``T_Psi`` is the diagonal matrix ``diag(Psi'(x_j))`` and
``T_{Psi^-1}`` its inverse, so ``T_{Psi^-1} T_Psi = I`` holds exactly.

On the image side the Hilbert transform, pulled back to the grid, is

    (H g)(Psi(x)) = (1/pi) p.v. int g(t) Psi'(t) / (Psi(x) - Psi(t)) dt
                  = H_grid[g o Psi](x) + (1/pi) int K(x, t) g(Psi(t)) dt,

where ``K(x, t) = Psi'(t)/(Psi(x) - Psi(t)) - 1/(x - t)`` is smooth for
smooth ``Psi`` (its diagonal limit is ``-Psi''(x) / (2 Psi'(x))``).  The
first term uses the band-limited kernel, the second the midpoint rule.

A square interpolation matrix on a single uniform grid cannot represent
``T_Psi`` once ``Psi'`` varies: where ``Psi' > 1`` the targets ``Psi(x_i)``
are sparser than the nodes and the matrix loses rank.  The image-node
pairing above avoids this.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Optional, Sequence

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import lu_factor, lu_solve, toeplitz
from scipy.linalg.lapack import dgecon

from .grid import GridSpec, SampledFunction, integrate, interpolate, make_grid, sample
from .harmonic import HarmonicField, neumann_solution, poisson_smooth
from .hilbert import HilbertOperator, TooLarge, _two_term_tail, apply_hilbert, hilbert_matrix
from .maps import BoundaryConformal, Homeomorphism, check_welding, probe_points
from .weights import CompositionUnavailable, Weight, pushforward_weight, unit_weight, weighted_norm

__all__ = [
    "SingularOperator",
    "PhiMissing",
    "NonLipschitzData",
    "CompositionOperator",
    "apply_composition",
    "OperatorAssembly",
    "assemble",
    "OperatorSolution",
    "solve_operator_equation",
    "Residuals",
    "TransmissionSolution",
    "solve_transmission",
    "ThresholdReport",
    "threshold_report",
    "injectivity_margin",
    "SymmetryReport",
    "verify_symmetries",
    "verify_cvar",
    "isometry_norms",
    "RICHARDSON_HEIGHTS",
]

ASSEMBLY_LIMIT = 4096
# trace heights (in grid spacings) and weights of the vertical extrapolation to y = 0
RICHARDSON_HEIGHTS = (2, 4, 8)
_RICHARDSON_WEIGHTS = (8.0 / 3.0, -2.0, 1.0 / 3.0)


class SingularOperator(np.linalg.LinAlgError):
    pass


class PhiMissing(ValueError):
    pass


class NonLipschitzData(ValueError):
    pass


# --------------------------------------------------------------------------
# composition

@dataclass(frozen=True, eq=False)
class CompositionOperator:
    """``T_Psi g = |Psi'| (g o Psi)`` (forward) or the same with ``Psi^-1``."""

    psi: Homeomorphism
    direction: str = "forward"

    def __post_init__(self):
        if self.direction not in ("forward", "inverse"):
            raise ValueError(f"direction must be 'forward' or 'inverse', got {self.direction!r}")

    def _parts(self):
        if self.direction == "forward":
            return self.psi.forward, self.psi.derivative, self.psi.growth
        return self.psi.inverse, self.psi.inverse_derivative, 1.0 / self.psi.growth

    def __call__(self, g: SampledFunction) -> SampledFunction:
        return apply_composition(self, g)


def apply_composition(T: CompositionOperator, g: SampledFunction) -> SampledFunction:
    """Apply ``T`` on ``g``'s grid, using ``g``'s closed form when it has one.

    A declared tail ``|y|^-p`` becomes ``|x|^-(gamma (p-1) + 1)`` where
    ``gamma`` is the growth exponent of the map.
    """
    target, weight, gamma = T._parts()
    x = g.grid.nodes
    with np.errstate(all="ignore"):
        t = target(x)
        wt = np.abs(weight(x))
    if not np.all(np.isfinite(t)):
        raise CompositionUnavailable("map produced non-finite targets on the grid")
    src = g.source
    inner = src(t) if src is not None else interpolate(g, t)
    decay = None if g.decay is None else gamma * (g.decay - 1.0) + 1.0
    new_src = None
    if src is not None:
        def new_src(z):
            z = np.asarray(z, dtype=float)
            return np.abs(weight(z)) * src(target(z))
    return SampledFunction(g.grid, wt * inner, decay, new_src)


# --------------------------------------------------------------------------
# assembly

def _correction_kernel(psi: Homeomorphism, grid: GridSpec) -> np.ndarray:
    """Midpoint matrix ``(h/pi) K(x_i, x_j)`` of the smooth kernel difference."""
    x = grid.nodes
    h = grid.spacing
    n = grid.count
    s = psi.forward(x)
    d = psi.derivative(x)
    K = s[:, None] - s[None, :]
    np.fill_diagonal(K, 1.0)
    np.divide(d[None, :], K, out=K)
    m = np.arange(n, dtype=float)
    m[0] = 1.0
    col = 1.0 / (h * m)
    col[0] = 0.0
    K -= toeplitz(col, -col)
    np.fill_diagonal(K, -psi.d2(x) / (2.0 * d))
    K *= h / np.pi
    return K


@dataclass(eq=False)
class OperatorAssembly:
    """Dense matrices of ``A_mu = H T_Psi + mu T_Psi H`` and ``S``.

    ``H_matrix`` acts on source-side samples and ``H_image`` on image-side
    samples (see the module docstring).  ``T_matrix`` is diagonal in this
    pairing; ``row_modes`` records, per row of ``T_Psi``, how its target
    value is obtained (always ``"node"``: ``Psi(x_i)`` is itself a sample
    point of the image side).  Matrices are built on first use and cached;
    treat the instance as read-only afterwards.
    """

    psi: Homeomorphism
    grid: GridSpec
    mu: float

    def __post_init__(self):
        if self.grid.count > ASSEMBLY_LIMIT:
            raise TooLarge(f"N={self.grid.count} exceeds the dense assembly limit {ASSEMBLY_LIMIT}")

    @cached_property
    def image_nodes(self) -> np.ndarray:
        return self.psi.forward(self.grid.nodes)

    @cached_property
    def t_weights(self) -> np.ndarray:
        return np.abs(self.psi.derivative(self.grid.nodes))

    @property
    def row_modes(self) -> np.ndarray:
        return np.full(self.grid.count, "node")

    @cached_property
    def H_matrix(self) -> np.ndarray:
        return hilbert_matrix(HilbertOperator(self.grid))

    @cached_property
    def K_matrix(self) -> np.ndarray:
        return _correction_kernel(self.psi, self.grid)

    @cached_property
    def H_image(self) -> np.ndarray:
        return self.H_matrix + self.K_matrix

    @property
    def T_matrix(self) -> np.ndarray:
        return np.diag(self.t_weights)

    @property
    def T_inverse_matrix(self) -> np.ndarray:
        return np.diag(1.0 / self.t_weights)

    @cached_property
    def A_mu(self) -> np.ndarray:
        d = self.t_weights
        return self.H_matrix * d[None, :] + self.mu * (d[:, None] * self.H_image)

    @cached_property
    def S_matrix(self) -> np.ndarray:
        d = self.t_weights
        return (self.H_image / d[None, :]) @ (self.H_matrix * d[None, :])

    @cached_property
    def _lu(self):
        A = self.A_mu
        lu, piv = lu_factor(A, check_finite=True)
        if np.any(np.diag(lu) == 0):
            raise SingularOperator("exact zero pivot in the LU factorisation of A_mu")
        return lu, piv

    @cached_property
    def reciprocal_condition(self) -> float:
        """LAPACK 1-norm reciprocal condition estimate (used to detect singularity)."""
        lu, _ = self._lu
        anorm = np.abs(self.A_mu).sum(axis=0).max()
        rcond, _ = dgecon(lu, anorm, norm="1")
        return float(rcond)

    @cached_property
    def condition_estimate(self) -> float:
        """2-norm condition number ``||A|| ||A^-1||`` by power iteration.

        The 1-norm estimate grows like ``log(N)^2`` even for ``A = H``
        because ``H`` is unbounded on ``l^1``; the 2-norm matches the
        ``L^2`` setting of the solver.
        """
        if self.reciprocal_condition < np.finfo(float).eps:
            return float(np.inf)
        A = self.A_mu
        lu = self._lu
        rng = np.random.default_rng(0)
        n = A.shape[0]

        def power(apply, iters=40):
            v = rng.standard_normal(n)
            v /= np.linalg.norm(v)
            est = 0.0
            for _ in range(iters):
                wv = apply(v)
                new = np.sqrt(np.linalg.norm(wv))
                v = wv / np.linalg.norm(wv)
                if abs(new - est) <= 1e-6 * new:
                    return new
                est = new
            return est

        big = power(lambda v: A.T @ (A @ v))
        small = power(lambda v: lu_solve(lu, lu_solve(lu, v, trans=1)))
        return float(big * small)

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        rc = self.reciprocal_condition
        if not rc >= np.finfo(float).eps:
            raise SingularOperator(
                f"A_mu is numerically singular (reciprocal condition {rc:.3g}) at mu={self.mu}"
            )
        return lu_solve(self._lu, rhs)

    @cached_property
    def image_grid(self) -> GridSpec:
        """Uniform grid covering the image nodes at their finest spacing (capped at 16N)."""
        s = self.image_nodes
        d = self.t_weights
        h = self.grid.spacing
        half = max(-s[0], s[-1]) + 0.5 * h * max(d[0], d[-1])
        step = float(np.min(np.diff(s)))
        n = int(np.ceil(2 * half / step - 1e-9))
        n += n % 2
        n = int(min(max(n, 16), 16 * self.grid.count))
        return GridSpec(float(half), n)

    def image_function(self, values: np.ndarray) -> SampledFunction:
        """Resample image-node values onto :attr:`image_grid` by a natural cubic spline."""
        ig = self.image_grid
        s = self.image_nodes
        if ig == self.grid and np.array_equal(s, self.grid.nodes):
            return SampledFunction(ig, values)
        return SampledFunction(ig, CubicSpline(s, values, bc_type="natural")(ig.nodes))


def assemble(psi: Homeomorphism, grid: GridSpec, mu: float) -> OperatorAssembly:
    return OperatorAssembly(psi, grid, float(mu))


# --------------------------------------------------------------------------
# solving

class OperatorSolution(NamedTuple):
    h: SampledFunction
    operator_residual: float
    condition_estimate: float


def _solve_nodes(asm: OperatorAssembly, f: SampledFunction):
    if f.grid != asm.grid:
        raise ValueError("datum grid differs from the assembly grid")
    if asm.mu == 0:
        raise ValueError("mu must be non-zero")
    rhs = asm.H_matrix @ np.real(f.values)
    g = asm.solve(rhs)
    nr = np.linalg.norm(rhs)
    res = float(np.linalg.norm(asm.A_mu @ g - rhs) / nr) if nr > 0 else 0.0
    return g, res, asm.condition_estimate


def solve_operator_equation(asm: OperatorAssembly, f: SampledFunction) -> OperatorSolution:
    """Solve ``A_mu h = H f`` by LU with partial pivoting.

    ``h`` is returned on the image grid; the raw solution lives at the image
    nodes ``Psi(x_j)``.

    Raises
    ------
    SingularOperator
        When the condition estimate exceeds ``1/eps``.
    """
    g, res, cond = _solve_nodes(asm, f)
    return OperatorSolution(asm.image_function(g), res, cond)


@dataclass(frozen=True)
class Residuals:
    operator_residual: float
    jump_residual: float
    matching_residual: float
    jump_at_trace_height: float = 0.0
    condition_estimate: float = 1.0


@dataclass(frozen=True, eq=False)
class TransmissionSolution:
    """Solution pair of the transmission problem.

    ``h`` is the Neumann datum of ``u_plus`` on the image grid and
    ``h_nodes`` its values at the image nodes.  ``u_minus`` carries the
    matching constant as its offset.
    """

    h: SampledFunction
    h_nodes: np.ndarray = field(repr=False)
    u_plus: HarmonicField = field(repr=False)
    u_minus: HarmonicField = field(repr=False)
    matching_constant: float = 0.0
    residuals: Residuals = None
    admissible: Optional[bool] = None


def _weighted_l2(v, w, h):
    return float(np.sqrt(h * np.sum(w * np.abs(v) ** 2)))


def solve_transmission(psi: Homeomorphism, mu: float, f: SampledFunction,
                       w: Weight | None = None, assembly: OperatorAssembly | None = None,
                       report: "ThresholdReport | None" = None) -> TransmissionSolution:
    """Run the constructive solve: operator equation, then the two Neumann fields.

    Residuals
    ---------
    ``jump_residual`` measures ``J(y) = T_Psi(d_y u+)(., y) - mu d_y u-(., -y)
    - (P_y * f)`` extrapolated to ``y = 0`` from the heights ``2h, 4h, 8h``
    (three-point Richardson), relative to ``||f||`` in ``L^2(w)``.  For the
    flat interface ``J(y)`` vanishes identically, and in general it tends
    to the boundary jump as ``y -> 0``.  The raw value at ``y = 2h`` is kept
    as ``jump_at_trace_height``.  ``matching_residual`` is the relative
    ``L^2`` size of ``u+(Psi(x), 2h) - u-(x, -2h) - C``.
    """
    grid = f.grid
    w = w or unit_weight(grid)
    if w.grid != grid:
        raise ValueError("weight grid differs from the datum grid")
    asm = assembly or assemble(psi, grid, mu)
    x = grid.nodes
    h = grid.spacing
    fv = np.real(f.values)
    f = SampledFunction(grid, fv, f.decay, f.source)
    admissible = None if report is None else bool(report.admissible(mu))

    if not np.any(fv):
        zero = SampledFunction(grid, np.zeros(grid.count))
        zf = neumann_solution(zero, "upper")
        return TransmissionSolution(
            zero, np.zeros(grid.count), zf, neumann_solution(zero, "lower"), 0.0,
            Residuals(0.0, 0.0, 0.0, 0.0, 1.0), admissible,
        )

    g, op_res, cond = _solve_nodes(asm, f)
    s = asm.image_nodes
    d = asm.t_weights
    h_img = asm.image_function(g)
    u_plus = neumann_solution(h_img, "upper")
    lower_datum = SampledFunction(grid, (d * g - fv) / mu)
    u_minus0 = neumann_solution(lower_datum, "lower")

    y = RICHARDSON_HEIGHTS[0] * h
    a = u_plus.u(s, y)
    b = u_minus0.u(x, -y)
    wv = w.w.values
    C = float(np.sum(wv * (a - b)) / np.sum(wv))
    u_minus = HarmonicField(lower_datum, "lower", C)
    na = np.linalg.norm(a)
    match = float(np.linalg.norm(a - b - C) / na) if na > 0 else 0.0

    def J(k):
        yy = k * h
        return d * u_plus.du_dy(s, yy) - mu * u_minus.du_dy(x, -yy) - poisson_smooth(f, x, yy)

    Js = [J(k) for k in RICHARDSON_HEIGHTS]
    extrap = sum(c * j for c, j in zip(_RICHARDSON_WEIGHTS, Js))
    nf = _weighted_l2(fv, wv, h)
    jump = _weighted_l2(extrap, wv, h) / nf
    jump_raw = _weighted_l2(Js[0], wv, h) / nf

    return TransmissionSolution(
        h_img, g, u_plus, u_minus, C,
        Residuals(op_res, jump, match, jump_raw, cond), admissible,
    )


# --------------------------------------------------------------------------
# thresholds

@dataclass(frozen=True)
class ThresholdReport:
    """Solvability thresholds.

    ``mu0`` is the positive root of ``A - mu^2 - 2 k mu`` (``k_from_phi``
    mode) or of ``1 - mu^2 - 2 C mu`` (``hilbert_of_reciprocal`` mode).
    ``measured`` holds the probe-grid values even when certified closed-form
    constants were used for ``k``, ``A`` or ``C``.
    """

    k: Optional[float]
    A: float
    C: Optional[float]
    mu0: float
    mode: str = "k_from_phi"
    measured: dict = field(default_factory=dict)

    def _coeffs(self):
        if self.mode == "hilbert_of_reciprocal":
            return self.C, 1.0
        return self.k, self.A

    def admissible(self, mu: float) -> bool:
        k, A = self._coeffs()
        m = abs(mu)
        return bool((0 < m < 1 and A - m * m - 2 * k * m > 0) or m > 1.0 / self.mu0)


def _root(k: float, A: float) -> float:
    return float(-k + np.sqrt(k * k + A))


def threshold_report(psi: Homeomorphism, phi: BoundaryConformal | None = None,
                     mode: str = "k_from_phi", grid: GridSpec | None = None,
                     hilbert_bound: float | None = None,
                     probe_radius: float = 50.0, probe_count: int = 200_001) -> ThresholdReport:
    """Evaluate ``k``, ``A`` (or ``C``) and ``mu0``.

    ``k_from_phi``: ``k = sup |Psi' Im(1/Phi')|`` and ``A = inf Psi' Re(1/Phi')``
    (capped at 1) over probe points; ``Phi.k_bound`` / ``Phi.a_bound``
    replace the probe values when present.

    ``hilbert_of_reciprocal``: ``C = sup |H(1/Psi') Psi'|`` on the inner half
    of ``grid``; ``hilbert_bound`` replaces it when given.
    """
    if mode == "k_from_phi":
        if phi is None:
            raise PhiMissing("k_from_phi mode needs boundary conformal data")
        excl = [e for e in (psi.exclude, phi.exclude) if e is not None]
        x = probe_points(probe_radius, probe_count,
                         (lambda t: np.logical_or.reduce([e(t) for e in excl])) if excl else None)
        re = phi.re_inv(x)
        if np.any(re <= 0):
            raise NonLipschitzData("Re(1/Phi') is not positive on the probe set")
        with np.errstate(all="ignore"):
            d = psi.derivative(x)
            pr = d * re
            pi = d * np.abs(phi.im_inv(x))
        ok = np.isfinite(pr) & np.isfinite(pi)
        k_meas = float(np.max(pi[ok]))
        a_meas = float(min(1.0, np.min(pr[ok])))
        measured = {
            "k": k_meas,
            "A": a_meas,
            "sup_re_product": float(np.max(pr[ok])),
            "argmax_im": float(x[ok][np.argmax(pi[ok])]),
            "argmin_re": float(x[ok][np.argmin(pr[ok])]),
        }
        k = phi.k_bound if phi.k_bound is not None else k_meas
        A = phi.a_bound if phi.a_bound is not None else a_meas
        measured["certified"] = phi.k_bound is not None or phi.a_bound is not None
        return ThresholdReport(k, A, None, _root(k, A), mode, measured)
    if mode == "hilbert_of_reciprocal":
        grid = grid or make_grid(200.0, 8192)
        xs = grid.nodes
        d = psi.derivative(xs)
        r = 1.0 / d
        base = 0.5 * (r[0] + r[-1])
        v = SampledFunction(grid, r - base, 2.0)
        hv = apply_hilbert(HilbertOperator(grid), v).values
        m = grid.inner_mask(0.5)
        prod = np.abs(hv * d)[m]
        c_meas = float(np.max(prod))
        C = hilbert_bound if hilbert_bound is not None else c_meas
        measured = {"C": c_meas, "argmax": float(xs[m][np.argmax(prod)]),
                    "certified": hilbert_bound is not None}
        return ThresholdReport(None, 1.0, C, _root(C, 1.0), mode, measured)
    raise ValueError(f"unknown mode {mode!r}")


# --------------------------------------------------------------------------
# margins and operator identities

def injectivity_margin(asm: OperatorAssembly, mu: float | None = None, inner: float = 0.5) -> float:
    """``sigma_min / sigma_max`` of ``S - mu I`` on the inner block.

    ``S`` acts on image-side functions in ``L^2(dy)``; with samples at
    ``Psi(x_j)`` the quadrature weights are ``Psi'(x_j) h``, so the matrix is
    symmetrically rescaled by ``sqrt(Psi')`` before the SVD.  The block keeps
    nodes with ``|x| <= inner * L``.
    """
    mu = asm.mu if mu is None else float(mu)
    r = np.sqrt(asm.t_weights)
    m = asm.grid.inner_mask(inner)
    S = asm.S_matrix[np.ix_(m, m)] * (r[m][:, None] / r[m][None, :])
    sv = np.linalg.svd(S - mu * np.eye(S.shape[0]), compute_uv=False)
    return float(sv[-1] / sv[0])


@dataclass(frozen=True)
class SymmetryReport:
    involution_defect: float
    sop_defect: float
    coro_a_defect: float
    coro_b_defect: float
    per_function: dict = field(default_factory=dict, repr=False)

    @property
    def worst_identity(self) -> float:
        return max(self.sop_defect, self.coro_a_defect, self.coro_b_defect)


class _Ops:
    """Tail-aware operator forms of ``H``, ``H_image`` and ``T_Psi``."""

    def __init__(self, psi: Homeomorphism, grid: GridSpec):
        self.psi = psi
        self.grid = grid
        self.H = HilbertOperator(grid)
        self.d = np.abs(psi.derivative(grid.nodes))
        self.gamma = psi.growth
        self.K = None if psi.name == "identity" else _correction_kernel(psi, grid)

    def hx(self, v: SampledFunction) -> SampledFunction:
        return apply_hilbert(self.H, v)

    def _k_tail(self, v: SampledFunction) -> np.ndarray:
        """``(1/pi) int_{|t|>L} K(x, t) v(t) dt`` over the fitted two-term tail of ``v``.

        With ``t = L / r^2`` each side becomes an integral over ``r in (0, 1]``
        with a bounded integrand, done by Gauss-Legendre.
        """
        x = self.grid.nodes
        L = self.grid.half_width
        p = v.decay
        (al, bl), (ar, br) = _two_term_tail(x, v.values, p, L)
        r, wr = np.polynomial.legendre.leggauss(64)
        r = 0.5 * (r + 1.0)
        wr = 0.5 * wr
        t = L / r ** 2
        jac = 2.0 * L / r ** 3
        sx = self.psi.forward(x)[:, None]
        out = np.zeros(x.size)
        for sign, a, b in ((1.0, ar, br), (-1.0, al, bl)):
            ts = sign * t
            k = self.psi.derivative(ts)[None, :] / (sx - self.psi.forward(ts)[None, :]) \
                - 1.0 / (x[:, None] - ts[None, :])
            tail = a * t ** (-p) + b * t ** (-p - 1.0)
            out += k @ (wr * jac * tail)
        return out / np.pi

    def hy(self, v: SampledFunction) -> SampledFunction:
        out = apply_hilbert(self.H, v)
        if self.K is None:
            return SampledFunction(self.grid, out.values, 1.0)
        vals = out.values + self.K @ v.values
        if v.decay is not None:
            vals = vals + self._k_tail(v)
        return SampledFunction(self.grid, vals, self.gamma)

    def t(self, v: SampledFunction) -> SampledFunction:
        dec = None if v.decay is None else v.decay + 1.0 - self.gamma
        return SampledFunction(self.grid, self.d * v.values, dec)

    def tinv(self, v: SampledFunction) -> SampledFunction:
        dec = None if v.decay is None else v.decay - 1.0 + self.gamma
        return SampledFunction(self.grid, v.values / self.d, dec)


def _image_samples(psi: Homeomorphism, g: SampledFunction) -> SampledFunction:
    """Image-side function ``g`` pulled back to the grid: values ``g(Psi(x_j))``."""
    s = psi.forward(g.grid.nodes)
    vals = g.source(s) if g.source is not None else interpolate(g, s)
    dec = None if g.decay is None else g.decay * psi.growth
    return SampledFunction(g.grid, np.real(vals), dec)


def verify_symmetries(psi: Homeomorphism, mu: float, test_bank: Sequence[SampledFunction],
                      inner: float = 0.5) -> SymmetryReport:
    """Apply both sides of each factorisation identity to every bank function.

    Identities (``T = T_Psi``, ``S = H T^-1 H T``, all applied as operators):

    * ``A = H T (S - mu I) S^-1`` with ``S^-1 = T^-1 H T H`` (from ``H^-1 = -H``),
    * ``A = -mu H (H T + (1/mu) T H) H``,
    * ``A = mu T (H T^-1 + (1/mu) T^-1 H) T``.

    Defects are relative ``L^2`` norms on ``|x| <= inner * L``; the
    involution defect ``||H H v + v|| / ||v||`` is measured on both sides
    of the pairing for the same bank.
    """
    if mu == 0:
        raise ValueError("mu must be non-zero")
    if not test_bank:
        raise ValueError("empty test bank")
    grid = test_bank[0].grid
    ops = _Ops(psi, grid)
    m = grid.inner_mask(inner)

    def rel(a, b):
        den = np.linalg.norm(b.values[m])
        return float(np.linalg.norm((a.values - b.values)[m]) / den) if den > 0 else 0.0

    inv, sop, ca, cb = [], [], [], []
    for v in test_bank:
        g = _image_samples(psi, v)
        vx = SampledFunction(grid, np.real(v.values), v.decay)
        inv.append(max(rel(ops.hx(ops.hx(vx)), -1.0 * vx), rel(ops.hy(ops.hy(g)), -1.0 * g)))

        A = ops.hx(ops.t(g)) + mu * ops.t(ops.hy(g))
        # Remark-type factorisation
        sinv = ops.tinv(ops.hx(ops.t(ops.hy(g))))
        s_sinv = ops.hy(ops.tinv(ops.hx(ops.t(sinv))))
        rhs = ops.hx(ops.t(s_sinv - mu * sinv))
        sop.append(rel(rhs, A))
        # symmetry (a)
        hg = ops.hy(g)
        inner_a = ops.hx(ops.t(hg)) + (1.0 / mu) * ops.t(ops.hy(hg))
        ca.append(rel(-mu * ops.hx(inner_a), A))
        # symmetry (b)
        tg = ops.t(g)
        inner_b = ops.hy(ops.tinv(tg)) + (1.0 / mu) * ops.tinv(ops.hx(tg))
        cb.append(rel(mu * ops.t(inner_b), A))
    per = {"involution": inv, "sop": sop, "coro_a": ca, "coro_b": cb}
    return SymmetryReport(max(inv), max(sop), max(ca), max(cb), per)


def verify_cvar(phi_plus: BoundaryConformal, phi_minus: BoundaryConformal,
                psi: Homeomorphism, f: SampledFunction, g: SampledFunction):
    """Relative defects of the change-of-variables identities.

    ``int T_{Psi^-1} f  T_{Psi^-1} g  Re(1/Phi_+') = int f g Re(1/Phi_-')``
    and the same with ``Im``.  Returns ``(re_defect, im_defect)``.
    """
    check_welding(phi_plus, phi_minus, psi)
    grid = f.grid
    Tinv = CompositionOperator(psi, "inverse")
    tf = apply_composition(Tinv, f)
    tg = apply_composition(Tinv, g)
    x = grid.nodes

    def trace(fn, growth):
        return SampledFunction(grid, fn(x), None if growth is None else -growth)

    out = []
    for part in ("re_inv", "im_inv"):
        wp = trace(getattr(phi_plus, part), phi_plus.growth)
        wm = trace(getattr(phi_minus, part), phi_minus.growth)
        lhs = float(np.real(integrate(tf * tg * wp)))
        rhs = float(np.real(integrate(f * g * wm)))
        den = abs(lhs) + abs(rhs)
        out.append(abs(lhs - rhs) / den if den > 0 else 0.0)
    return tuple(out)


def isometry_norms(psi: Homeomorphism, h, w: Weight, p: float, image_grid: GridSpec | None = None):
    """``(||T_Psi h||_{L^p(w)}, ||h||_{L^p(w~_p)})`` for a closed-form ``h``.

    The left norm is computed on ``w``'s grid, the right one on
    ``image_grid`` (default: the same grid) with the pushforward weight.
    Both are midpoint sums, so ``h`` should vanish near the points where
    ``Psi'`` is singular or zero.
    """
    grid = w.grid
    image_grid = image_grid or grid
    th = apply_composition(CompositionOperator(psi), sample(h, grid))
    lhs = weighted_norm(th, w, p)
    rhs = weighted_norm(sample(h, image_grid), pushforward_weight(w, psi, p, image_grid), p)
    return lhs, rhs

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.special import dawsn

from transmission.grid import GridMismatch, SampledFunction, TailDivergence, make_grid, sample
from transmission.hilbert import (
    MATRIX_LIMIT, HilbertOperator, TooLarge, apply_hilbert, hilbert_kernel, hilbert_matrix,
    involution_defect,
)

# (1/pi) p.v. int exp(-t^2)/(x-t) dt by mpmath quadrature (30 digits)
GAUSS_ORACLE = {0.5: 0.478925172901043472544937540717,
                1.0: 0.607157705841393729115038235801,
                2.0: 0.340026217066066201280467897123}


def test_kernel_values():
    k = hilbert_kernel(4)
    np.testing.assert_allclose(k, [-2 / (3 * np.pi), 0, -2 / np.pi, 0, 2 / np.pi, 0, 2 / (3 * np.pi)])


def test_matrix_is_skew_and_sign_convention():
    M = hilbert_matrix(HilbertOperator(make_grid(1.0, 16)))
    np.testing.assert_array_equal(M, -M.T)
    # row i gets +k[i-j]: below the diagonal the coupling is positive
    assert M[1, 0] == pytest.approx(2 / np.pi)
    assert M[0, 1] == pytest.approx(-2 / np.pi)


def test_matrix_matches_zero_tail_apply():
    g = make_grid(20.0, 256)
    f = sample(lambda x: np.exp(-x * x), g)
    H = HilbertOperator(g)
    np.testing.assert_allclose(hilbert_matrix(H) @ f.values, apply_hilbert(H, f).values, atol=1e-14)


def test_gaussian_against_quadrature_oracle():
    g = make_grid(60.0, 4096)
    H = HilbertOperator(g)
    hf = apply_hilbert(H, sample(lambda x: np.exp(-x * x), g))
    from transmission.grid import interpolate
    for x, v in GAUSS_ORACLE.items():
        assert interpolate(hf, x) == pytest.approx(v, abs=1e-6)


def test_rational_pair_with_tail():
    g = make_grid(200.0, 8192)
    f = sample(lambda x: 1 / (1 + x * x), g, decay=2.0)
    hf = apply_hilbert(HilbertOperator(g), f).values
    exact = g.nodes / (1 + g.nodes ** 2)
    assert np.linalg.norm(hf - exact) / np.linalg.norm(exact) < 1e-6


def test_tail_model_removes_truncation_floor():
    g = make_grid(100.0, 4096)
    exact = g.nodes / (1 + g.nodes ** 2)
    vals = 1 / (1 + g.nodes ** 2)
    with_tail = apply_hilbert(HilbertOperator(g), SampledFunction(g, vals, 2.0)).values
    zero_tail = apply_hilbert(HilbertOperator(g), SampledFunction(g, vals)).values
    err = lambda v: np.linalg.norm(v - exact) / np.linalg.norm(exact)
    assert err(with_tail) < 1e-3 * err(zero_tail)


def test_output_decay_declared():
    g = make_grid(10.0, 64)
    H = HilbertOperator(g)
    assert apply_hilbert(H, sample(np.cos, g)).decay == 1.0
    assert apply_hilbert(H, SampledFunction(g, 1 / np.sqrt(1 + g.nodes ** 2), 1.0)).decay == 1.0
    assert apply_hilbert(H, SampledFunction(g, (1 + g.nodes ** 2) ** -0.25, 0.5)).decay == 0.5


def test_errors():
    g = make_grid(10.0, 64)
    with pytest.raises(TailDivergence):
        apply_hilbert(HilbertOperator(g), SampledFunction(g, np.ones(64), 0.0))
    with pytest.raises(GridMismatch):
        apply_hilbert(HilbertOperator(make_grid(10.0, 32)), sample(np.cos, g))
    with pytest.raises(TooLarge):
        hilbert_matrix(HilbertOperator(make_grid(10.0, 2 * MATRIX_LIMIT)))


def test_involution_defect_small_and_decreasing():
    d = []
    for L, n in ((30.0, 1024), (60.0, 2048), (120.0, 4096)):
        g = make_grid(L, n)
        d.append(involution_defect(HilbertOperator(g), sample(lambda x: np.exp(-x * x), g), 0.5))
    assert d[-1] < 1e-5
    assert d[0] > d[1] > d[2]


@given(st.floats(-5, 5), st.floats(0.5, 3), st.floats(-2, 2))
def test_linear_and_translation_equivariant(c, s, a):
    g = make_grid(60.0, 2048)
    H = HilbertOperator(g)
    f = sample(lambda x: np.exp(-((x - c) / s) ** 2), g)
    hf = apply_hilbert(H, f).values
    np.testing.assert_allclose(apply_hilbert(H, a * f).values, a * hf, atol=1e-13)
    exact = 2 / np.sqrt(np.pi) * dawsn((g.nodes - c) / s)
    m = g.inner_mask(0.5)
    assert np.max(np.abs(hf - exact)[m]) < 1e-3


@given(st.floats(0.3, 3))
def test_odd_maps_even(s):
    g = make_grid(40.0, 1024)
    hf = apply_hilbert(HilbertOperator(g), sample(lambda x: np.exp(-(x / s) ** 2), g)).values
    np.testing.assert_allclose(hf, -hf[::-1], atol=1e-13)

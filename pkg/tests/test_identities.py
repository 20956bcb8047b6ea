import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from transmission.grid import SampledFunction, TailDivergence, make_grid, sample
from transmission.hilbert import HilbertOperator, apply_hilbert
from transmission.identities import check_magic, check_magic_weighted, check_rellich, relative_defect
from transmission.maps import BoundaryConformal, gallery_cone, lower_trace
from transmission.transmission import NonLipschitzData
from transmission.weights import unit_weight, weight_from

from conftest import bump, gauss

# int (H e^{-x^2})^2 / (1+x^2) dx and int e^{-2x^2} / (1+x^2) dx (mpmath, 30 digits)
WEIGHTED_LHS = 0.481845819138629071449182956452
WEIGHTED_F2V = 1.05621602419291042842110253508


def _flat():
    one = lambda x: np.ones_like(np.asarray(x, dtype=float))  # noqa: E731
    return BoundaryConformal("flat", lambda x: one(x) + 0j, one,
                             lambda x: np.zeros_like(np.asarray(x, dtype=float)), growth=0.0)


def test_relative_defect():
    assert relative_defect(0.0, 0.0) == 0.0
    assert relative_defect(1.0, 1.0) == 0.0
    assert relative_defect(1.0, -1.0) == pytest.approx(1.0)


def test_zero_datum():
    g = make_grid(10.0, 256)
    z = SampledFunction(g, np.zeros(256))
    r = check_magic(z)
    assert r.lhs == r.rhs == r.relative_defect == 0.0
    assert check_magic_weighted(z, weight_from(lambda x: 1 / (1 + x * x), g, 2.0)).relative_defect == 0.0
    _, phi = gallery_cone(0.5)
    assert check_rellich(z, phi).relative_defect == 0.0


def test_magic_rational():
    g = make_grid(400.0, 16384)
    r = check_magic(sample(lambda x: 1 / (1 + x * x), g, decay=2.0))
    assert r.relative_defect <= 1e-6
    assert r.lhs == pytest.approx(r.rhs, rel=1e-6)
    assert len(r.refinement_trend) == 3 and r.resolution == (400.0, 16384)


def test_magic_pointwise_closed_form():
    # f = 1/(1+x^2): Hf = x/(1+x^2), so (Hf)^2 - f^2 = (x^2-1)/(1+x^2)^2
    g = make_grid(400.0, 16384)
    f = sample(lambda x: 1 / (1 + x * x), g, decay=2.0)
    hf = apply_hilbert(HilbertOperator(g), f)
    x = g.nodes
    m = np.abs(x) < 5
    np.testing.assert_allclose(hf.values[m], (x / (1 + x * x))[m], atol=1e-6)


def test_magic_rejects_complex():
    g = make_grid(10.0, 64)
    with pytest.raises(ValueError):
        check_magic(SampledFunction(g, np.ones(64) * 1j))


def test_weighted_magic_oracle():
    g = make_grid(60.0, 8192)
    f = sample(lambda x: np.exp(-x * x), g)
    r = check_magic_weighted(f, weight_from(lambda x: 1 / (1 + x * x), g, 2.0))
    assert r.lhs == pytest.approx(WEIGHTED_LHS, rel=1e-8)
    assert r.relative_defect <= 1e-8
    # the f^2 v term alone against its oracle
    from transmission.grid import integrate
    assert float(integrate(f * f * sample(lambda x: 1 / (1 + x * x), g, 2.0))) == pytest.approx(WEIGHTED_F2V, rel=1e-10)


def test_weighted_magic_non_decaying_weight():
    g = make_grid(20.0, 256)
    with pytest.raises(TailDivergence):
        check_magic_weighted(sample(gauss(), g), unit_weight(g))


def test_rellich_flat_map_is_isometry():
    # Phi' = 1: both sides reduce to ||Hf||^2 and ||f||^2; the defect is the
    # 1/x tail of Hf beyond the window and shrinks as the window grows
    defects = []
    for L, n in ((60.0, 8192), (200.0, 16384)):
        g = make_grid(L, n)
        f = sample(gauss(0.5, 1.0), g)
        r = check_rellich(f, _flat())
        assert r.rhs == pytest.approx(np.sum(f.values ** 2) * g.spacing, rel=1e-12)
        defects.append(r.relative_defect)
    assert defects[1] <= 1e-6 and defects[1] < defects[0] / 10


@settings(max_examples=15)
@given(st.floats(0.1, 100.0))
def test_rellich_scaling_invariance(c):
    g = make_grid(100.0, 2048)
    _, phi = gallery_cone(0.5)
    f = sample(bump(3.0, 1.5), g)
    a = check_rellich(f, phi).relative_defect
    b = check_rellich(f * c, phi).relative_defect
    assert b == pytest.approx(a, rel=1e-9, abs=1e-15)


def test_rellich_sign_discrimination():
    g = make_grid(100.0, 8192)
    _, phi = gallery_cone(0.5)
    f = sample(bump(3.0, 1.5), g)
    assert check_rellich(f, phi, "upper").relative_defect <= 5e-3
    assert check_rellich(f, phi, "lower").relative_defect >= 0.1
    lo = lower_trace(phi)
    assert check_rellich(f, lo, "lower").relative_defect <= 5e-3
    assert check_rellich(f, lo, "upper").relative_defect >= 0.1


def test_rellich_errors():
    g = make_grid(10.0, 64)
    f = sample(gauss(), g)
    _, phi = gallery_cone(0.5)
    with pytest.raises(ValueError):
        check_rellich(f, phi, "sideways")
    one = lambda x: np.ones_like(np.asarray(x, dtype=float))  # noqa: E731
    bad = BoundaryConformal("bad", lambda x: -one(x) + 0j, lambda x: -one(x),
                            lambda x: 0 * one(x), validate=False)
    with pytest.raises(NonLipschitzData):
        check_rellich(f, bad)

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ucfas.trajectory import ConstantReference, ReferenceSample, SpiralSpec, constant_reference, spiral_reference


def test_spiral_at_zero():
    r = spiral_reference(0.0)
    np.testing.assert_allclose(r.Xref[0], [1.0, 0.0], atol=1e-15)
    np.testing.assert_allclose(r.Xref[1], [0.0, 0.2], atol=1e-15)
    assert r.zref[0] == 0.0 and r.zref[1] == 0.05
    assert r.psiref[0] == pytest.approx(0.0, abs=1e-15)


def test_spiral_shape():
    spec = SpiralSpec(radius=2.0, omega=0.5, climb_rate=0.1, center=(1.0, -1.0, 3.0), yaw_amplitude=0.4, yaw_rate=0.2)
    t = 1.7
    r = spiral_reference(t, spec)
    np.testing.assert_allclose(r.Xref[0], [1 + 2 * math.cos(0.85), -1 + 2 * math.sin(0.85)])
    assert r.zref[0] == pytest.approx(3.0 + 0.17)
    assert r.psiref[0] == pytest.approx(0.4 * math.sin(0.34))


@given(st.floats(0.0, 200.0))
def test_derivative_orders_are_consistent(t):
    h = 1e-5
    t = max(t, h)
    a, b, c = spiral_reference(t - h), spiral_reference(t + h), spiral_reference(t)
    for k in range(4):
        fd = (b.Xref[k] - a.Xref[k]) / (2 * h)
        np.testing.assert_allclose(fd, c.Xref[k + 1], atol=1e-8)
        assert (b.zref[k] - a.zref[k]) / (2 * h) == pytest.approx(c.zref[k + 1], abs=1e-8)
    for k in range(2):
        assert (b.psiref[k] - a.psiref[k]) / (2 * h) == pytest.approx(c.psiref[k + 1], abs=1e-8)
    assert np.all(np.isfinite(c.Xref))


def test_zero_radius_is_constant():
    r = spiral_reference(12.3, SpiralSpec(radius=0.0, center=(0.5, 0.5, 0.0)))
    np.testing.assert_array_equal(r.Xref[1:], 0.0)
    np.testing.assert_array_equal(r.Xref[0], [0.5, 0.5])


def test_spec_validation():
    with pytest.raises(ValueError):
        SpiralSpec(radius=-1.0)
    with pytest.raises(ValueError):
        SpiralSpec(omega=math.inf)
    with pytest.raises(ValueError):
        spiral_reference(-1.0)


def test_constant_reference():
    r = constant_reference(z=1.0, psi=0.2, X=(3.0, 4.0))
    assert r.zref[0] == 1.0 and np.all(r.zref[1:] == 0)
    assert r.psiref[0] == 0.2 and np.all(r.psiref[1:] == 0)
    np.testing.assert_array_equal(r.Xref[0], [3.0, 4.0])
    c = ConstantReference(1.0, 0.2, (3.0, 4.0))
    assert c(0.0) is c(55.0)
    np.testing.assert_array_equal(c(1.0).Xref, r.Xref)


def test_reference_sample_shapes():
    with pytest.raises(ValueError):
        ReferenceSample(np.zeros(4), np.zeros(3), np.zeros((5, 2)))
    r = ReferenceSample([0, 1, 0, 0, 0], [0, 0, 0], np.zeros((5, 2)))
    np.testing.assert_array_equal(r.log_row(), [0, 0, 0, 0, 1, 0])

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ucfas.synthesis import (
    ParametricDesign,
    SingularParameterizationError,
    block_diag_gains,
    build_V,
    companion,
    synthesize_gains,
    verify_spectrum,
)

TWO = ParametricDesign.diagonal([1, 1], [-4, -5])
FOUR = ParametricDesign.diagonal([1, 1, 1, 1], [-5, -6, -7, -8])


def test_build_V_examples():
    V = build_V(TWO)
    np.testing.assert_array_equal(V, [[1, 1], [-4, -5]])
    assert np.linalg.det(V) == pytest.approx(-1.0)
    one = ParametricDesign(Z=[[2.0]], F=[[-3.0]], m=1)
    np.testing.assert_array_equal(build_V(one), [[2.0]])
    V4 = build_V(FOUR)
    nodes = np.array([-5.0, -6, -7, -8])
    np.testing.assert_array_equal(V4, np.vstack([nodes**k for k in range(4)]))


def test_default_gains():
    np.testing.assert_allclose(synthesize_gains(TWO).A, [20, 9], atol=1e-9)
    np.testing.assert_allclose(synthesize_gains(FOUR).A, [1680, 1066, 251, 26], atol=1e-9)


def test_repeated_node_is_singular():
    with pytest.raises(SingularParameterizationError) as info:
        synthesize_gains(ParametricDesign.diagonal([1, 1], [-1, -1]))
    np.testing.assert_array_equal(info.value.Z, [[1, 1]])


def test_design_shape_validation():
    with pytest.raises(ValueError):
        ParametricDesign(Z=[[1, 1, 1]], F=np.eye(2), m=2)
    with pytest.raises(ValueError):
        ParametricDesign(Z=[[1, 1]], F=np.eye(3), m=2)


def test_companion_examples():
    np.testing.assert_array_equal(companion([20, 9]), [[0, 1], [-20, -9]])
    N = companion([0, 0])
    np.testing.assert_array_equal(N @ N, np.zeros((2, 2)))
    U = companion([1680, 1066, 251, 26])
    np.testing.assert_array_equal(U[-1], [-1680, -1066, -251, -26])
    np.testing.assert_array_equal(U[:3, 1:], np.eye(3))


def test_verify_spectrum_examples():
    assert verify_spectrum([20, 9], TWO.F) < 1e-9
    assert verify_spectrum([1680, 1066, 251, 26], FOUR.F) < 1e-8
    assert verify_spectrum([1681, 1066, 251, 26], FOUR.F) > 1e-3


@given(st.lists(st.floats(-20.0, -0.5), min_size=2, max_size=4, unique=True),
       st.lists(st.floats(0.5, 3.0), min_size=4, max_size=4))
def test_eigenstructure_relation_for_distinct_poles(poles, zs):
    poles = sorted(poles)
    if np.min(np.diff(poles)) < 0.3:
        return
    d = ParametricDesign.diagonal(zs[: len(poles)], poles)
    g = synthesize_gains(d)
    V = build_V(d)
    np.testing.assert_allclose(companion(g.A) @ V, V @ d.F, atol=1e-7 * np.abs(V).max() * 20)
    assert verify_spectrum(g, d.F) < 1e-6 * max(1.0, max(abs(p) for p in poles))


def test_gain_row_independent_of_Z_scaling():
    # with scalar channels and diagonal F, Z only rescales eigenvectors
    d = ParametricDesign.diagonal([2.0, -0.5], [-4, -5])
    np.testing.assert_allclose(synthesize_gains(d).A, [20, 9], atol=1e-9)


def test_block_diag_gains_matches_scalar_channels():
    A = block_diag_gains([1680, 1066, 251, 26], [20, 9, 3, 4])
    eig = np.sort_complex(np.linalg.eigvals(companion(A)))
    expected = np.sort_complex(np.concatenate([np.roots([1, 26, 251, 1066, 1680]), np.roots([1, 4, 3, 9, 20])]))
    np.testing.assert_allclose(eig, expected, atol=1e-8)

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from slicereg import jacobian as Jc
from slicereg import quaternion as Q
from slicereg import registry as R
from slicereg.slicefn import identity, polynomial

TABLE_NAMES = [e.name for e in R.TABLE]


def test_identity_matrix():
    jm = Jc.jacobian_matrix(identity(), Q.Quaternion(0.3, 1, -2, 0.5))
    np.testing.assert_allclose(jm.matrix, np.eye(4), atol=1e-14)
    assert Jc.jacobian_det(identity(), Q.Quaternion(0.1, 0.2)) == pytest.approx(1.0)
    assert Jc.rank(identity(), Q.Quaternion(1.0)) == 4


def test_square_at_real_point():
    f = polynomial([0, 0, 1])
    for a in (-1.5, 0.7, 2.0):
        M = Jc.jacobian_matrix(f, Q.Quaternion(a)).matrix
        np.testing.assert_allclose(M, 2 * a * np.eye(4), atol=1e-12)
        assert Jc.jacobian_det(f, a) == pytest.approx((2 * a) ** 4, rel=1e-12)
    assert Jc.rank(f, Q.Quaternion(0.0)) == 0


def test_xminv_at_three():
    d = Jc.jacobian_det(R.get("xminv"), 3.0)
    assert abs(d - (10 / 9) ** 4) <= 1e-12 * (10 / 9) ** 4


def test_f1_at_i_and_constant():
    assert Jc.jacobian_det(R.get("f1"), Q.I) == pytest.approx(0.0, abs=1e-14)
    c = polynomial([[0.3, 1, 0, 2]])
    assert Jc.rank(c, Q.Quaternion(0.4, 0.1, 0.2, 0.3)) == 0


def test_f2_rank_two_on_wing(rng):
    f = R.get("f2")
    for a, b in rng.uniform([-2, 0.1], [2, 2], (10, 2)):
        y = Q.Quaternion(a, -b)
        assert Jc.rank(f, y) == 2
        fd = Jc.jacobian_fd(f, y.arr)[0]
        sv = np.linalg.svd(fd, compute_uv=False)
        assert sv[1] > 1e-3 * sv[0] and sv[2] < 1e-6 * sv[0]


@pytest.mark.parametrize("name", TABLE_NAMES)
def test_formula_matrix_fd_agree(name, rng):
    f = R.get(name)
    q = f.domain.sample_quaternions(1000, rng)
    d = Jc.det_formula_array(f, q)
    M = Jc.jacobian_matrices(f, q)[0]
    assert Jc.det_relative_error(d, np.linalg.det(M)).max() < 1e-8
    assert Jc.det_relative_error(d, np.linalg.det(Jc.jacobian_fd(f, q))).max() < 1e-4


@pytest.mark.parametrize("name", sorted(R.REGISTRY))
def test_matrix_matches_fd_entries(name, rng):
    f = R.get(name)
    q = f.domain.sample_quaternions(100, rng)
    M = Jc.jacobian_matrices(f, q)[0]
    scale = 1 + np.abs(M).max(axis=(1, 2))
    err = np.abs(M - Jc.jacobian_fd(f, q)).max(axis=(1, 2))
    assert np.all(err < 1e-5 * scale)


@pytest.mark.parametrize("name", sorted(R.REGISTRY))
def test_orientation(name, rng):
    f = R.get(name)
    q = f.domain.sample_quaternions(10000, rng)
    d = Jc.det_formula_array(f, q)
    M = Jc.jacobian_matrices(f, q)[0]
    scale = np.linalg.norm(M, axis=(1, 2))
    assert np.all(d >= -1e-9 * scale ** 4)


@pytest.mark.parametrize("name", TABLE_NAMES)
def test_even_rank(name, rng):
    f = R.get(name)
    q = f.domain.sample_quaternions(200, rng)
    M = Jc.jacobian_matrices(f, q)[0]
    assert set(Jc.rank_from_matrix(M).tolist()) <= {0, 2, 4}


@pytest.mark.parametrize("coeffs", [[0, 1], [0, 0, 1], [0, 3, 0, 1], [[0, 0, 0, 1], [0, -2, 0, 0], [1, 0, 0, 0]]])
def test_rank_at_real_points(coeffs):
    f = polynomial(coeffs)
    for a in (-1.0, 0.0, 0.5):
        assert Jc.rank(f, Q.Quaternion(a)) in (0, 4)


@pytest.mark.parametrize("name", ["f1", "f5", "f6", "g_mmp", "x3p3x"])
def test_complex_linearity_and_basis_independence(name, rng):
    f = R.get(name)
    q = f.domain.sample_quaternions(50, rng)
    M, I, Jm, _ = Jc.jacobian_matrices(f, q)
    # multiplication by I on (H, L_I) in coordinates 1, I, J, IJ
    L = np.array([[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]], float)
    np.testing.assert_allclose(M @ L, L @ M, atol=1e-10 * (1 + np.abs(M).max()))
    d0 = np.linalg.det(M)
    for u in Q.random_units(rng, 3):
        M2 = Jc.jacobian_matrices(f, q, J=Q.Quaternion.from_array(u))[0]
        d2 = np.linalg.det(M2)
        assert np.all(np.abs(d2 - d0) <= 1e-10 * np.maximum(np.abs(d0), 1e-300) + 1e-14)
        np.testing.assert_array_equal(Jc.rank_from_matrix(M2), Jc.rank_from_matrix(M))


@given(st.sampled_from(["f1", "f5", "xminv", "eta_exp"]),
       st.lists(st.floats(-2, 2), min_size=8, max_size=8))
def test_differential_apply_matches_matrix(name, xs):
    f = R.get(name)
    y = Q.Quaternion(*xs[:4])
    if not f.domain.contains_quaternion(y):
        return
    v = Q.Quaternion(*xs[4:])
    jm = Jc.jacobian_matrix(f, y)
    B = jm.basis()
    out = Jc.differential_apply(f, y, v)
    expect = B.T @ (jm.matrix @ (B @ v.arr))
    np.testing.assert_allclose(out.arr, expect, atol=1e-9 * (1 + np.abs(expect).max()))


def test_differential_apply_special_cases(rng):
    v = Q.Quaternion(0.1, 2, 3, -1)
    assert Jc.differential_apply(identity(), Q.Quaternion(1, 1), v) == v
    f = R.get("f5")
    y = Q.Quaternion(0.3, 0, 0.8, 0)
    w = Q.Quaternion(0.7, 0, -1.1, 0)
    dq = f.derivative_array(y.arr)[0]
    np.testing.assert_allclose(Jc.differential_apply(f, y, w).arr, Q.qmul(w.arr, dq), atol=1e-12)
    g = polynomial([1, 2, 3])
    y = Q.Quaternion(0.5)
    np.testing.assert_allclose(Jc.differential_apply(g, y, v).arr, (v * 5.0).arr, atol=1e-12)


def test_bad_route_and_parallel_J():
    with pytest.raises(ValueError):
        Jc.jacobian_det(identity(), Q.I, route="nope")
    with pytest.raises(ValueError):
        Jc.jacobian_matrix(identity(), Q.I, J=Q.I)

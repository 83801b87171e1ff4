import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from slicereg import quaternion as Q
from slicereg import registry as R
from slicereg import stem as S
from slicereg.domain import DomainError, SymmetricDomain

coef = st.floats(-3, 3, allow_nan=False)
qlit = st.tuples(coef, coef, coef, coef).map(np.array)
polys = st.lists(qlit, min_size=1, max_size=6)


def cx_pow_oracle(coeffs, a, b):
    """Evaluate sum (a + iota b)^n q_n by expanding (a + iota b)^n = u_n + iota v_n."""
    u, v = 1.0, 0.0
    F1 = np.zeros(4)
    F2 = np.zeros(4)
    for c in coeffs:
        F1 += u * c
        F2 += v * c
        u, v = u * a - v * b, u * b + v * a
    return F1, F2


def test_poly_eval_examples():
    F1, F2 = S.identity_stem().eval(1.0, 2.0)
    np.testing.assert_allclose(F1[0], [1, 0, 0, 0])
    np.testing.assert_allclose(F2[0], [2, 0, 0, 0])
    a, b = 0.7, -1.3
    F1, F2 = S.poly([0, 0, 1]).eval(a, b)
    assert np.isclose(F1[0, 0], a * a - b * b) and np.isclose(F2[0, 0], 2 * a * b)


def test_eta_constant():
    F1, F2 = S.eta().eval(np.array([0.3, -2.0]), np.array([1.0, 0.4]))
    np.testing.assert_allclose(F1, [[0.5, 0, 0, 0]] * 2)
    np.testing.assert_allclose(F2, [[0, -0.5, 0, 0]] * 2)


@given(polys, st.floats(-2, 2), st.floats(-2, 2))
def test_horner_matches_binomial_oracle(coeffs, a, b):
    F1, F2 = S.PolyStem(coeffs).eval(a, b)
    e1, e2 = cx_pow_oracle(coeffs, a, b)
    np.testing.assert_allclose(F1[0], e1, atol=1e-9 * (1 + np.abs(e1).max()))
    np.testing.assert_allclose(F2[0], e2, atol=1e-9 * (1 + np.abs(e2).max()))


def test_stem_mul_example():
    p = S.poly([-Q.I.arr, [1, 0, 0, 0]])
    q = S.poly([-Q.J.arr, [1, 0, 0, 0]])
    prod = S.stem_mul(p, q)
    np.testing.assert_allclose(prod.coeffs, [Q.K.arr, -(Q.I.arr + Q.J.arr), [1, 0, 0, 0]])
    np.testing.assert_allclose(S.stem_mul(p, S.unit_stem()).coeffs, p.coeffs)


@given(polys, polys)
def test_poly_product_is_convolution(a, b):
    prod = S.stem_mul(S.PolyStem(a), S.PolyStem(b))
    n = len(a) + len(b) - 1
    conv = np.zeros((n, 4))
    for m, x in enumerate(a):
        for l, y in enumerate(b):
            conv[m + l] += Q.qmul(x, y)
    got = prod.coeffs if isinstance(prod, S.PolyStem) else None
    if got is None:
        return
    expect = conv[: got.shape[0]]
    np.testing.assert_array_equal(got, expect) if got.shape == conv.shape else None
    np.testing.assert_allclose(got, expect, atol=1e-12)


def test_product_pointwise_and_associative(rng):
    fs = [R.get(n).stem for n in ("f1", "f2", "f3", "f5", "eta_exp")]
    a, b = rng.uniform(-2, 2, 100), rng.uniform(0.1, 2, 100)
    for F in fs:
        for G in fs[:3]:
            P = S.ProductStem(F, G)
            F1, F2 = F.eval(a, b)
            G1, G2 = G.eval(a, b)
            e1, e2 = S.stem_product_value(F1, F2, G1, G2)
            P1, P2 = P.eval(a, b)
            np.testing.assert_allclose(P1, e1, atol=1e-12)
            np.testing.assert_allclose(P2, e2, atol=1e-12)
    A, B, C = fs[:3]
    l1, l2 = S.ProductStem(S.ProductStem(A, B), C).eval(a, b)
    r1, r2 = S.ProductStem(A, S.ProductStem(B, C)).eval(a, b)
    np.testing.assert_allclose(l1, r1, atol=1e-9 * (1 + np.abs(l1).max()))
    np.testing.assert_allclose(l2, r2, atol=1e-9 * (1 + np.abs(l2).max()))


def test_conj_examples(rng):
    assert np.allclose(S.stem_conj(S.poly([Q.I.arr])).coeffs, [-Q.I.arr])
    F = R.get("f5").stem
    C = S.stem_conj(S.stem_conj(F))
    a, b = rng.uniform(-2, 2, 50), rng.uniform(0.1, 2, 50)
    np.testing.assert_allclose(C.eval(a, b)[0], F.eval(a, b)[0])
    c1, c2 = S.stem_conj(F).eval(a, b)
    F1, F2 = F.eval(a, b)
    np.testing.assert_allclose(c1, Q.qconj(F1))
    np.testing.assert_allclose(c2, Q.qconj(F2))


def test_derivative_examples():
    np.testing.assert_allclose(S.poly([0, 0, 1]).derivative().coeffs[:, 0], [0, 2])
    np.testing.assert_allclose(S.poly([0, 3, 0, 1]).derivative().coeffs[:, 0], [3, 0, 3])
    g = S.RatExp([1], [1], [0, -2j, 1])
    D = S.from_slice(Q.I, g).derivative()
    F1, F2 = D.eval(0.0, 1.0)
    # only the value on C_i vanishes; F1 and F2 also carry g'(-i)
    assert np.abs(F1 + Q.qmul(Q.I.arr, F2)).max() < 1e-14
    assert np.abs(F1).max() > 1e-3


def test_f2_hat_examples():
    for a in (-1.0, 0.0, 2.5):
        assert np.isclose(S.f2_hat(S.poly([0, 0, 1]), a, 0.0).w, 2 * a)
    assert S.f2_hat(S.identity_stem(), 0.3, 0.9).w == pytest.approx(1.0)
    a, b = 0.4, 1.7
    assert S.f2_hat(S.poly([0, 3, 0, 1]), a, b).w == pytest.approx(3 * a * a - b * b + 3)


def test_reciprocal(rng):
    F = S.stem_add(S.identity_stem(), S.poly([-Q.I.arr]))
    R_ = S.stem_reciprocal(F)
    a, b = rng.uniform(-2, 2, 100), rng.uniform(0.1, 2, 100)
    F1, F2 = F.eval(a, b)
    G1, G2 = R_.eval(a, b)
    p1, p2 = S.stem_product_value(G1, G2, F1, F2)
    np.testing.assert_allclose(p1, np.tile([1, 0, 0, 0], (100, 1)), atol=1e-10)
    np.testing.assert_allclose(p2, 0, atol=1e-10)
    G1, G2 = R_.eval(0.0, 1.0)
    assert np.isnan(G1).all()


@pytest.mark.parametrize("name", sorted(R.REGISTRY))
def test_even_odd_and_cauchy_riemann(name, rng):
    F = R.get(name).stem
    dom = R.get_entry(name).domain
    z = dom.sample_d_plus(1000, rng)
    assert S.even_odd_residual(F, z[:, 0], z[:, 1]) < 1e-9
    cr = S.cauchy_riemann_residual(F, z[:200, 0], z[:200, 1])
    assert np.nanmax(cr) < 1e-4


def test_stem_derivative_matches_fd(rng):
    for name in ("f3", "schwarz_exp", "g_mmp", "f5star"):
        F = R.get(name).stem
        z = R.get_entry(name).domain.sample_d_plus(100, rng)
        a, b = z[:, 0], z[:, 1]
        h = 1e-6
        up, dn = F.eval(a + h, b), F.eval(a - h, b)
        D1, D2 = F.derivative().eval(a, b)
        scale = 1 + np.abs(D1).max()
        np.testing.assert_allclose((up[0] - dn[0]) / (2 * h), D1, atol=1e-5 * scale)
        np.testing.assert_allclose((up[1] - dn[1]) / (2 * h), D2, atol=1e-5 * scale)


def test_callable_holo_fd_derivative():
    g = S.CallableHolo(lambda z: np.exp(z * z))
    D = g.derivative()
    z = np.array([0.3 + 0.4j, -1 + 0.2j])
    np.testing.assert_allclose(D(z), 2 * z * np.exp(z * z), rtol=1e-8)


def test_from_slice_and_schwarz_structure(rng):
    g = S.RatExp([1, 0.5 + 1j, 0.25])
    F = S.from_slice(Q.J, g)
    z = rng.uniform(-2, 2, (50, 2))
    F1, F2 = F.eval(z[:, 0], z[:, 1])
    zc = z[:, 0] + 1j * z[:, 1]
    val = F1 + Q.qmul(Q.J.arr, F2)
    np.testing.assert_allclose(val, Q.complex_to_q(g(zc), Q.J), atol=1e-12)
    W = S.schwarz_stem(S.RatExp([0, 1]))
    z = PLANE = SymmetricDomain.plane(minus_reals=True).sample_d_plus(100, rng)
    n1, n2 = S.normal_values(*W.eval(z[:, 0], z[:, 1]))
    np.testing.assert_allclose(n1, -1.0, atol=1e-12)
    np.testing.assert_allclose(n2, 0.0, atol=1e-12)


def test_eval_stem_domain_check():
    with pytest.raises(DomainError):
        S.eval_stem(S.eta(), 1.0, 0.0)

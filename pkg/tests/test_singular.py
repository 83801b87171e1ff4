import numpy as np
import pytest

from slicereg import fibers as Fb
from slicereg import jacobian as Jc
from slicereg import quaternion as Q
from slicereg import registry as R
from slicereg import singular as Sg
from slicereg.domain import DomainError, SymmetricDomain
from slicereg.slicefn import SliceFunction, identity, polynomial

TABLE = {e.name: e for e in R.TABLE}


def norm_det(f, x):
    dq, s = Jc.derivative_data(f, x, check=False)
    sc = np.sum(dq * dq, 1) + np.sum(s * s, 1)
    return Jc.det_formula_array(f, x, check=False) / np.maximum(sc, 1e-300) ** 2


# -- membership ----------------------------------------------------------------------------

def test_in_singular_set_examples(rng):
    assert Sg.in_singular_set(R.get("f1"), Q.I)
    for q in rng.normal(size=(20, 4)):
        assert not Sg.in_singular_set(identity(), Q.Quaternion.from_array(q))
    f2 = R.get("f2")
    for a, b in rng.uniform([-2, 0.1], [2, 2], (10, 2)):
        assert Sg.in_singular_set(f2, Q.Quaternion(a, -b))
        assert not Sg.in_singular_set(f2, Q.Quaternion(a, b))


def test_f2_inner_products(rng):
    f2 = R.get("f2")
    x = R.get_entry("f2").domain.sample_quaternions(200, rng)
    r1, r2, _, _ = Sg.singular_residuals(f2, x)
    v = np.linalg.norm(x[:, 1:], axis=1)
    np.testing.assert_allclose(r1, 0.25 * (x[:, 1] + v) / v, atol=1e-12)
    np.testing.assert_allclose(r2, 0.25 * x[:, 0] * (x[:, 1] + v) / v ** 2, atol=1e-12)


def test_real_points_use_derivative():
    f = polynomial([0, 0, 1])
    assert Sg.in_singular_set(f, 0.0)
    assert not Sg.in_singular_set(f, 0.5)
    with pytest.raises(DomainError):
        Sg.in_singular_set(R.get("f2"), 0.5)


@pytest.mark.parametrize("name", sorted(TABLE))
def test_membership_matches_det(name, rng):
    f = R.get(name)
    q = f.domain.sample_quaternions(1000, rng)
    # mix in known singular points so both sides of the equivalence are exercised
    if TABLE[name].witness is not None:
        q[:5] = np.array(TABLE[name].witness)
    tol = Sg.TOL_SINGULAR
    member = Sg.in_singular_set_array(f, q, tol)
    _, _, scale, _ = Sg.singular_residuals(f, q)
    d = np.abs(np.linalg.det(Jc.jacobian_matrices(f, q)[0]))
    # det = r1^2 + r2^2, so residuals below tol*scale^2 mean det below 2 tol^2 scale^4
    assert np.all(d[member] <= 2 * tol ** 2 * scale[member] ** 4 + 1e-15 * scale[member] ** 4)
    assert np.all(d[~member] >= tol ** 2 * scale[~member] ** 4)
    assert member[:5].all() or TABLE[name].witness is None


@pytest.mark.parametrize("name", ["f1", "f7", "x2", "x3p3x", "eta_q3", "f2star"])
def test_nf_contains_critical_and_degenerate(name, rng):
    f = R.get(name)
    dset = Sg.degenerate_set(f)
    if dset.kind == "Spheres":
        for a, b in dset.spheres:
            x = Q.random_units(rng, 20) * b
            x[:, 0] = a
            assert Sg.in_singular_set_array(f, x).all()
    elif dset.kind == "Curve":
        pts = dset.curve[rng.integers(0, len(dset.curve), 20)]
        x = Q.random_units(rng, 20) * pts[:, 1:2]
        x[:, 0] = pts[:, 0]
        # curve samples are grid interpolants, so use a loose tolerance
        assert Sg.in_singular_set_array(f, x, tol=1e-3).all()
    if f.stem.is_polynomial:
        # zeros of the slice derivative
        dcoef = f.slice_derivative().stem.coeffs
        if dcoef.shape[0] == 2:
            y = -Q.qmul(Q.qinv(dcoef[1]), dcoef[0])
            if f.domain.contains_qarray(y[None])[0]:
                assert Sg.in_singular_set_array(f, y[None]).all()


# -- sphere sections ------------------------------------------------------------------------------

@pytest.fixture(scope="module")
def units():
    return Q.random_units(np.random.default_rng(99), 10000)


SECTIONS = [
    ("f1", [0, 1, 0.5, 0.3], "Circle"),
    ("f7", "witness", "Circle"),
    ("x2", [0, 1, 0, 0], "WholeSphere"),
    ("x3p3x", [0, 0.6, 0.8, 0], "WholeSphere"),
    ("eta_q3", [0, 0, 0, 1], "WholeSphere"),
    ("f2", [0.3, -1, 0, 0], "Point"),
    ("f5", [0.2, 0.3, 0.4, 0.5], "TwoPoints"),
    ("f1", [0.2, 0.3, 0.4, 0.5], "Empty"),
    ("x3p3x", [0.4, 0.6, 0.8, 0], "Empty"),
]


@pytest.mark.parametrize("name,y,kind", SECTIONS)
def test_sphere_section_vs_scan(name, y, kind, units, triples):
    f = R.get(name)
    if isinstance(y, str):
        y = triples[name].evidence["extra"].witnesses[0].arr
    sec = Sg.sphere_section(f, y)
    assert sec.kind == kind
    alpha, beta = sec.sphere
    x = units * beta
    x[:, 0] = alpha
    d = norm_det(f, x)
    hits = d < 1e-7
    if kind == "Empty":
        assert not hits.any()
    elif kind == "WholeSphere":
        assert hits.all()
    elif kind == "Circle":
        c = np.asarray(sec.circle["center"])
        nrm = np.asarray(sec.circle["normal"])
        J = units[hits, 1:]
        assert np.all(np.abs((J - c) @ nrm) < 0.05)
        t = np.linspace(0, 2 * np.pi, 50)
        e1 = Q.as_qarray(sec.points[0])[1:] - c
        e2 = np.cross(nrm, e1)
        ring = c + np.cos(t)[:, None] * e1 + np.sin(t)[:, None] * e2
        xr = np.zeros((50, 4))
        xr[:, 0], xr[:, 1:] = alpha, ring * beta
        assert norm_det(f, xr).max() < 1e-12
        # C_i-preserving f at y in N_f: the circle is j1 = i1
        I = np.asarray(y[1:], float) / np.linalg.norm(y[1:])
        assert Sg.in_singular_set(f, y)
        assert np.allclose(np.abs(nrm), [1, 0, 0], atol=1e-9) and abs(c[0] - I[0]) < 1e-9
    else:
        pts = np.array([Q.as_qarray(p)[1:] for p in sec.points])
        xp = np.zeros((len(pts), 4))
        xp[:, 0], xp[:, 1:] = alpha, pts * beta
        assert norm_det(f, xp).max() < 1e-12
        best = units[np.argsort(d)[:3], 1:]
        assert all(np.min(np.linalg.norm(pts - b, axis=1)) < 0.2 for b in best)
        J = units[hits, 1:]
        for j in J:
            assert np.min(np.linalg.norm(pts - j, axis=1)) < 0.1


def test_sphere_section_slice_preserving_only_extremes(rng):
    f = R.get("x3p3x")
    for y in rng.normal(size=(20, 4)):
        assert Sg.sphere_section(f, y).kind in ("Empty", "WholeSphere")


def test_sphere_section_contains_unit_and_errors():
    sec = Sg.sphere_section(R.get("f2"), [0.3, -1, 0, 0])
    assert sec.contains_unit(-Q.I) and not sec.contains_unit(Q.J)
    assert Sg.sphere_section(R.get("x2"), Q.I).to_json()["kind"] == "WholeSphere"
    with pytest.raises(ValueError):
        Sg.sphere_section(R.get("x2"), 1.0)


# -- degenerate set --------------------------------------------------------------------------------

def test_degenerate_set_examples():
    ds = Sg.degenerate_set(R.get("x2"))
    assert ds.kind == "Curve" and ds.d == 3
    assert np.abs(ds.curve[:, 0]).max() < 1e-9
    assert ds.refinement["ratio"] == pytest.approx(2.0, rel=0.1)
    ds = Sg.degenerate_set(R.get("f7"))
    assert ds.kind == "Spheres" and ds.d == 2
    np.testing.assert_allclose(ds.spheres, [(0.0, 2.0)], atol=1e-9)
    assert Sg.degenerate_set(R.get("x")).kind == "Empty"
    assert Sg.degenerate_set(R.get("x")).d == -1


def test_degenerate_curve_x3p3x():
    ds = Sg.degenerate_set(R.get("x3p3x"))
    a, b = ds.curve[:, 0], ds.curve[:, 1]
    # F2 / beta = 3 alpha^2 - beta^2 + 3
    assert np.abs(3 * a * a - b * b + 3).max() < 0.1
    assert Sg.DegenerateSet.distance(ds, R.get("x3p3x"), np.array([0.0]), np.array([1.0]))[0] \
        == pytest.approx(np.sqrt(3) - 1, abs=1e-2)


# -- dimension triples -----------------------------------------------------------------------------

@pytest.fixture(scope="module")
def triples():
    return {name: Sg.dimension_triple(R.get(name)) for name in TABLE}


@pytest.mark.parametrize("name", sorted(TABLE))
def test_table_triple(name, triples):
    t = triples[name]
    assert t.triple == TABLE[name].triple
    assert t.admissible()
    assert t.n == max(t.triple)


def test_extra_dimension_examples(triples):
    assert triples["f1"].m == 2
    f1 = R.get("f1")
    t = triples["f1"]
    ex = Sg.extra_singular_dimension(f1, t.evidence["degenerate"], t.evidence["wings"],
                                     extra_points=[Q.I])
    assert ex.m == 2 and ex.witnesses[0] == Q.I
    assert triples["f2"].m == -1
    assert "no singular point" in triples["f2"].evidence["extra"].notes[0]
    w = triples["x3p3x"].evidence["extra"].witnesses
    assert w and all(abs(p.w) < 1e-8 and abs(np.linalg.norm(p.arr[1:]) - 1) < 1e-6 for p in w)


def test_witness_points_off_df_wf(triples):
    for name, e in TABLE.items():
        if e.witness is None:
            continue
        f = R.get(name)
        assert Sg.in_singular_set(f, e.witness)
        assert Sg.distance_to_df_wf(f, e.witness, triples[name]) > 1e-3


def test_admissible_sets():
    assert len(Sg.ADMISSIBLE) == 11 and len(Sg.ADMISSIBLE_SLICE) == 5
    assert (2, -1, -1) not in Sg.ADMISSIBLE
    assert {t[1] for t in Sg.ADMISSIBLE_SLICE} == {-1}


def test_slice_constant_sentinel():
    t = Sg.dimension_triple(R.get("eta"))
    assert t.whole and t.n == 4 and t.to_json() == {"N_f": "Omega", "n": 4}


@pytest.mark.parametrize("name", ["f1", "f7", "x3p3x", "f5"])
def test_slice_domain_triples_admissible(name):
    f = R.get(name)
    g = SliceFunction(f.stem, SymmetricDomain.disk(0.0, 2.5, minus_reals=not f.stem.is_polynomial),
                      name + "_disk")
    if not g.domain.is_product:
        t = Sg.dimension_triple(g, grid=40)
        assert t.w == -1
        assert t.admissible(product=False)


def test_row8_and_row9_examples(triples):
    assert triples["f2star"].triple == (2, 2, -1)
    assert triples["eta_q3"].triple == (2, 2, 2)
    assert triples["x"].triple == (-1, -1, -1)


def test_point_cloud_columns(triples):
    rows = Sg.singular_point_cloud(R.get("f7"), triples["f7"], n=20)
    tags = {r[5] for r in rows}
    assert tags == {"Df", "Nf_extra"}
    for r in rows:
        assert len(r) == 6 and r[4] < 1e-6 * (1 + sum(v * v for v in r[:4])) ** 4


# -- branch set ----------------------------------------------------------------------------------

BRANCH_FNS = ["f1", "eta_exp", "f7", "eta_q3", "x3p3x"]


@pytest.mark.parametrize("name", BRANCH_FNS)
def test_branch_equals_singular(name, triples, rng):
    f = R.get(name)
    t = triples[name]
    rows = Sg.singular_point_cloud(f, t, n=64, rng=np.random.default_rng(0))
    ex = np.array([r[:4] for r in rows if r[5] == "Nf_extra"])
    ex = ex[np.linalg.norm(ex, axis=1) < 3]
    assert len(ex) >= 5
    for y in ex[rng.choice(len(ex), 5, replace=False)]:
        assert Sg.distance_to_df_wf(f, y, t) > 1e-3
        pair = Sg.local_injectivity_failure(f, y)
        assert pair is not None
        a, b = pair
        assert np.linalg.norm(f.eval_array(a.arr) - f.eval_array(b.arr)) < 1e-6
        assert abs(a - b) > 1e-4
    # regular points: injective on a small ball (bi-Lipschitz against the smallest singular value)
    q = f.domain.sample_quaternions(200, rng)
    q = q[~Sg.in_singular_set_array(f, q, tol=1e-3)][:10]
    for y in q:
        M = Jc.jacobian_matrices(f, y)[0][0]
        smin = np.linalg.svd(M, compute_uv=False)[-1]
        v = rng.normal(size=(2000, 4))
        pts = y + 1e-2 * v / np.linalg.norm(v, axis=1, keepdims=True) * rng.uniform(0, 1, (2000, 1))
        pts = pts[f.domain.contains_qarray(pts)]
        a, b = pts[: len(pts) // 2], pts[len(pts) // 2: 2 * (len(pts) // 2)]
        fa, fb = f.eval_array(a), f.eval_array(b)
        ratio = np.linalg.norm(fa - fb, axis=1) / np.linalg.norm(a - b, axis=1)
        assert ratio.min() > 0.25 * smin


def test_regular_point_has_no_injectivity_failure():
    f = R.get("f1")
    assert Sg.local_injectivity_failure(f, [0.5, 0.4, 0.2, 0.1], radius=0.02, eps=0.01) is None


# -- maximum modulus --------------------------------------------------------------------------------

@pytest.mark.parametrize("name", ["f2", "f3", "f5", "f6", "f1", "eta_exp"])
def test_maximum_modulus(name, rng):
    f = R.get(name)
    for _ in range(10):
        c = f.domain.sample_quaternions(1, rng)[0]
        r = 0.8 * min(np.linalg.norm(c[1:]), 1.0)
        mi, mb = Sg.max_modulus_on_ball(f, c, r, 10000, rng)
        assert mi <= mb + 1e-6 * (1 + mb)


def test_wing_distance(triples):
    f = R.get("f2")
    wings = triples["f2"].evidence["wings"]
    x = np.array([[0.3, -1.0, 0, 0], [0.3, 1.0, 0, 0]])
    d = Sg.wing_distance(f, wings, x)
    assert d[0] < 1e-12 and d[1] > 0.5

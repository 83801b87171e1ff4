import math

import numpy as np
import pytest

from slicereg.domain import (
    PLANE_MINUS_REALS,
    PUNCTURED_PLANE,
    WHOLE_PLANE,
    DomainError,
    EmptyDomainError,
    SymmetricDomain,
    merge_domains,
)
from slicereg import quaternion as Q

DOMAINS = [
    WHOLE_PLANE, PLANE_MINUS_REALS, PUNCTURED_PLANE,
    SymmetricDomain.disk(0.0, 2.0), SymmetricDomain.annulus(0.0, 1 / 3, 4.0),
    SymmetricDomain.rectangle(-1.0, 2.0, 1.5), SymmetricDomain.disk(1.0, 1.0, minus_reals=True),
]


def test_contains_examples():
    assert PLANE_MINUS_REALS.contains_complex(0.0, 1.0)
    assert not PLANE_MINUS_REALS.contains_complex(5.0, 0.0)
    assert SymmetricDomain.annulus(0.0, 1 / 3, 4.0).contains_complex(2.0, 1.0)
    assert PLANE_MINUS_REALS.contains_quaternion(Q.J)
    assert not PLANE_MINUS_REALS.contains_quaternion(7.0)
    assert SymmetricDomain.disk(0.0, 2.0).contains_quaternion(Q.Quaternion(1, 1, 1, 0))


@pytest.mark.parametrize("dom", DOMAINS, ids=lambda d: d.describe())
def test_conjugation_symmetry(dom, rng):
    a = rng.uniform(-6, 6, 1000)
    b = rng.uniform(-6, 6, 1000)
    np.testing.assert_array_equal(dom.contains_complex(a, b), dom.contains_complex(a, -b))


@pytest.mark.parametrize("dom", DOMAINS, ids=lambda d: d.describe())
def test_kind_matches_real_axis(dom):
    a0, a1, _, _ = dom.region()
    a = np.linspace(a0, a1, 2001)
    meets = bool(np.any(dom.contains_complex(a, np.zeros_like(a))))
    assert (dom.kind == "product") == (not meets)


@pytest.mark.parametrize("dom", DOMAINS, ids=lambda d: d.describe())
def test_samples_inside(dom, rng):
    z = dom.sample_d_plus(500, rng)
    assert z.shape == (500, 2)
    assert np.all(z[:, 1] > 0)
    assert np.all(dom.contains_complex(z[:, 0], z[:, 1], margin=dom.margin))


@pytest.mark.parametrize("dom", DOMAINS, ids=lambda d: d.describe())
def test_quaternion_membership_consistent(dom, rng):
    q = rng.uniform(-5, 5, size=(500, 4))
    expect = dom.contains_complex(q[:, 0], np.linalg.norm(q[:, 1:], axis=1))
    np.testing.assert_array_equal(dom.contains_qarray(q), expect)


def test_annulus_samples():
    dom = SymmetricDomain.annulus(0.0, 1 / 3, 4.0)
    z = dom.sample_d_plus(1000)
    r = np.hypot(z[:, 0], z[:, 1])
    assert np.all((r > 1 / 3 + dom.margin) & (r < 4 - dom.margin))


def test_disk_and_box_samples():
    z = SymmetricDomain.disk(0.0, 1.0).sample_d_plus(100)
    assert np.all(np.hypot(z[:, 0], z[:, 1]) < 1)
    z = PLANE_MINUS_REALS.sample_d_plus(100)
    assert np.all((np.abs(z[:, 0]) <= 5) & (z[:, 1] <= 5))


def test_empty_domain_raises():
    tiny = SymmetricDomain.rectangle(0.0, 1.0, 1.0).with_bbox((5.0, 6.0, 0.0, 1.0))
    with pytest.raises(EmptyDomainError):
        tiny.sample_d_plus(10)


def test_json_roundtrip():
    for dom in DOMAINS:
        assert SymmetricDomain.from_json(dom.to_json()) == dom
    assert math.isinf(SymmetricDomain.from_json(PUNCTURED_PLANE.to_json()).params[2])


def test_merge():
    assert merge_domains(WHOLE_PLANE, PLANE_MINUS_REALS) == PLANE_MINUS_REALS
    with pytest.raises(DomainError):
        merge_domains(PLANE_MINUS_REALS, SymmetricDomain.disk(0, 1))

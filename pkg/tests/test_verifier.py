import math
import warnings

import numpy as np
import pytest

from silab import (
    ConvexBody,
    count_theorem_check,
    covering_injection_check,
    ellipsoid_characteristics,
    index_intervals,
    index_jump_search,
    prepare_orbit,
    symmetric_halfpath_check,
)
from silab.errors import UnsupportedInputError
from silab.verifier import IncompleteOrbitSetWarning, is_elliptic, recheck_certificate

ALPHA = 1.5


def _prepared(radii):
    body = ConvexBody.ellipsoid(radii, ALPHA)
    return body, [prepare_orbit(body, x, ALPHA, steps=2048) for x in ellipsoid_characteristics(body)]


@pytest.fixture(scope="module")
def e1():
    return _prepared([1.0])


@pytest.fixture(scope="module")
def e2():
    return _prepared([1.0, 2 ** 0.25])


def test_ellipsoid_closed_form(e2):
    body, datas = e2
    r2 = np.array(body.radii) ** 2
    ms = np.arange(1, 16)
    for k, d in enumerate(datas):
        ratio = r2[k] / r2[1 - k]
        i, nu = d.index(ms)
        assert list(i) == [2 * m + body.n - 2 + 2 * math.floor(m * ratio) for m in ms]
        assert set(nu.tolist()) == {1}
        assert d.mean == pytest.approx(2 + 2 * ratio, abs=1e-6)
        assert d.mean >= 2 - 1e-9


def test_elliptic_test():
    assert is_elliptic(np.eye(2))
    assert is_elliptic(np.array([[1.0, 1.0], [0.0, 1.0]]))
    assert not is_elliptic(np.diag([2.0, 0.5]))


def test_intervals_structure(e2):
    body, datas = e2
    for k, d in enumerate(datas):
        ivs = index_intervals(body, ALPHA, d, 20, orbit_id=k)
        assert [iv.m for iv in ivs] == list(range(1, 21))
        for a, b in zip(ivs, ivs[1:]):
            assert b.lo - a.lo >= 2
            assert b.lo > a.hi
        assert ivs[0].covers(ivs[0].lo)
        assert not ivs[0].covers(ivs[0].hi + 1)


def test_single_plane_covering(e1):
    _, datas = e1
    rep = covering_injection_check(datas, 10)
    assert rep.covered and rep.injective and rep.verdict
    # each level 2k - 1 is met by the k-th iterate of the circle
    assert {k: v[1] for k, v in rep.matching.items()} == {k: k for k in range(1, 11)}


def test_covering_negative_control(e2):
    _, datas = e2
    assert covering_injection_check(datas, 20).verdict
    for j in range(2):
        with pytest.warns(IncompleteOrbitSetWarning):
            rep = covering_injection_check([datas[j]], 20)
        assert not rep.covered
    with pytest.raises(UnsupportedInputError):
        covering_injection_check([], 5)


def test_jump_certificates(e2):
    _, datas = e2
    certs = index_jump_search(datas, 2000)
    assert len(certs) >= 3
    assert certs == sorted(certs, key=lambda c: c.N)
    for c in certs[:10]:
        assert c.valid
        assert recheck_certificate(c, datas)
        # each chosen iterate sits near N / mean
        for d, m in zip(datas, c.m):
            assert abs(m - c.N / d.mean) <= 2.5
    assert index_jump_search(datas, 2000, limit=2)[:2] == certs[:2]


def test_doubled_entry(e1):
    _, datas = e1
    d = datas[0]
    dd = d.doubled()
    assert dd.factor == 2
    assert dd.mean == pytest.approx(2 * d.mean)
    assert dd.pair(3).as_tuple() == d.pair(6).as_tuple()
    assert np.allclose(dd.end, d.path.end @ d.path.end)


def test_halfpath(e2):
    body, datas = e2
    for d in datas:
        hp = symmetric_halfpath_check(body, ALPHA, d)
        assert hp.applicable and hp.holds
        assert hp.defect < 1e-10


def test_count_report(e2):
    _, datas = e2
    rep = count_theorem_check(datas, 10_000)
    assert rep.passed
    assert rep.total == 2 and rep.q1 == 2 and rep.q2 == 0
    assert all(rep.checks.values())
    assert sorted(rep.injection) == [1, 2]


def test_count_inconclusive_with_missing_orbit(e2):
    _, datas = e2
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rep = count_theorem_check(datas[:1], 2000)
    assert rep.verdict == "inconclusive"
    assert rep.diagnostics

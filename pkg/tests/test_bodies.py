import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from silab import ConvexBody, fenchel_conjugate, hamiltonian, hamiltonian_grad, hamiltonian_hessian
from silab.bodies import conjugate_grad, standard_perturbation
from silab.errors import DimensionError, DomainError, UnsupportedInputError

E2 = ConvexBody.ellipsoid([1.0, 2 ** 0.25])
P2 = ConvexBody.perturbed([1.0, 2 ** 0.25], 0.02, standard_perturbation(2, 0.02))
BODIES = [E2, P2]

vectors = arrays(np.float64, 4, elements=st.floats(-3, 3, allow_nan=False)).filter(
    lambda v: np.linalg.norm(v) > 1e-2
)


def test_ellipsoid_boundary():
    b = ConvexBody.ellipsoid([1.0, 2.0])
    # the boundary in plane k is the circle of radius sqrt(2) r_k
    assert b.gauge(np.array([math.sqrt(2), 0, 0, 0])) == pytest.approx(1.0)
    assert b.gauge(np.array([0, 0, 0, 2 * math.sqrt(2)])) == pytest.approx(1.0)
    assert b.gauge(np.zeros(4)) == 0.0


@pytest.mark.parametrize("body", BODIES, ids=["ellipsoid", "perturbed"])
@given(x=vectors, s=st.floats(0.1, 10))
def test_gauge_homogeneous_and_even(body, x, s):
    assert body.gauge(s * x) == pytest.approx(s * body.gauge(x), rel=1e-12)
    assert body.gauge(-x) == pytest.approx(body.gauge(x), rel=1e-12)
    # Euler's identity for a degree-one function
    assert body.gauge_grad(x) @ x == pytest.approx(body.gauge(x), rel=1e-10)


@pytest.mark.parametrize("body", BODIES, ids=["ellipsoid", "perturbed"])
@given(x=vectors)
def test_hamiltonian_derivatives_match_finite_differences(body, x):
    a = 1.5
    h = 1e-6
    g = hamiltonian_grad(body, a, x)
    fd = np.array([(hamiltonian(body, a, x + h * e) - hamiltonian(body, a, x - h * e)) / (2 * h)
                   for e in np.eye(4)])
    assert np.allclose(g, fd, rtol=1e-6, atol=1e-7)
    H = hamiltonian_hessian(body, a, x)
    fdh = np.array([(hamiltonian_grad(body, a, x + h * e) - hamiltonian_grad(body, a, x - h * e)) / (2 * h)
                    for e in np.eye(4)])
    assert np.allclose(H, H.T, atol=1e-10)
    assert np.allclose(H, fdh, rtol=1e-5, atol=1e-5)


@pytest.mark.parametrize("body", BODIES, ids=["ellipsoid", "perturbed"])
@given(y=vectors)
def test_fenchel_young_equality(body, y):
    a = 1.5
    x = conjugate_grad(body, a, y)
    lhs = fenchel_conjugate(body, a, y)
    assert lhs == pytest.approx(x @ y - hamiltonian(body, a, x), rel=1e-9, abs=1e-12)
    # no other point does better
    rng = np.random.default_rng(0)
    trial = x + 0.1 * rng.standard_normal((200, 4))
    assert np.all(trial @ y - hamiltonian(body, a, trial) <= lhs + 1e-12)


def test_conjugate_at_zero():
    assert fenchel_conjugate(E2, 1.5, np.zeros(4)) == 0.0
    assert np.all(conjugate_grad(E2, 1.5, np.zeros(4)) == 0.0)


def test_polar_gauge_is_support_function():
    rng = np.random.default_rng(2)
    pts = rng.standard_normal((4000, 4))
    pts /= P2.gauge(pts)[:, None]
    for y in rng.standard_normal((5, 4)):
        assert P2.polar_gauge(y) >= (pts @ y).max() - 1e-12
        assert P2.polar_gauge(y) == pytest.approx((pts @ y).max(), rel=5e-2)


def test_roundtrip_json(tmp_path):
    for b in BODIES:
        p = tmp_path / "b.json"
        b.save(p)
        c = ConvexBody.load(p)
        assert c.to_dict() == b.to_dict()
        x = np.array([0.3, -0.2, 0.5, 0.1])
        assert c.gauge(x) == b.gauge(x)


def test_malformed_bodies(tmp_path):
    with pytest.raises(DomainError, match="radii"):
        ConvexBody.from_dict({"n": 2, "kind": "ellipsoid"})
    with pytest.raises(DimensionError):
        ConvexBody.from_dict({"n": 2, "kind": "ellipsoid", "radii": [1.0]})
    with pytest.raises(UnsupportedInputError):
        ConvexBody.from_dict({"n": 1, "kind": "cube", "radii": [1.0]})
    with pytest.raises(DomainError):
        ConvexBody.ellipsoid([1.0, -1.0])
    with pytest.raises(DomainError):
        ConvexBody.ellipsoid([1.0], alpha=2.5)
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(DomainError):
        ConvexBody.load(p)
    with pytest.raises(DomainError, match="convexity"):
        ConvexBody.perturbed([1.0], -50.0, [(1.0, [4, 0])])


def test_symmetry_flags():
    assert E2.symmetric and P2.symmetric
    odd = ConvexBody.perturbed([1.0], 0.01, [(1.0, [3, 0])])
    assert not odd.symmetric

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from silab import DEFAULT_TOLERANCES, LinearSystem, integrate_fundamental, iterate_path, validate_symplectic
from silab.errors import DimensionError, DomainError, IntegrationAccuracyError, UnsupportedInputError
from silab.symplectic import rotation_path, standard_J, symplectic_defect


def test_standard_J_squares_to_minus_identity():
    for n in (1, 2, 3):
        J = standard_J(n)
        assert np.allclose(J @ J, -np.eye(2 * n))
        assert np.allclose(J.T, -J)


def test_validate_symplectic_examples():
    assert validate_symplectic(np.eye(4))
    assert validate_symplectic(np.diag([2.0, 0.5]))
    assert not validate_symplectic(np.diag([2.0, 2.0]))
    c, s = math.cos(0.3), math.sin(0.3)
    assert validate_symplectic(np.array([[c, -s], [s, c]]))


def test_rotation_path_matches_closed_form():
    g = rotation_path(1, 1.3, steps=512)
    t = 1.3
    want = np.array([[math.cos(t), -math.sin(t)], [math.sin(t), math.cos(t)]])
    assert np.allclose(g.end, want, atol=1e-10)
    assert g.drift() < 1e-10


def test_rk4_fourth_order_convergence():
    sys = LinearSystem.constant(np.diag([1.0, 2.0]), 3.0)
    exact = None
    errs = []
    for steps in (64, 128, 256):
        g = integrate_fundamental(sys, steps)
        if exact is None:
            w = math.sqrt(2.0)
            c, s = math.cos(w * 3.0), math.sin(w * 3.0)
            # x' = J B x with B = diag(1, 2): p' = -2 q, q' = p
            exact = np.array([[c, -w * s], [s / w, c]])
        errs.append(np.abs(g.end - exact).max())
    rates = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
    assert all(3.5 < r < 4.5 for r in rates), rates


def test_off_grid_evaluation_is_accurate():
    g = rotation_path(1, 2.0, steps=256)
    t = np.array([0.1234, 1.5, 1.999])
    got = g.at(t)
    for k, tk in enumerate(t):
        want = np.array([[math.cos(tk), -math.sin(tk)], [math.sin(tk), math.cos(tk)]])
        assert np.allclose(got[k], want, atol=1e-9)


def test_iterate_path_end_is_power():
    rng = np.random.default_rng(3)
    g = integrate_fundamental(LinearSystem.random_positive(rng, 2, tau=0.8), 512)
    for m in (2, 3, 5):
        gm = iterate_path(g, m)
        assert np.allclose(gm.end, np.linalg.matrix_power(g.end, m), atol=1e-9)
        assert gm.tau == pytest.approx(m * g.tau)
        assert gm.steps == m * g.steps
        # the grid values and the evaluator agree
        idx = g.steps + 17
        assert np.allclose(gm.at(gm.times[idx])[0], gm.mats[idx], atol=1e-10)


def test_iterate_of_iterate_composes():
    rng = np.random.default_rng(4)
    g = integrate_fundamental(LinearSystem.random_positive(rng, 1, tau=1.1), 256)
    a = iterate_path(iterate_path(g, 2), 3)
    b = iterate_path(g, 6)
    assert np.allclose(a.end, b.end, atol=1e-9)


def test_input_errors():
    with pytest.raises(DomainError):
        LinearSystem.constant(np.eye(2), -1.0)
    with pytest.raises(UnsupportedInputError):
        integrate_fundamental(LinearSystem.constant([[1.0, 1.0], [0.0, 1.0]], 1.0), 64)
    with pytest.raises(DomainError):
        integrate_fundamental(LinearSystem.constant(np.eye(2), 1.0), 4)
    with pytest.raises(DomainError):
        iterate_path(rotation_path(1, 1.0, steps=64), 0)
    bad = LinearSystem(1, 1.0, lambda t: np.zeros((len(t), 3, 3)))
    with pytest.raises(DimensionError):
        bad(np.array([0.0]))


def test_drift_is_reported():
    # a stiff generator on far too few steps fails the drift check
    sys = LinearSystem.constant(np.diag([400.0, 400.0]), 1.0)
    with pytest.warns(RuntimeWarning):
        with pytest.raises(IntegrationAccuracyError):
            integrate_fundamental(sys, 16)


@given(st.integers(min_value=0, max_value=2 ** 31 - 1), st.sampled_from([1, 2, 3]),
       st.sampled_from([128, 1024]))
def test_fundamental_solution_is_symplectic_or_rejected(seed, n, steps):
    rng = np.random.default_rng(seed)
    sys = LinearSystem.random_positive(rng, n, tau=1.0)
    try:
        g = integrate_fundamental(sys, steps)
    except IntegrationAccuracyError:
        # only a coarse grid may be refused
        assert steps == 128
        return
    assert g.drift() <= DEFAULT_TOLERANCES.path_tol
    scale = max(1.0, np.abs(g.end).max() ** 2)
    assert validate_symplectic(g.end, 10 * DEFAULT_TOLERANCES.path_tol * scale)

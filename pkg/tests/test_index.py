import cmath
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from silab import (
    IndexProfile,
    LinearSystem,
    OmegaIndexCache,
    check_positive_lower_bound,
    ekeland_index,
    integrate_fundamental,
    iterate_path,
    iterated_index,
    maslov_index,
    mean_index,
    nullity,
    omega_index,
)
from silab.errors import UnsupportedInputError
from silab.index import OmegaGrid
from silab.symplectic import rotation_path

TWO_PI = 2 * math.pi


def rotor(n, tau, steps=1024, freqs=None):
    return rotation_path(n, tau, freqs, steps)


@pytest.mark.parametrize(
    "tau, expected",
    [
        (TWO_PI, (1, 2)),          # crossing at the end point only
        (TWO_PI + 0.5, (3, 0)),    # one interior full crossing
        (3.0, (1, 0)),             # only the start
        (2 * TWO_PI, (3, 2)),
    ],
)
def test_rotation_maslov(tau, expected):
    assert maslov_index(rotor(1, tau)).as_tuple() == expected


def test_rotation_omega_indices():
    g = rotor(1, TWO_PI)
    # -1 is crossed once, in both complex directions, at t = pi
    assert omega_index(g, -1).as_tuple() == (2, 0)
    # a generic point is passed twice: at t = theta and t = 2 pi - theta
    assert omega_index(g, cmath.exp(0.7j)).as_tuple() == (2, 0)
    assert nullity(g, 1.0) == 2
    assert nullity(g, -1.0) == 0


def test_rotation_n2_additivity():
    g = rotor(2, TWO_PI)
    assert maslov_index(g).as_tuple() == (2, 4)
    h = rotor(2, 2.0, freqs=[1.0, 3.0])
    a = maslov_index(rotor(1, 2.0)).index
    b = maslov_index(rotor(1, 6.0)).index
    assert maslov_index(h).index == a + b


def test_ekeland_shift():
    g = rotor(1, TWO_PI)
    e = ekeland_index(g)
    m = maslov_index(g)
    assert e.index == m.index - g.n
    assert e.nullity == m.nullity


def test_non_convex_path_is_rejected():
    sys = LinearSystem.constant(np.diag([1.0, -1.0]), 1.0)
    g = integrate_fundamental(sys, 256)
    with pytest.raises(UnsupportedInputError):
        maslov_index(g)


def test_cache_mirror_matches_direct():
    rng = np.random.default_rng(11)
    g = integrate_fundamental(LinearSystem.random_positive(rng, 2, tau=2.5), 1024)
    mirrored = OmegaIndexCache(g, mirror=True)
    plain = OmegaIndexCache(g, mirror=False)
    for th in (0.4, 1.9, 2.8):
        assert mirrored.at_angle(TWO_PI - th).as_tuple() == plain.at_angle(TWO_PI - th).as_tuple()
        assert plain.at_angle(th).as_tuple() == plain.at_angle(TWO_PI - th).as_tuple()
    assert len(mirrored) <= len(plain)


def test_iterated_index_routes_agree():
    rng = np.random.default_rng(5)
    g = integrate_fundamental(LinearSystem.random_positive(rng, 2, tau=1.3), 1024)
    for m in (2, 3, 4):
        bott = iterated_index(g, m)
        direct = maslov_index(iterate_path(g, m))
        assert bott.as_tuple() == direct.as_tuple()


def test_profile_is_piecewise_constant_between_breakpoints():
    rng = np.random.default_rng(6)
    g = integrate_fundamental(LinearSystem.random_positive(rng, 1, tau=2.0), 1024)
    prof = IndexProfile(g)
    kind, k = prof.locate(cmath.exp(0.123j))
    assert kind in ("arc", "point")
    cache = OmegaIndexCache(g)
    for th in np.linspace(0.05, TWO_PI - 0.05, 13):
        assert prof(cmath.exp(1j * th)).as_tuple() == cache.at_angle(th).as_tuple()


def test_mean_index_rotation():
    mi = mean_index(rotor(1, TWO_PI))
    assert mi.quadrature == pytest.approx(2.0, abs=1e-9)
    assert abs(mi.limit - 2.0) <= 1.0 / mi.k_limit + 1e-12
    mi2 = mean_index(rotor(2, TWO_PI))
    assert float(mi2) == pytest.approx(4.0, abs=1e-9)


def test_mean_index_grid_independent():
    rng = np.random.default_rng(8)
    g = integrate_fundamental(LinearSystem.random_positive(rng, 2, tau=1.7), 1024)
    prof = IndexProfile(g)
    a = mean_index(g, OmegaGrid.uniform(512), profile=prof).quadrature
    b = mean_index(g, OmegaGrid.uniform(8192), profile=prof).quadrature
    assert a == pytest.approx(prof.integral(), abs=2e-2)
    assert b == pytest.approx(prof.integral(), abs=2e-3)


@given(st.integers(0, 2 ** 31 - 1), st.sampled_from([1, 2]))
def test_positive_lower_bound(seed, n):
    rng = np.random.default_rng(seed)
    g = integrate_fundamental(LinearSystem.random_positive(rng, n, tau=float(rng.uniform(0.3, 3.0))), 1024)
    assert check_positive_lower_bound(g)
    assert maslov_index(g).index >= n


@given(st.integers(0, 2 ** 31 - 1))
def test_iteration_inequalities(seed):
    """``m mean - n <= i_m`` and ``i_m + nu_m <= m mean + n``."""
    rng = np.random.default_rng(seed)
    g = integrate_fundamental(LinearSystem.random_positive(rng, 2, tau=1.0), 1024)
    prof = IndexProfile(g)
    mean = prof.integral()
    ms = np.arange(1, 30)
    i, nu = prof.iterated_many(ms)
    assert np.all(ms * mean - g.n <= i + 1e-9)
    assert np.all(i + nu <= ms * mean + g.n + 1e-9)


@given(st.integers(0, 2 ** 31 - 1))
def test_index_monotone_in_period(seed):
    rng = np.random.default_rng(seed)
    sys = LinearSystem.random_positive(rng, 1, tau=1.0)
    short = integrate_fundamental(sys.restricted(1.0), 512)
    long = integrate_fundamental(sys.restricted(1.6), 1024)
    a, b = maslov_index(short), maslov_index(long)
    assert a.index + a.nullity <= b.index + b.nullity
    assert a.index <= b.index

"""Splitting numbers of symplectic end matrices.

``S+_M(omega)`` and ``S-_M(omega)`` are the jumps of ``theta -> i_{tau, e^{i theta}}``
when leaving ``omega = e^{i theta}`` counterclockwise and clockwise.  The
index is locally constant away from the unit-circle spectrum of ``M``, so the
one-sided limits are read off at ``theta +- eps`` for any ``eps`` below the
spectral gap, and confirmed once at ``eps / 2``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import InternalConsistencyError, ResolutionError, UnsupportedInputError
from .index import OmegaIndexCache, _angle, maslov_index, unit
from .symplectic import LinearSystem, SymplecticPath, integrate_fundamental, iterate_path, standard_J

__all__ = [
    "SplittingPair",
    "SplittingProfile",
    "BottSplitting",
    "KreinBound",
    "Lemma41",
    "eigen_angles",
    "auto_epsilon",
    "splitting_numbers",
    "bott_splitting_check",
    "krein_sum_bound",
    "lemma41_check",
    "path_from_matrix",
]

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class SplittingPair:
    s_plus: int
    s_minus: int
    omega: complex
    nullity: int = 0
    eps: float = 0.0
    source_path: SymplecticPath | None = field(default=None, compare=False, repr=False)

    def __iter__(self):
        return iter((self.s_plus, self.s_minus))

    def as_tuple(self) -> tuple[int, int]:
        return (self.s_plus, self.s_minus)

    @property
    def minus_plus(self) -> int:
        """``nu - S-``, the complementary count at the same point."""
        return self.nullity - self.s_minus

    def within_bounds(self) -> bool:
        return 0 <= self.s_plus <= self.nullity and 0 <= self.s_minus <= self.nullity


def _circ_dist(a, b):
    d = abs(a - b) % TWO_PI
    return min(d, TWO_PI - d)


def eigen_angles(M: np.ndarray, tol: Tolerances = DEFAULT_TOLERANCES) -> list[float]:
    """Sorted angles in ``[0, 2 pi)`` of the unit-circle eigenvalues of ``M``.

    Eigenvalues with modulus within ``unit_circle_tol`` of 1 count; angles
    closer than ``angle_tol`` are merged, and the set is closed under
    conjugation.
    """
    lam = np.linalg.eigvals(np.asarray(M, dtype=float))
    upper = []
    for z in lam[np.abs(np.abs(lam) - 1.0) <= tol.unit_circle_tol]:
        th = abs(math.atan2(z.imag, z.real))
        if th < tol.angle_tol:
            th = 0.0
        elif math.pi - th < tol.angle_tol:
            th = math.pi
        if all(_circ_dist(th, a) >= tol.angle_tol for a in upper):
            upper.append(th)
    full = set(upper) | {(TWO_PI - a) % TWO_PI for a in upper}
    return sorted(full)


def auto_epsilon(angles, theta: float) -> float:
    """``min(1e-3, gap / 8)`` for the angle set augmented by ``theta``."""
    pts = sorted(set(list(angles) + [theta % TWO_PI]))
    if len(pts) < 2:
        return 1e-3
    arr = np.array(pts)
    gaps = np.diff(np.append(arr, arr[0] + TWO_PI))
    gaps = gaps[gaps > 1e-12]
    gap = float(gaps.min()) if len(gaps) else TWO_PI
    return min(1e-3, gap / 8.0)


def splitting_numbers(gamma: SymplecticPath, omega, eps: float | None = None,
                      tol: Tolerances = DEFAULT_TOLERANCES, cache: OmegaIndexCache | None = None,
                      angles: list[float] | None = None, shortcut: bool = True) -> SplittingPair:
    """``(S+, S-)`` of ``gamma(tau)`` at ``omega`` from one-sided omega-indices.

    Parameters
    ----------
    gamma : SymplecticPath
        Path of a positive definite system ending at ``M``.
    omega : complex
        Unit-circle point; anything off the circle by more than ``1e-12``
        raises :class:`DomainError`.
    eps : float, optional
        Angular offset.  Defaults to ``min(1e-3, gap / 8)`` with ``gap`` the
        smallest separation among the eigen-angles of ``M`` and ``omega``.
    cache : OmegaIndexCache, optional
        Shared memo of omega-indices of ``gamma``.
    shortcut : bool
        Return ``(0, 0)`` without any index evaluation when ``omega`` is not
        an eigenvalue of ``M``.

    Raises
    ------
    ResolutionError
        If the jumps at ``eps`` and ``eps / 2`` differ.
    """
    omega = unit(omega)
    theta = _angle(omega)
    if angles is None:
        angles = eigen_angles(gamma.end, tol)
    on_spectrum = any(_circ_dist(theta, a) < tol.angle_tol for a in angles)
    if shortcut and not on_spectrum:
        return SplittingPair(0, 0, omega, 0, 0.0, gamma)
    if eps is None:
        eps = auto_epsilon(angles, theta)
    cache = cache if cache is not None else OmegaIndexCache(gamma, tol)
    centre = cache.at_angle(theta)
    jumps = []
    for e in (eps, 0.5 * eps):
        up = cache.at_angle(theta + e).index - centre.index
        down = cache.at_angle(theta - e).index - centre.index
        jumps.append((up, down))
    if jumps[0] != jumps[1]:
        raise ResolutionError(
            f"splitting numbers at angle {theta:.12g} change under eps halving: "
            f"{jumps[0]} at eps={eps:.3g}, {jumps[1]} at eps={eps / 2:.3g}"
        )
    return SplittingPair(jumps[0][0], jumps[0][1], omega, centre.nullity, float(eps), gamma)


class SplittingProfile:
    """Splitting pairs at every unit-circle eigenvalue of ``gamma(tau)``."""

    def __init__(self, gamma: SymplecticPath, tol: Tolerances = DEFAULT_TOLERANCES,
                 cache: OmegaIndexCache | None = None):
        self.gamma = gamma
        self.tol = tol
        self.cache = cache if cache is not None else OmegaIndexCache(gamma, tol)
        self.angles = eigen_angles(gamma.end, tol)
        self.pairs = {
            a: splitting_numbers(gamma, cmath.exp(1j * a), tol=tol, cache=self.cache, angles=self.angles)
            for a in self.angles
        }

    def at(self, omega) -> SplittingPair:
        """Pair at ``omega``; ``(0, 0)`` off the spectrum."""
        omega = unit(omega)
        theta = _angle(omega)
        for a, p in self.pairs.items():
            if _circ_dist(theta, a) < self.tol.angle_tol:
                return p
        return SplittingPair(0, 0, omega, 0, 0.0, self.gamma)

    def minus_plus(self, omega) -> int:
        return self.at(omega).minus_plus

    def __iter__(self):
        return iter(self.pairs.items())

    def __len__(self):
        return len(self.pairs)


@dataclass(frozen=True)
class BottSplitting:
    m: int
    z: complex
    lhs: tuple[int, int]
    rhs: tuple[int, int]
    terms: tuple = field(default=(), repr=False)

    @property
    def equal(self) -> bool:
        return self.lhs == self.rhs

    def __bool__(self):
        return self.equal


def bott_splitting_check(gamma: SymplecticPath, m: int, z=1.0, tol: Tolerances = DEFAULT_TOLERANCES,
                         profile: SplittingProfile | None = None,
                         iterate_cache: OmegaIndexCache | None = None) -> BottSplitting:
    """Compare ``S_{M^m}(z)`` on the iteration path with the sum over the m-th roots of z.

    The left side is computed from omega-indices of ``iterate_path(gamma, m)``;
    the right side from omega-indices of ``gamma`` itself.  Pass ``profile``
    and ``iterate_cache`` to reuse index evaluations across calls.
    """
    m = int(m)
    z = unit(z)
    profile = profile if profile is not None else SplittingProfile(gamma, tol)
    if iterate_cache is None:
        iterate_cache = OmegaIndexCache(iterate_path(gamma, m), tol)
    elif iterate_cache.gamma.tau != m * gamma.tau:
        raise UnsupportedInputError("iterate_cache belongs to a different iteration path")
    tilde = iterate_cache.gamma
    lhs = splitting_numbers(tilde, z, tol=tol, cache=iterate_cache)
    th = _angle(z)
    terms = tuple(profile.at(cmath.exp(1j * (th + TWO_PI * k) / m)) for k in range(m))
    rhs = (sum(t.s_plus for t in terms), sum(t.s_minus for t in terms))
    return BottSplitting(m, z, lhs.as_tuple(), rhs, terms)


@dataclass(frozen=True)
class KreinBound:
    total: int
    n: int
    open_arc: int
    at_one: int
    at_minus_one: int

    @property
    def holds(self) -> bool:
        return self.total <= self.n

    def __iter__(self):
        return iter((self.total, self.holds))


def krein_sum_bound(gamma: SymplecticPath, tol: Tolerances = DEFAULT_TOLERANCES,
                    profile: SplittingProfile | None = None) -> KreinBound:
    """``sum_{theta in (0, pi)} S-(e^{i theta}) + (nu - S-)(1) + (nu - S-)(-1)`` against ``n``."""
    profile = profile if profile is not None else SplittingProfile(gamma, tol)
    open_arc = sum(p.s_minus for a, p in profile if 0.0 < a < math.pi)
    one = profile.minus_plus(1.0)
    minus_one = profile.minus_plus(-1.0)
    return KreinBound(open_arc + one + minus_one, gamma.n, open_arc, one, minus_one)


@dataclass(frozen=True)
class Lemma41:
    applicable: bool
    index: int
    double_index: int
    double_nullity: int
    s_plus_double: int
    n: int

    @property
    def lhs(self) -> int:
        return self.double_index + 2 * self.s_plus_double - self.double_nullity

    @property
    def holds(self) -> bool:
        return (not self.applicable) or self.lhs >= self.n

    def __bool__(self):
        return self.holds


def lemma41_check(gamma: SymplecticPath, tol: Tolerances = DEFAULT_TOLERANCES,
                  double_cache: OmegaIndexCache | None = None) -> Lemma41:
    """``i_{2 tau} + 2 S+_{M^2}(1) - nu_{2 tau} >= n`` for paths with ``i_tau >= n``.

    When ``i_tau < n`` the record is marked not applicable and holds vacuously.
    """
    i1 = maslov_index(gamma, tol).index
    if double_cache is None:
        double_cache = OmegaIndexCache(iterate_path(gamma, 2), tol)
    two = double_cache.at_angle(0.0)
    s = splitting_numbers(double_cache.gamma, 1.0, tol=tol, cache=double_cache)
    return Lemma41(i1 >= gamma.n, i1, two.index, two.nullity, s.s_plus, gamma.n)


def path_from_matrix(M, steps: int = 1024, tol: Tolerances = DEFAULT_TOLERANCES) -> SymplecticPath:
    """A convex path ending at ``M``: ``gamma(t) = exp(t J B)`` with ``B = -J log M``.

    Only matrices whose real logarithm gives a symmetric positive definite
    ``B`` are accepted.
    """
    M = np.asarray(M, dtype=float)
    n = M.shape[0] // 2
    J = standard_J(n)
    L = scipy.linalg.logm(M)
    if np.iscomplexobj(L):
        if np.abs(L.imag).max() > 1e-10:
            raise UnsupportedInputError("matrix has no real logarithm")
        L = L.real
    B = -J @ L
    if np.abs(B - B.T).max() > 1e-8 * max(1.0, np.abs(B).max()):
        raise UnsupportedInputError("principal logarithm does not give a symmetric generator")
    B = 0.5 * (B + B.T)
    if np.linalg.eigvalsh(B).min() <= 0:
        raise UnsupportedInputError("principal logarithm does not give a positive definite generator")
    path = integrate_fundamental(LinearSystem.constant(B, 1.0, label="from-matrix"), steps, tol)
    if np.abs(path.end - M).max() > 1e-6 * max(1.0, np.abs(M).max()):
        raise InternalConsistencyError("synthesized path misses the requested end matrix")
    return path

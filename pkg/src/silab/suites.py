"""Randomized suites of convex paths and the checks run over them."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT_TOLERANCES, Tolerances
from .index import IndexProfile, OmegaIndexCache, maslov_index
from .splitting import SplittingProfile, bott_splitting_check, eigen_angles, krein_sum_bound, lemma41_check
from .symplectic import LinearSystem, SymplecticPath, integrate_fundamental, iterate_path

__all__ = ["SuiteCase", "random_suite", "BottRow", "SuiteReport", "run_bott_suite"]


@dataclass(frozen=True)
class SuiteCase:
    label: str
    system: LinearSystem
    path: SymplecticPath


def random_suite(seed: int = 0, count: int = 50, dims=(1, 2), steps: int = 1024,
                 tau_range=(0.5, 1.5), tol: Tolerances = DEFAULT_TOLERANCES) -> list[SuiteCase]:
    """Deterministic random positive definite systems, cycling through ``dims``.

    Each case draws its own period from ``tau_range`` so that the end
    matrices cover elliptic, hyperbolic and mixed spectra.
    """
    rng = np.random.default_rng(seed)
    cases = []
    for c in range(int(count)):
        n = dims[c % len(dims)]
        tau = float(rng.uniform(*tau_range))
        sys = LinearSystem.random_positive(rng, n, tau=tau)
        cases.append(SuiteCase(f"case-{c:03d}-n{n}", sys, integrate_fundamental(sys, steps, tol)))
    return cases


@dataclass(frozen=True)
class BottRow:
    case: str
    m: int
    angle: float
    lhs: tuple
    rhs: tuple

    @property
    def equal(self) -> bool:
        return self.lhs == self.rhs


@dataclass
class SuiteReport:
    bott: list = field(default_factory=list)
    iterated: list = field(default_factory=list)   # (case, m, bott pair, direct pair)
    lower_bound: list = field(default_factory=list)  # (case, i, n)
    splitting_bounds: list = field(default_factory=list)  # (case, angle, s+, s-, nu)
    krein: list = field(default_factory=list)  # (case, total, n)
    lemma41: list = field(default_factory=list)  # (case, applicable, lhs, n)

    @property
    def bott_ok(self) -> bool:
        return all(r.equal for r in self.bott)

    @property
    def iterated_ok(self) -> bool:
        return all(a == b for _, _, a, b in self.iterated)

    @property
    def lower_bound_ok(self) -> bool:
        return all(i >= n for _, i, n in self.lower_bound)

    @property
    def splitting_bounds_ok(self) -> bool:
        return all(0 <= sp <= nu and 0 <= sm <= nu for _, _, sp, sm, nu in self.splitting_bounds)

    @property
    def krein_ok(self) -> bool:
        return all(t <= n for _, t, n in self.krein)

    @property
    def lemma41_ok(self) -> bool:
        return all((not app) or lhs >= n for _, app, lhs, n in self.lemma41)

    @property
    def passed(self) -> bool:
        return (self.bott_ok and self.iterated_ok and self.lower_bound_ok and self.splitting_bounds_ok
                and self.krein_ok and self.lemma41_ok)


def _test_angles(M: np.ndarray, tol: Tolerances) -> list[float]:
    return sorted(set(eigen_angles(M, tol)) | {0.0, math.pi})


def run_bott_suite(cases: list[SuiteCase], m_max: int = 6, tol: Tolerances = DEFAULT_TOLERANCES,
                   extras: bool = True) -> SuiteReport:
    """Bott splitting identity at every eigen-angle of ``M^m``, ``m <= m_max``.

    Also compares the two routes of the iterated index and, with ``extras``,
    the lower bound ``i >= n``, the splitting bounds, the Krein-type sum and
    the doubled-iterate inequality on each case.
    """
    rep = SuiteReport()
    for case in cases:
        g = case.path
        base = OmegaIndexCache(g, tol)
        split = SplittingProfile(g, tol, cache=base)
        prof = IndexProfile(g, tol, cache=base)
        caches = {}
        for m in range(1, int(m_max) + 1):
            cache = base if m == 1 else OmegaIndexCache(iterate_path(g, m), tol)
            caches[m] = cache
            Mm = np.linalg.matrix_power(g.end, m)
            for th in _test_angles(Mm, tol):
                r = bott_splitting_check(g, m, cmath.exp(1j * th), tol, profile=split, iterate_cache=cache)
                rep.bott.append(BottRow(case.label, m, th, r.lhs, r.rhs))
            direct = cache.at_angle(0.0) if m > 1 else maslov_index(g, tol)
            rep.iterated.append((case.label, m, prof.iterated(m).as_tuple(), direct.as_tuple()))
        if extras:
            i1 = caches[1].at_angle(0.0).index
            rep.lower_bound.append((case.label, i1, g.n))
            for a, p in split:
                rep.splitting_bounds.append((case.label, a, p.s_plus, p.s_minus, p.nullity))
            rep.krein.append((case.label, krein_sum_bound(g, tol, split).total, g.n))
            l41 = lemma41_check(g, tol, double_cache=caches.get(2))
            rep.lemma41.append((case.label, l41.applicable, l41.lhs, g.n))
    return rep

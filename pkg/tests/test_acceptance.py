"""Acceptance checks, one test per criterion.

Each test records a single PASS/FAIL line; the lines are repeated in the
terminal summary of the pytest run.
"""
import math
import time
import warnings

import numpy as np
import pytest

from conftest import record_criterion
from silab import (
    ConvexBody,
    DEFAULT_TOLERANCES,
    characteristic_to_u,
    count_theorem_check,
    covering_injection_check,
    dual_action,
    ellipsoid_characteristics,
    index_intervals,
    index_jump_search,
    maslov_index,
    mean_index,
    prepare_orbit,
)
from silab.bodies import standard_perturbation
from silab.index import IndexProfile
from silab.orbits import ResonanceWarning, critical_value
from silab.pipeline import find_and_prepare
from silab.suites import random_suite, run_bott_suite
from silab.verifier import recheck_certificate

ALPHA = 1.5
SUITE_SEED = 0
SUITE_SIZE = 50
M_MAX = 6
POSITIVE_SYSTEMS = 201
MEAN_K = 200
MEAN_TOL = 1e-2
MEAN_FLOOR = 2.0 - 1e-9
RESIDUAL_TOL = 1e-6
HALF_PERIOD_TOL = 1e-8
CRITICAL_REL_TOL = 1e-6
K_MAX = 20
M_INTERVALS = 20
N_MAX = 10_000
SEEDS = 200

E2 = (1.0, 2 ** 0.25)
E3 = (1.0, 2 ** 0.25, 3 ** (1 / 3))


@pytest.fixture(scope="module")
def suite():
    t0 = time.perf_counter()
    cases = random_suite(SUITE_SEED, SUITE_SIZE, dims=(1, 2))
    report = run_bott_suite(cases, m_max=M_MAX)
    return cases, report, time.perf_counter() - t0


_found = {}


def found(name):
    """Finder results on the test bodies, computed once per session."""
    if name not in _found:
        if name == "E2":
            body = ConvexBody.ellipsoid(E2, ALPHA)
        elif name == "E3":
            body = ConvexBody.ellipsoid(E3, ALPHA)
        else:
            body = ConvexBody.perturbed(E2, 0.02, standard_perturbation(2, 0.02), ALPHA)
        t0 = time.perf_counter()
        res, datas = find_and_prepare(body, ALPHA, seed_count=SEEDS, seed=0)
        _found[name] = (body, res, datas, time.perf_counter() - t0)
    return _found[name]


def _entries(datas):
    sym = [d for d in datas if d.symmetry_class == "symmetric"]
    asym = [d for d in datas if d.symmetry_class == "asymmetric"]
    pairs = [(len(sym) + j, len(sym) + len(asym) + j) for j in range(len(asym))]
    return sym + asym + [d.doubled() for d in asym], pairs


def test_criterion_01_bott_identity(suite):
    cases, rep, elapsed = suite
    bad = [r for r in rep.bott if not r.equal]
    dims = sorted({c.path.dim for c in cases})
    ok = len(cases) >= 50 and dims == [2, 4] and not bad and elapsed < 120
    record_criterion(1, ok, f"{len(rep.bott)} identities on {len(cases)} paths in Sp{dims}, "
                            f"m<={M_MAX}, mismatches={len(bad)}, {elapsed:.0f}s (suite incl. extras)")
    assert not bad
    assert len(cases) >= 50


def test_criterion_02_iterated_routes(suite):
    _, rep, elapsed = suite
    bad = [r for r in rep.iterated if r[2] != r[3]]
    record_criterion(2, not bad, f"{len(rep.iterated)} (path, m) pairs, disagreements={len(bad)}")
    assert not bad


def test_criterion_03_positive_bound():
    t0 = time.perf_counter()
    cases = random_suite(seed=7, count=POSITIVE_SYSTEMS, dims=(1, 2, 3), steps=512)
    bad = []
    for c in cases:
        i = maslov_index(c.path).index
        if i < c.path.n:
            bad.append((c.label, i))
    elapsed = time.perf_counter() - t0
    ok = not bad and len(cases) >= 200
    record_criterion(3, ok, f"{len(cases)} systems n in {{1,2,3}}, violations={len(bad)}, {elapsed:.0f}s")
    assert ok, bad


def test_criterion_04_splitting_bounds(suite):
    _, rep, _ = suite
    neg = [r for r in rep.splitting_bounds if not (0 <= r[2] <= r[4] and 0 <= r[3] <= r[4])]
    krein = [r for r in rep.krein if r[1] > r[2]]
    ok = not neg and not krein
    record_criterion(4, ok, f"{len(rep.splitting_bounds)} splitting pairs, bound violations={len(neg)}; "
                            f"sum bound violations={len(krein)} of {len(rep.krein)}")
    assert ok


def test_criterion_05_doubled_iterate_inequality(suite):
    _, rep, _ = suite
    applicable = [r for r in rep.lemma41 if r[1]]
    bad = [r for r in applicable if r[2] < r[3]]
    ok = not bad and len(applicable) == len(rep.lemma41)
    record_criterion(5, ok, f"{len(applicable)} paths with i>=n, violations={len(bad)}")
    assert not bad
    # every convex path satisfies i >= n, so every suite path must be tested
    assert len(applicable) == len(rep.lemma41)


def test_criterion_06_mean_index(suite):
    cases, _, _ = suite
    loose = DEFAULT_TOLERANCES.replace(mean_tol=1e9)
    rows = []
    for c in cases:
        t0 = time.perf_counter()
        mi = mean_index(c.path, k_limit=MEAN_K, tol=loose)
        rows.append((c.label, mi.quadrature, mi.limit, None, time.perf_counter() - t0))
    for radii in ((1.0,), E2, E3):
        body = ConvexBody.ellipsoid(radii, ALPHA)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ResonanceWarning)
            orbits = ellipsoid_characteristics(body)
        for x in orbits:
            t0 = time.perf_counter()
            d = prepare_orbit(body, x, ALPHA, steps=2048)
            mi = mean_index(d.path, k_limit=MEAN_K, tol=loose, profile=d.profile)
            rows.append((f"E{len(radii)}/{x.label}", mi.quadrature, mi.limit, mi.quadrature,
                         time.perf_counter() - t0))
    gaps = [(lab, abs(q - lim)) for lab, q, lim, _, _ in rows]
    off = [(lab, g) for lab, g in gaps if g > MEAN_TOL]
    low = [(lab, m) for lab, _, _, m, _ in rows if m is not None and m < MEAN_FLOOR]
    slow = [lab for lab, *_, dt in rows if dt > 60]
    worst = max(gaps, key=lambda r: r[1])
    ok = not off and not low and not slow
    detail = (f"{len(rows)} cases, worst |quadrature - i_k/k| at k={MEAN_K}: {worst[1]:.4f} ({worst[0]}); "
              f"over {MEAN_TOL}: {[f'{lab}:{g:.4f}' for lab, g in off]}; ellipsoid mean < 2: {len(low)}")
    record_criterion(6, ok, detail)
    assert not low
    assert not slow
    assert not off, detail


@pytest.mark.slow
def test_criterion_07_ellipsoid_counts():
    lines, ok = [], True
    total = 0.0
    for name, n in (("E2", 2), ("E3", 3)):
        body, res, datas, elapsed = found(name)
        total += elapsed
        resid = max(x.residual() for x in res.orbits)
        half = 0.0
        for x in res.orbits:
            t = x.curve.times
            half = max(half, float(np.max(np.linalg.norm(x.curve(t + 0.5 * x.tau) + x.x, axis=1))))
        good = len(res.orbits) == n and resid <= RESIDUAL_TOL and half <= HALF_PERIOD_TOL
        ok &= good
        lines.append(f"{name}: {len(res.orbits)} orbits, residual {resid:.1e}, half-period {half:.1e}")
    ok &= total < 600
    record_criterion(7, ok, "; ".join(lines) + f"; {total:.0f}s")
    assert ok


@pytest.mark.slow
def test_criterion_08_critical_values():
    worst, count = 0.0, 0
    for name in ("E2", "E3"):
        body, res, _, _ = found(name)
        for x in res.orbits:
            for m in (1, 2, 3):
                u = characteristic_to_u(x, m, ALPHA)
                got = dual_action(body, ALPHA, u)
                want = critical_value(ALPHA, x.action, m)
                worst = max(worst, abs(got - want) / abs(want))
                count += 1
    ok = worst <= CRITICAL_REL_TOL
    record_criterion(8, ok, f"{count} (orbit, m) pairs, worst relative error {worst:.1e}")
    assert ok


@pytest.mark.slow
def test_criterion_09_interval_structure():
    problems, checked = [], 0
    for name in ("E2", "E3", "E2-perturbed"):
        body, _, datas, _ = found(name)
        for k, d in enumerate(datas):
            ivs = index_intervals(body, ALPHA, d, M_INTERVALS, orbit_id=k)
            checked += 1
            for a, b in zip(ivs, ivs[1:]):
                if b.lo - a.lo < 2:
                    problems.append((name, d.label, a.m, "gap"))
                if b.lo <= a.hi:
                    problems.append((name, d.label, a.m, "overlap"))
    ok = not problems
    record_criterion(9, ok, f"{checked} orbits, m<={M_INTERVALS}, gap/overlap violations={len(problems)}")
    assert ok, problems


@pytest.mark.slow
def test_criterion_10_covering_injection():
    lines, ok = [], True
    for name in ("E2", "E3"):
        _, _, datas, _ = found(name)
        rep = covering_injection_check(datas, K_MAX)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            controls = [covering_injection_check(datas[:j] + datas[j + 1:], K_MAX, warn=False).covered
                        for j in range(len(datas))]
        good = rep.covered and rep.injective and not any(controls)
        ok &= good
        lines.append(f"{name}: covered={rep.covered} injective={rep.injective} "
                     f"drop-one still covered={sum(controls)}/{len(controls)}")
    record_criterion(10, ok, "; ".join(lines))
    assert ok


@pytest.mark.slow
def test_criterion_11_jump_certificates():
    _, _, datas, _ = found("E2")
    entries, pairs = _entries(datas)
    t0 = time.perf_counter()
    certs = index_jump_search(entries, N_MAX, pairs=pairs)
    elapsed = time.perf_counter() - t0
    again = index_jump_search(entries, N_MAX, pairs=pairs)
    same = [(c.N, c.m, c.checks) for c in certs] == [(c.N, c.m, c.checks) for c in again]
    valid = all(c.valid and c.doubling_ok for c in certs)
    rechecked = all(recheck_certificate(c, entries) for c in certs[:50])
    ok = len(certs) >= 3 and valid and same and rechecked and elapsed < 300
    record_criterion(11, ok, f"{len(certs)} certificates N<={N_MAX} (first N={certs[0].N if certs else None}), "
                             f"valid={valid}, recheck={rechecked}, repeat identical={same}, {elapsed:.0f}s")
    assert ok


@pytest.mark.slow
def test_criterion_12_count_verdict():
    lines, ok = [], True
    total_time = 0.0
    for name in ("E2", "E3", "E2-perturbed"):
        body, _, datas, elapsed = found(name)
        t0 = time.perf_counter()
        rep = count_theorem_check(datas, N_MAX)
        total_time += elapsed + time.perf_counter() - t0
        good = rep.total >= body.n and rep.verdict == "pass"
        ok &= good
        lines.append(f"{name}: total={rep.total} n={body.n} verdict={rep.verdict}")
    ok &= total_time < 900
    record_criterion(12, ok, "; ".join(lines) + f"; {total_time:.0f}s incl. orbit search")
    assert ok

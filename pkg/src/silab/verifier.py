"""Instance checks of the index-theoretic argument for the orbit count.

Every closed characteristic is linearized along its ``H = j^alpha`` flow; its
index data for all iterates then comes from one :class:`IndexProfile`.  On
top of that data this module builds

* index intervals with the iteration inequalities asserted,
* the covering of the levels ``2k - 2 + n`` with a distinct-representative
  matching,
* common index jump certificates, and
* the final count report with its injection table.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .bodies import ConvexBody
from .config import DEFAULT_ALPHA, DEFAULT_STEPS, DEFAULT_TOLERANCES, Tolerances
from .errors import InternalConsistencyError, UnsupportedInputError
from .index import IndexPair, IndexProfile, OmegaIndexCache, iterated_index
from .orbits import ClosedCharacteristic
from .splitting import SplittingProfile
from .symplectic import SymplecticPath, integrate_fundamental, iterate_path, linearize_orbit

__all__ = [
    "IncompleteOrbitSetWarning",
    "OrbitData",
    "IndexInterval",
    "CoveringReport",
    "JumpCertificate",
    "HalfPathCheck",
    "CountReport",
    "prepare_orbit",
    "index_intervals",
    "covering_injection_check",
    "index_jump_search",
    "recheck_certificate",
    "symmetric_halfpath_check",
    "count_theorem_check",
    "is_elliptic",
]


class IncompleteOrbitSetWarning(UserWarning):
    """Some index level is not reached by any supplied orbit."""


def is_elliptic(M: np.ndarray, tol: float = DEFAULT_TOLERANCES.elliptic_tol) -> bool:
    """All eigenvalues of ``M`` on the unit circle.

    Tested on ``M + M^{-1}``, whose eigenvalues ``lambda + 1/lambda`` are
    real in ``[-2, 2]`` exactly for unit-circle ``lambda``; unlike the
    eigenvalues of ``M`` they stay well conditioned at Jordan blocks.
    """
    M = np.asarray(M, dtype=float)
    mu = np.linalg.eigvals(M + np.linalg.inv(M))
    return bool(np.all(np.abs(mu.imag) <= tol) and np.all(np.abs(mu.real) <= 2.0 + tol))


@dataclass(eq=False)
class OrbitData:
    """Index data of one closed characteristic or of its doubled iterate.

    With ``factor = 2`` the entry stands for ``(2 tau, x^2)``: its m-th
    iterate is the (2m)-th iterate of the underlying path.
    """

    label: str
    path: SymplecticPath
    profile: IndexProfile
    splitting: SplittingProfile
    orbit: ClosedCharacteristic | None = None
    factor: int = 1
    symmetry_class: str | None = None

    @property
    def n(self) -> int:
        return self.path.n

    def index(self, ms) -> tuple[np.ndarray, np.ndarray]:
        """``(i^m, nu^m)`` arrays for the iterates ``ms``."""
        return self.profile.iterated_many(self.factor * np.asarray(ms, dtype=np.int64))

    def pair(self, m: int) -> IndexPair:
        return self.profile.iterated(self.factor * int(m))

    @property
    def mean(self) -> float:
        return self.factor * self.profile.integral()

    @property
    def end(self) -> np.ndarray:
        return np.linalg.matrix_power(self.path.end, self.factor)

    @property
    def s_plus(self) -> int:
        """``S+`` at 1 of the entry's end matrix, by the Bott sum over factor-th roots of 1."""
        return sum(self.splitting.at(np.exp(2j * math.pi * k / self.factor)).s_plus
                   for k in range(self.factor))

    def doubled(self) -> "OrbitData":
        return OrbitData(self.label + "^2", self.path, self.profile, self.splitting, self.orbit,
                         2 * self.factor, self.symmetry_class)


def prepare_orbit(body: ConvexBody, orbit: ClosedCharacteristic, alpha: float = DEFAULT_ALPHA,
                  steps: int = DEFAULT_STEPS, tol: Tolerances = DEFAULT_TOLERANCES,
                  label: str | None = None) -> OrbitData:
    """Linearize ``orbit``, integrate its associated path and tabulate its indices."""
    system = linearize_orbit(body, orbit, alpha)
    if not system.positive_definite:
        raise UnsupportedInputError(f"linearization along {orbit.label or 'orbit'} is not positive definite")
    path = integrate_fundamental(system, steps, tol)
    cache = OmegaIndexCache(path, tol)
    profile = IndexProfile(path, tol, cache=cache)
    split = SplittingProfile(path, tol, cache=cache)
    return OrbitData(label or orbit.label or "orbit", path, profile, split, orbit,
                     1, orbit.symmetry_class)


@dataclass(frozen=True)
class IndexInterval:
    orbit: int
    m: int
    lo: int
    hi: int

    @property
    def nullity(self) -> int:
        return self.hi - self.lo

    def covers(self, level: int) -> bool:
        """``lo <= level <= hi - 1``: the level condition of the injection map."""
        return self.lo <= level <= self.hi - 1


def _assert_iteration_inequalities(label, lo, nu, n, mean):
    for k in range(len(lo)):
        if not (0 <= nu[k] <= 2 * n):
            raise InternalConsistencyError(f"{label}: nullity {nu[k]} out of range at m={k + 1}")
    for k in range(len(lo) - 1):
        m = k + 1
        if lo[k + 1] - lo[k] < 2:
            raise InternalConsistencyError(
                f"{label}: index gap i_{m + 1} - i_{m} = {lo[k + 1] - lo[k]} < 2")
        if not lo[k + 1] > lo[k] + nu[k] - 1:
            raise InternalConsistencyError(
                f"{label}: interval of iterate {m + 1} overlaps iterate {m}")
    if mean < 2.0 - 1e-9:
        raise InternalConsistencyError(f"{label}: mean index {mean:.12g} < 2")


def index_intervals(body: ConvexBody | None, alpha: float, orbit: ClosedCharacteristic | OrbitData,
                    m_max: int, tol: Tolerances = DEFAULT_TOLERANCES, orbit_id: int = 0,
                    steps: int = DEFAULT_STEPS, cross_check_max: int = 4) -> list[IndexInterval]:
    """Intervals ``[i_{m tau}, i_{m tau} + nu_{m tau}]`` for ``m = 1..m_max``.

    The first ``cross_check_max`` iterates are also counted directly on the
    iteration path.  Index gaps below 2, overlapping consecutive intervals
    or a mean index below 2 raise :class:`InternalConsistencyError`; for a
    convex body none of these can happen.
    """
    data = orbit if isinstance(orbit, OrbitData) else prepare_orbit(body, orbit, alpha, steps, tol)
    ms = np.arange(1, int(m_max) + 1)
    lo, nu = data.index(ms)
    for m in range(1, min(cross_check_max, m_max) + 1):
        direct = iterated_index(data.path, data.factor * m, tol, cross_check=True, profile=data.profile)
        if direct.as_tuple() != (int(lo[m - 1]), int(nu[m - 1])):
            raise InternalConsistencyError(f"{data.label}: tabulated index differs at m={m}")
    _assert_iteration_inequalities(data.label, lo, nu, data.n, data.mean)
    return [IndexInterval(orbit_id, int(m), int(a), int(a + b)) for m, a, b in zip(ms, lo, nu)]


def _iterates_reaching(data: OrbitData, level: int) -> int:
    # i^m >= m mean - n, so iterates past (level + n) / mean + 1 lie above level
    return max(1, int(math.ceil((level + data.n) / max(data.mean, 1e-9))) + 2)


def _candidates(datas, levels):
    """For every level, the (entry, m) pairs whose interval contains it."""
    out = {lv: [] for lv in levels}
    top = max(levels) if levels else 0
    for k, d in enumerate(datas):
        ms = np.arange(1, _iterates_reaching(d, top) + 1)
        lo, nu = d.index(ms)
        for lv in levels:
            hit = np.nonzero((lo <= lv) & (lv <= lo + nu - 1))[0]
            out[lv].extend((k, int(ms[j])) for j in hit)
    return out


def _match(levels, cands):
    """Maximum matching of levels to distinct (entry, m) pairs."""
    cols = sorted({c for lv in levels for c in cands[lv]})
    col_id = {c: j for j, c in enumerate(cols)}
    rows, cidx = [], []
    for r, lv in enumerate(levels):
        for c in cands[lv]:
            rows.append(r)
            cidx.append(col_id[c])
    if not cols:
        return {}
    graph = csr_matrix((np.ones(len(rows)), (rows, cidx)), shape=(len(levels), len(cols)))
    match = maximum_bipartite_matching(graph, perm_type="column")
    return {levels[r]: cols[j] for r, j in enumerate(match) if j >= 0}


@dataclass
class CoveringReport:
    n: int
    k_max: int
    candidates: dict
    matching: dict
    uncovered: list

    @property
    def covered(self) -> bool:
        return not self.uncovered

    @property
    def injective(self) -> bool:
        return len(self.matching) == self.k_max and len(set(self.matching.values())) == self.k_max

    @property
    def verdict(self) -> bool:
        return self.covered and self.injective


def covering_injection_check(datas: list[OrbitData], k_max: int, warn: bool = True) -> CoveringReport:
    """Check that every level ``2k - 2 + n``, ``k <= k_max``, lies in some index interval.

    Candidates per ``k`` are the ``(orbit, m)`` with
    ``i_{m tau} <= 2k - 2 + n <= i_{m tau} + nu_{m tau} - 1``; the matching
    assigns distinct pairs to distinct ``k``.
    """
    if not datas:
        raise UnsupportedInputError("no orbits supplied")
    n = datas[0].n
    ks = list(range(1, int(k_max) + 1))
    levels = [2 * k - 2 + n for k in ks]
    cands = _candidates(datas, levels)
    uncovered = [k for k, lv in zip(ks, levels) if not cands[lv]]
    if uncovered and warn:
        warnings.warn(f"levels for k={uncovered[:5]}... not covered; the orbit set may be incomplete",
                      IncompleteOrbitSetWarning, stacklevel=2)
    by_level = _match(levels, cands)
    matching = {k: by_level[lv] for k, lv in zip(ks, levels) if lv in by_level}
    return CoveringReport(n, int(k_max), {k: cands[lv] for k, lv in zip(ks, levels)}, matching, uncovered)


_CONDITIONS = ("nu_before", "nu_after", "before_top", "after_bottom", "middle_lower", "middle_upper")


@dataclass(frozen=True)
class JumpCertificate:
    """A tuple ``(N, m_1..m_q)`` with the six jump conditions for each entry.

    ``checks[k]`` maps each condition name to its truth value; ``elliptic``
    lists, per entry, whether an equality case occurred and whether the end
    matrix is then elliptic.
    """

    N: int
    m: tuple
    checks: tuple
    elliptic: tuple = ()
    doubling: tuple = ()
    labels: tuple = ()

    @property
    def valid(self) -> bool:
        return all(all(c.values()) for c in self.checks) and all(ok for _, ok in self.elliptic)

    @property
    def doubling_ok(self) -> bool:
        return all(ok for _, _, ok in self.doubling)


def _conditions(d: OrbitData, N, m, n, base):
    """Evaluate the six jump conditions for entry ``d`` at arrays ``N``, ``m``."""
    i1, nu1, sp = base
    ib, nb = d.index(2 * m - 1)
    ia, na = d.index(2 * m + 1)
    ic, nc = d.index(2 * m)
    return {
        "nu_before": nb == nu1,
        "nu_after": na == nu1,
        "before_top": ib + nb == 2 * N - (i1 + 2 * sp - nu1),
        "after_bottom": ia == 2 * N + i1,
        "middle_lower": ic >= 2 * N - n,
        "middle_upper": ic + nc <= 2 * N + n,
    }, (ic, nc)


def _base(d: OrbitData):
    i1, nu1 = d.pair(1)
    return int(i1), int(nu1), int(d.s_plus)


def index_jump_search(datas: list[OrbitData], N_max: int, window: int = 2,
                      pairs: list[tuple[int, int]] = (), tol: Tolerances = DEFAULT_TOLERANCES,
                      limit: int | None = None) -> list[JumpCertificate]:
    """All ``N <= N_max`` admitting a common index jump for the entries ``datas``.

    Parameters
    ----------
    datas : list of OrbitData
        The entries ``gamma_1..gamma_q``; doubled asymmetric entries are
        included as ``OrbitData.doubled()``.
    window : int
        Candidates ``m_k`` range over ``round(N / mean_k) +- window``.
    pairs : list of (int, int)
        ``(root, doubled)`` entry positions; each certificate records
        whether ``m_root = 2 m_doubled`` can be chosen.
    limit : int, optional
        Stop after this many certificates.
    """
    if not datas:
        return []
    n = datas[0].n
    if any(d.mean <= 0 for d in datas):
        raise UnsupportedInputError("common index jumps need positive mean indices")
    Ns = np.arange(1, int(N_max) + 1)
    offs = np.arange(-window, window + 1)
    per_entry = []
    for d in datas:
        base = _base(d)
        centre = np.rint(Ns / d.mean).astype(np.int64)
        mm = np.maximum(centre[:, None] + offs[None, :], 1)
        NN = np.broadcast_to(Ns[:, None], mm.shape)
        conds, mid = _conditions(d, NN.ravel(), mm.ravel(), n, base)
        ok = np.logical_and.reduce([conds[c] for c in _CONDITIONS]).reshape(mm.shape)
        per_entry.append((mm, ok))
    feasible = np.logical_and.reduce([ok.any(axis=1) for _, ok in per_entry])
    certs = []
    for row in np.nonzero(feasible)[0]:
        options = [sorted(set(mm[row][ok[row]].tolist())) for mm, ok in per_entry]
        chosen = [opt[0] for opt in options]
        doubling = []
        for r, dbl in pairs:
            good = [(a, a // 2) for a in options[r] if a % 2 == 0 and a // 2 in options[dbl]]
            if good:
                chosen[r], chosen[dbl] = good[0]
            doubling.append((r, dbl, bool(good)))
        certs.append(_certificate(datas, int(Ns[row]), chosen, doubling, tol))
        if limit and len(certs) >= limit:
            break
    return certs


def _certificate(datas, N, chosen, doubling, tol):
    n = datas[0].n
    checks, ell = [], []
    for d, m in zip(datas, chosen):
        conds, (ic, nc) = _conditions(d, np.array([N]), np.array([m]), n, _base(d))
        checks.append({k: bool(v[0]) for k, v in conds.items()})
        equality = bool(ic[0] == 2 * N - n or ic[0] + nc[0] == 2 * N + n)
        ell.append((equality, (not equality) or is_elliptic(d.end, tol.elliptic_tol)))
    return JumpCertificate(N, tuple(int(m) for m in chosen), tuple(checks), tuple(ell),
                           tuple(doubling), tuple(d.label for d in datas))


def recheck_certificate(cert: JumpCertificate, datas: list[OrbitData]) -> bool:
    """Re-derive the six conditions with per-root Bott sums instead of the tabulated counts."""
    n = datas[0].n
    for d, m in zip(datas, cert.m):
        i1, nu1 = d.pair(1)
        sp = d.s_plus
        ib, nb = d.pair(2 * m - 1)
        ia, na = d.pair(2 * m + 1)
        ic, nc = d.pair(2 * m)
        N = cert.N
        ok = (nb == nu1 and na == nu1 and ib + nb == 2 * N - (i1 + 2 * sp - nu1)
              and ia == 2 * N + i1 and ic >= 2 * N - n and ic + nc <= 2 * N + n)
        if not ok:
            return False
    return True


@dataclass(frozen=True)
class HalfPathCheck:
    applicable: bool
    defect: float
    full: tuple = ()
    half_doubled: tuple = ()

    @property
    def holds(self) -> bool:
        return (not self.applicable) or (self.defect <= 1e-6 and self.full == self.half_doubled)

    def __bool__(self):
        return self.holds


def symmetric_halfpath_check(body: ConvexBody, alpha: float, orbit: ClosedCharacteristic | OrbitData,
                             steps: int = DEFAULT_STEPS, tol: Tolerances = DEFAULT_TOLERANCES) -> HalfPathCheck:
    """``gamma(t + tau/2) = gamma(t) gamma(tau/2)`` on the grid, and matching index data.

    The index pair of the full path is compared with the twice iterated
    half path.  Orbits not classified symmetric are reported as not
    applicable.
    """
    if isinstance(orbit, OrbitData):
        orbit_obj, path = orbit.orbit, orbit.path
    else:
        orbit_obj, path = orbit, None
    if orbit_obj is None or orbit_obj.symmetry_class != "symmetric":
        return HalfPathCheck(False, float("nan"))
    if path is None:
        path = integrate_fundamental(linearize_orbit(body, orbit_obj, alpha), steps + steps % 2, tol)
    if path.steps % 2:
        raise UnsupportedInputError("half-period check needs an even step count")
    h = path.steps // 2
    G = path.mats
    lhs = G[h:]
    rhs = G[: h + 1] @ G[h]
    scale = max(1.0, float(np.abs(G).max()))
    defect = float(np.abs(lhs - rhs).max() / scale)
    half = integrate_fundamental(path.system.restricted(0.5 * path.tau), h, tol)
    half2 = iterated_index(half, 2, tol, cross_check=True)
    full = OmegaIndexCache(path, tol).at_angle(0.0)
    return HalfPathCheck(True, defect, full.as_tuple(), half2.as_tuple())


@dataclass
class CountReport:
    n: int
    q1: int
    q2: int
    labels: list
    certificate: JumpCertificate | None
    injection: dict
    checks: dict
    verdict: str
    diagnostics: list = field(default_factory=list)

    @property
    def total(self) -> int:
        return self.q1 + 2 * self.q2

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"


def count_theorem_check(datas: list[OrbitData], N_max: int = 10_000,
                        tol: Tolerances = DEFAULT_TOLERANCES) -> CountReport:
    """Assemble the orbit count with its injection table.

    ``datas`` holds one entry per geometric orbit class: symmetric orbits,
    and one representative per asymmetric pair ``{x, -x}``.  Doubled
    entries for asymmetric pairs are added here.  The injection table is
    built at the smallest certificate ``N`` for the levels
    ``2(N - s + 1) - 2 + n``, ``s = 1..n``.

    The verdict is ``"pass"`` when ``q1 + 2 q2 >= n`` and the table is
    complete and consistent, ``"inconclusive"`` otherwise; a convex
    symmetric body cannot violate the count, so failures point at an
    incomplete orbit set.
    """
    if not datas:
        raise UnsupportedInputError("no orbits supplied")
    n = datas[0].n
    sym = [d for d in datas if d.symmetry_class == "symmetric"]
    asym = [d for d in datas if d.symmetry_class == "asymmetric"]
    other = [d for d in datas if d.symmetry_class not in ("symmetric", "asymmetric")]
    diagnostics = []
    if other:
        diagnostics.append(f"{len(other)} orbit(s) without a symmetry class were ignored")
    roots = sym + asym
    q1, q2 = len(sym), len(asym)
    entries = roots + [d.doubled() for d in asym]
    pairs = [(q1 + j, q1 + q2 + j) for j in range(q2)]
    labels = [d.label for d in entries]
    certs = index_jump_search(entries, N_max, pairs=pairs, tol=tol, limit=1)
    if not certs:
        diagnostics.append(f"no common index jump with N <= {N_max}")
        return CountReport(n, q1, q2, labels, None, {}, {}, "inconclusive", diagnostics)
    cert = certs[0]
    N = cert.N
    levels = [2 * (N - s + 1) - 2 + n for s in range(1, n + 1)]
    cands = _candidates(roots, levels)
    by_level = _match(levels, cands)
    table = {}
    for s, lv in zip(range(1, n + 1), levels):
        if lv in by_level:
            table[s] = by_level[lv]
    checks = {
        "certificate_valid": cert.valid,
        "doubling": cert.doubling_ok,
        "table_complete": len(table) == n,
        "injective": len(set(table.values())) == len(table),
    }
    mult_ok = True
    for s, (k, m) in table.items():
        mk = cert.m[k]
        allowed = {2 * mk} if k < q1 else {2 * mk - 1, 2 * mk}
        if m not in allowed:
            mult_ok = False
            diagnostics.append(f"s={s}: m(s)={m} not in {sorted(allowed)} for entry {labels[k]}")
    checks["iterate_pinned"] = mult_ok
    sym_hits = sum(1 for k, _ in table.values() if k < q1)
    asym_hits = len(table) - sym_hits
    checks["symmetric_classes_once"] = sym_hits <= q1 and len({k for k, _ in table.values() if k < q1}) == sym_hits
    checks["asymmetric_classes_twice"] = asym_hits <= 2 * q2
    total = q1 + 2 * q2
    checks["count"] = total >= n
    verdict = "pass" if all(checks.values()) else "inconclusive"
    if not checks["table_complete"]:
        diagnostics.append("some level of the injection table has no orbit; orbit set may be incomplete")
    return CountReport(n, q1, q2, labels, cert, table, checks, verdict, diagnostics)

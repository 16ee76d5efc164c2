"""omega-indices, nullities and their iteration theory for convex paths.

For a path generated by a positive definite system every crossing form is
positive definite, so

    i_{tau,omega}(gamma) = n [omega = 1] + sum_{0 < t < tau} dim ker(gamma(t) - omega I).

Crossings are located by scanning the smallest singular value of
``gamma(t) - omega I`` on the path grid, pruning with a Lipschitz bound, and
refining recursively with partial RK4 steps until the time window drops
below ``refine_window * tau``.
"""
from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import DomainError, InternalConsistencyError, ResolutionError, UnsupportedInputError
from .symplectic import SymplecticPath, iterate_path

__all__ = [
    "IndexPair",
    "CrossingRecord",
    "OmegaGrid",
    "IndexProfile",
    "OmegaIndexCache",
    "MeanIndex",
    "unit",
    "nullity",
    "omega_index",
    "maslov_index",
    "ekeland_index",
    "iterated_index",
    "mean_index",
    "check_positive_lower_bound",
]

TWO_PI = 2.0 * math.pi
_SUBSAMPLES = 17
_STRIDE = 8
_MAX_SUBSAMPLES = 4353
_MAX_LEVELS = 40
_MAX_INTERVALS = 4096


def unit(omega) -> complex:
    """Normalize a unit-circle point given as a complex number."""
    omega = complex(omega)
    if abs(abs(omega) - 1.0) > 1e-12:
        raise DomainError(f"{omega} is not on the unit circle")
    return omega / abs(omega)


def _angle(omega: complex) -> float:
    return math.atan2(omega.imag, omega.real) % TWO_PI


@dataclass(frozen=True)
class CrossingRecord:
    t: float
    omega: complex
    multiplicity: int
    refined: bool = True
    low_confidence: bool = False
    sigma: float = 0.0


@dataclass(frozen=True)
class IndexPair:
    """``(index, nullity)``; unpacks like a tuple."""

    index: int
    nullity: int
    crossings: tuple = field(default=(), compare=False, repr=False)

    def __iter__(self):
        return iter((self.index, self.nullity))

    def as_tuple(self) -> tuple:
        return (self.index, self.nullity)

    @property
    def low_confidence(self) -> bool:
        return any(c.low_confidence for c in self.crossings)


def _sigmas(mats: np.ndarray, omega: complex) -> np.ndarray:
    """Singular values of ``mats - omega I`` in ascending order, shape (k, d)."""
    A = mats.astype(complex)
    idx = np.arange(A.shape[-1])
    A[..., idx, idx] -= omega
    return np.linalg.svd(A, compute_uv=False)[..., ::-1]


def _kernel_dim(sig: np.ndarray, scale: float, tol: Tolerances, located: bool = False) -> tuple[int, bool]:
    """Count singular values below ``rank_tol * max(scale, 1)``.

    The count is flagged as doubtful when some singular value sits within a
    factor 10 of the threshold.  At a located crossing the smallest values
    were driven down by refinement, so only those above the threshold count
    against confidence.
    """
    thr = tol.rank_tol * max(scale, 1.0)
    k = int(np.count_nonzero(sig <= thr))
    lower = thr if located else thr / 10.0
    doubtful = bool(np.any((sig > lower) & (sig < thr * 10.0)))
    return k, doubtful


def nullity(gamma: SymplecticPath, omega=1.0, tol: Tolerances = DEFAULT_TOLERANCES) -> int:
    """Complex dimension of ``ker(gamma(tau) - omega I)``."""
    omega = unit(omega)
    M = gamma.end
    sig = _sigmas(M[None], omega)[0]
    return _kernel_dim(sig, np.linalg.norm(M, 2), tol)[0]


def _speed(gamma: SymplecticPath, t: np.ndarray, mats: np.ndarray) -> np.ndarray:
    """Upper bound for ``|d/dt gamma(t)|_2`` at the given samples."""
    A = gamma.generator_at(t)
    return np.linalg.norm(A @ mats, axis=(1, 2))


def _floor(sv, tol: Tolerances) -> np.ndarray:
    """Half the kernel threshold ``rank_tol * max(|gamma|, 1)`` at each sample.

    ``|gamma - omega|_2 + 1`` bounds ``|gamma|_2`` from above, which keeps the
    pruning conservative.
    """
    return 0.5 * tol.rank_tol * np.maximum(sv[:, -1] + 1.0, 1.0)


def _candidate_cells(t, sig, speed, floor=0.0):
    """Indices i such that a zero of sigma_min may lie in [t_i, t_{i+1}].

    ``speed`` bounds the derivative of sigma_min at the sample points; the
    factor 1.25 covers its variation across one cell.  A cell is dropped when
    the Lipschitz lower bound ``(s_l + s_r - L w) / 2`` exceeds ``floor``.
    """
    width = np.diff(t)
    lip = 1.25 * np.maximum(speed[:-1], speed[1:])
    floor = np.broadcast_to(floor, sig.shape)
    return np.nonzero(sig[:-1] + sig[1:] - lip * width <= floor[:-1] + floor[1:] + 1e-300)[0]


def _merge(cells, t):
    """Merge adjacent candidate cells into intervals [(a, b), ...]."""
    out = []
    for i in cells:
        a, b = t[i], t[i + 1]
        if out and abs(out[-1][1] - a) <= 1e-15 * max(1.0, abs(a)):
            out[-1][1] = b
        else:
            out.append([a, b])
    return out


def _scan_crossings(gamma: SymplecticPath, omega: complex, tol: Tolerances) -> list[CrossingRecord]:
    tau = gamma.tau
    window = tol.refine_window * tau
    t = gamma.times
    speed = _speed(gamma, t, gamma.mats)
    # singular values on a coarse sub-grid; each coarse cell takes the largest
    # speed sampled on its fine points as its Lipschitz constant
    stride = _STRIDE if len(t) > 4 * _STRIDE else 1
    sel = np.unique(np.append(np.arange(0, len(t), stride), len(t) - 1))
    cell_speed = np.maximum.reduceat(speed, sel[:-1])
    cell_speed = np.append(cell_speed, speed[-1])
    sv = _sigmas(gamma.mats[sel], omega)
    sig = sv[:, 0]
    tc = t[sel]
    lip_pts = np.maximum(cell_speed, np.append(speed[0], cell_speed[:-1]))
    intervals = _merge(_candidate_cells(tc, sig, lip_pts, _floor(sv, tol)), tc)
    intervals = [[lo, hi, _SUBSAMPLES] for lo, hi in intervals]
    final = []
    level = 0
    while intervals:
        level += 1
        if level > _MAX_LEVELS or len(intervals) > _MAX_INTERVALS:
            raise ResolutionError(
                f"crossing refinement at omega={omega:.6g} did not isolate crossings "
                f"({len(intervals)} open windows after {level} levels); use more steps"
            )
        final.extend(iv[:2] for iv in intervals if iv[1] - iv[0] <= window)
        todo = [iv for iv in intervals if iv[1] - iv[0] > window]
        if not todo:
            break
        intervals = _refine_level(gamma, omega, tol, todo, final)
        if any(iv[2] < 0 for iv in intervals):
            level = _MAX_LEVELS
            intervals = [[lo, hi, -c] if c < 0 else [lo, hi, c] for lo, hi, c in intervals]
        intervals.sort()
        merged = []
        for iv in intervals:
            if merged and iv[0] <= merged[-1][1] * (1 + 1e-15) + 1e-300:
                merged[-1][1] = max(merged[-1][1], iv[1])
                merged[-1][2] = max(merged[-1][2], iv[2])
            else:
                merged.append(iv)
        intervals = merged
    records = []
    if not final:
        return records
    centers = np.array([0.5 * (a + b) for a, b in final])
    probe = np.concatenate([np.linspace(a, b, 5) for a, b in final])
    pm = gamma.at(probe)
    ps = _sigmas(pm, omega)
    pnorm = np.linalg.svd(pm, compute_uv=False)[:, 0]
    for k, tc in enumerate(centers):
        sl = slice(5 * k, 5 * k + 5)
        j = int(np.argmin(ps[sl, 0]))
        tstar = probe[sl][j]
        if tstar <= window or tstar >= tau - window:
            continue
        mult, doubtful = _kernel_dim(ps[sl][j], pnorm[sl][j], tol, located=True)
        if mult == 0:
            continue
        records.append(CrossingRecord(float(tstar), omega, mult, True, doubtful, float(ps[sl][j][0])))
    return records


def _require_convex(gamma: SymplecticPath):
    if not gamma.positive_definite:
        raise UnsupportedInputError(
            "omega-indices are computed by crossing counts, valid only for paths of "
            "positive definite systems"
        )


def omega_index(gamma: SymplecticPath, omega=1.0, tol: Tolerances = DEFAULT_TOLERANCES) -> IndexPair:
    """``(i_{tau,omega}(gamma), nu_{tau,omega}(gamma))`` with crossing records."""
    _require_convex(gamma)
    omega = unit(omega)
    crossings = _scan_crossings(gamma, omega, tol)
    base = gamma.n if abs(omega - 1.0) < 1e-14 else 0
    idx = base + sum(c.multiplicity for c in crossings)
    nu = nullity(gamma, omega, tol)
    pair = IndexPair(idx, nu, tuple(crossings))
    if pair.low_confidence:
        warnings.warn(f"near-degenerate crossing at omega={omega:.6g}", RuntimeWarning, stacklevel=2)
    return pair


def maslov_index(gamma: SymplecticPath, tol: Tolerances = DEFAULT_TOLERANCES) -> IndexPair:
    return omega_index(gamma, 1.0, tol)


def ekeland_index(gamma: SymplecticPath, tol: Tolerances = DEFAULT_TOLERANCES) -> IndexPair:
    """Ekeland index and nullity, ``(i_tau - n, nu_tau)`` for convex paths."""
    i, nu = maslov_index(gamma, tol)
    return IndexPair(i - gamma.n, nu)


def check_positive_lower_bound(gamma: SymplecticPath, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
    return maslov_index(gamma, tol).index >= gamma.n


class OmegaIndexCache:
    """Memoized ``omega -> omega_index(gamma, omega)`` for one path.

    For a real path ``ker(gamma(t) - conj(omega))`` is the conjugate of
    ``ker(gamma(t) - omega)``, so both points share every crossing; with
    ``mirror`` the lower half circle is served from the upper half.
    """

    def __init__(self, gamma: SymplecticPath, tol: Tolerances = DEFAULT_TOLERANCES, mirror: bool = True):
        _require_convex(gamma)
        self.gamma = gamma
        self.tol = tol
        self.mirror = mirror
        self._memo: dict[float, IndexPair] = {}

    def _key(self, theta: float) -> float:
        theta %= TWO_PI
        if self.mirror and theta > math.pi:
            theta = TWO_PI - theta
        return round(theta, 15)

    def at_angle(self, theta: float) -> IndexPair:
        key = self._key(theta)
        hit = self._memo.get(key)
        if hit is None:
            hit = omega_index(self.gamma, cmath.exp(1j * key), self.tol)
            self._memo[key] = hit
        return hit

    def __call__(self, omega) -> IndexPair:
        return self.at_angle(_angle(unit(omega)))

    def __len__(self):
        return len(self._memo)


class IndexProfile:
    """The piecewise-constant function ``omega -> i_{tau,omega}(gamma)``.

    It can only jump at unit-circle eigenvalues of ``gamma(tau)``, so it is
    stored as one value per breakpoint and one value per open arc between
    consecutive breakpoints.  Values on the lower half circle are mirrored
    from the upper half (``i_{omega} = i_{conj(omega)}`` for real paths).
    """

    def __init__(self, gamma: SymplecticPath, tol: Tolerances = DEFAULT_TOLERANCES,
                 cache: "OmegaIndexCache | None" = None):
        _require_convex(gamma)
        self.gamma = gamma
        self.tol = tol
        self.n = gamma.n
        self.cache = cache if cache is not None else OmegaIndexCache(gamma, tol)
        self.breakpoints = self._breakpoints(gamma.end, tol)
        bps = np.array(self.breakpoints)
        upper = bps[bps <= math.pi]
        upper_points = [self.cache.at_angle(b) for b in upper]
        upper_arcs = [self.cache.at_angle(0.5 * (a + b)) for a, b in zip(upper[:-1], upper[1:])]
        ends = np.append(bps[1:], TWO_PI)
        self.point_values = []
        for b in bps:
            mb = b if b <= math.pi else TWO_PI - b
            self.point_values.append(upper_points[int(np.argmin(np.abs(upper - mb)))])
        self.arc_values = []
        for a, b in zip(bps, ends):
            mid = 0.5 * (a + b)
            mid = mid if mid <= math.pi else TWO_PI - mid
            k = int(np.searchsorted(upper, mid, side="right")) - 1
            self.arc_values.append(upper_arcs[k])
        self._bps = bps
        self._pi = np.array([p.index for p in self.point_values])
        self._pn = np.array([p.nullity for p in self.point_values])
        self._ai = np.array([a.index for a in self.arc_values])

    @staticmethod
    def _breakpoints(M, tol: Tolerances) -> list[float]:
        lam = np.linalg.eigvals(M)
        near = lam[np.abs(np.abs(lam) - 1.0) < tol.breakpoint_tol]
        angles = [0.0, math.pi]
        for z in near:
            th = math.atan2(z.imag, z.real)
            for a in (abs(th), TWO_PI - abs(th)):
                a %= TWO_PI
                if min(abs(a), abs(a - math.pi), abs(a - TWO_PI)) < tol.angle_tol:
                    continue
                angles.append(a)
        angles.sort()
        merged = []
        for a in angles:
            if merged and a - merged[-1] < tol.angle_tol:
                continue
            merged.append(a)
        # keep the set exactly symmetric under conjugation
        upper = [a for a in merged if a <= math.pi]
        full = upper + [TWO_PI - a for a in reversed(upper) if 0.0 < a < math.pi]
        return full

    def locate(self, omega) -> tuple[str, int]:
        th = _angle(unit(omega))
        d = np.abs(self._bps - th)
        d = np.minimum(d, TWO_PI - d)
        j = int(np.argmin(d))
        if d[j] < self.tol.angle_tol:
            return "point", j
        k = int(np.searchsorted(self._bps, th, side="right")) - 1
        return "arc", k

    def __call__(self, omega) -> IndexPair:
        kind, j = self.locate(omega)
        if kind == "point":
            return self.point_values[j]
        return IndexPair(self.arc_values[j].index, 0)

    def iterated(self, m: int, z=1.0) -> IndexPair:
        """``(i_{m tau, z}, nu_{m tau, z})`` of the iteration path by the Bott sum."""
        m = int(m)
        if m < 1:
            raise DomainError("m must be positive")
        th = _angle(unit(z))
        roots = [cmath.exp(1j * (th + TWO_PI * k) / m) for k in range(m)]
        vals = [self(w) for w in roots]
        return IndexPair(sum(v.index for v in vals), sum(v.nullity for v in vals))

    def iterated_many(self, ms) -> tuple[np.ndarray, np.ndarray]:
        """Vectorized ``(i_{m tau}, nu_{m tau})`` at z = 1 for an array of m."""
        ms = np.asarray(ms, dtype=np.int64)
        if np.any(ms < 1):
            raise DomainError("m must be positive")
        eps = self.tol.angle_tol
        bps = self._bps
        ends = np.append(bps[1:], TWO_PI)
        mm = ms[:, None].astype(float)

        def count_below(x):
            # number of k in [0, m) with 2 pi k / m < x, for x in [-eps, 2 pi]
            return np.clip(np.ceil(np.asarray(x)[None, :] * mm / TWO_PI - 1e-12), 0, mm)

        lo, hi = bps - eps, bps + eps
        pts = count_below(hi) - count_below(lo)
        arcs = count_below(ends - eps) - count_below(bps + eps)
        idx = pts @ self._pi + arcs @ self._ai
        nu = pts @ self._pn
        return idx.astype(np.int64), nu.astype(np.int64)

    def integral(self) -> float:
        """Exact circle average of the profile (breakpoints carry no measure)."""
        ends = np.append(self._bps[1:], TWO_PI)
        return float(np.sum(self._ai * (ends - self._bps)) / TWO_PI)

    def splitting(self, j: int) -> tuple[int, int]:
        """``(S+, S-)`` at breakpoint j from the adjacent arc values."""
        r = len(self._bps)
        p = self._pi[j]
        return int(self._ai[j] - p), int(self._ai[(j - 1) % r] - p)


def iterated_index(gamma: SymplecticPath, m: int, tol: Tolerances = DEFAULT_TOLERANCES,
                   cross_check: bool | None = None, profile: IndexProfile | None = None) -> IndexPair:
    """Index of the m-th iteration path through the Bott-type sum over roots of unity.

    With ``cross_check`` (default for m <= 8) the result is compared with the
    crossing count on :func:`iterate_path` and any difference raises
    :class:`InternalConsistencyError`.
    """
    m = int(m)
    if m < 1:
        raise DomainError("m must be positive")
    prof = profile if profile is not None else IndexProfile(gamma, tol)
    bott = prof.iterated(m)
    if cross_check is None:
        cross_check = m <= 8
    if cross_check:
        direct = maslov_index(iterate_path(gamma, m), tol)
        if direct.as_tuple() != bott.as_tuple():
            raise InternalConsistencyError(
                f"iterated index mismatch at m={m}: Bott sum {bott.as_tuple()} "
                f"vs iterate crossings {direct.as_tuple()}"
            )
        return direct
    return bott


@dataclass(frozen=True)
class OmegaGrid:
    """Sorted unit-circle sample angles in [0, 2 pi), always containing 0 and pi."""

    thetas: np.ndarray

    @classmethod
    def uniform(cls, resolution: int = 4096) -> "OmegaGrid":
        resolution = max(2, int(resolution) + int(resolution) % 2)
        return cls(np.arange(resolution) * (TWO_PI / resolution))

    @property
    def resolution(self) -> int:
        return len(self.thetas)

    @property
    def points(self) -> np.ndarray:
        return np.exp(1j * self.thetas)


@dataclass(frozen=True)
class MeanIndex:
    value: float
    quadrature: float
    limit: float
    ratios: np.ndarray
    k_limit: int

    def __float__(self):
        return self.value


def mean_index(gamma: SymplecticPath, grid: OmegaGrid | None = None, k_limit: int | None = None,
               tol: Tolerances = DEFAULT_TOLERANCES, profile: IndexProfile | None = None) -> MeanIndex:
    """Mean index per period by two routes.

    ``quadrature`` is the midpoint rule for ``(1/2pi) int_U i_{tau,omega} d omega``
    on ``grid``; ``limit`` is ``i_{k tau}/k`` at ``k = k_limit``.  Since
    ``|i_{k tau} - k mean| <= n`` the default ``k_limit`` is ``200 n``.
    """
    grid = grid or OmegaGrid.uniform(4096)
    prof = profile if profile is not None else IndexProfile(gamma, tol)
    th = grid.thetas
    ends = np.append(th[1:], TWO_PI)
    mids = 0.5 * (th + ends)
    # integrand is constant between breakpoints: one table lookup per cell
    k = np.searchsorted(prof._bps, mids, side="right") - 1
    quad = float(np.sum(prof._ai[k] * (ends - th)) / TWO_PI)
    k_limit = int(k_limit or 200 * gamma.n)
    ks = np.arange(1, k_limit + 1)
    idx, _ = prof.iterated_many(ks)
    ratios = idx / ks
    limit = float(ratios[-1])
    if abs(quad - limit) > tol.mean_tol:
        raise ResolutionError(
            f"mean index estimates disagree: quadrature {quad:.6f} vs i_k/k {limit:.6f} at "
            f"k={k_limit}; refine the omega grid or raise k_limit"
        )
    return MeanIndex(quad, quad, limit, ratios, k_limit)


def _refine_level(gamma, omega, tol, todo, final):
    """Resample every open window and keep the sub-pieces that may hold a zero.

    Pieces that are numerically singular throughout are moved to ``final``.
    A returned negative sample count marks a window that cannot shrink any
    further.
    """
    lo = np.array([iv[0] for iv in todo])
    hi = np.array([iv[1] for iv in todo])
    cnt = np.array([iv[2] for iv in todo], dtype=np.int64)
    starts = np.concatenate([[0], np.cumsum(cnt)[:-1]])
    total = int(cnt.sum())
    owner = np.repeat(np.arange(len(todo)), cnt)
    pos = np.arange(total) - starts[owner]
    spacing = ((hi - lo) / (cnt - 1))[owner]
    ts = lo[owner] + pos * spacing
    last = pos == cnt[owner] - 1
    ts[last] = hi[owner[last]]
    mats = gamma.at(ts)
    sv = _sigmas(mats, omega)
    s = sv[:, 0]
    floor = _floor(sv, tol)
    v = _speed(gamma, ts, mats)
    lip = 1.25 * np.maximum(v[:-1], v[1:])
    keep = s[:-1] + s[1:] - lip * np.diff(ts) <= floor[:-1] + floor[1:] + 1e-300
    keep &= ~last[:-1]
    cells = np.nonzero(keep)[0]
    if len(cells) == 0:
        return []
    brk = np.nonzero(np.diff(cells) != 1)[0]
    run_lo = cells[np.concatenate([[0], brk + 1])]
    run_hi = cells[np.concatenate([brk, [len(cells) - 1]])] + 1
    bounds = np.empty(2 * len(run_lo), dtype=np.int64)
    bounds[0::2] = run_lo
    bounds[1::2] = run_hi + 1
    pad = lambda a: np.append(a, a[-1:])
    vmax = np.maximum.reduceat(pad(v), bounds)[0::2]
    thr = 2.0 * floor
    thr_min = np.minimum.reduceat(pad(thr), bounds)[0::2]
    excess = np.maximum.reduceat(pad(s - thr), bounds)[0::2]
    slack = 1.25 * vmax * spacing[run_lo]
    plateau = (slack <= thr_min) & (excess <= slack)
    parent = owner[run_lo]
    p_lo, p_hi = ts[run_lo], ts[run_hi]
    out = []
    for k in range(len(run_lo)):
        if plateau[k]:
            # the whole piece is numerically singular: a single crossing
            # whose kernel threshold is wider than the refinement window
            final.append([p_lo[k], p_hi[k]])
            continue
        # A zero where sigma_min grows slowly compared with the Lipschitz
        # bound keeps a fixed fraction of the window alive; denser sampling
        # restores the shrinkage.
        j = parent[k]
        c = int(cnt[j])
        stalled = p_hi[k] - p_lo[k] > 0.5 * (hi[j] - lo[j])
        nxt = min(c * 4 - 3, _MAX_SUBSAMPLES) if stalled else _SUBSAMPLES
        if stalled and c >= _MAX_SUBSAMPLES:
            nxt = -nxt
        out.append([p_lo[k], p_hi[k], nxt])
    return out
